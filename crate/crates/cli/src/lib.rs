//! Front ends for the proof engine: batch reports and the session server.

pub mod report;
pub mod server;
