//! Formulas, sequents, well-formedness and the bounded semantics.

pub mod file;
pub mod formula;
pub mod ground;
pub mod sequent;
pub mod wf;

pub use file::{parse_theorem_file, TheoremFile};
pub use formula::{Ann, CtxExpr, Formula, Judgment};
pub use ground::{ground_valid, Verdict};
pub use sequent::{CtxDecl, Hyp, Sequent};
pub use wf::{check_sequent_wf, infer_assignment};
