//! Batch checking with human and JSON output.

use std::fmt::Write;

use lfreason::logic::parse_theorem_file;
use lfreason::prover::{check_theorem, Outcome, TheoremReport, Theory};
use lfreason::Signature;
use serde_json::{json, Value};

/// Checks every theorem, in parallel, keeping file order.
pub fn check(sig_src: &str, thm_src: &str, depth: Option<usize>) -> lfreason::Result<Vec<TheoremReport>> {
    let sig = Signature::parse(sig_src)?;
    let file = parse_theorem_file(thm_src, &sig)?;
    let mut th = Theory::new(sig, file.schemas);
    if let Some(d) = depth {
        th.search_depth = d;
    }
    let th = &th;
    Ok(std::thread::scope(|s| {
        let handles: Vec<_> = file.theorems.iter().map(|t| s.spawn(move || check_theorem(th, t))).collect();
        handles.into_iter().map(|h| h.join().expect("checker thread panicked")).collect()
    }))
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {}\n", l)).collect()
}

pub fn human(reports: &[TheoremReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let open = match &r.outcome {
            Outcome::Proved { steps } => {
                let _ = writeln!(out, "{}: proved ({} steps)", r.name, steps);
                continue;
            }
            Outcome::NoProof => {
                let _ = writeln!(out, "{}: no proof", r.name);
                continue;
            }
            Outcome::Failed { index, tactic, pos, error, open } => {
                let _ = writeln!(out, "{}: failed at step {} `{}` ({}): {}", r.name, index, tactic, pos, error);
                open
            }
            Outcome::Incomplete { open } => {
                let _ = writeln!(out, "{}: incomplete, {} open goal(s)", r.name, open.len());
                open
            }
        };
        for (k, g) in open.iter().enumerate() {
            let _ = writeln!(out, "  goal {}:", k + 1);
            out.push_str(&indent(&g.text));
        }
    }
    let proved = reports.iter().filter(|r| r.proved()).count();
    let _ = writeln!(out, "{} of {} theorem(s) proved", proved, reports.len());
    out
}

pub fn json(reports: &[TheoremReport]) -> Value {
    json!({
        "theorems": reports,
        "proved": reports.iter().filter(|r| r.proved()).count(),
        "total": reports.len(),
    })
}
