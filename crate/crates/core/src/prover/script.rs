//! Batch checking of proof scripts in theorem files.

use serde::Serialize;

use crate::error::{Pos, Result};
use crate::logic::file::{parse_theorem_file, Theorem};
use crate::logic::sequent::Sequent;
use crate::prover::{ProofState, Theory};
use crate::signature::Signature;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Proved { steps: usize },
    /// The `index`-th tactic (from 1) failed.
    Failed { index: usize, tactic: String, pos: Pos, error: String, open: Vec<Goal> },
    /// The script ran out with goals still open.
    Incomplete { open: Vec<Goal> },
    NoProof,
}

/// An open sequent, printed and structural.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Goal {
    pub text: String,
    pub sequent: Sequent,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub name: String,
    pub statement: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl TheoremReport {
    pub fn proved(&self) -> bool {
        matches!(self.outcome, Outcome::Proved { .. })
    }
}

fn open_goals(ps: &ProofState) -> Vec<Goal> {
    ps.open()
        .into_iter()
        .map(|i| Goal { text: ps.nodes[i].seq.to_string(), sequent: ps.nodes[i].seq.clone() })
        .collect()
}

/// Replays the theorem's script.
pub fn check_theorem(th: &Theory, t: &Theorem) -> TheoremReport {
    let report = |outcome| TheoremReport { name: t.name.to_string(), statement: t.formula.to_string(), outcome };
    let Some(script) = &t.script else { return report(Outcome::NoProof) };
    let mut ps = ProofState::new(&t.name, t.formula.clone());
    for (k, (src, pos)) in script.iter().enumerate() {
        let failed = |error: String, ps: &ProofState| Outcome::Failed {
            index: k + 1,
            tactic: src.trim().to_string(),
            pos: *pos,
            error,
            open: open_goals(ps),
        };
        if let Err(e) = ps.run(th, src) {
            return report(failed(e.to_string(), &ps));
        }
    }
    if ps.is_complete() {
        report(Outcome::Proved { steps: script.len() })
    } else {
        report(Outcome::Incomplete { open: open_goals(&ps) })
    }
}

/// Parses a theorem file against `sig` and checks every theorem.
pub fn check_file(sig: &Signature, src: &str) -> Result<(Theory, Vec<TheoremReport>)> {
    let file = parse_theorem_file(src, sig)?;
    let th = Theory::new(sig.clone(), file.schemas);
    let reports = file.theorems.iter().map(|t| check_theorem(&th, t)).collect();
    Ok((th, reports))
}
