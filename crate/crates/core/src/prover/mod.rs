//! Proof states and tactics.

pub mod case;
pub mod rules;
pub mod script;
pub mod tactic;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::formula::Formula;
use crate::logic::sequent::Sequent;
use crate::logic::wf::check_sequent_wf;
use crate::schema::Schema;
use crate::signature::Signature;
use crate::subst::Subst;
use crate::syntax::Name;

pub use rules::DEFAULT_SEARCH_DEPTH;
pub use script::{check_file, check_theorem, Goal, Outcome, TheoremReport};
pub use tactic::{parse_tactic, ApplyArg, Tactic};

/// A signature with its context schemas.
#[derive(Clone, Debug)]
pub struct Theory {
    pub sig: Signature,
    pub schemas: BTreeMap<Name, Schema>,
    /// Depth used by `search` without an argument.
    pub search_depth: usize,
}

impl Theory {
    pub fn new(sig: Signature, schemas: BTreeMap<Name, Schema>) -> Self {
        Theory { sig, schemas, search_depth: DEFAULT_SEARCH_DEPTH }
    }
}

/// One subgoal produced by a tactic.
#[derive(Clone, Debug)]
pub struct Child {
    pub seq: Sequent,
    /// Which rule or case produced it.
    pub label: String,
    /// Instantiation of the parent's eigenvariables (case analysis).
    pub unifier: Subst,
    /// Raising applied by block insertion.
    pub raising: Subst,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum NodeState {
    Open,
    /// Closed directly, without children.
    Closed { by: String },
    /// Expanded into the children listed on the node.
    Expanded { by: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct Node {
    pub seq: Sequent,
    pub state: NodeState,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub label: String,
    pub unifier: Subst,
    pub raising: Subst,
}

/// A proof tree; the focus is the first open leaf in depth-first order.
#[derive(Clone, Debug)]
pub struct ProofState {
    pub theorem: Name,
    pub formula: Formula,
    pub nodes: Vec<Node>,
    /// Tactics applied so far, as written.
    pub script: Vec<String>,
    history: Vec<(Vec<Node>, Vec<String>)>,
}

impl ProofState {
    pub fn new(theorem: &str, formula: Formula) -> Self {
        let root = Node {
            seq: Sequent::new(formula.clone()),
            state: NodeState::Open,
            parent: None,
            children: Vec::new(),
            label: String::new(),
            unifier: Subst::new(),
            raising: Subst::new(),
        };
        ProofState { theorem: crate::syntax::name(theorem), formula, nodes: vec![root], script: Vec::new(), history: Vec::new() }
    }

    /// Open leaves in depth-first order.
    pub fn open(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            match n.state {
                NodeState::Open => out.push(i),
                NodeState::Closed { .. } => {}
                NodeState::Expanded { .. } => stack.extend(n.children.iter().rev()),
            }
        }
        out
    }

    pub fn focus(&self) -> Option<usize> {
        self.open().first().copied()
    }

    pub fn is_complete(&self) -> bool {
        self.focus().is_none()
    }

    pub fn current(&self) -> Option<&Sequent> {
        self.focus().map(|i| &self.nodes[i].seq)
    }

    /// Parses and runs one tactic.
    pub fn run(&mut self, th: &Theory, src: &str) -> Result<()> {
        let t = parse_tactic(src)?;
        let text = src.trim().trim_end_matches('.').trim_end().to_string();
        self.apply_as(th, &t, text)
    }

    /// Runs `t` on the focused sequent. On error the state is unchanged.
    pub fn apply(&mut self, th: &Theory, t: &Tactic) -> Result<()> {
        self.apply_as(th, t, t.to_string())
    }

    fn apply_as(&mut self, th: &Theory, t: &Tactic, by: String) -> Result<()> {
        let i = self.focus().ok_or_else(|| Error::tactic("no open goals"))?;
        let children = rules::run(th, &self.nodes[i].seq, t)?;
        for c in &children {
            if let Err(e) = check_sequent_wf(&th.sig, &th.schemas, &c.seq) {
                return Err(Error::tactic(format!("internal error: {} produced an ill-formed sequent: {}", t, e)));
            }
        }
        self.history.push((self.nodes.clone(), self.script.clone()));
        self.script.push(by.clone());
        if children.is_empty() {
            self.nodes[i].state = NodeState::Closed { by };
            return Ok(());
        }
        let mut ids = Vec::new();
        for c in children {
            ids.push(self.nodes.len());
            self.nodes.push(Node {
                seq: c.seq,
                state: NodeState::Open,
                parent: Some(i),
                children: Vec::new(),
                label: c.label,
                unifier: c.unifier,
                raising: c.raising,
            });
        }
        self.nodes[i].children = ids;
        self.nodes[i].state = NodeState::Expanded { by };
        Ok(())
    }

    pub fn undo(&mut self) -> Result<()> {
        let (nodes, script) = self.history.pop().ok_or_else(|| Error::tactic("nothing to undo"))?;
        self.nodes = nodes;
        self.script = script;
        Ok(())
    }

    pub fn can_undo(&self) -> bool {
        !self.history.is_empty()
    }
}
