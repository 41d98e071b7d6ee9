//! Proof sessions behind a JSON request/response protocol.
//!
//! Every request is an object with a `kind` field; every response has
//! `ok`. Errors never invalidate the session.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use serde_json::{json, Map, Value};

use crate::logic::file::{parse_formula, parse_theorem_file, Scope, Theorem};
use crate::logic::ground::ground_valid;
use crate::prover::{NodeState, ProofState, Theory};
use crate::signature::Signature;
use crate::subst::Subst;

/// Bound used by `ground_check` when the request gives none.
pub const DEFAULT_GROUND_BOUND: usize = 4;

pub struct Session {
    pub theory: Theory,
    pub theorems: Vec<Theorem>,
    pub proofs: BTreeMap<String, ProofState>,
    pub current: Option<String>,
    /// Snapshots `(current, proof of current)` taken before each change.
    undo: Vec<(Option<String>, Option<String>, Option<ProofState>)>,
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

fn fail(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure { kind, message: message.into() }
}

type Reply = Result<Value, Failure>;

impl Session {
    pub fn new(sig_src: &str, thm_src: &str, depth: Option<usize>) -> crate::Result<Session> {
        let sig = Signature::parse(sig_src)?;
        let file = parse_theorem_file(thm_src, &sig)?;
        let mut theory = Theory::new(sig, file.schemas);
        if let Some(d) = depth {
            theory.search_depth = d;
        }
        Ok(Session { theory, theorems: file.theorems, proofs: BTreeMap::new(), current: None, undo: Vec::new() })
    }

    fn snapshot(&mut self, target: &str) {
        let prev = self.proofs.get(target).cloned();
        self.undo.push((self.current.clone(), Some(target.to_string()), prev));
    }

    fn start(&mut self, name: &str) -> Reply {
        let t = self
            .theorems
            .iter()
            .find(|t| &*t.name == name)
            .ok_or_else(|| fail("unknown_theorem", format!("no theorem named {}", name)))?;
        let ps = ProofState::new(&t.name, t.formula.clone());
        self.snapshot(name);
        self.proofs.insert(name.to_string(), ps);
        self.current = Some(name.to_string());
        Ok(self.render())
    }

    fn tactic(&mut self, src: &str) -> Reply {
        let cur = self.current.clone().ok_or_else(|| fail("no_theorem", "no theorem started"))?;
        let mut ps = self.proofs[&cur].clone();
        if let Err(e) = ps.run(&self.theory, src) {
            return Err(fail("tactic", e.to_string()));
        }
        self.snapshot(&cur);
        self.proofs.insert(cur, ps);
        Ok(self.render())
    }

    fn undo(&mut self) -> Reply {
        let (current, target, prev) = self.undo.pop().ok_or_else(|| fail("undo", "nothing to undo"))?;
        if let Some(t) = target {
            match prev {
                Some(ps) => self.proofs.insert(t, ps),
                None => self.proofs.remove(&t),
            };
        }
        self.current = current;
        Ok(self.render())
    }

    fn ground_check(&self, formula: &str, bound: usize) -> Reply {
        let th = &self.theory;
        let f = parse_formula(formula, &Scope::closed(&th.sig, &th.schemas)).map_err(|e| fail("parse", e.to_string()))?;
        let v = ground_valid(&f, &th.sig, &th.schemas, bound);
        Ok(json!({ "formula": f.to_string(), "bound": bound, "result": v }))
    }

    /// Notation-level text plus structural JSON of the current proof.
    pub fn render(&self) -> Value {
        let Some(cur) = &self.current else {
            return json!({ "theorem": null, "theorems": self.theorem_names() });
        };
        let ps = &self.proofs[cur];
        let open = ps.open();
        let focus = open.first().map(|&i| sequent_json(ps, i));
        let goals: Vec<Value> = open.iter().map(|&i| sequent_json(ps, i)).collect();
        let tree: Vec<Value> = ps
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let (state, by) = match &n.state {
                    NodeState::Open => ("open", None),
                    NodeState::Closed { by } => ("closed", Some(by.clone())),
                    NodeState::Expanded { by } => ("expanded", Some(by.clone())),
                };
                json!({ "id": i, "parent": n.parent, "children": n.children, "label": n.label, "state": state, "by": by })
            })
            .collect();
        // children of the most recent expansion, for inspecting case splits
        let last = ps
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.state, NodeState::Expanded { .. }))
            .max_by_key(|(_, n)| n.children.iter().max().copied().unwrap_or(0))
            .map(|(_, n)| n.children.iter().map(|&c| sequent_json(ps, c)).collect::<Vec<_>>())
            .unwrap_or_default();
        json!({
            "theorem": cur,
            "statement": ps.formula.to_string(),
            "complete": open.is_empty(),
            "open_goals": open.len(),
            "focus": focus,
            "goals": goals,
            "last_children": last,
            "tree": tree,
            "script": ps.script,
        })
    }

    fn theorem_names(&self) -> Vec<String> {
        self.theorems.iter().map(|t| t.name.to_string()).collect()
    }
}

fn subst_json(s: &Subst) -> Value {
    let m: Map<String, Value> = s.iter().map(|(x, t)| (x.to_string(), Value::String(t.to_string()))).collect();
    Value::Object(m)
}

fn sequent_json(ps: &ProofState, i: usize) -> Value {
    let n = &ps.nodes[i];
    json!({
        "node": i,
        "label": n.label,
        "text": n.seq.to_string(),
        "sequent": n.seq,
        "unifier": subst_json(&n.unifier),
        "raising": subst_json(&n.raising),
    })
}

/// All live sessions. Requests for one session are serialized by its lock;
/// different sessions proceed in parallel.
#[derive(Default)]
pub struct SessionService {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionService {
    pub fn new() -> Self {
        Self::default()
    }

    /// Handles one protocol message.
    pub fn handle(&self, req: &Value) -> Value {
        match self.dispatch(req) {
            Ok(mut v) => {
                if let Value::Object(m) = &mut v {
                    m.insert("ok".into(), Value::Bool(true));
                }
                v
            }
            Err((f, state)) => json!({
                "ok": false,
                "error": { "kind": f.kind, "message": f.message },
                "state": state,
            }),
        }
    }

    fn dispatch(&self, req: &Value) -> Result<Value, (Failure, Value)> {
        let kind = req
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| (fail("bad_request", "missing `kind`"), Value::Null))?;
        if kind == "create_session" {
            return self.create(req).map_err(|f| (f, Value::Null));
        }
        let id = str_field(req, "session").map_err(|f| (f, Value::Null))?;
        let s = self
            .sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| (fail("unknown_session", format!("no session {}", id)), Value::Null))?;
        let mut s = s.lock().unwrap_or_else(|e| e.into_inner());
        let r = match kind {
            "start" => str_field(req, "theorem").and_then(|t| s.start(t)),
            "tactic" => str_field(req, "tactic").and_then(|t| s.tactic(t)),
            "undo" => s.undo(),
            "state" => Ok(s.render()),
            "ground_check" => {
                let bound = match req.get("bound") {
                    None | Some(Value::Null) => Ok(DEFAULT_GROUND_BOUND),
                    Some(b) => b.as_u64().map(|b| b as usize).ok_or_else(|| fail("bad_request", "`bound` must be a natural number")),
                };
                bound.and_then(|b| str_field(req, "formula").and_then(|f| s.ground_check(f, b)))
            }
            k => Err(fail("bad_request", format!("unknown request kind `{}`", k))),
        };
        r.map(|mut v| {
            if let Value::Object(m) = &mut v {
                m.insert("session".into(), Value::String(id.to_string()));
            }
            v
        })
        .map_err(|f| (f, s.render()))
    }

    fn create(&self, req: &Value) -> Reply {
        let sig = source(req, "signature")?;
        let thm = source(req, "theorems")?;
        let depth = match req.get("depth") {
            None | Some(Value::Null) => None,
            Some(d) => match d.as_u64() {
                Some(d) if d >= 1 => Some(d as usize),
                _ => return Err(fail("bad_request", "`depth` must be at least 1")),
            },
        };
        let s = Session::new(&sig, &thm, depth).map_err(|e| fail("parse", e.to_string()))?;
        let names = s.theorem_names();
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.sessions.write().expect("session table poisoned").insert(id.clone(), Arc::new(Mutex::new(s)));
        Ok(json!({ "session": id, "theorems": names }))
    }

    pub fn len(&self) -> usize {
        self.sessions.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn str_field<'a>(req: &'a Value, key: &str) -> Result<&'a str, Failure> {
    req.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| fail("bad_request", format!("missing string field `{}`", key)))
}

/// Source text given inline (`key`) or as a file path (`key_path`).
fn source(req: &Value, key: &str) -> Result<String, Failure> {
    if let Some(s) = req.get(key).and_then(Value::as_str) {
        return Ok(s.to_string());
    }
    let pk = format!("{}_path", key);
    match req.get(&pk).and_then(Value::as_str) {
        Some(p) => std::fs::read_to_string(p).map_err(|e| fail("io", format!("{}: {}", p, e))),
        None => Err(fail("bad_request", format!("missing `{}` or `{}`", key, pk))),
    }
}
