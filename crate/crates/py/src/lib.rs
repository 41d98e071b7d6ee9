//! Python bindings: signatures, proof states, batch checking and the
//! session protocol.

use std::collections::BTreeMap;

use lfreason::enumerate::enumerate_canonical;
use lfreason::lexer::{tokenize, Cursor};
use lfreason::parse::parse_expr;
use lfreason::logic::file::{parse_formula, Scope};
use lfreason::logic::{ground_valid, parse_theorem_file, Formula};
use lfreason::prover::{check_theorem, ProofState as CoreProofState, Theory};
use lfreason::session::SessionService as CoreService;
use lfreason::typing::check_lf;
use lfreason::Signature as CoreSignature;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde_json::Value;

create_exception!(lfreason_py, LfError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    LfError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let s: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(err)
}

/// A parsed LF signature.
#[pyclass(frozen)]
struct Signature {
    sig: CoreSignature,
}

impl Signature {
    /// Parses `{|- term : family}` and returns its parts.
    fn judgment(&self, term: &str, family: &str) -> PyResult<(lfreason::Term, lfreason::TypeFam)> {
        let schemas = BTreeMap::new();
        let f = parse_formula(&format!("{{|- {} : {}}}", term, family), &Scope::closed(&self.sig, &schemas)).map_err(err)?;
        match f {
            Formula::Atom(j) => Ok((j.term, j.ty)),
            _ => Err(err("expected a judgment")),
        }
    }
}

#[pymethods]
impl Signature {
    #[new]
    fn new(src: &str) -> PyResult<Self> {
        Ok(Signature { sig: CoreSignature::parse(src).map_err(err)? })
    }

    fn families(&self) -> Vec<(String, String)> {
        self.sig.families().map(|(a, k)| (a.to_string(), k.to_string())).collect()
    }

    fn constants(&self) -> Vec<(String, String)> {
        self.sig.objects().map(|(c, a)| (c.to_string(), a.to_string())).collect()
    }

    /// Whether the closed judgment `term : family` is derivable.
    fn check(&self, term: &str, family: &str) -> PyResult<bool> {
        let (m, a) = self.judgment(term, family)?;
        Ok(check_lf(&self.sig, &[], &m, &a))
    }

    /// Closed canonical inhabitants of `family` up to `size`.
    fn inhabitants(&self, family: &str, size: usize) -> PyResult<Vec<String>> {
        let schemas = BTreeMap::new();
        let toks = tokenize(family).map_err(err)?;
        let mut c = Cursor::new(&toks);
        let raw = parse_expr(&mut c).map_err(err)?;
        if !c.at_eof() {
            return Err(err(format!("unexpected {} after family", c.peek())));
        }
        let a = Scope::closed(&self.sig, &schemas).family(&[], &BTreeMap::new(), &raw).map_err(err)?;
        Ok(enumerate_canonical(&self.sig, &[], &a, size).terms.iter().map(|t| t.to_string()).collect())
    }

    fn __len__(&self) -> usize {
        self.sig.len()
    }
}

/// One theorem's proof tree, driven tactic by tactic.
#[pyclass]
struct ProofState {
    theory: Theory,
    state: CoreProofState,
}

#[pymethods]
impl ProofState {
    #[new]
    #[pyo3(signature = (signature, theorems, theorem = None, depth = None))]
    fn new(signature: &str, theorems: &str, theorem: Option<&str>, depth: Option<usize>) -> PyResult<Self> {
        let sig = CoreSignature::parse(signature).map_err(err)?;
        let file = parse_theorem_file(theorems, &sig).map_err(err)?;
        let t = match theorem {
            Some(n) => file.theorems.iter().find(|t| &*t.name == n).ok_or_else(|| err(format!("no theorem named {}", n)))?,
            None => file.theorems.first().ok_or_else(|| err("no theorems"))?,
        };
        let state = CoreProofState::new(&t.name, t.formula.clone());
        let mut theory = Theory::new(sig, file.schemas);
        if let Some(d) = depth {
            theory.search_depth = d;
        }
        Ok(ProofState { theory, state })
    }

    fn run(&mut self, tactic: &str) -> PyResult<()> {
        self.state.run(&self.theory, tactic).map_err(err)
    }

    fn undo(&mut self) -> PyResult<()> {
        self.state.undo().map_err(err)
    }

    /// Printed open sequents, focused first.
    fn goals(&self) -> Vec<String> {
        self.state.open().into_iter().map(|i| self.state.nodes[i].seq.to_string()).collect()
    }

    fn focus(&self) -> Option<String> {
        self.state.current().map(|s| s.to_string())
    }

    /// Structural JSON of the focused sequent.
    fn focus_json<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.state.current().map(|s| to_py(py, &serde_json::to_value(s).map_err(err)?)).transpose()
    }

    #[getter]
    fn complete(&self) -> bool {
        self.state.is_complete()
    }

    #[getter]
    fn script(&self) -> Vec<String> {
        self.state.script.clone()
    }

    /// Bounded ground validity of a closed formula.
    #[pyo3(signature = (formula, bound = 4))]
    fn ground_check<'py>(&self, py: Python<'py>, formula: &str, bound: usize) -> PyResult<Bound<'py, PyAny>> {
        let th = &self.theory;
        let f = parse_formula(formula, &Scope::closed(&th.sig, &th.schemas)).map_err(err)?;
        let v = ground_valid(&f, &th.sig, &th.schemas, bound);
        to_py(py, &serde_json::to_value(v).map_err(err)?)
    }
}

/// Checks every proof script; one report per theorem.
#[pyfunction]
#[pyo3(signature = (signature, theorems, depth = None))]
fn check<'py>(py: Python<'py>, signature: &str, theorems: &str, depth: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let sig = CoreSignature::parse(signature).map_err(err)?;
    let file = parse_theorem_file(theorems, &sig).map_err(err)?;
    let mut th = Theory::new(sig, file.schemas);
    if let Some(d) = depth {
        th.search_depth = d;
    }
    let reports: Vec<_> = file.theorems.iter().map(|t| check_theorem(&th, t)).collect();
    to_py(py, &serde_json::to_value(reports).map_err(err)?)
}

/// The session protocol: request dicts in, reply dicts out.
#[pyclass(frozen)]
struct SessionService {
    svc: CoreService,
}

#[pymethods]
impl SessionService {
    #[new]
    fn new() -> Self {
        SessionService { svc: CoreService::new() }
    }

    fn handle<'py>(&self, py: Python<'py>, request: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let req = from_py(request)?;
        let reply = py.detach(|| self.svc.handle(&req));
        to_py(py, &reply)
    }
}

#[pymodule]
fn lfreason_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LfError", m.py().get_type::<LfError>())?;
    m.add_class::<Signature>()?;
    m.add_class::<ProofState>()?;
    m.add_class::<SessionService>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
