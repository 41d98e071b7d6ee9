use lfreason::logic::sequent::Sequent;
use lfreason::session::SessionService;
use serde_json::{json, Value};

const STLC: &str = include_str!("../../../theories/stlc.lf");
const STLC_BASE: &str = include_str!("../../../theories/stlc_base.lf");
const UNIQ: &str = include_str!("../../../theories/uniq.thm");
const NONTHEOREM: &str = include_str!("../../../theories/nontheorem.thm");

fn create(svc: &SessionService, thm: &str) -> String {
    let r = svc.handle(&json!({ "kind": "create_session", "signature": STLC, "theorems": thm }));
    assert_eq!(r["ok"], true, "{}", r);
    r["session"].as_str().unwrap().to_string()
}

fn call(svc: &SessionService, id: &str, mut req: Value) -> Value {
    req["session"] = json!(id);
    svc.handle(&req)
}

fn tactic(svc: &SessionService, id: &str, t: &str) -> Value {
    call(svc, id, json!({ "kind": "tactic", "tactic": t }))
}

#[test]
fn create_lists_theorems() {
    let svc = SessionService::new();
    let r = svc.handle(&json!({ "kind": "create_session", "signature": STLC, "theorems": UNIQ }));
    assert_eq!(r["theorems"], json!(["ty_unique"]));
    assert_eq!(r["session"].as_str().unwrap().len(), 32);
    assert_eq!(svc.len(), 1);
}

#[test]
fn undo_on_fresh_session_is_an_error() {
    let svc = SessionService::new();
    let id = create(&svc, UNIQ);
    let r = call(&svc, &id, json!({ "kind": "undo" }));
    assert_eq!(r["ok"], false);
    assert_eq!(r["error"]["kind"], "undo");
    assert_eq!(r["error"]["message"], "nothing to undo");
}

#[test]
fn case_lists_three_subgoals() {
    let svc = SessionService::new();
    let id = create(&svc, UNIQ);
    assert_eq!(call(&svc, &id, json!({ "kind": "start", "theorem": "ty_unique" }))["ok"], true);
    tactic(&svc, &id, "induction 1.");
    tactic(&svc, &id, "intros.");
    let r = tactic(&svc, &id, "case H1.");
    assert_eq!(r["ok"], true, "{}", r);
    assert_eq!(r["open_goals"], 3);
    let labels: Vec<&str> = r["last_children"].as_array().unwrap().iter().map(|c| c["label"].as_str().unwrap()).collect();
    assert_eq!(labels[..2], ["of_app", "of_lam"]);
    assert!(labels[2].starts_with("tyctx block"));
    assert_eq!(r["last_children"][2]["raising"]["Ty2"], "Ty2 n1 n2");
}

#[test]
fn tactic_then_undo_restores_the_render() {
    let svc = SessionService::new();
    let id = create(&svc, UNIQ);
    call(&svc, &id, json!({ "kind": "start", "theorem": "ty_unique" }));
    tactic(&svc, &id, "induction 1.");
    tactic(&svc, &id, "intros.");
    let before = call(&svc, &id, json!({ "kind": "state" }));
    tactic(&svc, &id, "case H1.");
    let after = call(&svc, &id, json!({ "kind": "undo" }));
    assert_eq!(serde_json::to_string(&before).unwrap(), serde_json::to_string(&after).unwrap());
}

#[test]
fn failed_tactic_reports_and_keeps_state() {
    let svc = SessionService::new();
    let id = create(&svc, UNIQ);
    call(&svc, &id, json!({ "kind": "start", "theorem": "ty_unique" }));
    let before = call(&svc, &id, json!({ "kind": "state" }));
    let r = tactic(&svc, &id, "case H7.");
    assert_eq!(r["ok"], false);
    assert_eq!(r["error"]["kind"], "tactic");
    let mut state = r["state"].clone();
    state["ok"] = json!(true);
    state["session"] = json!(id);
    assert_eq!(state, before);
}

#[test]
fn sequents_round_trip() {
    let svc = SessionService::new();
    let id = create(&svc, UNIQ);
    call(&svc, &id, json!({ "kind": "start", "theorem": "ty_unique" }));
    tactic(&svc, &id, "induction 1.");
    tactic(&svc, &id, "intros.");
    let r = tactic(&svc, &id, "case H1.");
    for g in r["goals"].as_array().unwrap() {
        let s: Sequent = serde_json::from_value(g["sequent"].clone()).unwrap();
        assert_eq!(serde_json::to_value(&s).unwrap(), g["sequent"]);
        assert_eq!(s.to_string(), g["text"].as_str().unwrap());
    }
}

#[test]
fn whole_proof_through_the_protocol() {
    let svc = SessionService::new();
    let id = create(&svc, UNIQ);
    call(&svc, &id, json!({ "kind": "start", "theorem": "ty_unique" }));
    let script: Vec<&str> = UNIQ
        .lines()
        .map(str::trim)
        .skip_while(|l| *l != "proof.")
        .skip(1)
        .take_while(|l| *l != "qed.")
        .filter(|l| !l.is_empty() && !l.starts_with('%'))
        .collect();
    assert_eq!(script.len(), 19);
    let mut last = Value::Null;
    for t in script {
        last = tactic(&svc, &id, t);
        assert_eq!(last["ok"], true, "{}: {}", t, last);
    }
    assert_eq!(last["complete"], true);
    assert_eq!(last["script"].as_array().unwrap().len(), 19);
}

#[test]
fn ground_check_refutes_the_nontheorem() {
    let svc = SessionService::new();
    let r = svc.handle(&json!({ "kind": "create_session", "signature": STLC_BASE, "theorems": NONTHEOREM }));
    let id = r["session"].as_str().unwrap();
    let r = call(
        &svc,
        id,
        json!({ "kind": "ground_check", "formula": "forall E T, {|- E : tm} => {|- T : ty} => exists D, {|- D : of E T}", "bound": 4 }),
    );
    assert_eq!(r["ok"], true, "{}", r);
    assert_eq!(r["result"]["verdict"], "false");
    assert!(!r["result"]["counterexample"].as_array().unwrap().is_empty());
}

#[test]
fn protocol_errors() {
    let svc = SessionService::new();
    assert_eq!(svc.handle(&json!({}))["error"]["kind"], "bad_request");
    assert_eq!(svc.handle(&json!({ "kind": "state", "session": "nope" }))["error"]["kind"], "unknown_session");
    let r = svc.handle(&json!({ "kind": "create_session", "signature": "ty : type", "theorems": "" }));
    assert_eq!(r["error"]["kind"], "parse");
    let r = svc.handle(&json!({ "kind": "create_session", "signature_path": "/nonexistent", "theorems": "" }));
    assert_eq!(r["error"]["kind"], "io");
    let r = svc.handle(&json!({ "kind": "create_session", "signature": STLC, "theorems": "", "depth": 0 }));
    assert_eq!(r["error"]["kind"], "bad_request");
    let id = create(&svc, UNIQ);
    assert_eq!(tactic(&svc, &id, "intros.")["error"]["kind"], "no_theorem");
    assert_eq!(call(&svc, &id, json!({ "kind": "start", "theorem": "x" }))["error"]["kind"], "unknown_theorem");
    assert_eq!(call(&svc, &id, json!({ "kind": "frob" }))["error"]["kind"], "bad_request");
    assert_eq!(call(&svc, &id, json!({ "kind": "ground_check", "formula": "{|- X" }))["error"]["kind"], "parse");
}

#[test]
fn sessions_are_independent() {
    let svc = SessionService::new();
    let a = create(&svc, UNIQ);
    let b = create(&svc, UNIQ);
    call(&svc, &a, json!({ "kind": "start", "theorem": "ty_unique" }));
    assert_eq!(call(&svc, &b, json!({ "kind": "state" }))["theorem"], Value::Null);
    std::thread::scope(|s| {
        for id in [&a, &b] {
            let svc = &svc;
            s.spawn(move || {
                call(svc, id, json!({ "kind": "start", "theorem": "ty_unique" }));
                tactic(svc, id, "induction 1.");
            });
        }
    });
    assert_eq!(call(&svc, &a, json!({ "kind": "state" }))["script"], json!(["induction 1"]));
    assert_eq!(call(&svc, &b, json!({ "kind": "state" }))["script"], json!(["induction 1"]));
}
