use lfreason::logic::formula::{Ann, Formula};
use lfreason::logic::parse_theorem_file;
use lfreason::prover::{check_file, NodeState, Outcome, ProofState, Theory};
use lfreason::syntax::name;
use lfreason::{Signature, Term};

const STLC: &str = include_str!("../../../theories/stlc.lf");
const UNIQ: &str = include_str!("../../../theories/uniq.thm");
const STLC_BASE: &str = include_str!("../../../theories/stlc_base.lf");
const LOGIC: &str = include_str!("../../../theories/logic.thm");
const NONTHEOREM: &str = include_str!("../../../theories/nontheorem.thm");

fn sig() -> Signature {
    Signature::parse(STLC).unwrap()
}

/// Theory and initial proof state for the first theorem of `src`.
fn start(src: &str) -> (Theory, ProofState) {
    let sig = sig();
    let file = parse_theorem_file(src, &sig).unwrap();
    let t = &file.theorems[0];
    let ps = ProofState::new(&t.name, t.formula.clone());
    (Theory::new(sig, file.schemas), ps)
}

fn run(th: &Theory, ps: &mut ProofState, tactics: &[&str]) {
    for t in tactics {
        ps.run(th, t).unwrap_or_else(|e| panic!("{}: {}", t, e));
    }
}

fn open_labels(ps: &ProofState) -> Vec<String> {
    ps.open().into_iter().map(|i| ps.nodes[i].label.clone()).collect()
}

#[test]
fn uniqueness_script_is_proved() {
    let (_, reports) = check_file(&sig(), UNIQ).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].name, "ty_unique");
    assert!(reports[0].proved(), "{:?}", reports[0].outcome);
}

#[test]
fn first_case_has_three_children() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros.", "case H1."]);
    let labels = open_labels(&ps);
    assert_eq!(labels.len(), 3);
    assert_eq!(labels[0], "of_app");
    assert_eq!(labels[1], "of_lam");
    assert!(labels[2].starts_with("tyctx block 1"), "{}", labels[2]);
}

#[test]
fn context_case_instantiates_ty2_to_constant_function() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros.", "case H1."]);
    // close the two structural branches by skipping: focus the context branch
    let ctx_branch = ps.open()[2];
    let mut only_ctx = ps.clone();
    for &i in &ps.open()[..2] {
        only_ctx.nodes[i].state = NodeState::Closed { by: "skip".into() };
    }
    assert_eq!(only_ctx.focus(), Some(ctx_branch));
    only_ctx.run(&th, "case H2.").unwrap();
    let open = only_ctx.open();
    assert_eq!(open.len(), 1);
    let child = &only_ctx.nodes[open[0]];
    let expected = Term::lam("x", Term::lam("y", Term::var("T")));
    assert_eq!(child.unifier.get("Ty2"), Some(&expected));
    only_ctx.run(&th, "search.").unwrap();
    assert!(only_ctx.is_complete());
}

#[test]
fn block_insertion_golden() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros.", "case H1."]);
    let child = &ps.nodes[ps.open()[2]];
    let actual = serde_json::json!({
        "ctxs": child.seq.ctxs,
        "raising": child.raising,
        "hyps": child.seq.hyps.iter().filter(|h| &*h.name != "IH").collect::<Vec<_>>(),
    });
    let golden: serde_json::Value = serde_json::from_str(include_str!("golden/block_insertion.json")).unwrap();
    assert_eq!(actual, golden, "{}", serde_json::to_string_pretty(&actual).unwrap());
    // the same facts in notation
    assert_eq!(child.seq.ctxs[0].ty.to_string(), "tyctx[(n1:tm, n2:of n1 T)]");
    let raised: Vec<String> = child.raising.iter().map(|(x, t)| format!("{} := {}", x, t)).collect();
    assert_eq!(raised, ["D1 := D1 n1 n2", "D2 := D2 n1 n2", "E := E n1 n2", "Ty1 := Ty1 n1 n2", "Ty2 := Ty2 n1 n2"]);
    assert!(child.seq.hyps.iter().any(|h| h.formula.to_string() == "{G |- T : ty}"));
}

#[test]
fn omitting_the_last_case_leaves_one_goal() {
    let cut = UNIQ.replace("  % context entry\n  case H2.\n  search.\n", "");
    assert_ne!(cut, UNIQ);
    let (_, reports) = check_file(&sig(), &cut).unwrap();
    match &reports[0].outcome {
        Outcome::Incomplete { open } => assert_eq!(open.len(), 1),
        o => panic!("{:?}", o),
    }
}

#[test]
fn nontheorem_script_fails_with_open_goals() {
    let (_, reports) = check_file(&Signature::parse(STLC_BASE).unwrap(), NONTHEOREM).unwrap();
    match &reports[0].outcome {
        Outcome::Failed { open, .. } => assert!(!open.is_empty()),
        o => panic!("{:?}", o),
    }
}

#[test]
fn logic_examples_are_proved() {
    let (_, reports) = check_file(&sig(), LOGIC).unwrap();
    assert_eq!(reports.len(), 4);
    for r in &reports {
        assert!(r.proved(), "{}: {:?}", r.name, r.outcome);
    }
}

#[test]
fn induction_hypothesis_needs_a_smaller_derivation() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros."]);
    let err = ps.run(&th, "apply IH to G E Ty1 Ty2 D1 D2.").unwrap_err();
    assert!(err.to_string().contains("inductive restriction"), "{}", err);
}

#[test]
fn nested_induction_is_rejected() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1."]);
    let err = ps.run(&th, "induction 1.").unwrap_err();
    assert!(err.to_string().contains("nested"), "{}", err);
}

#[test]
fn induction_on_a_missing_antecedent_fails() {
    let (th, mut ps) = start(UNIQ);
    assert!(ps.run(&th, "induction 3.").is_err());
    assert!(!ps.can_undo());
}

#[test]
fn failed_tactics_leave_the_state_alone() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros."]);
    let before = format!("{:?}", ps.nodes);
    for bad in ["case H9.", "split.", "left.", "exists i.", "apply IH to G.", "frobnicate.", "assumption."] {
        assert!(ps.run(&th, bad).is_err(), "{}", bad);
        assert_eq!(format!("{:?}", ps.nodes), before, "{}", bad);
    }
}

#[test]
fn undo_restores_previous_tree() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros."]);
    let before = format!("{:?}", ps.nodes);
    ps.run(&th, "case H1.").unwrap();
    ps.undo().unwrap();
    assert_eq!(format!("{:?}", ps.nodes), before);
    ps.undo().unwrap();
    ps.undo().unwrap();
    assert!(ps.undo().is_err());
}

#[test]
fn same_state_same_children() {
    let (th, mut a) = start(UNIQ);
    run(&th, &mut a, &["induction 1.", "intros."]);
    let mut b = a.clone();
    a.run(&th, "case H1.").unwrap();
    b.run(&th, "case H1.").unwrap();
    assert_eq!(serde_json::to_string(&a.nodes).unwrap(), serde_json::to_string(&b.nodes).unwrap());
}

#[test]
fn unlocked_annotations_only_come_from_guarded_cases() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros.", "case H1."]);
    // case on the unannotated H2 in the application branch
    ps.run(&th, "case H2.").unwrap();
    let child = &ps.nodes[ps.focus().unwrap()];
    let fresh: Vec<_> = child.seq.hyps.iter().filter(|h| h.name[1..].parse::<usize>().is_ok_and(|k| k >= 9)).collect();
    assert_eq!(fresh.len(), 6);
    for h in fresh {
        assert_eq!(h.formula.ann(), Ann::None, "{}", h.formula);
    }
}

#[test]
fn apply_infers_holes_from_assumptions() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros.", "case H1.", "case H2."]);
    ps.run(&th, "apply IH to G _ _ _ D D5.").unwrap();
    let seq = ps.current().unwrap();
    let last = seq.hyps.last().unwrap();
    assert_eq!(last.formula.to_string(), "exists D3, {G |- D3 : eq (arr Ty3 Ty1) (arr Ty4 Ty2)}");
}

#[test]
fn apply_checks_context_arguments_against_the_schema() {
    let (th, mut ps) = start(UNIQ);
    run(&th, &mut ps, &["induction 1.", "intros.", "case H1.", "case H2."]);
    let err = ps.run(&th, "apply IH to (G, n1:tm) M1 (arr Ty3 Ty1) (arr Ty4 Ty2) D D5.").unwrap_err();
    assert!(err.to_string().contains("schema"), "{}", err);
    let err = ps.run(&th, "apply IH to G M1.").unwrap_err();
    assert!(err.to_string().contains("expects 6 arguments"), "{}", err);
}

#[test]
fn case_on_connectives() {
    let (th, mut ps) = start(
        "theorem t : forall T, ({|- T : ty} \\/ false) => (exists D, {|- D : eq T T}) => {|- T : ty} /\\ true.
         proof. qed.",
    );
    run(&th, &mut ps, &["intros.", "case H1."]);
    assert_eq!(open_labels(&ps), ["left", "right"]);
    run(&th, &mut ps, &["case H2.", "split.", "assumption.", "split.", "case H3."]);
    assert!(ps.is_complete());
}

#[test]
fn exists_instantiates_the_goal() {
    let (th, mut ps) = start("theorem t : forall T, exists U, {|- T : ty} => {|- U : ty}. proof. qed.");
    run(&th, &mut ps, &["intros."]);
    assert!(ps.run(&th, "exists lam.").is_err());
    run(&th, &mut ps, &["exists T.", "intros.", "assumption."]);
    assert!(ps.is_complete());
}

#[test]
fn intros_renames_clashing_names() {
    let (th, mut ps) = start("theorem t : forall T, {|- T : ty} => forall T, {|- T : ty} => {|- T : ty}. proof. qed.");
    run(&th, &mut ps, &["intros."]);
    let seq = ps.current().unwrap();
    let names: Vec<&str> = seq.vars.iter().map(|(x, _)| &**x).collect();
    assert_eq!(names, ["T", "T1"]);
    assert_eq!(seq.goal.to_string(), "{|- T1 : ty}");
    assert!(matches!(seq.goal, Formula::Atom(_)));
    assert!(seq.var_type("T1").is_some() && seq.hyp("H2").is_some());
    let _ = name("T");
}

