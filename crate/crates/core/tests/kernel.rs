use std::collections::{BTreeMap, BTreeSet};

use lyapdl::arith::bounds::Bounds;
use lyapdl::kernel::*;
use lyapdl::syntax::{parse_formula_with, parse_sequent_with, rat, Decls, Formula, Sequent};

fn decls() -> Decls {
    Decls::with_params(["b"])
}

fn f(text: &str) -> Formula {
    parse_formula_with(text, &decls()).unwrap()
}

fn seq(text: &str) -> Sequent {
    parse_sequent_with(text, &decls()).unwrap()
}

fn tree(goal: &str) -> ProofTree {
    let vals: BTreeMap<_, _> = [("b".to_string(), rat(-2))].into();
    ProofTree::new(seq(goal), Bounds::point(&vals), BTreeSet::from(["b".to_string()]), 7)
}

#[test]
fn cut_yields_show_then_use() {
    let mut t = tree("x > 0 |- x >= 0");
    let ids = t.apply_rule(0, Rule::Cut(f("x > -1"))).unwrap();
    assert_eq!(t.nodes[ids[0]].sequent, seq("x > 0 |- x >= 0, x > -1"));
    assert_eq!(t.nodes[ids[1]].sequent, seq("x > -1, x > 0 |- x >= 0"));
    t.validate().unwrap();
}

#[test]
fn stale_goal_is_rejected() {
    let mut t = tree("x > 0 |- x > 0");
    t.apply_rule(0, Rule::CloseById).unwrap();
    assert_eq!(t.apply_rule(0, Rule::CloseById), Err(KernelError::StaleGoal(0)));
    assert_eq!(t.apply_rule(9, Rule::CloseById), Err(KernelError::UnknownGoal(9)));
    assert!(t.status().complete);
}

#[test]
fn closing_propagates_to_the_root() {
    let mut t = tree("a > 0, c > 0 |- a > 0 & c > 0");
    let ids = t.apply_rule(0, Rule::AndR(0)).unwrap();
    t.apply_rule(ids[0], Rule::CloseById).unwrap();
    assert!(!t.status().complete);
    assert_eq!(t.open_goals(), vec![ids[1]]);
    t.apply_rule(ids[1], Rule::CloseById).unwrap();
    assert!(t.status().complete);
    t.validate().unwrap();
}

#[test]
fn validate_catches_tampering() {
    let mut t = tree("x > 0 |- x > 0 & x > 0");
    t.apply_rule(0, Rule::AndR(0)).unwrap();
    let mut bad = t.clone();
    bad.nodes[1].closed = true;
    assert!(bad.validate().is_err());
    let mut bad = t.clone();
    bad.nodes[2].parent = Some(1);
    assert!(bad.validate().is_err());
    let mut bad = t;
    bad.nodes[0].children.pop();
    assert!(bad.validate().is_err());
}

#[test]
fn replay_reports_the_failing_step() {
    let mut t = tree("x > 0 |- x > 0 & y > 0");
    let text = "1: AndR(0) @ goal 0\n2: CloseById() @ goal 1\n3: CloseById() @ goal 2\n";
    let steps = parse_script(text, &t.decls()).unwrap();
    let err = t.replay(&steps).unwrap_err();
    assert_eq!(err.step, 3);
    assert_eq!(err.goal, 2);
    assert!(err.to_string().starts_with("step 3: goal 2:"));
}

#[test]
fn script_print_parse_round_trip() {
    let mut t = tree("x > 0 |- \\forall y: (y > 0 -> y + x > 0)");
    let g = t.apply_rule(0, Rule::ForallR(0, Some("y".into()))).unwrap()[0];
    t.apply(RuleApplication {
        rule: Rule::ImpliesR(0),
        target: g,
        reconstructed: true,
    })
    .unwrap();
    let text = print_script(&t.script());
    assert!(text.contains("# reconstructed"));
    let steps = parse_script(&text, &t.decls()).unwrap();
    let back: Vec<RuleApplication> = steps.into_iter().map(|s| s.app).collect();
    assert_eq!(back, t.script());
}

#[test]
fn oracle_refutes_false_ground_goal() {
    let mut t = tree("|- 0 > 1");
    match t.apply_rule(0, Rule::CloseByOracle) {
        Err(KernelError::CounterExample { .. }) => {}
        other => panic!("{other:?}"),
    }
    assert_eq!(t.open_goals(), vec![0]);
}

#[test]
fn oracle_rejects_modal_goals() {
    let mut t = tree("|- [{x' = -x}] x <= 1");
    assert_eq!(t.apply_rule(0, Rule::CloseByOracle), Err(KernelError::NotFirstOrder));
}

#[test]
fn differential_invariant_proves_decay() {
    let mut t = tree("x^2 <= 1 |- [{x' = b*x}] x^2 <= 1");
    let ids = t.apply_rule(0, Rule::DiffInvariant(0)).unwrap();
    assert_eq!(t.nodes[ids[0]].sequent, seq("x^2 <= 1 |- x^2 <= 1"));
    let lie = &t.nodes[ids[1]].sequent;
    assert!(lie.antecedents.is_empty());
    t.apply_rule(ids[0], Rule::CloseById).unwrap();
    t.apply_rule(ids[1], Rule::CloseByOracle).unwrap();
    assert!(t.status().complete);
}

#[test]
fn dw_keeps_only_state_free_context() {
    let mut t = tree("e > 0, x > e |- [{x' = -x & x > 0}] x >= 0");
    let ids = t.apply_rule(0, Rule::DW(0)).unwrap();
    assert_eq!(t.nodes[ids[0]].sequent, seq("e > 0, x > 0 |- x >= 0"));
}

#[test]
fn dcc_orders_use_before_show_and_duality_closes_show() {
    let mut t = tree("|- <{x' = -x}> x <= 1");
    let ids = t.apply_rule(0, Rule::DCc(0, f("x > 1"))).unwrap();
    assert_eq!(t.nodes[ids[0]].sequent, seq("[{x' = -x}] x > 1 |- <{x' = -x}> x <= 1"));
    assert_eq!(
        t.nodes[ids[1]].sequent,
        seq("|- [{x' = -x}] x > 1, <{x' = -x}> x <= 1")
    );
    t.apply_rule(ids[1], Rule::CloseByDuality).unwrap();
    assert!(t.apply_rule(ids[0], Rule::CloseByDuality).is_err());
}

#[test]
fn domain_diamond_strengthens_with_negated_post() {
    let mut t = tree("|- <{x' = -x}> x <= 1");
    let ids = t.apply_rule(0, Rule::DomainDiamond(0, f("x <= 0"))).unwrap();
    assert_eq!(t.nodes[ids[0]].sequent, seq("|- <{x' = -x}> x <= 0"));
    assert_eq!(t.nodes[ids[1]].sequent, seq("|- [{x' = -x & !(x <= 1)}] !(x <= 0)"));
}

#[test]
fn dv_needs_a_norm_bound() {
    let mut t = tree("|- <{x' = -x, y' = -y}> x^2 + y^2 < 1");
    assert!(matches!(
        t.apply_rule(0, Rule::DV(0, "p".into())),
        Err(KernelError::Mismatch { .. })
    ));
    let mut t = tree("[{x' = -x, y' = -y}] norm(x, y) <= 2 |- <{x' = -x, y' = -y}> x^2 + y^2 < 1");
    let ids = t.apply_rule(0, Rule::DV(0, "p".into())).unwrap();
    let goal = &t.nodes[ids[0]].sequent.succedents[0];
    assert!(matches!(goal, Formula::Exists(p, _) if p == "p"));
}

#[test]
fn quantifier_rules_respect_freshness() {
    let mut t = tree("x > 0 |- \\forall x: x >= x");
    assert!(t.apply_rule(0, Rule::ForallR(0, Some("x".into()))).is_err());
    let ids = t.apply_rule(0, Rule::ForallR(0, None)).unwrap();
    assert_eq!(t.nodes[ids[0]].sequent.succedents[0], f("x_1 >= x_1"));
}

#[test]
fn mexistsr_refuses_variables_free_in_context() {
    let mut t = tree("k > 0 |- \\exists k: k > 1");
    assert!(t.apply_rule(0, Rule::MExistsR(0, f("k > 2"))).is_err());
    let mut t = tree("e > 0 |- \\exists k: k > 1");
    let ids = t.apply_rule(0, Rule::MExistsR(0, f("k > 2"))).unwrap();
    assert_eq!(t.nodes[ids[1]].sequent, seq("e > 0, k > 2 |- k > 1"));
}

#[test]
fn modus_ponens_needs_its_premise() {
    let mut t = tree("x > 0 -> y > 0 |- y > 0");
    assert!(t.apply_rule(0, Rule::ModusPonens(0)).is_err());
    let mut t = tree("x > 0 & z > 0 -> y > 0, z > 0, x > 0 |- y > 0");
    let ids = t.apply_rule(0, Rule::ModusPonens(0)).unwrap();
    t.apply_rule(ids[0], Rule::CloseById).unwrap();
}

#[test]
fn box_mono_accepts_weaker_domain_in_antecedent() {
    let mut t = tree("[{x' = -x}] x <= 1 |- [{x' = -x & x > 0}] x <= 1");
    t.apply_rule(0, Rule::BoxMono(0)).unwrap();
    let mut t = tree("[{x' = -x & x > 0}] x <= 1 |- [{x' = -x}] x <= 1");
    assert!(t.apply_rule(0, Rule::BoxMono(0)).is_err());
}

#[test]
fn applicable_rules_match_the_goal_shape() {
    let t = tree("\\exists k: k > 0 |- [{x' = -x}] x <= 1, a > 0 -> a > 0");
    let names: Vec<String> = t.applicable_rules(0).unwrap().into_iter().map(|r| r.name).collect();
    for n in ["DC", "DW", "DiffInvariant", "ImpliesR", "ExistsL", "Cut"] {
        assert!(names.iter().any(|m| m == n), "{n} missing from {names:?}");
    }
    assert!(!names.iter().any(|m| m == "AndR"));
    let mut t = t;
    t.apply_rule(0, Rule::Weaken(Side::Succ, 0)).unwrap();
    assert!(t.applicable_rules(0).unwrap().is_empty());
}

#[test]
fn tree_json_has_format_and_statuses() {
    let mut t = tree("x > 0 |- x > 0 & y > 0");
    t.apply_rule(0, Rule::AndR(0)).unwrap();
    t.apply_rule(1, Rule::CloseById).unwrap();
    let v = serde_json::to_value(t.view()).unwrap();
    assert_eq!(v["format"], TREE_FORMAT);
    assert_eq!(v["open_goals"], serde_json::json!([2]));
    assert_eq!(v["nodes"][1]["status"], "closed");
    assert_eq!(v["nodes"][0]["status"], "expanded");
    assert_eq!(v["nodes"][2]["status"], "open");
}

#[test]
fn rule_application_json_round_trip() {
    let app = RuleApplication {
        rule: Rule::DC(0, f("x <= 1")),
        target: 3,
        reconstructed: false,
    };
    let text = serde_json::to_string(&app).unwrap();
    let back: RuleApplication = serde_json::from_str(&text).unwrap();
    assert_eq!(back, app);
    let w: RuleApplication =
        serde_json::from_str(r#"{"rule":{"rule":"Weaken","args":["succ",0]},"target":1}"#).unwrap();
    assert_eq!(w.rule, Rule::Weaken(Side::Succ, 0));
}

#[test]
fn simp_flattens_and_folds() {
    let mut t = tree("1 > 0 -> a > 0 & c > 0 |- !(x <= 1) | false");
    let ids = t.apply_rule(0, Rule::Simp).unwrap();
    assert_eq!(t.nodes[ids[0]].sequent, seq("a > 0, c > 0 |- x > 1"));
}
