use tightcalc::derivation::{
    Counters, Rule, System, ViolationKind, build, check_derivation, derivation_from_json,
    derivation_to_json_string, is_tight_derivation, render_tree, validate_metatheory,
};
use tightcalc::syntax::{parse_term, var};
use tightcalc::types::{MultiType, StateType, Type, parse_type};

fn corpus(name: &str) -> String {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn ty(s: &str) -> Type {
    parse_type(s).unwrap()
}

/// The ex1 reference derivation, assembled bottom-up with the constructors.
fn phi_t_by_hand() -> tightcalc::derivation::Derivation {
    let ab_ab = ty("[ab] -> ab");
    let x1 = build::ax("x", ab_ab.clone());
    let x2 = build::many(&var("x"), vec![build::ax("x", Type::Ab)]).unwrap();
    let xx = build::app_v(x1, x2).unwrap();
    let yy = build::appp1_v(build::ax("y", Type::Vr), build::ax("y", Type::Vr)).unwrap();
    let body = build::appp2_v(xx, yy).unwrap();
    let psi = build::lam("x", body).unwrap();
    let id = parse_term(r"\z.z").unwrap();
    let id_arrow = build::lam("z", build::ax("z", Type::Ab)).unwrap();
    let arg = build::many(&id, vec![id_arrow, build::lamp(&id).unwrap()]).unwrap();
    build::app_v(psi, arg).unwrap()
}

#[test]
fn ex1_reference_derivation_checks() {
    let (d, system) = derivation_from_json(&corpus("phi_t.json")).unwrap();
    assert_eq!(system, System::V);
    check_derivation(&d, System::V).unwrap();
    assert!(is_tight_derivation(&d));
    assert_eq!(d.counters(), Counters::v(2, 2));
    assert_eq!(d.env().get("y"), MultiType::new(vec![Type::Vr, Type::Vr]));
    assert_eq!(d, phi_t_by_hand());
    assert!(validate_metatheory(&d, System::V).all_passed());
}

#[test]
fn ex2_reference_derivation_checks() {
    let (d, system) = derivation_from_json(&corpus("phi_c.json")).unwrap();
    assert_eq!(system, System::Gs);
    check_derivation(&d, System::Gs).unwrap();
    assert!(is_tight_derivation(&d));
    assert_eq!(d.counters(), Counters::new(2, 2, 0));
    let report = validate_metatheory(&d, System::Gs);
    assert!(report.all_passed(), "{report}");
}

#[test]
fn json_round_trip() {
    for (file, system) in [("phi_t.json", System::V), ("phi_c.json", System::Gs)] {
        let (d, _) = derivation_from_json(&corpus(file)).unwrap();
        let text = derivation_to_json_string(&d, system);
        let (back, s2) = derivation_from_json(&text).unwrap();
        assert_eq!(s2, system);
        assert_eq!(back, d);
    }
}

#[test]
fn dropping_the_state_entry_of_the_argument_is_rejected() {
    let (mut d, _) = derivation_from_json(&corpus("phi_c.json")).unwrap();
    // The set premise of the root application leaves {l: M}; remove that entry.
    let node = d.at_mut(&[0, 1]).unwrap();
    let Some(Type::Monadic(m)) = node.ty().cloned() else {
        panic!()
    };
    let mut m = *m;
    m.output.state = StateType::empty();
    node.conclusion.assigned = tightcalc::derivation::Assigned::Type(Type::Monadic(Box::new(m)));
    let err = check_derivation(&d, System::Gs).unwrap_err();
    assert_eq!(err.path, vec![0, 1]);
    assert_eq!(err.kind, ViolationKind::StateTypeMismatch);
}

#[test]
fn counter_mutation_is_localized() {
    let (mut d, _) = derivation_from_json(&corpus("phi_t.json")).unwrap();
    d.at_mut(&[0, 0, 1]).unwrap().conclusion.counters.d += 1;
    let err = check_derivation(&d, System::V).unwrap_err();
    assert_eq!(err.path, vec![0, 0, 1]);
    assert_eq!(err.kind, ViolationKind::CounterMismatch);
}

#[test]
fn the_typo_label_is_rejected() {
    let (mut d, _) = derivation_from_json(&corpus("phi_t.json")).unwrap();
    // Labelling the axiom for z as a persistent abstraction does not check.
    d.at_mut(&[1, 0, 0]).unwrap().rule = Rule::LamP;
    let err = check_derivation(&d, System::V).unwrap_err();
    assert_eq!(err.path, vec![1, 0, 0]);
}

#[test]
fn gs_rules_are_not_part_of_v() {
    let (d, _) = derivation_from_json(&corpus("phi_c.json")).unwrap();
    assert!(check_derivation(&d, System::V).is_err());
    let lifted = build::lift(build::ax("x", Type::Vr), StateType::empty()).unwrap();
    let err = check_derivation(&lifted, System::V).unwrap_err();
    assert_eq!((err.path, err.kind), (vec![], ViolationKind::WrongSystem));
}

#[test]
fn empty_emp_checks() {
    check_derivation(&build::emp(), System::Gs).unwrap();
}

#[test]
fn render_mentions_every_node() {
    let d = phi_t_by_hand();
    let text = render_tree(&d, System::V);
    assert_eq!(text.lines().count(), d.node_count());
    assert!(text.starts_with("(app) y:[vr, vr] |- "));
}
