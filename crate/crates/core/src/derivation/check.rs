use super::{Assigned, Counters, Derivation, Rule, Subject, System};
use crate::syntax::{Term, alpha_eq};
use crate::types::{
    ConfigType, Monadic, MultiType, StateType, Type, TypeEnv, is_liftable, wf_monadic_gs,
    wf_type_v, wf_value_gs, wf_value_v,
};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    PremiseCount,
    WrongSystem,
    SubjectShape,
    SubjectMismatch,
    TypeShape,
    TypeMismatch,
    StateTypeMismatch,
    EnvMismatch,
    CounterMismatch,
    NotTightConstant,
    SemicolonViolation,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::PremiseCount => "wrong number of premises",
            ViolationKind::WrongSystem => "rule not in this system",
            ViolationKind::SubjectShape => "subject shape",
            ViolationKind::SubjectMismatch => "subject mismatch",
            ViolationKind::TypeShape => "type shape",
            ViolationKind::TypeMismatch => "type mismatch",
            ViolationKind::StateTypeMismatch => "state-type mismatch",
            ViolationKind::EnvMismatch => "environment mismatch",
            ViolationKind::CounterMismatch => "counter mismatch",
            ViolationKind::NotTightConstant => "not a tight constant",
            ViolationKind::SemicolonViolation => "location already in the state type",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct RuleViolation {
    pub path: Vec<usize>,
    pub rule: Rule,
    pub kind: ViolationKind,
    pub reason: String,
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule violation at {:?} ({}): {}: {}",
            self.path, self.rule, self.kind, self.reason
        )
    }
}

type Local = Result<(), (ViolationKind, String)>;

fn fail<T>(kind: ViolationKind, reason: impl Into<String>) -> Result<T, (ViolationKind, String)> {
    Err((kind, reason.into()))
}

/// Checks every node against its rule, children before parents, and reports
/// the first failing node.
pub fn check_derivation(d: &Derivation, system: System) -> Result<(), RuleViolation> {
    match collect(d, system, &mut Vec::new(), true).into_iter().next() {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

pub fn check_derivation_v(d: &Derivation) -> Result<(), RuleViolation> {
    check_derivation(d, System::V)
}

pub fn check_derivation_gs(d: &Derivation) -> Result<(), RuleViolation> {
    check_derivation(d, System::Gs)
}

/// All failing nodes in post-order.
pub fn collect_violations(d: &Derivation, system: System) -> Vec<RuleViolation> {
    collect(d, system, &mut Vec::new(), false)
}

fn collect(
    d: &Derivation,
    system: System,
    path: &mut Vec<usize>,
    first_only: bool,
) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        out.extend(collect(p, system, path, first_only));
        path.pop();
        if first_only && !out.is_empty() {
            return out;
        }
    }
    if let Err((kind, reason)) = check_node(d, system) {
        out.push(RuleViolation {
            path: path.clone(),
            rule: d.rule,
            kind,
            reason,
        });
    }
    out
}

fn premises(d: &Derivation, n: usize) -> Local {
    if d.premises.len() != n {
        return fail(
            ViolationKind::PremiseCount,
            format!("expected {n}, found {}", d.premises.len()),
        );
    }
    Ok(())
}

fn subject_term(d: &Derivation) -> Result<&Term, (ViolationKind, String)> {
    match &d.conclusion.subject {
        Subject::Term(t) => Ok(t),
        other => fail(
            ViolationKind::SubjectShape,
            format!("expected a term, found `{other}`"),
        ),
    }
}

fn assigned_type(d: &Derivation) -> Result<&Type, (ViolationKind, String)> {
    match &d.conclusion.assigned {
        Assigned::Type(t) => Ok(t),
        other => fail(
            ViolationKind::TypeShape,
            format!("expected a term type, found `{other}`"),
        ),
    }
}

fn same_subject(p: &Derivation, expected: &Term) -> Local {
    let t = subject_term(p)?;
    if !alpha_eq(t, expected) {
        return fail(
            ViolationKind::SubjectMismatch,
            format!("premise types `{t}`, expected `{expected}`"),
        );
    }
    Ok(())
}

fn env_is(d: &Derivation, expected: &TypeEnv) -> Local {
    if d.env() != expected {
        return fail(
            ViolationKind::EnvMismatch,
            format!("found {{{}}}, expected {{{expected}}}", d.env()),
        );
    }
    Ok(())
}

fn env_sum(d: &Derivation) -> Local {
    env_is(
        d,
        &TypeEnv::union_all(d.premises.iter().map(Derivation::env)),
    )
}

fn counters_are(d: &Derivation, expected: Counters, system: System) -> Local {
    if d.counters() != expected {
        return fail(
            ViolationKind::CounterMismatch,
            format!(
                "found {}, expected {}",
                d.counters().show(system),
                expected.show(system)
            ),
        );
    }
    Ok(())
}

fn premise_sum(d: &Derivation) -> Counters {
    Counters::sum(d.premises.iter().map(|p| &p.conclusion.counters))
}

fn type_is(found: &Type, expected: &Type) -> Local {
    if found != expected {
        return fail(
            ViolationKind::TypeMismatch,
            format!("found {found}, expected {expected}"),
        );
    }
    Ok(())
}

fn config_is(found: &ConfigType, expected: &ConfigType) -> Local {
    if found.ty != expected.ty {
        return fail(
            ViolationKind::TypeMismatch,
            format!("result {found}, expected {expected}"),
        );
    }
    if found.state != expected.state {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!("result {found}, expected {expected}"),
        );
    }
    Ok(())
}

fn multi(t: &Type, what: &str) -> Result<MultiType, (ViolationKind, String)> {
    match t {
        Type::Multi(m) => Ok(m.clone()),
        _ => fail(
            ViolationKind::TypeShape,
            format!("{what} must be a multi-type, found {t}"),
        ),
    }
}

fn monadic(t: &Type, what: &str) -> Result<Monadic, (ViolationKind, String)> {
    match t {
        Type::Monadic(m) if wf_monadic_gs(m) => Ok((**m).clone()),
        _ => fail(
            ViolationKind::TypeShape,
            format!("{what} must be a monadic type, found {t}"),
        ),
    }
}

fn value_type_ok(t: &Type, system: System) -> bool {
    match system {
        System::V => wf_value_v(t),
        System::Gs => wf_value_gs(t),
    }
}

fn check_node(d: &Derivation, system: System) -> Local {
    if !d.rule.in_system(system) {
        return fail(
            ViolationKind::WrongSystem,
            format!("({}) is not a rule of system {system}", d.rule),
        );
    }
    if system == System::V && d.counters().m != 0 {
        return fail(
            ViolationKind::CounterMismatch,
            "system V has no memory counter",
        );
    }
    match (system, d.rule) {
        (_, Rule::Ax) => check_ax(d, system),
        (_, Rule::Lam) => check_lam(d, system),
        (_, Rule::Many) => check_many(d, system),
        (_, Rule::LamP) => check_lamp(d),
        (System::V, Rule::App) => check_app_v(d),
        (System::V, Rule::AppP1 | Rule::AppP2) => check_persistent_v(d),
        (System::Gs, Rule::App) => check_app_gs(d),
        (System::Gs, Rule::Lift) => check_lift(d),
        (System::Gs, Rule::Get) => check_get(d),
        (System::Gs, Rule::Set) => check_set(d),
        (System::Gs, Rule::AppP1) => check_appp1_gs(d),
        (System::Gs, Rule::AppP2) => check_appp2_gs(d),
        (System::Gs, Rule::Emp) => check_emp(d),
        (System::Gs, Rule::Upd) => check_upd(d),
        (System::Gs, Rule::Conf) => check_conf(d),
        (System::V, _) => unreachable!("filtered by in_system"),
    }
}

fn check_ax(d: &Derivation, system: System) -> Local {
    premises(d, 0)?;
    let Term::Var(x) = subject_term(d)? else {
        return fail(
            ViolationKind::SubjectShape,
            "axiom subject must be a variable",
        );
    };
    let sigma = assigned_type(d)?;
    if !value_type_ok(sigma, system) {
        return fail(
            ViolationKind::TypeShape,
            format!("{sigma} is not a value type"),
        );
    }
    env_is(
        d,
        &TypeEnv::singleton(x, MultiType::singleton(sigma.clone())),
    )?;
    counters_are(d, Counters::ZERO, system)
}

fn check_lam(d: &Derivation, system: System) -> Local {
    premises(d, 1)?;
    let Term::Abs(x, body) = subject_term(d)? else {
        return fail(
            ViolationKind::SubjectShape,
            "subject must be an abstraction",
        );
    };
    let p = &d.premises[0];
    same_subject(p, body)?;
    let tau = assigned_type(p)?;
    match system {
        System::V if !wf_type_v(tau) => {
            return fail(ViolationKind::TypeShape, format!("{tau} is not a type"));
        }
        System::Gs => {
            monadic(tau, "body type")?;
        }
        _ => {}
    }
    type_is(assigned_type(d)?, &Type::arrow(p.env().get(x), tau.clone()))?;
    env_is(d, &p.env().without(x))?;
    counters_are(d, p.counters(), system)
}

fn check_many(d: &Derivation, system: System) -> Local {
    let v = subject_term(d)?;
    if !v.is_value() {
        return fail(ViolationKind::SubjectShape, format!("`{v}` is not a value"));
    }
    let mut tys = Vec::new();
    for p in &d.premises {
        same_subject(p, v)?;
        let t = assigned_type(p)?;
        if !value_type_ok(t, system) {
            return fail(ViolationKind::TypeShape, format!("{t} is not a value type"));
        }
        tys.push(t.clone());
    }
    type_is(assigned_type(d)?, &Type::Multi(MultiType::new(tys)))?;
    env_sum(d)?;
    counters_are(d, premise_sum(d), system)
}

fn check_lamp(d: &Derivation) -> Local {
    premises(d, 0)?;
    if !subject_term(d)?.is_abs() {
        return fail(
            ViolationKind::SubjectShape,
            "subject must be an abstraction",
        );
    }
    type_is(assigned_type(d)?, &Type::Ab)?;
    env_is(d, &TypeEnv::empty())?;
    if d.counters() != Counters::ZERO {
        return fail(
            ViolationKind::CounterMismatch,
            "persistent abstraction has zero counters",
        );
    }
    Ok(())
}

fn app_parts(d: &Derivation) -> Result<(&Term, &Term), (ViolationKind, String)> {
    match subject_term(d)? {
        Term::App(t, u) => Ok((t, u)),
        other => fail(
            ViolationKind::SubjectShape,
            format!("`{other}` is not an application"),
        ),
    }
}

fn check_app_v(d: &Derivation) -> Local {
    premises(d, 2)?;
    let (t, u) = app_parts(d)?;
    let (p0, p1) = (&d.premises[0], &d.premises[1]);
    same_subject(p0, t)?;
    same_subject(p1, u)?;
    let Type::Arrow(m, tau) = assigned_type(p0)? else {
        return fail(ViolationKind::TypeShape, "head must have an arrow type");
    };
    let m2 = multi(assigned_type(p1)?, "argument type")?;
    if *m != m2 {
        return fail(
            ViolationKind::TypeMismatch,
            format!("argument has {m2}, head expects {m}"),
        );
    }
    type_is(assigned_type(d)?, tau)?;
    env_sum(d)?;
    counters_are(d, premise_sum(d) + Counters::v(1, 0), System::V)
}

fn check_persistent_v(d: &Derivation) -> Local {
    premises(d, 2)?;
    let (t, u) = app_parts(d)?;
    let (p0, p1) = (&d.premises[0], &d.premises[1]);
    same_subject(p0, t)?;
    same_subject(p1, u)?;
    let (th, ta) = (assigned_type(p0)?, assigned_type(p1)?);
    if d.rule == Rule::AppP1 {
        if !matches!(th, Type::Vr | Type::N) {
            return fail(
                ViolationKind::NotTightConstant,
                format!("head type {th} is not vr or n"),
            );
        }
        if !ta.is_tight_constant() {
            return fail(
                ViolationKind::NotTightConstant,
                format!("argument type {ta} is not tight"),
            );
        }
    } else {
        if !th.is_tight_constant() {
            return fail(
                ViolationKind::NotTightConstant,
                format!("head type {th} is not tight"),
            );
        }
        if *ta != Type::N {
            return fail(
                ViolationKind::NotTightConstant,
                format!("argument type {ta} is not n"),
            );
        }
    }
    type_is(assigned_type(d)?, &Type::N)?;
    env_sum(d)?;
    counters_are(d, premise_sum(d) + Counters::v(0, 1), System::V)
}

fn check_lift(d: &Derivation) -> Local {
    premises(d, 1)?;
    let v = subject_term(d)?;
    if !v.is_value() {
        return fail(ViolationKind::SubjectShape, format!("`{v}` is not a value"));
    }
    let p = &d.premises[0];
    same_subject(p, v)?;
    let mu = assigned_type(p)?;
    if !is_liftable(mu) || !wf_value_gs(mu) {
        return fail(ViolationKind::TypeShape, format!("{mu} cannot be lifted"));
    }
    let m = monadic(assigned_type(d)?, "lifted type")?;
    if m.input != m.output.state {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!("lift changes the state type: {m}"),
        );
    }
    type_is(&m.output.ty, mu)?;
    env_is(d, p.env())?;
    counters_are(d, p.counters(), System::Gs)
}

fn check_app_gs(d: &Derivation) -> Local {
    premises(d, 2)?;
    let (v, t) = app_parts(d)?;
    if !v.is_value() {
        return fail(
            ViolationKind::SubjectShape,
            format!("head `{v}` is not a value"),
        );
    }
    let (p0, p1) = (&d.premises[0], &d.premises[1]);
    same_subject(p0, v)?;
    same_subject(p1, t)?;
    let Type::Arrow(m, delta) = assigned_type(p0)? else {
        return fail(ViolationKind::TypeShape, "head must have an arrow type");
    };
    let delta = monadic(delta, "arrow codomain")?;
    let a = monadic(assigned_type(p1)?, "argument type")?;
    let m2 = multi(&a.output.ty, "argument result")?;
    if *m != m2 {
        return fail(
            ViolationKind::TypeMismatch,
            format!("argument yields {m2}, head expects {m}"),
        );
    }
    if a.output.state != delta.input {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!(
                "argument leaves {}, head expects {}",
                a.output.state, delta.input
            ),
        );
    }
    let expected = Type::Monadic(Box::new(Monadic {
        input: a.input,
        output: delta.output,
    }));
    type_is(assigned_type(d)?, &expected)?;
    env_sum(d)?;
    counters_are(d, premise_sum(d) + Counters::new(1, 0, 0), System::Gs)
}

fn check_get(d: &Derivation) -> Local {
    premises(d, 1)?;
    let Term::Get(l, x, body) = subject_term(d)? else {
        return fail(ViolationKind::SubjectShape, "subject must be a get");
    };
    let p = &d.premises[0];
    same_subject(p, body)?;
    let pm = monadic(assigned_type(p)?, "body type")?;
    let input = StateType::empty().with(l, p.env().get(x)).union(&pm.input);
    let found = monadic(assigned_type(d)?, "get type")?;
    if found.input != input {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!("input {}, expected {input}", found.input),
        );
    }
    config_is(&found.output, &pm.output)?;
    env_is(d, &p.env().without(x))?;
    counters_are(d, p.counters() + Counters::new(0, 1, 0), System::Gs)
}

fn check_set(d: &Derivation) -> Local {
    premises(d, 2)?;
    let Term::Set(l, v, body) = subject_term(d)? else {
        return fail(ViolationKind::SubjectShape, "subject must be a set");
    };
    let (p0, p1) = (&d.premises[0], &d.premises[1]);
    same_subject(p0, &v.to_term())?;
    same_subject(p1, body)?;
    let m = multi(assigned_type(p0)?, "stored value type")?;
    let pm = monadic(assigned_type(p1)?, "body type")?;
    let found = monadic(assigned_type(d)?, "set type")?;
    let Some(expected_input) = found.input.extend(l, m) else {
        return fail(
            ViolationKind::SemicolonViolation,
            format!("`{l}` is already in {}", found.input),
        );
    };
    if pm.input != expected_input {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!("body expects {}, set provides {expected_input}", pm.input),
        );
    }
    config_is(&found.output, &pm.output)?;
    env_sum(d)?;
    counters_are(d, premise_sum(d) + Counters::new(0, 1, 0), System::Gs)
}

fn check_appp1_gs(d: &Derivation) -> Local {
    premises(d, 1)?;
    let (h, t) = app_parts(d)?;
    let Term::Var(x) = h else {
        return fail(ViolationKind::SubjectShape, "head must be a variable");
    };
    let p = &d.premises[0];
    same_subject(p, t)?;
    let pm = monadic(assigned_type(p)?, "argument type")?;
    if !pm.output.ty.is_tight_constant() {
        return fail(
            ViolationKind::NotTightConstant,
            format!("argument result {} is not tight", pm.output.ty),
        );
    }
    let expected = Type::monadic(pm.input, Type::N, pm.output.state);
    type_is(assigned_type(d)?, &expected)?;
    env_is(
        d,
        &TypeEnv::singleton(x, MultiType::singleton(Type::Vr)).union(p.env()),
    )?;
    counters_are(d, p.counters() + Counters::new(0, 0, 1), System::Gs)
}

fn check_appp2_gs(d: &Derivation) -> Local {
    premises(d, 1)?;
    let (h, u) = app_parts(d)?;
    if !h.is_abs() {
        return fail(ViolationKind::SubjectShape, "head must be an abstraction");
    }
    let p = &d.premises[0];
    same_subject(p, u)?;
    let pm = monadic(assigned_type(p)?, "argument type")?;
    if pm.output.ty != Type::N {
        return fail(
            ViolationKind::NotTightConstant,
            format!("argument result {} is not n", pm.output.ty),
        );
    }
    type_is(assigned_type(d)?, &Type::Monadic(Box::new(pm)))?;
    env_is(d, p.env())?;
    counters_are(d, p.counters() + Counters::new(0, 0, 1), System::Gs)
}

fn state_parts(
    d: &Derivation,
) -> Result<(&crate::syntax::State, &StateType), (ViolationKind, String)> {
    match (&d.conclusion.subject, &d.conclusion.assigned) {
        (Subject::State(s), Assigned::State(st)) => Ok((s, st)),
        _ => fail(ViolationKind::SubjectShape, "expected a state judgement"),
    }
}

fn check_emp(d: &Derivation) -> Local {
    premises(d, 0)?;
    let (s, st) = state_parts(d)?;
    if !s.is_empty() {
        return fail(
            ViolationKind::SubjectShape,
            "subject must be the empty state",
        );
    }
    if !st.is_empty() {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!("expected {{}}, found {st}"),
        );
    }
    env_is(d, &TypeEnv::empty())?;
    counters_are(d, Counters::ZERO, System::Gs)
}

fn check_upd(d: &Derivation) -> Local {
    premises(d, 2)?;
    let (s, st) = state_parts(d)?;
    let Some(((l, v), rest)) = s.0.split_first() else {
        return fail(
            ViolationKind::SubjectShape,
            "subject must be a non-empty state",
        );
    };
    let (p0, p1) = (&d.premises[0], &d.premises[1]);
    same_subject(p0, &v.to_term())?;
    let m = multi(assigned_type(p0)?, "stored value type")?;
    let (q, sq) = state_parts(p1)?;
    if !q.alpha_eq(&crate::syntax::State(rest.to_vec())) {
        return fail(ViolationKind::SubjectMismatch, format!("premise types {q}"));
    }
    let Some(expected) = sq.extend(l, m) else {
        return fail(
            ViolationKind::SemicolonViolation,
            format!("`{l}` is already in {sq}"),
        );
    };
    if *st != expected {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!("found {st}, expected {expected}"),
        );
    }
    env_sum(d)?;
    counters_are(d, premise_sum(d), System::Gs)
}

fn check_conf(d: &Derivation) -> Local {
    premises(d, 2)?;
    let (Subject::Config(c), Assigned::Config(k)) = (&d.conclusion.subject, &d.conclusion.assigned)
    else {
        return fail(
            ViolationKind::SubjectShape,
            "expected a configuration judgement",
        );
    };
    let (p0, p1) = (&d.premises[0], &d.premises[1]);
    same_subject(p0, &c.term)?;
    let pm = monadic(assigned_type(p0)?, "term type")?;
    let (s, st) = state_parts(p1)?;
    if !s.alpha_eq(&c.state) {
        return fail(
            ViolationKind::SubjectMismatch,
            format!("premise types {s}, expected {}", c.state),
        );
    }
    if *st != pm.input {
        return fail(
            ViolationKind::StateTypeMismatch,
            format!("state has {st}, term expects {}", pm.input),
        );
    }
    config_is(k, &pm.output)?;
    env_sum(d)?;
    counters_are(d, premise_sum(d), System::Gs)
}
