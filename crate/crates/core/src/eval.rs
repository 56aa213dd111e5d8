//! Small-step evaluation for both calculi with exact step accounting.

use crate::syntax::{Configuration, State, Term, alpha_eq, substitute};
use serde::Serialize;
use std::fmt;

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StepLabel {
    Beta,
    GetStep,
    SetStep,
}

impl StepLabel {
    pub fn is_memory(self) -> bool {
        !matches!(self, StepLabel::Beta)
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepLabel::Beta => "beta",
            StepLabel::GetStep => "get",
            StepLabel::SetStep => "set",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace<T> {
    pub initial: T,
    pub steps: Vec<(StepLabel, T)>,
}

impl<T> Trace<T> {
    pub fn last(&self) -> &T {
        self.steps.last().map(|(_, t)| t).unwrap_or(&self.initial)
    }

    pub fn beta_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|(l, _)| *l == StepLabel::Beta)
            .count()
    }

    pub fn mem_count(&self) -> usize {
        self.steps.iter().filter(|(l, _)| l.is_memory()).count()
    }

    /// The states of the trace in order, starting with the initial one.
    pub fn points(&self) -> Vec<&T> {
        std::iter::once(&self.initial)
            .chain(self.steps.iter().map(|(_, t)| t))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("fuel exhausted after {} steps", .trace.steps.len())]
pub struct FuelExhausted<T: fmt::Debug> {
    pub trace: Trace<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CbvOutcome {
    pub normal: Term,
    pub beta_count: usize,
    pub trace: Trace<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GsOutcome {
    pub final_config: Configuration,
    pub trace: Trace<Configuration>,
    pub b: usize,
    pub m: usize,
}

impl GsOutcome {
    pub fn blocked(&self) -> bool {
        is_blocked(&self.final_config)
    }
}

fn beta_redex(t: &Term) -> Option<Term> {
    if let Term::App(f, a) = t
        && let Term::Abs(x, body) = &**f
        && let Some(v) = a.as_value()
    {
        return Some(substitute(body, x, &v));
    }
    None
}

/// One step of the deterministic relation: β on a value argument, then the
/// function side, then the argument side when the function side is stuck.
pub fn step_cbv(t: &Term) -> Option<Term> {
    if let Some(r) = beta_redex(t) {
        return Some(r);
    }
    match t {
        Term::App(f, a) => {
            if let Some(f2) = step_cbv(f) {
                Some(Term::App(Box::new(f2), a.clone()))
            } else {
                step_cbv(a).map(|a2| Term::App(f.clone(), Box::new(a2)))
            }
        }
        _ => None,
    }
}

/// All one-step reducts of β on values closed under weak contexts, up to α.
pub fn step_all_cbv(t: &Term) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    let push = |u: Term, out: &mut Vec<Term>| {
        if !out.iter().any(|w| alpha_eq(w, &u)) {
            out.push(u);
        }
    };
    if let Some(r) = beta_redex(t) {
        push(r, &mut out);
    }
    if let Term::App(f, a) = t {
        for f2 in step_all_cbv(f) {
            push(Term::App(Box::new(f2), a.clone()), &mut out);
        }
        for a2 in step_all_cbv(a) {
            push(Term::App(f.clone(), Box::new(a2)), &mut out);
        }
    }
    out
}

pub fn is_neutral_cbv(t: &Term) -> bool {
    match t {
        Term::App(f, a) => {
            (f.is_var() && is_normal_cbv(a))
                || (is_normal_cbv(f) && is_neutral_cbv(a))
                || (is_neutral_cbv(f) && is_normal_cbv(a))
        }
        _ => false,
    }
}

pub fn is_normal_cbv(t: &Term) -> bool {
    t.is_value() || is_neutral_cbv(t)
}

pub fn eval_cbv(t: &Term, fuel: usize) -> Result<CbvOutcome, FuelExhausted<Term>> {
    let mut trace = Trace {
        initial: t.clone(),
        steps: Vec::new(),
    };
    let mut cur = t.clone();
    loop {
        match step_cbv(&cur) {
            None => {
                let beta_count = trace.steps.len();
                return Ok(CbvOutcome {
                    normal: cur,
                    beta_count,
                    trace,
                });
            }
            Some(_) if trace.steps.len() >= fuel => return Err(FuelExhausted { trace }),
            Some(next) => {
                trace.steps.push((StepLabel::Beta, next.clone()));
                cur = next;
            }
        }
    }
}

pub fn step_gs(c: &Configuration) -> Option<(StepLabel, Configuration)> {
    let s = &c.state;
    if let Some(r) = beta_redex(&c.term) {
        return Some((StepLabel::Beta, Configuration::new(r, s.clone())));
    }
    match &c.term {
        Term::Get(l, x, body) => {
            let v = s.lookup(l)?;
            Some((
                StepLabel::GetStep,
                Configuration::new(substitute(body, x, v), s.clone()),
            ))
        }
        Term::Set(l, v, body) => Some((
            StepLabel::SetStep,
            Configuration::new((**body).clone(), s.prepend(l, v.clone())),
        )),
        Term::App(f, a) if f.is_value() => {
            let inner = Configuration::new((**a).clone(), s.clone());
            let (label, next) = step_gs(&inner)?;
            Some((
                label,
                Configuration::new(Term::App(f.clone(), Box::new(next.term)), next.state),
            ))
        }
        _ => None,
    }
}

pub fn eval_gs(c: &Configuration, fuel: usize) -> Result<GsOutcome, FuelExhausted<Configuration>> {
    let mut trace = Trace {
        initial: c.clone(),
        steps: Vec::new(),
    };
    let mut cur = c.clone();
    loop {
        match step_gs(&cur) {
            None => {
                let b = trace.beta_count();
                let m = trace.mem_count();
                return Ok(GsOutcome {
                    final_config: cur,
                    trace,
                    b,
                    m,
                });
            }
            Some(_) if trace.steps.len() >= fuel => return Err(FuelExhausted { trace }),
            Some((label, next)) => {
                trace.steps.push((label, next.clone()));
                cur = next;
            }
        }
    }
}

pub fn is_blocked(c: &Configuration) -> bool {
    blocked_term(&c.term, &c.state)
}

fn blocked_term(t: &Term, s: &State) -> bool {
    match t {
        Term::Get(l, _, _) => s.lookup(l).is_none(),
        Term::App(f, a) => f.is_value() && blocked_term(a, s),
        _ => false,
    }
}

pub fn is_neutral_gs(t: &Term) -> bool {
    match t {
        Term::App(f, a) => match **f {
            Term::Var(_) => is_normal_gs(a),
            Term::Abs(..) => is_neutral_gs(a),
            _ => false,
        },
        _ => false,
    }
}

pub fn is_normal_gs(t: &Term) -> bool {
    t.is_value() || is_neutral_gs(t)
}

pub fn is_final(c: &Configuration) -> bool {
    is_blocked(c) || is_normal_gs(&c.term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_config, parse_term};

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn first_step_of_the_cbv_example() {
        let r = step_cbv(&t(r"(\x.(x x) (y y)) (\z.z)")).unwrap();
        assert!(alpha_eq(&r, &t(r"((\z.z) (\z.z)) (y y)")));
        assert_eq!(step_cbv(&t("x y")), None);
    }

    #[test]
    fn omega_steps_to_itself() {
        let omega = t(r"(\x.x x) (\x.x x)");
        assert!(alpha_eq(&step_cbv(&omega).unwrap(), &omega));
        assert!(eval_cbv(&omega, 100).is_err());
    }

    #[test]
    fn cbv_example_normalizes_in_two_steps() {
        let out = eval_cbv(&t(r"(\x.(x x) (y y)) (\z.z)"), 10).unwrap();
        assert_eq!(out.beta_count, 2);
        assert!(alpha_eq(&out.normal, &t(r"(\z.z) (y y)")));
        assert_eq!(crate::syntax::size(&out.normal), 2);
        assert_eq!(eval_cbv(&t("x"), 0).unwrap().beta_count, 0);
    }

    #[test]
    fn nondeterministic_reducts() {
        let two = step_all_cbv(&t(r"((\x.x) (\z.z)) ((\x.x) (\w.w))"));
        assert_eq!(two.len(), 2);
        assert!(step_all_cbv(&t("x y")).is_empty());
        let one = step_all_cbv(&t(r"(\x.x) (\z.z)"));
        assert_eq!(one.len(), 1);
        assert!(alpha_eq(&one[0], &t(r"\z.z")));
    }

    #[test]
    fn normal_form_grammar() {
        assert!(is_normal_cbv(&t(r"x (\y.y (\z.z))")));
        assert!(is_normal_cbv(&t(r"(\x.x) (y (\z.z))")));
        assert!(!is_normal_cbv(&t(r"(\x.x) (\z.z)")));
        assert!(is_normal_cbv(&t("x y")));
    }

    #[test]
    fn gs_example_trace() {
        let c = parse_config(r"((\x.get(l, y. y x)) (set(l, \z.z, z)) | [])").unwrap();
        let out = eval_gs(&c, 10).unwrap();
        let labels: Vec<StepLabel> = out.trace.steps.iter().map(|(l, _)| *l).collect();
        use StepLabel::*;
        assert_eq!(labels, vec![SetStep, Beta, GetStep, Beta]);
        assert_eq!((out.b, out.m), (2, 2));
        assert!(
            out.final_config
                .alpha_eq(&parse_config(r"(z | [l := \z.z])").unwrap())
        );
        assert!(!out.blocked());
    }

    #[test]
    fn blocked_configurations() {
        let c = parse_config("(get(l, x. x) | [])").unwrap();
        assert!(step_gs(&c).is_none());
        assert!(is_blocked(&c));
        let c = parse_config(r"((\y. y get(l, x. x)) z | [])").unwrap();
        let out = eval_gs(&c, 10).unwrap();
        assert_eq!((out.b, out.m), (1, 0));
        assert!(out.blocked());
        assert_eq!(out.final_config.to_string(), "(z get(l, x. x) | [])");
    }

    #[test]
    fn final_unblocked_and_values() {
        let c = parse_config(r"((\x.x) (y z) | [])").unwrap();
        assert!(is_final(&c) && !is_blocked(&c));
        let c = parse_config(r"(z | [l := \z.z])").unwrap();
        assert_eq!(eval_gs(&c, 10).unwrap().trace.steps.len(), 0);
        let c = parse_config("(set(l, y, x) | [])").unwrap();
        assert!(!is_final(&c));
    }
}
