//! Tight typing of normal forms and states, the trace-driven synthesizer, and
//! the soundness verifier that runs a derivation's subject.

use crate::derivation::{
    Counters, Derivation, RuleViolation, System, build, check_derivation, is_tight_derivation,
};
use crate::eval::{eval_cbv, eval_gs, is_blocked, is_normal_cbv, is_normal_gs};
use crate::syntax::{Configuration, State, Term, size};
use crate::transform::{TransformError, subject_expansion_gs, subject_expansion_v};
use crate::types::{StateType, Type};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("`{0}` is not a normal form")]
    NotNormal(Term),
    #[error("state type {0} is not tight")]
    NotTightStateType(StateType),
    #[error("location `{0}` is bound twice in the state")]
    DuplicateLocation(String),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(usize),
    #[error("evaluation ends in the blocked configuration `{0}`")]
    BlockedFinal(Configuration),
    #[error("no tight derivation survives expansion across step {step}: {source}")]
    Untypable { step: usize, source: TransformError },
    #[error("derivation is not tight")]
    NotTight,
    #[error("subject kind does not fit system {0}")]
    WrongSubject(System),
    #[error(transparent)]
    Check(#[from] RuleViolation),
}

type R<T> = Result<T, SynthError>;

fn build_ok(r: Result<Derivation, crate::derivation::BuildError>) -> Derivation {
    r.expect("canonical normal-form derivations are well formed")
}

/// Canonical tight derivation of a normal form in system V.
pub fn type_normal_form_v(t: &Term) -> R<Derivation> {
    if !t.is_cbv() || !is_normal_cbv(t) {
        return Err(SynthError::NotNormal(t.clone()));
    }
    Ok(nf_v(t))
}

fn nf_v(t: &Term) -> Derivation {
    match t {
        Term::Var(x) => build::ax(x, Type::Vr),
        Term::Abs(..) => build_ok(build::lamp(t)),
        Term::App(f, a) => {
            let (h, arg) = (nf_v(f), nf_v(a));
            if f.is_abs() {
                build_ok(build::appp2_v(h, arg))
            } else {
                build_ok(build::appp1_v(h, arg))
            }
        }
        _ => unreachable!("normal CBV terms"),
    }
}

/// Tight derivation of a state: every location at the empty multiset.
pub fn type_state(s: &State) -> R<Derivation> {
    let mut seen = std::collections::BTreeSet::new();
    for (l, _) in &s.0 {
        if !seen.insert(l) {
            return Err(SynthError::DuplicateLocation(l.clone()));
        }
    }
    let mut d = build::emp();
    for (l, v) in s.0.iter().rev() {
        d = build_ok(build::upd(l, build::empty_many(&v.to_term()), d));
    }
    Ok(d)
}

/// Canonical tight derivation of a normal form in system GS, with `S` as
/// both input and output state type.
pub fn type_normal_form_gs(t: &Term, s: &StateType) -> R<Derivation> {
    if !t.is_gs_valid() || !is_normal_gs(t) {
        return Err(SynthError::NotNormal(t.clone()));
    }
    if !s.is_tight() {
        return Err(SynthError::NotTightStateType(s.clone()));
    }
    Ok(nf_gs(t, s))
}

fn nf_gs(t: &Term, s: &StateType) -> Derivation {
    match t {
        Term::Var(x) => build_ok(build::lift(build::ax(x, Type::Vr), s.clone())),
        Term::Abs(..) => build_ok(build::lift(build_ok(build::lamp(t)), s.clone())),
        Term::App(f, a) => match &**f {
            Term::Var(x) => build_ok(build::appp1_gs(x, nf_gs(a, s))),
            _ => build_ok(build::appp2_gs(f, nf_gs(a, s))),
        },
        _ => unreachable!("normal GS terms"),
    }
}

/// Evaluates `t`, types its normal form and expands back along the trace.
pub fn synthesize_tight_v(t: &Term, fuel: usize) -> R<Derivation> {
    let out = eval_cbv(t, fuel).map_err(|e| SynthError::FuelExhausted(e.trace.steps.len()))?;
    let mut d = type_normal_form_v(&out.normal)?;
    let points = out.trace.points();
    for i in (0..out.trace.steps.len()).rev() {
        d = subject_expansion_v(&d, points[i])
            .map_err(|source| SynthError::Untypable { step: i, source })?;
    }
    check_derivation(&d, System::V)?;
    Ok(d)
}

/// As [`synthesize_tight_v`] for configurations. Blocked final
/// configurations have no tight derivation.
pub fn synthesize_tight_gs(c: &Configuration, fuel: usize) -> R<Derivation> {
    let out = eval_gs(c, fuel).map_err(|e| SynthError::FuelExhausted(e.trace.steps.len()))?;
    if out.blocked() {
        return Err(SynthError::BlockedFinal(out.final_config));
    }
    let fin = &out.final_config;
    let ds = type_state(&fin.state)?;
    let st = ds.state_type().expect("state derivation").clone();
    let dt = type_normal_form_gs(&fin.term, &st)?;
    let mut d = build::conf(dt, ds).expect("input of a normal form is the state type");
    let points = out.trace.points();
    for i in (0..out.trace.steps.len()).rev() {
        d = subject_expansion_gs(&d, points[i])
            .map_err(|source| SynthError::Untypable { step: i, source })?;
    }
    check_derivation(&d, System::Gs)?;
    Ok(d)
}

pub fn synthesize_tight(c: &Configuration, system: System, fuel: usize) -> R<Derivation> {
    match system {
        System::V => synthesize_tight_v(&c.term, fuel),
        System::Gs => synthesize_tight_gs(c, fuel),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Match,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Observed {
    pub b: u64,
    pub m: u64,
    pub size: u64,
    pub final_form: String,
    pub blocked: bool,
}

/// The outcome of running the subject of a tight derivation against what
/// its counters predict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub system: String,
    pub predicted: Counters,
    /// `None` when evaluation ran out of fuel.
    pub observed: Option<Observed>,
    pub verdict: Verdict,
    pub diff: Vec<String>,
}

impl Certificate {
    pub fn is_match(&self) -> bool {
        self.verdict == Verdict::Match
    }
}

/// Checks `d`, then evaluates its subject and compares.
pub fn verify_soundness(d: &Derivation, system: System, fuel: usize) -> R<Certificate> {
    check_derivation(d, system)?;
    if !is_tight_derivation(d) {
        return Err(SynthError::NotTight);
    }
    let predicted = d.counters();
    let observed = match system {
        System::V => {
            let t = d.term().ok_or(SynthError::WrongSubject(system))?;
            eval_cbv(t, fuel).ok().map(|o| Observed {
                b: o.beta_count as u64,
                m: 0,
                size: size(&o.normal) as u64,
                final_form: o.normal.to_string(),
                blocked: false,
            })
        }
        System::Gs => {
            let c = d.config().ok_or(SynthError::WrongSubject(system))?;
            eval_gs(c, fuel).ok().map(|o| Observed {
                b: o.b as u64,
                m: o.m as u64,
                size: o.final_config.size() as u64,
                blocked: is_blocked(&o.final_config),
                final_form: o.final_config.to_string(),
            })
        }
    };
    let mut diff = Vec::new();
    match &observed {
        None => diff.push(format!("evaluation did not finish within {fuel} steps")),
        Some(o) => {
            if o.b != predicted.b {
                diff.push(format!(
                    "beta steps: predicted {}, observed {}",
                    predicted.b, o.b
                ));
            }
            if system == System::Gs && o.m != predicted.m {
                diff.push(format!(
                    "memory steps: predicted {}, observed {}",
                    predicted.m, o.m
                ));
            }
            if o.size != predicted.d {
                diff.push(format!(
                    "normal-form size: predicted {}, observed {}",
                    predicted.d, o.size
                ));
            }
            if o.blocked {
                diff.push("final configuration is blocked".to_string());
            }
        }
    }
    let verdict = if diff.is_empty() {
        Verdict::Match
    } else {
        Verdict::Mismatch
    };
    Ok(Certificate {
        system: system.to_string(),
        predicted,
        observed,
        verdict,
        diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::Rule;
    use crate::syntax::{parse_config, parse_term};

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn normal_forms_in_v() {
        let d = type_normal_form_v(&t(r"(\z.z) (y y)")).unwrap();
        assert_eq!(d.counters(), Counters::v(0, 2));
        assert!(is_tight_derivation(&d));
        let d = type_normal_form_v(&t("x")).unwrap();
        assert_eq!((d.rule, d.ty()), (Rule::Ax, Some(&Type::Vr)));
        let d = type_normal_form_v(&t(r"x (\y.y (\z.z))")).unwrap();
        assert_eq!(d.counters(), Counters::v(0, 1));
        assert!(matches!(
            type_normal_form_v(&t(r"(\x.x) (\y.y)")),
            Err(SynthError::NotNormal(_))
        ));
    }

    #[test]
    fn states() {
        let d = type_state(&State::empty()).unwrap();
        assert_eq!(d.rule, Rule::Emp);
        let s = crate::syntax::parse_state(r"[l := \z.z]").unwrap();
        let d = type_state(&s).unwrap();
        assert_eq!(d.rule, Rule::Upd);
        assert_eq!(d.state_type().unwrap().to_string(), "{l: []}");
        let s = crate::syntax::parse_state(r"[a := x, b := y, c := z]").unwrap();
        assert_eq!(type_state(&s).unwrap().node_count(), 7);
        let dup = crate::syntax::parse_state(r"[a := x, a := y]").unwrap();
        assert_eq!(
            type_state(&dup),
            Err(SynthError::DuplicateLocation("a".into()))
        );
    }

    #[test]
    fn normal_forms_in_gs() {
        let d = type_normal_form_gs(&t("z"), &StateType::empty()).unwrap();
        assert_eq!(d.ty().unwrap().to_string(), "{} => vr x {}");
        let d = type_normal_form_gs(&t(r"x (\y.y)"), &StateType::empty()).unwrap();
        assert_eq!(
            (d.rule, d.counters()),
            (Rule::AppP1, Counters::new(0, 0, 1))
        );
        let s = StateType::empty().with("l", crate::types::MultiType::singleton(Type::Vr));
        let d = type_normal_form_gs(&t(r"\x.x"), &s).unwrap();
        assert_eq!(d.monadic().unwrap().output.ty, Type::Ab);
    }

    #[test]
    fn synthesis_of_the_examples() {
        let d = synthesize_tight_v(&t(r"(\x.(x x) (y y)) (\z.z)"), 100).unwrap();
        assert_eq!(d.counters(), Counters::v(2, 2));
        assert_eq!(d.ty(), Some(&Type::N));
        let c = parse_config(r"((\x.get(l, y. y x)) (set(l, \z.z, z)) | [])").unwrap();
        let d = synthesize_tight_gs(&c, 100).unwrap();
        assert_eq!(d.counters(), Counters::new(2, 2, 0));
        let cert = verify_soundness(&d, System::Gs, 100).unwrap();
        assert!(cert.is_match(), "{cert:?}");
    }

    #[test]
    fn blocked_and_trivial_configurations() {
        let c = parse_config("(get(l, x. x) | [])").unwrap();
        assert!(matches!(
            synthesize_tight_gs(&c, 100),
            Err(SynthError::BlockedFinal(_))
        ));
        let c = parse_config(r"(y | [l := \x.x])").unwrap();
        assert_eq!(
            synthesize_tight_gs(&c, 100).unwrap().counters(),
            Counters::ZERO
        );
    }

    #[test]
    fn non_normalizing_runs_out_of_fuel() {
        let omega = t(r"(\x.x x) (\x.x x)");
        assert!(matches!(
            synthesize_tight_v(&omega, 50),
            Err(SynthError::FuelExhausted(50))
        ));
    }
}
