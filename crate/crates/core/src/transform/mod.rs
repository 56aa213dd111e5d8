//! Derivation-to-derivation constructions: splitting and merging value and
//! state derivations, substitution, anti-substitution, and one-step subject
//! reduction and expansion.

mod reduction;

use crate::derivation::{
    BuildError, Derivation, Rule, RuleViolation, Subject, System, build, check_derivation,
};
use crate::syntax::{
    Name, State, Term, Value, alpha_eq, free_vars, fresh_name, rename_free, substitute,
};
use crate::types::{MultiType, Type};
use std::collections::BTreeSet;
use thiserror::Error;

pub use reduction::{
    Reduced, subject_expansion, subject_expansion_gs, subject_expansion_v, subject_reduction,
    subject_reduction_gs, subject_reduction_v,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("parts {parts} do not make up {whole}")]
    PartitionMismatch { whole: MultiType, parts: MultiType },
    #[error("expected a (many) derivation of a value, found ({0})")]
    NotMany(Rule),
    #[error("derivations type different values: `{0}` and `{1}`")]
    SubjectMismatch(String, String),
    #[error("location `{0}` is not typed by the state derivation")]
    LocationUnbound(String),
    #[error("the environment has {expected} for `{var}` but the value is typed {found}")]
    MultisetMismatch {
        var: Name,
        expected: MultiType,
        found: MultiType,
    },
    #[error("cannot decompose: {0}")]
    DecompositionFailure(String),
    #[error("derivation is not tight")]
    NotTight,
    #[error("step mismatch: {0}")]
    StepMismatch(String),
    #[error("no state typing fits the reduct: {0}")]
    StateTypeGap(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("produced an ill-formed derivation: {0}")]
    Check(#[from] RuleViolation),
}

type R<T> = Result<T, TransformError>;

fn decomp<T>(msg: impl Into<String>) -> R<T> {
    Err(TransformError::DecompositionFailure(msg.into()))
}

fn value_of(d: &Derivation) -> R<Term> {
    match d.term() {
        Some(t) if t.is_value() => Ok(t.clone()),
        Some(t) => decomp(format!("`{t}` is not a value")),
        None => decomp("not a term derivation"),
    }
}

/// Splits a (many) derivation of `v : M` into derivations of `v : M_i`.
pub fn split_value(d: &Derivation, parts: &[MultiType]) -> R<Vec<Derivation>> {
    if d.rule != Rule::Many {
        return Err(TransformError::NotMany(d.rule));
    }
    let whole = d.multi().cloned().unwrap_or_default();
    let joined = MultiType::union_all(parts);
    if joined != whole {
        return Err(TransformError::PartitionMismatch {
            whole,
            parts: joined,
        });
    }
    let v = value_of(d)?;
    let mut used = vec![false; d.premises.len()];
    let mut out = Vec::with_capacity(parts.len());
    for part in parts {
        let mut chosen = Vec::new();
        for ty in part.iter() {
            let i = (0..d.premises.len())
                .find(|&i| !used[i] && d.premises[i].ty() == Some(ty))
                .expect("multiset equality guarantees a premise");
            used[i] = true;
            chosen.push(d.premises[i].clone());
        }
        out.push(build::many(&v, chosen)?);
    }
    Ok(out)
}

/// Joins derivations of `v : M_i` into one of `v : ⊔ M_i`.
pub fn merge_values(v: &Term, ds: Vec<Derivation>) -> R<Derivation> {
    let mut premises = Vec::new();
    for d in ds {
        if d.rule != Rule::Many {
            return Err(TransformError::NotMany(d.rule));
        }
        let w = value_of(&d)?;
        if !alpha_eq(&w, v) {
            return Err(TransformError::SubjectMismatch(
                w.to_string(),
                v.to_string(),
            ));
        }
        premises.extend(d.premises);
    }
    Ok(build::many(v, premises)?)
}

/// A state derivation with one binding taken out.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSplit {
    /// Derivation of the value at the location.
    pub value: Derivation,
    /// Derivation of the state without that binding.
    pub rest: Derivation,
    /// Position of the binding in the original state.
    pub index: usize,
}

/// Takes the binding of `l` out of a state derivation.
pub fn split_state(d: &Derivation, l: &str) -> R<StateSplit> {
    let mut chain = Vec::new();
    let mut cur = d;
    loop {
        match cur.rule {
            Rule::Upd => {
                let (loc, _) = &cur.state().expect("upd types a state").0[0];
                if loc == l {
                    let index = chain.len();
                    let mut rest = cur.premises[1].clone();
                    for (loc, stored) in chain.into_iter().rev() {
                        rest = build::upd(loc, stored, rest)?;
                    }
                    return Ok(StateSplit {
                        value: cur.premises[0].clone(),
                        rest,
                        index,
                    });
                }
                chain.push((loc.as_str(), cur.premises[0].clone()));
                cur = &cur.premises[1];
            }
            Rule::Emp => return Err(TransformError::LocationUnbound(l.to_string())),
            other => return decomp(format!("({other}) does not type a state")),
        }
    }
}

/// Inserts a binding of `l` at position `index` of a state derivation.
pub fn rebuild_state(rest: &Derivation, index: usize, l: &str, value: Derivation) -> R<Derivation> {
    if index == 0 {
        return Ok(build::upd(l, value, rest.clone())?);
    }
    if rest.rule != Rule::Upd {
        return decomp("state derivation shorter than the insertion point");
    }
    let (loc, _) = &rest.state().expect("upd types a state").0[0];
    let inner = rebuild_state(&rest.premises[1], index - 1, l, value)?;
    Ok(build::upd(loc, rest.premises[0].clone(), inner)?)
}

/// Renames the free variable `y` to `z` throughout a derivation. `z` must be
/// fresh for every subject in it.
pub fn rename_derivation(d: &Derivation, y: &str, z: &str) -> Derivation {
    let subject = match &d.conclusion.subject {
        Subject::Term(t) => Subject::Term(rename_free(t, y, z)),
        Subject::State(s) => Subject::State(rename_state(s, y, z)),
        Subject::Config(c) => Subject::Config(crate::syntax::Configuration::new(
            rename_free(&c.term, y, z),
            rename_state(&c.state, y, z),
        )),
    };
    let binds_y = matches!(d.term(), Some(Term::Abs(b, _) | Term::Get(_, b, _)) if b == y);
    let premises = if binds_y {
        d.premises.clone()
    } else {
        d.premises
            .iter()
            .map(|p| rename_derivation(p, y, z))
            .collect()
    };
    let mut out = d.clone();
    out.conclusion.subject = subject;
    out.conclusion.env = d.env().rename(y, z);
    out.premises = premises;
    out
}

fn rename_state(s: &State, y: &str, z: &str) -> State {
    State(
        s.0.iter()
            .map(|(l, v)| {
                (
                    l.clone(),
                    rename_free(&v.to_term(), y, z).as_value().expect("value"),
                )
            })
            .collect(),
    )
}

fn names_of(ts: &[&Term]) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for t in ts {
        t.all_names(&mut out);
    }
    out
}

/// Substitutes the value typed by `dv` for `x` in the subject of `dt`.
/// The multiset of `x` in `dt` must be the one `dv` assigns.
pub fn subst_derivation(
    dt: &Derivation,
    x: &str,
    dv: &Derivation,
    system: System,
) -> R<Derivation> {
    let expected = dt.env().get(x);
    let found = dv.multi().cloned().unwrap_or_default();
    if dv.rule != Rule::Many {
        return Err(TransformError::NotMany(dv.rule));
    }
    if expected != found {
        return Err(TransformError::MultisetMismatch {
            var: x.to_string(),
            expected,
            found,
        });
    }
    let v = value_of(dv)?.as_value().expect("value");
    let out = subst(dt, x, &v, dv, system)?;
    check_derivation(&out, system)?;
    Ok(out)
}

fn subst(dt: &Derivation, x: &str, v: &Value, dv: &Derivation, system: System) -> R<Derivation> {
    if !dt.conclusion.subject.free_vars().contains(x) {
        if dv.multi().is_some_and(|m| !m.is_empty()) {
            return decomp(format!("`{x}` is not free but is typed"));
        }
        return Ok(dt.clone());
    }
    let parts: Vec<MultiType> = dt.premises.iter().map(|p| p.env().get(x)).collect();
    let sub = |p: &Derivation, dvp: &Derivation| subst(p, x, v, dvp, system);
    let vt = v.to_term();
    match (dt.rule, dt.conclusion.subject.clone()) {
        (Rule::Ax, _) => {
            // Subject is x itself, typed [σ].
            match dv.premises.as_slice() {
                [one] if one.ty() == dt.ty() => Ok(one.clone()),
                _ => {
                    decomp("axiom for the substituted variable needs exactly one matching premise")
                }
            }
        }
        (Rule::Many, Subject::Term(w)) => {
            let dvs = split_value(dv, &parts)?;
            let ps = dt
                .premises
                .iter()
                .zip(&dvs)
                .map(|(p, d)| sub(p, d))
                .collect::<R<Vec<_>>>()?;
            Ok(build::many(&substitute(&w, x, v), ps)?)
        }
        (Rule::Lam, Subject::Term(Term::Abs(y, _))) => {
            let (y, body) = unbind(&dt.premises[0], &y, &vt, x);
            Ok(build::lam(&y, sub(&body, dv)?)?)
        }
        (Rule::Get, Subject::Term(Term::Get(l, y, _))) => {
            let (y, body) = unbind(&dt.premises[0], &y, &vt, x);
            Ok(build::get(&l, &y, sub(&body, dv)?)?)
        }
        (Rule::LamP, Subject::Term(t)) => Ok(build::lamp(&substitute(&t, x, v))?),
        (Rule::Lift, _) => {
            let s = dt.monadic().expect("lift is monadic").input.clone();
            Ok(build::lift(sub(&dt.premises[0], dv)?, s)?)
        }
        (Rule::App | Rule::AppP1 | Rule::AppP2, _) if system == System::V => {
            let dvs = split_value(dv, &parts)?;
            let h = sub(&dt.premises[0], &dvs[0])?;
            let a = sub(&dt.premises[1], &dvs[1])?;
            Ok(match dt.rule {
                Rule::App => build::app_v(h, a)?,
                Rule::AppP1 => build::appp1_v(h, a)?,
                _ => build::appp2_v(h, a)?,
            })
        }
        (Rule::App, _) => {
            let dvs = split_value(dv, &parts)?;
            Ok(build::app_gs(
                sub(&dt.premises[0], &dvs[0])?,
                sub(&dt.premises[1], &dvs[1])?,
            )?)
        }
        (Rule::Set, Subject::Term(Term::Set(l, ..))) => {
            let dvs = split_value(dv, &parts)?;
            Ok(build::set(
                &l,
                sub(&dt.premises[0], &dvs[0])?,
                sub(&dt.premises[1], &dvs[1])?,
            )?)
        }
        (Rule::AppP1, Subject::Term(Term::App(h, _))) => {
            let Term::Var(y) = *h else {
                return decomp("persistent head is not a variable");
            };
            if y != x {
                return Ok(build::appp1_gs(&y, sub(&dt.premises[0], dv)?)?);
            }
            // The head occurrence of x is typed [vr]; only a variable fits there.
            let Value::Var(z) = v else {
                return decomp("an abstraction cannot replace a persistent head variable");
            };
            let dvs = split_value(dv, &[MultiType::singleton(Type::Vr), parts[0].clone()])?;
            Ok(build::appp1_gs(z, sub(&dt.premises[0], &dvs[1])?)?)
        }
        (Rule::AppP2, Subject::Term(Term::App(h, _))) => Ok(build::appp2_gs(
            &substitute(&h, x, v),
            sub(&dt.premises[0], dv)?,
        )?),
        (Rule::Upd, Subject::State(s)) => {
            let dvs = split_value(dv, &parts)?;
            let (l, _) = &s.0[0];
            Ok(build::upd(
                l,
                sub(&dt.premises[0], &dvs[0])?,
                sub(&dt.premises[1], &dvs[1])?,
            )?)
        }
        (Rule::Conf, _) => {
            let dvs = split_value(dv, &parts)?;
            Ok(build::conf(
                sub(&dt.premises[0], &dvs[0])?,
                sub(&dt.premises[1], &dvs[1])?,
            )?)
        }
        (rule, s) => decomp(format!("({rule}) cannot type `{s}`")),
    }
}

/// Moves a binder out of the way of the free variables of the substituted
/// value, renaming inside the body derivation when needed.
fn unbind(body: &Derivation, y: &str, v: &Term, x: &str) -> (Name, Derivation) {
    if !free_vars(v).contains(y) {
        return (y.to_string(), body.clone());
    }
    let mut avoid = names_of(&[v, body.term().expect("term body")]);
    avoid.insert(x.to_string());
    let z = fresh_name(y, &avoid);
    (z.clone(), rename_derivation(body, y, &z))
}

/// Given a derivation of `t{x:=v}`, recovers derivations of `t` (with `x`
/// typed by some `M`) and of `v : M`.
pub fn antisubst_derivation(
    d: &Derivation,
    t: &Term,
    x: &str,
    v: &Value,
    system: System,
) -> R<(Derivation, Derivation)> {
    let expected = substitute(t, x, v);
    match d.term() {
        Some(s) if alpha_eq(s, &expected) => {}
        Some(s) => {
            return Err(TransformError::SubjectMismatch(
                s.to_string(),
                expected.to_string(),
            ));
        }
        None => return decomp("not a term derivation"),
    }
    let (dt, dv) = anti(d, t, x, v, system)?;
    check_derivation(&dt, system)?;
    check_derivation(&dv, system)?;
    Ok((dt, dv))
}

fn anti(
    d: &Derivation,
    t: &Term,
    x: &str,
    v: &Value,
    system: System,
) -> R<(Derivation, Derivation)> {
    let vt = v.to_term();
    if let Term::Var(y) = t
        && y == x
    {
        return anti_var(d, x, &vt);
    }
    if !free_vars(t).contains(x) {
        return Ok((d.clone(), build::empty_many(&vt)));
    }
    let rec = |p: &Derivation, u: &Term| anti(p, u, x, v, system);
    let merge = |a: Derivation, b: Derivation| merge_values(&vt, vec![a, b]);
    match (d.rule, t) {
        (Rule::Many, _) => {
            let (dts, dvs): (Vec<_>, Vec<_>) = d
                .premises
                .iter()
                .map(|p| rec(p, t))
                .collect::<R<Vec<_>>>()?
                .into_iter()
                .unzip();
            Ok((build::many(t, dts)?, merge_values(&vt, dvs)?))
        }
        (Rule::Lift, _) => {
            let s = d.monadic().expect("lift is monadic").input.clone();
            let (dt, dv) = rec(&d.premises[0], t)?;
            Ok((build::lift(dt, s)?, dv))
        }
        (Rule::LamP, Term::Abs(..)) => Ok((build::lamp(t)?, build::empty_many(&vt))),
        (Rule::Lam, Term::Abs(y, u)) => {
            let Some(Term::Abs(y2, _)) = d.term() else {
                return decomp("lam subject");
            };
            let (z, body_d, body_t) = align(&d.premises[0], y2, y, u, t, x, &vt);
            let (dt, dv) = rec(&body_d, &body_t)?;
            Ok((build::lam(&z, dt)?, dv))
        }
        (Rule::Get, Term::Get(l, y, u)) => {
            let Some(Term::Get(_, y2, _)) = d.term() else {
                return decomp("get subject");
            };
            let (z, body_d, body_t) = align(&d.premises[0], y2, y, u, t, x, &vt);
            let (dt, dv) = rec(&body_d, &body_t)?;
            Ok((build::get(l, &z, dt)?, dv))
        }
        (Rule::App | Rule::AppP1 | Rule::AppP2, Term::App(t1, t2)) if system == System::V => {
            let (h, dv1) = rec(&d.premises[0], t1)?;
            let (a, dv2) = rec(&d.premises[1], t2)?;
            let dt = match d.rule {
                Rule::App => build::app_v(h, a)?,
                Rule::AppP1 => build::appp1_v(h, a)?,
                _ => build::appp2_v(h, a)?,
            };
            Ok((dt, merge(dv1, dv2)?))
        }
        (Rule::App, Term::App(t1, t2)) => {
            let (h, dv1) = rec(&d.premises[0], t1)?;
            let (a, dv2) = rec(&d.premises[1], t2)?;
            Ok((build::app_gs(h, a)?, merge(dv1, dv2)?))
        }
        (Rule::Set, Term::Set(l, w, u)) => {
            let (s, dv1) = rec(&d.premises[0], &w.to_term())?;
            let (b, dv2) = rec(&d.premises[1], u)?;
            Ok((build::set(l, s, b)?, merge(dv1, dv2)?))
        }
        (Rule::AppP1, Term::App(t1, t2)) => {
            let (a, dv2) = rec(&d.premises[0], t2)?;
            match &**t1 {
                Term::Var(y) if y == x => {
                    let Value::Var(z) = v else {
                        return decomp("persistent head replaced by an abstraction");
                    };
                    let head = build::many(&vt, vec![build::ax(z, Type::Vr)])?;
                    Ok((build::appp1_gs(x, a)?, merge(head, dv2)?))
                }
                Term::Var(y) => Ok((build::appp1_gs(y, a)?, dv2)),
                other => decomp(format!("persistent head `{other}` is not a variable")),
            }
        }
        (Rule::AppP2, Term::App(t1, t2)) => {
            if !t1.is_abs() {
                return decomp(format!(
                    "head `{t1}` becomes an abstraction only after substitution; no rule types it"
                ));
            }
            let (a, dv) = rec(&d.premises[0], t2)?;
            Ok((build::appp2_gs(t1, a)?, dv))
        }
        (rule, _) => decomp(format!("({rule}) does not match `{t}`")),
    }
}

/// The case `t = x`: the derivation types `v` itself.
fn anti_var(d: &Derivation, x: &str, vt: &Term) -> R<(Derivation, Derivation)> {
    match d.rule {
        Rule::Many => {
            let axs = d
                .premises
                .iter()
                .map(|p| build::ax(x, p.ty().expect("typed").clone()))
                .collect();
            Ok((build::many(&Term::Var(x.to_string()), axs)?, d.clone()))
        }
        Rule::Lift => {
            let s = d.monadic().expect("lift is monadic").input.clone();
            let (dt, dv) = anti_var(&d.premises[0], x, vt)?;
            Ok((build::lift(dt, s)?, dv))
        }
        Rule::Ax | Rule::Lam | Rule::LamP => {
            let sigma = d.ty().expect("typed").clone();
            Ok((build::ax(x, sigma), build::many(vt, vec![d.clone()])?))
        }
        other => decomp(format!("({other}) cannot type a value")),
    }
}

/// Chooses a binder name safe for both the original term and the derivation
/// of its substituted form, renaming both bodies to it.
fn align(
    body_d: &Derivation,
    bound_d: &str,
    bound_t: &str,
    body_t: &Term,
    t: &Term,
    x: &str,
    v: &Term,
) -> (Name, Derivation, Term) {
    if bound_d == bound_t && bound_t != x && !free_vars(v).contains(bound_t) {
        return (bound_t.to_string(), body_d.clone(), body_t.clone());
    }
    let mut avoid = names_of(&[t, v, body_d.term().expect("term body")]);
    avoid.insert(x.to_string());
    let z = fresh_name(bound_t, &avoid);
    (
        z.clone(),
        rename_derivation(body_d, bound_d, &z),
        rename_free(body_t, bound_t, &z),
    )
}

/// Convenience for callers holding a derivation of a value rather than a
/// multiset: wraps it in (many).
pub fn as_many(d: Derivation) -> R<Derivation> {
    if d.rule == Rule::Many {
        return Ok(d);
    }
    let v = value_of(&d)?;
    Ok(build::many(&v, vec![d])?)
}
