use super::{
    R, TransformError, antisubst_derivation, merge_values, rebuild_state, split_state, split_value,
    subst_derivation,
};
use crate::derivation::{Derivation, Rule, System, build, check_derivation, is_tight_derivation};
use crate::eval::{StepLabel, step_cbv, step_gs};
use crate::syntax::{Configuration, State, Term, Value, alpha_eq};

/// Result of one subject-reduction step.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduced {
    pub derivation: Derivation,
    pub label: StepLabel,
}

fn step_mismatch<T>(msg: impl Into<String>) -> R<T> {
    Err(TransformError::StepMismatch(msg.into()))
}

fn beta_parts(t: &Term) -> Option<(&str, &Term, Value)> {
    if let Term::App(f, a) = t
        && let Term::Abs(y, u) = &**f
        && let Some(w) = a.as_value()
    {
        return Some((y, u, w));
    }
    None
}

/// Tight derivation of `t` to one of its reduct along the deterministic
/// step. Same environment and type; `b` drops by one.
pub fn subject_reduction_v(d: &Derivation) -> R<Derivation> {
    if !is_tight_derivation(d) {
        return Err(TransformError::NotTight);
    }
    let t = d.term().ok_or(TransformError::NotTight)?;
    let Some(expected) = step_cbv(t) else {
        return step_mismatch(format!("`{t}` is normal"));
    };
    let out = sr_v(d)?;
    check_derivation(&out, System::V)?;
    if !alpha_eq(out.term().expect("term"), &expected) {
        return step_mismatch("reduct does not match the evaluator");
    }
    Ok(out)
}

fn sr_v(d: &Derivation) -> R<Derivation> {
    let t = d.term().expect("term derivation");
    if let Some((y, _, _)) = beta_parts(t) {
        if d.rule != Rule::App || d.premises[0].rule != Rule::Lam {
            return step_mismatch(format!("redex `{t}` typed by ({})", d.rule));
        }
        let body = &d.premises[0].premises[0];
        return subst_derivation(body, y, &d.premises[1], System::V);
    }
    let Term::App(t1, _) = t else {
        return step_mismatch(format!("`{t}` does not step"));
    };
    let (mut h, mut a) = (d.premises[0].clone(), d.premises[1].clone());
    if step_cbv(t1).is_some() {
        h = sr_v(&h)?;
    } else {
        a = sr_v(&a)?;
    }
    rebuild_v(d.rule, h, a)
}

fn rebuild_v(rule: Rule, h: Derivation, a: Derivation) -> R<Derivation> {
    Ok(match rule {
        Rule::App => build::app_v(h, a)?,
        Rule::AppP1 => build::appp1_v(h, a)?,
        Rule::AppP2 => build::appp2_v(h, a)?,
        other => return step_mismatch(format!("({other}) types an application")),
    })
}

/// Tight derivation of the one-step redex `before` from one of its reduct.
pub fn subject_expansion_v(d: &Derivation, before: &Term) -> R<Derivation> {
    if !is_tight_derivation(d) {
        return Err(TransformError::NotTight);
    }
    let after = d.term().ok_or(TransformError::NotTight)?;
    match step_cbv(before) {
        Some(r) if alpha_eq(&r, after) => {}
        _ => return step_mismatch(format!("`{before}` does not step to `{after}`")),
    }
    let out = se_v(d, before)?;
    check_derivation(&out, System::V)?;
    Ok(out)
}

fn se_v(d: &Derivation, t: &Term) -> R<Derivation> {
    if let Some((y, u, w)) = beta_parts(t) {
        let (du, dw) = antisubst_derivation(d, u, y, &w, System::V)?;
        return Ok(build::app_v(build::lam(y, du)?, dw)?);
    }
    let Term::App(t1, t2) = t else {
        return step_mismatch(format!("`{t}` does not step"));
    };
    if d.premises.len() != 2 {
        return step_mismatch(format!("({}) does not type an application", d.rule));
    }
    let (mut h, mut a) = (d.premises[0].clone(), d.premises[1].clone());
    if step_cbv(t1).is_some() {
        h = se_v(&h, t1)?;
    } else {
        a = se_v(&a, t2)?;
    }
    rebuild_v(d.rule, h, a)
}

fn conf_parts(d: &Derivation) -> R<(&Derivation, &Derivation, &Configuration)> {
    match (d.rule, d.config()) {
        (Rule::Conf, Some(c)) => Ok((&d.premises[0], &d.premises[1], c)),
        _ => step_mismatch("expected a configuration derivation"),
    }
}

/// One subject-reduction step on a tight configuration derivation.
pub fn subject_reduction_gs(d: &Derivation) -> R<Reduced> {
    if !is_tight_derivation(d) {
        return Err(TransformError::NotTight);
    }
    let (dt, ds, c) = conf_parts(d)?;
    let Some((label, expected)) = step_gs(c) else {
        return step_mismatch(format!("`{c}` is final"));
    };
    let (dt2, ds2) = sr_gs(dt, ds)?;
    let out = build::conf(dt2, ds2)?;
    check_derivation(&out, System::Gs)?;
    if !out.config().expect("conf").alpha_eq(&expected) {
        return step_mismatch("reduct does not match the evaluator");
    }
    Ok(Reduced {
        derivation: out,
        label,
    })
}

fn sr_gs(dt: &Derivation, ds: &Derivation) -> R<(Derivation, Derivation)> {
    let t = dt.term().expect("term derivation");
    if let Some((y, _, _)) = beta_parts(t) {
        let (head, arg) = match (dt.rule, dt.premises.as_slice()) {
            (Rule::App, [h, a]) if h.rule == Rule::Lam && a.rule == Rule::Lift => (h, a),
            _ => return step_mismatch(format!("redex `{t}` typed by ({})", dt.rule)),
        };
        let body = subst_derivation(&head.premises[0], y, &arg.premises[0], System::Gs)?;
        return Ok((body, ds.clone()));
    }
    match t {
        Term::Get(l, y, _) => {
            let body = &dt.premises[0];
            let m = body.env().get(y);
            let rest_in = body.monadic().expect("monadic body").input.clone();
            let Some(extra) = rest_in.get(l).cloned() else {
                return Err(TransformError::StateTypeGap(format!(
                    "the body of `{t}` has no entry for `{l}` in its input {rest_in}"
                )));
            };
            let split = split_state(ds, l)?;
            let parts = split_value(&split.value, &[m, extra])?;
            let [dv, keep]: [Derivation; 2] = parts.try_into().expect("two parts");
            let reduced = subst_derivation(body, y, &dv, System::Gs)?;
            let state = rebuild_state(&split.rest, split.index, l, keep)?;
            check_derivation(&state, System::Gs)?;
            Ok((reduced, state))
        }
        Term::Set(l, ..) => {
            let state = build::upd(l, dt.premises[0].clone(), ds.clone())?;
            Ok((dt.premises[1].clone(), state))
        }
        Term::App(h, _) if h.is_value() => {
            let ai = if dt.rule == Rule::App { 1 } else { 0 };
            let (a, ds2) = sr_gs(&dt.premises[ai], ds)?;
            Ok((rebuild_gs(dt, a)?, ds2))
        }
        _ => step_mismatch(format!("`{t}` does not step")),
    }
}

/// Rebuilds an application node of system GS around a new argument derivation.
fn rebuild_gs(dt: &Derivation, a: Derivation) -> R<Derivation> {
    let Some(Term::App(h, _)) = dt.term() else {
        return step_mismatch("not an application");
    };
    Ok(match (dt.rule, &**h) {
        (Rule::App, _) => build::app_gs(dt.premises[0].clone(), a)?,
        (Rule::AppP1, Term::Var(x)) => build::appp1_gs(x, a)?,
        (Rule::AppP2, _) => build::appp2_gs(h, a)?,
        (other, _) => return step_mismatch(format!("({other}) types an application")),
    })
}

/// Tight derivation of the configuration `before` from one of its one-step
/// reduct.
pub fn subject_expansion_gs(d: &Derivation, before: &Configuration) -> R<Derivation> {
    if !is_tight_derivation(d) {
        return Err(TransformError::NotTight);
    }
    let (dt, ds, after) = conf_parts(d)?;
    match step_gs(before) {
        Some((_, r)) if r.alpha_eq(after) => {}
        _ => return step_mismatch(format!("`{before}` does not step to `{after}`")),
    }
    let (dt2, ds2) = se_gs(dt, ds, &before.term, &before.state)?;
    let out = build::conf(dt2, ds2)?;
    check_derivation(&out, System::Gs)?;
    Ok(out)
}

fn se_gs(dt: &Derivation, ds: &Derivation, t: &Term, s: &State) -> R<(Derivation, Derivation)> {
    if let Some((y, u, w)) = beta_parts(t) {
        let (du, dw) = antisubst_derivation(dt, u, y, &w, System::Gs)?;
        let input = du.monadic().expect("monadic").input.clone();
        let head = build::lam(y, du)?;
        return Ok((build::app_gs(head, build::lift(dw, input)?)?, ds.clone()));
    }
    match t {
        Term::Get(l, y, u) => {
            let v = s
                .lookup(l)
                .expect("get steps only on bound locations")
                .clone();
            let (du, dv) = antisubst_derivation(dt, u, y, &v, System::Gs)?;
            let split = split_state(ds, l)?;
            let merged = merge_values(&v.to_term(), vec![dv, split.value])?;
            let state = rebuild_state(&split.rest, split.index, l, merged)?;
            check_derivation(&state, System::Gs)?;
            Ok((build::get(l, y, du)?, state))
        }
        Term::Set(l, ..) => {
            if ds.rule != Rule::Upd {
                return step_mismatch("the reduct state does not start with the stored binding");
            }
            let stored = ds.premises[0].clone();
            let rest = ds.premises[1].clone();
            Ok((build::set(l, stored, dt.clone())?, rest))
        }
        Term::App(h, a) if h.is_value() => {
            let ai = if dt.rule == Rule::App { 1 } else { 0 };
            let (p, ds2) = se_gs(&dt.premises[ai], ds, a, s)?;
            Ok((rebuild_gs(dt, p)?, ds2))
        }
        _ => step_mismatch(format!("`{t}` does not step")),
    }
}

/// System-dispatching reduction.
pub fn subject_reduction(d: &Derivation, system: System) -> R<Reduced> {
    match system {
        System::V => Ok(Reduced {
            derivation: subject_reduction_v(d)?,
            label: StepLabel::Beta,
        }),
        System::Gs => subject_reduction_gs(d),
    }
}

/// System-dispatching expansion; `before` is a term in V, a configuration in GS.
pub fn subject_expansion(d: &Derivation, before: &Configuration, system: System) -> R<Derivation> {
    match system {
        System::V => subject_expansion_v(d, &before.term),
        System::Gs => subject_expansion_gs(d, before),
    }
}
