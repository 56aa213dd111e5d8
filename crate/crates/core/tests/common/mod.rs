#![allow(dead_code)]

use tightcalc::derivation::{Assigned, Derivation, System};
use tightcalc::eval::{StepLabel, Trace};
use tightcalc::syntax::{Configuration, Term};
use tightcalc::types::{MultiType, StateType, Type, TypeEnv};

pub fn corpus(name: &str) -> String {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

/// Number of terms with exactly `n` nodes, `p` free names and `k` binders in
/// scope, counted up to α-equivalence.
pub fn count_terms(n: usize, k: usize, p: usize) -> u128 {
    fn go(
        n: usize,
        k: usize,
        p: usize,
        memo: &mut std::collections::HashMap<(usize, usize), u128>,
    ) -> u128 {
        if n == 0 {
            return 0;
        }
        if let Some(&c) = memo.get(&(n, k)) {
            return c;
        }
        let c = if n == 1 {
            (p + k) as u128
        } else {
            let mut c = go(n - 1, k + 1, p, memo);
            for i in 1..n - 1 {
                c += go(i, k, p, memo) * go(n - 1 - i, k, p, memo);
            }
            c
        };
        memo.insert((n, k), c);
        c
    }
    go(n, k, p, &mut Default::default())
}

// ---- single-field mutations -------------------------------------------

fn ms_drops(m: &MultiType) -> Vec<MultiType> {
    let mut out: Vec<MultiType> = (0..m.len()).map(|i| m.remove_at(i)).collect();
    for (i, t) in m.items().iter().enumerate() {
        for t2 in ty_drops(t) {
            let mut items = m.items().to_vec();
            items[i] = t2;
            out.push(MultiType::new(items));
        }
    }
    out
}

fn st_map(s: &StateType, f: impl Fn(&MultiType) -> Vec<MultiType>) -> Vec<StateType> {
    s.iter()
        .flat_map(|(l, m)| {
            f(m).into_iter()
                .map(move |m2| s.with(l, m2))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn st_drops(s: &StateType) -> Vec<StateType> {
    st_map(s, ms_drops)
}

fn ty_drops(t: &Type) -> Vec<Type> {
    match t {
        Type::Vr | Type::Ab | Type::N => vec![],
        Type::Multi(m) => ms_drops(m).into_iter().map(Type::Multi).collect(),
        Type::Arrow(m, c) => {
            let mut out: Vec<Type> = ms_drops(m)
                .into_iter()
                .map(|m2| Type::Arrow(m2, c.clone()))
                .collect();
            out.extend(
                ty_drops(c)
                    .into_iter()
                    .map(|c2| Type::Arrow(m.clone(), Box::new(c2))),
            );
            out
        }
        Type::Monadic(d) => {
            let (i, o) = (&d.input, &d.output);
            let mut out: Vec<Type> = st_drops(i)
                .into_iter()
                .map(|i2| Type::monadic(i2, o.ty.clone(), o.state.clone()))
                .collect();
            out.extend(
                ty_drops(&o.ty)
                    .into_iter()
                    .map(|t2| Type::monadic(i.clone(), t2, o.state.clone())),
            );
            out.extend(
                st_drops(&o.state)
                    .into_iter()
                    .map(|s2| Type::monadic(i.clone(), o.ty.clone(), s2)),
            );
            out
        }
    }
}

fn ms_removals(m: &MultiType) -> Vec<MultiType> {
    let mut out = Vec::new();
    for (i, t) in m.items().iter().enumerate() {
        for t2 in ty_removals(t) {
            let mut items = m.items().to_vec();
            items[i] = t2;
            out.push(MultiType::new(items));
        }
    }
    out
}

fn st_removals(s: &StateType) -> Vec<StateType> {
    let mut out: Vec<StateType> = s.dom().iter().map(|l| s.without(l)).collect();
    out.extend(st_map(s, ms_removals));
    out
}

fn ty_removals(t: &Type) -> Vec<Type> {
    match t {
        Type::Vr | Type::Ab | Type::N => vec![],
        Type::Multi(m) => ms_removals(m).into_iter().map(Type::Multi).collect(),
        Type::Arrow(m, c) => {
            let mut out: Vec<Type> = ms_removals(m)
                .into_iter()
                .map(|m2| Type::Arrow(m2, c.clone()))
                .collect();
            out.extend(
                ty_removals(c)
                    .into_iter()
                    .map(|c2| Type::Arrow(m.clone(), Box::new(c2))),
            );
            out
        }
        Type::Monadic(d) => {
            let (i, o) = (&d.input, &d.output);
            let mut out: Vec<Type> = st_removals(i)
                .into_iter()
                .map(|i2| Type::monadic(i2, o.ty.clone(), o.state.clone()))
                .collect();
            out.extend(
                ty_removals(&o.ty)
                    .into_iter()
                    .map(|t2| Type::monadic(i.clone(), t2, o.state.clone())),
            );
            out.extend(
                st_removals(&o.state)
                    .into_iter()
                    .map(|s2| Type::monadic(i.clone(), o.ty.clone(), s2)),
            );
            out
        }
    }
}

fn env_drops(g: &TypeEnv) -> Vec<TypeEnv> {
    g.iter()
        .flat_map(|(x, m)| {
            ms_drops(m)
                .into_iter()
                .map(move |m2| g.with(x, m2))
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Mutation {
    pub path: Vec<usize>,
    pub kind: &'static str,
    pub derivation: Derivation,
}

/// Every single-field mutation of `d` of the three kinds: a counter moved by
/// one, one element dropped from a multiset, one state-type entry removed.
pub fn mutations(d: &Derivation, system: System) -> Vec<Mutation> {
    let mut out = Vec::new();
    for path in d.paths() {
        let node = d.at(&path).unwrap().clone();
        let mut push = |kind: &'static str, f: &dyn Fn(&mut Derivation)| {
            let mut m = d.clone();
            f(m.at_mut(&path).unwrap());
            if m != *d {
                out.push(Mutation {
                    path: path.clone(),
                    kind,
                    derivation: m,
                });
            }
        };
        let fields: &[usize] = if system == System::V {
            &[0, 2]
        } else {
            &[0, 1, 2]
        };
        for &f in fields {
            for delta in [1i64, -1] {
                push("counter", &|n: &mut Derivation| {
                    let c = &mut n.conclusion.counters;
                    let slot = [&mut c.b, &mut c.m, &mut c.d].into_iter().nth(f).unwrap();
                    *slot = (*slot as i64 + delta).max(0) as u64;
                });
            }
        }
        for g in env_drops(&node.conclusion.env) {
            push("multiset", &|n: &mut Derivation| {
                n.conclusion.env = g.clone()
            });
        }
        let assigned = node.conclusion.assigned.clone();
        let (drops, removals): (Vec<Assigned>, Vec<Assigned>) = match &assigned {
            Assigned::Type(t) => (
                ty_drops(t).into_iter().map(Assigned::Type).collect(),
                ty_removals(t).into_iter().map(Assigned::Type).collect(),
            ),
            Assigned::State(s) => (
                st_drops(s).into_iter().map(Assigned::State).collect(),
                st_removals(s).into_iter().map(Assigned::State).collect(),
            ),
            Assigned::Config(k) => {
                let mk = |ty: Type, state: StateType| {
                    Assigned::Config(tightcalc::types::ConfigType { ty, state })
                };
                let mut drops: Vec<Assigned> = ty_drops(&k.ty)
                    .into_iter()
                    .map(|t| mk(t, k.state.clone()))
                    .collect();
                drops.extend(st_drops(&k.state).into_iter().map(|s| mk(k.ty.clone(), s)));
                let mut rem: Vec<Assigned> = ty_removals(&k.ty)
                    .into_iter()
                    .map(|t| mk(t, k.state.clone()))
                    .collect();
                rem.extend(
                    st_removals(&k.state)
                        .into_iter()
                        .map(|s| mk(k.ty.clone(), s)),
                );
                (drops, rem)
            }
        };
        for a in drops {
            push("multiset", &|n: &mut Derivation| {
                n.conclusion.assigned = a.clone()
            });
        }
        for a in removals {
            push("state-entry", &|n: &mut Derivation| {
                n.conclusion.assigned = a.clone()
            });
        }
    }
    out
}

// ---- independent detectors for the known completeness gaps --------------

/// A set step writes a location that is already bound in the state.
pub fn overwrites_a_location(trace: &Trace<Configuration>) -> bool {
    let points = trace.points();
    trace.steps.iter().enumerate().any(|(i, (label, after))| {
        *label == StepLabel::SetStep && {
            let l = &after.state.0[0].0;
            points[i].state.lookup(l).is_some()
        }
    })
}

fn has_abs_headed_app(t: &Term) -> bool {
    match t {
        Term::App(f, a) => f.is_abs() || has_abs_headed_app(f) || has_abs_headed_app(a),
        _ => false,
    }
}

fn var_head_of(t: &Term, x: &str) -> bool {
    match t {
        Term::App(f, a) => {
            matches!(&**f, Term::Var(y) if y == x) || var_head_of(f, x) || var_head_of(a, x)
        }
        Term::Abs(y, b) | Term::Get(_, y, b) => y != x && var_head_of(b, x),
        Term::Set(_, _, b) => var_head_of(b, x),
        Term::Var(_) => false,
    }
}

/// A β step substitutes an abstraction for a variable that heads an
/// application, and the normal form keeps an abstraction-headed application.
pub fn abstraction_replaces_a_stuck_head(trace: &Trace<Configuration>) -> bool {
    let points = trace.points();
    let substitutes = trace.steps.iter().enumerate().any(|(i, (label, _))| {
        *label == StepLabel::Beta
            && beta_site(&points[i].term)
                .is_some_and(|(x, body, v)| v.is_abs() && var_head_of(body, x))
    });
    substitutes && has_abs_headed_app(&trace.last().term)
}

/// The redex contracted by the deterministic strategy in a GS term.
fn beta_site(t: &Term) -> Option<(&str, &Term, &Term)> {
    match t {
        Term::App(f, a) => match (&**f, a.is_value()) {
            (Term::Abs(x, body), true) => Some((x, body, a)),
            _ => beta_site(a),
        },
        _ => None,
    }
}
