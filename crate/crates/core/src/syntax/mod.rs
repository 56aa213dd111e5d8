//! Abstract syntax shared by the call-by-value calculus and the global-state
//! calculus, together with the structural operations every other module
//! builds on.

mod parse;
mod print;

use std::collections::BTreeSet;

pub use parse::{ParseError, parse_config, parse_input, parse_state, parse_term, parse_value};

pub type Name = String;
pub type Loc = String;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    Abs(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
    Get(Loc, Name, Box<Term>),
    Set(Loc, Value, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Var(Name),
    Abs(Name, Box<Term>),
}

/// Ordered bindings. The leftmost binding of a location is the visible one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct State(pub Vec<(Loc, Value)>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub term: Term,
    pub state: State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Calculus {
    Cbv,
    Gs,
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn abs(x: &str, body: Term) -> Term {
    Term::Abs(x.to_string(), Box::new(body))
}

pub fn app(t: Term, u: Term) -> Term {
    Term::App(Box::new(t), Box::new(u))
}

impl From<Value> for Term {
    fn from(v: Value) -> Term {
        match v {
            Value::Var(x) => Term::Var(x),
            Value::Abs(x, b) => Term::Abs(x, b),
        }
    }
}

impl Value {
    pub fn to_term(&self) -> Term {
        self.clone().into()
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Value::Abs(..))
    }
}

impl Term {
    pub fn as_value(&self) -> Option<Value> {
        match self {
            Term::Var(x) => Some(Value::Var(x.clone())),
            Term::Abs(x, b) => Some(Value::Abs(x.clone(), b.clone())),
            _ => None,
        }
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Var(_) | Term::Abs(..))
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Term::Abs(..))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Number of AST nodes; binders do not count, stored values do.
    pub fn node_count(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.node_count(),
            Term::App(t, u) => 1 + t.node_count() + u.node_count(),
            Term::Get(_, _, t) => 1 + t.node_count(),
            Term::Set(_, v, t) => 1 + v.to_term().node_count() + t.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Abs(_, b) | Term::Get(_, _, b) => 1 + b.depth(),
            Term::App(t, u) => 1 + t.depth().max(u.depth()),
            Term::Set(_, v, t) => 1 + v.to_term().depth().max(t.depth()),
        }
    }

    /// True when the term uses only variables, abstractions and applications.
    pub fn is_cbv(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Abs(_, b) => b.is_cbv(),
            Term::App(t, u) => t.is_cbv() && u.is_cbv(),
            Term::Get(..) | Term::Set(..) => false,
        }
    }

    /// Every application has a value in function position.
    pub fn is_gs_valid(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Abs(_, b) | Term::Get(_, _, b) => b.is_gs_valid(),
            Term::App(t, u) => t.is_value() && t.is_gs_valid() && u.is_gs_valid(),
            Term::Set(_, v, t) => v.to_term().is_gs_valid() && t.is_gs_valid(),
        }
    }

    /// Collects every variable name, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Abs(x, b) | Term::Get(_, x, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
            Term::App(t, u) => {
                t.all_names(out);
                u.all_names(out);
            }
            Term::Set(_, v, t) => {
                v.to_term().all_names(out);
                t.all_names(out);
            }
        }
    }

    pub fn locations(&self, out: &mut BTreeSet<Loc>) {
        match self {
            Term::Var(_) => {}
            Term::Abs(_, b) => b.locations(out),
            Term::Get(l, _, b) => {
                out.insert(l.clone());
                b.locations(out);
            }
            Term::App(t, u) => {
                t.locations(out);
                u.locations(out);
            }
            Term::Set(l, v, t) => {
                out.insert(l.clone());
                v.to_term().locations(out);
                t.locations(out);
            }
        }
    }
}

/// size(x) = size(λx.t) = 0, size(t u) = 1 + size(t) + size(u);
/// get and set are transparent.
pub fn size(t: &Term) -> usize {
    match t {
        Term::Var(_) | Term::Abs(..) => 0,
        Term::App(t, u) => 1 + size(t) + size(u),
        Term::Get(_, _, t) | Term::Set(_, _, t) => size(t),
    }
}

pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Abs(x, b) | Term::Get(_, x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        Term::App(t, u) => {
            collect_free(t, bound, out);
            collect_free(u, bound, out);
        }
        Term::Set(_, v, t) => {
            collect_free(&v.to_term(), bound, out);
            collect_free(t, bound, out);
        }
    }
}

pub fn is_free_in(x: &str, t: &Term) -> bool {
    match t {
        Term::Var(y) => x == y,
        Term::Abs(y, b) | Term::Get(_, y, b) => x != y && is_free_in(x, b),
        Term::App(t, u) => is_free_in(x, t) || is_free_in(x, u),
        Term::Set(_, v, t) => is_free_in(x, &v.to_term()) || is_free_in(x, t),
    }
}

/// Fresh name built from `base` with its trailing digits replaced by a counter.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    if !avoid.contains(stem) && stem != base {
        return stem.to_string();
    }
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n) && n != base)
        .expect("unbounded counter")
}

/// Capture-avoiding substitution of a value for a variable.
pub fn substitute(t: &Term, x: &str, v: &Value) -> Term {
    let fv = free_vars(&v.to_term());
    subst_rec(t, x, v, &fv)
}

fn subst_rec(t: &Term, x: &str, v: &Value, fv: &BTreeSet<Name>) -> Term {
    match t {
        Term::Var(y) if y == x => v.to_term(),
        Term::Var(_) => t.clone(),
        Term::App(t1, t2) => Term::App(
            Box::new(subst_rec(t1, x, v, fv)),
            Box::new(subst_rec(t2, x, v, fv)),
        ),
        Term::Set(l, w, body) => {
            let w = subst_rec(&w.to_term(), x, v, fv).as_value().expect("value");
            Term::Set(l.clone(), w, Box::new(subst_rec(body, x, v, fv)))
        }
        Term::Abs(y, body) | Term::Get(_, y, body) => {
            let (y, body) = if y == x || !is_free_in(x, body) {
                return t.clone();
            } else if fv.contains(y) {
                let mut avoid = fv.clone();
                body.all_names(&mut avoid);
                avoid.insert(x.to_string());
                let y2 = fresh_name(y, &avoid);
                let renamed = rename_free(body, y, &y2);
                (y2, subst_rec(&renamed, x, v, fv))
            } else {
                (y.clone(), subst_rec(body, x, v, fv))
            };
            match t {
                Term::Abs(..) => Term::Abs(y, Box::new(body)),
                Term::Get(l, ..) => Term::Get(l.clone(), y, Box::new(body)),
                _ => unreachable!(),
            }
        }
    }
}

/// Renames free occurrences of `x` to `y`; `y` must not be captured in `t`.
pub fn rename_free(t: &Term, x: &str, y: &str) -> Term {
    substitute(t, x, &Value::Var(y.to_string()))
}

/// Locally nameless form used for α-equivalence: bound occurrences become
/// indices, free ones keep their names, binders disappear.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nameless {
    Bound(usize),
    Free(Name),
    Abs(Box<Nameless>),
    App(Box<Nameless>, Box<Nameless>),
    Get(Loc, Box<Nameless>),
    Set(Loc, Box<Nameless>, Box<Nameless>),
}

pub fn to_nameless(t: &Term) -> Nameless {
    fn go(t: &Term, env: &mut Vec<Name>) -> Nameless {
        match t {
            Term::Var(x) => match env.iter().rev().position(|y| y == x) {
                Some(i) => Nameless::Bound(i),
                None => Nameless::Free(x.clone()),
            },
            Term::Abs(x, b) => {
                env.push(x.clone());
                let b = go(b, env);
                env.pop();
                Nameless::Abs(Box::new(b))
            }
            Term::Get(l, x, b) => {
                env.push(x.clone());
                let b = go(b, env);
                env.pop();
                Nameless::Get(l.clone(), Box::new(b))
            }
            Term::App(t, u) => Nameless::App(Box::new(go(t, env)), Box::new(go(u, env))),
            Term::Set(l, v, t) => Nameless::Set(
                l.clone(),
                Box::new(go(&v.to_term(), env)),
                Box::new(go(t, env)),
            ),
        }
    }
    go(t, &mut Vec::new())
}

pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    to_nameless(t) == to_nameless(u)
}

pub fn value_alpha_eq(v: &Value, w: &Value) -> bool {
    alpha_eq(&v.to_term(), &w.to_term())
}

impl State {
    pub fn empty() -> State {
        State(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn lookup(&self, l: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == l).map(|(_, v)| v)
    }

    pub fn dom(&self) -> BTreeSet<Loc> {
        self.0.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn prepend(&self, l: &str, v: Value) -> State {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push((l.to_string(), v));
        out.extend(self.0.iter().cloned());
        State(out)
    }

    pub fn has_duplicates(&self) -> bool {
        self.dom().len() != self.0.len()
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        self.0
            .iter()
            .flat_map(|(_, v)| free_vars(&v.to_term()))
            .collect()
    }

    pub fn alpha_eq(&self, other: &State) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|((l1, v1), (l2, v2))| l1 == l2 && value_alpha_eq(v1, v2))
    }
}

/// Reachability by swapping adjacent bindings with distinct locations.
/// Such swaps preserve exactly the per-location sequence of values.
pub fn state_equiv(s: &State, q: &State) -> bool {
    if s.len() != q.len() {
        return false;
    }
    let locs: BTreeSet<&Loc> = s.0.iter().chain(&q.0).map(|(l, _)| l).collect();
    locs.into_iter().all(|l| {
        let a: Vec<&Value> = s.0.iter().filter(|(k, _)| k == l).map(|(_, v)| v).collect();
        let b: Vec<&Value> = q.0.iter().filter(|(k, _)| k == l).map(|(_, v)| v).collect();
        a.len() == b.len() && a.iter().zip(&b).all(|(v, w)| value_alpha_eq(v, w))
    })
}

impl Configuration {
    pub fn new(term: Term, state: State) -> Configuration {
        Configuration { term, state }
    }

    pub fn size(&self) -> usize {
        size(&self.term)
    }

    pub fn alpha_eq(&self, other: &Configuration) -> bool {
        alpha_eq(&self.term, &other.term) && self.state.alpha_eq(&other.state)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut fv = free_vars(&self.term);
        fv.extend(self.state.free_vars());
        fv
    }
}
