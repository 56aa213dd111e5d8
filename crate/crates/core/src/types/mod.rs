//! Types of the two systems. One `Type` enum covers both grammars; the
//! `wf_*` predicates say which shapes each system admits.

mod parse;

use crate::syntax::{Loc, Name};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::{TypeParseError, parse_config_type, parse_state_type, parse_type};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Vr,
    Ab,
    N,
    Multi(MultiType),
    /// `M -> τ` in system V, `M -> δ` in system GS.
    Arrow(MultiType, Box<Type>),
    Monadic(Box<Monadic>),
}

/// A finite multiset of value types kept as a sorted sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiType(Vec<Type>);

/// `S => τ x S'`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monadic {
    pub input: StateType,
    pub output: ConfigType,
}

/// `τ x S`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigType {
    pub ty: Type,
    pub state: StateType,
}

/// Partial map from locations to multi-types. Entries mapped to `[]` are
/// still in the domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateType(BTreeMap<Loc, MultiType>);

/// Total map from variables to multi-types; entries equal to `[]` are not
/// stored, so `Γ; x:[]` and `Γ` compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeEnv(BTreeMap<Name, MultiType>);

impl Type {
    pub fn monadic(input: StateType, ty: Type, output: StateType) -> Type {
        Type::Monadic(Box::new(Monadic {
            input,
            output: ConfigType { ty, state: output },
        }))
    }

    pub fn arrow(m: MultiType, codomain: Type) -> Type {
        Type::Arrow(m, Box::new(codomain))
    }

    pub fn is_tight_constant(&self) -> bool {
        matches!(self, Type::Vr | Type::Ab | Type::N)
    }

    pub fn as_multi(&self) -> Option<&MultiType> {
        match self {
            Type::Multi(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_monadic(&self) -> Option<&Monadic> {
        match self {
            Type::Monadic(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_arrow(&self) -> Option<(&MultiType, &Type)> {
        match self {
            Type::Arrow(m, c) => Some((m, c)),
            _ => None,
        }
    }

    /// Visits every multiset occurring in the type, outermost first.
    pub fn multisets(&self) -> Vec<&MultiType> {
        let mut out = Vec::new();
        self.collect_multisets(&mut out);
        out
    }

    fn collect_multisets<'a>(&'a self, out: &mut Vec<&'a MultiType>) {
        match self {
            Type::Vr | Type::Ab | Type::N => {}
            Type::Multi(m) => m.collect_multisets(out),
            Type::Arrow(m, c) => {
                m.collect_multisets(out);
                c.collect_multisets(out);
            }
            Type::Monadic(d) => {
                d.input.collect_multisets(out);
                d.output.ty.collect_multisets(out);
                d.output.state.collect_multisets(out);
            }
        }
    }

    pub fn contains_neutral_in_multiset(&self) -> bool {
        self.multisets()
            .iter()
            .any(|m| m.iter().any(|t| *t == Type::N))
    }
}

impl MultiType {
    pub fn empty() -> MultiType {
        MultiType(Vec::new())
    }

    pub fn new(mut items: Vec<Type>) -> MultiType {
        items.sort();
        MultiType(items)
    }

    pub fn singleton(t: Type) -> MultiType {
        MultiType(vec![t])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Type> {
        self.0.iter()
    }

    pub fn items(&self) -> &[Type] {
        &self.0
    }

    pub fn union(&self, other: &MultiType) -> MultiType {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        MultiType::new(v)
    }

    pub fn union_all<'a>(ms: impl IntoIterator<Item = &'a MultiType>) -> MultiType {
        let mut v = Vec::new();
        for m in ms {
            v.extend(m.0.iter().cloned());
        }
        MultiType::new(v)
    }

    /// Multiset difference; `None` when `other` is not contained in `self`.
    pub fn minus(&self, other: &MultiType) -> Option<MultiType> {
        let mut rest = self.0.clone();
        for t in &other.0 {
            let i = rest.iter().position(|u| u == t)?;
            rest.remove(i);
        }
        Some(MultiType(rest))
    }

    pub fn remove_at(&self, i: usize) -> MultiType {
        let mut v = self.0.clone();
        v.remove(i);
        MultiType(v)
    }

    pub fn is_tight(&self) -> bool {
        self.0.iter().all(Type::is_tight_constant)
    }

    fn collect_multisets<'a>(&'a self, out: &mut Vec<&'a MultiType>) {
        out.push(self);
        for t in &self.0 {
            t.collect_multisets(out);
        }
    }
}

impl FromIterator<Type> for MultiType {
    fn from_iter<I: IntoIterator<Item = Type>>(iter: I) -> MultiType {
        MultiType::new(iter.into_iter().collect())
    }
}

impl TypeEnv {
    pub fn empty() -> TypeEnv {
        TypeEnv(BTreeMap::new())
    }

    pub fn singleton(x: &str, m: MultiType) -> TypeEnv {
        let mut g = TypeEnv::empty();
        g.add(x, &m);
        g
    }

    pub fn get(&self, x: &str) -> MultiType {
        self.0.get(x).cloned().unwrap_or_default()
    }

    pub fn add(&mut self, x: &str, m: &MultiType) {
        if m.is_empty() {
            return;
        }
        let cur = self.get(x);
        self.0.insert(x.to_string(), cur.union(m));
    }

    pub fn union(&self, other: &TypeEnv) -> TypeEnv {
        let mut g = self.clone();
        for (x, m) in &other.0 {
            g.add(x, m);
        }
        g
    }

    pub fn union_all<'a>(envs: impl IntoIterator<Item = &'a TypeEnv>) -> TypeEnv {
        let mut g = TypeEnv::empty();
        for e in envs {
            g = g.union(e);
        }
        g
    }

    pub fn without(&self, x: &str) -> TypeEnv {
        let mut g = self.clone();
        g.0.remove(x);
        g
    }

    /// Replaces the entry at `x`; an empty multiset removes it.
    pub fn with(&self, x: &str, m: MultiType) -> TypeEnv {
        let mut g = self.without(x);
        g.add(x, &m);
        g
    }

    pub fn dom(&self) -> BTreeSet<Name> {
        self.0.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &MultiType)> {
        self.0.iter()
    }

    pub fn is_tight(&self) -> bool {
        self.0.values().all(MultiType::is_tight)
    }

    pub fn rename(&self, from: &str, to: &str) -> TypeEnv {
        let m = self.get(from);
        let mut g = self.without(from);
        g.add(to, &m);
        g
    }
}

impl StateType {
    pub fn empty() -> StateType {
        StateType(BTreeMap::new())
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Loc, MultiType)>) -> StateType {
        StateType(entries.into_iter().collect())
    }

    pub fn get(&self, l: &str) -> Option<&MultiType> {
        self.0.get(l)
    }

    pub fn contains(&self, l: &str) -> bool {
        self.0.contains_key(l)
    }

    pub fn dom(&self) -> BTreeSet<Loc> {
        self.0.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Loc, &MultiType)> {
        self.0.iter()
    }

    /// `S ⊎ S'`: union of domains, multiset union on shared locations.
    pub fn union(&self, other: &StateType) -> StateType {
        let mut out = self.0.clone();
        for (l, m) in &other.0 {
            let merged = match out.get(l) {
                Some(cur) => cur.union(m),
                None => m.clone(),
            };
            out.insert(l.clone(), merged);
        }
        StateType(out)
    }

    /// `⟨(l:M)⟩; S`, defined only when `l ∉ dom(S)`.
    pub fn extend(&self, l: &str, m: MultiType) -> Option<StateType> {
        if self.contains(l) {
            return None;
        }
        let mut out = self.0.clone();
        out.insert(l.to_string(), m);
        Some(StateType(out))
    }

    pub fn with(&self, l: &str, m: MultiType) -> StateType {
        let mut out = self.0.clone();
        out.insert(l.to_string(), m);
        StateType(out)
    }

    pub fn without(&self, l: &str) -> StateType {
        let mut out = self.0.clone();
        out.remove(l);
        StateType(out)
    }

    pub fn is_tight(&self) -> bool {
        self.0.values().all(MultiType::is_tight)
    }

    fn collect_multisets<'a>(&'a self, out: &mut Vec<&'a MultiType>) {
        for m in self.0.values() {
            m.collect_multisets(out);
        }
    }

    pub fn multisets(&self) -> Vec<&MultiType> {
        let mut out = Vec::new();
        self.collect_multisets(&mut out);
        out
    }
}

impl ConfigType {
    pub fn is_tight(&self) -> bool {
        self.ty.is_tight_constant() && self.state.is_tight()
    }
}

impl Monadic {
    /// Only the result needs to be tight.
    pub fn is_tight(&self) -> bool {
        self.output.is_tight()
    }
}

pub fn env_union(g1: &TypeEnv, g2: &TypeEnv) -> TypeEnv {
    g1.union(g2)
}

pub fn state_type_union(s1: &StateType, s2: &StateType) -> StateType {
    s1.union(s2)
}

pub fn is_tight_type(t: &Type) -> bool {
    t.is_tight_constant()
}

pub fn is_tight_env(g: &TypeEnv) -> bool {
    g.is_tight()
}

pub fn is_tight_state_type(s: &StateType) -> bool {
    s.is_tight()
}

pub fn is_tight_monadic(d: &Monadic) -> bool {
    d.is_tight()
}

pub fn is_tight_config_type(k: &ConfigType) -> bool {
    k.is_tight()
}

/// Value types of system V: `vr | ab | M | M -> τ`.
pub fn wf_value_v(t: &Type) -> bool {
    match t {
        Type::Vr | Type::Ab => true,
        Type::Multi(m) => m.iter().all(wf_value_v),
        Type::Arrow(m, c) => m.iter().all(wf_value_v) && wf_type_v(c),
        Type::N | Type::Monadic(_) => false,
    }
}

pub fn wf_type_v(t: &Type) -> bool {
    *t == Type::N || wf_value_v(t)
}

/// Value types of system GS: `vr | ab | M | M -> δ`.
pub fn wf_value_gs(t: &Type) -> bool {
    match t {
        Type::Vr | Type::Ab => true,
        Type::Multi(m) => m.iter().all(wf_value_gs),
        Type::Arrow(m, c) => {
            m.iter().all(wf_value_gs) && matches!(&**c, Type::Monadic(d) if wf_monadic_gs(d))
        }
        Type::N | Type::Monadic(_) => false,
    }
}

pub fn wf_type_gs(t: &Type) -> bool {
    *t == Type::N || wf_value_gs(t)
}

pub fn wf_state_type_gs(s: &StateType) -> bool {
    s.0.values().all(|m| m.iter().all(wf_value_gs))
}

pub fn wf_config_type_gs(k: &ConfigType) -> bool {
    wf_type_gs(&k.ty) && wf_state_type_gs(&k.state)
}

pub fn wf_monadic_gs(d: &Monadic) -> bool {
    wf_state_type_gs(&d.input) && wf_config_type_gs(&d.output)
}

pub fn is_liftable(t: &Type) -> bool {
    matches!(t, Type::Vr | Type::Ab | Type::Multi(_))
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Vr => f.write_str("vr"),
            Type::Ab => f.write_str("ab"),
            Type::N => f.write_str("n"),
            Type::Multi(m) => write!(f, "{m}"),
            Type::Arrow(m, c) => match **c {
                Type::Monadic(_) => write!(f, "{m} -> ({c})"),
                _ => write!(f, "{m} -> {c}"),
            },
            Type::Monadic(d) => write!(f, "{d}"),
        }
    }
}

impl fmt::Display for MultiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for StateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, m)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}: {m}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for ConfigType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ty {
            Type::Arrow(..) | Type::Monadic(_) => write!(f, "({}) x {}", self.ty, self.state),
            _ => write!(f, "{} x {}", self.ty, self.state),
        }
    }
}

impl fmt::Display for Monadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.input, self.output)
    }
}

impl fmt::Display for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{m}")?;
        }
        Ok(())
    }
}
