//! Proof trees for both type systems. Every node stores its full
//! conclusion, so checking is local arithmetic.

mod check;
mod json;
mod meta;
mod render;

use crate::syntax::{Configuration, Name, State, Term, Value, free_vars};
use crate::types::{ConfigType, Monadic, MultiType, StateType, Type, TypeEnv};
use std::fmt;
use std::ops::Add;
use thiserror::Error;

pub use check::{
    RuleViolation, ViolationKind, check_derivation, check_derivation_gs, check_derivation_v,
    collect_violations,
};
pub use json::{JsonError, derivation_from_json, derivation_to_json, derivation_to_json_string};
pub use meta::{MetaReport, PropertyResult, validate_metatheory};
pub use render::render_tree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum System {
    V,
    Gs,
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::V => "V",
            System::Gs => "GS",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Ax,
    Lam,
    App,
    Many,
    LamP,
    AppP1,
    AppP2,
    Lift,
    Get,
    Set,
    Emp,
    Upd,
    Conf,
}

impl Rule {
    pub const ALL: [Rule; 13] = [
        Rule::Ax,
        Rule::Lam,
        Rule::App,
        Rule::Many,
        Rule::LamP,
        Rule::AppP1,
        Rule::AppP2,
        Rule::Lift,
        Rule::Get,
        Rule::Set,
        Rule::Emp,
        Rule::Upd,
        Rule::Conf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax => "ax",
            Rule::Lam => "lam",
            Rule::App => "app",
            Rule::Many => "many",
            Rule::LamP => "lamp",
            Rule::AppP1 => "appp1",
            Rule::AppP2 => "appp2",
            Rule::Lift => "lift",
            Rule::Get => "get",
            Rule::Set => "set",
            Rule::Emp => "emp",
            Rule::Upd => "upd",
            Rule::Conf => "conf",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn in_system(self, system: System) -> bool {
        match system {
            System::V => matches!(
                self,
                Rule::Ax
                    | Rule::Lam
                    | Rule::App
                    | Rule::Many
                    | Rule::LamP
                    | Rule::AppP1
                    | Rule::AppP2
            ),
            System::Gs => true,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(b, s)` in system V, where `m` stays zero; `(b, m, d)` in system GS.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Counters {
    pub b: u64,
    pub m: u64,
    pub d: u64,
}

impl Counters {
    pub const ZERO: Counters = Counters { b: 0, m: 0, d: 0 };

    pub fn new(b: u64, m: u64, d: u64) -> Counters {
        Counters { b, m, d }
    }

    pub fn v(b: u64, s: u64) -> Counters {
        Counters { b, m: 0, d: s }
    }

    pub fn sum<'a>(cs: impl IntoIterator<Item = &'a Counters>) -> Counters {
        cs.into_iter().fold(Counters::ZERO, |a, c| a + *c)
    }

    pub fn show(&self, system: System) -> String {
        match system {
            System::V => format!("({},{})", self.b, self.d),
            System::Gs => format!("({},{},{})", self.b, self.m, self.d),
        }
    }
}

impl Add for Counters {
    type Output = Counters;
    fn add(self, o: Counters) -> Counters {
        Counters {
            b: self.b + o.b,
            m: self.m + o.m,
            d: self.d + o.d,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Subject {
    Term(Term),
    State(State),
    Config(Configuration),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Assigned {
    Type(Type),
    State(StateType),
    Config(ConfigType),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Judgement {
    pub env: TypeEnv,
    pub subject: Subject,
    pub assigned: Assigned,
    pub counters: Counters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Judgement,
    pub premises: Vec<Derivation>,
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Term(t) => write!(f, "{t}"),
            Subject::State(s) => write!(f, "{s}"),
            Subject::Config(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Assigned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assigned::Type(t) => write!(f, "{t}"),
            Assigned::State(s) => write!(f, "{s}"),
            Assigned::Config(k) => write!(f, "{k}"),
        }
    }
}

impl Subject {
    pub fn free_vars(&self) -> std::collections::BTreeSet<Name> {
        match self {
            Subject::Term(t) => free_vars(t),
            Subject::State(s) => s.free_vars(),
            Subject::Config(c) => c.free_vars(),
        }
    }
}

/// A constructor was given premises whose shapes do not fit the rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot build ({rule}): {msg}")]
pub struct BuildError {
    pub rule: Rule,
    pub msg: String,
}

fn build_err<T>(rule: Rule, msg: impl Into<String>) -> Result<T, BuildError> {
    Err(BuildError {
        rule,
        msg: msg.into(),
    })
}

impl Derivation {
    pub fn env(&self) -> &TypeEnv {
        &self.conclusion.env
    }

    pub fn counters(&self) -> Counters {
        self.conclusion.counters
    }

    pub fn term(&self) -> Option<&Term> {
        match &self.conclusion.subject {
            Subject::Term(t) => Some(t),
            _ => None,
        }
    }

    pub fn config(&self) -> Option<&Configuration> {
        match &self.conclusion.subject {
            Subject::Config(c) => Some(c),
            _ => None,
        }
    }

    pub fn state(&self) -> Option<&State> {
        match &self.conclusion.subject {
            Subject::State(s) => Some(s),
            _ => None,
        }
    }

    pub fn ty(&self) -> Option<&Type> {
        match &self.conclusion.assigned {
            Assigned::Type(t) => Some(t),
            _ => None,
        }
    }

    pub fn state_type(&self) -> Option<&StateType> {
        match &self.conclusion.assigned {
            Assigned::State(s) => Some(s),
            _ => None,
        }
    }

    pub fn config_type(&self) -> Option<&ConfigType> {
        match &self.conclusion.assigned {
            Assigned::Config(k) => Some(k),
            _ => None,
        }
    }

    pub fn monadic(&self) -> Option<&Monadic> {
        self.ty().and_then(Type::as_monadic)
    }

    pub fn multi(&self) -> Option<&MultiType> {
        self.ty().and_then(Type::as_multi)
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(Derivation::node_count)
            .sum::<usize>()
    }

    /// Node at a child-index path.
    pub fn at(&self, path: &[usize]) -> Option<&Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.premises.get(*i)?.at(rest),
        }
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.premises.get_mut(*i)?.at_mut(rest),
        }
    }

    /// Paths of all nodes in pre-order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn go(d: &Derivation, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(cur.clone());
            for (i, p) in d.premises.iter().enumerate() {
                cur.push(i);
                go(p, cur, out);
                cur.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn system_hint(&self) -> System {
        fn gs(d: &Derivation) -> bool {
            matches!(
                d.rule,
                Rule::Lift | Rule::Get | Rule::Set | Rule::Emp | Rule::Upd | Rule::Conf
            ) || d.conclusion.counters.m > 0
                || d.premises.iter().any(gs)
        }
        if gs(self) { System::Gs } else { System::V }
    }
}

/// Tight conclusion: tight environment and tight assigned type.
pub fn is_tight_derivation(d: &Derivation) -> bool {
    d.env().is_tight()
        && match &d.conclusion.assigned {
            Assigned::Type(Type::Monadic(m)) => m.is_tight(),
            Assigned::Type(t) => t.is_tight_constant(),
            Assigned::State(s) => s.is_tight(),
            Assigned::Config(k) => k.is_tight(),
        }
}

fn node(
    rule: Rule,
    env: TypeEnv,
    subject: Subject,
    assigned: Assigned,
    counters: Counters,
    premises: Vec<Derivation>,
) -> Derivation {
    Derivation {
        rule,
        conclusion: Judgement {
            env,
            subject,
            assigned,
            counters,
        },
        premises,
    }
}

fn term_of(rule: Rule, d: &Derivation) -> Result<Term, BuildError> {
    match d.term() {
        Some(t) => Ok(t.clone()),
        None => build_err(rule, "premise does not type a term"),
    }
}

fn type_of(rule: Rule, d: &Derivation) -> Result<Type, BuildError> {
    match d.ty() {
        Some(t) => Ok(t.clone()),
        None => build_err(rule, "premise has no term type"),
    }
}

fn multi_of(rule: Rule, d: &Derivation) -> Result<MultiType, BuildError> {
    match d.multi() {
        Some(m) => Ok(m.clone()),
        None => build_err(
            rule,
            format!(
                "premise `{}` is not typed by a multi-type",
                d.conclusion.subject
            ),
        ),
    }
}

fn monadic_of(rule: Rule, d: &Derivation) -> Result<Monadic, BuildError> {
    match d.monadic() {
        Some(m) => Ok(m.clone()),
        None => build_err(
            rule,
            format!(
                "premise `{}` is not typed by a monadic type",
                d.conclusion.subject
            ),
        ),
    }
}

/// Constructors computing conclusions from premises. They only inspect what
/// they need to build the conclusion; the checker validates the rest.
pub mod build {
    use super::*;

    pub fn ax(x: &str, sigma: Type) -> Derivation {
        node(
            Rule::Ax,
            TypeEnv::singleton(x, MultiType::singleton(sigma.clone())),
            Subject::Term(Term::Var(x.to_string())),
            Assigned::Type(sigma),
            Counters::ZERO,
            vec![],
        )
    }

    pub fn lam(x: &str, body: Derivation) -> Result<Derivation, BuildError> {
        let t = term_of(Rule::Lam, &body)?;
        let ty = type_of(Rule::Lam, &body)?;
        let env = body.env().without(x);
        let dom = body.env().get(x);
        let c = body.counters();
        Ok(node(
            Rule::Lam,
            env,
            Subject::Term(Term::Abs(x.to_string(), Box::new(t))),
            Assigned::Type(Type::arrow(dom, ty)),
            c,
            vec![body],
        ))
    }

    pub fn lamp(t: &Term) -> Result<Derivation, BuildError> {
        if !t.is_abs() {
            return build_err(Rule::LamP, format!("`{t}` is not an abstraction"));
        }
        Ok(node(
            Rule::LamP,
            TypeEnv::empty(),
            Subject::Term(t.clone()),
            Assigned::Type(Type::Ab),
            Counters::ZERO,
            vec![],
        ))
    }

    pub fn many(v: &Term, premises: Vec<Derivation>) -> Result<Derivation, BuildError> {
        if !v.is_value() {
            return build_err(Rule::Many, format!("`{v}` is not a value"));
        }
        let mut tys = Vec::with_capacity(premises.len());
        for p in &premises {
            tys.push(type_of(Rule::Many, p)?);
        }
        let env = TypeEnv::union_all(premises.iter().map(Derivation::env));
        let c = Counters::sum(premises.iter().map(|p| &p.conclusion.counters));
        Ok(node(
            Rule::Many,
            env,
            Subject::Term(v.clone()),
            Assigned::Type(Type::Multi(MultiType::new(tys))),
            c,
            premises,
        ))
    }

    pub fn empty_many(v: &Term) -> Derivation {
        many(v, vec![]).expect("values admit the empty multi-type")
    }

    pub fn app_v(head: Derivation, arg: Derivation) -> Result<Derivation, BuildError> {
        let Some((m, tau)) = head.ty().and_then(Type::as_arrow) else {
            return build_err(Rule::App, "head is not typed by an arrow");
        };
        let m2 = multi_of(Rule::App, &arg)?;
        if *m != m2 {
            return build_err(Rule::App, format!("argument has {m2}, head expects {m}"));
        }
        let tau = tau.clone();
        let c = head.counters() + arg.counters() + Counters::v(1, 0);
        let t = Term::App(
            Box::new(term_of(Rule::App, &head)?),
            Box::new(term_of(Rule::App, &arg)?),
        );
        Ok(node(
            Rule::App,
            head.env().union(arg.env()),
            Subject::Term(t),
            Assigned::Type(tau),
            c,
            vec![head, arg],
        ))
    }

    fn persistent_v(
        rule: Rule,
        head: Derivation,
        arg: Derivation,
    ) -> Result<Derivation, BuildError> {
        let c = head.counters() + arg.counters() + Counters::v(0, 1);
        let t = Term::App(
            Box::new(term_of(rule, &head)?),
            Box::new(term_of(rule, &arg)?),
        );
        Ok(node(
            rule,
            head.env().union(arg.env()),
            Subject::Term(t),
            Assigned::Type(Type::N),
            c,
            vec![head, arg],
        ))
    }

    pub fn appp1_v(head: Derivation, arg: Derivation) -> Result<Derivation, BuildError> {
        persistent_v(Rule::AppP1, head, arg)
    }

    pub fn appp2_v(head: Derivation, arg: Derivation) -> Result<Derivation, BuildError> {
        persistent_v(Rule::AppP2, head, arg)
    }

    pub fn lift(d: Derivation, s: StateType) -> Result<Derivation, BuildError> {
        let mu = type_of(Rule::Lift, &d)?;
        let t = term_of(Rule::Lift, &d)?;
        let c = d.counters();
        Ok(node(
            Rule::Lift,
            d.env().clone(),
            Subject::Term(t),
            Assigned::Type(Type::monadic(s.clone(), mu, s)),
            c,
            vec![d],
        ))
    }

    pub fn app_gs(head: Derivation, arg: Derivation) -> Result<Derivation, BuildError> {
        let Some((m, delta)) = head.ty().and_then(Type::as_arrow) else {
            return build_err(Rule::App, "head is not typed by an arrow");
        };
        let Some(delta) = delta.as_monadic() else {
            return build_err(Rule::App, "arrow codomain is not monadic");
        };
        let a = monadic_of(Rule::App, &arg)?;
        if a.output.ty != Type::Multi(m.clone()) || a.output.state != delta.input {
            return build_err(
                Rule::App,
                format!("argument type {a} does not fit head {}", head.ty().unwrap()),
            );
        }
        let ty = Type::Monadic(Box::new(Monadic {
            input: a.input.clone(),
            output: delta.output.clone(),
        }));
        let c = head.counters() + arg.counters() + Counters::new(1, 0, 0);
        let t = Term::App(
            Box::new(term_of(Rule::App, &head)?),
            Box::new(term_of(Rule::App, &arg)?),
        );
        Ok(node(
            Rule::App,
            head.env().union(arg.env()),
            Subject::Term(t),
            Assigned::Type(ty),
            c,
            vec![head, arg],
        ))
    }

    pub fn get(l: &str, x: &str, body: Derivation) -> Result<Derivation, BuildError> {
        let d = monadic_of(Rule::Get, &body)?;
        let t = term_of(Rule::Get, &body)?;
        let input = StateType::empty()
            .with(l, body.env().get(x))
            .union(&d.input);
        let ty = Type::Monadic(Box::new(Monadic {
            input,
            output: d.output.clone(),
        }));
        let c = body.counters() + Counters::new(0, 1, 0);
        Ok(node(
            Rule::Get,
            body.env().without(x),
            Subject::Term(Term::Get(l.to_string(), x.to_string(), Box::new(t))),
            Assigned::Type(ty),
            c,
            vec![body],
        ))
    }

    pub fn set(l: &str, stored: Derivation, body: Derivation) -> Result<Derivation, BuildError> {
        let m = multi_of(Rule::Set, &stored)?;
        let d = monadic_of(Rule::Set, &body)?;
        if d.input.get(l) != Some(&m) {
            return build_err(
                Rule::Set,
                format!("body input {} does not start with ({l}:{m})", d.input),
            );
        }
        let v = term_of(Rule::Set, &stored)?
            .as_value()
            .expect("many types values");
        let t = term_of(Rule::Set, &body)?;
        let ty = Type::Monadic(Box::new(Monadic {
            input: d.input.without(l),
            output: d.output.clone(),
        }));
        let c = stored.counters() + body.counters() + Counters::new(0, 1, 0);
        Ok(node(
            Rule::Set,
            stored.env().union(body.env()),
            Subject::Term(Term::Set(l.to_string(), v, Box::new(t))),
            Assigned::Type(ty),
            c,
            vec![stored, body],
        ))
    }

    pub fn appp1_gs(x: &str, arg: Derivation) -> Result<Derivation, BuildError> {
        let a = monadic_of(Rule::AppP1, &arg)?;
        let t = term_of(Rule::AppP1, &arg)?;
        let ty = Type::monadic(a.input.clone(), Type::N, a.output.state.clone());
        let env = TypeEnv::singleton(x, MultiType::singleton(Type::Vr)).union(arg.env());
        let c = arg.counters() + Counters::new(0, 0, 1);
        let subject = Term::App(Box::new(Term::Var(x.to_string())), Box::new(t));
        Ok(node(
            Rule::AppP1,
            env,
            Subject::Term(subject),
            Assigned::Type(ty),
            c,
            vec![arg],
        ))
    }

    pub fn appp2_gs(head: &Term, arg: Derivation) -> Result<Derivation, BuildError> {
        if !head.is_abs() {
            return build_err(Rule::AppP2, format!("head `{head}` is not an abstraction"));
        }
        let a = monadic_of(Rule::AppP2, &arg)?;
        let t = term_of(Rule::AppP2, &arg)?;
        let ty = Type::Monadic(Box::new(a));
        let c = arg.counters() + Counters::new(0, 0, 1);
        let subject = Term::App(Box::new(head.clone()), Box::new(t));
        Ok(node(
            Rule::AppP2,
            arg.env().clone(),
            Subject::Term(subject),
            Assigned::Type(ty),
            c,
            vec![arg],
        ))
    }

    pub fn emp() -> Derivation {
        node(
            Rule::Emp,
            TypeEnv::empty(),
            Subject::State(State::empty()),
            Assigned::State(StateType::empty()),
            Counters::ZERO,
            vec![],
        )
    }

    pub fn upd(l: &str, stored: Derivation, rest: Derivation) -> Result<Derivation, BuildError> {
        let m = multi_of(Rule::Upd, &stored)?;
        let Some(s) = rest.state_type() else {
            return build_err(Rule::Upd, "second premise does not type a state");
        };
        let Some(st) = s.extend(l, m) else {
            return build_err(Rule::Upd, format!("location `{l}` already in {s}"));
        };
        let v: Value = term_of(Rule::Upd, &stored)?
            .as_value()
            .expect("many types values");
        let state = rest.state().expect("state subject").prepend(l, v);
        let c = stored.counters() + rest.counters();
        Ok(node(
            Rule::Upd,
            stored.env().union(rest.env()),
            Subject::State(state),
            Assigned::State(st),
            c,
            vec![stored, rest],
        ))
    }

    pub fn conf(term: Derivation, state: Derivation) -> Result<Derivation, BuildError> {
        let d = monadic_of(Rule::Conf, &term)?;
        let t = term_of(Rule::Conf, &term)?;
        let Some(s) = state.state() else {
            return build_err(Rule::Conf, "second premise does not type a state");
        };
        if state.state_type() != Some(&d.input) {
            return build_err(
                Rule::Conf,
                "state type does not match the input of the term",
            );
        }
        let c = term.counters() + state.counters();
        let cfg = Configuration::new(t, s.clone());
        Ok(node(
            Rule::Conf,
            term.env().union(state.env()),
            Subject::Config(cfg),
            Assigned::Config(d.output.clone()),
            c,
            vec![term, state],
        ))
    }
}
