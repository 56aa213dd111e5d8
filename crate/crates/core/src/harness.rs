//! Seeded generators, a small-term enumerator, independent oracles and the
//! fuzz campaign used by the CLI and the property suites.

use crate::derivation::{System, validate_metatheory};
use crate::eval::{eval_cbv, eval_gs, is_normal_cbv, step_all_cbv, step_cbv};
use crate::syntax::{Calculus, Configuration, Name, State, Term, Value, alpha_eq};
use crate::synth::{SynthError, synthesize_tight_gs, synthesize_tight_v, verify_soundness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

/// Fuel used to filter generated inputs.
pub const GEN_FUEL: usize = 500;

const W_APP: u32 = 4;
const W_ABS: u32 = 3;
const W_VAR: u32 = 2;
const W_MEM: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: usize,
    pub var_pool: Vec<Name>,
    pub loc_pool: Vec<String>,
    pub calculus: Calculus,
    pub normalizing_only: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_depth: 4,
            var_pool: vec!["x".into(), "y".into(), "z".into()],
            loc_pool: vec!["l".into(), "k".into()],
            calculus: Calculus::Cbv,
            normalizing_only: false,
        }
    }
}

/// Weights for App, Abs, Var, Get and Set.
#[derive(Clone, Copy, Debug)]
struct Weights([u32; 5]);

impl Weights {
    fn for_calculus(c: Calculus) -> Weights {
        match c {
            Calculus::Cbv => Weights([W_APP, W_ABS, W_VAR, 0, 0]),
            Calculus::Gs => Weights([W_APP, W_ABS, W_VAR, W_MEM, W_MEM]),
        }
    }

    fn blocking() -> Weights {
        Weights([3, 2, 1, 4, 0])
    }
}

/// Deterministic stream of terms or configurations for one configuration.
pub struct Generator {
    cfg: GenConfig,
    rng: ChaCha8Rng,
    weights: Weights,
    pub generated: usize,
    pub discarded: usize,
}

impl Generator {
    pub fn new(cfg: GenConfig) -> Generator {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let weights = Weights::for_calculus(cfg.calculus);
        Generator {
            cfg,
            rng,
            weights,
            generated: 0,
            discarded: 0,
        }
    }

    pub fn discard_rate(&self) -> f64 {
        let total = self.generated + self.discarded;
        if total == 0 {
            0.0
        } else {
            self.discarded as f64 / total as f64
        }
    }

    fn pick<'a>(&mut self, pool: &'a [String], fallback: &'a str) -> &'a str {
        if pool.is_empty() {
            fallback
        } else {
            &pool[self.rng.random_range(0..pool.len())]
        }
    }

    fn var(&mut self) -> Term {
        let pool = self.cfg.var_pool.clone();
        Term::Var(self.pick(&pool, "x").to_string())
    }

    fn value(&mut self, depth: usize) -> Value {
        if depth == 0 || self.rng.random_range(0..(W_ABS + W_VAR)) < W_VAR {
            let pool = self.cfg.var_pool.clone();
            Value::Var(self.pick(&pool, "x").to_string())
        } else {
            let pool = self.cfg.var_pool.clone();
            let x = self.pick(&pool, "x").to_string();
            Value::Abs(x, Box::new(self.term(depth - 1)))
        }
    }

    fn term(&mut self, depth: usize) -> Term {
        if depth == 0 {
            return self.var();
        }
        let w = self.weights.0;
        let total: u32 = w.iter().sum();
        let mut roll = self.rng.random_range(0..total);
        let mut choice = 0;
        while roll >= w[choice] {
            roll -= w[choice];
            choice += 1;
        }
        let pool = self.cfg.var_pool.clone();
        let locs = self.cfg.loc_pool.clone();
        match choice {
            0 => {
                let head = match self.cfg.calculus {
                    Calculus::Cbv => self.term(depth - 1),
                    Calculus::Gs => self.value(depth - 1).to_term(),
                };
                Term::App(Box::new(head), Box::new(self.term(depth - 1)))
            }
            1 => {
                let x = self.pick(&pool, "x").to_string();
                Term::Abs(x, Box::new(self.term(depth - 1)))
            }
            2 => self.var(),
            3 => {
                let l = self.pick(&locs, "l").to_string();
                let x = self.pick(&pool, "x").to_string();
                Term::Get(l, x, Box::new(self.term(depth - 1)))
            }
            _ => {
                let l = self.pick(&locs, "l").to_string();
                let v = self.value(depth - 1);
                Term::Set(l, v, Box::new(self.term(depth - 1)))
            }
        }
    }

    /// A state over distinct locations of the pool.
    fn state(&mut self) -> State {
        let mut bindings = Vec::new();
        for l in self.cfg.loc_pool.clone() {
            if self.rng.random_bool(0.5) {
                let d = self.cfg.max_depth.min(2);
                bindings.push((l, self.value(d)));
            }
        }
        State(bindings)
    }

    fn raw(&mut self) -> Configuration {
        let t = self.term(self.cfg.max_depth);
        let s = match self.cfg.calculus {
            Calculus::Cbv => State::empty(),
            Calculus::Gs => self.state(),
        };
        Configuration::new(t, s)
    }

    fn normalizes(&self, c: &Configuration) -> bool {
        match self.cfg.calculus {
            Calculus::Cbv => eval_cbv(&c.term, GEN_FUEL).is_ok(),
            Calculus::Gs => eval_gs(c, GEN_FUEL).is_ok(),
        }
    }

    /// Next configuration (empty state in the CBV calculus).
    pub fn next_config(&mut self) -> Configuration {
        loop {
            let c = self.raw();
            if self.cfg.normalizing_only && !self.normalizes(&c) {
                self.discarded += 1;
                continue;
            }
            self.generated += 1;
            return c;
        }
    }

    pub fn next_term(&mut self) -> Term {
        self.next_config().term
    }

    /// A GS configuration with an empty state whose evaluation ends blocked.
    pub fn next_blocking(&mut self) -> Configuration {
        let saved = self.weights;
        self.weights = Weights::blocking();
        let out = loop {
            let t = self.term(self.cfg.max_depth.max(1));
            let c = Configuration::new(t, State::empty());
            match eval_gs(&c, GEN_FUEL) {
                Ok(o) if o.blocked() => break c,
                _ => self.discarded += 1,
            }
        };
        self.generated += 1;
        self.weights = saved;
        out
    }
}

impl Iterator for Generator {
    type Item = Configuration;
    fn next(&mut self) -> Option<Configuration> {
        Some(self.next_config())
    }
}

pub fn gen_terms(cfg: GenConfig, count: usize) -> Vec<Term> {
    let mut g = Generator::new(cfg);
    (0..count).map(|_| g.next_term()).collect()
}

pub const MAX_ENUM_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("enumeration of {requested} nodes exceeds the bound of {MAX_ENUM_NODES}")]
pub struct BudgetExceeded {
    pub requested: usize,
}

/// Every CBV term with at most `max_nodes` syntax nodes, one per α-class.
/// Free variables come from `vars`; binders get names outside `vars`.
pub fn enumerate_terms(max_nodes: usize, vars: &[Name]) -> Result<Vec<Term>, BudgetExceeded> {
    if max_nodes > MAX_ENUM_NODES {
        return Err(BudgetExceeded {
            requested: max_nodes,
        });
    }
    let avoid: BTreeSet<Name> = vars.iter().cloned().collect();
    let mut binders: Vec<Name> = Vec::new();
    let mut i = 0;
    while binders.len() < max_nodes {
        let b = format!("b{i}");
        if !avoid.contains(&b) {
            binders.push(b);
        }
        i += 1;
    }
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        out.extend(exactly(n, 0, vars, &binders));
    }
    Ok(out)
}

fn exactly(n: usize, scope: usize, vars: &[Name], binders: &[Name]) -> Vec<Term> {
    let mut out = Vec::new();
    if n == 1 {
        out.extend(vars.iter().map(|x| Term::Var(x.clone())));
        out.extend(binders[..scope].iter().map(|b| Term::Var(b.clone())));
        return out;
    }
    for body in exactly(n - 1, scope + 1, vars, binders) {
        out.push(Term::Abs(binders[scope].clone(), Box::new(body)));
    }
    for left in 1..n - 1 {
        let ls = exactly(left, scope, vars, binders);
        let rs = exactly(n - 1 - left, scope, vars, binders);
        for l in &ls {
            for r in &rs {
                out.push(Term::App(Box::new(l.clone()), Box::new(r.clone())));
            }
        }
    }
    out
}

/// Normality by direct search for a β-redex outside abstractions.
pub fn oracle_normal(t: &Term) -> bool {
    fn has_redex(t: &Term) -> bool {
        match t {
            Term::App(f, a) => (f.is_abs() && a.is_value()) || has_redex(f) || has_redex(a),
            _ => false,
        }
    }
    !has_redex(t)
}

/// Replaces `t` by one of its subterms while `fails` keeps holding.
pub fn shrink(t: &Term, fails: impl Fn(&Term) -> bool) -> Term {
    let mut cur = t.clone();
    'outer: loop {
        for s in subterms(&cur) {
            if s.node_count() < cur.node_count() && fails(&s) {
                cur = s;
                continue 'outer;
            }
        }
        return cur;
    }
}

fn subterms(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    fn go(t: &Term, out: &mut Vec<Term>) {
        match t {
            Term::Var(_) => {}
            Term::Abs(_, b) | Term::Get(_, _, b) => {
                out.push((**b).clone());
                go(b, out);
            }
            Term::App(f, a) => {
                out.push((**f).clone());
                out.push((**a).clone());
                go(f, out);
                go(a, out);
            }
            Term::Set(_, v, b) => {
                out.push(v.to_term());
                out.push((**b).clone());
                go(b, out);
            }
        }
    }
    go(t, &mut out);
    out
}

/// The diamond property at one term: every two distinct reducts meet in one
/// more step. Returns the first pair that does not.
pub fn diamond_counterexample(t: &Term) -> Option<(Term, Term)> {
    let reducts = step_all_cbv(t);
    for (i, a) in reducts.iter().enumerate() {
        for b in &reducts[i + 1..] {
            let ra = step_all_cbv(a);
            let rb = step_all_cbv(b);
            if !ra.iter().any(|x| rb.iter().any(|y| alpha_eq(x, y))) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub inputs: usize,
    pub discarded: usize,
    pub failures: Vec<String>,
    /// Inputs whose synthesis hit a known limit of the type system rather
    /// than a bug; keyed by a short description.
    pub gaps: Vec<String>,
}

impl FuzzReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs the per-input properties over `count` generated inputs.
pub fn run_campaign(cfg: &GenConfig, count: usize, fuel: usize) -> FuzzReport {
    let mut g = Generator::new(cfg.clone());
    let mut report = FuzzReport::default();
    for _ in 0..count {
        let c = g.next_config();
        report.inputs += 1;
        let problem = match cfg.calculus {
            Calculus::Cbv => cbv_problem(&c.term, fuel),
            Calculus::Gs => gs_problem(&c, fuel)
                .map_err(|gap| {
                    report.gaps.push(gap);
                })
                .ok()
                .flatten(),
        };
        if let Some(msg) = problem {
            let shrunk = match cfg.calculus {
                Calculus::Cbv => shrink(&c.term, |t| cbv_problem(t, fuel).is_some()).to_string(),
                Calculus::Gs => c.to_string(),
            };
            report
                .failures
                .push(format!("{msg}; minimal input: {shrunk}"));
        }
    }
    report.discarded = g.discarded;
    report
}

fn cbv_problem(t: &Term, fuel: usize) -> Option<String> {
    if is_normal_cbv(t) != oracle_normal(t) || is_normal_cbv(t) != step_cbv(t).is_none() {
        return Some("normal-form characterisation disagrees".into());
    }
    if let Some((a, b)) = diamond_counterexample(t) {
        return Some(format!("diamond fails for reducts {a} and {b}"));
    }
    match synthesize_tight_v(t, fuel) {
        Err(SynthError::FuelExhausted(_)) => None,
        Err(e) => Some(format!("synthesis failed: {e}")),
        Ok(d) => {
            let meta = validate_metatheory(&d, System::V);
            if !meta.all_passed() {
                return Some(format!("metatheory: {meta}"));
            }
            match verify_soundness(&d, System::V, fuel) {
                Ok(c) if c.is_match() => None,
                Ok(c) => Some(format!("soundness mismatch: {:?}", c.diff)),
                Err(e) => Some(format!("verification failed: {e}")),
            }
        }
    }
}

/// `Err` carries a gap description; `Ok(Some)` a genuine failure.
fn gs_problem(c: &Configuration, fuel: usize) -> Result<Option<String>, String> {
    match synthesize_tight_gs(c, fuel) {
        Err(SynthError::FuelExhausted(_) | SynthError::BlockedFinal(_)) => Ok(None),
        Err(SynthError::DuplicateLocation(l)) => Err(format!("overwritten location {l}")),
        Err(SynthError::Untypable { source, .. }) => Err(source.to_string()),
        Err(e) => Ok(Some(format!("synthesis failed: {e}"))),
        Ok(d) => {
            let meta = validate_metatheory(&d, System::Gs);
            if !meta.all_passed() {
                return Ok(Some(format!("metatheory: {meta}")));
            }
            match verify_soundness(&d, System::Gs, fuel) {
                Ok(cert) if cert.is_match() => Ok(None),
                Ok(cert) => Ok(Some(format!("soundness mismatch: {:?}", cert.diff))),
                Err(e) => Ok(Some(format!("verification failed: {e}"))),
            }
        }
    }
}
