use super::{Assigned, Derivation, Subject, System, is_tight_derivation};
use crate::eval::{is_blocked, is_neutral_cbv, is_neutral_gs, is_normal_cbv, is_normal_gs};
use crate::syntax::size;
use crate::types::Type;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    /// Nodes where the property applied.
    pub checked: usize,
    pub failures: Vec<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaReport {
    pub properties: Vec<PropertyResult>,
}

impl MetaReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(PropertyResult::passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

impl fmt::Display for MetaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            let status = if p.passed() { "pass" } else { "FAIL" };
            writeln!(f, "{status} {} ({} nodes)", p.name, p.checked)?;
            for e in &p.failures {
                writeln!(f, "    {e}")?;
            }
        }
        Ok(())
    }
}

const NAMES: [&str; 7] = [
    "relevance",
    "values-not-neutral",
    "tight-spreading",
    "zero-steps-normal-forms",
    "zero-counters-normal",
    "typed-unblock",
    "states-and-state-types",
];

/// Evaluates every applicable meta-property on every node of `d`.
pub fn validate_metatheory(d: &Derivation, system: System) -> MetaReport {
    let mut props: Vec<PropertyResult> = NAMES
        .iter()
        .map(|name| PropertyResult {
            name,
            checked: 0,
            failures: Vec::new(),
        })
        .collect();
    for path in d.paths() {
        let n = d.at(&path).expect("path from paths()");
        visit(n, &path, system, &mut props);
    }
    MetaReport { properties: props }
}

fn record(p: &mut PropertyResult, ok: bool, path: &[usize], msg: impl FnOnce() -> String) {
    p.checked += 1;
    if !ok {
        p.failures.push(format!("{path:?}: {}", msg()));
    }
}

fn visit(n: &Derivation, path: &[usize], system: System, props: &mut [PropertyResult]) {
    let j = &n.conclusion;

    let fv = j.subject.free_vars();
    let dom = j.env.dom();
    record(&mut props[0], dom.is_subset(&fv), path, || {
        format!(
            "env {{{}}} mentions variables not free in `{}`",
            j.env, j.subject
        )
    });

    let tight = is_tight_derivation(n);
    match (&j.subject, &j.assigned) {
        (Subject::Term(t), Assigned::Type(ty)) => {
            let result_ty = match ty {
                Type::Monadic(m) => &m.output.ty,
                other => other,
            };
            if t.is_value() {
                record(&mut props[1], *result_ty != Type::N, path, || {
                    format!("value `{t}` typed n")
                });
            }
            let (neutral, normal) = match system {
                System::V => (is_neutral_cbv(t), is_normal_cbv(t)),
                System::Gs => (is_neutral_gs(t), is_normal_gs(t)),
            };
            if neutral && j.env.is_tight() {
                record(&mut props[2], result_ty.is_tight_constant(), path, || {
                    format!("neutral `{t}` with tight env has type {ty}")
                });
            }
            if tight {
                let c = j.counters;
                let zero = match system {
                    System::V => c.b == 0,
                    System::Gs => c.b == 0 && c.m == 0,
                };
                record(
                    &mut props[3],
                    zero == normal && (!zero || c.d == size(t) as u64),
                    path,
                    || {
                        format!(
                            "counters {} vs normal={normal}, size {}",
                            c.show(system),
                            size(t)
                        )
                    },
                );
                if let (System::Gs, Type::Monadic(m)) = (system, ty)
                    && normal
                {
                    record(&mut props[4], m.input == m.output.state, path, || {
                        format!("normal `{t}` changes the state type: {m}")
                    });
                }
            }
        }
        (Subject::Config(c), Assigned::Config(_)) => {
            record(&mut props[5], !is_blocked(c), path, || {
                format!("typed configuration `{c}` is blocked")
            });
            if tight {
                let k = j.counters;
                let zero = k.b == 0 && k.m == 0;
                let normal = is_normal_gs(&c.term);
                record(
                    &mut props[3],
                    zero == normal && (!zero || k.d == c.size() as u64),
                    path,
                    || {
                        format!(
                            "counters {} vs normal={normal}, size {}",
                            k.show(system),
                            c.size()
                        )
                    },
                );
            }
        }
        (Subject::State(s), Assigned::State(st)) => {
            let sdom = s.dom();
            record(&mut props[6], st.dom().is_subset(&sdom), path, || {
                format!("state type {st} has locations not bound in {s}")
            });
        }
        _ => {}
    }
}
