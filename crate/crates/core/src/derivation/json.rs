use super::{Assigned, Counters, Derivation, Judgement, Rule, Subject, System};
use crate::syntax::{parse_config, parse_state, parse_term};
use crate::types::{Type, TypeEnv, parse_config_type, parse_state_type, parse_type};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("at node {path:?}: {msg}")]
    Node { path: Vec<usize>, msg: String },
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    rule: String,
    conclusion: ConclusionJson,
    #[serde(default)]
    premises: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
struct ConclusionJson {
    #[serde(default)]
    env: BTreeMap<String, String>,
    subject: String,
    #[serde(rename = "type")]
    ty: String,
    counters: Vec<u64>,
}

fn to_node(d: &Derivation, system: System) -> NodeJson {
    let c = d.counters();
    NodeJson {
        rule: d.rule.name().to_string(),
        conclusion: ConclusionJson {
            env: d
                .env()
                .iter()
                .map(|(x, m)| (x.clone(), m.to_string()))
                .collect(),
            subject: d.conclusion.subject.to_string(),
            ty: d.conclusion.assigned.to_string(),
            counters: match system {
                System::V => vec![c.b, c.d],
                System::Gs => vec![c.b, c.m, c.d],
            },
        },
        premises: d.premises.iter().map(|p| to_node(p, system)).collect(),
    }
}

pub fn derivation_to_json(d: &Derivation, system: System) -> serde_json::Value {
    serde_json::to_value(to_node(d, system)).expect("derivations serialize")
}

pub fn derivation_to_json_string(d: &Derivation, system: System) -> String {
    serde_json::to_string_pretty(&to_node(d, system)).expect("derivations serialize")
}

/// Reads a derivation. The system follows from the counter arity at the root:
/// two counters for V, three for GS.
pub fn derivation_from_json(src: &str) -> Result<(Derivation, System), JsonError> {
    let root: NodeJson = serde_json::from_str(src)?;
    let system = match root.conclusion.counters.len() {
        2 => System::V,
        3 => System::Gs,
        n => {
            return Err(JsonError::Node {
                path: vec![],
                msg: format!("expected 2 or 3 counters, found {n}"),
            });
        }
    };
    let d = from_node(&root, system, &mut Vec::new())?;
    Ok((d, system))
}

fn from_node(n: &NodeJson, system: System, path: &mut Vec<usize>) -> Result<Derivation, JsonError> {
    let err = |msg: String| JsonError::Node {
        path: path.clone(),
        msg,
    };
    let rule = Rule::from_name(&n.rule).ok_or_else(|| err(format!("unknown rule `{}`", n.rule)))?;
    let c = &n.conclusion;
    let counters = match (system, c.counters.as_slice()) {
        (System::V, [b, s]) => Counters::v(*b, *s),
        (System::Gs, [b, m, d]) => Counters::new(*b, *m, *d),
        _ => return Err(err(format!("wrong counter arity for system {system}"))),
    };
    let mut env = TypeEnv::empty();
    for (x, m) in &c.env {
        match parse_type(m) {
            Ok(Type::Multi(m)) => env.add(x, &m),
            Ok(t) => return Err(err(format!("env entry `{x}` is not a multi-type: {t}"))),
            Err(e) => return Err(err(format!("env entry `{x}`: {e}"))),
        }
    }
    let (subject, assigned) = match rule {
        Rule::Emp | Rule::Upd => (
            Subject::State(parse_state(&c.subject).map_err(|e| err(e.to_string()))?),
            Assigned::State(parse_state_type(&c.ty).map_err(|e| err(e.to_string()))?),
        ),
        Rule::Conf => (
            Subject::Config(parse_config(&c.subject).map_err(|e| err(e.to_string()))?),
            Assigned::Config(parse_config_type(&c.ty).map_err(|e| err(e.to_string()))?),
        ),
        _ => (
            Subject::Term(parse_term(&c.subject).map_err(|e| err(e.to_string()))?),
            Assigned::Type(parse_type(&c.ty).map_err(|e| err(e.to_string()))?),
        ),
    };
    let mut premises = Vec::with_capacity(n.premises.len());
    for (i, p) in n.premises.iter().enumerate() {
        path.push(i);
        premises.push(from_node(p, system, path)?);
        path.pop();
    }
    Ok(Derivation {
        rule,
        conclusion: Judgement {
            env,
            subject,
            assigned,
            counters,
        },
        premises,
    })
}
