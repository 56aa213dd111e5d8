use super::{Derivation, System};

/// One line per node, premises indented below their conclusion.
pub fn render_tree(d: &Derivation, system: System) -> String {
    let mut out = String::new();
    go(d, system, 0, &mut out);
    out
}

fn go(d: &Derivation, system: System, depth: usize, out: &mut String) {
    let j = &d.conclusion;
    out.push_str(&"  ".repeat(depth));
    out.push_str(&format!(
        "({}) {} |- {} : {}  {}\n",
        d.rule,
        j.env,
        j.subject,
        j.assigned,
        j.counters.show(system)
    ));
    for p in &d.premises {
        go(p, system, depth + 1, out);
    }
}
