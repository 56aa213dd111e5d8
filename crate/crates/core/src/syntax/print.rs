use super::{Configuration, State, Term, Value};
use std::fmt;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Abs(x, b) => write!(f, "\\{x}.{b}"),
            Term::App(t, u) => {
                if t.is_abs() {
                    write!(f, "({t})")?;
                } else {
                    write!(f, "{t}")?;
                }
                match **u {
                    Term::App(..) | Term::Abs(..) => write!(f, " ({u})"),
                    _ => write!(f, " {u}"),
                }
            }
            Term::Get(l, x, t) => write!(f, "get({l}, {x}. {t})"),
            Term::Set(l, v, t) => write!(f, "set({l}, {v}, {t})"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_term().fmt(f)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (l, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l} := {v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} | {})", self.term, self.state)
    }
}
