use super::{Calculus, Configuration, State, Term, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("not a global-state term: `{0}` has a non-value in function position")]
    NotGsValid(String),
    #[error("`{0}` uses get/set, which the call-by-value calculus does not have")]
    NotCbv(String),
    #[error("the call-by-value calculus has no states")]
    UnexpectedState,
}

struct Parser {
    src: Vec<char>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> Parser {
        Parser {
            src: src.chars().collect(),
            pos: 0,
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.src[..self.pos.min(self.src.len())] {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c == '#' {
                while self.pos < self.src.len() && self.src[self.pos] != '\n' {
                    self.pos += 1;
                }
            } else if c.is_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn peek2(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos + 1).copied()
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(d) => self.error(format!("expected `{c}`, found `{d}`")),
            None => self.error(format!("expected `{c}`, found end of input")),
        }
    }

    fn expect_str(&mut self, s: &str) -> PResult<()> {
        self.skip_ws();
        let n = s.chars().count();
        let found: String = self.src[self.pos..(self.pos + n).min(self.src.len())]
            .iter()
            .collect();
        if found == s {
            self.pos += n;
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == '_')
                {
                    self.pos += 1;
                }
                Ok(self.src[start..self.pos].iter().collect())
            }
            Some(c) => self.error(format!("expected an identifier, found `{c}`")),
            None => self.error("expected an identifier, found end of input"),
        }
    }

    fn variable(&mut self) -> PResult<String> {
        let save = self.pos;
        let x = self.ident()?;
        if x == "get" || x == "set" {
            self.pos = save;
            return self.error(format!("`{x}` is reserved"));
        }
        Ok(x)
    }

    fn starts_atom(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_lowercase() || c == '(' || c == '\\' || c == 'λ')
    }

    fn term(&mut self) -> PResult<Term> {
        if !self.starts_atom() {
            return match self.peek() {
                Some(c) => self.error(format!("expected a term, found `{c}`")),
                None => self.error("expected a term, found end of input"),
            };
        }
        let mut t = self.atom()?;
        while self.starts_atom() {
            let u = self.atom()?;
            t = Term::App(Box::new(t), Box::new(u));
        }
        Ok(t)
    }

    fn lambda(&mut self) -> PResult<Term> {
        self.pos += 1;
        let x = self.variable()?;
        self.expect('.')?;
        let body = self.term()?;
        Ok(Term::Abs(x, Box::new(body)))
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek() {
            Some('\\') | Some('λ') => self.lambda(),
            Some('(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Some(_) => {
                let save = self.pos;
                let x = self.ident()?;
                let keyword = (x == "get" || x == "set") && self.peek() == Some('(');
                if !keyword {
                    if x == "get" || x == "set" {
                        self.pos = save;
                        return self.error(format!("`{x}` is reserved"));
                    }
                    return Ok(Term::Var(x));
                }
                self.expect('(')?;
                let l = self.ident()?;
                self.expect(',')?;
                let t = if x == "get" {
                    let y = self.variable()?;
                    self.expect('.')?;
                    let body = self.term()?;
                    Term::Get(l, y, Box::new(body))
                } else {
                    let v = self.value()?;
                    self.expect(',')?;
                    let body = self.term()?;
                    Term::Set(l, v, Box::new(body))
                };
                self.expect(')')?;
                Ok(t)
            }
            None => self.error("expected a term, found end of input"),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        let save = self.pos;
        let t = self.term()?;
        match t.as_value() {
            Some(v) => Ok(v),
            None => {
                self.pos = save;
                self.error("expected a value")
            }
        }
    }

    fn state(&mut self) -> PResult<State> {
        self.expect('[')?;
        let mut bindings = Vec::new();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(State(bindings));
        }
        loop {
            let l = self.ident()?;
            self.expect_str(":=")?;
            let v = self.value()?;
            bindings.push((l, v));
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(State(bindings));
                }
                _ => return self.error("expected `,` or `]` in state"),
            }
        }
    }

    fn config(&mut self) -> PResult<Configuration> {
        self.expect('(')?;
        let term = self.term()?;
        self.expect('|')?;
        let state = self.state()?;
        self.expect(')')?;
        Ok(Configuration { term, state })
    }

    fn finish(&mut self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            let c = self.peek().unwrap();
            self.error(format!("unexpected `{c}` after the end of the expression"))
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src);
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    let mut p = Parser::new(src);
    let v = p.value()?;
    p.finish()?;
    Ok(v)
}

pub fn parse_state(src: &str) -> Result<State, ParseError> {
    let mut p = Parser::new(src);
    let s = p.state()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_config(src: &str) -> Result<Configuration, ParseError> {
    let mut p = Parser::new(src);
    let c = p.config()?;
    p.finish()?;
    Ok(c)
}

/// Reads a program for the given calculus. Global-state input may be a bare
/// term (run on the empty state) or a configuration `(t | s)`.
pub fn parse_input(src: &str, calculus: Calculus) -> Result<Configuration, ParseError> {
    let mut p = Parser::new(src);
    let looks_like_config = p.peek() == Some('(') && p.peek2() != Some(')') && {
        let mut probe = Parser::new(src);
        probe.config().and_then(|_| probe.finish()).is_ok()
    };
    let c = if looks_like_config {
        p.config()?
    } else {
        Configuration {
            term: p.term()?,
            state: State::empty(),
        }
    };
    p.finish()?;
    match calculus {
        Calculus::Cbv => {
            if !c.state.is_empty() {
                return Err(ParseError::UnexpectedState);
            }
            if !c.term.is_cbv() {
                return Err(ParseError::NotCbv(c.term.to_string()));
            }
        }
        Calculus::Gs => {
            let bad =
                !c.term.is_gs_valid() || c.state.0.iter().any(|(_, v)| !v.to_term().is_gs_valid());
            if bad {
                return Err(ParseError::NotGsValid(c.term.to_string()));
            }
        }
    }
    Ok(c)
}
