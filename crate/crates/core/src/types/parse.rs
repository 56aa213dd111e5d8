use super::{ConfigType, Monadic, MultiType, StateType, Type};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type syntax error at offset {offset}: {msg}")]
pub struct TypeParseError {
    pub offset: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Arrow,
    FatArrow,
    Times,
    Ident(String),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, TypeParseError> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let single = match c {
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '→' => Some(Tok::Arrow),
            '⇒' => Some(Tok::FatArrow),
            '×' => Some(Tok::Times),
            _ => None,
        };
        if let Some(t) = single {
            out.push((i, t));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if (c == '-' || c == '=') && cs.get(i + 1) == Some(&'>') {
            out.push((i, if c == '-' { Tok::Arrow } else { Tok::FatArrow }));
            i += 2;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            let word: String = cs[start..i].iter().collect();
            out.push((
                start,
                if word == "x" {
                    Tok::Times
                } else {
                    Tok::Ident(word)
                },
            ));
        } else {
            return Err(TypeParseError {
                offset: i,
                msg: format!("unexpected `{c}`"),
            });
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

type R<T> = Result<T, TypeParseError>;

impl P {
    fn new(src: &str) -> R<P> {
        Ok(P {
            toks: lex(src)?,
            pos: 0,
            len: src.chars().count(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.len)
    }

    fn err<T>(&self, msg: impl Into<String>) -> R<T> {
        Err(TypeParseError {
            offset: self.offset(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> R<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn finish(&self) -> R<()> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("trailing input")
        }
    }

    fn any(&mut self) -> R<Type> {
        if self.peek() == Some(&Tok::LBrace) {
            let input = self.state_type()?;
            self.expect(Tok::FatArrow, "`=>` after a state type")?;
            let output = self.config_type()?;
            return Ok(Type::Monadic(Box::new(Monadic { input, output })));
        }
        self.arrow_type()
    }

    fn arrow_type(&mut self) -> R<Type> {
        let t = self.primary()?;
        if self.eat(&Tok::Arrow) {
            let Type::Multi(m) = t else {
                return self.err("the domain of an arrow must be a multi-type");
            };
            let c = self.arrow_type()?;
            return Ok(Type::Arrow(m, Box::new(c)));
        }
        Ok(t)
    }

    fn primary(&mut self) -> R<Type> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                match w.as_str() {
                    "vr" => Ok(Type::Vr),
                    "ab" | "vl" => Ok(Type::Ab),
                    "n" => Ok(Type::N),
                    _ => {
                        self.pos -= 1;
                        self.err(format!("unknown type constant `{w}`"))
                    }
                }
            }
            Some(Tok::LBrack) => Ok(Type::Multi(self.multi()?)),
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.any()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.err("expected a type"),
        }
    }

    fn multi(&mut self) -> R<MultiType> {
        self.expect(Tok::LBrack, "`[`")?;
        let mut items = Vec::new();
        if self.eat(&Tok::RBrack) {
            return Ok(MultiType::new(items));
        }
        loop {
            items.push(self.arrow_type()?);
            if self.eat(&Tok::RBrack) {
                return Ok(MultiType::new(items));
            }
            self.expect(Tok::Comma, "`,` or `]`")?;
        }
    }

    fn state_type(&mut self) -> R<StateType> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut entries: Vec<(String, MultiType)> = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(StateType::empty());
        }
        loop {
            let Some(Tok::Ident(l)) = self.peek().cloned() else {
                return self.err("expected a location");
            };
            self.pos += 1;
            if entries.iter().any(|(k, _)| *k == l) {
                return self.err(format!("location `{l}` appears twice"));
            }
            self.expect(Tok::Colon, "`:`")?;
            entries.push((l, self.multi()?));
            if self.eat(&Tok::RBrace) {
                return Ok(StateType::from_entries(entries));
            }
            self.expect(Tok::Comma, "`,` or `}`")?;
        }
    }

    fn config_type(&mut self) -> R<ConfigType> {
        let ty = self.arrow_type()?;
        self.expect(Tok::Times, "`x`")?;
        let state = self.state_type()?;
        Ok(ConfigType { ty, state })
    }
}

/// Parses a term type: a tight constant, multi-type, arrow or monadic type.
pub fn parse_type(src: &str) -> Result<Type, TypeParseError> {
    let mut p = P::new(src)?;
    let t = p.any()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_state_type(src: &str) -> Result<StateType, TypeParseError> {
    let mut p = P::new(src)?;
    let s = p.state_type()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_config_type(src: &str) -> Result<ConfigType, TypeParseError> {
    let mut p = P::new(src)?;
    let k = p.config_type()?;
    p.finish()?;
    Ok(k)
}
