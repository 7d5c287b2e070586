use std::sync::Arc;

use super::{Formula, MacroEnv, Pred, Var};
use crate::error::{Error, Result};
use crate::relation::{Relation, Sort};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Exists,
    Forall,
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    Comma,
    Var(Var),
    Rel(Relation),
    Macro(String),
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: String| Error::Parse { pos, msg };
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let tok = if rest.starts_with("<->") {
            i += 3;
            Tok::Iff
        } else if rest.starts_with("->") {
            i += 2;
            Tok::Imp
        } else if rest.starts_with("=p") {
            i += 2;
            Tok::Rel(crate::relation::EQ_P)
        } else if rest.starts_with("=i") {
            i += 2;
            Tok::Rel(crate::relation::EQ_I)
        } else {
            match c {
                b'<' => {
                    i += 1;
                    Tok::Rel(crate::relation::LT)
                }
                b'>' => {
                    i += 1;
                    Tok::Rel(crate::relation::GT)
                }
                b'~' => {
                    i += 1;
                    Tok::Not
                }
                b'&' => {
                    i += 1;
                    Tok::And
                }
                b'|' => {
                    i += 1;
                    Tok::Or
                }
                b'(' => {
                    i += 1;
                    Tok::LParen
                }
                b')' => {
                    i += 1;
                    Tok::RParen
                }
                b',' => {
                    i += 1;
                    Tok::Comma
                }
                b'@' => {
                    i += 1;
                    let s = i;
                    while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'\'') {
                        i += 1;
                    }
                    if s == i {
                        return Err(err(start, "expected a macro name after `@`".into()));
                    }
                    Tok::Macro(text[s..i].to_string())
                }
                c if c.is_ascii_alphanumeric() => {
                    while i < b.len() && b[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let word = &text[start..i];
                    let sorted = b.get(i) == Some(&b'_')
                        && matches!(b.get(i + 1), Some(b'p') | Some(b'i'))
                        && !b.get(i + 2).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
                    if sorted {
                        let sort = if b[i + 1] == b'p' { Sort::Point } else { Sort::Interval };
                        i += 2;
                        Tok::Var(Var::new(word, sort))
                    } else if word == "E" {
                        Tok::Exists
                    } else if word == "A" {
                        Tok::Forall
                    } else {
                        match word.parse::<Relation>() {
                            Ok(r) => Tok::Rel(r),
                            Err(_) => {
                                return Err(err(start, format!("`{word}` is neither a relation nor a sorted variable")))
                            }
                        }
                    }
                }
                _ => return Err(err(start, format!("unexpected character `{}`", rest.chars().next().unwrap()))),
            }
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    env: &'a MacroEnv,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Exists | Tok::Forall => {
                let q = self.bump();
                let v = match self.bump() {
                    Tok::Var(v) => v,
                    _ => {
                        self.pos -= 1;
                        return self.fail("expected a sorted variable after the quantifier");
                    }
                };
                let body = self.formula()?;
                Ok(if q == Tok::Exists { Formula::exists(v, body) } else { Formula::forall(v, body) })
            }
            _ => self.iff(),
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut l = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            l = Formula::iff(l, self.imp()?);
        }
        Ok(l)
    }

    fn imp(&mut self) -> Result<Formula> {
        let l = self.or()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            return Ok(Formula::implies(l, self.imp()?));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut l = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            l = Formula::or(l, self.and()?);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut l = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            l = Formula::and(l, self.unary()?);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Exists | Tok::Forall => self.fail("a quantified formula in operand position must be parenthesized"),
            Tok::Rel(r) => {
                let at = self.offset();
                self.bump();
                self.args(Pred::Rel(r), at)
            }
            Tok::Macro(name) => {
                let at = self.offset();
                let m: Arc<_> = match self.env.get(&name) {
                    Some(m) => m.clone(),
                    None => return self.fail(format!("unknown macro @{name}")),
                };
                self.bump();
                self.args(Pred::Macro(m), at)
            }
            Tok::End => self.fail("unexpected end of formula"),
            _ => self.fail("expected an atom, `~` or `(`"),
        }
    }

    fn var(&mut self) -> Result<Var> {
        match self.bump() {
            Tok::Var(v) => Ok(v),
            _ => {
                self.pos -= 1;
                self.fail("expected a sorted variable such as `x_p` or `y_i`")
            }
        }
    }

    fn args(&mut self, p: Pred, at: usize) -> Result<Formula> {
        self.expect(Tok::LParen, "`(` after relation")?;
        let x = self.var()?;
        self.expect(Tok::Comma, "`,`")?;
        let y = self.var()?;
        self.expect(Tok::RParen, "`)`")?;
        Formula::pred_atom(p, x, y).map_err(|e| match e {
            Error::Sort(msg) => Error::Sort(format!("at offset {at}: {msg}")),
            other => other,
        })
    }
}

/// Parse a formula without macros.
pub fn parse(text: &str) -> Result<Formula> {
    parse_with(text, &MacroEnv::default())
}

/// Parse a formula that may call macros from `env`.
pub fn parse_with(text: &str, env: &MacroEnv) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0, env };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.fail("trailing input");
    }
    Ok(f)
}
