//! Lexer and recursive-descent parser for `forall x,y : <expr>`.

use crate::error::{Error, Result};
use crate::model::Signature;

use super::{Expr, Formula};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Forall,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Comma,
    Colon,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Forall => "`forall`".into(),
        Tok::Not => "`not`".into(),
        Tok::And => "`and`".into(),
        Tok::Or => "`or`".into(),
        Tok::Implies => "`=>`".into(),
        Tok::Iff => "`<=>`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Colon => "`:`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Tokens with their character offsets.
fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            ',' => Tok::Comma,
            ':' | '.' => Tok::Colon,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '!' | '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '⇒' | '→' => Tok::Implies,
            '⇔' | '↔' => Tok::Iff,
            '∀' => Tok::Forall,
            '=' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Implies
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Implies
            }
            '<' if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Tok::Iff
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Tok::Iff
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j - 1;
                match word.as_str() {
                    "forall" => Tok::Forall,
                    "not" => Tok::Not,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    _ => Tok::Ident(word),
                }
            }
            other => {
                return Err(Error::SyntaxError {
                    position: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    sig: &'a Signature,
    vars: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", describe(&want))))
        }
    }

    fn unexpected(&self, msg: &str) -> Error {
        Error::SyntaxError {
            position: self.pos(),
            message: format!("{msg}, found {}", describe(self.peek())),
        }
    }

    fn quantifier(&mut self) -> Result<()> {
        self.expect(Tok::Forall)?;
        loop {
            let pos = self.pos();
            match self.bump() {
                Tok::Ident(v) => {
                    if self.vars.contains(&v) {
                        return Err(Error::SyntaxError {
                            position: pos,
                            message: format!("variable `{v}` quantified twice"),
                        });
                    }
                    self.vars.push(v);
                }
                _ => {
                    self.at -= 1;
                    return Err(self.unexpected("expected a variable"));
                }
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Colon)
    }

    fn iff(&mut self) -> Result<Expr> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implies()?;
            lhs = Expr::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.atom(name)
            }
            _ => Err(self.unexpected("expected an atom, `not` or `(`")),
        }
    }

    fn atom(&mut self, name: String) -> Result<Expr> {
        let relation = self
            .sig
            .relation_index(&name)
            .ok_or_else(|| Error::UnknownRelation(name.clone()))?;
        self.expect(Tok::LParen)?;
        let mut names = Vec::new();
        loop {
            match self.bump() {
                Tok::Ident(v) => names.push(v),
                _ => {
                    self.at -= 1;
                    return Err(self.unexpected("expected a variable"));
                }
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::RParen => break,
                _ => {
                    self.at -= 1;
                    return Err(self.unexpected("expected `,` or `)`"));
                }
            }
        }
        let expected = self.sig.arities[relation];
        if names.len() != expected {
            return Err(Error::ArityError {
                name,
                expected,
                found: names.len(),
            });
        }
        let mut args = Vec::with_capacity(names.len());
        for v in &names {
            let i = self
                .vars
                .iter()
                .position(|q| q == v)
                .ok_or_else(|| Error::UnquantifiedVariable(v.clone()))?;
            if args.contains(&i) {
                return Err(Error::RepeatedVariableInAtom(v.clone()));
            }
            args.push(i);
        }
        Ok(Expr::Atom { relation, args })
    }
}

pub fn parse(text: &str, sig: &Signature) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        sig,
        vars: Vec::new(),
    };
    p.quantifier()?;
    let matrix = p.iff()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("expected end of formula"));
    }
    Ok(Formula { vars: p.vars, matrix })
}
