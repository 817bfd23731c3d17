//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! term    := INT | IDENT | term "+" term | term "-" term | INT "*" term | "-" term | "(" term ")"
//! vterm   := IDENT | INT | "+inf" | "-inf" | "S(" vterm ")" | "v[" INT "](" term ")"
//! atom    := term "=" term
//!          | vterm CMP vterm
//!          | "Div(" INT "," INT "," PRIMESET "," INT ";" vterm "," vterm ")"
//!          | "Ind(" INT "," PRIMESET "," INT ";" vterm "," vterm ")"
//!          | "Rel(" IDENT ";" vterm "," vterm ")"
//! formula := atom | "~" formula | formula ("&" | "|" | "->") formula
//!          | ("E" | "A") IDENT ":" ("G" | "I") "." formula | "(" formula ")"
//! ```
//!
//! `~` binds tightest, then `&`, `|`, and finally `->` (right associative).
//! A quantifier body extends as far right as possible.
//!
//! The sort of a free variable is inferred from its uses. A bare `x = 0`
//! with nothing else known about `x` is read in the group sort.

use std::collections::BTreeMap;

use crate::arith::PrimeSet;
use crate::chain::ValueElement;
use crate::error::{Error, Result};
use crate::formula::ast::{Atom, Cmp, Formula, LinearTerm, Sort, ValueTerm};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i128),
    Ident(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

const SYMBOLS: &[&str] = &[
    "->", "<=", ">=", "(", ")", "[", "]", "{", "}", ",", ";", ".", ":", "+", "-", "*", "=", "<", ">", "~", "&", "|",
];

const RESERVED: &[&str] = &["E", "A", "S", "v", "inf", "Div", "Ind", "Rel"];

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse::<i128>().map_err(|_| Error::Parse {
                pos: start,
                msg: "integer literal out of range".into(),
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                pos: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                pos: start,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    pos: i,
                });
                i += s.len();
            }
            None => {
                return Err(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(out)
}

/// A group term as parsed, remembering whether it was a bare integer literal.
struct ParsedTerm {
    term: LinearTerm,
    bare_int: bool,
    bare_ident: Option<String>,
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    end: usize,
    scopes: Vec<(String, Sort)>,
    /// Sorts of free variables known from unambiguous uses.
    free: BTreeMap<String, Sort>,
    /// First pass: only unambiguous uses are recorded.
    first_pass: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.pos)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_int(&mut self) -> Result<i128> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn known_sort(&self, name: &str) -> Option<Sort> {
        self.scopes
            .iter()
            .rev()
            .find(|(v, _)| v == name)
            .map(|(_, s)| *s)
            .or_else(|| self.free.get(name).copied())
    }

    /// Record an unambiguous use of `name` in `sort`.
    fn use_as(&mut self, name: &str, sort: Sort, at: usize) -> Result<()> {
        if let Some((_, s)) = self.scopes.iter().rev().find(|(v, _)| v == name) {
            if *s != sort {
                return Err(Error::Sort {
                    var: name.to_string(),
                    msg: format!("bound with sort {s} but used with sort {sort} at offset {at}"),
                });
            }
            return Ok(());
        }
        match self.free.get(name) {
            Some(s) if *s != sort => Err(Error::Sort {
                var: name.to_string(),
                msg: format!("used with both sorts (sort {sort} at offset {at})"),
            }),
            Some(_) => Ok(()),
            None => {
                self.free.insert(name.to_string(), sort);
                Ok(())
            }
        }
    }

    // formula := implication
    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut acc = self.conjunction()?;
        while self.eat_sym("|") {
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        while self.eat_sym("&") {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat_sym("~") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_ident("E") || self.is_ident("A") {
            let exists = self.is_ident("E");
            self.pos += 1;
            let var = self.expect_ident()?;
            self.expect_sym(":")?;
            let sort = match self.peek() {
                Some(Tok::Ident(s)) if s == "G" => Sort::Group,
                Some(Tok::Ident(s)) if s == "I" => Sort::Value,
                _ => return self.err("expected sort `G` or `I`"),
            };
            self.pos += 1;
            self.expect_sym(".")?;
            self.scopes.push((var.clone(), sort));
            let body = self.formula();
            self.scopes.pop();
            let body = body?;
            return Ok(if exists {
                Formula::exists(&var, sort, body)
            } else {
                Formula::forall(&var, sort, body)
            });
        }
        if self.is_sym("(") {
            // Either a parenthesized formula or an atom whose group term is parenthesized.
            let save = (self.pos, self.free.clone());
            self.pos += 1;
            if let Ok(f) = self.formula() {
                if self.eat_sym(")") && !self.continues_atom() {
                    return Ok(f);
                }
            }
            self.pos = save.0;
            self.free = save.1;
        }
        Ok(Formula::Atom(self.atom()?))
    }

    /// After a closing parenthesis: would the parenthesized text be an operand of an atom?
    fn continues_atom(&self) -> bool {
        ["=", "<=", ">=", "<", ">", "+", "-", "*"]
            .iter()
            .any(|s| self.is_sym(s))
            && !self.is_sym("->")
    }

    fn cmp(&mut self) -> Option<Cmp> {
        let op = match self.peek() {
            Some(Tok::Sym("=")) => Cmp::Eq,
            Some(Tok::Sym("<=")) => Cmp::Le,
            Some(Tok::Sym(">=")) => Cmp::Ge,
            Some(Tok::Sym("<")) => Cmp::Lt,
            Some(Tok::Sym(">")) => Cmp::Gt,
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }

    fn atom(&mut self) -> Result<Atom> {
        if self.is_ident("Div") {
            self.pos += 1;
            self.expect_sym("(")?;
            let q = self.expect_int()?;
            self.expect_sym(",")?;
            let k = self.expect_int()?;
            self.expect_sym(",")?;
            let primes = self.prime_set()?;
            self.expect_sym(",")?;
            let scale = self.scale()?;
            self.expect_sym(";")?;
            let (lhs, rhs) = self.value_pair()?;
            let k = u64::try_from(k).map_err(|_| Error::Parse {
                pos: self.here(),
                msg: "Div exponent must be nonnegative".into(),
            })?;
            return Ok(Atom::Div {
                q,
                k,
                primes,
                scale,
                lhs,
                rhs,
            });
        }
        if self.is_ident("Ind") {
            self.pos += 1;
            self.expect_sym("(")?;
            let k = self.expect_int()?;
            self.expect_sym(",")?;
            let primes = self.prime_set()?;
            self.expect_sym(",")?;
            let scale = self.scale()?;
            self.expect_sym(";")?;
            let (lhs, rhs) = self.value_pair()?;
            return Ok(Atom::Ind {
                k,
                primes,
                scale,
                lhs,
                rhs,
            });
        }
        if self.is_ident("Rel") {
            self.pos += 1;
            self.expect_sym("(")?;
            let name = self.expect_ident()?;
            self.expect_sym(";")?;
            let (lhs, rhs) = self.value_pair()?;
            return Ok(Atom::Rel { name, lhs, rhs });
        }
        if self.starts_value_only() {
            let lhs = self.vterm()?;
            return self.finish_compare(lhs);
        }
        let start = self.here();
        let lhs = self.term()?;
        let save = self.pos;
        let op = match self.cmp() {
            Some(op) => op,
            None => return self.err("expected a comparison"),
        };
        let mut guessed = false;
        let as_value = if lhs.bare_int {
            true
        } else if let Some(name) = &lhs.bare_ident {
            match self.known_sort(name) {
                Some(s) => s == Sort::Value,
                None => {
                    guessed = op == Cmp::Eq;
                    op != Cmp::Eq || self.starts_value_rhs()
                }
            }
        } else {
            false
        };
        // A guess made before all uses are seen must not pin the sort.
        let record = !(guessed && self.first_pass);
        if as_value {
            self.pos = save;
            let lhs = match (lhs.bare_int, lhs.bare_ident) {
                (true, _) => ValueTerm::fin(non_negative(lhs.term.constant_part(), start)?),
                (_, Some(name)) => {
                    self.use_as(&name, Sort::Value, start)?;
                    ValueTerm::Var(name)
                }
                _ => unreachable!(),
            };
            return self.finish_compare(lhs);
        }
        if let Some(name) = lhs.bare_ident.as_ref().filter(|_| record) {
            self.use_as(name, Sort::Group, start)?;
        }
        if op != Cmp::Eq {
            return Err(Error::Parse {
                pos: start,
                msg: "group terms are only compared with `=`".into(),
            });
        }
        let rhs_start = self.here();
        let rhs = self.term()?;
        if let Some(name) = rhs.bare_ident.as_ref().filter(|_| record) {
            self.use_as(name, Sort::Group, rhs_start)?;
        }
        Ok(Atom::IsZero(lhs.term.sub(&rhs.term)?))
    }

    fn finish_compare(&mut self, lhs: ValueTerm) -> Result<Atom> {
        let op = match self.cmp() {
            Some(op) => op,
            None => return self.err("expected a comparison"),
        };
        let rhs = self.vterm()?;
        Ok(Atom::Compare { lhs, op, rhs })
    }

    /// Tokens that can only begin a value term.
    fn starts_value_only(&self) -> bool {
        (self.is_ident("v") && matches!(self.peek_at(1), Some(Tok::Sym("[")) | Some(Tok::Sym("("))))
            || (self.is_ident("S") && matches!(self.peek_at(1), Some(Tok::Sym("("))))
            || (matches!(self.peek(), Some(Tok::Sym("+")) | Some(Tok::Sym("-")))
                && matches!(self.peek_at(1), Some(Tok::Ident(s)) if s == "inf"))
    }

    fn starts_value_rhs(&self) -> bool {
        if self.starts_value_only() {
            return true;
        }
        match self.peek() {
            Some(Tok::Ident(s)) => self.known_sort(s) == Some(Sort::Value),
            _ => false,
        }
    }

    fn value_pair(&mut self) -> Result<(ValueTerm, ValueTerm)> {
        let lhs = self.vterm()?;
        self.expect_sym(",")?;
        let rhs = self.vterm()?;
        self.expect_sym(")")?;
        Ok((lhs, rhs))
    }

    fn prime_set(&mut self) -> Result<PrimeSet> {
        self.expect_sym("{")?;
        let mut out = PrimeSet::new();
        if self.eat_sym("}") {
            return Ok(out);
        }
        loop {
            out.insert(self.expect_int()?);
            if self.eat_sym("}") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn scale(&mut self) -> Result<i128> {
        let pos = self.here();
        let l = self.expect_int()?;
        if l < 1 {
            return Err(Error::Parse {
                pos,
                msg: "scale must be ≥ 1".into(),
            });
        }
        Ok(l)
    }

    fn vterm(&mut self) -> Result<ValueTerm> {
        let start = self.here();
        match self.peek().cloned() {
            Some(Tok::Sym(s @ ("+" | "-"))) => {
                self.pos += 1;
                if !self.is_ident("inf") {
                    return self.err("expected `inf`");
                }
                self.pos += 1;
                Ok(ValueTerm::Const(if s == "+" {
                    ValueElement::PosInf
                } else {
                    ValueElement::NegInf
                }))
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(ValueTerm::fin(non_negative(n, start)?))
            }
            Some(Tok::Ident(s)) if s == "S" => {
                self.pos += 1;
                self.expect_sym("(")?;
                let inner = self.vterm()?;
                self.expect_sym(")")?;
                Ok(ValueTerm::succ(inner))
            }
            Some(Tok::Ident(s)) if s == "v" => {
                self.pos += 1;
                let scale = if self.eat_sym("[") {
                    let l = self.scale()?;
                    self.expect_sym("]")?;
                    l
                } else {
                    1
                };
                self.expect_sym("(")?;
                let inner_start = self.here();
                let t = self.term()?;
                if let Some(name) = &t.bare_ident {
                    self.use_as(name, Sort::Group, inner_start)?;
                }
                self.expect_sym(")")?;
                Ok(ValueTerm::val(scale, t.term))
            }
            Some(Tok::Ident(_)) => {
                let name = self.expect_ident()?;
                self.use_as(&name, Sort::Value, start)?;
                Ok(ValueTerm::Var(name))
            }
            _ => self.err("expected a value term"),
        }
    }

    // term := product (("+" | "-") product)*
    fn term(&mut self) -> Result<ParsedTerm> {
        let first = self.product()?;
        if !(self.is_sym("+") || self.is_sym("-")) || self.sign_starts_inf() {
            return Ok(first);
        }
        self.mark_group(&first)?;
        let mut acc = first.term;
        loop {
            let neg = if self.is_sym("+") && !self.sign_starts_inf() {
                false
            } else if self.is_sym("-") && !self.sign_starts_inf() {
                true
            } else {
                break;
            };
            self.pos += 1;
            let next = self.product()?;
            self.mark_group(&next)?;
            acc = if neg {
                acc.sub(&next.term)?
            } else {
                acc.add(&next.term)?
            };
        }
        Ok(ParsedTerm {
            term: acc,
            bare_int: false,
            bare_ident: None,
        })
    }

    fn sign_starts_inf(&self) -> bool {
        matches!(self.peek_at(1), Some(Tok::Ident(s)) if s == "inf")
    }

    fn mark_group(&mut self, t: &ParsedTerm) -> Result<()> {
        if let Some(name) = &t.bare_ident {
            let at = self.here();
            self.use_as(name, Sort::Group, at)?;
        }
        Ok(())
    }

    // product := "-" product | INT "*" product | atom_term
    fn product(&mut self) -> Result<ParsedTerm> {
        if self.eat_sym("-") {
            let inner = self.product()?;
            self.mark_group(&inner)?;
            return Ok(ParsedTerm {
                term: inner.term.scale(-1)?,
                bare_int: false,
                bare_ident: None,
            });
        }
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                if self.eat_sym("*") {
                    let inner = self.product()?;
                    self.mark_group(&inner)?;
                    return Ok(ParsedTerm {
                        term: inner.term.scale(n)?,
                        bare_int: false,
                        bare_ident: None,
                    });
                }
                Ok(ParsedTerm {
                    term: LinearTerm::constant(n),
                    bare_int: true,
                    bare_ident: None,
                })
            }
            Some(Tok::Ident(_)) => {
                let name = self.expect_ident()?;
                Ok(ParsedTerm {
                    term: LinearTerm::var(&name),
                    bare_int: false,
                    bare_ident: Some(name),
                })
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let inner = self.term()?;
                self.mark_group(&inner)?;
                self.expect_sym(")")?;
                Ok(ParsedTerm {
                    term: inner.term,
                    bare_int: false,
                    bare_ident: None,
                })
            }
            _ => self.err("expected a group term"),
        }
    }
}

fn non_negative(n: i128, pos: usize) -> Result<u64> {
    u64::try_from(n).map_err(|_| Error::Parse {
        pos,
        msg: "value constants are natural numbers".into(),
    })
}

fn run(
    toks: &[Token],
    end: usize,
    free: BTreeMap<String, Sort>,
    first_pass: bool,
) -> Result<(Formula, BTreeMap<String, Sort>)> {
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        scopes: Vec::new(),
        free,
        first_pass,
    };
    let f = p.formula()?;
    if p.pos != toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok((f, p.free))
}

pub fn parse(text: &str) -> Result<Formula> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(Error::Parse {
            pos: 0,
            msg: "empty formula".into(),
        });
    }
    // First pass learns free-variable sorts from unambiguous uses; the second
    // resolves bare `x = ...` atoms with that knowledge.
    let (_, free) = run(&toks, text.len(), BTreeMap::new(), true)?;
    let (f, _) = run(&toks, text.len(), free, false)?;
    Ok(f)
}
