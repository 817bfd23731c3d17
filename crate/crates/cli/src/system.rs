//! The `count` mini-grammar: members `[l=INT ]COEFFx (=|!=) INT mod B[LEVEL]`
//! joined by `;`. `COEFF` may be omitted or written `3*x`; `LEVEL` is a
//! natural number, `inf` or `-inf`.

use valz_core::congruence::{Congruence, CongruenceSystem};
use valz_core::{Error, Result, ValueElement};

pub fn parse_system(text: &str) -> Result<CongruenceSystem> {
    let mut members = Vec::new();
    let mut offset = 0;
    for part in text.split(';') {
        if !part.trim().is_empty() {
            members.push(
                Member {
                    text: part,
                    base: offset,
                    pos: 0,
                }
                .parse()?,
            );
        }
        offset += part.len() + 1;
    }
    Ok(CongruenceSystem::new(members))
}

struct Member<'a> {
    text: &'a str,
    base: usize,
    pos: usize,
}

impl Member<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.base + self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{token}`")))
        }
    }

    fn int(&mut self) -> Result<Option<i128>> {
        self.skip_ws();
        let start = self.pos;
        let r = self.rest();
        let sign = usize::from(r.starts_with('-') || r.starts_with('+'));
        let digits = r[sign..].chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            return Ok(None);
        }
        self.pos += sign + digits;
        self.text[start..self.pos].parse().map(Some).map_err(|_| Error::Parse {
            pos: self.base + start,
            msg: "integer out of range".into(),
        })
    }

    fn required_int(&mut self, what: &str) -> Result<i128> {
        self.int()?.ok_or_else(|| self.err(format!("expected {what}")))
    }

    fn parse(mut self) -> Result<Congruence> {
        let mut scale = 1;
        if self.eat("l") {
            self.expect("=")?;
            scale = self.required_int("a scale")?;
        }
        self.skip_ws();
        let coeff = if self.eat("-x") {
            -1
        } else if self.eat("x") {
            1
        } else {
            let n = self.required_int("a coefficient")?;
            self.eat("*");
            self.expect("x")?;
            n
        };
        let negated = if self.eat("!=") {
            true
        } else {
            self.expect("=")?;
            false
        };
        let rhs = self.required_int("a right-hand side")?;
        self.expect("mod")?;
        self.expect("B")?;
        self.expect("[")?;
        let level = if self.eat("-inf") {
            ValueElement::NegInf
        } else if self.eat("inf") {
            ValueElement::PosInf
        } else {
            let at = self.pos;
            match self.int()? {
                Some(i) if i >= 0 => ValueElement::Fin(i as u64),
                _ => {
                    self.pos = at;
                    return Err(self.err("expected a level"));
                }
            }
        };
        self.expect("]")?;
        self.skip_ws();
        if !self.rest().is_empty() {
            return Err(self.err("unexpected trailing input"));
        }
        let c = Congruence::new(coeff, rhs, scale, level).map_err(|e| self.err(e.to_string()))?;
        Ok(if negated { c.negate() } else { c })
    }
}
