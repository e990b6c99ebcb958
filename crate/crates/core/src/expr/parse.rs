//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' integer)?
//! integer := '-'? digits | '(' '-'? digits ')'
//! primary := number | '@t' | name | jet | func '(' expr ')' | '(' expr ')'
//! jet     := field '_' ( '{' base-names '}' | base-names )
//! func    := 'sin' | 'cos' | 'exp'
//! ```
//!
//! Inside a jet suffix, base names may be separated by spaces or commas, or
//! written back to back (`u_{xy}`, `u_xx`) when the concatenation splits
//! uniquely into declared base names.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Expr, Func, MultiIndex, Symbol};
use crate::jet::JetSpace;
use crate::{Error, Result};

pub fn parse(text: &str, space: &JetSpace) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, space };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    space: &'a JetSpace,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let rhs = self.unary()?;
                acc = acc.div(&rhs).map_err(|_| Error::Syntax { pos: at, msg: "division by zero".into() })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let at = self.pos;
            let k = self.integer()?;
            return base.pow(k).map_err(|_| Error::Syntax { pos: at, msg: "zero to a negative power".into() });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: i32 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
        if paren && !self.eat(b')') {
            return Err(self.error("expected `)`"));
        }
        Ok(if neg { -v } else { v })
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(b'@') => {
                if self.src[self.pos..].starts_with(b"@t") {
                    self.pos += 2;
                    Ok(Expr::homotopy())
                } else {
                    Err(self.error("only `@t` is reserved"))
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        let mut frac = String::new();
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac = std::str::from_utf8(&self.src[fs..self.pos]).unwrap().to_string();
        }
        if int_part.is_empty() && frac.is_empty() {
            return Err(self.error("malformed number"));
        }
        let digits = format!("{int_part}{frac}");
        let num: BigInt = digits.parse().map_err(|_| self.error("malformed number"))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        Ok(Expr::constant(BigRational::new(num, den)))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string()
    }

    fn name(&mut self) -> Result<Expr> {
        let start = self.pos;
        let name = self.ident();
        let func = match name.as_str() {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        };
        if let Some(f) = func {
            if self.eat(b'(') {
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                return Ok(Expr::apply(f, arg));
            }
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'_' {
            self.pos += 1;
            let a = self.space.field_index(&name).ok_or(Error::UnknownCoordinate(name.clone()))?;
            let multi = self.jet_suffix()?;
            if multi.order() > self.space.order() {
                return Err(Error::JetOrderExceeded { order: multi.order(), cap: self.space.order() });
            }
            return Ok(Expr::symbol(Symbol::jet(a, multi)));
        }
        if let Some(i) = self.space.base_index(&name) {
            return Ok(Expr::base(i));
        }
        if let Some(a) = self.space.field_index(&name) {
            return Ok(Expr::field(a));
        }
        if self.space.has_constant(&name) {
            return Ok(Expr::named(&name));
        }
        self.pos = start;
        Err(Error::UnknownCoordinate(name))
    }

    fn jet_suffix(&mut self) -> Result<MultiIndex> {
        let mut indices = Vec::new();
        if self.pos < self.src.len() && self.src[self.pos] == b'{' {
            self.pos += 1;
            loop {
                self.skip_ws();
                match self.src.get(self.pos) {
                    Some(b'}') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b',') => self.pos += 1,
                    Some(c) if c.is_ascii_alphanumeric() => {
                        let chunk = self.ident();
                        indices.extend(self.split_base_names(&chunk)?);
                    }
                    _ => return Err(self.error("expected base coordinate names or `}`")),
                }
            }
        } else {
            let chunk = self.ident();
            if chunk.is_empty() {
                return Err(self.error("expected a jet suffix"));
            }
            indices.extend(self.split_base_names(&chunk)?);
        }
        if indices.is_empty() {
            return Err(self.error("empty jet suffix"));
        }
        Ok(MultiIndex::new(indices))
    }

    /// Splits a run of characters into base names; fails unless exactly one split exists.
    fn split_base_names(&self, chunk: &str) -> Result<Vec<u8>> {
        fn go(rest: &str, space: &JetSpace, acc: &mut Vec<u8>, found: &mut Vec<Vec<u8>>) {
            if rest.is_empty() {
                found.push(acc.clone());
                return;
            }
            for (i, name) in space.base_names().iter().enumerate() {
                if let Some(tail) = rest.strip_prefix(name.as_str()) {
                    acc.push(i as u8);
                    go(tail, space, acc, found);
                    acc.pop();
                }
            }
        }
        let mut found = Vec::new();
        go(chunk, self.space, &mut Vec::new(), &mut found);
        match found.len() {
            1 => Ok(found.pop().unwrap()),
            0 => Err(Error::UnknownCoordinate(chunk.to_string())),
            _ => Err(self.error(&format!("ambiguous jet suffix `{chunk}`"))),
        }
    }
}
