use serde::{Deserialize, Serialize};

use crate::expr::{Expr, Symbol, SymbolNames};
use crate::{Error, Result};

pub const MAX_BASE_DIM: usize = 4;
pub const MAX_FIBER_DIM: usize = 6;
pub const MAX_ORDER: usize = 4;
/// Cap on the jet order of any expression produced by the operators.
pub const MAX_TOTAL_ORDER: usize = 8;

/// Coordinates of `J_r Y` for a fibered manifold with `n`-dimensional base
/// and `m`-dimensional fiber, plus the named constants usable in expressions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetSpace {
    base: Vec<String>,
    fields: Vec<String>,
    order: usize,
    #[serde(default)]
    constants: Vec<String>,
}

impl JetSpace {
    pub fn new(base: Vec<String>, fields: Vec<String>, order: usize) -> Result<Self> {
        let s = JetSpace { base, fields, order, constants: Vec::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn with_constants(mut self, constants: impl IntoIterator<Item = String>) -> Result<Self> {
        for c in constants {
            if !self.constants.contains(&c) {
                self.constants.push(c);
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.base.len();
        let m = self.fields.len();
        if !(1..=MAX_BASE_DIM).contains(&n) {
            return Err(Error::InvalidSpace(format!("base dimension {n} outside 1..={MAX_BASE_DIM}")));
        }
        if !(1..=MAX_FIBER_DIM).contains(&m) {
            return Err(Error::InvalidSpace(format!("fiber dimension {m} outside 1..={MAX_FIBER_DIM}")));
        }
        if self.order > MAX_ORDER {
            return Err(Error::JetOrderExceeded { order: self.order, cap: MAX_ORDER });
        }
        let mut all: Vec<&String> = self.base.iter().chain(&self.fields).chain(&self.constants).collect();
        for name in &all {
            let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && name.chars().all(|c| c.is_ascii_alphanumeric());
            if !ok || matches!(name.as_str(), "sin" | "cos" | "exp") {
                return Err(Error::InvalidSpace(format!("invalid name `{name}`")));
            }
        }
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpace("coordinate and constant names must be distinct".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn m(&self) -> usize {
        self.fields.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn field_names(&self) -> &[String] {
        &self.fields
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn base_index(&self, name: &str) -> Option<usize> {
        self.base.iter().position(|b| b == name)
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|b| b == name)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    /// Same coordinates with a different jet order (used for derived spaces).
    pub fn with_order(&self, order: usize) -> Result<Self> {
        let mut s = self.clone();
        s.order = order;
        s.validate()?;
        Ok(s)
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        crate::expr::parse(text, self)
    }

    pub fn render(&self, e: &Expr) -> String {
        e.render(self)
    }

    /// Base coordinate symbols `x^1..x^n`.
    pub fn base_symbols(&self) -> Vec<Symbol> {
        (0..self.n()).map(Symbol::base).collect()
    }

    /// Base then field coordinate symbols, the coordinates of `Y`.
    pub fn coordinate_symbols(&self) -> Vec<Symbol> {
        (0..self.n()).map(Symbol::base).chain((0..self.m()).map(Symbol::field)).collect()
    }

    pub fn constant_symbols(&self) -> Vec<Symbol> {
        self.constants.iter().map(|c| Symbol::constant(c)).collect()
    }
}

impl SymbolNames for JetSpace {
    fn symbol_name(&self, s: &Symbol) -> String {
        match s {
            Symbol::Base(i) => self.base[*i as usize].clone(),
            Symbol::Jet { field, multi } => {
                let f = &self.fields[*field as usize];
                if multi.is_empty() {
                    return f.clone();
                }
                let short = self.base.iter().all(|b| b.len() == 1);
                let parts: Vec<&str> = multi.indices().iter().map(|&i| self.base[i as usize].as_str()).collect();
                if short {
                    format!("{f}_{{{}}}", parts.concat())
                } else {
                    format!("{f}_{{{}}}", parts.join(" "))
                }
            }
            Symbol::Homotopy => "@t".into(),
            Symbol::Const(c) => c.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_are_enforced() {
        assert!(JetSpace::new(vec![], vec!["u".into()], 1).is_err());
        assert!(JetSpace::new(vec!["t".into()], vec!["u".into()], 5).is_err());
        assert!(JetSpace::new(vec!["t".into()], vec!["t".into()], 1).is_err());
        assert!(JetSpace::new(vec!["x1".into(), "x2".into()], vec!["u".into()], 2).is_ok());
    }

    #[test]
    fn rendering_round_trips() {
        let s = JetSpace::new(vec!["x1".into(), "x2".into()], vec!["u".into()], 2).unwrap();
        let e = s.parse("u_{x1 x2}*u - 3/2*x1^2").unwrap();
        let text = s.render(&e);
        assert_eq!(s.parse(&text).unwrap(), e);
    }
}
