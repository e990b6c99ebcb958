use std::fmt;

use num_traits::{One, Signed};

use super::{Atom, Expr, Symbol};

/// Resolves symbols to their textual names.
pub trait SymbolNames {
    fn symbol_name(&self, s: &Symbol) -> String;
}

/// Fallback naming: `x0`, `u0`, `u0_{01}`.
pub struct DefaultNames;

impl SymbolNames for DefaultNames {
    fn symbol_name(&self, s: &Symbol) -> String {
        match s {
            Symbol::Base(i) => format!("x{i}"),
            Symbol::Jet { field, multi } if multi.is_empty() => format!("u{field}"),
            Symbol::Jet { field, multi } => {
                let idx: Vec<String> = multi.indices().iter().map(|i| format!("x{i}")).collect();
                format!("u{field}_{{{}}}", idx.join(" "))
            }
            Symbol::Homotopy => "@t".into(),
            Symbol::Const(name) => name.to_string(),
        }
    }
}

pub struct DisplayExpr<'a> {
    expr: &'a Expr,
    names: &'a dyn SymbolNames,
}

impl Expr {
    pub fn display<'a>(&'a self, names: &'a dyn SymbolNames) -> DisplayExpr<'a> {
        DisplayExpr { expr: self, names }
    }

    /// Renders with the given naming; the output is valid input for [`super::parse`].
    pub fn render(&self, names: &dyn SymbolNames) -> String {
        self.display(names).to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&DefaultNames))
    }
}

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.expr.terms().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
                continue;
            }
            let mut first = true;
            if !abs.is_one() {
                write!(f, "{abs}")?;
                first = false;
            }
            for (atom, e) in m.factors() {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                match atom {
                    Atom::Sym(s) => write!(f, "{}", self.names.symbol_name(s))?,
                    Atom::Func(func, arg) => write!(f, "{}({})", func.name(), arg.display(self.names))?,
                    Atom::Recip(sum) => {
                        write!(f, "({})^{}", sum.display(self.names), -e)?;
                        continue;
                    }
                }
                if *e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
