//! Jet-space bookkeeping: total derivatives, horizontal and coordinate forms,
//! projectable vector fields with their prolongations, and sections.

mod field;
mod forms;
mod section;
mod space;

pub use field::{Prolongation, ProjectableVectorField};
pub use forms::{sort_with_sign, DiffForm, HorizontalForm, SourceForm};
pub use section::Section;
pub use space::{JetSpace, MAX_BASE_DIM, MAX_FIBER_DIM, MAX_ORDER, MAX_TOTAL_ORDER};

use crate::expr::{Expr, MultiIndex, Symbol};
use crate::{Error, Result};

/// `D_i e = ∂e/∂x^i + Σ u^a_{J+i} ∂e/∂u^a_J`.
pub fn total_derivative(e: &Expr, i: usize, space: &JetSpace) -> Result<Expr> {
    debug_assert!(i < space.n());
    let mut out = e.partial(&Symbol::base(i));
    for s in e.symbols() {
        if let Symbol::Jet { field, multi } = &s {
            let next = multi.with(i as u8);
            if next.order() > MAX_TOTAL_ORDER {
                return Err(Error::JetOrderExceeded { order: next.order(), cap: MAX_TOTAL_ORDER });
            }
            let d = e.partial(&s);
            out = out.add(&Expr::symbol(Symbol::Jet { field: *field, multi: next }).mul(&d));
        }
    }
    Ok(out)
}

/// `D_J e` for a multi-index `J`.
pub fn total_derivative_multi(e: &Expr, multi: &MultiIndex, space: &JetSpace) -> Result<Expr> {
    let mut out = e.clone();
    for &i in multi.indices() {
        if out.is_zero() {
            break;
        }
        out = total_derivative(&out, i as usize, space)?;
    }
    Ok(out)
}
