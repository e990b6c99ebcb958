use std::collections::{BTreeMap, BTreeSet};

use super::Lagrangian;
use crate::expr::{equality, EqualityConfig, Expr, MultiIndex, Symbol};
use crate::jet::{total_derivative_multi, JetSpace, SourceForm};
use crate::Result;

/// `E_a = Σ_J (-1)^{|J|} D_J (∂L/∂u^a_J)`.
pub fn euler_lagrange(lag: &Lagrangian, space: &JetSpace) -> Result<SourceForm> {
    euler_of_density(&lag.density, space).map(SourceForm::new)
}

pub(crate) fn euler_of_density(l: &Expr, space: &JetSpace) -> Result<Vec<Expr>> {
    let mut out = vec![Expr::zero(); space.m()];
    for s in l.symbols() {
        if let Symbol::Jet { field, multi } = &s {
            let d = total_derivative_multi(&l.partial(&s), multi, space)?;
            let slot = &mut out[*field as usize];
            *slot = if multi.order() % 2 == 0 { slot.add(&d) } else { slot.sub(&d) };
        }
    }
    Ok(out)
}

/// Nonzero entry of `ℓ - ℓ*`: coefficient of `D_K v^b` in component `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub a: usize,
    pub b: usize,
    pub multi: MultiIndex,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelmholtzReport {
    pub passes: bool,
    pub residuals: Vec<Residual>,
}

/// Self-adjointness of the linearization `ℓ(v)_a = Σ ∂E_a/∂u^b_K D_K v^b`.
pub fn helmholtz_check(eta: &SourceForm, space: &JetSpace, cfg: &EqualityConfig) -> Result<HelmholtzReport> {
    let m = eta.m();
    let n = space.n();
    // coeffs[(a, b)][K] = ∂E_a/∂u^b_K
    let mut coeffs: BTreeMap<(usize, usize), BTreeMap<MultiIndex, Expr>> = BTreeMap::new();
    for (a, e) in eta.components().iter().enumerate() {
        for s in e.symbols() {
            if let Symbol::Jet { field, multi } = &s {
                coeffs.entry((a, *field as usize)).or_default().insert(multi.clone(), e.partial(&s));
            }
        }
    }
    let empty = BTreeMap::new();
    let mut residuals = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let direct = coeffs.get(&(a, b)).unwrap_or(&empty);
            let transposed = coeffs.get(&(b, a)).unwrap_or(&empty);
            // coefficient of D_K v^b in ℓ*(v)_a
            let mut adjoint: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
            for (j, c) in transposed {
                for (k, w) in j.sub_multisets(n) {
                    let rest = j.minus(&k);
                    let mut term = total_derivative_multi(c, &rest, space)?.scale_int(w as i64);
                    if j.order() % 2 == 1 {
                        term = term.neg();
                    }
                    let slot = adjoint.entry(k).or_default();
                    *slot = slot.add(&term);
                }
            }
            let keys: BTreeSet<&MultiIndex> = direct.keys().chain(adjoint.keys()).collect();
            for k in keys {
                let lhs = direct.get(k).cloned().unwrap_or_default();
                let rhs = adjoint.get(k).cloned().unwrap_or_default();
                let r = lhs.sub(&rhs);
                if !equality::is_zero(&r, cfg)? {
                    residuals.push(Residual { a, b, multi: k.clone(), expr: r });
                }
            }
        }
    }
    Ok(HelmholtzReport { passes: residuals.is_empty(), residuals })
}
