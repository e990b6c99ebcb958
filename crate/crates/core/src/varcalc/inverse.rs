//! Local inverses: the Tonti Lagrangian of a source form and a potential
//! for a variationally trivial Lagrangian.

use std::collections::BTreeMap;

use super::euler::euler_of_density;
use super::{helmholtz_check, Lagrangian};
use crate::expr::{equality, EqualityConfig, Expr, MultiIndex, Symbol};
use crate::jet::{total_derivative, HorizontalForm, JetSpace, SourceForm};
use crate::{Error, Result};

/// Point about which homotopies contract: `x0` in the base and `c` in the fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Center {
    pub base: Vec<Expr>,
    pub fiber: Vec<Expr>,
}

impl Center {
    pub fn origin(space: &JetSpace) -> Self {
        Center { base: vec![Expr::zero(); space.n()], fiber: vec![Expr::zero(); space.m()] }
    }

    pub fn with_fiber(space: &JetSpace, fiber: Vec<Expr>) -> Self {
        Center { base: vec![Expr::zero(); space.n()], fiber }
    }
}

/// `u^a ↦ c^a + t (u^a - c^a)`, `u^a_J ↦ t u^a_J` on every jet symbol of `e`.
fn fiber_scaling(e: &Expr, center: &Center) -> BTreeMap<Symbol, Expr> {
    let t = Expr::homotopy();
    let mut out = BTreeMap::new();
    for s in e.symbols() {
        if let Symbol::Jet { field, multi } = &s {
            let img = if multi.is_empty() {
                let c = &center.fiber[*field as usize];
                c.add(&t.mul(&Expr::symbol(s.clone()).sub(c)))
            } else {
                t.mul(&Expr::symbol(s.clone()))
            };
            out.insert(s, img);
        }
    }
    out
}

/// `L = ∫₀¹ Σ_a (u^a - c^a) E_a(x, c + t(u - c), t u_J) dt`.
pub fn tonti_lagrangian(
    eta: &SourceForm,
    space: &JetSpace,
    center: &Center,
    cfg: &EqualityConfig,
) -> Result<Lagrangian> {
    if !helmholtz_check(eta, space, cfg)?.passes {
        return Err(Error::HelmholtzFailed);
    }
    let mut integrand = Expr::zero();
    for (a, e) in eta.components().iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let scaled = e.substitute(&fiber_scaling(e, center))?;
        integrand = integrand.add(&Expr::field(a).sub(&center.fiber[a]).mul(&scaled));
    }
    Ok(Lagrangian::new(integrand.integrate_t()?))
}

/// Accumulates `P · D_J v^a` into the components `K^i` by repeated
/// integration by parts: `P D_{j} D_{J'} v = D_j(P D_{J'} v) - D_j P · D_{J'} v`.
fn integrate_by_parts(
    p: Expr,
    a: usize,
    multi: &MultiIndex,
    center: &Center,
    space: &JetSpace,
    k: &mut [Expr],
) -> Result<()> {
    let Some(&j) = multi.indices().first() else {
        return Ok(());
    };
    let rest = multi.without(j).unwrap();
    let v_rest = if rest.is_empty() {
        Expr::field(a).sub(&center.fiber[a])
    } else {
        Expr::symbol(Symbol::jet(a, rest.clone()))
    };
    k[j as usize] = k[j as usize].add(&p.mul(&v_rest));
    let dp = total_derivative(&p, j as usize, space)?;
    if !dp.is_zero() {
        integrate_by_parts(dp.neg(), a, &rest, center, space, k)?;
    }
    Ok(())
}

/// A current `ν` with `d_H ν = ω` for a top-degree form `ω` with `E(ω) = 0`.
///
/// The fiber part comes from the homotopy `u ↦ c + t(u - c)` followed by
/// integration by parts; the remaining function of `x` alone is handled by
/// the radial homotopy about `center.base`.
pub fn dh_homotopy(
    omega: &HorizontalForm,
    space: &JetSpace,
    center: &Center,
    cfg: &EqualityConfig,
) -> Result<HorizontalForm> {
    let n = space.n();
    if omega.degree() != n {
        return Err(Error::UnsupportedDegree { degree: omega.degree(), n });
    }
    let f = omega.top_coefficient();
    for e in euler_of_density(&f, space)? {
        if !equality::is_zero(&e, cfg)? {
            return Err(Error::NotVariationallyTrivial);
        }
    }
    let mut k = vec![Expr::zero(); n];
    let scaling = fiber_scaling(&f, center);
    for s in f.symbols() {
        if let Symbol::Jet { field, multi } = &s {
            if multi.is_empty() {
                continue;
            }
            let p = f.partial(&s).substitute(&scaling)?;
            integrate_by_parts(p, *field as usize, multi, center, space, &mut k)?;
        }
    }
    let mut comps = Vec::with_capacity(n);
    for c in &k {
        comps.push(c.integrate_t()?);
    }

    // f(x, c, 0)
    let mut rest = BTreeMap::new();
    for s in f.symbols() {
        if let Symbol::Jet { field, multi } = &s {
            let v = if multi.is_empty() { center.fiber[*field as usize].clone() } else { Expr::zero() };
            rest.insert(s, v);
        }
    }
    let f0 = f.substitute(&rest)?;
    if !f0.is_zero() {
        let t = Expr::homotopy();
        let mut radial = BTreeMap::new();
        for i in 0..n {
            let x0 = &center.base[i];
            radial.insert(Symbol::base(i), x0.add(&t.mul(&Expr::base(i).sub(x0))));
        }
        let pulled = f0.substitute(&radial)?.mul(&t.pow((n - 1) as i32)?);
        let integral = pulled.integrate_t()?;
        for (i, c) in comps.iter_mut().enumerate() {
            *c = c.add(&Expr::base(i).sub(&center.base[i]).mul(&integral));
        }
    }
    Ok(HorizontalForm::current(n, &comps))
}
