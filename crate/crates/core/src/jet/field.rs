use std::collections::BTreeMap;

use super::{total_derivative, JetSpace};
use crate::expr::{Expr, MultiIndex, Symbol};
use crate::{Error, Result};

/// `Ξ = Ξ^i(x) ∂_i + Ξ^a(x, u) ∂_a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectableVectorField {
    base: Vec<Expr>,
    fiber: Vec<Expr>,
}

/// Components `Ξ^a_J` of a prolonged field, keyed by `(a, J)`.
#[derive(Clone, Debug, Default)]
pub struct Prolongation {
    pub components: BTreeMap<(usize, MultiIndex), Expr>,
}

impl ProjectableVectorField {
    pub fn new(space: &JetSpace, base: Vec<Expr>, fiber: Vec<Expr>) -> Result<Self> {
        if base.len() != space.n() || fiber.len() != space.m() {
            return Err(Error::InvalidSpace("vector field has the wrong number of components".into()));
        }
        for (i, c) in base.iter().enumerate() {
            if c.symbols().iter().any(|s| matches!(s, Symbol::Jet { .. } | Symbol::Homotopy)) {
                return Err(Error::NotProjectable(format!("base component {i} depends on fiber coordinates")));
            }
        }
        for (a, c) in fiber.iter().enumerate() {
            if c.jet_order() > 0 || c.contains(&Symbol::Homotopy) {
                return Err(Error::NotProjectable(format!("fiber component {a} depends on derivatives")));
            }
        }
        Ok(ProjectableVectorField { base, fiber })
    }

    pub fn base(&self) -> &[Expr] {
        &self.base
    }

    pub fn fiber(&self) -> &[Expr] {
        &self.fiber
    }

    pub fn is_zero(&self) -> bool {
        self.base.iter().chain(&self.fiber).all(Expr::is_zero)
    }

    /// `Ξ_V^a = Ξ^a - u^a_i Ξ^i`.
    pub fn vertical(&self) -> Vec<Expr> {
        (0..self.fiber.len())
            .map(|a| {
                let mut v = self.fiber[a].clone();
                for (i, xi) in self.base.iter().enumerate() {
                    v = v.sub(&Expr::jet(a, &[i as u8]).mul(xi));
                }
                v
            })
            .collect()
    }

    fn component(
        &self,
        a: usize,
        multi: &MultiIndex,
        space: &JetSpace,
        memo: &mut BTreeMap<(usize, MultiIndex), Expr>,
    ) -> Result<Expr> {
        if multi.is_empty() {
            return Ok(self.fiber[a].clone());
        }
        if let Some(e) = memo.get(&(a, multi.clone())) {
            return Ok(e.clone());
        }
        let i = *multi.indices().last().unwrap();
        let parent = multi.without(i).unwrap();
        let prev = self.component(a, &parent, space, memo)?;
        let mut out = total_derivative(&prev, i as usize, space)?;
        for (k, xi) in self.base.iter().enumerate() {
            let d = total_derivative(xi, i as usize, space)?;
            if d.is_zero() {
                continue;
            }
            out = out.sub(&Expr::symbol(Symbol::jet(a, parent.with(k as u8))).mul(&d));
        }
        memo.insert((a, multi.clone()), out.clone());
        Ok(out)
    }

    /// All components `Ξ^a_J` with `|J| <= order`.
    pub fn prolong(&self, space: &JetSpace, order: usize) -> Result<Prolongation> {
        let mut memo = BTreeMap::new();
        let mut p = Prolongation::default();
        for a in 0..self.fiber.len() {
            for multi in MultiIndex::all_up_to(space.n(), order) {
                let c = self.component(a, &multi, space, &mut memo)?;
                p.components.insert((a, multi), c);
            }
        }
        Ok(p)
    }

    /// `pr Ξ (e) = Ξ^i ∂_i e + Σ Ξ^a_J ∂e/∂u^a_J`.
    pub fn apply(&self, e: &Expr, space: &JetSpace) -> Result<Expr> {
        let mut memo = BTreeMap::new();
        let mut out = Expr::zero();
        for s in e.symbols() {
            let coeff = match &s {
                Symbol::Base(i) => self.base[*i as usize].clone(),
                Symbol::Jet { field, multi } => self.component(*field as usize, multi, space, &mut memo)?,
                _ => continue,
            };
            if !coeff.is_zero() {
                out = out.add(&coeff.mul(&e.partial(&s)));
            }
        }
        Ok(out)
    }

    /// `D_i Ξ^i`.
    pub fn base_divergence(&self, space: &JetSpace) -> Result<Expr> {
        let mut out = Expr::zero();
        for (i, xi) in self.base.iter().enumerate() {
            out = out.add(&total_derivative(xi, i, space)?);
        }
        Ok(out)
    }
}
