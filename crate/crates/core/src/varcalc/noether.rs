//! Lie derivatives along projectable fields and the Noether current family.

use super::euler::euler_of_density;
use super::inverse::{dh_homotopy, Center};
use super::{helmholtz_check, Lagrangian};
use crate::expr::{equality, EqualityConfig, Expr, MultiIndex, Symbol};
use crate::jet::{total_derivative, HorizontalForm, JetSpace, ProjectableVectorField, SourceForm};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieDerivative {
    /// `L_Ξ λ`.
    pub lie: Lagrangian,
    /// Canonical current `ε`.
    pub current: HorizontalForm,
}

/// `ε^i = Ξ^i L + Ξ_V^a (∂L/∂u^a_i - D_j P^{ij}_a) + D_j Ξ_V^a P^{ij}_a`, with
/// `P^{ij}_a` the symmetric second-order momenta.
pub fn canonical_current(field: &ProjectableVectorField, lag: &Lagrangian, space: &JetSpace) -> Result<HorizontalForm> {
    let order = lag.order();
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let n = space.n();
    let l = &lag.density;
    let xv = field.vertical();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = field.base()[i].mul(l);
        for (a, v) in xv.iter().enumerate() {
            let mut first = l.partial(&Symbol::jet(a, MultiIndex::new(vec![i as u8])));
            for j in 0..n {
                let p = momentum(l, a, i, j);
                if p.is_zero() {
                    continue;
                }
                first = first.sub(&total_derivative(&p, j, space)?);
                e = e.add(&total_derivative(v, j, space)?.mul(&p));
            }
            e = e.add(&v.mul(&first));
        }
        comps.push(e);
    }
    Ok(HorizontalForm::current(n, &comps))
}

fn momentum(l: &Expr, a: usize, i: usize, j: usize) -> Expr {
    let d = l.partial(&Symbol::jet(a, MultiIndex::new(vec![i as u8, j as u8])));
    if i == j {
        d
    } else {
        d.scale(&crate::expr::rational(1, 2))
    }
}

/// `L_Ξ λ = (pr Ξ (L) + L D_i Ξ^i) vol`, together with the canonical current.
pub fn variational_lie_derivative_lagrangian(
    field: &ProjectableVectorField,
    lag: &Lagrangian,
    space: &JetSpace,
) -> Result<LieDerivative> {
    let current = canonical_current(field, lag, space)?;
    let lie = lie_density(field, &lag.density, space)?;
    let mut out = Lagrangian::new(lie);
    out.chart = lag.chart.clone();
    Ok(LieDerivative { lie: out, current })
}

pub(crate) fn lie_density(field: &ProjectableVectorField, l: &Expr, space: &JetSpace) -> Result<Expr> {
    Ok(field.apply(l, space)?.add(&l.mul(&field.base_divergence(space)?)))
}

/// `L_Ξ η = E(Ξ_V^a E_a)` for a locally variational `η`.
pub fn variational_lie_derivative_source(
    field: &ProjectableVectorField,
    eta: &SourceForm,
    space: &JetSpace,
    cfg: &EqualityConfig,
) -> Result<SourceForm> {
    if !helmholtz_check(eta, space, cfg)?.passes {
        return Err(Error::HelmholtzFailed);
    }
    Ok(SourceForm::new(euler_of_density(&eta.contract(&field.vertical()), space)?))
}

/// Components `(L_Ξ ν)^k = pr Ξ(ν^k) + ν^k D_j Ξ^j - ν^j D_j Ξ^k` of the Lie
/// derivative of a current.
pub fn lie_derivative_current(
    field: &ProjectableVectorField,
    current: &HorizontalForm,
    space: &JetSpace,
) -> Result<HorizontalForm> {
    let n = space.n();
    let nu = current.current_components();
    let div = field.base_divergence(space)?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = field.apply(&nu[k], space)?.add(&nu[k].mul(&div));
        for (j, nj) in nu.iter().enumerate() {
            let d = total_derivative(&field.base()[k], j, space)?;
            if !d.is_zero() {
                e = e.sub(&nj.mul(&d));
            }
        }
        out.push(e);
    }
    Ok(HorizontalForm::current(n, &out))
}

/// A derived current with the identity that certifies it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoetherCurrent {
    pub current: HorizontalForm,
    /// `β` for the Noether-Bessel-Hagen current, `ν` for the strong current.
    pub potential: HorizontalForm,
    pub certificate: bool,
}

fn contraction_form(field: &ProjectableVectorField, lag: &Lagrangian, space: &JetSpace) -> Result<HorizontalForm> {
    let eta = euler_of_density(&lag.density, space)?;
    let c: Expr = eta.iter().zip(field.vertical()).map(|(e, v)| e.mul(&v)).sum();
    Ok(HorizontalForm::volume(space.n(), c))
}

/// `ε - β` with `d_H β = L_Ξ λ`; certified by `Ξ_V⌟η + d_H(ε - β) = 0`.
pub fn noether_bessel_hagen_current(
    field: &ProjectableVectorField,
    lag: &Lagrangian,
    space: &JetSpace,
    center: &Center,
    cfg: &EqualityConfig,
) -> Result<NoetherCurrent> {
    let lie = variational_lie_derivative_lagrangian(field, lag, space)?;
    let beta = dh_homotopy(&lie.lie.to_form(space.n()), space, center, cfg)?;
    let current = lie.current.sub(&beta);
    let lhs = contraction_form(field, lag, space)?.add(&current.dh(space)?);
    let certificate = lhs.equals(&HorizontalForm::zero(space.n(), space.n()), cfg)?;
    Ok(NoetherCurrent { current, potential: beta, certificate })
}

/// `ν + ε` with `d_H ν = Ξ_V⌟η`; certified by `d_H(ν + ε) = d_H β = L_Ξ λ`.
pub fn strong_noether_current(
    field: &ProjectableVectorField,
    lag: &Lagrangian,
    space: &JetSpace,
    center: &Center,
    cfg: &EqualityConfig,
) -> Result<NoetherCurrent> {
    let lie = variational_lie_derivative_lagrangian(field, lag, space)?;
    let nu = dh_homotopy(&contraction_form(field, lag, space)?, space, center, cfg)?;
    let current = nu.add(&lie.current);
    let certificate = current.dh(space)?.equals(&lie.lie.to_form(space.n()), cfg)?;
    Ok(NoetherCurrent { current, potential: nu, certificate })
}

/// Everything derivable from one symmetry candidate on one chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoetherData {
    pub lie: Lagrangian,
    pub canonical: HorizontalForm,
    pub lagrangian_symmetry: bool,
    pub equation_symmetry: bool,
    pub bessel_hagen: Option<NoetherCurrent>,
    pub strong: Option<NoetherCurrent>,
}

impl NoetherData {
    pub fn beta(&self) -> Option<&HorizontalForm> {
        self.bessel_hagen.as_ref().map(|c| &c.potential)
    }

    pub fn nu(&self) -> Option<&HorizontalForm> {
        self.strong.as_ref().map(|c| &c.potential)
    }
}

/// Classifies `Ξ` and builds the currents that exist for it.
pub fn noether_data(
    field: &ProjectableVectorField,
    lag: &Lagrangian,
    space: &JetSpace,
    center: &Center,
    cfg: &EqualityConfig,
) -> Result<NoetherData> {
    let lie = variational_lie_derivative_lagrangian(field, lag, space)?;
    let lagrangian_symmetry = equality::is_zero(&lie.lie.density, cfg)?;
    let contraction = contraction_form(field, lag, space)?.top_coefficient();
    let mut equation_symmetry = true;
    for e in euler_of_density(&contraction, space)? {
        if !equality::is_zero(&e, cfg)? {
            equation_symmetry = false;
        }
    }
    let (bessel_hagen, strong) = if equation_symmetry {
        (
            Some(noether_bessel_hagen_current(field, lag, space, center, cfg)?),
            Some(strong_noether_current(field, lag, space, center, cfg)?),
        )
    } else {
        (None, None)
    };
    Ok(NoetherData {
        lie: lie.lie,
        canonical: lie.current,
        lagrangian_symmetry,
        equation_symmetry,
        bessel_hagen,
        strong,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varcalc::euler_lagrange;

    fn cfg() -> EqualityConfig {
        EqualityConfig::default()
    }

    fn s1() -> JetSpace {
        JetSpace::new(vec!["t".into()], vec!["u".into()], 2).unwrap()
    }

    fn field(s: &JetSpace, base: &[&str], fiber: &[&str]) -> ProjectableVectorField {
        ProjectableVectorField::new(
            s,
            base.iter().map(|e| s.parse(e).unwrap()).collect(),
            fiber.iter().map(|e| s.parse(e).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn free_particle_currents() {
        let s = s1();
        let lag = Lagrangian::new(s.parse("1/2*u_t^2").unwrap());
        let du = field(&s, &["0"], &["1"]);
        let r = variational_lie_derivative_lagrangian(&du, &lag, &s).unwrap();
        assert!(r.lie.density.is_zero());
        assert_eq!(r.current.coefficient(&[]), s.parse("u_t").unwrap());
        let dt = field(&s, &["1"], &["0"]);
        let r = variational_lie_derivative_lagrangian(&dt, &lag, &s).unwrap();
        assert!(r.lie.density.is_zero());
        assert_eq!(r.current.coefficient(&[]), s.parse("-1/2*u_t^2").unwrap());
        let zero = field(&s, &["0"], &["0"]);
        let r = variational_lie_derivative_lagrangian(&zero, &lag, &s).unwrap();
        assert!(r.lie.density.is_zero() && r.current.is_zero());
    }

    #[test]
    fn third_order_is_rejected() {
        let s = JetSpace::new(vec!["t".into()], vec!["u".into()], 3).unwrap();
        let lag = Lagrangian::new(s.parse("u_ttt^2").unwrap());
        let r = variational_lie_derivative_lagrangian(&field(&s, &["1"], &["0"]), &lag, &s);
        assert!(matches!(r, Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn noether_identity_second_order_two_dimensions() {
        let s = JetSpace::new(vec!["x".into(), "y".into()], vec!["u".into()], 2).unwrap();
        let lag = Lagrangian::new(s.parse("u_xy^2 + u*u_xx*y - x*u_y^2").unwrap());
        let f = field(&s, &["x*y", "1 + x"], &["u*y + x^2"]);
        let lie = variational_lie_derivative_lagrangian(&f, &lag, &s).unwrap();
        let eta = euler_lagrange(&lag, &s).unwrap();
        let lhs = lie.lie.density.sub(&eta.contract(&f.vertical())).sub(&lie.current.dh(&s).unwrap().top_coefficient());
        assert!(lhs.is_zero(), "{lhs}");
    }

    #[test]
    fn source_lie_derivative_examples() {
        let s = s1();
        let eta = SourceForm::new(vec![s.parse("-u_tt").unwrap()]);
        let du = field(&s, &["0"], &["1"]);
        assert!(variational_lie_derivative_source(&du, &eta, &s, &cfg()).unwrap().is_zero());
        let bad = SourceForm::new(vec![s.parse("u_t").unwrap()]);
        assert!(matches!(variational_lie_derivative_source(&du, &bad, &s, &cfg()), Err(Error::HelmholtzFailed)));
    }

    #[test]
    fn equation_only_symmetry() {
        // L = ½u_t² + u_t u: Ξ = ∂_u changes L by a divergence
        let s = s1();
        let lag = Lagrangian::new(s.parse("1/2*u_t^2 + t*u_t").unwrap());
        let du = field(&s, &["0"], &["1"]);
        let d = noether_data(&du, &lag, &s, &Center::origin(&s), &cfg()).unwrap();
        assert!(d.equation_symmetry);
        assert!(d.lagrangian_symmetry);
        let dt = field(&s, &["1"], &["0"]);
        let d = noether_data(&dt, &lag, &s, &Center::origin(&s), &cfg()).unwrap();
        assert!(d.equation_symmetry);
        assert!(!d.lagrangian_symmetry);
        assert!(d.bessel_hagen.as_ref().unwrap().certificate);
        assert!(d.strong.as_ref().unwrap().certificate);
    }

    #[test]
    fn non_symmetry_has_no_currents() {
        let s = s1();
        let lag = Lagrangian::new(s.parse("1/2*u_t^2").unwrap());
        let f = field(&s, &["0"], &["u"]);
        let d = noether_data(&f, &lag, &s, &Center::origin(&s), &cfg()).unwrap();
        assert!(!d.equation_symmetry);
        assert!(d.bessel_hagen.is_none() && d.strong.is_none());
    }
}
