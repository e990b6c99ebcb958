use super::Lagrangian;
use crate::expr::{Expr, MultiIndex, Symbol};
use crate::jet::{total_derivative, DiffForm, JetSpace};
use crate::{Error, Result};

fn contact(a: usize, multi: &MultiIndex, n: usize) -> DiffForm {
    let mut w = DiffForm::differential(Symbol::jet(a, multi.clone()));
    for i in 0..n {
        let c = Expr::symbol(Symbol::jet(a, multi.with(i as u8)));
        w = w.sub(&DiffForm::differential(Symbol::base(i)).scale(&c));
    }
    w
}

/// `(-1)^i dx^1 ∧ … (omit i) … ∧ dx^n`, so that `dx^i ∧ ω_i = vol`.
fn omega(i: usize, n: usize) -> DiffForm {
    let key: Vec<Symbol> = (0..n).filter(|&k| k != i).map(Symbol::base).collect();
    let sign = if i % 2 == 0 { 1 } else { -1 };
    DiffForm::from_terms(n - 1, [(key, Expr::int(sign))])
}

fn volume(n: usize, c: Expr) -> DiffForm {
    DiffForm::from_terms(n, [((0..n).map(Symbol::base).collect(), c)])
}

/// Poincaré-Cartan form: first order in any base dimension, second order for `n = 1`.
pub fn poincare_cartan(lag: &Lagrangian, space: &JetSpace) -> Result<DiffForm> {
    let n = space.n();
    let order = lag.order();
    let l = &lag.density;
    let mut theta = volume(n, l.clone());
    if order <= 1 {
        for a in 0..space.m() {
            let w = contact(a, &MultiIndex::empty(), n);
            for i in 0..n {
                let p = l.partial(&Symbol::jet(a, MultiIndex::new(vec![i as u8])));
                if !p.is_zero() {
                    theta = theta.add(&w.wedge(&omega(i, n)).scale(&p));
                }
            }
        }
        return Ok(theta);
    }
    if n != 1 || order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    for a in 0..space.m() {
        let p2 = l.partial(&Symbol::jet(a, MultiIndex::new(vec![0, 0])));
        let p1 = l.partial(&Symbol::jet(a, MultiIndex::new(vec![0]))).sub(&total_derivative(&p2, 0, space)?);
        theta = theta.add(&contact(a, &MultiIndex::empty(), 1).scale(&p1));
        theta = theta.add(&contact(a, &MultiIndex::new(vec![0]), 1).scale(&p2));
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::EqualityConfig;
    use crate::varcalc::euler_lagrange;

    #[test]
    fn monopole_potential_has_area_form_differential() {
        let s = JetSpace::new(vec!["t".into()], vec!["p".into(), "z".into()], 1)
            .unwrap()
            .with_constants(["g".to_string()])
            .unwrap();
        let lag = Lagrangian::new(s.parse("g/2*(p*z_t - z*p_t)").unwrap());
        let d = poincare_cartan(&lag, &s).unwrap().d();
        let expect = DiffForm::differential(Symbol::field(0))
            .wedge(&DiffForm::differential(Symbol::field(1)))
            .scale(&s.parse("g").unwrap());
        assert!(d.equals(&expect, &EqualityConfig::default()).unwrap());
    }

    #[test]
    fn differential_projects_onto_the_euler_lagrange_form() {
        // the coefficient of ω ∧ dt in dθ is E, for a second-order Lagrangian
        let s = JetSpace::new(vec!["t".into()], vec!["u".into()], 2).unwrap();
        let lag = Lagrangian::new(s.parse("-1/2*u*u_tt + t*u^2").unwrap());
        let d = poincare_cartan(&lag, &s).unwrap().d();
        let e = euler_lagrange(&lag, &s).unwrap().components()[0].clone();
        // ∂_u ⌟ dθ, horizontalized, equals E dt
        let h = d.interior(&Symbol::field(0)).horizontalize(&s);
        assert_eq!(h.top_coefficient(), e);
    }

    #[test]
    fn first_order_two_dimensions_is_closed_form_of_degree_three() {
        let s = JetSpace::new(vec!["x".into(), "y".into()], vec!["u".into()], 1).unwrap();
        let lag = Lagrangian::new(s.parse("1/2*(u_x^2 + u_y^2)").unwrap());
        let theta = poincare_cartan(&lag, &s).unwrap();
        assert_eq!(theta.degree(), 2);
        assert!(theta.d().d().is_zero());
        assert!(theta.horizontalize(&s).equals(&lag.to_form(2), &EqualityConfig::default()).unwrap());
    }
}
