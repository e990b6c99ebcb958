//! Pointwise numeric comparison of two expressions.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::cech::rng;
use crate::expr::{Compiled, Expr, Symbol};

pub const TAU_EQ: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub pass: bool,
    pub max_deviation: f64,
    pub trials: usize,
}

/// Evaluates both sides at `trials` random points (free symbols drawn from
/// `[-2, 2]`, named constants bound to `constants` when given). Singular
/// samples are redrawn, up to five times as many draws in total.
pub fn symbolic_numeric_crosscheck(
    a: &Expr,
    b: &Expr,
    constants: &BTreeMap<String, f64>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> CrossCheck {
    let slots: Vec<Symbol> = a.symbols().union(&b.symbols()).cloned().collect();
    let fa = Compiled::with_slots(a, &slots).expect("slots cover a");
    let fb = Compiled::with_slots(b, &slots).expect("slots cover b");
    let bound: Vec<Option<f64>> = slots
        .iter()
        .map(|s| match s {
            Symbol::Const(name) => constants.get(&**name).copied(),
            _ => None,
        })
        .collect();
    let mut rng = rng(seed ^ 0xc405_5c4e);
    let mut done = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials * 5 {
        if done == trials {
            break;
        }
        let x: Vec<f64> = bound.iter().map(|v| v.unwrap_or_else(|| rng.gen_range(-2.0..2.0))).collect();
        let (va, vb) = (fa.eval(&x), fb.eval(&x));
        if !va.is_finite() || !vb.is_finite() {
            continue;
        }
        worst = worst.max((va - vb).abs() / 1f64.max(va.abs()).max(vb.abs()));
        done += 1;
    }
    CrossCheck { pass: done == trials && worst < tol, max_deviation: worst, trials: done }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;

    #[test]
    fn identities_pass_and_sign_flips_fail() {
        let s = JetSpace::new(vec!["t".into()], vec!["u".into()], 2).unwrap();
        let none = BTreeMap::new();
        let lhs = s.parse("(u_t + 1)^2").unwrap();
        let rhs = s.parse("u_t^2 + 2*u_t + 1").unwrap();
        assert!(symbolic_numeric_crosscheck(&lhs, &rhs, &none, 32, 1, TAU_EQ).pass);
        assert!(!symbolic_numeric_crosscheck(&lhs, &rhs.neg(), &none, 32, 1, TAU_EQ).pass);
        assert!(symbolic_numeric_crosscheck(&Expr::zero(), &Expr::zero(), &none, 32, 1, TAU_EQ).pass);
    }
}
