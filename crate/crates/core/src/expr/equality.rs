//! Equality testing: exact canonical comparison with a sampled fallback.
//!
//! Canonical forms decide equality outright on the polynomial fragment. When
//! transcendental atoms or reciprocals survive in the difference, both sides
//! are evaluated at `samples` random points with every symbol drawn
//! independently and uniformly from `[-2, -0.1] ∪ [0.1, 2]`. The sides agree
//! at a point when `|a - b| <= tol * max(1, |a|, |b|)`. A non-finite value at
//! any point discards the whole batch and redraws, at most `max_resample` times.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Compiled, Expr, Symbol};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityConfig {
    pub samples: usize,
    pub tol: f64,
    pub max_resample: usize,
    pub seed: u64,
}

impl Default for EqualityConfig {
    fn default() -> Self {
        EqualityConfig { samples: 16, tol: 1e-9, max_resample: 5, seed: 0x5eed_0001 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityPath {
    Canonical,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equality {
    pub equal: bool,
    pub path: EqualityPath,
    /// Largest scaled deviation observed on the sampled path; zero on the canonical path.
    pub max_deviation: f64,
}

pub fn equals(a: &Expr, b: &Expr, cfg: &EqualityConfig) -> Result<Equality> {
    let diff = a.sub(b);
    if diff.is_zero() {
        return Ok(Equality { equal: true, path: EqualityPath::Canonical, max_deviation: 0.0 });
    }
    if diff.is_polynomial() {
        return Ok(Equality { equal: false, path: EqualityPath::Canonical, max_deviation: f64::INFINITY });
    }
    sampled(a, b, cfg)
}

/// Sampled comparison only, regardless of canonical forms.
pub fn sampled(a: &Expr, b: &Expr, cfg: &EqualityConfig) -> Result<Equality> {
    let mut symbols: Vec<Symbol> = a.symbols().into_iter().collect();
    for s in b.symbols() {
        if !symbols.contains(&s) {
            symbols.push(s);
        }
    }
    symbols.sort();
    let ca = Compiled::with_slots(a, &symbols).expect("slot layout covers a");
    let cb = Compiled::with_slots(b, &symbols).expect("slot layout covers b");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut values = vec![0.0; symbols.len()];
    'batch: for _ in 0..=cfg.max_resample {
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.samples {
            for v in values.iter_mut() {
                *v = draw(&mut rng);
            }
            let x = ca.eval(&values);
            let y = cb.eval(&values);
            if !x.is_finite() || !y.is_finite() {
                continue 'batch;
            }
            let dev = (x - y).abs() / 1f64.max(x.abs()).max(y.abs());
            worst = worst.max(dev);
        }
        return Ok(Equality { equal: worst <= cfg.tol, path: EqualityPath::Sampled, max_deviation: worst });
    }
    Err(Error::Undecidable)
}

fn draw(rng: &mut ChaCha8Rng) -> f64 {
    let mag: f64 = rng.gen_range(0.1..2.0);
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Convenience: `equals(e, 0)`.
pub fn is_zero(e: &Expr, cfg: &EqualityConfig) -> Result<bool> {
    Ok(equals(e, &Expr::zero(), cfg)?.equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_and_sampled_paths() {
        let cfg = EqualityConfig::default();
        let r = equals(&Expr::jet(0, &[0, 1]), &Expr::jet(0, &[1, 0]), &cfg).unwrap();
        assert!(r.equal);
        assert_eq!(r.path, EqualityPath::Canonical);

        let r = equals(&Expr::jet(0, &[0]), &Expr::jet(0, &[1]), &cfg).unwrap();
        assert!(!r.equal);

        // (1+u)/(1+u) = 1 survives canonicalization, decided by sampling
        let s = Expr::one().add(&Expr::field(0));
        let q = s.mul(&s.recip().unwrap());
        let r = equals(&q, &Expr::one(), &cfg).unwrap();
        assert!(r.equal);
        assert_eq!(r.path, EqualityPath::Sampled);
    }

    #[test]
    fn sampled_path_detects_inequality() {
        let cfg = EqualityConfig::default();
        let u = Expr::field(0);
        let r = equals(&Expr::sin(u.clone()), &u, &cfg).unwrap();
        assert!(!r.equal);
        assert_eq!(r.path, EqualityPath::Sampled);
    }
}
