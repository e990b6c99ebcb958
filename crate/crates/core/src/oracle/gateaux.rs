//! First variation of the action by brute force, compared with a claimed source form.

use std::collections::BTreeMap;

use serde::Serialize;

use super::fd::{advance, SampledSection, RADIUS};
use crate::cech::jet_coordinates;
use crate::expr::{Compiled, Expr, MultiIndex, Symbol};
use crate::jet::JetSpace;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct GateauxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Grid points per axis.
    pub points: usize,
    /// Step of the central difference in the variation parameter.
    pub s: f64,
    /// Threshold on the Richardson estimate above which the grid is flagged as too coarse.
    pub tol: f64,
}

impl GateauxConfig {
    /// Unit box with 2048 points in one dimension, `128^n` otherwise.
    pub fn for_dim(n: usize) -> Self {
        GateauxConfig {
            lo: vec![0.0; n],
            hi: vec![1.0; n],
            points: if n == 1 { 2048 } else { 128 },
            s: 1e-3,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateauxReport {
    /// `|dA/ds - ∫ E·δσ| / max(1, ∫ |E·δσ|)`.
    pub residual: f64,
    pub action_derivative: f64,
    pub source_pairing: f64,
    /// Change of the residual when the grid spacing is doubled.
    pub richardson: f64,
    pub coarse_grid: bool,
}

fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

struct Setup<'a> {
    space: &'a JetSpace,
    constants: Vec<(Symbol, f64)>,
    center: Vec<f64>,
    radius: f64,
}

impl Setup<'_> {
    fn variation(&self, x: &[f64]) -> Vec<f64> {
        let r = x.iter().zip(&self.center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt() / self.radius;
        let b = bump(r);
        (0..self.space.m()).map(|a| b / (a as f64 + 1.0)).collect()
    }

    fn compile(&self, e: &Expr, vars: &[Symbol]) -> Result<Compiled> {
        let mut slots = vars.to_vec();
        slots.extend(self.constants.iter().map(|(s, _)| s.clone()));
        Compiled::with_slots(e, &slots)
            .ok_or_else(|| Error::UnknownCoordinate(format!("unbound symbol in {}", self.space.render(e))))
    }
}

/// Compares `d/ds A(σ + s δσ)` at `s = 0` with `∫ E_a(jσ) δσ^a`, where `δσ`
/// is a bump centred in the box. `E` is the source form under test.
pub fn gateaux_check(
    lag: &Expr,
    source: &[Expr],
    space: &JetSpace,
    constants: &BTreeMap<String, f64>,
    sigma: &[Expr],
    cfg: &GateauxConfig,
) -> Result<GateauxReport> {
    let n = space.n();
    if cfg.lo.len() != n || cfg.hi.len() != n || sigma.len() != space.m() || source.len() != space.m() {
        return Err(Error::Schema("gateaux check: box, section and source must match the jet space".into()));
    }
    let center: Vec<f64> = cfg.lo.iter().zip(&cfg.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let radius = 0.35 * cfg.lo.iter().zip(&cfg.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    let setup = Setup {
        space,
        constants: constants.iter().map(|(k, v)| (Symbol::constant(k), *v)).collect(),
        center,
        radius,
    };
    let fine = run(lag, source, sigma, &setup, cfg, cfg.points)?;
    let coarse = run(lag, source, sigma, &setup, cfg, cfg.points / 2)?;
    let richardson = (fine.residual - coarse.residual).abs();
    Ok(GateauxReport { richardson, coarse_grid: richardson > cfg.tol, ..fine })
}

fn run(
    lag: &Expr,
    source: &[Expr],
    sigma: &[Expr],
    setup: &Setup,
    cfg: &GateauxConfig,
    points: usize,
) -> Result<GateauxReport> {
    let space = setup.space;
    let n = space.n();
    let m = space.m();
    let base = space.base_symbols();
    let lag_order = lag.jet_order();
    let lag_vars = jet_coordinates(space, lag_order);
    let lag_fn = setup.compile(lag, &lag_vars)?;
    let src_order = source.iter().map(Expr::jet_order).max().unwrap_or(0);
    let src_vars = jet_coordinates(space, src_order);
    let src_fns: Vec<Compiled> = source.iter().map(|e| setup.compile(e, &src_vars)).collect::<Result<_>>()?;
    // exact jets of σ for the source side
    let mut sigma_jets = Vec::new();
    for s in &src_vars[n..] {
        let Symbol::Jet { field, multi } = s else { unreachable!() };
        let d = multi.indices().iter().fold(sigma[*field as usize].clone(), |e, &i| e.partial(&Symbol::base(i as usize)));
        sigma_jets.push(setup.compile(&d, &base)?);
    }
    let sigma_values: Vec<Compiled> = sigma.iter().map(|e| setup.compile(e, &base)).collect::<Result<_>>()?;
    let consts: Vec<f64> = setup.constants.iter().map(|(_, v)| *v).collect();
    let with_consts = |x: &[f64]| -> Vec<f64> { x.iter().chain(&consts).copied().collect() };

    let counts = vec![points; n];
    let sampled = SampledSection::from_fn(&cfg.lo, &cfg.hi, &counts, m, |x| {
        let xv = with_consts(x);
        sigma_values.iter().map(|f| f.eval(&xv)).collect()
    });
    let delta = SampledSection::from_fn(&cfg.lo, &cfg.hi, &counts, m, |x| setup.variation(x));
    let h = sampled.spacing().to_vec();
    let cell: f64 = h.iter().product();
    let jet_multis: Vec<(usize, MultiIndex)> = lag_vars[n..]
        .iter()
        .map(|s| match s {
            Symbol::Jet { field, multi } => (*field as usize, multi.clone()),
            _ => unreachable!(),
        })
        .collect();

    let steps = [2.0 * cfg.s, cfg.s, -cfg.s, -2.0 * cfg.s];
    let coeffs = [-1.0, 8.0, -8.0, 1.0];
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut abs_rhs = 0.0;
    let mut idx = vec![0; n];
    let total: usize = counts.iter().product();
    let mut buf = vec![0.0; lag_vars.len() + consts.len()];
    buf[lag_vars.len()..].copy_from_slice(&consts);
    for _ in 0..total {
        let x = sampled.point(&idx);
        // distance from the centre to the stencil box around this node
        let dist = x
            .iter()
            .zip(&setup.center)
            .zip(&h)
            .map(|((a, c), s)| ((a - c).abs() - RADIUS as f64 * s).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt();
        if dist < setup.radius {
            if !sampled.interior(&idx) {
                return Err(Error::Unsupported("variation support reaches the stencil margin".into()));
            }
            let js: Vec<f64> = jet_multis.iter().map(|(a, mi)| sampled.derivative(*a, mi, &idx)).collect();
            let jd: Vec<f64> = jet_multis.iter().map(|(a, mi)| delta.derivative(*a, mi, &idx)).collect();
            buf[..n].copy_from_slice(&x);
            let mut acc = 0.0;
            for (s, c) in steps.iter().zip(coeffs) {
                for k in 0..js.len() {
                    buf[n + k] = js[k] + s * jd[k];
                }
                acc += c * lag_fn.eval(&buf);
            }
            lhs += cell * acc / (12.0 * cfg.s);
            let dv = setup.variation(&x);
            if dv.iter().any(|v| *v != 0.0) {
                let xv = with_consts(&x);
                let mut vals = x.clone();
                vals.extend(sigma_jets.iter().map(|f| f.eval(&xv)));
                vals.extend(&consts);
                let pairing: f64 = src_fns.iter().zip(&dv).map(|(f, d)| f.eval(&vals) * d).sum();
                rhs += cell * pairing;
                abs_rhs += cell * pairing.abs();
            }
        }
        advance(&mut idx, &counts);
    }
    let residual = (lhs - rhs).abs() / abs_rhs.max(1.0);
    Ok(GateauxReport { residual, action_derivative: lhs, source_pairing: rhs, richardson: 0.0, coarse_grid: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space1() -> JetSpace {
        JetSpace::new(vec!["t".into()], vec!["u".into()], 2).unwrap()
    }

    #[test]
    fn free_particle_on_a_parabola() {
        let s = space1();
        let r = gateaux_check(
            &s.parse("1/2*u_t^2").unwrap(),
            &[s.parse("-u_tt").unwrap()],
            &s,
            &BTreeMap::new(),
            &[s.parse("t^2").unwrap()],
            &GateauxConfig::for_dim(1),
        )
        .unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        assert!(r.source_pairing < 0.0);
    }

    #[test]
    fn zero_lagrangian_has_zero_residual() {
        let s = space1();
        let r = gateaux_check(&Expr::zero(), &[Expr::zero()], &s, &BTreeMap::new(), &[s.parse("t").unwrap()], &GateauxConfig::for_dim(1))
            .unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn trivial_lagrangian_has_vanishing_variation() {
        let s = JetSpace::new(vec!["x".into()], vec!["u".into()], 1).unwrap();
        let r = gateaux_check(
            &s.parse("u*u_x").unwrap(),
            &[Expr::zero()],
            &s,
            &BTreeMap::new(),
            &[s.parse("sin(x) + x^2").unwrap()],
            &GateauxConfig::for_dim(1),
        )
        .unwrap();
        assert!(r.action_derivative.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn wrong_source_is_caught() {
        let s = space1();
        let r = gateaux_check(
            &s.parse("1/2*u_t^2").unwrap(),
            &[s.parse("u_tt").unwrap()],
            &s,
            &BTreeMap::new(),
            &[s.parse("t^2").unwrap()],
            &GateauxConfig::for_dim(1),
        )
        .unwrap();
        assert!(r.residual > 1e-2);
    }

    #[test]
    fn two_dimensional_laplace() {
        let s = JetSpace::new(vec!["x".into(), "y".into()], vec!["u".into()], 2).unwrap();
        let r = gateaux_check(
            &s.parse("1/2*(u_x^2 + u_y^2) + x*u^3").unwrap(),
            &[s.parse("-u_xx - u_yy + 3*x*u^2").unwrap()],
            &s,
            &BTreeMap::new(),
            &[s.parse("sin(x)*y + x^2").unwrap()],
            &GateauxConfig::for_dim(2),
        )
        .unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }
}
