//! Floating-point evaluation against chart coordinates and named constants.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Compiled, Expr, MultiIndex, Symbol, SymbolNames};
use crate::jet::JetSpace;
use crate::{Error, Result};

/// Numeric values of the named constants.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constants {
    values: BTreeMap<String, f64>,
}

impl Constants {
    pub fn new(values: BTreeMap<String, f64>) -> Self {
        Constants { values }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    fn symbols(&self) -> (Vec<Symbol>, Vec<f64>) {
        self.values.iter().map(|(k, v)| (Symbol::constant(k), *v)).unzip()
    }
}

/// An expression compiled over a fixed list of variables, constants bound.
#[derive(Clone, Debug)]
pub struct NumFn {
    compiled: Compiled,
    vars: usize,
    consts: Vec<f64>,
}

impl NumFn {
    pub fn new(e: &Expr, vars: &[Symbol], constants: &Constants, space: &JetSpace) -> Result<Self> {
        let (names, consts) = constants.symbols();
        let mut slots = vars.to_vec();
        slots.extend(names);
        match Compiled::with_slots(e, &slots) {
            Some(compiled) => Ok(NumFn { compiled, vars: vars.len(), consts }),
            None => {
                let missing = e.symbols().into_iter().find(|s| !slots.contains(s)).unwrap();
                Err(Error::UnknownCoordinate(format!("{} (in {})", space.symbol_name(&missing), space.render(e))))
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.vars);
        let mut buf = Vec::with_capacity(self.vars + self.consts.len());
        buf.extend_from_slice(x);
        buf.extend_from_slice(&self.consts);
        self.compiled.eval(&buf)
    }
}

/// Compiles each expression over `vars`.
pub fn compile_all(es: &[Expr], vars: &[Symbol], constants: &Constants, space: &JetSpace) -> Result<Vec<NumFn>> {
    es.iter().map(|e| NumFn::new(e, vars, constants, space)).collect()
}

/// An open coordinate box; infinite ends are unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds(pub Vec<(f64, f64)>);

impl Bounds {
    pub fn unbounded(dim: usize) -> Self {
        Bounds(vec![(f64::NEG_INFINITY, f64::INFINITY); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.0.iter().zip(p).all(|((lo, hi), x)| x > lo && x < hi)
    }

    pub fn intersect(&self, other: &Bounds) -> Bounds {
        Bounds(self.0.iter().zip(&other.0).map(|(a, b)| (a.0.max(b.0), a.1.min(b.1))).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().any(|(lo, hi)| lo >= hi)
    }

    /// Restriction to the first `k` coordinates.
    pub fn head(&self, k: usize) -> Bounds {
        Bounds(self.0[..k].to_vec())
    }

    /// A finite window used for sampling: unbounded sides are cut at `±2`
    /// around the finite end (or the origin).
    pub fn window(&self) -> Vec<(f64, f64)> {
        self.0
            .iter()
            .map(|&(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
                (true, true) => (lo, hi),
                (true, false) => (lo, lo + 4.0),
                (false, true) => (hi - 4.0, hi),
                (false, false) => (-2.0, 2.0),
            })
            .collect()
    }

    /// `count` points drawn uniformly from the window, away from the faces.
    pub fn sample(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let w = self.window();
        (0..count)
            .map(|_| {
                w.iter()
                    .map(|&(lo, hi)| {
                        let margin = 1e-6 * (hi - lo);
                        rng.gen_range(lo + margin..hi - margin)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Base coordinates, then every `u^a_J` with `|J| <= order`.
pub fn jet_coordinates(space: &JetSpace, order: usize) -> Vec<Symbol> {
    let mut out = space.base_symbols();
    for a in 0..space.m() {
        out.extend(MultiIndex::all_up_to(space.n(), order).into_iter().map(|m| Symbol::jet(a, m)));
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Agreement up to `tol` relative to the magnitudes.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
