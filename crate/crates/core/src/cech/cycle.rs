//! Piecewise parameterized cycles and their closure certificates.

use std::collections::BTreeMap;

use super::numeric::{compile_all, NumFn};
use super::Atlas;
use crate::expr::{Expr, Symbol};
use crate::{Error, Result};

/// Parameter symbols `s1 … sk` of a `k`-cycle.
pub fn param_symbols(k: usize) -> Vec<Symbol> {
    (1..=k).map(|i| Symbol::constant(&format!("s{i}"))).collect()
}

/// One cube `[0,1]^k → chart`; unmapped coordinates are held at zero.
#[derive(Clone, Debug)]
pub struct CyclePiece {
    pub chart: usize,
    pub map: BTreeMap<Symbol, Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Face {
    pub piece: usize,
    pub axis: usize,
    pub side: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaceRule {
    /// The face maps to a set of lower dimension.
    Collapsed(Face),
    /// Two faces are identified; `reversed` flips the first free parameter.
    Glued { a: Face, b: Face, reversed: bool },
}

#[derive(Clone, Debug)]
pub struct Cycle {
    pub name: String,
    pub dim: usize,
    pub pieces: Vec<CyclePiece>,
    pub faces: Vec<FaceRule>,
}

const FACE_SAMPLES: usize = 17;

impl Cycle {
    /// Chart coordinates of `Y` along a piece, as functions of the parameters.
    pub(crate) fn coordinate_fns(&self, atlas: &Atlas, piece: &CyclePiece) -> Result<Vec<NumFn>> {
        let space = atlas.space();
        let params = param_symbols(self.dim);
        let exprs: Vec<Expr> =
            space.coordinate_symbols().iter().map(|s| piece.map.get(s).cloned().unwrap_or_default()).collect();
        compile_all(&exprs, &params, atlas.constants(), space)
    }

    fn face_point(&self, face: Face, free: &[f64]) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.dim);
        let mut it = free.iter();
        for axis in 0..self.dim {
            if axis == face.axis {
                s.push(face.side as f64);
            } else {
                s.push(*it.next().unwrap());
            }
        }
        s
    }

    fn free_samples(&self) -> Vec<Vec<f64>> {
        let k = self.dim.saturating_sub(1);
        if k == 0 {
            return vec![Vec::new()];
        }
        let grid: Vec<f64> = (0..FACE_SAMPLES).map(|i| (i as f64 + 0.5) / FACE_SAMPLES as f64).collect();
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    grid.iter().map(move |&g| {
                        let mut q = p.clone();
                        q.push(g);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Verifies that every boundary face is collapsed or glued to a matching face.
    pub fn check_closed(&self, atlas: &Atlas, tol: f64) -> Result<()> {
        let fail = |msg: String| Error::CycleNotClosed(self.name.clone(), msg);
        if self.dim == 0 || self.pieces.is_empty() {
            return Err(fail("a cycle needs a positive dimension and at least one piece".into()));
        }
        for p in &self.pieces {
            if p.chart >= atlas.charts().len() {
                return Err(fail("piece on an unknown chart".into()));
            }
        }
        let mut covered: BTreeMap<Face, usize> = BTreeMap::new();
        for rule in &self.faces {
            let faces = match rule {
                FaceRule::Collapsed(f) => vec![*f],
                FaceRule::Glued { a, b, .. } => vec![*a, *b],
            };
            for f in faces {
                if f.piece >= self.pieces.len() || f.axis >= self.dim || f.side > 1 {
                    return Err(fail(format!("face {f:?} does not exist")));
                }
                *covered.entry(f).or_default() += 1;
            }
        }
        for piece in 0..self.pieces.len() {
            for axis in 0..self.dim {
                for side in 0..2u8 {
                    let f = Face { piece, axis, side };
                    match covered.get(&f) {
                        Some(1) => {}
                        Some(_) => return Err(fail(format!("face {f:?} is used twice"))),
                        None => return Err(fail(format!("face {f:?} is free"))),
                    }
                }
            }
        }
        let fns: Vec<Vec<NumFn>> = self.pieces.iter().map(|p| self.coordinate_fns(atlas, p)).collect::<Result<_>>()?;
        let eval = |face: Face, free: &[f64]| -> Vec<f64> {
            let s = self.face_point(face, free);
            fns[face.piece].iter().map(|f| f.eval(&s)).collect()
        };
        for rule in &self.faces {
            match rule {
                FaceRule::Collapsed(f) => {
                    if self.dim == 1 {
                        return Err(fail("faces of a 1-cycle cannot collapse".into()));
                    }
                    let chart = self.pieces[f.piece].chart;
                    let samples = self.free_samples();
                    let first = eval(*f, &samples[0]);
                    for free in &samples[1..] {
                        let q = eval(*f, free);
                        match atlas.same_point((chart, &first), (chart, &q), tol) {
                            Some(true) => {}
                            _ => return Err(fail(format!("face {f:?} does not collapse"))),
                        }
                    }
                }
                FaceRule::Glued { a, b, reversed } => {
                    let ca = self.pieces[a.piece].chart;
                    let cb = self.pieces[b.piece].chart;
                    for free in self.free_samples() {
                        let mut other = free.clone();
                        if *reversed {
                            if let Some(x) = other.first_mut() {
                                *x = 1.0 - *x;
                            }
                        }
                        let pa = eval(*a, &free);
                        let pb = eval(*b, &other);
                        match atlas.same_point((ca, &pa), (cb, &pb), tol) {
                            Some(true) => {}
                            Some(false) => return Err(fail(format!("faces {a:?} and {b:?} do not match"))),
                            None => {
                                return Err(fail(format!(
                                    "faces {a:?} and {b:?} cannot be compared: no embedding or transition"
                                )))
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
