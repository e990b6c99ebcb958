//! Charts of `Y`, fibered transition maps and pullbacks of jet data across them.

use std::collections::BTreeMap;

use super::numeric::{close, compile_all, rng, Bounds, Constants, NumFn};
use crate::expr::{equals, EqualityConfig, Expr, MultiIndex, Symbol};
use crate::jet::{total_derivative, DiffForm, HorizontalForm, JetSpace, ProjectableVectorField};
use crate::varcalc::Center;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Chart {
    pub name: String,
    /// Box in base then fiber coordinates.
    pub bounds: Bounds,
    pub center: Center,
    /// Optional map of the chart into some `R^N`, used to compare points on different charts.
    pub embedding: Option<Vec<Expr>>,
}

/// `x' = φ(x)`, `u' = ψ(x, u)` from chart `from` into chart `to`, valid on the
/// part of the overlap selected by `region` (in `from` coordinates).
#[derive(Clone, Debug)]
pub struct Transition {
    pub label: String,
    pub from: usize,
    pub to: usize,
    pub base_map: Vec<Expr>,
    pub fiber_map: Vec<Expr>,
    pub region: Option<Bounds>,
}

/// A component of a triple overlap `i ∩ j ∩ k` with `i < j < k`, recorded by
/// the transitions `i→j`, `j→k`, `i→k` that meet on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triple {
    pub charts: [usize; 3],
    pub transitions: [usize; 3],
}

struct CompiledTransition {
    base: Vec<NumFn>,
    fiber: Vec<NumFn>,
}

pub struct Atlas {
    space: JetSpace,
    constants: Constants,
    charts: Vec<Chart>,
    transitions: Vec<Transition>,
    triples: Vec<Triple>,
    compiled: Vec<CompiledTransition>,
    embeddings: Vec<Option<Vec<NumFn>>>,
}

const DETECTION_SAMPLES: usize = 1024;

impl Atlas {
    /// Validates the charts and transitions, detects triple overlaps by
    /// sampling and checks the cocycle condition on each of them.
    pub fn build(
        space: JetSpace,
        constants: Constants,
        charts: Vec<Chart>,
        transitions: Vec<Transition>,
        cfg: &EqualityConfig,
        seed: u64,
    ) -> Result<Atlas> {
        let dim = space.n() + space.m();
        if charts.is_empty() {
            return Err(Error::Schema("atlas has no charts".into()));
        }
        for (i, c) in charts.iter().enumerate() {
            if c.bounds.dim() != dim {
                return Err(Error::Schema(format!("chart `{}` bounds need {dim} intervals", c.name)));
            }
            if charts[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::Schema(format!("duplicate chart `{}`", c.name)));
            }
            if c.center.fiber.len() != space.m() || c.center.base.len() != space.n() {
                return Err(Error::Schema(format!("chart `{}` center has the wrong size", c.name)));
            }
        }
        let coords = space.coordinate_symbols();
        let mut compiled = Vec::new();
        for t in &transitions {
            if t.from >= charts.len() || t.to >= charts.len() || t.from == t.to {
                return Err(Error::Schema(format!("transition `{}` has invalid charts", t.label)));
            }
            if t.base_map.len() != space.n() || t.fiber_map.len() != space.m() {
                return Err(Error::Schema(format!("transition `{}` has the wrong number of components", t.label)));
            }
            if t.region.as_ref().is_some_and(|r| r.dim() != dim) {
                return Err(Error::Schema(format!("transition `{}` region needs {dim} intervals", t.label)));
            }
            for e in &t.base_map {
                if e.symbols().iter().any(|s| matches!(s, Symbol::Jet { .. } | Symbol::Homotopy)) {
                    return Err(Error::NotFibered(t.label.clone()));
                }
            }
            for e in &t.fiber_map {
                if e.jet_order() > 0 || e.contains(&Symbol::Homotopy) {
                    return Err(Error::NotFibered(t.label.clone()));
                }
            }
            compiled.push(CompiledTransition {
                base: compile_all(&t.base_map, &coords, &constants, &space)?,
                fiber: compile_all(&t.fiber_map, &coords, &constants, &space)?,
            });
        }
        let mut embeddings = Vec::new();
        for c in &charts {
            embeddings.push(match &c.embedding {
                Some(e) => Some(compile_all(e, &coords, &constants, &space)?),
                None => None,
            });
        }
        let mut atlas = Atlas { space, constants, charts, transitions, triples: Vec::new(), compiled, embeddings };
        atlas.detect_triples(seed)?;
        atlas.check_cocycles(cfg)?;
        Ok(atlas)
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn chart_index(&self, name: &str) -> Result<usize> {
        self.charts.iter().position(|c| c.name == name).ok_or_else(|| Error::UnknownChart(name.to_string()))
    }

    pub fn transitions_between(&self, from: usize, to: usize) -> impl Iterator<Item = usize> + '_ {
        self.transitions.iter().enumerate().filter(move |(_, t)| t.from == from && t.to == to).map(|(k, _)| k)
    }

    /// Image of `p` under transition `t`, when `p` lies in its domain and the image in the target chart.
    pub fn apply(&self, t: usize, p: &[f64]) -> Option<Vec<f64>> {
        let tr = &self.transitions[t];
        if !self.charts[tr.from].bounds.contains(p) || !tr.region.as_ref().is_none_or(|r| r.contains(p)) {
            return None;
        }
        let c = &self.compiled[t];
        let q: Vec<f64> = c.base.iter().chain(&c.fiber).map(|f| f.eval(p)).collect();
        if q.iter().all(|x| x.is_finite()) && self.charts[tr.to].bounds.contains(&q) {
            Some(q)
        } else {
            None
        }
    }

    /// The point `p` of chart `from` expressed in chart `to`, with the transition used.
    pub fn locate(&self, from: usize, p: &[f64], to: usize) -> Option<(Option<usize>, Vec<f64>)> {
        if from == to {
            return Some((None, p.to_vec()));
        }
        self.transitions_between(from, to).find_map(|t| self.apply(t, p).map(|q| (Some(t), q)))
    }

    /// The embedding of a chart point, if the chart has one.
    pub fn embed(&self, chart: usize, p: &[f64]) -> Option<Vec<f64>> {
        self.embeddings[chart].as_ref().map(|e| e.iter().map(|f| f.eval(p)).collect())
    }

    /// Whether two chart points are the same point of `Y`, up to `tol`.
    pub fn same_point(&self, a: (usize, &[f64]), b: (usize, &[f64]), tol: f64) -> Option<bool> {
        if let (Some(x), Some(y)) = (self.embed(a.0, a.1), self.embed(b.0, b.1)) {
            return Some(x.iter().zip(&y).all(|(u, v)| close(*u, *v, tol)));
        }
        if a.0 == b.0 {
            return Some(a.1.iter().zip(b.1).all(|(u, v)| close(*u, *v, tol)));
        }
        if let Some((_, q)) = self.locate(a.0, a.1, b.0) {
            return Some(q.iter().zip(b.1).all(|(u, v)| close(*u, *v, tol)));
        }
        if let Some((_, q)) = self.locate(b.0, b.1, a.0) {
            return Some(q.iter().zip(a.1).all(|(u, v)| close(*u, *v, tol)));
        }
        None
    }

    fn detect_triples(&mut self, seed: u64) -> Result<()> {
        let k = self.charts.len();
        let mut rng = rng(seed ^ 0x7419_1e5);
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    let ij: Vec<usize> = self.transitions_between(i, j).collect();
                    let jl: Vec<usize> = self.transitions_between(j, l).collect();
                    let il: Vec<usize> = self.transitions_between(i, l).collect();
                    for &a in &ij {
                        for &c in &il {
                            let mut domain = self.charts[i].bounds.clone();
                            for t in [a, c] {
                                if let Some(r) = &self.transitions[t].region {
                                    domain = domain.intersect(r);
                                }
                            }
                            if domain.is_empty() {
                                continue;
                            }
                            let points = domain.sample(DETECTION_SAMPLES, &mut rng);
                            for &b in &jl {
                                let hit = points.iter().any(|p| {
                                    self.apply(c, p).is_some()
                                        && self.apply(a, p).is_some_and(|q| self.apply(b, &q).is_some())
                                });
                                if hit {
                                    self.triples.push(Triple { charts: [i, j, l], transitions: [a, b, c] });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Substitution taking chart-`to` coordinates of `Y` to expressions in chart-`from` coordinates.
    fn coordinate_map(&self, t: usize) -> BTreeMap<Symbol, Expr> {
        let tr = &self.transitions[t];
        let mut map = BTreeMap::new();
        for (k, e) in tr.base_map.iter().enumerate() {
            map.insert(Symbol::base(k), e.clone());
        }
        for (a, e) in tr.fiber_map.iter().enumerate() {
            map.insert(Symbol::field(a), e.clone());
        }
        map
    }

    fn check_cocycles(&self, cfg: &EqualityConfig) -> Result<()> {
        for tri in &self.triples {
            let [a, b, c] = tri.transitions;
            let map_a = self.coordinate_map(a);
            let tb = &self.transitions[b];
            let tc = &self.transitions[c];
            for (lhs, rhs) in tb.base_map.iter().chain(&tb.fiber_map).zip(tc.base_map.iter().chain(&tc.fiber_map)) {
                let composed = lhs.substitute(&map_a)?;
                if !equals(&composed, rhs, cfg)?.equal {
                    let names: Vec<&str> = tri.charts.iter().map(|&i| self.charts[i].name.as_str()).collect();
                    return Err(Error::CocycleViolation(names.join("/")));
                }
            }
        }
        Ok(())
    }

    /// `∂φ^k/∂x^l`.
    pub fn jacobian(&self, t: usize) -> Vec<Vec<Expr>> {
        let tr = &self.transitions[t];
        tr.base_map.iter().map(|f| (0..self.space.n()).map(|l| f.partial(&Symbol::base(l))).collect()).collect()
    }

    pub fn jacobian_det(&self, t: usize) -> Expr {
        det(&self.jacobian(t))
    }

    /// Chart-`to` jet coordinates up to `order` (and base coordinates) as
    /// expressions in chart-`from` jet coordinates.
    pub fn jet_map(&self, t: usize, order: usize) -> Result<BTreeMap<Symbol, Expr>> {
        let n = self.space.n();
        let mut map = self.coordinate_map(t);
        if order == 0 {
            return Ok(map);
        }
        let m = self.jacobian(t);
        let d = det(&m);
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv_det = d.recip()?;
        // W[l][k] = ∂x^l/∂x'^k
        let w: Vec<Vec<Expr>> =
            (0..n).map(|l| (0..n).map(|k| cofactor(&m, k, l).mul(&inv_det)).collect()).collect();
        for a in 0..self.space.m() {
            for multi in MultiIndex::all_up_to(n, order) {
                if multi.is_empty() {
                    continue;
                }
                let k = *multi.indices().last().unwrap();
                let parent = multi.without(k).unwrap();
                let prev = map[&Symbol::jet(a, parent)].clone();
                let mut e = Expr::zero();
                for (l, row) in w.iter().enumerate() {
                    let wk = &row[k as usize];
                    if !wk.is_zero() {
                        e = e.add(&wk.mul(&total_derivative(&prev, l, &self.space)?));
                    }
                }
                map.insert(Symbol::jet(a, multi), e);
            }
        }
        Ok(map)
    }

    /// Chart-`to` expression rewritten in chart-`from` coordinates.
    pub fn pullback_expr(&self, t: usize, e: &Expr) -> Result<Expr> {
        e.substitute(&self.jet_map(t, e.jet_order())?)
    }

    /// Density of a chart-`to` Lagrangian in chart-`from` coordinates.
    pub fn pullback_density(&self, t: usize, l: &Expr) -> Result<Expr> {
        Ok(self.pullback_expr(t, l)?.mul(&self.jacobian_det(t)))
    }

    /// `E_b = Σ_a (E'_a ∘ j ψ) ∂ψ^a/∂u^b det(∂φ/∂x)`.
    pub fn pullback_source(&self, t: usize, comps: &[Expr]) -> Result<Vec<Expr>> {
        let order = comps.iter().map(Expr::jet_order).max().unwrap_or(0);
        let map = self.jet_map(t, order)?;
        let det = self.jacobian_det(t);
        let tr = &self.transitions[t];
        let pulled: Vec<Expr> = comps.iter().map(|c| c.substitute(&map)).collect::<Result<_>>()?;
        Ok((0..self.space.m())
            .map(|b| {
                let mut e = Expr::zero();
                for (a, p) in pulled.iter().enumerate() {
                    let d = tr.fiber_map[a].partial(&Symbol::field(b));
                    if !d.is_zero() {
                        e = e.add(&p.mul(&d));
                    }
                }
                e.mul(&det)
            })
            .collect())
    }

    /// Horizontal form given in chart `to`, pulled back to chart `from`.
    pub fn pullback_horizontal(&self, t: usize, h: &HorizontalForm) -> Result<HorizontalForm> {
        let map = self.jet_map(t, h.jet_order())?;
        let pulled = h.to_diff_form().pullback(&map, &|s: &Symbol| matches!(s, Symbol::Base(_)))?;
        Ok(horizontal_from_base_form(h.n(), &pulled))
    }

    /// Coordinate form given in chart `to`, pulled back to chart `from`.
    pub fn pullback_diff(&self, t: usize, f: &DiffForm) -> Result<DiffForm> {
        let order = f.jet_symbols().iter().map(Symbol::jet_order).max().unwrap_or(0);
        let map = self.jet_map(t, order)?;
        f.pullback(&map, &Symbol::is_coordinate)
    }

    /// Whether `to_field` is the pushforward of `from_field` along `t`.
    pub fn field_consistent(
        &self,
        t: usize,
        from_field: &ProjectableVectorField,
        to_field: &ProjectableVectorField,
        cfg: &EqualityConfig,
    ) -> Result<bool> {
        let tr = &self.transitions[t];
        let map = self.coordinate_map(t);
        let images = tr.base_map.iter().chain(&tr.fiber_map);
        let targets = to_field.base().iter().chain(to_field.fiber());
        for (img, target) in images.zip(targets) {
            let mut push = Expr::zero();
            for (k, xi) in from_field.base().iter().enumerate() {
                push = push.add(&img.partial(&Symbol::base(k)).mul(xi));
            }
            for (a, xi) in from_field.fiber().iter().enumerate() {
                push = push.add(&img.partial(&Symbol::field(a)).mul(xi));
            }
            if !equals(&push, &target.substitute(&map)?, cfg)?.equal {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Reads a form with only base differentials as a horizontal form.
pub(crate) fn horizontal_from_base_form(n: usize, f: &DiffForm) -> HorizontalForm {
    HorizontalForm::from_coeffs(
        n,
        f.degree(),
        f.terms().iter().map(|(k, c)| {
            let idx = k
                .iter()
                .map(|s| match s {
                    Symbol::Base(i) => *i,
                    _ => unreachable!("base differentials only"),
                })
                .collect();
            (idx, c.clone())
        }),
    )
}

pub(crate) fn det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => (0..m.len())
            .map(|j| {
                let c = cofactor(m, 0, j);
                m[0][j].mul(&c)
            })
            .sum(),
    }
}

/// Signed cofactor `(-1)^{i+j} det(m without row i and column j)`.
fn cofactor(m: &[Vec<Expr>], i: usize, j: usize) -> Expr {
    let minor: Vec<Vec<Expr>> = m
        .iter()
        .enumerate()
        .filter(|(r, _)| *r != i)
        .map(|(_, row)| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, e)| e.clone()).collect())
        .collect();
    let d = det(&minor);
    if (i + j) % 2 == 0 {
        d
    } else {
        d.neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varcalc::{euler_lagrange, Lagrangian};

    fn cfg() -> EqualityConfig {
        EqualityConfig::default()
    }

    /// Two copies of `R^2 × R` related by `x' = 2x + y, y' = x - y`, `u' = u + x`.
    fn linear_atlas() -> Atlas {
        let space = JetSpace::new(vec!["x".into(), "y".into()], vec!["u".into()], 2).unwrap();
        let chart = |name: &str| Chart {
            name: name.into(),
            bounds: Bounds::unbounded(3),
            center: Center::origin(&space),
            embedding: None,
        };
        let t = Transition {
            label: "A->B".into(),
            from: 0,
            to: 1,
            base_map: vec![space.parse("2*x + y").unwrap(), space.parse("x - y").unwrap()],
            fiber_map: vec![space.parse("u + x").unwrap()],
            region: None,
        };
        Atlas::build(space.clone(), Constants::default(), vec![chart("A"), chart("B")], vec![t], &cfg(), 1).unwrap()
    }

    #[test]
    fn jet_map_inverts_the_jacobian() {
        let a = linear_atlas();
        let s = a.space().clone();
        let map = a.jet_map(0, 1).unwrap();
        // u' = u + x with x = (x' + y')/3, y = (x' - 2y')/3
        assert_eq!(map[&Symbol::jet(0, MultiIndex::new(vec![0]))], s.parse("(u_x + 1)/3 + u_y/3").unwrap());
        assert_eq!(map[&Symbol::jet(0, MultiIndex::new(vec![1]))], s.parse("(u_x + 1)/3 - 2*u_y/3").unwrap());
        assert_eq!(a.jacobian_det(0), Expr::int(-3));
    }

    #[test]
    fn euler_lagrange_is_natural_under_transitions() {
        let a = linear_atlas();
        let s = a.space().clone();
        let l_to = s.parse("1/2*(u_x^2 + u_y^2) + u^2*x").unwrap();
        let e_to = euler_lagrange(&Lagrangian::new(l_to.clone()), &s).unwrap();
        let l_from = a.pullback_density(0, &l_to).unwrap();
        let e_from = euler_lagrange(&Lagrangian::new(l_from), &s).unwrap();
        let pulled = a.pullback_source(0, e_to.components()).unwrap();
        assert!(equals(&pulled[0], &e_from.components()[0], &cfg()).unwrap().equal);
    }

    #[test]
    fn horizontal_pullback_commutes_with_dh() {
        let a = linear_atlas();
        let s = a.space().clone();
        let h = HorizontalForm::current(2, &[s.parse("u*u_y").unwrap(), s.parse("x*u^2").unwrap()]);
        let lhs = a.pullback_horizontal(0, &h.dh(&s).unwrap()).unwrap();
        let rhs = a.pullback_horizontal(0, &h).unwrap().dh(&s).unwrap();
        assert!(lhs.equals(&rhs, &cfg()).unwrap());
    }

    #[test]
    fn non_fibered_transition_is_rejected() {
        let space = JetSpace::new(vec!["t".into()], vec!["u".into()], 1).unwrap();
        let chart = |name: &str| Chart {
            name: name.into(),
            bounds: Bounds::unbounded(2),
            center: Center::origin(&space),
            embedding: None,
        };
        let t = Transition {
            label: "bad".into(),
            from: 0,
            to: 1,
            base_map: vec![space.parse("t + u").unwrap()],
            fiber_map: vec![space.parse("u").unwrap()],
            region: None,
        };
        let r = Atlas::build(space.clone(), Constants::default(), vec![chart("A"), chart("B")], vec![t], &cfg(), 1);
        assert!(matches!(r, Err(Error::NotFibered(_))));
    }

    #[test]
    fn cocycle_violation_is_detected() {
        let space = JetSpace::new(vec!["t".into()], vec!["u".into()], 1).unwrap();
        let chart = |name: &str| Chart {
            name: name.into(),
            bounds: Bounds::unbounded(2),
            center: Center::origin(&space),
            embedding: None,
        };
        let tr = |label: &str, from, to, fiber: &str| Transition {
            label: label.into(),
            from,
            to,
            base_map: vec![space.parse("t").unwrap()],
            fiber_map: vec![space.parse(fiber).unwrap()],
            region: None,
        };
        let charts = vec![chart("A"), chart("B"), chart("C")];
        let good = vec![tr("ab", 0, 1, "u + 1"), tr("bc", 1, 2, "u + 2"), tr("ac", 0, 2, "u + 3")];
        let atlas = Atlas::build(space.clone(), Constants::default(), charts.clone(), good, &cfg(), 1).unwrap();
        assert_eq!(atlas.triples().len(), 1);
        let bad = vec![tr("ab", 0, 1, "u + 1"), tr("bc", 1, 2, "u + 2"), tr("ac", 0, 2, "u + 4")];
        let r = Atlas::build(space, Constants::default(), charts, bad, &cfg(), 1);
        assert!(matches!(r, Err(Error::CocycleViolation(_))));
    }
}
