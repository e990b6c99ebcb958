//! Sections given chart by chart, their gluing, criticality and declared homotopies.

use std::collections::BTreeMap;

use serde::Serialize;

use super::numeric::{compile_all, rng, NumFn};
use super::{Atlas, Cycle, CyclePiece};
use crate::expr::{equals, EqualityConfig, Expr, MultiIndex, Symbol};
use crate::jet::{Section, SourceForm};
use crate::{Error, Result};

pub const TAU_CRIT: f64 = 1e-8;
const COMPAT_SAMPLES: usize = 256;
const LIFT_SAMPLES: usize = 33;

/// Parameter of a declared homotopy between sections.
pub fn homotopy_param() -> Symbol {
    Symbol::constant("h")
}

/// A section of `Y → X` given on some charts of the atlas.
#[derive(Clone, Debug)]
pub struct GlobalSection {
    pub name: String,
    pub charts: BTreeMap<usize, Section>,
}

impl GlobalSection {
    pub fn new(atlas: &Atlas, name: impl Into<String>, charts: BTreeMap<usize, Vec<Expr>>) -> Result<Self> {
        let name = name.into();
        if charts.is_empty() {
            return Err(Error::SectionNotGlobal(name, "no chart expressions".into()));
        }
        let mut out = BTreeMap::new();
        for (c, fields) in charts {
            let chart = atlas.charts().get(c).ok_or_else(|| Error::UnknownChart(c.to_string()))?;
            out.insert(c, Section::new(atlas.space(), fields)?.on_chart(chart.name.clone()));
        }
        Ok(GlobalSection { name, charts: out })
    }

    fn base_fns(&self, atlas: &Atlas) -> Result<BTreeMap<usize, Vec<NumFn>>> {
        let base = atlas.space().base_symbols();
        self.charts
            .iter()
            .map(|(c, s)| Ok((*c, compile_all(s.fields(), &base, atlas.constants(), atlas.space())?)))
            .collect()
    }

    /// On every transition between two charts carrying the section, the
    /// transported value agrees with the target chart's expression.
    pub fn check_compatible(&self, atlas: &Atlas, seed: u64) -> Result<()> {
        let n = atlas.space().n();
        let fns = self.base_fns(atlas)?;
        let mut rng = rng(seed ^ 0x5ec7_10);
        for (k, t) in atlas.transitions().iter().enumerate() {
            let (Some(from), Some(to)) = (fns.get(&t.from), fns.get(&t.to)) else { continue };
            let mut base = atlas.charts()[t.from].bounds.head(n);
            if let Some(r) = &t.region {
                base = base.intersect(&r.head(n));
            }
            if base.is_empty() {
                continue;
            }
            for x in base.sample(COMPAT_SAMPLES, &mut rng) {
                let mut p = x.clone();
                p.extend(from.iter().map(|f| f.eval(&x)));
                let Some(q) = atlas.apply(k, &p) else { continue };
                let expect: Vec<f64> = to.iter().map(|f| f.eval(&q[..n])).collect();
                if q[n..].iter().zip(&expect).any(|(a, b)| !super::numeric::close(*a, *b, 1e-9)) {
                    return Err(Error::SectionChartIncompatibility(
                        self.name.clone(),
                        format!("values differ across `{}`", t.label),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The lift `s ↦ jσ(x(s))` of a cycle of `X` into `J^order Y`.
    pub fn lift(&self, atlas: &Atlas, cycle: &Cycle, order: usize, tol: f64) -> Result<Cycle> {
        let space = atlas.space();
        let n = space.n();
        let mut pieces = Vec::new();
        for piece in &cycle.pieces {
            let sec = self.charts.get(&piece.chart).ok_or_else(|| {
                Error::SectionNotGlobal(
                    self.name.clone(),
                    format!("no expression on chart `{}`", atlas.charts()[piece.chart].name),
                )
            })?;
            let mut base = BTreeMap::new();
            for (s, e) in &piece.map {
                match s {
                    Symbol::Base(_) => {
                        base.insert(s.clone(), e.clone());
                    }
                    _ => {
                        return Err(Error::Schema(format!(
                            "cycle `{}` lies in the base and may only map base coordinates",
                            cycle.name
                        )))
                    }
                }
            }
            for i in 0..n {
                base.entry(Symbol::base(i)).or_insert_with(Expr::zero);
            }
            let mut map = base.clone();
            for a in 0..space.m() {
                for multi in MultiIndex::all_up_to(n, order) {
                    let v = sec.jet_value(a, &multi).substitute(&base)?;
                    map.insert(Symbol::jet(a, multi), v);
                }
            }
            pieces.push(CyclePiece { chart: piece.chart, map });
        }
        let lifted = Cycle { name: cycle.name.clone(), dim: cycle.dim, pieces, faces: cycle.faces.clone() };
        for piece in &lifted.pieces {
            let fns = lifted.coordinate_fns(atlas, piece)?;
            let bounds = &atlas.charts()[piece.chart].bounds;
            for s in interior_grid(cycle.dim, LIFT_SAMPLES) {
                let p: Vec<f64> = fns.iter().map(|f| f.eval(&s)).collect();
                if !bounds.contains(&p) {
                    return Err(Error::SectionNotGlobal(
                        self.name.clone(),
                        format!("the lift of `{}` leaves chart `{}`", cycle.name, atlas.charts()[piece.chart].name),
                    ));
                }
            }
        }
        lifted.check_closed(atlas, tol)?;
        Ok(lifted)
    }

    /// `max |E_a ∘ jσ|` over a grid of each chart's base window, at points
    /// where the section lies in the chart.
    pub fn criticality(&self, atlas: &Atlas, sources: &[SourceForm]) -> Result<f64> {
        let space = atlas.space();
        let n = space.n();
        let base = space.base_symbols();
        let fns = self.base_fns(atlas)?;
        let mut worst: f64 = 0.0;
        for (c, sec) in &self.charts {
            let residuals: Vec<Expr> =
                sources[*c].components().iter().map(|e| sec.pullback(e, n)).collect::<Result<_>>()?;
            let res = compile_all(&residuals, &base, atlas.constants(), space)?;
            let bounds = &atlas.charts()[*c].bounds;
            let window = bounds.head(n).window();
            for s in interior_grid(n, grid_size(n)) {
                let x: Vec<f64> = s.iter().zip(&window).map(|(t, (lo, hi))| lo + t * (hi - lo)).collect();
                let mut p = x.clone();
                p.extend(fns[c].iter().map(|f| f.eval(&x)));
                if !bounds.contains(&p) {
                    continue;
                }
                for r in &res {
                    let v = r.eval(&x);
                    worst = worst.max(if v.is_finite() { v.abs() } else { f64::INFINITY });
                }
            }
        }
        Ok(worst)
    }
}

fn grid_size(n: usize) -> usize {
    match n {
        1 => 257,
        2 => 33,
        3 => 11,
        _ => 6,
    }
}

/// Midpoints of a `k`-dimensional `count^k` grid on the unit cube.
fn interior_grid(k: usize, count: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) / count as f64).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// A family `σ_h`, `h ∈ [0,1]`, declared to join two sections.
#[derive(Clone, Debug)]
pub struct SectionHomotopy {
    pub from: String,
    pub to: String,
    pub charts: BTreeMap<usize, Vec<Expr>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyCheck {
    pub from: String,
    pub to: String,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn at_parameter(charts: &BTreeMap<usize, Vec<Expr>>, h: Expr) -> Result<BTreeMap<usize, Vec<Expr>>> {
    let map = BTreeMap::from([(homotopy_param(), h)]);
    charts.iter().map(|(c, f)| Ok((*c, f.iter().map(|e| e.substitute(&map)).collect::<Result<_>>()?))).collect()
}

/// Verifies the endpoints symbolically and gluing at intermediate parameters numerically.
pub fn verify_homotopy(
    atlas: &Atlas,
    sections: &[GlobalSection],
    hom: &SectionHomotopy,
    cfg: &EqualityConfig,
    seed: u64,
) -> Result<HomotopyCheck> {
    let find = |name: &str| {
        sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Schema(format!("homotopy refers to unknown section `{name}`")))
    };
    let (a, b) = (find(&hom.from)?, find(&hom.to)?);
    let fail = |why: String| HomotopyCheck { from: hom.from.clone(), to: hom.to.clone(), verified: false, reason: Some(why) };
    for (end, sec) in [(Expr::zero(), a), (Expr::one(), b)] {
        let fixed = at_parameter(&hom.charts, end.clone())?;
        if fixed.keys().ne(sec.charts.keys()) {
            return Ok(fail(format!("charts of the homotopy differ from those of `{}`", sec.name)));
        }
        for (c, fields) in &fixed {
            for (x, y) in fields.iter().zip(sec.charts[c].fields()) {
                if !equals(x, y, cfg)?.equal {
                    return Ok(fail(format!("endpoint does not match `{}`", sec.name)));
                }
            }
        }
    }
    for k in 1..4 {
        let h = Expr::ratio(k, 4);
        let mid = GlobalSection::new(atlas, format!("{}~{}", hom.from, hom.to), at_parameter(&hom.charts, h)?)?;
        if let Err(e) = mid.check_compatible(atlas, seed) {
            return Ok(fail(e.to_string()));
        }
    }
    Ok(HomotopyCheck { from: hom.from.clone(), to: hom.to.clone(), verified: true, reason: None })
}

/// Class index of each section under the verified homotopies.
pub fn homotopy_classes(sections: &[GlobalSection], verified: &[HomotopyCheck]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..sections.len()).collect();
    fn root(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let index = |name: &str| sections.iter().position(|s| s.name == name);
    for h in verified.iter().filter(|h| h.verified) {
        if let (Some(i), Some(j)) = (index(&h.from), index(&h.to)) {
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let roots: Vec<usize> = (0..sections.len()).map(|i| root(&mut parent, i)).collect();
    let mut labels = BTreeMap::new();
    roots.iter().map(|r| { let next = labels.len(); *labels.entry(*r).or_insert(next) }).collect()
}
