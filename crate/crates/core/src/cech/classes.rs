//! Closed representatives of the obstruction classes and their periods.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::cycle::param_symbols;
use super::numeric::{compile_all, jet_coordinates, rng, NumFn};
use super::{Atlas, Cycle, CyclePiece, LocalPresentation};
use crate::expr::{EqualityConfig, Expr, MultiIndex, Symbol};
use crate::jet::{total_derivative_multi, DiffForm, HorizontalForm, SourceForm};
use crate::quad::{nquad, QuadConfig};
use crate::varcalc::{dh_homotopy, poincare_cartan};
use crate::{Error, Result};

pub const TAU_CLASS: f64 = 1e-4;
const OVERLAP_SAMPLES: usize = 256;
const INITIAL_NODES: usize = 8;

#[derive(Clone, Debug)]
pub struct ClassConfig {
    pub eq: EqualityConfig,
    pub quad: QuadConfig,
    pub tau_class: f64,
    pub tau_crit: f64,
    pub seed: u64,
}

impl Default for ClassConfig {
    fn default() -> Self {
        ClassConfig { eq: EqualityConfig::default(), quad: QuadConfig::default(), tau_class: TAU_CLASS, tau_crit: super::TAU_CRIT, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Closed forms given with the problem.
    Supplied,
    /// Differentials of local potentials that agree on every overlap.
    LocalPotentials,
    /// Local closed forms weighted by a partition of unity.
    PartitionOfUnity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Period {
    pub cycle: String,
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: String,
    pub provenance: Provenance,
    pub periods: Vec<Period>,
    pub tolerance: f64,
    pub zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
}

impl ClassReport {
    fn new(class: impl Into<String>, provenance: Provenance, periods: Vec<Period>, tolerance: f64) -> Self {
        let zero = periods.iter().all(|p| p.value.abs() < tolerance);
        ClassReport { class: class.into(), provenance, periods, tolerance, zero, certificate: None }
    }
}

/// A closed form given chart by chart, optionally collated by a partition of unity.
#[derive(Clone, Debug)]
pub struct Representative {
    pub forms: Vec<DiffForm>,
    pub partition: Option<Vec<Expr>>,
    pub provenance: Provenance,
}

impl Representative {
    pub fn degree(&self) -> usize {
        self.forms.first().map(DiffForm::degree).unwrap_or(0)
    }
}

fn coordinates_of(f: &DiffForm) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for (k, c) in f.terms() {
        out.extend(k.iter().cloned().chain(c.symbols()).filter(Symbol::is_coordinate));
    }
    out
}

fn check_closed(forms: &[DiffForm], cfg: &EqualityConfig) -> Result<()> {
    for (i, f) in forms.iter().enumerate() {
        if !f.d().equals(&DiffForm::zero(f.degree() + 1), cfg)? {
            return Err(Error::NoRepresentative(format!("form on chart {i} is not closed")));
        }
    }
    Ok(())
}

/// `E_a = Σ_J (-1)^{|J|} D_J A^J_a`, where `A^J_a vol` is the horizontal part of `∂_{u^a_J} ⌟ α`.
fn source_projection(atlas: &Atlas, alpha: &DiffForm) -> Result<SourceForm> {
    let space = atlas.space();
    let mut comps = vec![Expr::zero(); space.m()];
    let mut jets: BTreeSet<Symbol> = alpha.terms().keys().flatten().cloned().collect();
    jets.retain(|s| matches!(s, Symbol::Jet { .. }));
    for s in jets {
        let Symbol::Jet { field, multi } = &s else { unreachable!() };
        let a = alpha.interior(&s).horizontalize(space).top_coefficient();
        let d = total_derivative_multi(&a, multi, space)?;
        let term = if multi.order() % 2 == 0 { d } else { d.neg() };
        comps[*field as usize] = comps[*field as usize].add(&term);
    }
    Ok(SourceForm::new(comps))
}

fn agree_on_overlaps(atlas: &Atlas, forms: &[DiffForm], cfg: &EqualityConfig) -> Result<bool> {
    for (k, t) in atlas.transitions().iter().enumerate() {
        if !atlas.pullback_diff(k, &forms[t.to])?.equals(&forms[t.from], cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Partition of unity compiled over chart coordinates of `Y`.
fn compile_partition(atlas: &Atlas, rho: &[Expr]) -> Result<Vec<NumFn>> {
    if rho.len() != atlas.charts().len() {
        return Err(Error::Schema("one partition function per chart is required".into()));
    }
    let coords = atlas.space().coordinate_symbols();
    for r in rho {
        if r.symbols().iter().any(|s| s.jet_order() > 0 || matches!(s, Symbol::Homotopy)) {
            return Err(Error::NoRepresentative("partition functions must depend on x and u only".into()));
        }
    }
    compile_all(rho, &coords, atlas.constants(), atlas.space())
}

/// Checks `Σ ρ_k = 1` and that the local forms agree wherever two weights overlap.
fn check_partition(atlas: &Atlas, forms: &[DiffForm], rho: &[Expr], seed: u64) -> Result<()> {
    let space = atlas.space();
    let rho_fns = compile_partition(atlas, rho)?;
    let mut rng = rng(seed ^ 0x9e37_79b9);
    let order = forms.iter().flat_map(|f| f.jet_symbols()).map(|s| s.jet_order()).max().unwrap_or(0);
    let vars = jet_coordinates(space, order);
    for (c, chart) in atlas.charts().iter().enumerate() {
        for p in chart.bounds.sample(OVERLAP_SAMPLES, &mut rng) {
            let mut sum = rho_fns[c].eval(&p);
            for k in 0..atlas.charts().len() {
                if k == c {
                    continue;
                }
                if let Some((_, q)) = atlas.locate(c, &p, k) {
                    sum += rho_fns[k].eval(&q);
                }
            }
            if (sum - 1.0).abs() > 1e-8 {
                return Err(Error::NoRepresentative(format!(
                    "partition of unity sums to {sum} at a point of chart `{}`",
                    chart.name
                )));
            }
        }
    }
    for (k, t) in atlas.transitions().iter().enumerate() {
        let diff = atlas.pullback_diff(k, &forms[t.to])?.sub(&forms[t.from]);
        let coeffs: Vec<Expr> = diff.terms().values().cloned().collect();
        let fns = compile_all(&coeffs, &vars, atlas.constants(), space)?;
        let mut domain = atlas.charts()[t.from].bounds.clone();
        if let Some(r) = &t.region {
            domain = domain.intersect(r);
        }
        for p in domain.sample(OVERLAP_SAMPLES, &mut rng) {
            let Some(q) = atlas.apply(k, &p) else { continue };
            if rho_fns[t.from].eval(&p) <= 1e-12 || rho_fns[t.to].eval(&q) <= 1e-12 {
                continue;
            }
            let mut x = p.clone();
            x.truncate(space.n());
            for _ in space.n()..vars.len() {
                x.push(0.0);
            }
            // jet values: fiber coordinates from the point, derivatives drawn at random
            let mut idx = space.n();
            for a in 0..space.m() {
                for multi in MultiIndex::all_up_to(space.n(), order) {
                    x[idx] = if multi.is_empty() {
                        p[space.n() + a]
                    } else {
                        rand::Rng::gen_range(&mut rng, -1.0..1.0)
                    };
                    idx += 1;
                }
            }
            if fns.iter().any(|f| f.eval(&x).abs() > 1e-8) {
                return Err(Error::NoRepresentative(format!(
                    "local forms disagree on the support overlap of `{}`",
                    t.label
                )));
            }
        }
    }
    Ok(())
}

fn finish(
    atlas: &Atlas,
    forms: Vec<DiffForm>,
    supplied: bool,
    partition: Option<Vec<Expr>>,
    cfg: &ClassConfig,
) -> Result<Representative> {
    match partition {
        Some(rho) => {
            check_partition(atlas, &forms, &rho, cfg.seed)?;
            Ok(Representative { forms, partition: Some(rho), provenance: Provenance::PartitionOfUnity })
        }
        None => {
            if !agree_on_overlaps(atlas, &forms, &cfg.eq)? {
                return Err(Error::NoRepresentative(
                    "local closed forms differ on an overlap; supply a representative or a partition of unity".into(),
                ));
            }
            let provenance = if supplied { Provenance::Supplied } else { Provenance::LocalPotentials };
            Ok(Representative { forms, partition: None, provenance })
        }
    }
}

/// A closed `(n+1)`-form projecting onto the presented source form: the
/// supplied one, else the differentials of the local Poincaré-Cartan forms.
pub fn delta_representative(
    atlas: &Atlas,
    presentation: &LocalPresentation,
    supplied: Option<Vec<DiffForm>>,
    partition: Option<Vec<Expr>>,
    cfg: &ClassConfig,
) -> Result<Representative> {
    let n = atlas.space().n();
    let is_supplied = supplied.is_some();
    let forms = match supplied {
        Some(forms) => {
            if forms.len() != atlas.charts().len() || forms.iter().any(|f| f.degree() != n + 1) {
                return Err(Error::Schema(format!("one closed {}-form per chart is required", n + 1)));
            }
            check_closed(&forms, &cfg.eq)?;
            for (f, eta) in forms.iter().zip(&presentation.sources) {
                if !source_projection(atlas, f)?.equals(eta, &cfg.eq)? {
                    return Err(Error::NoRepresentative("supplied form does not project onto the source form".into()));
                }
            }
            forms
        }
        None => {
            let mut forms = Vec::new();
            for lag in &presentation.lagrangians {
                match poincare_cartan(lag, atlas.space()) {
                    Ok(theta) => forms.push(theta.d()),
                    Err(Error::UnsupportedOrder(k)) => {
                        return Err(Error::NoRepresentative(format!(
                            "no Poincaré-Cartan form for an order-{k} Lagrangian in base dimension {n}"
                        )))
                    }
                    Err(e) => return Err(e),
                }
            }
            forms
        }
    };
    finish(atlas, forms, is_supplied, partition, cfg)
}

/// A closed `n`-form whose horizontal part is `ω_i` on each chart: the
/// supplied one, else `dν_i` for local currents with `d_H ν_i = ω_i`.
pub fn delta_prime_representative(
    atlas: &Atlas,
    omegas: &[HorizontalForm],
    supplied: Option<Vec<DiffForm>>,
    partition: Option<Vec<Expr>>,
    cfg: &ClassConfig,
) -> Result<Representative> {
    let space = atlas.space();
    let n = space.n();
    if omegas.len() != atlas.charts().len() {
        return Err(Error::Schema("one horizontal form per chart is required".into()));
    }
    let is_supplied = supplied.is_some();
    let forms = match supplied {
        Some(forms) => {
            if forms.len() != atlas.charts().len() || forms.iter().any(|f| f.degree() != n) {
                return Err(Error::Schema(format!("one closed {n}-form per chart is required")));
            }
            check_closed(&forms, &cfg.eq)?;
            for (f, w) in forms.iter().zip(omegas) {
                if !f.horizontalize(space).equals(w, &cfg.eq)? {
                    return Err(Error::NoRepresentative("supplied form does not project onto the horizontal form".into()));
                }
            }
            forms
        }
        None => {
            let mut forms = Vec::new();
            for (w, chart) in omegas.iter().zip(atlas.charts()) {
                let nu = dh_homotopy(w, space, &chart.center, &cfg.eq)?;
                forms.push(nu.to_diff_form().d());
            }
            forms
        }
    };
    finish(atlas, forms, is_supplied, partition, cfg)
}

/// Top coefficient of `f` pulled back along a piece map to the parameter cube.
fn parameter_density(f: &DiffForm, map: &BTreeMap<Symbol, Expr>, dim: usize) -> Result<Expr> {
    let params = param_symbols(dim);
    let full: BTreeMap<Symbol, Expr> =
        coordinates_of(f).into_iter().map(|s| (s.clone(), map.get(&s).cloned().unwrap_or_default())).collect();
    let is_param = |s: &Symbol| params.contains(s);
    Ok(f.pullback(&full, &is_param)?.coefficient(&params))
}

struct Term {
    transition: Option<usize>,
    weight: Option<NumFn>,
    density: NumFn,
}

fn piece_terms(atlas: &Atlas, rep: &Representative, piece: &CyclePiece, dim: usize) -> Result<Vec<Term>> {
    let space = atlas.space();
    let params = param_symbols(dim);
    let compile = |e: &Expr| NumFn::new(e, &params, atlas.constants(), space);
    let c = piece.chart;
    let Some(rho) = &rep.partition else {
        let density = compile(&parameter_density(&rep.forms[c], &piece.map, dim)?)?;
        return Ok(vec![Term { transition: None, weight: None, density }]);
    };
    let coords: BTreeMap<Symbol, Expr> = space
        .coordinate_symbols()
        .into_iter()
        .map(|s| {
            let e = piece.map.get(&s).cloned().unwrap_or_default();
            (s, e)
        })
        .collect();
    let mut terms = Vec::new();
    let weight = rho[c].substitute(&coords)?;
    let density = parameter_density(&rep.forms[c], &piece.map, dim)?;
    terms.push(Term { transition: None, weight: Some(compile(&weight)?), density: compile(&density)? });
    for (t, tr) in atlas.transitions().iter().enumerate() {
        if tr.from != c {
            continue;
        }
        let weight = atlas.pullback_expr(t, &rho[tr.to])?.substitute(&coords)?;
        let density = parameter_density(&atlas.pullback_diff(t, &rep.forms[tr.to])?, &piece.map, dim)?;
        terms.push(Term { transition: Some(t), weight: Some(compile(&weight)?), density: compile(&density)? });
    }
    Ok(terms)
}

/// `∫_cycle α`, piece by piece.
pub fn period(atlas: &Atlas, rep: &Representative, cycle: &Cycle, cfg: &ClassConfig) -> Result<Period> {
    if cycle.dim != rep.degree() {
        return Err(Error::Schema(format!(
            "cycle `{}` has dimension {} but the form has degree {}",
            cycle.name,
            cycle.dim,
            rep.degree()
        )));
    }
    cycle.check_closed(atlas, cfg.quad.tol)?;
    let mut value = 0.0;
    let mut error = 0.0;
    for piece in &cycle.pieces {
        let terms = piece_terms(atlas, rep, piece, cycle.dim)?;
        let point = cycle.coordinate_fns(atlas, piece)?;
        let f = |s: &[f64]| -> f64 {
            if terms.len() == 1 && terms[0].weight.is_none() {
                return terms[0].density.eval(s);
            }
            let p: Vec<f64> = point.iter().map(|g| g.eval(s)).collect();
            let mut seen = BTreeSet::new();
            let mut acc = 0.0;
            for term in &terms {
                let target = match term.transition {
                    None => piece.chart,
                    Some(t) => {
                        let to = atlas.transitions()[t].to;
                        if seen.contains(&to) || atlas.apply(t, &p).is_none() {
                            continue;
                        }
                        to
                    }
                };
                seen.insert(target);
                let w = term.weight.as_ref().map_or(1.0, |w| w.eval(s));
                if w != 0.0 {
                    acc += w * term.density.eval(s);
                }
            }
            acc
        };
        let r = nquad(&f, cycle.dim, INITIAL_NODES, &cfg.quad)?;
        value += r.value;
        error += r.error;
    }
    Ok(Period { cycle: cycle.name.clone(), value, error })
}

pub fn periods(atlas: &Atlas, rep: &Representative, cycles: &[Cycle], cfg: &ClassConfig) -> Result<Vec<Period>> {
    cycles.iter().map(|c| period(atlas, rep, c, cfg)).collect()
}

/// Periods of `δ(η)` over `(n+1)`-cycles of `Y`.
pub fn delta_class(
    atlas: &Atlas,
    presentation: &LocalPresentation,
    supplied: Option<Vec<DiffForm>>,
    partition: Option<Vec<Expr>>,
    cycles: &[Cycle],
    cfg: &ClassConfig,
) -> Result<ClassReport> {
    let rep = delta_representative(atlas, presentation, supplied, partition, cfg)?;
    let periods = periods(atlas, &rep, cycles, cfg)?;
    Ok(ClassReport::new("delta(eta)", rep.provenance, periods, cfg.tau_class))
}

/// Periods of `δ'(ω)` over `n`-cycles of `Y`, for `ω_i` variationally trivial on each chart.
pub fn delta_prime_class(
    atlas: &Atlas,
    omegas: &[HorizontalForm],
    supplied: Option<Vec<DiffForm>>,
    partition: Option<Vec<Expr>>,
    cycles: &[Cycle],
    cfg: &ClassConfig,
) -> Result<ClassReport> {
    let rep = delta_prime_representative(atlas, omegas, supplied, partition, cfg)?;
    let periods = periods(atlas, &rep, cycles, cfg)?;
    Ok(ClassReport::new("delta'(omega)", rep.provenance, periods, cfg.tau_class))
}

pub const NO_GLOBAL_SOLUTIONS: &str = "no global solutions in the homotopy class of the section";
pub const INCONCLUSIVE: &str = "inconclusive: the pulled-back class vanishes on the supplied cycles";

/// Periods of `jσ^*α` over cycles of `X`, each lifted through the section.
pub fn pullback_class_check(
    atlas: &Atlas,
    rep: &Representative,
    section: &super::GlobalSection,
    cycles: &[Cycle],
    cfg: &ClassConfig,
) -> Result<ClassReport> {
    let order = rep.forms.iter().flat_map(|f| f.jet_symbols()).map(|s| s.jet_order()).max().unwrap_or(0);
    let mut lifted = Vec::new();
    for c in cycles {
        lifted.push(section.lift(atlas, c, order, cfg.quad.tol)?);
    }
    let periods = periods(atlas, rep, &lifted, cfg)?;
    let mut report = ClassReport::new(format!("j{}*[alpha]", section.name), rep.provenance, periods, cfg.tau_class);
    report.certificate = Some(if report.zero { INCONCLUSIVE } else { NO_GLOBAL_SOLUTIONS }.to_string());
    Ok(report)
}

/// `Ξ_V ⌟ η` on every chart.
pub fn contracted_sources(
    atlas: &Atlas,
    presentation: &LocalPresentation,
    fields: &[crate::jet::ProjectableVectorField],
) -> Vec<HorizontalForm> {
    let n = atlas.space().n();
    fields
        .iter()
        .zip(&presentation.sources)
        .map(|(f, eta)| HorizontalForm::volume(n, eta.contract(&f.vertical())))
        .collect()
}
