//! Problem files (`vjp-schema-1`) and their translation into library inputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cech::{
    param_symbols, Atlas, BundleKind, ClassConfig, Constants, Cycle, CyclePiece, Face, FaceRule,
    GlobalSection, SectionHomotopy, SymmetryInput,
};
use crate::cech::{Bounds, Chart, Transition};
use crate::expr::{Compiled, Expr, Symbol};
use crate::jet::{DiffForm, JetSpace, ProjectableVectorField, SourceForm};
use crate::varcalc::{euler_lagrange, Center, Lagrangian};
use crate::{Error, Result};

pub const SCHEMA: &str = "vjp-schema-1";

/// A value given once for every chart, or chart by chart.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerChart<T> {
    All(T),
    Charts(BTreeMap<String, T>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub base: Vec<String>,
    pub fields: Vec<String>,
    pub order: usize,
    /// Named constants with their numeric values.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
}

/// An interval end: a number, an expression in the constants, or `null` for infinity.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Number(f64),
    Expr(String),
}

pub type Interval = [Option<Bound>; 2];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterSpec {
    #[serde(default)]
    pub base: Vec<String>,
    #[serde(default)]
    pub fiber: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub name: String,
    /// Base intervals, then fiber intervals; omitted means unbounded.
    #[serde(default)]
    pub bounds: Option<Vec<Interval>>,
    #[serde(default)]
    pub center: Option<CenterSpec>,
    #[serde(default)]
    pub embedding: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub from: String,
    pub to: String,
    pub base: Vec<String>,
    pub fiber: Vec<String>,
    #[serde(default)]
    pub region: Option<Vec<Interval>>,
}

/// `coeff · d(c1) ∧ d(c2) ∧ …` over jet coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub d: Vec<String>,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub base: Option<Vec<String>>,
    #[serde(default)]
    pub fiber: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    pub name: String,
    #[serde(default)]
    pub base: Option<Vec<String>>,
    #[serde(default)]
    pub fiber: Option<Vec<String>>,
    /// Chart-specific components overriding `base`/`fiber`.
    #[serde(default)]
    pub charts: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub representative: Option<PerChart<Vec<TermSpec>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub name: String,
    pub charts: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopySpec {
    pub from: String,
    pub to: String,
    /// Expressions in the base coordinates and the parameter `h`.
    pub charts: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleRole {
    /// `(n+1)`-cycle of `Y`, paired with `δ(η)`.
    Top,
    /// `n`-cycle of `Y`, paired with `δ'(Ξ_V ⌟ η)`.
    Current,
    /// `n`-cycle of `X`, lifted along sections.
    Base,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub chart: String,
    pub map: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSpec {
    #[serde(default)]
    pub piece: usize,
    pub axis: usize,
    pub side: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FaceRuleSpec {
    Collapsed(FaceSpec),
    Glued {
        a: FaceSpec,
        b: FaceSpec,
        #[serde(default)]
        reversed: bool,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSpec {
    pub name: String,
    pub dim: usize,
    /// Inferred from the dimension and the mapped coordinates when omitted.
    #[serde(default)]
    pub role: Option<CycleRole>,
    pub pieces: Vec<PieceSpec>,
    pub faces: Vec<FaceRuleSpec>,
}

/// Initial data and time span for the conservation oracle (`n = 1`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    /// `u, u_t, …` per field, up to one below the equation order.
    pub initial: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

/// A test section and box for the first-variation oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub section: Vec<String>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub space: SpaceSpec,
    /// Empty: a single unbounded chart `R`.
    #[serde(default)]
    pub charts: Vec<ChartSpec>,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
    #[serde(default)]
    pub partition: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub source: Option<PerChart<Vec<String>>>,
    #[serde(default)]
    pub lagrangian: Option<PerChart<String>>,
    #[serde(default)]
    pub delta_representative: Option<PerChart<Vec<TermSpec>>>,
    #[serde(default)]
    pub symmetries: Vec<SymmetrySpec>,
    #[serde(default)]
    pub sections: Vec<SectionSpec>,
    #[serde(default)]
    pub homotopies: Vec<HomotopySpec>,
    #[serde(default)]
    pub cycles: Vec<CycleSpec>,
    #[serde(default)]
    pub bundle: Option<BundleKind>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub integration: Option<IntegrationSpec>,
    #[serde(default)]
    pub probe: Option<ProbeSpec>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if file.schema != SCHEMA {
            return Err(Error::Schema(format!("expected schema `{SCHEMA}`, found `{}`", file.schema)));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tolerances: Vec<(String, f64)>,
}

/// A validated problem: jet space, atlas and everything referring to them.
pub struct Problem {
    pub file: ProblemFile,
    pub space: JetSpace,
    pub atlas: Atlas,
    pub cfg: ClassConfig,
    pub seed: u64,
    pub sources: Option<Vec<SourceForm>>,
    pub lagrangians: Option<Vec<Lagrangian>>,
    pub partition: Option<Vec<Expr>>,
    pub delta_representative: Option<Vec<DiffForm>>,
    pub symmetries: Vec<SymmetryInput>,
    pub sections: Vec<GlobalSection>,
    pub homotopies: Vec<SectionHomotopy>,
    pub cycles: Vec<(Cycle, CycleRole)>,
}

struct Loader<'a> {
    space: &'a JetSpace,
    constants: &'a Constants,
    charts: BTreeMap<String, usize>,
}

impl Loader<'_> {
    fn expr(&self, text: &str) -> Result<Expr> {
        self.space.parse(text)
    }

    fn exprs(&self, texts: &[String]) -> Result<Vec<Expr>> {
        texts.iter().map(|t| self.expr(t)).collect()
    }

    fn sized(&self, texts: &[String], len: usize, what: &str) -> Result<Vec<Expr>> {
        if texts.len() != len {
            return Err(Error::Schema(format!("{what} needs {len} components, found {}", texts.len())));
        }
        self.exprs(texts)
    }

    fn chart(&self, name: &str) -> Result<usize> {
        self.charts.get(name).copied().ok_or_else(|| Error::UnknownChart(name.into()))
    }

    fn number(&self, b: &Bound) -> Result<f64> {
        match b {
            Bound::Number(v) => Ok(*v),
            Bound::Expr(t) => {
                let e = self.expr(t)?;
                let (syms, vals): (Vec<Symbol>, Vec<f64>) =
                    self.constants.values().iter().map(|(k, v)| (Symbol::constant(k), *v)).unzip();
                let f = Compiled::with_slots(&e, &syms)
                    .ok_or_else(|| Error::Schema(format!("bound `{t}` is not a numeric constant")))?;
                Ok(f.eval(&vals))
            }
        }
    }

    fn bounds(&self, spec: &Option<Vec<Interval>>, what: &str) -> Result<Option<Bounds>> {
        let Some(spec) = spec else { return Ok(None) };
        let dim = self.space.n() + self.space.m();
        if spec.len() != dim {
            return Err(Error::Schema(format!("{what} needs {dim} intervals")));
        }
        let mut out = Vec::new();
        for [lo, hi] in spec {
            let lo = lo.as_ref().map(|b| self.number(b)).transpose()?.unwrap_or(f64::NEG_INFINITY);
            let hi = hi.as_ref().map(|b| self.number(b)).transpose()?.unwrap_or(f64::INFINITY);
            if lo >= hi {
                return Err(Error::Schema(format!("{what} has an empty interval")));
            }
            out.push((lo, hi));
        }
        Ok(Some(Bounds(out)))
    }

    fn coordinate(&self, name: &str) -> Result<Symbol> {
        let e = self.expr(name)?;
        let syms = e.symbols();
        match syms.iter().next() {
            Some(s) if syms.len() == 1 && s.is_coordinate() && e == Expr::symbol(s.clone()) => Ok(s.clone()),
            _ => Err(Error::UnknownCoordinate(name.into())),
        }
    }

    fn diff_form(&self, terms: &[TermSpec]) -> Result<DiffForm> {
        let degree = terms.first().map(|t| t.d.len()).unwrap_or(0);
        let mut out = Vec::new();
        for t in terms {
            if t.d.len() != degree {
                return Err(Error::Schema("form terms of different degree".into()));
            }
            let syms = t.d.iter().map(|n| self.coordinate(n)).collect::<Result<Vec<_>>>()?;
            out.push((syms, self.expr(&t.coeff)?));
        }
        Ok(DiffForm::from_terms(degree, out))
    }

    fn per_chart<T, U>(&self, spec: &PerChart<T>, what: &str, f: impl Fn(&T) -> Result<U>) -> Result<Vec<U>> {
        let count = self.charts.len();
        match spec {
            PerChart::All(v) => (0..count).map(|_| f(v)).collect(),
            PerChart::Charts(map) => {
                for k in map.keys() {
                    self.chart(k)?;
                }
                let mut ordered: Vec<(&usize, &String)> = self.charts.iter().map(|(k, v)| (v, k)).collect();
                ordered.sort();
                ordered
                    .into_iter()
                    .map(|(_, name)| {
                        map.get(name)
                            .ok_or_else(|| Error::Schema(format!("{what} is missing for chart `{name}`")))
                            .and_then(&f)
                    })
                    .collect()
            }
        }
    }

    fn chart_map(&self, map: &BTreeMap<String, Vec<String>>, len: usize, what: &str) -> Result<BTreeMap<usize, Vec<Expr>>> {
        map.iter().map(|(k, v)| Ok((self.chart(k)?, self.sized(v, len, what)?))).collect()
    }
}

fn infer_role(space: &JetSpace, dim: usize, c: &Cycle) -> Result<CycleRole> {
    let n = space.n();
    if dim == n + 1 {
        Ok(CycleRole::Top)
    } else if dim == n {
        let base_only = c.pieces.iter().all(|p| p.map.keys().all(|s| matches!(s, Symbol::Base(_))));
        Ok(if base_only { CycleRole::Base } else { CycleRole::Current })
    } else {
        Err(Error::Schema(format!("cycle `{}` has dimension {dim}; expected {n} or {}", c.name, n + 1)))
    }
}

fn face(f: &FaceSpec) -> Face {
    Face { piece: f.piece, axis: f.axis, side: f.side }
}

impl Problem {
    pub fn load(file: ProblemFile, overrides: &Overrides) -> Result<Problem> {
        let s = &file.space;
        let max_dim = file.cycles.iter().map(|c| c.dim).max().unwrap_or(0).max(s.base.len() + 1);
        let mut names: Vec<String> = s.constants.keys().cloned().collect();
        names.push("pi".into());
        names.push("h".into());
        names.extend((1..=max_dim).map(|i| format!("s{i}")));
        let space = JetSpace::new(s.base.clone(), s.fields.clone(), s.order)?.with_constants(names)?;
        let mut values = s.constants.clone();
        values.entry("pi".into()).or_insert(PI);
        for reserved in ["h"].into_iter().map(String::from).chain((1..=max_dim).map(|i| format!("s{i}"))) {
            if values.contains_key(&reserved) {
                return Err(Error::Schema(format!("constant `{reserved}` is reserved for parameters")));
            }
        }
        let constants = Constants::new(values);
        let (n, m) = (space.n(), space.m());

        let chart_specs = if file.charts.is_empty() {
            vec![ChartSpec { name: "R".into(), bounds: None, center: None, embedding: None }]
        } else {
            file.charts.clone()
        };
        let mut loader = Loader { space: &space, constants: &constants, charts: BTreeMap::new() };
        for (i, c) in chart_specs.iter().enumerate() {
            if loader.charts.insert(c.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate chart `{}`", c.name)));
            }
        }
        let mut charts = Vec::new();
        for c in &chart_specs {
            let center = match &c.center {
                None => Center::origin(&space),
                Some(cs) => Center {
                    base: if cs.base.is_empty() { vec![Expr::zero(); n] } else { loader.sized(&cs.base, n, "center base")? },
                    fiber: if cs.fiber.is_empty() {
                        vec![Expr::zero(); m]
                    } else {
                        loader.sized(&cs.fiber, m, "center fiber")?
                    },
                },
            };
            charts.push(Chart {
                name: c.name.clone(),
                bounds: loader.bounds(&c.bounds, &format!("chart `{}`", c.name))?.unwrap_or(Bounds::unbounded(n + m)),
                center,
                embedding: c.embedding.as_ref().map(|e| loader.exprs(e)).transpose()?,
            });
        }
        let mut transitions = Vec::new();
        for (k, t) in file.transitions.iter().enumerate() {
            let label = t.label.clone().unwrap_or_else(|| format!("{}->{}#{k}", t.from, t.to));
            transitions.push(Transition {
                from: loader.chart(&t.from)?,
                to: loader.chart(&t.to)?,
                base_map: loader.sized(&t.base, n, &format!("transition `{label}` base map"))?,
                fiber_map: loader.sized(&t.fiber, m, &format!("transition `{label}` fiber map"))?,
                region: loader.bounds(&t.region, &format!("transition `{label}` region"))?,
                label,
            });
        }

        let mut cfg = ClassConfig::default();
        for (name, v) in file.tolerances.iter().map(|(k, v)| (k.clone(), *v)).chain(overrides.tolerances.iter().cloned()) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Schema(format!("tolerance `{name}` must be positive")));
            }
            match name.as_str() {
                "tau_eq" => cfg.eq.tol = v,
                "tau_quad" => cfg.quad.tol = v,
                "tau_class" => cfg.tau_class = v,
                "tau_crit" => cfg.tau_crit = v,
                _ => return Err(Error::Schema(format!("unknown tolerance `{name}`"))),
            }
        }
        let seed = overrides.seed.or(file.seed).unwrap_or(1);
        cfg.seed = seed;
        cfg.eq.seed = seed;

        let atlas = Atlas::build(space.clone(), constants.clone(), charts, transitions, &cfg.eq, seed)?;

        let sources = file
            .source
            .as_ref()
            .map(|spec| loader.per_chart(spec, "source", |v| Ok(SourceForm::new(loader.sized(v, m, "source form")?))))
            .transpose()?;
        let lagrangians = file
            .lagrangian
            .as_ref()
            .map(|spec| loader.per_chart(spec, "lagrangian", |v| Ok(Lagrangian::new(loader.expr(v)?))))
            .transpose()?;
        let partition = match &file.partition {
            None => None,
            Some(map) => Some(loader.per_chart(&PerChart::Charts(map.clone()), "partition", |v| loader.expr(v))?),
        };
        let delta_representative = file
            .delta_representative
            .as_ref()
            .map(|spec| loader.per_chart(spec, "delta representative", |t| loader.diff_form(t)))
            .transpose()?;

        let mut symmetries = Vec::new();
        for sym in &file.symmetries {
            let mut fields = Vec::new();
            let mut ordered: Vec<(&usize, &String)> = loader.charts.iter().map(|(k, v)| (v, k)).collect();
            ordered.sort();
            for k in sym.charts.keys() {
                loader.chart(k)?;
            }
            for (_, chart) in ordered {
                let over = sym.charts.get(chart);
                let base = over.and_then(|o| o.base.as_ref()).or(sym.base.as_ref());
                let fiber = over.and_then(|o| o.fiber.as_ref()).or(sym.fiber.as_ref());
                let base = match base {
                    Some(b) => loader.sized(b, n, &format!("symmetry `{}` base", sym.name))?,
                    None => vec![Expr::zero(); n],
                };
                let fiber = match fiber {
                    Some(f) => loader.sized(f, m, &format!("symmetry `{}` fiber", sym.name))?,
                    None => vec![Expr::zero(); m],
                };
                fields.push(ProjectableVectorField::new(&space, base, fiber)?);
            }
            let representative = sym
                .representative
                .as_ref()
                .map(|spec| loader.per_chart(spec, "symmetry representative", |t| loader.diff_form(t)))
                .transpose()?;
            symmetries.push(SymmetryInput { name: sym.name.clone(), fields, representative });
        }

        let mut sections = Vec::new();
        for sec in &file.sections {
            if sections.iter().any(|s: &GlobalSection| s.name == sec.name) {
                return Err(Error::Schema(format!("duplicate section `{}`", sec.name)));
            }
            let charts = loader.chart_map(&sec.charts, m, &format!("section `{}`", sec.name))?;
            sections.push(GlobalSection::new(&atlas, sec.name.clone(), charts)?);
        }
        let mut homotopies = Vec::new();
        for h in &file.homotopies {
            for end in [&h.from, &h.to] {
                if !sections.iter().any(|s| &s.name == end) {
                    return Err(Error::Schema(format!("homotopy refers to unknown section `{end}`")));
                }
            }
            homotopies.push(SectionHomotopy {
                from: h.from.clone(),
                to: h.to.clone(),
                charts: loader.chart_map(&h.charts, m, "homotopy")?,
            });
        }

        let mut cycles = Vec::new();
        for c in &file.cycles {
            let mut pieces = Vec::new();
            for p in &c.pieces {
                let mut map = BTreeMap::new();
                for (k, v) in &p.map {
                    let e = loader.expr(v)?;
                    let params = param_symbols(c.dim);
                    let stray = |s: &Symbol| match s {
                        Symbol::Const(name) => !params.contains(s) && constants.get(name).is_none(),
                        _ => true,
                    };
                    if e.symbols().iter().any(stray) {
                        return Err(Error::Schema(format!("cycle `{}` map `{k}` must depend on s1..s{} only", c.name, c.dim)));
                    }
                    map.insert(loader.coordinate(k)?, e);
                }
                pieces.push(CyclePiece { chart: loader.chart(&p.chart)?, map });
            }
            for f in c.faces.iter().flat_map(|r| match r {
                FaceRuleSpec::Collapsed(a) => vec![*a],
                FaceRuleSpec::Glued { a, b, .. } => vec![*a, *b],
            }) {
                if f.piece >= pieces.len() || f.axis >= c.dim || f.side > 1 {
                    return Err(Error::Schema(format!("cycle `{}` has an invalid face", c.name)));
                }
            }
            let faces = c
                .faces
                .iter()
                .map(|r| match r {
                    FaceRuleSpec::Collapsed(a) => FaceRule::Collapsed(face(a)),
                    FaceRuleSpec::Glued { a, b, reversed } => FaceRule::Glued { a: face(a), b: face(b), reversed: *reversed },
                })
                .collect();
            let cycle = Cycle { name: c.name.clone(), dim: c.dim, pieces, faces };
            let role = match c.role {
                Some(r) => r,
                None => infer_role(&space, c.dim, &cycle)?,
            };
            let expected = if role == CycleRole::Top { n + 1 } else { n };
            if c.dim != expected {
                return Err(Error::Schema(format!("cycle `{}` has dimension {} but role {role:?}", c.name, c.dim)));
            }
            cycles.push((cycle, role));
        }

        Ok(Problem {
            file,
            space,
            atlas,
            cfg,
            seed,
            sources,
            lagrangians,
            partition,
            delta_representative,
            symmetries,
            sections,
            homotopies,
            cycles,
        })
    }

    pub fn cycles_with(&self, role: CycleRole) -> Vec<Cycle> {
        self.cycles.iter().filter(|(_, r)| *r == role).map(|(c, _)| c.clone()).collect()
    }

    pub fn chart_names(&self) -> Vec<String> {
        self.atlas.charts().iter().map(|c| c.name.clone()).collect()
    }

    /// Source forms from the file, or the Euler-Lagrange forms of its Lagrangians.
    pub fn source_forms(&self) -> Result<Vec<SourceForm>> {
        if let Some(s) = &self.sources {
            return Ok(s.clone());
        }
        match &self.lagrangians {
            Some(ls) => ls.iter().map(|l| euler_lagrange(l, &self.space)).collect(),
            None => Err(Error::Schema("the problem needs `source` or `lagrangian`".into())),
        }
    }
}
