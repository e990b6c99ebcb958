//! The five user-facing commands.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::problem::{CycleRole, Overrides, Problem, ProblemFile, SCHEMA};
use super::report::{exit, exit_code_for, kind_name, Report, Status};
use crate::cech::{
    admissibility_checks, build_presentation, check_field_consistency, global_existence_report,
    presentation_from_lagrangians, Admissibility, BundleKind, Branch, ClassReport, ExistenceInput,
    GlobalExistenceReport, LocalPresentation, NO_GLOBAL_SOLUTIONS,
};
use crate::expr::{Expr, Symbol};
use crate::jet::{HorizontalForm, JetSpace, SourceForm};
use crate::oracle::{conservation_check, gateaux_check, ConservationConfig, ConservationReport, GateauxConfig, GateauxReport};
use crate::varcalc::{euler_lagrange, helmholtz_check, noether_data, tonti_lagrangian, Lagrangian};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckVariational,
    Derive,
    Noether,
    Glue,
    Obstruction,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckVariational => "check-variational",
            Command::Derive => "derive",
            Command::Noether => "noether",
            Command::Glue => "glue",
            Command::Obstruction => "obstruction",
        }
    }
}

struct Outcome {
    verdict: String,
    exit_code: i32,
    details: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report data serializes")
}

fn render_form(space: &JetSpace, f: &HorizontalForm) -> Value {
    let n = space.n();
    if f.degree() == n {
        Value::String(space.render(&f.top_coefficient()))
    } else if f.degree() + 1 == n {
        Value::Array(f.current_components().iter().map(|c| Value::String(space.render(c))).collect())
    } else {
        Value::Object(
            f.coeffs()
                .iter()
                .map(|(k, c)| {
                    let key: Vec<&str> = k.iter().map(|i| space.base_names()[*i as usize].as_str()).collect();
                    (format!("d{}", key.join("^d")), Value::String(space.render(c)))
                })
                .collect(),
        )
    }
}

fn render_source(space: &JetSpace, s: &SourceForm) -> Vec<String> {
    s.components().iter().map(|c| space.render(c)).collect()
}

/// Runs a command on an already parsed problem file.
pub fn run(command: Command, file: ProblemFile, overrides: &Overrides) -> Report {
    let name = file.name.clone();
    let seed = overrides.seed.or(file.seed);
    let outcome = Problem::load(file, overrides).and_then(|p| {
        let seed = p.seed;
        dispatch(command, &p).map(|o| (o, seed))
    });
    match outcome {
        Ok((o, seed)) => Report {
            schema: SCHEMA.into(),
            command: command.name().into(),
            problem: name,
            seed: Some(seed),
            status: Status::Ok,
            exit_code: o.exit_code,
            verdict: o.verdict,
            details: o.details,
        },
        Err(e) => error_report(command, name, seed, &e),
    }
}

fn error_report(command: Command, problem: String, seed: Option<u64>, e: &Error) -> Report {
    Report {
        schema: SCHEMA.into(),
        command: command.name().into(),
        problem,
        seed,
        status: Status::Error,
        exit_code: exit_code_for(e),
        verdict: e.to_string(),
        details: json!({ "kind": kind_name(e), "error": e.to_string() }),
    }
}

/// Reads and runs a problem file; unreadable or malformed files give an input-error report.
pub fn run_file(command: Command, path: &Path, overrides: &Overrides) -> Report {
    match ProblemFile::read(path) {
        Ok(file) => run(command, file, overrides),
        Err(e) => error_report(command, path.display().to_string(), overrides.seed, &e),
    }
}

fn dispatch(command: Command, p: &Problem) -> Result<Outcome> {
    match command {
        Command::CheckVariational => check_variational(p),
        Command::Derive => derive(p),
        Command::Noether => noether(p),
        Command::Glue => glue(p),
        Command::Obstruction => obstruction(p),
    }
}

#[derive(Serialize)]
struct ResidualOut {
    component: String,
    /// Jet of the variation whose coefficient fails to be self-adjoint.
    term: String,
    residual: String,
}

#[derive(Serialize)]
struct HelmholtzChart {
    chart: String,
    passes: bool,
    residuals: Vec<ResidualOut>,
}

fn presentation(p: &Problem) -> Result<LocalPresentation> {
    match (&p.sources, &p.lagrangians) {
        (None, Some(ls)) => presentation_from_lagrangians(&p.atlas, ls.clone(), &p.cfg.eq),
        _ => build_presentation(&p.atlas, p.source_forms()?, &p.cfg.eq),
    }
}

fn existence_input<'a>(
    p: &'a Problem,
    pres: &'a LocalPresentation,
    cycles: &'a [Vec<crate::cech::Cycle>; 3],
    with_sections: bool,
) -> ExistenceInput<'a> {
    ExistenceInput {
        atlas: &p.atlas,
        presentation: pres,
        delta_representative: p.delta_representative.clone(),
        partition: p.partition.clone(),
        top_cycles: &cycles[0],
        current_cycles: &cycles[1],
        base_cycles: &cycles[2],
        symmetries: &p.symmetries,
        sections: if with_sections { &p.sections } else { &[] },
        homotopies: if with_sections { &p.homotopies } else { &[] },
        bundle: p.file.bundle.clone().unwrap_or(BundleKind::Unknown),
    }
}

fn all_cycles(p: &Problem) -> [Vec<crate::cech::Cycle>; 3] {
    [p.cycles_with(CycleRole::Top), p.cycles_with(CycleRole::Current), p.cycles_with(CycleRole::Base)]
}

fn periods_text(c: &ClassReport) -> String {
    c.periods.iter().map(|q| format!("{} = {:.6}", q.cycle, q.value)).collect::<Vec<_>>().join(", ")
}

fn check_variational(p: &Problem) -> Result<Outcome> {
    let space = &p.space;
    let sources = p.source_forms()?;
    let names = p.chart_names();
    let mut charts = Vec::new();
    for (name, eta) in names.iter().zip(&sources) {
        let h = helmholtz_check(eta, space, &p.cfg.eq)?;
        charts.push(HelmholtzChart {
            chart: name.clone(),
            passes: h.passes,
            residuals: h
                .residuals
                .iter()
                .map(|r| ResidualOut {
                    component: space.field_names()[r.a].clone(),
                    term: space.render(&Expr::symbol(Symbol::jet(r.b, r.multi.clone()))),
                    residual: space.render(&r.expr),
                })
                .collect(),
        });
    }
    if charts.iter().any(|c| !c.passes) {
        return Ok(Outcome {
            verdict: "not locally variational".into(),
            exit_code: exit::NEGATIVE,
            details: json!({ "helmholtz": to_value(&charts) }),
        });
    }
    let pres = presentation(p)?;
    let lagrangians: Vec<Value> = names
        .iter()
        .zip(&pres.lagrangians)
        .map(|(c, l)| json!({ "chart": c, "lagrangian": space.render(&l.density) }))
        .collect();
    let top = p.cycles_with(CycleRole::Top);
    let delta = if top.is_empty() && p.delta_representative.is_none() {
        None
    } else {
        Some(crate::cech::delta_class(&p.atlas, &pres, p.delta_representative.clone(), p.partition.clone(), &top, &p.cfg)?)
    };
    let (verdict, code) = match &delta {
        _ if p.atlas.charts().len() == 1 => ("variational, global".to_string(), exit::SUCCESS),
        Some(d) if !d.zero => (format!("locally variational, obstruction periods {}", periods_text(d)), exit::NEGATIVE),
        Some(_) => ("variational, global over the supplied cycles".to_string(), exit::SUCCESS),
        None => ("locally variational; no (n+1)-cycles supplied, no obstruction detected".to_string(), exit::SUCCESS),
    };
    Ok(Outcome {
        verdict,
        exit_code: code,
        details: json!({
            "helmholtz": to_value(&charts),
            "local_lagrangians": lagrangians,
            "delta": delta.as_ref().map(to_value),
        }),
    })
}

fn derive(p: &Problem) -> Result<Outcome> {
    let space = &p.space;
    let names = p.chart_names();
    let mut charts = Vec::new();
    if let Some(ls) = &p.lagrangians {
        for (name, l) in names.iter().zip(ls) {
            let el = euler_lagrange(l, space)?;
            charts.push(json!({
                "chart": name,
                "lagrangian": space.render(&l.density),
                "euler_lagrange": render_source(space, &el),
            }));
        }
        let probe = match &p.file.probe {
            Some(pr) => Some(probe(p, &ls[0], pr)?),
            None => None,
        };
        return Ok(Outcome {
            verdict: format!("Euler-Lagrange expressions on {} chart(s)", names.len()),
            exit_code: exit::SUCCESS,
            details: json!({ "charts": charts, "first_variation": probe.as_ref().map(to_value) }),
        });
    }
    let sources = p.source_forms()?;
    for ((name, eta), chart) in names.iter().zip(&sources).zip(p.atlas.charts()) {
        let lag = tonti_lagrangian(eta, space, &chart.center, &p.cfg.eq)?;
        let back = euler_lagrange(&lag, space)?;
        charts.push(json!({
            "chart": name,
            "source": render_source(space, eta),
            "lagrangian": space.render(&lag.density),
            "reproduces_source": back.equals(eta, &p.cfg.eq)?,
        }));
    }
    Ok(Outcome {
        verdict: format!("local Lagrangians on {} chart(s)", names.len()),
        exit_code: exit::SUCCESS,
        details: json!({ "charts": charts }),
    })
}

fn probe(p: &Problem, lag: &Lagrangian, pr: &super::problem::ProbeSpec) -> Result<GateauxReport> {
    let space = &p.space;
    let sigma = pr.section.iter().map(|s| space.parse(s)).collect::<Result<Vec<_>>>()?;
    let el = euler_lagrange(lag, space)?;
    let mut cfg = GateauxConfig::for_dim(space.n());
    cfg.lo = pr.lo.clone();
    cfg.hi = pr.hi.clone();
    if let Some(k) = pr.points {
        cfg.points = k;
    }
    gateaux_check(&lag.density, el.components(), space, p.atlas.constants().values(), &sigma, &cfg)
}

#[derive(Serialize)]
struct ChartCurrents {
    chart: String,
    lie_derivative: String,
    canonical: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bessel_hagen: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strong: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificates: Option<Value>,
}

#[derive(Serialize)]
struct SymmetryCurrents {
    name: String,
    classification: &'static str,
    charts: Vec<ChartCurrents>,
    #[serde(skip_serializing_if = "Option::is_none")]
    admissibility: Option<Admissibility>,
    #[serde(skip_serializing_if = "Option::is_none")]
    drift: Option<ConservationReport>,
}

fn noether(p: &Problem) -> Result<Outcome> {
    let space = &p.space;
    let names = p.chart_names();
    let pres = presentation(p)?;
    let lags = &pres.lagrangians;
    let mut out = Vec::new();
    for sym in &p.symmetries {
        if sym.fields.len() != names.len() {
            return Err(Error::Schema(format!("symmetry `{}` needs one field per chart", sym.name)));
        }
        check_field_consistency(&p.atlas, &sym.fields, &p.cfg.eq)?;
        let data = sym
            .fields
            .iter()
            .zip(lags)
            .zip(p.atlas.charts())
            .map(|((f, l), c)| noether_data(f, l, space, &c.center, &p.cfg.eq))
            .collect::<Result<Vec<_>>>()?;
        let classification = if data.iter().all(|d| d.lagrangian_symmetry) {
            "lagrangian symmetry"
        } else if data.iter().all(|d| d.equation_symmetry) {
            "equation symmetry"
        } else {
            "not a symmetry"
        };
        if classification == "not a symmetry" {
            out.push(SymmetryCurrents { name: sym.name.clone(), classification, charts: Vec::new(), admissibility: None, drift: None });
            continue;
        }
        let charts = names
            .iter()
            .zip(&data)
            .map(|(name, d)| ChartCurrents {
                chart: name.clone(),
                lie_derivative: space.render(&d.lie.density),
                canonical: render_form(space, &d.canonical),
                beta: d.beta().map(|f| render_form(space, f)),
                nu: d.nu().map(|f| render_form(space, f)),
                bessel_hagen: d.bessel_hagen.as_ref().map(|c| render_form(space, &c.current)),
                strong: d.strong.as_ref().map(|c| render_form(space, &c.current)),
                certificates: match (&d.bessel_hagen, &d.strong) {
                    (Some(b), Some(s)) => Some(json!({ "bessel_hagen": b.certificate, "strong": s.certificate })),
                    _ => None,
                },
            })
            .collect();
        let admissibility = Some(admissibility_checks(&p.atlas, &pres, &sym.fields, &p.cfg.eq)?);
        let drift = match (&p.file.integration, &data[0].bessel_hagen) {
            (Some(spec), Some(current)) if space.n() == 1 => {
                let mut initial = Vec::new();
                for f in space.field_names() {
                    initial.push(
                        spec.initial
                            .get(f)
                            .cloned()
                            .ok_or_else(|| Error::Schema(format!("initial data missing for field `{f}`")))?,
                    );
                }
                let el = euler_lagrange(&lags[0], space)?;
                let cfg = ConservationConfig { t0: spec.t0, t1: spec.t1, step: spec.step };
                Some(conservation_check(
                    &current.current.current_components()[0],
                    el.components(),
                    space,
                    p.atlas.constants().values(),
                    &initial,
                    &cfg,
                )?)
            }
            _ => None,
        };
        out.push(SymmetryCurrents { name: sym.name.clone(), classification, charts, admissibility, drift });
    }
    let with_currents = out.iter().filter(|s| !s.charts.is_empty()).count();
    Ok(Outcome {
        verdict: format!("currents for {with_currents} of {} field(s)", out.len()),
        exit_code: exit::SUCCESS,
        details: json!({ "symmetries": to_value(&out) }),
    })
}

fn mu_table(p: &Problem, pres: &LocalPresentation) -> Vec<Value> {
    pres.differences
        .iter()
        .map(|(k, mu)| {
            let t = &p.atlas.transitions()[*k];
            json!({
                "transition": t.label,
                "from": p.atlas.charts()[t.from].name,
                "to": p.atlas.charts()[t.to].name,
                "mu": p.space.render(&mu.density),
            })
        })
        .collect()
}

fn glue(p: &Problem) -> Result<Outcome> {
    let pres = presentation(p)?;
    let cycles = all_cycles(p);
    let r = global_existence_report(&existence_input(p, &pres, &cycles, false), &p.cfg)?;
    let nonzero: Vec<String> = r
        .symmetries
        .iter()
        .filter(|s| s.class.as_ref().is_some_and(|c| !c.zero))
        .map(|s| s.name.clone())
        .collect();
    let mut verdict = match &r.delta {
        Some(d) if !d.zero => format!("delta(eta) nonzero: {}", periods_text(d)),
        Some(_) => "delta(eta) zero".to_string(),
        None => "delta(eta) not evaluated (no cycles)".to_string(),
    };
    if !p.symmetries.is_empty() {
        if nonzero.is_empty() {
            verdict.push_str("; every current class vanishes");
        } else {
            verdict.push_str(&format!("; nonzero current classes for {}", nonzero.join(", ")));
        }
    }
    Ok(Outcome {
        verdict,
        exit_code: exit::SUCCESS,
        details: json!({
            "differences": mu_table(p, &pres),
            "delta": r.delta.as_ref().map(to_value),
            "symmetries": to_value(&r.symmetries),
        }),
    })
}

fn obstruction_verdict(r: &GlobalExistenceReport) -> String {
    let mut parts = vec![format!("{:?} branch: {}", r.proposition.branch, r.proposition.statement)];
    for s in &r.sections {
        if s.pullbacks.iter().any(|pb| pb.report.certificate.as_deref() == Some(NO_GLOBAL_SOLUTIONS)) {
            parts.push(format!("section {}: {NO_GLOBAL_SOLUTIONS}", s.name));
        } else if !s.pullbacks.is_empty() {
            parts.push(format!("section {}: inconclusive", s.name));
        }
    }
    if r.proposition.branch == Branch::Proposition && !r.proposition.consistent {
        parts.push("CONTRADICTION: a current class is nonzero despite a critical global section".into());
    }
    parts.join("; ")
}

fn obstruction(p: &Problem) -> Result<Outcome> {
    let pres = presentation(p)?;
    let cycles = all_cycles(p);
    let r = global_existence_report(&existence_input(p, &pres, &cycles, true), &p.cfg)?;
    let code = if r.proposition.consistent { exit::SUCCESS } else { exit::MATH };
    let verdict = obstruction_verdict(&r);
    Ok(Outcome { verdict, exit_code: code, details: to_value(&r) })
}
