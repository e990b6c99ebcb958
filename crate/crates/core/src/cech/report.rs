//! Bundle-kind evidence and the composite global existence verdict.

use serde::{Deserialize, Serialize};

use super::{
    contracted_sources, delta_class, delta_prime_representative, homotopy_classes, periods, pullback_class_check,
    verify_homotopy, Atlas, ClassConfig, ClassReport, Cycle, GlobalSection, HomotopyCheck, LocalPresentation,
    Representative, SectionHomotopy,
};
use crate::expr::{equality, Expr};
use crate::jet::{DiffForm, ProjectableVectorField};
use crate::varcalc::variational_lie_derivative_source;
use crate::{Error, Result};

/// What is known about the fibers of `Y → X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BundleKind {
    Affine,
    Vector,
    /// Contractible fiber.
    Trivial,
    /// `Y = X × F` with the Betti numbers `b_0, b_1, …` of `F`.
    Product { fiber_betti: Vec<u32> },
    Unknown,
}

/// Whether `π^*: H^n(X) → H^n(Y)` is an isomorphism on the evidence of the bundle kind.
pub fn isomorphism_hypothesis_check(atlas: &Atlas, kind: &BundleKind) -> bool {
    let n = atlas.space().n();
    match kind {
        BundleKind::Affine | BundleKind::Vector | BundleKind::Trivial => true,
        BundleKind::Product { fiber_betti } => {
            fiber_betti.first() == Some(&1) && (1..=n).all(|q| fiber_betti.get(q).copied().unwrap_or(0) == 0)
        }
        BundleKind::Unknown => false,
    }
}

/// A symmetry given chart by chart, with an optional closed representative of `[Ξ_V ⌟ η]`.
#[derive(Clone, Debug)]
pub struct SymmetryInput {
    pub name: String,
    pub fields: Vec<ProjectableVectorField>,
    pub representative: Option<Vec<DiffForm>>,
}

pub struct ExistenceInput<'a> {
    pub atlas: &'a Atlas,
    pub presentation: &'a LocalPresentation,
    pub delta_representative: Option<Vec<DiffForm>>,
    pub partition: Option<Vec<Expr>>,
    /// `(n+1)`-cycles of `Y`.
    pub top_cycles: &'a [Cycle],
    /// `n`-cycles of `Y`.
    pub current_cycles: &'a [Cycle],
    /// `n`-cycles of `X`.
    pub base_cycles: &'a [Cycle],
    pub symmetries: &'a [SymmetryInput],
    pub sections: &'a [GlobalSection],
    pub homotopies: &'a [SectionHomotopy],
    pub bundle: BundleKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryVerdict {
    pub name: String,
    pub equation_symmetry: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_current: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionPullback {
    pub symmetry: String,
    pub report: ClassReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionVerdict {
    pub name: String,
    pub homotopy_class: usize,
    pub compatible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    pub critical: bool,
    pub max_residual: f64,
    pub pullbacks: Vec<SectionPullback>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Isomorphism hypothesis and a certified critical global section.
    Proposition,
    /// The isomorphism hypothesis is not available.
    Weaker,
    /// No certified critical global section.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropositionVerdict {
    pub branch: Branch,
    pub statement: String,
    /// `false` when the conclusion is contradicted by a computed class.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalExistenceReport {
    pub isomorphism_hypothesis: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<ClassReport>,
    pub symmetries: Vec<SymmetryVerdict>,
    pub homotopies: Vec<HomotopyCheck>,
    pub sections: Vec<SectionVerdict>,
    pub proposition: PropositionVerdict,
}

/// Whether `Ξ` preserves `η` on every chart.
pub fn is_equation_symmetry(
    atlas: &Atlas,
    presentation: &LocalPresentation,
    fields: &[ProjectableVectorField],
    cfg: &ClassConfig,
) -> Result<bool> {
    for (f, eta) in fields.iter().zip(&presentation.sources) {
        let lie = variational_lie_derivative_source(f, eta, atlas.space(), &cfg.eq)?;
        for c in lie.components() {
            if !equality::is_zero(c, &cfg.eq)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn symmetry_verdict(
    input: &ExistenceInput,
    sym: &SymmetryInput,
    cfg: &ClassConfig,
) -> Result<(SymmetryVerdict, Option<Representative>)> {
    let mut verdict =
        SymmetryVerdict { name: sym.name.clone(), equation_symmetry: false, class: None, global_current: None, note: None };
    if sym.fields.len() != input.atlas.charts().len() {
        return Err(Error::Schema(format!("symmetry `{}` needs one field per chart", sym.name)));
    }
    super::check_field_consistency(input.atlas, &sym.fields, &cfg.eq)?;
    if !is_equation_symmetry(input.atlas, input.presentation, &sym.fields, cfg)? {
        verdict.note = Some("not a symmetry of the equations".into());
        return Ok((verdict, None));
    }
    verdict.equation_symmetry = true;
    let omegas = contracted_sources(input.atlas, input.presentation, &sym.fields);
    let rep =
        match delta_prime_representative(input.atlas, &omegas, sym.representative.clone(), input.partition.clone(), cfg)
        {
            Ok(r) => r,
            Err(e @ (Error::NoRepresentative(_) | Error::NotVariationallyTrivial | Error::NonPolynomialInT)) => {
                verdict.note = Some(e.to_string());
                return Ok((verdict, None));
            }
            Err(e) => return Err(e),
        };
    let ps = periods(input.atlas, &rep, input.current_cycles, cfg)?;
    let zero = ps.iter().all(|p| p.value.abs() < cfg.tau_class);
    verdict.class = Some(ClassReport {
        class: format!("delta'({}_V . eta)", sym.name),
        provenance: rep.provenance,
        periods: ps,
        tolerance: cfg.tau_class,
        zero,
        certificate: None,
    });
    verdict.global_current = Some(zero);
    if input.current_cycles.is_empty() {
        verdict.note = Some("no cycles supplied; the verdict is vacuous".into());
    }
    Ok((verdict, Some(rep)))
}

/// Runs every class computation and assembles the verdicts.
pub fn global_existence_report(input: &ExistenceInput, cfg: &ClassConfig) -> Result<GlobalExistenceReport> {
    let atlas = input.atlas;
    let iso = isomorphism_hypothesis_check(atlas, &input.bundle);
    let delta = if input.top_cycles.is_empty() && input.delta_representative.is_none() {
        None
    } else {
        Some(delta_class(
            atlas,
            input.presentation,
            input.delta_representative.clone(),
            input.partition.clone(),
            input.top_cycles,
            cfg,
        )?)
    };
    let mut symmetries = Vec::new();
    let mut reps = Vec::new();
    for sym in input.symmetries {
        let (v, rep) = symmetry_verdict(input, sym, cfg)?;
        symmetries.push(v);
        reps.push(rep);
    }
    let homotopies: Vec<HomotopyCheck> = input
        .homotopies
        .iter()
        .map(|h| verify_homotopy(atlas, input.sections, h, &cfg.eq, cfg.seed))
        .collect::<Result<_>>()?;
    let classes = homotopy_classes(input.sections, &homotopies);
    let mut sections = Vec::new();
    for (sec, class) in input.sections.iter().zip(classes) {
        let (compatible, problem) = match sec.check_compatible(atlas, cfg.seed) {
            Ok(()) => (true, None),
            Err(e @ Error::SectionChartIncompatibility(..)) => (false, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        let max_residual = sec.criticality(atlas, &input.presentation.sources)?;
        let mut pullbacks = Vec::new();
        if compatible {
            for (sym, rep) in input.symmetries.iter().zip(&reps) {
                if let Some(rep) = rep {
                    let report = pullback_class_check(atlas, rep, sec, input.base_cycles, cfg)?;
                    pullbacks.push(SectionPullback { symmetry: sym.name.clone(), report });
                }
            }
        }
        sections.push(SectionVerdict {
            name: sec.name.clone(),
            homotopy_class: class,
            compatible,
            problem,
            critical: compatible && max_residual < cfg.tau_crit,
            max_residual,
            pullbacks,
        });
    }
    let proposition = proposition_verdict(iso, &symmetries, &sections);
    Ok(GlobalExistenceReport { isomorphism_hypothesis: iso, delta, symmetries, homotopies, sections, proposition })
}

fn proposition_verdict(iso: bool, symmetries: &[SymmetryVerdict], sections: &[SectionVerdict]) -> PropositionVerdict {
    let critical = sections.iter().any(|s| s.critical);
    if !iso {
        return PropositionVerdict {
            branch: Branch::Weaker,
            statement: "pullback from the base is not known to be an isomorphism in degree n: a nonzero class of \
                        Xi_V . eta only shows that it is not the pullback of a class on X"
                .into(),
            consistent: true,
        };
    }
    if !critical {
        return PropositionVerdict {
            branch: Branch::NotApplicable,
            statement: "no certified critical global section was supplied".into(),
            consistent: true,
        };
    }
    let mut consistent = true;
    for s in symmetries.iter().filter(|s| s.equation_symmetry) {
        if s.class.as_ref().is_some_and(|c| !c.zero) {
            consistent = false;
        }
    }
    // the pullback of the class along a critical section vanishes identically
    for s in sections.iter().filter(|s| s.critical) {
        if s.pullbacks.iter().any(|p| !p.report.zero) {
            consistent = false;
        }
    }
    PropositionVerdict {
        branch: Branch::Proposition,
        statement: "every symmetry of the equations admits a global Noether-Bessel-Hagen conserved current".into(),
        consistent,
    }
}
