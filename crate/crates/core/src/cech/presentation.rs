use std::collections::BTreeMap;

use super::{coboundary, Atlas, Cochain};
use crate::expr::{equality, equals, EqualityConfig};
use crate::jet::{HorizontalForm, ProjectableVectorField, SourceForm};
use crate::varcalc::{
    euler_lagrange, helmholtz_check, lie_derivative_current, strong_noether_current, tonti_lagrangian,
    variational_lie_derivative_lagrangian, Lagrangian,
};
use crate::{Error, Result};

/// Local Lagrangians `λ_i` presenting one source form, with their overlap
/// differences `μ_t = λ_from - λ_to` (in `from` coordinates), one per transition.
#[derive(Clone, Debug)]
pub struct LocalPresentation {
    pub sources: Vec<SourceForm>,
    pub lagrangians: Vec<Lagrangian>,
    pub differences: BTreeMap<usize, Lagrangian>,
}

/// Checks that per-chart source forms agree on every overlap.
pub fn check_source_consistency(atlas: &Atlas, sources: &[SourceForm], cfg: &EqualityConfig) -> Result<()> {
    for (k, t) in atlas.transitions().iter().enumerate() {
        let pulled = atlas.pullback_source(k, sources[t.to].components())?;
        for (a, b) in pulled.iter().zip(sources[t.from].components()) {
            if !equals(a, b, cfg)?.equal {
                return Err(Error::InconsistentSource(t.label.clone()));
            }
        }
    }
    Ok(())
}

fn differences(atlas: &Atlas, lagrangians: &[Lagrangian], cfg: &EqualityConfig) -> Result<BTreeMap<usize, Lagrangian>> {
    let n = atlas.space().n();
    let c = Cochain::from_charts(lagrangians.iter().map(|l| l.to_form(n)).collect());
    let d = coboundary(atlas, &c)?;
    let mut out = BTreeMap::new();
    for (k, f) in d.entries {
        let mu = Lagrangian::new(f.top_coefficient().neg()).on_chart(atlas.charts()[atlas.transitions()[k].from].name.clone());
        for e in euler_lagrange(&mu, atlas.space())?.components() {
            if !equality::is_zero(e, cfg)? {
                return Err(Error::Certificate(format!(
                    "overlap difference on `{}` is not variationally trivial",
                    atlas.transitions()[k].label
                )));
            }
        }
        out.insert(k, mu);
    }
    Ok(out)
}

/// Tonti Lagrangians chart by chart for a source form given on every chart.
pub fn build_presentation(atlas: &Atlas, sources: Vec<SourceForm>, cfg: &EqualityConfig) -> Result<LocalPresentation> {
    if sources.len() != atlas.charts().len() {
        return Err(Error::Schema("one source form per chart is required".into()));
    }
    check_source_consistency(atlas, &sources, cfg)?;
    let space = atlas.space();
    let mut lagrangians = Vec::new();
    for (chart, eta) in atlas.charts().iter().zip(&sources) {
        if !helmholtz_check(eta, space, cfg)?.passes {
            return Err(Error::HelmholtzFailed);
        }
        lagrangians.push(tonti_lagrangian(eta, space, &chart.center, cfg)?.on_chart(chart.name.clone()));
    }
    let differences = differences(atlas, &lagrangians, cfg)?;
    Ok(LocalPresentation { sources, lagrangians, differences })
}

/// Presentation from user-given local Lagrangians.
pub fn presentation_from_lagrangians(
    atlas: &Atlas,
    lagrangians: Vec<Lagrangian>,
    cfg: &EqualityConfig,
) -> Result<LocalPresentation> {
    if lagrangians.len() != atlas.charts().len() {
        return Err(Error::Schema("one Lagrangian per chart is required".into()));
    }
    let sources: Vec<SourceForm> =
        lagrangians.iter().map(|l| euler_lagrange(l, atlas.space())).collect::<Result<_>>()?;
    check_source_consistency(atlas, &sources, cfg)?;
    let differences = differences(atlas, &lagrangians, cfg)?;
    Ok(LocalPresentation { sources, lagrangians, differences })
}

/// Checks that per-chart copies of a symmetry are one vector field.
pub fn check_field_consistency(atlas: &Atlas, fields: &[ProjectableVectorField], cfg: &EqualityConfig) -> Result<()> {
    for (k, t) in atlas.transitions().iter().enumerate() {
        if !atlas.field_consistent(k, &fields[t.from], &fields[t.to], cfg)? {
            return Err(Error::InconsistentField(t.label.clone()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Admissibility {
    /// `L_Ξ L_Ξ λ_i = 0` on every chart.
    pub lie_lie_zero: bool,
    /// `L_Ξ μ_t = 0` on every overlap.
    pub lie_difference_zero: bool,
    /// `d_H β_i` agrees across overlaps.
    pub dh_beta_global: bool,
    /// `d_H L_Ξ(ν_i + ε_i) = 0` on every chart, evaluated directly.
    pub conservation: Option<bool>,
}

/// Admissibility flags for a symmetry given per chart.
pub fn admissibility_checks(
    atlas: &Atlas,
    presentation: &LocalPresentation,
    fields: &[ProjectableVectorField],
    cfg: &EqualityConfig,
) -> Result<Admissibility> {
    let space = atlas.space();
    let n = space.n();
    let mut lie_lie_zero = true;
    let mut lies = Vec::new();
    for (f, lag) in fields.iter().zip(&presentation.lagrangians) {
        let once = variational_lie_derivative_lagrangian(f, lag, space)?.lie;
        let twice = variational_lie_derivative_lagrangian(f, &once, space)?.lie;
        lie_lie_zero &= equality::is_zero(&twice.density, cfg)?;
        lies.push(once);
    }
    let mut lie_difference_zero = true;
    let mut dh_beta_global = true;
    for (k, mu) in &presentation.differences {
        let t = &atlas.transitions()[*k];
        let f = &fields[t.from];
        let lie_mu = variational_lie_derivative_lagrangian(f, mu, space)?.lie;
        lie_difference_zero &= equality::is_zero(&lie_mu.density, cfg)?;
        let other = atlas.pullback_density(*k, &lies[t.to].density)?;
        dh_beta_global &= equals(&lies[t.from].density, &other, cfg)?.equal;
    }
    let mut conservation = Some(true);
    for ((f, lag), chart) in fields.iter().zip(&presentation.lagrangians).zip(atlas.charts()) {
        match strong_noether_current(f, lag, space, &chart.center, cfg) {
            Ok(c) => {
                let lie = lie_derivative_current(f, &c.current, space)?;
                let ok = lie.dh(space)?.equals(&HorizontalForm::zero(n, n), cfg)?;
                conservation = conservation.map(|v| v && ok);
            }
            Err(Error::NotVariationallyTrivial) => conservation = None,
            Err(e) => return Err(e),
        }
    }
    Ok(Admissibility { lie_lie_zero, lie_difference_zero, dh_beta_global, conservation })
}
