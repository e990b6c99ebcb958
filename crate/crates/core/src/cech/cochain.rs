use std::collections::BTreeMap;

use super::Atlas;
use crate::expr::EqualityConfig;
use crate::jet::HorizontalForm;
use crate::{Error, Result};

/// A Čech cochain of horizontal forms. Degree-0 entries are keyed by chart,
/// degree-1 entries by transition and degree-2 entries by triple overlap;
/// each entry is written in the coordinates of the first chart of its simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub form_degree: usize,
    pub entries: BTreeMap<usize, HorizontalForm>,
}

impl Cochain {
    pub fn new(degree: usize, form_degree: usize) -> Self {
        Cochain { degree, form_degree, entries: BTreeMap::new() }
    }

    pub fn from_charts(forms: Vec<HorizontalForm>) -> Self {
        let form_degree = forms.first().map(HorizontalForm::degree).unwrap_or(0);
        Cochain { degree: 0, form_degree, entries: forms.into_iter().enumerate().collect() }
    }

    fn entry(&self, atlas: &Atlas, k: usize) -> Result<&HorizontalForm> {
        self.entries.get(&k).ok_or_else(|| match self.degree {
            0 => Error::MissingOverlap(atlas.charts()[k].name.clone(), "-".into()),
            1 => {
                let t = &atlas.transitions()[k];
                Error::MissingOverlap(atlas.charts()[t.from].name.clone(), atlas.charts()[t.to].name.clone())
            }
            _ => Error::MissingOverlap(format!("triple {k}"), "-".into()),
        })
    }

    pub fn is_zero(&self, cfg: &EqualityConfig) -> Result<bool> {
        for f in self.entries.values() {
            if !f.equals(&HorizontalForm::zero(f.n(), f.degree()), cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `(𝔡c)_{i_0 … i_{k+1}} = Σ_l (-1)^l c_{i_0 … î_l … i_{k+1}}`, every term
/// pulled back to the chart `i_0`.
pub fn coboundary(atlas: &Atlas, c: &Cochain) -> Result<Cochain> {
    let mut out = Cochain::new(c.degree + 1, c.form_degree);
    match c.degree {
        0 => {
            for (k, t) in atlas.transitions().iter().enumerate() {
                let to = atlas.pullback_horizontal(k, c.entry(atlas, t.to)?)?;
                out.entries.insert(k, to.sub(c.entry(atlas, t.from)?));
            }
        }
        1 => {
            for (k, tri) in atlas.triples().iter().enumerate() {
                let [a, b, ac] = tri.transitions;
                let jk = atlas.pullback_horizontal(a, c.entry(atlas, b)?)?;
                out.entries.insert(k, jk.sub(c.entry(atlas, ac)?).add(c.entry(atlas, a)?));
            }
        }
        d => return Err(Error::Unsupported(format!("coboundary of degree-{d} cochains"))),
    }
    Ok(out)
}
