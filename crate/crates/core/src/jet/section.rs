use std::collections::BTreeMap;

use super::{HorizontalForm, JetSpace};
use crate::expr::{Expr, MultiIndex, Symbol};
use crate::{Error, Result};

/// A local section `u^a = σ^a(x)`, optionally tied to a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    fields: Vec<Expr>,
    chart: Option<String>,
}

impl Section {
    pub fn new(space: &JetSpace, fields: Vec<Expr>) -> Result<Self> {
        if fields.len() != space.m() {
            return Err(Error::InvalidSpace("section has the wrong number of components".into()));
        }
        for f in &fields {
            if f.symbols().iter().any(|s| matches!(s, Symbol::Jet { .. } | Symbol::Homotopy)) {
                return Err(Error::InvalidSpace("section components must depend on base coordinates only".into()));
            }
        }
        Ok(Section { fields, chart: None })
    }

    pub fn on_chart(mut self, chart: impl Into<String>) -> Self {
        self.chart = Some(chart.into());
        self
    }

    pub fn chart(&self) -> Option<&str> {
        self.chart.as_deref()
    }

    pub fn fields(&self) -> &[Expr] {
        &self.fields
    }

    /// `∂_J σ^a`.
    pub fn jet_value(&self, a: usize, multi: &MultiIndex) -> Expr {
        multi.indices().iter().fold(self.fields[a].clone(), |e, &i| e.partial(&Symbol::base(i as usize)))
    }

    /// Bindings `u^a_J ↦ ∂_J σ^a` for `|J| <= order`.
    pub fn bindings(&self, n: usize, order: usize) -> BTreeMap<Symbol, Expr> {
        let mut out = BTreeMap::new();
        for a in 0..self.fields.len() {
            for multi in MultiIndex::all_up_to(n, order) {
                let v = self.jet_value(a, &multi);
                out.insert(Symbol::jet(a, multi), v);
            }
        }
        out
    }

    /// `(j σ)^* e`.
    pub fn pullback(&self, e: &Expr, n: usize) -> Result<Expr> {
        e.substitute(&self.bindings(n, e.jet_order()))
    }

    /// `(j σ)^* ω` for a horizontal form given on `form_chart`.
    pub fn pullback_form(&self, form: &HorizontalForm, form_chart: Option<&str>) -> Result<HorizontalForm> {
        if let (Some(a), Some(b)) = (self.chart(), form_chart) {
            if a != b {
                return Err(Error::SectionChartIncompatibility(a.to_string(), b.to_string()));
            }
        }
        let binds = self.bindings(form.n(), form.jet_order());
        form.try_map(|c| c.substitute(&binds))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pullback_commutes_with_horizontal_differential() {
        let s = JetSpace::new(vec!["x".into(), "y".into()], vec!["u".into(), "v".into()], 2).unwrap();
        let sec = Section::new(&s, vec![s.parse("x^2*y").unwrap(), s.parse("sin(x*y)").unwrap()]).unwrap();
        let w = HorizontalForm::from_coeffs(
            2,
            1,
            [(vec![0], s.parse("u*v_y").unwrap()), (vec![1], s.parse("u_x^2 - v").unwrap())],
        );
        let lhs = sec.pullback_form(&w.dh(&s).unwrap(), None).unwrap();
        let rhs = sec.pullback_form(&w, None).unwrap().dh(&s).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn chart_mismatch_is_reported() {
        let s = JetSpace::new(vec!["t".into()], vec!["u".into()], 1).unwrap();
        let sec = Section::new(&s, vec![s.parse("t").unwrap()]).unwrap().on_chart("A");
        let f = HorizontalForm::function(1, s.parse("u").unwrap());
        assert!(matches!(sec.pullback_form(&f, Some("B")), Err(Error::SectionChartIncompatibility(..))));
        assert_eq!(sec.pullback_form(&f, Some("A")).unwrap().coefficient(&[]), s.parse("t").unwrap());
    }
}
