//! Variational-sequence operators on a single chart.

mod euler;
mod inverse;
mod lepage;
mod noether;

pub use euler::{euler_lagrange, helmholtz_check, HelmholtzReport, Residual};
pub use inverse::{dh_homotopy, tonti_lagrangian, Center};
pub use lepage::poincare_cartan;
pub use noether::{
    canonical_current, lie_derivative_current, noether_bessel_hagen_current, noether_data,
    strong_noether_current, variational_lie_derivative_lagrangian, variational_lie_derivative_source,
    LieDerivative, NoetherCurrent, NoetherData,
};

use crate::expr::Expr;
use crate::jet::HorizontalForm;

/// A Lagrangian `L dx^1 ∧ … ∧ dx^n` on one chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lagrangian {
    pub density: Expr,
    pub chart: Option<String>,
}

impl Lagrangian {
    pub fn new(density: Expr) -> Self {
        Lagrangian { density, chart: None }
    }

    pub fn on_chart(mut self, chart: impl Into<String>) -> Self {
        self.chart = Some(chart.into());
        self
    }

    pub fn order(&self) -> usize {
        self.density.jet_order()
    }

    pub fn to_form(&self, n: usize) -> HorizontalForm {
        HorizontalForm::volume(n, self.density.clone())
    }

    /// Lagrangian of a top-degree horizontal form.
    pub fn from_form(form: &HorizontalForm) -> Self {
        Lagrangian::new(form.top_coefficient())
    }
}
