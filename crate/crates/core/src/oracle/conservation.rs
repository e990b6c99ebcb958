//! On-shell drift of a current along numerically integrated solutions (`n = 1`).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cech::jet_coordinates;
use crate::expr::{Compiled, Expr, MultiIndex, Symbol};
use crate::jet::JetSpace;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ConservationConfig {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl Default for ConservationConfig {
    fn default() -> Self {
        ConservationConfig { t0: 0.0, t1: 10.0, step: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    pub initial_value: f64,
    pub max_drift: f64,
    pub steps: usize,
}

/// The equations `E_a = 0` solved for the highest derivative of each field.
struct System {
    /// Highest `t`-derivative of each field appearing in the equations.
    orders: Vec<usize>,
    vars: Vec<Symbol>,
    equations: Vec<Compiled>,
    current: Compiled,
    consts: Vec<f64>,
    /// Slot of `u^a_{(j)}` in `vars`.
    slot: Vec<Vec<usize>>,
}

impl System {
    fn values(&self, t: f64, y: &[Vec<f64>], top: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.vars.len()];
        v[0] = t;
        for (a, ys) in y.iter().enumerate() {
            for (j, val) in ys.iter().enumerate() {
                v[self.slot[a][j]] = *val;
            }
            v[self.slot[a][self.orders[a]]] = top[a];
        }
        v.extend(&self.consts);
        v
    }

    fn residual(&self, t: f64, y: &[Vec<f64>], top: &[f64]) -> Vec<f64> {
        let v = self.values(t, y, top);
        self.equations.iter().map(|e| e.eval(&v)).collect()
    }

    /// Newton iteration with a difference-quotient Jacobian.
    fn solve_top(&self, t: f64, y: &[Vec<f64>], guess: &[f64]) -> Result<Vec<f64>> {
        let m = guess.len();
        let mut z = guess.to_vec();
        for _ in 0..50 {
            let r = self.residual(t, y, &z);
            let norm = r.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if !norm.is_finite() {
                return Err(Error::Integrator(format!("equations not finite at t = {t}")));
            }
            let mut jac = vec![vec![0.0; m]; m];
            for b in 0..m {
                let h = 1e-7 * z[b].abs().max(1.0);
                let mut zp = z.clone();
                zp[b] += h;
                let rp = self.residual(t, y, &zp);
                for a in 0..m {
                    jac[a][b] = (rp[a] - r[a]) / h;
                }
            }
            let dz = solve_linear(jac, r.iter().map(|x| -x).collect())
                .ok_or_else(|| Error::Integrator(format!("equations are singular in the top derivatives at t = {t}")))?;
            let step = dz.iter().map(|x| x.abs()).fold(0.0, f64::max);
            for (zi, d) in z.iter_mut().zip(&dz) {
                *zi += d;
            }
            if step <= 1e-14 * z.iter().map(|x| x.abs()).fold(1.0, f64::max) {
                return Ok(z);
            }
        }
        let r = self.residual(t, y, &z);
        if r.iter().all(|x| x.abs() < 1e-10) {
            Ok(z)
        } else {
            Err(Error::Integrator(format!("Newton iteration did not converge at t = {t}")))
        }
    }

    fn rhs(&self, t: f64, y: &[Vec<f64>], guess: &mut Vec<f64>) -> Result<Vec<Vec<f64>>> {
        let top = self.solve_top(t, y, guess)?;
        *guess = top.clone();
        Ok(y.iter()
            .enumerate()
            .map(|(a, ys)| (0..ys.len()).map(|j| if j + 1 < ys.len() { ys[j + 1] } else { top[a] }).collect())
            .collect())
    }
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn axpy(y: &[Vec<f64>], k: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    y.iter().zip(k).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + h * q).collect()).collect()
}

/// Integrates `E_a = 0` with the classical fourth-order Runge-Kutta method
/// from `initial[a] = (u^a, u^a_t, …)` and returns the largest change of the current.
pub fn conservation_check(
    current: &Expr,
    source: &[Expr],
    space: &JetSpace,
    constants: &BTreeMap<String, f64>,
    initial: &[Vec<f64>],
    cfg: &ConservationConfig,
) -> Result<ConservationReport> {
    if space.n() != 1 {
        return Err(Error::Unsupported("the integrator path needs a one-dimensional base".into()));
    }
    let m = space.m();
    if source.len() != m || initial.len() != m {
        return Err(Error::Schema("one equation and one set of initial data per field are required".into()));
    }
    let mut orders = vec![0; m];
    for e in source {
        for s in e.symbols() {
            if let Symbol::Jet { field, multi } = s {
                orders[field as usize] = orders[field as usize].max(multi.order());
            }
        }
    }
    for (a, k) in orders.iter().enumerate() {
        if *k == 0 {
            return Err(Error::Unsupported(format!("field {a} has no derivatives in the equations")));
        }
        if initial[a].len() != *k {
            return Err(Error::Schema(format!("field {a} needs {k} initial values")));
        }
    }
    let max_order = *orders.iter().max().unwrap();
    if current.jet_order() > max_order {
        return Err(Error::Unsupported("the current involves derivatives above the order of the equations".into()));
    }
    let vars = jet_coordinates(space, max_order);
    let slot: Vec<Vec<usize>> = (0..m)
        .map(|a| {
            (0..=max_order)
                .map(|j| vars.iter().position(|s| *s == Symbol::jet(a, MultiIndex::new(vec![0; j]))).unwrap())
                .collect()
        })
        .collect();
    let const_syms: Vec<Symbol> = constants.keys().map(|k| Symbol::constant(k)).collect();
    let mut slots = vars.clone();
    slots.extend(const_syms);
    let compile = |e: &Expr| {
        Compiled::with_slots(e, &slots).ok_or_else(|| Error::UnknownCoordinate(format!("unbound symbol in {}", space.render(e))))
    };
    let system = System {
        orders: orders.clone(),
        equations: source.iter().map(compile).collect::<Result<_>>()?,
        current: compile(current)?,
        vars,
        consts: constants.values().copied().collect(),
        slot,
    };
    // derivatives above a field's own order cannot be referenced
    for (a, k) in orders.iter().enumerate() {
        for e in source.iter().chain(std::iter::once(current)) {
            if e.symbols().iter().any(|s| matches!(s, Symbol::Jet { field, multi } if *field as usize == a && multi.order() > *k)) {
                return Err(Error::Unsupported(format!("field {a} appears above its equation order")));
            }
        }
    }
    let steps = ((cfg.t1 - cfg.t0) / cfg.step).round() as usize;
    let h = (cfg.t1 - cfg.t0) / steps as f64;
    let mut y: Vec<Vec<f64>> = initial.to_vec();
    let mut guess = vec![0.0; m];
    let mut t = cfg.t0;
    let current_at = |t: f64, y: &[Vec<f64>], guess: &mut Vec<f64>| -> Result<f64> {
        let top = system.solve_top(t, y, guess)?;
        *guess = top.clone();
        Ok(system.current.eval(&system.values(t, y, &top)))
    };
    let initial_value = current_at(t, &y, &mut guess)?;
    let mut max_drift: f64 = 0.0;
    for _ in 0..steps {
        let k1 = system.rhs(t, &y, &mut guess)?;
        let k2 = system.rhs(t + h / 2.0, &axpy(&y, &k1, h / 2.0), &mut guess)?;
        let k3 = system.rhs(t + h / 2.0, &axpy(&y, &k2, h / 2.0), &mut guess)?;
        let k4 = system.rhs(t + h, &axpy(&y, &k3, h), &mut guess)?;
        for a in 0..m {
            for j in 0..y[a].len() {
                y[a][j] += h / 6.0 * (k1[a][j] + 2.0 * k2[a][j] + 2.0 * k3[a][j] + k4[a][j]);
            }
        }
        t += h;
        let c = current_at(t, &y, &mut guess)?;
        max_drift = max_drift.max((c - initial_value).abs());
    }
    Ok(ConservationReport { initial_value, max_drift, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free() -> JetSpace {
        JetSpace::new(vec!["t".into()], vec!["u".into()], 2).unwrap()
    }

    #[test]
    fn momentum_and_energy_are_conserved() {
        let s = free();
        let eq = [s.parse("-u_tt").unwrap()];
        for current in ["u_t", "-1/2*u_t^2"] {
            let r = conservation_check(&s.parse(current).unwrap(), &eq, &s, &BTreeMap::new(), &[vec![0.3, 1.7]], &Default::default())
                .unwrap();
            assert!(r.max_drift < 1e-8, "{current}: {r:?}");
        }
    }

    #[test]
    fn position_is_not_conserved() {
        let s = free();
        let r = conservation_check(&s.parse("u").unwrap(), &[s.parse("-u_tt").unwrap()], &s, &BTreeMap::new(), &[vec![0.0, 1.0]], &Default::default())
            .unwrap();
        assert!(r.max_drift > 1.0);
    }

    #[test]
    fn oscillator_energy_drift_is_small() {
        let s = free();
        let eq = [s.parse("-u_tt - u").unwrap()];
        let r = conservation_check(
            &s.parse("1/2*u_t^2 + 1/2*u^2").unwrap(),
            &eq,
            &s,
            &BTreeMap::new(),
            &[vec![1.0, 0.0]],
            &Default::default(),
        )
        .unwrap();
        assert!(r.max_drift < 1e-10, "{r:?}");
    }
}
