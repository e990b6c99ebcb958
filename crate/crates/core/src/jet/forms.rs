//! Horizontal forms, source forms and general coordinate forms on jet space.

use std::collections::BTreeMap;

use super::{total_derivative, JetSpace};
use crate::expr::{equality, EqualityConfig, Expr, Symbol};
use crate::Result;

/// Sorts `v`, returning the permutation sign, or `None` on a repeated entry.
pub fn sort_with_sign<T: Ord>(mut v: Vec<T>) -> Option<(Vec<T>, i64)> {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// A horizontal `p`-form `Σ_I f_I dx^I` over increasing index sets `I`.
///
/// For `p > n` there are no index sets and the form is identically zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorizontalForm {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<u8>, Expr>,
}

impl HorizontalForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        HorizontalForm { n, degree, coeffs: BTreeMap::new() }
    }

    pub fn from_coeffs(n: usize, degree: usize, coeffs: impl IntoIterator<Item = (Vec<u8>, Expr)>) -> Self {
        let mut f = HorizontalForm::zero(n, degree);
        for (k, e) in coeffs {
            f.add_to(k, e);
        }
        f
    }

    /// A 0-form.
    pub fn function(n: usize, e: Expr) -> Self {
        HorizontalForm::from_coeffs(n, 0, [(Vec::new(), e)])
    }

    /// `e · dx^1 ∧ … ∧ dx^n`.
    pub fn volume(n: usize, e: Expr) -> Self {
        HorizontalForm::from_coeffs(n, n, [((0..n as u8).collect(), e)])
    }

    /// `Σ_i J^i ω_i` with `ω_i = ∂_i ⌟ (dx^1 ∧ … ∧ dx^n)`, so that `d_H` of it is `(Σ D_i J^i) vol`.
    pub fn current(n: usize, components: &[Expr]) -> Self {
        assert_eq!(components.len(), n);
        let mut f = HorizontalForm::zero(n, n - 1);
        for (i, c) in components.iter().enumerate() {
            let key: Vec<u8> = (0..n as u8).filter(|&k| k as usize != i).collect();
            let c = if i % 2 == 0 { c.clone() } else { c.neg() };
            f.add_to(key, c);
        }
        f
    }

    /// Inverse of [`HorizontalForm::current`] for degree `n - 1` forms.
    pub fn current_components(&self) -> Vec<Expr> {
        assert_eq!(self.degree + 1, self.n);
        (0..self.n)
            .map(|i| {
                let key: Vec<u8> = (0..self.n as u8).filter(|&k| k as usize != i).collect();
                let c = self.coefficient(&key);
                if i % 2 == 0 {
                    c
                } else {
                    c.neg()
                }
            })
            .collect()
    }

    fn add_to(&mut self, key: Vec<u8>, e: Expr) {
        if e.is_zero() {
            return;
        }
        debug_assert_eq!(key.len(), self.degree);
        let entry = self.coeffs.entry(key.clone()).or_default();
        *entry = entry.add(&e);
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<u8>, Expr> {
        &self.coeffs
    }

    pub fn coefficient(&self, key: &[u8]) -> Expr {
        self.coeffs.get(key).cloned().unwrap_or_default()
    }

    /// The single coefficient of a top-degree form.
    pub fn top_coefficient(&self) -> Expr {
        assert_eq!(self.degree, self.n);
        self.coefficient(&(0..self.n as u8).collect::<Vec<_>>())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &HorizontalForm) -> HorizontalForm {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (k, e) in &other.coeffs {
            out.add_to(k.clone(), e.clone());
        }
        out
    }

    pub fn sub(&self, other: &HorizontalForm) -> HorizontalForm {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, e: &Expr) -> HorizontalForm {
        HorizontalForm::from_coeffs(self.n, self.degree, self.coeffs.iter().map(|(k, c)| (k.clone(), c.mul(e))))
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<HorizontalForm> {
        let mut out = HorizontalForm::zero(self.n, self.degree);
        for (k, c) in &self.coeffs {
            out.add_to(k.clone(), f(c)?);
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &HorizontalForm) -> HorizontalForm {
        let mut out = HorizontalForm::zero(self.n, self.degree + other.degree);
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let mut idx = k1.clone();
                idx.extend(k2.iter().copied());
                if let Some((sorted, sign)) = sort_with_sign(idx) {
                    out.add_to(sorted, c1.mul(c2).scale_int(sign));
                }
            }
        }
        out
    }

    /// Horizontal differential; raises jet order by one.
    pub fn dh(&self, space: &JetSpace) -> Result<HorizontalForm> {
        let mut out = HorizontalForm::zero(self.n, self.degree + 1);
        if self.degree >= self.n {
            return Ok(out);
        }
        for (key, c) in &self.coeffs {
            for i in 0..self.n as u8 {
                if key.contains(&i) {
                    continue;
                }
                let below = key.iter().filter(|&&k| k < i).count();
                let mut new_key = key.clone();
                new_key.insert(below, i);
                let d = total_derivative(c, i as usize, space)?;
                out.add_to(new_key, if below % 2 == 0 { d } else { d.neg() });
            }
        }
        Ok(out)
    }

    pub fn equals(&self, other: &HorizontalForm, cfg: &EqualityConfig) -> Result<bool> {
        let diff = self.sub(other);
        for c in diff.coeffs.values() {
            if !equality::is_zero(c, cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn jet_order(&self) -> usize {
        self.coeffs.values().map(Expr::jet_order).max().unwrap_or(0)
    }

    pub fn to_diff_form(&self) -> DiffForm {
        DiffForm::from_terms(
            self.degree,
            self.coeffs.iter().map(|(k, c)| (k.iter().map(|&i| Symbol::base(i as usize)).collect(), c.clone())),
        )
    }
}

/// Source form `Σ_a E_a ω^a ∧ dx^1 ∧ … ∧ dx^n`, stored by its components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceForm {
    components: Vec<Expr>,
}

impl SourceForm {
    pub fn new(components: Vec<Expr>) -> Self {
        SourceForm { components }
    }

    pub fn zero(m: usize) -> Self {
        SourceForm { components: vec![Expr::zero(); m] }
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    pub fn jet_order(&self) -> usize {
        self.components.iter().map(Expr::jet_order).max().unwrap_or(0)
    }

    /// `Σ_a v^a E_a`, the density of `v ⌟ η`.
    pub fn contract(&self, vertical: &[Expr]) -> Expr {
        self.components.iter().zip(vertical).map(|(e, v)| e.mul(v)).sum()
    }

    pub fn add(&self, other: &SourceForm) -> SourceForm {
        SourceForm::new(self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &SourceForm) -> SourceForm {
        SourceForm::new(self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn scale(&self, e: &Expr) -> SourceForm {
        SourceForm::new(self.components.iter().map(|c| c.mul(e)).collect())
    }

    pub fn equals(&self, other: &SourceForm, cfg: &EqualityConfig) -> Result<bool> {
        if self.m() != other.m() {
            return Ok(false);
        }
        for (a, b) in self.components.iter().zip(&other.components) {
            if !equality::equals(a, b, cfg)?.equal {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A differential form in coordinates: `Σ f · ds_1 ∧ … ∧ ds_k` over strictly
/// increasing lists of coordinate symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffForm {
    degree: usize,
    terms: BTreeMap<Vec<Symbol>, Expr>,
}

impl DiffForm {
    pub fn zero(degree: usize) -> Self {
        DiffForm { degree, terms: BTreeMap::new() }
    }

    pub fn scalar(e: Expr) -> Self {
        DiffForm::from_terms(0, [(Vec::new(), e)])
    }

    /// `ds`.
    pub fn differential(s: Symbol) -> Self {
        DiffForm::from_terms(1, [(vec![s], Expr::one())])
    }

    /// Builds from unsorted differential lists; reorders with signs and drops repeats.
    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (Vec<Symbol>, Expr)>) -> Self {
        let mut f = DiffForm::zero(degree);
        for (k, e) in terms {
            debug_assert_eq!(k.len(), degree);
            if let Some((sorted, sign)) = sort_with_sign(k) {
                f.add_to(sorted, e.scale_int(sign));
            }
        }
        f
    }

    fn add_to(&mut self, key: Vec<Symbol>, e: Expr) {
        if e.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_default();
        *entry = entry.add(&e);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Symbol>, Expr> {
        &self.terms
    }

    pub fn coefficient(&self, key: &[Symbol]) -> Expr {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &DiffForm) -> DiffForm {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (k, e) in &other.terms {
            out.add_to(k.clone(), e.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffForm) -> DiffForm {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, e: &Expr) -> DiffForm {
        let mut out = DiffForm::zero(self.degree);
        for (k, c) in &self.terms {
            out.add_to(k.clone(), c.mul(e));
        }
        out
    }

    pub fn wedge(&self, other: &DiffForm) -> DiffForm {
        let mut out = DiffForm::zero(self.degree + other.degree);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let mut k = k1.clone();
                k.extend(k2.iter().cloned());
                if let Some((sorted, sign)) = sort_with_sign(k) {
                    out.add_to(sorted, c1.mul(c2).scale_int(sign));
                }
            }
        }
        out
    }

    /// Exterior derivative with respect to the symbols accepted by `vars`.
    pub fn d_wrt(&self, vars: &dyn Fn(&Symbol) -> bool) -> DiffForm {
        let mut out = DiffForm::zero(self.degree + 1);
        for (k, c) in &self.terms {
            for s in c.symbols() {
                if !vars(&s) || k.contains(&s) {
                    continue;
                }
                let d = c.partial(&s);
                let mut key = vec![s];
                key.extend(k.iter().cloned());
                if let Some((sorted, sign)) = sort_with_sign(key) {
                    out.add_to(sorted, d.scale_int(sign));
                }
            }
        }
        out
    }

    /// Contraction with the coordinate vector field `∂/∂s`.
    pub fn interior(&self, s: &Symbol) -> DiffForm {
        let mut out = DiffForm::zero(self.degree.saturating_sub(1));
        for (k, c) in &self.terms {
            if let Some(p) = k.iter().position(|x| x == s) {
                let mut key = k.clone();
                key.remove(p);
                out.add_to(key, if p % 2 == 0 { c.clone() } else { c.neg() });
            }
        }
        out
    }

    /// Exterior derivative on jet space (base, field and jet coordinates).
    pub fn d(&self) -> DiffForm {
        self.d_wrt(&Symbol::is_coordinate)
    }

    /// Pulls back along `s ↦ map[s]` (symbols not in `map` are fixed); the
    /// differentials of the images are taken with respect to `vars`.
    pub fn pullback(&self, map: &BTreeMap<Symbol, Expr>, vars: &dyn Fn(&Symbol) -> bool) -> Result<DiffForm> {
        let mut out = DiffForm::zero(self.degree);
        let mut images: BTreeMap<Symbol, DiffForm> = BTreeMap::new();
        'terms: for (k, c) in &self.terms {
            let mut acc = DiffForm::scalar(c.substitute(map)?);
            for s in k {
                let img = images
                    .entry(s.clone())
                    .or_insert_with(|| match map.get(s) {
                        Some(e) => DiffForm::scalar(e.clone()).d_wrt(vars),
                        None => DiffForm::differential(s.clone()),
                    })
                    .clone();
                acc = acc.wedge(&img);
                if acc.is_zero() {
                    continue 'terms;
                }
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// The horizontal part: `du^a_J ↦ u^a_{J+i} dx^i`. Degrees above `n` vanish.
    pub fn horizontalize(&self, space: &JetSpace) -> HorizontalForm {
        let n = space.n();
        let mut out = HorizontalForm::zero(n, self.degree);
        for (k, c) in &self.terms {
            let mut acc = HorizontalForm::function(n, c.clone());
            for s in k {
                let h = match s {
                    Symbol::Base(i) => HorizontalForm::from_coeffs(n, 1, [(vec![*i], Expr::one())]),
                    Symbol::Jet { field, multi } => HorizontalForm::from_coeffs(
                        n,
                        1,
                        (0..n as u8).map(|i| (vec![i], Expr::symbol(Symbol::Jet { field: *field, multi: multi.with(i) }))),
                    ),
                    _ => HorizontalForm::zero(n, 1),
                };
                acc = acc.wedge(&h);
                if acc.is_zero() {
                    break;
                }
            }
            if acc.degree() == self.degree {
                out = out.add(&acc);
            }
        }
        out
    }

    pub fn equals(&self, other: &DiffForm, cfg: &EqualityConfig) -> Result<bool> {
        let diff = self.sub(other);
        for c in diff.terms.values() {
            if !equality::is_zero(c, cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Jet symbols with nonempty multi-index that appear as coefficients or differentials.
    pub fn jet_symbols(&self) -> Vec<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        for (k, c) in &self.terms {
            for s in k.iter().cloned().chain(c.symbols()) {
                if let Symbol::Jet { multi, .. } = &s {
                    if !multi.is_empty() {
                        out.insert(s);
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::EqualityConfig;

    fn s1() -> JetSpace {
        JetSpace::new(vec!["t".into()], vec!["u".into()], 2).unwrap()
    }
    fn s2() -> JetSpace {
        JetSpace::new(vec!["x".into(), "y".into()], vec!["u".into(), "v".into()], 2).unwrap()
    }

    #[test]
    fn dh_of_half_u_squared() {
        let s = s1();
        let f = HorizontalForm::function(1, s.parse("1/2*u^2").unwrap());
        let d = f.dh(&s).unwrap();
        assert_eq!(d.top_coefficient(), s.parse("u*u_t").unwrap());
    }

    #[test]
    fn dh_squares_to_zero_in_two_dimensions() {
        let s = s2();
        let f = HorizontalForm::function(2, s.parse("u*v_x + x*y*u^2").unwrap());
        let dd = f.dh(&s).unwrap().dh(&s).unwrap();
        assert!(dd.is_zero());
    }

    #[test]
    fn dh_of_one_form_by_hand() {
        // ω = u v_y dx - u v_x dy ; dH ω = (D_x(-u v_x) - D_y(u v_y)) dx∧dy
        let s = s2();
        let w = HorizontalForm::from_coeffs(
            2,
            1,
            [(vec![0], s.parse("u*v_y").unwrap()), (vec![1], s.parse("-u*v_x").unwrap())],
        );
        let d = w.dh(&s).unwrap();
        let hand = s.parse("-(u_x*v_x + u*v_xx) - (u_y*v_y + u*v_yy)").unwrap();
        assert_eq!(d.top_coefficient(), hand);
    }

    #[test]
    fn top_degree_dh_is_zero() {
        let s = s1();
        let v = HorizontalForm::volume(1, s.parse("u_t").unwrap());
        let d = v.dh(&s).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.degree(), 2);
    }

    #[test]
    fn current_round_trip_and_divergence() {
        let s = s2();
        let comps = vec![s.parse("u").unwrap(), s.parse("v").unwrap()];
        let c = HorizontalForm::current(2, &comps);
        assert_eq!(c.current_components(), comps);
        assert_eq!(c.dh(&s).unwrap().top_coefficient(), s.parse("u_x + v_y").unwrap());
    }

    #[test]
    fn horizontalize_examples() {
        let s = s1();
        let du = DiffForm::differential(Symbol::field(0));
        let h = du.horizontalize(&s);
        assert_eq!(h.coefficient(&[0]), s.parse("u_t").unwrap());
        let dt = DiffForm::differential(Symbol::base(0));
        let h2 = du.wedge(&dt).horizontalize(&s);
        assert!(h2.is_zero());

        // u_x du ∧ dy - dx ∧ du on n = 2
        let s = s2();
        let ux = Expr::jet(0, &[0]);
        let dy = DiffForm::differential(Symbol::base(1));
        let dx = DiffForm::differential(Symbol::base(0));
        let form = du.scale(&ux).wedge(&dy).sub(&dx.wedge(&du));
        let h = form.horizontalize(&s);
        // direct expansion: u_x (u_x dx + u_y dy)∧dy - dx∧(u_x dx + u_y dy) = u_x^2 dx∧dy - u_y dx∧dy
        assert_eq!(h.top_coefficient(), s.parse("u_x^2 - u_y").unwrap());
    }

    #[test]
    fn d_squares_to_zero() {
        let s = s2();
        let f = DiffForm::scalar(s.parse("u*v_x*sin(x)").unwrap()).d();
        assert!(f.d().is_zero());
        let one = DiffForm::differential(Symbol::field(0)).scale(&s.parse("v^2*y").unwrap());
        assert!(one.d().d().is_zero());
    }

    #[test]
    fn horizontalization_intertwines_d_and_dh() {
        let s = s2();
        let f = s.parse("u*v + x*u_y").unwrap();
        let lhs = DiffForm::scalar(f.clone()).d().horizontalize(&s);
        let rhs = HorizontalForm::function(2, f).dh(&s).unwrap();
        assert!(lhs.equals(&rhs, &EqualityConfig::default()).unwrap());
    }
}
