//! Exact symbolic scalars over jet coordinates.
//!
//! An [`Expr`] is kept in canonical sum-of-products form at all times: a map
//! from [`Monomial`]s to nonzero rational coefficients. Every constructor and
//! arithmetic operation re-establishes the canonical form, so structural
//! equality of two expressions implies mathematical equality. The converse
//! only holds for the polynomial fragment; see [`equality`] for the sampled
//! fallback used when transcendental atoms or reciprocals are present.
//!
//! Normalization rules:
//! - multi-indices of jet symbols are sorted, so `u_{xy}` and `u_{yx}` coincide;
//! - all `exp` factors of a monomial are merged into one `exp` of the summed argument;
//! - `sin(θ)^k` with `k >= 2` is rewritten through `sin² = 1 - cos²`, leaving
//!   sine powers in `{0, 1}`;
//! - odd/even symmetry: `sin(-θ) = -sin(θ)`, `cos(-θ) = cos(θ)`, keyed on the
//!   sign of the leading coefficient of `θ`;
//! - the reciprocal of a sum is an atom `Recip(S)` with `S` scaled so that its
//!   leading coefficient is one.

mod calculus;
mod display;
pub mod equality;
mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

pub use display::{DisplayExpr, SymbolNames};
pub use equality::{equals, EqualityConfig, EqualityPath, Equality};
pub use eval::Compiled;
pub use parse::parse;

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Sorted list of base indices. Sorting makes mixed partials symmetric.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(SmallVec<[u8; 4]>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(SmallVec::new())
    }

    pub fn new(mut indices: Vec<u8>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices.into_iter().collect())
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    /// `J + i`.
    pub fn with(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        let pos = v.iter().position(|&k| k > i).unwrap_or(v.len());
        v.insert(pos, i);
        MultiIndex(v)
    }

    /// `J - i`, if `i` occurs in `J`.
    pub fn without(&self, i: u8) -> Option<Self> {
        let pos = self.0.iter().position(|&k| k == i)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(MultiIndex(v))
    }

    /// Number of occurrences of each index in `0..n`.
    pub fn counts(&self, n: usize) -> Vec<u32> {
        let mut c = vec![0; n];
        for &i in &self.0 {
            c[i as usize] += 1;
        }
        c
    }

    /// All sub-multisets `K ⊆ J` together with the Leibniz factor `Π binom(J_i, K_i)`.
    pub fn sub_multisets(&self, n: usize) -> Vec<(MultiIndex, u64)> {
        let counts = self.counts(n);
        let mut out = vec![(Vec::new(), 1u64)];
        for (i, &c) in counts.iter().enumerate() {
            let mut next = Vec::new();
            for (prefix, w) in &out {
                for k in 0..=c {
                    let mut p = prefix.clone();
                    p.extend(std::iter::repeat(i as u8).take(k as usize));
                    next.push((p, w * binomial(c as u64, k as u64)));
                }
            }
            out = next;
        }
        out.into_iter().map(|(v, w)| (MultiIndex::new(v), w)).collect()
    }

    /// Multiset difference `J \ K`; `K` must be contained in `J`.
    pub fn minus(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = self.clone();
        for &i in other.indices() {
            out = out.without(i).expect("sub-multiset");
        }
        out
    }

    /// All sorted multi-indices over `n` base indices with order `0..=max_order`.
    pub fn all_up_to(n: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        let mut frontier = vec![MultiIndex::empty()];
        for _ in 0..max_order {
            let mut next = Vec::new();
            for j in &frontier {
                let start = j.0.last().copied().unwrap_or(0);
                for i in start..n as u8 {
                    next.push(j.with(i));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Symbols of the expression language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Base coordinate `x^i`.
    Base(u8),
    /// Field coordinate `u^a` (empty multi-index) or jet coordinate `u^a_J`.
    Jet { field: u8, multi: MultiIndex },
    /// Homotopy parameter `@t` used by fiber homotopies.
    Homotopy,
    /// Named constant or auxiliary parameter.
    Const(Arc<str>),
}

impl Symbol {
    pub fn base(i: usize) -> Self {
        Symbol::Base(i as u8)
    }

    pub fn field(a: usize) -> Self {
        Symbol::Jet { field: a as u8, multi: MultiIndex::empty() }
    }

    pub fn jet(a: usize, multi: MultiIndex) -> Self {
        Symbol::Jet { field: a as u8, multi }
    }

    pub fn constant(name: &str) -> Self {
        Symbol::Const(Arc::from(name))
    }

    pub fn jet_order(&self) -> usize {
        match self {
            Symbol::Jet { multi, .. } => multi.order(),
            _ => 0,
        }
    }

    /// Coordinates on the jet space: base, field and jet symbols.
    pub fn is_coordinate(&self) -> bool {
        matches!(self, Symbol::Base(_) | Symbol::Jet { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(Symbol),
    Func(Func, Expr),
    /// `1 / S` for a sum `S` with at least two terms and unit leading coefficient.
    Recip(Expr),
}

/// Product of atoms raised to nonzero integer powers, sorted by atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn power_of(&self, atom: &Atom) -> i32 {
        self.0.iter().find(|(a, _)| a == atom).map(|(_, e)| *e).unwrap_or(0)
    }

    /// The monomial with `atom` removed.
    pub fn without(&self, atom: &Atom) -> Monomial {
        Monomial(self.0.iter().filter(|(a, _)| a != atom).cloned().collect())
    }
}

/// Canonical exact expression.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: Arc<BTreeMap<Monomial, Rational>>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn int(v: i64) -> Self {
        Expr::constant(Rational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Expr::constant(rational(num, den))
    }

    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            return Expr::zero();
        }
        let mut m = BTreeMap::new();
        m.insert(Monomial::one(), c);
        Expr { terms: Arc::new(m) }
    }

    pub fn symbol(s: Symbol) -> Self {
        Expr::from_monomial(Monomial(vec![(Atom::Sym(s), 1)]), Rational::one())
    }

    pub fn base(i: usize) -> Self {
        Expr::symbol(Symbol::base(i))
    }

    pub fn field(a: usize) -> Self {
        Expr::symbol(Symbol::field(a))
    }

    pub fn jet(a: usize, multi: &[u8]) -> Self {
        Expr::symbol(Symbol::jet(a, MultiIndex::new(multi.to_vec())))
    }

    pub fn homotopy() -> Self {
        Expr::symbol(Symbol::Homotopy)
    }

    pub fn named(name: &str) -> Self {
        Expr::symbol(Symbol::constant(name))
    }

    fn from_monomial(m: Monomial, c: Rational) -> Self {
        if c.is_zero() {
            return Expr::zero();
        }
        let mut map = BTreeMap::new();
        map.insert(m, c);
        Expr { terms: Arc::new(map) }
    }

    fn from_map(mut map: BTreeMap<Monomial, Rational>) -> Self {
        map.retain(|_, c| !c.is_zero());
        Expr { terms: Arc::new(map) }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value if the expression is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn sin(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::zero();
        }
        if arg.leading_negative() {
            return Expr::atom(Atom::Func(Func::Sin, arg.neg())).neg();
        }
        Expr::atom(Atom::Func(Func::Sin, arg))
    }

    pub fn cos(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        if arg.leading_negative() {
            return Expr::atom(Atom::Func(Func::Cos, arg.neg()));
        }
        Expr::atom(Atom::Func(Func::Cos, arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        Expr::atom(Atom::Func(Func::Exp, arg))
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        match f {
            Func::Sin => Expr::sin(arg),
            Func::Cos => Expr::cos(arg),
            Func::Exp => Expr::exp(arg),
        }
    }

    fn atom(a: Atom) -> Expr {
        Expr::from_monomial(Monomial(vec![(a, 1)]), Rational::one())
    }

    fn leading_negative(&self) -> bool {
        self.terms.values().next().map(|c| c.is_negative()).unwrap_or(false)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let mut map = (*self.terms).clone();
        for (m, c) in other.terms.iter() {
            add_term(&mut map, m.clone(), c.clone());
        }
        Expr::from_map(map)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr::from_map(self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect())
    }

    pub fn scale_int(&self, k: i64) -> Expr {
        self.scale(&Rational::from_integer(BigInt::from(k)))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut map = BTreeMap::new();
        for (m1, c1) in self.terms.iter() {
            for (m2, c2) in other.terms.iter() {
                let prod = multiply_monomials(m1, m2);
                let coeff = c1 * c2;
                for (m, c) in prod.terms.iter() {
                    add_term(&mut map, m.clone(), c * &coeff);
                }
            }
        }
        Expr::from_map(map)
    }

    /// Integer power. Negative powers of zero are a division by zero.
    pub fn pow(&self, k: i32) -> crate::Result<Expr> {
        if k < 0 {
            return self.recip()?.pow(-k);
        }
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    pub fn recip(&self) -> crate::Result<Expr> {
        match self.terms.len() {
            0 => Err(crate::Error::DivisionByZero),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                let inv = Monomial(m.0.iter().map(|(a, e)| (a.clone(), -e)).collect());
                Ok(normalize_monomial(inv.0).scale(&c.recip()))
            }
            _ => {
                let lead = self.terms.values().next().unwrap().clone();
                let monic = self.scale(&lead.recip());
                Ok(Expr::atom(Atom::Recip(monic)).scale(&lead.recip()))
            }
        }
    }

    pub fn div(&self, other: &Expr) -> crate::Result<Expr> {
        Ok(self.mul(&other.recip()?))
    }

    /// Re-normalizes every term from scratch. Idempotent, and the identity on
    /// values produced by this module's constructors.
    pub fn canonical_form(&self) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in self.terms.iter() {
            let mut term = Expr::constant(c.clone());
            for (a, e) in &m.0 {
                let rebuilt = match a {
                    Atom::Sym(s) => Expr::symbol(s.clone()),
                    Atom::Func(f, arg) => Expr::apply(*f, arg.canonical_form()),
                    Atom::Recip(s) => s.canonical_form().recip().expect("nonzero sum"),
                };
                term = term.mul(&rebuilt.pow(*e).expect("nonzero atom"));
            }
            out = out.add(&term);
        }
        out
    }

    /// All symbols occurring anywhere in the expression, including inside function arguments.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                match a {
                    Atom::Sym(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Func(_, e) | Atom::Recip(e) => e.collect_symbols(out),
                }
            }
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.terms.keys().any(|m| {
            m.0.iter().any(|(a, _)| match a {
                Atom::Sym(x) => x == s,
                Atom::Func(_, e) | Atom::Recip(e) => e.contains(s),
            })
        })
    }

    /// Highest jet order among the symbols, or zero.
    pub fn jet_order(&self) -> usize {
        self.symbols().iter().map(Symbol::jet_order).max().unwrap_or(0)
    }

    /// True when the expression is a polynomial: no functions, reciprocals or negative powers.
    pub fn is_polynomial(&self) -> bool {
        self.terms
            .keys()
            .all(|m| m.0.iter().all(|(a, e)| matches!(a, Atom::Sym(_)) && *e > 0))
    }

    /// Degree as a polynomial in `s`, if the expression is polynomial in `s`
    /// (other atoms may be arbitrary as long as they do not contain `s`).
    pub fn degree_in(&self, s: &Symbol) -> Option<i32> {
        let target = Atom::Sym(s.clone());
        let mut deg = 0;
        for m in self.terms.keys() {
            for (a, e) in &m.0 {
                if *a == target {
                    if *e < 0 {
                        return None;
                    }
                    deg = deg.max(*e);
                } else if let Atom::Func(_, inner) | Atom::Recip(inner) = a {
                    if inner.contains(s) {
                        return None;
                    }
                }
            }
        }
        Some(deg)
    }

    /// Splits into `Σ_k coeff_k · s^k` for an expression polynomial in `s`.
    pub fn coefficients_in(&self, s: &Symbol) -> Option<BTreeMap<i32, Expr>> {
        self.degree_in(s)?;
        let target = Atom::Sym(s.clone());
        let mut out: BTreeMap<i32, Expr> = BTreeMap::new();
        for (m, c) in self.terms.iter() {
            let k = m.power_of(&target);
            let rest = Expr::from_monomial(m.without(&target), c.clone());
            let entry = out.entry(k).or_default();
            *entry = entry.add(&rest);
        }
        Some(out)
    }

    pub fn to_f64_constant(&self) -> Option<f64> {
        self.as_constant().and_then(|c| c.to_f64())
    }
}

fn add_term(map: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
    use std::collections::btree_map::Entry;
    match map.entry(m) {
        Entry::Occupied(mut o) => {
            let v = o.get() + &c;
            if v.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = v;
            }
        }
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
    }
}

fn multiply_monomials(a: &Monomial, b: &Monomial) -> Expr {
    let mut raw = a.0.clone();
    raw.extend(b.0.iter().cloned());
    normalize_monomial(raw)
}

/// Canonicalizes a raw product of atoms; the result may be a sum because of
/// the sine-square rewrite and reciprocal cancellation.
fn normalize_monomial(raw: Vec<(Atom, i32)>) -> Expr {
    let mut powers: BTreeMap<Atom, i32> = BTreeMap::new();
    for (a, e) in raw {
        *powers.entry(a).or_insert(0) += e;
    }
    powers.retain(|_, e| *e != 0);

    // merge exponentials
    let mut exp_arg = Expr::zero();
    let mut has_exp = false;
    powers.retain(|a, e| {
        if let Atom::Func(Func::Exp, arg) = a {
            exp_arg = exp_arg.add(&arg.scale_int(*e as i64));
            has_exp = true;
            false
        } else {
            true
        }
    });

    let mut extra = Expr::one();
    if has_exp && !exp_arg.is_zero() {
        powers.insert(Atom::Func(Func::Exp, exp_arg), 1);
    }

    // negative powers of a reciprocal are plain powers of the sum
    let recips: Vec<(Atom, i32)> = powers
        .iter()
        .filter(|(a, e)| matches!(a, Atom::Recip(_)) && **e < 0)
        .map(|(a, e)| (a.clone(), *e))
        .collect();
    for (a, e) in recips {
        powers.remove(&a);
        if let Atom::Recip(s) = a {
            extra = extra.mul(&s.pow(-e).expect("positive power"));
        }
    }

    // sin^k, k >= 2  ->  sin^(k mod 2) (1 - cos^2)^(k/2)
    let sines: Vec<(Atom, i32)> = powers
        .iter()
        .filter(|(a, e)| matches!(a, Atom::Func(Func::Sin, _)) && **e >= 2)
        .map(|(a, e)| (a.clone(), *e))
        .collect();
    for (a, e) in sines {
        if e % 2 == 1 {
            powers.insert(a.clone(), 1);
        } else {
            powers.remove(&a);
        }
        if let Atom::Func(_, theta) = &a {
            let cos2 = Expr::cos(theta.clone()).pow(2).expect("positive power");
            let factor = Expr::one().sub(&cos2).pow(e / 2).expect("positive power");
            extra = extra.mul(&factor);
        }
    }

    let base = Expr::from_monomial(Monomial(powers.into_iter().collect()), Rational::one());
    if extra.as_constant().map(|c| c.is_one()).unwrap_or(false) {
        base
    } else {
        base.mul(&extra)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| acc.add(&e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_is_symmetric() {
        assert_eq!(MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1]));
        assert_eq!(Expr::jet(0, &[0, 1]), Expr::jet(0, &[1, 0]));
    }

    #[test]
    fn pythagorean_rewrite() {
        let u = Expr::field(0);
        let s = Expr::sin(u.clone()).pow(2).unwrap();
        let c = Expr::cos(u).pow(2).unwrap();
        assert!(s.add(&c).sub(&Expr::one()).is_zero());
    }

    #[test]
    fn exponentials_merge() {
        let u = Expr::field(0);
        let x = Expr::base(0);
        let p = Expr::exp(u.clone()).mul(&Expr::exp(x.clone()));
        assert_eq!(p, Expr::exp(u.add(&x)));
        let q = Expr::exp(u.clone()).mul(&Expr::exp(u.neg()));
        assert_eq!(q, Expr::one());
    }

    #[test]
    fn odd_even_symmetry() {
        let u = Expr::field(0);
        assert_eq!(Expr::sin(u.neg()), Expr::sin(u.clone()).neg());
        assert_eq!(Expr::cos(u.neg()), Expr::cos(u));
    }

    #[test]
    fn reciprocal_cancels_against_its_power() {
        let s = Expr::one().add(&Expr::field(0).pow(2).unwrap());
        let r = s.recip().unwrap();
        assert_eq!(r.pow(-1).unwrap(), s);
        let m = Expr::field(0).scale_int(3);
        assert_eq!(m.recip().unwrap().mul(&m), Expr::one());
    }

    #[test]
    fn sub_multisets_carry_binomials() {
        let j = MultiIndex::new(vec![0, 0, 1]);
        let subs = j.sub_multisets(2);
        assert_eq!(subs.len(), 6);
        let w: u64 = subs.iter().map(|(_, w)| w).sum();
        assert_eq!(w, 8); // 2^|J|
    }

    #[test]
    fn all_multi_indices() {
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 1 + 2 + 3);
        assert_eq!(MultiIndex::all_up_to(1, 3).len(), 4);
    }
}
