use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use super::{Atom, Expr, Func, Monomial, Rational, Symbol};
use crate::{Error, Result};

impl Expr {
    /// Formal partial derivative, all other symbols independent.
    pub fn partial(&self, s: &Symbol) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in self.terms() {
            for (i, (atom, e)) in m.factors().iter().enumerate() {
                let d_atom = atom_partial(atom, s);
                if d_atom.is_zero() {
                    continue;
                }
                // e * atom^(e-1) * d_atom * rest
                let mut rest: Vec<(Atom, i32)> = m.factors().to_vec();
                if *e == 1 {
                    rest.remove(i);
                } else {
                    rest[i].1 = e - 1;
                }
                let rest = Expr::from_raw(rest).scale(c).scale_int(*e as i64);
                out = out.add(&rest.mul(&d_atom));
            }
        }
        out
    }

    /// Simultaneous substitution followed by canonicalization.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let mut out = Expr::zero();
        for (m, c) in self.terms() {
            let mut term = Expr::constant(c.clone());
            for (atom, e) in m.factors() {
                let a = match atom {
                    Atom::Sym(sym) => match bindings.get(sym) {
                        Some(v) => v.clone(),
                        None => Expr::symbol(sym.clone()),
                    },
                    Atom::Func(f, arg) => Expr::apply(*f, arg.substitute(bindings)?),
                    Atom::Recip(sum) => sum.substitute(bindings)?.recip()?,
                };
                term = term.mul(&a.pow(*e)?);
                if term.is_zero() {
                    break;
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn substitute_one(&self, s: &Symbol, v: &Expr) -> Result<Expr> {
        let mut b = BTreeMap::new();
        b.insert(s.clone(), v.clone());
        self.substitute(&b)
    }

    /// Exact `∫₀¹ e dt` over the homotopy parameter `@t`.
    pub fn integrate_t(&self) -> Result<Expr> {
        let t = Symbol::Homotopy;
        let coeffs = self.coefficients_in(&t).ok_or(Error::NonPolynomialInT)?;
        let mut out = Expr::zero();
        for (k, c) in coeffs {
            let w = BigRational::new(1.into(), (k as i64 + 1).into());
            out = out.add(&c.scale(&w));
        }
        Ok(out)
    }

    pub(super) fn from_raw(raw: Vec<(Atom, i32)>) -> Expr {
        if raw.is_empty() {
            return Expr::one();
        }
        super::normalize_monomial(raw)
    }

    /// The coefficient-1 expression of a single monomial.
    pub fn monomial(m: &Monomial) -> Expr {
        Expr::from_raw(m.factors().to_vec()).scale(&Rational::one())
    }
}

fn atom_partial(atom: &Atom, s: &Symbol) -> Expr {
    match atom {
        Atom::Sym(x) => {
            if x == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Func(f, arg) => {
            let d = arg.partial(s);
            if d.is_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => Expr::cos(arg.clone()),
                Func::Cos => Expr::sin(arg.clone()).neg(),
                Func::Exp => Expr::exp(arg.clone()),
            };
            outer.mul(&d)
        }
        Atom::Recip(sum) => {
            let d = sum.partial(s);
            if d.is_zero() {
                return Expr::zero();
            }
            let r = Expr::from_raw(vec![(Atom::Recip(sum.clone()), 2)]);
            r.mul(&d).neg()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> Expr {
        Expr::field(0)
    }
    fn ut() -> Expr {
        Expr::jet(0, &[0])
    }

    #[test]
    fn partial_examples() {
        let e = u().mul(&ut());
        assert_eq!(e.partial(&Symbol::jet(0, super::super::MultiIndex::new(vec![0]))), u());
        let x2 = Expr::base(0).pow(2).unwrap();
        assert!(x2.partial(&Symbol::field(0)).is_zero());
        let s = Expr::sin(ut());
        let sym = Symbol::jet(0, super::super::MultiIndex::new(vec![0]));
        assert_eq!(s.partial(&sym), Expr::cos(ut()));
    }

    #[test]
    fn partial_of_reciprocal() {
        let s = Expr::one().add(&u().pow(2).unwrap());
        let r = s.recip().unwrap();
        let d = r.partial(&Symbol::field(0));
        let expected = u().scale_int(-2).mul(&s.pow(-2).unwrap());
        assert_eq!(d, expected);
    }

    #[test]
    fn substitute_examples() {
        let utt = Expr::jet(0, &[0, 0]);
        let t = Expr::homotopy();
        let e = u().mul(&utt);
        let mut b = BTreeMap::new();
        b.insert(Symbol::field(0), t.mul(&u()));
        b.insert(Symbol::jet(0, super::super::MultiIndex::new(vec![0, 0])), t.mul(&utt));
        let r = e.substitute(&b).unwrap();
        assert_eq!(r, t.pow(2).unwrap().mul(&u()).mul(&utt));

        assert_eq!(ut().substitute(&BTreeMap::new()).unwrap(), ut());
        let z = Expr::sin(u()).substitute_one(&Symbol::field(0), &Expr::zero()).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn integrate_t_examples() {
        let t = Expr::homotopy();
        let utt = Expr::jet(0, &[0, 0]);
        let e = t.pow(2).unwrap().mul(&u()).mul(&utt);
        assert_eq!(e.integrate_t().unwrap(), u().mul(&utt).scale(&super::super::rational(1, 3)));
        let k = Expr::named("k");
        assert_eq!(k.integrate_t().unwrap(), k);
        let bad = Expr::sin(t.mul(&u()));
        assert!(matches!(bad.integrate_t(), Err(Error::NonPolynomialInT)));
    }
}
