#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varseq::expr::{rational, MultiIndex};
use varseq::jet::{HorizontalForm, ProjectableVectorField};
use varseq::{Expr, JetSpace, Symbol};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

pub fn corpus() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("problems directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

pub fn problem(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(n: usize, m: usize, order: usize) -> JetSpace {
    let base = ["x", "y"][..n].iter().map(|s| s.to_string()).collect();
    let fields = ["u", "v"][..m].iter().map(|s| s.to_string()).collect();
    JetSpace::new(base, fields, order).unwrap()
}

pub fn random_space(rng: &mut ChaCha8Rng) -> JetSpace {
    space(rng.gen_range(1..=2), rng.gen_range(1..=2), 2)
}

fn jets(space: &JetSpace, order: usize) -> Vec<Expr> {
    let mut out = Vec::new();
    for a in 0..space.m() {
        for multi in MultiIndex::all_up_to(space.n(), order) {
            out.push(Expr::symbol(Symbol::jet(a, multi)));
        }
    }
    out
}

fn coefficient(rng: &mut ChaCha8Rng) -> Expr {
    let mut num = rng.gen_range(-3i64..=2);
    if num >= 0 {
        num += 1;
    }
    Expr::constant(rational(num, rng.gen_range(1..=2)))
}

fn base_factor(space: &JetSpace, rng: &mut ChaCha8Rng) -> Expr {
    let i = rng.gen_range(0..space.n());
    let x = Expr::base(i);
    match rng.gen_range(0..6) {
        0 => Expr::sin(x),
        1 => Expr::cos(x),
        2 | 3 => x,
        _ => Expr::one(),
    }
}

/// Sum of 1..=4 monomials in jet coordinates of order at most `order`, each
/// of degree 1..=3 with an optional factor depending on the base.
pub fn random_density(space: &JetSpace, order: usize, rng: &mut ChaCha8Rng) -> Expr {
    let vars = jets(space, order);
    let mut out = Expr::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let mut term = coefficient(rng).mul(&base_factor(space, rng));
        for _ in 0..rng.gen_range(1..=3) {
            term = term.mul(&vars[rng.gen_range(0..vars.len())]);
        }
        out = out.add(&term);
    }
    out
}

/// Polynomial Lagrangian of order at most 2 without base-dependent transcendental factors.
pub fn random_polynomial_density(space: &JetSpace, order: usize, rng: &mut ChaCha8Rng) -> Expr {
    let vars = jets(space, order);
    let mut out = Expr::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let mut term = coefficient(rng);
        if rng.gen_bool(0.3) {
            term = term.mul(&Expr::base(rng.gen_range(0..space.n())));
        }
        for _ in 0..rng.gen_range(1..=3) {
            term = term.mul(&vars[rng.gen_range(0..vars.len())]);
        }
        out = out.add(&term);
    }
    out
}

/// A current `K` of order at most 1, so that `d_H K` has order at most 2.
pub fn random_current(space: &JetSpace, rng: &mut ChaCha8Rng) -> HorizontalForm {
    let comps: Vec<Expr> = (0..space.n()).map(|_| random_polynomial_density(space, 1, rng)).collect();
    HorizontalForm::current(space.n(), &comps)
}

fn base_polynomial(space: &JetSpace, rng: &mut ChaCha8Rng) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let mut term = coefficient(rng);
        for _ in 0..rng.gen_range(0..=1) {
            term = term.mul(&Expr::base(rng.gen_range(0..space.n())));
        }
        out = out.add(&term);
    }
    out
}

/// `ξ^i(x)` of degree at most 1 and `ξ^a(x, u)` of degree at most 2.
pub fn random_field(space: &JetSpace, rng: &mut ChaCha8Rng) -> ProjectableVectorField {
    let base = (0..space.n())
        .map(|_| if rng.gen_bool(0.5) { base_polynomial(space, rng) } else { Expr::zero() })
        .collect();
    let mut vars: Vec<Expr> = (0..space.n()).map(Expr::base).collect();
    vars.extend((0..space.m()).map(Expr::field));
    let fiber = (0..space.m())
        .map(|_| {
            let mut out = coefficient(rng);
            for _ in 0..rng.gen_range(0..=2) {
                let mut term = coefficient(rng);
                for _ in 0..rng.gen_range(1..=2) {
                    term = term.mul(&vars[rng.gen_range(0..vars.len())]);
                }
                out = out.add(&term);
            }
            out
        })
        .collect();
    ProjectableVectorField::new(space, base, fiber).unwrap()
}

/// A smooth test section on the unit box.
pub fn test_section(space: &JetSpace) -> Vec<Expr> {
    let texts: &[&str] = match space.n() {
        1 => &["sin(x) + 1/3*x^2", "1/2*cos(2*x) + x"],
        _ => &["sin(x)*y + 1/2*x^2", "1/2*cos(y) + x*y"],
    };
    texts[..space.m()].iter().map(|t| space.parse(t).unwrap()).collect()
}
