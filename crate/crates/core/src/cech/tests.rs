use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::*;
use crate::expr::{EqualityConfig, Expr, Symbol};
use crate::jet::{JetSpace, ProjectableVectorField, SourceForm};
use crate::varcalc::{Center, Lagrangian};
use crate::Error;

fn cfg() -> EqualityConfig {
    EqualityConfig::default()
}

/// Arc `(lo, lo + 2π)` of a circle coordinate.
type Arc = f64;

/// Components `(region, shift)` carrying arc `a` into arc `b`.
fn arc_map(a: Arc, b: Arc) -> Vec<((f64, f64), i64)> {
    let mut out = Vec::new();
    for k in -1..=1i64 {
        let shift = 2.0 * PI * k as f64;
        let lo = a.max(b - shift);
        let hi = (a + 2.0 * PI).min(b + 2.0 * PI - shift);
        if hi - lo > 1e-9 {
            out.push(((lo, hi), k));
        }
    }
    out
}

fn shifted(space: &JetSpace, name: &str, k: i64) -> Expr {
    match k {
        0 => space.parse(name).unwrap(),
        k => space.parse(&format!("{name} + {}*pi", 2 * k)).unwrap(),
    }
}

struct Fixture {
    atlas: Atlas,
    space: JetSpace,
}

/// `Y = R × S²` with fields `(p, z)`, charts on angular arcs starting at `arcs`.
fn monopole(g: f64, arcs: &[(Arc, &str)]) -> Fixture {
    let space = JetSpace::new(vec!["t".into()], vec!["p".into(), "z".into()], 1)
        .unwrap()
        .with_constants(["g", "pi", "s1", "s2"].map(String::from))
        .unwrap();
    let consts = Constants::new(BTreeMap::from([("g".to_string(), g), ("pi".to_string(), PI)]));
    let charts = arcs
        .iter()
        .enumerate()
        .map(|(i, &(a, start))| Chart {
            name: format!("C{i}"),
            bounds: Bounds(vec![(f64::NEG_INFINITY, f64::INFINITY), (a, a + 2.0 * PI), (-1.0, 1.0)]),
            center: Center {
                base: vec![Expr::zero()],
                fiber: vec![space.parse(&format!("{start} + pi")).unwrap(), Expr::zero()],
            },
            embedding: Some(vec![
                space.parse("z").unwrap(),
                space.parse("(1 - z^2)*cos(p)").unwrap(),
                space.parse("(1 - z^2)*sin(p)").unwrap(),
            ]),
        })
        .collect();
    let mut transitions = Vec::new();
    for (i, &(a, _)) in arcs.iter().enumerate() {
        for (j, &(b, _)) in arcs.iter().enumerate() {
            if i == j {
                continue;
            }
            for ((lo, hi), k) in arc_map(a, b) {
                transitions.push(Transition {
                    label: format!("C{i}->C{j}[{k}]"),
                    from: i,
                    to: j,
                    base_map: vec![space.parse("t").unwrap()],
                    fiber_map: vec![shifted(&space, "p", k), space.parse("z").unwrap()],
                    region: Some(Bounds(vec![(f64::NEG_INFINITY, f64::INFINITY), (lo, hi), (-1.0, 1.0)])),
                });
            }
        }
    }
    let atlas = Atlas::build(space.clone(), consts, charts, transitions, &cfg(), 7).unwrap();
    Fixture { atlas, space }
}

fn monopole_sources(f: &Fixture) -> Vec<SourceForm> {
    let eta = SourceForm::new(vec![f.space.parse("g*z_t").unwrap(), f.space.parse("-g*p_t").unwrap()]);
    vec![eta; f.atlas.charts().len()]
}

/// The sphere at `t = 0` through the arc of chart 0, which starts at `p = 0`.
fn sphere(f: &Fixture) -> Cycle {
    let face = |axis, side| Face { piece: 0, axis, side };
    Cycle {
        name: "S2".into(),
        dim: 2,
        pieces: vec![CyclePiece {
            chart: 0,
            map: BTreeMap::from([
                (Symbol::field(0), f.space.parse("2*pi*s1").unwrap()),
                (Symbol::field(1), f.space.parse("2*s2 - 1").unwrap()),
            ]),
        }],
        faces: vec![
            FaceRule::Glued { a: face(0, 0), b: face(0, 1), reversed: false },
            FaceRule::Collapsed(face(1, 0)),
            FaceRule::Collapsed(face(1, 1)),
        ],
    }
}

fn two_chart(g: f64) -> Fixture {
    monopole(g, &[(0.0, "0"), (-PI, "-pi")])
}

fn three_chart(g: f64) -> Fixture {
    monopole(g, &[(0.0, "0"), (2.0 * PI / 3.0, "2*pi/3"), (4.0 * PI / 3.0, "4*pi/3")])
}

#[test]
fn monopole_presentation_has_nonzero_trivial_differences() {
    let f = two_chart(1.0);
    let p = build_presentation(&f.atlas, monopole_sources(&f), &cfg()).unwrap();
    assert_eq!(p.differences.len(), f.atlas.transitions().len());
    assert!(p.differences.values().any(|mu| !mu.density.is_zero()));
}

#[test]
fn single_chart_presentation_has_no_differences() {
    let space = JetSpace::new(vec!["t".into()], vec!["u".into()], 2).unwrap();
    let chart = Chart { name: "R".into(), bounds: Bounds::unbounded(2), center: Center::origin(&space), embedding: None };
    let atlas = Atlas::build(space.clone(), Constants::default(), vec![chart], vec![], &cfg(), 1).unwrap();
    let p = build_presentation(&atlas, vec![SourceForm::new(vec![space.parse("-u_tt").unwrap()])], &cfg()).unwrap();
    assert!(p.differences.is_empty());
    assert_eq!(p.lagrangians[0].density, space.parse("-1/2*u*u_tt").unwrap());
}

#[test]
fn zero_source_gives_zero_lagrangians() {
    let f = two_chart(1.0);
    let p = build_presentation(&f.atlas, vec![SourceForm::zero(2); 2], &cfg()).unwrap();
    assert!(p.lagrangians.iter().all(|l| l.density.is_zero()));
}

#[test]
fn coboundary_squares_to_zero_on_triple_overlaps() {
    let f = three_chart(1.0);
    assert!(!f.atlas.triples().is_empty());
    let p = build_presentation(&f.atlas, monopole_sources(&f), &cfg()).unwrap();
    let c0 = Cochain::from_charts(p.lagrangians.iter().map(|l| l.to_form(1)).collect());
    let c1 = coboundary(&f.atlas, &c0).unwrap();
    assert!(!c1.is_zero(&cfg()).unwrap());
    let c2 = coboundary(&f.atlas, &c1).unwrap();
    assert!(!c2.entries.is_empty());
    assert!(c2.is_zero(&cfg()).unwrap());
}

#[test]
fn coboundary_of_a_global_form_vanishes() {
    let f = two_chart(1.0);
    let w = Lagrangian::new(f.space.parse("z*p_t").unwrap()).to_form(1);
    let c1 = coboundary(&f.atlas, &Cochain::from_charts(vec![w.clone(), w])).unwrap();
    assert!(c1.is_zero(&cfg()).unwrap());
}

#[test]
fn inconsistent_sources_are_rejected() {
    let f = two_chart(1.0);
    let mut sources = monopole_sources(&f);
    sources[1] = SourceForm::new(vec![f.space.parse("2*g*z_t").unwrap(), f.space.parse("-2*g*p_t").unwrap()]);
    assert!(matches!(build_presentation(&f.atlas, sources, &cfg()), Err(Error::InconsistentSource(_))));
}

#[test]
fn monopole_period_is_four_pi_g() {
    for g in [1.0, 2.0, 0.5] {
        let f = two_chart(g);
        let p = build_presentation(&f.atlas, monopole_sources(&f), &cfg()).unwrap();
        let r = delta_class(&f.atlas, &p, None, None, &[sphere(&f)], &ClassConfig::default()).unwrap();
        assert_eq!(r.provenance, Provenance::LocalPotentials);
        let v = r.periods[0].value;
        assert!(((v - 4.0 * PI * g) / (4.0 * PI * g)).abs() < 1e-4, "{v}");
        assert!(!r.zero);
    }
}

#[test]
fn partition_of_unity_collation_matches_on_a_refined_atlas() {
    let f3 = three_chart(1.0);
    let p3 = build_presentation(&f3.atlas, monopole_sources(&f3), &cfg()).unwrap();
    let rho: Vec<Expr> = (0..3)
        .map(|k| f3.space.parse(&format!("(1 - cos(p - {}*pi/3))/3", 2 * k)).unwrap())
        .collect();
    let r3 = delta_class(&f3.atlas, &p3, None, Some(rho), &[sphere(&f3)], &ClassConfig::default()).unwrap();
    assert_eq!(r3.provenance, Provenance::PartitionOfUnity);
    assert!((r3.periods[0].value - 4.0 * PI).abs() < 2e-4, "{}", r3.periods[0].value);
}

#[test]
fn bad_partition_is_rejected() {
    let f = two_chart(1.0);
    let p = build_presentation(&f.atlas, monopole_sources(&f), &cfg()).unwrap();
    let rho = vec![f.space.parse("1/2").unwrap(), f.space.parse("1/3").unwrap()];
    let r = delta_class(&f.atlas, &p, None, Some(rho), &[sphere(&f)], &ClassConfig::default());
    assert!(matches!(r, Err(Error::NoRepresentative(_))));
}

#[test]
fn supplied_area_form_is_checked_and_used() {
    let f = two_chart(2.0);
    let p = build_presentation(&f.atlas, monopole_sources(&f), &cfg()).unwrap();
    let area = crate::jet::DiffForm::differential(Symbol::field(0))
        .wedge(&crate::jet::DiffForm::differential(Symbol::field(1)))
        .scale(&f.space.parse("g").unwrap());
    let r = delta_class(&f.atlas, &p, Some(vec![area.clone(), area.clone()]), None, &[sphere(&f)], &ClassConfig::default())
        .unwrap();
    assert_eq!(r.provenance, Provenance::Supplied);
    assert!((r.periods[0].value - 8.0 * PI).abs() < 1e-6);
    let wrong = area.scale(&Expr::int(2));
    let r = delta_class(&f.atlas, &p, Some(vec![wrong.clone(), wrong]), None, &[sphere(&f)], &ClassConfig::default());
    assert!(matches!(r, Err(Error::NoRepresentative(_))));
}

#[test]
fn open_cycle_is_rejected() {
    let f = two_chart(1.0);
    let p = build_presentation(&f.atlas, monopole_sources(&f), &cfg()).unwrap();
    let mut c = sphere(&f);
    c.pieces[0].map.insert(Symbol::field(0), f.space.parse("pi*s1").unwrap());
    let r = delta_class(&f.atlas, &p, None, None, &[c], &ClassConfig::default());
    assert!(matches!(r, Err(Error::CycleNotClosed(..))));
}

#[test]
fn globally_variational_source_has_zero_class() {
    let f = two_chart(1.0);
    // E of the global Lagrangian z^2 p_t^2 / 2
    let lag = Lagrangian::new(f.space.parse("1/2*z^2*p_t^2").unwrap());
    let eta = crate::varcalc::euler_lagrange(&lag, &f.space).unwrap();
    let p = build_presentation(&f.atlas, vec![eta.clone(), eta], &cfg()).unwrap();
    let r = delta_class(&f.atlas, &p, None, None, &[sphere(&f)], &ClassConfig::default()).unwrap();
    assert!(r.zero);
}

/// `Y = S¹ × S¹` over `X = S¹`, four charts on products of the arcs `(0, 2π)` and `(-π, π)`.
fn torus() -> Fixture {
    let space = JetSpace::new(vec!["x".into()], vec!["u".into()], 1)
        .unwrap()
        .with_constants(["pi", "s1", "h"].map(String::from))
        .unwrap();
    let consts = Constants::new(BTreeMap::from([("pi".to_string(), PI)]));
    let arcs = [0.0, -PI];
    let mut charts = Vec::new();
    for (i, &a) in arcs.iter().enumerate() {
        for (j, &b) in arcs.iter().enumerate() {
            charts.push(Chart {
                name: format!("{}{}", "AB".as_bytes()[i] as char, "AB".as_bytes()[j] as char),
                bounds: Bounds(vec![(a, a + 2.0 * PI), (b, b + 2.0 * PI)]),
                center: Center {
                    base: vec![if i == 0 { space.parse("pi").unwrap() } else { Expr::zero() }],
                    fiber: vec![if j == 0 { space.parse("pi").unwrap() } else { Expr::zero() }],
                },
                embedding: Some(["cos(x)", "sin(x)", "cos(u)", "sin(u)"].map(|e| space.parse(e).unwrap()).to_vec()),
            });
        }
    }
    let mut transitions = Vec::new();
    for from in 0..4 {
        for to in 0..4 {
            if from == to {
                continue;
            }
            let xa = (arcs[from / 2], arcs[to / 2]);
            let ua = (arcs[from % 2], arcs[to % 2]);
            for ((xl, xh), kx) in arc_map(xa.0, xa.1) {
                for ((ul, uh), ku) in arc_map(ua.0, ua.1) {
                    transitions.push(Transition {
                        label: format!("{from}->{to}[{kx},{ku}]"),
                        from,
                        to,
                        base_map: vec![shifted(&space, "x", kx)],
                        fiber_map: vec![shifted(&space, "u", ku)],
                        region: Some(Bounds(vec![(xl, xh), (ul, uh)])),
                    });
                }
            }
        }
    }
    let atlas = Atlas::build(space.clone(), consts, charts, transitions, &cfg(), 3).unwrap();
    Fixture { atlas, space }
}

fn base_circle(f: &Fixture) -> Cycle {
    Cycle {
        name: "X".into(),
        dim: 1,
        pieces: vec![CyclePiece { chart: 0, map: BTreeMap::from([(Symbol::base(0), f.space.parse("2*pi*s1").unwrap())]) }],
        faces: vec![FaceRule::Glued {
            a: Face { piece: 0, axis: 0, side: 0 },
            b: Face { piece: 0, axis: 0, side: 1 },
            reversed: false,
        }],
    }
}

fn section(f: &Fixture, name: &str, charts: &[usize], expr: &str) -> GlobalSection {
    let e = f.space.parse(expr).unwrap();
    GlobalSection::new(&f.atlas, name, charts.iter().map(|&c| (c, vec![e.clone()])).collect()).unwrap()
}

fn torus_rep(f: &Fixture) -> (LocalPresentation, Representative) {
    let eta = SourceForm::new(vec![Expr::int(-1)]);
    let p = build_presentation(&f.atlas, vec![eta; 4], &cfg()).unwrap();
    let dx = ProjectableVectorField::new(&f.space, vec![Expr::one()], vec![Expr::zero()]).unwrap();
    let omegas = contracted_sources(&f.atlas, &p, &vec![dx; 4]);
    let rep = delta_prime_representative(&f.atlas, &omegas, None, None, &ClassConfig::default()).unwrap();
    (p, rep)
}

#[test]
fn torus_pullback_periods_depend_on_winding() {
    let f = torus();
    let (_, rep) = torus_rep(&f);
    let x = base_circle(&f);
    let w0 = section(&f, "w0", &[0, 1, 2, 3], "1");
    let w1 = section(&f, "w1", &[0, 3], "x");
    w0.check_compatible(&f.atlas, 1).unwrap();
    w1.check_compatible(&f.atlas, 1).unwrap();
    let c = ClassConfig::default();
    let r0 = pullback_class_check(&f.atlas, &rep, &w0, &[x.clone()], &c).unwrap();
    let r1 = pullback_class_check(&f.atlas, &rep, &w1, &[x], &c).unwrap();
    assert!(r0.zero);
    assert_eq!(r0.certificate.as_deref(), Some(INCONCLUSIVE));
    assert!(((r1.periods[0].value - r0.periods[0].value) - 2.0 * PI).abs() < 1e-4);
    assert_eq!(r1.certificate.as_deref(), Some(NO_GLOBAL_SOLUTIONS));
}

#[test]
fn incompatible_section_is_detected() {
    let f = torus();
    let bad = section(&f, "bad", &[0, 3], "x/2");
    assert!(matches!(bad.check_compatible(&f.atlas, 1), Err(Error::SectionChartIncompatibility(..))));
}

#[test]
fn section_missing_on_a_cycle_chart_is_not_global() {
    let f = torus();
    let (_, rep) = torus_rep(&f);
    let s = section(&f, "s", &[3], "x");
    let r = pullback_class_check(&f.atlas, &rep, &s, &[base_circle(&f)], &ClassConfig::default());
    assert!(matches!(r, Err(Error::SectionNotGlobal(..))));
}

#[test]
fn homotopic_sections_have_equal_periods() {
    let f = torus();
    let (_, rep) = torus_rep(&f);
    let a = section(&f, "a", &[0, 3], "x");
    let b = section(&f, "b", &[0, 3], "x + 1/4*sin(x)");
    let hom = SectionHomotopy {
        from: "a".into(),
        to: "b".into(),
        charts: [0, 3].into_iter().map(|c| (c, vec![f.space.parse("x + h/4*sin(x)").unwrap()])).collect(),
    };
    let check = verify_homotopy(&f.atlas, &[a.clone(), b.clone()], &hom, &cfg(), 1).unwrap();
    assert!(check.verified, "{check:?}");
    assert_eq!(homotopy_classes(&[a.clone(), b.clone()], &[check]), vec![0, 0]);
    let c = ClassConfig::default();
    let x = base_circle(&f);
    let pa = pullback_class_check(&f.atlas, &rep, &a, &[x.clone()], &c).unwrap();
    let pb = pullback_class_check(&f.atlas, &rep, &b, &[x], &c).unwrap();
    assert!((pa.periods[0].value - pb.periods[0].value).abs() < 2e-6);
}

#[test]
fn torus_is_not_an_isomorphism_but_affine_is() {
    let f = torus();
    assert!(!isomorphism_hypothesis_check(&f.atlas, &BundleKind::Product { fiber_betti: vec![1, 1] }));
    assert!(isomorphism_hypothesis_check(&f.atlas, &BundleKind::Affine));
    assert!(isomorphism_hypothesis_check(&f.atlas, &BundleKind::Trivial));
    assert!(!isomorphism_hypothesis_check(&f.atlas, &BundleKind::Unknown));
}

#[test]
fn torus_report_takes_the_weaker_branch() {
    let f = torus();
    let (p, _) = torus_rep(&f);
    let dx = ProjectableVectorField::new(&f.space, vec![Expr::one()], vec![Expr::zero()]).unwrap();
    let syms = vec![SymmetryInput { name: "d_x".into(), fields: vec![dx; 4], representative: None }];
    let sections = vec![section(&f, "w0", &[0, 1, 2, 3], "1"), section(&f, "w1", &[0, 3], "x")];
    let x = [base_circle(&f)];
    let input = ExistenceInput {
        atlas: &f.atlas,
        presentation: &p,
        delta_representative: None,
        partition: None,
        top_cycles: &[],
        current_cycles: &[],
        base_cycles: &x,
        symmetries: &syms,
        sections: &sections,
        homotopies: &[],
        bundle: BundleKind::Product { fiber_betti: vec![1, 1] },
    };
    let r = global_existence_report(&input, &ClassConfig::default()).unwrap();
    assert_eq!(r.proposition.branch, Branch::Weaker);
    assert!(r.symmetries[0].equation_symmetry);
    assert_ne!(r.sections[0].homotopy_class, r.sections[1].homotopy_class);
    assert!(!r.sections[1].pullbacks[0].report.zero);
}
