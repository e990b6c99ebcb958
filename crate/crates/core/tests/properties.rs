mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use varseq::expr::{equality, EqualityConfig};
use varseq::jet::{HorizontalForm, SourceForm};
use varseq::oracle::{symbolic_numeric_crosscheck, TAU_EQ};
use varseq::varcalc::{
    dh_homotopy, euler_lagrange, helmholtz_check, tonti_lagrangian, variational_lie_derivative_lagrangian, Center,
    Lagrangian,
};

fn cfg() -> EqualityConfig {
    EqualityConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn horizontal_differential_squares_to_zero(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::space(2, 2, 2);
        let f = common::random_polynomial_density(&space, 1, &mut rng);
        let once = HorizontalForm::function(2, f).dh(&space).unwrap();
        prop_assert!(once.dh(&space).unwrap().is_zero());
    }

    #[test]
    fn euler_lagrange_annihilates_divergences(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let k = common::random_current(&space, &mut rng);
        let el = euler_lagrange(&Lagrangian::from_form(&k.dh(&space).unwrap()), &space).unwrap();
        prop_assert!(el.equals(&SourceForm::zero(space.m()), &cfg()).unwrap());
    }

    #[test]
    fn euler_lagrange_expressions_pass_helmholtz(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let lag = Lagrangian::new(common::random_density(&space, 2, &mut rng));
        let el = euler_lagrange(&lag, &space).unwrap();
        prop_assert!(helmholtz_check(&el, &space, &cfg()).unwrap().passes);
    }

    #[test]
    fn tonti_inverts_euler_lagrange(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let eta = euler_lagrange(&Lagrangian::new(common::random_density(&space, 2, &mut rng)), &space).unwrap();
        let lag = tonti_lagrangian(&eta, &space, &Center::origin(&space), &cfg()).unwrap();
        prop_assert!(euler_lagrange(&lag, &space).unwrap().equals(&eta, &cfg()).unwrap());
    }

    #[test]
    fn tonti_lagrangians_differ_by_a_trivial_lagrangian(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let lag = Lagrangian::new(common::random_polynomial_density(&space, 2, &mut rng));
        let eta = euler_lagrange(&lag, &space).unwrap();
        let tonti = tonti_lagrangian(&eta, &space, &Center::origin(&space), &cfg()).unwrap();
        let diff = HorizontalForm::volume(space.n(), lag.density.sub(&tonti.density));
        let k = dh_homotopy(&diff, &space, &Center::origin(&space), &cfg()).unwrap();
        prop_assert!(k.dh(&space).unwrap().equals(&diff, &cfg()).unwrap());
    }

    #[test]
    fn first_variation_formula(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let lag = Lagrangian::new(common::random_density(&space, 2, &mut rng));
        let field = common::random_field(&space, &mut rng);
        let el = euler_lagrange(&lag, &space).unwrap();
        let lie = variational_lie_derivative_lagrangian(&field, &lag, &space).unwrap();
        let residual = lie.lie.density
            .sub(&el.contract(&field.vertical()))
            .sub(&lie.current.dh(&space).unwrap().top_coefficient());
        prop_assert!(equality::is_zero(&residual, &cfg()).unwrap());
    }

    #[test]
    fn rendering_parses_back(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let e = common::random_density(&space, 2, &mut rng);
        let back = space.parse(&space.render(&e)).unwrap();
        prop_assert!(equality::equals(&back, &e, &cfg()).unwrap().equal);
    }

    #[test]
    fn canonical_arithmetic_agrees_with_sampling(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let a = common::random_density(&space, 2, &mut rng);
        let b = common::random_density(&space, 1, &mut rng);
        let product = a.add(&b).mul(&a.sub(&b));
        let squares = a.mul(&a).sub(&b.mul(&b));
        let check = symbolic_numeric_crosscheck(&product, &squares, &BTreeMap::new(), 8, seed, TAU_EQ);
        prop_assert!(check.pass, "{check:?}");
        prop_assert!(equality::equals(&product, &squares, &cfg()).unwrap().equal);
    }

    #[test]
    fn perturbed_expressions_are_told_apart(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng);
        let a = common::random_density(&space, 2, &mut rng);
        let shifted = a.add(&space.parse("1/1000").unwrap());
        prop_assert!(!equality::equals(&a, &shifted, &cfg()).unwrap().equal);
    }
}
