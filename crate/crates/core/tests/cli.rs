mod common;

use std::process::Command as Process;

use serde_json::Value;
use varseq::cli::{exit, run, run_file, Command, Overrides, ProblemFile, Report, Status};

fn run_named(command: Command, name: &str) -> Report {
    run_file(command, &common::problem(name), &Overrides::default())
}

#[test]
fn every_command_reports_the_problem_and_schema() {
    for path in common::corpus() {
        for command in [Command::CheckVariational, Command::Derive, Command::Noether, Command::Glue, Command::Obstruction] {
            let r = run_file(command, &path, &Overrides::default());
            assert_eq!(r.schema, "vjp-schema-1");
            assert_eq!(r.command, command.name());
            assert!(!r.verdict.is_empty(), "{}", path.display());
            assert_eq!(r.status == Status::Ok, r.exit_code <= exit::NEGATIVE, "{}: {}", path.display(), r.verdict);
        }
    }
}

#[test]
fn free_particle_is_globally_variational() {
    let r = run_named(Command::CheckVariational, "free_particle.json");
    assert_eq!(r.exit_code, exit::SUCCESS);
    assert_eq!(r.verdict, "variational, global");
}

#[test]
fn free_particle_euler_lagrange_and_probe() {
    let r = run_named(Command::Derive, "free_particle.json");
    assert_eq!(r.exit_code, exit::SUCCESS);
    let text = r.to_json();
    assert!(text.contains("-u_{tt}"), "{text}");
}

#[test]
fn free_particle_noether_classification() {
    let r = run_named(Command::Noether, "free_particle.json");
    let syms = r.details["symmetries"].as_array().unwrap();
    let class = |name: &str| syms.iter().find(|s| s["name"] == name).unwrap()["classification"].clone();
    assert_eq!(class("d_u"), "lagrangian symmetry");
    assert_eq!(class("d_t"), "lagrangian symmetry");
    assert_eq!(class("scaling"), "not a symmetry");
    let drift = syms[0]["drift"]["max_drift"].as_f64().unwrap();
    assert!(drift < 1e-8);
}

#[test]
fn first_order_source_is_not_locally_variational() {
    let r = run_named(Command::CheckVariational, "velocity_source.json");
    assert_eq!(r.exit_code, exit::NEGATIVE);
    assert_eq!(r.verdict, "not locally variational");
    assert_eq!(run_named(Command::Derive, "velocity_source.json").exit_code, exit::MATH);
}

#[test]
fn order_above_cap_is_an_input_error() {
    let r = run_named(Command::CheckVariational, "order_five.json");
    assert_eq!(r.exit_code, exit::INPUT);
    assert_eq!(r.status, Status::Error);
}

#[test]
fn tonti_lagrangian_of_the_wave_equation() {
    let r = run_named(Command::Derive, "wave.json");
    assert_eq!(r.exit_code, exit::SUCCESS);
    let noether = run_named(Command::Noether, "wave.json");
    let syms = noether.details["symmetries"].as_array().unwrap();
    assert!(syms.iter().any(|s| s["classification"] == "equation symmetry"));
}

#[test]
fn monopole_is_locally_but_not_globally_variational() {
    let r = run_named(Command::CheckVariational, "monopole_2chart_g1.json");
    assert_eq!(r.exit_code, exit::NEGATIVE);
    assert!(r.verdict.starts_with("locally variational"), "{}", r.verdict);
}

#[test]
fn affine_circle_branches() {
    let c0 = run_named(Command::Obstruction, "affine_circle_c0.json");
    assert_eq!(c0.details["proposition"]["branch"], "proposition");
    assert_eq!(c0.details["proposition"]["consistent"], true);
    let c1 = run_named(Command::Obstruction, "affine_circle_c1.json");
    assert_eq!(c1.details["proposition"]["branch"], "not_applicable");
    let zero = c1.details["sections"].as_array().unwrap().iter().find(|s| s["name"] == "zero").unwrap().clone();
    assert_eq!(zero["pullbacks"][0]["report"]["certificate"], varseq::cech::NO_GLOBAL_SOLUTIONS);
}

#[test]
fn report_round_trips_through_json() {
    for name in ["torus.json", "free_particle.json", "order_five.json"] {
        let r = run_named(Command::Obstruction, name);
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }
}

#[test]
fn seed_and_tolerance_overrides_are_applied() {
    let overrides = Overrides { seed: Some(99), tolerances: vec![("tau_class".into(), 1e-3)] };
    let r = run_file(Command::Glue, &common::problem("monopole_2chart_g1.json"), &overrides);
    assert_eq!(r.seed, Some(99));
    assert_eq!(r.details["delta"]["tolerance"], 1e-3);
    let bad = Overrides { seed: None, tolerances: vec![("tau_bogus".into(), 1.0)] };
    assert_eq!(run_file(Command::Glue, &common::problem("wave.json"), &bad).exit_code, exit::INPUT);
}

#[test]
fn unknown_fields_and_schema_are_rejected() {
    let text = std::fs::read_to_string(common::problem("wave.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["surprise"] = Value::Bool(true);
    assert!(ProblemFile::from_json(&v.to_string()).is_err());
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["schema"] = "other".into();
    assert!(ProblemFile::from_json(&v.to_string()).is_err());
    let file = ProblemFile::from_json(&text).unwrap();
    assert_eq!(run(Command::CheckVariational, file, &Overrides::default()).exit_code, exit::SUCCESS);
}

#[test]
fn missing_file_is_an_input_error() {
    let r = run_file(Command::Glue, &common::problem("does_not_exist.json"), &Overrides::default());
    assert_eq!(r.exit_code, exit::INPUT);
}

#[test]
fn binary_writes_reports_and_uses_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = Process::new(env!("CARGO_BIN_EXE_varseq"))
        .args(["check-variational", "--problem"])
        .arg(common::problem("monopole_2chart_g1.json"))
        .arg("--report")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(exit::NEGATIVE));
    let r = Report::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.command, "check-variational");

    let text = Process::new(env!("CARGO_BIN_EXE_varseq"))
        .args(["derive", "--text", "--tolerance", "tau_eq=1e-10", "--problem"])
        .arg(common::problem("free_particle.json"))
        .output()
        .unwrap();
    assert_eq!(text.status.code(), Some(exit::SUCCESS));
    let stdout = String::from_utf8(text.stdout).unwrap();
    assert!(stdout.starts_with("varseq derive [free-particle]"), "{stdout}");

    let bad = Process::new(env!("CARGO_BIN_EXE_varseq"))
        .args(["glue", "--tolerance", "tau_eq", "--problem"])
        .arg(common::problem("wave.json"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
