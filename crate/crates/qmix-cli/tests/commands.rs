//! In-process exercises of the three CLI verbs.

use std::io::Write;

use qmix_cli::commands::{
    cmd_bound, cmd_reproduce, cmd_simulate, PovmSource, ReproduceCase, DEFAULT_SEED,
};
use qmix_cli::format::{parse_mixture, parse_povm};

fn orthogonal_pair_file() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        r#"{{
            "dim": 2,
            "components": [
                {{ "re": [[1.0, 0.0], [0.0, 0.0]] }},
                {{ "re": [[0.0, 0.0], [0.0, 1.0]] }}
            ]
        }}"#
    )
    .unwrap();
    f
}

#[test]
fn reproduce_orthogonal_example() {
    let report = cmd_reproduce(&ReproduceCase::Orthogonal { m: 3, n_copies: 2 }).unwrap();
    assert!(report.pass);
    let engine = report
        .quantities
        .iter()
        .find(|q| q.name == "mse_engine")
        .unwrap();
    assert!((engine.value - 0.1).abs() < 1e-9);
    // reference values carry their own provenance label
    let reference = report
        .quantities
        .iter()
        .find(|q| q.name == "mse_closed_form")
        .unwrap();
    assert!(matches!(
        reference.provenance,
        qmix_cli::report::Provenance::PaperReference
    ));
}

#[test]
fn reproduce_tetrahedron_values() {
    let report = cmd_reproduce(&ReproduceCase::Tetrahedron { resolution: 120 }).unwrap();
    assert!(report.pass);
    let re = report
        .quantities
        .iter()
        .find(|q| q.name == "re_part_exact")
        .unwrap();
    assert!((re.value - 1.575).abs() < 1e-12);
    let total = report
        .quantities
        .iter()
        .find(|q| q.name == "asymptotic_coefficient")
        .unwrap();
    assert!((total.value - 2.01).abs() < 0.01);
}

#[test]
fn reproduce_unidentifiable_values() {
    let report = cmd_reproduce(&ReproduceCase::Unidentifiable {
        n_copies: 1,
        resolution: 32,
    })
    .unwrap();
    assert!(report.pass);
    let intrinsic = report
        .quantities
        .iter()
        .find(|q| q.name == "intrinsic_error")
        .unwrap();
    assert!((intrinsic.value - 0.05).abs() < 1e-10);
}

#[test]
fn reproduce_rejects_unknown_ranges() {
    assert!(cmd_reproduce(&ReproduceCase::Orthogonal { m: 1, n_copies: 1 }).is_err());
    assert!(cmd_reproduce(&ReproduceCase::TwoPure { overlap: 1.5 }).is_err());
}

#[test]
fn bound_identifiable_pair() {
    let file = orthogonal_pair_file();
    let text = std::fs::read_to_string(file.path()).unwrap();
    let (mix, _) = parse_mixture(&text).unwrap();
    let report = cmd_bound(&mix, 1, false, Some(100)).unwrap();
    assert!(report.pass);
    let mse = report
        .quantities
        .iter()
        .find(|q| q.name == "bayes_mse")
        .unwrap();
    assert!((mse.value - 1.0 / 9.0).abs() < 1e-9);
}

#[test]
fn bound_unidentifiable_routes_to_reparametrization() {
    let text = r#"{
        "dim": 2,
        "components": [
            { "bloch": [0.0, 0.0, 1.0] },
            { "bloch": [0.0, 0.0, -1.0] },
            { "bloch": [1.0, 0.0, 0.0] },
            { "bloch": [-1.0, 0.0, 0.0] }
        ]
    }"#;
    let (mix, _) = parse_mixture(text).unwrap();
    let report = cmd_bound(&mix, 10, false, Some(24)).unwrap();
    let flag = report
        .quantities
        .iter()
        .find(|q| q.name == "identifiable")
        .unwrap();
    assert_eq!(flag.value, 0.0);
    assert!(report
        .quantities
        .iter()
        .any(|q| q.name == "intrinsic_error"));
}

#[test]
fn simulate_agrees_and_is_deterministic() {
    let file = orthogonal_pair_file();
    let text = std::fs::read_to_string(file.path()).unwrap();
    let (mix, _) = parse_mixture(&text).unwrap();
    let povm = parse_povm(
        r#"{
            "dim": 2,
            "elements": [
                { "re": [[1.0, 0.0], [0.0, 0.0]] },
                { "re": [[0.0, 0.0], [0.0, 1.0]] }
            ]
        }"#,
    )
    .unwrap();
    let a = cmd_simulate(
        &mix,
        PovmSource::File(povm.clone()),
        1,
        20_000,
        DEFAULT_SEED,
    )
    .unwrap();
    assert!(a.pass);
    let b = cmd_simulate(&mix, PovmSource::File(povm), 1, 20_000, DEFAULT_SEED).unwrap();
    // identical seed, identical report bytes
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn simulate_with_optimal_measurement() {
    let text = r#"{
        "dim": 2,
        "components": [
            { "bloch": [0.866025403784, 0.0, 0.5] },
            { "bloch": [-0.866025403784, 0.0, 0.5] }
        ]
    }"#;
    let (mix, _) = parse_mixture(text).unwrap();
    let report = cmd_simulate(&mix, PovmSource::Optimal, 1, 50_000, DEFAULT_SEED).unwrap();
    assert!(report.pass);
    // pure pair with overlap 1/4: Δ11 = (2 + 0.25)/36
    let analytic = report
        .quantities
        .iter()
        .find(|q| q.name == "analytic_error_0")
        .unwrap();
    assert!((analytic.value - 2.25 / 36.0).abs() < 1e-9);
}
