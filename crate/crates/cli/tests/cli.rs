use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;
use spingeo_core::fieldgrid::{Couplings, SpinorField};
use spingeo_core::io::{to_json, FieldDoc};
use spingeo_core::manufactured::plane_wave;
use spingeo_core::suites::majorana_spinor;
use spingeo_core::Spinor;

const FREE: Couplings = Couplings { charge: 0.0, axial: 0.0, mass: 1.0 };

fn spingeo(args: &[&str], input: &Path, output: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spingeo"))
        .args(&args[..1])
        .arg("--input")
        .arg(input)
        .arg("--output")
        .arg(output)
        .args(&args[1..])
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_IDENTITIES: &str =
    r#"{"n_samples": 500, "lorentz_samples": 100, "tetrad_samples": 100, "majorana_samples": 100}"#;

#[test]
fn identities_pass_with_the_default_sample_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", "{}");
    let out = dir.path().join("report.json");
    let res = spingeo(&["identities", "--seed", "42"], &input, &out);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let report = read_json(&out);
    assert_eq!(report["n_samples"], 10_000);
    assert_eq!(report["seed"], 42);
    assert_eq!(report["pass"], true);
    let suites: Vec<&str> = report["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(suites, ["basis", "bilinear", "lorentz", "tetrad", "majorana"]);
}

#[test]
fn corrupted_basis_names_the_failing_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", r#"{"n_samples": 10, "basis": {"swap_alpha": [1, 2]}}"#);
    let out = dir.path().join("report.json");
    let res = spingeo(&["identities"], &input, &out);
    assert_eq!(res.status.code(), Some(1));
    let failing = read_json(&out)["failing"].clone();
    assert!(failing.as_array().unwrap().iter().any(|f| f == "basis.alpha_block_structure"), "{failing}");
    assert!(stderr(&res).contains("basis.alpha_block_structure"));
}

#[test]
fn tolerance_overrides_apply_by_check_or_suite() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", SMALL_IDENTITIES);
    let out = dir.path().join("report.json");
    let res = spingeo(&["identities", "--tol", "bilinear=1e-300"], &input, &out);
    assert_eq!(res.status.code(), Some(1));
    let report = read_json(&out);
    let bilinear = &report["suites"][1];
    assert!(bilinear["checks"].as_array().unwrap().iter().all(|c| c["tolerance"] == 1e-300));
    // a named check wins over its suite
    let res = spingeo(
        &["identities", "--tol", "lorentz=1e-300", "--tol", "pseudo_orthogonality=1"],
        &input,
        &out,
    );
    assert_eq!(res.status.code(), Some(1));
    let failing: Vec<String> =
        serde_json::from_value(read_json(&out)["failing"].clone()).unwrap();
    assert!(!failing.contains(&"lorentz.pseudo_orthogonality".to_string()));
    assert!(failing.iter().any(|f| f.starts_with("lorentz.")));
    let res = spingeo(&["identities", "--tol", "nonsense"], &input, &out);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_and_malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for cmd in ["identities", "grid-analyze", "radial-solve", "classify"] {
        let res = spingeo(&[cmd], &dir.path().join("absent.json"), &out);
        assert_eq!(res.status.code(), Some(2), "{cmd}");
        assert!(stderr(&res).contains("absent.json"), "{cmd}: {}", stderr(&res));
    }
    let bad = write(dir.path(), "bad.json", "{\n  \"dims\": [1, 1, 1,\n}");
    let res = spingeo(&["grid-analyze"], &bad, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("line 3"), "{}", stderr(&res));
    let unknown = write(dir.path(), "unknown.json", r#"{"n_samples": 5, "colour": "red"}"#);
    assert_eq!(spingeo(&["identities"], &unknown, &out.join("r.json")).status.code(), Some(2));
}

#[test]
fn thread_count_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", SMALL_IDENTITIES);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_spingeo"))
            .env("SPINGEO_THREADS", threads)
            .args(["identities", "--input"])
            .arg(&input)
            .arg("--output")
            .arg(dir.path().join("r.json"))
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("0"), Some(2));
    assert_eq!(run("many"), Some(2));
    assert_eq!(run("1"), Some(0));
}

fn write_field(dir: &Path, name: &str, field: &SpinorField, families: &[&str]) -> PathBuf {
    let mut doc = FieldDoc::from_field(field);
    doc.families = Some(families.iter().map(|s| s.to_string()).collect());
    write(dir, name, &to_json(&doc))
}

fn wave_line(nz: usize) -> SpinorField {
    let w = plane_wave([0.0, 0.0, 1.2], 1.0, -1.0, Complex64::new(0.8, 0.3));
    let h = 4.0 / nz as f64;
    SpinorField::from_fn([7, 1, 1, nz], [0.1 * h, 1.0, 1.0, h], [0.0; 4], FREE, move |x| w.at(x)).unwrap()
}

#[test]
fn refinement_study_reports_second_order_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let fams = ["dirac", "vector_divergence", "axial_gordon"];
    write_field(dir.path(), "coarse.json", &wave_line(32), &fams);
    write_field(dir.path(), "fine.json", &wave_line(64), &fams);
    let input = write(
        dir.path(),
        "study.json",
        r#"{"refinement": ["coarse.json", "fine.json"], "families": ["dirac", "vector_divergence", "axial_gordon"]}"#,
    );
    let out = dir.path().join("study");
    let res = spingeo(&["grid-analyze"], &input, &out);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["levels"].as_array().unwrap().len(), 2);
    let mut checked = Vec::new();
    for line in summary["ratios"].as_array().unwrap() {
        let name = line["name"].as_str().unwrap();
        let ratio = line["max_ratios"][0].as_f64();
        let fine_max = summary["levels"][1]["families"]
            .as_array()
            .unwrap()
            .iter()
            .find(|f| f["name"] == name)
            .unwrap()["max"]
            .as_f64()
            .unwrap();
        if fine_max > 1e-10 {
            assert!(ratio.unwrap() >= 3.5, "{name}: {ratio:?}");
            checked.push(name.to_string());
        }
    }
    assert!(checked.iter().any(|n| n == "dirac"), "{checked:?}");
}

#[test]
fn constant_field_has_vanishing_rotation_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = Spinor::new(Complex64::new(h, 0.0), 0.0.into(), Complex64::new(0.0, h), 0.0.into());
    let field = SpinorField::from_fn([5, 5, 5, 5], [0.1; 4], [0.0; 4], FREE, move |_| psi).unwrap();
    let input = write_field(dir.path(), "const.json", &field, &["omega", "dirac"]);
    let out = dir.path().join("const");
    let res = spingeo(&["grid-analyze"], &input, &out);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let csv = std::fs::read_to_string(out.join("omega.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# i0,i1,i2,i3,omega_010"));
    assert_eq!(header.split(',').count(), 4 + 24);
    let mut rows = 0;
    for line in lines {
        rows += 1;
        for v in line.split(',').skip(4) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
    assert_eq!(rows, 625);
    assert!(out.join("dirac.csv").exists());
}

#[test]
fn masked_nodes_are_counted() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rest = Spinor::new(Complex64::new(h, 0.0), 0.0.into(), Complex64::new(h, 0.0), 0.0.into());
    let mut field = SpinorField::from_fn([5, 5, 5, 5], [0.1; 4], [0.0; 4], FREE, move |_| rest).unwrap();
    // two nodes on a light front, one of them vanishing
    let (centre, corner) = (field.index([2, 2, 2, 2]), field.index([0, 0, 0, 0]));
    field.psi[centre] = Spinor::new(Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into());
    field.psi[corner] = Spinor::zeros();
    let input = write_field(dir.path(), "masked.json", &field, &["vector_divergence"]);
    let out = dir.path().join("masked");
    assert_eq!(spingeo(&["grid-analyze"], &input, &out).status.code(), Some(0));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["degenerate_nodes"], 2);
    assert_eq!(summary["nodes"], 625);
    let csv = std::fs::read_to_string(out.join("vector_divergence.csv")).unwrap();
    let centre_row = csv.lines().nth(1 + centre).unwrap();
    assert_eq!(centre_row, "2,2,2,2,nan");
    let masked = summary["families"][0]["masked"].as_u64().unwrap();
    assert_eq!(masked as usize, csv.lines().skip(1).filter(|l| l.ends_with("nan")).count());
}

#[test]
fn unknown_family_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_field(dir.path(), "f.json", &wave_line(32), &["curl_of_everything"]);
    let res = spingeo(&["grid-analyze"], &input, &dir.path().join("o"));
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("known:"));
}

const COULOMB_HALF: &str =
    r#"{"m": 1, "Zalpha": 0.5, "k": 1, "grid": {"r_min": 1e-6, "r_max": 120, "n": 4000}, "bracket": [0.8, 0.9]}"#;

#[test]
fn coulomb_ground_state_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.json", COULOMB_HALF);
    let out = dir.path().join("coulomb");
    let res = spingeo(&["radial-solve"], &input, &out);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let summary = read_json(&out.join("summary.json"));
    let e = summary["E"].as_f64().unwrap();
    assert!((e - 0.75f64.sqrt()).abs() <= 1e-6, "{e}");
    assert_eq!(summary["iterations"], 1);
    assert!(summary["reduction_defect"].as_f64().unwrap() <= 1e-6);
    let csv = std::fs::read_to_string(out.join("state.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4001);
}

#[test]
fn uncoupled_nonlinear_mode_takes_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "p.json",
        r#"{"m": 1, "Zalpha": 0.3, "g": 0, "k": 1, "grid": {"r_min": 1e-6, "r_max": 200, "n": 1000},
            "bracket": [0.9, 0.99], "nonlinear": {"damping": 0.5}}"#,
    );
    let out = dir.path().join("nl");
    let res = spingeo(&["radial-solve"], &input, &out);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["iterations"], 1);
    assert_eq!(summary["converged"], true);
}

#[test]
fn arcsin_preset_inside_the_caustic_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "p.json",
        r#"{"m": 1, "g": 1, "k": 1, "aleph": "eq417", "grid": {"r_min": 0.5, "r_max": 50, "n": 1000}, "bracket": [0.5, 0.99]}"#,
    );
    let res = spingeo(&["radial-solve"], &input, &dir.path().join("o"));
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("r_min * m"), "{}", stderr(&res));
}

#[test]
fn empty_bracket_exits_one_with_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "p.json",
        r#"{"m": 1, "Zalpha": 0.3, "k": 1, "grid": {"r_min": 1e-6, "r_max": 200, "n": 1000}, "bracket": [0.2, 0.3]}"#,
    );
    let out = dir.path().join("o");
    let res = spingeo(&["radial-solve"], &input, &out);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("matching ="));
    let failure = read_json(&out.join("summary.json"));
    assert_eq!(failure["bracket"], serde_json::json!([0.2, 0.3]));
    assert!(failure["trace"].as_array().unwrap().len() >= 2);
}

fn flat(psi: &Spinor) -> Vec<f64> {
    psi.iter().flat_map(|z| [z.re, z.im]).collect()
}

#[test]
fn classify_worked_examples() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let input = write(
        dir.path(),
        "s.json",
        &format!("[[1,0,0,0,0,0,0,0], [{h},0,0,0,{h},0,0,0], [0,0,0,0,0,0,0,0]]"),
    );
    let out = dir.path().join("c.csv");
    assert_eq!(spingeo(&["classify"], &input, &out).status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let kinds: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(kinds, ["light_front_left", "regular", "zero"]);
    let regular: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert!((regular[2].parse::<f64>().unwrap() - 1.0).abs() <= 1e-15);
}

#[test]
fn classify_empty_list_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.json", r#"{"spinors": []}"#);
    let out = dir.path().join("c.csv");
    assert_eq!(spingeo(&["classify"], &input, &out).status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("# index,kind,"));
}

#[test]
fn classify_majorana_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let list: Vec<Vec<f64>> = (0..200).map(|i| flat(&majorana_spinor(7, i))).collect();
    let input = write(dir.path(), "s.json", &serde_json::to_string(&list).unwrap());
    let out = dir.path().join("c.csv");
    assert_eq!(spingeo(&["classify"], &input, &out).status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{csv}");
    assert!(rows.iter().all(|r| !r.contains(",regular,")));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let ident = write(dir.path(), "i.json", SMALL_IDENTITIES);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        assert_eq!(spingeo(&["identities", "--seed", seed], &ident, &out).status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("5", "a.json"), run("5", "b.json"));
    assert_ne!(run("5", "a.json"), run("6", "c.json"));

    let field = write_field(dir.path(), "f.json", &wave_line(32), &["all"]);
    let grid = |name: &str| {
        let out = dir.path().join(name);
        assert_eq!(spingeo(&["grid-analyze"], &field, &out).status.code(), Some(0));
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    let (a, b) = (grid("ga"), grid("gb"));
    assert!(a.len() >= 19);
    assert_eq!(a, b);
}
