use std::path::Path;
use std::process::{Command, Output};

fn spinconc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinconc")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().expect("utf-8 path").to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(k).expect("cell").to_string()).collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn sharpness_constant_for_n2() {
    let d = tempfile::tempdir().unwrap();
    let o = spinconc(&["sharpness", "--N", "2", "--eps", "0.05,0.02,0.01", "--out", &out_arg(d.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.path().join("results.csv")).unwrap();
    let ratios = csv_column(&csv, "D_sq_over_eps4");
    let last: f64 = ratios.last().unwrap().parse().unwrap();
    assert!((last / 0.0625 - 1.0).abs() < 0.02, "{last}");
    assert_eq!(csv, String::from_utf8(o.stdout).unwrap());
}

#[test]
fn schatten_trace_identity() {
    let d = tempfile::tempdir().unwrap();
    let o = spinconc(&["schatten", "--N", "3", "--region", "cap:0,measure=0.25", "--p", "1", "--out", &out_arg(d.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.path().join("results.csv")).unwrap();
    let norm: f64 = csv_column(&csv, "schatten_norm")[0].parse().unwrap();
    assert!((norm - 1.0).abs() < 1e-12);
    let spectrum = std::fs::read_to_string(d.path().join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 5);
    let m = manifest(d.path());
    assert_eq!(m["rules"]["assembly"]["kind"]["tensor_product"]["n_s"], 4);
    assert_eq!(m["software"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn malformed_region_is_a_schema_error() {
    let d = tempfile::tempdir().unwrap();
    let o = spinconc(&[
        "schatten",
        "--region",
        r#"{"cap": {"center": [0, 0], "measur": 0.2}}"#,
        "--out",
        &out_arg(d.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap.measur"), "{}", stderr(&o));
    let o = spinconc(&["schatten", "--region", "disc:0,measure=0.2", "--out", &out_arg(d.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.path().join("manifest.json").exists());
}

#[test]
fn sharpness_rejects_degree_one() {
    let o = spinconc(&["sharpness", "--N", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("N ≥ 2"));
}

#[test]
fn unwritable_output_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let file = d.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let o = spinconc(&["concentrate", "--out", &out_arg(&file.join("sub"))]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn certification_failure_exits_3_and_names_the_check() {
    let d = tempfile::tempdir().unwrap();
    // one radial node cannot resolve the entropy of a coherent state
    let o = spinconc(&[
        "wehrl",
        "--poly",
        r#"{"N": 2, "coeffs": [[1, 0], [0, 0], [0, 0]]}"#,
        "--phi",
        "xlogx",
        "--n-s",
        "1",
        "--n-theta",
        "1",
        "--tol",
        "10",
        "--out",
        &out_arg(d.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("entropy gap"), "{}", stderr(&o));
    let m = manifest(d.path());
    assert_eq!(m["certified"], false);
    assert_eq!(m["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn spec_file_defaults_and_seed_are_recorded() {
    let d = tempfile::tempdir().unwrap();
    let spec = d.path().join("run.json");
    std::fs::write(&spec, r#"{"subcommand": "stability", "seed": 17, "trials": 2}"#).unwrap();
    let out = d.path().join("o");
    let o = spinconc(&["stability", "--spec", spec.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["spec"]["seed"], 17);
    assert_eq!(m["spec"]["N"], 4);
    assert_eq!(m["spec"]["region"]["cap"]["measure"], 0.25);
    assert_eq!(m["seeds"][0]["batch_seed"], 17);
    assert!(m["spec"].get("output").is_none());

    let minimal = d.path().join("min.json");
    std::fs::write(&minimal, "{}").unwrap();
    let out2 = d.path().join("o2");
    let o = spinconc(&["wehrl", "--spec", minimal.to_str().unwrap(), "--out", &out_arg(&out2)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out2);
    assert_eq!(m["spec"]["seed"], 0);
    assert_eq!(m["spec"]["phi"].as_array().unwrap().len(), 3);
    assert!(m["tolerances"]["gap_slack"].is_number());
}

#[test]
fn flags_override_the_file_and_mismatches_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    let spec = d.path().join("run.json");
    std::fs::write(&spec, r#"{"N": 3, "seed": 5}"#).unwrap();
    let o = spinconc(&["deficit", "--spec", spec.to_str().unwrap(), "--N", "6", "--out", &out_arg(&d.path().join("o"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&d.path().join("o"));
    assert_eq!((m["spec"]["N"].as_u64(), m["spec"]["seed"].as_u64()), (Some(6), Some(5)));

    std::fs::write(&spec, r#"{"subcommand": "wehrl"}"#).unwrap();
    let o = spinconc(&["deficit", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&spec, r#"{"N": 3, "colour": 1}"#).unwrap();
    let o = spinconc(&["deficit", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let o = spinconc(&["mixed", "--N", "3", "--trials", "2", "--format", "json", "--out", &out_arg(&d.path().join(name))]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["results.json", "manifest.json"] {
        let a = std::fs::read(d.path().join("a").join(f)).unwrap();
        let b = std::fs::read(d.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let text = std::fs::read_to_string(d.path().join("a/results.json")).unwrap();
    let first = text.lines().nth(1).unwrap();
    assert!(first.trim_start().starts_with(r#"{"trial": 0, "N": 3, "rank""#), "{first}");
    assert!(text.ends_with("\n]\n"));
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spinconc"))
        .args(["concentrate", "--trials", "4", "--out", &out_arg(d.path())])
        .env("SPINCONC_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_spinconc"))
        .args(["concentrate", "--out", &out_arg(d.path())])
        .env("SPINCONC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn levelsets_and_fock_limit_write_their_tables() {
    let d = tempfile::tempdir().unwrap();
    let o = spinconc(&["levelsets", "--N", "2", "--profile-points", "4", "--out", &out_arg(&d.path().join("l"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let profile = std::fs::read_to_string(d.path().join("l/profile_0.csv")).unwrap();
    assert_eq!(profile.lines().count(), 5);
    let o = spinconc(&["fock-limit", "--N-list", "64,128,256", "--out", &out_arg(&d.path().join("f"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fits = std::fs::read_to_string(d.path().join("f/fits.csv")).unwrap();
    let orders = csv_column(&fits, "order");
    let quantities = csv_column(&fits, "quantity");
    let mf = quantities.iter().position(|q| q == "measure_factor").unwrap();
    let order: f64 = orders[mf].parse().unwrap();
    assert!(order > 0.9, "{order}");
}

#[test]
fn unused_fields_are_rejected() {
    let o = spinconc(&["asymmetry", "--N", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not used by `asymmetry`"));
}
