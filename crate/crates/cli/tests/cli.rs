use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn genpr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genpr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn certify_builtin_mc2_is_pr() {
    let out = genpr(&["certify", "--builtin", "mc2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "CertifiedPR");
    assert_eq!(v["field"], "C");
}

#[test]
fn certify_builtin_squaring_is_pr() {
    let out = genpr(&["certify", "--builtin", "squaring"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["verdict"], "CertifiedPR");
}

#[test]
fn bounds_complex_five_is_sixteen() {
    let out = genpr(&["bounds", "--d", "5", "--field", "C"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["exact"], 16);
    assert_eq!(v["lower"], 16);
    assert_eq!(v["upper"], 16);
}

#[test]
fn bounds_table_columns_and_rows() {
    let out = genpr(&["bounds", "--table", "--dmax", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["d", "field", "lower", "upper", "exact", "provenance"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 5);
    let c5 = rows.iter().find(|r| &r[0] == "5" && &r[1] == "C").unwrap();
    assert_eq!(&c5[4], "16");
    let r3 = rows.iter().find(|r| &r[0] == "3" && &r[1] == "R").unwrap();
    assert_eq!(&r3[4], "5");

    let only_real = genpr(&["bounds", "--table", "--dmax", "4", "--field", "R"]);
    let text = String::from_utf8(only_real.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
}

#[test]
fn certify_flip_pair_has_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "flip.json",
        r#"{"field":"R","d":2,"matrices":[[[1,0],[0,1]],[[1,0],[0,-1]]]}"#,
    );
    let out = genpr(&["certify", "--ensemble", &path]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "CertifiedNotPR");
    let x: Vec<f64> = serde_json::from_value(v["witness"]["x"].clone()).unwrap();
    let y: Vec<f64> = serde_json::from_value(v["witness"]["y"].clone()).unwrap();
    let mx = [x[0] * x[0] + x[1] * x[1], x[0] * x[0] - x[1] * x[1]];
    let my = [y[0] * y[0] + y[1] * y[1], y[0] * y[0] - y[1] * y[1]];
    assert!((mx[0] - my[0]).abs() < 1e-9 && (mx[1] - my[1]).abs() < 1e-9);
    let qd = (x[0] - y[0]).hypot(x[1] - y[1]).min((x[0] + y[0]).hypot(x[1] + y[1]));
    assert!(qd > 1e-3);
}

#[test]
fn malformed_json_exits_two_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad_entry = write(
        dir.path(),
        "entry.json",
        r#"{"field":"R","d":2,"matrices":[[[1,0],[0,1]],[[1,0],[0,"x"]]]}"#,
    );
    let out = genpr(&["certify", "--ensemble", &bad_entry]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&bad_entry), "{err}");
    assert!(err.contains("$.matrices[1][1][1]"), "{err}");

    let not_json = write(dir.path(), "broken.json", "{\"field\": ");
    let out = genpr(&["certify", "--ensemble", &not_json]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains(&not_json));

    let missing = dir.path().join("absent.json");
    let out = genpr(&["certify", "--ensemble", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(genpr(&["bounds"]).status.code(), Some(2));
    assert_eq!(genpr(&["gen", "--d", "3", "--n", "2", "--ranks", "1"]).status.code(), Some(2));
    assert_eq!(genpr(&["gen", "--d", "3", "--n", "2", "--rank", "4"]).status.code(), Some(2));
    assert_eq!(genpr(&["certify", "--builtin", "mc2", "--restarts", "0"]).status.code(), Some(2));
    assert_eq!(
        genpr(&["sweep", "--dmin", "3", "--dmax", "2", "--nmin", "4", "--nmax", "4"]).status.code(),
        Some(2)
    );
}

#[test]
fn inconclusive_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("c.json");
    let out = genpr(&[
        "gen", "--d", "4", "--n", "12", "--field", "C", "--seed", "1", "--out", ens.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let common = ["certify", "--ensemble", ens.to_str().unwrap(), "--restarts", "4", "--sphere-samples", "32"];
    let likely = genpr(&common);
    assert_eq!(likely.status.code(), Some(0));
    assert_eq!(stdout_json(&likely)["verdict"], "LikelyPR");

    let mut strict = common.to_vec();
    strict.extend(["--jacobian-tol", "1e3"]);
    let out = genpr(&strict);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout_json(&out)["verdict"], "Inconclusive");
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let args = ["gen", "--d", "3", "--n", "5", "--kind", "psd_rank", "--ranks", "1,2,3,1,2", "--seed", "9"];
    let a = genpr(&args);
    let b = genpr(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let e = genpr::io::parse_ensemble(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(e.len(), 5);
}

#[test]
fn recover_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let ens = write(
        dir.path(),
        "e.json",
        r#"{"field":"R","d":2,"matrices":[[[1,0],[0,0]],[[0,0],[0,1]],[[1,1],[1,1]]]}"#,
    );
    // x = (2, -1): x0^2, x1^2, (x0 + x1)^2
    let b = write(dir.path(), "b.json", "[4, 1, 1]");
    let out = genpr(&["recover", "--ensemble", &ens, "--b", &b]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let x: Vec<f64> = serde_json::from_value(v["estimate"].clone()).unwrap();
    let s = x[0].signum();
    assert!((s * x[0] - 2.0).abs() < 1e-8 && (s * x[1] + 1.0).abs() < 1e-8, "{x:?}");
    assert_eq!(v["non_unique"], false);

    let noisy = genpr(&["recover", "--ensemble", &ens, "--b", &b, "--noise", "1e-3", "--seed", "5"]);
    assert_eq!(noisy.status.code(), Some(0));
    assert_eq!(noisy.stdout, genpr(&["recover", "--ensemble", &ens, "--b", &b, "--noise", "1e-3", "--seed", "5"]).stdout);
    assert_ne!(noisy.stdout, out.stdout);

    let short = write(dir.path(), "short.json", "[4, 1]");
    assert_eq!(genpr(&["recover", "--ensemble", &ens, "--b", &short]).status.code(), Some(2));
}

#[test]
fn bilinear_commands() {
    let out = genpr(&["bilinear", "--algebra", "quaternion"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["verdict"], "LikelyNonsingular");
    assert_eq!(v["form"]["n"], 4);
    assert_eq!(v["stiefel_hopf_lower_bound"], 4);

    let out = genpr(&["bilinear", "--p", "3", "--q", "3", "--n", "4", "--seed", "2"]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["verdict"], "Singular");
    assert_eq!(v["stiefel_hopf_lower_bound"], 4);

    let out = genpr(&["bilinear", "--p", "3", "--q", "3", "--n", "5", "--seed", "2"]);
    assert_eq!(stdout_json(&out)["result"]["verdict"], "LikelyNonsingular");
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    let out = genpr(&["bounds", "--d", "3", "--field", "R", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["exact"], 5);

    let unwritable = dir.path().join("missing").join("x.json");
    let out = genpr(&["bounds", "--d", "3", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
