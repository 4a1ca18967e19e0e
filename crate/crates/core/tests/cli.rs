use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hecke_spectra::lowlying::ZeroDataset;
use serde_json::Value;

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hecke-spectra"));
    cmd.args(args).env_remove("HECKE_SPECTRA_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn artifact(args: &[&str]) -> Value {
    let out = run(args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn diagnostic(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("JSON diagnostic on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn cosets_reports_degree_and_config() {
    let v = artifact(&["cosets", "--n", "2", "--p", "3", "--omega", "1,0", "--list"]);
    assert_eq!(v["degree"], 4);
    assert_eq!(v["cosets"].as_array().unwrap().len(), 4);
    assert_eq!(v["config"]["n"], 2);
    assert_eq!(v["config"]["primes"], serde_json::json!([3]));
}

#[test]
fn satake_flags_non_tempered_roots() {
    let v = artifact(&["satake", "--n", "2", "--p", "3", "--lambdas", "4"]);
    assert_eq!(v["tempered"], false);
    let mut m: Vec<f64> = v["moduli"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    m.sort_by(f64::total_cmp);
    assert!((m[0] * 3f64.sqrt() - 1.0).abs() < 1e-12 && (m[1] - 3f64.sqrt()).abs() < 1e-12);
    let v = artifact(&["satake", "--n", "2", "--p", "3", "--omega", "1,0"]);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 1);
}

#[test]
fn exit_codes_and_diagnostics() {
    let out = run(&["cosets", "--n", "2", "--p", "9", "--omega", "1,0"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let d = diagnostic(&out);
    assert_eq!(d["error"]["kind"], "invalid_input");
    assert_eq!(d["error"]["exit_code"], 1);

    let out = run(&["cosets", "--n", "4", "--p", "97", "--omega", "6,0,0,0"], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(diagnostic(&out)["error"]["kind"], "budget_exceeded");

    let out = run(&["satake", "--n", "3", "--p", "3", "--lambdas", "1"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_precedence_and_config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("run.toml");
    fs::write(&toml_path, "n = 2\nprimes = [5]\nseed = 11\n[cosets]\nomega = [2, 0]\n").unwrap();
    let cfg = toml_path.to_str().unwrap();

    let from_file = artifact(&["cosets", "--config", cfg]);
    assert_eq!(from_file["config"]["seed"], 11);
    assert_eq!(from_file["degree"], 30);

    let out = run(&["cosets", "--config", cfg], &[("HECKE_SPECTRA_SEED", "12")]);
    assert_eq!(serde_json::from_slice::<Value>(&out.stdout).unwrap()["config"]["seed"], 12);
    let out = run(&["cosets", "--config", cfg, "--seed", "13"], &[("HECKE_SPECTRA_SEED", "12")]);
    assert_eq!(serde_json::from_slice::<Value>(&out.stdout).unwrap()["config"]["seed"], 13);
    let out = run(&["cosets", "--config", cfg], &[("HECKE_SPECTRA_SEED", "x")]);
    assert_eq!(out.status.code(), Some(1));

    let first = dir.path().join("a.json");
    let out = run(&["family", "--n", "2", "--mu", "6", "--primes", "3", "--out", first.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let second = dir.path().join("b.json");
    let out = run(&["family", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()], &[]);
    assert!(out.status.success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    fs::write(&toml_path, "n = 2\nbogus = 1\n").unwrap();
    assert_eq!(run(&["cosets", "--config", cfg], &[]).status.code(), Some(1));
}

#[test]
fn output_does_not_depend_on_threads() {
    let args = ["measure", "--kind", "plancherel", "--n", "2", "--p", "5", "--samples", "500"];
    let one = run(&[&args[..], &["--threads", "1"]].concat(), &[]);
    let four = run(&[&args[..], &["--threads", "4"]].concat(), &[]);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn measure_writes_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    let plot = dir.path().join("p.csv");
    let conv = dir.path().join("c.csv");
    let v = artifact(&[
        "measure", "--kind", "sato-tate", "--n", "3", "--samples", "200",
        "--samples-csv", samples.to_str().unwrap(), "--plot-csv", plot.to_str().unwrap(),
        "--convergence", "5,7,11", "--convergence-csv", conv.to_str().unwrap(),
    ]);
    assert_eq!(v["kind"], "sato_tate");
    for row in v["pairings"].as_array().unwrap() {
        let expected = row["expected"].as_f64().unwrap();
        assert!((row["value"][0].as_f64().unwrap() - expected).abs() < 1e-9, "{row}");
    }
    let text = fs::read_to_string(&samples).unwrap();
    assert_eq!(text.lines().next(), Some("theta_1,theta_2,theta_3"));
    assert_eq!(text.lines().count(), 201);
    assert_eq!(fs::read_to_string(&plot).unwrap().lines().count(), 65);
    let table = fs::read_to_string(&conv).unwrap();
    assert_eq!(table.lines().next(), Some("x,y"));
    assert_eq!(table.lines().count(), 4);
    assert_eq!(v["convergence_table"]["max_decreasing"], true);
}

#[test]
fn family_dump_can_be_ingested() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("fam.csv");
    let v = artifact(&["family", "--n", "2", "--mu", "10", "--primes", "3,5", "--dump", dump.to_str().unwrap()]);
    let represented = v["represented"].as_u64().unwrap();
    assert!(represented > 0);
    assert_eq!(v["experiments"].as_array().unwrap().len(), 2);

    let text = fs::read_to_string(&dump).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, ["mu", "ktype", "theta_3_1", "theta_3_2", "theta_5_1", "theta_5_2"]);
    assert_eq!(text.lines().count() as u64, represented + 1);

    let back = artifact(&["family", "--n", "2", "--ingest", dump.to_str().unwrap()]);
    assert_eq!(back["simulated"].as_u64(), Some(represented));
    assert_eq!(back["provenance"]["source"], "ingested");
    assert_eq!(back["details"]["quarantined"].as_array().unwrap().len(), 0);
    assert!(back["details"]["fit"]["constant"].as_f64().unwrap() > 0.0);
    assert_eq!(back["experiments"][0]["mean"], v["experiments"][0]["mean"]);
}

#[test]
fn lowlying_with_zero_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("zeros.csv");
    ZeroDataset::synthetic_unitary(200, 50.0, 2.0, 3.0, 7).write(&csv).unwrap();
    assert!(Path::new(&ZeroDataset::sidecar_path(&csv)).exists());
    let v = artifact(&["lowlying", "--beta", "0.5", "--n", "3", "--zeros", csv.to_str().unwrap()]);
    assert_eq!(v["verified_regime"], true);
    assert_eq!(v["symmetry"], "U");
    assert!(v["empirical"]["value"].as_f64().unwrap().is_finite());
    for row in v["pairings"].as_array().unwrap() {
        assert!(row["error"].as_f64().unwrap() < 1e-6, "{row}");
    }
    let v = artifact(&["lowlying", "--beta", "1.5"]);
    assert_eq!(v["verified_regime"], false);
    assert!(v["pairings"][0]["closed_form"].is_null());
}

#[test]
fn weyl_artifact_fields() {
    let v = artifact(&["weyl", "--n", "3", "--mu-grid", "10,20"]);
    assert_eq!(v["dims"]["d"], 8);
    assert_eq!(v["counts"][0]["leading_exponent"], 8);
    assert_eq!(v["counts"][1]["leading_exponent"], 5);
    let preds = v["counts"][0]["predictions"].as_array().unwrap();
    let ratio = preds[1]["count"].as_f64().unwrap() / preds[0]["count"].as_f64().unwrap();
    assert!((ratio - 256.0).abs() < 1e-9);
    assert_eq!(v["prime_exponents"]["adjoint"], 81);
}
