use std::process::{Command, Output};

fn oddseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oddseq"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.records().map(Result::unwrap).collect()
}

#[test]
fn exact_table_shape_and_values() {
    let o = oddseq(&["exact", "--n-max", "100", "--moments", "0,2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "n,ou,ou_2"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 101);
    assert_eq!(&rows[3][0], "3");
    assert_eq!(&rows[3][1], "4");
    assert_eq!(&rows[3][2], "8");
}

#[test]
fn metadata_is_embedded() {
    let text = stdout(&oddseq(&["exact", "--n-max", "3"]));
    for key in ["version", "command_line", "seed", "started", "finished"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("# {key}: "))), "{key}");
    }
    assert!(text.contains("# started: \"2023-11-14T22:13:20Z\""));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["exact", "--n-max", "60", "--moments", "0,2,4"];
    assert_eq!(oddseq(&args).stdout, oddseq(&args).stdout);
}

#[test]
fn json_table_format() {
    let o = oddseq(&["rankdist", "--n", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["total"], "9");
    let rows = v["rows"].as_array().unwrap();
    let sum: u64 = rows.iter().map(|r| r["count"].as_str().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(sum, 9);
    assert_eq!(rows.first().unwrap()["m"], "-4");
}

#[test]
fn odd_ell_is_a_usage_error() {
    let o = oddseq(&["asympt", "--n", "200", "--ell", "0,3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank symmetry"));
}

#[test]
fn asympt_records_quadrature_and_tends_to_one() {
    let o = oddseq(&["asympt", "--n", "100,200,400", "--ell", "0", "--k-max", "1", "--nodes", "48"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# quadrature: ") && text.contains("\"nodes\":48"));
    assert!(text.contains("# k_max: 1"));
    let ratios: Vec<f64> = csv_rows(&text).iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()), "{ratios:?}");
}

#[test]
fn saddle_single_peak() {
    let o = oddseq(&["saddle", "--n", "2000", "--m", "60"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let ratio: f64 = rows[0][7].parse().unwrap();
    assert!((ratio - 1.0).abs() < 0.15);
}

#[test]
fn verify_modular_exits_zero() {
    let o = oddseq(&["verify", "--suite", "modular"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["metadata"]["version"].is_string());
}

#[test]
fn verify_failure_exits_one() {
    let o = oddseq(&["verify", "--suite", "modular", "--tolerance", "1e-20"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn randomized_commands_need_a_seed() {
    assert_eq!(oddseq(&["sample", "--n", "100", "--count", "5"]).status.code(), Some(2));
    assert_eq!(oddseq(&["verify", "--suite", "limits"]).status.code(), Some(2));
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--n", "10000", "--count", "2000", "--mode", "free", "--seed", "42", "--threads", "2"];
    let a = oddseq(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, oddseq(&args).stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    let meta: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(meta["metadata"]["seed"], 42);
    let recs: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 2000);
    for key in ["m", "N", "rank", "peak", "y_left", "y_right", "x_small"] {
        assert!(recs[0].get(key).is_some(), "{key}");
    }
    assert!(recs.iter().all(|r| r["peak"] == 2 * r["m"].as_u64().unwrap() + 1));
}

#[test]
fn exact_mode_hits_the_target_size() {
    let o = oddseq(&["sample", "--n", "50", "--count", "20", "--mode", "exact", "--seed", "7"]);
    assert!(o.status.success());
    for l in stdout(&o).lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["N"], 50);
    }
}

#[test]
fn auto_seed_is_logged() {
    let o = oddseq(&["sample", "--n", "100", "--count", "1", "--seed", "auto"]);
    assert!(o.status.success());
    let meta: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    let seed = meta["metadata"]["seed"].as_u64().unwrap();
    assert!(String::from_utf8_lossy(&o.stderr).contains(&seed.to_string()));
}

#[test]
fn resource_limit_exits_three() {
    let o = oddseq(&["sample", "--n", "3000", "--count", "1", "--mode", "exact", "--seed", "1", "--max-attempts", "1"]);
    assert_eq!(o.status.code(), Some(3));
}
