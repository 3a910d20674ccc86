use std::path::Path;
use std::process::{Command, Output};

fn bhlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhlab"))
        .args(args)
        .env_remove("BHLAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header row and data rows of CSV output, skipping `#` lines.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn field<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    let i = header.iter().position(|h| h == name).unwrap();
    &row[i]
}

#[test]
fn singular_series_value() {
    let o = bhlab(&["singular-series", "--poly", "1,0,1", "--z", "6"]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(field(&h, &rows[0], "value"), "1.125");
}

#[test]
fn identities_pass() {
    let o = bhlab(&["identities"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| field(&h, r, "passed") == "true"));
}

#[test]
fn small_family_moment() {
    let o = bhlab(&[
        "moment",
        "--d",
        "2",
        "--H",
        "1",
        "--x",
        "1",
        "--z",
        "2",
        "--mode",
        "exhaustive",
        "--from-one",
    ]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    let raw: f64 = field(&h, &rows[0], "direct_raw").parse().unwrap();
    assert!((raw - 6.19804).abs() < 1e-5);
    assert_eq!(field(&h, &rows[0], "visited"), "9");
}

#[test]
fn psi_variants() {
    let value = |args: &[&str]| -> f64 {
        let o = bhlab(args);
        assert!(o.status.success());
        let (h, rows) = csv_rows(&stdout(&o));
        field(&h, &rows[0], "value").parse().unwrap()
    };
    let ln2 = 2f64.ln();
    assert_eq!(
        value(&["psi", "--poly", "-3,0,1", "--x", "3", "--abs"]),
        0.0
    );
    assert!(
        (value(&["psi", "--poly", "-3,0,1", "--x", "3", "--abs", "--from-one"]) - ln2).abs()
            < 1e-14
    );
    assert!((value(&["psi", "--poly", "-10,0,1", "--x", "3", "--neg"]) - 3f64.ln()).abs() < 1e-14);
    assert!((value(&["psi", "--poly", "0,2", "--x", "5", "--theta"]) - ln2).abs() < 1e-14);
    assert!((value(&["psi", "--poly", "1,0,1", "--x", "3"]) - 10f64.ln()).abs() < 1e-14);
}

#[test]
fn bv_row() {
    let o = bhlab(&["bv", "--X", "100", "--Q", "3"]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    assert!(field(&h, &rows[0], "value").parse::<f64>().unwrap() > 0.0);
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec![
        "moment",
        "--d",
        "2",
        "--H",
        "20",
        "--x",
        "4,8",
        "--z",
        "5,10",
        "--mode",
        "mc",
        "--samples",
        "30000",
        "--seed",
        "17",
        "--out",
    ];
    let p = path.to_str().unwrap().to_string();
    args.push(&p);
    args.extend_from_slice(extra);
    let o = bhlab(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(dir.path(), "a.csv", &[]);
    let b = run_to(dir.path(), "b.csv", &[]);
    assert_eq!(a, b);
    let (h, rows) = csv_rows(&String::from_utf8(a.clone()).unwrap());
    assert_eq!(rows.len(), 4);
    assert!(h.iter().any(|c| c == "mc_stderr"));

    // multi-threaded runs differ only in the echoed thread count
    let c = run_to(dir.path(), "c.csv", &["--threads", "4"]);
    let strip = |v: &[u8]| {
        String::from_utf8(v.to_vec())
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# threads"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&c));
}

#[test]
fn json_fields_match_csv_header() {
    let base = [
        "moment", "--d", "1", "--H", "5", "--x", "6", "--center", "none",
    ];
    let (h, _) = csv_rows(&stdout(&bhlab(&base)));
    let mut args = base.to_vec();
    args.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&bhlab(&args))).unwrap();
    let keys: Vec<String> = v["rows"][0].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, h);
    assert_eq!(v["config"]["seed"], "0");
    assert!(v["rows"][0]["z"].is_null());
}

#[test]
fn exit_codes() {
    assert_eq!(bhlab(&["moment", "--bogus"]).status.code(), Some(2));
    assert_eq!(bhlab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        bhlab(&["moment", "--d", "2", "--H", "3", "--x", "3", "--mode", "mc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bhlab(&["singular-series", "--poly", "1,1", "--z", "0.5"])
            .status
            .code(),
        Some(2)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_bhlab"))
        .args(["moment", "--d", "2", "--H", "50", "--x", "10"])
        .env("BHLAB_BUDGET", "1e3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exhaustive family traversal"));
    assert_eq!(
        bhlab(&["bv", "--X", "1000000", "--Q", "2000"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# defaults\nd = 2\nH = 50\nx = 1\nz = 2\nfrom-one = true\n",
    )
    .unwrap();
    let o = bhlab(&["moment", "--config", cfg.to_str().unwrap(), "--H", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# H = 1\n"));
    let (h, rows) = csv_rows(&text);
    let raw: f64 = field(&h, &rows[0], "direct_raw").parse().unwrap();
    assert!((raw - 6.19804).abs() < 1e-5);

    std::fs::write(&cfg, "unknown = 3\n").unwrap();
    let o = bhlab(&[
        "bv",
        "--config",
        cfg.to_str().unwrap(),
        "--X",
        "10",
        "--Q",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sieve_check_passes() {
    let o = bhlab(&["sieve-check", "--n-max", "20000", "--pairs", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert!(rows.iter().all(|r| field(&h, r, "passed") == "true"));
}
