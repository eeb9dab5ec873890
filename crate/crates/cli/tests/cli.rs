use std::process::{Command, Output};

const EWENS: &str = r#"{"type":"ewens_pitman","alpha":0,"theta":1}"#;

fn gibbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbs")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn block_count_law_of_ewens_four() {
    let out = gibbs(&["dist", "--model", EWENS, "--n", "4", "--stat", "blocks"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["k", "probability"]);
    // |s(4,k)| / 4! = 6, 11, 6, 1 over 24
    let want = [6.0, 11.0, 6.0, 1.0];
    for (row, w) in rows[1..].iter().zip(want) {
        let p: f64 = row[1].parse().unwrap();
        assert!((p - w / 24.0).abs() < 1e-15, "{row:?}");
    }
    assert_eq!(rows.len(), 5);
}

#[test]
fn exact_column_in_rational_mode() {
    let out = gibbs(&["dist", "--model", EWENS, "--n", "4", "--stat", "smallest", "--r", "2", "--exact"]);
    assert_eq!(stdout(&out), "r,probability,exact\n2,0.375,3/8\n");
}

#[test]
fn json_output_parses() {
    let out = gibbs(&["dist", "--model", EWENS, "--n", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[2]["k"], 3);
}

#[test]
fn dickman_at_one_half() {
    let out = gibbs(&["asymp", "--name", "dickman", "--alpha", "0", "--theta", "1", "--x", "0.5"]);
    let rows = csv_rows(&stdout(&out));
    let v: f64 = rows[1][1].parse().unwrap();
    assert!((v - (1.0 - 2f64.ln())).abs() < 1e-6);
}

#[test]
fn table1_cell_is_consistent_with_exact_probability() {
    let out = gibbs(&["verify", "table1", "--cell", "alpha=0,theta=1", "--trials", "10000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["alpha", "theta", "trials", "count", "expected", "sigma", "paper", "pass"]);
    let count: f64 = rows[1][3].parse().unwrap();
    let expected: f64 = rows[1][4].parse().unwrap();
    let sigma: f64 = rows[1][5].parse().unwrap();
    assert!((count - expected).abs() <= 4.0 * sigma);
    assert!((3610.0 - expected).abs() <= 4.0 * sigma);
    assert_eq!(rows[1][7], "true");
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let model = r#"{"type":"ewens_pitman","alpha":0.5,"theta":1}"#;
    let base = ["sample", "--model", model, "--n", "30", "--trials", "200", "--seed", "9"];
    let a = gibbs(&base);
    let b = gibbs(&base);
    let mut threaded = base.to_vec();
    threaded.extend(["--threads", "3"]);
    let c = gibbs(&threaded);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert_eq!(stdout(&a).lines().count(), 201);
}

#[test]
fn writes_to_output_file() {
    let dir = std::env::temp_dir().join(format!("gibbs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.csv");
    let out = gibbs(&["bell", "--kind", "stirling1", "--n", "4", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,value,ln_abs\n0,0,-inf\n1,6,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn parameter_errors_exit_2() {
    let bad_model = gibbs(&["dist", "--model", r#"{"type":"ewens_pitman","alpha":1.5,"theta":1}"#, "--n", "4"]);
    assert_eq!(bad_model.status.code(), Some(2));
    assert!(bad_model.stdout.is_empty());
    assert_eq!(gibbs(&["dist", "--model", "not json", "--n", "4"]).status.code(), Some(2));
    assert_eq!(gibbs(&["dist", "--model", EWENS]).status.code(), Some(2));
    assert_eq!(gibbs(&["dist", "--model", EWENS, "--n", "4", "--r", "9", "--stat", "smallest"]).status.code(), Some(2));
    assert_eq!(gibbs(&["dist", "--model", EWENS, "--n", "4", "--stat", "conditional-largest"]).status.code(), Some(2));
    assert_eq!(gibbs(&["asymp", "--name", "dickman", "--alpha", "0"]).status.code(), Some(2));
    assert_eq!(gibbs(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_3() {
    // an unreachable tolerance for an 8-dimensional integral
    let out = gibbs(&[
        "asymp", "--name", "dirichlet", "--b", "8", "--p", "0.1", "--q", "0.05", "--nu", "1", "--rho", "1", "--tol",
        "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));
}

#[test]
fn verify_suites_pass() {
    let oracle = gibbs(&["verify", "oracle", "--n", "6"]);
    assert_eq!(oracle.status.code(), Some(0));
    assert!(stdout(&oracle).lines().skip(1).all(|l| l.ends_with(",true")));
    let ident = gibbs(&["verify", "identities", "--n", "8"]);
    assert_eq!(ident.status.code(), Some(0));
    assert_eq!(stdout(&ident).lines().count(), 1 + 3 * 8);
}
