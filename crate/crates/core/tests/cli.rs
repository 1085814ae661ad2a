use std::path::PathBuf;
use std::process::{Command, Output};

fn linkcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linkcalc"))
        .args(args)
        .env_remove("LINKCALC_WORKERS")
        .output()
        .expect("spawn linkcalc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bundled_data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/location1_synthetic.csv")
}

/// Header lines and parsed CSV body.
fn parse(text: &str) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let header: Vec<String> = text
        .lines()
        .filter(|l| l.starts_with('#'))
        .map(str::to_string)
        .collect();
    let mut body = text.lines().filter(|l| !l.starts_with('#'));
    let columns = body
        .next()
        .expect("column line")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = body
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, columns, rows)
}

fn column(columns: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = columns
        .iter()
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn curves_outage_increases_with_threshold() {
    let o = linkcalc(&[
        "curves",
        "--var",
        "gamma-th-db",
        "--start",
        "-5",
        "--stop",
        "25",
        "--points",
        "7",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, columns, rows) = parse(&stdout(&o));
    assert!(header.iter().any(|h| h.starts_with("# config_sha256: ")));
    assert_eq!(rows.len(), 7);
    for kind in ["sr", "ru", "af", "df"] {
        let col = column(&columns, &rows, &format!("{kind}_outage"));
        assert!(col.windows(2).all(|w| w[1] >= w[0]), "{kind}: {col:?}");
        assert!(col.iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

#[test]
fn one_and_two_point_sweeps() {
    let o = linkcalc(&[
        "curves", "--var", "gbar-db", "--start", "0", "--stop", "10", "--points", "2", "--kinds",
        "sr",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, columns, rows) = parse(&stdout(&o));
    assert_eq!(columns, ["gbar_db", "sr_outage"]);
    assert_eq!(column(&columns, &rows, "gbar_db"), [0.0, 10.0]);

    let o = linkcalc(&[
        "ec", "--var", "theta", "--start", "0.01", "--points", "1", "--kinds", "ru",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, columns, rows) = parse(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert!(column(&columns, &rows, "ru_ec")[0] > 0.0);
}

#[test]
fn reversed_sweep_is_an_input_error() {
    let o = linkcalc(&[
        "curves", "--var", "gbar-db", "--start", "10", "--stop", "5", "--points", "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("start < stop"));
}

#[test]
fn json_output_has_header_columns_rows() {
    let o = linkcalc(&[
        "--json", "ec", "--var", "theta", "--start", "1e-3", "--stop", "1", "--points", "3",
        "--scale", "log", "--kinds", "sr,df",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["header"]["command"], "ec");
    assert_eq!(v["header"]["seed"], "1");
    let cols: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(cols, ["theta", "sr_ec", "df_ec", "df_ec_asy"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let ec: Vec<f64> = rows.iter().map(|r| r[1].as_f64().unwrap()).collect();
    assert!(
        ec.windows(2).all(|w| w[1] < w[0]),
        "EC should fall with θ: {ec:?}"
    );
}

#[test]
fn eps_capacity_increases_with_epsilon() {
    let o = linkcalc(&[
        "eps-capacity",
        "--var",
        "epsilon",
        "--start",
        "1e-4",
        "--stop",
        "1e-1",
        "--points",
        "4",
        "--scale",
        "log",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, columns, rows) = parse(&stdout(&o));
    for kind in ["sr", "ru", "af", "df"] {
        let c = column(&columns, &rows, &format!("{kind}_c_eps"));
        assert!(c.windows(2).all(|w| w[1] > w[0]), "{kind}: {c:?}");
        let paired = column(&columns, &rows, &format!("{kind}_ec_inv_eps"));
        assert!(paired.windows(2).all(|w| w[1] > w[0]), "{kind}: {paired:?}");
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ec.csv");
    let args = [
        "ec", "--var", "gbar-db", "--start", "0", "--stop", "20", "--points", "3", "--kinds", "sr",
    ];
    let to_stdout = linkcalc(&args);
    let mut with_out = vec!["--out", path.to_str().unwrap()];
    with_out.extend_from_slice(&args);
    let o = linkcalc(&with_out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&to_stdout));
}

#[test]
fn fit_ranks_fisher_f_first_on_bundled_data() {
    let data = bundled_data();
    let o = linkcalc(&["fit", data.to_str().unwrap(), "--starts", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, columns, rows) = parse(&stdout(&o));
    assert!(header.iter().any(|h| h == "# alpha: 2.7"), "{header:?}");
    assert!(header.iter().any(|h| h == "# records: 650"), "{header:?}");
    let mse = column(&columns, &rows, "mse");
    let models: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    let best = mse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert_eq!(models[best], "fisher_f", "{models:?} {mse:?}");
}

#[test]
fn fit_reports_bad_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "distance_m,rx_power_dbm\n1,-40\n2,-41\n3,oops\n").unwrap();
    let o = linkcalc(&["fit", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("oops"), "{err}");
}

#[test]
fn fit_missing_file_is_an_input_error() {
    let o = linkcalc(&["fit", "/nonexistent/measurements.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    std::fs::write(&path, "[ground]\nm = 1.5\nshadowing = 3\n").unwrap();
    let o = linkcalc(&[
        "--config",
        path.to_str().unwrap(),
        "ec",
        "--var",
        "theta",
        "--start",
        "0.01",
        "--points",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("shadowing"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn config_changes_hash_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    std::fs::write(&path, "[ground]\nm = 2.5\nm_s = 4.0\n").unwrap();
    let args = [
        "curves", "--var", "gbar-db", "--start", "10", "--points", "1", "--kinds", "ru",
    ];
    let base = linkcalc(&args);
    let mut with_cfg = vec!["--config", path.to_str().unwrap()];
    with_cfg.extend_from_slice(&args);
    let custom = linkcalc(&with_cfg);
    assert!(custom.status.success(), "{}", stderr(&custom));
    let (h0, c0, r0) = parse(&stdout(&base));
    let (h1, c1, r1) = parse(&stdout(&custom));
    let hash = |h: &[String]| h.iter().find(|l| l.starts_with("# config_sha256")).cloned();
    assert_ne!(hash(&h0), hash(&h1));
    assert_ne!(column(&c0, &r0, "ru_outage"), column(&c1, &r1, "ru_outage"));
}

#[test]
fn validate_passes_and_fails_on_tolerance() {
    let common = [
        "--mc-samples",
        "200000",
        "validate",
        "--kinds",
        "sr,ru",
        "--gbars-db",
        "10",
    ];
    let ok = linkcalc(&common);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let mut strict = common.to_vec();
    strict.extend_from_slice(&["--ks-tol", "0"]);
    let bad = linkcalc(&strict);
    assert_eq!(bad.status.code(), Some(1));
    let text = stdout(&bad);
    assert!(text.contains("# verdict: FAIL (ks_sr_10dB"), "{text}");
}

#[test]
fn validate_verdicts_stable_across_seeds() {
    let verdicts = |seed: &str| {
        let o = linkcalc(&[
            "--seed",
            seed,
            "--mc-samples",
            "200000",
            "validate",
            "--kinds",
            "sr,df",
            "--gbars-db",
            "10,20",
        ]);
        let (_, columns, rows) = parse(&stdout(&o));
        let i = columns.iter().position(|c| c == "result").unwrap();
        (
            o.status.code(),
            rows.iter()
                .map(|r| (r[0].clone(), r[i].clone()))
                .collect::<Vec<_>>(),
        )
    };
    let a = verdicts("1");
    let b = verdicts("2");
    assert_eq!(a.0, Some(0));
    assert_eq!(a, b);
}

#[test]
fn monte_carlo_columns_independent_of_workers() {
    let args = |w: &'static str| {
        vec![
            "--workers",
            w,
            "--mc-samples",
            "100000",
            "curves",
            "--var",
            "gbar-db",
            "--start",
            "10",
            "--stop",
            "20",
            "--points",
            "2",
            "--kinds",
            "af",
            "--mc-validate",
        ]
    };
    let one = linkcalc(&args("1"));
    let four = linkcalc(&args("4"));
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(stdout(&one), stdout(&four));
}
