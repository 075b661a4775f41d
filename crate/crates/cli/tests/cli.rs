use std::path::Path;
use std::process::{Command, Output};

fn magdirac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magdirac")).args(args).output().expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV with a `#` header block, header line excluded.
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn classify_prints_label_and_clause() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "c.json", r#"{"kind":"power_law","V0":1,"B0":1,"t":1,"s":3}"#);
    let o = magdirac(&["classify", "--spec", &spec]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "regime=DiscreteSpectrum clause=(c):t<s/2");
}

#[test]
fn negative_amplitude_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "bad.json", r#"{"kind":"power_law","V0":-1,"B0":1,"t":1,"s":3}"#);
    let o = magdirac(&["classify", "--spec", &spec]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("code=E_SPEC_V0_NONPOSITIVE"), "{err}");
}

#[test]
fn distinct_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_spec(dir.path(), "l.json", r#"{"kind":"power_law","V0":0,"B0":1,"t":0,"s":0}"#);
    let malformed = write_spec(dir.path(), "m.json", r#"{"kind": "power_law", "V0": }"#);
    let unknown_key = write_spec(dir.path(), "u.json", r#"{"kind":"power_law","V0":1,"B0":1,"t":1,"s":3,"x":1}"#);

    let o = magdirac(&["spectrum", "--spec", &good, "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("code=E_USAGE"));

    for spec in [&malformed, &unknown_key] {
        let o = magdirac(&["classify", "--spec", spec]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).starts_with("code=E_SPEC_PARSE"), "{}", stderr(&o));
    }

    let o = magdirac(&["spectrum", "--spec", &good, "--radius", "20", "--cells", "200000", "--sectors", "0..0", "--window", "-1e6,1e6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("code=E_WINDOW_REFUSED"), "{}", stderr(&o));

    let o = magdirac(&["classify", "--spec", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("code=E_IO"));
}

#[test]
fn landau_spectrum_lists_the_first_levels() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "landau.json", r#"{"kind":"power_law","V0":0,"B0":1,"t":0,"s":0}"#);
    let o = magdirac(&["spectrum", "--spec", &spec, "--sectors", "-3..3", "--window", "1,3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let values: Vec<f64> = data_rows(&stdout(&o)).iter().map(|r| r[2].parse().unwrap()).collect();
    for level in [2f64.sqrt(), 2.0, 6f64.sqrt()] {
        assert!(values.iter().any(|v| (v - level).abs() < 1e-3), "{level} missing from {values:?}");
    }
    for v in &values {
        let n = (v * v / 2.0).round();
        assert!((v - (2.0 * n).sqrt()).abs() < 1e-3);
    }
}

#[test]
fn reruns_are_byte_identical_and_carry_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "e.json", r#"{"kind":"regularized","V0":1,"B0":1,"t":0.6,"s":1}"#);
    let run = |out: &str| {
        let out = dir.path().join(out);
        let o = magdirac(&[
            "coercivity", "--spec", &spec, "--radius", "10", "--cells", "200", "--sectors", "-2..2", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let csv_a = std::fs::read(a.join("coercivity.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("coercivity.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("# magdirac "));
    assert!(text.contains("# spec_sha256="));
    assert_eq!(data_rows(&text).len(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "coercivity");
    assert_eq!(manifest["outputs"][0]["file"], "coercivity.csv");
    assert_eq!(manifest["outputs"][0]["rows"], 5);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sweep_reproduces_the_regime_table() {
    let points = [
        ("1,1,1,3", "c"),
        ("1,1,0.5,2", "c"),
        ("1.4142135623730951,1,1,2", "d"),
        ("1,1,0.6,1", "e"),
        ("1,1,0.9,1", "e"),
        ("1,1,3,1", "b"),
        ("1,1,2.5,1.5", "b"),
    ];
    let mut args = vec!["sweep"];
    for (p, _) in &points {
        args.extend(["--point", p]);
    }
    let o = magdirac(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let items: Vec<String> = reader.records().map(|r| r.unwrap()[5].to_string()).collect();
    assert_eq!(items, points.iter().map(|p| p.1).collect::<Vec<_>>());
}

#[test]
fn zeromode_identities_hold_on_the_landau_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "landau.json", r#"{"kind":"power_law","V0":0,"B0":1,"t":0,"s":0}"#);
    let o = magdirac(&["zeromode", "--spec", &spec, "--max-degree", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r[3].parse::<f64>().unwrap() < 1e-8);
        assert!(r[6].parse::<f64>().unwrap() < 1e-3);
    }
}

#[test]
fn quasimode_rows_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "q.json", r#"{"kind":"power_law","V0":1.4142135623730951,"B0":1,"t":1,"s":2}"#);
    let o = magdirac(&["quasimode", "--spec", &spec, "--centers", "10,20,40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("# cutoff=bump:"));
    let fd: Vec<f64> = data_rows(&text).iter().map(|r| r[13].parse().unwrap()).collect();
    assert_eq!(fd.len(), 3);
    assert!(fd.windows(2).all(|w| w[1] < w[0]), "{fd:?}");
}
