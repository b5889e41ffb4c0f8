use std::path::Path;
use std::process::{Command, Output};

fn fockfisher(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockfisher"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no `{key}` in\n{text}"));
    line[key.len()..].trim().parse().unwrap()
}

#[test]
fn single_reports_upsilon_for_the_headline_probe() {
    let o = fockfisher(&["single", "--state", "ghb:0,6", "--delta", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let upsilon = field(&text, "Upsilon");
    assert!((upsilon - 1.38008).abs() < 1e-4, "{upsilon}");
    assert!(text.contains("parameters   (phi, Delta)"));
    assert!(text.contains("commutator"));
}

#[test]
fn noon_saturates_the_single_qubit_bound() {
    let o = fockfisher(&["single", "--state", "noon:6", "--delta", "5", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let upsilon = v["upsilon"].as_f64().unwrap();
    assert!((upsilon - 1.0).abs() < 0.02, "{upsilon}");
    assert_eq!(v["parameter_order"], serde_json::json!(["phi", "Delta"]));
}

#[test]
fn zero_diffusion_is_reported_as_undefined() {
    let o = fockfisher(&["single", "--state", "ghb:0,2", "--delta", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Upsilon      undefined"), "{text}");
    assert!(text.contains("F_Q[Delta,Delta] vanishes"), "{text}");
}

#[test]
fn single_csv_has_one_header_and_one_row() {
    let o = fockfisher(&["single", "--state", "hb:4", "--delta", "2", "--eta", "0.5", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "label,N,n,delta_part,Delta,eta_a,eta_b,Upsilon,Sigma2,FC_pp,FC_dd,FQ_pp,FQ_dd,HCR,flags");
    assert!(lines[1].starts_with("hb(4),4,2,0,2.00000000000e0,5.00000000000e-1,5.00000000000e-1,"));
}

fn sweep_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    fockfisher(&args)
}

const SMALL_DELTA_SWEEP: &[&str] =
    &["--axis", "delta", "--photons", "2,3", "--families", "ghb0,hb,noon", "--delta-range", "0.2:6:4", "--eta", "1,0.5", "--grid-points", "201"];

#[test]
fn sweep_writes_one_file_per_panel_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sweep_into(tmp.path(), SMALL_DELTA_SWEEP);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "delta_sigma2_eta0.5.csv",
            "delta_sigma2_eta1.csv",
            "delta_upsilon_eta0.5.csv",
            "delta_upsilon_eta1.csv",
            "manifest.json",
            "timing.json"
        ]
    );
    let table = std::fs::read_to_string(tmp.path().join("delta_upsilon_eta1.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(table.as_bytes());
    assert_eq!(reader.headers().unwrap().len(), 15);
    // ghb(0,2), ghb(0,3), hb(2), hb(3), noon(2), noon(3) at four diffusions each
    assert_eq!(reader.records().count(), 24);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["axis"], "delta");
    assert_eq!(manifest["parameter_order"], serde_json::json!(["phi", "Delta"]));
    assert_eq!(manifest["config"]["deltas"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["config_echo"]["photons"], "2,3");
    assert_eq!(manifest["files"].as_array().unwrap().len(), 4);
    assert!(manifest["units"]["Sigma2"].as_str().unwrap().contains("rad^2"));
}

#[test]
fn sweeps_are_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let o = sweep_into(dir, SMALL_DELTA_SWEEP);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["delta_upsilon_eta1.csv", "delta_sigma2_eta0.5.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    // The manifest echoes --out, which differs; everything else must match.
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("manifest.json")).unwrap()).unwrap();
        v["config_echo"].as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn family_sweep_appends_the_cutoff_column() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sweep_into(tmp.path(), &["--axis", "family", "--photons", "2", "--eta", "1", "--delta", "1,3,8", "--grid-points", "201"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(tmp.path().join("family_N2_eta1.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(table.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.len(), 16);
    assert_eq!(&headers[15], "Delta_cutoff");
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        // Delta = 8 is the reference itself, so a cutoff always exists.
        let cutoff: f64 = r[15].parse().unwrap();
        assert!([1.0, 3.0, 8.0].contains(&cutoff), "{cutoff}");
    }
}

#[test]
fn photon_sweep_json_embeds_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sweep_into(
        tmp.path(),
        &["--axis", "photons", "--photons", "1..3", "--families", "noon", "--eta", "1", "--delta", "4", "--format", "json", "--grid-points", "201"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("photons_upsilon_eta1.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["delta_fixed"], 4.0);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!((r["upsilon"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn config_file_errors_point_at_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "state = ghb:0,4\ndelta = 2\nwavelength = 800\n").unwrap();
    let o = fockfisher(&["single", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("run.cfg:3"), "{err}");
    assert!(err.contains("wavelength"), "{err}");

    std::fs::write(&cfg, "state = ghb:0,4\ndelta = two\n").unwrap();
    let o = fockfisher(&["single", "--config", cfg.to_str().unwrap()]);
    assert!(stderr(&o).contains("run.cfg:2"), "{}", stderr(&o));

    std::fs::write(&cfg, "state = ghb:0,4\ndelta = 2\naxis = delta\n").unwrap();
    let o = fockfisher(&["single", "--config", cfg.to_str().unwrap()]);
    assert!(stderr(&o).contains("run.cfg:3"), "{}", stderr(&o));
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# lossy probe\nstate = noon:2\ndelta = 3\neta = 0.5\ngrid-points = 401\n").unwrap();
    let o = fockfisher(&["single", "--config", cfg.to_str().unwrap(), "--eta", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("eta_a, eta_b 1.00000000000e0, 1.00000000000e0"), "{text}");
    assert!((field(&text, "Upsilon") - 1.0).abs() < 1e-3);
}

#[test]
fn invalid_inputs_are_rejected() {
    for args in [
        &["single", "--state", "ghb:2", "--delta", "1"][..],
        &["single", "--state", "noon:2", "--delta", "1", "--eta", "1.5"],
        &["single", "--state", "noon:2", "--delta", "1", "--grid-points", "400"],
        &["sweep", "--axis", "sideways", "--out", "x"],
    ] {
        let o = fockfisher(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stdout(&o));
        assert!(stderr(&o).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn validate_passes_on_defaults() {
    let o = fockfisher(&["validate"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 7);
    assert!(text.contains("7 checks, 0 failed"));
}

#[test]
fn validate_fails_on_a_truncated_grid() {
    let o = fockfisher(&["validate", "--grid-halfwidth", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("[FAIL] pdf_normalization"), "{text}");
}
