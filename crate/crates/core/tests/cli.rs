use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nchodge"))
}

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON on stdout")
}

#[test]
fn spectral_dual_numbers_exact() {
    let out = bin().args(["spectral", "--nmax", "4", "--algebra"]).arg(data("algebras/dual_numbers.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["passed"], true);
    for degree in v["degrees"].as_array().unwrap() {
        for (key, r) in degree["residuals"].as_object().unwrap() {
            assert_eq!(r.as_f64(), Some(0.0), "{key}");
        }
    }
    // P = diag(1, 0) on Ω¹ of the dual numbers
    assert_eq!(v["degrees"][1]["rank_p"], 1);
}

#[test]
fn torsion_of_twisted_circle() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("torsion.json");
    let status =
        bin().args(["torsion", "--complex"]).arg(data("complexes/circle_alpha_-1_N8.json")).arg("--out").arg(&report).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let v = json(&std::fs::read(&report).unwrap());
    assert!((v["log_torsion"].as_f64().unwrap() + 2f64.ln()).abs() < 1e-9);
    let csv = std::fs::read_to_string(report.with_extension("csv")).unwrap();
    assert!(csv.starts_with("degree,index,eigenvalue\n"));
    assert_eq!(csv.lines().count(), 1 + 16);
}

#[test]
fn missing_input_is_an_input_error() {
    let out = bin().args(["torsion", "--complex", "does/not/exist.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("io/Io"));
    assert!(out.stdout.is_empty());
}

#[test]
fn invariant_failure_writes_report_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("gv.json");
    let status = bin().args(["gv", "--omega", "dz+x dy", "--out"]).arg(&report).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let v = json(&std::fs::read(&report).unwrap());
    assert_eq!(v["error"]["code"], "tangential/NotIntegrable");
}

#[test]
fn reports_are_byte_deterministic() {
    let run = || {
        bin()
            .args(["nc-report", "--nmax", "3", "--seed", "11", "--checks", "50", "--algebra"])
            .arg(data("algebras/group_z3.json"))
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let sweep = || {
        bin()
            .args(["witten-sweep", "--jobs", "1", "--tau", "0,2", "--model"])
            .arg(data("models/torus_random.json"))
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(sweep(), sweep());
}

#[test]
fn witten_sweep_and_morse_scan_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("sweep.json");
    let status = bin().args(["witten-sweep", "--model"]).arg(data("models/circle_cos.json")).arg("--out").arg(&report).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(report.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("tau,beta_0,beta_1"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",1,1")));

    let scan = dir.path().join("scan.json");
    let status = bin().args(["morse-scan", "--function", "cubic-bd", "--out"]).arg(&scan).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(scan.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",degenerate,")).count(), 1);
}

#[test]
fn dimension_cap_from_environment() {
    let out =
        bin().env("NCHODGE_CAP", "10").args(["spectral", "--nmax", "4", "--algebra"]).arg(data("algebras/group_z3.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("forms/WindowTooLarge"));
}

#[test]
fn float_mode_and_bad_tolerance() {
    let out =
        bin().args(["spectral", "--scalar", "float", "--nmax", "3", "--algebra"]).arg(data("algebras/c_plus_c.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out.stdout)["scalar"], "float");
    let out = bin().args(["spectral", "--eig-tol", "0", "--algebra"]).arg(data("algebras/c_plus_c.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
