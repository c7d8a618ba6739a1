use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paracalc"))
}

fn gen_weierstrass(out: &Path, sigma: f64, j: u32, seed: u64) {
    let st = bin()
        .args(["gen", "--kind", "weierstrass", "--sigma"])
        .arg(sigma.to_string())
        .args(["--grid-j"])
        .arg(j.to_string())
        .args(["--seed"])
        .arg(seed.to_string())
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(st.success());
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["decompose", "--input"])
        .arg(dir.path().join("nope.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, b"{\"d\": 1, \"J\": 8}").unwrap();
    let st = bin()
        .args(["decompose", "--input"])
        .arg(&bad)
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn unknown_flag_is_rejected() {
    let st = bin().args(["norm", "--frobble", "3"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn degenerate_spectrum_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("single.json");
    // single lacunary term occupies one block
    let st = bin()
        .args(["gen", "--kind", "weierstrass", "--sigma", "1.0", "--k-terms", "1", "--grid-j", "8", "--out"])
        .arg(&u)
        .status()
        .unwrap();
    assert!(st.success());
    let st = bin()
        .args(["decompose", "--input"])
        .arg(&u)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.json");
    gen_weierstrass(&u, 1.2, 9, 7);
    for sub in ["a", "b"] {
        let st = bin()
            .args(["decompose", "--input"])
            .arg(&u)
            .args(["--fit", "1:6", "--out-dir"])
            .arg(dir.path().join(sub))
            .status()
            .unwrap();
        assert!(st.success());
    }
    for name in ["report.json", "blocks.csv", "manifest.json"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // the fitted exponent recovers the generator's decay
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a").join("report.json")).unwrap())
            .unwrap();
    let exponent = report["exponent"].as_f64().unwrap();
    assert!((exponent - 1.2).abs() <= 0.05, "exponent {exponent}");
}

#[test]
fn paralinearize_identity_map_has_zero_remainders() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.json");
    gen_weierstrass(&u, 1.5, 9, 3);
    // identity displacement
    let zeros = vec![0.0f64; 1 << 9];
    let chi = dir.path().join("chi.json");
    std::fs::write(
        &chi,
        serde_json::to_string(&serde_json::json!({"d": 1, "J": 9, "g": [zeros], "is_diffeo": true})).unwrap(),
    )
    .unwrap();
    let out = dir.path().join("out");
    let st = bin()
        .args(["paralinearize", "--u"])
        .arg(&u)
        .arg("--map")
        .arg(&chi)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["residual"].as_f64().unwrap() <= 1e-12);
    // remainder components carry no usable blocks at the identity
    for comp in summary["components"].as_array().unwrap() {
        let name = comp["name"].as_str().unwrap();
        if name.starts_with('r') || name == "t_term" || name == "bookkeeping" {
            assert!(comp["report"].is_null(), "{name} should be degenerate at the identity");
        }
    }
}

#[test]
fn grid_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let u = dir.path().join("u.json");
    gen_weierstrass(&a, 1.0, 8, 1);
    gen_weierstrass(&u, 1.0, 9, 1);
    let st = bin()
        .args(["paraproduct", "--a"])
        .arg(&a)
        .arg("--u")
        .arg(&u)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn conjugate_identity_map_has_negligible_defect() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.json");
    let b = dir.path().join("b.json");
    gen_weierstrass(&u, 1.5, 9, 3);
    gen_weierstrass(&b, 2.0, 9, 5);
    let zeros = vec![0.0f64; 1 << 9];
    let chi = dir.path().join("chi.json");
    std::fs::write(
        &chi,
        serde_json::to_string(&serde_json::json!({"d": 1, "J": 9, "g": [zeros], "is_diffeo": true})).unwrap(),
    )
    .unwrap();
    let out = dir.path().join("out");
    let st = bin()
        .args(["conjugate", "--symbol"])
        .arg(format!("prod:{}:japanese^1", b.display()))
        .arg("--u")
        .arg(&u)
        .arg("--map")
        .arg(&chi)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let defect: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("defect.json")).unwrap()).unwrap();
    let sup = defect["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().map(f64::abs).unwrap_or_else(|| {
            let p = v.as_array().unwrap();
            (p[0].as_f64().unwrap().powi(2) + p[1].as_f64().unwrap().powi(2)).sqrt()
        }))
        .fold(0.0f64, f64::max);
    assert!(sup <= 1e-10, "defect sup {sup}");
}

#[test]
fn verify_only_with_no_match_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["verify", "--only", "frobnicate", "--out-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn verify_subset_runs_only_matching_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["verify", "--only", "estimator", "--out-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 1);
}

#[test]
fn corrupted_partition_makes_verify_fail() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["verify", "--only", "exact_identities", "--out-dir"])
        .arg(dir.path())
        .env("PARACALC_TEST_CORRUPT_PARTITION", "1")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
}
