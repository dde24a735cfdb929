//! End-to-end tests of the `coftherm` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn coftherm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coftherm"))
}

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(file)
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout must be JSON")
}

#[test]
fn version_prints_semver() {
    let out = coftherm().arg("--version").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let version = text.trim().rsplit(' ').next().unwrap();
    let parts: Vec<&str> = version.split('.').collect();
    assert_eq!(parts.len(), 3, "semver expected, got {version:?}");
    assert!(parts.iter().all(|p| p.chars().all(|c| c.is_ascii_digit())));
}

#[test]
fn dmr_on_decorated_chain() {
    let out = coftherm().arg("dmr").arg(data("chainH.cif")).output().unwrap();
    let v = stdout_json(&out);
    let dmr = v["dmr"].as_f64().unwrap();
    assert!((dmr - 0.0774).abs() < 1e-4, "dmr = {dmr}");
    assert_eq!(v["counts"]["main"], 1);
    assert_eq!(v["counts"]["dangling_h"], 1);
    assert_eq!(v["labels"][0], "main");
    assert_eq!(v["labels"][1], "dangling_h");
}

#[test]
fn dmr_exclude_h_flag() {
    let out = coftherm()
        .arg("dmr")
        .arg(data("chainH.cif"))
        .arg("--exclude-h")
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["dmr"].as_f64().unwrap(), 0.0);
}

#[test]
fn dmr_reruns_are_byte_identical() {
    let run = || coftherm().arg("dmr").arg(data("chainH.cif")).output().unwrap();
    assert_eq!(run().stdout, run().stdout);
}

#[test]
fn kappa_recovers_unit_conductivity() {
    let out = coftherm()
        .arg("kappa")
        .arg(data("synthetic_k1.csv"))
        .output()
        .unwrap();
    let v = stdout_json(&out);
    let kappa = v["kappa_w_per_m_k"].as_f64().unwrap();
    assert!((kappa - 1.0).abs() < 1e-3, "kappa = {kappa}");
}

#[test]
fn unknown_input_fails_with_error_json() {
    let out = coftherm().arg("kappa").arg("does-not-exist.csv").output().unwrap();
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).expect("error JSON on stderr");
    assert!(v["error"].is_string());
    assert!(v["kind"].is_string());
}

#[test]
fn pipeline_isolates_per_row_failures() {
    let dir = tempfile::tempdir().unwrap();
    let corrupt = dir.path().join("corrupt.cif");
    std::fs::write(&corrupt, "this is not a cif\n").unwrap();
    let manifest = dir.path().join("manifest.json");
    let entries = serde_json::json!([
        { "name": "good1", "structure": data("chainH.cif") },
        { "name": "bad", "structure": corrupt },
        { "name": "good2", "structure": data("chainH.cif"),
          "profile_x": data("synthetic_k1.csv"), "profile_y": data("synthetic_k1.csv") },
    ]);
    std::fs::write(&manifest, entries.to_string()).unwrap();

    let out = coftherm().arg("pipeline").arg(&manifest).output().unwrap();
    assert!(out.status.success(), "pipeline must not abort on row failures");
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "header + 3 rows:\n{text}");
    assert!(lines[0].starts_with("name,density,dmr,kappa_x"));
    assert!(lines[1].starts_with("good1,"));
    let bad: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(bad[0], "bad");
    assert!(bad[1].is_empty(), "no density for the failed row");
    assert!(!bad[8].is_empty(), "error column filled: {}", lines[2]);
    let good2: Vec<&str> = lines[3].split(',').collect();
    assert!(!good2[3].is_empty(), "kappa_x present for good2");
    assert!(good2[8].is_empty());
}

#[test]
fn pipeline_respects_thread_bound() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    let entries = serde_json::json!([
        { "name": "a", "structure": data("chainH.cif") },
        { "name": "b", "structure": data("chainH.cif") },
    ]);
    std::fs::write(&manifest, entries.to_string()).unwrap();
    let out = coftherm()
        .env("COFTHERM_THREADS", "1")
        .arg("pipeline")
        .arg(&manifest)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);
}

#[test]
fn dmr_emits_dot_graph() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("bonds.dot");
    let out = coftherm()
        .arg("dmr")
        .arg(data("chainH.cif"))
        .arg("--emit-graph")
        .arg(&dot)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph bonds {"), "{text}");
}

#[test]
fn pipeline_empty_manifest_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("empty.json");
    std::fs::write(&manifest, "[]").unwrap();
    let out = coftherm().arg("pipeline").arg(&manifest).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("name,"));
}

#[test]
fn kappa_batch_emits_csv_and_anisotropy() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("batch.json");
    let entries = serde_json::json!([
        { "name": "a", "profile_x": data("synthetic_k1.csv"), "profile_y": data("synthetic_k1.csv") },
        { "name": "b", "profile_x": data("synthetic_k1.csv"), "profile_y": data("synthetic_k1.csv") },
    ]);
    std::fs::write(&manifest, entries.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = coftherm()
        .arg("--out-dir")
        .arg(&out_dir)
        .arg("kappa-batch")
        .arg(&manifest)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("name,kappa_x,kappa_y,kappa_mean,ratio"));
    assert_eq!(text.lines().count(), 3);
    assert!(out_dir.join("kappa_batch.csv").exists());
    assert!(out_dir.join("manifest.json").exists());
    // identical profiles → ratio exactly 1
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let ratio: f64 = row[4].parse().unwrap();
    assert_eq!(ratio, 1.0);
}

#[test]
fn rf_cv_reports_metrics_and_importances() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let mut csv = String::from("name,density,dmr,kappa\n");
    let mut state = 99u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for i in 0..60 {
        let d = next();
        let m = next();
        csv += &format!("r{i},{d},{m},{}\n", 2.0 * d - m);
    }
    std::fs::write(&table, csv).unwrap();
    let out = coftherm()
        .arg("rf-cv")
        .arg(&table)
        .args(["--k", "5", "--seed", "7", "--trees", "30"])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!(v["cv"]["mean_r2"].as_f64().unwrap() > 0.5);
    assert!(v["gini_importance"]["density"].as_f64().unwrap() > 0.0);
    assert!(v["permutation_importance"]["density"].is_number());
    assert_eq!(v["options"]["seed"], 7);
}

#[test]
fn attn_appends_score_column() {
    let dir = tempfile::tempdir().unwrap();
    let stack = dir.path().join("stack.json");
    // 2 atom tokens matching chainH.cif's 2 atoms
    let stack_json = serde_json::json!({
        "layers": 1, "heads": 1, "tokens": 3,
        "token_map": ["aggregate", 0, 1],
        "matrices": [[[[0.2, 0.5, 0.3], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]]]]
    });
    std::fs::write(&stack, stack_json.to_string()).unwrap();
    let out = coftherm()
        .arg("attn")
        .arg(&stack)
        .arg("--structure")
        .arg(data("chainH.cif"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().nth(1).unwrap().contains("attention:S:1"));
    // scores from the aggregate row (0.5, 0.3) normalized → 0.625, 0.375
    let c_score: f64 = text.lines().nth(2).unwrap().split(' ').next_back().unwrap().parse().unwrap();
    let h_score: f64 = text.lines().nth(3).unwrap().split(' ').next_back().unwrap().parse().unwrap();
    assert!((c_score - 0.625).abs() < 1e-5, "C score {c_score}");
    assert!((h_score - 0.375).abs() < 1e-5, "H score {h_score}");
}

#[test]
fn vdos_writes_csv_and_overlap() {
    let dir = tempfile::tempdir().unwrap();
    // tiny 2-atom dump matching chainH.cif
    let dump = dir.path().join("traj.dump");
    let mut text = String::new();
    for f in 0..64 {
        let v = (0.3 * f as f64).sin();
        text += &format!(
            "ITEM: TIMESTEP\n{}\nITEM: NUMBER OF ATOMS\n2\nITEM: BOX BOUNDS pp pp pp\n0 1.54\n0 10\n0 10\nITEM: ATOMS id vx vy vz\n1 {v} 0.1 0\n2 {} 0 0.2\n",
            f * 5,
            -v
        );
    }
    std::fs::write(&dump, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = coftherm()
        .arg("--out-dir")
        .arg(&out_dir)
        .arg("vdos")
        .arg(&dump)
        .arg(data("chainH.cif"))
        .args(["--fs-per-step", "1", "--labels", "from-dmr"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.starts_with("freq_thz,C"), "header: {}", csv.lines().next().unwrap());
    assert!(out_dir.join("vdos.csv").exists());
    assert!(out_dir.join("overlap.json").exists());
    // single group (C main only; H is skipped) → S is null
    let overlap: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("overlap.json")).unwrap())
            .unwrap();
    assert!(overlap["S"].is_null());
}

#[test]
fn features_joins_structures_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let structures = dir.path().join("structures");
    std::fs::create_dir(&structures).unwrap();
    std::fs::copy(data("chainH.cif"), structures.join("chainH.cif")).unwrap();
    let manifest = dir.path().join("kappa.csv");
    std::fs::write(&manifest, "name,lpd,void_fraction,gsa,kappa\nchainH,12.5,0.85,7000,1.25\n")
        .unwrap();
    let out = coftherm()
        .arg("features")
        .arg(&structures)
        .arg("--kappa-manifest")
        .arg(&manifest)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        text.lines().next().unwrap(),
        "name,density,lpd,void_fraction,gsa,dmr,kappa"
    );
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "chainH");
    // density = 13.019 amu / 154 Å³ × 1.66054 ≈ 0.1404 g/cm³ (hand)
    let density: f64 = row[1].parse().unwrap();
    assert!((density - 0.14038).abs() < 1e-4, "density {density}");
    let dmr: f64 = row[5].parse().unwrap();
    assert!((dmr - 0.0774).abs() < 1e-4);
}
