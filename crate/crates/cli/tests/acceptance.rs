//! Acceptance: byte-exact reproducibility of manifest-driven runs.
//!
//! Run with `--nocapture` to see the per-criterion verdict line.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wdcusum")
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wdcusum-test-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Pull the ordered argv tokens back out of a manifest.
fn argv_from_manifest(text: &str) -> Vec<String> {
    let mut indexed: Vec<(usize, String)> = text
        .lines()
        .filter_map(|line| {
            let (key, value) = line.split_once('=')?;
            let idx: usize = key.trim().strip_prefix("argv_")?.parse().ok()?;
            Some((idx, value.trim().to_string()))
        })
        .collect();
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, v)| v).collect()
}

/// Re-run the argv recorded in `manifest`, redirecting --output to
/// `new_output`, and return the produced bytes.
fn rerun_from_manifest(manifest: &Path, new_output: &Path) -> Vec<u8> {
    let text = std::fs::read_to_string(manifest).unwrap();
    let mut argv = argv_from_manifest(&text);
    assert!(!argv.is_empty(), "manifest has no argv tokens");
    let out_pos = argv
        .iter()
        .position(|t| t == "--output")
        .expect("manifest argv lacks --output");
    argv[out_pos + 1] = new_output.display().to_string();
    let status = Command::new(bin()).args(&argv).status().unwrap();
    assert!(status.success(), "re-run failed: {status:?}");
    std::fs::read(new_output).unwrap()
}

#[test]
fn criterion_9_manifest_reruns_are_byte_identical() {
    let dir = scratch_dir("determinism");
    let mut failures: Vec<String> = Vec::new();

    // a labeled generator run
    let gen_out = dir.join("stream.csv");
    let status = Command::new(bin())
        .args([
            "gen",
            "--L",
            "4",
            "--m",
            "1",
            "--n",
            "3",
            "--d",
            "6,7",
            "--nu1",
            "5",
            "--steps",
            "60",
            "--policy",
            "uniform-random",
            "--seed",
            "90901",
        ])
        .arg("--output")
        .arg(&gen_out)
        .status()
        .unwrap();
    assert!(status.success());
    let first = std::fs::read(&gen_out).unwrap();
    let second = rerun_from_manifest(&dir.join("stream.csv.manifest"), &dir.join("stream2.csv"));
    if first != second {
        failures.push("gen re-run from manifest differs".into());
    }

    // a full curve run at reduced counts (exercises kl + calibration +
    // mtfa + wadd and the threaded estimators)
    let curve_out = dir.join("curve.csv");
    let status = Command::new(bin())
        .args([
            "curve",
            "--config",
            "configs/fig1_L3.cfg",
            "--trials",
            "150",
            "--kl-trials",
            "5000",
            "--grid-head",
            "2",
        ])
        .arg("--output")
        .arg(&curve_out)
        .current_dir(env!("CARGO_MANIFEST_DIR").to_string() + "/../..")
        .status()
        .unwrap();
    assert!(status.success());
    let first = std::fs::read(&curve_out).unwrap();
    let text = std::fs::read_to_string(dir.join("curve.csv.manifest")).unwrap();
    let mut argv = argv_from_manifest(&text);
    let out_pos = argv.iter().position(|t| t == "--output").unwrap();
    argv[out_pos + 1] = dir.join("curve2.csv").display().to_string();
    // different worker count must not change a byte either
    argv.extend(["--workers".into(), "1".into()]);
    let status = Command::new(bin())
        .args(&argv)
        .current_dir(env!("CARGO_MANIFEST_DIR").to_string() + "/../..")
        .status()
        .unwrap();
    assert!(status.success());
    let second = std::fs::read(dir.join("curve2.csv")).unwrap();
    if first != second {
        failures.push("curve re-run from manifest differs".into());
    }

    if failures.is_empty() {
        println!("acceptance criterion 9: PASS - manifest re-runs reproduce output bytes exactly");
    } else {
        println!("acceptance criterion 9: FAIL - manifest re-runs reproduce output bytes exactly");
        for f in &failures {
            println!("    {f}");
        }
        panic!("criterion 9 failed");
    }
}
