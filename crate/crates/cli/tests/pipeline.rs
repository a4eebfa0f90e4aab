use std::fs;
use std::path::{Path, PathBuf};

use mav_cli::output::{self, reference_ratio_note};
use mav_cli::{cmd_analyze, cmd_detect, cmd_ingest, cmd_report, CliError};
use mav_core::market_data::{write_cex_bars_csv, write_swaps_csv};
use mav_core::synthetic::{simulate_market, MarketSpec};

const OUTPUTS: [&str; 9] = [
    output::EPISODES,
    output::DAILY_SUMMARY,
    output::FEATURES,
    output::INERTIA,
    output::CLUSTERS,
    output::PCA2D,
    output::REGRESSION,
    output::MINUTES,
    output::MANIFEST,
];

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/market")
}

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/market")
}

fn report(out: &Path) -> String {
    let mut text = Vec::new();
    cmd_report(&fixture().join("config.json"), out, &mut text).unwrap();
    String::from_utf8(text).unwrap()
}

/// Writes a config next to copies of the fixture data, with `extra` merged in.
fn config_with(dir: &Path, extra: serde_json::Value) -> PathBuf {
    for f in ["swaps.csv", "bars.csv"] {
        fs::copy(fixture().join(f), dir.join(f)).unwrap();
    }
    let mut cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture().join("config.json")).unwrap()).unwrap();
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    path
}

/// Set `UPDATE_GOLDEN=1` to rewrite the checked-in outputs after an intended change.
#[test]
fn report_matches_golden_files() {
    let out = tempfile::tempdir().unwrap();
    report(out.path());
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in OUTPUTS {
        let got = fs::read(out.path().join(name)).unwrap();
        if update {
            fs::write(golden().join(name), &got).unwrap();
            continue;
        }
        let want = fs::read(golden().join(name)).unwrap();
        assert!(got == want, "{name} differs from the golden copy");
    }
}

#[test]
fn two_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let text_a = report(a.path());
    let text_b = report(b.path());
    assert_eq!(text_a, text_b);
    for name in OUTPUTS {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn fixture_regenerates_from_its_spec() {
    let market = simulate_market(&MarketSpec::default());
    let mut swaps = Vec::new();
    write_swaps_csv(&market.swaps, &mut swaps).unwrap();
    let mut bars = Vec::new();
    write_cex_bars_csv(&market.bars, &mut bars).unwrap();
    assert!(swaps == fs::read(fixture().join("swaps.csv")).unwrap());
    assert!(bars == fs::read(fixture().join("bars.csv")).unwrap());
}

#[test]
fn stepwise_commands_agree_with_report() {
    let full = tempfile::tempdir().unwrap();
    report(full.path());
    let steps = tempfile::tempdir().unwrap();
    let cfg = fixture().join("config.json");
    let mut sink = Vec::new();
    let data = cmd_ingest(&cfg, steps.path(), &mut sink).unwrap();
    assert_eq!(data.reordered, 0);
    cmd_detect(&cfg, steps.path(), &mut sink).unwrap();
    cmd_analyze(&cfg, steps.path(), &mut sink).unwrap();
    for name in OUTPUTS.iter().filter(|n| **n != output::MANIFEST) {
        assert_eq!(
            fs::read(full.path().join(name)).unwrap(),
            fs::read(steps.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(steps.path().join(output::MANIFEST)).unwrap()).unwrap();
    assert_eq!(manifest["command"], "analyze");
}

#[test]
fn report_summarizes_and_carries_the_ratio_note() {
    let out = tempfile::tempdir().unwrap();
    let text = report(out.path());
    assert!(text.contains(&reference_ratio_note()));
    assert!(text.contains("0.2400%") && text.contains("0.2349%"));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.path().join(output::MANIFEST)).unwrap()).unwrap();
    let raw = serde_json::to_string(&manifest).unwrap();
    assert!(
        !raw.contains(env!("CARGO_MANIFEST_DIR")),
        "manifest leaks an absolute path"
    );
    assert_eq!(
        manifest["outputs"].as_array().unwrap().len(),
        OUTPUTS.len() - 1
    );
}

#[test]
fn no_episodes_gives_empty_but_valid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(
        dir.path(),
        serde_json::json!({"threshold": {"mode": "fixed", "value": 1e12}}),
    );
    let out = dir.path().join("out");
    let det = cmd_detect(&cfg, &out, &mut Vec::new()).unwrap();
    assert!(det.episodes.is_empty());
    assert_eq!(det.cumulative.total_mav, 0.0);
    assert!(fs::read(out.join(output::EPISODES)).unwrap().is_empty());
    let daily = fs::read_to_string(out.join(output::DAILY_SUMMARY)).unwrap();
    assert!(daily.lines().skip(1).all(|l| l.contains(",0,")), "{daily}");

    let err = cmd_report(&cfg, &out, &mut Vec::new()).unwrap_err();
    assert!(matches!(err, CliError::Data(_)), "{err}");
    assert!(out.join(output::MANIFEST).exists());
}

#[test]
fn rolling_threshold_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), serde_json::json!({"rolling_window": 720}));
    let det = cmd_detect(&cfg, &dir.path().join("out"), &mut Vec::new()).unwrap();
    assert!(det.threshold.is_none());
    assert!(!det.episodes.is_empty());
}

#[test]
fn analyze_needs_detect_first() {
    let out = tempfile::tempdir().unwrap();
    let err = cmd_analyze(&fixture().join("config.json"), out.path(), &mut Vec::new()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
