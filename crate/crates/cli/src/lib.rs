//! Command implementations behind the `mav` binary.
//!
//! Each command writes its human-readable summary to the supplied writer and
//! its files under the output directory, finishing with `manifest.json`.

use std::io::Write;
use std::path::Path;

use mav_core::amm::PoolState;
use mav_core::fees::clean_mav;
use mav_core::mav::{mav_bruteforce, mav_cpmm};
use mav_core::misalignment::read_episodes_jsonl;

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use config::LoadedConfig;
pub use error::CliError;
use output::OutDir;
use pipeline::{analyze, detect, ingest, Analysis, Detection, Ingested};

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(CliError::from)
}

fn write_detection(dir: &mut OutDir, d: &Detection) -> Result<(), CliError> {
    dir.write(output::EPISODES, &output::episodes_jsonl(&d.episodes))?;
    dir.write(output::DAILY_SUMMARY, &output::daily_csv(&d.daily))
}

fn write_analysis(dir: &mut OutDir, cfg: &LoadedConfig, a: &Analysis) -> Result<(), CliError> {
    let c = &cfg.config;
    dir.write(
        output::FEATURES,
        &output::features_csv(&a.features, &a.clusters.labels),
    )?;
    dir.write(output::INERTIA, &output::inertia_csv(&a.inertia))?;
    dir.write(
        output::CLUSTERS,
        &output::clusters_json(a, c.k_range, c.restarts, c.seed),
    )?;
    dir.write(
        output::PCA2D,
        &output::pca2d_csv(&a.features, &a.pca2d, &a.clusters.labels),
    )?;
    dir.write(output::REGRESSION, &output::regression_json(a))
}

fn analysis_summary(a: &Analysis) -> String {
    format!(
        "features: {} rows ({} episodes excluded)\nk*: {}\n{}\n{}",
        a.features.rows.len(),
        a.features.excluded.len(),
        a.k_star,
        output::cluster_table(&a.clusters),
        output::regression_table(a)
    )
}

/// Loads, validates and aligns the inputs; writes `minutes.csv`.
pub fn cmd_ingest(
    config: &Path,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<Ingested, CliError> {
    let cfg = LoadedConfig::load(config)?;
    let data = ingest(&cfg)?;
    let mut dir = OutDir::create(out_dir)?;
    dir.write(output::MINUTES, &output::minutes_csv(&data.minutes))?;
    dir.finish("ingest", &cfg)?;
    emit(out, &output::ingest_summary(&data))?;
    Ok(data)
}

/// Episodes and the daily summary.
pub fn cmd_detect(
    config: &Path,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<Detection, CliError> {
    let cfg = LoadedConfig::load(config)?;
    let data = ingest(&cfg)?;
    let det = detect(&cfg.config, &data)?;
    let mut dir = OutDir::create(out_dir)?;
    write_detection(&mut dir, &det)?;
    dir.finish("detect", &cfg)?;
    emit(out, &output::ingest_summary(&data))?;
    emit(out, &output::detect_summary(&det))?;
    Ok(det)
}

/// Features, clustering, PCA and regression from a previous `detect` run
/// in the same output directory.
pub fn cmd_analyze(
    config: &Path,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<Analysis, CliError> {
    let cfg = LoadedConfig::load(config)?;
    let path = out_dir.join(output::EPISODES);
    let file = std::fs::File::open(&path)
        .map_err(|e| CliError::Data(format!("{}: {e} (run `detect` first)", path.display())))?;
    let episodes = read_episodes_jsonl(std::io::BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let data = ingest(&cfg)?;
    let a = analyze(&cfg.config, &episodes, &data.swaps)?;
    let mut dir = OutDir::create(out_dir)?;
    write_analysis(&mut dir, &cfg, &a)?;
    dir.finish("analyze", &cfg)?;
    emit(out, &analysis_summary(&a))?;
    Ok(a)
}

/// The whole pipeline. Detection outputs are written even when the analysis
/// then fails for lack of rows.
pub fn cmd_report(config: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = LoadedConfig::load(config)?;
    let data = ingest(&cfg)?;
    let det = detect(&cfg.config, &data)?;
    let mut dir = OutDir::create(out_dir)?;
    dir.write(output::MINUTES, &output::minutes_csv(&data.minutes))?;
    write_detection(&mut dir, &det)?;
    emit(out, &output::ingest_summary(&data))?;
    emit(out, &output::detect_summary(&det))?;
    let analysis = analyze(&cfg.config, &det.episodes, &data.swaps);
    if let Ok(a) = &analysis {
        write_analysis(&mut dir, &cfg, a)?;
    }
    dir.finish("report", &cfg)?;
    let a = analysis?;
    emit(out, &analysis_summary(&a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MavArgs {
    pub reserve_x: f64,
    pub reserve_y: f64,
    pub p_cex: f64,
    pub fee_bps: f64,
    pub verify: bool,
    pub grid: usize,
}

/// Closed-form MAV for one pool, optionally checked against the grid search.
pub fn cmd_mav(args: &MavArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let pool = PoolState::fee_free(args.reserve_x, args.reserve_y)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if !(args.p_cex.is_finite() && args.p_cex > 0.0) {
        return Err(CliError::Config(format!(
            "p_cex must be positive, got {}",
            args.p_cex
        )));
    }
    if !(args.fee_bps.is_finite() && args.fee_bps >= 0.0) {
        return Err(CliError::Config(format!(
            "fee_bps must be non-negative, got {}",
            args.fee_bps
        )));
    }
    let r = mav_cpmm(&pool, args.p_cex)?;
    let mut text = format!(
        "direction: {}\np_amm: {}\np_cex: {}\nv_max: {}\nmav: {}\nnotional: {}\nclean_mav ({} bps): {}\n",
        serde_json::to_value(r.direction).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
        r.p_amm,
        r.p_cex,
        r.v_max,
        r.mav,
        r.notional(),
        args.fee_bps,
        clean_mav(&r, args.fee_bps),
    );
    if args.verify {
        let b = mav_bruteforce(&pool, args.p_cex, args.grid)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let gap = if r.mav == 0.0 {
            b.mav.abs()
        } else {
            (b.mav - r.mav).abs() / r.mav.abs()
        };
        text.push_str(&format!(
            "bruteforce ({} points): v_max {} mav {}\nrelative gap: {:.3e}\n",
            args.grid, b.v_max, b.mav, gap
        ));
    }
    emit(out, &text)
}
