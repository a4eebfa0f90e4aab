//! Output files, manifest and human-readable summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mav_core::analysis::features::FEATURE_NAMES;
use mav_core::analysis::{ClusterReport, DecayRegression, FeatureTable, Matrix, PcaResult};
use mav_core::market_data::AlignedMinute;
use mav_core::misalignment::{write_episodes_jsonl, MisalignmentEpisode};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::pipeline::{Analysis, DailyRow, Detection, Ingested};

pub const EPISODES: &str = "episodes.jsonl";
pub const DAILY_SUMMARY: &str = "daily_summary.csv";
pub const FEATURES: &str = "features.csv";
pub const INERTIA: &str = "inertia.csv";
pub const CLUSTERS: &str = "clusters.json";
pub const PCA2D: &str = "pca2d.csv";
pub const REGRESSION: &str = "regression.json";
pub const MANIFEST: &str = "manifest.json";
pub const MINUTES: &str = "minutes.csv";

/// Published reference figures for the ratio cross-check.
pub const REFERENCE_MAV: f64 = 104_960.0;
pub const REFERENCE_VOLUME: f64 = 43_730_000.0;
pub const REFERENCE_STATED_RATIO: &str = "0.2349%";

/// `mav / volume` as a percentage with four decimals.
pub fn ratio_percent(mav: f64, volume: f64) -> String {
    format!("{:.4}%", 100.0 * mav / volume)
}

pub fn reference_ratio_note() -> String {
    format!(
        "note: the published USDC/ETH figures, cumulative MAV 104,960 on 43,730,000 volume, divide to {} \
         while the stated ratio is {}; ratios in this report are always computed by direct division",
        ratio_percent(REFERENCE_MAV, REFERENCE_VOLUME),
        REFERENCE_STATED_RATIO
    )
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

impl FileDigest {
    fn of(name: impl Into<String>, bytes: &[u8]) -> Self {
        Self {
            name: name.into(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        }
    }
}

/// Output directory that records what it writes, for the manifest.
pub struct OutDir {
    path: PathBuf,
    written: Vec<FileDigest>,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.path.join(name);
        fs::write(&target, bytes)
            .map_err(|e| CliError::Data(format!("{}: {e}", target.display())))?;
        self.written.retain(|d| d.name != name);
        self.written.push(FileDigest::of(name, bytes));
        Ok(())
    }

    /// Writes `manifest.json` describing the run. No timestamps or absolute
    /// paths, so identical runs give identical bytes.
    pub fn finish(mut self, command: &str, cfg: &LoadedConfig) -> Result<(), CliError> {
        let mut inputs = Vec::new();
        for (role, rel, full) in [
            ("pool", &cfg.config.pool_file, cfg.pool_path()),
            ("cex", &cfg.config.cex_file, cfg.cex_path()),
        ] {
            let bytes =
                fs::read(&full).map_err(|e| CliError::Data(format!("{}: {e}", full.display())))?;
            let mut d = FileDigest::of(rel.to_string_lossy().replace('\\', "/"), &bytes);
            d.name = format!("{role}:{}", d.name);
            inputs.push(d);
        }
        self.written.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = serde_json::json!({
            "tool": "mav",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config_sha256": sha256_hex(&cfg.raw),
            "config": cfg.config,
            "inputs": inputs,
            "outputs": self.written,
        });
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        let target = self.path.join(MANIFEST);
        fs::write(&target, bytes).map_err(|e| CliError::Data(format!("{}: {e}", target.display())))
    }
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).expect("in-memory write");
        fill(&mut w).expect("in-memory write");
        w.flush().expect("in-memory write");
    }
    buf
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

pub fn minutes_csv(minutes: &[AlignedMinute]) -> Vec<u8> {
    let mut buf = Vec::new();
    mav_core::market_data::write_aligned_csv(minutes, &mut buf).expect("in-memory write");
    buf
}

pub fn episodes_jsonl(episodes: &[MisalignmentEpisode]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_episodes_jsonl(episodes, &mut buf).expect("in-memory write");
    buf
}

pub fn daily_csv(rows: &[DailyRow]) -> Vec<u8> {
    csv_bytes(
        &[
            "date",
            "max_abs_delta",
            "daily_mav",
            "end_of_day_tvl",
            "volume",
            "episodes",
        ],
        |w| {
            for r in rows {
                w.write_record([
                    r.date.clone(),
                    r.max_abs_delta.to_string(),
                    r.daily_mav.to_string(),
                    r.end_of_day_tvl.to_string(),
                    r.volume.to_string(),
                    r.episodes.to_string(),
                ])?;
            }
            Ok(())
        },
    )
}

pub fn features_csv(features: &FeatureTable, labels: &[usize]) -> Vec<u8> {
    let mut header = vec!["episode_start"];
    header.extend(FEATURE_NAMES);
    header.extend(["stale", "cluster"]);
    csv_bytes(&header, |w| {
        for (r, l) in features.rows.iter().zip(labels) {
            let mut rec = vec![r.episode_start.to_string()];
            rec.extend(r.values().iter().map(f64::to_string));
            rec.push(r.stale.to_string());
            rec.push(l.to_string());
            w.write_record(rec)?;
        }
        Ok(())
    })
}

pub fn inertia_csv(inertia: &[(usize, f64)]) -> Vec<u8> {
    csv_bytes(&["k", "inertia"], |w| {
        for (k, v) in inertia {
            w.write_record([k.to_string(), v.to_string()])?;
        }
        Ok(())
    })
}

pub fn pca2d_csv(features: &FeatureTable, scores: &Matrix<f64>, labels: &[usize]) -> Vec<u8> {
    csv_bytes(&["episode_start", "pc1", "pc2", "cluster"], |w| {
        for (i, r) in features.rows.iter().enumerate() {
            w.write_record([
                r.episode_start.to_string(),
                scores[(i, 0)].to_string(),
                scores[(i, 1)].to_string(),
                labels[i].to_string(),
            ])?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct ClustersFile<'a> {
    k_range: [usize; 2],
    restarts: usize,
    seed: u64,
    inertia: Vec<InertiaPoint>,
    k_star: usize,
    clusters: &'a ClusterReport<f64>,
    pca: &'a PcaResult<f64>,
    excluded: &'a [mav_core::analysis::Exclusion],
}

#[derive(Serialize)]
struct InertiaPoint {
    k: usize,
    inertia: f64,
}

pub fn clusters_json(a: &Analysis, k_range: [usize; 2], restarts: usize, seed: u64) -> Vec<u8> {
    json_bytes(&ClustersFile {
        k_range,
        restarts,
        seed,
        inertia: a
            .inertia
            .iter()
            .map(|&(k, inertia)| InertiaPoint { k, inertia })
            .collect(),
        k_star: a.k_star,
        clusters: &a.clusters,
        pca: &a.pca,
        excluded: &a.features.excluded,
    })
}

#[derive(Serialize)]
struct RegressionFile<'a> {
    group: usize,
    rows: usize,
    response: &'static str,
    design: [&'static str; 3],
    #[serde(flatten)]
    fit: &'a DecayRegression,
    notes: Vec<&'static str>,
}

pub fn regression_json(a: &Analysis) -> Vec<u8> {
    json_bytes(&RegressionFile {
        group: 0,
        rows: a.group0_rows,
        response: "time_decay",
        design: [
            "x1 = clean_mav^(-1/2) / sd",
            "x2 = avg_gas^(-1/2) / sd",
            "const",
        ],
        fit: &a.regression,
        notes: vec![
            "group 0 is the largest cluster at k_star",
            "x1 and x2 are divided by their sample standard deviation without centering",
            "vmax_on_usage is fitted in an auxiliary model only; its p-value is reported",
            "a positive x1 coefficient means decay shortens as clean MAV grows",
        ],
    })
}

pub fn ingest_summary(data: &Ingested) -> String {
    let first = data.minutes.first().map(|m| m.minute).unwrap_or_default();
    let last = data.minutes.last().map(|m| m.minute).unwrap_or_default();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "swaps: {} ({} out of order in the input)",
        data.swaps.len(),
        data.reordered
    );
    let _ = writeln!(s, "cex bars: {}", data.bars.len());
    let _ = writeln!(
        s,
        "aligned minutes: {} from {} to {} ({} without swaps, {} without a bar)",
        data.minutes.len(),
        first,
        last,
        data.quiet_minutes(),
        data.stale_bars()
    );
    s
}

pub fn detect_summary(d: &Detection) -> String {
    let mut s = String::new();
    match d.threshold {
        Some(t) => {
            let _ = writeln!(s, "threshold |delta|: {t:.6}");
        }
        None => {
            let _ = writeln!(s, "threshold |delta|: rolling window");
        }
    }
    let _ = writeln!(
        s,
        "episodes: {} ({} resolved, {} open at end of data)",
        d.episodes.len(),
        d.resolved(),
        d.episodes.len() - d.resolved()
    );
    let c = &d.cumulative;
    let ratio = if c.total_volume > 0.0 {
        ratio_percent(c.total_mav, c.total_volume)
    } else {
        "n/a".into()
    };
    let _ = writeln!(
        s,
        "cumulative MAV: {:.2} on volume {:.2} ({ratio} of volume)",
        c.total_mav, c.total_volume
    );
    let _ = writeln!(s, "{}", reference_ratio_note());
    s
}

/// Per-cluster feature means as an aligned text table.
pub fn cluster_table(report: &ClusterReport<f64>) -> String {
    let mut cols = vec!["group".to_string(), "count".to_string()];
    cols.extend(report.feature_names.iter().cloned());
    let mut rows: Vec<Vec<String>> = vec![cols];
    for (g, (count, means)) in report.counts.iter().zip(&report.means).enumerate() {
        let mut r = vec![g.to_string(), count.to_string()];
        r.extend(means.iter().map(|v| format!("{v:.4}")));
        rows.push(r);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(s, "{}", line.join("  ").trim_end());
    }
    s
}

pub fn regression_table(a: &Analysis) -> String {
    let m = &a.regression.model;
    let mut s = String::new();
    let _ = writeln!(s, "time_decay on group 0 ({} rows)", a.group0_rows);
    let _ = writeln!(
        s,
        "{:>6}  {:>12}  {:>10}  {:>8}  {:>8}",
        "", "coef", "std err", "t", "P>|t|"
    );
    for i in 0..m.names.len() {
        let _ = writeln!(
            s,
            "{:>6}  {:>12.4}  {:>10.4}  {:>8.3}  {:>8.4}",
            m.names[i], m.coefficients[i], m.std_errors[i], m.t_stats[i], m.p_values[i]
        );
    }
    let _ = writeln!(
        s,
        "R² {:.4}  adj R² {:.4}  F {:.3} (p {:.3e})  Durbin-Watson {:.3}",
        m.r_squared, m.adj_r_squared, m.f_statistic, m.f_p_value, m.durbin_watson
    );
    let _ = writeln!(
        s,
        "vmax_on_usage p-value in the extended fit: {:.4}",
        a.regression.vmax_on_usage_p_value
    );
    s
}
