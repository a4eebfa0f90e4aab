//! ingest → detect → analyze, in memory.

use std::collections::BTreeMap;

use chrono::DateTime;
use mav_core::analysis::{
    build_features, elbow, kmeanspp, pca, regress_decay, standardize, ClusterReport,
    DecayRegression, FeatureTable, KMeansConfig, Matrix, PcaResult, Scaling, StatsError,
};
use mav_core::market_data::{
    align_minutes, load_cex_bars, load_swaps, orient_swaps, AlignedMinute, CexBar, SwapEvent,
};
use mav_core::misalignment::{
    cumulative_mav, delta_series, segment_episodes_with, thresholds, total_volume, CumulativeMav,
    MisalignmentEpisode,
};
use serde::Serialize;

use crate::config::{LoadedConfig, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Ingested {
    pub swaps: Vec<SwapEvent>,
    pub bars: Vec<CexBar>,
    pub minutes: Vec<AlignedMinute>,
    pub reordered: usize,
}

impl Ingested {
    pub fn quiet_minutes(&self) -> usize {
        self.minutes.iter().filter(|m| !m.traded).count()
    }

    pub fn stale_bars(&self) -> usize {
        self.minutes.iter().filter(|m| m.cex_stale).count()
    }
}

pub fn ingest(cfg: &LoadedConfig) -> Result<Ingested, CliError> {
    let loaded = load_swaps(&cfg.pool_path(), cfg.pool_format())?;
    let swaps = orient_swaps(loaded.events, cfg.config.quote_token);
    let bars = load_cex_bars(&cfg.cex_path())?;
    let minutes = align_minutes(&swaps, &bars)?;
    Ok(Ingested {
        swaps,
        bars,
        minutes,
        reordered: loaded.reordered,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyRow {
    pub date: String,
    pub max_abs_delta: f64,
    pub daily_mav: f64,
    pub end_of_day_tvl: f64,
    pub volume: f64,
    pub episodes: usize,
}

#[derive(Debug, Clone)]
pub struct Detection {
    /// The single threshold in force, or `None` under a rolling window.
    pub threshold: Option<f64>,
    pub episodes: Vec<MisalignmentEpisode>,
    pub cumulative: CumulativeMav,
    pub daily: Vec<DailyRow>,
}

impl Detection {
    pub fn resolved(&self) -> usize {
        self.episodes.iter().filter(|e| e.resolved()).count()
    }
}

pub fn utc_date(ts: i64) -> String {
    DateTime::from_timestamp(ts, 0)
        .map(|d| d.format("%Y-%m-%d").to_string())
        .unwrap_or_else(|| ts.to_string())
}

pub fn detect(cfg: &RunConfig, data: &Ingested) -> Result<Detection, CliError> {
    let deltas = delta_series(&data.minutes);
    let per_minute = thresholds(&deltas, cfg.threshold, cfg.rolling_window)?;
    let threshold = if cfg.rolling_window.is_none() {
        per_minute.first().copied()
    } else {
        None
    };
    let episodes = segment_episodes_with(&data.minutes, &per_minute)?;
    let cumulative = cumulative_mav(&episodes, total_volume(&data.minutes))?;
    Ok(Detection {
        threshold,
        daily: daily_summary(&data.minutes, &episodes),
        episodes,
        cumulative,
    })
}

/// Per UTC day: largest |delta|, MAV of the episodes peaking that day, TVL
/// at the last minute and traded volume.
pub fn daily_summary(minutes: &[AlignedMinute], episodes: &[MisalignmentEpisode]) -> Vec<DailyRow> {
    let mut days: BTreeMap<String, DailyRow> = BTreeMap::new();
    for m in minutes {
        let row = days
            .entry(utc_date(m.minute))
            .or_insert_with_key(|d| DailyRow {
                date: d.clone(),
                max_abs_delta: 0.0,
                daily_mav: 0.0,
                end_of_day_tvl: 0.0,
                volume: 0.0,
                episodes: 0,
            });
        row.max_abs_delta = row.max_abs_delta.max(m.delta().abs());
        row.end_of_day_tvl = m.reserve_x + m.reserve_y * m.amm_spot;
        row.volume += m.amm_volume;
    }
    for e in episodes {
        if let Some(row) = days.get_mut(&utc_date(e.peak_minute)) {
            row.daily_mav += e.peak_mav.mav;
            row.episodes += 1;
        }
    }
    days.into_values().collect()
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub features: FeatureTable,
    pub inertia: Vec<(usize, f64)>,
    pub k_star: usize,
    /// Clustering at `k_star`; means are of the raw features.
    pub clusters: ClusterReport<f64>,
    pub pca: PcaResult<f64>,
    /// Rows projected on the first two components of the z-scored features.
    pub pca2d: Matrix<f64>,
    pub regression: DecayRegression,
    pub group0_rows: usize,
}

pub fn analyze(
    cfg: &RunConfig,
    episodes: &[MisalignmentEpisode],
    swaps: &[SwapEvent],
) -> Result<Analysis, CliError> {
    let features = build_features(episodes, swaps, cfg.fee_bps);
    let raw = features.matrix();
    let n = raw.rows();
    let [k_lo, k_hi] = cfg.k_range;
    if n < k_hi.max(5) {
        return Err(CliError::Data(format!(
            "{n} usable episodes; clustering over k up to {k_hi} needs at least {}",
            k_hi.max(5)
        )));
    }
    let (z, _) = standardize(&raw, Scaling::ZScore)?;
    let mut inertia = Vec::new();
    let mut by_k = Vec::new();
    for k in k_lo..=k_hi {
        let report = kmeanspp(&z, &KMeansConfig::new(k, cfg.restarts, cfg.seed))?;
        inertia.push((k, report.inertia));
        by_k.push(report);
    }
    let ks: Vec<usize> = inertia.iter().map(|p| p.0).collect();
    let values: Vec<f64> = inertia.iter().map(|p| p.1).collect();
    let k_star = elbow(&ks, &values)?;
    let clusters = by_k.swap_remove(k_star - k_lo).with_feature_means(&raw)?;

    let pca = pca(&z)?;
    let pca2d = pca.project(&z, 2);

    let group0: Vec<_> = features
        .rows
        .iter()
        .zip(&clusters.labels)
        .filter(|(_, &l)| l == 0)
        .map(|(r, _)| *r)
        .collect();
    let regression = regress_decay(&group0).map_err(|e| match e {
        StatsError::TooFewRows { needed, got } => CliError::Data(format!(
            "largest cluster has {got} rows; the decay regression needs {needed}"
        )),
        e => e.into(),
    })?;
    Ok(Analysis {
        group0_rows: group0.len(),
        features,
        inertia,
        k_star,
        clusters,
        pca,
        pca2d,
        regression,
    })
}
