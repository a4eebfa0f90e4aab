//! Price-misalignment detection on minute-aligned AMM/CEX series.
//!
//! A minute is misaligned when `|amm_spot − cex_close|` exceeds an outlier
//! threshold (Q3 + 1.5·IQR of the absolute deltas). Consecutive misaligned
//! minutes form an episode. Each episode keeps only its single largest MAV,
//! so an opportunity that lingers for several minutes is counted once, and
//! its decay time runs from that peak to the first realigned minute.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amm::AmmError;
use crate::market_data::AlignedMinute;
use crate::mav::{mav_cpmm, MavResult};
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("outlier threshold needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("threshold must be non-negative, got {0}")]
    BadThreshold(f64),
    #[error("{thresholds} thresholds supplied for {minutes} minutes")]
    LengthMismatch { minutes: usize, thresholds: usize },
    #[error("episode starting at minute {0} never realigns")]
    Unresolved(i64),
    #[error("total traded volume is zero")]
    ZeroVolume,
    #[error("minute {minute}: {source}")]
    Amm { minute: i64, source: AmmError },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub minute: i64,
    pub delta: f64,
    pub abs_delta: f64,
    pub relative_delta: f64,
}

/// One point per aligned minute, `delta = amm_spot − cex_close`.
pub fn delta_series(minutes: &[AlignedMinute]) -> Vec<DeltaPoint> {
    minutes
        .iter()
        .map(|m| {
            let delta = m.delta();
            DeltaPoint {
                minute: m.minute,
                delta,
                abs_delta: delta.abs(),
                relative_delta: delta / m.cex_close,
            }
        })
        .collect()
}

/// `Q3 + 1.5·(Q3 − Q1)` of the values, type-7 quartiles.
pub fn iqr_threshold(values: &[f64]) -> Result<f64, DetectError> {
    if values.len() < 4 {
        return Err(DetectError::TooFewPoints(values.len()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&v, 0.25).expect("nonempty");
    let q3 = quantile_sorted(&v, 0.75).expect("nonempty");
    Ok(q3 + 1.5 * (q3 - q1))
}

/// Outlier threshold over the absolute deltas of the whole series.
pub fn outlier_threshold(deltas: &[DeltaPoint]) -> Result<f64, DetectError> {
    let abs: Vec<f64> = deltas.iter().map(|d| d.abs_delta).collect();
    iqr_threshold(&abs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum ThresholdMode {
    Iqr,
    Fixed(f64),
}

/// Per-minute thresholds. With `rolling = Some(w)` the IQR rule is applied to
/// the trailing `w` minutes (inclusive); minutes with fewer than 4 points of
/// history get an infinite threshold and so never start an episode.
pub fn thresholds(
    deltas: &[DeltaPoint],
    mode: ThresholdMode,
    rolling: Option<usize>,
) -> Result<Vec<f64>, DetectError> {
    match (mode, rolling) {
        (ThresholdMode::Fixed(t), _) => {
            if !(t >= 0.0) {
                return Err(DetectError::BadThreshold(t));
            }
            Ok(vec![t; deltas.len()])
        }
        (ThresholdMode::Iqr, None) => Ok(vec![outlier_threshold(deltas)?; deltas.len()]),
        (ThresholdMode::Iqr, Some(w)) => {
            let abs: Vec<f64> = deltas.iter().map(|d| d.abs_delta).collect();
            Ok((0..abs.len())
                .map(|i| {
                    let lo = (i + 1).saturating_sub(w);
                    iqr_threshold(&abs[lo..=i]).unwrap_or(f64::INFINITY)
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentEpisode {
    pub start_minute: i64,
    /// First minute back at or below the threshold; `None` if the series ends first.
    pub end_minute: Option<i64>,
    pub peak_minute: i64,
    pub peak_abs_delta: f64,
    pub peak_mav: MavResult<f64>,
    pub decay_seconds: Option<i64>,
    /// Threshold in force at the peak minute.
    pub threshold: f64,
    pub minutes: Vec<AlignedMinute>,
}

impl MisalignmentEpisode {
    pub fn resolved(&self) -> bool {
        self.end_minute.is_some()
    }
}

fn minute_mav(m: &AlignedMinute) -> Result<MavResult<f64>, DetectError> {
    m.pool()
        .and_then(|p| mav_cpmm(&p, m.cex_close))
        .map_err(|source| DetectError::Amm {
            minute: m.minute,
            source,
        })
}

/// Episodes under one threshold for every minute.
pub fn segment_episodes(
    minutes: &[AlignedMinute],
    threshold: f64,
) -> Result<Vec<MisalignmentEpisode>, DetectError> {
    if !(threshold >= 0.0) {
        return Err(DetectError::BadThreshold(threshold));
    }
    segment_episodes_with(minutes, &vec![threshold; minutes.len()])
}

/// Episodes under a per-minute threshold.
pub fn segment_episodes_with(
    minutes: &[AlignedMinute],
    thresholds: &[f64],
) -> Result<Vec<MisalignmentEpisode>, DetectError> {
    if minutes.len() != thresholds.len() {
        return Err(DetectError::LengthMismatch {
            minutes: minutes.len(),
            thresholds: thresholds.len(),
        });
    }
    let above: Vec<bool> = minutes
        .iter()
        .zip(thresholds)
        .map(|(m, &t)| m.delta().abs() > t)
        .collect();
    let mut episodes = Vec::new();
    let mut i = 0;
    while i < minutes.len() {
        if !above[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < minutes.len() && above[i] {
            i += 1;
        }
        let run = &minutes[start..i];
        let mut peak = 0;
        let mut peak_mav = minute_mav(&run[0])?;
        for (k, m) in run.iter().enumerate().skip(1) {
            let r = minute_mav(m)?;
            if r.mav > peak_mav.mav {
                peak = k;
                peak_mav = r;
            }
        }
        let end_minute = minutes.get(i).map(|m| m.minute);
        let peak_minute = run[peak].minute;
        episodes.push(MisalignmentEpisode {
            start_minute: run[0].minute,
            end_minute,
            peak_minute,
            peak_abs_delta: run.iter().map(|m| m.delta().abs()).fold(0.0, f64::max),
            peak_mav,
            decay_seconds: end_minute.map(|e| e - peak_minute),
            threshold: thresholds[start + peak],
            minutes: run.to_vec(),
        });
    }
    Ok(episodes)
}

/// Seconds from the peak minute to realignment.
pub fn decay_time(episode: &MisalignmentEpisode) -> Result<i64, DetectError> {
    episode
        .decay_seconds
        .ok_or(DetectError::Unresolved(episode.start_minute))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulativeMav {
    pub total_mav: f64,
    pub total_volume: f64,
    pub mav_over_volume: f64,
}

/// Sum of one peak MAV per episode, and its share of the traded volume.
/// With no episodes the result is all zeros whatever the volume.
pub fn cumulative_mav(
    episodes: &[MisalignmentEpisode],
    total_volume: f64,
) -> Result<CumulativeMav, DetectError> {
    if episodes.is_empty() {
        return Ok(CumulativeMav {
            total_mav: 0.0,
            total_volume,
            mav_over_volume: 0.0,
        });
    }
    if !(total_volume > 0.0) {
        return Err(DetectError::ZeroVolume);
    }
    let total_mav: f64 = episodes.iter().map(|e| e.peak_mav.mav).sum();
    Ok(CumulativeMav {
        total_mav,
        total_volume,
        mav_over_volume: total_mav / total_volume,
    })
}

/// Quote volume traded over the aligned series.
pub fn total_volume(minutes: &[AlignedMinute]) -> f64 {
    minutes.iter().map(|m| m.amm_volume).sum()
}

/// One JSON object per line.
pub fn write_episodes_jsonl<W: Write>(
    episodes: &[MisalignmentEpisode],
    mut w: W,
) -> std::io::Result<()> {
    for e in episodes {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_episodes_jsonl<R: std::io::BufRead>(r: R) -> Result<Vec<MisalignmentEpisode>, String> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}
