//! Per-episode features and the decay-time regression.

use serde::{Deserialize, Serialize};

use super::standardize::{standardize, Scaling};
use super::{ols, Matrix, RegressionReport, StatsError};
use crate::fees::{clean_mav, TradeWindows};
use crate::market_data::SwapEvent;
use crate::misalignment::MisalignmentEpisode;

pub const FEATURE_NAMES: [&str; 4] = ["time_decay", "clean_mav", "avg_gas", "vmax_on_usage"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    /// Start minute of the source episode.
    pub episode_start: i64,
    pub time_decay: f64,
    pub clean_mav: f64,
    pub avg_gas: f64,
    pub vmax_on_usage: f64,
    /// Gas or volume came from an earlier window because the minute before
    /// the trade had no swaps.
    pub stale: bool,
}

impl FeatureRow {
    pub fn values(&self) -> [f64; 4] {
        [
            self.time_decay,
            self.clean_mav,
            self.avg_gas,
            self.vmax_on_usage,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub episode_start: i64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
    pub excluded: Vec<Exclusion>,
}

impl FeatureTable {
    pub fn matrix(&self) -> Matrix<f64> {
        let rows: Vec<Vec<f64>> = self.rows.iter().map(|r| r.values().to_vec()).collect();
        Matrix::from_vec(rows.len(), 4, rows.concat())
            .expect("four values per row")
            .with_names(FEATURE_NAMES)
            .expect("four names")
    }
}

/// One row per resolved episode with positive clean MAV.
///
/// The arbitrage is taken at the end of the peak minute, so gas and volume
/// come from the swaps of the peak minute itself (the minute before the
/// trade), with the stale-carry rule when that minute was quiet.
pub fn build_features(
    episodes: &[MisalignmentEpisode],
    swaps: &[SwapEvent],
    fee_bps: f64,
) -> FeatureTable {
    let windows = TradeWindows::new(swaps);
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for e in episodes {
        let exclude = |reason: String| Exclusion {
            episode_start: e.start_minute,
            reason,
        };
        let Some(decay) = e.decay_seconds else {
            excluded.push(exclude("unresolved at end of data".into()));
            continue;
        };
        let clean = clean_mav(&e.peak_mav, fee_bps);
        if !(clean > 0.0) {
            excluded.push(exclude(format!("clean MAV {clean} is not positive")));
            continue;
        }
        let trade_time = e.peak_minute + 60;
        let (gas, volume) = match (windows.avg_gas(trade_time), windows.volume(trade_time)) {
            (Ok(g), Ok(v)) => (g, v),
            (Err(err), _) | (_, Err(err)) => {
                excluded.push(exclude(err.to_string()));
                continue;
            }
        };
        if !(volume.value > 0.0) {
            excluded.push(exclude("no volume in the minute before the trade".into()));
            continue;
        }
        rows.push(FeatureRow {
            episode_start: e.start_minute,
            time_decay: decay as f64,
            clean_mav: clean,
            avg_gas: gas.value,
            vmax_on_usage: e.peak_mav.notional() / volume.value,
            stale: gas.stale || volume.stale,
        });
    }
    FeatureTable { rows, excluded }
}

pub const MIN_REGRESSION_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRegression {
    /// `time_decay ~ x1 + x2 + const` with `x1 = clean_mav^(-1/2)` and
    /// `x2 = avg_gas^(-1/2)`, each divided by its standard deviation.
    pub model: RegressionReport<f64>,
    /// Same fit with `vmax_on_usage` (scaled likewise) added, kept only
    /// for its p-value.
    pub vmax_on_usage_p_value: f64,
    pub scale_x1: f64,
    pub scale_x2: f64,
}

fn inv_sqrt(name: &str, values: impl Iterator<Item = f64>) -> Result<Vec<f64>, StatsError> {
    values
        .map(|v| {
            if v > 0.0 && v.is_finite() {
                Ok(v.powf(-0.5))
            } else {
                Err(StatsError::NonFinite(name.into()))
            }
        })
        .collect()
}

/// Fits the decay-time model on the given rows (normally the largest cluster).
pub fn regress_decay(rows: &[FeatureRow]) -> Result<DecayRegression, StatsError> {
    if rows.len() < MIN_REGRESSION_ROWS {
        return Err(StatsError::TooFewRows {
            needed: MIN_REGRESSION_ROWS,
            got: rows.len(),
        });
    }
    let x1 = inv_sqrt("x1", rows.iter().map(|r| r.clean_mav))?;
    let x2 = inv_sqrt("x2", rows.iter().map(|r| r.avg_gas))?;
    let x3: Vec<f64> = rows.iter().map(|r| r.vmax_on_usage).collect();
    let raw = Matrix::from_columns(&[x1, x2, x3])?.with_names(["x1", "x2", "x3"])?;
    let (scaled, params) = standardize(&raw, Scaling::ScaleOnly)?;
    let ones = vec![1.0; rows.len()];
    let y: Vec<f64> = rows.iter().map(|r| r.time_decay).collect();

    let design = Matrix::from_columns(&[scaled.column(0), scaled.column(1), ones.clone()])?
        .with_names(["x1", "x2", "const"])?;
    let model = ols(&design, &y)?;
    let aux = Matrix::from_columns(&[scaled.column(0), scaled.column(1), scaled.column(2), ones])?
        .with_names(["x1", "x2", "x3", "const"])?;
    let vmax_on_usage_p_value = ols(&aux, &y)?.p_value("x3").expect("x3 in design");
    Ok(DecayRegression {
        model,
        vmax_on_usage_p_value,
        scale_x1: params.std_devs[0],
        scale_x2: params.std_devs[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amm::{PoolState, Side};
    use crate::market_data::AlignedMinute;
    use crate::misalignment::segment_episodes;

    fn swap(ts: i64, block: u64, gas: f64) -> SwapEvent {
        let pool = PoolState::fee_free(200_000.0, 100.0).unwrap();
        let out = pool.swap(Side::SellY, 0.5, false).unwrap().amount_out;
        SwapEvent {
            timestamp: ts,
            block_number: block,
            tx_index: 0,
            log_index: 0,
            amount_x_in: 0.0,
            amount_x_out: out,
            amount_y_in: 0.5,
            amount_y_out: 0.0,
            reserve_x_before: 200_000.0,
            reserve_y_before: 100.0,
            gas_fee: gas,
            l1_fee: None,
            l2_fee: None,
        }
    }

    fn minute(t: i64, cex: f64) -> AlignedMinute {
        AlignedMinute {
            minute: t * 60,
            cex_close: cex,
            cex_stale: false,
            amm_spot: 2000.0,
            reserve_x: 200_000.0,
            reserve_y: 100.0,
            amm_volume: 0.0,
            avg_gas: 0.0,
            swap_count: 0,
            traded: false,
        }
    }

    #[test]
    fn hand_built_row() {
        let series: Vec<_> = [2000.0, 1900.0, 1950.0, 2000.0]
            .iter()
            .enumerate()
            .map(|(i, &c)| minute(i as i64, c))
            .collect();
        let eps = segment_episodes(&series, 5.0).unwrap();
        // peak at minute 1 (60 s); trade at 120 s; window [60, 120)
        let swaps = [swap(10, 1, 9.0), swap(70, 2, 1.0), swap(110, 3, 3.0)];
        let table = build_features(&eps, &swaps, 8.0);
        assert_eq!(table.rows.len(), 1);
        let row = table.rows[0];
        let vol = 2.0 * swaps[1].amount_x_out;
        assert_eq!(row.time_decay, 120.0);
        assert!((row.clean_mav - 121.0).abs() < 1e-9);
        assert_eq!(row.avg_gas, 2.0);
        assert!((row.vmax_on_usage - 5000.0 / vol).abs() < 1e-9);
        assert!(!row.stale);
    }

    #[test]
    fn exclusions() {
        let series: Vec<_> = [2000.0, 1999.0, 2000.0, 1900.0]
            .iter()
            .enumerate()
            .map(|(i, &c)| minute(i as i64, c))
            .collect();
        let eps = segment_episodes(&series, 0.5).unwrap();
        let table = build_features(&eps, &[swap(0, 1, 1.0)], 8.0);
        assert!(table.rows.is_empty());
        assert_eq!(table.excluded.len(), 2);
        assert!(table.excluded[0].reason.contains("clean MAV"));
        assert!(table.excluded[1].reason.contains("unresolved"));
    }

    #[test]
    fn too_few_rows() {
        let row = FeatureRow {
            episode_start: 0,
            time_decay: 60.0,
            clean_mav: 1.0,
            avg_gas: 1.0,
            vmax_on_usage: 1.0,
            stale: false,
        };
        assert_eq!(
            regress_decay(&[row; 9]).unwrap_err(),
            StatsError::TooFewRows { needed: 10, got: 9 }
        );
    }
}
