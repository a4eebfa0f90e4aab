//! Arbitrage cost decomposition: LP fee, gas and block slippage.

use serde::Serialize;
use thiserror::Error;

use crate::amm::{non_negative, AmmError, Side, BPS_DENOMINATOR};
use crate::market_data::SwapEvent;
use crate::mav::MavResult;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeeError {
    #[error("no swaps before {end_time}: gas and volume windows have nothing to carry")]
    NoPriorData { end_time: i64 },
    #[error(transparent)]
    Amm(#[from] AmmError),
}

/// Execution costs of one arbitrage, in quote-token units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeeBreakdown<T> {
    pub l1_fee: T,
    pub l2_fee: T,
    pub lp_fee: T,
    pub block_slippage: T,
    pub total: T,
}

impl<T: Real> FeeBreakdown<T> {
    pub fn new(l1_fee: T, l2_fee: T, lp_fee: T, block_slippage: T) -> Self {
        Self {
            l1_fee,
            l2_fee,
            lp_fee,
            block_slippage,
            total: l1_fee + l2_fee + lp_fee + block_slippage,
        }
    }

    /// Combined gas charge (L1 + L2).
    pub fn gas_fee(&self) -> T {
        self.l1_fee + self.l2_fee
    }
}

fn bps<T: Real>(fee_bps: T) -> T {
    fee_bps / T::lit(BPS_DENOMINATOR)
}

/// `volume · fee_bps / 10⁴`.
pub fn lp_fee<T: Real>(volume: T, fee_bps: T) -> Result<T, AmmError> {
    Ok(non_negative("volume", volume)? * bps(non_negative("fee_bps", fee_bps)?))
}

/// MAV net of the LP fee on the AMM leg (`v_max · p_amm`). May be negative.
pub fn clean_mav<T: Real>(result: &MavResult<T>, fee_bps: T) -> T {
    result.mav - result.notional() * bps(fee_bps)
}

/// Signed proceeds of each event relative to executing it alone at the block's
/// opening reserves, valued in quote at the opening spot. Positive means the
/// earlier transactions in the block helped. The first event is always zero.
pub fn block_slippage(block: &[SwapEvent], fee_bps: f64) -> Result<Vec<f64>, AmmError> {
    let Some(first) = block.first() else {
        return Ok(Vec::new());
    };
    let opening = first.pool_before(fee_bps)?;
    let spot = opening.spot_price();
    let mut out = Vec::with_capacity(block.len());
    out.push(0.0);
    for e in &block[1..] {
        let counterfactual = opening.swap(e.side(), e.amount_in(), true)?.amount_out;
        let diff = e.amount_out() - counterfactual;
        out.push(match e.side() {
            Side::SellY => diff,
            Side::SellX => diff * spot,
        });
    }
    Ok(out)
}

/// Mean over a trailing one-minute window, or the last nonempty window's mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStat {
    pub value: f64,
    /// Window `[end−60, end)` was empty and `value` was carried.
    pub stale: bool,
}

/// (timestamp, gas_fee, quote_volume)
type Trade = (i64, f64, f64);

/// Swaps indexed by timestamp for trailing-window queries.
#[derive(Debug, Clone)]
pub struct TradeWindows {
    /// Sorted by timestamp.
    trades: Vec<Trade>,
}

impl TradeWindows {
    pub fn new(swaps: &[SwapEvent]) -> Self {
        let mut trades: Vec<_> = swaps
            .iter()
            .map(|e| (e.timestamp, e.gas_fee, e.quote_volume()))
            .collect();
        trades.sort_by_key(|t| t.0);
        Self { trades }
    }

    /// Trades in the last nonempty 60 s window ending at or before `end`,
    /// with windows aligned to `end`.
    fn window(&self, end: i64) -> Result<(&[Trade], bool), FeeError> {
        let hi = self.trades.partition_point(|t| t.0 < end);
        if hi == 0 {
            return Err(FeeError::NoPriorData { end_time: end });
        }
        let last = self.trades[hi - 1].0;
        let steps_back = (end - 1 - last).div_euclid(60);
        let w_end = end - 60 * steps_back;
        let lo = self.trades.partition_point(|t| t.0 < w_end - 60);
        let hi = self.trades.partition_point(|t| t.0 < w_end);
        Ok((&self.trades[lo..hi], steps_back > 0))
    }

    /// Mean gas fee over `[end−60, end)` with stale carry.
    pub fn avg_gas(&self, end: i64) -> Result<WindowStat, FeeError> {
        let (w, stale) = self.window(end)?;
        let value = w.iter().map(|t| t.1).sum::<f64>() / w.len() as f64;
        Ok(WindowStat { value, stale })
    }

    /// Quote volume traded over `[end−60, end)`, carrying the last nonempty
    /// window when that one is empty.
    pub fn volume(&self, end: i64) -> Result<WindowStat, FeeError> {
        let (w, stale) = self.window(end)?;
        Ok(WindowStat {
            value: w.iter().map(|t| t.2).sum(),
            stale,
        })
    }
}

/// Mean gas fee of swaps in `[end−60, end)` (timestamps in seconds).
pub fn avg_gas_window(swaps: &[SwapEvent], end: i64) -> Result<WindowStat, FeeError> {
    TradeWindows::new(swaps).avg_gas(end)
}

/// Gas components of one event. Without split columns the combined gas fee
/// lands in `l2_fee` and `l1_fee` is zero.
pub fn gas_split(e: &SwapEvent) -> (f64, f64) {
    match (e.l1_fee, e.l2_fee) {
        (Some(l1), Some(l2)) => (l1, l2),
        _ => (0.0, e.gas_fee),
    }
}
