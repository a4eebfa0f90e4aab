//! Seeded generators with known ground truth, for tests and the bundled
//! fixture.
//!
//! [`square_wave`] builds an aligned-minute series with rectangular price
//! divergences of known width. [`simulate_market`] produces swap logs and CEX
//! bars from a random-walk CEX price and a pool that arbitrageurs pull back
//! toward it with a lag.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::amm::{PoolState, Side};
use crate::market_data::{AlignedMinute, CexBar, SwapEvent};
use crate::mav::mav_cpmm;

#[derive(Debug, Clone)]
pub struct SquareWaveSpec {
    pub episodes: usize,
    /// Width of each divergence, in minutes.
    pub width: RangeInclusive<usize>,
    /// Aligned minutes before each divergence (and after the last).
    pub gap: RangeInclusive<usize>,
    pub price: f64,
    /// Baseline `|delta|` is uniform on `[0, noise]`.
    pub noise: f64,
    /// Divergence size is uniform on `[amplitude, 2·amplitude]`, fixed within an episode.
    pub amplitude: f64,
    pub start_minute: i64,
    pub seed: u64,
}

impl Default for SquareWaveSpec {
    fn default() -> Self {
        Self {
            episodes: 20,
            width: 1..=6,
            gap: 20..=60,
            price: 2000.0,
            noise: 0.5,
            amplitude: 10.0,
            start_minute: 1_700_000_040,
            seed: 7,
        }
    }
}

/// What the generator injected, for comparison with detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectedEpisode {
    pub start_minute: i64,
    pub end_minute: i64,
    /// Flat divergence, so the earliest minute is the peak.
    pub peak_minute: i64,
    pub width: usize,
    pub peak_mav: f64,
}

pub fn square_wave(spec: &SquareWaveSpec) -> (Vec<AlignedMinute>, Vec<InjectedEpisode>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut minutes = Vec::new();
    let mut truth = Vec::new();
    let mut t = spec.start_minute;
    let push = |minutes: &mut Vec<AlignedMinute>, t: &mut i64, cex: f64, y: f64| {
        minutes.push(AlignedMinute {
            minute: *t,
            cex_close: cex,
            cex_stale: false,
            amm_spot: spec.price,
            reserve_x: spec.price * y,
            reserve_y: y,
            amm_volume: 1_000.0,
            avg_gas: 0.1,
            swap_count: 1,
            traded: true,
        });
        *t += 60;
    };
    for k in 0..=spec.episodes {
        let y = rng.random_range(50.0..500.0);
        let gap = rng.random_range(spec.gap.clone());
        for _ in 0..gap {
            let cex = spec.price + rng.random_range(-spec.noise..=spec.noise);
            push(&mut minutes, &mut t, cex, y);
        }
        if k == spec.episodes {
            break;
        }
        let width = rng.random_range(spec.width.clone());
        let size = rng.random_range(spec.amplitude..=2.0 * spec.amplitude);
        let cex = if rng.random::<bool>() {
            spec.price + size
        } else {
            spec.price - size
        };
        let start = t;
        for _ in 0..width {
            push(&mut minutes, &mut t, cex, y);
        }
        let pool = PoolState::fee_free(spec.price * y, y).expect("positive reserves");
        let peak_mav = mav_cpmm(&pool, cex).expect("valid prices").mav;
        truth.push(InjectedEpisode {
            start_minute: start,
            end_minute: t,
            peak_minute: start,
            width,
            peak_mav,
        });
    }
    (minutes, truth)
}

#[derive(Debug, Clone)]
pub struct MarketSpec {
    pub minutes: usize,
    /// Unix time of the first minute; must be a multiple of 60.
    pub start_time: i64,
    pub price: f64,
    pub reserve_y: f64,
    pub fee_bps: f64,
    /// Per-minute log-price volatility of the CEX.
    pub volatility: f64,
    pub jump_prob: f64,
    pub jump_size: RangeInclusive<f64>,
    /// Probability that a minute sees no AMM activity at all.
    pub quiet_prob: f64,
    /// Probability that an active minute includes an arbitrage trade.
    pub arb_prob: f64,
    /// Fraction of the log-price gap an arbitrage closes.
    pub arb_strength: RangeInclusive<f64>,
    pub noise_trades: RangeInclusive<usize>,
    /// Noise trade size as a fraction of the Y reserve (log-normal median).
    pub noise_size: f64,
    pub gas_median: f64,
    pub bar_drop_prob: f64,
    pub seed: u64,
}

impl Default for MarketSpec {
    fn default() -> Self {
        Self {
            minutes: 2 * 1440,
            start_time: 1_685_577_600,
            price: 1900.0,
            reserve_y: 400.0,
            fee_bps: 8.0,
            volatility: 0.0004,
            jump_prob: 0.02,
            jump_size: 0.004..=0.015,
            quiet_prob: 0.2,
            arb_prob: 0.55,
            arb_strength: 0.3..=0.95,
            noise_trades: 0..=3,
            noise_size: 0.0005,
            gas_median: 0.12,
            bar_drop_prob: 0.003,
            seed: 2023,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub swaps: Vec<SwapEvent>,
    pub bars: Vec<CexBar>,
}

/// Input amount that moves the pool's spot to `target`, ignoring the small
/// second-order effect of the fee staying in the pool.
fn amount_to_target(pool: &PoolState<f64>, target: f64) -> (Side, f64) {
    let l = pool.invariant();
    let keep = 1.0 - pool.fee_bps() / 10_000.0;
    if target < pool.spot_price() {
        (Side::SellY, ((l / target).sqrt() - pool.reserve_y()) / keep)
    } else {
        (Side::SellX, ((l * target).sqrt() - pool.reserve_x()) / keep)
    }
}

/// Rounds to `decimals` places so fixture files stay readable.
fn round_to(v: f64, decimals: usize) -> f64 {
    format!("{v:.decimals$}")
        .parse()
        .expect("formatted float parses")
}

pub fn simulate_market(spec: &MarketSpec) -> Market {
    assert_eq!(
        spec.start_time.rem_euclid(60),
        0,
        "start_time must be minute-aligned"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let step = Normal::new(0.0, spec.volatility).expect("volatility");
    let wick = Normal::new(0.0, spec.volatility / 2.0).expect("volatility");
    let trade_size = LogNormal::new(spec.noise_size.ln(), 0.8).expect("noise size");
    let gas_jitter = LogNormal::new(0.0, 0.25).expect("gas");
    let congestion_step = Normal::new(0.0, 0.05).expect("gas");

    let mut pool =
        PoolState::new(spec.price * spec.reserve_y, spec.reserve_y, spec.fee_bps).expect("pool");
    let mut log_cex = spec.price.ln();
    let mut congestion = 0.0f64;
    let mut swaps = Vec::new();
    let mut bars = Vec::new();

    for m in 0..spec.minutes {
        let minute = spec.start_time + 60 * m as i64;
        let open = log_cex.exp();
        log_cex += step.sample(&mut rng);
        if rng.random::<f64>() < spec.jump_prob {
            let size = rng.random_range(spec.jump_size.clone());
            log_cex += if rng.random::<bool>() { size } else { -size };
        }
        let close = log_cex.exp();
        if rng.random::<f64>() >= spec.bar_drop_prob {
            let high = open.max(close) * (1.0 + wick.sample(&mut rng).abs());
            let low = open.min(close) * (1.0 - wick.sample(&mut rng).abs());
            bars.push(CexBar {
                open_time: minute,
                open,
                high,
                low,
                close,
                volume: round_to(rng.random_range(5.0..80.0), 4),
            });
        }

        congestion = 0.97 * congestion + congestion_step.sample(&mut rng);
        if rng.random::<f64>() < spec.quiet_prob {
            continue;
        }
        // (is_arbitrage, second within the minute)
        let mut trades: Vec<(bool, i64)> = Vec::new();
        let n_noise = rng.random_range(spec.noise_trades.clone());
        for _ in 0..n_noise {
            trades.push((false, rng.random_range(0..60)));
        }
        if rng.random::<f64>() < spec.arb_prob {
            trades.push((true, rng.random_range(0..60)));
        }
        if trades.is_empty() {
            trades.push((false, rng.random_range(0..60)));
        }
        trades.sort_by_key(|t| t.1);

        let mut last_second = -1;
        let mut tx_index = 0u32;
        for (is_arb, second) in trades {
            let (side, amount) = if is_arb {
                let gap = close.ln() - pool.spot_price().ln();
                let strength = rng.random_range(spec.arb_strength.clone());
                let target = (pool.spot_price().ln() + strength * gap).exp();
                amount_to_target(&pool, target)
            } else {
                let dy = trade_size.sample(&mut rng) * pool.reserve_y();
                if rng.random::<bool>() {
                    (Side::SellY, dy)
                } else {
                    (Side::SellX, dy * pool.spot_price())
                }
            };
            let amount = round_to(amount, 6);
            if !(amount > 0.0) {
                continue;
            }
            let Ok(result) = pool.swap(side, amount, true) else {
                continue;
            };
            tx_index = if second == last_second {
                tx_index + 1
            } else {
                0
            };
            last_second = second;
            let timestamp = minute + second;
            let gas = round_to(
                spec.gas_median * congestion.exp() * gas_jitter.sample(&mut rng),
                6,
            );
            let l1 = round_to(gas * 0.7, 6);
            let (xi, xo, yi, yo) = match side {
                Side::SellY => (0.0, result.amount_out, amount, 0.0),
                Side::SellX => (amount, 0.0, 0.0, result.amount_out),
            };
            swaps.push(SwapEvent {
                timestamp,
                block_number: (timestamp - spec.start_time) as u64 + 1_000_000,
                tx_index,
                log_index: 2 * tx_index + 1,
                amount_x_in: xi,
                amount_x_out: xo,
                amount_y_in: yi,
                amount_y_out: yo,
                reserve_x_before: pool.reserve_x(),
                reserve_y_before: pool.reserve_y(),
                gas_fee: gas,
                l1_fee: Some(l1),
                l2_fee: Some(round_to(gas - l1, 6)),
            });
            let (x, y) = swaps.last().expect("just pushed").reserves_after();
            pool = PoolState::new(x, y, spec.fee_bps).expect("reserves stay positive");
        }
    }
    Market { swaps, bars }
}
