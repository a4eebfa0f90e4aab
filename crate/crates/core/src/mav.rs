//! Optimal arbitrage volume and Maximal Arbitrage Value (MAV) against a
//! zero-impact centralized exchange.
//!
//! For a constant-product pool with AMM price `P_a` above the CEX price `P_c`
//! the arbitrageur buys Y on the CEX and sells it into the pool. Writing the
//! profit of a volume `V` as `V * (P_a * (1 - rho(V)) - P_c)` with the pool's
//! first-order impact `rho(V) = V / y` gives a concave quadratic whose optimum is
//!
//! ```text
//! V_max = y (P_a - P_c) / (2 P_a)
//! MAV   = y (P_a - P_c)^2 / (4 P_a)
//! ```
//!
//! When `P_c > P_a` the same closed form is applied in inverse-price space
//! (X becomes the base token, prices become `1 / P`) and the profit, then in Y,
//! is converted back to X at the CEX price. Volumes are always reported as a
//! token-Y amount: in the inverse direction that is the X notional sold to the
//! pool divided by `P_a`, so `v_max * p_amm` is the AMM-leg notional either way.

use serde::{Deserialize, Serialize};

use crate::amm::{positive, AmmError, PoolState, TickedPool};
use crate::scalar::Real;

/// Direction of the AMM leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// AMM overprices Y: buy Y on the CEX, sell it to the pool.
    SellOnAmm,
    /// AMM underprices Y: sell X to the pool for Y, sell Y on the CEX.
    BuyOnAmm,
    /// Prices agree; nothing to trade.
    Aligned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MavResult<T> {
    /// Profit-maximizing AMM volume, in token Y.
    pub v_max: T,
    /// Gross profit in token X, before LP and gas fees.
    pub mav: T,
    pub direction: Direction,
    pub p_amm: T,
    pub p_cex: T,
}

impl<T: Real> MavResult<T> {
    fn aligned(p_amm: T, p_cex: T) -> Self {
        Self {
            v_max: T::zero(),
            mav: T::zero(),
            direction: Direction::Aligned,
            p_amm,
            p_cex,
        }
    }

    /// Quote-token notional of the AMM leg, `v_max * p_amm`.
    pub fn notional(&self) -> T {
        self.v_max * self.p_amm
    }
}

/// Optimal volume and profit for one constant-product curve with base
/// reserve `base` and price `pa > pc`, both in the same orientation.
fn closed_form<T: Real>(base: T, pa: T, pc: T) -> (T, T) {
    let gap = pa - pc;
    let two = T::lit(2.0);
    (base * gap / (two * pa), base * gap * gap / (two * two * pa))
}

fn check_cex<T: Real>(p_cex: T) -> Result<T, AmmError> {
    positive("p_cex", p_cex)
}

/// Profit-maximizing volume in token Y; see [`mav_cpmm`] for the reverse direction.
pub fn v_max_cpmm<T: Real>(pool: &PoolState<T>, p_cex: T) -> Result<T, AmmError> {
    Ok(mav_cpmm(pool, p_cex)?.v_max)
}

/// Closed-form MAV of a constant-product pool against a CEX price.
pub fn mav_cpmm<T: Real>(pool: &PoolState<T>, p_cex: T) -> Result<MavResult<T>, AmmError> {
    check_cex(p_cex)?;
    let pa = pool.spot_price();
    if pa > p_cex {
        let (v, mav) = closed_form(pool.reserve_y(), pa, p_cex);
        Ok(MavResult {
            v_max: v,
            mav,
            direction: Direction::SellOnAmm,
            p_amm: pa,
            p_cex,
        })
    } else if pa < p_cex {
        let (v_x, mav_y) = closed_form(pool.reserve_x(), pa.recip(), p_cex.recip());
        Ok(MavResult {
            v_max: v_x / pa,
            mav: mav_y * p_cex,
            direction: Direction::BuyOnAmm,
            p_amm: pa,
            p_cex,
        })
    } else {
        Ok(MavResult::aligned(pa, p_cex))
    }
}

/// Profit, in token X, of trading `volume` (token-Y notional) in the
/// direction the prices call for. This is the objective [`mav_cpmm`] maximizes.
pub fn arbitrage_profit<T: Real>(pool: &PoolState<T>, p_cex: T, volume: T) -> Result<T, AmmError> {
    check_cex(p_cex)?;
    let pa = pool.spot_price();
    if pa >= p_cex {
        Ok(mav_objective(volume, pool.reserve_y(), pa, p_cex))
    } else {
        let v_x = volume * pa;
        Ok(mav_objective(v_x, pool.reserve_x(), pa.recip(), p_cex.recip()) * p_cex)
    }
}

/// `V (P_a (1 - rho(V)) - P_c)` with `rho(V) = V / base`.
#[inline]
fn mav_objective<T: Real>(volume: T, base: T, pa: T, pc: T) -> T {
    let rho = volume / base;
    volume * (pa * (T::one() - rho) - pc)
}

/// Minimum grid size accepted by [`mav_bruteforce`].
pub const MIN_GRID_POINTS: usize = 1_000;

/// Grid-search oracle for [`mav_cpmm`].
///
/// Half the points are log-spaced over `(0, 2 * base]`; the argmax of that
/// pass fixes a linear grid over `(0, 2 * v_est]` which takes the rest.
pub fn mav_bruteforce<T: Real>(
    pool: &PoolState<T>,
    p_cex: T,
    grid_points: usize,
) -> Result<MavResult<T>, AmmError> {
    check_cex(p_cex)?;
    if grid_points < MIN_GRID_POINTS {
        return Err(AmmError::GridTooCoarse {
            min: MIN_GRID_POINTS,
            got: grid_points,
        });
    }
    let pa = pool.spot_price();
    let (base, a, c, direction) = if pa > p_cex {
        (pool.reserve_y(), pa, p_cex, Direction::SellOnAmm)
    } else if pa < p_cex {
        (
            pool.reserve_x(),
            pa.recip(),
            p_cex.recip(),
            Direction::BuyOnAmm,
        )
    } else {
        return Ok(MavResult::aligned(pa, p_cex));
    };

    let argmax = |best: (T, T), v: T| {
        let profit = mav_objective(v, base, a, c);
        if profit > best.1 {
            (v, profit)
        } else {
            best
        }
    };

    let log_points = grid_points / 2;
    let hi = T::lit(2.0) * base;
    let lo = hi * T::lit(1e-12);
    let ratio = (hi / lo).ln();
    let coarse = (0..log_points)
        .map(|i| lo * (ratio * T::lit(i as f64 / (log_points - 1) as f64)).exp())
        .fold((T::zero(), T::zero()), argmax);
    let linear_points = grid_points - log_points;
    let best = (1..=linear_points)
        .map(|i| T::lit(2.0) * coarse.0 * T::lit(i as f64 / linear_points as f64))
        .fold(coarse, argmax);

    let (v, profit) = best;
    Ok(match direction {
        Direction::SellOnAmm => MavResult {
            v_max: v,
            mav: profit,
            direction,
            p_amm: pa,
            p_cex,
        },
        _ => MavResult {
            v_max: v / pa,
            mav: profit * p_cex,
            direction,
            p_amm: pa,
            p_cex,
        },
    })
}

/// One band visited by [`mav_clmm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickStep<T> {
    pub tick_index: i32,
    /// Amount sold into the band, in the token the pool receives
    /// (Y when selling on the AMM, X when buying).
    pub amount_in: T,
    /// Same amount as a token-Y notional at the pool's starting price.
    pub volume: T,
    pub mav: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickWalkTrace<T> {
    pub steps: Vec<TickStep<T>>,
    pub total_volume: T,
    pub total_mav: T,
    /// The walk ran out of ranges before the prices realigned.
    pub liquidity_exhausted: bool,
}

/// MAV of a concentrated-liquidity pool.
///
/// Starting from the band holding the spot price, each band is treated as a
/// constant-product pool on its virtual reserves. The band's unconstrained
/// optimum is taken when it fits before the band edge; otherwise the band is
/// traded to its edge, its profit banked, and the walk moves to the
/// neighbouring band. Total MAV is the sum over visited bands.
pub fn mav_clmm<T: Real>(
    pool: &TickedPool<T>,
    p_cex: T,
) -> Result<(MavResult<T>, TickWalkTrace<T>), AmmError> {
    check_cex(p_cex)?;
    let pa = pool.spot_price();
    let ranges = pool.ranges();
    let selling_y = pa > p_cex;
    let direction = if pa > p_cex {
        Direction::SellOnAmm
    } else if pa < p_cex {
        Direction::BuyOnAmm
    } else {
        Direction::Aligned
    };

    let mut steps = Vec::new();
    let mut exhausted = false;
    let mut k = pool.current_index();
    if direction != Direction::Aligned {
        loop {
            let range = &ranges[k];
            let (xv, yv) = range.virtual_reserves();
            let spot = xv / yv;
            // orient so the band is always sold "downwards" in its own price
            let (base, a, c, cap) = if selling_y {
                (yv, spot, p_cex, range.max_sell_y())
            } else {
                (xv, spot.recip(), p_cex.recip(), range.max_sell_x())
            };
            if a <= c {
                break;
            }
            let (v_star, mav_star) = closed_form(base, a, c);
            let (amount, profit, fits) = if v_star <= cap {
                (v_star, mav_star, true)
            } else {
                (cap, mav_objective(cap, base, a, c), false)
            };
            if amount > T::zero() {
                let (volume, mav) = if selling_y {
                    (amount, profit)
                } else {
                    (amount / pa, profit * p_cex)
                };
                steps.push(TickStep {
                    tick_index: range.tick_index(),
                    amount_in: amount,
                    volume,
                    mav,
                });
            }
            if fits {
                break;
            }
            let next = if selling_y {
                k.checked_sub(1)
            } else {
                Some(k + 1).filter(|&n| n < ranges.len())
            };
            match next {
                Some(n) => k = n,
                None => {
                    exhausted = true;
                    break;
                }
            }
        }
    }

    let total_volume = steps.iter().map(|s| s.volume).sum::<T>();
    let total_mav = steps.iter().map(|s| s.mav).sum::<T>();
    let result = MavResult {
        v_max: total_volume,
        mav: total_mav,
        direction,
        p_amm: pa,
        p_cex,
    };
    Ok((
        result,
        TickWalkTrace {
            steps,
            total_volume,
            total_mav,
            liquidity_exhausted: exhausted,
        },
    ))
}
