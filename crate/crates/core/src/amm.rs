//! Constant-product and concentrated-liquidity swap math.
//!
//! Prices are always quoted as token X per token Y: `reserve_x` holds the
//! quote token (e.g. USDC) and `reserve_y` the base token (e.g. ETH), so the
//! spot price of a constant-product pool is `x / y`.
//!
//! Concentrated liquidity is modelled range by range. A [`TickRange`] is the
//! liquidity an LP posted as `(x_i, y_i)` at price `P = x_i / y_i` over the
//! band `[P / alpha, P * alpha]`. Inside its band the range trades exactly like
//! a constant-product pool on the *virtual* reserves
//!
//! ```text
//! X_v = r_x + x_i / (sqrt(alpha) - 1)
//! Y_v = r_y + y_i / (sqrt(alpha) - 1)
//! ```
//!
//! where `(r_x, r_y)` are the real in-range balances. At the posting price the
//! virtual reserves equal the equivalent reserves `x_i / (1 - 1/sqrt(alpha))`.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{rel_eq, Real};

/// Largest tick index magnitude accepted by [`tick_price`].
pub const MAX_TICK: i32 = 887_272;

/// Price ratio between two adjacent ticks.
pub const TICK_BASE: f64 = 1.0001;

pub(crate) const BPS_DENOMINATOR: f64 = 10_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmmError {
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} must be non-negative and finite, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("range width factor alpha must exceed 1, got {0}")]
    AlphaTooSmall(f64),
    #[error("tick index {0} outside [-{MAX_TICK}, {MAX_TICK}]")]
    TickOutOfRange(i64),
    #[error(
        "trade of {requested} exceeds the {max_in_range} the range absorbs before its boundary"
    )]
    TickExhausted { requested: f64, max_in_range: f64 },
    #[error("invalid tick range: {0}")]
    InvalidRange(String),
    #[error("invalid ticked pool: {0}")]
    InvalidPool(String),
    #[error("brute-force grid needs at least {min} points, got {got}")]
    GridTooCoarse { min: usize, got: usize },
}

pub(crate) fn positive<T: Real>(what: &'static str, value: T) -> Result<T, AmmError> {
    if value.is_finite() && value > T::zero() {
        Ok(value)
    } else {
        Err(AmmError::NonPositive {
            what,
            value: value.to_f64().unwrap_or(f64::NAN),
        })
    }
}

pub(crate) fn non_negative<T: Real>(what: &'static str, value: T) -> Result<T, AmmError> {
    if value.is_finite() && value >= T::zero() {
        Ok(value)
    } else {
        Err(AmmError::Negative {
            what,
            value: value.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Which token the trader hands to the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Pay token Y, receive token X. Pushes the price down.
    SellY,
    /// Pay token X, receive token Y. Pushes the price up.
    SellX,
}

/// Reserves of a two-token constant-product pool, `x * y = L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoolState<T> {
    reserve_x: T,
    reserve_y: T,
    fee_bps: T,
}

/// Outcome of [`PoolState::swap`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapResult<T> {
    pub side: Side,
    pub amount_in: T,
    pub amount_out: T,
    /// Portion of `amount_in` retained as LP fee.
    pub fee_paid: T,
    /// Realized price in X per Y, fee included.
    pub execution_rate: T,
    /// Fractional shortfall of the realized rate against the pre-trade spot.
    pub price_impact: T,
    pub new_state: PoolState<T>,
}

impl<T: Real> PoolState<T> {
    pub fn new(reserve_x: T, reserve_y: T, fee_bps: T) -> Result<Self, AmmError> {
        positive("reserve_x", reserve_x)?;
        positive("reserve_y", reserve_y)?;
        non_negative("fee_bps", fee_bps)?;
        Ok(Self {
            reserve_x,
            reserve_y,
            fee_bps,
        })
    }

    pub fn fee_free(reserve_x: T, reserve_y: T) -> Result<Self, AmmError> {
        Self::new(reserve_x, reserve_y, T::zero())
    }

    pub fn reserve_x(&self) -> T {
        self.reserve_x
    }

    pub fn reserve_y(&self) -> T {
        self.reserve_y
    }

    pub fn fee_bps(&self) -> T {
        self.fee_bps
    }

    /// The constant-product invariant `L = x * y`.
    pub fn invariant(&self) -> T {
        self.reserve_x * self.reserve_y
    }

    /// Instantaneous exchange rate `x / y`.
    pub fn spot_price(&self) -> T {
        self.reserve_x / self.reserve_y
    }

    /// Same pool with the roles of X and Y exchanged (prices become `1 / P`).
    pub fn mirrored(&self) -> Self {
        Self {
            reserve_x: self.reserve_y,
            reserve_y: self.reserve_x,
            fee_bps: self.fee_bps,
        }
    }

    pub fn with_fee_bps(&self, fee_bps: T) -> Result<Self, AmmError> {
        Self::new(self.reserve_x, self.reserve_y, fee_bps)
    }

    /// X received for selling `dy` of Y, fee-free: `x - L / (y + dy)`.
    fn out_for_y(&self, dy: T) -> T {
        self.reserve_x * dy / (self.reserve_y + dy)
    }

    fn out_for_x(&self, dx: T) -> T {
        self.reserve_y * dx / (self.reserve_x + dx)
    }

    /// Average X per Y obtained when selling `dy` of Y, fee-free.
    ///
    /// Equals `-(L/(y+dy) - L/y) / dy`, evaluated as `x / (y + dy)` which is
    /// the same quantity without the cancellation for tiny `dy`.
    pub fn execution_rate(&self, dy: T) -> Result<T, AmmError> {
        positive("dy", dy)?;
        Ok(self.reserve_x / (self.reserve_y + dy))
    }

    /// Percentage price impact of selling `dy` of Y: `dx / x`, with `dx` the
    /// fee-free output. Reported as a non-negative cost.
    pub fn price_impact(&self, dy: T) -> Result<T, AmmError> {
        positive("dy", dy)?;
        Ok(self.out_for_y(dy) / self.reserve_x)
    }

    /// Executes a swap and returns the post-trade state.
    ///
    /// With `apply_fee` the fee fraction of `amount_in` is withheld before the
    /// invariant trade but still credited to the pool, so `L` grows.
    pub fn swap(
        &self,
        side: Side,
        amount_in: T,
        apply_fee: bool,
    ) -> Result<SwapResult<T>, AmmError> {
        positive("amount_in", amount_in)?;
        let fee_paid = if apply_fee {
            amount_in * self.fee_bps / T::lit(BPS_DENOMINATOR)
        } else {
            T::zero()
        };
        let effective = amount_in - fee_paid;
        let (amount_out, new_state, execution_rate, price_impact) = match side {
            Side::SellY => {
                let out = self.out_for_y(effective);
                let state = Self {
                    reserve_x: self.reserve_x - out,
                    reserve_y: self.reserve_y + amount_in,
                    fee_bps: self.fee_bps,
                };
                let rate = out / amount_in;
                (out, state, rate, T::one() - rate / self.spot_price())
            }
            Side::SellX => {
                let out = self.out_for_x(effective);
                let state = Self {
                    reserve_x: self.reserve_x + amount_in,
                    reserve_y: self.reserve_y - out,
                    fee_bps: self.fee_bps,
                };
                let rate = amount_in / out;
                (out, state, rate, T::one() - self.spot_price() / rate)
            }
        };
        Ok(SwapResult {
            side,
            amount_in,
            amount_out,
            fee_paid,
            execution_rate,
            price_impact,
            new_state,
        })
    }
}

/// Price at tick `i`: `1.0001^i`.
pub fn tick_price<T: Real>(i: i32) -> Result<T, AmmError> {
    if i.unsigned_abs() > MAX_TICK as u32 {
        return Err(AmmError::TickOutOfRange(i as i64));
    }
    Ok(T::lit((f64::from(i) * TICK_BASE.ln()).exp()))
}

/// Constant-product reserves that trade identically to `(x_posted, y_posted)`
/// concentrated over a band of width factor `alpha`: `r / (1 - 1/sqrt(alpha))`.
pub fn equivalent_reserves<T: Real>(
    x_posted: T,
    y_posted: T,
    alpha: T,
) -> Result<(T, T), AmmError> {
    check_alpha(alpha)?;
    non_negative("x_posted", x_posted)?;
    non_negative("y_posted", y_posted)?;
    let scale = T::one() - alpha.sqrt().recip();
    Ok((x_posted / scale, y_posted / scale))
}

fn check_alpha<T: Real>(alpha: T) -> Result<T, AmmError> {
    if alpha > T::one() {
        Ok(alpha)
    } else {
        Err(AmmError::AlphaTooSmall(alpha.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Liquidity posted over one price band, with its current in-range balances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TickRange<T> {
    tick_index: i32,
    alpha: T,
    x_in_range: T,
    y_in_range: T,
    x_posted: T,
    y_posted: T,
}

impl<T: Real> TickRange<T> {
    /// Validates bounds `0 <= r_x <= x_i (sqrt(alpha) + 1)` and
    /// `0 <= r_y <= y_i (sqrt(alpha) + 1)^2`, and that the in-range balances
    /// lie on the range's virtual constant-product curve.
    pub fn new(
        tick_index: i32,
        alpha: T,
        x_posted: T,
        y_posted: T,
        x_in_range: T,
        y_in_range: T,
    ) -> Result<Self, AmmError> {
        check_alpha(alpha)?;
        positive("x_posted", x_posted)?;
        positive("y_posted", y_posted)?;
        non_negative("x_in_range", x_in_range)?;
        non_negative("y_in_range", y_in_range)?;
        let root = alpha.sqrt();
        let tol = T::one() + T::tolerance();
        if x_in_range > x_posted * (root + T::one()) * tol {
            return Err(AmmError::InvalidRange(format!(
                "x_in_range {x_in_range} above bound {}",
                x_posted * (root + T::one())
            )));
        }
        let y_bound = y_posted * (root + T::one()) * (root + T::one());
        if y_in_range > y_bound * tol {
            return Err(AmmError::InvalidRange(format!(
                "y_in_range {y_in_range} above bound {y_bound}"
            )));
        }
        let range = Self {
            tick_index,
            alpha,
            x_in_range,
            y_in_range,
            x_posted,
            y_posted,
        };
        let (xv, yv) = range.virtual_reserves();
        let (xe, ye) = range.equivalent_reserves();
        if !rel_eq(xv * yv, xe * ye, T::tolerance()) {
            return Err(AmmError::InvalidRange(format!(
                "in-range balances ({x_in_range}, {y_in_range}) are off the range's trading curve"
            )));
        }
        Ok(range)
    }

    /// Range sitting at its posting price: in-range balances equal the posted ones.
    pub fn at_posting(
        tick_index: i32,
        alpha: T,
        x_posted: T,
        y_posted: T,
    ) -> Result<Self, AmmError> {
        Self::new(tick_index, alpha, x_posted, y_posted, x_posted, y_posted)
    }

    /// Range whose band is exactly `[1.0001^lower_tick, 1.0001^upper_tick]`,
    /// posted at the band's geometric midpoint.
    pub fn on_grid(lower_tick: i32, upper_tick: i32, y_posted: T) -> Result<Self, AmmError> {
        if upper_tick <= lower_tick {
            return Err(AmmError::InvalidRange(format!(
                "upper tick {upper_tick} must exceed lower tick {lower_tick}"
            )));
        }
        let lower: T = tick_price(lower_tick)?;
        let upper: T = tick_price(upper_tick)?;
        let alpha = (upper / lower).sqrt();
        let mid = (upper * lower).sqrt();
        Self::at_posting(lower_tick, alpha, y_posted * mid, y_posted)
    }

    pub fn tick_index(&self) -> i32 {
        self.tick_index
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn x_in_range(&self) -> T {
        self.x_in_range
    }

    pub fn y_in_range(&self) -> T {
        self.y_in_range
    }

    pub fn x_posted(&self) -> T {
        self.x_posted
    }

    pub fn y_posted(&self) -> T {
        self.y_posted
    }

    pub fn posting_price(&self) -> T {
        self.x_posted / self.y_posted
    }

    pub fn lower_price(&self) -> T {
        self.posting_price() / self.alpha
    }

    pub fn upper_price(&self) -> T {
        self.posting_price() * self.alpha
    }

    pub fn equivalent_reserves(&self) -> (T, T) {
        equivalent_reserves(self.x_posted, self.y_posted, self.alpha)
            .expect("validated on construction")
    }

    /// Virtual offsets `(x_i, y_i) / (sqrt(alpha) - 1)` added to the real balances.
    fn offsets(&self) -> (T, T) {
        let d = self.alpha.sqrt() - T::one();
        (self.x_posted / d, self.y_posted / d)
    }

    pub fn virtual_reserves(&self) -> (T, T) {
        let (ox, oy) = self.offsets();
        (self.x_in_range + ox, self.y_in_range + oy)
    }

    /// Current price inside the band.
    pub fn spot_price(&self) -> T {
        let (xv, yv) = self.virtual_reserves();
        xv / yv
    }

    /// Largest in-range balances, reached at the upper (X) and lower (Y) band edge.
    pub fn capacity(&self) -> (T, T) {
        let k = self.alpha.sqrt() + T::one();
        (self.x_posted * k, self.y_posted * k)
    }

    /// Y the range absorbs before its price reaches the lower band edge.
    pub fn max_sell_y(&self) -> T {
        (self.capacity().1 - self.y_in_range).max(T::zero())
    }

    /// X the range absorbs before its price reaches the upper band edge.
    pub fn max_sell_x(&self) -> T {
        (self.capacity().0 - self.x_in_range).max(T::zero())
    }

    /// Same liquidity repositioned at price `spot`, clamped to the band.
    pub fn at_price(&self, spot: T) -> Self {
        let (cap_x, cap_y) = self.capacity();
        let (ox, oy) = self.offsets();
        let (xe, ye) = self.equivalent_reserves();
        let (x_in_range, y_in_range) = if spot >= self.upper_price() {
            (cap_x, T::zero())
        } else if spot <= self.lower_price() {
            (T::zero(), cap_y)
        } else {
            // sqrt(K * s) and sqrt(K / s) with K = xe * ye = xe^2 / P
            let ratio = (spot / self.posting_price()).sqrt();
            (
                (xe * ratio - ox).max(T::zero()).min(cap_x),
                (ye / ratio - oy).max(T::zero()).min(cap_y),
            )
        };
        Self {
            x_in_range,
            y_in_range,
            ..*self
        }
    }

    fn check_sell(&self, amount: T, cap: T) -> Result<(), AmmError> {
        positive("dy", amount)?;
        if amount > cap * (T::one() + T::tolerance()) {
            return Err(AmmError::TickExhausted {
                requested: amount.as_f64(),
                max_in_range: cap.as_f64(),
            });
        }
        Ok(())
    }

    /// Percentage price impact of selling `dy` of Y inside the band:
    /// `dx / (r_x + x_i / (sqrt(alpha) - 1))`.
    pub fn price_impact(&self, dy: T) -> Result<T, AmmError> {
        self.check_sell(dy, self.max_sell_y())?;
        let (xv, yv) = self.virtual_reserves();
        let dx = xv * dy / (yv + dy);
        Ok(dx / xv)
    }

    /// Sells `dy` of Y into the range; returns the X paid out and the new state.
    pub fn sell_y(&self, dy: T) -> Result<(T, Self), AmmError> {
        self.check_sell(dy, self.max_sell_y())?;
        let (xv, yv) = self.virtual_reserves();
        let dx = (xv * dy / (yv + dy)).min(self.x_in_range);
        let next = Self {
            x_in_range: self.x_in_range - dx,
            y_in_range: (self.y_in_range + dy).min(self.capacity().1),
            ..*self
        };
        Ok((dx, next))
    }

    /// Sells `dx` of X into the range; returns the Y paid out and the new state.
    pub fn sell_x(&self, dx: T) -> Result<(T, Self), AmmError> {
        self.check_sell(dx, self.max_sell_x())?;
        let (xv, yv) = self.virtual_reserves();
        let dy = (yv * dx / (xv + dx)).min(self.y_in_range);
        let next = Self {
            x_in_range: (self.x_in_range + dx).min(self.capacity().0),
            y_in_range: self.y_in_range - dy,
            ..*self
        };
        Ok((dy, next))
    }
}

/// Contiguous concentrated-liquidity ranges and the pool's current price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TickedPool<T> {
    ranges: Vec<TickRange<T>>,
    current: usize,
    spot_price: T,
}

impl<T: Real> TickedPool<T> {
    /// Builds a pool at `spot_price`. Ranges must be sorted strictly by tick
    /// index with each band starting where the previous one ends. In-range
    /// balances are re-derived from the spot: bands below it hold only X,
    /// bands above it only Y.
    pub fn new(ranges: Vec<TickRange<T>>, spot_price: T) -> Result<Self, AmmError> {
        positive("spot_price", spot_price)?;
        if ranges.is_empty() {
            return Err(AmmError::InvalidPool("no ranges".into()));
        }
        for pair in ranges.windows(2) {
            if pair[1].tick_index <= pair[0].tick_index {
                return Err(AmmError::InvalidPool(format!(
                    "tick indices not strictly increasing: {} then {}",
                    pair[0].tick_index, pair[1].tick_index
                )));
            }
            if !rel_eq(pair[0].upper_price(), pair[1].lower_price(), T::tolerance()) {
                return Err(AmmError::InvalidPool(format!(
                    "gap between tick {} (upper {}) and tick {} (lower {})",
                    pair[0].tick_index,
                    pair[0].upper_price(),
                    pair[1].tick_index,
                    pair[1].lower_price()
                )));
            }
        }
        let lo = ranges[0].lower_price();
        let hi = ranges[ranges.len() - 1].upper_price();
        let slack = T::one() + T::tolerance();
        if spot_price < lo / slack || spot_price > hi * slack {
            return Err(AmmError::InvalidPool(format!(
                "spot {spot_price} outside covered band [{lo}, {hi}]"
            )));
        }
        let current = ranges
            .iter()
            .position(|r| spot_price <= r.upper_price())
            .unwrap_or(ranges.len() - 1);
        let ranges = ranges
            .iter()
            .enumerate()
            .map(|(k, r)| {
                if k < current {
                    r.at_price(r.upper_price())
                } else if k > current {
                    r.at_price(r.lower_price())
                } else {
                    r.at_price(spot_price)
                }
            })
            .collect();
        Ok(Self {
            ranges,
            current,
            spot_price,
        })
    }

    pub fn ranges(&self) -> &[TickRange<T>] {
        &self.ranges
    }

    /// Position of the range holding the spot price within [`Self::ranges`].
    pub fn current_index(&self) -> usize {
        self.current
    }

    pub fn current_tick(&self) -> i32 {
        self.ranges[self.current].tick_index
    }

    pub fn current_range(&self) -> &TickRange<T> {
        &self.ranges[self.current]
    }

    pub fn spot_price(&self) -> T {
        self.spot_price
    }
}
