//! Maximal Arbitrage Value between AMM pools and a zero-impact centralized
//! exchange: swap math, optimal arbitrage, misalignment detection, fee
//! decomposition and the statistics used to analyze the opportunities.
//!
//! The numeric kernels are generic over [`Real`] (`f32` or `f64`); the data
//! and reporting layers work in `f64`. Aliases below fix the common case.

// `!(x > 0.0)` is used on purpose so NaN fails the check too; index loops
// read better than iterator chains in the matrix kernels.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amm;
pub mod analysis;
pub mod fees;
pub mod market_data;
pub mod mav;
pub mod misalignment;
pub mod scalar;
pub mod stats;
pub mod synthetic;

pub use scalar::Real;

pub type Pool = amm::PoolState<f64>;
pub type PoolF32 = amm::PoolState<f32>;
pub type Range = amm::TickRange<f64>;
pub type TickedPool = amm::TickedPool<f64>;
pub type SwapResult = amm::SwapResult<f64>;
pub type MavResult = mav::MavResult<f64>;
pub type MavResultF32 = mav::MavResult<f32>;
pub type FeeBreakdown = fees::FeeBreakdown<f64>;
