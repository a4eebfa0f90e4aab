use approx::assert_relative_eq;
use mav_core::amm::{tick_price, PoolState, Side, TickRange};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reserves() -> impl Strategy<Value = (f64, f64)> {
    (1e2..1e9f64, 1e-1..1e6f64)
}

#[test]
fn long_fee_free_walk_keeps_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pool = PoolState::fee_free(2_000_000.0, 1_000.0).unwrap();
    let l0 = pool.invariant();
    for _ in 0..1_000_000 {
        let r = if rng.random::<bool>() {
            pool.swap(
                Side::SellY,
                pool.reserve_y() * rng.random_range(1e-6..1e-2),
                false,
            )
        } else {
            pool.swap(
                Side::SellX,
                pool.reserve_x() * rng.random_range(1e-6..1e-2),
                false,
            )
        };
        pool = r.unwrap().new_state;
    }
    assert_relative_eq!(pool.invariant(), l0, max_relative = 1e-9);
}

#[test]
fn tick_prices_step_by_one_basis_point() {
    for i in [-887_000, -50_000, -1, 0, 1, 20_000, 200_000, 887_271] {
        let ratio = tick_price::<f64>(i + 1).unwrap() / tick_price::<f64>(i).unwrap();
        assert_relative_eq!(ratio, 1.0001, max_relative = 1e-12);
    }
    assert_eq!(tick_price::<f64>(0).unwrap(), 1.0);
    assert!(tick_price::<f64>(887_273).is_err());
}

#[test]
fn very_wide_range_trades_like_constant_product() {
    let range = TickRange::<f64>::at_posting(0, 1e8, 200_000.0, 100.0).unwrap();
    let (xe, ye) = range.equivalent_reserves();
    let cpmm = PoolState::fee_free(xe, ye).unwrap();
    for dy in [0.01, 0.5, 2.5, 10.0] {
        let band = range.price_impact(dy).unwrap();
        let flat = PoolState::fee_free(200_000.0, 100.0)
            .unwrap()
            .price_impact(dy)
            .unwrap();
        assert_relative_eq!(band, cpmm.price_impact(dy).unwrap(), max_relative = 1e-9);
        assert_relative_eq!(band, flat, max_relative = 1e-4);
    }
}

proptest! {
    #[test]
    fn fee_free_swap_preserves_invariant((x, y) in reserves(), frac in 1e-9..10.0f64, sell_y in any::<bool>()) {
        let pool = PoolState::fee_free(x, y).unwrap();
        let (side, amount) = if sell_y { (Side::SellY, y * frac) } else { (Side::SellX, x * frac) };
        let r = pool.swap(side, amount, false).unwrap();
        prop_assert!((r.new_state.invariant() / pool.invariant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fees_only_grow_the_invariant((x, y) in reserves(), frac in 1e-6..1.0f64, fee in 1.0..100.0f64) {
        let pool = PoolState::new(x, y, fee).unwrap();
        let r = pool.swap(Side::SellY, y * frac, true).unwrap();
        prop_assert!(r.new_state.invariant() > pool.invariant());
        prop_assert!((r.fee_paid - y * frac * fee / 1e4).abs() <= 1e-12 * y * frac);
    }

    #[test]
    fn execution_rate_is_below_spot_and_falls((x, y) in reserves(), a in 1e-9..1.0f64, b in 1e-9..1.0f64) {
        let pool = PoolState::fee_free(x, y).unwrap();
        let (small, large) = if a < b { (a * y, b * y) } else { (b * y, a * y) };
        let r_small = pool.execution_rate(small).unwrap();
        let r_large = pool.execution_rate(large).unwrap();
        prop_assert!(r_small < pool.spot_price());
        prop_assert!(r_large <= r_small);
    }

    #[test]
    fn impact_is_output_share_of_quote_reserve((x, y) in reserves(), frac in 1e-9..5.0f64) {
        let pool = PoolState::fee_free(x, y).unwrap();
        let dy = y * frac;
        let out = pool.swap(Side::SellY, dy, false).unwrap().amount_out;
        let impact = pool.price_impact(dy).unwrap();
        prop_assert!((impact - out / x).abs() <= 1e-12 * impact.max(1e-300));
        prop_assert!(impact > 0.0 && impact < 1.0);
    }

    #[test]
    fn round_trip_returns_to_start((x, y) in reserves(), frac in 1e-6..1.0f64) {
        let pool = PoolState::fee_free(x, y).unwrap();
        let there = pool.swap(Side::SellY, y * frac, false).unwrap();
        let back = there.new_state.swap(Side::SellX, there.amount_out, false).unwrap();
        prop_assert!((back.amount_out / (y * frac) - 1.0).abs() < 1e-9);
        prop_assert!((back.new_state.reserve_y() / y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn band_trades_stay_on_curve(alpha in 1.0001..4.0f64, y0 in 1.0..1e4f64, p in 10.0..1e4f64, frac in 0.0..1.0f64) {
        let range = TickRange::at_posting(0, alpha, y0 * p, y0).unwrap();
        let cap = range.max_sell_y();
        prop_assume!(cap * frac > 0.0);
        let (out, after) = range.sell_y(cap * frac).unwrap();
        let (xv0, yv0) = range.virtual_reserves();
        let (xv1, yv1) = after.virtual_reserves();
        prop_assert!(out > 0.0);
        prop_assert!((xv1 * yv1 / (xv0 * yv0) - 1.0).abs() < 1e-9);
        prop_assert!(after.spot_price() >= range.lower_price() * (1.0 - 1e-9));
        prop_assert!(range.sell_y(cap * 1.01).is_err());
    }
}
