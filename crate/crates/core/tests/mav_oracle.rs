use approx::assert_relative_eq;
use mav_core::amm::{tick_price, PoolState, Side, TickRange, TickedPool};
use mav_core::mav::{arbitrage_profit, mav_bruteforce, mav_clmm, mav_cpmm, v_max_cpmm, Direction};
use proptest::prelude::*;

fn pool(x: f64, y: f64) -> PoolState<f64> {
    PoolState::fee_free(x, y).unwrap()
}

/// Steps through the bands in increments of `dv`, banking the marginal
/// profit `a (1 - 2u / base) - c` of each step until it turns negative.
/// Band capacity comes from the virtual curve: the reserve at which the band
/// price reaches its edge is `sqrt(L / edge)` (or `sqrt(L * edge)` for X).
fn forward_walk(p: &TickedPool<f64>, pc: f64, dv: f64) -> (f64, f64) {
    let pa = p.spot_price();
    let sell_y = pa > pc;
    let ranges = p.ranges();
    let mut k = p.current_index() as isize;
    let (mut volume, mut profit) = (0.0, 0.0);
    while k >= 0 && (k as usize) < ranges.len() {
        let r = &ranges[k as usize];
        let (xv, yv) = r.virtual_reserves();
        let l = xv * yv;
        let (base, a, c, cap) = if sell_y {
            (yv, xv / yv, pc, (l / r.lower_price()).sqrt() - yv)
        } else {
            (xv, yv / xv, 1.0 / pc, (l * r.upper_price()).sqrt() - xv)
        };
        let mut u = 0.0;
        loop {
            let step = dv.min(cap - u);
            if step <= 0.0 {
                break;
            }
            let marginal = a * (1.0 - 2.0 * (u + step / 2.0) / base) - c;
            if marginal <= 0.0 {
                return (volume, profit);
            }
            profit += marginal * step * if sell_y { 1.0 } else { pc };
            volume += step * if sell_y { 1.0 } else { 1.0 / pa };
            u += step;
        }
        k += if sell_y { -1 } else { 1 };
    }
    (volume, profit)
}

fn three_bands(spot_tick: i32) -> TickedPool<f64> {
    let ranges = [(0, 10, 50.0), (10, 20, 80.0), (20, 30, 60.0)]
        .into_iter()
        .map(|(lo, hi, y)| TickRange::on_grid(lo, hi, y).unwrap())
        .collect();
    TickedPool::new(ranges, tick_price(spot_tick).unwrap()).unwrap()
}

#[test]
fn hand_checked_pool() {
    let p = pool(200_000.0, 100.0);
    let r = mav_cpmm(&p, 1900.0).unwrap();
    assert_eq!(r.v_max, 2.5);
    assert_eq!(r.mav, 125.0);
    assert_eq!(r.direction, Direction::SellOnAmm);
    assert_eq!(v_max_cpmm(&p, 1900.0).unwrap(), 2.5);
    let flat = mav_cpmm(&p, 2000.0).unwrap();
    assert_eq!(
        (flat.v_max, flat.mav, flat.direction),
        (0.0, 0.0, Direction::Aligned)
    );
}

#[test]
fn bruteforce_on_hand_checked_pool() {
    let b = mav_bruteforce(&pool(200_000.0, 100.0), 1900.0, 1_000_000).unwrap();
    assert_relative_eq!(b.v_max, 2.5, max_relative = 1e-5);
    assert_relative_eq!(b.mav, 125.0, max_relative = 1e-9);
}

#[test]
fn three_band_walk_matches_forward_simulation() {
    for (spot, pc) in [(25, tick_price(5).unwrap()), (5, tick_price(25).unwrap())] {
        let p = three_bands(spot);
        let (r, trace) = mav_clmm(&p, pc).unwrap();
        assert_eq!(
            trace.steps.len(),
            3,
            "walk from tick {spot} should visit all bands"
        );
        assert!(!trace.liquidity_exhausted);
        let (v, m) = forward_walk(&p, pc, 1e-6);
        assert_relative_eq!(r.mav, m, max_relative = 1e-3);
        assert_relative_eq!(r.v_max, v, max_relative = 1e-3);
    }
}

#[test]
fn walk_flags_exhaustion() {
    let p = three_bands(25);
    let (r, trace) = mav_clmm(&p, 0.5).unwrap();
    assert!(trace.liquidity_exhausted);
    assert_eq!(trace.steps.len(), 3);
    let (v, m) = forward_walk(&p, 0.5, 1e-6);
    assert_relative_eq!(r.mav, m, max_relative = 1e-3);
    assert_relative_eq!(r.v_max, v, max_relative = 1e-3);
}

#[test]
fn clmm_grows_with_divergence() {
    let p = three_bands(25);
    let mut last = 0.0;
    for t in (-40..25).rev() {
        let (r, _) = mav_clmm(&p, tick_price(t).unwrap()).unwrap();
        assert!(r.mav >= last, "mav fell at cex tick {t}");
        last = r.mav;
    }
    let mut last = 0.0;
    for t in 26..70 {
        let (r, _) = mav_clmm(&p, tick_price(t).unwrap()).unwrap();
        assert!(r.mav >= last, "mav fell at cex tick {t}");
        last = r.mav;
    }
}

#[test]
fn realignment_error_is_second_order() {
    for g in [1e-4, 1e-3, 1e-2, 0.05, 0.2] {
        let p = pool(2_000_000.0, 1_000.0);
        let pc = 2000.0 * (1.0 - g);
        let v = v_max_cpmm(&p, pc).unwrap();
        let after = p
            .swap(Side::SellY, v, false)
            .unwrap()
            .new_state
            .spot_price();
        let miss = after / pc - 1.0;
        assert!(miss > 0.0 && miss <= g * g, "g={g}: miss {miss}");
        if g <= 1e-2 {
            assert!(miss < 1e-4, "g={g}: more than a tick away");
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let r64 = mav_cpmm(&pool(3_100_000.0, 1_500.0), 2010.0).unwrap();
    let r32 = mav_cpmm(
        &PoolState::<f32>::fee_free(3_100_000.0, 1_500.0).unwrap(),
        2010.0f32,
    )
    .unwrap();
    assert_relative_eq!(r32.mav as f64, r64.mav, max_relative = 1e-4);
    assert_relative_eq!(r32.v_max as f64, r64.v_max, max_relative = 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_matches_grid(x in 1e3..1e9f64, y in 1.0..1e6f64, ratio in 0.5..2.0f64) {
        prop_assume!((ratio - 1.0).abs() > 1e-6);
        let p = pool(x, y);
        let pc = p.spot_price() * ratio;
        let c = mav_cpmm(&p, pc).unwrap();
        let b = mav_bruteforce(&p, pc, 20_000).unwrap();
        prop_assert_eq!(c.direction, b.direction);
        prop_assert!((b.mav / c.mav - 1.0).abs() < 1e-6);
        prop_assert!((b.v_max / c.v_max - 1.0).abs() < 1e-3);
        prop_assert!(b.mav <= c.mav * (1.0 + 1e-12));
    }

    #[test]
    fn optimum_beats_neighbours(x in 1e3..1e9f64, y in 1.0..1e6f64, ratio in 0.5..2.0f64, eps in 1e-4..0.5f64) {
        prop_assume!((ratio - 1.0).abs() > 1e-6);
        let p = pool(x, y);
        let pc = p.spot_price() * ratio;
        let c = mav_cpmm(&p, pc).unwrap();
        prop_assert!((arbitrage_profit(&p, pc, c.v_max).unwrap() / c.mav - 1.0).abs() < 1e-9);
        prop_assert!(arbitrage_profit(&p, pc, c.v_max * (1.0 + eps)).unwrap() < c.mav);
        prop_assert!(arbitrage_profit(&p, pc, c.v_max * (1.0 - eps)).unwrap() < c.mav);
        prop_assert!(c.mav > 0.0 && c.v_max > 0.0);
    }

    #[test]
    fn profit_is_flat_at_the_optimum(x in 1e3..1e9f64, y in 1.0..1e6f64, ratio in 0.5..2.0f64) {
        prop_assume!((ratio - 1.0).abs() > 1e-3);
        let p = pool(x, y);
        let pc = p.spot_price() * ratio;
        let v = v_max_cpmm(&p, pc).unwrap();
        let h = v * 1e-4;
        let slope = (arbitrage_profit(&p, pc, v + h).unwrap() - arbitrage_profit(&p, pc, v - h).unwrap()) / (2.0 * h);
        // per unit of Y traded, relative to the prices involved
        prop_assert!(slope.abs() / p.spot_price().max(pc) < 1e-6);
    }

    #[test]
    fn scales_linearly_with_depth(x in 1e3..1e8f64, y in 1.0..1e5f64, ratio in 0.5..2.0f64, k in 0.01..100.0f64) {
        let p = pool(x, y);
        let pc = p.spot_price() * ratio;
        let a = mav_cpmm(&p, pc).unwrap();
        let b = mav_cpmm(&pool(x * k, y * k), pc).unwrap();
        prop_assert!((b.mav - k * a.mav).abs() <= 1e-9 * k * a.mav.max(1e-300));
        prop_assert!((b.v_max - k * a.v_max).abs() <= 1e-9 * k * a.v_max.max(1e-300));
    }

    #[test]
    fn reverse_direction_is_the_mirrored_trade(x in 1e3..1e8f64, y in 1.0..1e5f64, ratio in 1.0001..2.0f64) {
        let p = pool(x, y);
        let pa = p.spot_price();
        let pc = pa * ratio;
        let r = mav_cpmm(&p, pc).unwrap();
        let m = mav_cpmm(&p.mirrored(), 1.0 / pc).unwrap();
        prop_assert_eq!(r.direction, Direction::BuyOnAmm);
        prop_assert_eq!(m.direction, Direction::SellOnAmm);
        prop_assert!((r.v_max * pa / m.v_max - 1.0).abs() < 1e-9);
        prop_assert!((r.mav / (m.mav * pc) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wide_single_band_matches_constant_product(y0 in 1.0..1e4f64, price in 10.0..1e4f64, ratio in 0.9..1.1f64) {
        prop_assume!((ratio - 1.0).abs() > 1e-6);
        let range = TickRange::at_posting(0, 1e8, y0 * price, y0).unwrap();
        let ticked = TickedPool::new(vec![range], price).unwrap();
        let (xe, ye) = ticked.current_range().equivalent_reserves();
        let (c, trace) = mav_clmm(&ticked, price * ratio).unwrap();
        let flat = mav_cpmm(&pool(xe, ye), price * ratio).unwrap();
        prop_assert_eq!(trace.steps.len(), 1);
        prop_assert!((c.mav / flat.mav - 1.0).abs() < 1e-6);
        prop_assert!((c.v_max / flat.v_max - 1.0).abs() < 1e-6);
    }
}
