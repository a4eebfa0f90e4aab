use std::collections::BTreeSet;

use mav_core::market_data::AlignedMinute;
use mav_core::mav::mav_cpmm;
use mav_core::misalignment::{
    cumulative_mav, delta_series, iqr_threshold, outlier_threshold, segment_episodes, thresholds,
    ThresholdMode,
};
use mav_core::synthetic::{square_wave, SquareWaveSpec};
use proptest::prelude::*;

fn minutes_from(cex: &[f64]) -> Vec<AlignedMinute> {
    cex.iter()
        .enumerate()
        .map(|(i, &c)| AlignedMinute {
            minute: 1_700_000_040 + 60 * i as i64,
            cex_close: c,
            cex_stale: false,
            amm_spot: 2000.0,
            reserve_x: 200_000.0,
            reserve_y: 100.0,
            amm_volume: 10.0,
            avg_gas: 0.1,
            swap_count: 1,
            traded: true,
        })
        .collect()
}

#[test]
fn square_waves_are_recovered_exactly() {
    for seed in 0..100 {
        let spec = SquareWaveSpec {
            seed,
            ..SquareWaveSpec::default()
        };
        let (minutes, truth) = square_wave(&spec);
        let thr = outlier_threshold(&delta_series(&minutes)).unwrap();
        let found = segment_episodes(&minutes, thr).unwrap();
        assert_eq!(found.len(), truth.len(), "seed {seed}");
        for (f, t) in found.iter().zip(&truth) {
            assert_eq!(f.start_minute, t.start_minute, "seed {seed}");
            assert_eq!(f.end_minute, Some(t.end_minute), "seed {seed}");
            assert_eq!(f.peak_minute, t.peak_minute, "seed {seed}");
            assert_eq!(f.peak_mav.mav, t.peak_mav, "seed {seed}");
            assert_eq!(f.decay_seconds, Some(60 * t.width as i64), "seed {seed}");
        }
    }
}

#[test]
fn type7_examples() {
    assert_eq!(iqr_threshold(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap(), 7.0);
    assert_eq!(iqr_threshold(&[5.0; 9]).unwrap(), 5.0);
}

#[test]
fn fixed_threshold_mode_is_passed_through() {
    let minutes = minutes_from(&[1990.0, 2000.0, 1900.0]);
    let deltas = delta_series(&minutes);
    assert_eq!(
        thresholds(&deltas, ThresholdMode::Fixed(3.5), None).unwrap(),
        vec![3.5; 3]
    );
}

#[test]
fn open_episode_at_end_is_unresolved() {
    let minutes = minutes_from(&[2000.0, 2000.0, 1900.0, 1950.0]);
    let eps = segment_episodes(&minutes, 10.0).unwrap();
    assert_eq!(eps.len(), 1);
    assert_eq!(eps[0].end_minute, None);
    assert_eq!(eps[0].decay_seconds, None);
    assert_eq!(eps[0].peak_minute, minutes[2].minute);
}

fn cex_series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![3 => 1995.0..2005.0f64, 1 => 1800.0..2200.0f64],
        8..200,
    )
}

proptest! {
    #[test]
    fn episodes_partition_the_above_threshold_minutes(cex in cex_series(), thr in 0.0..150.0f64) {
        let minutes = minutes_from(&cex);
        let eps = segment_episodes(&minutes, thr).unwrap();
        let above: BTreeSet<i64> = minutes.iter().filter(|m| m.delta().abs() > thr).map(|m| m.minute).collect();
        let mut covered = BTreeSet::new();
        for pair in eps.windows(2) {
            prop_assert!(pair[0].end_minute.unwrap() < pair[1].start_minute);
        }
        for e in &eps {
            for m in &e.minutes {
                prop_assert!(covered.insert(m.minute), "minute {} in two episodes", m.minute);
            }
        }
        prop_assert_eq!(covered, above);
    }

    #[test]
    fn above_set_shrinks_as_threshold_rises(cex in cex_series(), a in 0.0..150.0f64, b in 0.0..150.0f64) {
        let minutes = minutes_from(&cex);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let set = |t| -> BTreeSet<i64> {
            segment_episodes(&minutes, t).unwrap().iter().flat_map(|e| e.minutes.iter().map(|m| m.minute)).collect()
        };
        prop_assert!(set(hi).is_subset(&set(lo)));
    }

    #[test]
    fn one_peak_per_episode(cex in cex_series(), thr in 0.0..150.0f64) {
        let minutes = minutes_from(&cex);
        let eps = segment_episodes(&minutes, thr).unwrap();
        let mut brute = 0.0;
        for e in &eps {
            // earliest minute wins ties
            let mut best = (0.0, i64::MAX);
            for m in &e.minutes {
                let v = mav_cpmm(&m.pool().unwrap(), m.cex_close).unwrap().mav;
                if v > best.0 || best.1 == i64::MAX {
                    best = (v, m.minute);
                }
            }
            prop_assert_eq!(e.peak_mav.mav, best.0);
            prop_assert_eq!(e.peak_minute, best.1);
            brute += best.0;
        }
        let total = cumulative_mav(&eps, 1e6).unwrap();
        prop_assert_eq!(total.total_mav, brute);
    }

    #[test]
    fn threshold_is_a_quantile_fence(values in prop::collection::vec(0.0..1e3f64, 4..300)) {
        let t = iqr_threshold(&values).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert!(t >= sorted[(3 * (sorted.len() - 1)) / 4]);
        let shifted: Vec<f64> = values.iter().map(|v| v + 10.0).collect();
        prop_assert!((iqr_threshold(&shifted).unwrap() - (t + 10.0)).abs() < 1e-9);
    }
}
