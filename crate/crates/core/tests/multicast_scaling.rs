use cachecast::multicast::{
    avg_rate_parallel, avg_rate_quasistatic, avg_rate_quasistatic_nested, parallel_rate_bounds,
};
use cachecast::{MonteCarlo, RngStream, SystemConfig};
use proptest::prelude::*;

const KS: [usize; 3] = [100, 1000, 10_000];

fn log_array(k: usize) -> usize {
    (k as f64).ln().ceil() as usize + 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nested_rates_fall_with_users(mut ks in prop::collection::vec(1usize..60, 1..6), nt in 1usize..4, seed in any::<u64>()) {
        ks.sort_unstable();
        let cfg = SystemConfig::new(1, nt, 10.0);
        let est = avg_rate_quasistatic_nested(&cfg, &ks, &RngStream::new(seed, 0), &MonteCarlo::new(200)).unwrap();
        for w in est.windows(2) {
            prop_assert!(w[1].mean <= w[0].mean);
        }
    }

    #[test]
    fn parallel_bounds_sandwich(k in 1usize..40, nt in 1usize..4, l in 1usize..6, p in 0.1f64..1e3, seed in any::<u64>()) {
        let cfg = SystemConfig::new(k, nt, p).with_subchannels(l);
        let b = parallel_rate_bounds(&cfg, &RngStream::new(seed, 1), &MonteCarlo::new(300)).unwrap();
        prop_assert!(b.lower.mean <= b.rate.mean && b.rate.mean <= b.upper.mean);
        prop_assert!(b.lower_gap.mean >= 0.0 && b.upper_gap.mean >= 0.0);
    }
}

#[test]
fn nested_largest_set_matches_direct_estimate_in_law() {
    let cfg = SystemConfig::new(40, 2, 10.0);
    let mc = MonteCarlo::new(20_000);
    let nested = avg_rate_quasistatic_nested(&cfg, &[40], &RngStream::new(1, 0), &mc).unwrap();
    let direct = avg_rate_quasistatic(&cfg, &RngStream::new(2, 0), &mc).unwrap();
    assert!(nested[0].agrees_with(&direct, 4.0), "{nested:?} vs {direct:?}");
}

#[test]
fn small_array_rate_tracks_power_over_users() {
    let mc = MonteCarlo::new(4000);
    let p = 10.0;
    for k in KS {
        let est = avg_rate_quasistatic(&SystemConfig::new(k, 1, p), &RngStream::new(42, k as u64), &mc).unwrap();
        let ratio = est.mean / (p / k as f64);
        assert!((0.8..=1.2).contains(&ratio), "K={k}: ratio {ratio}");
    }
}

#[test]
fn large_array_rate_is_order_one() {
    let mc = MonteCarlo::new(1000);
    let rates: Vec<f64> = KS
        .iter()
        .map(|&k| {
            let cfg = SystemConfig::new(k, log_array(k), 10.0);
            avg_rate_quasistatic(&cfg, &RngStream::new(42, k as u64), &mc)
                .unwrap()
                .mean
        })
        .collect();
    for r in &rates {
        assert!(*r >= rates[0] / 2.0 && *r <= rates[0] * 2.0, "{rates:?}");
    }
}

#[test]
fn parallel_subchannel_rate_is_order_one() {
    let mc = MonteCarlo::new(1000);
    let rates: Vec<f64> = KS
        .iter()
        .map(|&k| {
            let cfg = SystemConfig::new(k, 1, 10.0).with_subchannels(log_array(k));
            avg_rate_parallel(&cfg, &RngStream::new(42, k as u64), &mc)
                .unwrap()
                .mean
        })
        .collect();
    for r in &rates {
        assert!(*r >= rates[0] / 2.0 && *r <= rates[0] * 2.0, "{rates:?}");
    }
}
