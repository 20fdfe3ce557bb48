use cachecast::channel::{draw_channel, exact_min_mean, min_norm_statistic, row_norms_sq, EXACT_MIN_GUARD};
use cachecast::{MonteCarlo, RngStream, SystemConfig};
use proptest::prelude::*;
use statrs::function::gamma::gamma_lr;

fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimate_plus_error_is_the_channel(
        k in 1usize..12, nt in 1usize..6, l in 1usize..4, s2 in 0.0f64..=1.0, seed in any::<u64>()
    ) {
        let cfg = SystemConfig::new(k, nt, 1.0).with_subchannels(l).with_csit_error(s2);
        let d = draw_channel(&cfg, &mut RngStream::new(seed, 0));
        prop_assert_eq!(d.true_h.len(), l);
        for ((t, e), r) in d.true_h.iter().zip(&d.est_h).zip(&d.err_h) {
            for ((h, a), b) in t.data().iter().zip(e.data()).zip(r.data()) {
                prop_assert_eq!(*h, a + b);
            }
        }
    }
}

#[test]
fn norm_distribution_matches_gamma_law() {
    for nt in [1usize, 3, 8] {
        let cfg = SystemConfig::new(1000, nt, 1.0).with_csit_error(0.3);
        let mut rng = RngStream::new(77, nt as u64);
        let mut xs = Vec::with_capacity(100_000);
        let mut buf = vec![0.0; 1000];
        for _ in 0..100 {
            let d = draw_channel(&cfg, &mut rng);
            row_norms_sq(&d.true_h[0], &mut buf);
            xs.extend(buf.iter().map(|v| v / nt as f64));
        }
        let n = nt as f64;
        let ks = ks_distance(xs, |x| gamma_lr(n, n * x));
        assert!(ks < 0.01, "nt = {nt}: KS = {ks}");
    }
}

#[test]
fn exact_min_mean_agrees_with_direct_draws() {
    // minimum taken over actual channel rows, not the order-statistic sampler
    let (k, nt) = (20, 3);
    let cfg = SystemConfig::new(k, nt, 1.0);
    let mc = MonteCarlo::new(20_000);
    let est = mc
        .estimate(
            &RngStream::new(5, 0),
            || vec![0.0; k],
            |buf, r| {
                let d = draw_channel(&cfg, r);
                row_norms_sq(&d.true_h[0], buf);
                Ok(buf.iter().copied().fold(f64::INFINITY, f64::min) / nt as f64)
            },
        )
        .unwrap();
    let exact = exact_min_mean(nt, k).unwrap();
    assert!(
        (est.mean - exact).abs() < 3.0 * est.std_err,
        "{} ± {} vs {exact}",
        est.mean,
        est.std_err
    );
}

#[test]
fn exact_min_mean_agrees_with_order_statistic_sampler() {
    let mc = MonteCarlo::new(40_000);
    for (nt, k) in [(1usize, 7usize), (2, 10), (4, 30), (6, 40), (11, 20), (2, 200)] {
        assert!(k * (nt - 1) <= EXACT_MIN_GUARD);
        let est = min_norm_statistic(nt, k, &RngStream::new(9, (nt * 1000 + k) as u64), &mc).unwrap();
        let exact = exact_min_mean(nt, k).unwrap();
        assert!(
            (est.mean - exact).abs() < 3.0 * est.std_err,
            "nt={nt} K={k}: {} ± {} vs {exact}",
            est.mean,
            est.std_err
        );
    }
}

#[test]
fn min_stays_bounded_away_from_zero_with_log_array() {
    let mc = MonteCarlo::new(20_000);
    for k in [100usize, 1000, 10_000] {
        let nt = (k as f64).ln().ceil() as usize + 1;
        let est = min_norm_statistic(nt, k, &RngStream::new(3, k as u64), &mc).unwrap();
        assert!(est.mean >= 0.1, "K={k}: {}", est.mean);
    }
}

/// Deviations of the minimum shrink like `sqrt(2/ln K)`, so a fixed band of
/// 0.2 is only entered around `K ~ 1e19`; the sampler reaches that range
/// because it never forms the `K` norms.
#[test]
fn min_concentrates_with_log_squared_array() {
    let mc = MonteCarlo::new(20_000);
    let ks = [
        100usize,
        10_000,
        1_000_000,
        1_000_000_000_000,
        10_000_000_000_000_000_000,
    ];
    let mut miss = Vec::new();
    let mut dev = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let nt = (k as f64).ln().powi(2).ceil() as usize;
        let rng = RngStream::new(4, i as u64);
        let cols = mc
            .run(
                &rng,
                2,
                || (),
                |_, r, out| {
                    let v = cachecast::channel::sample_min_norm(nt, k, r)?;
                    out[0] = f64::from((v - 1.0).abs() > 0.2);
                    out[1] = (v - 1.0).abs();
                    Ok(())
                },
            )
            .unwrap();
        miss.push(cols[0].mean);
        dev.push(cols[1].mean);
    }
    assert!(miss.windows(2).all(|w| w[1] <= w[0]), "{miss:?}");
    assert!(miss[ks.len() - 1] < 0.5 * miss[0], "{miss:?}");
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
}
