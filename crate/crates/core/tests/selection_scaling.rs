use cachecast::caching::Placement;
use cachecast::mathx::lambert_w;
use cachecast::selection::{optimal_threshold_general, optimal_threshold_rayleigh, simulated_selection_rate};
use cachecast::{db_to_linear, MonteCarlo, RngStream, SystemConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn rayleigh_threshold_is_stationary(log_p in -1.0f64..5.0) {
        let p = 10f64.powf(log_p);
        let s = optimal_threshold_rayleigh(p).unwrap();
        let f = |x: f64| (-x / p).exp() * x.ln_1p();
        let h = 1e-4 * s.max(1e-2);
        let d = (f(s + h) - f(s - h)) / (2.0 * h);
        prop_assert!(d.abs() < 1e-6, "P={p} s={s} d={d}");
    }

    #[test]
    fn general_solver_reproduces_rayleigh(log_p in -0.5f64..4.5) {
        let p = 10f64.powf(log_p);
        let s = optimal_threshold_general(|x| -(-x / p).exp_m1(), |x| (-x / p).exp() / p, 0.0, 20.0 * p + 10.0).unwrap();
        let r = optimal_threshold_rayleigh(p).unwrap();
        prop_assert!((s - r).abs() <= 1e-9 * r.max(1.0), "{s} vs {r}");
    }
}

#[test]
fn selection_scales_linearly_and_selects_the_predicted_share() {
    let p = db_to_linear(30.0);
    let s = optimal_threshold_rayleigh(p).unwrap();
    let share = (1.0 / p - 1.0 / lambert_w(p).unwrap()).exp();
    let mc = MonteCarlo::new(20_000);
    let mut per_user = Vec::new();
    for (i, k) in [100usize, 1000, 10_000].into_iter().enumerate() {
        let cfg = SystemConfig::new(k, 1, p).with_cache(0.05, Placement::Decentralized);
        let est = simulated_selection_rate(&cfg, s, &RngStream::new(42, i as u64), &mc).unwrap();
        per_user.push(est.rate.mean / k as f64);
        let f = est.selected_fraction;
        assert!(
            (f.mean - share).abs() < 3.0 * f.std_err,
            "K={k}: {} ± {} vs {share}",
            f.mean,
            f.std_err
        );
    }
    for r in &per_user {
        assert!((r / per_user[0] - 1.0).abs() < 0.1, "{per_user:?}");
    }
}
