use cachecast::caching::delivery_rate_unicast;
use cachecast::channel::draw_channel;
use cachecast::multiplex::{build_zf_precoder, sinr_samples, symmetric_rate_asymptotic, symmetric_rate_mc, ZfPrecoder};
use cachecast::{MonteCarlo, RngStream, SystemConfig};
use num_complex::Complex64;
use statrs::function::gamma::gamma_lr;

fn max_leak(est: &cachecast::linalg::CMat, pre: &ZfPrecoder) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, w) in pre.columns.iter().enumerate() {
        for l in (0..est.rows()).filter(|&l| l != k) {
            let v: Complex64 = est.row(l).iter().zip(w).map(|(a, b)| a * b).sum();
            worst = worst.max(v.norm());
        }
    }
    worst
}

#[test]
fn precoders_null_the_other_users() {
    let mut rng = RngStream::new(42, 0);
    for (k, nt) in [(2usize, 4usize), (8, 16), (32, 64)] {
        let cfg = SystemConfig::new(k, nt, 1.0).with_csit_error(0.2);
        for _ in 0..100 {
            let d = draw_channel(&cfg, &mut rng);
            let est = &d.est_h[0];
            let scale = est.max_row_norm();
            for pre in [
                build_zf_precoder(est).unwrap(),
                ZfPrecoder::pseudo_inverse(est).unwrap(),
            ] {
                assert!(max_leak(est, &pre) < 1e-10 * scale, "K={k} nt={nt}");
            }
        }
    }
}

#[test]
fn signal_gain_follows_gamma_law() {
    let (k, nt) = (8, 16);
    let n = (nt - k + 1) as f64;
    let cfg = SystemConfig::new(k, nt, 8.0);
    let mut xs: Vec<f64> = sinr_samples(&cfg, &mut RngStream::new(3, 0), 10_000)
        .unwrap()
        .iter()
        .map(|s| s.signal_gain / n)
        .collect();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = gamma_lr(n, n * x);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.02, "KS = {ks}");
}

#[test]
fn leakage_has_unit_normalized_mean() {
    for (k, nt, s2) in [(4usize, 8usize, 0.3), (16, 20, 0.05), (6, 6, 1.0)] {
        let cfg = SystemConfig::new(k, nt, 1.0).with_csit_error(s2);
        let xs: Vec<f64> = sinr_samples(&cfg, &mut RngStream::new(4, k as u64), 10_000)
            .unwrap()
            .iter()
            .map(|s| s.interference / ((k - 1) as f64 * s2))
            .collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "K={k} σ²={s2}: {mean} ± {se}");
    }
}

#[test]
fn exact_rate_near_large_system_form() {
    let mc = MonteCarlo::new(200);
    for s2 in [0.0, 0.1, 0.5] {
        let k = 50;
        let cfg = SystemConfig::new(k, 2 * k, k as f64).with_csit_error(s2);
        let exact = symmetric_rate_mc(&cfg, &RngStream::new(42, 0), &mc).unwrap();
        let asym = symmetric_rate_asymptotic(&cfg).unwrap();
        let rel = (exact.mean - asym.value).abs() / asym.value;
        assert!(rel < 0.1, "σ²={s2}: {} vs {} ({rel})", exact.mean, asym.value);
    }
}

#[test]
fn unicast_rate_grows_linearly_in_users() {
    let mc = MonteCarlo::new(300);
    let m = 0.1;
    let per_user: Vec<f64> = [8usize, 16, 32, 64]
        .iter()
        .map(|&k| {
            let cfg = SystemConfig::new(k, 2 * k, k as f64).with_csit_error(0.1);
            let r = symmetric_rate_mc(&cfg, &RngStream::new(42, k as u64), &mc).unwrap();
            delivery_rate_unicast(m, r.mean, k) / k as f64
        })
        .collect();
    for r in &per_user {
        assert!(*r >= per_user[0] / 2.0 && *r <= per_user[0] * 2.0, "{per_user:?}");
    }
}
