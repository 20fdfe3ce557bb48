//! Release acceptance: twelve criteria at their stated tolerances, one
//! PASS/FAIL line each. Wall-clock limits are part of the verdict.

use std::time::{Duration, Instant};

use cachecast::channel::{draw_channel, min_norm_statistic};
use cachecast::mathx::{lambert_w, reg_lower_gamma, MaximizeOptions};
use cachecast::mixed::{
    mixed_rates_mc, optimal_split_closed_form, optimal_split_simplified, PowerSplit, SplitBoundary,
};
use cachecast::multicast::{a_k, avg_rate_parallel, avg_rate_quasistatic};
use cachecast::multiplex::{build_zf_precoder, sinr_samples, symmetric_rate_asymptotic, symmetric_rate_mc, ZfPrecoder};
use cachecast::selection::optimal_threshold_rayleigh;
use cachecast::selection::simulated_selection_rate;
use cachecast::{db_to_linear, MonteCarlo, Placement, RngStream, SystemConfig};
use cachecast_experiments::config::{MixedFigConfig, Settings, ThresholdConfig};
use cachecast_experiments::runners::{first_saturation, run_fig3, run_fig4, run_threshold, total_power_db};
use cachecast_experiments::Row;
use num_complex::Complex64;

const SEED: u64 = 42;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn criterion(n: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let took = t.elapsed();
    let in_time = limit.is_none_or(|l| took <= l);
    let passed = o.passed && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" (limit {:.0} s)", l.as_secs_f64()));
    println!(
        "{} {n:>2} {name}: {} [{:.1} s{budget}]",
        if passed { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64()
    );
    passed
}

fn rng(tag: u64) -> RngStream {
    RngStream::new(SEED, tag)
}

fn band(rates: &[f64]) -> f64 {
    rates
        .iter()
        .map(|r| (r / rates[0]).max(rates[0] / r))
        .fold(1.0, f64::max)
}

fn log_array(k: usize) -> usize {
    (k as f64).ln().ceil() as usize + 1
}

const KS: [usize; 3] = [100, 1000, 10_000];

fn closed_form_threshold() -> Outcome {
    let c = ThresholdConfig {
        power_db: vec![30.0],
        users: 10_000,
        ..ThresholdConfig::default()
    };
    let rows = run_threshold(&c, &Settings::default().with_samples(100_000)).unwrap();
    let find = |id: &str| rows.iter().find(|r| r.scheme == id).unwrap();
    let closed = find("threshold_closed_form");
    let empirical = find("threshold_empirical");
    let p = db_to_linear(30.0);
    let want = p / lambert_w(p).unwrap() - 1.0;
    let residual: f64 = closed.flags().get("residual").unwrap().parse().unwrap();
    let gap = (empirical.mean_nats - closed.mean_nats).abs() / closed.mean_nats;
    let formula = (closed.mean_nats - want).abs() <= 1e-9 * want;
    outcome(
        formula && residual.abs() < 1e-6 && gap <= 0.1,
        format!(
            "s* = {:.4}, residual {residual:.2e}, empirical {:.4} (gap {:.2}%)",
            closed.mean_nats,
            empirical.mean_nats,
            100.0 * gap
        ),
    )
}

fn gamma_cdf_bound() -> Outcome {
    let bad: Vec<usize> = (1..=64)
        .filter(|&nt| {
            let n = nt as f64;
            reg_lower_gamma(n, 0.1586 * n).unwrap() > (-n).exp()
        })
        .collect();
    outcome(bad.is_empty(), format!("violations at nt = {bad:?}"))
}

fn extreme_value_limit() -> Outcome {
    let (nt, k) = (2, 10_000);
    let est = min_norm_statistic(nt, k, &rng(3), &MonteCarlo::new(100_000)).unwrap();
    let scaled = a_k(nt, k) * est.mean;
    let want = std::f64::consts::PI.sqrt() / 2.0;
    let gap = (scaled / want - 1.0).abs();
    outcome(
        gap <= 0.02,
        format!("a_K E[min] = {scaled:.5} vs {want:.5} ({:.2}%)", 100.0 * gap),
    )
}

fn small_array_law() -> Outcome {
    let p = 10.0;
    let ratios: Vec<f64> = KS
        .iter()
        .map(|&k| {
            avg_rate_quasistatic(&SystemConfig::new(k, 1, p), &rng(4 + k as u64), &MonteCarlo::new(4000))
                .unwrap()
                .mean
                / (p / k as f64)
        })
        .collect();
    outcome(
        ratios.iter().all(|r| (0.8..=1.2).contains(r)),
        format!("R̄₀/(P/K) = {ratios:.4?}"),
    )
}

fn order_one_bands() -> Outcome {
    let mc = MonteCarlo::new(1000);
    let antennas: Vec<f64> = KS
        .iter()
        .map(|&k| {
            avg_rate_quasistatic(&SystemConfig::new(k, log_array(k), 10.0), &rng(50 + k as u64), &mc)
                .unwrap()
                .mean
        })
        .collect();
    let subchannels: Vec<f64> = KS
        .iter()
        .map(|&k| {
            let cfg = SystemConfig::new(k, 1, 10.0).with_subchannels(log_array(k));
            avg_rate_parallel(&cfg, &rng(51 + k as u64), &mc).unwrap().mean
        })
        .collect();
    let (a, b) = (band(&antennas), band(&subchannels));
    outcome(
        a <= 2.0 && b <= 2.0,
        format!("antennas {antennas:.4?} (×{a:.3}), sub-channels {subchannels:.4?} (×{b:.3})"),
    )
}

fn selection_scaling() -> Outcome {
    let p = db_to_linear(30.0);
    let s = optimal_threshold_rayleigh(p).unwrap();
    let share = (1.0 / p - 1.0 / lambert_w(p).unwrap()).exp();
    let mut per_user = Vec::new();
    let mut worst_z: f64 = 0.0;
    for k in KS {
        let cfg = SystemConfig::new(k, 1, p).with_cache(0.05, Placement::Decentralized);
        let e = simulated_selection_rate(&cfg, s, &rng(6 + k as u64), &MonteCarlo::new(20_000)).unwrap();
        per_user.push(e.rate.mean / k as f64);
        worst_z = worst_z.max((e.selected_fraction.mean - share).abs() / e.selected_fraction.std_err);
    }
    let spread = per_user
        .iter()
        .map(|r| (r / per_user[0] - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        spread <= 0.1 && worst_z <= 3.0,
        format!(
            "Rmc/K = {per_user:.4?} (spread {:.2}%), K*/K max |z| = {worst_z:.2}",
            100.0 * spread
        ),
    )
}

fn zf_correctness() -> Outcome {
    let mut r = rng(7);
    let mut leak: f64 = 0.0;
    for (k, nt) in [(4usize, 8usize), (16, 24), (30, 30)] {
        let cfg = SystemConfig::new(k, nt, 1.0).with_csit_error(0.2);
        for _ in 0..100 {
            let d = draw_channel(&cfg, &mut r);
            let est = &d.est_h[0];
            for pre in [
                build_zf_precoder(est).unwrap(),
                ZfPrecoder::pseudo_inverse(est).unwrap(),
            ] {
                for (u, w) in pre.columns.iter().enumerate() {
                    for l in (0..k).filter(|&l| l != u) {
                        let v: Complex64 = est.row(l).iter().zip(w).map(|(a, b)| a * b).sum();
                        leak = leak.max(v.norm() / est.max_row_norm());
                    }
                }
            }
        }
    }

    let (k, nt) = (8, 16);
    let n = (nt - k + 1) as f64;
    let mut xs: Vec<f64> = sinr_samples(&SystemConfig::new(k, nt, 8.0), &mut rng(8), 10_000)
        .unwrap()
        .iter()
        .map(|s| s.signal_gain / n)
        .collect();
    xs.sort_by(f64::total_cmp);
    let len = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = reg_lower_gamma(n, n * x).unwrap();
            (f - i as f64 / len).abs().max((f - (i + 1) as f64 / len).abs())
        })
        .fold(0.0, f64::max);

    let s2 = 0.2;
    let cs: Vec<f64> = sinr_samples(&SystemConfig::new(k, nt, 8.0).with_csit_error(s2), &mut rng(9), 10_000)
        .unwrap()
        .iter()
        .map(|s| s.interference / ((k - 1) as f64 * s2))
        .collect();
    let mean = cs.iter().sum::<f64>() / len;
    let se = (cs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0) / len).sqrt();
    let z = (mean - 1.0).abs() / se;
    outcome(
        leak < 1e-10 && ks < 0.02 && z <= 3.0,
        format!("max leakage {leak:.1e}, gain KS {ks:.4}, leakage mean {mean:.4} (|z| {z:.2})"),
    )
}

fn large_system_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut gaps = Vec::new();
    for k in [50usize, 100] {
        for s2 in [0.0, 0.1, 0.5] {
            let cfg = SystemConfig::new(k, 2 * k, k as f64).with_csit_error(s2);
            let exact = symmetric_rate_mc(&cfg, &rng(10 + k as u64), &MonteCarlo::new(200)).unwrap();
            let asym = symmetric_rate_asymptotic(&cfg).unwrap();
            let gap = (exact.mean - asym.value).abs() / asym.value;
            gaps.push(gap * 100.0);
            worst = worst.max(gap);
        }
    }
    outcome(worst <= 0.1, format!("relative gaps (%) {gaps:.2?}"))
}

fn mixed_reductions() -> Outcome {
    let mut bad = 0;
    let mut cases = 0;
    for (i, (k, nt, p, s2)) in [
        (1usize, 1usize, 3.0, 0.0),
        (4, 4, 40.0, 0.1),
        (6, 9, 300.0, 0.5),
        (10, 10, 1000.0, 0.01),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = SystemConfig::new(k, nt, p).with_csit_error(s2);
        let r = rng(20 + i as u64);
        for shards in [1, 3, 16] {
            let mc = MonteCarlo::new(211).with_shards(shards);
            let common = mixed_rates_mc(&cfg, &PowerSplit::new(&cfg, p).unwrap(), &r, &mc).unwrap();
            let private = mixed_rates_mc(&cfg, &PowerSplit::new(&cfg, 0.0).unwrap(), &r, &mc).unwrap();
            bad += usize::from(common.common != avg_rate_quasistatic(&cfg, &r, &mc).unwrap());
            bad += usize::from(private.private != symmetric_rate_mc(&cfg, &r, &mc).unwrap());
            cases += 2;
        }
    }
    outcome(bad == 0, format!("{bad} of {cases} endpoint estimates differ"))
}

fn of(rows: &[Row], scheme: &str) -> Vec<Row> {
    let mut v: Vec<Row> = rows.iter().filter(|r| r.scheme == scheme).cloned().collect();
    v.sort_by(|a, b| a.m.total_cmp(&b.m));
    v
}

fn mixed_dominance() -> Outcome {
    let c = MixedFigConfig {
        per_user_power_db: Some(vec![20.0].into()),
        m: Some((1..=50).map(|i| i as f64 * 0.01).collect::<Vec<_>>().into()),
        ..MixedFigConfig::default()
    };
    let rows = run_fig3(&c, &Settings::default()).unwrap();
    let (mc, uc, mix) = (of(&rows, "multicast"), of(&rows, "multiplex"), of(&rows, "mixed"));
    assert_eq!(mix.len(), 50);
    let mut short = Vec::new();
    for ((a, b), x) in mc.iter().zip(&uc).zip(&mix) {
        assert!(a.m == x.m && b.m == x.m);
        if x.mean_nats < a.mean_nats.max(b.mean_nats) - 3.0 * x.std_err.unwrap() {
            short.push(x.m);
        }
    }
    let private: Vec<f64> = mix.iter().map(|r| 1.0 - r.p0_frac.unwrap()).collect();
    let rises = private.windows(2).filter(|w| w[1] > w[0]).count();
    outcome(
        short.is_empty() && rises == 0,
        format!("points below max(Rmc, Ruc) − 3se: {short:?}; increases of (P−P₀*)/P: {rises}"),
    )
}

fn saturation_points() -> Outcome {
    let c = MixedFigConfig {
        per_user_power_db: Some(vec![10.0, 20.0].into()),
        ..MixedFigConfig::default()
    };
    let sat = first_saturation(&run_fig4(&c, &Settings::default()).unwrap());
    let at = |pk_db: f64| {
        let p = total_power_db(pk_db, 100);
        sat.iter().find(|(q, _)| (q - p).abs() < 1e-9).and_then(|s| s.1)
    };
    let (lo, hi) = (at(10.0), at(20.0));
    let ok =
        lo.is_some_and(|m| (m - 0.035).abs() <= 0.015 + 1e-12) && hi.is_some_and(|m| (m - 0.25).abs() <= 0.03 + 1e-12);
    outcome(ok, format!("P₀*/P reaches 1 at m = {lo:?} (10 dB), {hi:?} (20 dB)"))
}

fn closed_form_split() -> Outcome {
    let opts = MaximizeOptions {
        grid_points: 401,
        ..MaximizeOptions::default()
    };
    let mut worst: f64 = 0.0;
    let mut interior = 0;
    for p in [200.0, 500.0, 1e3, 3e3, 1e4] {
        for m in [0.0, 0.01, 0.02, 0.05, 0.1] {
            let cfg = SystemConfig::new(100, 100, p)
                .with_csit_error(100.0 / p)
                .with_cache(m, Placement::Centralized);
            let cf = optimal_split_closed_form(&cfg).unwrap();
            if cf.boundary == SplitBoundary::Interior {
                interior += 1;
                worst = worst.max((cf.p0 - optimal_split_simplified(&cfg, &opts).unwrap().p0).abs() / p);
            }
        }
    }
    outcome(
        interior > 0 && worst <= 0.02,
        format!("{interior} interior optima, max gap {:.2e}·P", worst),
    )
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let results = [
        criterion(1, "closed-form selection threshold", secs(60), closed_form_threshold),
        criterion(2, "gamma CDF bound", secs(1), gamma_cdf_bound),
        criterion(3, "extreme-value limit of the minimum", secs(30), extreme_value_limit),
        criterion(4, "small-array multicast law", secs(60), small_array_law),
        criterion(5, "order-one multicast bands", secs(120), order_one_bands),
        criterion(6, "linear scaling of selection", None, selection_scaling),
        criterion(7, "zero-forcing correctness", None, zf_correctness),
        criterion(8, "large-system ZF rate", secs(120), large_system_agreement),
        criterion(9, "mixed endpoint reductions", None, mixed_reductions),
        criterion(10, "mixed dominance and private share in m", secs(300), mixed_dominance),
        criterion(11, "saturation of the common power", None, saturation_points),
        criterion(12, "closed-form split vs numeric", None, closed_form_split),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, &p)| !p)
        .map(|(i, _)| i + 1)
        .collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
