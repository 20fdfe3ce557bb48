//! Release gate: every module invariant, checked at desk scale.
//!
//! Each check reports the measured quantity, the limit it is held to and
//! a signed margin (positive means passed). A check that errors out is a
//! failed row, never a panic.

use cachecast::caching::{delivery_rate_multicast, delivery_rate_selection, transmissions, Placement};
use cachecast::channel::{
    draw_channel, exact_min_mean, min_norm_statistic, row_norms_sq, sample_min_norm, EXACT_MIN_GUARD,
};
use cachecast::linalg::CMat;
use cachecast::mathx::{gamma_p_inverse, lambert_w, maximize_1d, reg_lower_gamma, reg_upper_gamma, MaximizeOptions};
use cachecast::mixed::{
    mixed_rates_mc, optimal_split_closed_form, optimal_split_simplified, split_search_options, MixedEnsemble,
    PowerSplit, SplitBoundary,
};
use cachecast::multicast::{
    avg_rate_parallel, avg_rate_quasistatic, avg_rate_quasistatic_nested, parallel_rate_bounds,
};
use cachecast::multiplex::{build_zf_precoder, sinr_samples, symmetric_rate_asymptotic, symmetric_rate_mc, ZfPrecoder};
use cachecast::selection::{optimal_threshold_general, optimal_threshold_rayleigh, simulated_selection_rate};
use cachecast::{db_to_linear, Execution, MonteCarlo, Result, RngStream, SystemConfig};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::config::{Fig1Config, Grid, Scheme, Settings, SweepConfig};
use crate::output::{write_csv, write_json, Format};
use crate::runners::{run_fig1, run_sweep, threshold_stationarity_residual};

pub const CHECK_SCHEMA: &str = "cachecast-check/1";
pub const CHECK_COLUMNS: [&str; 7] = ["check", "module", "passed", "measured", "limit", "margin", "detail"];

fn number<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub module: String,
    pub passed: bool,
    #[serde(serialize_with = "number")]
    pub measured: f64,
    #[serde(serialize_with = "number")]
    pub limit: f64,
    #[serde(serialize_with = "number")]
    pub margin: f64,
    pub detail: String,
}

impl CheckRow {
    fn at_most(measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self::verdict(measured <= limit, measured, limit, limit - measured, detail)
    }

    fn at_least(measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self::verdict(measured >= limit, measured, limit, measured - limit, detail)
    }

    fn verdict(passed: bool, measured: f64, limit: f64, margin: f64, detail: impl Into<String>) -> Self {
        Self {
            check: String::new(),
            module: String::new(),
            passed,
            measured,
            limit,
            margin,
            detail: detail.into(),
        }
    }
}

pub fn write_report<W: std::io::Write>(w: W, format: Format, rows: &[CheckRow]) -> Result<()> {
    match format {
        Format::Csv => write_csv(w, CHECK_SCHEMA, &CHECK_COLUMNS, rows),
        Format::Json => write_json(w, rows),
    }
}

struct Ctx {
    seed: u64,
    execution: Execution,
}

impl Ctx {
    fn rng(&self, tag: u64) -> RngStream {
        RngStream::new(self.seed, 1000 + tag)
    }

    fn mc(&self, samples: usize) -> MonteCarlo {
        MonteCarlo::new(samples).with_execution(self.execution)
    }
}

type CheckFn = fn(&Ctx) -> Result<CheckRow>;

const CHECKS: &[(&str, &str, CheckFn)] = &[
    ("mathx", "lambert_round_trip", lambert_round_trip),
    ("mathx", "gamma_cdf_small_argument_bound", gamma_cdf_bound),
    ("mathx", "incomplete_gamma_complement", gamma_complement),
    ("mathx", "maximize_concave_peak", maximize_concave),
    ("mathx", "chernoff_bound_on_exp_sums", chernoff),
    ("mathx", "min_mean_lower_bound", markov_lower_bound),
    ("mathx", "min_mean_quantile_ratio", markov_quantile_ratio),
    ("mathx", "log_asymptotics_constant_mean", log_asym_constant),
    ("mathx", "log_asymptotics_vanishing_mean", log_asym_vanishing),
    ("mathx", "log_asymptotics_growing_mean", log_asym_growing),
    ("channel", "estimate_plus_error_additivity", additivity),
    ("channel", "norm_law_ks", norm_ks),
    ("channel", "log_array_min_order_one", min_order_one),
    ("channel", "log_squared_array_min_concentrates", min_concentrates),
    ("channel", "exact_min_mean_vs_sampler", exact_min_vs_sampler),
    ("caching", "load_large_user_limit", load_limit),
    ("caching", "centralized_below_decentralized", placement_order),
    ("caching", "multicast_rate_linearity", multicast_linearity),
    ("caching", "selection_rate_monotone_in_memory", selection_monotone),
    ("multicast", "rate_nonincreasing_in_users", nested_monotone),
    ("multicast", "small_array_power_over_users", small_array),
    ("multicast", "large_array_order_one", large_array),
    ("multicast", "parallel_subchannels_order_one", parallel_order_one),
    ("multicast", "parallel_bounds_sandwich", parallel_sandwich),
    ("selection", "threshold_stationarity", stationarity),
    ("selection", "selection_linear_scaling", selection_linear),
    ("selection", "selected_share", selected_share),
    (
        "selection",
        "general_threshold_matches_rayleigh",
        general_matches_rayleigh,
    ),
    ("multiplex", "zf_orthogonality", zf_orthogonality),
    ("multiplex", "signal_gain_gamma_ks", zf_gamma_ks),
    ("multiplex", "interference_unit_mean", zf_interference_mean),
    ("multiplex", "exact_vs_large_system", zf_exact_vs_asymptotic),
    ("multiplex", "unicast_linear_in_users", unicast_linear),
    ("mixed", "endpoint_reductions_bit_exact", mixed_reductions),
    ("mixed", "total_is_sum_of_flows", mixed_additivity),
    ("mixed", "private_share_falls_with_power", private_share_power),
    ("mixed", "private_share_falls_with_memory", private_share_memory),
    ("mixed", "mixing_dominates_pure_schemes", mixed_dominance),
    ("mixed", "closed_form_vs_numeric_split", closed_vs_numeric),
    ("experiments", "rows_regenerate_bit_identically", rerun_identity),
    ("experiments", "csv_schema_comment", schema_line),
];

/// Runs every check; the report is in check order.
pub fn run_property_suite(s: &Settings) -> Vec<CheckRow> {
    let ctx = Ctx {
        seed: s.seed,
        execution: s.execution,
    };
    CHECKS
        .iter()
        .map(|&(module, name, f)| {
            let mut row = f(&ctx)
                .unwrap_or_else(|e| CheckRow::verdict(false, f64::NAN, f64::NAN, f64::NAN, format!("error: {e}")));
            row.check = name.to_string();
            row.module = module.to_string();
            row
        })
        .collect()
}

pub fn all_passed(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.passed)
}

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

fn log_array(k: usize) -> usize {
    (k as f64).ln().ceil() as usize + 1
}

const KS: [usize; 3] = [100, 1000, 10_000];

/// Largest `max(r/r₀, r₀/r)` against the first entry.
fn band_factor(rates: &[f64]) -> f64 {
    rates
        .iter()
        .map(|r| (r / rates[0]).max(rates[0] / r))
        .fold(1.0, f64::max)
}

// ---------------------------------------------------------------------------
// mathx

fn lambert_round_trip(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for i in 0..=240 {
        let x = 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0);
        let w = lambert_w(x)?;
        worst = worst.max((w * w.exp() - x).abs() / (1.0 + x));
    }
    Ok(CheckRow::at_most(
        worst,
        1e-9,
        "max |W e^W − x|/(1+x), x in [1e-6, 1e6]",
    ))
}

fn gamma_cdf_bound(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for nt in 1..=64 {
        let n = nt as f64;
        worst = worst.max(reg_lower_gamma(n, 0.1586 * n)? / (-n).exp());
    }
    Ok(CheckRow::at_most(worst, 1.0, "max F(0.1586)/e^{-nt}, nt in 1..=64"))
}

fn gamma_complement(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for &a in &[0.05, 0.5, 1.0, 2.0, 7.5, 30.0, 100.0, 200.0] {
        for &x in &[0.0, 0.01, 0.3, 1.0, 4.0, 25.0, 90.0, 140.0, 400.0] {
            worst = worst.max((reg_lower_gamma(a, x)? + reg_upper_gamma(a, x)? - 1.0).abs());
        }
    }
    Ok(CheckRow::at_most(worst, 1e-12, "max |P + Q − 1|"))
}

fn maximize_concave(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for &c in &[-2.3, 0.7, 3.1] {
        for &a in &[0.5, 5.0] {
            let m = maximize_1d(|x| -a * (x - c) * (x - c) + 1.0, -5.0, 5.0, &MaximizeOptions::default());
            worst = worst.max((m.argmax - c).abs());
        }
    }
    Ok(CheckRow::at_most(worst, 1e-6, "max |argmax − c| on −a(x−c)² + 1"))
}

fn chernoff(ctx: &Ctx) -> Result<CheckRow> {
    // P[S ≤ x] ≤ (x/n)^n e^{n−x} for S a sum of n Exp(1), at the optimal ν
    let n = 8usize;
    let xs: Vec<f64> = (1..=20).map(|j| n as f64 * 0.05 * j as f64).collect();
    let cols = ctx.mc(100_000).run(
        &ctx.rng(0),
        xs.len(),
        || (),
        |_, r, out| {
            let s: f64 = (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).sum();
            for (o, &x) in out.iter_mut().zip(&xs) {
                *o = f64::from(s <= x);
            }
            Ok(())
        },
    )?;
    let nf = n as f64;
    let worst = xs
        .iter()
        .zip(&cols)
        .map(|(&x, c)| c.mean - (x / nf).powf(nf) * (nf - x).exp() - 3.0 * c.std_err)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckRow::at_most(
        worst,
        0.0,
        "max(empirical CDF − bound − 3se) on 20 points, n = 8",
    ))
}

fn markov_lower_bound(_: &Ctx) -> Result<CheckRow> {
    let (nt, k) = (2usize, 100usize);
    let mean = exact_min_mean(nt, k)?;
    let mut worst: f64 = 0.0;
    for i in 1..=40 {
        let x0 = 0.005 * i as f64;
        let f = reg_lower_gamma(nt as f64, nt as f64 * x0)?;
        worst = worst.max(x0 * (1.0 - f).powi(k as i32) / mean);
    }
    Ok(CheckRow::at_most(
        worst,
        1.0,
        "max x0(1−F(x0))^K / E[min], nt = 2, K = 100",
    ))
}

fn markov_quantile_ratio(ctx: &Ctx) -> Result<CheckRow> {
    let (nt, k) = (2usize, 10_000usize);
    let est = min_norm_statistic(nt, k, &ctx.rng(1), &ctx.mc(20_000))?;
    let mut worst = f64::INFINITY;
    for &c in &[0.5, 1.0, 2.0] {
        let q = gamma_p_inverse(nt as f64, c / k as f64)? / nt as f64;
        worst = worst.min((est.mean - 3.0 * est.std_err) / q * c.exp());
    }
    Ok(CheckRow::at_least(
        worst,
        1.0,
        "min (E[min] − 3se)/F⁻¹(c/K)·e^c, c in {0.5,1,2}, K = 1e4",
    ))
}

/// `E[ln(1+X_K)]` and `E[X_K]` for `X_K = scale(K)·Exp(1)`, on common draws.
fn scaled_exp_moments(ctx: &Ctx, tag: u64, scales: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let cols = ctx.mc(100_000).run(
        &ctx.rng(tag),
        2 * scales.len(),
        || (),
        |_, r, out| {
            let e = -(1.0 - r.random::<f64>()).ln();
            for (o, &a) in out.chunks_exact_mut(2).zip(scales) {
                o[0] = (a * e).ln_1p();
                o[1] = a * e;
            }
            Ok(())
        },
    )?;
    Ok(cols
        .chunks_exact(2)
        .zip(scales)
        .map(|(c, &a)| (a, c[0].mean, c[1].mean))
        .collect())
}

fn log_asym_constant(ctx: &Ctx) -> Result<CheckRow> {
    let scales: Vec<f64> = KS.iter().map(|&k| 2.0 + (k as f64).sin()).collect();
    let m = scaled_exp_moments(ctx, 2, &scales)?;
    let logs: Vec<f64> = m.iter().map(|t| t.1).collect();
    Ok(CheckRow::at_most(
        band_factor(&logs),
        3.0,
        "E[X] in [1,3] ⇒ E ln(1+X) within factor 3 across K",
    ))
}

fn log_asym_vanishing(ctx: &Ctx) -> Result<CheckRow> {
    let scales: Vec<f64> = KS.iter().map(|&k| 1.0 / k as f64).collect();
    let m = scaled_exp_moments(ctx, 3, &scales)?;
    let gaps: Vec<f64> = m.iter().map(|t| (t.1 / t.2 - 1.0).abs()).collect();
    let falling = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = gaps[gaps.len() - 1];
    Ok(CheckRow::verdict(
        falling && last <= 0.01,
        last,
        0.01,
        0.01 - last,
        format!("|E ln(1+X)/E X − 1| at K = 1e4, X = Exp/K; shrinking: {falling}"),
    ))
}

fn log_asym_growing(ctx: &Ctx) -> Result<CheckRow> {
    let scales: Vec<f64> = KS.iter().map(|&k| k as f64).collect();
    let m = scaled_exp_moments(ctx, 4, &scales)?;
    let worst = m
        .iter()
        .map(|&(g, l, _)| (l / g.ln_1p()).ln().abs())
        .fold(0.0, f64::max);
    Ok(CheckRow::at_most(
        worst,
        2f64.ln(),
        "max |ln(E ln(1+X)/ln(1+K))|, X = K·Exp",
    ))
}

// ---------------------------------------------------------------------------
// channel

fn additivity(ctx: &Ctx) -> Result<CheckRow> {
    let cfg = SystemConfig::new(8, 4, 1.0).with_subchannels(2).with_csit_error(0.3);
    let mut rng = ctx.rng(10);
    let mut bad = 0usize;
    for _ in 0..200 {
        let d = draw_channel(&cfg, &mut rng);
        for ((t, e), r) in d.true_h.iter().zip(&d.est_h).zip(&d.err_h) {
            bad += t
                .data()
                .iter()
                .zip(e.data())
                .zip(r.data())
                .filter(|((h, a), b)| **h != *a + *b)
                .count();
        }
    }
    Ok(CheckRow::at_most(
        bad as f64,
        0.0,
        "entries with H ≠ Ĥ + H̃ over 200 draws",
    ))
}

fn norm_ks(ctx: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for nt in [1usize, 3, 8] {
        let cfg = SystemConfig::new(1000, nt, 1.0).with_csit_error(0.3);
        let mut rng = ctx.rng(11 + nt as u64);
        let mut xs = Vec::with_capacity(100_000);
        let mut buf = vec![0.0; 1000];
        for _ in 0..100 {
            let d = draw_channel(&cfg, &mut rng);
            row_norms_sq(&d.true_h[0], &mut buf);
            xs.extend(buf.iter().map(|v| v / nt as f64));
        }
        let n = nt as f64;
        worst = worst.max(ks_distance(xs, |x| reg_lower_gamma(n, n * x).unwrap_or(f64::NAN)));
    }
    Ok(CheckRow::at_most(
        worst,
        0.01,
        "max KS of ‖H‖²/nt vs Gamma(nt, 1/nt), nt in {1,3,8}, 1e5 samples",
    ))
}

fn min_order_one(ctx: &Ctx) -> Result<CheckRow> {
    let mut lowest = f64::INFINITY;
    for k in KS {
        lowest = lowest.min(min_norm_statistic(log_array(k), k, &ctx.rng(20 + k as u64), &ctx.mc(20_000))?.mean);
    }
    Ok(CheckRow::at_least(
        lowest,
        0.1,
        "min over K of E[min ‖H‖²/nt], nt = ⌈ln K⌉+1",
    ))
}

fn min_concentrates(ctx: &Ctx) -> Result<CheckRow> {
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
        let cols = ctx.mc(20_000).run(
            &ctx.rng(30 + i as u64),
            2,
            || (),
            |_, r, out| {
                let v = sample_min_norm(nt, k, r)?;
                out[0] = f64::from((v - 1.0).abs() > 0.2);
                out[1] = (v - 1.0).abs();
                Ok(())
            },
        )?;
        miss.push(cols[0].mean);
        dev.push(cols[1].mean);
    }
    let monotone = miss.windows(2).all(|w| w[1] <= w[0]) && dev.windows(2).all(|w| w[1] < w[0]);
    let ratio = miss[ks.len() - 1] / miss[0];
    Ok(CheckRow::verdict(
        monotone && ratio <= 0.5,
        ratio,
        0.5,
        0.5 - ratio,
        format!(
            "Pr(|min−1| > 0.2) at K = 1e19 over K = 1e2, nt = ⌈ln²K⌉; monotone: {monotone}; probabilities {miss:.3?}"
        ),
    ))
}

fn exact_min_vs_sampler(ctx: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for (nt, k) in [(1usize, 7usize), (2, 10), (4, 30), (6, 40), (11, 20), (2, 200)] {
        debug_assert!(k * (nt - 1) <= EXACT_MIN_GUARD);
        let est = min_norm_statistic(nt, k, &ctx.rng(40 + (nt * 1000 + k) as u64), &ctx.mc(40_000))?;
        worst = worst.max((est.mean - exact_min_mean(nt, k)?).abs() / est.std_err);
    }
    Ok(CheckRow::at_most(
        worst,
        3.0,
        "max |z| of sampler mean vs exact, 6 (nt, K) cases",
    ))
}

// ---------------------------------------------------------------------------
// caching

fn load_limit(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for p in [Placement::Centralized, Placement::Decentralized] {
        for i in 0..18 {
            let m = 0.1 + 0.05 * i as f64;
            let limit = (1.0 - m) / m;
            worst = worst.max((transmissions(p, m, 1000) - limit).abs() / limit);
        }
    }
    Ok(CheckRow::at_most(
        worst,
        0.01,
        "max relative gap of T(m, 1000) to (1−m)/m, m in [0.1, 0.95]",
    ))
}

fn placement_order(_: &Ctx) -> Result<CheckRow> {
    let mut bad = 0usize;
    for i in 1..200 {
        let m = i as f64 / 200.0;
        for k in [2usize, 3, 10, 50, 400, 5000] {
            let c = transmissions(Placement::Centralized, m, k);
            let d = transmissions(Placement::Decentralized, m, k);
            bad += usize::from(c > d * (1.0 + 1e-12));
        }
    }
    Ok(CheckRow::at_most(
        bad as f64,
        0.0,
        "grid points with centralized T > decentralized T",
    ))
}

fn multicast_linearity(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for &r0 in &[0.1, 1.0, 7.3] {
        for &k in &[1usize, 10, 333] {
            for &load in &[0.05, 1.0, 40.0] {
                let base = delivery_rate_multicast(load, r0, k);
                for &a in &[0.5, 3.0] {
                    worst = worst.max((delivery_rate_multicast(load, a * r0, k) - a * base).abs() / (a * base));
                    // doubling K at doubled load leaves K/T alone
                    worst = worst.max((delivery_rate_multicast(load / a, r0, k) - a * base).abs() / (a * base));
                }
            }
        }
    }
    Ok(CheckRow::at_most(
        worst,
        1e-12,
        "max relative deviation from linearity in r0 and K/T",
    ))
}

fn selection_monotone(ctx: &Ctx) -> Result<CheckRow> {
    let rng = ctx.rng(50);
    let mc = ctx.mc(4000);
    let mut bad = 0usize;
    let mut last = 0.0;
    for i in 0..20 {
        let r = delivery_rate_selection(0.05 * i as f64, 20.0, 100.0, 200, &rng, &mc)?;
        bad += usize::from(r.mean <= last);
        last = r.mean;
    }
    Ok(CheckRow::at_most(
        bad as f64,
        0.0,
        "m steps where the selection rate did not grow, K = 200",
    ))
}

// ---------------------------------------------------------------------------
// multicast

fn nested_monotone(ctx: &Ctx) -> Result<CheckRow> {
    let ks = [1usize, 2, 5, 10, 20, 50, 100];
    let mut bad = 0usize;
    for nt in [1usize, 2, 4] {
        let est = avg_rate_quasistatic_nested(
            &SystemConfig::new(1, nt, 10.0),
            &ks,
            &ctx.rng(60 + nt as u64),
            &ctx.mc(2000),
        )?;
        bad += est.windows(2).filter(|w| w[1].mean > w[0].mean).count();
    }
    Ok(CheckRow::at_most(
        bad as f64,
        0.0,
        "increases of R̄₀ along nested user sets",
    ))
}

fn small_array(ctx: &Ctx) -> Result<CheckRow> {
    let p = 10.0;
    let mut worst: f64 = 0.0;
    for k in KS {
        let est = avg_rate_quasistatic(&SystemConfig::new(k, 1, p), &ctx.rng(70 + k as u64), &ctx.mc(4000))?;
        worst = worst.max((est.mean / (p / k as f64) - 1.0).abs());
    }
    Ok(CheckRow::at_most(worst, 0.2, "max |R̄₀/(P/K) − 1|, nt = 1, P = 10"))
}

fn large_array(ctx: &Ctx) -> Result<CheckRow> {
    let mut rates = Vec::new();
    for k in KS {
        let cfg = SystemConfig::new(k, log_array(k), 10.0);
        rates.push(avg_rate_quasistatic(&cfg, &ctx.rng(80 + k as u64), &ctx.mc(1000))?.mean);
    }
    Ok(CheckRow::at_most(
        band_factor(&rates),
        2.0,
        format!("band factor of R̄₀, nt = ⌈ln K⌉+1: {rates:.4?}"),
    ))
}

fn parallel_order_one(ctx: &Ctx) -> Result<CheckRow> {
    let mut rates = Vec::new();
    for k in KS {
        let cfg = SystemConfig::new(k, 1, 10.0).with_subchannels(log_array(k));
        rates.push(avg_rate_parallel(&cfg, &ctx.rng(90 + k as u64), &ctx.mc(1000))?.mean);
    }
    Ok(CheckRow::at_most(
        band_factor(&rates),
        2.0,
        format!("band factor of R̄₀, L = ⌈ln K⌉+1: {rates:.4?}"),
    ))
}

fn parallel_sandwich(ctx: &Ctx) -> Result<CheckRow> {
    let mut bad = 0usize;
    let mut i = 0;
    for k in [1usize, 10, 40] {
        for nt in [1usize, 3] {
            for l in [1usize, 4] {
                for p in [0.1, 10.0, 1000.0] {
                    let cfg = SystemConfig::new(k, nt, p).with_subchannels(l);
                    let b = parallel_rate_bounds(&cfg, &ctx.rng(100 + i), &ctx.mc(300))?;
                    i += 1;
                    let ok = b.lower.mean <= b.rate.mean && b.rate.mean <= b.upper.mean;
                    bad += usize::from(!ok || b.lower_gap.mean < 0.0 || b.upper_gap.mean < 0.0);
                }
            }
        }
    }
    Ok(CheckRow::at_most(
        bad as f64,
        0.0,
        "grid points violating lower ≤ R̄₀ ≤ upper",
    ))
}

// ---------------------------------------------------------------------------
// selection

fn stationarity(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for p in [10.0, 1e2, 1e3, 1e4] {
        worst = worst.max(threshold_stationarity_residual(p, optimal_threshold_rayleigh(p)?).abs());
    }
    Ok(CheckRow::at_most(
        worst,
        1e-6,
        "max |d/ds e^{−s/P} ln(1+s)| at s*, P in {10..1e4}",
    ))
}

fn selection_runs(ctx: &Ctx) -> Result<Vec<cachecast::caching::SelectionEstimate>> {
    let p = db_to_linear(30.0);
    let s = optimal_threshold_rayleigh(p)?;
    KS.iter()
        .enumerate()
        .map(|(i, &k)| {
            let cfg = SystemConfig::new(k, 1, p).with_cache(0.05, Placement::Decentralized);
            simulated_selection_rate(&cfg, s, &ctx.rng(120 + i as u64), &ctx.mc(20_000))
        })
        .collect()
}

fn selection_linear(ctx: &Ctx) -> Result<CheckRow> {
    let per_user: Vec<f64> = selection_runs(ctx)?
        .iter()
        .zip(KS)
        .map(|(e, k)| e.rate.mean / k as f64)
        .collect();
    let worst = per_user
        .iter()
        .map(|r| (r / per_user[0] - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(CheckRow::at_most(
        worst,
        0.1,
        format!("max relative spread of Rmc/K at s*, P = 30 dB: {per_user:.4?}"),
    ))
}

fn selected_share(ctx: &Ctx) -> Result<CheckRow> {
    let p = db_to_linear(30.0);
    let share = (1.0 / p - 1.0 / lambert_w(p)?).exp();
    let worst = selection_runs(ctx)?
        .iter()
        .map(|e| (e.selected_fraction.mean - share).abs() / e.selected_fraction.std_err)
        .fold(0.0, f64::max);
    Ok(CheckRow::at_most(worst, 3.0, "max |z| of K*(s*)/K vs e^{1/P − 1/W(P)}"))
}

fn general_matches_rayleigh(_: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for p in [0.5, 3.0, 10.0, 100.0, 1e3, 1e4] {
        let s = optimal_threshold_general(|x| -(-x / p).exp_m1(), |x| (-x / p).exp() / p, 0.0, 20.0 * p + 10.0)?;
        let r = optimal_threshold_rayleigh(p)?;
        worst = worst.max((s - r).abs() / r.max(1.0));
    }
    Ok(CheckRow::at_most(
        worst,
        1e-9,
        "max relative gap, exponential CDF vs Lambert form",
    ))
}

// ---------------------------------------------------------------------------
// multiplex

fn max_leak(est: &CMat, pre: &ZfPrecoder) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, w) in pre.columns.iter().enumerate() {
        for l in (0..est.rows()).filter(|&l| l != k) {
            let v: Complex64 = est.row(l).iter().zip(w).map(|(a, b)| a * b).sum();
            worst = worst.max(v.norm());
        }
    }
    worst
}

fn zf_orthogonality(ctx: &Ctx) -> Result<CheckRow> {
    let mut rng = ctx.rng(130);
    let mut worst: f64 = 0.0;
    for (k, nt) in [(2usize, 4usize), (8, 16), (32, 64)] {
        let cfg = SystemConfig::new(k, nt, 1.0).with_csit_error(0.2);
        for _ in 0..100 {
            let d = draw_channel(&cfg, &mut rng);
            let est = &d.est_h[0];
            let scale = est.max_row_norm();
            for pre in [build_zf_precoder(est)?, ZfPrecoder::pseudo_inverse(est)?] {
                worst = worst.max(max_leak(est, &pre) / scale);
            }
        }
    }
    Ok(CheckRow::at_most(
        worst,
        1e-10,
        "max |Ĥ_l w_k|/max‖Ĥ‖, 100 instances per size",
    ))
}

fn zf_gamma_ks(ctx: &Ctx) -> Result<CheckRow> {
    let (k, nt) = (8, 16);
    let n = (nt - k + 1) as f64;
    let cfg = SystemConfig::new(k, nt, 8.0);
    let xs: Vec<f64> = sinr_samples(&cfg, &mut ctx.rng(131), 10_000)?
        .iter()
        .map(|s| s.signal_gain / n)
        .collect();
    let ks = ks_distance(xs, |x| reg_lower_gamma(n, n * x).unwrap_or(f64::NAN));
    Ok(CheckRow::at_most(
        ks,
        0.02,
        "KS of |G|²/(nt−K+1) vs Gamma, σ² = 0, 1e4 samples",
    ))
}

fn zf_interference_mean(ctx: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for (k, nt, s2) in [(4usize, 8usize, 0.3), (16, 20, 0.05), (6, 6, 1.0)] {
        let cfg = SystemConfig::new(k, nt, 1.0).with_csit_error(s2);
        let xs: Vec<f64> = sinr_samples(&cfg, &mut ctx.rng(132 + k as u64), 10_000)?
            .iter()
            .map(|s| s.interference / ((k - 1) as f64 * s2))
            .collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        worst = worst.max((mean - 1.0).abs() / (var / n).sqrt());
    }
    Ok(CheckRow::at_most(worst, 3.0, "max |z| of normalized leakage mean vs 1"))
}

fn zf_exact_vs_asymptotic(ctx: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for k in [50usize, 100] {
        for s2 in [0.0, 0.1, 0.5] {
            let cfg = SystemConfig::new(k, 2 * k, k as f64).with_csit_error(s2);
            let exact = symmetric_rate_mc(&cfg, &ctx.rng(140 + k as u64), &ctx.mc(200))?;
            let asym = symmetric_rate_asymptotic(&cfg)?;
            worst = worst.max((exact.mean - asym.value).abs() / asym.value);
        }
    }
    Ok(CheckRow::at_most(
        worst,
        0.1,
        "max relative gap of R̄sym to the large-system form, nt = 2K, p = 1",
    ))
}

fn unicast_linear(ctx: &Ctx) -> Result<CheckRow> {
    let m = 0.1;
    let mut per_user = Vec::new();
    for k in [8usize, 16, 32, 64] {
        let cfg = SystemConfig::new(k, 2 * k, k as f64).with_csit_error(0.1);
        let r = symmetric_rate_mc(&cfg, &ctx.rng(150 + k as u64), &ctx.mc(300))?;
        per_user.push(cachecast::caching::delivery_rate_unicast(m, r.mean, k) / k as f64);
    }
    Ok(CheckRow::at_most(
        band_factor(&per_user),
        2.0,
        format!("band factor of Ruc/K, nt = 2K: {per_user:.4?}"),
    ))
}

// ---------------------------------------------------------------------------
// mixed

fn mixed_reductions(ctx: &Ctx) -> Result<CheckRow> {
    let mut bad = 0usize;
    for (i, (k, nt, p, s2)) in [
        (1usize, 1usize, 5.0, 0.0),
        (3, 4, 50.0, 0.2),
        (5, 5, 500.0, 1.0),
        (4, 7, 0.5, 0.6),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = SystemConfig::new(k, nt, p).with_csit_error(s2);
        let rng = ctx.rng(160 + i as u64);
        let mc = ctx.mc(97).with_shards(1 + i * 2);
        let common = mixed_rates_mc(&cfg, &PowerSplit::new(&cfg, p)?, &rng, &mc)?;
        let private = mixed_rates_mc(&cfg, &PowerSplit::new(&cfg, 0.0)?, &rng, &mc)?;
        bad += usize::from(common.common != avg_rate_quasistatic(&cfg, &rng, &mc)?);
        bad += usize::from(private.private != symmetric_rate_mc(&cfg, &rng, &mc)?);
        bad += usize::from(common.private.mean != 0.0 || private.common.mean != 0.0);
    }
    Ok(CheckRow::at_most(
        bad as f64,
        0.0,
        "mismatches at P₀ = P and P₀ = 0 on paired streams",
    ))
}

fn mixed_additivity(ctx: &Ctx) -> Result<CheckRow> {
    let mut worst: f64 = 0.0;
    for (i, &m) in [0.0, 0.05, 0.3, 0.9].iter().enumerate() {
        let cfg = SystemConfig::new(4, 5, 40.0)
            .with_csit_error(0.1)
            .with_cache(m, Placement::Centralized);
        let r = mixed_rates_mc(
            &cfg,
            &PowerSplit::from_fraction(&cfg, 0.4)?,
            &ctx.rng(170 + i as u64),
            &ctx.mc(200),
        )?;
        let kf = 4.0;
        let again = kf / transmissions(Placement::Centralized, m, 4) * r.common.mean + kf / (1.0 - m) * r.private.mean;
        worst = worst.max((r.total.mean - again).abs() / again.max(1.0));
    }
    Ok(CheckRow::at_most(
        worst,
        1e-12,
        "max relative gap of Rmix to its recomputed flows",
    ))
}

fn private_share_power(ctx: &Ctx) -> Result<CheckRow> {
    let base = SystemConfig::new(8, 10, 1.0)
        .with_csit_error(0.05)
        .with_cache(0.05, Placement::Centralized);
    let opts = split_search_options();
    let mut shares = Vec::new();
    for p in [10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4] {
        let cfg = base.with_power(p);
        let ens = MixedEnsemble::simulate(&cfg, &ctx.rng(180), &ctx.mc(400))?;
        shares.push(1.0 - ens.optimal_split(0.05, &opts)?.common_fraction());
    }
    let rise = shares.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckRow::at_most(
        rise,
        1e-9,
        format!("largest increase of (P−P₀*)/P along P: {shares:.4?}"),
    ))
}

/// `(Rmix, max(Rmc, Ruc), se)` per cache size.
type Dominance = (f64, f64, f64);

fn memory_sweep(ctx: &Ctx) -> Result<(Vec<f64>, Vec<Dominance>)> {
    let pk = db_to_linear(20.0);
    let k = 16;
    let cfg = SystemConfig::new(k, k, pk * k as f64).with_csit_error(1.0 / pk);
    let ens = MixedEnsemble::simulate(&cfg, &ctx.rng(190), &ctx.mc(300))?;
    let ms: Vec<f64> = (1..=50).map(|i| i as f64 * 0.01).collect();
    let opt = ens.optimal_splits(&ms, &split_search_options())?;
    let mut shares = Vec::new();
    let mut dominance = Vec::new();
    for (o, &m) in opt.iter().zip(&ms) {
        shares.push(1.0 - o.common_fraction());
        let mc = ens.rates(cfg.total_power, m)?.total.mean;
        let uc = ens.rates(0.0, m)?.total.mean;
        dominance.push((o.rates.total.mean, mc.max(uc), o.rates.total.std_err));
    }
    Ok((shares, dominance))
}

fn private_share_memory(ctx: &Ctx) -> Result<CheckRow> {
    let (shares, _) = memory_sweep(ctx)?;
    let rise = shares.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckRow::at_most(
        rise,
        0.0,
        "largest increase of (P−P₀*)/P along m, nt = K = 16, P/K = 20 dB",
    ))
}

fn mixed_dominance(ctx: &Ctx) -> Result<CheckRow> {
    let (_, dom) = memory_sweep(ctx)?;
    let worst = dom
        .iter()
        .map(|&(mix, best, se)| (mix - best + 3.0 * se) / se.max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    Ok(CheckRow::at_least(
        worst,
        0.0,
        "min (Rmix − max(Rmc, Ruc) + 3se)/se over m in 0.01..0.5",
    ))
}

fn closed_vs_numeric(_: &Ctx) -> Result<CheckRow> {
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
            let cf = optimal_split_closed_form(&cfg)?;
            if cf.boundary == SplitBoundary::Interior {
                interior += 1;
                worst = worst.max((cf.p0 - optimal_split_simplified(&cfg, &opts)?.p0).abs() / p);
            }
        }
    }
    Ok(CheckRow::verdict(
        interior > 0 && worst <= 0.02,
        worst,
        0.02,
        0.02 - worst,
        format!("max |P₀ closed − P₀ numeric|/P over {interior} interior points of a 5×5 grid"),
    ))
}

// ---------------------------------------------------------------------------
// experiments

fn rerun_identity(ctx: &Ctx) -> Result<CheckRow> {
    let s = Settings {
        seed: ctx.seed,
        ..Settings::default()
    }
    .with_samples(50);
    let fig = Fig1Config {
        users: vec![10, 30],
        power_db: vec![20.0],
        ..Fig1Config::default()
    };
    let sweep = SweepConfig {
        schemes: vec![Scheme::Multicast, Scheme::Multiplex, Scheme::Mixed],
        users: vec![3],
        antennas: vec![4],
        power_db: Grid::List(vec![10.0]),
        sigma2: Grid::List(vec![0.1]),
        grid_points: 21,
        ..SweepConfig::default()
    };
    let mut bad = 0;
    let seq = s.with_execution(Execution::Sequential);
    let a = run_fig1(&fig, &s)?;
    bad += usize::from(a != run_fig1(&fig, &s)? || a != run_fig1(&fig, &seq)?);
    let b = run_sweep(&sweep, &s)?;
    bad += usize::from(b != run_sweep(&sweep, &s)? || b != run_sweep(&sweep, &seq)?);
    Ok(CheckRow::at_most(
        bad as f64,
        0.0,
        "row sets differing across reruns and execution modes",
    ))
}

fn schema_line(_: &Ctx) -> Result<CheckRow> {
    let mut buf = Vec::new();
    crate::output::write_rows(&mut buf, Format::Csv, &[])?;
    let text = String::from_utf8_lossy(&buf);
    let ok = text
        .lines()
        .next()
        .is_some_and(|l| l.starts_with(&format!("# schema={}", crate::output::ROW_SCHEMA)));
    Ok(CheckRow::verdict(
        ok,
        f64::from(u8::from(ok)),
        1.0,
        f64::from(u8::from(ok)) - 1.0,
        "first CSV line names the schema",
    ))
}
