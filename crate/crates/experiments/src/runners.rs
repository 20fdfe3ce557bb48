//! Figure presets, the generic sweep and the single-point queries.
//!
//! Every runner enumerates its grid points in a fixed order and gives point
//! `i` the stream `RngStream::new(seed, tag).substream(i)`, recorded in the
//! row flags as `stream=tag/i`. Points are fanned out with the configured
//! [`Execution`](cachecast::Execution); rows come back sorted.

use cachecast::caching::{delivery_rate_unicast, transmissions};
use cachecast::mathx::{lambert_w, MaximizeOptions};
use cachecast::mixed::{
    optimal_split_closed_form, optimal_split_numeric, optimal_split_simplified, regime_map, split_search_options,
    RegimeGrid, RegimePoint, SplitBoundary,
};
use cachecast::multicast::{asymptotic_rate, avg_rate_parallel, avg_rate_quasistatic};
use cachecast::multiplex::{symmetric_rate_asymptotic, symmetric_rate_mc};
use cachecast::selection::{
    empirical_optimal_threshold, optimal_threshold_rayleigh, simulated_selection_rate, GammaSnr,
};
use cachecast::{
    db_to_linear, linear_to_db, Error, MonteCarlo, Placement, RateEstimate, Result, RngStream, SystemConfig,
};

use crate::config::{
    DimRule, Fig1Config, Fig2Config, Grid, MixedFigConfig, Scheme, Settings, SplitConfig, SweepConfig, ThresholdConfig,
};
use crate::output::{sort_rows, Flags, Row};

pub const FIG1_SAMPLES: usize = 2000;
pub const FIG2_SAMPLES: usize = 100_000;
pub const MIXED_SAMPLES: usize = 400;
pub const SWEEP_SAMPLES: usize = 2000;
pub const THRESHOLD_SAMPLES: usize = 100_000;

/// Stream tags, one per subcommand.
pub mod tags {
    pub const FIG1: u64 = 1;
    pub const FIG2: u64 = 2;
    pub const FIG3: u64 = 3;
    pub const FIG4: u64 = 4;
    pub const FIG5: u64 = 5;
    pub const SWEEP: u64 = 6;
    pub const THRESHOLD: u64 = 7;
    pub const SPLIT: u64 = 8;
}

fn stream_flag(tag: u64, i: usize) -> Flags {
    Flags::new().set("stream", format!("{tag}/{i}"))
}

fn bit(b: bool) -> u8 {
    u8::from(b)
}

/// Stamps the master seed (estimates carry their substream's) and sorts.
fn finish(rows: &mut [Row], seed: u64) {
    for r in rows.iter_mut() {
        r.seed = seed;
    }
    sort_rows(rows);
}

/// Runs `point` over every element of `points` and flattens, sorted.
fn fan_out<T, F>(s: &Settings, points: &[T], point: F) -> Result<Vec<Row>>
where
    T: Sync,
    F: Fn(usize, &T) -> Result<Vec<Row>> + Sync + Send,
{
    let mut rows = Vec::new();
    for r in s.execution.map(points, point) {
        rows.extend(r?);
    }
    finish(&mut rows, s.seed);
    Ok(rows)
}

fn check_users(users: &[usize]) -> Result<()> {
    if users.is_empty() || users.contains(&0) {
        return Err(Error::Config("user grid must be non-empty and >= 1".into()));
    }
    Ok(())
}

fn check_cache(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::Config(format!("cache fraction {m} outside [0, 1]")));
    }
    Ok(())
}

/// `R̄₀`: quasi-static for `L = 1`, L-parallel otherwise.
fn link_r0(cfg: &SystemConfig, rng: &RngStream, mc: &MonteCarlo) -> Result<RateEstimate> {
    if cfg.num_subchannels == 1 {
        avg_rate_quasistatic(cfg, rng, mc)
    } else {
        avg_rate_parallel(cfg, rng, mc)
    }
}

/// `K·R̄₀/T` with its error; infinite at `m = 1`.
fn multicast_delivery(cfg: &SystemConfig, r0: RateEstimate) -> RateEstimate {
    let k = cfg.num_users;
    let t = transmissions(cfg.placement, cfg.cache_fraction, k);
    if t > 0.0 {
        r0.scaled(k as f64 / t)
    } else {
        RateEstimate {
            mean: if r0.mean > 0.0 { f64::INFINITY } else { 0.0 },
            std_err: 0.0,
            ..r0
        }
    }
}

/// `K·R̄sym/(1−m)` with its error; infinite at `m = 1`.
fn unicast_delivery(cfg: &SystemConfig, rsym: RateEstimate) -> RateEstimate {
    let m = cfg.cache_fraction;
    let k = cfg.num_users;
    if m < 1.0 {
        rsym.scaled(k as f64 / (1.0 - m))
    } else {
        RateEstimate {
            mean: delivery_rate_unicast(m, rsym.mean, k),
            std_err: 0.0,
            ..rsym
        }
    }
}

// ---------------------------------------------------------------------------
// fig1: multicast delivery rate versus K

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig1Scheme {
    /// `nt = 1`, all users.
    NoScheduling,
    /// `nt = 1`, threshold selection at `s*`.
    Selection,
    /// `nt = ⌊ln K⌋`
    LogAntennas,
    /// `nt = 1` over `L = ⌊ln K⌋` sub-channels.
    LogSubchannels,
}

impl Fig1Scheme {
    pub const ALL: [Fig1Scheme; 4] = [
        Fig1Scheme::NoScheduling,
        Fig1Scheme::Selection,
        Fig1Scheme::LogAntennas,
        Fig1Scheme::LogSubchannels,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Fig1Scheme::NoScheduling => "no_scheduling",
            Fig1Scheme::Selection => "selection",
            Fig1Scheme::LogAntennas => "log_antennas",
            Fig1Scheme::LogSubchannels => "log_subchannels",
        }
    }
}

pub fn run_fig1(c: &Fig1Config, s: &Settings) -> Result<Vec<Row>> {
    check_users(&c.users)?;
    check_cache(c.m)?;
    let mc = s.monte_carlo(s.samples_for(c.samples, FIG1_SAMPLES))?;
    let mut points = Vec::new();
    for &p_db in &c.power_db {
        for &k in &c.users {
            for scheme in Fig1Scheme::ALL {
                points.push((scheme, k, p_db));
            }
        }
    }
    let root = RngStream::new(s.seed, tags::FIG1);
    fan_out(s, &points, |i, &(scheme, k, p_db)| {
        let p = db_to_linear(p_db);
        let rng = root.substream(i as u64);
        let flags = stream_flag(tags::FIG1, i);
        let log_k = DimRule::FloorLnK.apply(k);
        let base = SystemConfig::new(k, 1, p).with_cache(c.m, c.placement);
        let row = match scheme {
            Fig1Scheme::Selection => {
                let cfg = base.with_cache(c.m, Placement::Decentralized);
                let th = optimal_threshold_rayleigh(p)?;
                let est = simulated_selection_rate(&cfg, th, &rng, &mc)?;
                let flags = flags
                    .set("placement", cfg.placement)
                    .set("threshold", th)
                    .set("selected_fraction", est.selected_fraction.mean);
                Row::estimate(scheme.id(), &cfg, &est.rate, flags)
            }
            _ => {
                let cfg = match scheme {
                    Fig1Scheme::LogAntennas => base.with_antennas(log_k),
                    Fig1Scheme::LogSubchannels => base.with_subchannels(log_k),
                    _ => base,
                };
                let r0 = link_r0(&cfg, &rng, &mc)?;
                let flags = flags.set("placement", cfg.placement).set("r0", r0.mean);
                Row::estimate(scheme.id(), &cfg, &multicast_delivery(&cfg, r0), flags)
            }
        };
        Ok(vec![row])
    })
}

// ---------------------------------------------------------------------------
// fig2: optimal selection threshold, simulated and closed form

fn threshold_search_options(grid_points: usize) -> MaximizeOptions {
    MaximizeOptions {
        grid_points,
        ..MaximizeOptions::default()
    }
}

/// `d/ds [e^{−s/P} ln(1+s)]` by central differences.
pub fn threshold_stationarity_residual(p: f64, s: f64) -> f64 {
    let f = |x: f64| (-x / p).exp() * x.ln_1p();
    let h = 1e-4 * s.max(1e-2);
    (f(s + h) - f(s - h)) / (2.0 * h)
}

/// Rows `threshold_empirical` (argmax of the simulated rate, no error bar)
/// and `threshold_closed_form` for one `(K, P)`.
fn threshold_rows(
    k: usize,
    p: f64,
    m: f64,
    grid_points: usize,
    rng: &RngStream,
    mc: &MonteCarlo,
    flags: Flags,
) -> Result<Vec<Row>> {
    let cfg = SystemConfig::new(k, 1, p).with_cache(m, Placement::Decentralized);
    let closed = optimal_threshold_rayleigh(p)?;
    let found = empirical_optimal_threshold(&cfg, rng, mc, 0.0, p.max(1.0), &threshold_search_options(grid_points))?;
    let flags = flags.set("unit", "snr").set("placement", cfg.placement);
    let mut empirical = Row::exact(
        "threshold_empirical",
        &cfg,
        found.s,
        rng.seed(),
        flags
            .clone()
            .set("shards", mc.shards)
            .set("boundary", bit(found.boundary))
            .set("rate", found.rate)
            .set("rel_gap", (found.s - closed).abs() / closed),
    );
    empirical.std_err = None;
    empirical.samples = mc.samples;
    let exact = Row::exact(
        "threshold_closed_form",
        &cfg,
        closed,
        rng.seed(),
        flags
            .set("residual", threshold_stationarity_residual(p, closed))
            .set("selected_share", (1.0 / p - 1.0 / lambert_w(p)?).exp()),
    );
    Ok(vec![empirical, exact])
}

pub fn run_fig2(c: &Fig2Config, s: &Settings) -> Result<Vec<Row>> {
    check_users(&c.users)?;
    check_cache(c.m)?;
    let mc = s.monte_carlo(s.samples_for(c.samples, FIG2_SAMPLES))?;
    let points: Vec<(usize, f64)> = c
        .power_db
        .iter()
        .flat_map(|&p| c.users.iter().map(move |&k| (k, p)))
        .collect();
    let root = RngStream::new(s.seed, tags::FIG2);
    fan_out(s, &points, |i, &(k, p_db)| {
        threshold_rows(
            k,
            db_to_linear(p_db),
            c.m,
            c.grid_points,
            &root.substream(i as u64),
            &mc,
            stream_flag(tags::FIG2, i),
        )
    })
}

pub fn run_threshold(c: &ThresholdConfig, s: &Settings) -> Result<Vec<Row>> {
    check_users(&[c.users])?;
    check_cache(c.m)?;
    let mc = s.monte_carlo(s.samples_for(c.samples, THRESHOLD_SAMPLES))?;
    let root = RngStream::new(s.seed, tags::THRESHOLD);
    fan_out(s, &c.power_db, |i, &p_db| {
        threshold_rows(
            c.users,
            db_to_linear(p_db),
            c.m,
            c.grid_points,
            &root.substream(i as u64),
            &mc,
            stream_flag(tags::THRESHOLD, i),
        )
    })
}

// ---------------------------------------------------------------------------
// fig3 to fig5: mixed delivery at nt = K

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MixedView {
    Rates,
    Split,
    Regime,
}

fn mixed_grid(c: &MixedFigConfig, preset_pk_db: Grid, preset_m: Grid) -> Result<(RegimeGrid, Vec<f64>)> {
    check_users(&[c.users])?;
    let nt = c.antennas.unwrap_or(c.users);
    let pk_db = c.per_user_power_db.clone().unwrap_or(preset_pk_db).values()?;
    let ms = c.m.clone().unwrap_or(preset_m).values()?;
    for &m in &ms {
        check_cache(m)?;
    }
    let base = SystemConfig::new(c.users, nt, 0.0)
        .with_cache(0.0, c.placement)
        .with_csit_error(c.sigma2.unwrap_or(0.0));
    base.validate()?;
    let grid = RegimeGrid {
        base,
        per_user_powers: pk_db.iter().map(|&d| db_to_linear(d)).collect(),
        cache_fractions: ms,
        csit: c.csit(),
    };
    Ok((grid, pk_db))
}

fn mixed_rows(
    view: MixedView,
    tag: u64,
    c: &MixedFigConfig,
    preset_pk_db: Grid,
    preset_m: Grid,
    s: &Settings,
) -> Result<Vec<Row>> {
    let (grid, pk_db) = mixed_grid(c, preset_pk_db, preset_m)?;
    let mc = s.monte_carlo(s.samples_for(c.samples, MIXED_SAMPLES))?;
    let opts = MaximizeOptions {
        grid_points: c.grid_points,
        ..split_search_options()
    };
    let points = regime_map(&grid, &RngStream::new(s.seed, tag), &mc, &opts)?;
    let per_power = grid.cache_fractions.len();
    let mut rows = Vec::with_capacity(points.len() * 3);
    for (j, pt) in points.iter().enumerate() {
        let i = j / per_power;
        let cfg = grid.config_at(pt.per_user_power).with_cache(pt.m, c.placement);
        let flags = stream_flag(tag, i)
            .set("placement", c.placement)
            .set("P_per_user_dB", pk_db[i])
            .set("extrapolated", bit(cfg.num_tx_antennas == cfg.num_users))
            .set("grid_points", c.grid_points);
        let mixed = |flags: Flags| {
            Row::estimate(
                "mixed",
                &cfg,
                &pt.optimum.rates.total,
                flags.set("boundary", boundary_id(pt.optimum.boundary)),
            )
            .with_p0_frac(pt.optimum.common_fraction())
        };
        match view {
            MixedView::Rates => {
                rows.push(Row::estimate("multicast", &cfg, &pt.multicast, flags.clone()).with_p0_frac(1.0));
                rows.push(Row::estimate("multiplex", &cfg, &pt.unicast, flags.clone()).with_p0_frac(0.0));
                rows.push(mixed(flags));
            }
            MixedView::Split => rows.push(mixed(flags)),
            MixedView::Regime => {
                let flags = flags
                    .set("multicast_preferable", bit(pt.multicast_preferable))
                    .set("multicast_optimal", bit(pt.multicast_optimal));
                let mut r = mixed(flags);
                r.scheme = "regime".into();
                rows.push(r);
            }
        }
    }
    if view == MixedView::Regime {
        rows.extend(frontier_rows(&points, &rows));
    }
    finish(&mut rows, s.seed);
    Ok(rows)
}

fn boundary_id(b: SplitBoundary) -> &'static str {
    match b {
        SplitBoundary::Interior => "interior",
        SplitBoundary::AllPrivate => "all_private",
        SplitBoundary::AllCommon => "all_common",
    }
}

/// Per `P/K`, the smallest grid `m` where multicasting is preferable and
/// where it is optimal.
fn frontier_rows(points: &[RegimePoint], regime: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    for (name, pick) in [
        (
            "preferable_frontier",
            (|p: &RegimePoint| p.multicast_preferable) as fn(&RegimePoint) -> bool,
        ),
        ("optimal_frontier", |p: &RegimePoint| p.multicast_optimal),
    ] {
        let mut seen = Vec::new();
        for (pt, row) in points.iter().zip(regime) {
            if pick(pt) && !seen.contains(&pt.per_user_power.to_bits()) {
                seen.push(pt.per_user_power.to_bits());
                let mut r = row.clone();
                r.scheme = name.into();
                out.push(r);
            }
        }
    }
    out
}

pub fn fig3_presets() -> (Grid, Grid) {
    (Grid::List(vec![10.0, 20.0]), Grid::range(0.0, 0.5, 0.01))
}

pub fn fig4_presets() -> (Grid, Grid) {
    (Grid::List(vec![10.0, 20.0, 30.0]), Grid::range(0.0, 0.6, 0.0025))
}

pub fn fig5_presets() -> (Grid, Grid) {
    (Grid::range(0.0, 30.0, 2.5), Grid::range(0.0, 0.6, 0.005))
}

/// Delivery rates of the three schemes over `m`.
pub fn run_fig3(c: &MixedFigConfig, s: &Settings) -> Result<Vec<Row>> {
    let (pk, m) = fig3_presets();
    mixed_rows(MixedView::Rates, tags::FIG3, c, pk, m, s)
}

/// Optimal common power fraction over `m`.
pub fn run_fig4(c: &MixedFigConfig, s: &Settings) -> Result<Vec<Row>> {
    let (pk, m) = fig4_presets();
    mixed_rows(MixedView::Split, tags::FIG4, c, pk, m, s)
}

/// Where multicasting is preferable to and optimal over multiplexing.
pub fn run_fig5(c: &MixedFigConfig, s: &Settings) -> Result<Vec<Row>> {
    let (pk, m) = fig5_presets();
    mixed_rows(MixedView::Regime, tags::FIG5, c, pk, m, s)
}

/// Per total power (dB), the smallest `m` whose `mixed` row has all power
/// on the common stream.
pub fn first_saturation(rows: &[Row]) -> Vec<(f64, Option<f64>)> {
    let mut out: Vec<(f64, Option<f64>)> = Vec::new();
    for r in rows.iter().filter(|r| r.scheme == "mixed") {
        let idx = match out.iter().position(|(p, _)| *p == r.p_db) {
            Some(i) => i,
            None => {
                out.push((r.p_db, None));
                out.len() - 1
            }
        };
        if r.p0_frac == Some(1.0) {
            let slot = &mut out[idx].1;
            *slot = Some(slot.map_or(r.m, |m: f64| m.min(r.m)));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

// ---------------------------------------------------------------------------
// Generic sweep

#[derive(Debug, Clone, Copy)]
struct SweepPoint {
    scheme: Scheme,
    cfg: SystemConfig,
}

fn sweep_points(c: &SweepConfig) -> Result<Vec<SweepPoint>> {
    check_users(&c.users)?;
    if c.schemes.is_empty() {
        return Err(Error::Config("sweep needs at least one scheme".into()));
    }
    let powers = c.power_db.values()?;
    let ms = c.m.values()?;
    let s2s = c.sigma2.values()?;
    let mut out = Vec::new();
    for &scheme in &c.schemes {
        for &k in &c.users {
            let nts = match c.antenna_rule {
                Some(r) => vec![r.apply(k)],
                None => c.antennas.clone(),
            };
            let ls = match c.subchannel_rule {
                Some(r) => vec![r.apply(k)],
                None => c.subchannels.clone(),
            };
            for &nt in &nts {
                for &l in &ls {
                    for &p_db in &powers {
                        for &m in &ms {
                            for &s2 in &s2s {
                                let p = db_to_linear(p_db);
                                let s2 = match c.sigma2_rule {
                                    cachecast::mixed::CsitRule::Fixed => s2,
                                    cachecast::mixed::CsitRule::InversePerUserPower => (k as f64 / p).min(1.0),
                                };
                                let cfg = SystemConfig::new(k, nt, p)
                                    .with_subchannels(l)
                                    .with_cache(m, c.placement)
                                    .with_csit_error(s2);
                                cfg.validate()?;
                                out.push(SweepPoint { scheme, cfg });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn run_sweep(c: &SweepConfig, s: &Settings) -> Result<Vec<Row>> {
    let points = sweep_points(c)?;
    let mc = s.monte_carlo(s.samples_for(c.samples, SWEEP_SAMPLES))?;
    let opts = MaximizeOptions {
        grid_points: c.grid_points,
        ..split_search_options()
    };
    let root = RngStream::new(s.seed, tags::SWEEP);
    fan_out(s, &points, |i, pt| {
        let rng = root.substream(i as u64);
        let cfg = &pt.cfg;
        let id = pt.scheme.id();
        let flags = stream_flag(tags::SWEEP, i).set("placement", cfg.placement);
        let row = match pt.scheme {
            Scheme::Multicast => Row::estimate(id, cfg, &multicast_delivery(cfg, link_r0(cfg, &rng, &mc)?), flags),
            Scheme::R0 => Row::estimate(id, cfg, &link_r0(cfg, &rng, &mc)?, flags),
            Scheme::Selection => {
                let cfg = cfg.with_cache(cfg.cache_fraction, Placement::Decentralized);
                let th = GammaSnr {
                    nt: cfg.num_tx_antennas,
                    p: cfg.total_power,
                }
                .optimal_threshold()?;
                let est = simulated_selection_rate(&cfg, th, &rng, &mc)?;
                let flags = flags
                    .set("placement", cfg.placement)
                    .set("threshold", th)
                    .set("selected_fraction", est.selected_fraction.mean);
                Row::estimate(id, &cfg, &est.rate, flags)
            }
            Scheme::Multiplex => Row::estimate(
                id,
                cfg,
                &unicast_delivery(cfg, symmetric_rate_mc(cfg, &rng, &mc)?),
                flags,
            ),
            Scheme::Rsym => Row::estimate(id, cfg, &symmetric_rate_mc(cfg, &rng, &mc)?, flags),
            Scheme::Mixed => {
                let o = optimal_split_numeric(cfg, &rng, &mc, &opts)?;
                let flags = flags
                    .set("boundary", boundary_id(o.boundary))
                    .set("extrapolated", bit(o.rates.extrapolated));
                Row::estimate(id, cfg, &o.rates.total, flags).with_p0_frac(o.common_fraction())
            }
            Scheme::R0Asymptotic => {
                let a = asymptotic_rate(cfg);
                let flags = flags
                    .set("array", format!("{:?}", a.params.regime).to_lowercase())
                    .set("power", format!("{:?}", a.params.power_regime).to_lowercase());
                Row::exact(id, cfg, a.value, s.seed, flags)
            }
            Scheme::RsymAsymptotic => {
                let a = symmetric_rate_asymptotic(cfg)?;
                let flags = flags
                    .set("case", format!("{:?}", a.case).to_lowercase())
                    .set("extrapolated", bit(a.extrapolated));
                Row::exact(id, cfg, a.value, s.seed, flags)
            }
        };
        Ok(vec![row])
    })
}

// ---------------------------------------------------------------------------
// Single split query

fn split_system(c: &SplitConfig) -> Result<SystemConfig> {
    check_users(&[c.users])?;
    let p = db_to_linear(c.power_db);
    let s2 = c.sigma2.unwrap_or_else(|| (c.users as f64 / p).min(1.0));
    let cfg = SystemConfig::new(c.users, c.antennas.unwrap_or(c.users), p)
        .with_cache(c.m, c.placement)
        .with_csit_error(s2);
    cfg.validate()?;
    Ok(cfg)
}

fn sanitize(msg: &str) -> String {
    msg.replace([';', '=', ','], " ")
}

/// `P₀*` by Monte Carlo, and on the simplified objective numerically and in
/// closed form.
pub fn run_split(c: &SplitConfig, s: &Settings) -> Result<Vec<Row>> {
    let cfg = split_system(c)?;
    let mc = s.monte_carlo(s.samples_for(c.samples, MIXED_SAMPLES))?;
    let opts = MaximizeOptions {
        grid_points: c.grid_points,
        ..split_search_options()
    };
    let rng = RngStream::new(s.seed, tags::SPLIT).substream(0);
    let flags = stream_flag(tags::SPLIT, 0)
        .set("placement", cfg.placement)
        .set("extrapolated", bit(cfg.num_tx_antennas == cfg.num_users));
    let pt = cfg.total_power;
    let frac = |p0: f64| if pt > 0.0 { p0 / pt } else { 1.0 };
    let mut rows = Vec::new();

    let o = optimal_split_numeric(&cfg, &rng, &mc, &opts)?;
    let mc_flags = flags
        .clone()
        .set("boundary", boundary_id(o.boundary))
        .set("common_nats", o.rates.common.mean)
        .set("private_nats", o.rates.private.mean);
    rows.push(Row::estimate("split_mc", &cfg, &o.rates.total, mc_flags).with_p0_frac(o.common_fraction()));

    let simple = optimal_split_simplified(&cfg, &opts)?;
    rows.push(
        Row::exact(
            "split_simplified",
            &cfg,
            simple.rate,
            s.seed,
            flags.clone().set("boundary", boundary_id(simple.boundary)),
        )
        .with_p0_frac(frac(simple.p0)),
    );
    rows.push(match optimal_split_closed_form(&cfg) {
        Ok(cf) => Row::exact(
            "split_closed_form",
            &cfg,
            cf.rate,
            s.seed,
            flags.set("boundary", boundary_id(cf.boundary)),
        )
        .with_p0_frac(frac(cf.p0)),
        Err(e) => Row::exact(
            "split_closed_form",
            &cfg,
            f64::NAN,
            s.seed,
            flags.set("error", sanitize(&e.to_string())),
        ),
    });
    finish(&mut rows, s.seed);
    Ok(rows)
}

/// Total power in dB for a per-user power in dB and `K` users.
pub fn total_power_db(per_user_db: f64, k: usize) -> f64 {
    linear_to_db(db_to_linear(per_user_db) * k as f64)
}
