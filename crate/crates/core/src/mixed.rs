//! A common multicast stream superposed on zero-forcing private streams.
//!
//! The base station spends `P₀` on a coded-multicast stream sent
//! isotropically over all antennas and splits `P − P₀` evenly over `K` ZF
//! streams. Receivers decode the common message first, treating the private
//! streams as noise, then decode their own stream. The two flows carry
//! independent demands, so the delivery rate is
//! `Rmix = (K/T)·R̄₀mix + (K/(1−m))·R̄symmix`.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::caching::transmissions;
use crate::channel::SystemConfig;
use crate::estimate::{Moments, MonteCarlo, RateEstimate};
use crate::mathx::{maximize_1d, maximize_prescanned, MaximizeOptions, Maximum, ToleranceSpec};
use crate::multiplex::{user_mean_rate, ZfSampler};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Grid density used by the split optimizers unless told otherwise.
pub const SPLIT_GRID_POINTS: usize = 401;

/// [`MaximizeOptions`] with [`SPLIT_GRID_POINTS`] grid points.
pub fn split_search_options() -> MaximizeOptions {
    MaximizeOptions {
        grid_points: SPLIT_GRID_POINTS,
        ..MaximizeOptions::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub total_power: f64,
    /// `P₀`
    pub common_power: f64,
    /// `(P − P₀)/K`
    pub private_per_user: f64,
    /// `((nt−K+1)(1−σ²) + (K−1)σ²)/K`
    pub ic: f64,
    /// `(K−1)σ²/K`
    pub ip: f64,
}

impl PowerSplit {
    pub fn new(cfg: &SystemConfig, common_power: f64) -> Result<Self> {
        let (ic, ip) = interference_consts(cfg)?;
        let p = cfg.total_power;
        if !(0.0..=p).contains(&common_power) {
            return Err(Error::Range(format!("common power {common_power} outside [0, {p}]")));
        }
        Ok(Self {
            total_power: p,
            common_power,
            private_per_user: (p - common_power) / cfg.num_users as f64,
            ic,
            ip,
        })
    }

    /// Split giving the fraction `frac` of the total power to the common stream.
    pub fn from_fraction(cfg: &SystemConfig, frac: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&frac) {
            return Err(Error::Range(format!("common power fraction {frac} outside [0, 1]")));
        }
        Self::new(cfg, frac * cfg.total_power)
    }

    pub fn common_fraction(&self) -> f64 {
        if self.total_power > 0.0 {
            self.common_power / self.total_power
        } else {
            1.0
        }
    }
}

fn interference_consts(cfg: &SystemConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (k, nt) = (cfg.num_users, cfg.num_tx_antennas);
    if nt < k {
        return Err(Error::config(format!(
            "mixed delivery needs nt >= K, got nt = {nt} < K = {k}"
        )));
    }
    let kf = k as f64;
    let s2 = cfg.csit_error_var;
    let ip = (kf - 1.0) * s2 / kf;
    let ic = ((nt - k + 1) as f64 * (1.0 - s2) + (kf - 1.0) * s2) / kf;
    Ok((ic, ip))
}

fn check_split(cfg: &SystemConfig, split: &PowerSplit) -> Result<()> {
    if split.total_power != cfg.total_power {
        return Err(Error::config(format!(
            "power split built for P = {}, config has P = {}",
            split.total_power, cfg.total_power
        )));
    }
    Ok(())
}

/// Weights `(K/T, K/(1−m))` of the two flows.
pub fn flow_weights(cfg: &SystemConfig) -> (f64, f64) {
    let kf = cfg.num_users as f64;
    let m = cfg.cache_fraction;
    let t = transmissions(cfg.placement, m, cfg.num_users);
    let common = if t > 0.0 { kf / t } else { f64::INFINITY };
    let private = if m < 1.0 { kf / (1.0 - m) } else { f64::INFINITY };
    (common, private)
}

/// A zero flow contributes nothing, even at infinite weight.
fn weigh(w: f64, r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        w * r
    }
}

/// `Rmix` from the two flow rates.
pub fn aggregate_rate(cfg: &SystemConfig, common: f64, private: f64) -> f64 {
    let (a, b) = flow_weights(cfg);
    weigh(a, common) + weigh(b, private)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedRates {
    /// `R̄₀mix`
    pub common: RateEstimate,
    /// `R̄symmix`
    pub private: RateEstimate,
    /// `Rmix`. The mean is the weighted sum of the flow means; the error
    /// comes from the per-sample totals.
    pub total: RateEstimate,
    /// `nt = K`, outside the regime the asymptotic forms are derived for.
    pub extrapolated: bool,
}

impl MixedRates {
    fn assemble(cfg: &SystemConfig, common: RateEstimate, private: RateEstimate, total: RateEstimate) -> Self {
        Self {
            common,
            private,
            total: RateEstimate {
                mean: aggregate_rate(cfg, common.mean, private.mean),
                ..total
            },
            extrapolated: cfg.num_tx_antennas == cfg.num_users,
        }
    }
}

/// `ln(1 + min_k SINR_k⁽⁰⁾)` with `SINR_k⁽⁰⁾ = scale·‖H_k‖²/(1 + |G_k|²p + Σ|G̃_{k,l}|²p)`.
pub fn common_rate_sample(scale: f64, p: f64, norm_sq: &[f64], signal: &[f64], interference: &[f64]) -> f64 {
    let mut min = f64::INFINITY;
    for ((n, g), i) in norm_sq.iter().zip(signal).zip(interference) {
        min = min.min(scale * n / (1.0 + g * p + i * p));
    }
    min.ln_1p()
}

/// Monte-Carlo flow rates of the mixed scheme over full ZF precoder draws.
pub fn mixed_rates_mc(cfg: &SystemConfig, split: &PowerSplit, rng: &RngStream, mc: &MonteCarlo) -> Result<MixedRates> {
    check_split(cfg, split)?;
    ZfSampler::new(cfg)?;
    let (a, b) = flow_weights(cfg);
    let scale = split.common_power / cfg.num_tx_antennas as f64;
    let p = split.private_per_user;
    let cols = mc.run(
        rng,
        3,
        || ZfSampler::new(cfg),
        |sampler, r, out| {
            let sampler = sampler.as_mut().map_err(|e| e.clone())?;
            let g = sampler.next(r)?;
            out[0] = common_rate_sample(scale, p, &g.norm_sq, &g.signal, &g.interference);
            out[1] = user_mean_rate(&g.signal, &g.interference, p);
            out[2] = weigh(a, out[0]) + weigh(b, out[1]);
            Ok(())
        },
    )?;
    Ok(MixedRates::assemble(cfg, cols[0], cols[1], cols[2]))
}

#[derive(Debug, Clone, Default)]
struct ShardGains {
    norm_sq: Vec<f64>,
    signal: Vec<f64>,
    interference: Vec<f64>,
}

/// Stored ZF gains of a set of channel draws, for evaluating many power
/// splits and cache sizes on the same randomness.
///
/// Draws are laid out in the shards of the [`MonteCarlo`] that produced them,
/// so [`MixedEnsemble::rates`] agrees bit for bit with [`mixed_rates_mc`]
/// on the same stream. `m` and the placement do not affect the draws and can
/// be changed freely; `P` and `σ²` are fixed.
#[derive(Debug, Clone)]
pub struct MixedEnsemble {
    cfg: SystemConfig,
    seed: u64,
    shards: Vec<ShardGains>,
}

impl MixedEnsemble {
    pub fn simulate(cfg: &SystemConfig, rng: &RngStream, mc: &MonteCarlo) -> Result<Self> {
        interference_consts(cfg)?;
        ZfSampler::new(cfg)?;
        let k = cfg.num_users;
        let shards = mc.map_shards(rng, |_, n, r| {
            let mut sampler = ZfSampler::new(cfg)?;
            let mut sh = ShardGains {
                norm_sq: Vec::with_capacity(n * k),
                signal: Vec::with_capacity(n * k),
                interference: Vec::with_capacity(n * k),
            };
            for _ in 0..n {
                let g = sampler.next(r)?;
                sh.norm_sq.extend_from_slice(&g.norm_sq);
                sh.signal.extend_from_slice(&g.signal);
                sh.interference.extend_from_slice(&g.interference);
            }
            Ok(sh)
        })?;
        Ok(Self {
            cfg: *cfg,
            seed: rng.seed(),
            shards,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn samples(&self) -> usize {
        self.shards.iter().map(|s| s.signal.len()).sum::<usize>() / self.cfg.num_users
    }

    fn with_m(&self, m: f64) -> Result<SystemConfig> {
        let cfg = self.cfg.with_cache(m, self.cfg.placement);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Flow rates at common power `p0` and cache fraction `m`.
    pub fn rates(&self, p0: f64, m: f64) -> Result<MixedRates> {
        let cfg = self.with_m(m)?;
        let split = PowerSplit::new(&cfg, p0)?;
        let (a, b) = flow_weights(&cfg);
        let k = cfg.num_users;
        let scale = p0 / cfg.num_tx_antennas as f64;
        let p = split.private_per_user;
        let mut total = [Moments::default(); 3];
        for sh in &self.shards {
            let mut acc = [Moments::default(); 3];
            for ((n, g), i) in sh
                .norm_sq
                .chunks_exact(k)
                .zip(sh.signal.chunks_exact(k))
                .zip(sh.interference.chunks_exact(k))
            {
                let c = common_rate_sample(scale, p, n, g, i);
                let r = user_mean_rate(g, i, p);
                acc[0].push(c);
                acc[1].push(r);
                acc[2].push(weigh(a, c) + weigh(b, r));
            }
            for (t, a) in total.iter_mut().zip(&acc) {
                t.merge(a);
            }
        }
        let [c, r, t] = total.map(|m| m.estimate(self.seed, self.shards.len()));
        Ok(MixedRates::assemble(&cfg, c, r, t))
    }

    /// Flow means at common power `p0`, without error bars.
    fn flow_means(&self, p0: f64) -> (f64, f64) {
        let k = self.cfg.num_users;
        let scale = p0 / self.cfg.num_tx_antennas as f64;
        let p = (self.cfg.total_power - p0) / k as f64;
        let (mut c, mut r) = (0.0, 0.0);
        for sh in &self.shards {
            for ((n, g), i) in sh
                .norm_sq
                .chunks_exact(k)
                .zip(sh.signal.chunks_exact(k))
                .zip(sh.interference.chunks_exact(k))
            {
                c += common_rate_sample(scale, p, n, g, i);
                r += user_mean_rate(g, i, p);
            }
        }
        let n = self.samples() as f64;
        (c / n, r / n)
    }

    /// Both flow means on a uniform grid of `grid_points` common powers.
    pub fn split_curve(&self, grid_points: usize) -> SplitCurve<'_> {
        let n = grid_points.max(2);
        let pt = self.cfg.total_power;
        let p0: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { pt } else { pt * i as f64 / (n - 1) as f64 })
            .collect();
        let (common, private) = p0.iter().map(|&x| self.flow_means(x)).unzip();
        SplitCurve {
            ensemble: self,
            p0,
            common,
            private,
        }
    }

    /// Optimal common power at cache fraction `m`.
    pub fn optimal_split(&self, m: f64, opts: &MaximizeOptions) -> Result<SplitOptimum> {
        self.split_curve(opts.grid_points).optimum(m, opts)
    }

    /// [`MixedEnsemble::optimal_split`] for every `m`, sharing one curve.
    pub fn optimal_splits(&self, ms: &[f64], opts: &MaximizeOptions) -> Result<Vec<SplitOptimum>> {
        let curve = self.split_curve(opts.grid_points);
        ms.iter().map(|&m| curve.optimum(m, opts)).collect()
    }
}

/// Flow means of a [`MixedEnsemble`] tabulated over `P₀`.
#[derive(Debug, Clone)]
pub struct SplitCurve<'a> {
    ensemble: &'a MixedEnsemble,
    pub p0: Vec<f64>,
    pub common: Vec<f64>,
    pub private: Vec<f64>,
}

impl SplitCurve<'_> {
    /// Grid maximum of `Rmix` at cache fraction `m`, refined between the
    /// neighbouring grid points.
    pub fn optimum(&self, m: f64, opts: &MaximizeOptions) -> Result<SplitOptimum> {
        let ens = self.ensemble;
        let cfg = ens.with_m(m)?;
        let pt = cfg.total_power;
        if m >= 1.0 || pt == 0.0 {
            return Ok(SplitOptimum {
                total_power: pt,
                p0: pt,
                rates: ens.rates(pt, m)?,
                boundary: SplitBoundary::AllCommon,
            });
        }
        let values: Vec<f64> = self
            .common
            .iter()
            .zip(&self.private)
            .map(|(&c, &r)| aggregate_rate(&cfg, c, r))
            .collect();
        let best = maximize_prescanned(
            |x| {
                let (c, r) = ens.flow_means(x);
                aggregate_rate(&cfg, c, r)
            },
            0.0,
            pt,
            &values,
            opts,
        );
        let boundary = SplitBoundary::of(&best, pt);
        Ok(SplitOptimum {
            total_power: pt,
            p0: best.argmax,
            rates: ens.rates(best.argmax, m)?,
            boundary,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitBoundary {
    Interior,
    /// `P₀ = 0`: pure spatial multiplexing.
    AllPrivate,
    /// `P₀ = P`: pure coded multicasting.
    AllCommon,
}

impl SplitBoundary {
    fn of(best: &Maximum, total_power: f64) -> Self {
        if !best.boundary {
            SplitBoundary::Interior
        } else if best.argmax >= total_power {
            SplitBoundary::AllCommon
        } else {
            SplitBoundary::AllPrivate
        }
    }

    fn from_private_power(x: f64, total_power: f64) -> Self {
        if x <= 0.0 {
            SplitBoundary::AllCommon
        } else if x >= total_power {
            SplitBoundary::AllPrivate
        } else {
            SplitBoundary::Interior
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptimum {
    pub total_power: f64,
    pub p0: f64,
    pub rates: MixedRates,
    pub boundary: SplitBoundary,
}

impl SplitOptimum {
    pub fn common_fraction(&self) -> f64 {
        if self.total_power > 0.0 {
            self.p0 / self.total_power
        } else {
            1.0
        }
    }
}

/// Optimal split of `cfg.total_power` by Monte Carlo, every candidate
/// evaluated on the same draws.
pub fn optimal_split_numeric(
    cfg: &SystemConfig,
    rng: &RngStream,
    mc: &MonteCarlo,
    opts: &MaximizeOptions,
) -> Result<SplitOptimum> {
    MixedEnsemble::simulate(cfg, rng, mc)?.optimal_split(cfg.cache_fraction, opts)
}

#[derive(Debug, Clone, Copy)]
pub enum AsymptoticVariant<'a> {
    /// Keeps `max_k Σ_{l≠k}|G̃_{k,l}|²` in the common-stream interference;
    /// its expectation is taken by Monte Carlo over i.i.d. `CN(0,σ²)`
    /// leakage entries.
    MaxInterference { rng: &'a RngStream, mc: MonteCarlo },
    /// Replaces the maximum by its mean `(K−1)σ²`.
    Simplified,
}

impl<'a> AsymptoticVariant<'a> {
    pub const INNER_DRAWS: usize = 10_000;

    pub fn max_interference(rng: &'a RngStream) -> Self {
        AsymptoticVariant::MaxInterference {
            rng,
            mc: MonteCarlo::new(Self::INNER_DRAWS),
        }
    }
}

/// Large-system flow rates with uniform private power.
pub fn mixed_rates_asymptotic(
    cfg: &SystemConfig,
    split: &PowerSplit,
    variant: AsymptoticVariant<'_>,
) -> Result<MixedRates> {
    check_split(cfg, split)?;
    let (k, nt) = (cfg.num_users, cfg.num_tx_antennas);
    let kf = k as f64;
    let s2 = cfg.csit_error_var;
    let p0 = split.common_power;
    let p = split.private_per_user;
    let proxy = (nt - k + 1) as f64 * (1.0 - s2);
    let private = (proxy * p / (1.0 + (kf - 1.0) * s2 * p)).ln_1p();
    let common_at = |leak: f64| (p0 / (1.0 + p * (proxy + leak))).ln_1p();

    let common = match variant {
        _ if p0 == 0.0 => RateEstimate::exact(0.0, 0),
        AsymptoticVariant::Simplified => RateEstimate::exact(common_at((kf - 1.0) * s2), 0),
        AsymptoticVariant::MaxInterference { rng, .. } if s2 == 0.0 || k == 1 => {
            RateEstimate::exact(common_at(0.0), rng.seed())
        }
        AsymptoticVariant::MaxInterference { rng, mc } => {
            // each row sum of K−1 i.i.d. σ²·Exp(1) leakage terms is Gamma(K−1, σ²)
            let row = Gamma::new(kf - 1.0, s2).map_err(|e| Error::config(e.to_string()))?;
            mc.estimate(
                rng,
                || (),
                |_, r| {
                    let leak = (0..k).map(|_| row.sample(r)).fold(f64::NEG_INFINITY, f64::max);
                    Ok(common_at(leak))
                },
            )?
        }
    };
    let private = RateEstimate::exact(private, common.seed);
    let (a, _) = flow_weights(cfg);
    let total = RateEstimate {
        std_err: weigh(a, common.std_err),
        ..common
    };
    Ok(MixedRates::assemble(cfg, common, private, total))
}

/// `Rmix` of the simplified asymptotic variant at common power `p0`:
/// `(K/T) ln(1 + P₀/(1+(P−P₀)Ic)) + (K/(1−m)) ln(1 + (Ic−Ip)/((P−P₀)⁻¹+Ip))`.
pub fn simplified_objective(cfg: &SystemConfig, p0: f64) -> Result<f64> {
    let split = PowerSplit::new(cfg, p0)?;
    let x = cfg.total_power - p0;
    let common = (p0 / (1.0 + x * split.ic)).ln_1p();
    let private = ((split.ic - split.ip) * x / (1.0 + x * split.ip)).ln_1p();
    Ok(aggregate_rate(cfg, common, private))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPoint {
    pub p0: f64,
    pub rate: f64,
    pub boundary: SplitBoundary,
}

/// Grid-and-refine maximum of [`simplified_objective`] over `P₀ ∈ [0, P]`.
pub fn optimal_split_simplified(cfg: &SystemConfig, opts: &MaximizeOptions) -> Result<SplitPoint> {
    let pt = cfg.total_power;
    if pt == 0.0 || cfg.cache_fraction >= 1.0 {
        return Ok(SplitPoint {
            p0: pt,
            rate: simplified_objective(cfg, pt)?,
            boundary: SplitBoundary::AllCommon,
        });
    }
    simplified_objective(cfg, pt)?;
    let best = maximize_1d(|x| simplified_objective(cfg, x).unwrap_or(f64::NAN), 0.0, pt, opts);
    Ok(SplitPoint {
        p0: best.argmax,
        rate: best.max,
        boundary: SplitBoundary::of(&best, pt),
    })
}

/// Stationary point of [`simplified_objective`] in closed form.
///
/// With `x = P − P₀` the derivative of `Rmix` has the sign of the affine
/// `h(x) = N − D·x`,
///
/// ```text
/// N = −(1−m)(1+Ic·P) + T(Ic−Ip)(1+P)
/// D = (1−m)Ip(1+Ic·P) − T(Ic−1)(Ic−Ip)
/// ```
///
/// so for `D > 0` the maximum sits at `x = N/D` clamped to `[0, P]`. For
/// `D < 0` the stationary point is a minimum and the better endpoint wins.
pub fn optimal_split_closed_form(cfg: &SystemConfig) -> Result<SplitPoint> {
    let (ic, ip) = interference_consts(cfg)?;
    let proxy = (cfg.num_tx_antennas - cfg.num_users + 1) as f64 * (1.0 - cfg.csit_error_var);
    if !(proxy > 0.0) {
        return Err(Error::config("closed-form split needs (nt−K+1)(1−σ²) > 0"));
    }
    let pt = cfg.total_power;
    let m = cfg.cache_fraction;
    let point = |x: f64| -> Result<SplitPoint> {
        let p0 = if x <= 0.0 { pt } else { (pt - x).max(0.0) };
        Ok(SplitPoint {
            p0,
            rate: simplified_objective(cfg, p0)?,
            boundary: SplitBoundary::from_private_power(x, pt),
        })
    };
    if m >= 1.0 || pt == 0.0 {
        return point(0.0);
    }
    let t = transmissions(cfg.placement, m, cfg.num_users);
    let lead = (1.0 - m) * (1.0 + ic * pt);
    let n = -lead + t * (ic - ip) * (1.0 + pt);
    let d = lead * ip - t * (ic - 1.0) * (ic - ip);
    let scale = (lead * ip).abs() + (t * (ic - 1.0) * (ic - ip)).abs();
    if d.abs() <= ToleranceSpec::default().abs_tol * scale.max(1.0) {
        return Err(Error::DegenerateDenominator { denominator: d });
    }
    if d > 0.0 {
        return point((n / d).clamp(0.0, pt));
    }
    let (all_common, all_private) = (point(0.0)?, point(pt)?);
    Ok(if all_private.rate > all_common.rate {
        all_private
    } else {
        all_common
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CsitRule {
    /// `σ²` of the base configuration.
    #[default]
    Fixed,
    /// `σ² = (P/K)⁻¹`, capped at 1.
    InversePerUserPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeGrid {
    pub base: SystemConfig,
    /// `P/K`, linear.
    pub per_user_powers: Vec<f64>,
    pub cache_fractions: Vec<f64>,
    #[serde(default)]
    pub csit: CsitRule,
}

impl RegimeGrid {
    pub fn config_at(&self, per_user_power: f64) -> SystemConfig {
        let cfg = self.base.with_power(per_user_power * self.base.num_users as f64);
        match self.csit {
            CsitRule::Fixed => cfg,
            CsitRule::InversePerUserPower => cfg.with_csit_error((1.0 / per_user_power).min(1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimePoint {
    pub per_user_power: f64,
    pub m: f64,
    pub sigma2: f64,
    /// `Rmc`, all power on the common stream.
    pub multicast: RateEstimate,
    /// `Ruc`, all power on the private streams.
    pub unicast: RateEstimate,
    pub optimum: SplitOptimum,
    /// `Rmc ≥ Ruc`
    pub multicast_preferable: bool,
    /// `P₀* = P`
    pub multicast_optimal: bool,
}

/// Classifies every `(P/K, m)` point of the grid. Each power level gets its
/// own ensemble on substream `i` of `rng`; all cache fractions at that level
/// share it.
pub fn regime_map(
    grid: &RegimeGrid,
    rng: &RngStream,
    mc: &MonteCarlo,
    opts: &MaximizeOptions,
) -> Result<Vec<RegimePoint>> {
    if grid.per_user_powers.is_empty() || grid.cache_fractions.is_empty() {
        return Err(Error::config("empty regime grid"));
    }
    let rows = mc
        .execution
        .map(&grid.per_user_powers, |i, &pk| -> Result<Vec<RegimePoint>> {
            let cfg = grid.config_at(pk);
            let ens = MixedEnsemble::simulate(&cfg, &rng.substream(i as u64), mc)?;
            let curve = ens.split_curve(opts.grid_points);
            grid.cache_fractions
                .iter()
                .map(|&m| {
                    let multicast = ens.rates(cfg.total_power, m)?.total;
                    let unicast = ens.rates(0.0, m)?.total;
                    let optimum = curve.optimum(m, opts)?;
                    Ok(RegimePoint {
                        per_user_power: pk,
                        m,
                        sigma2: cfg.csit_error_var,
                        multicast,
                        unicast,
                        optimum,
                        multicast_preferable: multicast.mean >= unicast.mean,
                        multicast_optimal: optimum.boundary == SplitBoundary::AllCommon,
                    })
                })
                .collect()
        });
    let mut out = Vec::with_capacity(grid.per_user_powers.len() * grid.cache_fractions.len());
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}
