//! Rayleigh fading draws, the imperfect-CSIT split and the minimum channel gain.
//!
//! Every user sees an i.i.d. `CN(0, 1)` row of `nt` coefficients per
//! sub-channel. The transmitter knows an estimate `Ĥ` with per-entry variance
//! `1 − σ²`; the error `H̃` has variance `σ²` and `H = Ĥ + H̃`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::caching::Placement;
use crate::estimate::{MonteCarlo, RateEstimate};
use crate::linalg::{norm_sq, CMat};
use crate::mathx::{gamma_p_inverse, ln_gamma};
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// `K`
    pub num_users: usize,
    /// `nt`
    pub num_tx_antennas: usize,
    /// `L`
    #[serde(default = "one")]
    pub num_subchannels: usize,
    /// `P`, linear, noise power normalized to one.
    pub total_power: f64,
    /// `m = M/N`
    #[serde(default)]
    pub cache_fraction: f64,
    /// `σ²`
    #[serde(default)]
    pub csit_error_var: f64,
    #[serde(default)]
    pub placement: Placement,
}

fn one() -> usize {
    1
}

impl SystemConfig {
    pub fn new(num_users: usize, num_tx_antennas: usize, total_power: f64) -> Self {
        Self {
            num_users,
            num_tx_antennas,
            num_subchannels: 1,
            total_power,
            cache_fraction: 0.0,
            csit_error_var: 0.0,
            placement: Placement::Centralized,
        }
    }

    pub fn with_subchannels(self, l: usize) -> Self {
        Self {
            num_subchannels: l,
            ..self
        }
    }

    pub fn with_cache(self, m: f64, placement: Placement) -> Self {
        Self {
            cache_fraction: m,
            placement,
            ..self
        }
    }

    pub fn with_csit_error(self, sigma2: f64) -> Self {
        Self {
            csit_error_var: sigma2,
            ..self
        }
    }

    pub fn with_power(self, p: f64) -> Self {
        Self { total_power: p, ..self }
    }

    pub fn with_users(self, k: usize) -> Self {
        Self { num_users: k, ..self }
    }

    pub fn with_antennas(self, nt: usize) -> Self {
        Self {
            num_tx_antennas: nt,
            ..self
        }
    }

    /// Per-user private power `P/K` under uniform allocation.
    pub fn power_per_user(&self) -> f64 {
        self.total_power / self.num_users as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::config("num_users must be >= 1"));
        }
        if self.num_tx_antennas == 0 {
            return Err(Error::config("num_tx_antennas must be >= 1"));
        }
        if self.num_subchannels == 0 {
            return Err(Error::config("num_subchannels must be >= 1"));
        }
        if !(self.total_power >= 0.0 && self.total_power.is_finite()) {
            return Err(Error::config(format!(
                "total_power must be finite and >= 0, got {}",
                self.total_power
            )));
        }
        if !(0.0..=1.0).contains(&self.cache_fraction) {
            return Err(Error::config(format!(
                "cache_fraction must lie in [0, 1], got {}",
                self.cache_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.csit_error_var) {
            return Err(Error::config(format!(
                "csit_error_var must lie in [0, 1], got {}",
                self.csit_error_var
            )));
        }
        Ok(())
    }
}

/// One realization for all users and sub-channels: `L` matrices of shape `K × nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub true_h: Vec<CMat>,
    pub est_h: Vec<CMat>,
    pub err_h: Vec<CMat>,
}

impl ChannelDraw {
    pub fn zeros(cfg: &SystemConfig) -> Self {
        let mk = || vec![CMat::zeros(cfg.num_users, cfg.num_tx_antennas); cfg.num_subchannels];
        Self {
            true_h: mk(),
            est_h: mk(),
            err_h: mk(),
        }
    }

    /// Redraws every entry in place, reusing the buffers.
    ///
    /// The estimate is drawn first, then the error, sub-channel by
    /// sub-channel in row-major order. A component with zero variance is
    /// not drawn at all, so `σ² = 0` consumes exactly the randomness of a
    /// perfect-CSIT draw.
    pub fn resample(&mut self, cfg: &SystemConfig, rng: &mut RngStream) {
        let s2 = cfg.csit_error_var;
        let est_std = ((1.0 - s2) / 2.0).sqrt();
        let err_std = (s2 / 2.0).sqrt();
        for l in 0..self.true_h.len() {
            fill_cn(self.est_h[l].data_mut(), est_std, rng);
            fill_cn(self.err_h[l].data_mut(), err_std, rng);
            let (t, e, r) = (&mut self.true_h[l], &self.est_h[l], &self.err_h[l]);
            for ((h, a), b) in t.data_mut().iter_mut().zip(e.data()).zip(r.data()) {
                *h = a + b;
            }
        }
    }
}

fn fill_cn(buf: &mut [Complex64], std: f64, rng: &mut RngStream) {
    if std == 0.0 {
        buf.fill(Complex64::new(0.0, 0.0));
        return;
    }
    for z in buf.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(std * re, std * im);
    }
}

/// Draws a fresh channel realization.
pub fn draw_channel(cfg: &SystemConfig, rng: &mut RngStream) -> ChannelDraw {
    let mut d = ChannelDraw::zeros(cfg);
    d.resample(cfg, rng);
    d
}

/// `‖H_k‖²` for every row of `h`, written into `out`.
pub fn row_norms_sq(h: &CMat, out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate().take(h.rows()) {
        *o = norm_sq(h.row(k));
    }
}

/// `snr_{k,l} = (P/nt)·‖H_{k,l}‖²` on sub-channel `l` (zero-based).
pub fn per_user_snr(cfg: &SystemConfig, draw: &ChannelDraw, l: usize) -> Result<Vec<f64>> {
    let h = draw.true_h.get(l).ok_or(Error::Index {
        index: l,
        len: draw.true_h.len(),
    })?;
    let scale = cfg.total_power / cfg.num_tx_antennas as f64;
    let mut out = vec![0.0; h.rows()];
    row_norms_sq(h, &mut out);
    for x in &mut out {
        *x *= scale;
    }
    Ok(out)
}

/// One draw of `min_k ‖H_k‖²/nt` over `K` users by inverting the CDF of the
/// minimum: `P(min ≤ x) = 1 − Q(nt, nt·x)^K`.
pub fn sample_min_norm(nt: usize, k: usize, rng: &mut RngStream) -> Result<f64> {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                                            // P(nt, nt·x) = 1 − u^{1/K}, computed without cancellation
    let p = -(u.ln() / k as f64).exp_m1();
    Ok(gamma_p_inverse(nt as f64, p)? / nt as f64)
}

/// Monte-Carlo estimate of `E[min_k ‖H_k‖²/nt]`.
pub fn min_norm_statistic(nt: usize, k: usize, rng: &RngStream, mc: &MonteCarlo) -> Result<RateEstimate> {
    if nt == 0 || k == 0 {
        return Err(Error::config("min_norm_statistic needs nt >= 1 and K >= 1"));
    }
    mc.estimate(rng, || (), |_, r| sample_min_norm(nt, k, r))
}

/// Largest `K(nt − 1)` accepted by [`exact_min_mean`].
pub const EXACT_MIN_GUARD: usize = 200;

/// Exact `E[min_k ‖H_k‖²/nt]` from the power-series expansion of
/// `Q(nt, y)^K = e^{−Ky}(Σ_{j<nt} y^j/j!)^K`.
///
/// With `c_i` the coefficients of `(Σ_{j<nt} y^j/j!)^K` the mean is
/// `(1/nt) Σ_i c_i i! K^{−i−1}`. The coefficients are built by `K`
/// successive convolutions on the rescaled `d_i = c_i i!/K^i`, where one
/// convolution step reads `d_i ← Σ_j C(i,j) K^{−j} d_{i−j}`. Every term is
/// positive, so nothing cancels.
pub fn exact_min_mean(nt: usize, k: usize) -> Result<f64> {
    if nt == 0 || k == 0 {
        return Err(Error::config("exact_min_mean needs nt >= 1 and K >= 1"));
    }
    let top = k * (nt - 1);
    if top > EXACT_MIN_GUARD {
        return Err(Error::OverflowGuard {
            got: top,
            limit: EXACT_MIN_GUARD,
        });
    }
    let kf = k as f64;
    let ln_k = kf.ln();
    let ln_fact: Vec<f64> = (0..=top).map(|n| ln_gamma(n as f64 + 1.0)).collect();
    // weight[i][j] = C(i,j)·K^{−j}
    let weight = |i: usize, j: usize| (ln_fact[i] - ln_fact[j] - ln_fact[i - j] - j as f64 * ln_k).exp();

    let mut d = vec![0.0f64; top + 1];
    d[0] = 1.0;
    let mut next = vec![0.0f64; top + 1];
    for r in 0..k {
        let deg = r * (nt - 1);
        let new_deg = deg + nt - 1;
        for (i, slot) in next.iter_mut().enumerate().take(new_deg + 1) {
            let lo = i.saturating_sub(deg);
            *slot = (lo..=i.min(nt - 1)).map(|j| weight(i, j) * d[i - j]).sum();
        }
        std::mem::swap(&mut d, &mut next);
    }
    Ok(d.iter().sum::<f64>() / (nt as f64 * kf))
}

/// `a_K = nt·(K/nt!)^{1/nt}`, the scaling that makes `a_K·min_k ‖H_k‖²/nt`
/// converge in mean to `Γ(1 + 1/nt)`.
pub fn extreme_value_scale(nt: usize, k: usize) -> f64 {
    let n = nt as f64;
    n * (((k as f64).ln() - ln_gamma(n + 1.0)) / n).exp()
}
