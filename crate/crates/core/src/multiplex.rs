//! Zero-forcing spatial multiplexing with imperfect CSIT.
//!
//! The precoder is built from the estimate `Ĥ`: beam `w_k` is the unit
//! vector along the projection of `Ĥ_k*` onto the null space of the other
//! estimated rows. Applied to the true channel `H = Ĥ + H̃`, user `k` sees
//! the signal gain `|G_k|² = |H_kᵀ w_k|²` and the leakage
//! `Σ_{l≠k} |H_kᵀ w_l|²`, which only the error part produces.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{row_norms_sq, ChannelDraw, SystemConfig};
use crate::estimate::{MonteCarlo, RateEstimate};
use crate::linalg::{
    cholesky_in_place, cholesky_inverse_diag, cholesky_solve, dot_h, norm_sq, solve_upper_adjoint, thin_qr, CMat,
};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Relative pivot below which the estimated rows count as dependent.
const GRAM_PIVOT: f64 = 1e-22;

#[derive(Debug, Clone, PartialEq)]
pub struct ZfPrecoder {
    /// `w_k`, unit norm, length `nt`.
    pub columns: Vec<Vec<Complex64>>,
    /// `α_k = 1/‖U_k U_kᴴ Ĥ_k*‖`, so that `‖w_k‖ = 1`.
    pub normalizers: Vec<f64>,
}

/// Builds the precoder user by user: orthonormal basis of the other
/// conjugated rows by QR, then projection onto its complement.
pub fn build_zf_precoder(est_h: &CMat) -> Result<ZfPrecoder> {
    let (k, nt) = (est_h.rows(), est_h.cols());
    if nt < k {
        return Err(Error::RankDeficient { pivot: 0.0 });
    }
    let conj_rows: Vec<Vec<Complex64>> = (0..k)
        .map(|r| est_h.row(r).iter().map(|z| z.conj()).collect())
        .collect();
    let mut columns = Vec::with_capacity(k);
    let mut normalizers = Vec::with_capacity(k);
    for (user, own) in conj_rows.iter().enumerate() {
        let others: Vec<Vec<Complex64>> = conj_rows
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != user)
            .map(|(_, r)| r.clone())
            .collect();
        let mut w = own.clone();
        if !others.is_empty() {
            let basis = thin_qr(&others)?;
            for q in &basis.q {
                let c = dot_h(q, own);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= qi * c;
                }
            }
        }
        let len = norm_sq(&w).sqrt();
        let own_len = norm_sq(own).sqrt();
        if !(len > 1e-12 * own_len) {
            return Err(Error::RankDeficient {
                pivot: if own_len > 0.0 { len / own_len } else { 0.0 },
            });
        }
        let alpha = 1.0 / len;
        for wi in &mut w {
            *wi *= alpha;
        }
        columns.push(w);
        normalizers.push(alpha);
    }
    Ok(ZfPrecoder { columns, normalizers })
}

impl ZfPrecoder {
    /// The same precoder from the normalized columns of the pseudo-inverse
    /// `Ĥᴴ(ĤĤᴴ)⁻¹`, via one thin QR of `Ĥᴴ`.
    pub fn pseudo_inverse(est_h: &CMat) -> Result<ZfPrecoder> {
        let (k, nt) = (est_h.rows(), est_h.cols());
        if nt < k {
            return Err(Error::RankDeficient { pivot: 0.0 });
        }
        let conj_rows: Vec<Vec<Complex64>> = (0..k)
            .map(|r| est_h.row(r).iter().map(|z| z.conj()).collect())
            .collect();
        let qr = thin_qr(&conj_rows)?;
        let mut columns = Vec::with_capacity(k);
        let mut normalizers = Vec::with_capacity(k);
        for user in 0..k {
            let mut e = vec![Complex64::new(0.0, 0.0); k];
            e[user] = Complex64::new(1.0, 0.0);
            let y = solve_upper_adjoint(&qr.r, &e);
            let norm = norm_sq(&y).sqrt();
            let mut w = vec![Complex64::new(0.0, 0.0); nt];
            for (q, yj) in qr.q.iter().zip(&y) {
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi += qi * (yj / norm);
                }
            }
            columns.push(w);
            normalizers.push(norm);
        }
        Ok(ZfPrecoder { columns, normalizers })
    }

    pub fn num_users(&self) -> usize {
        self.columns.len()
    }
}

/// `|H_kᵀ w_l|²` for all `k, l`, row-major `K × K`.
pub fn link_gains(true_h: &CMat, pre: &ZfPrecoder) -> Vec<f64> {
    let k = true_h.rows();
    let mut out = vec![0.0; k * k];
    for r in 0..k {
        let h = true_h.row(r);
        for (l, w) in pre.columns.iter().enumerate() {
            let g: Complex64 = h.iter().zip(w).map(|(a, b)| a * b).sum();
            out[r * k + l] = g.norm_sqr();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrSample {
    /// `|G_k|²`
    pub signal_gain: f64,
    /// `Σ_{l≠k} |G̃_{k,l}|²`
    pub interference: f64,
    pub sinr: f64,
}

impl SinrSample {
    /// Uniform private power `p` on every stream.
    pub fn new(signal_gain: f64, interference: f64, p: f64) -> Self {
        Self {
            signal_gain,
            interference,
            sinr: zf_sinr(signal_gain, interference, p),
        }
    }
}

/// `|G|²p / (1 + I·p)`.
pub fn zf_sinr(signal_gain: f64, interference: f64, p: f64) -> f64 {
    signal_gain * p / (1.0 + interference * p)
}

/// Per-user channel statistics of one draw under zero-forcing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserGains {
    /// `‖H_k‖²` of the true channel.
    pub norm_sq: Vec<f64>,
    /// `|G_k|²`
    pub signal: Vec<f64>,
    /// `Σ_{l≠k} |G̃_{k,l}|²`
    pub interference: Vec<f64>,
}

/// Scratch space for [`ZfSampler`]; one per worker.
#[derive(Debug, Clone)]
struct ZfWorkspace {
    gram: Vec<Complex64>,
    rhs: Vec<Complex64>,
    cross: Vec<Complex64>,
    inv_diag: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl ZfWorkspace {
    fn new(k: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            gram: vec![z; k * k],
            rhs: vec![z; k],
            cross: vec![z; k * k],
            inv_diag: vec![0.0; k],
            scratch: vec![z; k],
        }
    }
}

/// Gains of the normalized pseudo-inverse precoder without forming it.
///
/// With `A = Ĥ`, `Hw_l ∝ [H Aᴴ (AAᴴ)⁻¹]_{·l}` and the column norm of the
/// pseudo-inverse is `sqrt([(AAᴴ)⁻¹]_{ll})`, so two `K × K` Gram products
/// and one Cholesky factorization give every `|H_kᵀ w_l|²`.
fn zf_gains(
    est: &CMat,
    truth: &CMat,
    ws: &mut ZfWorkspace,
    signal: &mut [f64],
    interference: &mut [f64],
) -> Result<()> {
    let k = est.rows();
    for r in 0..k {
        for c in 0..=r {
            // (AAᴴ)_{rc} = Σ_t ĥ_rt conj(ĥ_ct)
            let v = dot_h(est.row(c), est.row(r));
            ws.gram[r * k + c] = v;
            ws.gram[c * k + r] = v.conj();
        }
    }
    cholesky_in_place(&mut ws.gram, k, GRAM_PIVOT)?;
    cholesky_inverse_diag(&ws.gram, k, &mut ws.inv_diag, &mut ws.scratch);
    for r in 0..k {
        // row r of H Aᴴ (AAᴴ)⁻¹, via the Hermitian solve on its conjugate
        for c in 0..k {
            ws.rhs[c] = dot_h(truth.row(r), est.row(c));
        }
        cholesky_solve(&ws.gram, k, &mut ws.rhs);
        ws.cross[r * k..(r + 1) * k].copy_from_slice(&ws.rhs);
    }
    for r in 0..k {
        let mut leak = 0.0;
        for c in 0..k {
            let g = ws.cross[r * k + c].norm_sqr() / ws.inv_diag[c];
            if c == r {
                signal[r] = g;
            } else {
                leak += g;
            }
        }
        interference[r] = leak;
    }
    Ok(())
}

/// Draws channels and evaluates the zero-forcing statistics of each draw,
/// reusing all buffers.
///
/// ZF beams depend on `Ĥ` only up to scale, and `Ĥ = sqrt(1−σ²)·Z` with
/// `Z` i.i.d. `CN(0,1)`. At `σ² = 1` the estimate is identically zero, so
/// the sampler takes the `σ² → 1` limit: beams are built from a fresh
/// independent `Z`. `Z` comes from a side stream opened on the first draw,
/// so the channel itself consumes the caller's stream exactly as the
/// multicast estimators do.
#[derive(Debug, Clone)]
pub struct ZfSampler {
    cfg: SystemConfig,
    draw: ChannelDraw,
    ws: ZfWorkspace,
    gains: UserGains,
    /// Precoding directions when `σ² = 1`.
    blind: Option<CMat>,
    blind_rng: Option<RngStream>,
}

const BLIND_STREAM: u64 = 0x62_6c69_6e64;

impl ZfSampler {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        require_zf(cfg)?;
        let k = cfg.num_users;
        Ok(Self {
            cfg: *cfg,
            draw: ChannelDraw::zeros(cfg),
            ws: ZfWorkspace::new(k),
            gains: UserGains {
                norm_sq: vec![0.0; k],
                signal: vec![0.0; k],
                interference: vec![0.0; k],
            },
            blind: (cfg.csit_error_var >= 1.0).then(|| CMat::zeros(k, cfg.num_tx_antennas)),
            blind_rng: None,
        })
    }

    pub fn next(&mut self, rng: &mut RngStream) -> Result<&UserGains> {
        self.draw.resample(&self.cfg, rng);
        if let Some(dir) = self.blind.as_mut() {
            let side = self.blind_rng.get_or_insert_with(|| rng.substream(BLIND_STREAM));
            fill_standard_cn(dir, side);
        }
        let est = self.blind.as_ref().unwrap_or(&self.draw.est_h[0]);
        let truth = &self.draw.true_h[0];
        row_norms_sq(truth, &mut self.gains.norm_sq);
        zf_gains(
            est,
            truth,
            &mut self.ws,
            &mut self.gains.signal,
            &mut self.gains.interference,
        )?;
        Ok(&self.gains)
    }

    pub fn draw(&self) -> &ChannelDraw {
        &self.draw
    }
}

fn fill_standard_cn(m: &mut CMat, rng: &mut RngStream) {
    for z in m.data_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
    }
}

fn require_zf(cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.num_tx_antennas < cfg.num_users {
        return Err(Error::config(format!(
            "zero-forcing needs nt >= K, got nt = {} < K = {}",
            cfg.num_tx_antennas, cfg.num_users
        )));
    }
    if cfg.num_subchannels != 1 {
        return Err(Error::config("zero-forcing estimators need L = 1"));
    }
    Ok(())
}

/// `(1/K) Σ_k ln(1 + SINR_k)` of one draw at private power `p` per user.
pub fn private_rate_sample(gains: &UserGains, p: f64) -> f64 {
    user_mean_rate(&gains.signal, &gains.interference, p)
}

/// [`private_rate_sample`] on bare gain slices.
pub fn user_mean_rate(signal: &[f64], interference: &[f64], p: f64) -> f64 {
    let mut acc = 0.0;
    for (g, i) in signal.iter().zip(interference) {
        acc += zf_sinr(*g, *i, p).ln_1p();
    }
    acc / signal.len() as f64
}

/// Monte-Carlo `R̄sym` under zero-forcing with uniform power `p = P/K`,
/// averaged over users and draws.
///
pub fn symmetric_rate_mc(cfg: &SystemConfig, rng: &RngStream, mc: &MonteCarlo) -> Result<RateEstimate> {
    require_zf(cfg)?;
    let p = cfg.power_per_user();
    mc.estimate(
        rng,
        || ZfSampler::new(cfg),
        |sampler, r| {
            let sampler = sampler.as_mut().map_err(|e| e.clone())?;
            Ok(private_rate_sample(sampler.next(r)?, p))
        },
    )
}

/// Samples of `(|G_k|², Σ|G̃_{k,l}|²)` for user 0 over `draws` fresh draws.
pub fn sinr_samples(cfg: &SystemConfig, rng: &mut RngStream, draws: usize) -> Result<Vec<SinrSample>> {
    let mut sampler = ZfSampler::new(cfg)?;
    let p = cfg.power_per_user();
    (0..draws)
        .map(|_| {
            let g = sampler.next(rng)?;
            Ok(SinrSample::new(g.signal[0], g.interference[0], p))
        })
        .collect()
}

/// Fast estimator that samples the symmetric SINR from its
/// large-system representation
/// `|σA + sqrt((nt−K+1)(1−σ²)B)|² / (1/p + (K−1)σ²)`, with
/// `A ~ CN(0,1)`, `B ~ Gamma(nt−K+1, 1/(nt−K+1))` and the interference
/// factor fixed at its limit 1. Trusted for `nt/K ≥ 1.2`.
pub fn symmetric_rate_surrogate(cfg: &SystemConfig, rng: &RngStream, mc: &MonteCarlo) -> Result<RateEstimate> {
    require_zf(cfg)?;
    let s2 = cfg.csit_error_var;
    let n = (cfg.num_tx_antennas - cfg.num_users + 1) as f64;
    let p = cfg.power_per_user();
    let denom = 1.0 / p + (cfg.num_users - 1) as f64 * s2;
    let gamma = Gamma::new(n, 1.0 / n).map_err(|e| Error::config(e.to_string()))?;
    let (sigma, beam) = (s2.sqrt(), (n * (1.0 - s2)).sqrt());
    mc.estimate(
        rng,
        || (),
        |_, r| {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            let a = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            let b: f64 = r.sample(gamma);
            let sinr = (a * sigma + beam * b.sqrt()).norm_sqr() / denom;
            Ok(sinr.ln_1p())
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricCase {
    /// `(nt−K+1)(1−σ²) ≤ 1`: rate `(1 + proxy)/(1/p + K − 1)`.
    Bounded,
    /// `(nt−K+1)(1−σ²) > 1`: rate `ln(1 + proxy/(1/p + (K−1)σ²))`.
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricAsymptotic {
    pub value: f64,
    pub case: SymmetricCase,
    /// `(nt−K+1)(1−σ²)`
    pub proxy: f64,
    pub bounded_value: f64,
    pub growing_value: f64,
    /// `nt = K`, outside the regime the expression is derived for.
    pub extrapolated: bool,
}

/// Large-system approximation of `R̄sym`, reporting both expressions and
/// the proxy that chose between them.
pub fn symmetric_rate_asymptotic(cfg: &SystemConfig) -> Result<SymmetricAsymptotic> {
    cfg.validate()?;
    let (k, nt) = (cfg.num_users, cfg.num_tx_antennas);
    if nt < k {
        return Err(Error::config(format!(
            "zero-forcing needs nt >= K, got nt = {nt} < K = {k}"
        )));
    }
    let s2 = cfg.csit_error_var;
    let p = cfg.power_per_user();
    let proxy = (nt - k + 1) as f64 * (1.0 - s2);
    let kf = k as f64;
    let bounded_value = (1.0 + proxy) / (1.0 / p + kf - 1.0);
    let growing_value = (proxy / (1.0 / p + (kf - 1.0) * s2)).ln_1p();
    let case = if proxy <= 1.0 {
        SymmetricCase::Bounded
    } else {
        SymmetricCase::Growing
    };
    Ok(SymmetricAsymptotic {
        value: match case {
            SymmetricCase::Bounded => bounded_value,
            SymmetricCase::Growing => growing_value,
        },
        case,
        proxy,
        bounded_value,
        growing_value,
        extrapolated: nt == k,
    })
}
