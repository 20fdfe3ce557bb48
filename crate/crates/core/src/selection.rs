//! Threshold user selection with one-bit feedback.
//!
//! Users whose SNR clears `s` report back; the base station multicasts to
//! those `K*(s)` users at rate `ln(1+s)`. Placement is decentralized
//! throughout, since a threshold picks a random user subset.

use serde::{Deserialize, Serialize};

use crate::caching::{delivery_rate_selection_with, SelectionEstimate};
use crate::channel::SystemConfig;
use crate::estimate::MonteCarlo;
use crate::mathx::{find_root, gamma_density, lambert_w, maximize_1d, reg_upper_gamma, MaximizeOptions, ToleranceSpec};
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub s: f64,
    /// `E[K*(s)]`
    pub expected_selected: f64,
}

impl ThresholdPolicy {
    /// Policy for `K` single-antenna Rayleigh users: `E[K*(s)] = K·e^{−s/P}`.
    pub fn rayleigh(s: f64, p: f64, k: usize) -> Self {
        Self {
            s,
            expected_selected: k as f64 * (-s / p).exp(),
        }
    }
}

/// `s* = e^{W(P)} − 1 = P/W(P) − 1`, maximizing `e^{−s/P} ln(1+s)`.
pub fn optimal_threshold_rayleigh(p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Domain {
            function: "optimal_threshold_rayleigh",
            value: p,
            expected: "P > 0",
        });
    }
    // expm1 keeps precision as P → 0, where P/W(P) − 1 cancels
    Ok(lambert_w(p)?.exp_m1())
}

/// Solves `ln(1+s) = W((1 − F(s))/F′(s))` on `[lo, hi]`.
pub fn optimal_threshold_general<C, D>(cdf: C, pdf: D, lo: f64, hi: f64) -> Result<f64>
where
    C: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    optimal_threshold_from_survival(|s| 1.0 - cdf(s), pdf, lo, hi)
}

/// As [`optimal_threshold_general`], taking the survival function `1 − F`
/// directly so thin tails keep their precision.
///
/// The bracket is scanned on a log grid first; Brent then runs on the first
/// cell where the condition changes sign between finite values. Points where
/// the ratio is not finite (a vanishing density) are skipped.
pub fn optimal_threshold_from_survival<S, D>(survival: S, pdf: D, lo: f64, hi: f64) -> Result<f64>
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::NoRoot { lo, hi });
    }
    let condition = |s: f64| {
        let ratio = survival(s) / pdf(s);
        if !(ratio.is_finite() && ratio >= 0.0) {
            return f64::NAN;
        }
        s.ln_1p() - lambert_w(ratio).unwrap_or(f64::NAN)
    };
    const SCAN: usize = 256;
    let start = if lo > 0.0 { lo } else { hi * 1e-12 };
    let ratio = (hi / start).powf(1.0 / (SCAN - 1) as f64);
    let mut prev: Option<(f64, f64)> = if lo == 0.0 { Some((0.0, condition(0.0))) } else { None };
    prev = prev.filter(|(_, g)| g.is_finite());
    let tol = ToleranceSpec::new(1e-13, 1e-14, 300)?;
    for i in 0..SCAN {
        let x = if i == SCAN - 1 {
            hi
        } else {
            start * ratio.powi(i as i32)
        };
        let g = condition(x);
        if !g.is_finite() {
            continue;
        }
        if g == 0.0 {
            return Ok(x);
        }
        if let Some((px, pg)) = prev {
            if pg < 0.0 && g > 0.0 {
                return find_root(&condition, px, x, &tol);
            }
        }
        prev = Some((x, g));
    }
    Err(Error::NoRoot { lo, hi })
}

/// SNR law `(P/nt)·‖H‖²`, i.e. Gamma(nt, P/nt).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSnr {
    pub nt: usize,
    pub p: f64,
}

impl GammaSnr {
    pub fn survival(&self, s: f64) -> f64 {
        let n = self.nt as f64;
        reg_upper_gamma(n, (n * s / self.p).max(0.0)).unwrap_or(f64::NAN)
    }

    pub fn pdf(&self, s: f64) -> f64 {
        let n = self.nt as f64;
        n / self.p * gamma_density(n, n * s / self.p)
    }

    /// Threshold maximizing `Pr(snr ≥ s)·ln(1+s)`.
    pub fn optimal_threshold(&self) -> Result<f64> {
        if self.nt == 1 {
            return optimal_threshold_rayleigh(self.p);
        }
        let hi = self.p * (3.0 + 30.0 / self.nt as f64) + 10.0;
        optimal_threshold_from_survival(|s| self.survival(s), |s| self.pdf(s), 0.0, hi)
    }
}

/// Simulated selection delivery rate at threshold `s` for the users of `cfg`
/// (SNR Gamma(nt, P/nt)), with the empirical selected fraction.
pub fn simulated_selection_rate(
    cfg: &SystemConfig,
    s: f64,
    rng: &RngStream,
    mc: &MonteCarlo,
) -> Result<SelectionEstimate> {
    cfg.validate()?;
    if cfg.num_subchannels != 1 {
        return Err(Error::config("user selection needs L = 1"));
    }
    let q = if cfg.total_power > 0.0 {
        GammaSnr {
            nt: cfg.num_tx_antennas,
            p: cfg.total_power,
        }
        .survival(s)
    } else {
        0.0
    };
    delivery_rate_selection_with(cfg.cache_fraction, s, q, cfg.num_users, rng, mc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSearch {
    pub s: f64,
    pub rate: f64,
    pub boundary: bool,
}

/// Argmax over `s ∈ [lo, hi]` of the simulated selection rate. Every
/// candidate threshold is evaluated on the same random stream.
pub fn empirical_optimal_threshold(
    cfg: &SystemConfig,
    rng: &RngStream,
    mc: &MonteCarlo,
    lo: f64,
    hi: f64,
    opts: &MaximizeOptions,
) -> Result<ThresholdSearch> {
    cfg.validate()?;
    let mut failure = None;
    let best = maximize_1d(
        |s| match simulated_selection_rate(cfg, s, rng, mc) {
            Ok(e) => e.rate.mean,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ThresholdSearch {
        s: best.argmax,
        rate: best.max,
        boundary: best.boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caching::Placement;
    use std::f64::consts::E;

    #[test]
    fn rayleigh_threshold_examples() {
        assert!((optimal_threshold_rayleigh(E).unwrap() - (E - 1.0)).abs() < 1e-12);
        let s = optimal_threshold_rayleigh(1000.0).unwrap();
        assert!((s - 189.5).abs() < 0.1);
        assert!(optimal_threshold_rayleigh(1e-9).unwrap() < 1e-8);
        assert!(optimal_threshold_rayleigh(0.0).is_err());
    }

    #[test]
    fn stationarity_of_rayleigh_threshold() {
        for p in [10.0, 1e2, 1e3, 1e4] {
            let s = optimal_threshold_rayleigh(p).unwrap();
            let f = |x: f64| (-x / p).exp() * x.ln_1p();
            let h = 1e-4 * s.max(1.0);
            let d = (f(s + h) - f(s - h)) / (2.0 * h);
            assert!(d.abs() < 1e-6, "P={p}: derivative {d}");
        }
    }

    #[test]
    fn general_reduces_to_rayleigh() {
        for p in [2.0, 30.0, 1000.0] {
            let s = optimal_threshold_general(|x| 1.0 - (-x / p).exp(), |x| (-x / p).exp() / p, 0.0, 10.0 * p).unwrap();
            assert!((s - optimal_threshold_rayleigh(p).unwrap()).abs() < 1e-9 * s.max(1.0));
        }
    }

    #[test]
    fn general_reports_missing_root() {
        let p = 100.0;
        let r = optimal_threshold_general(|x| 1.0 - (-x / p).exp(), |x| (-x / p).exp() / p, 1.0, 2.0);
        assert!(matches!(r, Err(Error::NoRoot { .. })));
    }

    #[test]
    fn gamma_threshold_maximizes_objective_on_dense_grid() {
        for (nt, p) in [(2usize, 100.0), (4, 30.0), (8, 1000.0)] {
            let snr = GammaSnr { nt, p };
            let s = snr.optimal_threshold().unwrap();
            // dense grid scan of (1 − F(s))·ln(1+s)
            let n = 200_000;
            let hi = 3.0 * p;
            let (mut best_x, mut best_v) = (0.0, f64::NEG_INFINITY);
            for i in 1..=n {
                let x = hi * i as f64 / n as f64;
                let v = snr.survival(x) * x.ln_1p();
                if v > best_v {
                    best_v = v;
                    best_x = x;
                }
            }
            assert!(
                (s - best_x).abs() <= 2.0 * hi / n as f64 + 1e-9 * s,
                "nt={nt} P={p}: {s} vs {best_x}"
            );
        }
    }

    #[test]
    fn simulated_rate_edge_thresholds() {
        let cfg = SystemConfig::new(50, 1, 100.0).with_cache(0.1, Placement::Decentralized);
        let mc = MonteCarlo::new(2000);
        let rng = RngStream::new(4, 0);
        let zero = simulated_selection_rate(&cfg, 0.0, &rng, &mc).unwrap();
        assert_eq!(zero.rate.mean, 0.0);
        assert_eq!(zero.selected_fraction.mean, 1.0);
        let huge = simulated_selection_rate(&cfg, 1e6, &rng, &mc).unwrap();
        assert_eq!(huge.rate.mean, 0.0);
        assert_eq!(huge.selected_fraction.mean, 0.0);
    }

    #[test]
    fn empirical_threshold_is_deterministic_and_finite_for_one_user() {
        let cfg = SystemConfig::new(1, 1, 100.0).with_cache(0.1, Placement::Decentralized);
        let mc = MonteCarlo::new(20_000);
        let rng = RngStream::new(5, 0);
        let opts = MaximizeOptions::default();
        let a = empirical_optimal_threshold(&cfg, &rng, &mc, 0.0, 500.0, &opts).unwrap();
        let b = empirical_optimal_threshold(&cfg, &rng, &mc, 0.0, 500.0, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.s > 0.0 && a.s < 500.0);
    }
}
