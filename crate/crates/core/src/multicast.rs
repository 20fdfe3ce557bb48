//! Long-term average multicast rate `R̄₀`.
//!
//! Isotropic signaling `Q₀ = (P/nt)·I`, so the common message is limited by
//! the weakest user: `R̄₀ = E[ln(1 + (P/nt)·min_k ‖H_k‖²)]`. Over `L` parallel
//! sub-channels each user averages its log-rate first and the minimum is
//! taken afterwards.

use serde::{Deserialize, Serialize};

use crate::channel::{extreme_value_scale, ChannelDraw, SystemConfig};
use crate::estimate::{MonteCarlo, RateEstimate};
use crate::linalg::norm_sq;
use crate::mathx::gamma;
use crate::rng::RngStream;
use crate::{Error, Result};

/// Multiplicative band separating the asymptotic cases at finite parameters:
/// a driving quantity below `1/BAND` counts as vanishing, above `BAND` as growing.
pub const REGIME_BAND: f64 = 10.0;

/// `a_K = nt·(K/nt!)^{1/nt}`.
pub fn a_k(nt: usize, k: usize) -> f64 {
    extreme_value_scale(nt, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayRegime {
    /// `nt < ln K`
    SmallArray,
    /// `nt ≥ ln K`
    LargeArray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerRegime {
    Vanishing,
    Constant,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub a_k: f64,
    pub regime: ArrayRegime,
    pub power_regime: PowerRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRate {
    /// Representative inside the Θ(·) of the selected asymptotic case.
    pub value: f64,
    pub params: AsymptoticParams,
}

fn require_single_channel(cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.num_subchannels != 1 {
        return Err(Error::config(format!(
            "quasi-static rate needs L = 1, got L = {}",
            cfg.num_subchannels
        )));
    }
    Ok(())
}

/// `ln(1 + (P/nt)·min_k ‖H_k‖²)` on sub-channel 0 of one draw.
pub fn quasistatic_sample(cfg: &SystemConfig, draw: &ChannelDraw) -> f64 {
    let scale = cfg.total_power / cfg.num_tx_antennas as f64;
    let h = &draw.true_h[0];
    let min = (0..h.rows())
        .map(|k| scale * norm_sq(h.row(k)))
        .fold(f64::INFINITY, f64::min);
    min.ln_1p()
}

/// Monte-Carlo `R̄₀` for the quasi-static channel.
pub fn avg_rate_quasistatic(cfg: &SystemConfig, rng: &RngStream, mc: &MonteCarlo) -> Result<RateEstimate> {
    require_single_channel(cfg)?;
    mc.estimate(
        rng,
        || ChannelDraw::zeros(cfg),
        |draw, r| {
            draw.resample(cfg, r);
            Ok(quasistatic_sample(cfg, draw))
        },
    )
}

/// `R̄₀` for every user count in `ks` on nested user sets: each draw serves
/// `max(ks)` users and user count `K` sees the first `K` of them, so the
/// estimates are pathwise nonincreasing in `K`.
pub fn avg_rate_quasistatic_nested(
    cfg: &SystemConfig,
    ks: &[usize],
    rng: &RngStream,
    mc: &MonteCarlo,
) -> Result<Vec<RateEstimate>> {
    let k_max = ks
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::config("empty user grid"))?;
    if ks.contains(&0) {
        return Err(Error::config("user counts must be >= 1"));
    }
    let big = cfg.with_users(k_max);
    require_single_channel(&big)?;
    let scale = cfg.total_power / cfg.num_tx_antennas as f64;
    mc.run(
        rng,
        ks.len(),
        || (ChannelDraw::zeros(&big), vec![0.0; k_max]),
        |(draw, prefix), r, out| {
            draw.resample(&big, r);
            let h = &draw.true_h[0];
            let mut running = f64::INFINITY;
            for k in 0..k_max {
                running = running.min(scale * norm_sq(h.row(k)));
                prefix[k] = running;
            }
            for (o, &k) in out.iter_mut().zip(ks) {
                *o = prefix[k - 1].ln_1p();
            }
            Ok(())
        },
    )
}

/// Per-draw value of the L-parallel rate and its two concavity bounds.
fn parallel_sample(cfg: &SystemConfig, draw: &ChannelDraw) -> (f64, f64, f64) {
    let l_count = cfg.num_subchannels as f64;
    let nt = cfg.num_tx_antennas;
    let p = cfg.total_power;
    let scale = p / nt as f64;
    let ln_norm = l_count * nt as f64;
    let (mut rate, mut lower, mut upper_arg) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for k in 0..cfg.num_users {
        let (mut avg_log, mut avg_snr, mut antenna_log) = (0.0, 0.0, 0.0);
        for h in &draw.true_h {
            let row = h.row(k);
            let snr = scale * norm_sq(row);
            avg_log += snr.ln_1p();
            avg_snr += snr;
            antenna_log += row.iter().map(|z| (p * z.norm_sqr()).ln_1p()).sum::<f64>();
        }
        rate = rate.min(avg_log / l_count);
        upper_arg = upper_arg.min(avg_snr / l_count);
        lower = lower.min(antenna_log / ln_norm);
    }
    (rate, lower, upper_arg.ln_1p())
}

/// Monte-Carlo `R̄₀ = E[min_k (1/L) Σ_l ln(1 + snr_{k,l})]`.
pub fn avg_rate_parallel(cfg: &SystemConfig, rng: &RngStream, mc: &MonteCarlo) -> Result<RateEstimate> {
    cfg.validate()?;
    mc.estimate(
        rng,
        || ChannelDraw::zeros(cfg),
        |draw, r| {
            draw.resample(cfg, r);
            Ok(parallel_sample(cfg, draw).0)
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelBounds {
    /// `E[min_k (1/(L·nt)) Σ_{l,j} ln(1 + P|H_{j,k,l}|²)]`
    pub lower: RateEstimate,
    pub rate: RateEstimate,
    /// `E[ln(1 + min_k (1/(L·nt)) Σ_{l,j} P|H_{j,k,l}|²)]`
    pub upper: RateEstimate,
    /// `rate − lower` and `upper − rate`, estimated on the same draws.
    pub lower_gap: RateEstimate,
    pub upper_gap: RateEstimate,
}

/// The L-parallel rate together with its Jensen bounds, all on the same draws.
/// Both bounds hold draw by draw, so the gaps are nonnegative samplewise.
pub fn parallel_rate_bounds(cfg: &SystemConfig, rng: &RngStream, mc: &MonteCarlo) -> Result<ParallelBounds> {
    cfg.validate()?;
    let cols = mc.run(
        rng,
        5,
        || ChannelDraw::zeros(cfg),
        |draw, r, out| {
            draw.resample(cfg, r);
            let (rate, lower, upper) = parallel_sample(cfg, draw);
            out.copy_from_slice(&[lower, rate, upper, rate - lower, upper - rate]);
            Ok(())
        },
    )?;
    Ok(ParallelBounds {
        lower: cols[0],
        rate: cols[1],
        upper: cols[2],
        lower_gap: cols[3],
        upper_gap: cols[4],
    })
}

/// Asymptotic representative of `R̄₀` for large `K`.
///
/// Small arrays (`nt < ln K`) are driven by `P·K^{−1/nt}`, large arrays by
/// `P`. A driver below `1/REGIME_BAND` is vanishing, above `REGIME_BAND`
/// growing, constant in between.
pub fn asymptotic_rate(cfg: &SystemConfig) -> AsymptoticRate {
    let nt = cfg.num_tx_antennas;
    let k = cfg.num_users;
    let p = cfg.total_power;
    let a = a_k(nt, k);
    let regime = if (nt as f64) < (k as f64).ln() {
        ArrayRegime::SmallArray
    } else {
        ArrayRegime::LargeArray
    };
    let driver = match regime {
        ArrayRegime::SmallArray => p * (k as f64).powf(-1.0 / nt as f64),
        ArrayRegime::LargeArray => p,
    };
    let power_regime = if driver < 1.0 / REGIME_BAND {
        PowerRegime::Vanishing
    } else if driver > REGIME_BAND {
        PowerRegime::Growing
    } else {
        PowerRegime::Constant
    };
    let value = match (regime, power_regime) {
        (ArrayRegime::SmallArray, PowerRegime::Vanishing) => p / a * gamma(1.0 + 1.0 / nt as f64),
        (ArrayRegime::SmallArray, _) => (p / a * gamma(1.0 + 1.0 / nt as f64)).ln_1p(),
        (ArrayRegime::LargeArray, PowerRegime::Vanishing) => p,
        (ArrayRegime::LargeArray, _) => p.ln_1p(),
    };
    AsymptoticRate {
        value,
        params: AsymptoticParams {
            a_k: a,
            regime,
            power_regime,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathx::exp_integral_e1;

    #[test]
    fn single_user_closed_form() {
        let cfg = SystemConfig::new(1, 1, 10.0);
        let mc = MonteCarlo::new(100_000);
        let est = avg_rate_quasistatic(&cfg, &RngStream::new(42, 0), &mc).unwrap();
        // E[ln(1 + P·X)], X ~ Exp(1), equals e^{1/P} E1(1/P)
        let exact = 0.1f64.exp() * exp_integral_e1(0.1).unwrap();
        assert!((exact - 2.015).abs() < 1e-3);
        assert!((est.mean - exact).abs() < 3.0 * est.std_err);
    }

    #[test]
    fn zero_power_gives_zero() {
        let cfg = SystemConfig::new(5, 2, 0.0);
        let est = avg_rate_quasistatic(&cfg, &RngStream::new(1, 0), &MonteCarlo::new(100)).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn quasistatic_rejects_parallel_channels() {
        let cfg = SystemConfig::new(5, 2, 1.0).with_subchannels(2);
        assert!(matches!(
            avg_rate_quasistatic(&cfg, &RngStream::new(1, 0), &MonteCarlo::new(10)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn parallel_reduces_to_quasistatic() {
        let cfg = SystemConfig::new(20, 3, 5.0).with_csit_error(0.2);
        let rng = RngStream::new(8, 1);
        let mc = MonteCarlo::new(2000);
        let a = avg_rate_quasistatic(&cfg, &rng, &mc).unwrap();
        let b = avg_rate_parallel(&cfg, &rng, &mc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nested_matches_direct_for_largest_k() {
        let cfg = SystemConfig::new(1, 2, 3.0);
        let rng = RngStream::new(3, 0);
        let mc = MonteCarlo::new(500);
        let nested = avg_rate_quasistatic_nested(&cfg, &[5, 50], &rng, &mc).unwrap();
        let direct = avg_rate_quasistatic(&cfg.with_users(50), &rng, &mc).unwrap();
        assert_eq!(nested[1], direct);
        assert!(nested[0].mean >= nested[1].mean);
    }

    #[test]
    fn bounds_collapse_for_single_antenna_single_channel() {
        let cfg = SystemConfig::new(10, 1, 4.0);
        let b = parallel_rate_bounds(&cfg, &RngStream::new(2, 0), &MonteCarlo::new(1000)).unwrap();
        assert!((b.lower.mean - b.rate.mean).abs() < 1e-12);
        assert!((b.upper.mean - b.rate.mean).abs() < 1e-12);
    }

    #[test]
    fn table_one_examples() {
        let r = asymptotic_rate(&SystemConfig::new(1000, 1, 10.0));
        assert!((r.value - 0.01).abs() < 1e-12);
        assert_eq!(r.params.regime, ArrayRegime::SmallArray);
        assert_eq!(r.params.power_regime, PowerRegime::Vanishing);

        let r = asymptotic_rate(&SystemConfig::new(100, 2, 1e4));
        let a = 2.0 * 50f64.sqrt();
        assert!((r.params.a_k - a).abs() < 1e-12);
        let want = (1e4 / a * std::f64::consts::PI.sqrt() / 2.0).ln_1p();
        assert!((r.value - want).abs() < 1e-12);
        assert_eq!(r.params.power_regime, PowerRegime::Growing);

        let k = 1000usize;
        let nt = (k as f64).ln().ceil() as usize;
        let r = asymptotic_rate(&SystemConfig::new(k, nt, 1.0));
        assert_eq!(r.params.regime, ArrayRegime::LargeArray);
        assert_eq!(r.params.power_regime, PowerRegime::Constant);
        assert!((r.value - 2f64.ln()).abs() < 1e-15);
    }
}
