//! Coded-caching load and equivalent content delivery rates.
//!
//! `T(m, K)` is the delivery-phase load in file units. Dividing the number of
//! demanded files `K` by `T` turns any link rate into the rate at which
//! demanded content (cached parts included) reaches the users.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::estimate::{MonteCarlo, RateEstimate};
use crate::mathx::ln_gamma;
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Centralized,
    Decentralized,
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Placement::Centralized => "centralized",
            Placement::Decentralized => "decentralized",
        })
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "centralized" => Ok(Placement::Centralized),
            "decentralized" => Ok(Placement::Decentralized),
            other => Err(Error::config(format!("unknown placement '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CacheLoad {
    pub placement: Placement,
    pub m: f64,
    pub k: usize,
    pub load: f64,
}

impl CacheLoad {
    pub fn new(placement: Placement, m: f64, k: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Range(format!("cache fraction {m}")));
        }
        if k == 0 {
            return Err(Error::config("K must be >= 1"));
        }
        Ok(Self {
            placement,
            m,
            k,
            load: transmissions(placement, m, k),
        })
    }
}

/// `T(m, K)`: `(1−m)/(1/K + m)` centralized, `(1−m)(1−(1−m)^K)/m`
/// decentralized (equal to `K` at `m = 0`).
pub fn transmissions(placement: Placement, m: f64, k: usize) -> f64 {
    let kf = k as f64;
    if m >= 1.0 {
        return 0.0;
    }
    match placement {
        Placement::Centralized => (1.0 - m) / (1.0 / kf + m),
        Placement::Decentralized => {
            if m <= 0.0 {
                return kf;
            }
            // 1 − (1−m)^K without cancellation for small m
            let miss_all = -(kf * (-m).ln_1p()).exp_m1();
            (1.0 - m) * miss_all / m
        }
    }
}

/// `Rmc = K·r0/T`; infinite once the load vanishes.
pub fn delivery_rate_multicast(load: f64, r0: f64, k: usize) -> f64 {
    if load <= 0.0 {
        return if r0 > 0.0 { f64::INFINITY } else { 0.0 };
    }
    k as f64 * r0 / load
}

/// `Ruc = K·rsym/(1−m)`; infinite at `m = 1`.
pub fn delivery_rate_unicast(m: f64, rsym: f64, k: usize) -> f64 {
    if m >= 1.0 {
        return f64::INFINITY;
    }
    k as f64 * rsym / (1.0 - m)
}

/// Exact CDF table of Binomial(n, p) over its numerically relevant support,
/// inverted with one uniform per draw. Driving every threshold with the same
/// uniforms makes the count, and hence the rate, monotone in `p`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    offset: usize,
    cdf: Vec<f64>,
}

impl BinomialTable {
    pub fn new(n: usize, p: f64) -> Self {
        if p <= 0.0 || n == 0 {
            return Self {
                offset: 0,
                cdf: vec![1.0],
            };
        }
        if p >= 1.0 {
            return Self {
                offset: n,
                cdf: vec![1.0],
            };
        }
        let nf = n as f64;
        let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
        let ln_mode = ln_gamma(nf + 1.0) - ln_gamma(mode as f64 + 1.0) - ln_gamma((n - mode) as f64 + 1.0)
            + mode as f64 * p.ln()
            + (n - mode) as f64 * (-p).ln_1p();
        let odds = p / (1.0 - p);
        let cut = 1e-18;

        let mut below = Vec::new();
        let (mut k, mut w) = (mode, 1.0f64);
        while k > 0 {
            w *= k as f64 / (n - k + 1) as f64 / odds;
            k -= 1;
            if w < cut {
                break;
            }
            below.push(w);
        }
        let mut above = Vec::new();
        let (mut k, mut w) = (mode, 1.0f64);
        while k < n {
            w *= (n - k) as f64 / (k + 1) as f64 * odds;
            k += 1;
            if w < cut {
                break;
            }
            above.push(w);
        }
        let offset = mode - below.len();
        let mut pmf: Vec<f64> = below.into_iter().rev().collect();
        pmf.push(1.0);
        pmf.extend(above);
        let scale = ln_mode.exp();
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for w in pmf {
            acc += w * scale;
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        *cdf.last_mut().unwrap() = 1.0;
        Self { offset, cdf }
    }

    /// Smallest `k` with `F(k) ≥ u`.
    pub fn quantile(&self, u: f64) -> usize {
        self.offset + self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1)
    }
}

/// Rate credited to one multicast to `k_sel` selected users at threshold `s`:
/// `(K*/T_dec(m, K*))·ln(1+s)`, zero when nobody is selected.
pub fn selection_sample_rate(m: f64, s: f64, k_sel: usize) -> f64 {
    if k_sel == 0 {
        return 0.0;
    }
    let t = transmissions(Placement::Decentralized, m, k_sel);
    delivery_rate_multicast(t, s.ln_1p(), k_sel)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionEstimate {
    pub rate: RateEstimate,
    /// Empirical `K*(s)/K`.
    pub selected_fraction: RateEstimate,
}

/// Selection delivery rate when each user independently clears the threshold
/// with probability `above_prob`.
pub fn delivery_rate_selection_with(
    m: f64,
    s: f64,
    above_prob: f64,
    k: usize,
    rng: &RngStream,
    mc: &MonteCarlo,
) -> Result<SelectionEstimate> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Range(format!("cache fraction {m} (selection needs 0 <= m < 1)")));
    }
    if !(s >= 0.0) {
        return Err(Error::Domain {
            function: "delivery_rate_selection",
            value: s,
            expected: "s >= 0",
        });
    }
    let table = BinomialTable::new(k, above_prob);
    let kf = k as f64;
    let cols = mc.run(
        rng,
        2,
        || (),
        |_, r, out| {
            let k_sel = table.quantile(r.random::<f64>());
            out[0] = selection_sample_rate(m, s, k_sel);
            out[1] = k_sel as f64 / kf;
            Ok(())
        },
    )?;
    Ok(SelectionEstimate {
        rate: cols[0],
        selected_fraction: cols[1],
    })
}

/// Selection delivery rate for single-antenna Rayleigh users, where
/// `Pr(snr ≥ s) = e^{−s/P}`.
pub fn delivery_rate_selection(
    m: f64,
    s: f64,
    p: f64,
    k: usize,
    rng: &RngStream,
    mc: &MonteCarlo,
) -> Result<RateEstimate> {
    let q = if p > 0.0 { (-s / p).exp() } else { 0.0 };
    Ok(delivery_rate_selection_with(m, s, q, k, rng, mc)?.rate)
}
