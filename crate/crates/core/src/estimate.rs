//! Sharded Monte-Carlo estimation.
//!
//! Samples are split into a fixed number of shards. Shard `i` draws from
//! `rng.substream(i)` and keeps its own running moments; the shards are then
//! merged in index order. The result therefore depends on
//! `(seed, stream, samples, shards)` only, never on the thread schedule, and
//! parallel and sequential execution agree bit for bit.

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
    pub seed: u64,
    pub shards: usize,
}

impl RateEstimate {
    /// A deterministic value carried in estimate form (zero error).
    pub fn exact(value: f64, seed: u64) -> Self {
        Self {
            mean: value,
            std_err: 0.0,
            samples: 1,
            seed,
            shards: 1,
        }
    }

    /// Scales mean and error by a constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            std_err: self.std_err * factor.abs(),
            ..self
        }
    }

    /// `|self − other| ≤ k·sqrt(se₁² + se₂²)`.
    pub fn agrees_with(&self, other: &RateEstimate, k: f64) -> bool {
        let joint = self.std_err.hypot(other.std_err);
        (self.mean - other.mean).abs() <= k * joint
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    /// Shards run on the rayon pool (sequentially if the `parallel` feature is off).
    #[cfg_attr(feature = "parallel", default)]
    Parallel,
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
}

impl Execution {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect(),
            _ => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub shards: usize,
    pub execution: Execution,
}

impl MonteCarlo {
    pub const DEFAULT_SHARDS: usize = 16;

    pub fn new(samples: usize) -> Self {
        Self {
            samples,
            shards: Self::DEFAULT_SHARDS,
            execution: Execution::default(),
        }
    }

    pub fn with_shards(self, shards: usize) -> Self {
        Self { shards, ..self }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        Self { execution, ..self }
    }

    pub fn sequential(self) -> Self {
        self.with_execution(Execution::Sequential)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::config("samples must be >= 1"));
        }
        if self.shards == 0 {
            return Err(Error::config("shards must be >= 1"));
        }
        Ok(())
    }

    fn shard_sizes(&self) -> Vec<usize> {
        let shards = self.shards.min(self.samples).max(1);
        let base = self.samples / shards;
        let extra = self.samples % shards;
        (0..shards).map(|i| base + usize::from(i < extra)).collect()
    }

    /// Runs `shard(index, sample_count, stream)` once per shard, each on its
    /// own substream, and returns the results in shard order.
    pub fn map_shards<T, F>(&self, rng: &RngStream, shard: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, usize, &mut RngStream) -> Result<T> + Sync + Send,
    {
        self.validate()?;
        let sizes = self.shard_sizes();
        self.execution
            .map(&sizes, |i, &n| shard(i, n, &mut rng.substream(i as u64)))
            .into_iter()
            .collect()
    }

    /// Runs `body` once per sample. Each call writes `width` values into its
    /// output slice; one estimate per column is returned.
    ///
    /// `init` builds per-shard scratch state (buffers, workspaces) that the
    /// body may reuse across samples.
    pub fn run<S, I, F>(&self, rng: &RngStream, width: usize, init: I, body: F) -> Result<Vec<RateEstimate>>
    where
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &mut RngStream, &mut [f64]) -> Result<()> + Sync + Send,
    {
        let parts = self.map_shards(rng, |_, n, stream| {
            let mut state = init();
            let mut out = vec![0.0; width];
            let mut acc = vec![Moments::default(); width];
            for _ in 0..n {
                body(&mut state, stream, &mut out)?;
                for (a, &x) in acc.iter_mut().zip(&out) {
                    a.push(x);
                }
            }
            Ok(acc)
        })?;
        let shards = parts.len();
        let mut total = vec![Moments::default(); width];
        for part in parts {
            for (t, p) in total.iter_mut().zip(part) {
                t.merge(&p);
            }
        }
        Ok(total.iter().map(|m| m.estimate(rng.seed(), shards)).collect())
    }

    /// Single-column convenience wrapper around [`MonteCarlo::run`].
    pub fn estimate<S, I, F>(&self, rng: &RngStream, init: I, body: F) -> Result<RateEstimate>
    where
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &mut RngStream) -> Result<f64> + Sync + Send,
    {
        let cols = self.run(rng, 1, init, |s, r, out| {
            out[0] = body(s, r)?;
            Ok(())
        })?;
        Ok(cols[0])
    }
}

/// Running mean and centered second moment (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        self.mean += d * w;
        self.m2 += o.m2 + d * d * self.n as f64 * w;
        self.n = n;
    }

    pub fn estimate(&self, seed: u64, shards: usize) -> RateEstimate {
        RateEstimate {
            mean: self.mean,
            std_err: self.std_err(),
            samples: self.n as usize,
            seed,
            shards,
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n < 2 || !self.m2.is_finite() {
            return if self.m2.is_nan() { f64::NAN } else { 0.0 };
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn uniform_mean_and_error() {
        let mc = MonteCarlo::new(40_000);
        let est = mc
            .estimate(&RngStream::new(1, 0), || (), |_, r| Ok(r.random::<f64>()))
            .unwrap();
        assert!((est.mean - 0.5).abs() < 4.0 * est.std_err);
        let expected_se = (1.0f64 / 12.0 / 40_000.0).sqrt();
        assert!((est.std_err / expected_se - 1.0).abs() < 0.05);
        assert_eq!(est.samples, 40_000);
        assert_eq!(est.seed, 1);
    }

    #[test]
    fn execution_modes_agree_bitwise() {
        let rng = RngStream::new(9, 4);
        let body = |_: &mut (), r: &mut RngStream| Ok(r.random::<f64>().powi(3));
        let a = MonteCarlo::new(10_001).estimate(&rng, || (), body).unwrap();
        let b = MonteCarlo::new(10_001)
            .sequential()
            .estimate(&rng, || (), body)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shard_count_is_part_of_the_key() {
        let rng = RngStream::new(9, 0);
        let body = |_: &mut (), r: &mut RngStream| Ok(r.random::<f64>());
        let a = MonteCarlo::new(1000)
            .with_shards(4)
            .estimate(&rng, || (), body)
            .unwrap();
        let b = MonteCarlo::new(1000)
            .with_shards(8)
            .estimate(&rng, || (), body)
            .unwrap();
        assert_ne!(a.mean, b.mean);
    }

    #[test]
    fn merged_moments_match_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut parts = [Moments::default(); 3];
        for (i, &x) in xs.iter().enumerate() {
            parts[i % 3].push(x);
        }
        let mut all = Moments::default();
        for p in &parts {
            all.merge(p);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((all.mean - mean).abs() < 1e-12);
        assert!((all.std_err() - (var / n).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn more_shards_than_samples() {
        let mc = MonteCarlo::new(3).with_shards(16);
        let est = mc.estimate(&RngStream::new(0, 0), || (), |_, _| Ok(2.0)).unwrap();
        assert_eq!(est.mean, 2.0);
        assert_eq!(est.std_err, 0.0);
        assert_eq!(est.shards, 3);
    }

    #[test]
    fn zero_samples_is_a_config_error() {
        let mc = MonteCarlo::new(0);
        assert!(matches!(
            mc.estimate(&RngStream::new(0, 0), || (), |_, _| Ok(0.0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn body_errors_propagate() {
        let mc = MonteCarlo::new(10);
        let r = mc.estimate(&RngStream::new(0, 0), || (), |_, _| Err(Error::config("boom")));
        assert!(r.is_err());
    }
}
