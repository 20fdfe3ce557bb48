//! Run configuration.
//!
//! One TOML file with a section per subcommand. Every key is optional;
//! command-line flags win over the file, the file over built-in defaults.
//! Powers are given in dB here and converted once, when a runner builds its
//! [`SystemConfig`](cachecast::SystemConfig).

use std::path::Path;

use cachecast::mixed::{CsitRule, SPLIT_GRID_POINTS};
use cachecast::{Error, Execution, MonteCarlo, Placement, Result};
use serde::Deserialize;

pub const DEFAULT_SEED: u64 = 42;

/// A list of values, or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Grid::Range { start, stop, step }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                    return Err(Error::Config(format!("bad range {start}..={stop} step {step}")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        Ok(v)
    }
}

impl From<Vec<f64>> for Grid {
    fn from(v: Vec<f64>) -> Self {
        Grid::List(v)
    }
}

/// How a dimension follows the user count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimRule {
    /// `⌊ln K⌋`, at least one.
    FloorLnK,
    /// `⌈ln K⌉ + 1`
    CeilLnKPlusOne,
    /// `⌈ln² K⌉`
    CeilLnSquaredK,
    Users,
    TwiceUsers,
}

impl DimRule {
    pub fn apply(self, k: usize) -> usize {
        let ln = (k as f64).ln();
        match self {
            DimRule::FloorLnK => (ln.floor() as usize).max(1),
            DimRule::CeilLnKPlusOne => ln.ceil() as usize + 1,
            DimRule::CeilLnSquaredK => (ln.powi(2).ceil() as usize).max(1),
            DimRule::Users => k,
            DimRule::TwiceUsers => 2 * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Coded multicast over the quasi-static (or L-parallel) link: `Rmc`.
    Multicast,
    /// Multicast to threshold-selected users at the optimal threshold.
    Selection,
    /// ZF spatial multiplexing: `Ruc`.
    Multiplex,
    /// Common plus private streams at the optimal split: `Rmix`.
    Mixed,
    /// Link rate `R̄₀`.
    R0,
    /// Link rate `R̄sym`.
    Rsym,
    R0Asymptotic,
    RsymAsymptotic,
}

impl Scheme {
    pub fn id(self) -> &'static str {
        match self {
            Scheme::Multicast => "multicast",
            Scheme::Selection => "selection",
            Scheme::Multiplex => "multiplex",
            Scheme::Mixed => "mixed",
            Scheme::R0 => "r0",
            Scheme::Rsym => "rsym",
            Scheme::R0Asymptotic => "r0_asymptotic",
            Scheme::RsymAsymptotic => "rsym_asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub users: Vec<usize>,
    pub power_db: Vec<f64>,
    pub m: f64,
    /// Placement of the schemes without selection; selection is always
    /// decentralized.
    pub placement: Placement,
    pub samples: Option<usize>,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            users: vec![50, 100, 200, 400, 800],
            power_db: vec![30.0, 40.0],
            m: 0.05,
            placement: Placement::Centralized,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub users: Vec<usize>,
    pub power_db: Vec<f64>,
    pub m: f64,
    pub samples: Option<usize>,
    pub grid_points: usize,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            users: vec![100, 300, 1000, 3000, 10_000],
            power_db: vec![30.0, 40.0, 50.0],
            m: 0.05,
            samples: None,
            grid_points: 41,
        }
    }
}

/// Shared shape of the mixed-delivery figures. Unset grids fall back to the
/// figure's own preset.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixedFigConfig {
    pub users: usize,
    /// Defaults to `users`.
    pub antennas: Option<usize>,
    pub per_user_power_db: Option<Grid>,
    pub m: Option<Grid>,
    /// Fixed `σ²`; unset means `σ² = (P/K)⁻¹`.
    pub sigma2: Option<f64>,
    pub placement: Placement,
    pub samples: Option<usize>,
    pub grid_points: usize,
}

impl Default for MixedFigConfig {
    fn default() -> Self {
        Self {
            users: 100,
            antennas: None,
            per_user_power_db: None,
            m: None,
            sigma2: None,
            placement: Placement::Centralized,
            samples: None,
            grid_points: SPLIT_GRID_POINTS,
        }
    }
}

impl MixedFigConfig {
    pub fn csit(&self) -> CsitRule {
        match self.sigma2 {
            Some(_) => CsitRule::Fixed,
            None => CsitRule::InversePerUserPower,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub schemes: Vec<Scheme>,
    pub users: Vec<usize>,
    pub antennas: Vec<usize>,
    /// Overrides `antennas`.
    pub antenna_rule: Option<DimRule>,
    pub subchannels: Vec<usize>,
    /// Overrides `subchannels`.
    pub subchannel_rule: Option<DimRule>,
    pub power_db: Grid,
    pub m: Grid,
    pub sigma2: Grid,
    /// `inverse_per_user_power` replaces `sigma2` by `min(1, K/P)`.
    pub sigma2_rule: CsitRule,
    pub placement: Placement,
    pub samples: Option<usize>,
    pub grid_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Multicast],
            users: vec![100],
            antennas: vec![1],
            antenna_rule: None,
            subchannels: vec![1],
            subchannel_rule: None,
            power_db: Grid::List(vec![10.0]),
            m: Grid::List(vec![0.05]),
            sigma2: Grid::List(vec![0.0]),
            sigma2_rule: CsitRule::Fixed,
            placement: Placement::Centralized,
            samples: None,
            grid_points: SPLIT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub power_db: Vec<f64>,
    /// Users in the empirical search.
    pub users: usize,
    pub m: f64,
    pub samples: Option<usize>,
    pub grid_points: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            power_db: vec![30.0],
            users: 10_000,
            m: 0.05,
            samples: None,
            grid_points: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub users: usize,
    pub antennas: Option<usize>,
    pub power_db: f64,
    pub m: f64,
    /// Unset means `σ² = min(1, K/P)`.
    pub sigma2: Option<f64>,
    pub placement: Placement,
    pub samples: Option<usize>,
    pub grid_points: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            users: 100,
            antennas: None,
            power_db: 40.0,
            m: 0.05,
            sigma2: None,
            placement: Placement::Centralized,
            samples: None,
            grid_points: SPLIT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    /// Applies to every section that does not set its own.
    pub samples: Option<usize>,
    pub shards: usize,
    pub fig1: Fig1Config,
    pub fig2: Fig2Config,
    pub fig3: MixedFigConfig,
    pub fig4: MixedFigConfig,
    pub fig5: MixedFigConfig,
    pub sweep: SweepConfig,
    pub threshold: ThresholdConfig,
    pub split: SplitConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: None,
            samples: None,
            shards: MonteCarlo::DEFAULT_SHARDS,
            fig1: Fig1Config::default(),
            fig2: Fig2Config::default(),
            fig3: MixedFigConfig::default(),
            fig4: MixedFigConfig::default(),
            fig5: MixedFigConfig::default(),
            sweep: SweepConfig::default(),
            threshold: ThresholdConfig::default(),
            split: SplitConfig::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Seed, shard layout and sample override shared by every runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    pub seed: u64,
    pub shards: usize,
    /// From `--samples`; beats every file value.
    pub samples: Option<usize>,
    /// Top-level `samples` of the file.
    pub file_samples: Option<usize>,
    pub execution: Execution,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            shards: MonteCarlo::DEFAULT_SHARDS,
            samples: None,
            file_samples: None,
            execution: Execution::default(),
        }
    }
}

impl Settings {
    pub fn from_config(cfg: &Config, seed: Option<u64>, samples: Option<usize>) -> Self {
        Self {
            seed: seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
            shards: cfg.shards,
            samples,
            file_samples: cfg.samples,
            execution: Execution::default(),
        }
    }

    pub fn with_samples(self, samples: usize) -> Self {
        Self {
            samples: Some(samples),
            ..self
        }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        Self { execution, ..self }
    }

    pub fn samples_for(&self, section: Option<usize>, default: usize) -> usize {
        self.samples.or(section).or(self.file_samples).unwrap_or(default)
    }

    pub fn monte_carlo(&self, samples: usize) -> Result<MonteCarlo> {
        let mc = MonteCarlo::new(samples)
            .with_shards(self.shards)
            .with_execution(self.execution);
        mc.validate()?;
        Ok(mc)
    }
}
