//! Result rows and their CSV / JSON encodings.
//!
//! Non-finite numbers are written as the strings `inf`, `-inf` and `nan` in
//! both formats, so a JSON consumer never sees an invalid literal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use cachecast::{linear_to_db, Error, RateEstimate, Result, SystemConfig};
use serde::{Serialize, Serializer};

pub const ROW_SCHEMA: &str = "cachecast-rows/1";
pub const ROW_COLUMNS: [&str; 13] = [
    "scheme",
    "K",
    "nt",
    "L",
    "P_dB",
    "m",
    "sigma2",
    "P0_frac",
    "mean_nats",
    "std_err",
    "samples",
    "seed",
    "flags",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

fn number<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
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

fn opt_number<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => number(v, s),
        None => s.serialize_none(),
    }
}

/// `key=value` pairs, written sorted and `;`-separated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Flags(BTreeMap<String, String>);

impl Flags {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn parse(s: &str) -> Self {
        Flags(
            s.split(';')
                .filter(|p| !p.is_empty())
                .map(|p| match p.split_once('=') {
                    Some((k, v)) => (k.to_string(), v.to_string()),
                    None => (p.to_string(), String::new()),
                })
                .collect(),
        )
    }
}

impl std::fmt::Display for Flags {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub scheme: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub nt: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "P_dB", serialize_with = "number")]
    pub p_db: f64,
    #[serde(serialize_with = "number")]
    pub m: f64,
    #[serde(serialize_with = "number")]
    pub sigma2: f64,
    #[serde(rename = "P0_frac", serialize_with = "opt_number")]
    pub p0_frac: Option<f64>,
    #[serde(serialize_with = "number")]
    pub mean_nats: f64,
    /// Unset for quantities without a sampling error (argmax searches).
    #[serde(serialize_with = "opt_number")]
    pub std_err: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub flags: String,
}

impl Row {
    /// A row for `cfg` carrying estimate `est`; the shard count goes into
    /// the flags.
    pub fn estimate(scheme: &str, cfg: &SystemConfig, est: &RateEstimate, flags: Flags) -> Self {
        Self {
            scheme: scheme.to_string(),
            k: cfg.num_users,
            nt: cfg.num_tx_antennas,
            l: cfg.num_subchannels,
            p_db: linear_to_db(cfg.total_power),
            m: cfg.cache_fraction,
            sigma2: cfg.csit_error_var,
            p0_frac: None,
            mean_nats: est.mean,
            std_err: Some(est.std_err),
            samples: est.samples,
            seed: est.seed,
            flags: flags.set("shards", est.shards).to_string(),
        }
    }

    /// A deterministic value (closed form): zero error, zero samples.
    pub fn exact(scheme: &str, cfg: &SystemConfig, value: f64, seed: u64, flags: Flags) -> Self {
        Self {
            scheme: scheme.to_string(),
            k: cfg.num_users,
            nt: cfg.num_tx_antennas,
            l: cfg.num_subchannels,
            p_db: linear_to_db(cfg.total_power),
            m: cfg.cache_fraction,
            sigma2: cfg.csit_error_var,
            p0_frac: None,
            mean_nats: value,
            std_err: Some(0.0),
            samples: 0,
            seed,
            flags: flags.to_string(),
        }
    }

    pub fn with_p0_frac(self, frac: f64) -> Self {
        Self {
            p0_frac: Some(frac),
            ..self
        }
    }

    pub fn flags(&self) -> Flags {
        Flags::parse(&self.flags)
    }

    fn cmp_key(&self, o: &Row) -> Ordering {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => a.total_cmp(&b),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        self.scheme
            .cmp(&o.scheme)
            .then(self.k.cmp(&o.k))
            .then(self.nt.cmp(&o.nt))
            .then(self.l.cmp(&o.l))
            .then(self.p_db.total_cmp(&o.p_db))
            .then(self.m.total_cmp(&o.m))
            .then(self.sigma2.total_cmp(&o.sigma2))
            .then(opt(self.p0_frac, o.p0_frac))
            .then(self.flags.cmp(&o.flags))
    }
}

/// Sorts by scheme, then parameter point, so output never depends on which
/// worker finished first.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(Row::cmp_key);
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("output: {e}"))
}

/// CSV with a leading `# schema=… columns=…` comment line.
pub fn write_csv<W: Write>(w: W, schema: &str, columns: &[&str], rows: &[impl Serialize]) -> Result<()> {
    let mut w = w;
    writeln!(w, "# schema={schema} columns={}", columns.join(",")).map_err(io)?;
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    csv.write_record(columns).map_err(io)?;
    for r in rows {
        csv.serialize(r).map_err(io)?;
    }
    csv.flush().map_err(io)
}

pub fn write_json<W: Write>(mut w: W, rows: &[impl Serialize]) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, rows).map_err(io)?;
    writeln!(w).map_err(io)
}

pub fn write_rows<W: Write>(w: W, format: Format, rows: &[Row]) -> Result<()> {
    match format {
        Format::Csv => write_csv(w, ROW_SCHEMA, &ROW_COLUMNS, rows),
        Format::Json => write_json(w, rows),
    }
}
