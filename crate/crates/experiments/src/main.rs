use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cachecast::Error;
use cachecast_experiments::config::Config;
use cachecast_experiments::output::{write_rows, Format};
use cachecast_experiments::suite::{all_passed, run_property_suite, write_report};
use cachecast_experiments::{runners, Settings};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cachecast",
    version,
    about = "Coded-caching delivery rates over fading broadcast channels"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// TOML file with per-subcommand sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed [default: 42].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo samples per point; overrides the file.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output file; stdout when unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Worker threads for the parallel executor.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Multicast delivery rate against K: no scheduling, selection, log antennas, log sub-channels.
    Fig1,
    /// Selection threshold: closed form against the simulated argmax.
    Fig2,
    /// Multicast, multiplexing and mixed rates against m.
    Fig3,
    /// Optimal mixed rate against m, with the saturation point.
    Fig4,
    /// Regime map over per-user power and m.
    Fig5,
    /// Cartesian sweep from the [sweep] section.
    Sweep,
    /// Run the property suite; exit 2 on any failure.
    Check,
    /// Optimal selection threshold at one point.
    Threshold {
        #[arg(long)]
        power_db: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Optimal power split at one point.
    Split {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        power_db: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        sigma2: Option<f64>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

#[cfg(feature = "parallel")]
fn set_workers(n: usize) -> Result<(), Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn set_workers(_: usize) -> Result<(), Error> {
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    let g = &cli.global;
    if let Some(n) = g.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        set_workers(n)?;
    }
    let mut cfg = match &g.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let s = Settings::from_config(&cfg, g.seed, g.samples);
    let rows = match cli.cmd {
        Cmd::Fig1 => runners::run_fig1(&cfg.fig1, &s)?,
        Cmd::Fig2 => runners::run_fig2(&cfg.fig2, &s)?,
        Cmd::Fig3 => runners::run_fig3(&cfg.fig3, &s)?,
        Cmd::Fig4 => runners::run_fig4(&cfg.fig4, &s)?,
        Cmd::Fig5 => runners::run_fig5(&cfg.fig5, &s)?,
        Cmd::Sweep => runners::run_sweep(&cfg.sweep, &s)?,
        Cmd::Threshold { power_db, k } => {
            if let Some(p) = power_db {
                cfg.threshold.power_db = vec![p];
            }
            if let Some(k) = k {
                cfg.threshold.users = k;
            }
            runners::run_threshold(&cfg.threshold, &s)?
        }
        Cmd::Split {
            k,
            nt,
            power_db,
            m,
            sigma2,
        } => {
            let c = &mut cfg.split;
            c.users = k.unwrap_or(c.users);
            c.antennas = nt.or(c.antennas);
            c.power_db = power_db.unwrap_or(c.power_db);
            c.m = m.unwrap_or(c.m);
            c.sigma2 = sigma2.or(c.sigma2);
            runners::run_split(c, &s)?
        }
        Cmd::Check => {
            let report = run_property_suite(&s);
            write_report(output(&g.out)?, g.format, &report)?;
            return Ok(all_passed(&report));
        }
    };
    write_rows(output(&g.out)?, g.format, &rows)?;
    Ok(true)
}

fn main() -> ExitCode {
    // clap would exit 2 on a usage error, which is the suite-failure code
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
