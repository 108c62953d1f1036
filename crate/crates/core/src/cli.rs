//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, RegimeChoice};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_per, SimOptions};
use crate::overhead::{SnrSpec, SystemConfig, Variant};
use crate::per::{evaluate, AnalyticOptions};
use crate::sweep::{
    convexity_verdicts, parse_values, run_sweep, write_rows, write_verdicts, Axis, Row, SweepSpec,
};
use crate::validate;

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "FBLNET_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "fblnet",
    version,
    about = "Packet error rate of cooperative TDMA networks under finite and infinite blocklength coding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the analytic PER, one row per variant and regime.
    Analytic(Scenario),
    /// Estimate the PER by Monte Carlo simulation.
    Simulate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        frames: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only count scheduling failures.
        #[arg(long)]
        no_decoding_errors: bool,
    },
    /// Sweep one parameter across variants and regimes.
    Sweep {
        #[command(flatten)]
        scenario: Scenario,
        /// eps_star, payload_bits, snr_db, terminals, bandwidth_hz, alpha_symbols or beta_bits.
        #[arg(long)]
        axis: String,
        /// `a,b,c` or `start:stop:count[:lin|log]`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// For eps_star sweeps, append one convexity verdict per FBL curve.
        #[arg(long)]
        check_convexity: bool,
    },
    /// Run the built-in invariant checks.
    Validate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
        frames: u64,
    },
}

#[derive(Debug, Args)]
pub struct Scenario {
    /// TOML scenario file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// fbl, ibl or both.
    #[arg(long)]
    pub regime: Option<String>,
    /// Comma-separated variants.
    #[arg(long, value_delimiter = ',')]
    pub variant: Vec<String>,
    /// Comma-separated antenna or relay counts.
    #[arg(long, value_delimiter = ',')]
    pub j: Vec<usize>,
    #[arg(long)]
    pub eps_star: Option<f64>,
    #[arg(long)]
    pub bandwidth_hz: Option<f64>,
    #[arg(long)]
    pub cycle_s: Option<f64>,
    #[arg(long)]
    pub terminals: Option<usize>,
    #[arg(long)]
    pub payload_bits: Option<f64>,
    #[arg(long)]
    pub alpha_symbols: Option<f64>,
    #[arg(long)]
    pub beta_bits: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Use `1 − (1 − ε*)²` for two-hop decoding errors instead of `2ε*`.
    #[arg(long)]
    pub exact_two_hop: bool,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A scenario file with every flag applied.
struct Resolved {
    base: SystemConfig,
    variants: Vec<Variant>,
    js: Vec<usize>,
    regime: RegimeChoice,
    opts: AnalyticOptions,
}

impl Scenario {
    fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(p) => config::load(p)?,
            None => config::Scenario {
                config: SystemConfig::default(),
                regime: None,
            },
        };
        let mut c = file.config;
        macro_rules! set {
            ($flag:ident, $field:ident) => {
                if let Some(v) = self.$flag {
                    c.$field = v;
                }
            };
        }
        set!(eps_star, eps_star);
        set!(bandwidth_hz, bandwidth_hz);
        set!(cycle_s, cycle_s);
        set!(terminals, terminals);
        set!(payload_bits, base_payload_bits);
        set!(alpha_symbols, alpha_symbols);
        set!(beta_bits, beta_bits);
        if let Some(db) = self.snr_db {
            c.snr = SnrSpec::Homogeneous { db };
        }
        let variants = if self.variant.is_empty() {
            vec![c.variant]
        } else {
            self.variant
                .iter()
                .map(|v| v.parse())
                .collect::<Result<Vec<Variant>>>()?
        };
        let js = if self.j.is_empty() {
            vec![c.j]
        } else {
            self.j.clone()
        };
        let regime = match &self.regime {
            Some(r) => r.parse()?,
            None => file.regime.unwrap_or_default(),
        };
        Ok(Resolved {
            base: c,
            variants,
            js,
            regime,
            opts: AnalyticOptions {
                exact_two_hop: self.exact_two_hop,
            },
        })
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
                Error::Config(format!("cannot create {}: {e}", p.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

impl Resolved {
    fn spec(&self, axis: Axis, values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            axis,
            values,
            variants: self.variants.clone(),
            js: self.js.clone(),
            regimes: self.regime.regimes(),
        }
    }

    /// Scenario combinations for the single-point commands.
    fn points(&self) -> Vec<(SystemConfig, crate::overhead::Regime)> {
        self.spec(Axis::EpsStar, vec![self.base.eps_star])
            .points(&self.base)
    }
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got `{s}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    let pool = b
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs a parsed command line. Returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let workers = workers_from_env()?;
    match cli.command {
        Command::Analytic(s) => {
            let r = s.resolve()?;
            let rows = r
                .points()
                .iter()
                .map(|(c, reg)| {
                    c.validate()?;
                    Ok(Row::analytic(c, &evaluate(c, *reg, r.opts)?))
                })
                .collect::<Result<Vec<_>>>()?;
            write_rows(s.output()?, &rows)?;
        }
        Command::Simulate {
            scenario,
            frames,
            seed,
            no_decoding_errors,
        } => {
            let r = scenario.resolve()?;
            let opts = SimOptions {
                decoding_failures: !no_decoding_errors,
            };
            let rows = r
                .points()
                .iter()
                .map(|(c, reg)| {
                    let est = estimate_per(c, *reg, frames, seed, workers, opts)?;
                    Ok(Row::monte_carlo(c, *reg, &est))
                })
                .collect::<Result<Vec<_>>>()?;
            write_rows(scenario.output()?, &rows)?;
        }
        Command::Sweep {
            scenario,
            axis,
            values,
            check_convexity,
        } => {
            let r = scenario.resolve()?;
            let axis: Axis = axis.parse()?;
            let spec = r.spec(axis, parse_values(&values)?);
            let rows = in_pool(workers, || run_sweep(&r.base, &spec, r.opts))??;
            let mut out = scenario.output()?;
            write_rows(&mut out, &rows)?;
            if check_convexity {
                if axis != Axis::EpsStar {
                    return Err(Error::Config(
                        "--check-convexity needs --axis eps_star".into(),
                    ));
                }
                write_verdicts(&mut out, &convexity_verdicts(&spec, &rows))?;
            }
            out.flush()
                .map_err(|e| Error::Config(format!("write failed: {e}")))?;
        }
        Command::Validate { scenario, frames } => {
            let r = scenario.resolve()?;
            let checks = in_pool(workers, || validate::run_all(&r.base, frames, workers))??;
            let mut out = scenario.output()?;
            let mut w = csv::Writer::from_writer(&mut out);
            let io_err = |e: csv::Error| Error::Config(format!("write failed: {e}"));
            w.write_record(["check", "status", "detail"])
                .map_err(io_err)?;
            for c in &checks {
                w.write_record([c.name, if c.pass { "pass" } else { "fail" }, &c.detail])
                    .map_err(io_err)?;
            }
            w.flush()
                .map_err(|e| Error::Config(format!("write failed: {e}")))?;
            drop(w);
            out.flush()
                .map_err(|e| Error::Config(format!("write failed: {e}")))?;
            return Ok(if checks.iter().all(|c| c.pass) { 0 } else { 1 });
        }
    }
    Ok(0)
}
