use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, default_rw_grid, FractalOptions, ReportOptions, RwMode, RwOptions};
use crate::config::{self, ScanConfig};
use crate::error::{CliError, CliResult};
use crate::output::Format;
use crate::scan;

#[derive(Debug, Parser)]
#[command(name = "ecami", version, about = "Exact mutual information of elementary cellular automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Late-time entropy and mutual information for one (rule, N, q).
    Report(ReportArgs),
    /// Resumable sweep over rules, ring sizes and densities.
    Scan(ScanArgs),
    /// Mutual information of the annihilating particle model.
    Rw(RwArgs),
    /// Box-counting dimension of rule-184 survivors.
    Fractal(FractalArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json (one object per line).
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub rule: u8,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = ecami_core::info::DEFAULT_T_AV)]
    pub t_av: u32,
    /// Worker threads (also ECAMI_WORKERS).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write wall_ms = 0 so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 4.0)]
    pub memory_gb: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Key-value configuration file; flags below override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `all88`, `all256` or a list such as `0,8,40..44`.
    #[arg(long)]
    pub rule: Option<String>,
    /// Even sizes, e.g. `8..16` or `8,12,20`.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma list of densities.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub t_av: Option<u32>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long)]
    pub no_timing: bool,
    /// Ignore earlier output and completion logs.
    #[arg(long)]
    pub fresh: bool,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RwArgs {
    #[arg(long, default_value = "analytic")]
    pub mode: RwMode,
    /// Comma list of black densities; a grid over [0.5, 0.99] by default.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    /// Cutoff of the exact sums in the analytic mode.
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    /// Retained steps in the oracle mode.
    #[arg(long, default_value_t = 10_000)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest distance tabulated in the simulation mode.
    #[arg(long, default_value_t = 12)]
    pub horizon: usize,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FractalArgs {
    #[arg(long, default_value_t = 184)]
    pub rule: u8,
    /// Ring size, a power of two ≥ 65536.
    #[arg(long, default_value_t = 1 << 20)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evolution steps; N/16 by default.
    #[arg(long)]
    pub t: Option<u64>,
    /// Smallest box size exponent.
    #[arg(long, default_value_t = 0)]
    pub scale_min: u32,
    /// Largest box size exponent; log2 N by default.
    #[arg(long)]
    pub scale_max: Option<u32>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Flag, then environment, then `fallback`, then the machine default.
fn workers(flag: Option<usize>, fallback: Option<usize>) -> CliResult<usize> {
    if let Some(w) = flag {
        return if w == 0 {
            Err(CliError::Usage("--workers must be at least 1".into()))
        } else {
            Ok(w)
        };
    }
    let via_env = ScanConfig {
        workers: fallback,
        ..ScanConfig::default()
    };
    via_env.resolved_workers()
}

fn with_pool<T: Send>(w: usize, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(w)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {w} workers: {e}")))?
        .install(f)
}

fn gb(v: f64) -> CliResult<u64> {
    if v.is_nan() || v <= 0.0 {
        return Err(CliError::Usage(format!("--memory-gb must be positive, got {v}")));
    }
    Ok((v * (1u64 << 30) as f64) as u64)
}

pub fn scan_config(a: &ScanArgs) -> CliResult<ScanConfig> {
    let mut cfg = match &a.config {
        Some(p) => ScanConfig::load(p)?,
        None => ScanConfig::default(),
    };
    if let Some(r) = &a.rule {
        cfg.rules = config::parse_rules(r).map_err(CliError::Usage)?;
    }
    if let Some(n) = &a.n {
        cfg.n_list = config::parse_sizes(n).map_err(CliError::Usage)?;
    }
    if let Some(q) = &a.q {
        cfg.q_list = config::parse_q_list(q).map_err(CliError::Usage)?;
    }
    if let Some(t) = a.t_av {
        cfg.t_av = t;
    }
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if let Some(f) = a.format {
        cfg.format = f;
    }
    if a.no_timing {
        cfg.timing = false;
    }
    if a.fresh {
        cfg.resume = false;
    }
    if a.cache_dir.is_some() {
        cfg.cache_dir = a.cache_dir.clone();
    }
    if cfg.rules.is_empty() {
        return Err(CliError::Usage("no rules given (--rule or a config file)".into()));
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Report(a) => {
            let w = workers(a.workers, None)?;
            let opts = ReportOptions {
                rule: a.rule,
                n: a.n,
                q: a.q,
                t_av: a.t_av,
                timing: !a.no_timing,
                cache_dir: a.cache_dir.as_deref(),
                memory_budget: gb(a.memory_gb)?,
            };
            with_pool(w, || commands::report(&opts, a.output.out.as_deref(), a.output.format))
        }
        Command::Scan(a) => {
            let cfg = scan_config(&a)?;
            let w = workers(a.workers, cfg.workers)?;
            let summary = scan::run_scan(&cfg, w)?;
            eprintln!("{}", scan::describe(&summary));
            if summary.failed > 0 {
                return Err(CliError::PartialFailure(summary.failed));
            }
            Ok(())
        }
        Command::Rw(a) => {
            let w = workers(a.workers, None)?;
            let opts = RwOptions {
                mode: a.mode,
                q: if a.q.is_empty() { default_rw_grid() } else { a.q.clone() },
                m: a.m,
                cutoff: a.cutoff,
                samples: a.samples,
                seed: a.seed,
                horizon: a.horizon,
            };
            with_pool(w, || commands::rw(&opts, a.output.out.as_deref(), a.output.format))
        }
        Command::Fractal(a) => {
            let w = workers(a.workers, None)?;
            let opts = FractalOptions {
                rule: a.rule,
                n: a.n,
                q: a.q,
                seed: a.seed,
                steps: a.t,
                scale_lo: a.scale_min,
                scale_hi: a.scale_max,
            };
            with_pool(w, || commands::fractal(&opts, a.output.out.as_deref(), a.output.format))
        }
    }
}
