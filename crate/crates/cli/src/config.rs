//! Scan configuration file.
//!
//! Plain text, one `key = value` per line; `#` starts a comment, blank lines
//! are ignored and keys are case-insensitive.
//!
//! | key         | value                                                   | default      |
//! |-------------|---------------------------------------------------------|--------------|
//! | `rules`     | `all88`, `all256`, `two-species`, `two-species+57`, or a list such as `0,8,15` / `40..44` | required |
//! | `n`         | even sizes: list and/or ranges `lo..hi` (step 2)        | required     |
//! | `q`         | comma list of black densities in `[0, 1]`               | `0.5`        |
//! | `t_av`      | averaging window                                        | `10`         |
//! | `workers`   | worker threads (`ECAMI_WORKERS` overrides)              | all cores    |
//! | `out`       | output path (completion logs live beside it)           | stdout       |
//! | `format`    | `csv` or `json`                                         | `csv`        |
//! | `quarter`   | `true` requires every `N` to be a multiple of 4         | `false`      |
//! | `timing`    | `false` writes `wall_ms = 0` for byte-identical output  | `true`       |
//! | `resume`    | `false` discards earlier output and logs                | `true`       |
//! | `cache_dir` | directory for necklace index caches                     | none         |
//! | `memory_gb` | per-job memory budget                                   | `4`          |

use std::path::{Path, PathBuf};

use ecami_core::rules::{nonequivalent_rules, TWO_SPECIES_RULES, TWO_SPECIES_RULES_WITH_57};

use crate::error::{CliError, CliResult};
use crate::output::Format;

pub const WORKERS_ENV: &str = "ECAMI_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub rules: Vec<u8>,
    pub n_list: Vec<u32>,
    pub q_list: Vec<f64>,
    pub t_av: u32,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub quarter: bool,
    pub timing: bool,
    pub resume: bool,
    pub cache_dir: Option<PathBuf>,
    pub memory_budget: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            rules: Vec::new(),
            n_list: Vec::new(),
            q_list: vec![0.5],
            t_av: ecami_core::info::DEFAULT_T_AV,
            workers: None,
            out: None,
            format: Format::Csv,
            quarter: false,
            timing: true,
            resume: true,
            cache_dir: None,
            memory_budget: ecami_core::necklaces::DEFAULT_MEMORY_BUDGET,
        }
    }
}

impl ScanConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut cfg = ScanConfig::default();
        let mut seen_rules = false;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| CliError::Config {
                path: origin.to_string(),
                line: k + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let value = value.trim();
            match key.trim().to_ascii_lowercase().as_str() {
                "rules" => {
                    cfg.rules = parse_rules(value).map_err(err)?;
                    seen_rules = true;
                }
                "n" | "n_list" => cfg.n_list = parse_sizes(value).map_err(err)?,
                "q" | "q_list" => cfg.q_list = parse_q_list(value).map_err(err)?,
                "t_av" => cfg.t_av = parse_num(value).map_err(err)?,
                "workers" => cfg.workers = Some(parse_num(value).map_err(err)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = value.parse().map_err(err)?,
                "quarter" => cfg.quarter = parse_bool(value).map_err(err)?,
                "timing" => cfg.timing = parse_bool(value).map_err(err)?,
                "resume" => cfg.resume = parse_bool(value).map_err(err)?,
                "cache_dir" => cfg.cache_dir = Some(PathBuf::from(value)),
                "memory_gb" => {
                    let gb: f64 = parse_num(value).map_err(err)?;
                    cfg.memory_budget = (gb * (1u64 << 30) as f64) as u64;
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        let whole = |msg: &str| CliError::Config {
            path: origin.to_string(),
            line: 0,
            msg: msg.to_string(),
        };
        if !seen_rules || cfg.rules.is_empty() {
            return Err(whole("no rules given"));
        }
        cfg.validate().map_err(|m| whole(&m))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_list.is_empty() {
            return Err("no ring sizes given".into());
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n == 0 || n % 2 != 0) {
            return Err(format!("ring size {n} is not a positive even number"));
        }
        if self.quarter {
            if let Some(&n) = self.n_list.iter().find(|&&n| n % 4 != 0) {
                return Err(format!("quarter = true needs N divisible by 4, got {n}"));
            }
        }
        if self.q_list.is_empty() {
            return Err("no densities given".into());
        }
        if self.t_av == 0 {
            return Err("t_av must be at least 1".into());
        }
        if self.workers == Some(0) {
            return Err("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Worker count: the environment overrides the file, which overrides the
    /// machine's available parallelism.
    pub fn resolved_workers(&self) -> CliResult<usize> {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            return match v.trim().parse::<usize>() {
                Ok(w) if w > 0 => Ok(w),
                _ => Err(CliError::Usage(format!("{WORKERS_ENV}='{v}' is not a positive integer"))),
            };
        }
        Ok(self.workers.unwrap_or_else(default_workers))
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse '{s}'"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("cannot parse '{s}' as a boolean")),
    }
}

/// Items separated by commas; `a..b` is an inclusive range with the given step.
fn expand(s: &str, step: u32) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u32 = parse_num(a)?;
            let b: u32 = parse_num(b.trim_start_matches('='))?;
            if a > b {
                return Err(format!("empty range '{item}'"));
            }
            out.extend((a..=b).step_by(step as usize));
        } else {
            out.push(parse_num(item)?);
        }
    }
    Ok(out)
}

pub fn parse_rules(s: &str) -> Result<Vec<u8>, String> {
    let rules: Vec<u8> = match s.trim().to_ascii_lowercase().as_str() {
        "all88" => nonequivalent_rules(),
        "all256" | "all" => (0..=255).collect(),
        "two-species" => TWO_SPECIES_RULES.to_vec(),
        "two-species+57" => TWO_SPECIES_RULES_WITH_57.to_vec(),
        _ => expand(s, 1)?
            .into_iter()
            .map(|r| u8::try_from(r).map_err(|_| format!("rule {r} outside 0..=255")))
            .collect::<Result<_, _>>()?,
    };
    Ok(dedup_sorted(rules))
}

pub fn parse_sizes(s: &str) -> Result<Vec<u32>, String> {
    Ok(dedup_sorted(expand(s, 2)?))
}

pub fn parse_q_list(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let q: f64 = parse_num(item)?;
        if !(0.0..=1.0).contains(&q) {
            return Err(format!("density {q} outside [0, 1]"));
        }
        if !out.contains(&q) {
            out.push(q);
        }
    }
    Ok(out)
}

fn dedup_sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}
