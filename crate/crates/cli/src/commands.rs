//! `report`, `rw` and `fractal`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ecami_core::rules::rule_table;
use ecami_core::rwanalytic::{joint_pij, marginal_pi, mi_analytic, mi_bruteforce_oracle, RWModelParams};
use ecami_core::rwsim::{dyadic_scales, fractal_dimension, nearest_particle_histogram, HistogramParams, WideRing};
use rayon::prelude::*;

use crate::error::{usage, CliError, CliResult};
use crate::output::{report_row, Cell, Format, Row, RowWriter, REPORT_HEADER};
use crate::scan::{load_index, run_job, Job};

pub fn open_out(out: Option<&Path>) -> CliResult<Box<dyn Write + Send>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout()),
    })
}

fn write_table(out: Option<&Path>, format: Format, header: &[&str], rows: &[Row]) -> CliResult<()> {
    let mut w = RowWriter::new(open_out(out)?, format, header);
    w.write_header()?;
    for row in rows {
        w.write_row(row)?;
    }
    w.flush()
}

pub struct ReportOptions<'a> {
    pub rule: u8,
    pub n: u32,
    pub q: f64,
    pub t_av: u32,
    pub timing: bool,
    pub cache_dir: Option<&'a Path>,
    pub memory_budget: u64,
}

pub fn report(o: &ReportOptions, out: Option<&Path>, format: Format) -> CliResult<()> {
    if o.n == 0 || o.n % 2 != 0 {
        return usage(format!("--n must be a positive even number, got {}", o.n));
    }
    if !(0.0..=1.0).contains(&o.q) {
        return usage(format!("--q must lie in [0, 1], got {}", o.q));
    }
    let index = load_index(o.n, o.cache_dir, o.memory_budget)?;
    let job = Job {
        rule: o.rule,
        n: o.n,
        q: o.q,
    };
    let (rep, ms) = run_job(&index, job, o.t_av)?;
    let row = report_row(&rep, if o.timing { ms } else { 0 });
    write_table(out, format, &REPORT_HEADER, &[row])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwMode {
    Analytic,
    Oracle,
    Sim,
}

impl std::str::FromStr for RwMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(RwMode::Analytic),
            "oracle" => Ok(RwMode::Oracle),
            "sim" => Ok(RwMode::Sim),
            other => Err(format!("unknown mode '{other}' (expected analytic, oracle or sim)")),
        }
    }
}

pub struct RwOptions {
    pub mode: RwMode,
    pub q: Vec<f64>,
    pub m: usize,
    pub cutoff: usize,
    pub samples: usize,
    pub seed: u64,
    pub horizon: usize,
}

pub const RW_CURVE_HEADER: [&str; 5] = ["q", "I_e", "I_bits", "mode", "param"];
pub const RW_SIM_HEADER: [&str; 9] = ["q", "kind", "i", "j", "count", "p_sim", "se", "p_analytic", "z"];

/// Default grid: the critical point, then `0.505` and `0.51 ..= 0.99`.
pub fn default_rw_grid() -> Vec<f64> {
    let mut g = vec![0.5, 0.505];
    g.extend((51..=99).map(|k| k as f64 / 100.0));
    g
}

pub fn rw(o: &RwOptions, out: Option<&Path>, format: Format) -> CliResult<()> {
    if let Some(q) = o.q.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return usage(format!("densities must lie in (0, 1), got {q}"));
    }
    match o.mode {
        RwMode::Analytic | RwMode::Oracle => {
            let rows = o
                .q
                .par_iter()
                .map(|&q| curve_row(o, q))
                .collect::<CliResult<Vec<_>>>()?;
            write_table(out, format, &RW_CURVE_HEADER, &rows)
        }
        RwMode::Sim => {
            let mut rows = Vec::new();
            for &q in &o.q {
                rows.extend(sim_rows(o, q)?);
            }
            write_table(out, format, &RW_SIM_HEADER, &rows)
        }
    }
}

fn curve_row(o: &RwOptions, q: f64) -> CliResult<Row> {
    let (i_e, mode, param) = match o.mode {
        RwMode::Analytic => (mi_analytic(&RWModelParams::new(q, o.m)?)?.i_e, "analytic", o.m),
        _ => (mi_bruteforce_oracle(q, o.cutoff)?.i_e, "oracle", o.cutoff),
    };
    Ok(Row {
        cells: vec![
            Cell::Float(q),
            Cell::Float(i_e),
            Cell::Float(i_e / std::f64::consts::LN_2),
            Cell::Text(mode.into()),
            Cell::Int(param as i64),
        ],
    })
}

/// Joint and marginal histograms next to the closed forms; `z` is the
/// deviation in standard errors (empty when both are zero).
fn sim_rows(o: &RwOptions, q: f64) -> CliResult<Vec<Row>> {
    let hist = nearest_particle_histogram(HistogramParams {
        q_black: q,
        samples: o.samples,
        seed: o.seed,
        horizon: o.horizon,
    })?;
    if hist.unresolved > 0 {
        eprintln!("warning: {} of {} samples unresolved at q={q}", hist.unresolved, o.samples);
    }
    let params = RWModelParams::new(q, o.m)?;
    let row = |kind: &str, i: usize, j: Option<usize>, count: u64, (p, se): (f64, f64), want: f64| {
        let z = if se > 0.0 {
            Cell::Float((p - want) / se)
        } else {
            Cell::Missing
        };
        Row {
            cells: vec![
                Cell::Float(q),
                Cell::Text(kind.into()),
                Cell::Int(i as i64),
                j.map_or(Cell::Missing, |j| Cell::Int(j as i64)),
                Cell::Int(count as i64),
                Cell::Float(p),
                Cell::Float(se),
                Cell::Float(want),
                z,
            ],
        }
    };
    let mut rows = Vec::new();
    for i in 0..=o.horizon {
        for j in 1..=o.horizon {
            let want = joint_pij(i as u64, j as u64, &params)?;
            rows.push(row("joint", i, Some(j), hist.joint_count(i, j), hist.p_ij(i, j), want));
        }
    }
    for i in 0..=o.horizon {
        let count = hist.left_counts().get(i).copied().unwrap_or(0);
        rows.push(row("left", i, None, count, hist.p_i(i), marginal_pi(i, &params)?));
    }
    // The joint law depends on i + j only, so p_j(j) = p_i(j - 1).
    for j in 1..=o.horizon {
        let count = hist.right_counts().get(j).copied().unwrap_or(0);
        rows.push(row("right", j, None, count, hist.p_j(j), marginal_pi(j - 1, &params)?));
    }
    Ok(rows)
}

pub struct FractalOptions {
    pub rule: u8,
    pub n: usize,
    pub q: f64,
    pub seed: u64,
    pub steps: Option<u64>,
    pub scale_lo: u32,
    pub scale_hi: Option<u32>,
}

pub const FRACTAL_HEADER: [&str; 12] = [
    "rule",
    "N",
    "q",
    "seed",
    "steps",
    "particles",
    "dimension",
    "r_squared",
    "max_abs_residual",
    "scales",
    "occupied",
    "residuals",
];

pub fn fractal(o: &FractalOptions, out: Option<&Path>, format: Format) -> CliResult<()> {
    if o.rule != 184 {
        return usage(format!("fractal analysis is defined for rule 184 only, got {}", o.rule));
    }
    if !o.n.is_power_of_two() || o.n < 1 << 16 {
        return usage(format!("--n must be a power of two of at least 65536, got {}", o.n));
    }
    if !(0.0..=1.0).contains(&o.q) {
        return usage(format!("--q must lie in [0, 1], got {}", o.q));
    }
    let log2n = o.n.trailing_zeros();
    let hi = o.scale_hi.unwrap_or(log2n);
    if hi > log2n || o.scale_lo + 2 > hi {
        return usage(format!(
            "scale exponents {}..{hi} must span at least 3 values within 0..{log2n}",
            o.scale_lo
        ));
    }
    let steps = o.steps.unwrap_or(o.n as u64 / 16);
    let mut ring = WideRing::random(o.n, o.q, o.seed)?;
    let ones = ring.count_ones();
    if ones == 0 || ones == o.n as u64 {
        return Err(CliError::Core(ecami_core::Error::InvalidArgument(
            "initial state has all sites equal: no particles to count".into(),
        )));
    }
    ring.evolve(rule_table(184)?, steps);
    let sites = ring.particle_sites();
    let fit = fractal_dimension(&sites, &dyadic_scales(o.scale_lo, hi))?;
    let row = Row {
        cells: vec![
            Cell::Int(184),
            Cell::Int(o.n as i64),
            Cell::Float(o.q),
            Cell::UInt(o.seed),
            Cell::Int(steps as i64),
            Cell::Int(sites.len() as i64),
            Cell::Float(fit.dimension),
            Cell::Float(fit.fit.r_squared),
            Cell::Float(fit.fit.max_abs_residual()),
            Cell::List(fit.scales.iter().map(|&s| s as f64).collect()),
            Cell::List(fit.occupied.iter().map(|&c| c as f64).collect()),
            Cell::List(fit.fit.residuals.clone()),
        ],
    };
    write_table(out, format, &FRACTAL_HEADER, &[row])
}
