//! Job runner for `report` and `scan`.
//!
//! Jobs run on a worker pool; a single writer thread re-orders results into
//! job order, appends each record to the output and only then logs its key in
//! `<out>.done`. Failed jobs are logged to `<out>.failed` and the scan goes on.
//! On restart, records whose key is not in the completion log are dropped and
//! recomputed.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use ecami_core::info::asymptotic_report;
use ecami_core::necklaces::{check_budget, enumerate_representatives_with_budget};
use ecami_core::rules::rule_table;
use ecami_core::{InfoReport, NecklaceIndex};
use rayon::prelude::*;

use crate::config::ScanConfig;
use crate::error::{CliError, CliResult};
use crate::output::{job_key, report_row, Format, RowWriter, REPORT_HEADER};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub rule: u8,
    pub n: u32,
    pub q: f64,
}

impl Job {
    pub fn key(&self) -> String {
        job_key(self.rule, self.n, self.q)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub written: usize,
    pub skipped: usize,
    pub failed: usize,
}

/// Jobs in output order: `N` ascending, then rule, then `q` as listed.
pub fn jobs(cfg: &ScanConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &n in &cfg.n_list {
        for &rule in &cfg.rules {
            for &q in &cfg.q_list {
                out.push(Job { rule, n, q });
            }
        }
    }
    out
}

pub fn load_index(n: u32, cache_dir: Option<&Path>, budget: u64) -> CliResult<NecklaceIndex> {
    check_budget(n, budget)?;
    Ok(match cache_dir {
        Some(dir) => NecklaceIndex::load_or_build(dir, n, budget)?,
        None => enumerate_representatives_with_budget(n, budget)?,
    })
}

/// One report with its wall time in milliseconds.
pub fn run_job(index: &NecklaceIndex, job: Job, t_av: u32) -> CliResult<(InfoReport, u64)> {
    let start = Instant::now();
    let report = asymptotic_report(index, rule_table(job.rule as u32)?, job.q, t_av)?;
    Ok((report, start.elapsed().as_millis() as u64))
}

fn sidecar(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

pub fn done_log_path(out: &Path) -> PathBuf {
    sidecar(out, ".done")
}

pub fn failed_log_path(out: &Path) -> PathBuf {
    sidecar(out, ".failed")
}

/// Key of an output line, or `None` for the CSV header and blank lines.
fn record_key(line: &str, format: Format) -> Option<String> {
    match format {
        Format::Csv => {
            let mut it = line.split(',');
            let rule: u8 = it.next()?.parse().ok()?;
            let n: u32 = it.next()?.parse().ok()?;
            let q: f64 = it.next()?.parse().ok()?;
            Some(job_key(rule, n, q))
        }
        Format::Json => {
            let v: serde_json::Value = serde_json::from_str(line).ok()?;
            let rule = u8::try_from(v.get("rule")?.as_u64()?).ok()?;
            let n = u32::try_from(v.get("N")?.as_u64()?).ok()?;
            Some(job_key(rule, n, v.get("q")?.as_f64()?))
        }
    }
}

/// Keep only records listed in the completion log (first copy of each),
/// rewrite both files to agree and return the surviving keys.
fn compact(out: &Path, done_path: &Path, format: Format) -> CliResult<HashSet<String>> {
    let logged: HashSet<String> = BufReader::new(File::open(done_path)?)
        .lines()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    let mut kept = HashSet::new();
    let mut order = Vec::new();
    let tmp = sidecar(out, ".tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        for line in BufReader::new(File::open(out)?).lines() {
            let line = line?;
            match record_key(&line, format) {
                Some(key) => {
                    if logged.contains(&key) && kept.insert(key.clone()) {
                        writeln!(w, "{line}")?;
                        order.push(key);
                    }
                }
                None if format == Format::Csv && line.starts_with("rule,") => writeln!(w, "{line}")?,
                None => {}
            }
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, out)?;
    let mut d = BufWriter::new(File::create(done_path)?);
    for key in &order {
        writeln!(d, "{key}")?;
    }
    d.flush()?;
    Ok(kept)
}

struct Sink {
    rows: RowWriter<Box<dyn Write + Send>>,
    done: Option<File>,
    failed: Option<File>,
    timing: bool,
    summary: ScanSummary,
}

impl Sink {
    fn emit(&mut self, job: Job, outcome: CliResult<(InfoReport, u64)>) -> CliResult<()> {
        match outcome {
            Ok((report, ms)) => {
                self.rows.write_row(&report_row(&report, if self.timing { ms } else { 0 }))?;
                self.rows.flush()?;
                if let Some(d) = self.done.as_mut() {
                    writeln!(d, "{}", job.key())?;
                    d.flush()?;
                }
                self.summary.written += 1;
            }
            Err(e) => {
                match self.failed.as_mut() {
                    Some(f) => {
                        writeln!(f, "{}\t{e}", job.key())?;
                        f.flush()?;
                    }
                    None => eprintln!("job {} failed: {e}", job.key()),
                }
                self.summary.failed += 1;
            }
        }
        Ok(())
    }
}

fn open_sink(cfg: &ScanConfig) -> CliResult<(Sink, HashSet<String>)> {
    let Some(out) = cfg.out.as_deref() else {
        let mut rows = RowWriter::new(Box::new(std::io::stdout()) as Box<dyn Write + Send>, cfg.format, &REPORT_HEADER);
        rows.write_header()?;
        let sink = Sink {
            rows,
            done: None,
            failed: None,
            timing: cfg.timing,
            summary: ScanSummary::default(),
        };
        return Ok((sink, HashSet::new()));
    };
    let done_path = done_log_path(out);
    let failed_path = failed_log_path(out);
    let resuming = cfg.resume && out.exists() && done_path.exists();
    let done = if resuming {
        compact(out, &done_path, cfg.format)?
    } else {
        File::create(out)?;
        File::create(&done_path)?;
        HashSet::new()
    };
    let fresh_file = std::fs::metadata(out)?.len() == 0;
    let file = OpenOptions::new().append(true).open(out)?;
    let mut rows = RowWriter::new(
        Box::new(BufWriter::new(file)) as Box<dyn Write + Send>,
        cfg.format,
        &REPORT_HEADER,
    );
    if fresh_file {
        rows.write_header()?;
    }
    let mut failed_opts = OpenOptions::new();
    failed_opts.create(true);
    if resuming {
        failed_opts.append(true);
    } else {
        failed_opts.write(true).truncate(true);
    }
    let sink = Sink {
        rows,
        done: Some(OpenOptions::new().append(true).open(&done_path)?),
        failed: Some(failed_opts.open(&failed_path)?),
        timing: cfg.timing,
        summary: ScanSummary::default(),
    };
    Ok((sink, done))
}

/// Run every pending job of `cfg` with `workers` threads.
pub fn run_scan(cfg: &ScanConfig, workers: usize) -> CliResult<ScanSummary> {
    cfg.validate().map_err(CliError::Usage)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
    let (mut sink, done) = open_sink(cfg)?;
    let all = jobs(cfg);
    sink.summary.skipped = all.iter().filter(|j| done.contains(&j.key())).count();

    for &n in &cfg.n_list {
        let pending: Vec<Job> = all
            .iter()
            .copied()
            .filter(|j| j.n == n && !done.contains(&j.key()))
            .collect();
        if pending.is_empty() {
            continue;
        }
        let index = match pool.install(|| load_index(n, cfg.cache_dir.as_deref(), cfg.memory_budget)) {
            Ok(index) => index,
            Err(e) => {
                let msg = e.to_string();
                for &job in &pending {
                    sink.emit(job, Err(CliError::Usage(msg.clone())))?;
                }
                continue;
            }
        };
        run_group(&pool, &index, &pending, cfg.t_av, &mut sink)?;
    }
    sink.rows.flush()?;
    Ok(sink.summary)
}

fn run_group(
    pool: &rayon::ThreadPool,
    index: &NecklaceIndex,
    pending: &[Job],
    t_av: u32,
    sink: &mut Sink,
) -> CliResult<()> {
    let (tx, rx) = mpsc::channel::<(usize, CliResult<(InfoReport, u64)>)>();
    std::thread::scope(|s| {
        let writer = s.spawn(move || -> CliResult<()> {
            let mut buffered = BTreeMap::new();
            let mut next = 0;
            for (k, outcome) in rx {
                buffered.insert(k, outcome);
                while let Some(outcome) = buffered.remove(&next) {
                    sink.emit(pending[next], outcome)?;
                    next += 1;
                }
            }
            Ok(())
        });
        pool.install(|| {
            pending
                .par_iter()
                .enumerate()
                .for_each_with(tx, |tx, (k, &job)| {
                    let _ = tx.send((k, run_job(index, job, t_av)));
                })
        });
        writer.join().expect("writer thread panicked")
    })
}

/// Human-readable one-liner for the error stream.
pub fn describe(summary: &ScanSummary) -> String {
    format!(
        "scan finished: {} written, {} already done, {} failed",
        summary.written, summary.skipped, summary.failed
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::fmt12;

    #[test]
    fn record_keys_round_trip() {
        assert_eq!(record_key("43,16,0.5,1,2,,1,10,0", Format::Csv), Some("43,16,0.5".into()));
        assert_eq!(record_key("rule,N,q,S_bits", Format::Csv), None);
        let js = "{\"rule\":43,\"N\":16,\"q\":0.3,\"S_bits\":1}";
        assert_eq!(record_key(js, Format::Json), Some(format!("43,16,{}", fmt12(0.3))));
    }
}
