//! Full-grid runs with an append-only result log that makes them resumable.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use flbench::RunRecord;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SolverParams};
use crate::corpus::{self, instance_path, load_instance};
use crate::error::{validation, CliError, CliResult};
use crate::runner::solve_runs;

pub const RESULTS: &str = "results.jsonl";

type RecordKey = (String, String, String, u64);

/// Result log contents, first occurrence of each key kept.
pub struct ResultLog {
    pub records: Vec<RunRecord>,
    pub warnings: Vec<String>,
}

/// Read a result log, dropping a torn final line left by an interrupted writer.
pub fn read_results(path: &Path) -> CliResult<ResultLog> {
    let mut warnings = Vec::new();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.len() != text.len() {
        warnings.push(format!("{}: ignoring incomplete final line", path.display()));
    }
    let mut seen: BTreeSet<RecordKey> = BTreeSet::new();
    let mut records = Vec::new();
    for (no, line) in complete.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: RunRecord = serde_json::from_str(line)
            .map_err(|e| validation(format!("{} line {}: {e}", path.display(), no + 1)))?;
        if seen.insert(rec.key()) {
            records.push(rec);
        } else {
            warnings.push(format!("{} line {}: duplicate record for {:?} ignored", path.display(), no + 1, rec.key()));
        }
    }
    Ok(ResultLog { records, warnings })
}

/// Truncate a torn final line so appends start on a fresh line.
fn repair_tail(path: &Path) -> CliResult<()> {
    let Ok(bytes) = fs::read(path) else { return Ok(()) };
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if keep != bytes.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(|e| CliError::io(path, e))?;
        f.set_len(keep as u64).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct SweepReport {
    pub instances: usize,
    pub tasks_total: usize,
    pub tasks_already_done: usize,
    pub tasks_run: usize,
    pub records_written: usize,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// Run every (instance, solver, parameters, run) task not yet in the log.
/// Tasks of one (instance, solver, parameters) group run together; `limit`
/// caps the number of groups handled by this invocation.
pub fn sweep(cfg: &ExperimentConfig, limit: Option<usize>) -> CliResult<SweepReport> {
    cfg.validate_sweep()?;
    let (solvers, mut warnings) = cfg.deduplicated_solvers();
    let (entries, _) = corpus::generate(cfg)?;
    let log_path = cfg.out.join(RESULTS);
    let log = read_results(&log_path)?;
    warnings.extend(log.warnings);
    repair_tail(&log_path)?;
    let done: BTreeSet<RecordKey> = log.records.iter().map(RunRecord::key).collect();

    let mut report = SweepReport { warnings, ..Default::default() };
    let mut groups: Vec<(&corpus::ManifestEntry, SolverParams, Vec<u64>)> = Vec::new();
    for entry in entries.iter().filter(|e| e.is_ok()) {
        report.instances += 1;
        for params in &solvers {
            let missing: Vec<u64> = (0..cfg.runs)
                .filter(|&r| {
                    !done.contains(&(entry.instance_id.clone(), params.name().as_str().to_string(), params.canonical(), r))
                })
                .collect();
            report.tasks_total += cfg.runs as usize;
            report.tasks_already_done += cfg.runs as usize - missing.len();
            if !missing.is_empty() {
                groups.push((entry, *params, missing));
            }
        }
    }
    if let Some(limit) = limit {
        groups.truncate(limit);
    }

    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .map_err(|e| CliError::io(&log_path, e))?;
    let appender = Mutex::new(BufWriter::new(file));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| crate::error::config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<(usize, usize), String>> = pool.install(|| {
        groups
            .par_iter()
            .map(|(entry, params, runs)| {
                let describe = |e: CliError| format!("{} {params}: {e}", entry.instance_id);
                let inst = load_instance(&instance_path(&cfg.out, &entry.instance_id)).map_err(describe)?;
                let records = solve_runs(&inst, &entry.instance_id, params, runs, cfg.master_seed).map_err(describe)?;
                let mut lines = String::new();
                for r in &records {
                    lines.push_str(&serde_json::to_string(r).expect("records serialize"));
                    lines.push('\n');
                }
                let mut out = appender.lock().expect("appender poisoned");
                out.write_all(lines.as_bytes()).and_then(|_| out.flush()).map_err(|e| format!("{}: {e}", log_path.display()))?;
                Ok((runs.len(), records.len()))
            })
            .collect()
    });
    for o in outcomes {
        match o {
            Ok((tasks, written)) => {
                report.tasks_run += tasks;
                report.records_written += written;
            }
            Err(msg) => report.failures.push(msg),
        }
    }
    // a failed write to the log is a system error, not a per-task failure
    if let Some(f) = report.failures.iter().find(|f| f.starts_with(&log_path.display().to_string())) {
        return Err(CliError::io(&log_path, std::io::Error::other(f.clone())));
    }
    Ok(report)
}

/// Records grouped by instance then solver label, for analysis.
pub fn group_by_instance(records: &[RunRecord]) -> BTreeMap<&str, Vec<&RunRecord>> {
    let mut m: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        m.entry(r.instance_id.as_str()).or_default().push(r);
    }
    m
}
