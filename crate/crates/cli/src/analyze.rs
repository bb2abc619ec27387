//! Result log + manifest → median TTS, ratio, scaling and scatter tables.
//!
//! Per (label, instance, parameter set) the success probability is
//! `Σ successes / Σ restarts` and the run time `Σ model time / Σ restarts`.
//! Each (label, L, α, R) class then picks the parameter set (usually the
//! sweep count) with the smallest median TTS. Brute-force records carry no
//! time model and are left out of the TTS tables.
//!
//! A solver field of the form `<solver>@<tag>` is analysed as its own label
//! `<label>@<tag>`, which lets two copies of one configuration be compared.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use flbench::analysis::{
    correlate, fit_scaling, median_tts_bootstrap, ratio_curve, select_optimal, tts, InstanceTts, SolverKind,
};
use flbench::rng::{hash64, hash_str};
use flbench::RunRecord;

use crate::config::{SolverName, SolverParams};
use crate::corpus::{read_manifest, ManifestEntry, MANIFEST};
use crate::error::{validation, CliError, CliResult};
use crate::sweep::{read_results, RESULTS};

/// `(L, alpha, R)` as written in the manifest.
type Class = (usize, String, String);

#[derive(Clone, Debug)]
struct Cell {
    restarts: u64,
    successes: u64,
    time_us: f64,
    records: Vec<String>,
}

impl Cell {
    fn p_hat(&self) -> f64 {
        if self.restarts == 0 {
            0.0
        } else {
            self.successes as f64 / self.restarts as f64
        }
    }
}

/// Everything measured for one label.
struct LabelData {
    kind: SolverKind,
    /// instance → parameter key → cell; parameter keys sort by sweeps first.
    cells: BTreeMap<String, BTreeMap<(u64, String), Cell>>,
}

/// Class result at the selected parameters.
struct ClassResult {
    params: Option<String>,
    /// Instance TTS, sorted by instance id.
    tts: Vec<InstanceTts>,
    p_hat: BTreeMap<String, f64>,
    median: f64,
    boot_std: f64,
    unsolved: f64,
    resampled: Vec<f64>,
    records: Vec<String>,
    missing: usize,
}

pub struct AnalyzeOptions {
    pub bootstrap_seed: u64,
    pub resamples: usize,
}

#[derive(Debug, Default)]
pub struct AnalyzeReport {
    pub summary: String,
    pub warnings: Vec<String>,
}

fn record_id(r: &RunRecord) -> String {
    let params = if r.params.is_empty() { "-".to_string() } else { r.params.replace(',', "+") };
    format!("{}/{}/{}/{}", r.instance_id, r.solver, params, r.run)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_table(out: &Path, name: &str, header: &str, rows: &[String]) -> CliResult<()> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    let path = out.join(name);
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn class_seed(base: u64, parts: &[&str]) -> u64 {
    let mut words = vec![base];
    words.extend(parts.iter().map(|p| hash_str(p)));
    hash64(&words)
}

fn collect(
    records: &[RunRecord],
    manifest: &BTreeMap<String, ManifestEntry>,
) -> CliResult<BTreeMap<String, LabelData>> {
    let mut labels: BTreeMap<String, LabelData> = BTreeMap::new();
    for r in records {
        if !manifest.contains_key(&r.instance_id) {
            return Err(validation(format!(
                "result record for instance '{}' has no manifest entry (results and manifest do not align)",
                r.instance_id
            )));
        }
        let (base, tag) = match r.solver.split_once('@') {
            Some((b, t)) => (b, Some(t)),
            None => (r.solver.as_str(), None),
        };
        let name = SolverName::parse(base)?;
        if name == SolverName::Brute {
            continue;
        }
        let params = SolverParams::from_canonical(name, &r.params)?;
        let label = match tag {
            Some(t) => format!("{}@{t}", params.label()),
            None => params.label(),
        };
        let kind = SolverKind::parse(base).expect("solver names match");
        let data = labels.entry(label).or_insert_with(|| LabelData { kind, cells: BTreeMap::new() });
        let cell = data
            .cells
            .entry(r.instance_id.clone())
            .or_default()
            .entry((params.sweeps().unwrap_or(0), r.params.clone()))
            .or_insert(Cell { restarts: 0, successes: 0, time_us: 0.0, records: Vec::new() });
        cell.restarts += r.restarts;
        cell.successes += r.successes;
        cell.time_us += r.model_time_us;
        cell.records.push(record_id(r));
    }
    Ok(labels)
}

fn instance_tts(kind: SolverKind, entry: &ManifestEntry, cell: &Cell) -> CliResult<f64> {
    if cell.restarts == 0 {
        return Ok(f64::INFINITY);
    }
    let divisor = kind.parallel_divisor(entry.n, entry.physical_qubits()).max(1.0);
    Ok(tts(cell.p_hat(), cell.time_us / cell.restarts as f64, divisor)?)
}

fn analyse_class(
    data: &LabelData,
    instances: &[&ManifestEntry],
    seed: u64,
    resamples: usize,
) -> CliResult<Option<ClassResult>> {
    let keys: BTreeSet<&(u64, String)> = instances
        .iter()
        .filter_map(|e| data.cells.get(&e.instance_id))
        .flat_map(|m| m.keys())
        .collect();
    if keys.is_empty() {
        return Ok(None);
    }
    let keys: Vec<&(u64, String)> = keys.into_iter().collect();
    let mut grid: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (i, key) in keys.iter().enumerate() {
        let mut values = Vec::new();
        for e in instances {
            if let Some(cell) = data.cells.get(&e.instance_id).and_then(|m| m.get(*key)) {
                values.push(instance_tts(data.kind, e, cell)?);
            }
        }
        grid.insert(i, values);
    }
    // an all-unsolved class still reports its smallest grid point
    let chosen = select_optimal(&grid).unwrap_or(0);
    let key = keys[chosen];
    let mut result = ClassResult {
        params: Some(key.1.clone()),
        tts: Vec::new(),
        p_hat: BTreeMap::new(),
        median: f64::NAN,
        boot_std: f64::NAN,
        unsolved: 0.0,
        resampled: Vec::new(),
        records: Vec::new(),
        missing: 0,
    };
    for e in instances {
        match data.cells.get(&e.instance_id).and_then(|m| m.get(key)) {
            Some(cell) => {
                result.tts.push(InstanceTts {
                    instance_id: e.instance_id.clone(),
                    size: e.size,
                    tts_us: instance_tts(data.kind, e, cell)?,
                });
                result.p_hat.insert(e.instance_id.clone(), cell.p_hat());
                result.records.extend(cell.records.iter().cloned());
            }
            None => result.missing += 1,
        }
    }
    let values: Vec<f64> = result.tts.iter().map(|t| t.tts_us).collect();
    let spread = median_tts_bootstrap(&values, resamples, seed)?;
    result.median = spread.median;
    result.boot_std = spread.stddev;
    result.unsolved = spread.unsolved_fraction;
    result.resampled = spread.resampled;
    Ok(Some(result))
}

/// Write `tts_median.csv`, `ratio.csv`, `scaling.csv`, `scatter.csv` and
/// `provenance.csv` under `out`.
pub fn analyze(out: &Path, opts: &AnalyzeOptions) -> CliResult<AnalyzeReport> {
    let manifest_rows = read_manifest(&out.join(MANIFEST))?;
    let manifest: BTreeMap<String, ManifestEntry> =
        manifest_rows.into_iter().map(|e| (e.instance_id.clone(), e)).collect();
    let log = read_results(&out.join(RESULTS))?;
    let mut report = AnalyzeReport { warnings: log.warnings, ..Default::default() };
    let labels = collect(&log.records, &manifest)?;
    if labels.is_empty() {
        return Err(validation("no solver records with a time model to analyse"));
    }

    let mut classes: BTreeMap<Class, Vec<&ManifestEntry>> = BTreeMap::new();
    for e in manifest.values().filter(|e| e.is_ok()) {
        classes.entry((e.size, e.alpha.clone(), e.range.clone())).or_default().push(e);
    }

    let mut results: BTreeMap<(String, Class), ClassResult> = BTreeMap::new();
    for (label, data) in &labels {
        for (class, instances) in &classes {
            let seed = class_seed(opts.bootstrap_seed, &["tts", label, &class.0.to_string(), &class.1, &class.2]);
            if let Some(r) = analyse_class(data, instances, seed, opts.resamples)? {
                if r.missing > 0 {
                    report.warnings.push(format!(
                        "{label} L={} alpha={} R={}: {} of {} instances have no runs at the selected parameters",
                        class.0, class.1, class.2, r.missing, instances.len()
                    ));
                }
                results.insert((label.clone(), class.clone()), r);
            }
        }
    }

    let mut provenance = Vec::new();
    let mut tts_rows = Vec::new();
    for ((label, (size, alpha, range)), r) in &results {
        tts_rows.push(format!(
            "{},{size},{alpha},{range},{},{},{}",
            csv_field(label),
            r.median,
            r.boot_std,
            r.unsolved
        ));
        provenance.push(format!(
            "tts_median,{},{},{},{}",
            csv_field(&format!("{label} L={size} alpha={alpha} R={range}")),
            csv_field(r.params.as_deref().unwrap_or("")),
            r.missing,
            csv_field(&r.records.join(";"))
        ));
    }

    // ratios and scatter over every pair of labels, per (alpha, R)
    let label_names: Vec<&String> = labels.keys().collect();
    let mut ratio_rows = Vec::new();
    let mut scatter_rows = Vec::new();
    let mut correlations = Vec::new();
    for (i, a) in label_names.iter().enumerate() {
        for b in &label_names[i + 1..] {
            let mut by_ar: BTreeMap<(String, String), (Vec<InstanceTts>, Vec<InstanceTts>)> = BTreeMap::new();
            let mut p_a = Vec::new();
            let mut p_b = Vec::new();
            for (class, _) in &classes {
                let (Some(ra), Some(rb)) =
                    (results.get(&((*a).clone(), class.clone())), results.get(&((*b).clone(), class.clone())))
                else {
                    continue;
                };
                let tb: BTreeMap<&str, &InstanceTts> = rb.tts.iter().map(|t| (t.instance_id.as_str(), t)).collect();
                let slot = by_ar.entry((class.1.clone(), class.2.clone())).or_default();
                for ta in &ra.tts {
                    if let Some(t) = tb.get(ta.instance_id.as_str()) {
                        slot.0.push(ta.clone());
                        slot.1.push((*t).clone());
                        let (pa, pb) = (ra.p_hat[&ta.instance_id], rb.p_hat[&ta.instance_id]);
                        scatter_rows.push(format!(
                            "{},{},{},{pa},{pb}",
                            ta.instance_id,
                            csv_field(a),
                            csv_field(b)
                        ));
                        p_a.push((ta.instance_id.clone(), pa));
                        p_b.push((ta.instance_id.clone(), pb));
                    }
                }
            }
            for ((alpha, range), (ta, tb)) in &by_ar {
                let seed = class_seed(opts.bootstrap_seed, &["ratio", a, b, alpha, range]);
                for point in ratio_curve(ta, tb, opts.resamples, seed)? {
                    ratio_rows.push(format!(
                        "{},{},{alpha},{range},{},{},{},{}",
                        csv_field(a),
                        csv_field(b),
                        point.size,
                        point.median,
                        point.stddev,
                        point.count
                    ));
                    let ids: Vec<&str> =
                        ta.iter().filter(|t| t.size == point.size).map(|t| t.instance_id.as_str()).collect();
                    provenance.push(format!(
                        "ratio,{},,0,{}",
                        csv_field(&format!("{a} / {b} L={} alpha={alpha} R={range}", point.size)),
                        csv_field(&ids.join(";"))
                    ));
                }
            }
            if let Ok(c) = correlate(&p_a, &p_b) {
                correlations.push((a.to_string(), b.to_string(), c.r, c.pairs.len()));
            }
        }
    }

    // scaling fits over L for each (label, alpha, R)
    let mut series: BTreeMap<(String, String, String), Vec<(usize, &ClassResult)>> = BTreeMap::new();
    for ((label, (size, alpha, range)), r) in &results {
        series.entry((label.clone(), alpha.clone(), range.clone())).or_default().push((*size, r));
    }
    let mut scaling_rows = Vec::new();
    let mut b_table: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for ((label, alpha, range), points) in &series {
        let solver = format!("{label}/R{range}");
        if points.len() < 3 {
            report.warnings.push(format!("{solver} alpha={alpha}: {} sizes, scaling fit needs 3", points.len()));
            continue;
        }
        let pts: Vec<(f64, f64)> = points.iter().map(|(l, r)| (*l as f64, r.median)).collect();
        let boot: Vec<Vec<f64>> = points.iter().map(|(_, r)| r.resampled.clone()).collect();
        let cell = match fit_scaling(&pts, &boot) {
            Ok(fit) => {
                scaling_rows.push(format!(
                    "{},{alpha},{},{},{}",
                    csv_field(&solver),
                    fit.b,
                    fit.b_stddev,
                    2.0 * fit.b_stddev
                ));
                format!("{:.4}±{:.4}", fit.b, fit.b_stddev)
            }
            Err(_) => {
                scaling_rows.push(format!("{},{alpha},excluded,,", csv_field(&solver)));
                "excluded".into()
            }
        };
        let sizes: Vec<String> = points.iter().map(|(l, _)| l.to_string()).collect();
        provenance.push(format!(
            "scaling,{},,0,{}",
            csv_field(&format!("{solver} alpha={alpha}")),
            csv_field(&format!("L={}", sizes.join(";")))
        ));
        b_table.entry(solver).or_default().insert(alpha.clone(), cell);
    }

    write_table(out, "tts_median.csv", "solver,L,alpha,R,median_us,boot_std,unsolved_frac", &tts_rows)?;
    write_table(out, "ratio.csv", "solver_a,solver_b,alpha,R,L,ratio_a_over_b,boot_std,instances", &ratio_rows)?;
    write_table(out, "scaling.csv", "solver,alpha,b,b_1sigma,b_2sigma", &scaling_rows)?;
    write_table(out, "scatter.csv", "instance_id,solver_a,solver_b,p_a,p_b", &scatter_rows)?;
    write_table(out, "provenance.csv", "table,row,selected_params,missing_instances,sources", &provenance)?;

    report.summary = summary(&results, &b_table, &correlations);
    Ok(report)
}

fn summary(
    results: &BTreeMap<(String, Class), ClassResult>,
    b_table: &BTreeMap<String, BTreeMap<String, String>>,
    correlations: &[(String, String, Option<f64>, usize)],
) -> String {
    let mut s = String::new();
    // hardest alpha: largest median TTS at the largest size measured
    let mut hardest: BTreeMap<(String, String), (usize, f64, String)> = BTreeMap::new();
    for ((label, (size, alpha, range)), r) in results {
        let slot = hardest.entry((label.clone(), range.clone())).or_insert((0, f64::NEG_INFINITY, String::new()));
        if *size > slot.0 || (*size == slot.0 && r.median > slot.1) {
            *slot = (*size, r.median, alpha.clone());
        }
    }
    let _ = writeln!(s, "hardest alpha (largest median TTS at the largest L):");
    for ((label, range), (size, median, alpha)) in &hardest {
        let _ = writeln!(s, "  {label:<24} R={range:<4} L={size}  alpha={alpha}  median={median:.4e} us");
    }
    if !b_table.is_empty() {
        let alphas: BTreeSet<&String> = b_table.values().flat_map(|m| m.keys()).collect();
        let _ = write!(s, "scaling b(alpha):\n  {:<28}", "solver");
        for a in &alphas {
            let _ = write!(s, " {a:>16}");
        }
        s.push('\n');
        for (solver, row) in b_table {
            let _ = write!(s, "  {solver:<28}");
            for a in &alphas {
                let _ = write!(s, " {:>16}", row.get(*a).map_or("-", String::as_str));
            }
            s.push('\n');
        }
    }
    for (a, b, r, n) in correlations {
        match r {
            Some(r) => {
                let _ = writeln!(s, "p_hat correlation {a} vs {b}: r = {r:.4} over {n} instances");
            }
            None => {
                let _ = writeln!(s, "p_hat correlation {a} vs {b}: undefined (zero variance) over {n} instances");
            }
        }
    }
    s
}
