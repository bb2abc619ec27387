//! Instance corpus on disk: `instances/<id>.flq` plus `manifest.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use flbench::format::{read_instance, write_instance};
use flbench::rng::hash64;
use flbench::{generate_instance, Alpha, ChimeraTopology, Error, FrustratedLoopInstance, RangeLimit};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{validation, CliError, CliResult};

pub const MANIFEST: &str = "manifest.csv";
pub const INSTANCE_DIR: &str = "instances";
const MANIFEST_HEADER: &str = "instance_id,L,n,alpha,R,policy,index,seed,k,planted_energy,status";

/// Seed of instance `index` in class `(L, alpha, R)`:
/// `hash64([master_seed, L, alpha numerator, alpha denominator, R (0 = unlimited), index])`.
pub fn instance_seed(master_seed: u64, size: usize, alpha: Alpha, range: RangeLimit, index: usize) -> u64 {
    let ratio = alpha.ratio();
    hash64(&[master_seed, size as u64, *ratio.numer() as u64, *ratio.denom() as u64, range.code(), index as u64])
}

pub fn instance_id(size: usize, alpha: Alpha, range: RangeLimit, index: usize) -> String {
    format!("L{size}_a{alpha}_R{range}_{index:04}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub instance_id: String,
    pub size: usize,
    pub n: usize,
    pub alpha: String,
    pub range: String,
    pub policy: String,
    pub index: usize,
    pub seed: u64,
    pub k: usize,
    pub planted_energy: i64,
    /// `ok`, or why no file exists.
    pub status: String,
}

impl ManifestEntry {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn physical_qubits(&self) -> usize {
        8 * self.size * self.size
    }

    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.instance_id, self.size, self.n, self.alpha, self.range, self.policy, self.index, self.seed, self.k, self.planted_energy, self.status
        )
    }

    fn from_line(line: &str, no: usize) -> CliResult<Self> {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || validation(format!("{MANIFEST} line {no}: malformed row"));
        if f.len() != 11 {
            return Err(bad());
        }
        Ok(Self {
            instance_id: f[0].to_string(),
            size: f[1].parse().map_err(|_| bad())?,
            n: f[2].parse().map_err(|_| bad())?,
            alpha: f[3].to_string(),
            range: f[4].to_string(),
            policy: f[5].to_string(),
            index: f[6].parse().map_err(|_| bad())?,
            seed: f[7].parse().map_err(|_| bad())?,
            k: f[8].parse().map_err(|_| bad())?,
            planted_energy: f[9].parse().map_err(|_| bad())?,
            status: f[10].to_string(),
        })
    }
}

pub fn instance_path(out: &Path, id: &str) -> PathBuf {
    out.join(INSTANCE_DIR).join(format!("{id}.flq"))
}

pub fn read_manifest(path: &Path) -> CliResult<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(validation(format!("{}: not a manifest (bad header)", path.display())));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| ManifestEntry::from_line(l, i + 2))
        .collect()
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn load_instance(path: &Path) -> CliResult<FrustratedLoopInstance> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    read_instance(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
}

/// Outcome of `generate`.
#[derive(Debug, Default)]
pub struct GenerateReport {
    pub written: usize,
    pub unchanged: usize,
    pub exhausted: usize,
}

/// Generate every instance of the configured corpus under `cfg.out`.
///
/// Existing files are left alone when byte-identical to what the config
/// produces; a differing file means the directory belongs to another
/// configuration and is a validation error. Exhausted generations are listed
/// in the manifest and do not stop the batch.
pub fn generate(cfg: &ExperimentConfig) -> CliResult<(Vec<ManifestEntry>, GenerateReport)> {
    cfg.validate_corpus()?;
    let dir = cfg.out.join(INSTANCE_DIR);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let mut jobs = Vec::new();
    for &size in &cfg.sizes {
        for &alpha in &cfg.alphas {
            for &range in &cfg.ranges {
                for index in 0..cfg.instances_per_class {
                    jobs.push((size, alpha, range, index));
                }
            }
        }
    }
    let topologies: BTreeMap<usize, Arc<ChimeraTopology>> = cfg
        .sizes
        .iter()
        .map(|&l| Ok((l, Arc::new(ChimeraTopology::build(l)?))))
        .collect::<Result<_, Error>>()?;

    let built: Vec<(ManifestEntry, Option<String>)> = jobs
        .par_iter()
        .map(|&(size, alpha, range, index)| {
            let topo = &topologies[&size];
            let seed = instance_seed(cfg.master_seed, size, alpha, range, index);
            let mut entry = ManifestEntry {
                instance_id: instance_id(size, alpha, range, index),
                size,
                n: topo.num_functional(),
                alpha: alpha.to_string(),
                range: range.to_string(),
                policy: cfg.policy.to_string(),
                index,
                seed,
                k: alpha.loop_count(topo.num_functional()),
                planted_energy: 0,
                status: "ok".into(),
            };
            match generate_instance(topo, alpha, range, cfg.policy, seed) {
                Ok(inst) => {
                    entry.planted_energy = inst.planted_energy();
                    Ok((entry, Some(write_instance(&inst))))
                }
                Err(Error::GenerationExhausted { loop_index, attempts }) => {
                    entry.status = format!("exhausted(loop={loop_index};attempts={attempts})");
                    Ok((entry, None))
                }
                Err(e) => Err(CliError::from(e)),
            }
        })
        .collect::<CliResult<_>>()?;

    let mut report = GenerateReport::default();
    let mut entries = Vec::with_capacity(built.len());
    let mut failure = None;
    for (mut entry, text) in built {
        if let Some(text) = text {
            if failure.is_none() {
                let path = instance_path(&cfg.out, &entry.instance_id);
                match fs::read_to_string(&path) {
                    Ok(existing) if existing == text => report.unchanged += 1,
                    Ok(_) => {
                        return Err(validation(format!(
                            "{} exists with different contents; use a fresh output directory",
                            path.display()
                        )))
                    }
                    Err(_) => match write_atomic(&path, &text) {
                        Ok(()) => report.written += 1,
                        Err(e) => failure = Some(e),
                    },
                }
            }
            if failure.is_some() {
                entry.status = "not-written".into();
            }
        } else {
            report.exhausted += 1;
        }
        entries.push(entry);
    }
    entries.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    for e in &entries {
        manifest.push_str(&e.to_line());
        manifest.push('\n');
    }
    let manifest_written = write_atomic(&cfg.out.join(MANIFEST), &manifest);
    if let Some(e) = failure {
        return Err(e);
    }
    manifest_written?;
    Ok((entries, report))
}
