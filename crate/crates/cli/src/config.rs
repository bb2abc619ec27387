//! Experiment configuration: a flat `key = value` file, one setting per line,
//! lists given by repeating the key or by commas. `#` starts a comment.
//!
//! ```text
//! sizes = 4, 5, 6
//! alphas = 0.25
//! ranges = 2
//! ranges = inf
//! policy = cell-rejection
//! instances_per_class = 50
//! master_seed = 1
//! runs = 20
//! solver = sas sweeps=64,128,256,512 max_restarts=1
//! solver = saa beta_final=3,4,5 sweeps=100000 repetitions=1000
//! solver = hfs
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use flbench::{Alpha, LoopPolicy, RangeLimit};

use crate::error::{config, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverName {
    Sas,
    Saa,
    Hfs,
    Brute,
}

impl SolverName {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "sas" => Ok(Self::Sas),
            "saa" => Ok(Self::Saa),
            "hfs" => Ok(Self::Hfs),
            "brute" => Ok(Self::Brute),
            _ => Err(config(format!("unknown solver '{s}' (expected sas, saa, hfs or brute)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sas => "sas",
            Self::Saa => "saa",
            Self::Hfs => "hfs",
            Self::Brute => "brute",
        }
    }
}

/// One point of a solver's parameter grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverParams {
    Sas { sweeps: u64, max_restarts: u64 },
    Saa { beta_final: f64, sweeps: u64, repetitions: u64 },
    /// `stall_rounds: None` means the size-dependent default.
    Hfs { stall_rounds: Option<u64>, max_rounds: Option<u64> },
    Brute,
}

pub const DEFAULT_SAS_SWEEPS: u64 = 1024;
pub const DEFAULT_SAA_REPETITIONS: u64 = 1000;

impl SolverParams {
    pub fn name(&self) -> SolverName {
        match self {
            Self::Sas { .. } => SolverName::Sas,
            Self::Saa { .. } => SolverName::Saa,
            Self::Hfs { .. } => SolverName::Hfs,
            Self::Brute => SolverName::Brute,
        }
    }

    /// Canonical parameter string stored in result records.
    pub fn canonical(&self) -> String {
        match *self {
            Self::Sas { sweeps, max_restarts } => format!("sweeps={sweeps},max_restarts={max_restarts}"),
            Self::Saa { beta_final, sweeps, repetitions } => {
                format!("beta_final={beta_final},sweeps={sweeps},repetitions={repetitions}")
            }
            Self::Hfs { stall_rounds, max_rounds } => {
                let mut s = match stall_rounds {
                    Some(r) => format!("stall_rounds={r}"),
                    None => "stall_rounds=auto".to_string(),
                };
                if let Some(m) = max_rounds {
                    s.push_str(&format!(",max_rounds={m}"));
                }
                s
            }
            Self::Brute => String::new(),
        }
    }

    /// Sweeps per anneal for the annealers; the axis optimized over in analysis.
    pub fn sweeps(&self) -> Option<u64> {
        match *self {
            Self::Sas { sweeps, .. } | Self::Saa { sweeps, .. } => Some(sweeps),
            _ => None,
        }
    }

    /// Table label: the solver plus any parameters that change what is being
    /// measured. Sweep counts, restart caps and repetition counts are not part of it.
    pub fn label(&self) -> String {
        match *self {
            Self::Sas { .. } => "sas".into(),
            Self::Saa { beta_final, .. } => format!("saa(beta_f={beta_final})"),
            Self::Hfs { stall_rounds: None, max_rounds: None } => "hfs".into(),
            Self::Hfs { .. } => format!("hfs({})", self.canonical()),
            Self::Brute => "brute".into(),
        }
    }

    /// Inverse of [`canonical`](Self::canonical).
    pub fn from_canonical(name: SolverName, params: &str) -> CliResult<Self> {
        let mut grid = expand(name, params.split(',').filter(|t| !t.is_empty()))?;
        if grid.len() != 1 {
            return Err(config(format!("'{params}' is not a single parameter set")));
        }
        Ok(grid.remove(0))
    }
}

impl fmt::Display for SolverParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name().as_str(), self.canonical())
    }
}

fn parse_list<T>(key: &str, values: &str, parse: impl Fn(&str) -> Option<T>) -> CliResult<Vec<T>> {
    values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse(v).ok_or_else(|| config(format!("bad value '{v}' for {key}"))))
        .collect()
}

/// Cartesian product of `key=v1,v2` settings for one solver.
fn expand<'a>(name: SolverName, settings: impl Iterator<Item = &'a str>) -> CliResult<Vec<SolverParams>> {
    let mut sweeps: Option<Vec<u64>> = None;
    let mut max_restarts = vec![1];
    let mut beta_final = vec![5.0];
    let mut repetitions = vec![DEFAULT_SAA_REPETITIONS];
    let mut stall_rounds: Vec<Option<u64>> = vec![None];
    let mut max_rounds: Vec<Option<u64>> = vec![None];
    let positive = |v: &str| v.parse::<u64>().ok().filter(|&x| x > 0);
    let mut pending: Option<(&str, String)> = None;
    // commas separate both list values and settings in canonical strings,
    // so a bare value continues the previous key
    let mut settings_list: Vec<(String, String)> = Vec::new();
    for token in settings {
        match token.split_once('=') {
            Some((k, v)) => {
                if let Some((pk, pv)) = pending.take() {
                    settings_list.push((pk.to_string(), pv));
                }
                pending = Some((k, v.to_string()));
            }
            None => match pending.as_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(token);
                }
                None => return Err(config(format!("expected key=value, got '{token}'"))),
            },
        }
    }
    if let Some((pk, pv)) = pending {
        settings_list.push((pk.to_string(), pv));
    }
    for (key, values) in &settings_list {
        let key = key.as_str();
        match (name, key) {
            (SolverName::Sas | SolverName::Saa, "sweeps") => sweeps = Some(parse_list(key, values, positive)?),
            (SolverName::Sas, "max_restarts") => max_restarts = parse_list(key, values, |v| v.parse().ok())?,
            (SolverName::Saa, "beta_final") => {
                beta_final = parse_list(key, values, |v| v.parse::<f64>().ok().filter(|b| b.is_finite() && *b > 0.01))?
            }
            (SolverName::Saa, "repetitions") => repetitions = parse_list(key, values, positive)?,
            (SolverName::Hfs, "stall_rounds") => {
                stall_rounds = parse_list(key, values, |v| if v == "auto" { Some(None) } else { positive(v).map(Some) })?
            }
            (SolverName::Hfs, "max_rounds") => max_rounds = parse_list(key, values, |v| positive(v).map(Some))?,
            _ => return Err(config(format!("solver {} takes no parameter '{key}'", name.as_str()))),
        }
    }
    let sweeps = sweeps.unwrap_or_else(|| match name {
        SolverName::Saa => vec![flbench::SaSchedule::EQUILIBRATED_SWEEPS],
        _ => vec![DEFAULT_SAS_SWEEPS],
    });
    let mut grid = Vec::new();
    match name {
        SolverName::Sas => {
            for &s in &sweeps {
                for &m in &max_restarts {
                    grid.push(SolverParams::Sas { sweeps: s, max_restarts: m });
                }
            }
        }
        SolverName::Saa => {
            for &b in &beta_final {
                for &s in &sweeps {
                    for &r in &repetitions {
                        grid.push(SolverParams::Saa { beta_final: b, sweeps: s, repetitions: r });
                    }
                }
            }
        }
        SolverName::Hfs => {
            for &s in &stall_rounds {
                for &m in &max_rounds {
                    grid.push(SolverParams::Hfs { stall_rounds: s, max_rounds: m });
                }
            }
        }
        SolverName::Brute => grid.push(SolverParams::Brute),
    }
    Ok(grid)
}

/// Parse a solver entry such as `sas sweeps=64,128 max_restarts=1`.
pub fn parse_solver_entry(entry: &str) -> CliResult<Vec<SolverParams>> {
    let mut tokens = entry.split_whitespace();
    let name = SolverName::parse(tokens.next().ok_or_else(|| config("empty solver entry"))?)?;
    // allow `sweeps = 64, 128` spacing by rejoining
    let rest: Vec<&str> = tokens.collect();
    let joined = rest.join(" ").replace(", ", ",").replace(" ,", ",").replace(" = ", "=");
    expand(name, joined.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub alphas: Vec<Alpha>,
    pub ranges: Vec<RangeLimit>,
    pub policy: LoopPolicy,
    pub instances_per_class: usize,
    pub solvers: Vec<SolverParams>,
    pub master_seed: u64,
    pub out: PathBuf,
    /// Records per (instance, solver, parameters).
    pub runs: u64,
    pub bootstrap_seed: u64,
    pub resamples: usize,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sizes: Vec::new(),
            alphas: Vec::new(),
            ranges: Vec::new(),
            policy: LoopPolicy::CellRejection,
            instances_per_class: 1,
            solvers: Vec::new(),
            master_seed: 0,
            out: PathBuf::from("."),
            runs: 1,
            bootstrap_seed: 0,
            resamples: flbench::analysis::DEFAULT_RESAMPLES,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config(format!("line {}: expected key = value", no + 1)))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                CliError::Config(m) => config(format!("line {}: {m}", no + 1)),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    /// Apply one setting; list keys append.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let single = |v: &str| -> CliResult<u64> { v.parse().map_err(|_| config(format!("bad value '{v}' for {key}"))) };
        match key {
            "sizes" | "size" => self.sizes.extend(parse_list(key, value, |v| {
                v.parse::<usize>().ok().filter(|&l| (1..=flbench::chimera::MAX_SIZE).contains(&l))
            })?),
            "alphas" | "alpha" => self.alphas.extend(parse_list(key, value, |v| v.parse::<Alpha>().ok())?),
            "ranges" | "range" | "R" => self.ranges.extend(parse_list(key, value, |v| v.parse::<RangeLimit>().ok())?),
            "policy" => self.policy = value.parse().map_err(|_| config(format!("bad policy '{value}'")))?,
            "instances_per_class" | "instances" => {
                self.instances_per_class = single(value)? as usize;
            }
            "solver" | "solvers" => self.solvers.extend(parse_solver_entry(value)?),
            "master_seed" | "seed" => self.master_seed = single(value)?,
            "out" => self.out = PathBuf::from(value),
            "runs" => self.runs = single(value)?,
            "bootstrap_seed" => self.bootstrap_seed = single(value)?,
            "resamples" => self.resamples = single(value)? as usize,
            "workers" => self.workers = Some(single(value)? as usize),
            _ => return Err(config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Checks needed before generating instances.
    pub fn validate_corpus(&self) -> CliResult<()> {
        if self.sizes.is_empty() || self.alphas.is_empty() || self.ranges.is_empty() {
            return Err(config("sizes, alphas and ranges must each list at least one value"));
        }
        if self.instances_per_class == 0 {
            return Err(config("instances_per_class must be at least 1"));
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> CliResult<()> {
        self.validate_corpus()?;
        if self.solvers.is_empty() {
            return Err(config("no solver entries"));
        }
        if self.runs == 0 {
            return Err(config("runs must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(config("workers must be at least 1"));
        }
        Ok(())
    }

    /// Solver grid with repeated entries removed, in first-seen order,
    /// plus a warning line per duplicate.
    pub fn deduplicated_solvers(&self) -> (Vec<SolverParams>, Vec<String>) {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut warnings = Vec::new();
        for p in &self.solvers {
            if seen.insert((p.name(), p.canonical())) {
                out.push(*p);
            } else {
                warnings.push(format!("duplicate solver entry '{p}' ignored"));
            }
        }
        (out, warnings)
    }
}
