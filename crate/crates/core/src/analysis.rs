//! Time-to-solution estimation, bootstrap spreads, ratio curves, exponential
//! scaling fits and success-probability correlation.
//!
//! Time to solution uses the R99 convention: with per-run success probability
//! `p` and run time `t`, `TTS = t * ln(0.01) / ln(1 - p)`, floored at `t` once
//! `p >= 0.99`, and infinite when `p = 0`. Parallel-hardware divisors (the
//! qubit count `n` for SAS, `L` for HFS) divide `t` before the formula.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{invalid, Result};
use crate::rng;

pub const TARGET_CONFIDENCE: f64 = 0.99;
pub const DEFAULT_RESAMPLES: usize = 1000;

pub fn tts(p: f64, run_time_us: f64, divisor: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("success probability {p} outside [0, 1]")));
    }
    if !(run_time_us > 0.0) {
        return Err(invalid(format!("run time must be positive, got {run_time_us}")));
    }
    if !(divisor >= 1.0) {
        return Err(invalid(format!("parallel divisor must be at least 1, got {divisor}")));
    }
    let t = run_time_us / divisor;
    Ok(if p == 0.0 {
        f64::INFINITY
    } else if p >= TARGET_CONFIDENCE {
        t
    } else {
        t * (1.0 - TARGET_CONFIDENCE).ln() / (1.0 - p).ln()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverKind {
    Sas,
    Saa,
    Hfs,
    Brute,
}

impl SolverKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "sas" => Some(Self::Sas),
            "saa" => Some(Self::Saa),
            "hfs" => Some(Self::Hfs),
            "brute" => Some(Self::Brute),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sas => "sas",
            Self::Saa => "saa",
            Self::Hfs => "hfs",
            Self::Brute => "brute",
        }
    }

    /// Hypothetical parallel speedup: all `n` spins at once for SAS, `L`
    /// simultaneous cell updates for HFS (`L = sqrt(N / 8)`), none otherwise.
    pub fn parallel_divisor(self, functional_qubits: usize, physical_qubits: usize) -> f64 {
        match self {
            Self::Sas => functional_qubits as f64,
            Self::Hfs => (physical_qubits as f64 / 8.0).sqrt(),
            Self::Saa | Self::Brute => 1.0,
        }
    }
}

/// Successes over runs for one instance under one solver configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SuccessStats {
    pub instance_id: String,
    pub solver: String,
    pub runs: u64,
    pub successes: u64,
    /// Model time of one run.
    pub run_model_time_us: f64,
}

impl SuccessStats {
    pub fn p_hat(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.successes as f64 / self.runs as f64
        }
    }

    pub fn tts(&self, divisor: f64) -> Result<TtsEstimate> {
        Ok(TtsEstimate {
            instance_id: self.instance_id.clone(),
            solver: self.solver.clone(),
            tts_us: tts(self.p_hat(), self.run_model_time_us, divisor)?,
            parallel_divisor: divisor,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtsEstimate {
    pub instance_id: String,
    pub solver: String,
    pub tts_us: f64,
    pub parallel_divisor: f64,
}

/// Median of the full multiset; `+inf` entries sort last, NaN entries are dropped.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else if v[m - 1].is_infinite() || v[m].is_infinite() {
        v[m - 1].max(v[m])
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Sample standard deviation; infinite if any entry is infinite.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    if values.iter().any(|v| v.is_infinite()) {
        return f64::INFINITY;
    }
    if values.iter().all(|v| *v == values[0]) {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Medians of `resamples` with-replacement resamples; resample `b` uses substream `b` of `seed`.
pub fn bootstrap_medians(values: &[f64], resamples: usize, seed: u64) -> Vec<f64> {
    let mut buf = vec![0.0; values.len()];
    (0..resamples)
        .map(|b| {
            let mut r = rng::stream(seed, b as u64);
            for slot in buf.iter_mut() {
                *slot = values[r.random_range(0..values.len())];
            }
            median(&buf)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MedianSpread {
    pub median: f64,
    pub stddev: f64,
    pub unsolved_fraction: f64,
    /// Resampled medians, kept for downstream fits.
    pub resampled: Vec<f64>,
}

/// Median with a one-sigma bootstrap spread; infinite values count as unsolved.
pub fn median_tts_bootstrap(values: &[f64], resamples: usize, seed: u64) -> Result<MedianSpread> {
    if values.is_empty() {
        return Err(invalid("empty class"));
    }
    if resamples == 0 {
        return Err(invalid("need at least one bootstrap resample"));
    }
    let resampled = bootstrap_medians(values, resamples, seed);
    Ok(MedianSpread {
        median: median(values),
        stddev: std_dev(&resampled),
        unsolved_fraction: values.iter().filter(|v| v.is_infinite()).count() as f64 / values.len() as f64,
        resampled,
    })
}

/// Grid value with the smallest median TTS, ties toward the earlier (smaller)
/// grid value. `None` when every median is infinite.
pub fn select_optimal<K: Copy + Ord>(grid: &BTreeMap<K, Vec<f64>>) -> Option<K> {
    let mut best: Option<(K, f64)> = None;
    for (&k, values) in grid {
        let m = median(values);
        if m.is_finite() && best.is_none_or(|(_, b)| m < b) {
            best = Some((k, m));
        }
    }
    best.map(|(k, _)| k)
}

/// TTS of one instance, tagged with its size for per-size aggregation.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceTts {
    pub instance_id: String,
    pub size: usize,
    pub tts_us: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioPoint {
    pub size: usize,
    pub median: f64,
    pub stddev: f64,
    /// Instances whose ratio was defined (not both unsolved).
    pub count: usize,
}

/// Per-size median of instancewise `a / b` ratios. A rising curve means `a`
/// gains on `b` as instances grow. Instances unsolved by both solvers are left out.
pub fn ratio_curve(a: &[InstanceTts], b: &[InstanceTts], resamples: usize, seed: u64) -> Result<Vec<RatioPoint>> {
    let index: BTreeMap<&str, &InstanceTts> = b.iter().map(|t| (t.instance_id.as_str(), t)).collect();
    if index.len() != b.len() || a.len() != b.len() {
        return Err(invalid("ratio inputs must cover the same instances exactly once"));
    }
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for ta in a {
        let tb = index
            .get(ta.instance_id.as_str())
            .ok_or_else(|| invalid(format!("instance {} missing from second solver", ta.instance_id)))?;
        if tb.size != ta.size {
            return Err(invalid(format!("instance {} has inconsistent sizes", ta.instance_id)));
        }
        let r = ta.tts_us / tb.tts_us;
        let entry = by_size.entry(ta.size).or_default();
        if !r.is_nan() {
            entry.push(r);
        }
    }
    Ok(by_size
        .into_iter()
        .map(|(size, ratios)| {
            let stddev = if ratios.is_empty() {
                f64::NAN
            } else {
                std_dev(&bootstrap_medians(&ratios, resamples, rng::derive_seed(seed, size as u64)))
            };
            RatioPoint { size, median: median(&ratios), stddev, count: ratios.len() }
        })
        .collect())
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `median TTS ~ exp(b L)` fitted on `(L, ln median)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub b: f64,
    pub intercept: f64,
    /// One-sigma spread of `b` over bootstrap refits.
    pub b_stddev: f64,
}

/// Fit the scaling slope; `bootstrap[i]` holds resampled medians for point `i`,
/// all of equal length. Resamples with an infinite median are skipped.
pub fn fit_scaling(points: &[(f64, f64)], bootstrap: &[Vec<f64>]) -> Result<ScalingFit> {
    let distinct: BTreeSet<u64> = points.iter().map(|p| p.0.to_bits()).collect();
    if distinct.len() < 3 {
        return Err(invalid(format!("scaling fit needs at least 3 sizes, got {}", distinct.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.1.is_finite() && p.1 > 0.0)) {
        return Err(invalid(format!("median at L={} is not finite and positive", p.0)));
    }
    if !bootstrap.is_empty() && bootstrap.len() != points.len() {
        return Err(invalid("one bootstrap set per point required"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (b, intercept) = fit_line(&xs, &ys);

    let resamples = bootstrap.iter().map(Vec::len).min().unwrap_or(0);
    let slopes: Vec<f64> = (0..resamples)
        .filter_map(|r| {
            let ys: Vec<f64> = bootstrap.iter().map(|set| set[r].ln()).collect();
            ys.iter().all(|y| y.is_finite()).then(|| fit_line(&xs, &ys).0)
        })
        .collect();
    Ok(ScalingFit { points: points.to_vec(), b, intercept, b_stddev: std_dev(&slopes) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    /// Pearson coefficient; `None` when either side has zero variance.
    pub r: Option<f64>,
    pub pairs: Vec<(String, f64, f64)>,
}

/// Pearson correlation of instancewise success probabilities.
pub fn correlate(a: &[(String, f64)], b: &[(String, f64)]) -> Result<Correlation> {
    let index: BTreeMap<&str, f64> = b.iter().map(|(id, p)| (id.as_str(), *p)).collect();
    let pairs: Vec<(String, f64, f64)> = a
        .iter()
        .filter_map(|(id, pa)| index.get(id.as_str()).map(|pb| (id.clone(), *pa, *pb)))
        .collect();
    if pairs.len() < 3 {
        return Err(invalid(format!("correlation needs at least 3 aligned instances, got {}", pairs.len())));
    }
    let n = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mb = pairs.iter().map(|p| p.2).sum::<f64>() / n;
    let cov: f64 = pairs.iter().map(|p| (p.1 - ma) * (p.2 - mb)).sum();
    let va: f64 = pairs.iter().map(|p| (p.1 - ma).powi(2)).sum();
    let vb: f64 = pairs.iter().map(|p| (p.2 - mb).powi(2)).sum();
    let constant = |pick: fn(&(String, f64, f64)) -> f64| pairs.iter().all(|p| pick(p) == pick(&pairs[0]));
    let r = (!constant(|p| p.1) && !constant(|p| p.2)).then(|| (cov / (va * vb).sqrt()).clamp(-1.0, 1.0));
    Ok(Correlation { r, pairs })
}
