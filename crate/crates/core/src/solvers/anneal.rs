//! Metropolis simulated annealing, as a restart-until-success solver (SAS)
//! and as a fixed-schedule thermal sampler (SAA).

use rand::RngCore;
use rayon::prelude::*;
use wide::bytemuck::cast;
use wide::{i32x8, u32x8};

use super::{Sample, SolveResult, TAU_SA_US};
use crate::error::{invalid, Result};
use crate::ising::{IsingModel, SpinState};
use crate::rng;
use crate::scalar::Real;

/// Linear-in-beta schedule: sweep `t` of `sweeps` runs at
/// `beta_start + (beta_end - beta_start) * t / (sweeps - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: u64,
}

impl SaSchedule {
    pub const DEFAULT_BETA_START: f64 = 0.01;
    pub const DEFAULT_BETA_END: f64 = 5.0;
    /// Schedule length used when the thermal annealer should sit close to equilibrium.
    pub const EQUILIBRATED_SWEEPS: u64 = 100_000;

    pub fn new(beta_start: f64, beta_end: f64, sweeps: u64) -> Result<Self> {
        if !(beta_start > 0.0 && beta_start < beta_end && beta_end.is_finite()) {
            return Err(invalid(format!("need 0 < beta_start < beta_end, got {beta_start}..{beta_end}")));
        }
        if sweeps == 0 {
            return Err(invalid("schedule needs at least one sweep"));
        }
        Ok(Self { beta_start, beta_end, sweeps })
    }

    /// Solver-mode schedule over `[0.01, 5]`.
    pub fn solver(sweeps: u64) -> Result<Self> {
        Self::new(Self::DEFAULT_BETA_START, Self::DEFAULT_BETA_END, sweeps)
    }

    /// Annealer-mode schedule from `0.01` to `beta_final`.
    pub fn annealer(beta_final: f64, sweeps: u64) -> Result<Self> {
        Self::new(Self::DEFAULT_BETA_START, beta_final, sweeps)
    }

    #[inline]
    pub fn beta(&self, t: u64) -> f64 {
        if self.sweeps == 1 {
            return self.beta_end;
        }
        self.beta_start + (self.beta_end - self.beta_start) * t as f64 / (self.sweeps - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.beta_start, self.beta_end, self.sweeps).map(|_| ())
    }
}

enum Weights {
    /// Every bias and coupling is an integer multiple of `quantum`; local
    /// fields stay integral and acceptance compares against per-sweep level thresholds.
    Quantized { quantum: f64, fields: Vec<i32>, couplings: Vec<i32>, max_level: usize },
    Float { fields: Vec<f64>, couplings: Vec<f64> },
}

/// Replicas advanced in lockstep by the kernel.
pub const LANES: usize = 8;

/// Xoshiro128++ for [`LANES`] independent replicas, one vector lane each.
/// Replica seeds expand through SplitMix64 into the 128-bit state, matching
/// `rand_xoshiro::Xoshiro128PlusPlus::from_seed` on the same bytes.
struct LaneRng {
    s: [u32x8; 4],
}

impl LaneRng {
    fn new(seeds: &[u64; LANES]) -> Self {
        let mut s = [[0u32; LANES]; 4];
        for (l, &seed) in seeds.iter().enumerate() {
            for (k, w) in seed_words(seed).into_iter().enumerate() {
                s[k][l] = w;
            }
        }
        Self { s: s.map(u32x8::from) }
    }

    #[inline(always)]
    fn next(&mut self) -> u32x8 {
        let [s0, s1, s2, s3] = &mut self.s;
        let x = *s0 + *s3;
        let out = ((x << 7) | (x >> 25)) + *s0;
        let t = *s1 << 9;
        *s2 ^= *s0;
        *s3 ^= *s1;
        *s1 ^= *s2;
        *s0 ^= *s3;
        *s2 ^= t;
        *s3 = (*s3 << 11) | (*s3 >> 21);
        out
    }
}

/// 128-bit xoshiro state from a 64-bit replica seed.
pub(crate) fn seed_words(seed: u64) -> [u32; 4] {
    let a = rng::splitmix64(seed);
    let b = rng::splitmix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let words = [a as u32, (a >> 32) as u32, b as u32, (b >> 32) as u32];
    if words == [0; 4] {
        [1, 0, 0, 0]
    } else {
        words
    }
}

const SCALE: f64 = 4_294_967_296.0;
const SIGN: u32 = 0x8000_0000;
const REANCHOR: u64 = 1024;

/// Compact sparse form of a normalized model, reusable across anneals.
///
/// A replica visits spins in index order once per sweep and draws one 32-bit
/// uniform `r` per visit. An uphill move of `d` quanta is accepted iff
/// `r < floor(2^32 exp(-2 beta quantum d))`; non-uphill moves always are.
/// Replicas run [`LANES`] at a time, but a replica's trajectory depends only on its seed.
pub struct Annealer<'a, T> {
    model: &'a IsingModel<T>,
    qubits: Vec<u32>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    weights: Weights,
}

const NORMALIZED_SLACK: f64 = 1e-9;

impl<'a, T: Real> Annealer<'a, T> {
    pub fn new(model: &'a IsingModel<T>) -> Result<Self> {
        let max = model.max_magnitude().to_f64();
        if max > 1.0 + NORMALIZED_SLACK {
            return Err(invalid(format!("model is not normalized (max magnitude {max})")));
        }
        let topo = model.topology();
        let qubits: Vec<u32> = topo.functional_qubits().map(|q| q as u32).collect();
        let mut compact = vec![u32::MAX; topo.num_qubits()];
        for (i, &q) in qubits.iter().enumerate() {
            compact[q as usize] = i as u32;
        }
        let mut offsets = vec![0u32];
        let mut neighbors = Vec::new();
        let mut couplings = Vec::new();
        for &q in &qubits {
            for &(w, e) in topo.neighbors(q as usize) {
                neighbors.push(compact[w as usize]);
                couplings.push(model.couplings()[e as usize].to_f64());
            }
            offsets.push(neighbors.len() as u32);
        }
        let fields: Vec<f64> = qubits.iter().map(|&q| model.fields()[q as usize].to_f64()).collect();
        let weights = quantize(&fields, &couplings, &offsets)
            .unwrap_or(Weights::Float { fields, couplings });
        Ok(Self { model, qubits, offsets, neighbors, weights })
    }

    pub fn is_quantized(&self) -> bool {
        matches!(self.weights, Weights::Quantized { .. })
    }

    /// One anneal from a uniformly random state drawn from the replica stream `seed`.
    pub fn run_seeded(&self, schedule: &SaSchedule, target: T, seed: u64) -> Result<SolveResult<T>> {
        Ok(self.run_many(schedule, target, &[seed])?.remove(0))
    }

    /// One anneal; the replica stream is seeded from `rng`.
    pub fn run<R: RngCore + ?Sized>(&self, schedule: &SaSchedule, target: T, rng: &mut R) -> Result<SolveResult<T>> {
        self.run_seeded(schedule, target, rng.next_u64())
    }

    /// Independent anneals, one per seed. Output `i` equals `run_seeded(.., seeds[i])`.
    pub fn run_many(&self, schedule: &SaSchedule, target: T, seeds: &[u64]) -> Result<Vec<SolveResult<T>>> {
        schedule.validate()?;
        let batches: Vec<Vec<SolveResult<T>>> = seeds
            .par_chunks(LANES)
            .map(|chunk| {
                // spare lanes anneal throwaway replicas
                let mut lanes = [0u64; LANES];
                for (l, slot) in lanes.iter_mut().enumerate() {
                    *slot = chunk.get(l).copied().unwrap_or_else(|| rng::hash64(&[chunk[0], l as u64]));
                }
                let spins = self.anneal(schedule, &lanes);
                (0..chunk.len()).map(|l| self.finish(&spins, l, schedule, target)).collect()
            })
            .collect();
        Ok(batches.into_iter().flatten().collect())
    }

    fn finish(&self, spins: &[[i32; LANES]], lane: usize, schedule: &SaSchedule, target: T) -> SolveResult<T> {
        let mut state = SpinState::all_up(self.model.num_qubits());
        for (i, &q) in self.qubits.iter().enumerate() {
            state.set(q as usize, spins[i][lane] as i8);
        }
        let energy = self.model.energy_unchecked(state.as_slice());
        let success = energy.reaches(target);
        let work = schedule.sweeps as f64;
        SolveResult {
            best_state: state,
            best_energy: energy,
            success,
            samples: vec![Sample { energy, success }],
            work,
            model_time_us: work * TAU_SA_US,
            restarts: 1,
        }
    }

    /// Anneal one batch; returns final spins as `[spin][lane]`.
    fn anneal(&self, schedule: &SaSchedule, seeds: &[u64; LANES]) -> Vec<[i32; LANES]> {
        let mut rng = LaneRng::new(seeds);
        // initial state from the top bit of the first draws
        let spins: Vec<[i32; LANES]> = (0..self.qubits.len())
            .map(|_| rng.next().to_array().map(|r| if r & SIGN != 0 { -1 } else { 1 }))
            .collect();
        match &self.weights {
            Weights::Quantized { quantum, fields, couplings, max_level } => {
                self.sweep_quantized(schedule, spins, &mut rng, *quantum, fields, couplings, *max_level)
            }
            Weights::Float { fields, couplings } => self.sweep_float(schedule, spins, &mut rng, fields, couplings),
        }
    }

    fn local_fields<W>(&self, spins: &[[i32; LANES]], fields: &[W], couplings: &[W]) -> Vec<[W; LANES]>
    where
        W: Copy + std::ops::AddAssign + std::ops::Mul<Output = W> + From<i8>,
    {
        (0..self.qubits.len())
            .map(|i| {
                std::array::from_fn(|l| {
                    let mut f = fields[i];
                    for k in self.offsets[i] as usize..self.offsets[i + 1] as usize {
                        f += couplings[k] * W::from(spins[self.neighbors[k] as usize][l] as i8);
                    }
                    f
                })
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn sweep_quantized(
        &self,
        schedule: &SaSchedule,
        spins: Vec<[i32; LANES]>,
        rng: &mut LaneRng,
        quantum: f64,
        fields: &[i32],
        couplings: &[i32],
        max_level: usize,
    ) -> Vec<[i32; LANES]> {
        let mut local: Vec<i32x8> = self.local_fields(&spins, fields, couplings).into_iter().map(i32x8::from).collect();
        let mut spin: Vec<i32x8> = spins.into_iter().map(i32x8::from).collect();
        let edges: Vec<(u32, i32x8)> =
            self.neighbors.iter().zip(couplings).map(|(&j, &c)| (j, i32x8::splat(-2 * c))).collect();
        // thresholds of the levels d = 1, 2, ... that can still accept, sign-flipped
        // so unsigned order becomes signed order
        let mut levels: Vec<i32> = Vec::with_capacity(max_level);
        // no spin can be more uphill than the sum of its own weights
        let caps: Vec<usize> = (0..spin.len())
            .map(|i| {
                fields[i].unsigned_abs() as usize
                    + couplings[self.offsets[i] as usize..self.offsets[i + 1] as usize]
                        .iter()
                        .map(|c| c.unsigned_abs() as usize)
                        .sum::<usize>()
            })
            .collect();
        let flip_sign = u32x8::splat(SIGN);
        let minus_two = i32x8::splat(-2);
        // exp(-2 beta_t quantum) advances geometrically since beta is linear in t;
        // re-anchored periodically so rounding cannot drift
        let step = (-2.0 * (schedule.beta(1) - schedule.beta(0)) * quantum).exp();
        let mut base = 0.0;
        for t in 0..schedule.sweeps {
            base = if t % REANCHOR == 0 { (-2.0 * schedule.beta(t) * quantum).exp() } else { base * step };
            let mut p = 1.0;
            levels.clear();
            for _ in 0..max_level {
                p *= base;
                let threshold = (p * SCALE) as u64;
                if threshold == 0 {
                    break;
                }
                levels.push((threshold as u32 ^ SIGN) as i32);
            }
            for i in 0..spin.len() {
                let r: i32x8 = cast(rng.next() ^ flip_sign);
                // -(number of levels d with r < threshold_d); uphill d is accepted iff d <= that number
                let mut count = i32x8::splat(0);
                for &level in &levels[..caps[i].min(levels.len())] {
                    count += i32x8::splat(level).simd_gt(r);
                }
                let s = spin[i];
                let negative = s.is_negative();
                let aligned = (local[i] ^ negative) - negative; // s * local = -uphill
                let accept = !(aligned - count).is_negative();
                spin[i] = s ^ (accept & minus_two);
                // flipping s moves each neighbour's local field by -2 J s
                for &(j, c2) in &edges[self.offsets[i] as usize..self.offsets[i + 1] as usize] {
                    local[j as usize] += ((c2 ^ negative) - negative) & accept;
                }
            }
        }
        spin.into_iter().map(|s| s.to_array()).collect()
    }

    fn sweep_float(
        &self,
        schedule: &SaSchedule,
        mut spins: Vec<[i32; LANES]>,
        rng: &mut LaneRng,
        fields: &[f64],
        couplings: &[f64],
    ) -> Vec<[i32; LANES]> {
        let mut local = self.local_fields(&spins, fields, couplings);
        for t in 0..schedule.sweeps {
            let beta = schedule.beta(t);
            for i in 0..spins.len() {
                let draw = rng.next().to_array();
                let mut delta = [0.0; LANES];
                for l in 0..LANES {
                    let s = spins[i][l];
                    let uphill = -f64::from(s) * local[i][l];
                    let threshold = if uphill <= 0.0 { SCALE } else { ((-2.0 * beta * uphill).exp() * SCALE).floor() };
                    if f64::from(draw[l]) < threshold {
                        spins[i][l] = -s;
                        delta[l] = -2.0 * f64::from(s);
                    }
                }
                for k in self.offsets[i] as usize..self.offsets[i + 1] as usize {
                    let j = self.neighbors[k] as usize;
                    for l in 0..LANES {
                        local[j][l] += couplings[k] * delta[l];
                    }
                }
            }
        }
        spins
    }
}

fn quantize(fields: &[f64], couplings: &[f64], offsets: &[u32]) -> Option<Weights> {
    const MAX_LEVEL: f64 = 65_536.0;
    let quantum = fields
        .iter()
        .chain(couplings)
        .map(|v| v.abs())
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let quantum = if quantum.is_finite() { quantum } else { 1.0 };
    let level = |v: f64| -> Option<i32> {
        let r = (v / quantum).round();
        ((v / quantum - r).abs() <= 1e-6 * r.abs().max(1.0) && r.abs() <= MAX_LEVEL).then_some(r as i32)
    };
    let fields: Vec<i32> = fields.iter().map(|&v| level(v)).collect::<Option<_>>()?;
    let couplings: Vec<i32> = couplings.iter().map(|&v| level(v)).collect::<Option<_>>()?;
    let max_level = (0..fields.len())
        .map(|i| {
            fields[i].unsigned_abs() as usize
                + couplings[offsets[i] as usize..offsets[i + 1] as usize]
                    .iter()
                    .map(|c| c.unsigned_abs() as usize)
                    .sum::<usize>()
        })
        .max()
        .unwrap_or(0);
    (max_level as f64 <= MAX_LEVEL).then_some(Weights::Quantized { quantum, fields, couplings, max_level })
}

/// A single anneal on a normalized model.
pub fn sa_run<T: Real, R: RngCore + ?Sized>(
    model: &IsingModel<T>,
    schedule: &SaSchedule,
    target: T,
    rng: &mut R,
) -> Result<SolveResult<T>> {
    Annealer::new(model)?.run(schedule, target, rng)
}

/// Solver mode: independent anneals until one reaches `target` or
/// `max_restarts` anneals have run. Restart `r` uses replica seed `derive_seed(seed, r)`.
pub fn sas_solve<T: Real>(
    model: &IsingModel<T>,
    target: T,
    schedule: &SaSchedule,
    max_restarts: u64,
    seed: u64,
) -> Result<SolveResult<T>> {
    schedule.validate()?;
    let annealer = Annealer::new(model)?;
    let mut best: Option<SolveResult<T>> = None;
    let mut samples = Vec::new();
    // restarts run a batch at a time; anneals past the first success are discarded
    let mut next = 0;
    'batches: while next < max_restarts {
        let end = max_restarts.min(next + LANES as u64);
        let seeds: Vec<u64> = (next..end).map(|r| rng::derive_seed(seed, r)).collect();
        for run in annealer.run_many(schedule, target, &seeds)? {
            samples.push(run.samples[0].clone());
            let done = run.success;
            if best.as_ref().is_none_or(|b| run.best_energy < b.best_energy) {
                best = Some(run);
            }
            if done {
                break 'batches;
            }
        }
        next = end;
    }
    Ok(merge(model, best, samples, schedule.sweeps))
}

/// [`sas_solve`] for many independent seeds at once; output `i` equals
/// `sas_solve(model, target, schedule, max_restarts, seeds[i])`. Runs still
/// searching are advanced a restart at a time in shared batches.
pub fn sas_solve_many<T: Real>(
    model: &IsingModel<T>,
    target: T,
    schedule: &SaSchedule,
    max_restarts: u64,
    seeds: &[u64],
) -> Result<Vec<SolveResult<T>>> {
    schedule.validate()?;
    let annealer = Annealer::new(model)?;
    let mut best: Vec<Option<SolveResult<T>>> = vec![None; seeds.len()];
    let mut samples: Vec<Vec<Sample<T>>> = vec![Vec::new(); seeds.len()];
    let mut pending: Vec<usize> = (0..seeds.len()).collect();
    for r in 0..max_restarts {
        if pending.is_empty() {
            break;
        }
        let restart_seeds: Vec<u64> = pending.iter().map(|&i| rng::derive_seed(seeds[i], r)).collect();
        let runs = annealer.run_many(schedule, target, &restart_seeds)?;
        let mut still = Vec::with_capacity(pending.len());
        for (&i, run) in pending.iter().zip(runs) {
            samples[i].push(run.samples[0].clone());
            let done = run.success;
            if best[i].as_ref().is_none_or(|b| run.best_energy < b.best_energy) {
                best[i] = Some(run);
            }
            if !done {
                still.push(i);
            }
        }
        pending = still;
    }
    Ok(best
        .into_iter()
        .zip(samples)
        .map(|(b, s)| merge(model, b, s, schedule.sweeps))
        .collect())
}

/// Annealer mode: `repetitions` independent anneals on a fixed schedule.
///
/// Repetition `r` anneals from replica seed `derive_seed(seed, r)`; batches of
/// replicas run in lockstep and in parallel, and samples are kept in
/// repetition order, so the result depends on neither batching nor thread count.
pub fn saa_sample<T: Real>(
    model: &IsingModel<T>,
    schedule: &SaSchedule,
    repetitions: u64,
    target: T,
    seed: u64,
) -> Result<SolveResult<T>> {
    if repetitions == 0 {
        return Err(invalid("repetitions must be at least 1"));
    }
    schedule.validate()?;
    let annealer = Annealer::new(model)?;
    let seeds: Vec<u64> = (0..repetitions).map(|r| rng::derive_seed(seed, r)).collect();
    let runs = annealer.run_many(schedule, target, &seeds)?;
    let samples = runs.iter().map(|r| r.samples[0].clone()).collect();
    // first minimum in repetition order
    let best = runs.into_iter().reduce(|a, b| if b.best_energy < a.best_energy { b } else { a });
    Ok(merge(model, best, samples, schedule.sweeps))
}

fn merge<T: Real>(model: &IsingModel<T>, best: Option<SolveResult<T>>, samples: Vec<Sample<T>>, sweeps: u64) -> SolveResult<T> {
    let restarts = samples.len() as u64;
    let work = (restarts * sweeps) as f64;
    let (best_state, best_energy) = match best {
        Some(b) => (b.best_state, b.best_energy),
        None => {
            let s = SpinState::all_up(model.num_qubits());
            let e = model.energy_unchecked(s.as_slice());
            (s, e)
        }
    };
    SolveResult {
        best_state,
        best_energy,
        success: samples.iter().any(|s| s.success),
        samples,
        work,
        model_time_us: work * TAU_SA_US,
        restarts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::ChimeraTopology;
    use crate::rng::from_seed;
    use std::sync::Arc;

    #[test]
    fn lane_rng_matches_reference_xoshiro128pp() {
        use rand::SeedableRng;
        let seeds: [u64; LANES] = [0, 7, u64::MAX, 1, 2, 3, 4, 5];
        let mut lanes = LaneRng::new(&seeds);
        let mut refs: Vec<rand_xoshiro::Xoshiro128PlusPlus> = seeds
            .iter()
            .map(|&s| {
                let mut bytes = [0u8; 16];
                for (k, w) in seed_words(s).iter().enumerate() {
                    bytes[4 * k..4 * k + 4].copy_from_slice(&w.to_le_bytes());
                }
                rand_xoshiro::Xoshiro128PlusPlus::from_seed(bytes)
            })
            .collect();
        for _ in 0..100 {
            let out = lanes.next().to_array();
            for l in 0..LANES {
                assert_eq!(out[l], refs[l].next_u32());
            }
        }
    }

    #[test]
    fn sas_many_matches_sequential() {
        use crate::instance::{generate_instance, Alpha, LoopPolicy, RangeLimit};
        let topo = Arc::new(ChimeraTopology::build(2).unwrap());
        let inst = generate_instance(&topo, "0.25".parse::<Alpha>().unwrap(), RangeLimit::Limited(2), LoopPolicy::CellRejection, 9).unwrap();
        let model = inst.to_model().convert::<f64>().normalized().unwrap();
        let target = inst.planted_energy() as f64 / inst.range_of() as f64;
        let sched = SaSchedule::solver(8).unwrap();
        let seeds: Vec<u64> = (0..13).collect();
        let many = sas_solve_many(&model, target, &sched, 5, &seeds).unwrap();
        for (&s, m) in seeds.iter().zip(&many) {
            let one = sas_solve(&model, target, &sched, 5, s).unwrap();
            assert_eq!(one.restarts, m.restarts);
            assert_eq!(one.best_state, m.best_state);
            assert_eq!(one.samples, m.samples);
        }
        assert!(many.iter().any(|m| m.restarts > 1));
    }

    #[test]
    fn batched_replicas_match_single_runs() {
        use crate::instance::{generate_instance, Alpha, LoopPolicy, RangeLimit};
        let topo = Arc::new(ChimeraTopology::build(3).unwrap());
        let inst = generate_instance(&topo, "0.3".parse::<Alpha>().unwrap(), RangeLimit::limited(3).unwrap(), LoopPolicy::HenMinLength, 5).unwrap();
        let model = inst.to_model().convert::<f64>().normalized().unwrap();
        let ann = Annealer::new(&model).unwrap();
        assert!(ann.is_quantized());
        let sched = SaSchedule::solver(50).unwrap();
        let seeds: Vec<u64> = (0..11).map(|r| rng::derive_seed(3, r)).collect();
        let many = ann.run_many(&sched, -1e9, &seeds).unwrap();
        for (s, m) in seeds.iter().zip(&many) {
            let one = ann.run_seeded(&sched, -1e9, *s).unwrap();
            assert_eq!(one.best_state, m.best_state);
        }
    }

    fn pair() -> IsingModel<f64> {
        let broken: Vec<usize> = (0..8).filter(|&q| q != 0 && q != 4).collect();
        let topo = Arc::new(ChimeraTopology::build(1).unwrap().with_broken(&broken).unwrap());
        let mut m = IsingModel::zeros(topo);
        m.set_coupling(0, 4, -1.0).unwrap();
        m
    }

    #[test]
    fn schedule_endpoints() {
        let s = SaSchedule::solver(5).unwrap();
        assert_eq!(s.beta(0), 0.01);
        assert_eq!(s.beta(4), 5.0);
        assert!((s.beta(2) - 2.505).abs() < 1e-12);
        assert_eq!(SaSchedule::solver(1).unwrap().beta(0), 5.0);
        assert!(SaSchedule::new(0.0, 5.0, 10).is_err());
        assert!(SaSchedule::new(5.0, 3.0, 10).is_err());
        assert!(SaSchedule::solver(0).is_err());
    }

    #[test]
    fn ferromagnetic_pair_converges() {
        let m = pair();
        let annealer = Annealer::new(&m).unwrap();
        assert!(annealer.is_quantized());
        let sched = SaSchedule::solver(1000).unwrap();
        let mut rng = from_seed(1);
        let wins = (0..1000).filter(|_| annealer.run(&sched, -1.0, &mut rng).unwrap().success).count();
        assert!(wins >= 999, "{wins}");
    }

    #[test]
    fn zero_model() {
        let topo = Arc::new(ChimeraTopology::build(2).unwrap());
        let m: IsingModel<f64> = IsingModel::zeros(topo);
        let sched = SaSchedule::solver(10).unwrap();
        let r = sa_run(&m, &sched, 0.0, &mut from_seed(2)).unwrap();
        assert_eq!(r.best_energy, 0.0);
        assert!(r.success);
        assert!(!sa_run(&m, &sched, -0.5, &mut from_seed(2)).unwrap().success);
    }

    #[test]
    fn rejects_unnormalized() {
        let mut m = pair();
        m.set_coupling(0, 4, -2.0).unwrap();
        assert!(sa_run(&m, &SaSchedule::solver(10).unwrap(), -1.0, &mut from_seed(0)).is_err());
    }

    #[test]
    fn float_path_samples_gibbs_spin() {
        // a lone spin in an irrational field forces the exp path; no barrier, so
        // the last sweep samples the Gibbs distribution at beta_end exactly
        let mut m = pair();
        m.set_coupling(0, 4, 0.0).unwrap();
        let h = -std::f64::consts::FRAC_1_SQRT_2 / 4.0;
        m.set_field(0, h).unwrap();
        // independent second spin; success depends on qubit 0 only
        m.set_field(4, 0.1).unwrap();
        let a = Annealer::new(&m).unwrap();
        assert!(!a.is_quantized());
        let sched = SaSchedule::solver(50).unwrap();
        let target = m.energy(&SpinState::all_up(8)).unwrap();
        let reps = 4000;
        let r = saa_sample(&m, &sched, reps, target, 3).unwrap();
        assert_eq!(r.best_energy, h - 0.1);
        let p = (-5.0 * h).exp() / (2.0 * (5.0 * h).cosh());
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        let observed = r.success_probability();
        assert!((observed - p).abs() < 4.0 * se, "observed {observed}, gibbs {p}");
    }

    #[test]
    fn work_accounting_and_restarts() {
        let m = pair();
        let sched = SaSchedule::solver(100).unwrap();
        let r = sas_solve(&m, -1.0, &sched, 10, 4).unwrap();
        assert!(r.success);
        assert_eq!(r.work, 100.0 * r.restarts as f64);
        assert_eq!(r.model_time_us, r.work * 3.54);
        let none = sas_solve(&m, -1.0, &sched, 0, 4).unwrap();
        assert!(!none.success);
        assert_eq!((none.work, none.restarts, none.model_time_us), (0.0, 0, 0.0));
        // unreachable target: every restart runs
        let all = sas_solve(&m, -2.0, &sched, 7, 4).unwrap();
        assert_eq!((all.restarts, all.work), (7, 700.0));
    }

    #[test]
    fn saa_is_deterministic() {
        let m = pair();
        let sched = SaSchedule::annealer(3.0, 50).unwrap();
        let a = saa_sample(&m, &sched, 64, -1.0, 9).unwrap();
        let b = saa_sample(&m, &sched, 64, -1.0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 64);
        assert_eq!(saa_sample(&m, &sched, 1, -1.0, 9).unwrap().samples.len(), 1);
        assert!(saa_sample(&m, &sched, 0, -1.0, 9).is_err());
    }
}
