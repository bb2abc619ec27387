//! Executes one solver configuration on one instance and emits run records.

use flbench::rng::{from_seed, hash64, hash_str};
use flbench::solvers::{brute_force, hfs_solve, saa_sample, sas_solve_many};
use flbench::{FrustratedLoopInstance, HfsConfig, IsingModel, RunRecord, SaSchedule, SolveResult};

use crate::config::SolverParams;
use crate::error::{validation, CliResult};

/// Seed of run `run`: `hash64([seed, h(instance_id), h(solver), h(params), run])`
/// with `h` the string hash of [`flbench::rng::hash_str`].
pub fn run_seed(seed: u64, instance_id: &str, params: &SolverParams, run: u64) -> u64 {
    hash64(&[seed, hash_str(instance_id), hash_str(params.name().as_str()), hash_str(&params.canonical()), run])
}

/// The instance scaled into `[-1, 1]` for the annealers, with the planted
/// energy on the same scale.
fn annealer_model(inst: &FrustratedLoopInstance) -> CliResult<(IsingModel<f64>, f64)> {
    let range = inst.range_of();
    let model = inst.to_model().convert::<f64>();
    if range == 0 {
        return Ok((model, inst.planted_energy() as f64));
    }
    Ok((model.normalized()?, inst.planted_energy() as f64 / range as f64))
}

fn record<T>(
    inst: &FrustratedLoopInstance,
    instance_id: &str,
    params: &SolverParams,
    run: u64,
    seed: u64,
    result: &SolveResult<T>,
) -> CliResult<RunRecord> {
    // energies are reported in the instance's integer units
    let best_energy = inst.to_model().energy(&result.best_state)?;
    Ok(RunRecord {
        solver: params.name().as_str().to_string(),
        instance_id: instance_id.to_string(),
        seed,
        sweeps: params.sweeps(),
        restarts: result.restarts,
        best_energy,
        success: result.success,
        work: result.work,
        model_time_us: result.model_time_us,
        successes: result.successes() as u64,
        params: params.canonical(),
        run,
    })
}

/// Records for the given run indices, in that order.
pub fn solve_runs(
    inst: &FrustratedLoopInstance,
    instance_id: &str,
    params: &SolverParams,
    runs: &[u64],
    seed: u64,
) -> CliResult<Vec<RunRecord>> {
    let seeds: Vec<u64> = runs.iter().map(|&r| run_seed(seed, instance_id, params, r)).collect();
    let planted = inst.planted_energy();
    match *params {
        SolverParams::Sas { sweeps, max_restarts } => {
            let (model, target) = annealer_model(inst)?;
            let results = sas_solve_many(&model, target, &SaSchedule::solver(sweeps)?, max_restarts, &seeds)?;
            runs.iter()
                .zip(&seeds)
                .zip(&results)
                .map(|((&run, &s), res)| record(inst, instance_id, params, run, s, res))
                .collect()
        }
        SolverParams::Saa { beta_final, sweeps, repetitions } => {
            let (model, target) = annealer_model(inst)?;
            let schedule = SaSchedule::annealer(beta_final, sweeps)?;
            runs.iter()
                .zip(&seeds)
                .map(|(&run, &s)| {
                    let res = saa_sample(&model, &schedule, repetitions, target, s)?;
                    record(inst, instance_id, params, run, s, &res)
                })
                .collect()
        }
        SolverParams::Hfs { stall_rounds, max_rounds } => {
            let model = inst.to_model();
            let mut config = HfsConfig::for_size(inst.topology.size());
            if let Some(r) = stall_rounds {
                config.stall_rounds = r;
            }
            config.max_rounds = max_rounds;
            runs.iter()
                .zip(&seeds)
                .map(|(&run, &s)| {
                    let res = hfs_solve(&model, planted, &config, &mut from_seed(s))?;
                    record(inst, instance_id, params, run, s, &res)
                })
                .collect()
        }
        SolverParams::Brute => {
            let bf = brute_force(&inst.to_model()).map_err(|e| validation(format!("{instance_id}: {e}")))?;
            Ok(runs
                .iter()
                .zip(&seeds)
                .map(|(&run, &s)| RunRecord {
                    solver: "brute".into(),
                    instance_id: instance_id.to_string(),
                    seed: s,
                    sweeps: None,
                    restarts: 1,
                    best_energy: bf.min_energy,
                    success: bf.min_energy <= planted,
                    work: bf.states_enumerated as f64,
                    // no hardware time model for enumeration
                    model_time_us: 0.0,
                    successes: u64::from(bf.min_energy <= planted),
                    params: String::new(),
                    run,
                })
                .collect())
        }
    }
}
