//! Independent oracles shared by the integration tests. Nothing here calls the
//! solvers or the library's energy routine.
#![allow(dead_code)]

use std::sync::Arc;

use flbench::rng::{hash64, stream};
use flbench::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Energy straight from the definition: sum over edges of `J s s` plus `h s`.
pub fn naive_energy(model: &IsingModel<f64>, spins: &[i8]) -> f64 {
    let topo = model.topology();
    let mut e = 0.0;
    for (k, &(a, b)) in topo.edges().iter().enumerate() {
        e += model.couplings()[k] * f64::from(spins[a as usize]) * f64::from(spins[b as usize]);
    }
    for (q, &h) in model.fields().iter().enumerate() {
        e += h * f64::from(spins[q]);
    }
    e
}

pub fn naive_energy_int(model: &IsingModel<i64>, spins: &[i8]) -> i64 {
    let topo = model.topology();
    let mut e = 0;
    for (k, &(a, b)) in topo.edges().iter().enumerate() {
        e += model.couplings()[k] * i64::from(spins[a as usize]) * i64::from(spins[b as usize]);
    }
    for (q, &h) in model.fields().iter().enumerate() {
        e += h * i64::from(spins[q]);
    }
    e
}

/// Every assignment of the functional spins (broken ones stay +1), in binary order.
pub fn all_states(topo: &ChimeraTopology) -> impl Iterator<Item = Vec<i8>> + '_ {
    let live: Vec<usize> = topo.functional_qubits().collect();
    assert!(live.len() <= 24, "enumeration oracle limited to 24 spins");
    (0u64..1 << live.len()).map(move |mask| {
        let mut spins = vec![1i8; topo.num_qubits()];
        for (b, &q) in live.iter().enumerate() {
            if mask >> b & 1 == 1 {
                spins[q] = -1;
            }
        }
        spins
    })
}

/// Boltzmann weight of the ground-state manifold at inverse temperature `beta`.
pub fn gibbs_ground_mass(model: &IsingModel<f64>, beta: f64) -> (f64, f64) {
    let energies: Vec<f64> = all_states(model.topology()).map(|s| naive_energy(model, &s)).collect();
    let e0 = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    let mut ground = 0.0;
    for &e in &energies {
        let w = (-beta * (e - e0)).exp();
        z += w;
        if e - e0 < 1e-9 {
            ground += w;
        }
    }
    (e0, ground / z)
}

/// `C_2` with `keep` functional qubits, redrawn until connected. Qubits are
/// kept in pairs joined by an inter-cell coupler: every C_2 qubit has exactly
/// one such coupler, and loops that must leave their cell need them, so a
/// uniformly scattered mask almost never admits the denser loop counts.
pub fn masked_c2(keep: usize, seed: u64) -> Arc<ChimeraTopology> {
    let full = ChimeraTopology::build(2).unwrap();
    let external: Vec<(u32, u32)> = full.edges().iter().copied().filter(|&(a, b)| a / 8 != b / 8).collect();
    for attempt in 0.. {
        let mut rng = stream(seed, attempt);
        let mut pairs = external.clone();
        pairs.shuffle(&mut rng);
        let mut kept: Vec<usize> = pairs[..keep / 2].iter().flat_map(|&(a, b)| [a as usize, b as usize]).collect();
        if keep % 2 == 1 {
            let rest: Vec<usize> = (0..full.num_qubits()).filter(|q| !kept.contains(q)).collect();
            kept.push(rest[rng.random_range(0..rest.len())]);
        }
        let broken: Vec<usize> = (0..full.num_qubits()).filter(|q| !kept.contains(q)).collect();
        let topo = full.with_broken(&broken).unwrap();
        if topo.is_connected() {
            return Arc::new(topo);
        }
    }
    unreachable!()
}

/// Generate on a random connected mask of `keep` qubits, redrawing mask and
/// seed when generation runs out of admissible loops. Returns the instance
/// and the number of redraws.
pub fn masked_instance(keep: usize, alpha: Alpha, range: RangeLimit, policy: LoopPolicy, seed: u64) -> (FrustratedLoopInstance, u64) {
    for redraw in 0.. {
        let s = hash64(&[seed, redraw]);
        let topo = masked_c2(keep, s);
        match generate_instance(&topo, alpha, range, policy, s) {
            Ok(inst) => return (inst, redraw),
            Err(Error::GenerationExhausted { .. }) => continue,
            Err(e) => panic!("unexpected generation error: {e}"),
        }
    }
    unreachable!()
}

pub fn random_alpha<R: Rng>(rng: &mut R) -> Alpha {
    ["0.1", "0.15", "0.2", "0.25", "0.3", "0.4", "0.5"][rng.random_range(0..7)].parse().unwrap()
}

pub fn random_range<R: Rng>(rng: &mut R) -> RangeLimit {
    [RangeLimit::Limited(2), RangeLimit::Limited(3), RangeLimit::Unlimited][rng.random_range(0..3)]
}
