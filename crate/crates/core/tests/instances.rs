mod common;

use std::collections::BTreeSet;

use common::*;
use flbench::format::{read_instance, write_instance};
use flbench::rng::stream;
use flbench::*;
use proptest::prelude::*;
use rand::Rng;

fn alpha(s: &str) -> Alpha {
    s.parse().unwrap()
}

/// States minimizing `energy` among all enumerated states, as bit masks over the state list index.
fn argmin_set<E: PartialOrd + Copy>(energies: &[E]) -> BTreeSet<usize> {
    let mut best = energies[0];
    for &e in energies {
        if e < best {
            best = e;
        }
    }
    energies.iter().enumerate().filter(|(_, &e)| e == best).map(|(i, _)| i).collect()
}

#[test]
fn masked_c2_n20_ground_state_is_planted() {
    for seed in [1u64, 2, 3] {
        let (inst, _) = masked_instance(20, alpha("0.3"), RangeLimit::Limited(2), LoopPolicy::CellRejection, seed);
        assert_eq!(inst.topology.num_functional(), 20);
        let model = inst.to_model();
        let min = all_states(&inst.topology).map(|s| naive_energy_int(&model, &s)).min().unwrap();
        assert_eq!(min, inst.planted_energy(), "seed {seed}");
    }
}

#[test]
fn c4_instances_satisfy_construction_invariants() {
    let topo = std::sync::Arc::new(ChimeraTopology::build(4).unwrap());
    for seed in 0..100u64 {
        let inst = generate_instance(&topo, alpha("0.25"), RangeLimit::Limited(2), LoopPolicy::CellRejection, seed).unwrap();
        assert_eq!(inst.num_loops(), 32);
        assert!(inst.couplings.iter().all(|j| j.abs() <= 2));
        let model = inst.to_model();
        assert!(model.fields().iter().all(|&h| h == 0));
        let up = vec![1i8; topo.num_qubits()];
        let down = vec![-1i8; topo.num_qubits()];
        let planted: i64 = inst.loops.iter().map(|l| 2 - l.len() as i64).sum();
        assert_eq!(naive_energy_int(&model, &up), planted);
        assert_eq!(naive_energy_int(&model, &down), planted);
        assert_eq!(inst.planted_energy(), planted);
        // no accepted loop sits inside one unit cell
        for l in &inst.loops {
            let cells: BTreeSet<usize> = l.vertices.iter().map(|&v| v as usize / 8).collect();
            assert!(cells.len() > 1);
        }
    }
}

#[test]
fn summed_couplings_equal_sum_of_loop_energies() {
    let (inst, _) = masked_instance(14, alpha("0.4"), RangeLimit::Unlimited, LoopPolicy::CellRejection, 77);
    let model = inst.to_model();
    for spins in all_states(&inst.topology) {
        let by_loop: i64 = inst
            .loops
            .iter()
            .map(|l| {
                let n = l.vertices.len();
                (0..n)
                    .map(|i| {
                        let (a, b) = (l.vertices[i], l.vertices[(i + 1) % n]);
                        let j = if (a.min(b), a.max(b)) == l.afm_edge { 1 } else { -1 };
                        j * i64::from(spins[a as usize]) * i64::from(spins[b as usize])
                    })
                    .sum::<i64>()
            })
            .sum();
        assert_eq!(naive_energy_int(&model, &spins), by_loop);
    }
}

#[test]
fn hen_policy_loops_have_at_least_eight_vertices() {
    let topo = std::sync::Arc::new(ChimeraTopology::build(3).unwrap());
    for seed in 0..30u64 {
        let inst = generate_instance(&topo, alpha("0.2"), RangeLimit::Limited(3), LoopPolicy::HenMinLength, seed).unwrap();
        assert!(inst.loops.iter().all(|l| l.len() >= 8));
        assert!(inst.couplings.iter().all(|j| j.abs() <= 3));
    }
}

#[test]
fn gauge_transform_preserves_energies() {
    let (inst, _) = masked_instance(16, alpha("0.3"), RangeLimit::Limited(3), LoopPolicy::CellRejection, 5);
    let topo = inst.topology.clone();
    let mut model = inst.to_model().convert::<f64>();
    let mut rng = stream(9, 0);
    for q in topo.functional_qubits() {
        model.set_field(q, rng.random_range(-1.0..1.0)).unwrap();
    }
    let signs: Vec<i8> = (0..topo.num_qubits())
        .map(|q| if topo.is_functional(q) && rng.random::<bool>() { -1 } else { 1 })
        .collect();
    let gauge = Gauge::from_signs(signs.clone()).unwrap();
    let gauged = model.gauge_transform(&gauge).unwrap();
    for spins in all_states(&topo).step_by(7) {
        let flipped: Vec<i8> = spins.iter().zip(&signs).map(|(s, g)| s * g).collect();
        let a = naive_energy(&model, &spins);
        let b = naive_energy(&gauged, &flipped);
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        let state = SpinState::from_spins(spins.clone()).unwrap();
        assert_eq!(state.gauged(&gauge).unwrap().as_slice(), &flipped[..]);
    }
    // the planted all-up state maps to the gauge signs themselves
    let int = inst.to_model().gauge_transform(&gauge).unwrap();
    assert_eq!(naive_energy_int(&int, &signs), inst.planted_energy());
}

#[test]
fn exact_normalization_keeps_the_argmin_set() {
    for seed in [3u64, 4] {
        let (inst, _) = masked_instance(14, alpha("0.3"), RangeLimit::Limited(2), LoopPolicy::CellRejection, seed);
        let int = inst.to_model();
        let exact: ExactModel = int.convert::<Rational64>().normalized().unwrap();
        let scale = Rational64::from_integer(inst.range_of());
        assert_eq!(exact.max_magnitude(), Rational64::from_integer(1));
        let states: Vec<Vec<i8>> = all_states(&inst.topology).collect();
        let e_int: Vec<i64> = states.iter().map(|s| naive_energy_int(&int, s)).collect();
        let e_exact: Vec<Rational64> = states
            .iter()
            .map(|s| exact.energy(&SpinState::from_spins(s.clone()).unwrap()).unwrap())
            .collect();
        for (a, b) in e_int.iter().zip(&e_exact) {
            assert_eq!(Rational64::from_integer(*a), *b * scale);
        }
        assert_eq!(argmin_set(&e_int), argmin_set(&e_exact));
        let float: Model64 = int.convert::<f64>().normalized().unwrap();
        let e_float: Vec<f64> = states.iter().map(|s| naive_energy(&float, s)).collect();
        let min = e_float.iter().cloned().fold(f64::INFINITY, f64::min);
        let near: BTreeSet<usize> = e_float.iter().enumerate().filter(|(_, &e)| e - min < 1e-9).map(|(i, _)| i).collect();
        assert_eq!(near, argmin_set(&e_int));
    }
}

#[test]
fn unlimited_range_grows_beyond_limited_values() {
    let topo = std::sync::Arc::new(ChimeraTopology::build(6).unwrap());
    let max = (0..20u64)
        .map(|s| generate_instance(&topo, alpha("0.25"), RangeLimit::Unlimited, LoopPolicy::CellRejection, s).unwrap().range_of())
        .max()
        .unwrap();
    assert!(max > 3, "largest unlimited range over 20 seeds was {max}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_files_round_trip(seed in any::<u64>(), size in 2usize..=3, a in 0usize..7, r in 0usize..3, hen in any::<bool>()) {
        let topo = std::sync::Arc::new(ChimeraTopology::build(size).unwrap());
        let alpha = ["0.1", "0.15", "0.2", "0.25", "0.3", "0.4", "0.5"][a].parse::<Alpha>().unwrap();
        let range = [RangeLimit::Limited(2), RangeLimit::Limited(3), RangeLimit::Unlimited][r];
        let policy = if hen { LoopPolicy::HenMinLength } else { LoopPolicy::CellRejection };
        match generate_instance(&topo, alpha, range, policy, seed) {
            Ok(inst) => {
                let text = write_instance(&inst);
                let back = read_instance(&text).unwrap();
                prop_assert_eq!(&back, &inst);
                prop_assert_eq!(write_instance(&back), text);
                let again = generate_instance(&topo, alpha, range, policy, seed).unwrap();
                prop_assert_eq!(again, inst);
            }
            Err(Error::GenerationExhausted { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn masked_round_trip(seed in any::<u64>(), keep in 14usize..=24) {
        let (inst, _) = masked_instance(keep, "0.25".parse().unwrap(), RangeLimit::Limited(2), LoopPolicy::CellRejection, seed);
        let back = read_instance(&write_instance(&inst)).unwrap();
        prop_assert_eq!(back.topology.broken_qubits(), inst.topology.broken_qubits());
        prop_assert_eq!(back, inst);
    }
}
