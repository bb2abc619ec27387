use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinState};
use crate::scalar::Scalar;

pub const MAX_BRUTE_SPINS: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForce<T> {
    pub min_energy: T,
    /// First minimizer in Gray-code order.
    pub argmin: SpinState,
    pub ground_states: u64,
    pub states_enumerated: u64,
}

/// Exhaustive minimum over all `2^n` states of the functional qubits.
///
/// Walks the states in Gray-code order so each step flips one spin and
/// updates the energy from its local field. Exact for integer and rational
/// models; float models accumulate rounding along the walk.
pub fn brute_force<T: Scalar>(model: &IsingModel<T>) -> Result<BruteForce<T>> {
    let topo = model.topology();
    let order: Vec<usize> = topo.functional_qubits().collect();
    let n = order.len();
    if n > MAX_BRUTE_SPINS {
        return Err(Error::TooLarge { n, limit: MAX_BRUTE_SPINS });
    }

    let mut spins = vec![1i8; model.num_qubits()];
    let mut local: Vec<T> = model.fields().to_vec();
    for (&(a, b), &j) in topo.edges().iter().zip(model.couplings()) {
        local[a as usize] = local[a as usize] + j;
        local[b as usize] = local[b as usize] + j;
    }
    let mut energy = model.energy_unchecked(&spins);
    let mut best = energy;
    let mut best_code: u64 = 0;
    let mut count: u64 = 1;
    let two = T::one() + T::one();

    let total: u64 = 1 << n;
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        let q = order[bit];
        let s = spins[q];
        // flipping q changes the energy by -2 s_q local_q
        energy = if s > 0 { energy - two * local[q] } else { energy + two * local[q] };
        spins[q] = -s;
        for &(w, e) in topo.neighbors(q) {
            let j = model.couplings()[e as usize];
            let w = w as usize;
            // local_w changes by J (s_new - s_old) = -2 J s_old
            local[w] = if s > 0 { local[w] - two * j } else { local[w] + two * j };
        }
        if energy < best {
            best = energy;
            best_code = step ^ (step >> 1);
            count = 1;
        } else if energy == best {
            count += 1;
        }
    }

    Ok(BruteForce {
        min_energy: best,
        argmin: SpinState::from_bits(model.num_qubits(), &order, best_code),
        ground_states: count,
        states_enumerated: total,
    })
}
