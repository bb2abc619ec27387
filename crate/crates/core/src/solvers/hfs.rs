//! Zero-temperature large-neighbourhood search over induced trees of the
//! half-cell graph.
//!
//! Each half-cell (the four same-orientation qubits of a unit cell) is a node
//! with up to 16 joint states; two nodes are adjacent when a coupler joins
//! them. A random induced tree of nodes is minimized exactly, conditioned on
//! every spin outside it, by min-sum dynamic programming, and the minimizer is
//! adopted. Adoption never raises the energy.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::{Sample, SolveResult, HFS_CELL_UPDATE_US};
use crate::chimera::ChimeraTopology;
use crate::error::{invalid, Result};
use crate::ising::{IsingModel, SpinState};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HfsConfig {
    /// Stop after this many consecutive rounds without an energy decrease.
    pub stall_rounds: u64,
    /// Tree solves per round.
    pub subsets_per_round: u64,
    /// Largest induced tree, in half-cells.
    pub tree_cap: usize,
    /// Hard budget on rounds, if any.
    pub max_rounds: Option<u64>,
}

impl HfsConfig {
    /// Defaults for `C_L`: stall after `100 L` rounds, trees of up to `2 L` half-cells.
    pub fn for_size(size: usize) -> Self {
        Self {
            stall_rounds: 100 * size as u64,
            subsets_per_round: 1,
            tree_cap: 2 * size,
            max_rounds: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.stall_rounds == 0 || self.subsets_per_round == 0 || self.tree_cap == 0 {
            return Err(invalid("HFS stall_rounds, subsets_per_round and tree_cap must be positive"));
        }
        Ok(())
    }
}

/// Half-cells with at least one functional qubit and their adjacency.
#[derive(Clone, Debug)]
pub struct HalfCellGraph {
    /// Functional qubits per half-cell id; empty for fully broken halves.
    qubits: Vec<Vec<u32>>,
    adjacent: Vec<Vec<usize>>,
    live: Vec<usize>,
}

impl HalfCellGraph {
    pub fn new(topology: &ChimeraTopology) -> Self {
        let count = topology.num_half_cells();
        let mut qubits = vec![Vec::new(); count];
        for q in topology.functional_qubits() {
            qubits[ChimeraTopology::half_cell_of(q)].push(q as u32);
        }
        let mut adjacent = vec![Vec::new(); count];
        for &(a, b) in topology.edges() {
            let (ha, hb) = (ChimeraTopology::half_cell_of(a as usize), ChimeraTopology::half_cell_of(b as usize));
            if ha != hb {
                adjacent[ha].push(hb);
                adjacent[hb].push(ha);
            }
        }
        for list in &mut adjacent {
            list.sort_unstable();
            list.dedup();
        }
        let live = (0..count).filter(|&h| !qubits[h].is_empty()).collect();
        Self { qubits, adjacent, live }
    }

    pub fn qubits(&self, half_cell: usize) -> &[u32] {
        &self.qubits[half_cell]
    }

    pub fn neighbors(&self, half_cell: usize) -> &[usize] {
        &self.adjacent[half_cell]
    }

    pub fn live_nodes(&self) -> &[usize] {
        &self.live
    }
}

/// Grow an induced tree by randomized breadth-first search from a random live
/// node. A node joins only while exactly one of its neighbours is already in
/// the tree, which keeps the induced subgraph acyclic. Returned in BFS order.
pub fn random_induced_tree<R: RngCore + ?Sized>(graph: &HalfCellGraph, cap: usize, rng: &mut R) -> Vec<usize> {
    if graph.live.is_empty() || cap == 0 {
        return Vec::new();
    }
    let n = graph.qubits.len();
    let mut in_tree = vec![false; n];
    let mut tree_neighbors = vec![0u8; n];
    let start = graph.live[rng.random_range(0..graph.live.len())];
    let mut order = vec![start];
    in_tree[start] = true;
    for &w in &graph.adjacent[start] {
        tree_neighbors[w] += 1;
    }
    let mut head = 0;
    let mut candidates = Vec::new();
    while head < order.len() && order.len() < cap {
        let u = order[head];
        head += 1;
        candidates.clear();
        candidates.extend(graph.adjacent[u].iter().copied());
        candidates.shuffle(rng);
        for &w in &candidates {
            if order.len() >= cap {
                break;
            }
            if in_tree[w] || tree_neighbors[w] != 1 || graph.qubits[w].is_empty() {
                continue;
            }
            in_tree[w] = true;
            order.push(w);
            for &x in &graph.adjacent[w] {
                tree_neighbors[x] += 1;
            }
        }
    }
    order
}

/// Exact minimum of the energy over the spins of `tree` (an induced tree of
/// half-cells, BFS order, first entry the root) with all other spins held at
/// `state`.
///
/// Returns `(current, minimum, minimizer)` where `current` and `minimum` are
/// the tree-dependent part of the energy before and after; the full energy
/// changes by `minimum - current`.
pub fn conditional_minimize<T: Scalar>(
    model: &IsingModel<T>,
    graph: &HalfCellGraph,
    state: &SpinState,
    tree: &[usize],
) -> Result<(T, T, SpinState)> {
    if state.len() != model.num_qubits() {
        return Err(invalid("state does not match model"));
    }
    let topo = model.topology();
    let m = tree.len();
    let mut slot = vec![usize::MAX; graph.qubits.len()];
    for (i, &h) in tree.iter().enumerate() {
        if graph.qubits[h].is_empty() {
            return Err(invalid(format!("half-cell {h} has no functional qubits")));
        }
        slot[h] = i;
    }

    // parent of each tree node, found from adjacency
    let mut parent = vec![usize::MAX; m];
    for i in 1..m {
        let p = graph.adjacent[tree[i]]
            .iter()
            .map(|&w| slot[w])
            .filter(|&j| j < i)
            .collect::<Vec<_>>();
        if p.len() != 1 {
            return Err(invalid("half-cells do not form an induced tree in BFS order"));
        }
        parent[i] = p[0];
    }

    let spin_of = |bits: usize, k: usize| -> i8 { if bits >> k & 1 == 1 { -1 } else { 1 } };
    let states = |i: usize| 1usize << graph.qubits[tree[i]].len();

    // unary[i][sigma]: biases, couplings to fixed outside spins, couplings inside the node
    // pair[i][sigma_i * 16 + sigma_parent]: couplings between node i and its parent
    let mut unary: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut pair: Vec<Vec<T>> = vec![Vec::new(); m];
    for i in 0..m {
        let qs = &graph.qubits[tree[i]];
        let mut u = vec![T::zero(); states(i)];
        let mut to_parent: Vec<(usize, usize, T)> = Vec::new();
        for (k, &q) in qs.iter().enumerate() {
            let q = q as usize;
            let mut outside = model.fields()[q];
            let mut inside: Vec<(usize, T)> = Vec::new();
            for &(w, e) in topo.neighbors(q) {
                let j = model.couplings()[e as usize];
                let hw = ChimeraTopology::half_cell_of(w as usize);
                let pos = |h: usize| graph.qubits[h].iter().position(|&x| x == w).unwrap();
                if slot[hw] == usize::MAX {
                    outside = if state.spin(w as usize) > 0 { outside + j } else { outside - j };
                } else if slot[hw] == i {
                    if (w as usize) > q {
                        inside.push((pos(hw), j));
                    }
                } else if i > 0 && slot[hw] == parent[i] {
                    to_parent.push((k, pos(hw), j));
                } else if parent[slot[hw]] != i {
                    return Err(invalid("tree nodes share a coupler outside a tree edge"));
                }
            }
            for (sigma, val) in u.iter_mut().enumerate() {
                let s = spin_of(sigma, k);
                *val = if s > 0 { *val + outside } else { *val - outside };
                for &(kw, j) in &inside {
                    *val = if spin_of(sigma, kw) == s { *val + j } else { *val - j };
                }
            }
        }
        if i > 0 {
            let sp = states(parent[i]);
            let mut p = vec![T::zero(); 16 * 16];
            for sigma in 0..states(i) {
                for tau in 0..sp {
                    let mut v = T::zero();
                    for &(k, kp, j) in &to_parent {
                        v = if spin_of(sigma, k) == spin_of(tau, kp) { v + j } else { v - j };
                    }
                    p[sigma * 16 + tau] = v;
                }
            }
            pair[i] = p;
        }
        unary.push(u);
    }

    let current_bits: Vec<usize> = tree
        .iter()
        .map(|&h| {
            graph.qubits[h]
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &q)| if state.spin(q as usize) < 0 { acc | 1 << k } else { acc })
        })
        .collect();
    let mut current = T::zero();
    for i in 0..m {
        current = current + unary[i][current_bits[i]];
        if i > 0 {
            current = current + pair[i][current_bits[i] * 16 + current_bits[parent[i]]];
        }
    }

    // leaves to root: cost[i][sigma] = unary + messages from children
    let mut cost = unary;
    let mut choice: Vec<Vec<u8>> = vec![Vec::new(); m];
    for i in (1..m).rev() {
        let p = parent[i];
        let sp = states(p);
        let mut pick = vec![0u8; sp];
        let mut msg = vec![T::zero(); sp];
        for tau in 0..sp {
            let mut best = cost[i][0] + pair[i][tau];
            let mut arg = 0;
            for sigma in 1..states(i) {
                let v = cost[i][sigma] + pair[i][sigma * 16 + tau];
                if v < best {
                    best = v;
                    arg = sigma;
                }
            }
            msg[tau] = best;
            pick[tau] = arg as u8;
        }
        for tau in 0..sp {
            cost[p][tau] = cost[p][tau] + msg[tau];
        }
        choice[i] = pick;
    }
    let (root_bits, minimum) = cost[0]
        .iter()
        .enumerate()
        .fold((0, cost[0][0]), |(a, b), (s, &v)| if v < b { (s, v) } else { (a, b) });

    let mut bits = vec![0usize; m];
    bits[0] = root_bits;
    for i in 1..m {
        bits[i] = choice[i][bits[parent[i]]] as usize;
    }
    let mut next = state.clone();
    for (i, &h) in tree.iter().enumerate() {
        for (k, &q) in graph.qubits[h].iter().enumerate() {
            next.set(q as usize, spin_of(bits[i], k));
        }
    }
    Ok((current, minimum, next))
}

/// Search from a random state until `target` is reached, `stall_rounds`
/// consecutive rounds pass without improvement, or the round budget runs out.
///
/// Work is counted in unit-cell updates: each half-cell in a solved tree adds 0.5.
pub fn hfs_solve<T: Scalar, R: RngCore + ?Sized>(
    model: &IsingModel<T>,
    target: T,
    config: &HfsConfig,
    rng: &mut R,
) -> Result<SolveResult<T>> {
    hfs_solve_observed(model, target, config, rng, |_, _| {})
}

/// [`hfs_solve`], calling `observe(energy_before, state_after)` after every adopted tree solve.
pub fn hfs_solve_observed<T: Scalar, R: RngCore + ?Sized>(
    model: &IsingModel<T>,
    target: T,
    config: &HfsConfig,
    rng: &mut R,
    mut observe: impl FnMut(T, &SpinState),
) -> Result<SolveResult<T>> {
    config.validate()?;
    let graph = HalfCellGraph::new(model.topology());
    let mut state = SpinState::random(model.topology(), rng);
    let mut energy = model.energy(&state)?;
    let mut work = 0.0;
    let mut stall = 0;
    let mut rounds = 0u64;

    while !energy.reaches(target) && stall < config.stall_rounds && config.max_rounds.is_none_or(|b| rounds < b) {
        let round_start = energy;
        for _ in 0..config.subsets_per_round {
            let tree = random_induced_tree(&graph, config.tree_cap, rng);
            if tree.is_empty() {
                break;
            }
            let (current, minimum, next) = conditional_minimize(model, &graph, &state, &tree)?;
            work += 0.5 * tree.len() as f64;
            let before = energy;
            energy = energy - current + minimum;
            state = next;
            observe(before, &state);
            if energy.reaches(target) {
                break;
            }
        }
        rounds += 1;
        if round_start.reaches(energy) {
            stall += 1;
        } else {
            stall = 0;
        }
    }

    let energy = model.energy(&state)?;
    let success = energy.reaches(target);
    Ok(SolveResult {
        best_state: state,
        best_energy: energy,
        success,
        samples: vec![Sample { energy, success }],
        work,
        model_time_us: work * HFS_CELL_UPDATE_US,
        restarts: 1,
    })
}
