//! Range-limited frustrated-loop instance generation.
//!
//! Each constraint is a cycle found by a random walk on the hardware graph;
//! every coupler of the cycle gets `-1` except one uniformly chosen coupler
//! which gets `+1`. Summing the constraints gives an instance whose all-up
//! and all-down states are ground states. When a finite range `R` is set,
//! couplers whose accumulated magnitude has already reached `R` are closed to
//! later walks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rand::{Rng, RngCore};

use crate::chimera::ChimeraTopology;
use crate::error::{invalid, Error, Result};
use crate::ising::{IsingModel, SpinState};
use crate::rng;

/// Walk restarts allowed per loop before generation gives up.
pub const MAX_ATTEMPTS_PER_LOOP: usize = 10_000;

/// Constraint-to-qubit ratio, kept exact so `k` never depends on float rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alpha(Rational64);

impl Alpha {
    pub fn new(value: Rational64) -> Result<Self> {
        if !value.is_positive() {
            return Err(invalid(format!("alpha must be positive, got {value}")));
        }
        if !terminates(*value.denom()) {
            return Err(invalid(format!("alpha {value} has no finite decimal form")));
        }
        Ok(Self(value))
    }

    pub fn ratio(self) -> Rational64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// `roundoff(alpha * n)`, rounding halves away from zero.
    pub fn loop_count(self, n: usize) -> usize {
        let k = (self.0 * Rational64::from_integer(n as i64)).round();
        k.to_integer() as usize
    }
}

fn terminates(mut d: i64) -> bool {
    while d % 2 == 0 {
        d /= 2;
    }
    while d % 5 == 0 {
        d /= 5;
    }
    d == 1
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_decimal(s).ok_or_else(|| invalid(format!("bad decimal `{s}`")))?)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_decimal(self.0))
    }
}

pub(crate) fn parse_decimal(s: &str) -> Option<Rational64> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 15 {
        return None;
    }
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let int_part: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_part: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let numer = int_part.checked_mul(scale)?.checked_add(frac_part)?;
    Some(Rational64::new(numer, scale))
}

/// Shortest exact decimal of a terminating rational.
pub(crate) fn format_decimal(r: Rational64) -> String {
    let neg = r.is_negative();
    let r = r.abs();
    let int = r.to_integer();
    let mut frac = r.fract();
    let mut out = if neg { format!("-{int}") } else { int.to_string() };
    if !frac.is_zero() {
        out.push('.');
        while !frac.is_zero() {
            frac *= Rational64::from_integer(10);
            out.push(char::from(b'0' + frac.to_integer() as u8));
            frac = frac.fract();
        }
    }
    out
}

/// Coupling range limit `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RangeLimit {
    Limited(u32),
    Unlimited,
}

impl RangeLimit {
    pub fn limited(r: u32) -> Result<Self> {
        if r < 2 {
            return Err(invalid(format!("range limit must be at least 2, got {r}")));
        }
        Ok(Self::Limited(r))
    }

    pub fn admits(self, magnitude: i64) -> bool {
        match self {
            Self::Limited(r) => magnitude < i64::from(r),
            Self::Unlimited => true,
        }
    }

    /// Encoding used in seed derivation; `0` stands for unlimited.
    pub fn code(self) -> u64 {
        match self {
            Self::Limited(r) => u64::from(r),
            Self::Unlimited => 0,
        }
    }
}

impl FromStr for RangeLimit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "unlimited" => Ok(Self::Unlimited),
            _ => Self::limited(s.parse().map_err(|_| invalid(format!("bad range `{s}`")))?),
        }
    }
}

impl fmt::Display for RangeLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Limited(r) => write!(f, "{r}"),
            Self::Unlimited => f.write_str("inf"),
        }
    }
}

/// Which candidate cycles are thrown away and redrawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LoopPolicy {
    /// Reject cycles with fewer than 8 vertices.
    HenMinLength,
    /// Reject cycles lying entirely inside one unit cell.
    CellRejection,
}

impl LoopPolicy {
    pub fn accepts(self, cycle: &[u32]) -> bool {
        match self {
            Self::HenMinLength => cycle.len() >= 8,
            Self::CellRejection => {
                let cell = ChimeraTopology::cell_index(cycle[0] as usize);
                cycle.iter().any(|&q| ChimeraTopology::cell_index(q as usize) != cell)
            }
        }
    }
}

impl FromStr for LoopPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hen" | "hen-minlength" => Ok(Self::HenMinLength),
            "cell" | "cell-rejection" => Ok(Self::CellRejection),
            _ => Err(invalid(format!("unknown loop policy `{s}`"))),
        }
    }
}

impl fmt::Display for LoopPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HenMinLength => "hen-minlength",
            Self::CellRejection => "cell-rejection",
        })
    }
}

/// One frustrated loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    /// Cycle in walk order; vertex `i` is adjacent to vertex `i + 1 (mod len)`.
    pub vertices: Vec<u32>,
    /// The antiferromagnetic coupler, stored as `(low, high)`.
    pub afm_edge: (u32, u32),
}

impl Loop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Couplers of the cycle as `(low, high)` pairs, in walk order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            (a.min(b), a.max(b))
        })
    }

    /// Energy contribution of this loop alone under `state`.
    pub fn energy(&self, state: &SpinState) -> i64 {
        self.edges()
            .map(|(a, b)| {
                let j = if (a, b) == self.afm_edge { 1 } else { -1 };
                j * i64::from(state.spin(a as usize)) * i64::from(state.spin(b as usize))
            })
            .sum()
    }
}

/// Outcome of a single random walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Walk {
    Cycle(Vec<u32>),
    Stuck,
}

/// Walk from a uniformly random functional vertex until the walk closes a
/// cycle on its own path.
///
/// Each step picks uniformly among admissible couplers at the current vertex,
/// never reversing along the coupler just used. The returned cycle is the path
/// segment from the earlier visit of the repeated vertex to the current step.
pub fn random_walk_cycle<R, F>(topo: &ChimeraTopology, admissible: F, rng: &mut R) -> Result<Walk>
where
    R: RngCore + ?Sized,
    F: Fn(usize) -> bool,
{
    let n = topo.num_functional();
    if n == 0 {
        return Err(invalid("topology has no functional qubits"));
    }
    let start = topo
        .functional_qubits()
        .nth(rng.random_range(0..n))
        .expect("index below functional count");

    let mut path: Vec<u32> = vec![start as u32];
    let mut position = vec![u32::MAX; topo.num_qubits()];
    position[start] = 0;
    let mut last_edge = u32::MAX;
    let mut options: Vec<(u32, u32)> = Vec::with_capacity(8);
    let mut current = start;

    loop {
        options.clear();
        options.extend(
            topo.neighbors(current)
                .iter()
                .filter(|&&(_, e)| e != last_edge && admissible(e as usize)),
        );
        if options.is_empty() {
            return Ok(Walk::Stuck);
        }
        let (next, edge) = options[rng.random_range(0..options.len())];
        let seen = position[next as usize];
        if seen != u32::MAX {
            return Ok(Walk::Cycle(path[seen as usize..].to_vec()));
        }
        position[next as usize] = path.len() as u32;
        path.push(next);
        last_edge = edge;
        current = next as usize;
    }
}

/// A generated instance: integer couplings on a topology plus the loops that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrustratedLoopInstance {
    pub topology: Arc<ChimeraTopology>,
    /// Coupling per topology edge, aligned with `topology.edges()`.
    pub couplings: Vec<i64>,
    pub loops: Vec<Loop>,
    pub range: RangeLimit,
    pub alpha: Alpha,
    pub seed: u64,
    pub planted_energy: i64,
}

impl FrustratedLoopInstance {
    pub fn num_loops(&self) -> usize {
        self.loops.len()
    }

    /// `sum_i (2 - l_i)`: each loop satisfies all but its one antiferromagnetic coupler.
    pub fn planted_energy(&self) -> i64 {
        planted_energy_of(&self.loops)
    }

    /// Largest coupling magnitude; 0 when there are no couplings.
    pub fn range_of(&self) -> i64 {
        self.couplings.iter().map(|j| j.abs()).max().unwrap_or(0)
    }

    pub fn to_model(&self) -> IsingModel<i64> {
        IsingModel::from_parts(
            self.topology.clone(),
            vec![0; self.topology.num_qubits()],
            self.couplings.clone(),
        )
        .expect("couplings aligned with topology")
    }

    /// Checks every construction invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        let topo = &self.topology;
        if self.couplings.len() != topo.num_edges() {
            return Err(Error::Validation("coupling vector does not match topology".into()));
        }
        let k = self.alpha.loop_count(topo.num_functional());
        if self.loops.len() != k {
            return Err(Error::Validation(format!(
                "{} loops but roundoff(alpha n) = {k}",
                self.loops.len()
            )));
        }
        if let RangeLimit::Limited(r) = self.range {
            if self.range_of() > i64::from(r) {
                return Err(Error::Validation(format!(
                    "coupling magnitude {} exceeds declared range {r}",
                    self.range_of()
                )));
            }
        }
        let mut summed = vec![0i64; topo.num_edges()];
        for (i, lp) in self.loops.iter().enumerate() {
            if lp.len() < 3 {
                return Err(Error::Validation(format!("loop {i} has fewer than 3 vertices")));
            }
            let mut seen = std::collections::HashSet::new();
            if !lp.vertices.iter().all(|v| seen.insert(*v)) {
                return Err(Error::Validation(format!("loop {i} repeats a vertex")));
            }
            let mut has_afm = false;
            for (a, b) in lp.edges() {
                let e = topo.edge_index(a as usize, b as usize).ok_or_else(|| {
                    Error::Validation(format!("loop {i} uses missing coupler {a}-{b}"))
                })?;
                if (a, b) == lp.afm_edge {
                    has_afm = true;
                    summed[e] += 1;
                } else {
                    summed[e] -= 1;
                }
            }
            if !has_afm {
                return Err(Error::Validation(format!("loop {i} afm edge not on the cycle")));
            }
        }
        if summed != self.couplings {
            return Err(Error::Validation("couplings differ from the sum of loop constraints".into()));
        }
        if self.planted_energy != self.planted_energy() {
            return Err(Error::Validation(format!(
                "declared planted energy {} but loops give {}",
                self.planted_energy,
                self.planted_energy()
            )));
        }
        Ok(())
    }
}

pub fn planted_energy_of(loops: &[Loop]) -> i64 {
    loops.iter().map(|l| 2 - l.len() as i64).sum()
}

/// Build an instance with `roundoff(alpha n)` loops.
///
/// Loop `i` draws from substream `i` of `seed`, so output is a pure function
/// of the arguments. Stuck walks and policy rejections restart the walk from a
/// fresh start vertex; after [`MAX_ATTEMPTS_PER_LOOP`] restarts the loop index
/// is reported through [`Error::GenerationExhausted`].
pub fn generate_instance(
    topology: &Arc<ChimeraTopology>,
    alpha: Alpha,
    range: RangeLimit,
    policy: LoopPolicy,
    seed: u64,
) -> Result<FrustratedLoopInstance> {
    let k = alpha.loop_count(topology.num_functional());
    let mut couplings = vec![0i64; topology.num_edges()];
    let mut loops = Vec::with_capacity(k);

    for i in 0..k {
        let mut stream = rng::stream(seed, i as u64);
        let mut accepted = None;
        for _ in 0..MAX_ATTEMPTS_PER_LOOP {
            let walk = random_walk_cycle(topology, |e| range.admits(couplings[e].abs()), &mut stream)?;
            if let Walk::Cycle(cycle) = walk {
                if policy.accepts(&cycle) {
                    accepted = Some(cycle);
                    break;
                }
            }
        }
        let vertices = accepted.ok_or(Error::GenerationExhausted {
            loop_index: i,
            attempts: MAX_ATTEMPTS_PER_LOOP,
        })?;

        let afm_pos = stream.random_range(0..vertices.len());
        let (a, b) = (vertices[afm_pos], vertices[(afm_pos + 1) % vertices.len()]);
        let lp = Loop { afm_edge: (a.min(b), a.max(b)), vertices };
        for (a, b) in lp.edges() {
            let e = topology.edge_index(a as usize, b as usize).expect("walk follows couplers");
            couplings[e] += if (a, b) == lp.afm_edge { 1 } else { -1 };
        }
        loops.push(lp);
    }

    let planted_energy = planted_energy_of(&loops);
    Ok(FrustratedLoopInstance {
        topology: topology.clone(),
        couplings,
        loops,
        range,
        alpha,
        seed,
        planted_energy,
    })
}
