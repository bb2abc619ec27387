//! Ising models over a Chimera topology and their energy function
//! `E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i`.

use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::chimera::ChimeraTopology;
use crate::error::{invalid, Result};
use crate::scalar::{Field, Real, Scalar};

/// Biases `h` per physical qubit and couplings `J` per topology edge.
///
/// Broken qubits carry a zero bias; `couplings[e]` belongs to `topology.edges()[e]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel<T> {
    topology: Arc<ChimeraTopology>,
    fields: Vec<T>,
    couplings: Vec<T>,
}

impl<T: Scalar> IsingModel<T> {
    pub fn from_parts(topology: Arc<ChimeraTopology>, fields: Vec<T>, couplings: Vec<T>) -> Result<Self> {
        if fields.len() != topology.num_qubits() {
            return Err(invalid(format!(
                "{} biases for {} qubits",
                fields.len(),
                topology.num_qubits()
            )));
        }
        if couplings.len() != topology.num_edges() {
            return Err(invalid(format!(
                "{} couplings for {} edges",
                couplings.len(),
                topology.num_edges()
            )));
        }
        if let Some(q) = (0..fields.len()).find(|&q| !topology.is_functional(q) && !fields[q].is_zero()) {
            return Err(invalid(format!("nonzero bias on broken qubit {q}")));
        }
        Ok(Self { topology, fields, couplings })
    }

    pub fn zeros(topology: Arc<ChimeraTopology>) -> Self {
        let fields = vec![T::zero(); topology.num_qubits()];
        let couplings = vec![T::zero(); topology.num_edges()];
        Self { topology, fields, couplings }
    }

    pub fn topology(&self) -> &Arc<ChimeraTopology> {
        &self.topology
    }

    pub fn fields(&self) -> &[T] {
        &self.fields
    }

    pub fn couplings(&self) -> &[T] {
        &self.couplings
    }

    pub fn num_qubits(&self) -> usize {
        self.topology.num_qubits()
    }

    pub fn set_coupling(&mut self, a: usize, b: usize, value: T) -> Result<()> {
        let e = self
            .topology
            .edge_index(a, b)
            .ok_or_else(|| invalid(format!("no coupler between {a} and {b}")))?;
        self.couplings[e] = value;
        Ok(())
    }

    pub fn set_field(&mut self, q: usize, value: T) -> Result<()> {
        if !self.topology.is_functional(q) {
            return Err(invalid(format!("qubit {q} is not functional")));
        }
        self.fields[q] = value;
        Ok(())
    }

    /// Energy of `state`; exact for integer and rational models.
    pub fn energy(&self, state: &SpinState) -> Result<T> {
        if state.len() != self.num_qubits() {
            return Err(invalid(format!(
                "state has {} spins, model has {} qubits",
                state.len(),
                self.num_qubits()
            )));
        }
        Ok(self.energy_unchecked(state.as_slice()))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[i8]) -> T {
        let mut e = T::zero();
        for (&(a, b), &j) in self.topology.edges().iter().zip(&self.couplings) {
            if spins[a as usize] == spins[b as usize] {
                e = e + j;
            } else {
                e = e - j;
            }
        }
        for (q, &h) in self.fields.iter().enumerate() {
            if spins[q] > 0 {
                e = e + h;
            } else {
                e = e - h;
            }
        }
        e
    }

    /// `max(max|J|, max|h|)`.
    pub fn max_magnitude(&self) -> T {
        self.couplings
            .iter()
            .chain(&self.fields)
            .fold(T::zero(), |m, v| m.max_of(v.abs()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> IsingModel<U> {
        IsingModel {
            topology: self.topology.clone(),
            fields: self.fields.iter().map(|&v| f(v)).collect(),
            couplings: self.couplings.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Spin-reversal transform: `J'_ij = g_i g_j J_ij`, `h'_i = g_i h_i`.
    pub fn gauge_transform(&self, gauge: &Gauge) -> Result<Self> {
        if gauge.0.len() != self.num_qubits() {
            return Err(invalid("gauge length does not match model"));
        }
        let g = |q: u32| gauge.0[q as usize] < 0;
        let couplings = self
            .topology
            .edges()
            .iter()
            .zip(&self.couplings)
            .map(|(&(a, b), &j)| if g(a) != g(b) { -j } else { j })
            .collect();
        let fields = self
            .fields
            .iter()
            .enumerate()
            .map(|(q, &h)| if g(q as u32) { -h } else { h })
            .collect();
        Ok(Self { topology: self.topology.clone(), fields, couplings })
    }
}

impl IsingModel<i64> {
    pub fn convert<U: Scalar>(&self) -> IsingModel<U> {
        self.map(U::from_int)
    }
}

impl<T: Field> IsingModel<T> {
    /// Divide every entry by `max(max|J|, max|h|)` so the largest magnitude is 1.
    pub fn normalized(&self) -> Result<Self> {
        let scale = self.max_magnitude();
        if scale.is_zero() {
            return Err(invalid("cannot normalize an identically zero model"));
        }
        Ok(self.map(|v| v / scale))
    }

    pub fn is_normalized(&self) -> bool {
        self.max_magnitude().reaches(T::one())
    }
}

impl<T: Real> IsingModel<T> {
    /// Copy with independent Gaussian noise of width `delta_h` on every functional
    /// qubit's bias and `delta_j` on every coupler, zero entries included.
    pub fn perturb<R: RngCore + ?Sized>(&self, delta_h: f64, delta_j: f64, rng: &mut R) -> Result<Self> {
        let noise = |width: f64| {
            if !(width >= 0.0 && width.is_finite()) {
                return Err(invalid(format!("noise width must be finite and non-negative, got {width}")));
            }
            Ok(Normal::new(0.0, width).expect("validated width"))
        };
        let (nh, nj) = (noise(delta_h)?, noise(delta_j)?);
        let mut out = self.clone();
        for (q, h) in out.fields.iter_mut().enumerate() {
            if self.topology.is_functional(q) && delta_h > 0.0 {
                *h = *h + T::from_f64(nh.sample(rng));
            }
        }
        if delta_j > 0.0 {
            for j in &mut out.couplings {
                *j = *j + T::from_f64(nj.sample(rng));
            }
        }
        Ok(out)
    }
}

/// Analog control-error widths on the normalized `[-1, 1]` scale.
pub const DEFAULT_DELTA_H: f64 = 0.05;
pub const DEFAULT_DELTA_J: f64 = 0.035;

/// `evaluate_energy(model, state)`.
pub fn evaluate_energy<T: Scalar>(model: &IsingModel<T>, state: &SpinState) -> Result<T> {
    model.energy(state)
}

/// One `+1`/`-1` value per physical qubit. Broken qubits hold `+1` and never
/// contribute to the energy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinState(Vec<i8>);

impl SpinState {
    pub fn from_spins(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("spins must be +1 or -1"));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn all_down(n: usize) -> Self {
        Self(vec![-1; n])
    }

    pub fn random<R: RngCore + ?Sized>(topology: &ChimeraTopology, rng: &mut R) -> Self {
        Self(
            (0..topology.num_qubits())
                .map(|q| if topology.is_functional(q) && rng.random::<bool>() { -1 } else { 1 })
                .collect(),
        )
    }

    /// Functional qubit `order[b]` is down when bit `b` of `bits` is set.
    pub fn from_bits(num_qubits: usize, order: &[usize], bits: u64) -> Self {
        let mut s = vec![1i8; num_qubits];
        for (b, &q) in order.iter().enumerate() {
            if bits >> b & 1 == 1 {
                s[q] = -1;
            }
        }
        Self(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn spin(&self, q: usize) -> i8 {
        self.0[q]
    }

    pub fn flip(&mut self, q: usize) {
        self.0[q] = -self.0[q];
    }

    pub fn set(&mut self, q: usize, s: i8) {
        self.0[q] = if s < 0 { -1 } else { 1 };
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Spin reversal of the state: `s'_i = g_i s_i`.
    pub fn gauged(&self, gauge: &Gauge) -> Result<Self> {
        if gauge.0.len() != self.0.len() {
            return Err(invalid("gauge length does not match state"));
        }
        Ok(Self(self.0.iter().zip(&gauge.0).map(|(s, g)| s * g).collect()))
    }
}

/// Per-qubit sign flips.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gauge(Vec<i8>);

impl Gauge {
    pub fn identity(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("gauge signs must be +1 or -1"));
        }
        Ok(Self(signs))
    }

    pub fn random<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| if rng.random::<bool>() { -1 } else { 1 }).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }
}
