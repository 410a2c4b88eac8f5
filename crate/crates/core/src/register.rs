//! Dense state-vector register.
//!
//! Basis index `i` encodes the bit string `x_{n-1} ... x_1 x_0` with `x_0`
//! as the least significant bit, so qubit `k` is bit `k` of the index.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

pub type Amplitude = Complex64;

/// Largest register the simulator will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// Tolerance for the unit-norm invariant on construction.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Norm drift above which measurement refuses to sample.
pub const MEASUREMENT_NORM_TOLERANCE: f64 = 1e-6;

const UNITARY_TOLERANCE: f64 = 1e-12;

const ZERO: Amplitude = Amplitude::new(0.0, 0.0);
const ONE: Amplitude = Amplitude::new(1.0, 0.0);

pub(crate) fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "register of {n} qubits is outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// A validated 2x2 unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitGate {
    matrix: [[Amplitude; 2]; 2],
}

impl SingleQubitGate {
    /// Wraps `matrix` after checking `G G^dagger = I` elementwise.
    pub fn new(matrix: [[Amplitude; 2]; 2]) -> Result<Self> {
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = ZERO;
                for k in 0..2 {
                    acc += matrix[r][k] * matrix[c][k].conj();
                }
                let expected = if r == c { ONE } else { ZERO };
                let dev = (acc - expected).norm();
                if !dev.is_finite() || dev > UNITARY_TOLERANCE {
                    return Err(Error::Validation(format!(
                        "gate is not unitary: (G G^dagger)[{r}][{c}] deviates by {dev:e}"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self { matrix: [[ONE, ZERO], [ZERO, ONE]] }
    }

    pub fn hadamard() -> Self {
        let h = Amplitude::new(FRAC_1_SQRT_2, 0.0);
        Self { matrix: [[h, h], [h, -h]] }
    }

    pub fn pauli_x() -> Self {
        Self { matrix: [[ZERO, ONE], [ONE, ZERO]] }
    }

    /// diag(1, e^{i angle})
    pub fn phase(angle: f64) -> Self {
        Self { matrix: [[ONE, ZERO], [ZERO, Amplitude::from_polar(1.0, angle)]] }
    }

    pub fn matrix(&self) -> [[Amplitude; 2]; 2] {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        let m = self.matrix;
        Self {
            matrix: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }
}

/// Cumulative gate and query counts since register creation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub single_qubit: u64,
    pub controlled_phase: u64,
    pub swap: u64,
    pub oracle_calls: u64,
    pub zero_reflections: u64,
}

impl OpCounts {
    /// Gate applications: single-qubit gates, controlled phases and swaps.
    pub fn gates(&self) -> u64 {
        self.single_qubit + self.controlled_phase + self.swap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementOutcome {
    pub basis_index: usize,
    /// `|amplitude|^2` of the outcome in the pre-measurement state.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegister {
    num_qubits: usize,
    amplitudes: Vec<Amplitude>,
    counts: OpCounts,
}

impl QuantumRegister {
    /// `|0...0>` on `n` qubits.
    pub fn new_zero(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    /// Computational basis state `|index>` on `n` qubits.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Index(format!("basis index {index} >= 2^{n}")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { num_qubits: n, amplitudes, counts: OpCounts::default() })
    }

    /// Register holding `amplitudes`, which must have power-of-two length
    /// and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Validation(format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_qubit_count(n)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!("state norm {norm} is not 1")));
        }
        Ok(Self { num_qubits: n, amplitudes, counts: OpCounts::default() })
    }

    /// Normalised state with pseudo-random complex amplitudes drawn from `seed`.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        check_qubit_count(n)?;
        Self::from_amplitudes(random_amplitudes(1usize << n, seed))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amplitudes
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a Hadamard to every qubit of `|0...0>`, one gate per qubit.
    pub fn uniform_superposition(&mut self) -> Result<()> {
        let is_zero_state = (self.amplitudes[0] - ONE).norm() <= UNITARY_TOLERANCE
            && self.amplitudes[1..].iter().all(|a| a.norm() <= UNITARY_TOLERANCE);
        if !is_zero_state {
            return Err(Error::Validation(
                "uniform superposition must start from |0...0>".into(),
            ));
        }
        let h = SingleQubitGate::hadamard();
        for q in 0..self.num_qubits {
            self.apply_single_qubit(&h, q)?;
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::Index(format!(
                "qubit {q} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// Applies `gate` to qubit `target`, mixing each pair of amplitudes whose
    /// indices differ only in that bit.
    pub fn apply_single_qubit(&mut self, gate: &SingleQubitGate, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let [[m00, m01], [m10, m11]] = gate.matrix;
        let stride = 1usize << target;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = m00 * x0 + m01 * x1;
                *a1 = m10 * x0 + m11 * x1;
            }
        }
        self.counts.single_qubit += 1;
        Ok(())
    }

    /// Multiplies every amplitude whose `control` and `target` bits are both
    /// set by `e^{i angle}`.
    pub fn apply_controlled_phase(&mut self, control: usize, target: usize, angle: f64) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Usage(format!(
                "controlled phase needs distinct qubits, got {control} twice"
            )));
        }
        let mask = (1usize << control) | (1usize << target);
        let phase = Amplitude::from_polar(1.0, angle);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= phase;
            }
        }
        self.counts.controlled_phase += 1;
        Ok(())
    }

    /// Exchanges qubits `a` and `b`.
    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a != b {
            let (ba, bb) = (1usize << a, 1usize << b);
            for i in 0..self.amplitudes.len() {
                // visit each unordered pair once: bit a set, bit b clear
                if i & ba != 0 && i & bb == 0 {
                    self.amplitudes.swap(i, i ^ ba ^ bb);
                }
            }
        }
        self.counts.swap += 1;
        Ok(())
    }

    /// Oracle query: negates the amplitude of basis state `index`.
    pub fn apply_oracle_flip(&mut self, index: usize) -> Result<()> {
        if index >= self.amplitudes.len() {
            return Err(Error::Index(format!("oracle index {index} out of range")));
        }
        self.amplitudes[index] = -self.amplitudes[index];
        self.counts.oracle_calls += 1;
        Ok(())
    }

    /// `2|0><0| - I`: negates every amplitude except the one at index 0.
    pub fn apply_zero_reflection(&mut self) {
        for a in &mut self.amplitudes[1..] {
            *a = -*a;
        }
        self.counts.zero_reflections += 1;
    }

    pub(crate) fn record_oracle_call(&mut self) {
        self.counts.oracle_calls += 1;
    }

    pub fn measure_all(&self, seed: u64) -> Result<MeasurementOutcome> {
        self.measure_all_with(&mut rng::seeded(seed))
    }

    /// Samples a basis index from `|amplitude_i|^2` without collapsing.
    pub fn measure_all_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MeasurementOutcome> {
        self.check_measurable()?;
        let probs = self.probabilities();
        let basis_index = sample_inverse_cdf(&probs, rng.gen::<f64>());
        Ok(MeasurementOutcome { basis_index, probability: probs[basis_index] })
    }

    /// Measures the qubits in `qubits` (a contiguous range), collapses and
    /// renormalises the state, and returns the observed value of that field.
    pub fn measure_qubits<R: Rng + ?Sized>(&mut self, qubits: Range<usize>, rng: &mut R) -> Result<usize> {
        if qubits.start >= qubits.end || qubits.end > self.num_qubits {
            return Err(Error::Index(format!(
                "qubit range {qubits:?} invalid for {} qubits",
                self.num_qubits
            )));
        }
        self.check_measurable()?;
        let width = qubits.end - qubits.start;
        let field = |i: usize| (i >> qubits.start) & ((1usize << width) - 1);
        let mut marginal = vec![0.0; 1usize << width];
        for (i, a) in self.amplitudes.iter().enumerate() {
            marginal[field(i)] += a.norm_sqr();
        }
        let value = sample_inverse_cdf(&marginal, rng.gen::<f64>());
        let scale = 1.0 / marginal[value].sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if field(i) == value {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(value)
    }

    fn check_measurable(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > MEASUREMENT_NORM_TOLERANCE {
            return Err(Error::StateCorruption(format!(
                "register norm {norm} drifted from 1"
            )));
        }
        Ok(())
    }
}

/// Unit-norm vector of `len` amplitudes with components uniform in
/// `[-0.5, 0.5)` before normalisation.
pub fn random_amplitudes(len: usize, seed: u64) -> Vec<Amplitude> {
    let mut r = rng::seeded(seed);
    let v: Vec<Amplitude> = (0..len)
        .map(|_| Amplitude::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5))
        .collect();
    let norm = norm_sqr(&v).sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub(crate) fn norm_sqr(amplitudes: &[Amplitude]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Inverse-CDF sampling over unnormalised `weights` with `u` in `[0, 1)`.
///
/// Returns the lowest index whose cumulative weight reaches `u * total`,
/// skipping zero-weight entries so they can never be drawn.
pub fn sample_inverse_cdf(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let threshold = u * total;
    let mut cumulative = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        cumulative += w;
        last_nonzero = i;
        if cumulative >= threshold {
            return i;
        }
    }
    last_nonzero
}
