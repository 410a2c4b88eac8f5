//! Discrete Fourier transform three ways.
//!
//! All three routes use the same convention, `e^{+2 pi i x y / N} / sqrt(N)`,
//! and produce output in natural index order so they can be diffed
//! elementwise:
//!
//! * [`dft_bruteforce`]: direct double loop, `N^2` complex multiply-adds.
//! * [`fft_classical`]: iterative radix-2 FFT, `(N/2) log2 N` butterflies.
//! * [`qft_factorized`]: Hadamards and controlled phases on a
//!   [`QuantumRegister`], `n + n(n-1)/2 + floor(n/2)` gates.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::register::{check_qubit_count, Amplitude, QuantumRegister, SingleQubitGate};

/// Largest `n` for which [`complexity_table`] runs the transforms.
pub const MAX_TABLE_QUBITS: usize = 14;

/// Output of a classical transform together with its operation count.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVector {
    pub values: Vec<Amplitude>,
    /// Complex multiply-adds (brute force) or butterflies (FFT).
    pub operations: u64,
}

pub fn dft_bruteforce(input: &[Amplitude]) -> Result<SpectrumVector> {
    let n = input.len();
    if n == 0 {
        return Err(Error::Usage("DFT of an empty vector".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut operations = 0u64;
    let values = (0..n)
        .map(|y| {
            let mut acc = Amplitude::new(0.0, 0.0);
            for (x, v) in input.iter().enumerate() {
                // reduce x*y mod N first so the angle stays in [0, 2pi)
                let k = ((x as u128 * y as u128) % n as u128) as f64;
                acc += Amplitude::from_polar(1.0, TAU * k / n as f64) * v;
                operations += 1;
            }
            acc * scale
        })
        .collect();
    Ok(SpectrumVector { values, operations })
}

pub fn fft_classical(input: &[Amplitude]) -> Result<SpectrumVector> {
    let n = input.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Usage(format!("FFT length {n} is not a power of two")));
    }
    let bits = n.trailing_zeros();
    let mut data: Vec<Amplitude> = if bits == 0 {
        input.to_vec()
    } else {
        (0..n).map(|i| input[i.reverse_bits() >> (usize::BITS - bits)]).collect()
    };

    let mut operations = 0u64;
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let twiddles: Vec<Amplitude> = (0..half)
            .map(|k| Amplitude::from_polar(1.0, TAU * k as f64 / len as f64))
            .collect();
        for chunk in data.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *b * w;
                *b = *a - t;
                *a += t;
                operations += 1;
            }
        }
        len *= 2;
    }

    let scale = 1.0 / (n as f64).sqrt();
    data.iter_mut().for_each(|v| *v *= scale);
    Ok(SpectrumVector { values: data, operations })
}

/// `2 pi * (.x_k x_{k-1} ... x_0)` in binary, for an `n`-bit `x`.
pub fn fractional_phase(x: u64, n: usize, k: usize) -> Result<f64> {
    if k >= n || n > 63 {
        return Err(Error::Index(format!("bit {k} out of range for {n}-bit value")));
    }
    let denom = 1u64 << (k + 1);
    Ok(TAU * (x % denom) as f64 / denom as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GateInstruction {
    Hadamard(usize),
    ControlledPhase { control: usize, target: usize, angle: f64 },
    Swap(usize, usize),
}

/// Gate sequence realising the QFT on `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseLadderPlan {
    num_qubits: usize,
    instructions: Vec<GateInstruction>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PlanCounts {
    pub hadamards: u64,
    pub controlled_phases: u64,
    pub swaps: u64,
}

impl PlanCounts {
    pub fn total(&self) -> u64 {
        self.hadamards + self.controlled_phases + self.swaps
    }
}

impl PhaseLadderPlan {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[GateInstruction] {
        &self.instructions
    }

    pub fn counts(&self) -> PlanCounts {
        let mut c = PlanCounts::default();
        for g in &self.instructions {
            match g {
                GateInstruction::Hadamard(_) => c.hadamards += 1,
                GateInstruction::ControlledPhase { .. } => c.controlled_phases += 1,
                GateInstruction::Swap(..) => c.swaps += 1,
            }
        }
        c
    }

    /// Runs the plan on qubits `offset .. offset + n` of `reg`.
    pub fn apply(&self, reg: &mut QuantumRegister, offset: usize) -> Result<()> {
        if offset + self.num_qubits > reg.num_qubits() {
            return Err(Error::Index(format!(
                "plan for {} qubits at offset {offset} exceeds a {}-qubit register",
                self.num_qubits,
                reg.num_qubits()
            )));
        }
        let h = SingleQubitGate::hadamard();
        for g in &self.instructions {
            match *g {
                GateInstruction::Hadamard(q) => reg.apply_single_qubit(&h, offset + q)?,
                GateInstruction::ControlledPhase { control, target, angle } => {
                    reg.apply_controlled_phase(offset + control, offset + target, angle)?
                }
                GateInstruction::Swap(a, b) => reg.apply_swap(offset + a, offset + b)?,
            }
        }
        Ok(())
    }
}

/// Builds the Hadamard / controlled-phase ladder followed by the swap
/// network that restores natural output order.
///
/// Qubit `j` is processed from the top down: a Hadamard contributes
/// `e^{2 pi i (.x_j)}` and each lower qubit `k` adds `pi / 2^{j-k}`, leaving
/// qubit `j` in `(|0> + e^{2 pi i (.x_j ... x_0)} |1>) / sqrt(2)`, which is
/// output bit `n-1-j`.
pub fn build_qft_plan(n: usize) -> Result<PhaseLadderPlan> {
    check_qubit_count(n)?;
    let mut instructions = Vec::with_capacity(n + n * (n - 1) / 2 + n / 2);
    for target in (0..n).rev() {
        instructions.push(GateInstruction::Hadamard(target));
        for control in (0..target).rev() {
            let angle = PI / (1u64 << (target - control)) as f64;
            instructions.push(GateInstruction::ControlledPhase { control, target, angle });
        }
    }
    for q in 0..n / 2 {
        instructions.push(GateInstruction::Swap(q, n - 1 - q));
    }
    Ok(PhaseLadderPlan { num_qubits: n, instructions })
}

/// Closed-form gate count of [`build_qft_plan`].
pub fn qft_gate_count(n: usize) -> u64 {
    let n = n as u64;
    n + n * n.saturating_sub(1) / 2 + n / 2
}

/// In-place QFT of the whole register.
pub fn qft_factorized(reg: &mut QuantumRegister) -> Result<()> {
    build_qft_plan(reg.num_qubits())?.apply(reg, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityRow {
    pub n: usize,
    /// Complex multiply-adds of the brute-force transform.
    pub naive_ops: u64,
    /// Radix-2 butterflies.
    pub fft_ops: u64,
    /// Gate applications of the quantum circuit.
    pub qft_gates: u64,
}

impl ComplexityRow {
    pub const CSV_HEADER: &'static str = "n,naive_ops,fft_ops,qft_gates";

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{}", self.n, self.naive_ops, self.fft_ops, self.qft_gates)
    }
}

/// Runs all three transforms on `|0...0>` for each `n` and reads their
/// operation counters.
pub fn complexity_table(ns: impl IntoIterator<Item = usize>) -> Result<Vec<ComplexityRow>> {
    ns.into_iter()
        .map(|n| {
            if n == 0 || n > MAX_TABLE_QUBITS {
                return Err(Error::ResourceLimit(format!(
                    "complexity table supports 1..={MAX_TABLE_QUBITS} qubits, got {n}"
                )));
            }
            let mut reg = QuantumRegister::new_zero(n)?;
            qft_factorized(&mut reg)?;
            let input = reg.amplitudes().to_vec();
            Ok(ComplexityRow {
                n,
                naive_ops: dft_bruteforce(&input)?.operations,
                fft_ops: fft_classical(&input)?.operations,
                qft_gates: reg.counts().gates(),
            })
        })
        .collect()
}
