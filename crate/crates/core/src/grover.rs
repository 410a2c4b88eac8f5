//! Unstructured search by alternating reflections.
//!
//! Amplitudes are real throughout, so [`SearchState`] stores `f64`. The
//! search never looks at the marked index directly: it only sees a
//! [`SearchOracle`] that flips the sign of the marked amplitude and counts
//! its invocations.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::register::{sample_inverse_cdf, QuantumRegister, SingleQubitGate, NORM_TOLERANCE};
use crate::rng;
use crate::shor::ceil_log2;

/// Binary oracle: negates the amplitude of the marked item.
pub trait SearchOracle {
    fn flip_marked(&mut self, amplitudes: &mut [f64]);
    fn calls(&self) -> u64;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedItemOracle {
    target: usize,
    calls: u64,
}

impl MarkedItemOracle {
    pub fn new(target: usize) -> Self {
        Self { target, calls: 0 }
    }
}

impl SearchOracle for MarkedItemOracle {
    fn flip_marked(&mut self, amplitudes: &mut [f64]) {
        if let Some(a) = amplitudes.get_mut(self.target) {
            *a = -*a;
        }
        self.calls += 1;
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Real amplitudes over `N` database items.
/// Largest explicit amplitude array a search state may hold.
pub const MAX_ITEMS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    amplitudes: Vec<f64>,
}

impl SearchState {
    /// `N^{-1/2}` on every item.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("database size {n} must be at least 2")));
        }
        if n > MAX_ITEMS {
            return Err(Error::ResourceLimit(format!("database size {n} exceeds {MAX_ITEMS}")));
        }
        Ok(Self { amplitudes: vec![1.0 / (n as f64).sqrt(); n] })
    }

    pub fn from_amplitudes(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::Domain("search state needs at least 2 items".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!("search state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index] * self.amplitudes[index]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a * a).collect()
    }
}

pub fn oracle_reflect<O: SearchOracle + ?Sized>(state: &mut SearchState, oracle: &mut O) {
    oracle.flip_marked(&mut state.amplitudes);
}

/// Reflection about the average: `a_i -> 2 mean(a) - a_i`.
pub fn diffusion_reflect(state: &mut SearchState) {
    let mean = state.amplitudes.iter().sum::<f64>() / state.amplitudes.len() as f64;
    for a in &mut state.amplitudes {
        *a = 2.0 * mean - *a;
    }
}

/// One round: oracle query then reflection about the average.
pub fn grover_iteration<O: SearchOracle + ?Sized>(state: &mut SearchState, oracle: &mut O) {
    oracle_reflect(state, oracle);
    diffusion_reflect(state);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuerySchedule {
    pub n: u64,
    pub q_star: u64,
    /// `arcsin(1 / sqrt(N))`
    pub theta: f64,
    pub predicted_success: f64,
}

pub fn rotation_angle(n: u64) -> f64 {
    (1.0 / (n as f64).sqrt()).asin()
}

/// Target probability after `q` rounds: `sin^2((2q + 1) theta)`.
pub fn success_probability(n: u64, q: u64) -> f64 {
    ((2 * q + 1) as f64 * rotation_angle(n)).sin().powi(2)
}

/// Solves `(2Q + 1) arcsin(N^{-1/2}) = pi/2` for the nearest integer `Q`,
/// rounding exact half-integers up.
///
/// N = 4 solves exactly (Q = 1, success 1). N = 2 lands on the tie
/// Q = 1/2 and rounds to 1, but there every Q gives probability 1/2.
pub fn optimal_queries(n: u64) -> Result<QuerySchedule> {
    if n < 2 {
        return Err(Error::Domain(format!("database size {n} must be at least 2")));
    }
    let theta = rotation_angle(n);
    let mut exact = PI / (4.0 * theta) - 0.5;
    // snap values within rounding noise of an integer or half-integer
    let snapped = (exact * 2.0).round() / 2.0;
    if (exact - snapped).abs() < 1e-9 {
        exact = snapped;
    }
    let q_star = (exact + 0.5).floor() as u64;
    let predicted_success = success_probability(n, q_star);
    Ok(QuerySchedule { n, q_star, theta, predicted_success })
}

/// Evolves the uniform state through `q` rounds against `oracle`.
pub fn grover_evolve<O: SearchOracle + ?Sized>(n: usize, q: u64, oracle: &mut O) -> Result<SearchState> {
    let mut state = SearchState::uniform(n)?;
    for _ in 0..q {
        grover_iteration(&mut state, oracle);
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub success: bool,
    pub measured: usize,
    /// Exact target probability before the measurement.
    pub final_probability: f64,
    pub oracle_calls: u64,
}

pub fn grover_search(n: usize, target: usize, q: u64, seed: u64) -> Result<SearchOutcome> {
    grover_search_with(n, target, q, &mut rng::seeded(seed))
}

pub fn grover_search_with<R: Rng + ?Sized>(
    n: usize,
    target: usize,
    q: u64,
    rng: &mut R,
) -> Result<SearchOutcome> {
    if target >= n {
        return Err(Error::Index(format!("target {target} outside database of {n}")));
    }
    let mut oracle = MarkedItemOracle::new(target);
    let state = grover_evolve(n, q, &mut oracle)?;
    let measured = sample_inverse_cdf(&state.probabilities(), rng.gen::<f64>());
    Ok(SearchOutcome {
        success: measured == target,
        measured,
        final_probability: state.probability(target),
        oracle_calls: oracle.calls(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trials: u64,
    pub successes: u64,
    pub predicted_success: f64,
    pub empirical_success: f64,
    /// Oracle calls summed over all trials (`q` per trial).
    pub oracle_calls: u64,
}

/// Repeats the `q`-round search `trials` times, trial `k` measuring with
/// substream `k` of `seed`. The pre-measurement state is the same in every
/// trial, so it is evolved once.
pub fn grover_trials(n: usize, target: usize, q: u64, trials: u64, seed: u64) -> Result<TrialSummary> {
    if target >= n {
        return Err(Error::Index(format!("target {target} outside database of {n}")));
    }
    if trials == 0 {
        return Err(Error::Usage("need at least one trial".into()));
    }
    let mut oracle = MarkedItemOracle::new(target);
    let probs = grover_evolve(n, q, &mut oracle)?.probabilities();
    let successes = (0..trials)
        .filter(|&k| sample_inverse_cdf(&probs, rng::trial_stream(seed, k).gen::<f64>()) == target)
        .count() as u64;
    Ok(TrialSummary {
        trials,
        successes,
        predicted_success: success_probability(n as u64, q),
        empirical_success: successes as f64 / trials as f64,
        oracle_calls: oracle.calls() * trials,
    })
}

/// The same search on a [`QuantumRegister`] of `n_qubits`, with the
/// diffusion built as `H^n (2|0><0| - I) H^n`.
pub fn grover_search_register(n_qubits: usize, target: usize, q: u64) -> Result<QuantumRegister> {
    let mut reg = QuantumRegister::new_zero(n_qubits)?;
    reg.uniform_superposition()?;
    let h = SingleQubitGate::hadamard();
    for _ in 0..q {
        reg.apply_oracle_flip(target)?;
        for k in 0..n_qubits {
            reg.apply_single_qubit(&h, k)?;
        }
        reg.apply_zero_reflection();
        for k in 0..n_qubits {
            reg.apply_single_qubit(&h, k)?;
        }
    }
    Ok(reg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RandomSearchRun {
    pub queries: u64,
    pub last_probe: usize,
}

/// Uniform probing with replacement until the marked item is hit.
pub fn classical_random_search(n: usize, target: usize, seed: u64) -> Result<RandomSearchRun> {
    classical_random_search_with(n, target, &mut rng::seeded(seed))
}

pub fn classical_random_search_with<R: Rng + ?Sized>(
    n: usize,
    target: usize,
    rng: &mut R,
) -> Result<RandomSearchRun> {
    if n == 0 || target >= n {
        return Err(Error::Index(format!("target {target} outside database of {n}")));
    }
    let mut queries = 0;
    loop {
        let probe = rng.gen_range(0..n);
        queries += 1;
        if probe == target {
            return Ok(RandomSearchRun { queries, last_probe: probe });
        }
    }
}

/// Mean query count of `trials` random searches, trial `k` drawing from
/// substream `k` of `seed` with target `k mod n`.
pub fn mean_random_search_queries(n: usize, trials: u64, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Usage("need at least one trial".into()));
    }
    let mut total = 0u64;
    for k in 0..trials {
        let target = (k % n as u64) as usize;
        total += classical_random_search_with(n, target, &mut rng::trial_stream(seed, k))?.queries;
    }
    Ok(total as f64 / trials as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SortedSearchRun {
    pub queries: u64,
    pub found: usize,
    /// One-off sorting charge, `N ceil(log2 N)` comparison units.
    pub sort_cost: u64,
}

/// Bisection over a sorted database. Each query asks one bit of the
/// label (is the item in the lower half of the current range?), so every
/// search costs exactly `ceil(log2 N)` queries.
pub fn classical_sorted_search(n: usize, target: usize) -> Result<SortedSearchRun> {
    if n == 0 || target >= n {
        return Err(Error::Index(format!("target {target} outside database of {n}")));
    }
    let bits = ceil_log2(n as u64);
    let in_lower = |lo: usize, half: usize| target < lo + half;
    let (mut lo, mut width, mut queries) = (0usize, 1usize << bits, 0u64);
    while width > 1 {
        let half = width / 2;
        queries += 1;
        if !in_lower(lo, half) {
            lo += half;
        }
        width = half;
    }
    Ok(SortedSearchRun { queries, found: lo, sort_cost: n as u64 * bits as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveRun {
    pub steps: u64,
    /// Real cells the oscillator array occupies (no tensor compression).
    pub spatial_cells: usize,
    pub final_probability: f64,
    /// N = 2: probability stays 1/2 for every step count.
    pub degenerate: bool,
}

/// The two-reflection iteration on an explicit length-`N` array of
/// oscillator amplitudes; stops once the target probability reaches the
/// predicted optimum.
pub fn wave_analogue_search(n: usize, target: usize) -> Result<WaveRun> {
    if target >= n {
        return Err(Error::Index(format!("target {target} outside database of {n}")));
    }
    let schedule = optimal_queries(n as u64)?;
    let threshold = schedule.predicted_success - 1e-9;
    let mut cells = vec![1.0 / (n as f64).sqrt(); n];
    let mut steps = 0u64;
    // the first crossing happens at Q*, bound the loop well past it
    while cells[target] * cells[target] <= threshold && steps <= 2 * schedule.q_star + 1 {
        cells[target] = -cells[target];
        let mean = cells.iter().sum::<f64>() / n as f64;
        cells.iter_mut().for_each(|a| *a = 2.0 * mean - *a);
        steps += 1;
    }
    Ok(WaveRun {
        steps,
        spatial_cells: cells.len(),
        final_probability: cells[target] * cells[target],
        degenerate: n == 2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridStage {
    /// Candidate-set size after this stage.
    pub subset_size: usize,
    pub queries_used: u64,
    pub success_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridPlan {
    pub branching: usize,
    pub stages: Vec<HybridStage>,
    pub total_queries: u64,
    pub found: usize,
}

/// Search with a factorised oracle: each stage asks which of `branching`
/// sub-blocks holds the item, answering it with an amplitude-amplified
/// search over the block labels, and descends into the most probable
/// block. With four blocks each stage is the exact one-query case.
pub fn hybrid_factorized_search(n: usize, branching: usize, target: usize) -> Result<HybridPlan> {
    if branching < 2 {
        return Err(Error::Usage(format!("branching factor {branching} must be at least 2")));
    }
    let mut size = 1usize;
    while size < n {
        size = size.saturating_mul(branching);
    }
    if n < branching || size != n {
        return Err(Error::Usage(format!("{n} is not a power of the branching factor {branching}")));
    }
    if target >= n {
        return Err(Error::Index(format!("target {target} outside database of {n}")));
    }
    let schedule = optimal_queries(branching as u64)?;
    let mut stages = Vec::new();
    let (mut lo, mut size) = (0usize, n);
    while size > 1 {
        let block = size / branching;
        let mut oracle = MarkedItemOracle::new((target - lo) / block);
        let state = grover_evolve(branching, schedule.q_star, &mut oracle)?;
        let probs = state.probabilities();
        let chosen = (0..branching).fold(0, |best, j| if probs[j] > probs[best] { j } else { best });
        lo += chosen * block;
        size = block;
        stages.push(HybridStage {
            subset_size: size,
            queries_used: oracle.calls(),
            success_probability: probs[chosen],
        });
    }
    let total_queries = stages.iter().map(|s| s.queries_used).sum();
    Ok(HybridPlan { branching, stages, total_queries, found: lo })
}
