//! Factoring by period finding, at simulation scale (moduli up to 64).
//!
//! The modular-exponentiation oracle is simulated by writing the state
//! `2^{-n_x/2} sum_x |x>|a^x mod M>` directly and is charged as one oracle
//! call. The x register is then Fourier transformed with the gate-level QFT
//! and measured; continued fractions turn the sample into a period.

use std::ops::Range;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qft::build_qft_plan;
use crate::register::{Amplitude, QuantumRegister, MAX_QUBITS};
use crate::rng;

/// Largest modulus [`shor_factor`] accepts: `3 * ceil(log2 64) = 18` qubits.
pub const MAX_MODULUS: u64 = 64;

pub const DEFAULT_MAX_RETRIES: u32 = 32;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Smallest `b` with `2^b >= m`.
pub fn ceil_log2(m: u64) -> usize {
    if m <= 1 {
        0
    } else {
        (64 - (m - 1).leading_zeros()) as usize
    }
}

/// Width of the x register for modulus `m`: `2 ceil(log2 m)`.
pub fn x_register_bits(m: u64) -> usize {
    2 * ceil_log2(m)
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns `p` when `m = p^k` for a prime `p` and `k >= 2`.
pub fn prime_power_base(m: u64) -> Option<u64> {
    if m < 4 {
        return None;
    }
    (2..=63u32).find_map(|k| {
        let root = (m as f64).powf(1.0 / k as f64).round() as u64;
        (root.saturating_sub(1)..=root + 1)
            .find(|&r| r >= 2 && r.checked_pow(k) == Some(m) && is_prime(r))
    })
}

/// Order of `a` modulo `m` by direct iteration.
pub fn brute_force_order(a: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} must be at least 2")));
    }
    if gcd(a, m) != 1 {
        return Err(Error::Domain(format!("gcd({a}, {m}) != 1, no multiplicative order")));
    }
    let a = a % m;
    let mut value = a;
    let mut r = 1;
    while value != 1 % m {
        value = (value as u128 * a as u128 % m as u128) as u64;
        r += 1;
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactoringInstance {
    pub modulus: u64,
    pub base: u64,
    pub gcd: u64,
}

impl FactoringInstance {
    pub fn new(modulus: u64, base: u64) -> Result<Self> {
        if modulus < 4 {
            return Err(Error::Domain(format!("modulus {modulus} must be at least 4")));
        }
        if base <= 1 || base >= modulus {
            return Err(Error::Domain(format!("base {base} must lie in (1, {modulus})")));
        }
        Ok(Self { modulus, base, gcd: gcd(base, modulus) })
    }

    /// True when `gcd(a, M) > 1` already exposes a factor.
    pub fn is_classical_shortcut(&self) -> bool {
        self.gcd > 1
    }
}

/// Joint `|x>|f>` register after one oracle call. Index layout is
/// `x + (f << x_qubits)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodOracleState {
    base: u64,
    modulus: u64,
    x_qubits: usize,
    f_qubits: usize,
    register: QuantumRegister,
}

impl PeriodOracleState {
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn x_qubits(&self) -> usize {
        self.x_qubits
    }

    pub fn f_qubits(&self) -> usize {
        self.f_qubits
    }

    pub fn register(&self) -> &QuantumRegister {
        &self.register
    }

    fn f_range(&self) -> Range<usize> {
        self.x_qubits..self.x_qubits + self.f_qubits
    }

    /// Splits a joint basis index into `(x, f)`.
    pub fn split_index(&self, index: usize) -> (u64, u64) {
        let x = index & ((1usize << self.x_qubits) - 1);
        (x as u64, (index >> self.x_qubits) as u64)
    }

    /// Exact distribution of the x-register measurement after the QFT,
    /// computed from the state vector.
    pub fn exact_y_distribution(&self) -> Result<Vec<f64>> {
        let mut reg = self.register.clone();
        build_qft_plan(self.x_qubits)?.apply(&mut reg, 0)?;
        let mask = (1usize << self.x_qubits) - 1;
        let mut dist = vec![0.0; 1usize << self.x_qubits];
        for (i, a) in reg.amplitudes().iter().enumerate() {
            dist[i & mask] += a.norm_sqr();
        }
        Ok(dist)
    }
}

/// Builds `2^{-n_x/2} sum_x |x>|a^x mod M>` directly at the amplitude level.
pub fn build_period_state(a: u64, m: u64, x_qubits: usize) -> Result<PeriodOracleState> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} must be at least 2")));
    }
    if gcd(a, m) != 1 {
        return Err(Error::Domain(format!("gcd({a}, {m}) != 1")));
    }
    let f_qubits = ceil_log2(m).max(1);
    if x_qubits == 0 || x_qubits + f_qubits > MAX_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "{x_qubits} + {f_qubits} qubits exceeds the {MAX_QUBITS}-qubit budget"
        )));
    }
    let size = 1usize << x_qubits;
    let amp = Amplitude::new(1.0 / (size as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Amplitude::new(0.0, 0.0); 1usize << (x_qubits + f_qubits)];
    let mut f = 1 % m;
    for x in 0..size {
        amplitudes[x | (f as usize) << x_qubits] = amp;
        f = (f as u128 * a as u128 % m as u128) as u64;
    }
    let mut register = QuantumRegister::from_amplitudes(amplitudes)?;
    register.record_oracle_call();
    Ok(PeriodOracleState { base: a, modulus: m, x_qubits, f_qubits, register })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PeriodSample {
    pub y: u64,
    /// Value seen on the f register when it is measured before the QFT.
    pub f_value: Option<u64>,
}

pub fn extract_period_sample(state: PeriodOracleState, seed: u64) -> Result<PeriodSample> {
    extract_period_sample_with(state, true, &mut rng::seeded(seed))
}

/// Samples `y` from the post-QFT x register.
///
/// With `measure_f_first` the f register is measured first and the
/// collapsed x register (a product factor of the joint state) is
/// transformed on its own. Otherwise the QFT acts on the x qubits of the
/// joint register and both registers are measured at the end.
pub fn extract_period_sample_with<R: Rng + ?Sized>(
    mut state: PeriodOracleState,
    measure_f_first: bool,
    rng: &mut R,
) -> Result<PeriodSample> {
    let plan = build_qft_plan(state.x_qubits)?;
    if measure_f_first {
        let f_range = state.f_range();
        let f = state.register.measure_qubits(f_range, rng)?;
        let x_len = 1usize << state.x_qubits;
        let offset = f << state.x_qubits;
        let x_amps = state.register.amplitudes()[offset..offset + x_len].to_vec();
        let mut x_reg = QuantumRegister::from_amplitudes(x_amps)?;
        plan.apply(&mut x_reg, 0)?;
        let y = x_reg.measure_all_with(rng)?.basis_index as u64;
        Ok(PeriodSample { y, f_value: Some(f as u64) })
    } else {
        plan.apply(&mut state.register, 0)?;
        let outcome = state.register.measure_all_with(rng)?;
        let (y, _) = state.split_index(outcome.basis_index);
        Ok(PeriodSample { y, f_value: None })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub p: u64,
    pub q: u64,
}

/// Convergents of `num / den` in order of increasing denominator.
pub fn convergents(num: u64, den: u64) -> Vec<Convergent> {
    let mut out = Vec::new();
    if den == 0 {
        return out;
    }
    let (mut n, mut d) = (num as u128, den as u128);
    let (mut p_prev, mut p) = (0u128, 1u128);
    let (mut q_prev, mut q) = (1u128, 0u128);
    while d != 0 {
        let a = n / d;
        (p_prev, p) = (p, a * p + p_prev);
        (q_prev, q) = (q, a * q + q_prev);
        out.push(Convergent { p: p as u64, q: q as u64 });
        (n, d) = (d, n - a * d);
    }
    out
}

/// Candidate periods from a sample `y` of a `q_x`-point transform: the
/// distinct convergent denominators of `y / q_x` not exceeding `m`, in
/// increasing order. `None` for the uninformative sample `y = 0`.
pub fn continued_fraction_period(y: u64, q_x: u64, m: u64) -> Result<Option<Vec<u64>>> {
    if y >= q_x {
        return Err(Error::Usage(format!("sample {y} must be below {q_x}")));
    }
    if y == 0 {
        return Ok(None);
    }
    let mut candidates: Vec<u64> = Vec::new();
    for c in convergents(y, q_x) {
        if c.q > m {
            break;
        }
        if candidates.last() != Some(&c.q) {
            candidates.push(c.q);
        }
    }
    Ok(Some(candidates))
}

/// Reduces a `q` with `a^q = 1 (mod m)` to the multiplicative order of `a`.
fn reduce_to_order(a: u64, mut q: u64, m: u64) -> u64 {
    let mut p = 2;
    let mut rest = q;
    while rest > 1 {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            while q % p == 0 && mod_pow(a, q / p, m) == 1 {
                q /= p;
            }
        }
        p += 1;
    }
    q
}

/// First candidate `q` with `a^q = 1 (mod m)`, reduced to the exact order.
pub fn recover_period(y: u64, q_x: u64, a: u64, m: u64) -> Result<Option<u64>> {
    let Some(candidates) = continued_fraction_period(y, q_x, m)? else {
        return Ok(None);
    };
    Ok(candidates
        .into_iter()
        .find(|&q| mod_pow(a, q, m) == 1)
        .map(|q| reduce_to_order(a, q, m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorRoute {
    EvenModulus,
    PrimePower,
    /// A random base shared a factor with the modulus.
    LuckyGcd,
    PeriodFinding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShorRun {
    pub modulus: u64,
    pub seed: u64,
    pub a_values_tried: Vec<u64>,
    pub y_samples: Vec<u64>,
    /// Period recovered by the final successful attempt.
    pub period: Option<u64>,
    pub factors: Option<(u64, u64)>,
    pub route: Option<FactorRoute>,
    pub oracle_calls: u64,
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShorConfig {
    /// Maximum number of attempts, each with a fresh random base.
    pub max_retries: u32,
    pub measure_f_first: bool,
}

impl Default for ShorConfig {
    fn default() -> Self {
        Self { max_retries: DEFAULT_MAX_RETRIES, measure_f_first: true }
    }
}

fn ordered(p: u64, q: u64) -> (u64, u64) {
    (p.min(q), p.max(q))
}

/// Runs the factoring pipeline and returns the full run log; `factors` is
/// `None` when every attempt failed.
pub fn run_shor(m: u64, seed: u64, config: ShorConfig) -> Result<ShorRun> {
    if m < 4 {
        return Err(Error::Domain(format!("modulus {m} has no nontrivial factorisation")));
    }
    if m > MAX_MODULUS {
        return Err(Error::ResourceLimit(format!(
            "modulus {m} exceeds {MAX_MODULUS} (register budget)"
        )));
    }
    if is_prime(m) {
        return Err(Error::Domain(format!("modulus {m} is prime")));
    }
    let mut run = ShorRun {
        modulus: m,
        seed,
        a_values_tried: Vec::new(),
        y_samples: Vec::new(),
        period: None,
        factors: None,
        route: None,
        oracle_calls: 0,
        attempts: 0,
    };
    if m % 2 == 0 {
        run.factors = Some(ordered(2, m / 2));
        run.route = Some(FactorRoute::EvenModulus);
        return Ok(run);
    }
    if let Some(p) = prime_power_base(m) {
        run.factors = Some(ordered(p, m / p));
        run.route = Some(FactorRoute::PrimePower);
        return Ok(run);
    }

    let x_qubits = x_register_bits(m);
    let q_x = 1u64 << x_qubits;
    let mut base_rng = rng::trial_stream(seed, 0);
    for attempt in 0..config.max_retries {
        run.attempts = attempt + 1;
        let a = base_rng.gen_range(2..=m - 2);
        run.a_values_tried.push(a);
        let instance = FactoringInstance::new(m, a)?;
        if instance.is_classical_shortcut() {
            run.factors = Some(ordered(instance.gcd, m / instance.gcd));
            run.route = Some(FactorRoute::LuckyGcd);
            return Ok(run);
        }

        let state = build_period_state(a, m, x_qubits)?;
        run.oracle_calls += state.register().counts().oracle_calls;
        let mut sample_rng = rng::trial_stream(seed, attempt as u64 + 1);
        let sample = extract_period_sample_with(state, config.measure_f_first, &mut sample_rng)?;
        run.y_samples.push(sample.y);

        let Some(r) = recover_period(sample.y, q_x, a, m)? else {
            continue;
        };
        if r % 2 != 0 {
            continue;
        }
        let half = mod_pow(a, r / 2, m);
        if half == m - 1 {
            continue;
        }
        for candidate in [gcd(half + m - 1, m), gcd(half + 1, m)] {
            if candidate > 1 && candidate < m {
                run.period = Some(r);
                run.factors = Some(ordered(candidate, m / candidate));
                run.route = Some(FactorRoute::PeriodFinding);
                return Ok(run);
            }
        }
    }
    Ok(run)
}

/// Factors `m` into `(p, q)` with `p <= q` and `p q = m`.
pub fn shor_factor(m: u64, seed: u64, max_retries: u32) -> Result<(u64, u64)> {
    let run = run_shor(m, seed, ShorConfig { max_retries, ..ShorConfig::default() })?;
    run.factors.ok_or_else(|| {
        Error::ProbabilisticFailure(format!(
            "no factor of {m} after {} attempts; bases {:?}, samples {:?}",
            run.attempts, run.a_values_tried, run.y_samples
        ))
    })
}
