//! Discrete-time coined walks on periodic d-dimensional lattices.
//!
//! A walk state holds one amplitude per `(site, direction)` slot, where
//! direction `2a` moves along `+axis a` and `2a + 1` along `-axis a`. A
//! step applies the coin at every site and then the shift.
//!
//! Two shifts are provided. [`Shift::Moving`] keeps each direction label
//! and is used for the free-spreading experiments. [`Shift::FlipFlop`]
//! moves and then reverses the label; marked-vertex search with the Grover
//! coin only concentrates amplitude under this shift (with the moving
//! shift the marked-site probability never rises above its initial `1/N`).

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{CostUnit, ScalingRecord};
use crate::register::{norm_sqr, Amplitude};
use crate::rng;

/// Resource guard on `N * 2d` amplitude slots.
pub const MAX_WALK_SLOTS: usize = 1 << 24;

/// Relative tolerance for treating consecutive trace values as equal.
const PLATEAU_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lattice {
    dim: usize,
    side: usize,
    sites: usize,
}

impl Lattice {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 || side < 2 {
            return Err(Error::Usage(format!(
                "lattice needs d >= 1 and L >= 2, got d={dim}, L={side}"
            )));
        }
        let sites = u32::try_from(dim)
            .ok()
            .and_then(|d| side.checked_pow(d))
            .filter(|&n| n.checked_mul(2 * dim).is_some_and(|s| s <= MAX_WALK_SLOTS))
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "lattice {side}^{dim} x {} directions exceeds {MAX_WALK_SLOTS} slots",
                    2 * dim
                ))
            })?;
        Ok(Self { dim, side, sites })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// `N = L^d`
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn directions(&self) -> usize {
        2 * self.dim
    }

    pub fn slots(&self) -> usize {
        self.sites * self.directions()
    }

    fn stride(&self, axis: usize) -> usize {
        self.side.pow(axis as u32)
    }

    pub fn coordinate(&self, site: usize, axis: usize) -> usize {
        (site / self.stride(axis)) % self.side
    }

    pub fn site_of(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dim || coords.iter().any(|&c| c >= self.side) {
            return Err(Error::Index(format!("coordinates {coords:?} outside the lattice")));
        }
        Ok(coords.iter().enumerate().map(|(a, &c)| c * self.stride(a)).sum())
    }

    /// Site one step along `axis`, forward or backward, with wrap-around.
    pub fn neighbor(&self, site: usize, axis: usize, forward: bool) -> usize {
        let stride = self.stride(axis);
        let c = self.coordinate(site, axis);
        let next = if forward { (c + 1) % self.side } else { (c + self.side - 1) % self.side };
        site - c * stride + next * stride
    }

    /// Site displaced from `site` by `offset` (per-axis, wrapped).
    pub fn translate(&self, site: usize, offset: &[usize]) -> usize {
        (0..self.dim)
            .map(|a| ((self.coordinate(site, a) + offset[a]) % self.side) * self.stride(a))
            .sum()
    }

    /// Squared minimal-image distance between two sites.
    pub fn distance_sqr(&self, a: usize, b: usize) -> f64 {
        (0..self.dim)
            .map(|axis| {
                let d = self.coordinate(a, axis).abs_diff(self.coordinate(b, axis));
                let d = d.min(self.side - d) as f64;
                d * d
            })
            .sum()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites {
            return Err(Error::Index(format!("site {site} outside lattice of {} sites", self.sites)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coin {
    /// Two-direction Hadamard coin; one-dimensional lattices only.
    Hadamard,
    /// `(2 / 2d) J - I`, the reflection about the uniform direction vector.
    Grover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    Moving,
    FlipFlop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoinedWalkState {
    lattice: Lattice,
    amplitudes: Vec<Amplitude>,
}

impl CoinedWalkState {
    /// Walker on `site` with the given direction amplitudes (normalised).
    pub fn localized(lattice: Lattice, site: usize, directions: &[Amplitude]) -> Result<Self> {
        lattice.check_site(site)?;
        if directions.len() != lattice.directions() {
            return Err(Error::Usage(format!(
                "expected {} direction amplitudes, got {}",
                lattice.directions(),
                directions.len()
            )));
        }
        if (norm_sqr(directions) - 1.0).abs() > 1e-10 {
            return Err(Error::Validation("direction amplitudes are not normalised".into()));
        }
        let mut amplitudes = vec![Amplitude::new(0.0, 0.0); lattice.slots()];
        let base = site * lattice.directions();
        amplitudes[base..base + directions.len()].copy_from_slice(directions);
        Ok(Self { lattice, amplitudes })
    }

    /// Walker on `site` with equal real amplitude in every direction.
    pub fn localized_uniform(lattice: Lattice, site: usize) -> Result<Self> {
        let d = lattice.directions();
        Self::localized(lattice, site, &vec![Amplitude::new(1.0 / (d as f64).sqrt(), 0.0); d])
    }

    /// Equal amplitude on every `(site, direction)` slot.
    pub fn uniform(lattice: Lattice) -> Self {
        let amp = Amplitude::new(1.0 / (lattice.slots() as f64).sqrt(), 0.0);
        Self { lattice, amplitudes: vec![amp; lattice.slots()] }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, site: usize, direction: usize) -> Amplitude {
        self.amplitudes[site * self.lattice.directions() + direction]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn site_probability(&self, site: usize) -> f64 {
        let d = self.lattice.directions();
        norm_sqr(&self.amplitudes[site * d..(site + 1) * d])
    }

    pub fn site_probabilities(&self) -> Vec<f64> {
        self.amplitudes
            .chunks_exact(self.lattice.directions())
            .map(norm_sqr)
            .collect()
    }

    /// Negates every direction amplitude at `site`.
    pub fn flip_site(&mut self, site: usize) {
        let d = self.lattice.directions();
        self.amplitudes[site * d..(site + 1) * d].iter_mut().for_each(|a| *a = -*a);
    }
}

fn check_coin(lattice: &Lattice, coin: Coin) -> Result<()> {
    if coin == Coin::Hadamard && lattice.dim != 1 {
        return Err(Error::Usage(format!(
            "the Hadamard coin needs a one-dimensional lattice, got d={}",
            lattice.dim
        )));
    }
    Ok(())
}

/// Applies `coin` at every site. Both coins are their own inverse.
pub fn apply_coin(state: &mut CoinedWalkState, coin: Coin) -> Result<()> {
    check_coin(&state.lattice, coin)?;
    let d = state.lattice.directions();
    match coin {
        Coin::Hadamard => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for slot in state.amplitudes.chunks_exact_mut(2) {
                let (p, m) = (slot[0], slot[1]);
                slot[0] = (p + m) * s;
                slot[1] = (p - m) * s;
            }
        }
        Coin::Grover => {
            let scale = 2.0 / d as f64;
            for slot in state.amplitudes.chunks_exact_mut(d) {
                let sum: Complex64 = slot.iter().sum();
                let avg = sum * scale;
                slot.iter_mut().for_each(|a| *a = avg - *a);
            }
        }
    }
    Ok(())
}

fn shift_target(lattice: &Lattice, site: usize, dir: usize, shift: Shift, inverse: bool) -> (usize, usize) {
    let axis = dir / 2;
    let forward = dir % 2 == 0;
    match (shift, inverse) {
        (Shift::Moving, false) => (lattice.neighbor(site, axis, forward), dir),
        (Shift::Moving, true) => (lattice.neighbor(site, axis, !forward), dir),
        // flip-flop is an involution
        (Shift::FlipFlop, _) => (lattice.neighbor(site, axis, forward), dir ^ 1),
    }
}

fn apply_shift_impl(state: &mut CoinedWalkState, shift: Shift, inverse: bool) {
    let lattice = state.lattice;
    let d = lattice.directions();
    let mut next = vec![Amplitude::new(0.0, 0.0); state.amplitudes.len()];
    for site in 0..lattice.sites {
        for dir in 0..d {
            let (to_site, to_dir) = shift_target(&lattice, site, dir, shift, inverse);
            next[to_site * d + to_dir] = state.amplitudes[site * d + dir];
        }
    }
    state.amplitudes = next;
}

pub fn apply_shift(state: &mut CoinedWalkState, shift: Shift) {
    apply_shift_impl(state, shift, false);
}

pub fn apply_inverse_shift(state: &mut CoinedWalkState, shift: Shift) {
    apply_shift_impl(state, shift, true);
}

/// Coin at every site followed by the shift.
pub fn quantum_walk_step(state: &mut CoinedWalkState, coin: Coin, shift: Shift) -> Result<()> {
    apply_coin(state, coin)?;
    apply_shift(state, shift);
    Ok(())
}

/// Undoes one [`quantum_walk_step`].
pub fn quantum_walk_step_inverse(state: &mut CoinedWalkState, coin: Coin, shift: Shift) -> Result<()> {
    check_coin(&state.lattice, coin)?;
    apply_inverse_shift(state, shift);
    apply_coin(state, coin)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadRecord {
    pub t: usize,
    /// Root-mean-square minimal-image displacement from the start site.
    pub sigma: f64,
    /// Set once the walk could have wrapped around the lattice (`L <= 2t`).
    pub wrapped: bool,
}

fn may_wrap(lattice: &Lattice, t: usize) -> bool {
    lattice.side <= 2 * t
}

/// Simple random walk, uniform over the `2d` moves, averaged over `trials`
/// walkers (trial `k` uses substream `k` of `seed`).
pub fn classical_walk_spread(
    dim: usize,
    side: usize,
    t_max: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<SpreadRecord>> {
    let lattice = Lattice::new(dim, side)?;
    if trials == 0 {
        return Err(Error::Usage("need at least one trial".into()));
    }
    let mut sum_sq = vec![0.0f64; t_max + 1];
    for k in 0..trials {
        let mut rng = rng::trial_stream(seed, k);
        let mut site = 0usize;
        for sq in sum_sq.iter_mut().skip(1) {
            let dir = rng.gen_range(0..lattice.directions());
            site = lattice.neighbor(site, dir / 2, dir % 2 == 0);
            *sq += lattice.distance_sqr(site, 0);
        }
    }
    Ok((1..=t_max)
        .map(|t| SpreadRecord {
            t,
            sigma: (sum_sq[t] / trials as f64).sqrt(),
            wrapped: may_wrap(&lattice, t),
        })
        .collect())
}

/// Exact RMS spread of a coined walk started at the origin with uniform
/// direction amplitudes, moving shift.
pub fn quantum_walk_spread(dim: usize, side: usize, t_max: usize, coin: Coin) -> Result<Vec<SpreadRecord>> {
    let lattice = Lattice::new(dim, side)?;
    check_coin(&lattice, coin)?;
    let mut state = CoinedWalkState::localized_uniform(lattice, 0)?;
    let dist: Vec<f64> = (0..lattice.sites).map(|s| lattice.distance_sqr(s, 0)).collect();
    let mut out = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        quantum_walk_step(&mut state, coin, Shift::Moving)?;
        let msd: f64 = state.site_probabilities().iter().zip(&dist).map(|(p, d)| p * d).sum();
        out.push(SpreadRecord { t, sigma: msd.sqrt(), wrapped: may_wrap(&lattice, t) });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchOptions {
    pub coin: Coin,
    /// Negate the marked site before each coin; off gives the free walk.
    pub perturbation: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { coin: Coin::Grover, perturbation: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTrace {
    pub marked_site: usize,
    /// Marked-site probability for `t = 0 ..= t_max`.
    pub probabilities: Vec<f64>,
    pub t_peak: Option<usize>,
    pub p_peak: Option<f64>,
}

impl SearchTrace {
    /// `T_peak / sqrt(p_peak)`, the step count adjusted for amplitude
    /// amplification of a peak below certainty.
    pub fn effective_cost(&self) -> Option<f64> {
        Some(self.t_peak? as f64 / self.p_peak?.sqrt())
    }
}

/// First local maximum of `trace` after `t = 0`.
///
/// Bipartite lattices repeat values in pairs, so a maximum may be a
/// plateau; the reported step is its last point, where the value is about
/// to fall. A plateau counts only if it was reached by a rise.
pub fn first_local_maximum(trace: &[f64]) -> Option<(usize, f64)> {
    let same = |a: f64, b: f64| (a - b).abs() <= PLATEAU_TOLERANCE * a.abs().max(b.abs());
    let mut last_distinct_before: Option<f64> = None;
    for t in 1..trace.len().saturating_sub(1) {
        if !same(trace[t], trace[t - 1]) {
            last_distinct_before = Some(trace[t - 1]);
        }
        let rose = last_distinct_before.is_some_and(|prev| prev < trace[t]);
        let falls = trace[t + 1] < trace[t] && !same(trace[t + 1], trace[t]);
        if rose && falls {
            return Some((t, trace[t]));
        }
    }
    None
}

/// Marked-vertex search from the uniform slot state: each step negates the
/// marked site, then applies the coin and the flip-flop shift.
pub fn spatial_search(lattice: Lattice, marked_site: usize, t_max: usize, options: SearchOptions) -> Result<SearchTrace> {
    lattice.check_site(marked_site)?;
    check_coin(&lattice, options.coin)?;
    let mut state = CoinedWalkState::uniform(lattice);
    let mut probabilities = Vec::with_capacity(t_max + 1);
    probabilities.push(state.site_probability(marked_site));
    for _ in 0..t_max {
        if options.perturbation {
            state.flip_site(marked_site);
        }
        quantum_walk_step(&mut state, options.coin, Shift::FlipFlop)?;
        probabilities.push(state.site_probability(marked_site));
    }
    let peak = first_local_maximum(&probabilities);
    Ok(SearchTrace {
        marked_site,
        probabilities,
        t_peak: peak.map(|p| p.0),
        p_peak: peak.map(|p| p.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkScalingPoint {
    pub dim: usize,
    pub side: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub t_peak: Option<usize>,
    pub p_peak: Option<f64>,
    pub t_eff: Option<f64>,
}

impl WalkScalingPoint {
    /// Harness record with `cost = T_eff`, when a peak was found.
    pub fn record(&self, seed: u64) -> Option<ScalingRecord> {
        ScalingRecord::new(self.n as f64, self.t_eff?, CostUnit::WalkSteps, self.p_peak?, seed).ok()
    }
}

/// Runs [`spatial_search`] (Grover coin, marked site 0) for each side length.
pub fn scaling_experiment(dim: usize, sides: &[usize], t_max: usize) -> Result<Vec<WalkScalingPoint>> {
    let lattices = sides.iter().map(|&l| Lattice::new(dim, l)).collect::<Result<Vec<_>>>()?;
    lattices
        .into_iter()
        .map(|lattice| {
            let trace = spatial_search(lattice, 0, t_max, SearchOptions::default())?;
            Ok(WalkScalingPoint {
                dim,
                side: lattice.side,
                n: lattice.sites,
                t_peak: trace.t_peak,
                p_peak: trace.p_peak,
                t_eff: trace.effective_cost(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    #[test]
    fn lattice_geometry() {
        let l = Lattice::new(2, 5).unwrap();
        assert_eq!((l.sites(), l.directions(), l.slots()), (25, 4, 100));
        let s = l.site_of(&[4, 2]).unwrap();
        assert_eq!(l.neighbor(s, 0, true), l.site_of(&[0, 2]).unwrap());
        assert_eq!(l.neighbor(s, 1, false), l.site_of(&[4, 1]).unwrap());
        assert_eq!(l.distance_sqr(s, 0), 1.0 + 4.0);
        assert!(matches!(Lattice::new(3, 200), Err(Error::ResourceLimit(_))));
        assert!(Lattice::new(1, 1).is_err());
    }

    #[test]
    fn hadamard_step_from_origin() {
        let l = Lattice::new(1, 9).unwrap();
        let mut s = CoinedWalkState::localized(l, 0, &[c(1.0), c(0.0)]).unwrap();
        quantum_walk_step(&mut s, Coin::Hadamard, Shift::Moving).unwrap();
        assert!((s.amplitude(1, 0) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.amplitude(8, 1) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.site_probability(1) + s.site_probability(8) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grover_coin_fixes_uniform_directions() {
        let l = Lattice::new(2, 4).unwrap();
        let mut s = CoinedWalkState::localized_uniform(l, 5).unwrap();
        let before = s.clone();
        apply_coin(&mut s, Coin::Grover).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(matches!(apply_coin(&mut s, Coin::Hadamard), Err(Error::Usage(_))));
    }

    #[test]
    fn long_walks_keep_norm() {
        let l = Lattice::new(2, 7).unwrap();
        let mut s = CoinedWalkState::localized_uniform(l, 3).unwrap();
        for _ in 0..100 {
            quantum_walk_step(&mut s, Coin::Grover, Shift::Moving).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spreads_start_at_one() {
        assert_eq!(quantum_walk_spread(1, 64, 1, Coin::Hadamard).unwrap()[0].sigma, 1.0);
        assert!((quantum_walk_spread(2, 16, 1, Coin::Grover).unwrap()[0].sigma - 1.0).abs() < 1e-15);
        let cl = classical_walk_spread(1, 64, 1, 50, 3).unwrap();
        assert_eq!(cl[0].sigma, 1.0);
    }

    #[test]
    fn spread_flags_wrap_around() {
        let recs = quantum_walk_spread(1, 10, 6, Coin::Hadamard).unwrap();
        assert!(!recs[3].wrapped);
        assert!(recs[4].wrapped);
    }

    #[test]
    fn classical_spread_is_diffusive() {
        let recs = classical_walk_spread(1, 1024, 400, 10_000, 7).unwrap();
        let sigma = recs[399].sigma;
        assert!((sigma - 20.0).abs() <= 0.5, "{sigma}");
    }

    #[test]
    fn quantum_spread_is_ballistic() {
        let recs = quantum_walk_spread(1, 1100, 512, Coin::Hadamard).unwrap();
        for t in [64usize, 128, 256] {
            let ratio = recs[2 * t - 1].sigma / recs[t - 1].sigma;
            assert!((ratio - 2.0).abs() <= 0.05, "t={t}: {ratio}");
        }
    }

    #[test]
    fn local_maximum_rules() {
        assert_eq!(first_local_maximum(&[0.1, 0.2, 0.2, 0.1]), Some((2, 0.2)));
        assert_eq!(first_local_maximum(&[0.1, 0.3, 0.2, 0.5, 0.1]), Some((1, 0.3)));
        // a plateau that was never reached by a rise is not a peak
        assert_eq!(first_local_maximum(&[0.2, 0.2, 0.1, 0.3, 0.0]), Some((3, 0.3)));
        assert_eq!(first_local_maximum(&[0.25; 8]), None);
        assert_eq!(first_local_maximum(&[0.1, 0.2, 0.3]), None);
    }

    #[test]
    fn unperturbed_walk_is_stationary() {
        let l = Lattice::new(2, 6).unwrap();
        let options = SearchOptions { perturbation: false, ..SearchOptions::default() };
        let trace = spatial_search(l, 7, 40, options).unwrap();
        assert!(trace.probabilities.iter().all(|p| (p - 1.0 / 36.0).abs() < 1e-14));
        assert_eq!(trace.t_peak, None);
    }

    #[test]
    fn two_by_two_torus_is_degenerate() {
        // with L = 2 both neighbours along an axis coincide and the marked
        // probability never leaves 1/N
        let trace = spatial_search(Lattice::new(2, 2).unwrap(), 0, 10, SearchOptions::default()).unwrap();
        assert!(trace.probabilities.iter().all(|p| (p - 0.25).abs() < 1e-14));
    }

    #[test]
    fn small_torus_search_finds_marked_site() {
        let trace = spatial_search(Lattice::new(2, 3).unwrap(), 4, 10, SearchOptions::default()).unwrap();
        let best = trace.probabilities.iter().cloned().fold(0.0, f64::max);
        assert!(best > 0.5, "{best}");
    }

    #[test]
    fn search_peak_in_three_dimensions() {
        let trace = spatial_search(Lattice::new(3, 6).unwrap(), 0, 60, SearchOptions::default()).unwrap();
        let (t, p) = (trace.t_peak.unwrap(), trace.p_peak.unwrap());
        // numpy oracle of the same construction: plateau at steps 18-19, p = 0.36933
        assert_eq!(t, 19);
        assert!((p - 0.36933).abs() < 1e-4, "{p}");
    }
}
