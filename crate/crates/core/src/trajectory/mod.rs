//! Photon-by-photon interferometer simulation with feedback.
//!
//! Two interchangeable representations of the conditioned state implement
//! [`Conditioner`]: [`ConditionedState`] keeps the phase dependence as explicit
//! half-angle harmonics and is the reference; [`FactoredState`] factors the
//! record out of the state and runs in `O(N)` per detection. The Monte Carlo
//! and enumeration drivers use the factored form.

mod conditioned;
mod factored;
mod policy;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circular::{ensemble_variance, Measure, PhaseSample};
use crate::error::{Error, Result};
use crate::states::TwoModeState;

pub use conditioned::ConditionedState;
pub use factored::{FactoredState, FactoredTables};
pub use policy::{
    maximize_sharpness, nonadaptive_phase, AdaptiveTerms, FeedbackPolicy, PhaseRule, FLAT_TOL,
    MAXIMIZER_CANDIDATES, MAXIMIZER_GRID, MAXIMIZER_TOL,
};

/// Default number of `Phi_1` values averaged over by exact enumeration.
pub const DEFAULT_PHI1_GRID: usize = 64;
/// Default photon-number cap for exact enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;
/// A final posterior whose estimating moment is below this fraction of its
/// total weight has no defined mean phase. Such records get a uniformly
/// random estimate in Monte Carlo and contribute a zero resultant in
/// enumeration, which is the same thing on average.
pub const ZERO_MOMENT_TOL: f64 = 1e-12;

/// A conditioned state that knows the true phase it is being sampled at.
pub trait Conditioner: Clone {
    fn photons(&self) -> usize;
    fn detections(&self) -> usize;
    fn branch_probabilities(&self, phase: f64) -> Result<[f64; 2]>;
    fn detect(&mut self, u: u8, phase: f64) -> Result<()>;
    /// Next-step moments, up to a positive factor common to both outcomes.
    fn adaptive_terms(&self, measure: Measure) -> AdaptiveTerms;
    fn estimate(&self, measure: Measure) -> Result<f64>;
}

impl Conditioner for FactoredState<'_> {
    fn photons(&self) -> usize {
        FactoredState::photons(self)
    }
    fn detections(&self) -> usize {
        FactoredState::detections(self)
    }
    fn branch_probabilities(&self, phase: f64) -> Result<[f64; 2]> {
        FactoredState::branch_probabilities(self, phase)
    }
    fn detect(&mut self, u: u8, phase: f64) -> Result<()> {
        FactoredState::detect(self, u, phase)
    }
    fn adaptive_terms(&self, measure: Measure) -> AdaptiveTerms {
        FactoredState::adaptive_terms(self, measure)
    }
    fn estimate(&self, measure: Measure) -> Result<f64> {
        FactoredState::estimate(self, measure)
    }
}

/// [`ConditionedState`] paired with the true phase.
#[derive(Clone, Debug)]
pub struct ExplicitPath {
    pub state: ConditionedState,
    pub phi_true: f64,
}

impl ExplicitPath {
    pub fn new(input: &TwoModeState, phi_true: f64) -> Result<Self> {
        Ok(ExplicitPath {
            state: ConditionedState::from_input(input)?,
            phi_true,
        })
    }
}

impl Conditioner for ExplicitPath {
    fn photons(&self) -> usize {
        self.state.photons()
    }
    fn detections(&self) -> usize {
        self.state.detections()
    }
    fn branch_probabilities(&self, phase: f64) -> Result<[f64; 2]> {
        let p0 = self.state.detection_probability(0, phase, self.phi_true)?;
        let p1 = self.state.detection_probability(1, phase, self.phi_true)?;
        Ok([p0, p1])
    }
    fn detect(&mut self, u: u8, phase: f64) -> Result<()> {
        self.state = self.state.apply_detection(u, phase)?;
        Ok(())
    }
    fn adaptive_terms(&self, measure: Measure) -> AdaptiveTerms {
        self.state.adaptive_terms(measure)
    }
    fn estimate(&self, measure: Measure) -> Result<f64> {
        self.state.final_estimate(measure)
    }
}

/// Detection outcomes `u_1..u_m`, the feedback phases used, and the final
/// estimate once all photons are counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub bits: Vec<u8>,
    pub phases: Vec<f64>,
    pub estimate: Option<f64>,
}

fn next_phase<C: Conditioner>(
    state: &C,
    policy: &FeedbackPolicy,
    initial: f64,
    previous: Option<f64>,
) -> f64 {
    policy.next_phase(
        state.photons(),
        state.detections(),
        initial,
        previous,
        || state.adaptive_terms(policy.measure),
    )
}

/// Runs one trajectory from `start`. The rng supplies the initial phase
/// draw and then one uniform per detection.
pub fn run_trajectory<C: Conditioner, R: Rng + ?Sized>(
    mut state: C,
    policy: &FeedbackPolicy,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let n = state.photons();
    let initial = rng.random::<f64>() * TAU;
    let mut bits = Vec::with_capacity(n);
    let mut phases: Vec<f64> = Vec::with_capacity(n);
    while state.detections() < n {
        let phase = next_phase(&state, policy, initial, phases.last().copied());
        let [p0, p1] = state.branch_probabilities(phase)?;
        let u = u8::from(rng.random::<f64>() * (p0 + p1) >= p0);
        state.detect(u, phase)?;
        bits.push(u);
        phases.push(phase);
    }
    let estimate = match state.estimate(policy.measure) {
        Ok(phi) => phi,
        Err(Error::ZeroMoment { .. }) => rng.random::<f64>() * TAU,
        Err(e) => return Err(e),
    };
    let estimate = Some(estimate);
    Ok(MeasurementRecord {
        bits,
        phases,
        estimate,
    })
}

/// Samples one complete measurement of `input` at true phase `phi_true`.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    input: &TwoModeState,
    policy: &FeedbackPolicy,
    phi_true: f64,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let tables = FactoredTables::new(input)?;
    run_trajectory(tables.start(phi_true), policy, rng)
}

/// The rng stream of trajectory `index` under base seed `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Monte Carlo estimate of the phase variance achieved by `policy`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub photons: usize,
    pub trials: usize,
    pub seed: u64,
    pub policy: FeedbackPolicy,
    /// Length of the mean resultant of `e^{i l phi_hat}`.
    pub sharpness: f64,
    pub variance: f64,
    pub std_error: f64,
}

/// Runs `trials` trajectories at `phi_true = 0`. Trajectory `i` draws from
/// stream `i` of the seed, so the result does not depend on scheduling.
pub fn monte_carlo_variance(
    input: &TwoModeState,
    policy: &FeedbackPolicy,
    trials: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let tables = FactoredTables::new(input)?;
    let estimates: Vec<PhaseSample> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i as u64);
            let rec = run_trajectory(tables.start(0.0), policy, &mut rng)?;
            Ok(PhaseSample::new(rec.estimate.expect("complete record")))
        })
        .collect::<Result<_>>()?;
    let est = ensemble_variance(&estimates, policy.measure)?;
    Ok(VarianceReport {
        photons: input.photons(),
        trials,
        seed,
        policy: *policy,
        sharpness: est.resultant,
        variance: est.variance,
        std_error: est.std_error,
    })
}

/// Exact ensemble statistics from summing over every record.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationReport {
    pub photons: usize,
    pub grid: usize,
    /// `|<e^{i l phi_hat}>|` averaged over records and the `Phi_1` grid.
    pub sharpness: f64,
    pub variance: f64,
    /// Total record probability for each grid value of `Phi_1`.
    pub total_probability: Vec<f64>,
}

/// Sums over all `2^N` records at `phi_true = 0` for each of `grid`
/// equally spaced initial phases (`Phi_1` for the adaptive rule, `Phi_0` for
/// the nonadaptive one). Branches of zero probability are skipped.
///
/// For phase-covariant policies the resultant is a trigonometric polynomial of
/// degree at most `N + l` in the initial phase, so the grid average is exact
/// once `grid > N + l`.
pub fn exact_variance_enumeration(
    input: &TwoModeState,
    policy: &FeedbackPolicy,
    grid: usize,
    cap: usize,
) -> Result<EnumerationReport> {
    let n = input.photons();
    if n > cap {
        return Err(Error::EnumerationCap { photons: n, cap });
    }
    if grid == 0 {
        return Err(Error::InvalidArgument(
            "the Phi_1 grid needs at least one point".into(),
        ));
    }
    let tables = FactoredTables::new(input)?;
    enumerate_with(|| tables.start(0.0), policy, grid)
}

/// Enumeration driver over any [`Conditioner`].
pub fn enumerate_with<C, F>(
    start: F,
    policy: &FeedbackPolicy,
    grid: usize,
) -> Result<EnumerationReport>
where
    C: Conditioner,
    F: Fn() -> C + Sync,
{
    let l = f64::from(policy.measure.harmonic());
    let per_grid: Vec<(Complex64, f64)> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let initial = TAU * k as f64 / grid as f64;
            let mut acc = (Complex64::new(0.0, 0.0), 0.0);
            descend(start(), policy, initial, None, 1.0, l, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let resultant = per_grid.iter().map(|p| p.0).sum::<Complex64>() / grid as f64;
    let photons = start().photons();
    Ok(EnumerationReport {
        photons,
        grid,
        sharpness: resultant.norm(),
        variance: policy.measure.variance_from_resultant(resultant.norm()),
        total_probability: per_grid.iter().map(|p| p.1).collect(),
    })
}

fn descend<C: Conditioner>(
    state: C,
    policy: &FeedbackPolicy,
    initial: f64,
    previous: Option<f64>,
    weight: f64,
    l: f64,
    acc: &mut (Complex64, f64),
) -> Result<()> {
    if state.detections() == state.photons() {
        match state.estimate(policy.measure) {
            Ok(est) => acc.0 += weight * Complex64::cis(l * est),
            Err(Error::ZeroMoment { .. }) => {}
            Err(e) => return Err(e),
        }
        acc.1 += weight;
        return Ok(());
    }
    let phase = next_phase(&state, policy, initial, previous);
    let probs = state.branch_probabilities(phase)?;
    let mut state = Some(state);
    for u in 0..2u8 {
        let p = probs[usize::from(u)];
        if p <= f64::MIN_POSITIVE {
            continue;
        }
        // the last live branch can take ownership instead of cloning
        let mut child = if u == 0 && probs[1] > f64::MIN_POSITIVE {
            state.as_ref().expect("state present").clone()
        } else {
            state.take().expect("state present")
        };
        child.detect(u, phase)?;
        descend(child, policy, initial, Some(phase), weight * p, l, acc)?;
    }
    Ok(())
}
