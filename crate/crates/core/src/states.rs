//! Two-mode N-photon input states.
//!
//! Amplitudes are indexed by `mu + j` in either the `J_y` or the `J_z`
//! eigenbasis. In the `J_z` basis index `k` is the Fock state with `k`
//! photons in mode a and `N - k` in mode b.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2;

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "JY")]
    Jy,
    #[serde(rename = "JZ")]
    Jz,
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jy" | "y" => Ok(Basis::Jy),
            "jz" | "z" => Ok(Basis::Jz),
            other => Err(Error::InvalidArgument(format!("unknown basis `{other}`"))),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Jy => "JY",
            Basis::Jz => "JZ",
        })
    }
}

/// A normalized pure state of `two_j` photons in two modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateFile", into = "StateFile")]
pub struct TwoModeState {
    two_j: usize,
    basis: Basis,
    amps: Vec<Complex64>,
}

impl TwoModeState {
    /// Wraps an amplitude vector, checking its length and normalization.
    pub fn new(two_j: usize, basis: Basis, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != two_j + 1 {
            return Err(Error::LengthMismatch {
                len: amps.len(),
                expected: two_j + 1,
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(TwoModeState { two_j, basis, amps })
    }

    /// Like [`TwoModeState::new`] but rescales the amplitudes to unit norm.
    pub fn normalized(two_j: usize, basis: Basis, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(two_j, basis, amps)
    }

    pub(crate) fn from_parts_unchecked(two_j: usize, basis: Basis, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), two_j + 1);
        TwoModeState { two_j, basis, amps }
    }

    pub fn photons(&self) -> usize {
        self.two_j
    }

    pub fn two_j(&self) -> usize {
        self.two_j
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitude at basis index `mu + j`.
    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the state expressed in `basis`, converting if necessary.
    pub fn to_basis(&self, basis: Basis) -> Result<TwoModeState> {
        match (self.basis, basis) {
            (a, b) if a == b => Ok(self.clone()),
            (Basis::Jy, Basis::Jz) => su2::y_to_z(self),
            (Basis::Jz, Basis::Jy) => su2::z_to_y(self),
            _ => unreachable!(),
        }
    }

    /// Multiplies every amplitude by `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> TwoModeState {
        let f = Complex64::from_polar(1.0, theta);
        TwoModeState {
            amps: self.amps.iter().map(|a| a * f).collect(),
            ..self.clone()
        }
    }
}

/// On-disk layout: `{"two_j": N, "basis": "JY", "amps": [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub two_j: usize,
    pub basis: Basis,
    pub amps: Vec<[f64; 2]>,
}

impl From<TwoModeState> for StateFile {
    fn from(s: TwoModeState) -> Self {
        StateFile {
            two_j: s.two_j,
            basis: s.basis,
            amps: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<StateFile> for TwoModeState {
    type Error = Error;

    fn try_from(f: StateFile) -> Result<Self> {
        let amps = f
            .amps
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        TwoModeState::new(f.two_j, f.basis, amps)
    }
}

/// The input states with a named constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Optimal,
    OnePort,
    #[serde(rename = "equal")]
    EqualSplit,
    Yurke,
}

impl StateKind {
    pub fn build(self, photons: usize) -> Result<TwoModeState> {
        match self {
            StateKind::Optimal => optimal_state(photons),
            StateKind::OnePort => one_port_state(photons),
            StateKind::EqualSplit => equal_split_state(photons),
            StateKind::Yurke => yurke_state(photons),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StateKind::Optimal => "optimal",
            StateKind::OnePort => "one-port",
            StateKind::EqualSplit => "equal",
            StateKind::Yurke => "yurke",
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(StateKind::Optimal),
            "one-port" | "oneport" => Ok(StateKind::OnePort),
            "equal" | "equal-split" => Ok(StateKind::EqualSplit),
            "yurke" => Ok(StateKind::Yurke),
            other => Err(Error::InvalidArgument(format!(
                "unknown state kind `{other}`"
            ))),
        }
    }
}

fn require_photons(kind: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidPhotonNumber {
            kind,
            photons: n,
            reason: "at least one photon is required",
        });
    }
    Ok(())
}

fn require_even(kind: &'static str, n: usize) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::InvalidPhotonNumber {
            kind,
            photons: n,
            reason: "the photon number must be even so that mu = 0 exists",
        });
    }
    Ok(())
}

fn unit_vector(two_j: usize, index: usize) -> Vec<Complex64> {
    let mut amps = vec![Complex64::new(0.0, 0.0); two_j + 1];
    amps[index] = Complex64::new(1.0, 0.0);
    amps
}

/// The minimum-Holevo-variance state with zero mean phase, in the `J_y` basis:
/// `sin((mu + j + 1) pi / (2j + 2)) / sqrt(j + 1)`.
pub fn optimal_state(photons: usize) -> Result<TwoModeState> {
    require_photons("optimal", photons)?;
    let denom = (photons + 2) as f64;
    let scale = (2.0 / denom).sqrt();
    let amps = (0..=photons)
        .map(|k| Complex64::new(scale * ((k + 1) as f64 * PI / denom).sin(), 0.0))
        .collect();
    Ok(TwoModeState::from_parts_unchecked(photons, Basis::Jy, amps))
}

/// All photons in mode a: `|j j>_z`.
pub fn one_port_state(photons: usize) -> Result<TwoModeState> {
    require_photons("one-port", photons)?;
    Ok(TwoModeState::from_parts_unchecked(
        photons,
        Basis::Jz,
        unit_vector(photons, photons),
    ))
}

/// Equal photon numbers in both inputs: `|j 0>_z`.
pub fn equal_split_state(photons: usize) -> Result<TwoModeState> {
    require_photons("equal", photons)?;
    require_even("equal", photons)?;
    Ok(TwoModeState::from_parts_unchecked(
        photons,
        Basis::Jz,
        unit_vector(photons, photons / 2),
    ))
}

/// `(|j 0>_z + |j 1>_z) / sqrt(2)`.
pub fn yurke_state(photons: usize) -> Result<TwoModeState> {
    require_photons("yurke", photons)?;
    require_even("yurke", photons)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); photons + 1];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[photons / 2] = Complex64::new(h, 0.0);
    amps[photons / 2 + 1] = Complex64::new(h, 0.0);
    Ok(TwoModeState::from_parts_unchecked(photons, Basis::Jz, amps))
}
