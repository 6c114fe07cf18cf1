use thiserror::Error;

/// Errors raised by the state constructors, the rotation-matrix routines and
/// the trajectory simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid photon number {photons} for the {kind} state: {reason}")]
    InvalidPhotonNumber {
        kind: &'static str,
        photons: usize,
        reason: &'static str,
    },

    #[error("Jacobi parameters outside the domain alpha > -1, beta > -1 (alpha = {alpha}, beta = {beta})")]
    JacobiDomain { alpha: i64, beta: i64 },

    #[error("basis index {index} outside [0, {two_j}]")]
    IndexOutOfRange { index: usize, two_j: usize },

    #[error("amplitude vector has length {len}, expected {expected}")]
    LengthMismatch { len: usize, expected: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("all {photons} photons have already been detected")]
    PhotonsExhausted { photons: usize },

    #[error("the final estimate needs all {photons} detections, only {detections} made")]
    RecordIncomplete { photons: usize, detections: usize },

    #[error("distribution has zero total weight")]
    DegenerateDistribution,

    #[error("the {harmonic}-th moment vanishes, so the mean phase is undefined")]
    ZeroMoment { harmonic: u32 },

    #[error("exact enumeration over {photons} photons exceeds the cap of {cap}")]
    EnumerationCap { photons: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
