//! Circular statistics on exact Fourier coefficients.
//!
//! Every dispersion measure used here is a function of a single Fourier
//! moment of the phase distribution, so distributions are carried as finite
//! trigonometric polynomials and never integrated on a grid.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sharpness (or resultant length) below which a dispersion is reported as
/// infinite.
pub const SHARPNESS_FLOOR: f64 = 1e-12;

/// Number of batches used for the standard error of ensemble estimators.
pub const ENSEMBLE_BATCHES: usize = 100;

/// Which dispersion measure a variance refers to.
///
/// `Holevo` is `S^-2 - 1` built from the first moment. `ModPi` is the
/// Holevo variance of `2 phi` divided by four, for states whose phase
/// information is only defined modulo pi.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Holevo,
    #[serde(rename = "modpi")]
    ModPi,
}

impl Measure {
    /// Harmonic of `e^{i l phi}` whose moment carries the measure.
    pub fn harmonic(self) -> u32 {
        match self {
            Measure::Holevo => 1,
            Measure::ModPi => 2,
        }
    }

    /// Turns the modulus of the relevant moment into a variance.
    pub fn variance_from_resultant(self, resultant: f64) -> f64 {
        let l = f64::from(self.harmonic());
        holevo_from_sharpness(resultant) / (l * l)
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Holevo => "holevo",
            Measure::ModPi => "modpi",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holevo" => Ok(Measure::Holevo),
            "modpi" | "mod-pi" | "mod_pi" => Ok(Measure::ModPi),
            other => Err(Error::InvalidArgument(format!("unknown measure `{other}`"))),
        }
    }
}

fn holevo_from_sharpness(s: f64) -> f64 {
    if s <= SHARPNESS_FLOOR {
        f64::INFINITY
    } else {
        (s.powi(-2) - 1.0).max(0.0)
    }
}

/// Reduces an angle into `[0, 2 pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A phase value range-reduced into `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PhaseSample(f64);

impl PhaseSample {
    pub fn new(phi: f64) -> Self {
        PhaseSample(wrap_phase(phi))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for PhaseSample {
    fn from(phi: f64) -> Self {
        PhaseSample::new(phi)
    }
}

/// A finite Fourier series `f(phi) = sum_{k=-K}^{K} c_k e^{i k phi}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    // c_k stored at k + K
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    /// Builds a polynomial from `2K + 1` coefficients ordered `c_{-K} ..= c_K`.
    pub fn from_coefficients(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "a trigonometric polynomial needs an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(TrigPolynomial { coeffs })
    }

    pub fn zero(max_harmonic: usize) -> Self {
        TrigPolynomial {
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * max_harmonic + 1],
        }
    }

    pub fn constant(value: f64) -> Self {
        TrigPolynomial {
            coeffs: vec![Complex64::new(value, 0.0)],
        }
    }

    /// The uniform probability density `1 / (2 pi)`.
    pub fn uniform() -> Self {
        Self::constant(1.0 / TAU)
    }

    /// Builds a polynomial from `(k, c_k)` pairs; unspecified harmonics are zero.
    pub fn from_harmonics(terms: &[(i64, Complex64)]) -> Self {
        let k_max = terms
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut out = Self::zero(k_max);
        for &(k, c) in terms {
            *out.coeff_mut(k) += c;
        }
        out
    }

    pub fn max_harmonic(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    /// `c_k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let kk = self.max_harmonic() as i64;
        if k.abs() > kk {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + kk) as usize]
        }
    }

    pub(crate) fn coeff_mut(&mut self, k: i64) -> &mut Complex64 {
        let kk = self.max_harmonic() as i64;
        &mut self.coeffs[(k + kk) as usize]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `int_0^{2pi} f(phi) e^{i n phi} dphi = 2 pi c_{-n}`.
    pub fn moment(&self, n: i64) -> Complex64 {
        self.coeff(-n) * TAU
    }

    pub fn evaluate(&self, phi: f64) -> Complex64 {
        let kk = self.max_harmonic() as i64;
        let step = Complex64::from_polar(1.0, phi);
        let mut e = Complex64::from_polar(1.0, -(kk as f64) * phi);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.coeffs {
            acc += c * e;
            e *= step;
        }
        acc
    }

    /// Real parts of `f` at `points` equally spaced angles `2 pi i / points`.
    pub fn grid_values(&self, points: usize) -> Vec<f64> {
        (0..points)
            .map(|i| self.evaluate(TAU * i as f64 / points as f64).re)
            .collect()
    }

    /// `c_{-k} = conj(c_k)` for all k, to within `tol`.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        let kk = self.max_harmonic() as i64;
        (0..=kk).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
    }

    /// Real valued, normalized (`c_0 = 1/2pi`) and nonnegative on a 4096-point grid.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.is_real_valued(tol)
            && (self.coeff(0).re - 1.0 / TAU).abs() <= tol
            && self.coeff(0).im.abs() <= tol
            && self.grid_values(4096).iter().all(|&v| v >= -1e-10)
    }

    /// Rescales so that `c_0 = 1/(2 pi)`.
    pub fn normalized(&self) -> Result<Self> {
        let c0 = self.coeff(0).re;
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(Error::DegenerateDistribution);
        }
        let s = 1.0 / (TAU * c0);
        Ok(self.scaled(s))
    }

    pub fn scaled(&self, s: f64) -> Self {
        TrigPolynomial {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `g(phi) = f(phi - shift)`.
    pub fn rotated(&self, shift: f64) -> Self {
        let kk = self.max_harmonic() as i64;
        TrigPolynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * Complex64::from_polar(1.0, -((i as i64 - kk) as f64) * shift))
                .collect(),
        }
    }

    /// Pointwise product, computed as a convolution of coefficients.
    pub fn product(&self, other: &TrigPolynomial) -> Self {
        let (ka, kb) = (self.max_harmonic(), other.max_harmonic());
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * (ka + kb) + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TrigPolynomial { coeffs: out }
    }

    /// `|<e^{i phi}>|`, zero for the uniform distribution.
    pub fn sharpness(&self) -> f64 {
        self.moment(1).norm()
    }

    /// `arg <e^{i phi}>` in `[0, 2 pi)`; the rotation that makes the
    /// sharpness integral real and positive.
    pub fn mean_phase(&self) -> Option<f64> {
        let m = self.moment(1);
        (m.norm() > SHARPNESS_FLOOR).then(|| wrap_phase(m.arg()))
    }

    /// `S^-2 - 1`, or `+inf` when the sharpness vanishes.
    pub fn holevo_variance(&self) -> f64 {
        holevo_from_sharpness(self.sharpness())
    }

    /// `(|<e^{2 i phi}>|^-2 - 1) / 4`, or `+inf` when that moment vanishes.
    pub fn holevo_variance_mod_pi(&self) -> f64 {
        Measure::ModPi.variance_from_resultant(self.moment(2).norm())
    }

    pub fn variance(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Holevo => self.holevo_variance(),
            Measure::ModPi => self.holevo_variance_mod_pi(),
        }
    }

    /// `int 4 sin^2((phi - mean)/2) f(phi) dphi`, the small-variance
    /// approximation of the Holevo variance. Evaluated from the moments.
    pub fn wrapped_square_deviation(&self) -> f64 {
        // 4 sin^2(x/2) = 2 - 2 cos x and <cos(phi - mean)> = S
        2.0 * (self.moment(0).re - self.sharpness())
    }
}

/// Ensemble dispersion estimate with its batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleEstimate {
    pub samples: usize,
    /// Length of the mean resultant `|M^-1 sum e^{i l phi}|`.
    pub resultant: f64,
    pub variance: f64,
    pub std_error: f64,
}

/// `-1 + |M^-1 sum_mu e^{i phi_mu}|^-2` over an ensemble of phase estimates.
pub fn ensemble_holevo_variance(samples: &[PhaseSample]) -> Result<EnsembleEstimate> {
    ensemble_variance(samples, Measure::Holevo)
}

/// Ensemble estimator for either measure. For `ModPi` the estimator is
/// applied to the doubled angles and divided by four.
///
/// The standard error comes from batch means: the samples are split into
/// [`ENSEMBLE_BATCHES`] contiguous batches, the covariance of the mean
/// resultant is estimated from the spread of the per-batch mean resultants,
/// and it is propagated through `|R|^-2` to first order.
pub fn ensemble_variance(samples: &[PhaseSample], measure: Measure) -> Result<EnsembleEstimate> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidArgument("the ensemble is empty".into()));
    }
    let l = f64::from(measure.harmonic());
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| {
            let (sin, cos) = (l * s.value()).sin_cos();
            (cos, sin)
        })
        .collect();
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n as f64, sy / n as f64);
    let resultant = mx.hypot(my);
    let variance = measure.variance_from_resultant(resultant);

    let batches = ENSEMBLE_BATCHES.min(n);
    let std_error = if batches < 2 || !variance.is_finite() {
        f64::NAN
    } else {
        let base = n / batches;
        let extra = n % batches;
        let mut start = 0;
        let mut means = Vec::with_capacity(batches);
        for b in 0..batches {
            let len = base + usize::from(b < extra);
            let (bx, by) = points[start..start + len]
                .iter()
                .fold((0.0, 0.0), |(a, c), &(x, y)| (a + x, c + y));
            means.push((bx / len as f64, by / len as f64));
            start += len;
        }
        let bf = batches as f64;
        let (cx, cy) = means
            .iter()
            .fold((0.0, 0.0), |(a, c), &(x, y)| (a + x, c + y));
        let (cx, cy) = (cx / bf, cy / bf);
        let (mut vxx, mut vyy, mut vxy) = (0.0, 0.0, 0.0);
        for &(x, y) in &means {
            vxx += (x - cx) * (x - cx);
            vyy += (y - cy) * (y - cy);
            vxy += (x - cx) * (y - cy);
        }
        // covariance of the overall mean
        let norm = bf * (bf - 1.0);
        let (vxx, vyy, vxy) = (vxx / norm, vyy / norm, vxy / norm);
        // d(|R|^-2)/dx = -2x/|R|^4
        let r4 = resultant.powi(4);
        let (gx, gy) = (-2.0 * mx / r4, -2.0 * my / r4);
        let var = gx * gx * vxx + gy * gy * vyy + 2.0 * gx * gy * vxy;
        var.max(0.0).sqrt() / (l * l)
    };

    Ok(EnsembleEstimate {
        samples: n,
        resultant,
        variance,
        std_error,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `sin^2 phi = 1/2 - (e^{2 i phi} + e^{-2 i phi}) / 4`.
pub fn sin_squared() -> TrigPolynomial {
    TrigPolynomial::from_harmonics(&[
        (-2, Complex64::new(-0.25, 0.0)),
        (0, Complex64::new(0.5, 0.0)),
        (2, Complex64::new(-0.25, 0.0)),
    ])
}
