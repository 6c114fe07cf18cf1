//! Statistics of the ideal (canonical) phase measurement.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circular::{Measure, TrigPolynomial};
use crate::error::{Error, Result};
use crate::states::{Basis, StateKind, TwoModeState};
use std::f64::consts::{PI, TAU};

fn jy_amplitudes(state: &TwoModeState) -> Result<std::borrow::Cow<'_, [Complex64]>> {
    Ok(match state.basis() {
        Basis::Jy => std::borrow::Cow::Borrowed(state.amplitudes()),
        Basis::Jz => std::borrow::Cow::Owned(state.to_basis(Basis::Jy)?.amplitudes().to_vec()),
    })
}

/// `P(phi) = |sum_mu psi_mu e^{i mu phi}|^2 / 2pi` with `psi` in the `J_y` basis.
pub fn canonical_distribution(state: &TwoModeState) -> Result<TrigPolynomial> {
    let psi = jy_amplitudes(state)?;
    let dim = psi.len();
    let mut poly = TrigPolynomial::zero(dim - 1);
    for k in 0..dim {
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in k..dim {
            acc += psi[mu] * psi[mu - k].conj();
        }
        let c = acc / TAU;
        *poly.coeff_mut(k as i64) = c;
        *poly.coeff_mut(-(k as i64)) = c.conj();
    }
    Ok(poly)
}

/// `int P(phi) e^{i n phi} dphi = sum_mu psi_mu conj(psi_{mu+n})`, in `O(N)`.
pub fn canonical_moment(state: &TwoModeState, n: i64) -> Result<Complex64> {
    let psi = jy_amplitudes(state)?;
    Ok(shifted_overlap(&psi, n))
}

fn shifted_overlap(psi: &[Complex64], n: i64) -> Complex64 {
    let shift = n.unsigned_abs() as usize;
    if shift >= psi.len() {
        return Complex64::new(0.0, 0.0);
    }
    let s: Complex64 = (0..psi.len() - shift)
        .map(|mu| psi[mu] * psi[mu + shift].conj())
        .sum();
    if n >= 0 {
        s
    } else {
        s.conj()
    }
}

pub fn canonical_variance(state: &TwoModeState, measure: Measure) -> Result<f64> {
    let m = canonical_moment(state, measure.harmonic() as i64)?;
    Ok(measure.variance_from_resultant(m.norm()))
}

/// `tan^2(pi / (N + 2))`.
pub fn min_holevo_variance(photons: usize) -> f64 {
    (PI / (photons as f64 + 2.0)).tan().powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub photons: usize,
    pub variance: f64,
}

/// Canonical variance of `kind` at each photon number, in input order.
pub fn canonical_variance_sweep(
    kind: StateKind,
    photons: &[usize],
    measure: Measure,
) -> Result<Vec<SweepRow>> {
    photons
        .par_iter()
        .map(|&n| {
            let state = kind.build(n)?;
            Ok(SweepRow {
                photons: n,
                variance: canonical_variance(&state, measure)?,
            })
        })
        .collect()
}

/// `(phi_k, P(phi_k) sin^2 phi_k)` on `points` equally spaced angles in `[0, 2pi)`.
pub fn sin2_weighted_density(dist: &TrigPolynomial, points: usize) -> Vec<(f64, f64)> {
    let weighted = dist.product(&crate::circular::sin_squared());
    weighted
        .grid_values(points)
        .into_iter()
        .enumerate()
        .map(|(k, v)| (TAU * k as f64 / points as f64, v))
        .collect()
}

/// `int sin^2(phi) P(phi) dphi = (1 - Re <e^{2i phi}>) / 2`.
pub fn sin2_integral(dist: &TrigPolynomial) -> f64 {
    0.5 * (dist.moment(0).re - dist.moment(2).re)
}

/// Fraction of `int sin^2(phi) P(phi) dphi` carried by the central peaks at
/// `0` and `pi`, each bounded by the nearest local minima of `P` on a grid of
/// `points` angles.
pub fn central_peak_fraction(dist: &TrigPolynomial, points: usize) -> Result<f64> {
    if points < 8 || points % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "central_peak_fraction needs an even grid of at least 8 points, got {points}"
        )));
    }
    let p = dist.grid_values(points);
    let w = sin2_weighted_density(dist, points);
    let total: f64 = w.iter().map(|(_, v)| v).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    let at = |k: isize| p[k.rem_euclid(points as isize) as usize];
    let mut in_peak = vec![false; points];
    for centre in [0isize, points as isize / 2] {
        in_peak[centre as usize] = true;
        for dir in [1isize, -1] {
            let mut k = centre;
            while (k - centre).abs() < points as isize / 2 && at(k + dir) < at(k) {
                k += dir;
                in_peak[k.rem_euclid(points as isize) as usize] = true;
            }
        }
    }
    let central: f64 = w
        .iter()
        .zip(&in_peak)
        .filter(|(_, &inside)| inside)
        .map(|((_, v), _)| v)
        .sum();
    Ok(central / total)
}
