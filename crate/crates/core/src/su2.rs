//! Interferometer rotation matrix `I^j_{mu nu}(pi/2)` and the change of basis
//! between the `J_y` and `J_z` eigenstates.
//!
//! Angular momenta are handled through `two_j` and basis indices
//! `mu + j`, so half-integer spins need no special casing. Matrix elements
//! with `mu >= |nu|` come from the Jacobi-polynomial closed form
//!
//! ```text
//! I_{mu nu} = 2^-mu [(j-mu)!(j+mu)! / ((j-nu)!(j+nu)!)]^(1/2) P_{j-mu}^{(mu-nu, mu+nu)}(0)
//! ```
//!
//! and every other element from `I_{mu nu} = (-1)^{mu-nu} I_{nu mu} = I_{-nu,-mu}`.
//! Factorials are combined as log-gamma differences and the Jacobi
//! recurrence carries a running exponent, so single elements stay finite
//! for any spin. Whole columns for large spins are produced by a three-term
//! recurrence in `mu` instead.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{Basis, TwoModeState};

/// Largest `2j` for which columns are first attempted with the Jacobi formula.
pub const DIRECT_COLUMN_LIMIT: usize = 512;

/// Maximum `|sum_mu I_{mu nu}^2 - 1|` accepted from the Jacobi formula.
pub const UNITARITY_TOL: f64 = 1e-8;

const RESCALE_ABOVE: f64 = 1e200;

/// Total spin `j = two_j / 2`, equal to half the photon number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinQuantum {
    two_j: usize,
}

impl SpinQuantum {
    pub fn new(two_j: usize) -> Self {
        SpinQuantum { two_j }
    }

    pub fn two_j(self) -> usize {
        self.two_j
    }

    pub fn dim(self) -> usize {
        self.two_j + 1
    }

    pub fn j(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// `mu` for basis index `mu + j`.
    pub fn projection(self, index: usize) -> f64 {
        index as f64 - self.j()
    }

    fn check(self, index: usize) -> Result<()> {
        if index > self.two_j {
            Err(Error::IndexOutOfRange {
                index,
                two_j: self.two_j,
            })
        } else {
            Ok(())
        }
    }
}

/// `ln n!`: exact summation below 1024, Stirling series above.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(1024);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..1024 {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    if n < table.len() {
        return table[n];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (std::f64::consts::TAU * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `i^k` without trigonometric rounding.
pub(crate) fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `P_n^{(alpha, beta)}(0)` as `mantissa * exp(ln_scale)`.
fn jacobi_at_zero_scaled(n: u64, alpha: i64, beta: i64) -> Result<(f64, f64)> {
    if alpha <= -1 || beta <= -1 {
        return Err(Error::JacobiDomain { alpha, beta });
    }
    let (a, b) = (alpha as f64, beta as f64);
    if n == 0 {
        return Ok((1.0, 0.0));
    }
    let mut prev = 1.0;
    let mut cur = 0.5 * (a - b);
    let mut ln_scale = 0.0;
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let lead = 2.0 * k * (k + a + b) * (s - 2.0);
        let mid = (s - 1.0) * (a * a - b * b);
        let back = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (mid * cur - back * prev) / lead;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            prev /= RESCALE_ABOVE;
            ln_scale += RESCALE_ABOVE.ln();
        }
    }
    Ok((cur, ln_scale))
}

/// The Jacobi polynomial `P_n^{(alpha, beta)}` at zero, from the three-term
/// recurrence in `n`. Large degrees may overflow to infinity; the matrix
/// element routines use a scaled form internally.
pub fn jacobi_at_zero(n: u64, alpha: i64, beta: i64) -> Result<f64> {
    let (m, s) = jacobi_at_zero_scaled(n, alpha, beta)?;
    Ok(m * s.exp())
}

/// Jacobi closed form for indices with `mu >= |nu|`.
fn element_in_region(two_j: usize, mu: usize, nu: usize) -> f64 {
    debug_assert!(mu >= nu && mu + nu >= two_j);
    let n = (two_j - mu) as u64;
    let alpha = (mu - nu) as i64;
    let beta = (mu + nu - two_j) as i64;
    let (mantissa, ln_scale) =
        jacobi_at_zero_scaled(n, alpha, beta).expect("region guarantees alpha, beta >= 0");
    if mantissa == 0.0 {
        return 0.0;
    }
    let ln_prefactor = -((2 * mu) as f64 - two_j as f64) / 2.0 * std::f64::consts::LN_2
        + 0.5
            * (ln_factorial(two_j - mu) + ln_factorial(mu)
                - ln_factorial(two_j - nu)
                - ln_factorial(nu));
    mantissa * (ln_prefactor + ln_scale).exp()
}

/// Maps `(mu, nu)` to an index pair inside `mu >= |nu|` plus the sign picked
/// up by the symmetry relations. Every pair lands in exactly one case.
fn to_region(two_j: usize, mu: usize, nu: usize) -> (usize, usize, f64) {
    let flip = parity_sign(mu as i64 - nu as i64);
    if mu + nu >= two_j {
        if mu >= nu {
            (mu, nu, 1.0)
        } else {
            (nu, mu, flip)
        }
    } else if nu >= mu {
        (two_j - mu, two_j - nu, flip)
    } else {
        (two_j - nu, two_j - mu, 1.0)
    }
}

/// `I^j_{mu nu}(pi/2)` for basis indices `mu + j` and `nu + j`.
pub fn matrix_element(spin: SpinQuantum, mu_index: usize, nu_index: usize) -> Result<f64> {
    spin.check(mu_index)?;
    spin.check(nu_index)?;
    let (a, b, sign) = to_region(spin.two_j, mu_index, nu_index);
    Ok(sign * element_in_region(spin.two_j, a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnMethod {
    Jacobi,
    Recurrence,
}

/// One column `nu` of `I^j(pi/2)`, indexed by `mu + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationColumn {
    spin: SpinQuantum,
    nu_index: usize,
    values: Vec<f64>,
    method: ColumnMethod,
}

impl RotationColumn {
    /// Evaluates the column with the Jacobi formula when `2j` is small enough,
    /// keeps it if it passes the unitarity check, and otherwise falls back
    /// to [`RotationColumn::by_recurrence`].
    pub fn compute(spin: SpinQuantum, nu_index: usize) -> Result<Self> {
        spin.check(nu_index)?;
        if spin.two_j <= DIRECT_COLUMN_LIMIT {
            let direct = Self::by_jacobi(spin, nu_index)?;
            let r = direct.unitarity_residual();
            if r.is_finite() && r <= UNITARITY_TOL {
                return Ok(direct);
            }
        }
        Self::by_recurrence(spin, nu_index)
    }

    /// Element-by-element Jacobi evaluation, without validation.
    pub fn by_jacobi(spin: SpinQuantum, nu_index: usize) -> Result<Self> {
        spin.check(nu_index)?;
        let values = (0..=spin.two_j)
            .map(|mu| {
                let (a, b, sign) = to_region(spin.two_j, mu, nu_index);
                sign * element_in_region(spin.two_j, a, b)
            })
            .collect();
        Ok(RotationColumn {
            spin,
            nu_index,
            values,
            method: ColumnMethod::Jacobi,
        })
    }

    /// Solves the column as the eigenvector of the tridiagonal `J_x` matrix
    /// with eigenvalue `-nu`:
    ///
    /// `c_{mu-1} x_{mu-1} + c_mu x_{mu+1} = -2 nu x_mu`, `c_mu = sqrt((j-mu)(j+mu+1))`.
    ///
    /// The recurrence runs inward from both edges, where it is stable, and the
    /// halves are matched by least squares on two central points. The sign is
    /// fixed by `I_{j nu} > 0` and the column is normalized.
    pub fn by_recurrence(spin: SpinQuantum, nu_index: usize) -> Result<Self> {
        spin.check(nu_index)?;
        let two_j = spin.two_j;
        if two_j == 0 {
            return Ok(RotationColumn {
                spin,
                nu_index,
                values: vec![1.0],
                method: ColumnMethod::Recurrence,
            });
        }
        let coupling = |i: usize| (((two_j - i) * (i + 1)) as f64).sqrt();
        let two_lambda = two_j as f64 - 2.0 * nu_index as f64;
        let mid = (two_j - 1) / 2;

        let mut fwd = vec![0.0; mid + 2];
        fwd[0] = 1.0;
        for i in 0..=mid {
            let back = if i == 0 {
                0.0
            } else {
                coupling(i - 1) * fwd[i - 1]
            };
            fwd[i + 1] = (two_lambda * fwd[i] - back) / coupling(i);
            if fwd[i + 1].abs() > RESCALE_ABOVE {
                fwd[..=i + 1].iter_mut().for_each(|x| *x /= RESCALE_ABOVE);
            }
        }

        let mut bwd = vec![0.0; two_j + 1];
        bwd[two_j] = 1.0;
        for i in (mid + 1..=two_j).rev() {
            let ahead = if i == two_j {
                0.0
            } else {
                coupling(i) * bwd[i + 1]
            };
            bwd[i - 1] = (two_lambda * bwd[i] - ahead) / coupling(i - 1);
            if bwd[i - 1].abs() > RESCALE_ABOVE {
                bwd[i - 1..].iter_mut().for_each(|x| *x /= RESCALE_ABOVE);
            }
        }

        // squares of the raw halves can overflow once 2j exceeds ~1000
        for half in [&mut fwd[..], &mut bwd[mid..]] {
            let peak = half.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            half.iter_mut().for_each(|x| *x /= peak);
        }
        let (f0, f1) = (fwd[mid], fwd[mid + 1]);
        let (b0, b1) = (bwd[mid], bwd[mid + 1]);
        let scale = (f0 * b0 + f1 * b1) / (f0 * f0 + f1 * f1);
        let mut values = bwd;
        for i in 0..=mid {
            values[i] = fwd[i] * scale;
        }
        let peak = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        values.iter_mut().for_each(|x| *x /= peak);
        let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        values.iter_mut().for_each(|x| *x /= norm);

        Ok(RotationColumn {
            spin,
            nu_index,
            values,
            method: ColumnMethod::Recurrence,
        })
    }

    pub fn spin(&self) -> SpinQuantum {
        self.spin
    }

    pub fn nu_index(&self) -> usize {
        self.nu_index
    }

    pub fn method(&self) -> ColumnMethod {
        self.method
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mu_index: usize) -> f64 {
        self.values[mu_index]
    }

    /// `|sum_mu I_{mu nu}^2 - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        (self.values.iter().map(|x| x * x).sum::<f64>() - 1.0).abs()
    }
}

/// `psi^z_nu = sum_mu e^{-i(pi/2)(nu - mu)} I_{mu nu} psi^y_mu`.
pub fn y_to_z(state: &TwoModeState) -> Result<TwoModeState> {
    if state.basis() != Basis::Jy {
        return Err(Error::InvalidArgument(
            "y_to_z expects a J_y-basis state".into(),
        ));
    }
    let spin = SpinQuantum::new(state.two_j());
    let psi = state.amplitudes();
    let mut out = Vec::with_capacity(spin.dim());
    for nu in 0..spin.dim() {
        let col = RotationColumn::compute(spin, nu)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (mu, (&i_mn, &p)) in col.values().iter().zip(psi).enumerate() {
            acc += i_pow(mu as i64 - nu as i64) * i_mn * p;
        }
        out.push(acc);
    }
    Ok(TwoModeState::from_parts_unchecked(
        state.two_j(),
        Basis::Jz,
        out,
    ))
}

/// `psi^y_mu = sum_nu e^{i(pi/2)(nu - mu)} I_{mu nu} psi^z_nu`. Only columns
/// with nonzero input amplitude are evaluated, so sparse Fock superpositions
/// convert in `O(N)` per component.
pub fn z_to_y(state: &TwoModeState) -> Result<TwoModeState> {
    if state.basis() != Basis::Jz {
        return Err(Error::InvalidArgument(
            "z_to_y expects a J_z-basis state".into(),
        ));
    }
    let spin = SpinQuantum::new(state.two_j());
    let mut out = vec![Complex64::new(0.0, 0.0); spin.dim()];
    for (nu, &p) in state.amplitudes().iter().enumerate() {
        if p == Complex64::new(0.0, 0.0) {
            continue;
        }
        let col = RotationColumn::compute(spin, nu)?;
        for (mu, (&i_mn, o)) in col.values().iter().zip(out.iter_mut()).enumerate() {
            *o += i_pow(nu as i64 - mu as i64) * i_mn * p;
        }
    }
    Ok(TwoModeState::from_parts_unchecked(
        state.two_j(),
        Basis::Jy,
        out,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `exp(-i (pi/2) J_y)` from the eigendecomposition of the Fock-basis
    /// `J_y = (a^dag b - a b^dag) / 2i`.
    fn brute_force_rotation(two_j: usize) -> DMatrix<Complex64> {
        let n = two_j + 1;
        let mut jy = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..two_j {
            let c = (((k + 1) * (two_j - k)) as f64).sqrt();
            // (a^dag b)_{k+1,k} = c, (a b^dag)_{k,k+1} = c
            jy[(k + 1, k)] = Complex64::new(0.0, -c / 2.0);
            jy[(k, k + 1)] = Complex64::new(0.0, c / 2.0);
        }
        let eig = jy.symmetric_eigen();
        let phases = DMatrix::from_diagonal(
            &eig.eigenvalues
                .map(|l| Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * l)),
        );
        &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
    }

    #[test]
    fn jacobi_small_cases() {
        assert_eq!(jacobi_at_zero(0, 3, 7).unwrap(), 1.0);
        assert_eq!(jacobi_at_zero(1, 2, 2).unwrap(), 0.0);
        assert_abs_diff_eq!(jacobi_at_zero(1, 2, 0).unwrap(), 1.0, epsilon = 1e-15);
        // Legendre P_2(0) = -1/2, P_4(0) = 3/8
        assert_abs_diff_eq!(jacobi_at_zero(2, 0, 0).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(jacobi_at_zero(4, 0, 0).unwrap(), 0.375, epsilon = 1e-15);
        assert!(matches!(
            jacobi_at_zero(3, -1, 0),
            Err(Error::JacobiDomain { alpha: -1, beta: 0 })
        ));
    }

    #[test]
    fn jacobi_matches_explicit_sum() {
        // P_n^{(a,b)}(0) = 2^-n sum_s C(n+a, n-s) C(n+b, s) (-1)^s
        fn binom(n: u64, k: u64) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        for n in 0..12u64 {
            for a in 0..5i64 {
                for b in 0..5i64 {
                    let want: f64 = (0..=n)
                        .map(|s| {
                            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                            sign * binom(n + a as u64, n - s) * binom(n + b as u64, s)
                        })
                        .sum::<f64>()
                        / 2f64.powi(n as i32);
                    let got = jacobi_at_zero(n, a, b).unwrap();
                    assert_abs_diff_eq!(got, want, epsilon = 1e-12 * want.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn spin_half_elements() {
        let s = SpinQuantum::new(1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(matrix_element(s, 1, 1).unwrap(), h, epsilon = 1e-15);
        assert_abs_diff_eq!(matrix_element(s, 0, 0).unwrap(), h, epsilon = 1e-15);
        assert_abs_diff_eq!(matrix_element(s, 1, 0).unwrap(), h, epsilon = 1e-15);
        assert_abs_diff_eq!(matrix_element(s, 0, 1).unwrap(), -h, epsilon = 1e-15);
        assert!(matrix_element(s, 2, 0).is_err());
    }

    #[test]
    fn matches_brute_force_rotation() {
        for two_j in 1..=12 {
            let u = brute_force_rotation(two_j);
            let spin = SpinQuantum::new(two_j);
            for mu in 0..=two_j {
                for nu in 0..=two_j {
                    // I_{mu nu}(pi/2) = d_{nu mu}(pi/2)
                    let d = u[(nu, mu)];
                    assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-9);
                    let got = matrix_element(spin, mu, nu).unwrap();
                    assert_abs_diff_eq!(got, d.re, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn y_eigenvectors_diagonalize_jy() {
        // z-components of |j mu>_y are conj(_y<j mu|j nu>_z)
        for two_j in 1..=9 {
            let spin = SpinQuantum::new(two_j);
            let n = two_j + 1;
            for mu in 0..n {
                let v: Vec<Complex64> = (0..n)
                    .map(|nu| i_pow(mu as i64 - nu as i64) * matrix_element(spin, mu, nu).unwrap())
                    .collect();
                for k in 0..n {
                    let mut jy_v = Complex64::new(0.0, 0.0);
                    if k > 0 {
                        let c = ((k * (two_j - k + 1)) as f64).sqrt();
                        jy_v += Complex64::new(0.0, -c / 2.0) * v[k - 1];
                    }
                    if k < two_j {
                        let c = (((k + 1) * (two_j - k)) as f64).sqrt();
                        jy_v += Complex64::new(0.0, c / 2.0) * v[k + 1];
                    }
                    let want = v[k] * spin.projection(mu);
                    assert_abs_diff_eq!((jy_v - want).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetry_relations_j5() {
        let spin = SpinQuantum::new(10);
        for mu in 0..=10usize {
            for nu in 0..=10usize {
                let a = matrix_element(spin, mu, nu).unwrap();
                let b = matrix_element(spin, nu, mu).unwrap();
                let c = matrix_element(spin, 10 - nu, 10 - mu).unwrap();
                assert_abs_diff_eq!(a, parity_sign(mu as i64 - nu as i64) * b, epsilon = 1e-14);
                assert_abs_diff_eq!(a, c, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn j20_rows_and_columns_are_unit() {
        let spin = SpinQuantum::new(40);
        for k in 0..=40 {
            let col: f64 = (0..=40)
                .map(|mu| matrix_element(spin, mu, k).unwrap().powi(2))
                .sum();
            let row: f64 = (0..=40)
                .map(|nu| matrix_element(spin, k, nu).unwrap().powi(2))
                .sum();
            assert_abs_diff_eq!(col, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(row, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn recurrence_agrees_with_jacobi() {
        for two_j in [1usize, 2, 3, 7, 16, 41, 100] {
            let spin = SpinQuantum::new(two_j);
            for nu in 0..=two_j {
                let a = RotationColumn::by_jacobi(spin, nu).unwrap();
                let b = RotationColumn::by_recurrence(spin, nu).unwrap();
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn columns_orthonormal_up_to_400() {
        for two_j in [200usize, 301, 400] {
            let spin = SpinQuantum::new(two_j);
            let picks = [0, 1, two_j / 3, two_j / 2, two_j - 1, two_j];
            let cols: Vec<_> = picks
                .iter()
                .map(|&nu| RotationColumn::compute(spin, nu).unwrap())
                .collect();
            for (i, a) in cols.iter().enumerate() {
                for (k, b) in cols.iter().enumerate() {
                    let dot: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum();
                    let want = if picks[i] == picks[k] { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(dot, want, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn large_spin_elements_are_finite() {
        let spin = SpinQuantum::new(25_600);
        for &(mu, nu) in &[
            (0, 0),
            (12_800, 12_800),
            (25_600, 0),
            (100, 25_000),
            (12_801, 3),
        ] {
            let v = matrix_element(spin, mu, nu).unwrap();
            assert!(v.is_finite(), "({mu},{nu}) -> {v}");
            assert!(v.abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn edge_column_matches_binomial_form() {
        // I_{mu j} = (-1)^{j-mu} 2^-j sqrt(C(2j, j+mu))
        for two_j in [7usize, 640, 1024, 1100, 1537, 3001, 25_600] {
            let spin = SpinQuantum::new(two_j);
            let col = RotationColumn::compute(spin, two_j).unwrap();
            assert!(col.unitarity_residual() < 1e-8);
            let mut ln_binom = 0.0;
            for k in 0..=two_j {
                if k > 0 {
                    ln_binom += ((two_j - k + 1) as f64 / k as f64).ln();
                }
                let want = parity_sign((two_j - k) as i64)
                    * (0.5 * ln_binom - 0.5 * two_j as f64 * std::f64::consts::LN_2).exp();
                assert_abs_diff_eq!(col.get(k), want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn edge_columns_stay_normalized_through_the_overflow_range() {
        for two_j in (900..=2200).step_by(13) {
            let spin = SpinQuantum::new(two_j);
            for nu in [0, 1, two_j / 3, two_j] {
                let col = RotationColumn::compute(spin, nu).unwrap();
                assert!(col.unitarity_residual() < 1e-12, "2j={two_j} nu={nu}");
            }
        }
    }

    #[test]
    fn large_spin_columns_by_recurrence_are_orthonormal() {
        let spin = SpinQuantum::new(25_600);
        let picks = [0usize, 1, 12_800, 12_801, 20_000, 25_600];
        let cols: Vec<_> = picks
            .iter()
            .map(|&nu| RotationColumn::compute(spin, nu).unwrap())
            .collect();
        for (i, a) in cols.iter().enumerate() {
            assert_eq!(a.method(), ColumnMethod::Recurrence);
            assert!(a.unitarity_residual() < 1e-8);
            assert!(a.values().iter().all(|x| x.is_finite()));
            for b in &cols[i + 1..] {
                let dot: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum();
                assert!(dot.abs() < 1e-8);
            }
        }
        // spot-check against single elements evaluated through the Jacobi form
        for &mu in &[12_800usize, 12_900, 13_500] {
            let e = matrix_element(spin, mu, 12_800).unwrap();
            assert_abs_diff_eq!(cols[2].get(mu), e, epsilon = 1e-9);
        }
    }

    #[test]
    fn optimal_state_in_jz_has_few_significant_terms() {
        let z = y_to_z(&crate::states::optimal_state(40).unwrap()).unwrap();
        let mags: Vec<f64> = z.amplitudes().iter().map(|a| a.norm()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let big: Vec<usize> = (0..mags.len()).filter(|&k| mags[k] > 0.01 * max).collect();
        assert!((9..=10).contains(&big.len()), "{big:?}");
        assert!(big.iter().all(|&k| k.abs_diff(20) <= 5));
        // the largest coefficient sits at mu = 0
        assert_abs_diff_eq!(mags[20], max, epsilon = 1e-14);
    }

    #[test]
    fn round_trip_random_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let two_j = 50;
        let amps: Vec<Complex64> = (0..=two_j)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let y = TwoModeState::normalized(two_j, Basis::Jy, amps).unwrap();
        let z = y_to_z(&y).unwrap();
        assert_abs_diff_eq!(z.norm_sqr(), 1.0, epsilon = 1e-10);
        let back = z_to_y(&z).unwrap();
        for (a, b) in back.amplitudes().iter().zip(y.amplitudes()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn basis_vector_maps_to_unit_column() {
        let two_j = 9;
        for mu in 0..=two_j {
            let mut amps = vec![Complex64::new(0.0, 0.0); two_j + 1];
            amps[mu] = Complex64::new(1.0, 0.0);
            let y = TwoModeState::new(two_j, Basis::Jy, amps).unwrap();
            assert_abs_diff_eq!(y_to_z(&y).unwrap().norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn wrong_basis_rejected() {
        let y = crate::states::optimal_state(3).unwrap();
        assert!(z_to_y(&y).is_err());
        let z = crate::states::one_port_state(3).unwrap();
        assert!(y_to_z(&z).is_err());
    }
}
