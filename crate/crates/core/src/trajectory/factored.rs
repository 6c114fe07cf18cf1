//! Conditioned states in the `J_y` eigenmodes `d_pm = (b -+ i a)/sqrt 2`.
//!
//! In these modes `c_u = (e^{i t/2} d_+ + e^{-i t/2} d_-)/sqrt 2` with
//! `t = phi - Phi + u pi`, so after `m` detections the conditioned state is
//!
//! `sum_q E_q e^{i (2q - m) phi / 2} F_q |psi>`, with `F_q` proportional to `d_+^q d_-^{m-q}`.
//!
//! The record enters only through the `m + 1` numbers `E_q`, which obey a
//! two-term recurrence. Everything the record does not touch is folded into
//! per-input tables, so a detection costs `O(m)` and the likelihood harmonics
//! needed by the adaptive rule and the estimate cost `O(m)` to read.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use super::policy::AdaptiveTerms;
use super::ZERO_MOMENT_TOL;
use crate::circular::{wrap_phase, Measure};
use crate::error::{Error, Result};
use crate::states::{Basis, TwoModeState};
use crate::su2::{i_pow, ln_factorial};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn ln_binom(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Input-dependent overlap tables.
///
/// For each `m` and `h in {0, 1, 2}`,
/// `W[m][h][q] = sum_r g(r+q) conj(g(r+q-h)) sqrt(H_m(r,q) H_m(r,q-h))`, where
/// `g(n)` is the input amplitude with `n` photons in `d_+` and
/// `H_m(r,q) = C(m,q) C(N-m,r) / C(N,r+q)`. The coefficient of `e^{i h phi}`
/// in the record likelihood is then `sum_q E_q conj(E_{q-h}) W[m][h][q]`.
#[derive(Clone, Debug)]
pub struct FactoredTables {
    photons: usize,
    g: Vec<Complex64>,
    w: Vec<[Vec<Complex64>; 3]>,
}

impl FactoredTables {
    pub fn new(input: &TwoModeState) -> Result<Self> {
        let y = input.to_basis(Basis::Jy)?;
        let n = y.photons();
        // J_y = (n_- - n_+)/2, so |j mu>_y holds j - mu photons in d_+;
        // the i^{j+mu} phase aligns the J_y eigenbasis with d-mode Fock states.
        let g: Vec<Complex64> = (0..=n)
            .map(|np| {
                let idx = n - np;
                i_pow(idx as i64) * y.amplitude(idx)
            })
            .collect();

        let w = (0..=n)
            .into_par_iter()
            .map(|m| {
                let rem = n - m;
                let lc_m: Vec<f64> = (0..=m).map(|q| ln_binom(m, q)).collect();
                let lc_rem: Vec<f64> = (0..=rem).map(|r| ln_binom(rem, r)).collect();
                let lc_n: Vec<f64> = (0..=n).map(|s| ln_binom(n, s)).collect();
                // rows[q][r] = g(r+q) sqrt(H_m(r,q))
                let rows: Vec<Vec<Complex64>> = (0..=m)
                    .map(|q| {
                        (0..=rem)
                            .map(|r| {
                                let gv = g[r + q];
                                if gv == ZERO {
                                    ZERO
                                } else {
                                    gv * (0.5 * (lc_m[q] + lc_rem[r] - lc_n[r + q])).exp()
                                }
                            })
                            .collect()
                    })
                    .collect();
                let table = |h: usize| -> Vec<Complex64> {
                    (0..=m)
                        .map(|q| {
                            if q < h {
                                return ZERO;
                            }
                            rows[q]
                                .iter()
                                .zip(&rows[q - h])
                                .map(|(x, y)| x * y.conj())
                                .sum()
                        })
                        .collect()
                };
                [table(0), table(1), table(2)]
            })
            .collect();

        Ok(FactoredTables { photons: n, g, w })
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    /// Input amplitudes over `d_+` photon number.
    pub fn d_amplitudes(&self) -> &[Complex64] {
        &self.g
    }

    /// Fresh conditioned state, with its detection probabilities evaluated at `phi_true`.
    pub fn start(&self, phi_true: f64) -> FactoredState<'_> {
        FactoredState {
            tables: self,
            e: vec![Complex64::new(1.0, 0.0)],
            ln_scale: 0.0,
            probe: self.g.clone(),
            half_true: Complex64::cis(phi_true / 2.0),
        }
    }
}

/// Conditioned state of the factored representation.
///
/// `e` holds `E_q` up to the factor `exp(ln_scale / 2)`, rescaled to unit norm
/// after every detection. `probe` is the normalized state at the true phase,
/// over the `d_+` photon number, and drives the outcome probabilities.
#[derive(Clone, Debug)]
pub struct FactoredState<'t> {
    tables: &'t FactoredTables,
    e: Vec<Complex64>,
    ln_scale: f64,
    probe: Vec<Complex64>,
    half_true: Complex64,
}

impl FactoredState<'_> {
    pub fn photons(&self) -> usize {
        self.tables.photons
    }

    pub fn detections(&self) -> usize {
        self.e.len() - 1
    }

    /// Log of the common factor dropped from the likelihood coefficients.
    pub fn ln_scale(&self) -> f64 {
        self.ln_scale
    }

    fn check_remaining(&self) -> Result<()> {
        if self.detections() == self.photons() {
            Err(Error::PhotonsExhausted {
                photons: self.photons(),
            })
        } else {
            Ok(())
        }
    }

    /// `(P(u = 0), P(u = 1))` at the true phase for feedback phase `phase`.
    pub fn branch_probabilities(&self, phase: f64) -> Result<[f64; 2]> {
        self.check_remaining()?;
        let (s0, s1) = self.probe_sums(phase);
        Ok([s0, s1])
    }

    fn probe_sums(&self, phase: f64) -> (f64, f64) {
        let rem = self.probe.len() - 1;
        let e = self.half_true * Complex64::cis(-phase / 2.0);
        let ec = e.conj();
        let (mut p0, mut p1) = (0.0, 0.0);
        for r in 0..rem {
            let up = e * ((r + 1) as f64).sqrt() * self.probe[r + 1];
            let down = ec * ((rem - r) as f64).sqrt() * self.probe[r];
            // u = 1 multiplies the two paths by i and -i
            p0 += (up + down).norm_sqr();
            p1 += (up - down).norm_sqr();
        }
        let norm = 2.0 * rem as f64;
        (p0 / norm, p1 / norm)
    }

    /// Records outcome `u` at feedback phase `phase`.
    pub fn detect(&mut self, u: u8, phase: f64) -> Result<()> {
        self.check_remaining()?;
        let m = self.detections();
        let w = Complex64::cis(-(phase - f64::from(u) * PI) / 2.0);
        let wc = w.conj();
        let mut next = vec![ZERO; m + 2];
        let denom = (m + 1) as f64;
        for (q, slot) in next.iter_mut().enumerate() {
            let mut v = ZERO;
            if q > 0 {
                v += w * (q as f64 / denom).sqrt() * self.e[q - 1];
            }
            if q <= m {
                v += wc * ((m + 1 - q) as f64 / denom).sqrt() * self.e[q];
            }
            *slot = v * std::f64::consts::FRAC_1_SQRT_2;
        }
        let norm: f64 = next.iter().map(|x| x.norm_sqr()).sum();
        if norm > 0.0 && norm.is_finite() {
            let inv = 1.0 / norm.sqrt();
            next.iter_mut().for_each(|x| *x *= inv);
            self.ln_scale += norm.ln();
        }
        self.e = next;

        let rem = self.probe.len() - 1;
        let up = self.half_true * w;
        let down = up.conj();
        let mut probe: Vec<Complex64> = (0..rem)
            .map(|r| {
                up * ((r + 1) as f64).sqrt() * self.probe[r + 1]
                    + down * ((rem - r) as f64).sqrt() * self.probe[r]
            })
            .collect();
        let pn: f64 = probe.iter().map(|x| x.norm_sqr()).sum();
        if pn > 0.0 {
            let inv = 1.0 / pn.sqrt();
            probe.iter_mut().for_each(|x| *x *= inv);
        }
        self.probe = probe;
        Ok(())
    }

    /// Coefficient of `e^{i h phi}` in the record likelihood, without the
    /// factor `exp(ln_scale)`.
    pub fn likelihood_coefficient(&self, h: usize) -> Complex64 {
        assert!(h <= 2, "tables hold harmonics 0, 1 and 2");
        let m = self.detections();
        let table = &self.tables.w[m][h];
        (h..=m)
            .map(|q| self.e[q] * self.e[q - h].conj() * table[q])
            .sum()
    }

    /// Next-step moments for the adaptive rule, up to the positive factor
    /// `exp(ln_scale)`.
    pub fn adaptive_terms(&self, measure: Measure) -> AdaptiveTerms {
        let m = self.detections();
        let l = measure.harmonic() as usize;
        let table = &self.tables.w[m + 1][l];
        let denom = (m + 1) as f64;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // next E'_q = w alpha_q + conj(w) beta_q
        let alpha = |q: usize| {
            if q == 0 || q > m + 1 {
                ZERO
            } else {
                self.e[q - 1] * (s * (q as f64 / denom).sqrt())
            }
        };
        let beta = |q: usize| {
            if q > m {
                ZERO
            } else {
                self.e[q] * (s * ((m + 1 - q) as f64 / denom).sqrt())
            }
        };
        let (mut a, mut b, mut c) = (ZERO, ZERO, ZERO);
        for q in l..=m + 1 {
            let wq = table[q];
            let (aq, bq) = (alpha(q), beta(q));
            let (ah, bh) = (alpha(q - l).conj(), beta(q - l).conj());
            a += (aq * ah + bq * bh) * wq;
            b += aq * bh * wq;
            c += bq * ah * wq;
        }
        // likelihood coefficient A + s_u (B e^{-i Phi} + C e^{i Phi});
        // the moment is 2 pi times its conjugate
        AdaptiveTerms {
            a: TAU * a.conj(),
            b: TAU * b.conj(),
            c: TAU * c.conj(),
        }
    }

    pub fn estimate(&self, measure: Measure) -> Result<f64> {
        if self.detections() != self.photons() {
            return Err(Error::RecordIncomplete {
                photons: self.photons(),
                detections: self.detections(),
            });
        }
        let l = measure.harmonic();
        let coef = self.likelihood_coefficient(l as usize);
        if coef.norm() <= ZERO_MOMENT_TOL * self.likelihood_coefficient(0).re {
            return Err(Error::ZeroMoment { harmonic: l });
        }
        Ok(wrap_phase(-coef.arg() / f64::from(l)))
    }
}
