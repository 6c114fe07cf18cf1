//! Conditioned states with the phase dependence written out as half-angle
//! harmonics. Every quantity is an exact Fourier-coefficient read; the cost is
//! `O(N m)` memory and `O(N m^2)` per statistic, so this is the reference
//! route for small photon numbers.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::policy::{maximize_sharpness, AdaptiveTerms};
use super::ZERO_MOMENT_TOL;
use crate::circular::{Measure, TrigPolynomial};
use crate::error::{Error, Result};
use crate::states::{Basis, TwoModeState};

/// `|psi(n_m, phi)>` as amplitudes `A[k][p]`, where `k` counts the photons
/// left in mode `a` and `p in {-m, -m+2, .., m}` labels `e^{i p phi / 2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionedState {
    photons: usize,
    detections: usize,
    amps: Vec<Complex64>,
}

impl ConditionedState {
    pub fn from_input(input: &TwoModeState) -> Result<Self> {
        let z = input.to_basis(Basis::Jz)?;
        Ok(ConditionedState {
            photons: z.photons(),
            detections: 0,
            amps: z.amplitudes().to_vec(),
        })
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn detections(&self) -> usize {
        self.detections
    }

    pub fn remaining(&self) -> usize {
        self.photons - self.detections
    }

    fn width(&self) -> usize {
        self.detections + 1
    }

    /// Coefficient of `e^{i p phi / 2}` in the component with `k` photons in
    /// mode `a`; zero off the lattice.
    pub fn amplitude(&self, k: usize, p: i64) -> Complex64 {
        let m = self.detections as i64;
        if k > self.remaining() || p.abs() > m || (p + m) % 2 != 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.amps[k * self.width() + ((p + m) / 2) as usize]
    }

    fn row(&self, k: usize) -> &[Complex64] {
        let w = self.width();
        &self.amps[k * w..(k + 1) * w]
    }

    /// Applies `c_u(phi, Phi) / sqrt(N - m)` with
    /// `c_u = a sin((phi - Phi + u pi)/2) + b cos((phi - Phi + u pi)/2)`.
    pub fn apply_detection(&self, u: u8, phase: f64) -> Result<ConditionedState> {
        let rem = self.remaining();
        if rem == 0 {
            return Err(Error::PhotonsExhausted {
                photons: self.photons,
            });
        }
        let (w_old, w_new) = (self.width(), self.width() + 1);
        // sin(t/2) = (w e^{i phi/2} - conj(w) e^{-i phi/2}) / 2i, cos likewise with +
        let w = Complex64::cis(-(phase - f64::from(u) * PI) / 2.0);
        let norm = 1.0 / (rem as f64).sqrt();
        let half_i = Complex64::new(0.0, -0.5);
        let (a_up, a_down) = (w * half_i, -w.conj() * half_i);
        let (b_up, b_down) = (w * 0.5, w.conj() * 0.5);

        let mut out = vec![Complex64::new(0.0, 0.0); rem * w_new];
        for k in 0..=rem {
            let (sa, sb) = ((k as f64).sqrt() * norm, ((rem - k) as f64).sqrt() * norm);
            for (s, &x) in self.row(k).iter().enumerate() {
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                // slot s holds p = 2s - m; p + 1 sits in slot s + 1 of the wider row
                if k > 0 {
                    let base = (k - 1) * w_new;
                    out[base + s + 1] += a_up * sa * x;
                    out[base + s] += a_down * sa * x;
                }
                if k < rem {
                    let base = k * w_new;
                    out[base + s + 1] += b_up * sb * x;
                    out[base + s] += b_down * sb * x;
                }
            }
        }
        debug_assert_eq!(w_old + 1, w_new);
        Ok(ConditionedState {
            photons: self.photons,
            detections: self.detections + 1,
            amps: out,
        })
    }

    /// Coefficients `q = -m..=m` of `sum_k weight(k) <psi_{k+shift}(phi)|psi_k(phi)>`.
    fn correlation(&self, shift: usize, weight: impl Fn(usize) -> f64) -> Vec<Complex64> {
        let m = self.detections;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * m + 1];
        let rem = self.remaining();
        if shift > rem {
            return out;
        }
        for k in 0..=rem - shift {
            let wk = weight(k);
            if wk == 0.0 {
                continue;
            }
            let (r0, r1) = (self.row(k), self.row(k + shift));
            for (s, &x) in r0.iter().enumerate() {
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (t, &y) in r1.iter().enumerate() {
                    // e^{i (p - p') phi / 2} with p - p' = 2 (s - t)
                    out[m + s - t] += wk * x * y.conj();
                }
            }
        }
        out
    }

    /// `P(n_m | phi) = <psi|psi>` as an integer-harmonic polynomial of degree `m`.
    pub fn record_distribution(&self) -> TrigPolynomial {
        TrigPolynomial::from_coefficients(self.correlation(0, |_| 1.0))
            .expect("odd coefficient count")
    }

    pub fn norm_sqr_at(&self, phi: f64) -> f64 {
        let m = self.detections as f64;
        (0..=self.remaining())
            .map(|k| {
                self.row(k)
                    .iter()
                    .enumerate()
                    .map(|(s, &x)| x * Complex64::cis((2.0 * s as f64 - m) * phi / 2.0))
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum()
    }

    /// Probability of outcome `u` at feedback phase `phase` when the true
    /// phase is `phi_true`, given the record so far.
    pub fn detection_probability(&self, u: u8, phase: f64, phi_true: f64) -> Result<f64> {
        let before = self.norm_sqr_at(phi_true);
        if before <= 0.0 {
            return Err(Error::DegenerateDistribution);
        }
        Ok(self.apply_detection(u, phase)?.norm_sqr_at(phi_true) / before)
    }

    /// Record likelihood normalized to a density on `[0, 2pi)` (flat prior).
    pub fn posterior(&self) -> Result<TrigPolynomial> {
        self.record_distribution().normalized()
    }

    /// Closed-form moments of the next-step likelihoods.
    ///
    /// `c_u^dag c_u = (n_a + n_b)/2 + s_u [(n_b - n_a) cos(phi - Phi) + (a^dag b + b^dag a) sin(phi - Phi)] / 2`,
    /// so each moment is a linear combination of harmonics of the current
    /// likelihood `P`, of `D = <n_b - n_a>` and of `X = <a^dag b + b^dag a>`.
    pub fn adaptive_terms(&self, measure: Measure) -> AdaptiveTerms {
        let rem = self.remaining();
        let m = self.detections as i64;
        let l = i64::from(measure.harmonic());
        let p = self.correlation(0, |_| 1.0);
        let d = self.correlation(0, |k| rem as f64 - 2.0 * k as f64);
        let y = self.correlation(1, |k| (((k + 1) * (rem - k)) as f64).sqrt());
        let at = |v: &[Complex64], q: i64| {
            if q.abs() > m {
                Complex64::new(0.0, 0.0)
            } else {
                v[(q + m) as usize]
            }
        };
        let x = |q: i64| at(&y, q) + at(&y, -q).conj();
        let i = Complex64::new(0.0, 1.0);
        let scale = PI / (2.0 * rem as f64);
        AdaptiveTerms {
            a: PI * at(&p, -l),
            b: scale * (at(&d, 1 - l) + i * x(1 - l)),
            c: scale * (at(&d, -1 - l) - i * x(-1 - l)),
        }
    }

    /// Sharpness-maximizing feedback phase, `None` when every phase is equally good.
    pub fn adaptive_phase(&self, measure: Measure) -> Result<Option<f64>> {
        if self.remaining() == 0 {
            return Err(Error::PhotonsExhausted {
                photons: self.photons,
            });
        }
        Ok(maximize_sharpness(&self.adaptive_terms(measure)))
    }

    /// Posterior mean phase, `arg int P e^{i l phi} dphi / l`.
    pub fn final_estimate(&self, measure: Measure) -> Result<f64> {
        if self.remaining() != 0 {
            return Err(Error::RecordIncomplete {
                photons: self.photons,
                detections: self.detections,
            });
        }
        let l = measure.harmonic();
        let dist = self.record_distribution();
        let mo = dist.moment(i64::from(l));
        if mo.norm() <= ZERO_MOMENT_TOL * dist.moment(0).re {
            return Err(Error::ZeroMoment { harmonic: l });
        }
        Ok(crate::circular::wrap_phase(mo.arg() / f64::from(l)))
    }

    /// `M(Phi)` by quadrature of the next-step likelihoods on `points` angles.
    pub fn maximand_by_quadrature(
        &self,
        measure: Measure,
        phase: f64,
        points: usize,
    ) -> Result<f64> {
        let l = f64::from(measure.harmonic());
        let mut total = 0.0;
        for u in 0..2u8 {
            let next = self.apply_detection(u, phase)?;
            let s: Complex64 = (0..points)
                .map(|k| {
                    let phi = TAU * k as f64 / points as f64;
                    next.norm_sqr_at(phi) * Complex64::cis(l * phi)
                })
                .sum();
            total += (s * TAU / points as f64).norm();
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{equal_split_state, one_port_state, optimal_state};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(two_j: usize, rng: &mut ChaCha8Rng) -> TwoModeState {
        let amps = (0..=two_j)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        TwoModeState::normalized(two_j, Basis::Jz, amps).unwrap()
    }

    fn random_history(input: &TwoModeState, m: usize, rng: &mut ChaCha8Rng) -> ConditionedState {
        let mut s = ConditionedState::from_input(input).unwrap();
        for _ in 0..m {
            s = s
                .apply_detection(rng.random_range(0..2), rng.random::<f64>() * TAU)
                .unwrap();
        }
        s
    }

    #[test]
    fn single_photon_likelihoods() {
        let s = ConditionedState::from_input(&one_port_state(1).unwrap()).unwrap();
        let s0 = s.apply_detection(0, 0.0).unwrap();
        let s1 = s.apply_detection(1, 0.0).unwrap();
        for k in 0..20 {
            let phi = 0.31 * k as f64;
            assert_abs_diff_eq!(
                s0.norm_sqr_at(phi),
                (phi / 2.0).sin().powi(2),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                s1.norm_sqr_at(phi),
                (phi / 2.0).cos().powi(2),
                epsilon = 1e-15
            );
        }
        let p = s1.record_distribution();
        assert_abs_diff_eq!(p.coeff(0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(1).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(-1).re, 0.25, epsilon = 1e-15);
        let post = s1.posterior().unwrap();
        assert_abs_diff_eq!(post.coeff(0).re, 1.0 / TAU, epsilon = 1e-15);
        assert_abs_diff_eq!(post.coeff(1).re, 0.5 / TAU, epsilon = 1e-15);
        assert_abs_diff_eq!(
            s.detection_probability(0, 0.0, 0.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            s1.final_estimate(Measure::Holevo).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            s0.final_estimate(Measure::Holevo).unwrap(),
            PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn initial_state_is_flat_jz_input() {
        let input = optimal_state(5).unwrap();
        let s = ConditionedState::from_input(&input).unwrap();
        let z = input.to_basis(Basis::Jz).unwrap();
        for k in 0..=5 {
            assert_eq!(s.amplitude(k, 0), z.amplitude(k));
        }
        let p = s.record_distribution();
        assert_eq!(p.max_harmonic(), 0);
        assert_abs_diff_eq!(p.coeff(0).re, 1.0, epsilon = 1e-12);
        let prior = s.posterior().unwrap();
        assert_abs_diff_eq!(prior.coeff(0).re, 1.0 / TAU, epsilon = 1e-12);
    }

    #[test]
    fn flux_conservation_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=7 {
            let input = random_state(n, &mut rng);
            for m in 0..n {
                let s = random_history(&input, m, &mut rng);
                let phase = rng.random::<f64>() * TAU;
                let (s0, s1) = (
                    s.apply_detection(0, phase).unwrap(),
                    s.apply_detection(1, phase).unwrap(),
                );
                for k in 0..16 {
                    let phi = TAU * k as f64 / 16.0 + 0.1;
                    let total = s0.norm_sqr_at(phi) + s1.norm_sqr_at(phi);
                    assert_abs_diff_eq!(total, s.norm_sqr_at(phi), epsilon = 1e-12);
                }
                let mp = (m + 1) as i64;
                for k in 0..=s0.remaining() {
                    for p in -mp - 2..=mp + 2 {
                        if (p + mp) % 2 != 0 {
                            assert_eq!(s0.amplitude(k, p), Complex64::new(0.0, 0.0));
                        }
                    }
                }
                let dist = s0.record_distribution();
                assert_eq!(dist.max_harmonic(), m + 1);
                assert!(dist.is_real_valued(1e-12));
                assert!(s0.posterior().unwrap().is_probability(1e-10));
            }
        }
    }

    #[test]
    fn detection_probabilities_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=6 {
            let input = random_state(n, &mut rng);
            let s = random_history(&input, rng.random_range(0..n), &mut rng);
            let (phase, phi) = (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
            let p0 = s.detection_probability(0, phase, phi).unwrap();
            let p1 = s.detection_probability(1, phase, phi).unwrap();
            assert_abs_diff_eq!(p0 + p1, 1.0, epsilon = 1e-12);
            // gauge covariance: shift phi and Phi together
            let q0 = s.detection_probability(0, phase + 0.7, phi + 0.7);
            if s.detections() == 0 {
                assert_abs_diff_eq!(q0.unwrap(), p0, epsilon = 1e-12);
            }
        }
        assert!(ConditionedState::from_input(&one_port_state(1).unwrap())
            .unwrap()
            .apply_detection(0, 0.0)
            .unwrap()
            .apply_detection(0, 0.0)
            .is_err());
    }

    #[test]
    fn two_photon_first_detection_matches_beam_splitter_matrix() {
        // |1,1> through the interferometer: output amplitudes from the mode
        // transform a -> a sin + b cos applied to a^dag b^dag |0>.
        let s = ConditionedState::from_input(&equal_split_state(2).unwrap()).unwrap();
        for &(phase, phi) in &[(0.0f64, 0.4f64), (1.1, -0.3), (2.0, 2.0)] {
            let t = (phi - phase) / 2.0;
            let (sn, cs) = t.sin_cos();
            // three-dimensional output space |2,0>, |1,1>, |0,2> for (c_0, c_1)
            // c_0 = a sin + b cos, c_1 = a cos - b sin; a^dag b^dag in outputs:
            // (sin c0 + cos c1)(cos c0 - sin c1)
            let amp20 = sn * cs * 2f64.sqrt();
            let amp11 = cs * cs - sn * sn;
            let amp02 = -sn * cs * 2f64.sqrt();
            // first detection u=0 has probability <n_c0>/2
            let want0 = (2.0 * amp20 * amp20 + amp11 * amp11) / 2.0;
            let want1 = (2.0 * amp02 * amp02 + amp11 * amp11) / 2.0;
            let p0 = s.detection_probability(0, phase, phi).unwrap();
            let p1 = s.detection_probability(1, phase, phi).unwrap();
            assert_abs_diff_eq!(p0, want0, epsilon = 1e-12);
            assert_abs_diff_eq!(p1, want1, epsilon = 1e-12);
        }
    }

    #[test]
    fn adaptive_terms_match_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..20 {
            let n = 1 + trial % 6;
            let measure = if trial % 3 == 0 {
                Measure::ModPi
            } else {
                Measure::Holevo
            };
            let input = random_state(n, &mut rng);
            let s = random_history(&input, rng.random_range(0..n), &mut rng);
            let terms = s.adaptive_terms(measure);
            for _ in 0..4 {
                let phase = rng.random::<f64>() * TAU;
                let quad = s.maximand_by_quadrature(measure, phase, 4096).unwrap();
                assert_abs_diff_eq!(terms.maximand(phase), quad, epsilon = 1e-8);
                for u in 0..2u8 {
                    let next = s.apply_detection(u, phase).unwrap();
                    let mo = next
                        .record_distribution()
                        .moment(i64::from(measure.harmonic()));
                    assert_abs_diff_eq!(
                        (terms.outcome_moment(u, phase) - mo).norm(),
                        0.0,
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn prior_maximand_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in 1..=8 {
            let s = ConditionedState::from_input(&random_state(n, &mut rng)).unwrap();
            for measure in [Measure::Holevo, Measure::ModPi] {
                let t = s.adaptive_terms(measure);
                let v: Vec<f64> = (0..256)
                    .map(|k| t.maximand(TAU * k as f64 / 256.0))
                    .collect();
                let (lo, hi) = v
                    .iter()
                    .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
                assert!(hi - lo < 1e-10);
                assert_eq!(s.adaptive_phase(measure).unwrap(), None);
            }
        }
    }

    #[test]
    fn maximizer_matches_dense_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut checked = 0;
        while checked < 10 {
            let n = rng.random_range(2..=6);
            let input = random_state(n, &mut rng);
            let s = random_history(&input, rng.random_range(1..n), &mut rng);
            let terms = s.adaptive_terms(Measure::Holevo);
            let Some(phi) = s.adaptive_phase(Measure::Holevo).unwrap() else {
                continue;
            };
            let best = (0..1_000_000)
                .map(|k| terms.maximand(TAU * k as f64 / 1e6))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(terms.maximand(phi) >= best - 1e-9);
            checked += 1;
        }
    }

    #[test]
    fn estimate_is_covariant_under_phase_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let input = random_state(5, &mut rng);
        let bits: Vec<u8> = (0..5).map(|_| rng.random_range(0..2)).collect();
        let phases: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * TAU).collect();
        let run = |shift: f64| {
            let mut s = ConditionedState::from_input(&input).unwrap();
            for (&u, &ph) in bits.iter().zip(&phases) {
                s = s.apply_detection(u, ph + shift).unwrap();
            }
            s.final_estimate(Measure::Holevo).unwrap()
        };
        let d = crate::circular::wrap_phase(run(0.9) - run(0.0));
        assert_abs_diff_eq!(d, 0.9, epsilon = 1e-10);
    }

    #[test]
    fn estimate_needs_full_record() {
        let s = ConditionedState::from_input(&optimal_state(2).unwrap()).unwrap();
        assert!(matches!(
            s.final_estimate(Measure::Holevo),
            Err(Error::RecordIncomplete {
                photons: 2,
                detections: 0
            })
        ));
    }
}
