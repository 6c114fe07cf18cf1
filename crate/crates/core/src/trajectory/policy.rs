use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circular::{wrap_phase, Measure};

/// Points in the coarse search over `[0, pi)`; as dense as 256 over the full circle.
pub const MAXIMIZER_GRID: usize = 128;
/// Grid maxima refined by golden-section search.
pub const MAXIMIZER_CANDIDATES: usize = 3;
/// Width of the final golden-section bracket, used when the slope of `M`
/// does not bracket the peak.
pub const MAXIMIZER_TOL: f64 = 1e-10;
/// `M(Phi)` counts as flat when `max - min <= FLAT_TOL * max`.
pub const FLAT_TOL: f64 = 1e-12;

/// How the feedback phase `Phi_m` is chosen before each detection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule", content = "phase")]
pub enum PhaseRule {
    /// Maximize the expected sharpness after the next detection.
    Adaptive,
    /// `Phi_m = Phi_0 + m pi / N` with a random offset `Phi_0`.
    Nonadaptive,
    /// The same phase for every detection.
    Fixed(f64),
}

impl PhaseRule {
    pub fn name(self) -> &'static str {
        match self {
            PhaseRule::Adaptive => "adaptive",
            PhaseRule::Nonadaptive => "nonadaptive",
            PhaseRule::Fixed(_) => "fixed",
        }
    }
}

impl fmt::Display for PhaseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Phase rule together with the dispersion measure that the adaptive rule
/// sharpens and the final estimate targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackPolicy {
    pub rule: PhaseRule,
    pub measure: Measure,
}

impl FeedbackPolicy {
    pub fn adaptive(measure: Measure) -> Self {
        FeedbackPolicy {
            rule: PhaseRule::Adaptive,
            measure,
        }
    }

    pub fn nonadaptive(measure: Measure) -> Self {
        FeedbackPolicy {
            rule: PhaseRule::Nonadaptive,
            measure,
        }
    }

    pub fn fixed(phase: f64, measure: Measure) -> Self {
        FeedbackPolicy {
            rule: PhaseRule::Fixed(phase),
            measure,
        }
    }

    /// Phase for detection `m + 1` given `m` detections so far.
    ///
    /// `initial` is the random draw: `Phi_1` for the adaptive rule, `Phi_0`
    /// for the nonadaptive one. When the adaptive maximand is flat after the
    /// first detection the previous phase is repeated.
    pub fn next_phase(
        &self,
        photons: usize,
        detections: usize,
        initial: f64,
        previous: Option<f64>,
        terms: impl FnOnce() -> AdaptiveTerms,
    ) -> f64 {
        match self.rule {
            PhaseRule::Fixed(phi) => wrap_phase(phi),
            PhaseRule::Nonadaptive => nonadaptive_phase(detections + 1, initial, photons),
            PhaseRule::Adaptive if detections == 0 => wrap_phase(initial),
            PhaseRule::Adaptive => {
                maximize_sharpness(&terms()).unwrap_or(previous.unwrap_or(initial))
            }
        }
    }
}

/// `Phi_0 + m pi / N` reduced to `[0, 2pi)`.
pub fn nonadaptive_phase(m: usize, phi0: f64, photons: usize) -> f64 {
    wrap_phase(phi0 + m as f64 * PI / photons as f64)
}

/// Moments of the two possible next-step likelihoods as functions of the
/// feedback phase:
///
/// `int P(u n | phi) e^{i l phi} dphi = a + s_u (b e^{i Phi} + c e^{-i Phi})`,
/// with `s_0 = 1`, `s_1 = -1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveTerms {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl AdaptiveTerms {
    pub fn outcome_moment(&self, u: u8, phase: f64) -> Complex64 {
        let z = self.b * Complex64::cis(phase) + self.c * Complex64::cis(-phase);
        if u == 0 {
            self.a + z
        } else {
            self.a - z
        }
    }

    /// `M(Phi) = sum_u |moment_u(Phi)|`.
    pub fn maximand(&self, phase: f64) -> f64 {
        let (s, c) = phase.sin_cos();
        self.maximand_sc(c, s)
    }

    #[inline]
    fn maximand_sc(&self, cos: f64, sin: f64) -> f64 {
        Trig::new(self).eval(cos, sin)
    }

    /// `dM/dPhi`.
    pub fn maximand_slope(&self, phase: f64) -> f64 {
        let e = Complex64::cis(phase);
        let z = self.b * e + self.c * e.conj();
        let dz = Complex64::i() * (self.b * e - self.c * e.conj());
        let term = |w: Complex64, dw: Complex64| {
            let n = w.norm_sqr().sqrt();
            if n > 0.0 {
                (w.conj() * dw).re / n
            } else {
                0.0
            }
        };
        term(self.a + z, dz) + term(self.a - z, -dz)
    }

    pub fn scaled(&self, s: f64) -> Self {
        AdaptiveTerms {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
        }
    }
}

/// `b e^{i Phi} + c e^{-i Phi} = p cos + q sin` with `p = b + c`, `q = i (b - c)`.
/// Terms are O(1), so `sqrt(norm_sqr)` is safe and much cheaper than `hypot`.
struct Trig {
    a: Complex64,
    p: Complex64,
    q: Complex64,
}

impl Trig {
    fn new(t: &AdaptiveTerms) -> Self {
        Trig {
            a: t.a,
            p: t.b + t.c,
            q: Complex64::i() * (t.b - t.c),
        }
    }

    #[inline]
    fn eval(&self, cos: f64, sin: f64) -> f64 {
        let z = self.p * cos + self.q * sin;
        (self.a + z).norm_sqr().sqrt() + (self.a - z).norm_sqr().sqrt()
    }
}

fn grid_trig() -> &'static [(f64, f64)] {
    static GRID: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    GRID.get_or_init(|| {
        (0..MAXIMIZER_GRID)
            .map(|k| {
                let (s, c) = (PI * k as f64 / MAXIMIZER_GRID as f64).sin_cos();
                (c, s)
            })
            .collect()
    })
}

/// Feedback phase maximizing `M(Phi)`, or `None` when `M` is flat.
///
/// Shifting `Phi` by `pi` swaps the two outcomes, so `M` has period `pi` and
/// the search runs over `[0, pi)`; the returned phase lies there. `M` is
/// sampled on [`MAXIMIZER_GRID`] points, the best [`MAXIMIZER_CANDIDATES`]
/// local maxima are refined within one grid step by root-finding on `M'`,
/// and the best point wins, ties going to the smaller phase.
pub fn maximize_sharpness(terms: &AdaptiveTerms) -> Option<f64> {
    let trig = grid_trig();
    let n = trig.len();
    let form = Trig::new(terms);
    let values: Vec<f64> = trig.iter().map(|&(c, s)| form.eval(c, s)).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !(hi > 0.0) || hi - lo <= FLAT_TOL * hi {
        return None;
    }

    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| {
            let v = values[k];
            v >= values[(k + n - 1) % n] && v >= values[(k + 1) % n]
        })
        .collect();
    // stable sort keeps index order among equal values
    peaks.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    peaks.truncate(MAXIMIZER_CANDIDATES);

    let step = PI / n as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &k in &peaks {
        let centre = step * k as f64;
        let (phi, v) = refine_peak(terms, centre - step, centre + step);
        let candidates = [(values[k], centre), (v, phi.rem_euclid(PI))];
        for (v, phi) in candidates {
            if v > best.0 || (v == best.0 && phi < best.1) {
                best = (v, phi);
            }
        }
    }
    Some(best.1)
}

/// Finds the zero of `M'` inside the bracket by Illinois false position,
/// which pins the peak to rounding; a quadratic peak seen through `M` alone
/// only resolves to about the square root of it.
fn refine_peak(terms: &AdaptiveTerms, lo: f64, hi: f64) -> (f64, f64) {
    let (mut a, mut fa) = (lo, terms.maximand_slope(lo));
    let (mut b, mut fb) = (hi, terms.maximand_slope(hi));
    if !(fa > 0.0 && fb < 0.0) {
        return golden_max(|x| terms.maximand(x), lo, hi);
    }
    let mut x = 0.5 * (a + b);
    let mut side = 0i8;
    for _ in 0..100 {
        let next = (a * fb - b * fa) / (fb - fa);
        let next = if next > a && next < b {
            next
        } else {
            0.5 * (a + b)
        };
        let done = (next - x).abs() <= 1e-15;
        x = next;
        let fx = terms.maximand_slope(x);
        if fx == 0.0 || done {
            break;
        }
        if fx > 0.0 {
            (a, fa) = (x, fx);
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            (b, fb) = (x, fx);
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
        if b - a <= 1e-15 {
            break;
        }
    }
    (x, terms.maximand(x))
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > MAXIMIZER_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
