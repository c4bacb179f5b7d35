//! Local stability and Hopf analysis of the linearized delay system.
//!
//! Four kernel configurations are covered:
//!
//! * no delay: Routh–Hurwitz on the quartic `P + Q`;
//! * two Dirac kernels: the characteristic function depends on the total lag
//!   `τ = τ₁ + τ₂` only, `P(λ) + Q(λ)e^{-λτ}`;
//! * Dirac lag on the CORT feedback and an exponential kernel with rate `a₂₀` on
//!   the ACTH drive: `(λ + a₂₀)P(λ) + a₂₀Q(λ)e^{-λτ₁}`;
//! * two exponential (weak gamma) kernels with rate `a`: the sextic
//!   `(λ + a)²P(λ) + a²Q(λ)`, handled by Routh–Hurwitz.
//!
//! For the transcendental cases a purely imaginary root `iω` exists iff
//! `|p(iω)|² = |q(iω)|²`. That even polynomial is assembled by exact polynomial
//! arithmetic; its smallest positive root in `z = ω²` fixes `ω₀`, and the lag is
//! recovered from `e^{-iωτ} = -p(iω)/q(iω)` with a full four-quadrant angle.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::KernelError;
use crate::model::LinearizationCoeffs;
use crate::numerics::{hurwitz, smallest_positive_root, NumericsError, Polynomial};
use crate::Scalar;

pub use crate::kernel::DelayKernel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("transversality undecidable: dh/dz = {slope} at z0 = {z0}")]
    TransversalityDegenerate { z0: f64, slope: f64 },
    #[error("delayed term vanishes at ω0 = {omega0}; the crossing exists for every delay")]
    DegenerateCharacteristic { omega0: f64 },
    #[error("next-to-last Hurwitz minor vanishes without a simple sign change near a = {a}")]
    DegenerateCrossing { a: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    HopfCritical,
}

/// A purely imaginary root `iω₀` reached at the given bifurcation parameter value
/// (total lag, CORT-feedback lag, or kernel rate, depending on the analysis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint<T> {
    pub omega0: T,
    pub value: T,
}

/// One inequality of the no-delay stability test, `lhs > rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub verdict: Verdict,
    pub critical: Vec<CriticalPoint<T>>,
    /// Sign of `Re dλ/dτ` at the crossings (+1 destabilizing, -1 stabilizing).
    pub transversality: Option<i8>,
    pub minors: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<Condition<T>>>,
}

impl<T: Scalar> StabilityReport<T> {
    fn plain(verdict: Verdict) -> Self {
        Self {
            verdict,
            critical: Vec::new(),
            transversality: None,
            minors: None,
            conditions: None,
        }
    }

    /// First critical point whose parameter value is at least `bound`. With the
    /// CORT-feedback lag held at `τ₁`, only total lags `τ ≥ τ₁` are reachable.
    pub fn first_critical_at_least(&self, bound: T) -> Option<&CriticalPoint<T>> {
        self.critical.iter().find(|c| c.value >= bound)
    }
}

fn p_poly<T: Scalar>(c: &LinearizationCoeffs<T>) -> Polynomial<T> {
    Polynomial::new(c.p_coeffs().to_vec())
}

fn q_poly<T: Scalar>(c: &LinearizationCoeffs<T>) -> Polynomial<T> {
    Polynomial::new(c.q_coeffs().to_vec())
}

/// Stability of the equilibrium without delays: Routh–Hurwitz on
/// `λ⁴ + r₃λ³ + (r₂+s₂)λ² + (r₁+s₁)λ + (r₀+s₀)`.
pub fn no_delay_stability<T: Scalar>(c: &LinearizationCoeffs<T>) -> StabilityReport<T> {
    let quartic = &p_poly(c) + &q_poly(c);
    let verdict = hurwitz(&quartic).expect("monic quartic");
    let (r3, r2s, r1s, r0s) = (c.r3, c.r2 + c.s2, c.r1 + c.s1, c.r0 + c.s0);
    let cond = |name: &str, lhs: T, rhs: T| Condition {
        name: name.to_owned(),
        lhs,
        rhs,
        holds: lhs > rhs,
    };
    let conditions = vec![
        cond("r3 > 0", r3, T::zero()),
        cond("r1+s1 > 0", r1s, T::zero()),
        cond("r0+s0 > 0", r0s, T::zero()),
        cond(
            "r3(r2+s2)(r1+s1) > (r1+s1)^2 + r3^2(r0+s0)",
            r3 * r2s * r1s,
            r1s * r1s + r3 * r3 * r0s,
        ),
    ];
    StabilityReport {
        verdict: if verdict.stable {
            Verdict::Stable
        } else {
            Verdict::Unstable
        },
        critical: Vec::new(),
        transversality: None,
        minors: Some(verdict.minors),
        conditions: Some(conditions),
    }
}

/// `|P(iω)|² − |Q(iω)|²` as a degree-8 polynomial in `ω` (only even powers).
pub fn dirac_crossing_polynomial<T: Scalar>(c: &LinearizationCoeffs<T>) -> Polynomial<T> {
    &p_poly(c).squared_modulus_on_imaginary_axis() - &q_poly(c).squared_modulus_on_imaginary_axis()
}

/// Delay-free part `(λ + a₂₀)P(λ)` and delayed part `a₂₀Q(λ)` of the mixed-kernel
/// characteristic function, cleared of the exponential kernel's denominator.
pub fn mixed_characteristic<T: Scalar>(
    c: &LinearizationCoeffs<T>,
    a20: T,
) -> (Polynomial<T>, Polynomial<T>) {
    let shift = Polynomial::new(vec![a20, T::one()]);
    (&shift * &p_poly(c), q_poly(c).scale(a20))
}

/// `|P₅(iω)|² − a₂₀²|Q(iω)|²` as a degree-10 polynomial in `ω`.
pub fn mixed_crossing_polynomial<T: Scalar>(c: &LinearizationCoeffs<T>, a20: T) -> Polynomial<T> {
    let (p5, q) = mixed_characteristic(c, a20);
    &p5.squared_modulus_on_imaginary_axis() - &q.squared_modulus_on_imaginary_axis()
}

/// `cos(ω τ)` at a crossing, from `e^{-iωτ} = -p(iω)/q(iω)`:
/// `Re(-p · conj(q)) / |q|²`.
pub fn crossing_cosine<T: Scalar>(p: &Polynomial<T>, q: &Polynomial<T>, omega: T) -> T {
    let iw = Complex::new(T::zero(), omega);
    let (pv, qv) = (p.eval_complex(iw), q.eval_complex(iw));
    (-pv * qv.conj()).re / qv.norm_sqr()
}

fn crossing_report<T: Scalar>(
    p: &Polynomial<T>,
    q: &Polynomial<T>,
    j_max: usize,
    stable_without_delay: bool,
) -> Result<StabilityReport<T>, AnalysisError> {
    let omega_poly =
        &p.squared_modulus_on_imaginary_axis() - &q.squared_modulus_on_imaginary_axis();
    let h = omega_poly.even_part_in_square();
    let Some(z0) = smallest_positive_root(&h, T::lit(1e-12))? else {
        // No imaginary crossing for any lag: the delay-free verdict persists.
        return Ok(StabilityReport::plain(if stable_without_delay {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }));
    };
    let omega0 = z0.sqrt();
    let iw = Complex::new(T::zero(), omega0);
    let (pv, qv) = (p.eval_complex(iw), q.eval_complex(iw));
    if qv.norm() <= T::tol(1e-14) * q.norm_inf().max(T::one()) {
        return Err(AnalysisError::DegenerateCharacteristic {
            omega0: omega0.to_f64_lossy(),
        });
    }
    let slope = h.derivative().eval(z0);
    if slope.abs() < T::lit(1e-10) {
        return Err(AnalysisError::TransversalityDegenerate {
            z0: z0.to_f64_lossy(),
            slope: slope.to_f64_lossy(),
        });
    }
    let rotation = -pv / qv; // e^{-iωτ}
    let two_pi = T::TAU();
    let mut angle = -rotation.arg();
    if angle < T::zero() {
        angle = angle + two_pi;
    }
    let tau0 = angle / omega0;
    let period = two_pi / omega0;
    let critical = (0..=j_max)
        .map(|j| CriticalPoint {
            omega0,
            value: tau0 + period * T::from_usize(j).unwrap(),
        })
        .collect();
    Ok(StabilityReport {
        verdict: Verdict::HopfCritical,
        critical,
        transversality: Some(if slope > T::zero() { 1 } else { -1 }),
        minors: None,
        conditions: None,
    })
}

/// Critical total lags `τⱼ = τ₀ + 2πj/ω₀` (`j ≤ j_max`) for two Dirac kernels.
///
/// When the crossing polynomial has no positive root the delay-free verdict holds
/// for every lag, reported as `Stable` or `Unstable`.
pub fn dirac_critical_delays<T: Scalar>(
    c: &LinearizationCoeffs<T>,
    j_max: usize,
) -> Result<StabilityReport<T>, AnalysisError> {
    let stable0 = no_delay_stability(c).verdict == Verdict::Stable;
    crossing_report(&p_poly(c), &q_poly(c), j_max, stable0)
}

/// Critical CORT-feedback lags `τ₁ⱼ` for a Dirac kernel on the feedback path and
/// the exponential kernel `a₂₀e^{-a₂₀s}` on the ACTH drive.
pub fn mixed_critical_delays<T: Scalar>(
    c: &LinearizationCoeffs<T>,
    a20: T,
    j_max: usize,
) -> Result<StabilityReport<T>, AnalysisError> {
    if !(a20 > T::zero() && a20.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "a20 must be > 0, got {a20}"
        )));
    }
    let (p5, q) = mixed_characteristic(c, a20);
    let stable0 = hurwitz(&(&p5 + &q))?.stable;
    crossing_report(&p5, &q, j_max, stable0)
}

/// `(λ + a)²P(λ) + a²Q(λ)`: the characteristic polynomial with two weak gamma
/// kernels of rate `a`.
pub fn weak_gamma_sextic<T: Scalar>(c: &LinearizationCoeffs<T>, a: T) -> Polynomial<T> {
    let shift = Polynomial::new(vec![a, T::one()]);
    &(&(&shift * &shift) * &p_poly(c)) + &q_poly(c).scale(a * a)
}

/// Routh–Hurwitz verdict with two weak gamma kernels of rate `a` (mean lag `1/a`).
/// `minors` holds `Δ₁ … Δ₆`; the last equals `β₀ Δ₅`.
pub fn weak_gamma_stability<T: Scalar>(
    c: &LinearizationCoeffs<T>,
    a: T,
) -> Result<StabilityReport<T>, AnalysisError> {
    if !(a > T::zero() && a.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "a must be > 0, got {a}"
        )));
    }
    let v = hurwitz(&weak_gamma_sextic(c, a))?;
    Ok(StabilityReport {
        verdict: if v.stable {
            Verdict::Stable
        } else {
            Verdict::Unstable
        },
        critical: Vec::new(),
        transversality: None,
        minors: Some(v.minors),
        conditions: None,
    })
}

const GAMMA_SCAN_POINTS: usize = 400;

/// Searches `a_bracket` for a rate `a₀` where the next-to-last Hurwitz minor of the
/// weak gamma sextic changes sign while the lower minors stay positive, i.e. a
/// conjugate pair crosses the imaginary axis as `a` passes `a₀`.
pub fn gamma_hopf_search<T: Scalar>(
    c: &LinearizationCoeffs<T>,
    a_bracket: (T, T),
) -> Result<Option<T>, AnalysisError> {
    let (lo, hi) = a_bracket;
    if !(lo > T::zero() && hi > lo && hi.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "need 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let minors =
        |a: T| -> Result<Vec<T>, AnalysisError> { Ok(hurwitz(&weak_gamma_sextic(c, a))?.minors) };
    let d5 = |a: T| -> Result<T, AnalysisError> { Ok(minors(a)?[4]) };

    let last = T::from_usize(GAMMA_SCAN_POINTS - 1).unwrap();
    let (llo, span) = (lo.ln(), hi.ln() - lo.ln());
    let grid: Vec<T> = (0..GAMMA_SCAN_POINTS)
        .map(|i| (llo + span * T::from_usize(i).unwrap() / last).exp())
        .collect();
    let values = grid.iter().map(|&a| d5(a)).collect::<Result<Vec<_>, _>>()?;

    for i in 1..grid.len() - 1 {
        if values[i] == T::zero() && (values[i - 1] > T::zero()) == (values[i + 1] > T::zero()) {
            return Err(AnalysisError::DegenerateCrossing {
                a: grid[i].to_f64_lossy(),
            });
        }
    }

    for i in 1..grid.len() {
        let (va, vb) = (values[i - 1], values[i]);
        if va == T::zero() || (va > T::zero()) == (vb > T::zero()) {
            continue;
        }
        let (mut a, mut b, mut fa) = (grid[i - 1], grid[i], va);
        let two = T::lit(2.0);
        let mut a0 = (a + b) / two;
        for _ in 0..200 {
            a0 = (a + b) / two;
            if a0 <= a || a0 >= b {
                break;
            }
            let f = d5(a0)?;
            if f.abs() < T::lit(1e-10) && (b - a) < T::tol(1e-12) * a0 {
                break;
            }
            if (f > T::zero()) == (fa > T::zero()) {
                a = a0;
                fa = f;
            } else {
                b = a0;
            }
        }
        let m = minors(a0)?;
        if !m[..4].iter().all(|&x| x > T::zero()) {
            continue;
        }
        let h = a0 * T::lit(1e-6);
        let slope = (d5(a0 + h)? - d5(a0 - h)?) / (h + h);
        if slope == T::zero() || !slope.is_finite() {
            return Err(AnalysisError::DegenerateCrossing {
                a: a0.to_f64_lossy(),
            });
        }
        return Ok(Some(a0));
    }
    Ok(None)
}
