//! The four-compartment HPA-axis model: CRH, ACTH, glucocorticoid receptor (GR)
//! and cortisol (CORT).
//!
//! The delayed cortisol signal (filtered through the first kernel) feeds back on
//! CRH, ACTH and GR; the delayed ACTH signal (second kernel) drives cortisol. The
//! vector field takes both delayed quantities as plain arguments so that every
//! solver (discrete lags, chain-trick filters, fractional memory) shares it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` must be finite and strictly positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("invalid ACTH search bracket [{lo}, {hi}]: need 0 < lo < hi")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("grid resolution {0} is below the minimum of 100 points")]
    GridTooCoarse(usize),
    #[error("no sign change of the reduced GR balance on [{lo}, {hi}]")]
    EmptyBracket { lo: f64, hi: f64 },
}

/// Rate and affinity constants of the model. All are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams<T> {
    /// CRH production (circadian and stress drive).
    pub a1: T,
    /// CRH inhibition constant.
    pub a2: T,
    /// CRH degradation rate.
    pub a3: T,
    /// ACTH production.
    pub b1: T,
    /// ACTH inhibition constant.
    pub b2: T,
    /// ACTH degradation rate.
    pub b3: T,
    /// GR dimerization constant.
    pub c1: T,
    /// GR binding affinity.
    pub c2: T,
    /// Baseline GR production.
    pub c3: T,
    /// GR degradation rate.
    pub c4: T,
    /// CORT production.
    pub d1: T,
    /// CORT degradation rate.
    pub d2: T,
}

impl<T: Scalar> ModelParams<T> {
    /// Scaled parameter set with three coexisting positive equilibria
    /// (low, medium and high GR).
    pub fn reference() -> Self {
        let l = T::lit;
        Self {
            a1: l(0.1),
            a2: l(0.1),
            a3: l(1.0),
            b1: l(0.1),
            b2: l(0.1),
            b3: l(10.0),
            c1: l(1.0),
            c2: l(0.001),
            c3: l(0.05),
            c4: l(0.9),
            d1: l(1.0),
            d2: l(1.0),
        }
    }

    pub fn named(&self) -> [(&'static str, T); 12] {
        [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("b1", self.b1),
            ("b2", self.b2),
            ("b3", self.b3),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("d1", self.d1),
            ("d2", self.d2),
        ]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in self.named() {
            if !(v.is_finite() && v > T::zero()) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

/// Hormone and receptor concentrations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State<T> {
    pub crh: T,
    pub acth: T,
    pub gr: T,
    pub cort: T,
}

impl<T: Scalar> State<T> {
    pub fn new(crh: T, acth: T, gr: T, cort: T) -> Self {
        Self {
            crh,
            acth,
            gr,
            cort,
        }
    }

    pub fn to_array(self) -> [T; 4] {
        [self.crh, self.acth, self.gr, self.cort]
    }

    pub fn from_array(x: [T; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(T::zero(), |m, (a, b)| m.max((*a - b).abs()))
    }
}

/// Right-hand side of the delayed model, with each convolution integral replaced
/// by the supplied delayed value: `delayed_cort` stands for the first-kernel
/// filtered CORT and `delayed_acth` for the second-kernel filtered ACTH.
///
/// Returns `[dCRH, dACTH, dGR, dCORT]`.
#[inline]
pub fn vector_field<T: Scalar>(
    p: &ModelParams<T>,
    current: &State<T>,
    delayed_cort: T,
    delayed_acth: T,
) -> [T; 4] {
    let bound = current.gr * delayed_cort;
    let bound_sq = bound * bound;
    [
        p.a1 / (p.a2 + delayed_cort) - p.a3 * current.crh,
        p.b1 * current.crh / (p.b2 + bound) - p.b3 * current.acth,
        p.c1 * bound_sq / (p.c2 + bound_sq) + p.c3 - p.c4 * current.gr,
        p.d1 * delayed_acth - p.d2 * current.cort,
    ]
}

/// Residuals of the steady-state equations with denominators cleared.
pub fn algebraic_residuals<T: Scalar>(p: &ModelParams<T>, s: &State<T>) -> [T; 4] {
    let State {
        crh: x1,
        acth: x2,
        gr: x3,
        cort: x4,
    } = *s;
    let u = x3 * x4;
    [
        p.a1 - p.a2 * p.a3 * x1 - p.a3 * x1 * x4,
        p.b1 * x1 - p.b2 * p.b3 * x2 - p.b3 * x2 * x3 * x4,
        p.c4 * x3 * u * u - (p.c1 + p.c3) * u * u + p.c2 * p.c4 * x3 - p.c2 * p.c3,
        p.d1 * x2 - p.d2 * x4,
    ]
}

pub fn algebraic_residual<T: Scalar>(p: &ModelParams<T>, s: &State<T>) -> T {
    algebraic_residuals(p, s)
        .iter()
        .fold(T::zero(), |m, r| m.max(r.abs()))
}

/// Steady state reconstructed from an ACTH level by eliminating CORT, CRH and GR.
pub fn state_from_acth<T: Scalar>(p: &ModelParams<T>, acth: T) -> State<T> {
    let cort = p.d1 / p.d2 * acth;
    let crh = p.a1 / (p.a3 * (p.a2 + cort));
    let gr = (p.b1 * crh / (p.b3 * acth) - p.b2) / cort;
    State::new(crh, acth, gr, cort)
}

/// GR balance along the eliminated curve. Its positive zeros are the equilibria.
pub fn reduced_gr_balance<T: Scalar>(p: &ModelParams<T>, acth: T) -> T {
    let s = state_from_acth(p, acth);
    let u = s.gr * s.cort;
    let u2 = u * u;
    p.c1 * u2 / (p.c2 + u2) + p.c3 - p.c4 * s.gr
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrLevel {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T> {
    pub state: State<T>,
    /// Max absolute value of the four steady-state equations at `state`.
    pub residual: T,
    pub gr_level: GrLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NonPositiveCoordinate,
    ResidualTooLarge,
}

/// A root of the reduced balance that did not make it into the equilibrium list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectedRoot<T> {
    pub acth: T,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet<T> {
    /// Sorted by GR concentration, ascending.
    pub equilibria: Vec<Equilibrium<T>>,
    pub rejected: Vec<RejectedRoot<T>>,
}

impl<T: Scalar> EquilibriumSet<T> {
    pub fn by_level(&self, level: GrLevel) -> Option<&Equilibrium<T>> {
        self.equilibria.iter().find(|e| e.gr_level == level)
    }
}

pub const DEFAULT_GRID_N: usize = 100_000;

/// Search bracket used when none is given: `[1e-6, 1e3 / max(1, d1/d2)]`.
pub fn default_acth_bracket<T: Scalar>(p: &ModelParams<T>) -> (T, T) {
    let ratio = (p.d1 / p.d2).max(T::one());
    (T::lit(1e-6), T::lit(1e3) / ratio)
}

/// Finds every positive equilibrium whose ACTH coordinate lies in `acth_bracket`.
///
/// The steady-state system is reduced to a scalar GR balance in ACTH, which is
/// sign-scanned on a log-spaced grid of `grid_n` points; each sign change is
/// bisected. Roots giving a non-positive coordinate or failing the full residual
/// check are moved to [`EquilibriumSet::rejected`].
pub fn solve_equilibria<T: Scalar>(
    p: &ModelParams<T>,
    acth_bracket: (T, T),
    grid_n: usize,
) -> Result<EquilibriumSet<T>, ModelError> {
    p.validate()?;
    let (lo, hi) = acth_bracket;
    if !(lo > T::zero() && hi > lo && hi.is_finite()) {
        return Err(ModelError::InvalidBracket {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    if grid_n < 100 {
        return Err(ModelError::GridTooCoarse(grid_n));
    }

    let g = |x: T| reduced_gr_balance(p, x);
    let log_lo = lo.ln();
    let span = hi.ln() - log_lo;
    let last = T::from_usize(grid_n - 1).unwrap();
    let node = |i: usize| {
        if i == grid_n - 1 {
            hi
        } else {
            (log_lo + span * T::from_usize(i).unwrap() / last).exp()
        }
    };

    let mut roots: Vec<T> = Vec::new();
    let mut x_prev = node(0);
    let mut g_prev = g(x_prev);
    if g_prev == T::zero() {
        roots.push(x_prev);
    }
    for i in 1..grid_n {
        let x = node(i);
        let gx = g(x);
        if gx == T::zero() {
            roots.push(x);
        } else if g_prev != T::zero() && (gx > T::zero()) != (g_prev > T::zero()) {
            roots.push(bisect_sign_change(&g, x_prev, x, g_prev, T::tol(1e-13)));
        }
        x_prev = x;
        g_prev = gx;
    }
    if roots.is_empty() {
        return Err(ModelError::EmptyBracket {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }

    let merge = T::lit(1e-8);
    roots.dedup_by(|b, a| (*b - *a).abs() < merge);

    let residual_cap = T::tol(1e-10);
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for acth in roots {
        let state = state_from_acth(p, acth);
        if state.to_array().iter().any(|&c| c <= T::zero()) {
            rejected.push(RejectedRoot {
                acth,
                reason: RejectReason::NonPositiveCoordinate,
            });
            continue;
        }
        let residual = algebraic_residual(p, &state);
        if residual > residual_cap {
            rejected.push(RejectedRoot {
                acth,
                reason: RejectReason::ResidualTooLarge,
            });
            continue;
        }
        accepted.push((state, residual));
    }
    accepted.sort_by(|a, b| a.0.gr.partial_cmp(&b.0.gr).unwrap());

    let n = accepted.len();
    let equilibria = accepted
        .into_iter()
        .enumerate()
        .map(|(i, (state, residual))| Equilibrium {
            state,
            residual,
            gr_level: match i {
                0 => GrLevel::Low,
                i if i + 1 == n => GrLevel::High,
                _ => GrLevel::Medium,
            },
        })
        .collect();
    Ok(EquilibriumSet {
        equilibria,
        rejected,
    })
}

/// [`solve_equilibria`] with the default bracket and grid.
pub fn solve_equilibria_default<T: Scalar>(
    p: &ModelParams<T>,
) -> Result<EquilibriumSet<T>, ModelError> {
    solve_equilibria(p, default_acth_bracket(p), DEFAULT_GRID_N)
}

fn bisect_sign_change<T: Scalar>(f: &impl Fn(T) -> T, mut a: T, mut b: T, mut fa: T, ftol: T) -> T {
    let two = T::lit(2.0);
    for _ in 0..300 {
        let m = (a + b) / two;
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm.abs() < ftol {
            return m;
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) / two
}

/// Coefficients of the linearization at an equilibrium and of its characteristic
/// function `P(λ) + Q(λ)·H1(λ)·H2(λ)`, where `P = λ⁴ + r3λ³ + r2λ² + r1λ + r0`,
/// `Q = s2λ² + s1λ + s0` and `Hi` are the kernels' Laplace transforms.
///
/// `aij` multiply instantaneous states, `bij` the kernel-filtered ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationCoeffs<T> {
    pub a11: T,
    pub a21: T,
    pub a22: T,
    pub a23: T,
    pub a33: T,
    pub a44: T,
    pub b14: T,
    pub b24: T,
    pub b34: T,
    pub b42: T,
    pub r0: T,
    pub r1: T,
    pub r2: T,
    pub r3: T,
    pub s0: T,
    pub s1: T,
    pub s2: T,
}

impl<T: Scalar> LinearizationCoeffs<T> {
    /// Builds the characteristic coefficients from the Jacobian entries.
    #[allow(clippy::too_many_arguments)]
    pub fn from_entries(
        a11: T,
        a21: T,
        a22: T,
        a23: T,
        a33: T,
        a44: T,
        b14: T,
        b24: T,
        b34: T,
        b42: T,
    ) -> Self {
        let r3 = -a11 - a22 - a33 - a44;
        let r2 = a11 * (a22 + a33 + a44) + a33 * a44 + a22 * (a33 + a44);
        let r1 = -a33 * a44 * (a11 + a22) - a11 * a22 * (a33 + a44);
        let r0 = a11 * a22 * a33 * a44;
        let s2 = -b42 * b24;
        let s1 = -b42 * (a21 * b14 + a23 * b34 - b24 * (a11 + a33));
        let s0 = -b42 * (-a23 * b34 * a11 - a21 * b14 * a33 + b24 * a11 * a33);
        Self {
            a11,
            a21,
            a22,
            a23,
            a33,
            a44,
            b14,
            b24,
            b34,
            b42,
            r0,
            r1,
            r2,
            r3,
            s0,
            s1,
            s2,
        }
    }

    /// Characteristic coefficients given directly, with the Jacobian entries zeroed.
    /// Useful for analysing a prescribed characteristic function.
    pub fn from_characteristic(r: [T; 4], s: [T; 3]) -> Self {
        let z = T::zero();
        Self {
            a11: z,
            a21: z,
            a22: z,
            a23: z,
            a33: z,
            a44: z,
            b14: z,
            b24: z,
            b34: z,
            b42: z,
            r0: r[0],
            r1: r[1],
            r2: r[2],
            r3: r[3],
            s0: s[0],
            s1: s[1],
            s2: s[2],
        }
    }

    /// Ascending coefficients of `P(λ)`.
    pub fn p_coeffs(&self) -> [T; 5] {
        [self.r0, self.r1, self.r2, self.r3, T::one()]
    }

    /// Ascending coefficients of `Q(λ)`.
    pub fn q_coeffs(&self) -> [T; 3] {
        [self.s0, self.s1, self.s2]
    }

    /// Jacobian of the vector field with respect to the instantaneous state.
    pub fn instantaneous_jacobian(&self) -> [[T; 4]; 4] {
        let z = T::zero();
        [
            [self.a11, z, z, z],
            [self.a21, self.a22, self.a23, z],
            [z, z, self.a33, z],
            [z, z, z, self.a44],
        ]
    }

    /// Sensitivities to the filtered CORT signal (column 0) and the filtered ACTH
    /// signal (column 1), one row per equation.
    pub fn delayed_jacobian(&self) -> [[T; 2]; 4] {
        let z = T::zero();
        [[self.b14, z], [self.b24, z], [self.b34, z], [z, self.b42]]
    }
}

/// Linearizes the model at `e`.
pub fn linearize<T: Scalar>(p: &ModelParams<T>, e: &State<T>) -> LinearizationCoeffs<T> {
    let State {
        crh: x1,
        gr: x3,
        cort: x4,
        ..
    } = *e;
    let two = T::lit(2.0);
    let inhib = p.b2 + x3 * x4;
    let inhib_sq = inhib * inhib;
    let bound_sq = x3 * x3 * x4 * x4;
    let dimer = (p.c2 + bound_sq) * (p.c2 + bound_sq);
    LinearizationCoeffs::from_entries(
        -p.a3,
        p.b1 / inhib,
        -p.b3,
        -p.b1 * x1 * x4 / inhib_sq,
        -p.c4 + two * p.c1 * p.c2 * x3 * x4 * x4 / dimer,
        -p.d2,
        -p.a1 / ((p.a2 + x4) * (p.a2 + x4)),
        -p.b1 * x1 * x3 / inhib_sq,
        two * p.c1 * p.c2 * x3 * x3 * x4 / dimer,
        p.d1,
    )
}
