//! Delay kernels: probability densities on `[0, ∞)` weighting the past of a signal.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("invalid kernel: {0}")]
    Invalid(String),
    #[error("Laplace transform of Gamma kernel evaluated at Re(λ) = {re} ≤ -1/β = {bound}")]
    PoleRegion { re: f64, bound: f64 },
}

/// Distributed-delay kernel.
///
/// `Dirac { tau }` is a discrete lag; `Gamma { shape, scale }` has density
/// `s^(p-1) e^(-s/β) / (β^p Γ(p))` with mean `p·β`. `shape = 1` is the weak
/// (exponential) kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DelayKernel<T> {
    Dirac { tau: T },
    Gamma { shape: T, scale: T },
}

impl<T: Scalar> DelayKernel<T> {
    pub fn dirac(tau: T) -> Self {
        Self::Dirac { tau }
    }

    /// Exponential kernel `a e^(-a s)`.
    pub fn weak_gamma(a: T) -> Self {
        Self::Gamma {
            shape: T::one(),
            scale: T::one() / a,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        match *self {
            Self::Dirac { tau } if !(tau.is_finite() && tau >= T::zero()) => Err(
                KernelError::Invalid(format!("Dirac delay must be finite and ≥ 0, got {tau}")),
            ),
            Self::Gamma { shape, scale }
                if !(shape.is_finite()
                    && scale.is_finite()
                    && shape > T::zero()
                    && scale > T::zero()) =>
            {
                Err(KernelError::Invalid(format!(
                    "Gamma kernel needs shape > 0 and scale > 0, got ({shape}, {scale})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn mean_delay(&self) -> T {
        match *self {
            Self::Dirac { tau } => tau,
            Self::Gamma { shape, scale } => shape * scale,
        }
    }

    /// Density at `s ≥ 0`. Not defined for Dirac kernels.
    pub fn density(&self, s: T) -> Option<T> {
        match *self {
            Self::Dirac { .. } => None,
            Self::Gamma { shape, scale } => {
                if s < T::zero() {
                    return Some(T::zero());
                }
                let log_d = (shape - T::one()) * s.ln()
                    - s / scale
                    - shape * scale.ln()
                    - shape.gamma_fn().ln();
                Some(if s == T::zero() && shape == T::one() {
                    T::one() / scale
                } else {
                    log_d.exp()
                })
            }
        }
    }

    /// `∫₀^∞ h(s) e^(-λ s) ds`.
    pub fn laplace(&self, lambda: Complex<T>) -> Result<Complex<T>, KernelError> {
        match *self {
            Self::Dirac { tau } => Ok((-lambda * tau).exp()),
            Self::Gamma { shape, scale } => {
                let bound = -T::one() / scale;
                if lambda.re <= bound {
                    return Err(KernelError::PoleRegion {
                        re: lambda.re.to_f64_lossy(),
                        bound: bound.to_f64_lossy(),
                    });
                }
                let base = Complex::new(T::one(), T::zero()) + lambda * scale;
                Ok(base.powc(Complex::new(-shape, T::zero())))
            }
        }
    }

    /// Integer stage count for the linear chain trick, if the shape is integral.
    pub fn chain_stages(&self) -> Option<usize> {
        match *self {
            Self::Gamma { shape, .. } if (shape - shape.round()).abs() < T::tol(1e-12) => {
                shape.round().to_usize().filter(|&n| n >= 1)
            }
            _ => None,
        }
    }
}
