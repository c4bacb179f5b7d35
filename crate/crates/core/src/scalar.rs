//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the model, analysis and solvers are generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts to `f64` for reporting and for special functions.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance of `base`, raised to a small multiple of machine epsilon when the
    /// scalar type cannot resolve `base`.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Gamma function, evaluated in double precision.
    #[inline]
    fn gamma_fn(self) -> Self {
        Self::lit(libm::tgamma(self.to_f64_lossy()))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
