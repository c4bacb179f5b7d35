//! Real-coefficient polynomials, real-root isolation, Hurwitz minors and the
//! complex characteristic function of the linearized delay system.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{DelayKernel, KernelError};
use crate::model::LinearizationCoeffs;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("invalid root search domain [{lo}, {hi}]")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("Hurwitz test supports degrees 1..=6, got {0}")]
    UnsupportedDegree(usize),
    #[error("Hurwitz test needs a positive leading coefficient, got {0}")]
    NonPositiveLeading(f64),
}

/// Polynomial with real coefficients in ascending degree order. Trailing zeros are
/// trimmed so the last coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| *c == T::zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial `∏ (x - rᵢ)`.
    pub fn from_roots(roots: &[T]) -> Self {
        roots.iter().fold(Self::constant(T::one()), |acc, &r| {
            &acc * &Self::new(vec![-r, T::one()])
        })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or_else(T::zero)
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn norm_inf(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    }

    /// `Σ |cᵢ| |x|ⁱ`, the scale of rounding error in [`Self::eval`].
    fn abs_eval(&self, x: T) -> T {
        let ax = x.abs();
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize(k).unwrap())
                .collect(),
        )
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    /// Real and imaginary parts of `p(iω)` as polynomials in `ω`.
    pub fn on_imaginary_axis(&self) -> (Self, Self) {
        let mut re = vec![T::zero(); self.coeffs.len()];
        let mut im = vec![T::zero(); self.coeffs.len()];
        for (k, &c) in self.coeffs.iter().enumerate() {
            // i^k cycles 1, i, -1, -i
            match k % 4 {
                0 => re[k] = c,
                1 => im[k] = c,
                2 => re[k] = -c,
                _ => im[k] = -c,
            }
        }
        (Self::new(re), Self::new(im))
    }

    /// `|p(iω)|²` as a polynomial in `ω`. Only even powers are nonzero.
    pub fn squared_modulus_on_imaginary_axis(&self) -> Self {
        let (re, im) = self.on_imaginary_axis();
        &(&re * &re) + &(&im * &im)
    }

    /// Substitutes `z = x²` into a polynomial with only even powers, dropping the
    /// odd coefficients.
    pub fn even_part_in_square(&self) -> Self {
        Self::new(self.coeffs.iter().step_by(2).copied().collect())
    }

    /// Bound on the modulus of every root (Cauchy).
    pub fn root_bound(&self) -> T {
        let lead = self.leading().abs();
        let n = self.coeffs.len().saturating_sub(1);
        T::one()
            + self.coeffs[..n]
                .iter()
                .fold(T::zero(), |m, c| m.max(c.abs() / lead))
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// All real roots of `poly` in `[lo, hi]`, ascending, each reported once.
///
/// Roots are isolated recursively: between consecutive real critical points the
/// polynomial is monotone, so each such interval holds at most one simple root,
/// found by bisection. A critical point where the polynomial vanishes to rounding
/// accuracy is reported as a multiple root.
pub fn real_roots<T: Scalar>(poly: &Polynomial<T>, lo: T, hi: T) -> Result<Vec<T>, NumericsError> {
    if poly.is_zero() {
        return Err(NumericsError::ZeroPolynomial);
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(NumericsError::InvalidDomain {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    let mut roots = isolate(poly, lo, hi);
    merge_close(&mut roots);
    Ok(roots)
}

/// Smallest root of `poly` in `(floor, ∞)`.
pub fn smallest_positive_root<T: Scalar>(
    poly: &Polynomial<T>,
    floor: T,
) -> Result<Option<T>, NumericsError> {
    let bound = poly.root_bound();
    Ok(real_roots(poly, T::zero(), bound)?
        .into_iter()
        .find(|&r| r > floor))
}

fn touch_tolerance<T: Scalar>(poly: &Polynomial<T>, x: T) -> T {
    let target = T::lit(1e-12) * poly.norm_inf().max(T::one());
    target.max(T::epsilon() * T::lit(32.0) * poly.abs_eval(x))
}

fn isolate<T: Scalar>(poly: &Polynomial<T>, lo: T, hi: T) -> Vec<T> {
    match poly.degree() {
        None | Some(0) => return Vec::new(),
        Some(1) => {
            let r = -poly.coeff(0) / poly.coeff(1);
            return if r >= lo && r <= hi {
                vec![r]
            } else {
                Vec::new()
            };
        }
        _ => {}
    }
    let critical = isolate(&poly.derivative(), lo, hi);
    let mut knots = Vec::with_capacity(critical.len() + 2);
    knots.push(lo);
    knots.extend(critical.iter().copied().filter(|&c| c > lo && c < hi));
    knots.push(hi);

    let mut roots = Vec::new();
    for &c in &critical {
        if poly.eval(c).abs() <= touch_tolerance(poly, c) {
            roots.push(c);
        }
    }
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (poly.eval(a), poly.eval(b));
        if fa == T::zero() {
            roots.push(a);
        }
        if fb == T::zero() {
            roots.push(b);
        }
        if fa != T::zero() && fb != T::zero() && (fa > T::zero()) != (fb > T::zero()) {
            roots.push(bisect(poly, a, b, fa));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

fn bisect<T: Scalar>(poly: &Polynomial<T>, mut a: T, mut b: T, mut fa: T) -> T {
    let two = T::lit(2.0);
    loop {
        let m = (a + b) / two;
        if m <= a || m >= b {
            break;
        }
        let fm = poly.eval(m);
        if fm == T::zero() {
            return m;
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if poly.eval(a).abs() <= poly.eval(b).abs() {
        a
    } else {
        b
    }
}

fn merge_close<T: Scalar>(roots: &mut Vec<T>) {
    let tol = T::lit(1e-9);
    roots.dedup_by(|b, a| (*b - *a).abs() <= tol * a.abs().max(T::one()));
}

/// Outcome of the Routh–Hurwitz test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurwitzVerdict<T> {
    pub stable: bool,
    /// Leading principal minors `Δ₁ … Δₙ` of the Hurwitz matrix.
    pub minors: Vec<T>,
}

/// Routh–Hurwitz test for a polynomial of degree 1 to 6 with positive leading
/// coefficient: all roots lie in the open left half-plane iff every leading
/// principal minor of the Hurwitz matrix is positive.
pub fn hurwitz<T: Scalar>(poly: &Polynomial<T>) -> Result<HurwitzVerdict<T>, NumericsError> {
    let n = match poly.degree() {
        None => return Err(NumericsError::ZeroPolynomial),
        Some(n @ 1..=6) => n,
        Some(n) => return Err(NumericsError::UnsupportedDegree(n)),
    };
    if poly.leading() <= T::zero() {
        return Err(NumericsError::NonPositiveLeading(
            poly.leading().to_f64_lossy(),
        ));
    }
    let minors = hurwitz_minors(poly, n);
    Ok(HurwitzVerdict {
        stable: minors.iter().all(|&m| m > T::zero()),
        minors,
    })
}

fn hurwitz_minors<T: Scalar>(poly: &Polynomial<T>, n: usize) -> Vec<T> {
    // descending: desc[k] multiplies λ^(n-k)
    let desc = |k: isize| -> T {
        if (0..=n as isize).contains(&k) {
            poly.coeff(n - k as usize)
        } else {
            T::zero()
        }
    };
    let h: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| desc(2 * j as isize - i as isize + 1))
                .collect()
        })
        .collect();
    (1..=n).map(|k| cofactor_det(&h, k, 0, 0)).collect()
}

/// Determinant of the leading `k×k` block by Laplace expansion along rows.
/// `used` marks consumed columns.
fn cofactor_det<T: Scalar>(m: &[Vec<T>], k: usize, row: usize, used: u32) -> T {
    if row == k {
        return T::one();
    }
    let mut sum = T::zero();
    let mut sign = T::one();
    for col in 0..k {
        if used & (1 << col) != 0 {
            continue;
        }
        let entry = m[row][col];
        if entry != T::zero() {
            sum = sum + sign * entry * cofactor_det(m, k, row + 1, used | (1 << col));
        }
        sign = -sign;
    }
    sum
}

/// Characteristic function `Δ(λ) = P(λ) + Q(λ)·Ĥ₁(λ)·Ĥ₂(λ)` of the linearization,
/// with `Ĥᵢ` the Laplace transforms of the two delay kernels.
pub fn char_residual<T: Scalar>(
    coeffs: &LinearizationCoeffs<T>,
    kernels: (&DelayKernel<T>, &DelayKernel<T>),
    lambda: Complex<T>,
) -> Result<Complex<T>, KernelError> {
    let p = Polynomial::new(coeffs.p_coeffs().to_vec()).eval_complex(lambda);
    let q = Polynomial::new(coeffs.q_coeffs().to_vec()).eval_complex(lambda);
    Ok(p + q * kernels.0.laplace(lambda)? * kernels.1.laplace(lambda)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial<f64> {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn trims_and_degrees() {
        assert_eq!(poly(&[1.0, 2.0, 0.0, 0.0]).degree(), Some(1));
        assert_eq!(poly(&[0.0]).degree(), None);
        assert!(poly(&[]).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(
            real_roots(&poly(&[-1.0, 0.0, 1.0]), -2.0, 2.0).unwrap(),
            vec![-1.0, 1.0]
        );
    }

    #[test]
    fn double_root_reported_once() {
        let p = Polynomial::<f64>::from_roots(&[0.5, 0.5, -2.0]);
        let r = real_roots(&p, -5.0, 5.0).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0] + 2.0).abs() < 1e-12);
        assert!((r[1] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert_eq!(
            real_roots(&Polynomial::<f64>::zero(), 0.0, 1.0),
            Err(NumericsError::ZeroPolynomial)
        );
    }

    #[test]
    fn no_real_roots() {
        assert!(real_roots(&poly(&[1.0, 0.0, 1.0]), -10.0, 10.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn hurwitz_small_cases() {
        let v = hurwitz(&poly(&[1.0, 2.0, 1.0])).unwrap();
        assert!(v.stable);
        assert_eq!(v.minors, vec![2.0, 2.0]);
        assert!(!hurwitz(&poly(&[1.0, -1.0, 1.0])).unwrap().stable);
        assert_eq!(
            hurwitz(&Polynomial::from_roots(&[-1.0; 7])),
            Err(NumericsError::UnsupportedDegree(7))
        );
        assert!(matches!(
            hurwitz(&poly(&[1.0, -1.0])),
            Err(NumericsError::NonPositiveLeading(_))
        ));
    }

    #[test]
    fn hurwitz_quartic_closed_form() {
        // λ⁴ + a1λ³ + a2λ² + a3λ + a4: Δ3 = a1a2a3 − a3² − a1²a4
        let (a1, a2, a3, a4) = (3.0, 5.0, 4.0, 1.5);
        let v = hurwitz(&poly(&[a4, a3, a2, a1, 1.0])).unwrap();
        assert_eq!(v.minors[0], a1);
        assert_eq!(v.minors[1], a1 * a2 - a3);
        assert!((v.minors[2] - (a1 * a2 * a3 - a3 * a3 - a1 * a1 * a4)).abs() < 1e-12);
        assert!((v.minors[3] - a4 * v.minors[2]).abs() < 1e-12);
    }

    #[test]
    fn squared_modulus_matches_complex_evaluation() {
        let p = poly(&[0.3, -1.2, 2.0, 0.7, 1.0]);
        let m = p.squared_modulus_on_imaginary_axis();
        assert!(m.coeffs().iter().skip(1).step_by(2).all(|&c| c == 0.0));
        for w in [0.1, 0.9, 2.3] {
            let direct = p.eval_complex(Complex::new(0.0, w)).norm_sqr();
            assert!((m.eval(w) - direct).abs() < 1e-12 * direct.max(1.0));
            assert!((m.even_part_in_square().eval(w * w) - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn char_residual_at_origin_is_r0_plus_s0() {
        let c = LinearizationCoeffs::from_characteristic([0.5, 1.0, 2.0, 3.0], [0.25, -1.0, 4.0]);
        let k = (DelayKernel::dirac(7.0), DelayKernel::weak_gamma(0.3));
        let v = char_residual(&c, (&k.0, &k.1), Complex::new(0.0, 0.0)).unwrap();
        assert!((v - Complex::new(0.75, 0.0)).norm() < 1e-15);
    }
}
