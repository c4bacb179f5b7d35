use super::{settle, time_at, SimConfig, SolverError, Trajectory};
use crate::model::{vector_field, ModelParams, State};
use crate::Scalar;

const CORT: usize = 3;
const ACTH: usize = 1;

/// Lag in whole steps; the lag must sit on the grid to within 1e-9 steps.
fn lag_steps<T: Scalar>(tau: T, dt: T) -> Result<usize, SolverError> {
    let ratio = tau / dt;
    let m = ratio.round();
    if (ratio - m).abs() > T::lit(1e-9) {
        return Err(SolverError::DelayNotGridAligned {
            tau: tau.to_f64_lossy(),
            dt: dt.to_f64_lossy(),
        });
    }
    Ok(m.to_usize().unwrap_or(0))
}

/// Fractional Adams–Bashforth–Moulton predictor–corrector (one corrector pass)
/// for Caputo derivatives of order `q ∈ (0, 1]` with discrete lags `τ₁` (CORT
/// feedback) and `τ₂` (ACTH drive) that are multiples of `dt`.
///
/// The full memory sum is kept, so the cost is quadratic in the step count.
pub fn simulate_fractional<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>, SolverError> {
    p.validate()?;
    cfg.validate_common()?;
    let (tau1, tau2) = cfg.dirac_lags()?;
    let dt = cfg.dt;
    let (m1, m2) = (lag_steps(tau1, dt)?, lag_steps(tau2, dt)?);
    let n = cfg.steps();
    let x0 = cfg.history.to_array();

    let lagged = |xs: &[[T; 4]], idx: usize, m: usize, comp: usize, own: &[T; 4]| -> T {
        if m == 0 {
            own[comp]
        } else if idx < m {
            x0[comp]
        } else {
            xs[idx - m][comp]
        }
    };
    let rhs = |idx: usize, x: &[T; 4], past: &[[T; 4]]| {
        let cort = lagged(past, idx, m1, CORT, x);
        let acth = lagged(past, idx, m2, ACTH, x);
        vector_field(p, &State::from_array(*x), cort, acth)
    };
    let xs = caputo_abm(x0, n, dt, cfg.order_q, rhs)?;

    Ok(Trajectory {
        times: (0..=n).map(|k| time_at(k, dt)).collect(),
        states: xs.into_iter().map(State::from_array).collect(),
    })
}

/// Fractional Adams–Bashforth–Moulton scheme for `ᶜDᵠx = f` on the grid
/// `tₖ = k·dt`, `k = 0..=n`, from `x(0) = x0`.
///
/// `rhs(k, x, past)` evaluates `f` at grid index `k` for the candidate state `x`;
/// `past` holds the accepted states `x₀ … xₖ₋₁`, so lagged terms may read any of
/// them. The predictor is the fractional rectangle rule, the corrector the
/// fractional trapezoid rule, applied once. Undershoots below zero of at most
/// 1e-9 are floored, as for the model solvers.
pub fn caputo_abm<T: Scalar, const D: usize>(
    x0: [T; D],
    n: usize,
    dt: T,
    q: T,
    rhs: impl Fn(usize, &[T; D], &[[T; D]]) -> [T; D],
) -> Result<Vec<[T; D]>, SolverError> {
    if !(q > T::zero() && q <= T::one()) {
        return Err(SolverError::InvalidConfig(format!(
            "order q must lie in (0, 1], got {q}"
        )));
    }
    let q1 = q + T::one();
    let two = T::lit(2.0);

    // Predictor weights b[k] = (k+1)^q − k^q and corrector weights
    // w[k] = (k+1)^(q+1) − 2k^(q+1) + (k−1)^(q+1), stored reversed so that the
    // memory sums become dot products over contiguous slices:
    // b_rev[n - k] = b[k], w_rev[n - k] = w[k]. At step s the predictor needs
    // b[s - j] and the corrector w[s + 1 - j].
    let pow_q: Vec<T> = (0..=n + 1)
        .map(|k| T::from_usize(k).unwrap().powf(q))
        .collect();
    let pow_q1: Vec<T> = (0..=n + 1)
        .map(|k| T::from_usize(k).unwrap().powf(q1))
        .collect();
    let mut b_rev = vec![T::zero(); n + 1];
    let mut w_rev = vec![T::zero(); n + 1];
    for k in 0..=n {
        b_rev[n - k] = pow_q[k + 1] - pow_q[k];
        if k >= 1 {
            w_rev[n - k] = pow_q1[k + 1] - two * pow_q1[k] + pow_q1[k - 1];
        }
    }
    let pred_scale = dt.powf(q) / q1.gamma_fn();
    let corr_scale = dt.powf(q) / (q1 + T::one()).gamma_fn();

    let mut xs: Vec<[T; D]> = Vec::with_capacity(n + 1);
    xs.push(x0);
    // derivative history, one column per component
    let mut fcols: [Vec<T>; D] = std::array::from_fn(|_| Vec::with_capacity(n + 1));
    let f0 = rhs(0, &x0, &xs[..0]);
    for c in 0..D {
        fcols[c].push(f0[c]);
    }

    for step in 0..n {
        let s = T::from_usize(step).unwrap();
        let a0 = pow_q1[step] - (s - q) * pow_q[step + 1];
        let bw = &b_rev[n - step..];
        let ww = &w_rev[n - step - 1..];
        let mut pred = [T::zero(); D];
        let mut corr = [T::zero(); D];
        for c in 0..D {
            let f = &fcols[c];
            let (sp, sc) = dual_dot(&f[1..=step], &bw[1..], &ww[1..]);
            pred[c] = x0[c] + pred_scale * (sp + bw[0] * f[0]);
            corr[c] = sc + a0 * f[0];
        }
        let idx = step + 1;
        let fp = rhs(idx, &pred, &xs);
        let mut next = [T::zero(); D];
        for c in 0..D {
            next[c] = x0[c] + corr_scale * (fp[c] + corr[c]);
        }
        settle(&mut next, time_at(idx, dt))?;
        let fnext = rhs(idx, &next, &xs);
        xs.push(next);
        for c in 0..D {
            fcols[c].push(fnext[c]);
        }
    }
    Ok(xs)
}

/// `(Σ f·u, Σ f·v)` with four independent accumulators per sum.
#[inline]
fn dual_dot<T: Scalar>(f: &[T], u: &[T], v: &[T]) -> (T, T) {
    let len = f.len();
    let (f, u, v) = (&f[..len], &u[..len], &v[..len]);
    let mut su = [T::zero(); 4];
    let mut sv = [T::zero(); 4];
    let chunks = len / 4;
    for i in 0..chunks {
        let j = 4 * i;
        for l in 0..4 {
            su[l] = su[l] + f[j + l] * u[j + l];
            sv[l] = sv[l] + f[j + l] * v[j + l];
        }
    }
    let mut tu = (su[0] + su[1]) + (su[2] + su[3]);
    let mut tv = (sv[0] + sv[1]) + (sv[2] + sv[3]);
    for j in 4 * chunks..len {
        tu = tu + f[j] * u[j];
        tv = tv + f[j] * v[j];
    }
    (tu, tv)
}
