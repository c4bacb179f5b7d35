use super::{settle, time_at, SimConfig, SolverError, Trajectory};
use crate::model::{vector_field, ModelParams, State};
use crate::Scalar;

const CORT: usize = 3;
const ACTH: usize = 1;

/// Dense view of the solution computed so far: grid states and their derivatives,
/// with the constant history before `t = 0`.
struct DenseHistory<'a, T> {
    xs: &'a [[T; 4]],
    fs: &'a [[T; 4]],
    dt: T,
    phi: [T; 4],
}

impl<T: Scalar> DenseHistory<'_, T> {
    /// Component `c` at time `t`, by cubic Hermite interpolation between grid
    /// points. The caller guarantees both neighbours are already computed.
    fn at(&self, t: T, c: usize) -> T {
        if t <= T::zero() {
            return self.phi[c];
        }
        let pos = t / self.dt;
        let k = pos.floor();
        let mut i = k.to_usize().unwrap();
        let mut s = pos - k;
        if i + 1 >= self.xs.len() {
            // t sits on the last stored point up to rounding
            i = self.xs.len() - 2;
            s = T::one();
        }
        let (s2, s3) = (s * s, s * s * s);
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.xs[i][c]
            + h10 * self.dt * self.fs[i][c]
            + h01 * self.xs[i + 1][c]
            + h11 * self.dt * self.fs[i + 1][c]
    }
}

/// Method-of-steps RK4 for two discrete lags: `τ₁` on the CORT feedback and `τ₂`
/// on the ACTH drive. Lags must be zero or at least ten steps long.
pub fn simulate_dde<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>, SolverError> {
    p.validate()?;
    cfg.validate_common()?;
    let (tau1, tau2) = cfg.dirac_lags()?;
    if cfg.order_q != T::one() {
        return Err(SolverError::InvalidConfig(
            "method-of-steps solver is integer order only".into(),
        ));
    }
    for tau in [tau1, tau2] {
        if tau > T::zero() && cfg.dt > tau / T::lit(10.0) {
            return Err(SolverError::StepTooLarge {
                dt: cfg.dt.to_f64_lossy(),
                scale: tau.to_f64_lossy(),
            });
        }
    }

    let n = cfg.steps();
    let dt = cfg.dt;
    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let phi = cfg.history.to_array();

    let mut xs: Vec<[T; 4]> = Vec::with_capacity(n + 1);
    let mut fs: Vec<[T; 4]> = Vec::with_capacity(n + 1);
    xs.push(phi);

    let rhs = |x: &[T; 4], cort_lag: T, acth_lag: T| {
        vector_field(p, &State::from_array(*x), cort_lag, acth_lag)
    };
    let shifted = |x: &[T; 4], k: &[T; 4], h: T| -> [T; 4] {
        [
            x[0] + h * k[0],
            x[1] + h * k[1],
            x[2] + h * k[2],
            x[3] + h * k[3],
        ]
    };

    for step in 0..n {
        let t = time_at(step, dt);
        let x = xs[step];
        let lagged = |xs: &[[T; 4]], fs: &[[T; 4]], ts: T, stage: &[T; 4]| -> (T, T) {
            let hist = DenseHistory { xs, fs, dt, phi };
            let cort = if tau1 == T::zero() {
                stage[CORT]
            } else {
                hist.at(ts - tau1, CORT)
            };
            let acth = if tau2 == T::zero() {
                stage[ACTH]
            } else {
                hist.at(ts - tau2, ACTH)
            };
            (cort, acth)
        };

        // k1 is the derivative at the grid point; the Hermite interpolant needs it
        // before any later stage can look back across this step.
        let (c1, a1) = lagged(&xs, &fs, t, &x);
        let k1 = rhs(&x, c1, a1);
        fs.push(k1);

        let x2 = shifted(&x, &k1, half);
        let (c2, a2) = lagged(&xs, &fs, t + half, &x2);
        let k2 = rhs(&x2, c2, a2);

        let x3 = shifted(&x, &k2, half);
        let (c3, a3) = lagged(&xs, &fs, t + half, &x3);
        let k3 = rhs(&x3, c3, a3);

        let x4 = shifted(&x, &k3, dt);
        let (c4, a4) = lagged(&xs, &fs, t + dt, &x4);
        let k4 = rhs(&x4, c4, a4);

        let mut next = [T::zero(); 4];
        for i in 0..4 {
            next[i] = x[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        settle(&mut next, t + dt)?;
        xs.push(next);
    }

    Ok(Trajectory {
        times: (0..=n).map(|k| time_at(k, dt)).collect(),
        states: xs.into_iter().map(State::from_array).collect(),
    })
}
