use super::{settle, time_at, SimConfig, SolverError, Trajectory};
use crate::kernel::DelayKernel;
use crate::model::{vector_field, ModelParams, State};
use crate::Scalar;

/// Result of a chain-trick run: the model trajectory plus, for every grid point,
/// the auxiliary filter stages (CORT chain first, then ACTH chain).
#[derive(Debug, Clone)]
pub struct ChainRun<T> {
    pub trajectory: Trajectory<T>,
    pub cort_stages: usize,
    pub acth_stages: usize,
    pub stages: Vec<Vec<T>>,
}

impl<T: Scalar> ChainRun<T> {
    /// First-stage filtered CORT, i.e. CORT convolved with an exponential of rate
    /// `1/β₁`, at every grid point.
    pub fn first_cort_stage(&self) -> impl Iterator<Item = T> + '_ {
        self.stages.iter().map(|s| s[0])
    }
}

/// Gamma-kernel model via the linear chain trick; see [`simulate_chain_stages`].
pub fn simulate_chain<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>, SolverError> {
    simulate_chain_stages(p, cfg).map(|r| r.trajectory)
}

fn stages_of<T: Scalar>(k: &DelayKernel<T>) -> Result<(usize, T), SolverError> {
    match *k {
        DelayKernel::Gamma { scale, .. } => k
            .chain_stages()
            .map(|n| (n, scale))
            .ok_or_else(|| SolverError::UnsupportedKernels(format!("{k:?} has non-integer shape"))),
        DelayKernel::Dirac { .. } => Err(SolverError::UnsupportedKernels(
            "chain trick needs Gamma kernels".into(),
        )),
    }
}

/// Integrates the model with Gamma kernels of integer shape `p₁`, `p₂` and scales
/// `β₁`, `β₂`. Each kernel becomes a cascade of linear stages
/// `yₖ' = (yₖ₋₁ − yₖ)/β` fed by the filtered signal, and the last stage replaces
/// the convolution. The augmented system is integrated with RK4; stages start at
/// the constant history.
pub fn simulate_chain_stages<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SimConfig<T>,
) -> Result<ChainRun<T>, SolverError> {
    p.validate()?;
    cfg.validate_common()?;
    if cfg.order_q != T::one() {
        return Err(SolverError::InvalidConfig(
            "chain solver is integer order only".into(),
        ));
    }
    let (n1, beta1) = stages_of(&cfg.kernels.0)?;
    let (n2, beta2) = stages_of(&cfg.kernels.1)?;
    let min_scale = beta1.min(beta2);
    if cfg.dt > min_scale {
        return Err(SolverError::StepTooLarge {
            dt: cfg.dt.to_f64_lossy(),
            scale: min_scale.to_f64_lossy(),
        });
    }

    let dim = 4 + n1 + n2;
    let (rate1, rate2) = (T::one() / beta1, T::one() / beta2);
    let deriv = |y: &[T], dy: &mut [T]| {
        let (cort_chain, acth_chain) = y[4..].split_at(n1);
        let x = State::new(y[0], y[1], y[2], y[3]);
        let f = vector_field(p, &x, cort_chain[n1 - 1], acth_chain[n2 - 1]);
        dy[..4].copy_from_slice(&f);
        let mut upstream = x.cort;
        for k in 0..n1 {
            dy[4 + k] = rate1 * (upstream - cort_chain[k]);
            upstream = cort_chain[k];
        }
        let mut upstream = x.acth;
        for k in 0..n2 {
            dy[4 + n1 + k] = rate2 * (upstream - acth_chain[k]);
            upstream = acth_chain[k];
        }
    };

    let n = cfg.steps();
    let dt = cfg.dt;
    let h = cfg.history;
    let mut y = Vec::with_capacity(dim);
    y.extend_from_slice(&h.to_array());
    y.extend(std::iter::repeat_n(h.cort, n1));
    y.extend(std::iter::repeat_n(h.acth, n2));

    let mut states = Vec::with_capacity(n + 1);
    let mut stages = Vec::with_capacity(n + 1);
    states.push(h);
    stages.push(y[4..].to_vec());

    let mut k = vec![vec![T::zero(); dim]; 4];
    let mut tmp = vec![T::zero(); dim];
    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    for step in 0..n {
        deriv(&y, &mut k[0]);
        for i in 0..dim {
            tmp[i] = y[i] + half * k[0][i];
        }
        deriv(&tmp, &mut k[1]);
        for i in 0..dim {
            tmp[i] = y[i] + half * k[1][i];
        }
        deriv(&tmp, &mut k[2]);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k[2][i];
        }
        deriv(&tmp, &mut k[3]);
        for i in 0..dim {
            y[i] = y[i] + sixth * (k[0][i] + two * k[1][i] + two * k[2][i] + k[3][i]);
        }
        settle(&mut y, time_at(step + 1, dt))?;
        states.push(State::new(y[0], y[1], y[2], y[3]));
        stages.push(y[4..].to_vec());
    }

    Ok(ChainRun {
        trajectory: Trajectory {
            times: (0..=n).map(|k| time_at(k, dt)).collect(),
            states,
        },
        cort_stages: n1,
        acth_stages: n2,
        stages,
    })
}
