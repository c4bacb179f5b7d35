//! Fixed-step time integration of the delayed and fractional models.
//!
//! * [`simulate_dde`]: two discrete lags, classical RK4 by the method of steps with
//!   cubic Hermite interpolation of the stored solution at off-grid lag times.
//! * [`simulate_chain`]: two integer-shape gamma kernels, reduced to ODEs by the
//!   linear chain trick and integrated with RK4.
//! * [`simulate_fractional`]: Caputo derivatives of order `q ∈ (0, 1]` with two
//!   grid-aligned discrete lags, fractional Adams–Bashforth–Moulton.
//!
//! All histories are constant on the pre-interval.

mod chain;
mod classify;
mod dde;
mod fractional;
mod onset;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{DelayKernel, KernelError};
use crate::model::{ModelError, ModelParams, State};
use crate::Scalar;

pub use chain::{simulate_chain, simulate_chain_stages, ChainRun};
pub use classify::{classify_tail, tail_period, TailClass, TailVerdict};
pub use dde::simulate_dde;
pub use fractional::{caputo_abm, simulate_fractional};
pub use onset::{hopf_onset_search, OnsetEstimate, OnsetProbe};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("step {dt} too large for delay scale {scale}")]
    StepTooLarge { dt: f64, scale: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("delay {tau} is not a multiple of the step {dt}")]
    DelayNotGridAligned { tau: f64, dt: f64 },
    #[error("unsupported kernel configuration: {0}")]
    UnsupportedKernels(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("only {0} samples remain after the transient cut; need more than 100")]
    TooShort(usize),
    #[error(
        "bracket [{lo}, {hi}] does not straddle the onset: {lo_class:?} at lo, {hi_class:?} at hi"
    )]
    BracketInvalid {
        lo: f64,
        hi: f64,
        lo_class: TailVerdict,
        hi_class: TailVerdict,
    },
}

/// Settings shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub t_end: T,
    pub dt: T,
    /// Caputo order; 1 for the integer-order model.
    pub order_q: T,
    /// First kernel filters CORT (feedback on CRH, ACTH, GR); second filters ACTH
    /// (drive of CORT).
    pub kernels: (DelayKernel<T>, DelayKernel<T>),
    /// Constant value of the solution before `t = 0`.
    pub history: State<T>,
    /// Leading fraction of samples discarded by the tail classifier.
    pub transient_fraction: T,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(kernels: (DelayKernel<T>, DelayKernel<T>), history: State<T>) -> Self {
        Self {
            t_end: T::lit(5000.0),
            dt: T::lit(0.01),
            order_q: T::one(),
            kernels,
            history,
            transient_fraction: T::lit(0.5),
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }

    fn validate_common(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.order_q > T::zero() && self.order_q <= T::one()) {
            return bad(format!("order q must lie in (0, 1], got {}", self.order_q));
        }
        if !(self.transient_fraction >= T::zero() && self.transient_fraction < T::one()) {
            return bad(format!(
                "transient fraction must lie in [0, 1), got {}",
                self.transient_fraction
            ));
        }
        if self
            .history
            .to_array()
            .iter()
            .any(|&c| !(c.is_finite() && c >= T::zero()))
        {
            return bad("history must be finite and non-negative".into());
        }
        self.kernels.0.validate()?;
        self.kernels.1.validate()?;
        let longest = self.kernels.0.mean_delay().max(self.kernels.1.mean_delay());
        if self.t_end < T::lit(10.0) * longest {
            return bad(format!(
                "t_end = {} shorter than ten mean delays ({})",
                self.t_end, longest
            ));
        }
        Ok(())
    }

    fn dirac_lags(&self) -> Result<(T, T), SolverError> {
        match self.kernels {
            (DelayKernel::Dirac { tau: t1 }, DelayKernel::Dirac { tau: t2 }) => Ok((t1, t2)),
            _ => Err(SolverError::UnsupportedKernels(
                "this solver needs two Dirac kernels".into(),
            )),
        }
    }
}

/// Uniformly sampled solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<State<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&State<T>> {
        self.states.last()
    }

    pub fn cort(&self) -> impl Iterator<Item = T> + '_ {
        self.states.iter().map(|s| s.cort)
    }

    /// Sup-norm distance to another trajectory on the common prefix of samples.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.states
            .iter()
            .zip(&other.states)
            .fold(T::zero(), |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    /// CSV with header `t,crh,acth,gr,cort`, 17 significant digits, LF endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(b"t,crh,acth,gr,cort\n")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t.to_f64_lossy(),
                s.crh.to_f64_lossy(),
                s.acth.to_f64_lossy(),
                s.gr.to_f64_lossy(),
                s.cort.to_f64_lossy()
            )?;
        }
        Ok(())
    }
}

/// Picks the solver matching the kernel pair and order.
pub fn simulate<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>, SolverError> {
    match (cfg.kernels, cfg.order_q == T::one()) {
        ((DelayKernel::Dirac { .. }, DelayKernel::Dirac { .. }), true) => simulate_dde(p, cfg),
        ((DelayKernel::Dirac { .. }, DelayKernel::Dirac { .. }), false) => {
            simulate_fractional(p, cfg)
        }
        ((DelayKernel::Gamma { .. }, DelayKernel::Gamma { .. }), true) => simulate_chain(p, cfg),
        (_, true) => Err(SolverError::UnsupportedKernels(
            "mixed Dirac/Gamma kernel pairs are not simulated".into(),
        )),
        (_, false) => Err(SolverError::UnsupportedKernels(
            "fractional order requires two Dirac kernels".into(),
        )),
    }
}

/// Undershoot below zero tolerated and floored.
const FLOOR_SLACK: f64 = 1e-9;

/// Rejects non-finite states and floors tiny negative undershoots at zero.
fn settle<T: Scalar>(x: &mut [T], t: T) -> Result<(), SolverError> {
    let slack = -T::lit(FLOOR_SLACK);
    for c in x.iter_mut() {
        if !c.is_finite() {
            return Err(SolverError::NonFiniteState {
                t: t.to_f64_lossy(),
            });
        }
        if *c < T::zero() {
            if *c >= slack {
                *c = T::zero();
            } else {
                log::warn!("component {} below zero at t = {}", c, t);
            }
        }
    }
    Ok(())
}

fn time_at<T: Scalar>(k: usize, dt: T) -> T {
    T::from_usize(k).unwrap() * dt
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let tr = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![State::new(1.0, 0.1, 0.2, 1.0 / 3.0); 2],
        };
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.split('\n');
        assert_eq!(lines.next(), Some("t,crh,acth,gr,cort"));
        let row = lines.next().unwrap();
        let last: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(last, 1.0 / 3.0);
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn settle_floors_small_undershoot_only() {
        let mut x = [-1e-12, 0.5, -1e-3, 0.0];
        settle(&mut x, 1.0).unwrap();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[2], -1e-3);
        let mut y = [f64::NAN, 0.0, 0.0, 0.0];
        assert!(matches!(
            settle(&mut y, 2.0),
            Err(SolverError::NonFiniteState { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let h = State::new(1.0, 1.0, 1.0, 1.0);
        let mut cfg = SimConfig::new((DelayKernel::dirac(25.0), DelayKernel::dirac(6.0)), h);
        assert!(cfg.validate_common().is_ok());
        cfg.t_end = 100.0;
        assert!(cfg.validate_common().is_err());
        cfg.t_end = 5000.0;
        cfg.order_q = 1.5;
        assert!(cfg.validate_common().is_err());
    }

    #[test]
    fn dispatch_rejects_mixed_pairs() {
        let p = ModelParams::<f64>::reference();
        let h = State::new(0.6, 0.05, 0.5, 0.05);
        let cfg = SimConfig::new((DelayKernel::dirac(1.0), DelayKernel::weak_gamma(1.0)), h);
        assert!(matches!(
            simulate(&p, &cfg),
            Err(SolverError::UnsupportedKernels(_))
        ));
    }
}
