use serde::{Deserialize, Serialize};

use super::{classify_tail, simulate, SimConfig, SolverError, TailClass, TailVerdict};
use crate::kernel::DelayKernel;
use crate::model::ModelParams;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnsetProbe<T> {
    pub tau2: T,
    pub class: TailClass<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsetEstimate<T> {
    /// Midpoint of the final bracket on the ACTH-drive lag.
    pub tau2: T,
    /// `τ₁ + τ₂` at the estimate.
    pub tau_total: T,
    /// Final bracket on `τ₂`.
    pub bracket: (T, T),
    pub probes: Vec<OnsetProbe<T>>,
}

const ONSET_WIDTH: f64 = 0.25;

/// Locates the lag `τ₂` (ACTH drive) at which the simulated equilibrium gives way
/// to a sustained oscillation, with `τ₁` and the order taken from `base`.
///
/// The lower end of the bracket must classify as Converging and the upper end as
/// Oscillating. Bisection stops at width 0.25; probe lags are snapped to the time
/// grid so the fractional solver's alignment requirement holds. An Undetermined
/// probe counts as above the onset when its tail amplitude is not shrinking.
pub fn hopf_onset_search<T: Scalar>(
    p: &ModelParams<T>,
    base: &SimConfig<T>,
    tau2_bracket: (T, T),
) -> Result<OnsetEstimate<T>, SolverError> {
    let tau1 = match base.kernels.0 {
        DelayKernel::Dirac { tau } => tau,
        _ => {
            return Err(SolverError::UnsupportedKernels(
                "onset search needs a Dirac CORT-feedback kernel".into(),
            ))
        }
    };
    let snap = |t: T| (t / base.dt).round() * base.dt;
    let (mut lo, mut hi) = (snap(tau2_bracket.0), snap(tau2_bracket.1));
    if !(lo >= T::zero() && hi > lo) {
        return Err(SolverError::InvalidConfig(format!(
            "onset bracket [{}, {}] is empty",
            tau2_bracket.0, tau2_bracket.1
        )));
    }

    let mut probes = Vec::new();
    let mut probe = |tau2: T| -> Result<TailClass<T>, SolverError> {
        let mut cfg = *base;
        cfg.kernels.1 = DelayKernel::dirac(tau2);
        let traj = simulate(p, &cfg)?;
        let class = classify_tail(&traj, cfg.transient_fraction)?;
        log::debug!("onset probe tau2 = {tau2}: {class:?}");
        probes.push(OnsetProbe { tau2, class });
        Ok(class)
    };

    let lo_class = probe(lo)?;
    let hi_class = probe(hi)?;
    if lo_class.verdict != TailVerdict::Converging || hi_class.verdict != TailVerdict::Oscillating {
        return Err(SolverError::BracketInvalid {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            lo_class: lo_class.verdict,
            hi_class: hi_class.verdict,
        });
    }

    let two = T::lit(2.0);
    while hi - lo > T::lit(ONSET_WIDTH) {
        let mid = snap((lo + hi) / two);
        if mid <= lo || mid >= hi {
            break;
        }
        if probe(mid)?.above_onset() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tau2 = (lo + hi) / two;
    Ok(OnsetEstimate {
        tau2,
        tau_total: tau1 + tau2,
        bracket: (lo, hi),
        probes,
    })
}
