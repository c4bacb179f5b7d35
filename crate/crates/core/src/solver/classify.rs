use serde::{Deserialize, Serialize};

use super::{SolverError, Trajectory};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailVerdict {
    Converging,
    Oscillating,
    Undetermined,
}

/// Long-run behaviour of CORT after the transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailClass<T> {
    #[serde(rename = "class")]
    pub verdict: TailVerdict,
    /// Peak-to-peak CORT amplitude over the second half of the tail.
    pub amplitude: T,
    /// Peak-to-peak CORT amplitude over the first half of the tail.
    pub earlier_amplitude: T,
}

impl<T: Scalar> TailClass<T> {
    /// Whether the tail sits above a Hopf onset: a settled oscillation, or an
    /// undetermined tail whose amplitude is not shrinking.
    pub fn above_onset(&self) -> bool {
        match self.verdict {
            TailVerdict::Oscillating => true,
            TailVerdict::Converging => false,
            TailVerdict::Undetermined => self.amplitude >= self.earlier_amplitude,
        }
    }
}

fn tail<T: Scalar>(traj: &Trajectory<T>, transient_fraction: T) -> Result<Vec<T>, SolverError> {
    let skip = (T::from_usize(traj.len()).unwrap() * transient_fraction)
        .floor()
        .to_usize()
        .unwrap_or(0);
    let rest: Vec<T> = traj.cort().skip(skip).collect();
    if rest.len() <= 100 {
        return Err(SolverError::TooShort(rest.len()));
    }
    Ok(rest)
}

fn peak_to_peak<T: Scalar>(xs: &[T]) -> T {
    let (lo, hi) = xs
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    hi - lo
}

/// Classifies the CORT tail: after dropping the first `transient_fraction` of the
/// samples, the rest is split in halves with peak-to-peak amplitudes `A₁`, `A₂`.
/// Converging if `A₂ < max(1e-4, A₁/2)`; Oscillating if `A₂ > 1e-3` and
/// `|A₂ − A₁| < 0.2 A₁`; Undetermined otherwise.
pub fn classify_tail<T: Scalar>(
    traj: &Trajectory<T>,
    transient_fraction: T,
) -> Result<TailClass<T>, SolverError> {
    let rest = tail(traj, transient_fraction)?;
    let (first, second) = rest.split_at(rest.len() / 2);
    let a1 = peak_to_peak(first);
    let a2 = peak_to_peak(second);
    let verdict = if a2 < T::lit(1e-4).max(a1 * T::lit(0.5)) {
        TailVerdict::Converging
    } else if a2 > T::lit(1e-3) && (a2 - a1).abs() < T::lit(0.2) * a1 {
        TailVerdict::Oscillating
    } else {
        TailVerdict::Undetermined
    };
    Ok(TailClass {
        verdict,
        amplitude: a2,
        earlier_amplitude: a1,
    })
}

/// Mean spacing of upward crossings of the tail mean by CORT, with crossing times
/// linearly interpolated. `None` with fewer than two crossings.
pub fn tail_period<T: Scalar>(traj: &Trajectory<T>, transient_fraction: T) -> Option<T> {
    let skip = traj.len() - tail(traj, transient_fraction).ok()?.len();
    let cort: Vec<T> = traj.cort().skip(skip).collect();
    let times = &traj.times[skip..];
    let mean = cort.iter().fold(T::zero(), |s, &x| s + x) / T::from_usize(cort.len())?;
    let crossings: Vec<T> = cort
        .windows(2)
        .zip(times.windows(2))
        .filter(|(x, _)| x[0] < mean && x[1] >= mean)
        .map(|(x, t)| t[0] + (t[1] - t[0]) * (mean - x[0]) / (x[1] - x[0]))
        .collect();
    if crossings.len() < 2 {
        return None;
    }
    let n = T::from_usize(crossings.len() - 1)?;
    Some((crossings[crossings.len() - 1] - crossings[0]) / n)
}
