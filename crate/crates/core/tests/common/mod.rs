#![allow(dead_code)]

use hpa_dyn::model::{
    linearize, solve_equilibria_default, GrLevel, LinearizationCoeffs, ModelParams, State,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub fn reference() -> ModelParams<f64> {
    ModelParams::reference()
}

pub fn equilibrium(level: GrLevel) -> State<f64> {
    solve_equilibria_default(&reference())
        .unwrap()
        .by_level(level)
        .unwrap()
        .state
}

pub fn coeffs_at(level: GrLevel) -> LinearizationCoeffs<f64> {
    linearize(&reference(), &equilibrium(level))
}

/// High-GR equilibrium with CRH raised by 1e-3.
pub fn perturbed_high() -> State<f64> {
    let mut s = equilibrium(GrLevel::High);
    s.crh += 1e-3;
    s
}

/// Roots of a polynomial (ascending coefficients) from the companion matrix.
pub fn companion_roots(asc: &[f64]) -> Vec<Complex64> {
    let n = asc.len() - 1;
    let lead = asc[n];
    if n == 0 {
        return Vec::new();
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -asc[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

pub fn max_real_part(asc: &[f64]) -> f64 {
    companion_roots(asc)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Random parameter set with every field uniform in `[lo, hi]`.
pub fn random_params(rng: &mut impl Rng, lo: f64, hi: f64) -> ModelParams<f64> {
    let mut u = || rng.gen_range(lo..=hi);
    ModelParams {
        a1: u(),
        a2: u(),
        a3: u(),
        b1: u(),
        b2: u(),
        b3: u(),
        c1: u(),
        c2: u(),
        c3: u(),
        c4: u(),
        d1: u(),
        d2: u(),
    }
}

/// Characteristic coefficients of a random linearization-shaped system.
pub fn random_coeffs(rng: &mut impl Rng) -> LinearizationCoeffs<f64> {
    let mut u = |lo: f64, hi: f64| rng.gen_range(lo..=hi);
    LinearizationCoeffs::from_entries(
        -u(0.1, 5.0),
        u(0.01, 5.0),
        -u(0.1, 10.0),
        -u(0.01, 5.0),
        u(-2.0, 1.0),
        -u(0.1, 5.0),
        -u(0.01, 5.0),
        -u(0.01, 5.0),
        u(0.01, 10.0),
        u(0.1, 5.0),
    )
}

/// Plain RK4 for the delay-free model, all samples.
pub fn ode_rk4(p: &ModelParams<f64>, x0: State<f64>, dt: f64, steps: usize) -> Vec<[f64; 4]> {
    let f = |x: [f64; 4]| {
        let s = State::from_array(x);
        hpa_dyn::model::vector_field(p, &s, s.cort, s.acth)
    };
    let axpy = |x: [f64; 4], k: [f64; 4], h: f64| std::array::from_fn(|i| x[i] + h * k[i]);
    let mut x = x0.to_array();
    let mut out = vec![x];
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f(axpy(x, k1, dt / 2.0));
        let k3 = f(axpy(x, k2, dt / 2.0));
        let k4 = f(axpy(x, k3, dt));
        x = std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        out.push(x);
    }
    out
}

/// `E_q(-t^q)` summed to 200 terms.
pub fn mittag_leffler_decay(q: f64, t: f64) -> f64 {
    let z = -t.powf(q);
    (0..200)
        .map(|k| z.powi(k) / statrs::function::gamma::gamma(q * k as f64 + 1.0))
        .sum()
}
