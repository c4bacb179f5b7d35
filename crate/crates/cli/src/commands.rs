use std::fs::File;
use std::io::{BufWriter, Write};

use hpa_dyn::chareq::{
    dirac_critical_delays, gamma_hopf_search, mixed_critical_delays, no_delay_stability,
    weak_gamma_stability, StabilityReport,
};
use hpa_dyn::kernel::DelayKernel;
use hpa_dyn::model::{
    default_acth_bracket, linearize, solve_equilibria, Equilibrium, EquilibriumSet, GrLevel, State,
    DEFAULT_GRID_N,
};
use hpa_dyn::solver::{classify_tail, simulate, tail_period, SimConfig, TailVerdict};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{KernelChoice, RunConfig};
use crate::error::CliError;

pub const MAX_SWEEP_CELLS: usize = 10_000;

fn equilibria(cfg: &RunConfig) -> Result<EquilibriumSet<f64>, CliError> {
    let bracket = cfg
        .acth_bracket
        .unwrap_or_else(|| default_acth_bracket(&cfg.params));
    Ok(solve_equilibria(
        &cfg.params,
        bracket,
        cfg.grid_n.unwrap_or(DEFAULT_GRID_N),
    )?)
}

fn chosen_equilibrium(cfg: &RunConfig) -> Result<Equilibrium<f64>, CliError> {
    let level = GrLevel::from(cfg.equilibrium);
    equilibria(cfg)?.by_level(level).copied().ok_or_else(|| {
        CliError::Numerical(format!("no {level:?} GR equilibrium for these parameters"))
    })
}

fn history(cfg: &RunConfig) -> Result<State<f64>, CliError> {
    if let Some(h) = cfg.history {
        return Ok(h);
    }
    let mut h = chosen_equilibrium(cfg)?.state;
    h.crh += cfg.perturbation;
    Ok(h)
}

fn kernels(cfg: &RunConfig) -> Result<(DelayKernel<f64>, DelayKernel<f64>), CliError> {
    Ok(match cfg.kernel {
        KernelChoice::None => (DelayKernel::dirac(0.0), DelayKernel::dirac(0.0)),
        KernelChoice::Dirac => (DelayKernel::dirac(cfg.tau1), DelayKernel::dirac(cfg.tau2)),
        KernelChoice::Gamma => {
            let a = cfg.rate()?;
            (DelayKernel::weak_gamma(a), DelayKernel::weak_gamma(a))
        }
        KernelChoice::Mixed => (
            DelayKernel::dirac(cfg.tau1),
            DelayKernel::weak_gamma(cfg.mixed_rate()?),
        ),
    })
}

fn sim_config(cfg: &RunConfig) -> Result<SimConfig<f64>, CliError> {
    let mut sc = SimConfig::new(kernels(cfg)?, history(cfg)?);
    sc.order_q = cfg.q;
    sc.dt = cfg.dt;
    sc.t_end = cfg.t_end;
    sc.transient_fraction = cfg.transient_fraction;
    Ok(sc)
}

/// Writes `text` to stdout and, when configured, to the output file.
fn emit_json<T: Serialize>(cfg: &RunConfig, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("cannot serialise report: {e}")))?;
    text.push('\n');
    if let Some(path) = &cfg.output {
        std::fs::write(path, &text)?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

pub fn cmd_equilibria(cfg: &RunConfig) -> Result<(), CliError> {
    let set = equilibria(cfg)?;
    log::info!("{} equilibria", set.equilibria.len());
    emit_json(cfg, &set)
}

#[derive(Serialize)]
struct StabilityOutput {
    kernel: KernelChoice,
    equilibrium: Equilibrium<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a20: Option<f64>,
    report: StabilityReport<f64>,
    /// Rate at which the weak gamma verdict switches, if one lies in the bracket.
    #[serde(skip_serializing_if = "Option::is_none")]
    hopf_rate: Option<Option<f64>>,
}

pub fn cmd_stability(cfg: &RunConfig) -> Result<(), CliError> {
    let equilibrium = chosen_equilibrium(cfg)?;
    let c = linearize(&cfg.params, &equilibrium.state);
    let mut out = StabilityOutput {
        kernel: cfg.kernel,
        equilibrium,
        a: None,
        a20: None,
        report: no_delay_stability(&c),
        hopf_rate: None,
    };
    match cfg.kernel {
        KernelChoice::None => {}
        KernelChoice::Dirac => out.report = dirac_critical_delays(&c, cfg.j_max)?,
        KernelChoice::Mixed => {
            let a20 = cfg.mixed_rate()?;
            out.a20 = Some(a20);
            out.report = mixed_critical_delays(&c, a20, cfg.j_max)?;
        }
        KernelChoice::Gamma => {
            let a = cfg.rate()?;
            out.a = Some(a);
            out.report = weak_gamma_stability(&c, a)?;
            out.hopf_rate = Some(gamma_hopf_search(&c, cfg.gamma_bracket)?);
        }
    }
    emit_json(cfg, &out)
}

#[derive(Serialize)]
struct SimulationSummary {
    class: TailVerdict,
    amplitude: f64,
    earlier_amplitude: f64,
    period: Option<f64>,
    samples: usize,
    final_state: State<f64>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let sc = sim_config(cfg)?;
    let traj = simulate(&cfg.params, &sc)?;
    let class = classify_tail(&traj, sc.transient_fraction)?;
    if let Some(path) = &cfg.output {
        let mut w = BufWriter::new(File::create(path)?);
        traj.write_csv(&mut w)?;
        w.flush()?;
    }
    let summary = SimulationSummary {
        class: class.verdict,
        amplitude: class.amplitude,
        earlier_amplitude: class.earlier_amplitude,
        period: tail_period(&traj, sc.transient_fraction),
        samples: traj.len(),
        final_state: *traj.last().expect("non-empty trajectory"),
    };
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Numerical(format!("cannot serialise summary: {e}")))?;
    text.push('\n');
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    tau1: f64,
    tau2: f64,
    q: f64,
}

/// Worker count: `HPA_DYN_THREADS` if set, else every available core.
fn thread_cap() -> Result<usize, CliError> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("HPA_DYN_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!(
                "HPA_DYN_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(available),
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.kernel != KernelChoice::Dirac {
        return Err(CliError::Config(
            "sweep runs over Dirac lags; set kernel to `dirac`".into(),
        ));
    }
    let grid = cfg.sweep.clone().unwrap_or_default();
    let n = grid.q.len() * grid.tau_total.len();
    if n > MAX_SWEEP_CELLS {
        return Err(CliError::Config(format!(
            "{n} cells exceed the limit of {MAX_SWEEP_CELLS}"
        )));
    }
    let mut cells = Vec::with_capacity(n);
    for &q in &grid.q {
        for &total in &grid.tau_total {
            let tau2 = total - cfg.tau1;
            if !(tau2 >= 0.0 && tau2.is_finite()) {
                return Err(CliError::Config(format!(
                    "total lag {total} is below tau1 = {}",
                    cfg.tau1
                )));
            }
            cells.push(Cell {
                tau1: cfg.tau1,
                tau2,
                q,
            });
        }
    }
    let base = if cells.is_empty() {
        None
    } else {
        Some(sim_config(cfg)?)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?)
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    let results: Vec<Result<(TailVerdict, f64), CliError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let mut sc = base.expect("cells imply a base config");
                sc.kernels = (DelayKernel::dirac(cell.tau1), DelayKernel::dirac(cell.tau2));
                sc.order_q = cell.q;
                let traj = simulate(&cfg.params, &sc)?;
                let class = classify_tail(&traj, sc.transient_fraction)?;
                log::info!("tau2 = {}, q = {}: {:?}", cell.tau2, cell.q, class.verdict);
                Ok((class.verdict, class.amplitude))
            })
            .collect()
    });

    let mut csv = String::from("tau1,tau2,tau_total,q,verdict,amplitude\n");
    for (cell, result) in cells.iter().zip(results) {
        let (verdict, amplitude) = result?;
        csv.push_str(&format!(
            "{},{},{},{},{:?},{:.16e}\n",
            cell.tau1,
            cell.tau2,
            cell.tau1 + cell.tau2,
            cell.q,
            verdict,
            amplitude
        ));
    }
    match &cfg.output {
        Some(path) => std::fs::write(path, csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}
