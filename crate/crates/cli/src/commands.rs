//! The experiment and validation commands. Each returns a table and, for
//! sweeps, the reported optima.

use rayon::prelude::*;

use mdfc_core::bath::{
    dissipation_kernel, dissipation_kernel_quadrature, noise_kernel, noise_kernel_quadrature, BathSpec,
};
use mdfc_core::evolve::{lindblad_propagate, propagate_hybrid, step_halving_error, SimConfig, STEP_TOL};
use mdfc_core::metrics::sweep::sweep as run_sweep;
use mdfc_core::metrics::{
    mixed_state_fidelity, mixed_state_series, pair_average_fidelity, pair_fidelity_series, preparation_average,
    purity, unknown_state_average, unknown_state_series,
};
use mdfc_core::oracle::{exact_dephasing, mc_trajectories};
use mdfc_core::qmat::{DensityMatrix, Ket2};
use mdfc_core::scheme::{preparation_scheme, FeedbackScheme};

use crate::config::{Config, Objective, SchemeKind};
use crate::output::{Cell, OptimumRecord, Table};
use crate::CliError;

pub const EXACT_DEPHASING_TOL: f64 = 1e-3;
pub const UNRAVELLING_Z: f64 = 3.0;
pub const KERNEL_TOL: f64 = 1e-8;
pub const TRACE_TOL: f64 = 1e-8;
/// τ samples of the kernel cross-check.
const KERNEL_SAMPLES: usize = 41;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub optima: Option<Vec<OptimumRecord>>,
    /// Names of failed validation checks.
    pub failed: Vec<String>,
}

impl Outcome {
    fn table(table: Table) -> Self {
        Outcome { table, optima: None, failed: Vec::new() }
    }
}

fn stage<T>(name: &str, r: mdfc_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Solver { stage: name.to_string(), source })
}

fn template(cfg: &Config) -> Result<SimConfig, CliError> {
    cfg.sim_config(cfg.feedback_scheme()?)
}

pub fn prepare(cfg: &Config) -> Result<Outcome, CliError> {
    if cfg.scheme.kind != SchemeKind::Preparation {
        return Err(CliError::Config("scheme.kind: prepare needs \"preparation\"".into()));
    }
    let tpl = template(cfg)?;
    let etas = cfg.eta_grid()?;
    let values = etas
        .par_iter()
        .map(|&eta| {
            let r = preparation_average(&tpl, eta, cfg.scheme.zeta, cfg.model.radius, tpl.t_max, cfg.sphere_nodes());
            stage("prepare", r)
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let mut table = Table::new(["eta", "avg_fidelity"]);
    for (eta, f) in etas.iter().zip(values) {
        table.push_nums(&[*eta, f]);
    }
    Ok(Outcome::table(table))
}

pub fn purity_curve(cfg: &Config) -> Result<Outcome, CliError> {
    let ts = stage("purity", propagate_hybrid(&template(cfg)?))?;
    let mut table = Table::new(["t", "purity"]);
    for (t, st) in ts.times.iter().zip(&ts.states) {
        table.push_nums(&[*t, purity(st)]);
    }
    Ok(Outcome::table(table))
}

pub fn protect_pair(cfg: &Config) -> Result<Outcome, CliError> {
    let (times, values) = stage("protect-pair", pair_fidelity_series(cfg.scheme.theta, &template(cfg)?))?;
    let mut table = Table::new(["t", "fidelity"]);
    for (t, f) in times.iter().zip(values) {
        table.push_nums(&[*t, f]);
    }
    Ok(Outcome::table(table))
}

pub fn protect_unknown(cfg: &Config) -> Result<Outcome, CliError> {
    let tpl = template(cfg)?;
    let (times, values) = stage("protect-unknown", unknown_state_series(&tpl.scheme, &tpl))?;
    let mut table = Table::new(["t", "avg_fidelity"]);
    for (t, f) in times.iter().zip(values) {
        table.push_nums(&[*t, f]);
    }
    Ok(Outcome::table(table))
}

pub fn protect_mixed(cfg: &Config) -> Result<Outcome, CliError> {
    let etas = cfg.eta_grid()?;
    let curves = etas
        .par_iter()
        .map(|&eta| {
            let tpl = cfg.sim_config(cfg.mixed_family(eta)?)?;
            stage("protect-mixed", mixed_state_series(cfg.scheme.theta, cfg.scheme.p_plus, &tpl))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(["eta", "t", "fidelity"]);
    for (eta, (times, values)) in etas.iter().zip(curves) {
        for (t, f) in times.iter().zip(values) {
            table.push_nums(&[*eta, *t, f]);
        }
    }
    Ok(Outcome::table(table))
}

/// Scalar figure of merit at `solver.t_max` for the given configuration.
pub fn objective_value(objective: Objective, cfg: &Config) -> Result<f64, CliError> {
    let s = &cfg.scheme;
    match objective {
        Objective::Prepare => {
            let tpl = cfg.sim_config(stage("prepare", preparation_scheme(s.eta, s.zeta, s.rate))?)?;
            stage("prepare", preparation_average(&tpl, s.eta, s.zeta, cfg.model.radius, tpl.t_max, cfg.sphere_nodes()))
        }
        Objective::Purity => Ok(purity(stage("purity", propagate_hybrid(&template(cfg)?))?.last())),
        Objective::ProtectPair => {
            let tpl = template(cfg)?;
            stage("protect-pair", pair_average_fidelity(s.theta, &tpl, tpl.t_max))
        }
        Objective::ProtectUnknown => {
            let tpl = template(cfg)?;
            stage("protect-unknown", unknown_state_average(&tpl.scheme, &tpl, tpl.t_max))
        }
        Objective::ProtectMixed => {
            let tpl = cfg.sim_config(cfg.mixed_family(s.eta)?)?;
            stage("protect-mixed", mixed_state_fidelity(s.theta, s.p_plus, &tpl, tpl.t_max))
        }
    }
}

pub fn sweep(cfg: &Config) -> Result<Outcome, CliError> {
    let objective = cfg
        .sweep
        .objective
        .ok_or_else(|| CliError::Config("sweep.objective: required by the sweep command".into()))?;
    if cfg.sweep.axes.is_empty() {
        return Err(CliError::Config("sweep.axes: at least one axis is required".into()));
    }
    let axes = cfg.sweep.axes.iter().map(|a| a.to_axis()).collect::<Result<Vec<_>, _>>()?;
    let eval = |point: &[f64]| -> Result<f64, CliError> {
        let mut c = cfg.clone();
        for (axis, &x) in axes.iter().zip(point) {
            c = c.with_param(&axis.name, x)?;
        }
        c.validate()?;
        objective_value(objective, &c)
    };
    // The core optimizer speaks core errors; CLI errors are carried through
    // a side slot and restored afterwards.
    let first_error = std::sync::Mutex::new(None::<CliError>);
    let result = run_sweep(
        |p: &[f64]| {
            eval(p).map_err(|e| {
                let msg = e.to_string();
                first_error.lock().expect("error slot").get_or_insert(e);
                mdfc_core::Error::InvalidConfig(msg)
            })
        },
        &axes,
        cfg.sweep.refine_tol,
    );
    let result = match result {
        Ok(r) => r,
        Err(source) => {
            return Err(first_error
                .into_inner()
                .expect("error slot")
                .unwrap_or(CliError::Solver { stage: "sweep".into(), source }))
        }
    };
    let mut table = Table::new(axes.iter().map(|a| a.name.clone()).chain(["value".to_string()]));
    for (point, v) in result.grid.iter().zip(&result.values) {
        let mut row = point.clone();
        row.push(*v);
        table.push_nums(&row);
    }
    let optima = result.optima.iter().map(|o| OptimumRecord { point: o.point.clone(), value: o.value }).collect();
    Ok(Outcome { table, optima: Some(optima), failed: Vec::new() })
}

struct Check {
    name: &'static str,
    max_error: f64,
    tolerance: f64,
}

impl Check {
    fn passes(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn check_exact_dephasing(cfg: &Config, bath: &BathSpec) -> Result<Check, CliError> {
    let initial = DensityMatrix::pure(&Ket2::plus());
    let sim = SimConfig {
        initial,
        scheme: FeedbackScheme::do_nothing(),
        ..template(cfg)?
    };
    let ts = stage("exact_dephasing", propagate_hybrid(&sim))?;
    let mut worst: f64 = 0.0;
    for (t, st) in ts.times.iter().zip(&ts.states) {
        let exact = stage("exact_dephasing", exact_dephasing(&initial, *t, sim.omega_0, bath))?;
        let want = exact.mat()[(0, 1)];
        worst = worst.max((st.mat()[(0, 1)] - want).norm() / want.norm());
    }
    Ok(Check { name: "exact_dephasing", max_error: worst, tolerance: EXACT_DEPHASING_TOL })
}

fn check_unravelling(cfg: &Config, seed: u64) -> Result<Check, CliError> {
    let mut sim = template(cfg)?;
    sim.bath = stage("unravelling", sim.bath.with_alpha(0.0))?;
    sim.record_every = 1;
    let mc = stage("unravelling", mc_trajectories(&sim, cfg.solver.n_traj, seed))?;
    let exact = stage("unravelling", lindblad_propagate(&sim))?;
    let mut worst: f64 = 0.0;
    for q in 1..=4 {
        let target = sim.t_max * q as f64 / 4.0;
        let k = (0..mc.times.len())
            .min_by(|&a, &b| (mc.times[a] - target).abs().total_cmp(&(mc.times[b] - target).abs()))
            .expect("recording grid is non-empty");
        let (a, b) = (mc.mean_states[k].mat(), exact.states[k].mat());
        for (c, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let d = a[(i, j)] - b[(i, j)];
            for (diff, se) in [(d.re, mc.component_stderr[k][2 * c]), (d.im, mc.component_stderr[k][2 * c + 1])] {
                let z = if se > 0.0 {
                    diff.abs() / se
                } else if diff.abs() <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
    }
    Ok(Check { name: "unravelling", max_error: worst, tolerance: UNRAVELLING_Z })
}

fn check_kernels(cfg: &Config, bath: &BathSpec) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for k in 0..KERNEL_SAMPLES {
        let tau = cfg.solver.t_max * k as f64 / (KERNEL_SAMPLES - 1) as f64;
        let nu = stage("kernel_quadrature", noise_kernel(tau, bath))?;
        let nu_q = stage("kernel_quadrature", noise_kernel_quadrature(tau, bath))?;
        let eta_q = stage("kernel_quadrature", dissipation_kernel_quadrature(tau, bath))?;
        worst = worst.max((nu - nu_q).abs()).max((dissipation_kernel(tau, bath) - eta_q).abs());
    }
    Ok(Check { name: "kernel_quadrature", max_error: worst, tolerance: KERNEL_TOL })
}

fn check_trace(sim: &SimConfig) -> Result<Check, CliError> {
    let ts = stage("trace_preservation", propagate_hybrid(sim))?;
    let worst = ts.states.iter().map(|s| s.report().trace_defect).fold(0.0, f64::max);
    Ok(Check { name: "trace_preservation", max_error: worst, tolerance: TRACE_TOL })
}

/// Oracle cross-checks. A failed check is reported in the table and in
/// `failed`; solver errors abort.
pub fn validate(cfg: &Config, seed: u64) -> Result<Outcome, CliError> {
    let sim = template(cfg)?;
    let bath = sim.bath;
    let step = Check {
        name: "step_convergence",
        max_error: stage("step_convergence", step_halving_error(&sim))?,
        tolerance: STEP_TOL,
    };
    let checks = [
        check_exact_dephasing(cfg, &bath)?,
        check_unravelling(cfg, seed)?,
        step,
        check_kernels(cfg, &bath)?,
        check_trace(&sim)?,
    ];
    let mut table = Table::new(["check_name", "max_error", "tolerance", "pass"]);
    let mut failed = Vec::new();
    for c in &checks {
        if !c.passes() {
            failed.push(c.name.to_string());
        }
        table.push(vec![Cell::Text(c.name.into()), Cell::Num(c.max_error), Cell::Num(c.tolerance), Cell::Flag(c.passes())]);
    }
    Ok(Outcome { table, optima: None, failed })
}
