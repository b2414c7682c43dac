//! Feedback generator and the hybrid memory-kernel solver.
//!
//! The transformed state `R(t) = e^{−St} ρ(t)` obeys the time-local equation
//! `dR/dt = A(t) R(t)` with `A(t) = ∫₀^t K(t, t') dt'`. Because `A` does not
//! depend on the state, the solver integrates the 4×4 map `U(t)` with
//! `U(0) = I` and recovers `ρ(t) = e^{St} U(t) vec(ρ₀)` for any initial state.

use crate::bath::{complex_kernel, BathSpec};
use crate::error::{Error, Result};
use crate::qmat::{
    expm, left_mult_superop, right_mult_superop, sandwich_superop, Complex2, DensityMatrix, Superop,
    C64,
};
use crate::quad::{gauss_legendre, gauss_legendre_on};
use crate::scheme::{lindblad_ops, FeedbackScheme};

/// Threshold on `R·t_max` above which `e^{−St}` may amplify rounding noise.
pub const CONDITIONING_LIMIT: f64 = 20.0;
/// Largest entry change tolerated when the step is halved.
pub const STEP_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub omega_0: f64,
    pub initial: DensityMatrix,
    pub scheme: FeedbackScheme,
    pub bath: BathSpec,
    pub t_max: f64,
    pub dt: f64,
    pub inner_nodes: usize,
    pub record_every: usize,
}

impl SimConfig {
    pub const DEFAULT_DT: f64 = 0.01;
    pub const DEFAULT_INNER_NODES: usize = 32;
    pub const DEFAULT_RECORD_EVERY: usize = 10;

    /// Configuration with default solver settings.
    pub fn new(
        omega_0: f64,
        initial: DensityMatrix,
        scheme: FeedbackScheme,
        bath: BathSpec,
        t_max: f64,
    ) -> Result<Self> {
        let cfg = SimConfig {
            omega_0,
            initial,
            scheme,
            bath,
            t_max,
            dt: Self::DEFAULT_DT,
            inner_nodes: Self::DEFAULT_INNER_NODES,
            record_every: Self::DEFAULT_RECORD_EVERY,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega_0.is_finite() {
            return Err(Error::InvalidConfig(format!("omega_0 must be finite, got {}", self.omega_0)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::OutOfRange { name: "t_max", value: self.t_max, range: "(0, inf)" });
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::OutOfRange { name: "dt", value: self.dt, range: "(0, inf)" });
        }
        if self.inner_nodes < 4 {
            return Err(Error::OutOfRange {
                name: "inner_nodes",
                value: self.inner_nodes as f64,
                range: "[4, inf)",
            });
        }
        if self.record_every == 0 {
            return Err(Error::OutOfRange { name: "record_every", value: 0.0, range: "[1, inf)" });
        }
        Ok(())
    }

    /// Same run with another initial state.
    pub fn with_initial(&self, initial: DensityMatrix) -> Self {
        SimConfig { initial, ..self.clone() }
    }

    pub fn with_t_max(&self, t_max: f64) -> Result<Self> {
        let cfg = SimConfig { t_max, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn generator(&self) -> Superop {
        feedback_generator(self.omega_0, &lindblad_ops(&self.scheme))
    }

    fn steps(&self) -> usize {
        ((self.t_max / self.dt).round() as usize).max(1)
    }
}

/// Recorded trajectory of the reduced state.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl TimeSeries {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("time series is never empty")
    }
}

/// Dynamical maps `ρ₀ ↦ ρ(t_k)` on the recording grid.
#[derive(Clone, Debug)]
pub struct MapSeries {
    pub times: Vec<f64>,
    pub maps: Vec<Superop>,
    /// Set when `R·t_max` exceeds [`CONDITIONING_LIMIT`].
    pub conditioning_warning: bool,
}

impl MapSeries {
    pub fn apply(&self, initial: &DensityMatrix) -> TimeSeries {
        let states = self
            .maps
            .iter()
            .map(|m| DensityMatrix::from_solver(m.apply(initial.mat())))
            .collect();
        TimeSeries { times: self.times.clone(), states }
    }

    pub fn last(&self) -> &Superop {
        self.maps.last().expect("map series is never empty")
    }
}

/// `Sρ = −i[ω₀σ_z, ρ] + Σ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})`.
pub fn feedback_generator(omega_0: f64, ops: &[Complex2]) -> Superop {
    let h = Complex2::pauli_z().scale_re(omega_0);
    let minus_i = C64::new(0.0, -1.0);
    let mut s = (left_mult_superop(&h) - right_mult_superop(&h)).scale(minus_i);
    for l in ops {
        let ldl = l.adjoint() * *l;
        s = s + sandwich_superop(l, &l.adjoint())
            - (left_mult_superop(&ldl) + right_mult_superop(&ldl)).scale_re(0.5);
    }
    s
}

struct ZSandwich {
    lz_minus_rz: Superop,
    rz: Superop,
    lz: Superop,
}

impl ZSandwich {
    fn new() -> Self {
        let z = Complex2::pauli_z();
        let lz = left_mult_superop(&z);
        let rz = right_mult_superop(&z);
        ZSandwich { lz_minus_rz: lz - rz, rz, lz }
    }

    /// Integrand without the leading `E(−t)`.
    fn inner(&self, tau: f64, t_prime: f64, s: &Superop, bath: &BathSpec) -> Result<Superop> {
        let c = complex_kernel(tau, bath, false)?;
        let e_tau = expm(s, tau)?;
        let e_tp = expm(s, t_prime)?;
        let a = self.lz_minus_rz * e_tau * self.rz;
        let b = (Superop::zero() - self.lz_minus_rz) * e_tau * self.lz;
        Ok((a.scale(c) + b.scale(c.conj())) * e_tp)
    }
}

/// Memory-kernel integrand `K(t, t')` of the hybrid equation.
pub fn kernel_superop(t: f64, t_prime: f64, s: &Superop, bath: &BathSpec) -> Result<Superop> {
    if !(t_prime >= 0.0 && t_prime <= t) {
        return Err(Error::InvalidConfig(format!("kernel needs 0 <= t' <= t, got t = {t}, t' = {t_prime}")));
    }
    let inner = ZSandwich::new().inner(t - t_prime, t_prime, s, bath)?;
    Ok(expm(s, -t)? * inner)
}

struct Coefficient<'a> {
    s: &'a Superop,
    bath: &'a BathSpec,
    rule: crate::quad::Rule,
    z: ZSandwich,
}

impl Coefficient<'_> {
    /// `A(t) = ∫₀^t K(t, t') dt'` by Gauss–Legendre on [0, t].
    fn at(&self, t: f64) -> Result<Superop> {
        if t == 0.0 || self.bath.alpha() == 0.0 {
            return Ok(Superop::zero());
        }
        let mut acc = Superop::zero();
        for (tp, w) in gauss_legendre_on(&self.rule, 0.0, t) {
            acc = acc + self.z.inner(t - tp, tp, self.s, self.bath)?.scale_re(w);
        }
        Ok(expm(self.s, -t)? * acc)
    }
}

fn conditioning_warning(cfg: &SimConfig) -> bool {
    let flag = cfg.scheme.rate() * cfg.t_max > CONDITIONING_LIMIT;
    if flag {
        log::warn!(
            "R*t_max = {:.3} exceeds {CONDITIONING_LIMIT}; e^(-St) may amplify rounding error",
            cfg.scheme.rate() * cfg.t_max
        );
    }
    flag
}

fn recorded(k: usize, n: usize, every: usize) -> bool {
    k.is_multiple_of(every) || k == n
}

/// Times at which every solver path records a state.
pub fn recording_times(cfg: &SimConfig) -> Vec<f64> {
    let n = cfg.steps();
    let h = cfg.t_max / n as f64;
    (0..=n)
        .filter(|&k| recorded(k, n, cfg.record_every))
        .map(|k| if k == n { cfg.t_max } else { k as f64 * h })
        .collect()
}

fn hybrid_maps_on_grid(cfg: &SimConfig, n: usize, every: usize) -> Result<MapSeries> {
    let s = cfg.generator();
    let coeff = Coefficient {
        s: &s,
        bath: &cfg.bath,
        rule: gauss_legendre(cfg.inner_nodes),
        z: ZSandwich::new(),
    };
    let h = cfg.t_max / n as f64;
    let mut u = Superop::identity();
    let mut a_start = coeff.at(0.0)?;
    let mut times = vec![0.0];
    let mut maps = vec![Superop::identity()];
    for k in 0..n {
        let t = k as f64 * h;
        let t_end = if k + 1 == n { cfg.t_max } else { (k + 1) as f64 * h };
        let a_mid = coeff.at(t + 0.5 * h)?;
        let a_end = coeff.at(t_end)?;
        let k1 = a_start * u;
        let k2 = a_mid * (u + k1.scale_re(0.5 * h));
        let k3 = a_mid * (u + k2.scale_re(0.5 * h));
        let k4 = a_end * (u + k3.scale_re(h));
        u = u + (k1 + k2.scale_re(2.0) + k3.scale_re(2.0) + k4).scale_re(h / 6.0);
        if !u.is_finite() {
            return Err(Error::InvalidConfig(format!("hybrid solver diverged at t = {t_end}")));
        }
        a_start = a_end;
        if recorded(k + 1, n, every) {
            times.push(t_end);
            maps.push(expm(&s, t_end)? * u);
        }
    }
    Ok(MapSeries { times, maps, conditioning_warning: conditioning_warning(cfg) })
}

/// Dynamical maps of the hybrid equation on the recording grid.
pub fn hybrid_maps(cfg: &SimConfig) -> Result<MapSeries> {
    cfg.validate()?;
    hybrid_maps_on_grid(cfg, cfg.steps(), cfg.record_every)
}

/// Integrates the hybrid equation from `cfg.initial`.
pub fn propagate_hybrid(cfg: &SimConfig) -> Result<TimeSeries> {
    Ok(hybrid_maps(cfg)?.apply(&cfg.initial))
}

/// Largest entry change of the propagated state when dt is halved.
pub fn step_halving_error(cfg: &SimConfig) -> Result<f64> {
    Ok(halving(cfg)?.1)
}

fn halving(cfg: &SimConfig) -> Result<(MapSeries, f64)> {
    cfg.validate()?;
    let n = cfg.steps();
    let coarse = hybrid_maps_on_grid(cfg, n, cfg.record_every)?;
    let fine = hybrid_maps_on_grid(cfg, 2 * n, 2 * cfg.record_every)?;
    let mut worst = 0.0_f64;
    for (c, f) in coarse.maps.iter().zip(&fine.maps) {
        let d = c.apply(cfg.initial.mat()) - f.apply(cfg.initial.mat());
        worst = worst.max(d.max_abs());
    }
    Ok((coarse, worst))
}

/// Hybrid maps plus a step-halving check on every recorded entry.
pub fn hybrid_maps_checked(cfg: &SimConfig) -> Result<MapSeries> {
    let (coarse, worst) = halving(cfg)?;
    if worst > STEP_TOL {
        return Err(Error::StepConvergence(worst));
    }
    Ok(coarse)
}

/// [`propagate_hybrid`] that fails when halving dt moves any entry by more than
/// [`STEP_TOL`].
pub fn propagate_hybrid_checked(cfg: &SimConfig) -> Result<TimeSeries> {
    Ok(hybrid_maps_checked(cfg)?.apply(&cfg.initial))
}

/// Exact maps `expm(S, t_k)` for a bath-free run.
pub fn lindblad_maps(cfg: &SimConfig) -> Result<MapSeries> {
    cfg.validate()?;
    if cfg.bath.alpha() != 0.0 {
        return Err(Error::InvalidConfig(format!(
            "closed evolution needs alpha = 0, got {}",
            cfg.bath.alpha()
        )));
    }
    let s = cfg.generator();
    let times = recording_times(cfg);
    let maps = times.iter().map(|&t| expm(&s, t)).collect::<Result<Vec<_>>>()?;
    Ok(MapSeries { times, maps, conditioning_warning: conditioning_warning(cfg) })
}

pub fn lindblad_propagate(cfg: &SimConfig) -> Result<TimeSeries> {
    Ok(lindblad_maps(cfg)?.apply(&cfg.initial))
}
