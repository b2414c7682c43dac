//! Independent ground truths for the solver.
//!
//! - [`mc_trajectories`]: jump-trajectory unravelling of the bath-free
//!   feedback master equation.
//! - [`exact_dephasing`]: analytic pure-dephasing solution without feedback.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use rayon::prelude::*;

use crate::bath::{omega_coth, BathSpec, Temperature};
use crate::error::{Error, Result};
use crate::evolve::{recording_times, SimConfig};
use crate::qmat::{Complex2, DensityMatrix, C64};
use crate::quad::adaptive_simpson;
use crate::scheme::FeedbackScheme;

/// Trajectories per reduction chunk. Fixed so the reduction order never
/// depends on the worker count.
const CHUNK: usize = 1024;

/// Monte-Carlo mean state with standard errors.
#[derive(Clone, Debug)]
pub struct TrajectoryEstimate {
    pub times: Vec<f64>,
    pub mean_states: Vec<DensityMatrix>,
    /// Largest entrywise standard error at each time.
    pub stderr: Vec<f64>,
    /// Standard errors of (Re, Im) of ρ00, ρ01, ρ10, ρ11 at each time.
    pub component_stderr: Vec<[f64; 8]>,
    pub n_traj: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    fn merge(&mut self, o: &Welford) {
        if o.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

fn components(m: &Complex2) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (k, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        out[2 * k] = m[(i, j)].re;
        out[2 * k + 1] = m[(i, j)].im;
    }
    out
}

fn free_evolution(rho: &Complex2, omega_0: f64, dt: f64) -> Complex2 {
    if dt == 0.0 || omega_0 == 0.0 {
        return *rho;
    }
    let phase = C64::from_polar(1.0, -2.0 * omega_0 * dt);
    let mut out = *rho;
    out[(0, 1)] = rho[(0, 1)] * phase;
    out[(1, 0)] = rho[(1, 0)] * phase.conj();
    out
}

fn jump(rho: &Complex2, scheme: &FeedbackScheme, u: f64) -> Complex2 {
    let pairs = scheme.pairs();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for (idx, pair) in pairs.iter().enumerate() {
        let post = pair.measurement * *rho * pair.measurement.adjoint();
        let p = post.trace().re;
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        chosen = Some((idx, post, p));
        if u < cumulative {
            break;
        }
    }
    // Rounding can leave u just above the last cumulative sum; the last
    // outcome with positive probability is then taken.
    let (idx, post, p) = chosen.expect("complete measurement has an outcome with positive probability");
    let f = pairs[idx].correction;
    (f * post * f.adjoint()).scale_re(1.0 / p)
}

fn trajectory(cfg: &SimConfig, times: &[f64], seed: u64, index: u64) -> Vec<[f64; 8]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let rate = cfg.scheme.rate();
    let waiting = (rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
    let draw_wait = |rng: &mut ChaCha8Rng| match &waiting {
        Some(d) => rng.sample(d),
        None => f64::INFINITY,
    };
    let mut rho = *cfg.initial.mat();
    let mut now = 0.0;
    let mut next_event = draw_wait(&mut rng);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        while next_event <= t {
            rho = free_evolution(&rho, cfg.omega_0, next_event - now);
            now = next_event;
            let u: f64 = rng.random();
            rho = jump(&rho, &cfg.scheme, u);
            next_event = now + draw_wait(&mut rng);
        }
        out.push(components(&free_evolution(&rho, cfg.omega_0, t - now)));
    }
    out
}

/// Average of `n_traj` jump trajectories of the bath-free feedback process.
/// Deterministic in `(seed, n_traj)`: trajectory `i` uses substream `i`.
pub fn mc_trajectories(cfg: &SimConfig, n_traj: usize, seed: u64) -> Result<TrajectoryEstimate> {
    cfg.validate()?;
    if cfg.bath.alpha() != 0.0 {
        return Err(Error::InvalidConfig(format!(
            "trajectory unravelling needs alpha = 0, got {}",
            cfg.bath.alpha()
        )));
    }
    if n_traj == 0 {
        return Err(Error::OutOfRange { name: "n_traj", value: 0.0, range: "[1, inf)" });
    }
    let times = recording_times(cfg);
    let n_chunks = n_traj.div_ceil(CHUNK);
    let partials: Vec<Vec<[Welford; 8]>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![[Welford::default(); 8]; times.len()];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_traj) {
                for (slot, sample) in acc.iter_mut().zip(trajectory(cfg, &times, seed, i as u64)) {
                    for (w, x) in slot.iter_mut().zip(sample) {
                        w.push(x);
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![[Welford::default(); 8]; times.len()];
    for part in &partials {
        for (slot, p) in total.iter_mut().zip(part) {
            for (w, q) in slot.iter_mut().zip(p) {
                w.merge(q);
            }
        }
    }
    let mut mean_states = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    let mut component_stderr = Vec::with_capacity(times.len());
    for slot in &total {
        let c = |k: usize| C64::new(slot[2 * k].mean, slot[2 * k + 1].mean);
        mean_states.push(DensityMatrix::from_solver(Complex2::new(c(0), c(1), c(2), c(3))));
        let se: [f64; 8] = std::array::from_fn(|k| slot[k].stderr());
        stderr.push(se.iter().cloned().fold(0.0, f64::max));
        component_stderr.push(se);
    }
    Ok(TrajectoryEstimate { times, mean_states, stderr, component_stderr, n_traj, seed })
}

/// Decoherence exponent Γ(t) of the pure-dephasing solution.
pub fn dephasing_exponent(t: f64, bath: &BathSpec) -> Result<f64> {
    match bath.temperature() {
        Temperature::Zero => {
            let u = bath.omega_c() * t;
            Ok(2.0 * bath.alpha() * (u * u).ln_1p())
        }
        Temperature::Inverse(_) => dephasing_exponent_quadrature(t, bath),
    }
}

/// Γ(t) = 4∫₀^∞ J(ω) coth(βω/2) (1 − cos ωt)/ω² dω by adaptive quadrature.
pub fn dephasing_exponent_quadrature(t: f64, bath: &BathSpec) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::OutOfRange { name: "t", value: t, range: "finite" });
    }
    if t == 0.0 || bath.alpha() == 0.0 {
        return Ok(0.0);
    }
    let wc = bath.omega_c();
    let alpha = bath.alpha();
    let temperature = bath.temperature();
    // (1 − cos ωt)/ω² written as 2 sin²(ωt/2)/ω², finite at ω = 0.
    let f = move |w: f64| -> f64 {
        let osc = if w == 0.0 {
            0.5 * t * t
        } else {
            let s = (0.5 * w * t).sin();
            2.0 * s * s / (w * w)
        };
        let thermal = match temperature {
            Temperature::Zero => w,
            Temperature::Inverse(beta) => omega_coth(w, beta),
        };
        4.0 * alpha * (-w / wc).exp() * thermal * osc
    };
    let upper = 60.0 * wc;
    let width = wc.min(std::f64::consts::PI / t.abs());
    let panels = (upper / width).ceil() as usize;
    let h = upper / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        total += adaptive_simpson(&f, k as f64 * h, (k + 1) as f64 * h, 1e-13 / panels as f64, 40)?;
    }
    Ok(total)
}

/// Feedback-free state at time `t`: populations unchanged,
/// `ρ01(t) = ρ01(0) e^{−2iω₀t} e^{−Γ(t)}`.
pub fn exact_dephasing(initial: &DensityMatrix, t: f64, omega_0: f64, bath: &BathSpec) -> Result<DensityMatrix> {
    let gamma = dephasing_exponent(t, bath)?;
    let factor = C64::from_polar((-gamma).exp(), -2.0 * omega_0 * t);
    let mut m = *initial.mat();
    m[(0, 1)] = initial.mat()[(0, 1)] * factor;
    m[(1, 0)] = initial.mat()[(1, 0)] * factor.conj();
    Ok(DensityMatrix::from_solver(m))
}
