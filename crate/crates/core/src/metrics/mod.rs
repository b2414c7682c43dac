//! Fidelity and purity measures, Bloch-sphere averages and parameter sweeps.

pub mod sweep;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::{hybrid_maps, SimConfig};
use crate::qmat::{BlochVector, DensityMatrix, Ket2, Superop};
use crate::quad::gauss_legendre;
use crate::scheme::{mixed_initial_state, nonorthogonal_pair, preparation_scheme, preparation_target, FeedbackScheme};

/// Largest change allowed when the sphere grid is doubled.
pub const SPHERE_TOL: f64 = 1e-4;
pub const DEFAULT_SPHERE_NODES: (usize, usize) = (16, 16);

/// `√⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(psi: &Ket2, rho: &DensityMatrix) -> f64 {
    psi.expectation(rho.mat()).re.clamp(0.0, 1.0).sqrt()
}

/// Uhlmann fidelity `Tr √(√ρ₀ ρ_t √ρ₀)`.
pub fn fidelity_uhlmann(rho0: &DensityMatrix, rho_t: &DensityMatrix) -> f64 {
    let s = rho0.mat().psd_sqrt();
    let m = (s * *rho_t.mat() * s).hermitian_part();
    let [lo, hi] = m.hermitian_eigenvalues();
    (lo.max(0.0).sqrt() + hi.max(0.0).sqrt()).clamp(0.0, 1.0)
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.mat();
    (*m * *m).trace().re
}

/// Product rule on the unit sphere: Gauss–Legendre in cos θ, trapezoid in φ.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    /// (θ, φ, weight), weights sum to 1.
    nodes: Vec<(f64, f64, f64)>,
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidConfig(format!(
                "sphere grid needs positive node counts, got ({n_theta}, {n_phi})"
            )));
        }
        let rule = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let theta = x.clamp(-1.0, 1.0).acos();
            for k in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
                nodes.push((theta, phi, 0.5 * w / n_phi as f64));
            }
        }
        Ok(SphereQuadrature { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Normalised average of `f(θ, φ)` over the sphere.
    pub fn average(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(th, ph, w)| w * f(th, ph)).sum()
    }
}

/// Sphere average at `nodes`, rejected if doubling both counts moves it by
/// more than [`SPHERE_TOL`].
pub fn checked_sphere_average(nodes: (usize, usize), f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let base = SphereQuadrature::new(nodes.0, nodes.1)?.average(&f);
    let fine = SphereQuadrature::new(2 * nodes.0, 2 * nodes.1)?.average(&f);
    if (fine - base).abs() > SPHERE_TOL {
        return Err(Error::Quadrature(format!(
            "sphere average moved by {:.3e} when doubling ({}, {}) nodes",
            (fine - base).abs(),
            nodes.0,
            nodes.1
        )));
    }
    Ok(base)
}

/// Dynamical map of the hybrid solver at time `t` (identity at `t = 0`).
pub fn map_at(template: &SimConfig, t: f64) -> Result<Superop> {
    if t == 0.0 {
        return Ok(Superop::identity());
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::OutOfRange { name: "t", value: t, range: "[0, inf)" });
    }
    Ok(*hybrid_maps(&template.with_t_max(t)?)?.last())
}

fn evolve_with(map: &Superop, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_solver(map.apply(rho.mat()))
}

fn sphere_state(radius: f64, theta: f64, phi: f64) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_bloch(&BlochVector::from_spherical(radius, theta, phi)?))
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::OutOfRange { name: "radius", value: radius, range: "(0, 1]" });
    }
    Ok(())
}

/// Mean of `√⟨target|ρ_a(t)|target⟩` over initial Bloch vectors `a` of the
/// given radius, propagated under the template's scheme and bath.
pub fn average_fidelity_sphere(
    template: &SimConfig,
    radius: f64,
    t: f64,
    target: &Ket2,
    nodes: (usize, usize),
) -> Result<f64> {
    check_radius(radius)?;
    let map = map_at(template, t)?;
    sphere_fidelity_of_map(&map, radius, target, nodes)
}

fn sphere_fidelity_of_map(map: &Superop, radius: f64, target: &Ket2, nodes: (usize, usize)) -> Result<f64> {
    checked_sphere_average(nodes, |th, ph| {
        let rho = sphere_state(radius, th, ph).expect("radius validated by caller");
        fidelity_pure(target, &evolve_with(map, &rho))
    })
}

/// Average preparation fidelity of the `(η, ζ)` scheme at the template's rate.
pub fn preparation_average(
    template: &SimConfig,
    eta: f64,
    zeta: f64,
    radius: f64,
    t: f64,
    nodes: (usize, usize),
) -> Result<f64> {
    let scheme = preparation_scheme(eta, zeta, template.scheme.rate())?;
    let cfg = SimConfig { scheme, ..template.clone() };
    average_fidelity_sphere(&cfg, radius, t, &preparation_target(eta, zeta), nodes)
}

fn pair_fidelity_of_map(map: &Superop, plus: &Ket2, minus: &Ket2) -> f64 {
    let rho_p = evolve_with(map, &DensityMatrix::pure(plus));
    let rho_m = evolve_with(map, &DensityMatrix::pure(minus));
    0.5 * fidelity_pure(plus, &rho_p) + 0.5 * fidelity_pure(minus, &rho_m)
}

/// `½√⟨ψ₊|ρ₊(t)|ψ₊⟩ + ½√⟨ψ₋|ρ₋(t)|ψ₋⟩` for the pair at angle θ.
pub fn pair_average_fidelity(theta: f64, template: &SimConfig, t: f64) -> Result<f64> {
    let (plus, minus) = nonorthogonal_pair(theta)?;
    Ok(pair_fidelity_of_map(&map_at(template, t)?, &plus, &minus))
}

/// Pair fidelity on the template's recording grid up to `template.t_max`.
pub fn pair_fidelity_series(theta: f64, template: &SimConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let (plus, minus) = nonorthogonal_pair(theta)?;
    let maps = hybrid_maps(template)?;
    let values = maps.maps.iter().map(|m| pair_fidelity_of_map(m, &plus, &minus)).collect();
    Ok((maps.times, values))
}

fn self_fidelity_of_map(map: &Superop, nodes: (usize, usize)) -> Result<f64> {
    checked_sphere_average(nodes, |th, ph| {
        let psi = Ket2::from_angles(th, ph);
        fidelity_pure(&psi, &evolve_with(map, &DensityMatrix::pure(&psi)))
    })
}

/// Sphere average of each pure state's fidelity with its own evolved state.
pub fn unknown_state_average(scheme: &FeedbackScheme, template: &SimConfig, t: f64) -> Result<f64> {
    let cfg = SimConfig { scheme: scheme.clone(), ..template.clone() };
    self_fidelity_of_map(&map_at(&cfg, t)?, DEFAULT_SPHERE_NODES)
}

/// [`unknown_state_average`] on the recording grid up to `template.t_max`.
pub fn unknown_state_series(scheme: &FeedbackScheme, template: &SimConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let cfg = SimConfig { scheme: scheme.clone(), ..template.clone() };
    let maps = hybrid_maps(&cfg)?;
    let values = maps
        .maps
        .par_iter()
        .map(|m| self_fidelity_of_map(m, DEFAULT_SPHERE_NODES))
        .collect::<Result<Vec<_>>>()?;
    Ok((maps.times, values))
}

/// Uhlmann fidelity between the mixed pair state and its evolution under the
/// template's scheme.
pub fn mixed_state_fidelity(theta: f64, p_plus: f64, template: &SimConfig, t: f64) -> Result<f64> {
    let rho0 = mixed_initial_state(theta, p_plus)?;
    Ok(fidelity_uhlmann(&rho0, &evolve_with(&map_at(template, t)?, &rho0)))
}

/// [`mixed_state_fidelity`] on the recording grid up to `template.t_max`.
pub fn mixed_state_series(theta: f64, p_plus: f64, template: &SimConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let rho0 = mixed_initial_state(theta, p_plus)?;
    let maps = hybrid_maps(template)?;
    let values = maps.maps.iter().map(|m| fidelity_uhlmann(&rho0, &evolve_with(m, &rho0))).collect();
    Ok((maps.times, values))
}
