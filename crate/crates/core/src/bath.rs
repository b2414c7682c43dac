//! Ohmic bath: spectral density `J(ω) = α ω e^{−ω/ω_c}` and the two memory
//! kernels of the hybrid equation,
//!
//! ```text
//! ν(τ) = ∫₀^∞ dω J(ω) coth(βω/2) cos(ωτ)      (noise)
//! η(τ) = ∫₀^∞ dω J(ω) sin(ωτ)                 (dissipation)
//! ```
//!
//! At zero temperature both have closed forms; at finite temperature the
//! thermal part of the noise kernel is integrated with Gauss–Laguerre.

use crate::error::{Error, Result};
use crate::qmat::C64;
use crate::quad;

/// Bath temperature. `Zero` is exact, not a large-β approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Temperature {
    Zero,
    /// Inverse temperature β (units of 1/ω_c).
    Inverse(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    alpha: f64,
    omega_c: f64,
    temperature: Temperature,
}

/// Convergence target for the frequency quadrature.
pub const KERNEL_QUAD_TOL: f64 = 1e-9;

impl BathSpec {
    pub fn new(alpha: f64, omega_c: f64, temperature: Temperature) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::OutOfRange { name: "alpha", value: alpha, range: "[0, inf)" });
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::OutOfRange { name: "omega_c", value: omega_c, range: "(0, inf)" });
        }
        if let Temperature::Inverse(beta) = temperature {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::OutOfRange { name: "beta", value: beta, range: "(0, inf)" });
            }
        }
        Ok(BathSpec { alpha, omega_c, temperature })
    }

    /// Zero-temperature bath with ω_c = 1.
    pub fn zero_temperature(alpha: f64) -> Result<Self> {
        BathSpec::new(alpha, 1.0, Temperature::Zero)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        BathSpec::new(alpha, self.omega_c, self.temperature)
    }

    /// Scale of ν used as the absolute floor of the convergence test.
    fn kernel_scale(&self) -> f64 {
        (self.alpha * self.omega_c * self.omega_c).max(f64::MIN_POSITIVE)
    }
}

/// `J(ω) = α ω e^{−ω/ω_c}`.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> Result<f64> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::OutOfRange { name: "omega", value: omega, range: "[0, inf)" });
    }
    Ok(bath.alpha * omega * (-omega / bath.omega_c).exp())
}

/// `ω coth(βω/2)`, finite at ω → 0 (limit 2/β).
pub fn omega_coth(omega: f64, beta: f64) -> f64 {
    let x = 0.5 * beta * omega;
    if x.abs() < 1e-4 {
        // x coth x = 1 + x²/3 − x⁴/45
        let x2 = x * x;
        (2.0 / beta) * (1.0 + x2 / 3.0 - x2 * x2 / 45.0)
    } else {
        omega / x.tanh()
    }
}

/// Zero-temperature noise kernel `α ω_c² (1 − ω_c²τ²)/(1 + ω_c²τ²)²`.
pub fn noise_kernel_t0(tau: f64, bath: &BathSpec) -> f64 {
    let wc = bath.omega_c;
    let u = wc * tau;
    let d = 1.0 + u * u;
    bath.alpha * wc * wc * (1.0 - u * u) / (d * d)
}

/// ν(τ). At T > 0 the thermal excess `2J(ω)/(e^{βω} − 1)` is added to the
/// zero-temperature closed form.
pub fn noise_kernel(tau: f64, bath: &BathSpec) -> Result<f64> {
    match bath.temperature {
        Temperature::Zero => Ok(noise_kernel_t0(tau, bath)),
        Temperature::Inverse(beta) => Ok(noise_kernel_t0(tau, bath) + thermal_excess(tau, beta, bath)?),
    }
}

/// `ω/(1 − e^{−βω})`, finite at ω → 0 (limit 1/β).
fn bose_ratio(omega: f64, beta: f64) -> f64 {
    let x = beta * omega;
    if x < 1e-8 {
        (1.0 + 0.5 * x) / beta
    } else {
        omega / -(-x).exp_m1()
    }
}

fn thermal_excess(tau: f64, beta: f64, bath: &BathSpec) -> Result<f64> {
    if !tau.is_finite() {
        return Err(Error::OutOfRange { name: "tau", value: tau, range: "finite" });
    }
    let alpha = bath.alpha;
    // e^{−ω/ω_c}·2ω/(e^{βω} − 1) = e^{−ω(β + 1/ω_c)}·2ω/(1 − e^{−βω})
    let scale = 1.0 / (beta + 1.0 / bath.omega_c);
    frequency_integral(
        |w| 2.0 * alpha * bose_ratio(w, beta) * (w * tau).cos(),
        scale,
        tau,
        bath.kernel_scale(),
    )
}

/// `∫₀^∞ e^{−ω/scale} g(ω) dω`: Gauss–Laguerre, with a panel fallback for
/// integrands too oscillatory or too sharp for the Laguerre rule.
fn frequency_integral<F>(g: F, scale: f64, tau: f64, floor: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    match quad::laguerre_doubling(&g, scale, KERNEL_QUAD_TOL, floor) {
        Ok(v) => Ok(v),
        Err(e) => {
            log::debug!("{e}; switching to panel quadrature");
            let upper = 50.0 * scale;
            let width = if tau == 0.0 { scale } else { scale.min(std::f64::consts::PI / tau.abs()) };
            let panels = (upper / width).ceil() as usize;
            quad::panel_legendre(|w| (-w / scale).exp() * g(w), upper, panels, KERNEL_QUAD_TOL, floor)
        }
    }
}

/// ν(τ) by direct frequency quadrature at any temperature (cross-check path).
pub fn noise_kernel_quadrature(tau: f64, bath: &BathSpec) -> Result<f64> {
    if !tau.is_finite() {
        return Err(Error::OutOfRange { name: "tau", value: tau, range: "finite" });
    }
    let alpha = bath.alpha;
    match bath.temperature {
        Temperature::Zero => frequency_integral(
            |w| alpha * w * (w * tau).cos(),
            bath.omega_c,
            tau,
            bath.kernel_scale(),
        ),
        Temperature::Inverse(beta) => frequency_integral(
            |w| alpha * omega_coth(w, beta) * (w * tau).cos(),
            bath.omega_c,
            tau,
            bath.kernel_scale(),
        ),
    }
}

/// η(τ) = `2 α ω_c³ τ / (1 + ω_c²τ²)²`, temperature independent.
pub fn dissipation_kernel(tau: f64, bath: &BathSpec) -> f64 {
    let wc = bath.omega_c;
    let u = wc * tau;
    let d = 1.0 + u * u;
    2.0 * bath.alpha * wc * wc * u / (d * d)
}

/// η(τ) by frequency quadrature (cross-check path).
pub fn dissipation_kernel_quadrature(tau: f64, bath: &BathSpec) -> Result<f64> {
    if !tau.is_finite() {
        return Err(Error::OutOfRange { name: "tau", value: tau, range: "finite" });
    }
    let alpha = bath.alpha;
    frequency_integral(|w| alpha * w * (w * tau).sin(), bath.omega_c, tau, bath.kernel_scale())
}

/// `c(τ) = ν(τ) + iη(τ)`, or its conjugate.
pub fn complex_kernel(tau: f64, bath: &BathSpec, conjugate: bool) -> Result<C64> {
    let c = C64::new(noise_kernel(tau, bath)?, dissipation_kernel(tau, bath));
    Ok(if conjugate { c.conj() } else { c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;

    fn t0(alpha: f64) -> BathSpec {
        BathSpec::zero_temperature(alpha).unwrap()
    }

    /// Independent oracle: adaptive Simpson on [0, 80 ω_c] of the raw
    /// integrand (e^{−80} is far below the tolerance).
    fn simpson_oracle(f: impl Fn(f64) -> f64, wc: f64) -> f64 {
        let pieces = 160;
        let h = 80.0 * wc / pieces as f64;
        (0..pieces)
            .map(|k| adaptive_simpson(&f, k as f64 * h, (k + 1) as f64 * h, 1e-15, 50).unwrap())
            .sum()
    }

    #[test]
    fn bath_validation() {
        assert!(BathSpec::new(-0.1, 1.0, Temperature::Zero).is_err());
        assert!(BathSpec::new(0.1, 0.0, Temperature::Zero).is_err());
        assert!(BathSpec::new(0.1, 1.0, Temperature::Inverse(0.0)).is_err());
        assert!(BathSpec::new(0.0, 1.0, Temperature::Inverse(2.0)).is_ok());
    }

    #[test]
    fn spectral_density_values() {
        let b = t0(0.05);
        assert_eq!(spectral_density(0.0, &b).unwrap(), 0.0);
        assert!((spectral_density(1.0, &b).unwrap() - 0.0183939721).abs() < 1e-10);
        assert!(spectral_density(-1.0, &b).is_err());
        // maximum at ω = ω_c
        let peak = spectral_density(1.0, &b).unwrap();
        for w in [0.9, 0.99, 1.01, 1.1] {
            assert!(spectral_density(w, &b).unwrap() < peak);
        }
    }

    #[test]
    fn noise_kernel_at_origin_matches_oracle() {
        let b = t0(0.05);
        let oracle = simpson_oracle(|w| 0.05 * w * (-w).exp(), 1.0);
        assert!((oracle - 0.05).abs() < 1e-12);
        assert!((noise_kernel(0.0, &b).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_quadrature_oracle() {
        for wc in [1.0, 2.5] {
            let b = BathSpec::new(0.05, wc, Temperature::Zero).unwrap();
            let scale = 0.05 * wc * wc;
            for k in 0..20 {
                let tau = 10.0 * k as f64 / 19.0 / wc;
                let nu = simpson_oracle(|w| 0.05 * w * (-w / wc).exp() * (w * tau).cos(), wc);
                let eta = simpson_oracle(|w| 0.05 * w * (-w / wc).exp() * (w * tau).sin(), wc);
                let nu_c = noise_kernel(tau, &b).unwrap();
                let eta_c = dissipation_kernel(tau, &b);
                assert!((nu_c - nu).abs() <= 1e-8 * nu.abs().max(1e-3 * scale), "nu at {tau}");
                assert!((eta_c - eta).abs() <= 1e-8 * eta.abs().max(1e-3 * scale), "eta at {tau}");
                // Laguerre path agrees too.
                let nu_q = noise_kernel_quadrature(tau, &b).unwrap();
                let eta_q = dissipation_kernel_quadrature(tau, &b).unwrap();
                assert!((nu_q - nu_c).abs() <= 1e-8 * nu_c.abs().max(scale));
                assert!((eta_q - eta_c).abs() <= 1e-8 * eta_c.abs().max(scale));
            }
        }
    }

    #[test]
    fn kernel_symmetries() {
        let b = t0(0.07);
        let hot = BathSpec::new(0.07, 1.0, Temperature::Inverse(1.5)).unwrap();
        for tau in [0.1, 0.77, 2.3, 6.0] {
            assert_eq!(noise_kernel(tau, &b).unwrap(), noise_kernel(-tau, &b).unwrap());
            assert_eq!(dissipation_kernel(-tau, &b), -dissipation_kernel(tau, &b));
            let (p, m) = (noise_kernel(tau, &hot).unwrap(), noise_kernel(-tau, &hot).unwrap());
            assert!((p - m).abs() < 1e-13);
        }
        assert_eq!(dissipation_kernel(0.0, &b), 0.0);
    }

    #[test]
    fn complex_kernel_values() {
        let b = t0(0.05);
        let c0 = complex_kernel(0.0, &b, false).unwrap();
        assert!((c0 - C64::new(0.05, 0.0)).norm() < 1e-15);
        let c1 = complex_kernel(1.0, &b, false).unwrap();
        assert!((c1 - C64::new(0.0, 0.025)).norm() < 1e-15);
        let c1c = complex_kernel(1.0, &b, true).unwrap();
        assert_eq!(c1c, c1.conj());
    }

    #[test]
    fn thermal_integrand_is_regular_at_zero() {
        let beta = 3.0;
        let limit = 2.0 / beta;
        for w in [0.0, 1e-12, 1e-8, 1e-5] {
            let v = omega_coth(w, beta);
            assert!(v.is_finite());
            assert!((v - limit).abs() < 1e-8);
        }
        // continuity across the series switch
        let x = 2e-4 / beta;
        assert!((omega_coth(x * 0.999, beta) - omega_coth(x * 1.001, beta)).abs() < 1e-9);
    }

    #[test]
    fn hotter_bath_is_noisier() {
        let betas = [0.5, 1.0, 2.0, 5.0, 20.0, 100.0];
        let nu: Vec<f64> = betas
            .iter()
            .map(|&beta| {
                let b = BathSpec::new(0.05, 1.0, Temperature::Inverse(beta)).unwrap();
                noise_kernel(0.0, &b).unwrap()
            })
            .collect();
        for w in nu.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(nu.last().unwrap() >= &0.05);
    }

    #[test]
    fn cold_limit_recovers_zero_temperature() {
        let cold = BathSpec::new(0.05, 1.0, Temperature::Inverse(1e3)).unwrap();
        let zero = t0(0.05);
        for tau in [0.0, 0.5, 1.0, 3.0] {
            let a = noise_kernel(tau, &cold).unwrap();
            let b = noise_kernel(tau, &zero).unwrap();
            assert!((a - b).abs() <= 1e-6, "tau = {tau}: {a} vs {b}");
            // thermal excess at τ = 0 is 2α Σ_k (kβ + 1)^{-2}
            if tau == 0.0 {
                let terms = 1_000_000;
                let sum: f64 = (1..=terms).map(|k| (k as f64 * 1e3 + 1.0).powi(-2)).sum();
                let excess = 2.0 * 0.05 * (sum + 1.0 / (1e6 * terms as f64));
                assert!(((a - b) - excess).abs() < 1e-6 * excess, "{} vs {excess}", a - b);
            }
        }
    }

    #[test]
    fn thermal_kernel_matches_simpson() {
        let beta = 2.0;
        let b = BathSpec::new(0.05, 1.0, Temperature::Inverse(beta)).unwrap();
        for tau in [0.0, 0.4, 1.7] {
            let oracle = simpson_oracle(
                |w| {
                    let coth = if w == 0.0 { 0.0 } else { 1.0 / (0.5 * beta * w).tanh() };
                    let jw = if w == 0.0 { 0.0 } else { 0.05 * w * (-w).exp() * coth };
                    let jw = if w == 0.0 { 0.05 * 2.0 / beta } else { jw };
                    jw * (w * tau).cos()
                },
                1.0,
            );
            let got = noise_kernel(tau, &b).unwrap();
            assert!((got - oracle).abs() <= 1e-8 * oracle.abs().max(0.05), "{got} vs {oracle}");
            let direct = noise_kernel_quadrature(tau, &b).unwrap();
            assert!((direct - oracle).abs() <= 1e-8 * oracle.abs().max(0.05));
        }
    }
}
