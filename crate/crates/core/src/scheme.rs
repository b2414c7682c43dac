//! Measurement operators, correction unitaries and the feedback schemes
//! (POVM element, correction) pairs built from them.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{check_range, Error, Result};
use crate::qmat::{Complex2, DensityMatrix, Ket2, C64};

/// Completeness / unitarity gate.
pub const SCHEME_TOL: f64 = 1e-12;

/// Outcome label; outcome `Plus` always pairs with the `+`-signed rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasurementAxis {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CorrectionAxis {
    Y,
    Z,
}

/// Two-outcome POVM with strength angle χ (χ = 0 projective, χ = π/2 no
/// information).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementPair {
    pub plus: Complex2,
    pub minus: Complex2,
    pub chi: f64,
}

impl MeasurementPair {
    pub fn completeness_defect(&self) -> f64 {
        let sum = self.plus.adjoint() * self.plus + self.minus.adjoint() * self.minus;
        (sum - Complex2::identity()).max_abs()
    }

    pub fn get(&self, sign: Sign) -> Complex2 {
        match sign {
            Sign::Plus => self.plus,
            Sign::Minus => self.minus,
        }
    }

    /// The measurement strength as usually quoted, cos χ.
    pub fn strength(&self) -> f64 {
        self.chi.cos()
    }
}

fn check_chi(chi: f64) -> Result<()> {
    check_range("chi", chi, 0.0, FRAC_PI_2, "[0, pi/2]")
}

/// `M_{z±}`: diag(cos χ/2, sin χ/2) and diag(sin χ/2, cos χ/2).
pub fn weak_z_measurement(chi: f64) -> Result<MeasurementPair> {
    check_chi(chi)?;
    let (s, c) = (0.5 * chi).sin_cos();
    Ok(MeasurementPair {
        plus: Complex2::from_real(c, 0.0, 0.0, s),
        minus: Complex2::from_real(s, 0.0, 0.0, c),
        chi,
    })
}

/// `M_{x±} = cos(χ/2)|±⟩⟨±| + sin(χ/2)|∓⟩⟨∓|`.
pub fn weak_x_measurement(chi: f64) -> Result<MeasurementPair> {
    check_chi(chi)?;
    let (s, c) = (0.5 * chi).sin_cos();
    let p = Ket2::plus().projector();
    let m = Ket2::minus().projector();
    Ok(MeasurementPair {
        plus: p.scale_re(c) + m.scale_re(s),
        minus: p.scale_re(s) + m.scale_re(c),
        chi,
    })
}

pub fn measurement(axis: MeasurementAxis, chi: f64) -> Result<MeasurementPair> {
    match axis {
        MeasurementAxis::Z => weak_z_measurement(chi),
        MeasurementAxis::X => weak_x_measurement(chi),
    }
}

/// `Ŷ_{±η} = exp(∓iη σ_y/2)`.
pub fn y_rotation(eta: f64, sign: Sign) -> Complex2 {
    let (s, c) = (0.5 * eta).sin_cos();
    let s = sign.value() * s;
    Complex2::from_real(c, -s, s, c)
}

/// `Ẑ_{±η} = exp(∓iη σ_z/2)`.
pub fn z_rotation(eta: f64, sign: Sign) -> Complex2 {
    let half = 0.5 * sign.value() * eta;
    Complex2::diag(C64::from_polar(1.0, -half), C64::from_polar(1.0, half))
}

pub fn rotation(axis: CorrectionAxis, eta: f64, sign: Sign) -> Complex2 {
    match axis {
        CorrectionAxis::Y => y_rotation(eta, sign),
        CorrectionAxis::Z => z_rotation(eta, sign),
    }
}

/// One (measurement operator, correction unitary) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackPair {
    pub measurement: Complex2,
    pub correction: Complex2,
}

/// Measurement operators `{M_j}`, corrections `{F_j}` and the Poisson rate R
/// (units of ω_c).
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackScheme {
    pairs: Vec<FeedbackPair>,
    rate: f64,
}

impl FeedbackScheme {
    /// Checks `Σ M†M = I` and unitarity of every correction to 1e-12.
    pub fn new(pairs: Vec<FeedbackPair>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::OutOfRange { name: "R", value: rate, range: "[0, inf)" });
        }
        if pairs.is_empty() {
            return Err(Error::InvalidScheme("no measurement outcomes".into()));
        }
        let mut sum = Complex2::zero();
        for (j, p) in pairs.iter().enumerate() {
            if !p.measurement.is_finite() || !p.correction.is_finite() {
                return Err(Error::InvalidScheme(format!("outcome {j} has non-finite entries")));
            }
            let u = p.correction.unitarity_defect();
            if u > SCHEME_TOL {
                return Err(Error::InvalidScheme(format!(
                    "correction {j} is not unitary (defect {u:.3e})"
                )));
            }
            sum = sum + p.measurement.adjoint() * p.measurement;
        }
        let c = (sum - Complex2::identity()).max_abs();
        if c > SCHEME_TOL {
            return Err(Error::InvalidScheme(format!("POVM incomplete (defect {c:.3e})")));
        }
        Ok(FeedbackScheme { pairs, rate })
    }

    /// R = 0: no measurement, no correction.
    pub fn do_nothing() -> Self {
        FeedbackScheme {
            pairs: vec![FeedbackPair {
                measurement: Complex2::identity(),
                correction: Complex2::identity(),
            }],
            rate: 0.0,
        }
    }

    pub fn from_measurement(
        m: &MeasurementPair,
        f_plus: Complex2,
        f_minus: Complex2,
        rate: f64,
    ) -> Result<Self> {
        FeedbackScheme::new(
            vec![
                FeedbackPair { measurement: m.plus, correction: f_plus },
                FeedbackPair { measurement: m.minus, correction: f_minus },
            ],
            rate,
        )
    }

    pub fn pairs(&self) -> &[FeedbackPair] {
        &self.pairs
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        FeedbackScheme::new(self.pairs.clone(), rate)
    }

    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .pairs
            .iter()
            .fold(Complex2::zero(), |acc, p| acc + p.measurement.adjoint() * p.measurement);
        (sum - Complex2::identity()).max_abs()
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.correction.unitarity_defect())
            .fold(0.0, f64::max)
    }
}

/// `L_j = √R · F_j · M_j`, in scheme order.
pub fn lindblad_ops(scheme: &FeedbackScheme) -> Vec<Complex2> {
    let root = scheme.rate.sqrt();
    scheme
        .pairs
        .iter()
        .map(|p| (p.correction * p.measurement).scale_re(root))
        .collect()
}

/// The correction pair `(F_+, F_−)` steering `|0⟩` and `|1⟩` onto
/// `cos(η/2)|0⟩ + e^{iζ} sin(η/2)|1⟩`.
pub fn preparation_corrections(eta: f64, zeta: f64) -> (Complex2, Complex2) {
    let (s, c) = (0.5 * eta).sin_cos();
    let em = C64::from_polar(1.0, -0.5 * zeta);
    let ep = C64::from_polar(1.0, 0.5 * zeta);
    let f_plus = Complex2::new(em * c, -em * s, ep * s, ep * c);
    let f_minus = Complex2::new(em * s, em * c, -ep * c, ep * s);
    (f_plus, f_minus)
}

/// Target state of the preparation scheme.
pub fn preparation_target(eta: f64, zeta: f64) -> Ket2 {
    Ket2::from_angles(eta, zeta)
}

/// Projective z measurement followed by `F_±`.
pub fn preparation_scheme(eta: f64, zeta: f64, rate: f64) -> Result<FeedbackScheme> {
    check_range("eta", eta, 0.0, PI, "[0, pi]")?;
    check_range("zeta", zeta, 0.0, 2.0 * PI, "[0, 2pi]")?;
    let (f_plus, f_minus) = preparation_corrections(eta, zeta);
    FeedbackScheme::from_measurement(&weak_z_measurement(0.0)?, f_plus, f_minus, rate)
}

/// Weak measurement along `axis` with ± rotations about `correction`.
pub fn pair_protection_scheme(
    chi: f64,
    eta: f64,
    axis: MeasurementAxis,
    correction: CorrectionAxis,
    rate: f64,
) -> Result<FeedbackScheme> {
    if axis == MeasurementAxis::Z && correction == CorrectionAxis::Z {
        return Err(Error::InvalidScheme(
            "z measurement with z corrections is not one of the protection families".into(),
        ));
    }
    if !eta.is_finite() {
        return Err(Error::OutOfRange { name: "eta", value: eta, range: "finite" });
    }
    let m = measurement(axis, chi)?;
    FeedbackScheme::from_measurement(
        &m,
        rotation(correction, eta, Sign::Plus),
        rotation(correction, eta, Sign::Minus),
        rate,
    )
}

/// `|ψ_±⟩ = cos(θ/2)|+⟩ ± sin(θ/2)|−⟩`, overlap `cos θ`.
pub fn nonorthogonal_pair(theta: f64) -> Result<(Ket2, Ket2)> {
    check_range("theta", theta, 0.0, PI, "[0, pi]")?;
    let (s, c) = (0.5 * theta).sin_cos();
    let p = Ket2::plus().scale(c.into());
    let m = Ket2::minus().scale(s.into());
    Ok((p.add(&m), p.add(&m.scale((-1.0).into()))))
}

/// `P_+ ρ_+ + P_− ρ_−` for the nonorthogonal pair at angle θ.
pub fn mixed_initial_state(theta: f64, p_plus: f64) -> Result<DensityMatrix> {
    let (plus, minus) = nonorthogonal_pair(theta)?;
    DensityMatrix::mix(p_plus, &DensityMatrix::pure(&plus), &DensityMatrix::pure(&minus))
}

/// `|+μ⟩ = cos(μ/2)|0⟩ + sin(μ/2)|1⟩`, `|−μ⟩ = sin(μ/2)|0⟩ − cos(μ/2)|1⟩`.
pub fn mu_basis(mu: f64) -> (Ket2, Ket2) {
    let (s, c) = (0.5 * mu).sin_cos();
    (
        Ket2::new(c.into(), s.into()),
        Ket2::new(s.into(), (-c).into()),
    )
}

const MU_RESIDUAL_TOL: f64 = 1e-10;

/// Solves `⟨±μ|ρ(0)|±μ⟩ = P_±` for the mixed pair state, returning the root
/// of smallest |μ|.
///
/// With Bloch vectors `ρ(0) ↔ (cos θ, 0, d sin θ)` and `|+μ⟩ ↔ (sin μ, 0, cos μ)`,
/// `d = 2P_+ − 1`, the condition reads `cos θ sin μ + d sin θ cos μ = d`.
pub fn measurement_angle(theta: f64, p_plus: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::OutOfRange { name: "theta", value: theta, range: "(0, pi)" });
    }
    if !(p_plus > 0.0 && p_plus < 1.0) {
        return Err(Error::OutOfRange { name: "p_plus", value: p_plus, range: "(0, 1)" });
    }
    let d = 2.0 * p_plus - 1.0;
    let a = theta.cos();
    let b = d * theta.sin();
    let amp = a.hypot(b);
    if d.abs() > amp * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!(
            "P+ = {p_plus} lies outside the eigenvalue range of rho(0)"
        )));
    }
    let phase = b.atan2(a);
    let base = (d / amp).clamp(-1.0, 1.0).asin();
    let best = [base - phase, PI - base - phase]
        .into_iter()
        .map(wrap_angle)
        .min_by(|x, y| x.abs().total_cmp(&y.abs()))
        .unwrap_or(0.0);
    let residual = a * best.sin() + b * best.cos() - d;
    if residual.abs() > MU_RESIDUAL_TOL {
        return Err(Error::Infeasible(format!("residual {residual:.3e} at mu = {best}")));
    }
    Ok(best)
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Orthogonal measurement in the `|±μ⟩` basis; outcome `+` is rotated about y
/// to Bloch polar angle η, outcome `−` to `π − η`. At μ = 0 the corrections
/// are exactly `Ŷ_{±η}`.
pub fn mixed_protection_family(mu: f64, eta: f64, rate: f64) -> Result<FeedbackScheme> {
    if !(mu.is_finite() && eta.is_finite()) {
        return Err(Error::InvalidScheme("non-finite mu or eta".into()));
    }
    let (plus, minus) = mu_basis(mu);
    FeedbackScheme::new(
        vec![
            FeedbackPair {
                measurement: plus.projector(),
                correction: y_rotation(wrap_angle(eta - mu), Sign::Plus),
            },
            FeedbackPair {
                measurement: minus.projector(),
                correction: y_rotation(wrap_angle(-eta - mu), Sign::Plus),
            },
        ],
        rate,
    )
}

/// Measurement basis from [`measurement_angle`] and minimal-angle y
/// rotations `|±μ⟩ → |ψ_±⟩`.
pub fn mixed_protection_scheme(theta: f64, p_plus: f64, rate: f64) -> Result<FeedbackScheme> {
    let mu = measurement_angle(theta, p_plus)?;
    mixed_protection_family(mu, FRAC_PI_2 - theta, rate)
}
