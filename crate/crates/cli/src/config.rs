//! JSON run configuration: strict parsing, dotted `key=value` overrides and
//! conversion into core types.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use mdfc_core::bath::{BathSpec, Temperature};
use mdfc_core::evolve::SimConfig;
use mdfc_core::qmat::{BlochVector, DensityMatrix};
use mdfc_core::scheme::{
    measurement_angle, mixed_protection_family, mixed_protection_scheme, pair_protection_scheme,
    preparation_scheme, CorrectionAxis, FeedbackScheme, MeasurementAxis,
};
use mdfc_core::Axis;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    pub bath: BathConfig,
    pub scheme: SchemeConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub omega0: f64,
    /// Bloch radius of initial states (sphere averages and the single-run
    /// initial state).
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub phi0: f64,
}

fn default_radius() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub alpha: f64,
    #[serde(default = "one")]
    pub omega_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "T0", default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<bool>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    DoNothing,
    Preparation,
    ZY,
    XY,
    XZ,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    #[serde(default)]
    pub chi: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub zeta: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_p_plus")]
    pub p_plus: f64,
    #[serde(rename = "R", default)]
    pub rate: f64,
}

fn default_theta() -> f64 {
    PI / 6.0
}

fn default_p_plus() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_inner_nodes")]
    pub inner_nodes: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_sphere_nodes")]
    pub n_theta: usize,
    #[serde(default = "default_sphere_nodes")]
    pub n_phi: usize,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
}

fn default_dt() -> f64 {
    SimConfig::DEFAULT_DT
}

fn default_inner_nodes() -> usize {
    SimConfig::DEFAULT_INNER_NODES
}

fn default_record_every() -> usize {
    SimConfig::DEFAULT_RECORD_EVERY
}

fn default_sphere_nodes() -> usize {
    16
}

fn default_n_traj() -> usize {
    100_000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Prepare,
    Purity,
    ProtectPair,
    ProtectUnknown,
    ProtectMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub axes: Vec<AxisConfig>,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { axes: Vec::new(), refine_tol: default_refine_tol(), objective: None }
    }
}

fn default_refine_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

/// Parameter names an axis may vary.
pub const AXIS_NAMES: &[&str] = &["eta", "zeta", "chi", "theta", "p_plus", "R", "alpha", "omega0", "radius", "t"];

fn config_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn check(key: &str, value: f64, lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<(), CliError> {
    let above = if lo_open { value > lo } else { value >= lo };
    let below = if hi_open { value < hi } else { value <= hi };
    if value.is_finite() && above && below {
        return Ok(());
    }
    let (l, r) = (if lo_open { "(" } else { "[" }, if hi_open { ")" } else { "]" });
    Err(config_err(key, format!("value {value} outside {l}{lo}, {hi}{r}")))
}

/// Sets `path` (dotted) in a JSON document, creating objects as needed. The
/// value is read as JSON when possible and as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override {assignment:?} is not key=value")))?;
    if path.is_empty() {
        return Err(CliError::Usage(format!("override {assignment:?} has an empty key")));
    }
    let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_err(&parts[..i].join("."), "is not an object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one part")
}

impl Config {
    pub fn from_value(doc: Value) -> Result<Self, CliError> {
        let obj = doc.as_object().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
        for key in ["model", "bath", "scheme", "solver"] {
            if !obj.contains_key(key) {
                return Err(config_err(key, "missing block"));
            }
        }
        let cfg: Config = serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Config::from_value(doc)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Config::from_str_with(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        if !m.omega0.is_finite() {
            return Err(config_err("model.omega0", "must be finite"));
        }
        check("model.radius", m.radius, 0.0, 1.0, true, false)?;
        check("model.theta0", m.theta0, 0.0, PI, false, false)?;
        check("model.phi0", m.phi0, 0.0, 2.0 * PI, false, false)?;

        let b = &self.bath;
        check("bath.alpha", b.alpha, 0.0, f64::INFINITY, false, true)?;
        check("bath.omega_c", b.omega_c, 0.0, f64::INFINITY, true, true)?;
        match (b.beta, b.t0) {
            (Some(_), Some(true)) => return Err(config_err("bath", "give either beta or \"T0\": true, not both")),
            (Some(beta), _) => check("bath.beta", beta, 0.0, f64::INFINITY, true, true)?,
            (None, Some(true)) => {}
            (None, _) => return Err(config_err("bath", "needs beta or \"T0\": true")),
        }

        let s = &self.scheme;
        check("scheme.chi", s.chi, 0.0, FRAC_PI_2, false, false)?;
        check("scheme.R", s.rate, 0.0, f64::INFINITY, false, true)?;
        if s.kind == SchemeKind::Preparation {
            check("scheme.eta", s.eta, 0.0, PI, false, false)?;
            check("scheme.zeta", s.zeta, 0.0, 2.0 * PI, false, false)?;
        } else if !(s.eta.is_finite() && s.zeta.is_finite()) {
            return Err(config_err("scheme.eta", "must be finite"));
        }
        check("scheme.theta", s.theta, 0.0, PI, false, false)?;
        check("scheme.p_plus", s.p_plus, 0.0, 1.0, true, true)?;
        if s.kind == SchemeKind::Mixed {
            check("scheme.theta", s.theta, 0.0, PI, true, true)?;
        }

        let v = &self.solver;
        check("solver.t_max", v.t_max, 0.0, f64::INFINITY, true, true)?;
        check("solver.dt", v.dt, 0.0, f64::INFINITY, true, true)?;
        if v.inner_nodes < 4 {
            return Err(config_err("solver.inner_nodes", format!("value {} below 4", v.inner_nodes)));
        }
        for (key, n) in [
            ("solver.record_every", v.record_every),
            ("solver.n_theta", v.n_theta),
            ("solver.n_phi", v.n_phi),
            ("solver.n_traj", v.n_traj),
        ] {
            if n == 0 {
                return Err(config_err(key, "must be positive"));
            }
        }

        check("sweep.refine_tol", self.sweep.refine_tol, 0.0, f64::INFINITY, true, true)?;
        for a in &self.sweep.axes {
            if !AXIS_NAMES.contains(&a.name.as_str()) {
                return Err(config_err(
                    "sweep.axes.name",
                    format!("unknown parameter {:?} (expected one of {AXIS_NAMES:?})", a.name),
                ));
            }
            a.to_axis()?;
        }
        Ok(())
    }

    pub fn bath_spec(&self) -> Result<BathSpec, CliError> {
        let temperature = match self.bath.beta {
            Some(beta) => Temperature::Inverse(beta),
            None => Temperature::Zero,
        };
        BathSpec::new(self.bath.alpha, self.bath.omega_c, temperature).map_err(|e| config_err("bath", e))
    }

    /// Feedback scheme described by the `scheme` block.
    pub fn feedback_scheme(&self) -> Result<FeedbackScheme, CliError> {
        let s = &self.scheme;
        let built = match s.kind {
            SchemeKind::DoNothing => Ok(FeedbackScheme::do_nothing()),
            SchemeKind::Preparation => preparation_scheme(s.eta, s.zeta, s.rate),
            SchemeKind::ZY => pair_protection_scheme(s.chi, s.eta, MeasurementAxis::Z, CorrectionAxis::Y, s.rate),
            SchemeKind::XY => pair_protection_scheme(s.chi, s.eta, MeasurementAxis::X, CorrectionAxis::Y, s.rate),
            SchemeKind::XZ => pair_protection_scheme(s.chi, s.eta, MeasurementAxis::X, CorrectionAxis::Z, s.rate),
            SchemeKind::Mixed => mixed_protection_scheme(s.theta, s.p_plus, s.rate),
        };
        built.map_err(|e| config_err("scheme", e))
    }

    /// Mixed-state protection scheme with correction angle `eta`.
    pub fn mixed_family(&self, eta: f64) -> Result<FeedbackScheme, CliError> {
        let s = &self.scheme;
        let mu = measurement_angle(s.theta, s.p_plus).map_err(|e| config_err("scheme", e))?;
        mixed_protection_family(mu, eta, s.rate).map_err(|e| config_err("scheme", e))
    }

    /// Initial state of single runs: Bloch vector (radius, theta0, phi0).
    pub fn initial_state(&self) -> Result<DensityMatrix, CliError> {
        let m = &self.model;
        let a = BlochVector::from_spherical(m.radius, m.theta0, m.phi0).map_err(|e| config_err("model", e))?;
        Ok(DensityMatrix::from_bloch(&a))
    }

    pub fn sim_config(&self, scheme: FeedbackScheme) -> Result<SimConfig, CliError> {
        let cfg = SimConfig {
            omega_0: self.model.omega0,
            initial: self.initial_state()?,
            scheme,
            bath: self.bath_spec()?,
            t_max: self.solver.t_max,
            dt: self.solver.dt,
            inner_nodes: self.solver.inner_nodes,
            record_every: self.solver.record_every,
        };
        cfg.validate().map_err(|e| config_err("solver", e))?;
        Ok(cfg)
    }

    pub fn sphere_nodes(&self) -> (usize, usize) {
        (self.solver.n_theta, self.solver.n_phi)
    }

    /// Copy with one named parameter replaced (sweep axes).
    pub fn with_param(&self, name: &str, value: f64) -> Result<Config, CliError> {
        let mut c = self.clone();
        match name {
            "eta" => c.scheme.eta = value,
            "zeta" => c.scheme.zeta = value,
            "chi" => c.scheme.chi = value,
            "theta" => c.scheme.theta = value,
            "p_plus" => c.scheme.p_plus = value,
            "R" => c.scheme.rate = value,
            "alpha" => c.bath.alpha = value,
            "omega0" => c.model.omega0 = value,
            "radius" => c.model.radius = value,
            "t" => c.solver.t_max = value,
            other => return Err(config_err("sweep.axes.name", format!("unknown parameter {other:?}"))),
        }
        Ok(c)
    }

    /// The `eta` axis if configured, else 61 points over [0, π].
    pub fn eta_grid(&self) -> Result<Vec<f64>, CliError> {
        match self.sweep.axes.iter().find(|a| a.name == "eta") {
            Some(a) => Ok(a.to_axis()?.values()),
            None => Ok(Axis::with_points("eta", 0.0, PI, 61).expect("valid default axis").values()),
        }
    }
}

impl AxisConfig {
    pub fn to_axis(&self) -> Result<Axis, CliError> {
        let key = format!("sweep.axes[{}]", self.name);
        let axis = match (self.step, self.points) {
            (Some(step), None) => Axis::new(self.name.clone(), self.start, self.stop, step),
            (None, Some(points)) => Axis::with_points(self.name.clone(), self.start, self.stop, points),
            _ => return Err(config_err(&key, "give exactly one of step or points")),
        };
        axis.map_err(|e| config_err(&key, e))
    }
}
