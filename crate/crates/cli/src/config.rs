//! Run configuration and schema validation.

use std::fmt;
use std::path::Path;

use hopfield_core::dissipative::BathModel;
use hopfield_core::{ModeClass, MediumParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Schema violation located by a JSON pointer into the config document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "<root>" } else { &self.pointer };
        write!(f, "config error at {at}: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
pub enum UnitSystem {
    /// ℏ = c = 1 with frequencies in the config's own scale.
    #[default]
    #[serde(rename = "internal")]
    #[value(name = "internal")]
    Internal,
    /// Frequencies and c·k in cm⁻¹, lengths in µm.
    #[serde(rename = "cm-1")]
    #[value(name = "cm-1")]
    Wavenumber,
}

impl fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitSystem::Internal => "internal",
            UnitSystem::Wavenumber => "cm-1",
        })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub units: Option<UnitSystem>,
    /// cm⁻¹ per internal frequency unit; defaults to ω_T of the medium.
    pub reference_wavenumber: Option<f64>,
    pub tol: Option<f64>,
    pub medium: MediumConfig,
    pub geometry: GeometryConfig,
    pub dispersion: DispersionConfig,
    pub mode: ModeConfig,
    pub solve: SolveConfig,
    pub scatter: ScatterConfig,
    pub lossy: LossyConfig,
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub omega_t: f64,
    pub omega_l: f64,
    #[serde(default = "one")]
    pub rho: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for MediumConfig {
    fn default() -> Self {
        let m = MediumParams::reference();
        Self {
            omega_t: m.omega_t,
            omega_l: m.omega_l(),
            rho: m.rho,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub lz: Option<f64>,
    pub area: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { lz: None, area: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub points: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            k_min: None,
            k_max: None,
            points: 401,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub class: ModeClass,
    pub k_par: [f64; 2],
    #[serde(default)]
    pub k_z: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeConfig {
    pub class: ModeClass,
    pub k_par: Option<[f64; 2]>,
    pub k_z: Option<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub points: usize,
}

impl Default for ModeConfig {
    fn default() -> Self {
        Self {
            class: ModeClass::S,
            k_par: None,
            k_z: None,
            z_min: None,
            z_max: None,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationConfig {
    TE,
    #[default]
    TM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverConfig {
    #[default]
    Auto,
    Dense,
    Banded,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub polarization: PolarizationConfig,
    pub cells: usize,
    pub k_par: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub solver: SolverConfig,
    /// Eigenpair (position in the ascending list) whose Hopfield samples are written.
    pub export_mode: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            polarization: PolarizationConfig::TM,
            cells: 4000,
            k_par: None,
            window: None,
            solver: SolverConfig::Auto,
            export_mode: Some(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrationConfig {
    #[default]
    Analytic,
    Adaptive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterConfig {
    pub modes: Option<Vec<ModeSpec>>,
    /// `{"order": n, "components": nested arrays}`; defaults to the diagonal tensor.
    pub tensor: Option<Value>,
    pub integration: IntegrationConfig,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            modes: None,
            tensor: None,
            integration: IntegrationConfig::Analytic,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetConfig {
    pub z: f64,
    /// Complex amplitude [re, im].
    pub amplitude: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivenConfig {
    pub omega: f64,
    #[serde(default)]
    pub k_par: f64,
    pub sheets: Vec<SheetConfig>,
    pub z_min: f64,
    pub z_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    201
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossyConfig {
    pub bath: Option<BathModel>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: usize,
    pub driven: Option<DrivenConfig>,
}

impl Default for LossyConfig {
    fn default() -> Self {
        Self {
            bath: None,
            omega_min: None,
            omega_max: None,
            points: 281,
            driven: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub criteria: Vec<u8>,
    pub seed: Option<u64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            criteria: hopfield_core::verify::CRITERIA.to_vec(),
            seed: None,
        }
    }
}

fn to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        let part = match seg {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } => key.replace('~', "~0").replace('/', "~1"),
            Segment::Enum { variant } => variant.clone(),
            Segment::Unknown => continue,
        };
        out.push('/');
        out.push_str(&part);
    }
    out
}

/// Parses a config document; schema errors carry the JSON pointer of the
/// offending value.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError::new("", format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column())))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = to_pointer(e.path());
        ConfigError::new(pointer, e.into_inner().to_string())
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

fn positive(pointer: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(pointer, format!("must be a positive finite number, got {v}")))
    }
}

fn ordered(pointer: &str, lo: Option<f64>, hi: Option<f64>) -> Result<(), ConfigError> {
    if let (Some(a), Some(b)) = (lo, hi) {
        if !(a < b) {
            return Err(ConfigError::new(pointer, format!("sweep bounds must be ordered, got [{a}, {b}]")));
        }
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if let Some(r) = cfg.reference_wavenumber {
        positive("/reference_wavenumber", r)?;
    }
    if let Some(t) = cfg.tol {
        positive("/tol", t)?;
    }
    let m = &cfg.medium;
    positive("/medium/omega_t", m.omega_t)?;
    positive("/medium/rho", m.rho)?;
    if !(m.omega_l > m.omega_t && m.omega_l.is_finite()) {
        return Err(ConfigError::new("/medium/omega_l", format!("must exceed omega_t = {}, got {}", m.omega_t, m.omega_l)));
    }
    if let Some(lz) = cfg.geometry.lz {
        positive("/geometry/lz", lz)?;
    }
    positive("/geometry/area", cfg.geometry.area)?;

    let d = &cfg.dispersion;
    if let Some(k) = d.k_min {
        positive("/dispersion/k_min", k)?;
    }
    ordered("/dispersion/k_max", d.k_min, d.k_max)?;
    if d.points < 2 {
        return Err(ConfigError::new("/dispersion/points", "need at least 2 points"));
    }

    let md = &cfg.mode;
    ordered("/mode/z_max", md.z_min, md.z_max)?;
    if md.points < 1 {
        return Err(ConfigError::new("/mode/points", "need at least 1 point"));
    }
    match (md.class, md.k_z) {
        (ModeClass::S, Some(_)) => return Err(ConfigError::new("/mode/k_z", "surface modes take no k_z")),
        (c, None) if c != ModeClass::S => return Err(ConfigError::new("/mode/k_z", format!("class {c} needs k_z"))),
        _ => {}
    }

    let s = &cfg.solve;
    if s.cells < 16 {
        return Err(ConfigError::new("/solve/cells", format!("need at least 16 cells, got {}", s.cells)));
    }
    if let Some(k) = s.k_par {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(ConfigError::new("/solve/k_par", format!("must be non-negative, got {k}")));
        }
    }
    if let Some([lo, hi]) = s.window {
        ordered("/solve/window", Some(lo), Some(hi))?;
    }

    if let Some(modes) = &cfg.scatter.modes {
        if modes.len() < 2 {
            return Err(ConfigError::new("/scatter/modes", "need at least two modes"));
        }
        for (i, spec) in modes.iter().enumerate() {
            if (spec.class == ModeClass::S) == spec.k_z.is_some() {
                return Err(ConfigError::new(
                    format!("/scatter/modes/{i}/k_z"),
                    "k_z is required for bulk classes and forbidden for S",
                ));
            }
        }
    }

    let l = &cfg.lossy;
    if let Some(w) = l.omega_min {
        positive("/lossy/omega_min", w)?;
    }
    ordered("/lossy/omega_max", l.omega_min, l.omega_max)?;
    if l.points < 2 {
        return Err(ConfigError::new("/lossy/points", "need at least 2 points"));
    }
    if let Some(b) = &l.bath {
        b.validate().map_err(|e| ConfigError::new("/lossy/bath", e.to_string()))?;
    }
    if let Some(dr) = &l.driven {
        positive("/lossy/driven/omega", dr.omega)?;
        ordered("/lossy/driven/z_max", Some(dr.z_min), Some(dr.z_max))?;
        if dr.points < 2 {
            return Err(ConfigError::new("/lossy/driven/points", "need at least 2 points"));
        }
    }

    for (i, &c) in cfg.verify.criteria.iter().enumerate() {
        if !hopfield_core::verify::CRITERIA.contains(&c) {
            return Err(ConfigError::new(format!("/verify/criteria/{i}"), format!("no criterion {c}")));
        }
    }
    Ok(())
}
