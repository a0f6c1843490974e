//! Lossless Lorentz media and planar layer stacks.
//!
//! Internal units: ℏ = ε₀ = μ₀ = c = 1. Frequencies are measured in a
//! reference frequency (normally the first medium's ω_T) and lengths in
//! c/ω_ref.

use serde::{Deserialize, Serialize};

use crate::error::{HopfieldError, Result};

/// Relative width of the exclusion zone around ω_T.
pub const DEFAULT_POLE_GUARD: f64 = 1e-9;

/// Matter parameters of one homogeneous dielectric layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Transverse resonance ω_T.
    pub omega_t: f64,
    /// Mass density ρ.
    pub rho: f64,
    /// Light–matter coupling density κ.
    pub kappa: f64,
}

impl MediumParams {
    pub fn new(omega_t: f64, rho: f64, kappa: f64) -> Result<Self> {
        if !(omega_t > 0.0 && omega_t.is_finite()) {
            return Err(HopfieldError::InvalidInput(format!(
                "omega_T must be positive, got {omega_t}"
            )));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(HopfieldError::InvalidInput(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(HopfieldError::InvalidInput(format!(
                "kappa must be non-negative, got {kappa}"
            )));
        }
        Ok(Self { omega_t, rho, kappa })
    }

    /// Builds the medium from its phonon frequencies, inferring
    /// κ² = ρ (ω_LO² − ω_TO²).
    pub fn from_phonons(omega_to: f64, omega_lo: f64, rho: f64) -> Result<Self> {
        if omega_lo < omega_to {
            return Err(HopfieldError::InvalidInput(format!(
                "omega_LO ({omega_lo}) must not be below omega_TO ({omega_to})"
            )));
        }
        let kappa = (rho * (omega_lo * omega_lo - omega_to * omega_to)).sqrt();
        Self::new(omega_to, rho, kappa)
    }

    /// The reference test medium (ω_TO = 1, ω_LO = 1.2, ρ = 1).
    pub fn reference() -> Self {
        Self::from_phonons(1.0, 1.2, 1.0).expect("valid constants")
    }

    /// Squared plasma-like coupling κ²/(ε₀ρ).
    pub fn coupling_sq(&self) -> f64 {
        self.kappa * self.kappa / self.rho
    }

    pub fn omega_l(&self) -> f64 {
        longitudinal_frequency(self)
    }

    /// Frequency where ε(ω) = −1, the large-k limit of the surface branch.
    pub fn omega_surface(&self) -> f64 {
        let wl = self.omega_l();
        (0.5 * (self.omega_t * self.omega_t + wl * wl)).sqrt()
    }

    fn check_pole(&self, omega: f64, guard: f64) -> Result<()> {
        if (omega.abs() - self.omega_t).abs() < guard * self.omega_t {
            return Err(HopfieldError::PoleAtResonance {
                omega,
                omega_t: self.omega_t,
            });
        }
        Ok(())
    }

    /// Lorentz dielectric function (ω_L² − ω²)/(ω_T² − ω²).
    pub fn epsilon(&self, omega: f64) -> Result<f64> {
        self.epsilon_guarded(omega, DEFAULT_POLE_GUARD)
    }

    pub fn epsilon_guarded(&self, omega: f64, guard: f64) -> Result<f64> {
        self.check_pole(omega, guard)?;
        Ok(self.epsilon_unchecked(omega))
    }

    pub(crate) fn epsilon_unchecked(&self, omega: f64) -> f64 {
        let wt2 = self.omega_t * self.omega_t;
        let w2 = omega * omega;
        1.0 + self.coupling_sq() / (wt2 - w2)
    }

    /// Closed-form dε/dω.
    pub fn epsilon_derivative(&self, omega: f64) -> Result<f64> {
        self.check_pole(omega, DEFAULT_POLE_GUARD)?;
        let d = self.omega_t * self.omega_t - omega * omega;
        Ok(2.0 * omega * self.coupling_sq() / (d * d))
    }

    /// ν(ω) = 1 + (1/ε) ∂(εω)/∂ω = 2 + ω ε'(ω)/ε(ω).
    pub fn nu(&self, omega: f64) -> Result<f64> {
        let eps = self.epsilon(omega)?;
        if eps.abs() < 1e-14 {
            return Err(HopfieldError::ZeroEpsilon { omega });
        }
        Ok(2.0 + omega * self.epsilon_derivative(omega)? / eps)
    }

    /// ε(ω)ν(ω) = ∂(ε ω²)/∂ω / ω, finite at ω_L where ν alone is not.
    pub fn epsilon_nu(&self, omega: f64) -> Result<f64> {
        Ok(2.0 * self.epsilon(omega)? + omega * self.epsilon_derivative(omega)?)
    }
}

/// ω_L = sqrt(ω_T² + κ²/(ε₀ρ)).
pub fn longitudinal_frequency(m: &MediumParams) -> f64 {
    (m.omega_t * m.omega_t + m.coupling_sq()).sqrt()
}

/// ν for a region that may be vacuum (ν = 2 there).
pub fn nu(medium: Option<&MediumParams>, omega: f64) -> Result<f64> {
    match medium {
        Some(m) => m.nu(omega),
        None => Ok(2.0),
    }
}

/// ε for a region that may be vacuum.
pub fn epsilon(medium: Option<&MediumParams>, omega: f64) -> Result<f64> {
    match medium {
        Some(m) => m.epsilon(omega),
        None => Ok(1.0),
    }
}

/// One slab of the stack. `medium == None` marks vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub z_min: f64,
    pub z_max: f64,
    pub medium: Option<MediumParams>,
}

impl Layer {
    pub fn thickness(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.z_min && z <= self.z_max
    }
}

/// Planar stack along z inside the quantization box `[-L_z/2, L_z/2] × A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredGeometry {
    layers: Vec<Layer>,
    lz: f64,
    area: f64,
}

impl LayeredGeometry {
    /// Validates that the layers tile the box with no gaps or overlaps.
    pub fn new(mut layers: Vec<Layer>, lz: f64, area: f64) -> Result<Self> {
        if !(lz > 0.0 && area > 0.0) {
            return Err(HopfieldError::InvalidGeometry(format!(
                "box dimensions must be positive (Lz = {lz}, A = {area})"
            )));
        }
        if layers.is_empty() {
            return Err(HopfieldError::InvalidGeometry("no layers".into()));
        }
        layers.sort_by(|a, b| a.z_min.total_cmp(&b.z_min));
        let tol = 1e-12 * lz;
        let mut edge = -0.5 * lz;
        for layer in &layers {
            if layer.z_max <= layer.z_min {
                return Err(HopfieldError::InvalidGeometry(format!(
                    "empty layer [{}, {}]",
                    layer.z_min, layer.z_max
                )));
            }
            if (layer.z_min - edge).abs() > tol {
                return Err(HopfieldError::InvalidGeometry(format!(
                    "gap or overlap at z = {edge} (next layer starts at {})",
                    layer.z_min
                )));
            }
            edge = layer.z_max;
        }
        if (edge - 0.5 * lz).abs() > tol {
            return Err(HopfieldError::InvalidGeometry(format!(
                "layers end at {edge}, box edge is {}",
                0.5 * lz
            )));
        }
        Ok(Self { layers, lz, area })
    }

    /// Vacuum for z > 0 and `medium` for z < 0.
    pub fn interface(medium: MediumParams, lz: f64, area: f64) -> Self {
        let half = 0.5 * lz;
        Self::new(
            vec![
                Layer {
                    z_min: -half,
                    z_max: 0.0,
                    medium: Some(medium),
                },
                Layer {
                    z_min: 0.0,
                    z_max: half,
                    medium: None,
                },
            ],
            lz,
            area,
        )
        .expect("interface geometry is valid by construction")
    }

    /// A single homogeneous layer filling the box.
    pub fn homogeneous(medium: Option<MediumParams>, lz: f64, area: f64) -> Self {
        let half = 0.5 * lz;
        Self::new(
            vec![Layer {
                z_min: -half,
                z_max: half,
                medium,
            }],
            lz,
            area,
        )
        .expect("homogeneous geometry is valid by construction")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn lz(&self) -> f64 {
        self.lz
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn volume(&self) -> f64 {
        self.area * self.lz
    }

    /// Medium at height z; on a shared boundary the upper layer wins.
    pub fn medium_at(&self, z: f64) -> Option<&MediumParams> {
        self.layers
            .iter()
            .rev()
            .find(|l| l.contains(z))
            .and_then(|l| l.medium.as_ref())
    }

    /// Layers carrying matter.
    pub fn matter_layers(&self) -> impl Iterator<Item = &Layer> {
        self.layers.iter().filter(|l| l.medium.is_some())
    }

    /// Returns the dielectric of a vacuum (z > 0) / medium (z < 0) interface,
    /// or `None` if the stack has any other shape.
    pub fn interface_medium(&self) -> Option<MediumParams> {
        match self.layers.as_slice() {
            [lower, upper] if lower.z_max == 0.0 && upper.medium.is_none() => lower.medium,
            _ => None,
        }
    }

    /// True when the box is filled by vacuum only.
    pub fn is_vacuum(&self) -> bool {
        self.layers.iter().all(|l| l.medium.is_none())
    }
}
