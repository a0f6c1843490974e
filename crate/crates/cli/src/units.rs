//! Conversion between config units and the internal ℏ = c = 1 scale.

use crate::config::{RunConfig, UnitSystem};
use hopfield_core::MediumParams;

/// Frequencies scale by `nu_ref` (cm⁻¹ per internal unit); lengths are µm
/// in wavenumber mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub system: UnitSystem,
    pub nu_ref: f64,
}

impl Units {
    pub fn resolve(cfg: &RunConfig, flag: Option<UnitSystem>) -> Self {
        let system = flag.or(cfg.units).unwrap_or_default();
        let nu_ref = match system {
            UnitSystem::Internal => 1.0,
            UnitSystem::Wavenumber => cfg.reference_wavenumber.unwrap_or(cfg.medium.omega_t),
        };
        Self { system, nu_ref }
    }

    /// Frequency or c·k into internal units.
    pub fn freq_in(&self, v: f64) -> f64 {
        v / self.nu_ref
    }

    pub fn freq_out(&self, v: f64) -> f64 {
        v * self.nu_ref
    }

    fn length_factor(&self) -> f64 {
        match self.system {
            UnitSystem::Internal => 1.0,
            // z·ω_ref/c with ω_ref = 2πc·ν̃_ref, z in µm
            UnitSystem::Wavenumber => 2.0 * std::f64::consts::PI * self.nu_ref * 1e-4,
        }
    }

    pub fn length_in(&self, v: f64) -> f64 {
        v * self.length_factor()
    }

    pub fn length_out(&self, v: f64) -> f64 {
        v / self.length_factor()
    }

    /// Bath coupling υ has units of sqrt(frequency).
    pub fn coupling_in(&self, v: f64) -> f64 {
        v / self.nu_ref.sqrt()
    }

    pub fn medium(&self, cfg: &RunConfig) -> hopfield_core::Result<MediumParams> {
        let m = &cfg.medium;
        MediumParams::from_phonons(self.freq_in(m.omega_t), self.freq_in(m.omega_l), m.rho)
    }

    pub fn label(&self) -> &'static str {
        match self.system {
            UnitSystem::Internal => "internal",
            UnitSystem::Wavenumber => "cm-1",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_round_trip() {
        let cfg = RunConfig {
            reference_wavenumber: Some(800.0),
            ..RunConfig::default()
        };
        let u = Units::resolve(&cfg, Some(UnitSystem::Wavenumber));
        assert_eq!(u.freq_in(800.0), 1.0);
        assert!((u.length_out(u.length_in(3.5)) - 3.5).abs() < 1e-15);
        // 1 internal length unit is c/ω_ref = 1/(2π·800 cm⁻¹) ≈ 1.989 µm
        assert!((u.length_out(1.0) - 1e4 / (2.0 * std::f64::consts::PI * 800.0)).abs() < 1e-12);
        assert_eq!(Units::resolve(&cfg, None).nu_ref, 1.0);
    }
}
