//! Dispersion relations of the vacuum / polar-dielectric interface: vacuum
//! photons, lower and upper bulk phonon polaritons, and the surface branch.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HopfieldError, Result};
use crate::media::MediumParams;

/// Solution families of the planar interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeClass {
    TMv,
    TMl,
    TMu,
    TEv,
    TEl,
    TEu,
    S,
}

impl ModeClass {
    pub const ALL: [ModeClass; 7] = [
        ModeClass::TMv,
        ModeClass::TMl,
        ModeClass::TMu,
        ModeClass::TEv,
        ModeClass::TEl,
        ModeClass::TEu,
        ModeClass::S,
    ];

    pub fn is_te(self) -> bool {
        matches!(self, ModeClass::TEv | ModeClass::TEl | ModeClass::TEu)
    }

    /// Incident from the vacuum half-space.
    pub fn from_vacuum(self) -> bool {
        matches!(self, ModeClass::TEv | ModeClass::TMv)
    }

    /// Incident from the dielectric half-space.
    pub fn from_dielectric(self) -> bool {
        matches!(
            self,
            ModeClass::TEl | ModeClass::TEu | ModeClass::TMl | ModeClass::TMu
        )
    }

    pub fn is_upper(self) -> bool {
        matches!(self, ModeClass::TEu | ModeClass::TMu)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::TMv => "TMv",
            ModeClass::TMl => "TMl",
            ModeClass::TMu => "TMu",
            ModeClass::TEv => "TEv",
            ModeClass::TEl => "TEl",
            ModeClass::TEu => "TEu",
            ModeClass::S => "S",
        }
    }
}

impl fmt::Display for ModeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModeClass {
    type Err = HopfieldError;

    fn from_str(s: &str) -> Result<Self> {
        ModeClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| HopfieldError::InvalidInput(format!("unknown mode class `{s}`")))
    }
}

/// Class plus wavevector labels of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeIndex {
    pub class: ModeClass,
    /// In-plane wavevector (x, y).
    pub k_par: [f64; 2],
    /// Out-of-plane wavevector in the medium of origin; absent for S.
    pub k_z: Option<f64>,
}

impl ModeIndex {
    pub fn new(class: ModeClass, k_par: [f64; 2], k_z: Option<f64>) -> Result<Self> {
        match (class, k_z) {
            (ModeClass::S, None) => {}
            (ModeClass::S, Some(_)) => {
                return Err(HopfieldError::InvalidInput(
                    "surface modes carry no k_z".into(),
                ))
            }
            (c, Some(kz)) if c.from_vacuum() && kz > 0.0 => {}
            (c, Some(kz)) if c.from_dielectric() && kz < 0.0 => {}
            (c, kz) => {
                return Err(HopfieldError::InvalidInput(format!(
                    "class {c} requires k_z {} (got {kz:?})",
                    if c.from_vacuum() { "> 0" } else { "< 0" }
                )))
            }
        }
        Ok(Self { class, k_par, k_z })
    }

    pub fn surface(k_par: [f64; 2]) -> Self {
        Self {
            class: ModeClass::S,
            k_par,
            k_z: None,
        }
    }

    pub fn k_par_norm(&self) -> f64 {
        self.k_par[0].hypot(self.k_par[1])
    }

    /// |k| in the medium of origin.
    pub fn k_norm(&self) -> f64 {
        self.k_par_norm().hypot(self.k_z.unwrap_or(0.0))
    }

    /// Eigenfrequency of the labelled mode.
    pub fn omega(&self, m: &MediumParams) -> Result<f64> {
        match self.class {
            ModeClass::TEv | ModeClass::TMv => Ok(self.k_norm()),
            ModeClass::TEl | ModeClass::TMl => Ok(bulk_branches(m, self.k_norm())?.0),
            ModeClass::TEu | ModeClass::TMu => Ok(bulk_branches(m, self.k_norm())?.1),
            ModeClass::S => surface_dispersion_omega(m, self.k_par_norm()),
        }
    }
}

/// Roots of ω⁴ − ω²(ω_L² + k²) + k²ω_T² = 0 as (ω_lower, ω_upper).
pub fn bulk_branches(m: &MediumParams, k: f64) -> Result<(f64, f64)> {
    if !(k >= 0.0) {
        return Err(HopfieldError::InvalidInput(format!(
            "wavevector must be non-negative, got {k}"
        )));
    }
    let wl2 = m.omega_l().powi(2);
    let wt2 = m.omega_t * m.omega_t;
    let k2 = k * k;
    let b = wl2 + k2;
    let c = k2 * wt2;
    // b > 0, so q = (b + sqrt(b² − 4c))/2 is the cancellation-free root
    let disc = (b * b - 4.0 * c).max(0.0);
    let q = 0.5 * (b + disc.sqrt());
    let upper = q.sqrt();
    let lower = if q > 0.0 { (c / q).sqrt() } else { 0.0 };
    Ok((lower, upper))
}

/// Surface-branch in-plane wavevector k∥ = (ω/c) sqrt(ε/(1+ε)).
pub fn surface_dispersion_kpar(m: &MediumParams, omega: f64) -> Result<f64> {
    let eps = m.epsilon(omega)?;
    if !(eps < -1.0) || omega <= m.omega_t {
        return Err(HopfieldError::OutsideSurfaceWindow {
            omega,
            epsilon: eps,
        });
    }
    Ok(omega * (eps / (1.0 + eps)).sqrt())
}

/// Inverse of [`surface_dispersion_kpar`] on the window (ω_T, ω_surf).
///
/// The pole-free residual p(ω) = (ω_L² − ω²)ω² − k²(ω_T² + ω_L² − 2ω²) has a
/// single sign change inside the window; it is bracketed and refined by a
/// bisection-safeguarded secant iteration.
pub fn surface_dispersion_omega(m: &MediumParams, k_par: f64) -> Result<f64> {
    let wt = m.omega_t;
    if k_par < wt {
        return Err(HopfieldError::BelowLightLineEdge {
            k_par,
            omega_t: wt,
        });
    }
    if k_par == wt {
        return Ok(wt);
    }
    let wl2 = m.omega_l().powi(2);
    let wt2 = wt * wt;
    let k2 = k_par * k_par;
    let residual = |w: f64| {
        let w2 = w * w;
        (wl2 - w2) * w2 - k2 * (wt2 + wl2 - 2.0 * w2)
    };
    let mut lo = wt;
    let mut hi = m.omega_surface();
    let mut f_lo = residual(lo);
    let mut f_hi = residual(hi);
    // f_lo < 0 < f_hi for k∥ > ω_T
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(HopfieldError::InvalidInput(format!(
            "surface root not bracketed for k_par = {k_par}"
        )));
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..200 {
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let mid = 0.5 * (lo + hi);
        w = if secant > lo && secant < hi { secant } else { mid };
        // fall back to bisection when the secant stalls at one end
        if (w - lo).min(hi - w) < 1e-3 * (hi - lo) {
            w = mid;
        }
        let fw = residual(w);
        if fw == 0.0 {
            return Ok(w);
        }
        if fw < 0.0 {
            lo = w;
            f_lo = fw;
        } else {
            hi = w;
            f_hi = fw;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> MediumParams {
        MediumParams::reference()
    }

    /// Independent oracle: the surface condition is quadratic in ω²,
    /// ω⁴ − ω²(ω_L² + 2k²) + k²(ω_T² + ω_L²) = 0; the lower root is the surface branch.
    fn surface_closed_form(m: &MediumParams, k: f64) -> f64 {
        let wl2 = m.omega_l().powi(2);
        let wt2 = m.omega_t.powi(2);
        let b = wl2 + 2.0 * k * k;
        let c = k * k * (wt2 + wl2);
        let big = 0.5 * (b + (b * b - 4.0 * c).sqrt());
        (c / big).sqrt()
    }

    #[test]
    fn bulk_examples() {
        let m = reference();
        let (l, u) = bulk_branches(&m, 0.0).unwrap();
        assert_eq!(l, 0.0);
        assert!((u - 1.2).abs() < 1e-15);
        let (l, u) = bulk_branches(&m, 1.0).unwrap();
        assert!((l - 0.721_904).abs() < 1e-5, "{l}");
        assert!((u - 1.385_227).abs() < 1e-5, "{u}");
        assert!(((l * u).powi(2) - 1.0).abs() < 1e-12);
        let (l, u) = bulk_branches(&m, 1e4).unwrap();
        assert!((l - 1.0).abs() < 1e-8);
        assert!((u / 1e4 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn surface_examples() {
        let m = reference();
        let k = surface_dispersion_kpar(&m, 1.1).unwrap();
        // ε = −23/21, ε/(1+ε) = 11.5
        assert!((k - 1.1 * 11.5f64.sqrt()).abs() < 1e-13);
        assert!((k - 3.730_28).abs() < 1e-5);
        let w = surface_dispersion_omega(&m, k).unwrap();
        assert!((w - 1.1).abs() < 1e-10);
        assert_eq!(surface_dispersion_omega(&m, 1.0).unwrap(), 1.0);
        let w = surface_dispersion_omega(&m, 100.0).unwrap();
        assert!((w - m.omega_surface()).abs() < 1e-4);
        let near = surface_dispersion_kpar(&m, 1.0 + 1e-7).unwrap();
        assert!((near - 1.0).abs() < 1e-5);
    }

    #[test]
    fn surface_errors() {
        let m = reference();
        assert!(matches!(
            surface_dispersion_kpar(&m, 1.15),
            Err(HopfieldError::OutsideSurfaceWindow { .. })
        ));
        assert!(matches!(
            surface_dispersion_kpar(&m, 0.5),
            Err(HopfieldError::OutsideSurfaceWindow { .. })
        ));
        assert!(matches!(
            surface_dispersion_omega(&m, 0.9),
            Err(HopfieldError::BelowLightLineEdge { .. })
        ));
    }

    #[test]
    fn surface_root_matches_quadratic_oracle() {
        let m = reference();
        for k in [1.001, 1.5, 2.0, 3.73, 10.0, 100.0] {
            let w = surface_dispersion_omega(&m, k).unwrap();
            let oracle = surface_closed_form(&m, k);
            assert!(((w - oracle) / oracle).abs() < 1e-12, "k={k}: {w} vs {oracle}");
        }
    }

    #[test]
    fn mode_index_rules() {
        assert!(ModeIndex::new(ModeClass::TEv, [1.0, 0.0], Some(-1.0)).is_err());
        assert!(ModeIndex::new(ModeClass::TMl, [1.0, 0.0], Some(-1.0)).is_ok());
        assert!(ModeIndex::new(ModeClass::S, [1.0, 0.0], Some(1.0)).is_err());
        assert_eq!("tmu".parse::<ModeClass>().unwrap(), ModeClass::TMu);
    }

    fn medium_strategy() -> impl Strategy<Value = MediumParams> {
        (0.2f64..5.0, 0.01f64..3.0, 0.1f64..10.0).prop_map(|(wt, gap, rho)| {
            MediumParams::from_phonons(wt, wt * (1.0 + gap), rho).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn vieta_and_ordering(m in medium_strategy(), k in 1e-3f64..50.0) {
            let (l, u) = bulk_branches(&m, k).unwrap();
            let wl2 = m.omega_l().powi(2);
            let sum = wl2 + k * k;
            let prod = k * k * m.omega_t.powi(2);
            prop_assert!(((l * l + u * u) - sum).abs() <= 1e-12 * sum);
            prop_assert!(((l * l * u * u) - prod).abs() <= 1e-12 * prod);
            prop_assert!(l < m.omega_t && m.omega_t <= m.omega_l() && m.omega_l() <= u);
        }

        #[test]
        fn surface_round_trip(m in medium_strategy(), t in 0.001f64..0.999) {
            let w = m.omega_t + t * (m.omega_surface() - m.omega_t);
            let k = surface_dispersion_kpar(&m, w).unwrap();
            let back = surface_dispersion_omega(&m, k).unwrap();
            prop_assert!((back - w).abs() <= 1e-10 * m.omega_t);
        }

        #[test]
        fn surface_monotone(m in medium_strategy(), a in 1.0f64..20.0, d in 1e-3f64..5.0) {
            let k1 = a * m.omega_t;
            let k2 = k1 + d * m.omega_t;
            let w1 = surface_dispersion_omega(&m, k1).unwrap();
            let w2 = surface_dispersion_omega(&m, k2).unwrap();
            prop_assert!(w2 > w1);
        }

        #[test]
        fn window_characterizations_agree(m in medium_strategy(), s in 0.5f64..1.5) {
            let w = s * m.omega_l();
            prop_assume!((w - m.omega_t).abs() > 1e-6 && (w - m.omega_surface()).abs() > 1e-9);
            let by_eps = m.epsilon(w).unwrap() < -1.0;
            let by_window = w > m.omega_t && w < m.omega_surface();
            prop_assert_eq!(by_eps, by_window);
        }
    }
}
