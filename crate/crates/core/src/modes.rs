//! Analytic polariton modes of the vacuum / dielectric interface.
//!
//! Each mode is described by the auxiliary field θ, a solution of
//! ∇×∇×θ = ω²ε(ω)θ with in-plane dependence e^{−i k∥·r∥}. The Hopfield
//! coefficients follow algebraically from θ:
//!
//! ```text
//! α = θᵀ,   β = (i/ω) ∇×θ,
//! γ = i κω / (ρ(ω_T² − ω²)) θ,   η = κω² / (ω_T² − ω²) θ   (matter only)
//! ```
//!
//! Vacuum occupies z > 0 and the dielectric z < 0. Units: ℏ = ε₀ = μ₀ = c = 1.

use num_complex::Complex64;

use crate::dispersion::{ModeClass, ModeIndex};
use crate::error::{HopfieldError, Result};
use crate::media::{LayeredGeometry, MediumParams};
use crate::profile::{c, cvec, exp_integral_semi, CVec3, ExpTerm, FieldProfile, Region, Side};
use crate::quad::{integrate, integrate_to_infinity, QuadConfig};

/// Relative agreement required between closed-form and quadrature normalization.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Unit vectors (ê∥, ê⊥, ê_z); ê∥ = x̂ and ê⊥ = ŷ when k∥ = 0.
pub fn in_plane_basis(k_par: [f64; 2]) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let k = k_par[0].hypot(k_par[1]);
    let (ux, uy) = if k == 0.0 {
        (1.0, 0.0)
    } else {
        (k_par[0] / k, k_par[1] / k)
    };
    ([ux, uy, 0.0], [-uy, ux, 0.0], [0.0, 0.0, 1.0])
}

fn real_vec(v: [f64; 3]) -> CVec3 {
    cvec([c(v[0], 0.0), c(v[1], 0.0), c(v[2], 0.0)])
}

/// Gradient vector of e^{−i k∥·r∥} e^{λ z}.
fn gradient(k_par: [f64; 2], lambda: Complex64) -> CVec3 {
    cvec([c(0.0, -k_par[0]), c(0.0, -k_par[1]), lambda])
}

/// z-wavevector of the transmitted wave for radicand εω² − k∥².
///
/// Propagating waves keep the sign of the incident k_z; evanescent ones decay
/// away from the interface into the transmission half-space.
pub fn transmitted_kz(radicand: f64, incident_sign: f64, scale: f64) -> Result<Complex64> {
    if radicand.abs() <= 1e-12 * scale {
        return Err(HopfieldError::EvanescentBranchAmbiguity { radicand });
    }
    let root = if radicand > 0.0 {
        c(radicand.sqrt(), 0.0)
    } else {
        c(0.0, -(-radicand).sqrt())
    };
    Ok(root * incident_sign.signum())
}

/// TE Fresnel coefficients for a wave incident from vacuum with wavevector
/// (k∥, k_z), k_z > 0, onto the dielectric `m`.
pub fn fresnel_te(m: &MediumParams, k_par: f64, k_z: f64) -> Result<(Complex64, Complex64)> {
    if !(k_z > 0.0) {
        return Err(HopfieldError::InvalidInput(format!(
            "vacuum-incident waves need k_z > 0, got {k_z}"
        )));
    }
    let omega = k_par.hypot(k_z);
    let eps = m.epsilon(omega)?;
    let q = transmitted_kz(eps * omega * omega - k_par * k_par, 1.0, omega * omega)?;
    Ok(te_coefficients(c(k_z, 0.0), q))
}

/// r = (k_z − q)/(k_z + q), t = 2k_z/(k_z + q).
fn te_coefficients(kz: Complex64, q: Complex64) -> (Complex64, Complex64) {
    let d = kz + q;
    ((kz - q) / d, kz * 2.0 / d)
}

/// Coefficients for the TM potential ψ (tangential H-like field):
/// ψ and ψ'/ε continuous.
fn tm_coefficients(eps_in: f64, kz: Complex64, eps_out: f64, q: Complex64) -> (Complex64, Complex64) {
    let num = kz * eps_out - q * eps_in;
    let den = kz * eps_out + q * eps_in;
    let r = num / den;
    (r, r + 1.0)
}

/// θ of one mode, with normalization constant N kept separate from the shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaProfile {
    pub index: ModeIndex,
    /// Signed eigenfrequency (negative for the conjugate partner).
    pub omega: f64,
    /// Normalization constant N (1 before [`normalize`]).
    pub norm: f64,
    /// Dielectric filling z < 0; `None` for a vacuum-only box.
    pub medium: Option<MediumParams>,
    shape: FieldProfile,
}

impl ThetaProfile {
    /// The N = 1 profile.
    pub fn shape(&self) -> &FieldProfile {
        &self.shape
    }

    pub fn profile(&self) -> FieldProfile {
        self.shape.scale(c(self.norm, 0.0))
    }

    pub fn eval(&self, r: [f64; 3]) -> CVec3 {
        self.shape.eval(r) * c(self.norm, 0.0)
    }

    /// Medium of a region of the profile.
    pub fn region_medium(&self, region: &Region) -> Option<&MediumParams> {
        if region.z_max <= 0.0 {
            self.medium.as_ref()
        } else {
            None
        }
    }

    pub fn medium_at(&self, z: f64) -> Option<&MediumParams> {
        if z < 0.0 {
            self.medium.as_ref()
        } else {
            None
        }
    }

    fn region_epsilon(&self, region: &Region) -> Result<f64> {
        match self.region_medium(region) {
            Some(m) => m.epsilon(self.omega),
            None => Ok(1.0),
        }
    }

    fn region_epsilon_nu(&self, region: &Region) -> Result<f64> {
        match self.region_medium(region) {
            Some(m) => m.epsilon_nu(self.omega),
            None => Ok(2.0),
        }
    }

    /// Conjugate partner: θ̄ with eigenfrequency −ω.
    pub fn negative_partner(&self) -> ThetaProfile {
        ThetaProfile {
            index: self.index,
            omega: -self.omega,
            norm: self.norm,
            medium: self.medium,
            shape: self.shape.conj(),
        }
    }

    /// ∇×∇×θ − ω²εθ as an exact profile.
    pub fn wave_residual(&self) -> Result<FieldProfile> {
        let w2 = self.omega * self.omega;
        let eps: Vec<f64> = self
            .shape
            .regions()
            .iter()
            .map(|r| self.region_epsilon(r))
            .collect::<Result<_>>()?;
        let cc = self.shape.curl().curl();
        let regions = cc
            .regions()
            .iter()
            .zip(self.shape.regions())
            .zip(eps)
            .map(|((a, b), e)| Region {
                z_min: a.z_min,
                z_max: a.z_max,
                terms: a
                    .terms
                    .iter()
                    .zip(&b.terms)
                    .map(|(x, y)| ExpTerm::new(x.amp - y.amp * c(w2 * e, 0.0), x.g))
                    .collect(),
            })
            .collect();
        Ok(FieldProfile::new(regions).scale(c(self.norm, 0.0)))
    }

    /// Pointwise wave-equation residual at r, relative to the size of the
    /// two terms it balances.
    pub fn relative_wave_residual(&self, r: [f64; 3]) -> Result<f64> {
        let residual = self.wave_residual()?.eval(r).norm();
        let side = Side::Above;
        let idx = self.shape.region_index(r[2], side).unwrap_or(0);
        let region = &self.shape.regions()[idx];
        let eps = self.region_epsilon(region)?.abs();
        let w2 = self.omega * self.omega;
        let scale: f64 = region
            .terms
            .iter()
            .map(|t| {
                let g2: f64 = t.g.iter().map(|x| x.norm_sqr()).sum();
                t.amp.norm() * t.phase(r).norm() * (g2 + w2 * eps)
            })
            .sum::<f64>()
            * self.norm;
        Ok(if scale == 0.0 { residual } else { residual / scale })
    }

    /// Jumps across z = 0 at in-plane point (x, y): tangential θ, normal εθ,
    /// tangential ∇×θ. Each is relative to the local field size.
    pub fn interface_jumps(&self, x: f64, y: f64) -> Result<InterfaceJumps> {
        let r = [x, y, 0.0];
        let below = self.shape.eval_side(r, Side::Below);
        let above = self.shape.eval_side(r, Side::Above);
        let curl = self.shape.curl();
        let cb = curl.eval_side(r, Side::Below);
        let ca = curl.eval_side(r, Side::Above);
        let eps_below = match self.medium_at(-1.0) {
            Some(m) => m.epsilon(self.omega)?,
            None => 1.0,
        };
        let tangential = |v: &CVec3| CVec3::new(v[0], v[1], c(0.0, 0.0));
        let scale = above.norm().max(below.norm()).max(1e-300);
        let cscale = ca.norm().max(cb.norm()).max(1e-300);
        Ok(InterfaceJumps {
            tangential_theta: (tangential(&above) - tangential(&below)).norm() / scale,
            normal_d: (above[2] - below[2] * eps_below).norm()
                / (above[2].norm().max((below[2] * eps_below).norm()).max(1e-300)),
            tangential_curl: (tangential(&ca) - tangential(&cb)).norm() / cscale,
        })
    }
}

/// Relative discontinuities of a mode across the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceJumps {
    pub tangential_theta: f64,
    pub normal_d: f64,
    pub tangential_curl: f64,
}

impl InterfaceJumps {
    pub fn max(&self) -> f64 {
        self.tangential_theta
            .max(self.normal_d)
            .max(self.tangential_curl)
    }
}

fn half_spaces(upper: Vec<ExpTerm>, lower: Vec<ExpTerm>) -> FieldProfile {
    FieldProfile::new(vec![
        Region {
            z_min: f64::NEG_INFINITY,
            z_max: 0.0,
            terms: lower,
        },
        Region {
            z_min: 0.0,
            z_max: f64::INFINITY,
            terms: upper,
        },
    ])
}

/// Builds the unnormalized (N = 1) θ of mode `idx`.
pub fn build_theta(geom: &LayeredGeometry, idx: &ModeIndex) -> Result<ThetaProfile> {
    if geom.is_vacuum() {
        return build_vacuum_plane_wave(idx);
    }
    let m = geom.interface_medium().ok_or_else(|| {
        HopfieldError::InvalidGeometry(
            "analytic modes need vacuum above z = 0 and one dielectric below".into(),
        )
    })?;
    let omega = idx.omega(&m)?;
    let shape = match idx.class {
        ModeClass::S => surface_shape(&m, idx, omega)?,
        class => scattering_shape(&m, idx, omega, class.is_te())?,
    };
    Ok(ThetaProfile {
        index: *idx,
        omega,
        norm: 1.0,
        medium: Some(m),
        shape,
    })
}

fn build_vacuum_plane_wave(idx: &ModeIndex) -> Result<ThetaProfile> {
    let kz = match (idx.class, idx.k_z) {
        (ModeClass::TEv | ModeClass::TMv, Some(kz)) => kz,
        _ => {
            return Err(HopfieldError::InvalidGeometry(format!(
                "a vacuum box only hosts TEv/TMv modes, not {}",
                idx.class
            )))
        }
    };
    let omega = idx.k_norm();
    let (_, e_perp, _) = in_plane_basis(idx.k_par);
    let g = gradient(idx.k_par, c(0.0, kz));
    let amp = if idx.class.is_te() {
        real_vec(e_perp)
    } else {
        g.cross(&real_vec(e_perp)) / c(omega, 0.0)
    };
    let shape = FieldProfile::new(vec![Region {
        z_min: f64::NEG_INFINITY,
        z_max: f64::INFINITY,
        terms: vec![ExpTerm::new(amp, g)],
    }]);
    Ok(ThetaProfile {
        index: *idx,
        omega,
        norm: 1.0,
        medium: None,
        shape,
    })
}

/// Incident + reflected wave in the medium of origin, transmitted wave in the
/// other half-space.
fn scattering_shape(m: &MediumParams, idx: &ModeIndex, omega: f64, te: bool) -> Result<FieldProfile> {
    let kz = idx
        .k_z
        .ok_or_else(|| HopfieldError::InvalidInput("bulk modes need k_z".into()))?;
    let kp = idx.k_par_norm();
    let eps_l = m.epsilon(omega)?;
    let from_vacuum = idx.class.from_vacuum();
    let (eps_in, eps_out) = if from_vacuum { (1.0, eps_l) } else { (eps_l, 1.0) };
    let w2 = omega * omega;
    let q = transmitted_kz(eps_out * w2 - kp * kp, kz, w2.max(kp * kp))?;
    let kz_c = c(kz, 0.0);
    let g_inc = gradient(idx.k_par, c(0.0, kz));
    let g_ref = gradient(idx.k_par, c(0.0, -kz));
    let g_tr = gradient(idx.k_par, c(0.0, 1.0) * q);
    let (_, e_perp, _) = in_plane_basis(idx.k_par);
    let e_perp = real_vec(e_perp);

    let (inc, refl, trans) = if te {
        let (r, t) = te_coefficients(kz_c, q);
        (
            ExpTerm::new(e_perp, g_inc),
            ExpTerm::new(e_perp * r, g_ref),
            ExpTerm::new(e_perp * t, g_tr),
        )
    } else {
        let (r, t) = tm_coefficients(eps_in, kz_c, eps_out, q);
        // θ = ∇×(ψ ê⊥)/(ω²ε); ψ scaled so the incident θ has unit amplitude
        let s = c(w2 * eps_in / kp.hypot(kz), 0.0);
        let amp = |g: &CVec3, psi: Complex64, eps: f64| g.cross(&e_perp) * (psi * s / (w2 * eps));
        (
            ExpTerm::new(amp(&g_inc, c(1.0, 0.0), eps_in), g_inc),
            ExpTerm::new(amp(&g_ref, r, eps_in), g_ref),
            ExpTerm::new(amp(&g_tr, t, eps_out), g_tr),
        )
    };
    Ok(if from_vacuum {
        half_spaces(vec![inc, refl], vec![trans])
    } else {
        half_spaces(vec![trans], vec![inc, refl])
    })
}

/// Surface mode, unit ê_z amplitude on the vacuum side.
fn surface_shape(m: &MediumParams, idx: &ModeIndex, omega: f64) -> Result<FieldProfile> {
    let kp = idx.k_par_norm();
    if kp < m.omega_t {
        return Err(HopfieldError::BelowLightLineEdge {
            k_par: kp,
            omega_t: m.omega_t,
        });
    }
    let eps = m.epsilon(omega)?;
    if !(eps < -1.0) {
        return Err(HopfieldError::OutsideSurfaceWindow {
            omega,
            epsilon: eps,
        });
    }
    let s = (-eps).sqrt();
    let sqrt_eps = c(0.0, -s);
    let decay_vac = kp / s;
    let decay_med = kp * s;
    let (e_par, _, e_z) = in_plane_basis(idx.k_par);
    let (e_par, e_z) = (real_vec(e_par), real_vec(e_z));
    let upper = ExpTerm::new(
        e_par / sqrt_eps + e_z,
        gradient(idx.k_par, c(-decay_vac, 0.0)),
    );
    let lower = ExpTerm::new(
        (e_par * sqrt_eps + e_z) / c(eps, 0.0),
        gradient(idx.k_par, c(decay_med, 0.0)),
    );
    Ok(half_spaces(vec![upper], vec![lower]))
}

/// Closed-form surface-mode normalization
/// N² = k∥/(ωA) · [1 + ν_L/(2ε_L)]⁻¹ · [1/√(−ε_L) + √(−ε_L)]⁻¹.
pub fn surface_norm_closed_form(m: &MediumParams, omega: f64, k_par: f64, area: f64) -> Result<f64> {
    let eps = m.epsilon(omega)?;
    let nu = m.nu(omega)?;
    let s = (-eps).sqrt();
    let bracket = 1.0 + nu / (2.0 * eps);
    let n2 = k_par / (omega.abs() * area) / bracket / (1.0 / s + s);
    if !(n2 > 0.0) {
        return Err(HopfieldError::InvalidInput(format!(
            "surface normalization is not positive at ω = {omega}"
        )));
    }
    Ok(n2.sqrt())
}

/// Closed-form box normalization of a bulk mode: 1/sqrt(|ω| εν 𝒱) in the
/// medium of origin (εν = 2 in vacuum).
pub fn bulk_norm_closed_form(theta: &ThetaProfile, volume: f64) -> Result<f64> {
    let eps_nu = match (theta.index.class.from_vacuum(), theta.medium.as_ref()) {
        (true, _) | (false, None) => 2.0,
        (false, Some(m)) => m.epsilon_nu(theta.omega)?,
    };
    Ok(1.0 / (theta.omega.abs() * eps_nu * volume).sqrt())
}

/// ∫ dz ε ν |θ_shape|² over the surface-mode profile by adaptive quadrature.
pub fn surface_norm_integral_quadrature(theta: &ThetaProfile) -> Result<f64> {
    let cfg = QuadConfig::with_rel_tol(1e-12);
    let mut total = 0.0;
    for region in theta.shape.regions() {
        let weight = theta.region_epsilon_nu(region)?;
        let density = |z: f64| weight * region.eval([0.0, 0.0, z]).norm_squared();
        let part = if region.z_min.is_finite() {
            integrate_to_infinity(density, region.z_min, &cfg)?.value
        } else {
            integrate_to_infinity(|t: f64| density(region.z_max - t), 0.0, &cfg)?.value
        };
        total += part;
    }
    Ok(total)
}

/// Same integral from exact exponential primitives.
pub fn surface_norm_integral_exact(theta: &ThetaProfile) -> Result<f64> {
    let mut total = c(0.0, 0.0);
    for region in theta.shape.regions() {
        let weight = theta.region_epsilon_nu(region)?;
        for a in &region.terms {
            for b in &region.terms {
                let s = a.g[2] + b.g[2].conj();
                let amp = a.amp.dot(&b.amp.map(|x| x.conj()));
                let amp = amp.conj();
                let integral = exp_integral_semi(s, region.z_min, region.z_max).ok_or_else(|| {
                    HopfieldError::InvalidInput("non-decaying surface profile".into())
                })?;
                total += amp * integral * weight;
            }
        }
    }
    Ok(total.re)
}

/// Box integral ∫_{−L/2}^{L/2} dz ε ν |θ_shape|² for plane-wave profiles.
pub fn box_norm_integral_quadrature(theta: &ThetaProfile, lz: f64) -> Result<f64> {
    let cfg = QuadConfig::with_rel_tol(1e-12);
    let half = 0.5 * lz;
    let mut total = 0.0;
    for region in theta.shape.regions() {
        let lo = region.z_min.max(-half);
        let hi = region.z_max.min(half);
        if hi <= lo {
            continue;
        }
        let weight = theta.region_epsilon_nu(region)?;
        total += integrate(
            |z: f64| weight * region.eval([0.0, 0.0, z]).norm_squared(),
            lo,
            hi,
            &cfg,
        )?
        .value;
    }
    Ok(total)
}

/// Fixes N so that ω ∫ ε ν θ·θ̄ d³r = sgn(ω).
///
/// Surface modes use the closed form, checked against quadrature of the
/// z-integral. Bulk modes use the box-regularized closed form, checked by
/// quadrature when the box is optically homogeneous (no interface).
pub fn normalize(theta: &ThetaProfile, geom: &LayeredGeometry) -> Result<ThetaProfile> {
    let omega = theta.omega;
    let closed = match theta.index.class {
        ModeClass::S => {
            let m = theta
                .medium
                .as_ref()
                .ok_or_else(|| HopfieldError::InvalidGeometry("surface mode without medium".into()))?;
            let closed = surface_norm_closed_form(m, omega, theta.index.k_par_norm(), geom.area())?;
            let integral = surface_norm_integral_quadrature(theta)?;
            let quad = 1.0 / (omega.abs() * integral * geom.area()).sqrt();
            check_agreement(closed, quad)?;
            closed
        }
        _ => {
            let closed = bulk_norm_closed_form(theta, geom.volume())?;
            let homogeneous = theta.medium.map_or(true, |m| m.kappa == 0.0);
            if homogeneous {
                let integral = box_norm_integral_quadrature(theta, geom.lz())?;
                let quad = 1.0 / (omega.abs() * integral * geom.area()).sqrt();
                check_agreement(closed, quad)?;
            }
            closed
        }
    };
    Ok(ThetaProfile {
        norm: closed,
        ..theta.clone()
    })
}

fn check_agreement(closed: f64, quadrature: f64) -> Result<()> {
    let relative = ((closed - quadrature) / quadrature).abs();
    if !(relative <= NORMALIZATION_TOL) {
        return Err(HopfieldError::QuadratureDisagreement {
            closed,
            quadrature,
            relative,
        });
    }
    Ok(())
}

/// Left-hand side of the bosonic normalization, ω ∫ εν|θ|² d³r, evaluated by
/// quadrature over the box (bulk) or half-spaces (surface).
pub fn bosonic_norm(theta: &ThetaProfile, geom: &LayeredGeometry) -> Result<f64> {
    let integral = match theta.index.class {
        ModeClass::S => surface_norm_integral_quadrature(theta)?,
        _ => box_norm_integral_quadrature(theta, geom.lz())?,
    };
    Ok(theta.omega * integral * geom.area() * theta.norm * theta.norm)
}

/// Real-space Hopfield coefficients of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfieldProfile {
    pub index: ModeIndex,
    pub omega: f64,
    pub alpha: FieldProfile,
    pub beta: FieldProfile,
    pub gamma: FieldProfile,
    pub eta: FieldProfile,
}

/// Maps θ to (α, β, γ, η).
pub fn hopfield_from_theta(theta: &ThetaProfile) -> Result<HopfieldProfile> {
    let omega = theta.omega;
    if let Some(m) = theta.medium.as_ref() {
        m.epsilon(omega)?;
    }
    let full = theta.profile();
    let matter_factor = |f: &dyn Fn(&MediumParams) -> Complex64| {
        full.scale_regions(|reg| match theta.region_medium(reg) {
            Some(m) => f(m),
            None => c(0.0, 0.0),
        })
    };
    let gamma = matter_factor(&|m| {
        c(0.0, m.kappa * omega / (m.rho * (m.omega_t * m.omega_t - omega * omega)))
    });
    let eta = matter_factor(&|m| c(m.kappa * omega * omega / (m.omega_t * m.omega_t - omega * omega), 0.0));
    Ok(HopfieldProfile {
        index: theta.index,
        omega,
        beta: full.curl().scale(c(0.0, 1.0 / omega)),
        alpha: full,
        gamma,
        eta,
    })
}

/// Expansion coefficients of the microscopic fields D, H, P, X.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpansion {
    pub f_d: FieldProfile,
    pub f_h: FieldProfile,
    pub f_p: FieldProfile,
    pub f_x: FieldProfile,
}

/// f_D = −i∇×β̄, f_H = i∇×ᾱ, f_P = −iη̄, f_X = iγ̄.
pub fn field_expansion_coefficients(mode: &PolaritonMode) -> FieldExpansion {
    let h = &mode.hopfield;
    FieldExpansion {
        f_d: h.beta.conj().curl().scale(c(0.0, -1.0)),
        f_h: h.alpha.conj().curl().scale(c(0.0, 1.0)),
        f_p: h.eta.conj().scale(c(0.0, -1.0)),
        f_x: h.gamma.conj().scale(c(0.0, 1.0)),
    }
}

/// A normalized mode with its Hopfield coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonMode {
    pub index: ModeIndex,
    pub omega: f64,
    pub norm: f64,
    pub theta: ThetaProfile,
    pub hopfield: HopfieldProfile,
}

impl PolaritonMode {
    /// Builds, normalizes and maps mode `idx`.
    pub fn build(geom: &LayeredGeometry, idx: &ModeIndex) -> Result<Self> {
        let theta = normalize(&build_theta(geom, idx)?, geom)?;
        Self::from_theta(theta)
    }

    pub fn from_theta(theta: ThetaProfile) -> Result<Self> {
        let hopfield = hopfield_from_theta(&theta)?;
        Ok(Self {
            index: theta.index,
            omega: theta.omega,
            norm: theta.norm,
            theta,
            hopfield,
        })
    }

    pub fn negative_partner(&self) -> Result<Self> {
        Self::from_theta(self.theta.negative_partner())
    }

    /// Returns a copy with N multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let theta = ThetaProfile {
            norm: self.norm * factor,
            ..self.theta.clone()
        };
        Self::from_theta(theta)
    }
}
