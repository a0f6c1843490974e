//! Bath-dressed response of a Lorentz medium.
//!
//! The matter oscillator couples to a continuum of bath oscillators with
//! spectral coupling υ_ζ. The retarded bath self-energy is
//!
//! ```text
//! 𝓕(ω) = ∫₀^∞ dζ υ_ζ² ζ² / (ρ²(ζ² − ω² − i0)) = F(ω) + i π υ_ω² ω / (2ρ²)
//! ```
//!
//! which is analytic in the upper half plane, so ε̃ obeys Kramers–Kronig and
//! Im ε̃ ≥ 0 for ω > 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HopfieldError, Result};
use crate::media::{LayeredGeometry, MediumParams};
use crate::quad::{integrate, integrate_to_infinity, principal_value, QuadConfig};

/// Relative tolerance of the bath integrals.
pub const BATH_REL_TOL: f64 = 1e-10;

/// Spectral coupling υ_ζ of the bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BathModel {
    /// No bath.
    None,
    /// υ_ζ = amplitude on [zeta_min, zeta_max], zero elsewhere.
    Flat {
        amplitude: f64,
        zeta_min: f64,
        zeta_max: f64,
    },
    /// υ_ζ² = alpha · ζ · exp(−ζ/cutoff).
    Ohmic { alpha: f64, cutoff: f64 },
}

impl BathModel {
    /// Flat bath reproducing a damping rate γ = πυ²/(2ρ²) on [0, zeta_max].
    pub fn flat_for_damping(gamma: f64, rho: f64, zeta_max: f64) -> Self {
        BathModel::Flat {
            amplitude: (2.0 * rho * rho * gamma / std::f64::consts::PI).sqrt(),
            zeta_min: 0.0,
            zeta_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BathModel::None => Ok(()),
            BathModel::Flat {
                amplitude,
                zeta_min,
                zeta_max,
            } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(HopfieldError::InvalidInput(format!(
                        "bath amplitude must be finite and non-negative, got {amplitude}"
                    )));
                }
                if !(zeta_min >= 0.0 && zeta_max > zeta_min) {
                    return Err(HopfieldError::InvalidInput(format!(
                        "bath support [{zeta_min}, {zeta_max}] is empty or negative"
                    )));
                }
                if !zeta_max.is_finite() {
                    return Err(HopfieldError::DivergentBathIntegral);
                }
                Ok(())
            }
            BathModel::Ohmic { alpha, cutoff } => {
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(HopfieldError::InvalidInput(format!(
                        "ohmic strength must be finite and non-negative, got {alpha}"
                    )));
                }
                if !(cutoff > 0.0) {
                    return Err(HopfieldError::InvalidInput(format!("ohmic cutoff must be positive, got {cutoff}")));
                }
                if !cutoff.is_finite() {
                    return Err(HopfieldError::DivergentBathIntegral);
                }
                Ok(())
            }
        }
    }

    /// υ_ζ².
    pub fn coupling_sq(&self, zeta: f64) -> f64 {
        match *self {
            BathModel::None => 0.0,
            BathModel::Flat {
                amplitude,
                zeta_min,
                zeta_max,
            } => {
                if zeta >= zeta_min && zeta <= zeta_max {
                    amplitude * amplitude
                } else {
                    0.0
                }
            }
            BathModel::Ohmic { alpha, cutoff } => {
                if zeta <= 0.0 {
                    0.0
                } else {
                    alpha * zeta * (-zeta / cutoff).exp()
                }
            }
        }
    }

    pub fn coupling(&self, zeta: f64) -> f64 {
        self.coupling_sq(zeta).sqrt()
    }

    /// Support of υ (upper bound infinite for Ohmic).
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            BathModel::None => None,
            BathModel::Flat { zeta_min, zeta_max, .. } => Some((zeta_min, zeta_max)),
            BathModel::Ohmic { .. } => Some((0.0, f64::INFINITY)),
        }
    }

    pub fn is_empty(&self) -> bool {
        match *self {
            BathModel::None => true,
            BathModel::Flat { amplitude, .. } => amplitude == 0.0,
            BathModel::Ohmic { alpha, .. } => alpha == 0.0,
        }
    }

    /// Multiplies υ by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            BathModel::None => BathModel::None,
            BathModel::Flat {
                amplitude,
                zeta_min,
                zeta_max,
            } => BathModel::Flat {
                amplitude: amplitude * factor,
                zeta_min,
                zeta_max,
            },
            BathModel::Ohmic { alpha, cutoff } => BathModel::Ohmic {
                alpha: alpha * factor * factor,
                cutoff,
            },
        }
    }
}

fn bath_cfg() -> QuadConfig {
    QuadConfig::with_rel_tol(BATH_REL_TOL)
}

/// ∫₀^∞ dζ υ_ζ² by adaptive quadrature.
pub fn bath_weight_integral(bath: &BathModel) -> Result<f64> {
    bath.validate()?;
    let cfg = bath_cfg();
    let diverged = |e: HopfieldError| match e {
        HopfieldError::QuadratureFailed { .. } => HopfieldError::DivergentBathIntegral,
        other => other,
    };
    match bath.support() {
        None => Ok(0.0),
        Some((a, b)) if b.is_finite() => Ok(integrate(|z| bath.coupling_sq(z), a, b, &cfg).map_err(diverged)?.value),
        Some((a, _)) => {
            let v = integrate_to_infinity(|z| bath.coupling_sq(z), a, &cfg).map_err(diverged)?.value;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(HopfieldError::DivergentBathIntegral)
            }
        }
    }
}

/// ω̃_L² = ω_T² + κ²/ρ + ∫dζ υ_ζ²/(2ρ²), returned as ω̃_L.
pub fn renormalized_omega_l(m: &MediumParams, bath: &BathModel) -> Result<f64> {
    let shift = bath_weight_integral(bath)? / (2.0 * m.rho * m.rho);
    Ok((m.omega_l().powi(2) + shift).sqrt())
}

/// F(ω) = 𝒫∫₀^∞ dζ υ_ζ² ζ² / (ρ²(ζ² − ω²)).
pub fn bath_kernel_f(m: &MediumParams, bath: &BathModel, omega: f64) -> Result<f64> {
    bath.validate()?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(HopfieldError::InvalidInput(format!("ω must be positive, got {omega}")));
    }
    let Some((a, b)) = bath.support() else {
        return Ok(0.0);
    };
    if bath.is_empty() {
        return Ok(0.0);
    }
    let scale = omega.max(1.0);
    let endpoint_tol = 1e-9 * scale;
    let has_jump = matches!(bath, BathModel::Flat { .. });
    if has_jump && ((omega - a).abs() < endpoint_tol && a > 0.0 || (omega - b).abs() < endpoint_tol) {
        return Err(HopfieldError::SingularEndpoint { omega });
    }
    let rho2 = m.rho * m.rho;
    let cfg = bath_cfg();
    // υ²ζ²/(ζ² − ω²) = g(ζ)/(ζ − ω) with g = υ²ζ²/(ζ + ω)
    let g = |z: f64| bath.coupling_sq(z) * z * z / (z + omega);
    let regular = |z: f64| bath.coupling_sq(z) * z * z / (z * z - omega * omega);
    let value = if b.is_finite() {
        if omega > a && omega < b {
            principal_value(g, a, b, omega, &cfg)?
        } else {
            integrate(regular, a, b, &cfg)?.value
        }
    } else {
        let split = 2.0 * omega.max(a);
        let near = if omega > a {
            principal_value(g, a, split, omega, &cfg)?
        } else {
            integrate(regular, a, split, &cfg)?.value
        };
        near + integrate_to_infinity(regular, split, &cfg)?.value
    };
    Ok(value / rho2)
}

/// Closed-form F for a flat bath on [a, b] (ω not an endpoint).
pub fn flat_kernel_closed_form(m: &MediumParams, amplitude: f64, a: f64, b: f64, omega: f64) -> f64 {
    let log = |z: f64| ((z - omega) / (z + omega)).abs().ln();
    let lower = if a == 0.0 { 0.0 } else { log(a) };
    amplitude * amplitude / (m.rho * m.rho) * ((b - a) + 0.5 * omega * (log(b) - lower))
}

/// Im 𝓕(ω) = π υ_ω² ω / (2ρ²).
pub fn bath_kernel_imag(m: &MediumParams, bath: &BathModel, omega: f64) -> f64 {
    std::f64::consts::PI * bath.coupling_sq(omega.abs()) * omega / (2.0 * m.rho * m.rho)
}

/// Complex dielectric function of a bath-dressed medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexDielectric {
    pub medium: MediumParams,
    pub bath: BathModel,
    omega_l_sq: f64,
}

impl ComplexDielectric {
    pub fn new(medium: MediumParams, bath: BathModel) -> Result<Self> {
        let omega_l_sq = renormalized_omega_l(&medium, &bath)?.powi(2);
        Ok(Self {
            medium,
            bath,
            omega_l_sq,
        })
    }

    pub fn renormalized_omega_l(&self) -> f64 {
        self.omega_l_sq.sqrt()
    }

    /// 𝓕(ω) = F(ω) + i Im 𝓕(ω).
    pub fn self_energy(&self, omega: f64) -> Result<Complex64> {
        if self.bath.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(Complex64::new(
            bath_kernel_f(&self.medium, &self.bath, omega)?,
            bath_kernel_imag(&self.medium, &self.bath, omega),
        ))
    }

    /// ε̃(ω) = (ω̃_L² − ω² − 𝓕)/(ω_T² − ω² − 𝓕).
    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        if self.bath.is_empty() {
            return Ok(Complex64::new(self.medium.epsilon(omega)?, 0.0));
        }
        let f = self.self_energy(omega)?;
        let w2 = omega * omega;
        let den = self.medium.omega_t.powi(2) - w2 - f;
        if den.norm() == 0.0 {
            return Err(HopfieldError::PoleAtResonance {
                omega,
                omega_t: self.medium.omega_t,
            });
        }
        Ok((self.omega_l_sq - w2 - f) / den)
    }
}

/// ε̃(ω) for medium `m` dressed by `bath`.
pub fn lossy_epsilon(m: &MediumParams, bath: &BathModel, omega: f64) -> Result<Complex64> {
    ComplexDielectric::new(*m, bath.clone())?.eval(omega)
}

/// Damped Lorentz oscillator 1 + S/(ω₀² − ω² − iγω).
pub fn damped_lorentz(strength: f64, omega0_sq: f64, gamma: f64, omega: f64) -> Complex64 {
    1.0 + strength / Complex64::new(omega0_sq - omega * omega, -gamma * omega)
}

/// Re ε̃(ω) − 1 rebuilt from Im ε̃ on (0, upper) by the Kramers–Kronig
/// relation (2/π) 𝒫∫ ω' Im ε̃(ω') / (ω'² − ω²) dω'.
pub fn kramers_kronig_real(diel: &ComplexDielectric, omega: f64, upper: f64) -> Result<f64> {
    let cfg = QuadConfig::with_rel_tol(1e-9);
    let im = |w: f64| diel.eval(w).map(|e| e.im).unwrap_or(0.0);
    // ω' Im ε̃/(ω'² − ω²) = [ω' Im ε̃/(ω' + ω)]/(ω' − ω)
    let g = |w: f64| w * im(w) / (w + omega);
    let lo = 1e-12;
    let v = if omega > lo && omega < upper {
        principal_value(g, lo, upper, omega, &cfg)?
    } else {
        integrate(|w: f64| w * im(w) / (w * w - omega * omega), lo, upper, &cfg)?.value
    };
    Ok(2.0 / std::f64::consts::PI * v)
}

/// Source current ↔ bath amplitude: j = υ_ω/(κρ) [ε̃ − 1] y.
pub fn current_from_y(diel: &ComplexDielectric, omega: f64, y: Complex64) -> Result<Complex64> {
    let m = &diel.medium;
    if m.kappa == 0.0 {
        return Err(HopfieldError::InvalidInput("j ↔ y needs κ ≠ 0".into()));
    }
    Ok(y * (diel.eval(omega)? - 1.0) * (diel.bath.coupling(omega) / (m.kappa * m.rho)))
}

/// Inverse of [`current_from_y`].
pub fn y_from_current(diel: &ComplexDielectric, omega: f64, j: Complex64) -> Result<Complex64> {
    let factor = current_from_y(diel, omega, Complex64::new(1.0, 0.0))?;
    if factor.norm() == 0.0 {
        return Err(HopfieldError::InvalidInput(format!("no bath coupling at ω = {omega}")));
    }
    Ok(j / factor)
}

/// A current sheet J δ(z − z0) ŷ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentSheet {
    pub z: f64,
    pub amplitude: Complex64,
}

/// Layer of the open driven problem: z_min < z < z_max with wavenumber K.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OpenLayer {
    z_min: f64,
    z_max: f64,
    eps: Complex64,
    kz: Complex64,
}

/// Homogeneous solution as per-layer coefficients of e^{±iK(z − z_ref)}.
#[derive(Debug, Clone)]
struct Homogeneous {
    coeffs: Vec<(Complex64, Complex64)>,
}

/// Steady-state TE field u(z) ŷ driven by current sheets at fixed k∥.
///
/// Solves −u'' + (k∥² − ω²ε̃(z))u = iω j(z) with outgoing/decaying waves
/// e^{+iKz} above the stack and e^{−iKz} below it (time factor e^{−iωt}).
#[derive(Debug, Clone)]
pub struct DrivenField {
    pub omega: f64,
    pub k_par: f64,
    layers: Vec<OpenLayer>,
    up: Homogeneous,
    down: Homogeneous,
    wronskian: Complex64,
    sheets: Vec<CurrentSheet>,
}

fn principal_kz(eps: Complex64, omega: f64, k_par: f64) -> Complex64 {
    let k = (eps * omega * omega - k_par * k_par).sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        -k
    } else {
        k
    }
}

impl DrivenField {
    fn layer_index(&self, z: f64) -> usize {
        self.layers
            .iter()
            .position(|l| z < l.z_max)
            .unwrap_or(self.layers.len() - 1)
    }

    fn reference(l: &OpenLayer) -> f64 {
        if l.z_min.is_finite() {
            l.z_min
        } else if l.z_max.is_finite() {
            l.z_max
        } else {
            0.0
        }
    }

    fn eval_homogeneous(&self, h: &Homogeneous, z: f64) -> (Complex64, Complex64) {
        let i = self.layer_index(z);
        let l = &self.layers[i];
        let (a, b) = h.coeffs[i];
        let ik = Complex64::new(0.0, 1.0) * l.kz;
        let d = z - Self::reference(l);
        let ep = (ik * d).exp();
        let em = (-ik * d).exp();
        (a * ep + b * em, ik * (a * ep - b * em))
    }

    /// u(z).
    pub fn eval(&self, z: f64) -> Complex64 {
        self.eval_with_derivative(z).0
    }

    /// (u, u') at z; at a sheet position the derivative from above is used.
    pub fn eval_with_derivative(&self, z: f64) -> (Complex64, Complex64) {
        let mut u = Complex64::new(0.0, 0.0);
        let mut du = Complex64::new(0.0, 0.0);
        for s in &self.sheets {
            // u'(z_s⁺) − u'(z_s⁻) = −iωJ
            let c = Complex64::new(0.0, -self.omega) * s.amplitude / self.wronskian;
            if z < s.z {
                let (d, dd) = self.eval_homogeneous(&self.down, z);
                let (up, _) = self.eval_homogeneous(&self.up, s.z);
                u += c * d * up;
                du += c * dd * up;
            } else {
                let (d, _) = self.eval_homogeneous(&self.down, s.z);
                let (up, dup) = self.eval_homogeneous(&self.up, z);
                u += c * d * up;
                du += c * d * dup;
            }
        }
        (u, du)
    }

    /// ε̃ at z.
    pub fn epsilon_at(&self, z: f64) -> Complex64 {
        self.layers[self.layer_index(z)].eps
    }

    /// K = sqrt(ω²ε̃ − k∥²) at z (Im K ≥ 0).
    pub fn kz_at(&self, z: f64) -> Complex64 {
        self.layers[self.layer_index(z)].kz
    }

    pub fn sheets(&self) -> &[CurrentSheet] {
        &self.sheets
    }

    /// Layer boundaries.
    pub fn interfaces(&self) -> Vec<f64> {
        self.layers.iter().skip(1).map(|l| l.z_min).collect()
    }
}

/// Solves the driven TE problem for the layers of `geom`, with the outermost
/// layers extended to ±∞. Matter layers use ε̃ of their medium dressed by
/// `bath`.
pub fn driven_field(
    geom: &LayeredGeometry,
    bath: &BathModel,
    omega: f64,
    k_par: f64,
    sheets: &[CurrentSheet],
) -> Result<DrivenField> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(HopfieldError::InvalidInput(format!("ω must be positive, got {omega}")));
    }
    let nl = geom.layers().len();
    let mut layers = Vec::with_capacity(nl);
    for (i, l) in geom.layers().iter().enumerate() {
        let eps = match &l.medium {
            None => Complex64::new(1.0, 0.0),
            Some(m) => lossy_epsilon(m, bath, omega)
                .map_err(|e| HopfieldError::NonConvergentTransfer(format!("ε̃ at ω = {omega}: {e}")))?,
        };
        let z_min = if i == 0 { f64::NEG_INFINITY } else { l.z_min };
        let z_max = if i + 1 == nl { f64::INFINITY } else { l.z_max };
        let kz = principal_kz(eps, omega, k_par);
        if kz.norm() == 0.0 {
            return Err(HopfieldError::NonConvergentTransfer(format!(
                "grazing incidence (K = 0) in layer {i}"
            )));
        }
        layers.push(OpenLayer { z_min, z_max, eps, kz });
    }
    let mut field = DrivenField {
        omega,
        k_par,
        layers,
        up: Homogeneous { coeffs: vec![] },
        down: Homogeneous { coeffs: vec![] },
        wronskian: Complex64::new(1.0, 0.0),
        sheets: sheets.to_vec(),
    };
    field.up = propagate(&field.layers, true)?;
    field.down = propagate(&field.layers, false)?;
    // W = ψ_down ψ_up' − ψ_down' ψ_up, constant in z
    let z0 = DrivenField::reference(&field.layers[0]);
    let (d, dd) = field.eval_homogeneous(&field.down, z0);
    let (u, du) = field.eval_homogeneous(&field.up, z0);
    let w = d * du - dd * u;
    if !(w.norm().is_finite() && w.norm() > 0.0) {
        return Err(HopfieldError::NonConvergentTransfer("vanishing Wronskian".into()));
    }
    field.wronskian = w;
    Ok(field)
}

/// Homogeneous solution outgoing at the top (`upward`) or bottom, carried
/// through the stack by matching u and u' at each interface.
fn propagate(layers: &[OpenLayer], upward: bool) -> Result<Homogeneous> {
    let n = layers.len();
    let mut coeffs = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); n];
    let i_unit = Complex64::new(0.0, 1.0);
    let order: Vec<usize> = if upward { (0..n).rev().collect() } else { (0..n).collect() };
    coeffs[order[0]] = if upward {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    };
    let value_at = |l: &OpenLayer, c: (Complex64, Complex64), z: f64| {
        let d = z - DrivenField::reference(l);
        let ik = i_unit * l.kz;
        let (ep, em) = ((ik * d).exp(), (-ik * d).exp());
        (c.0 * ep + c.1 * em, ik * (c.0 * ep - c.1 * em))
    };
    for w in order.windows(2) {
        let (from, to) = (w[0], w[1]);
        let z = if upward { layers[from].z_min } else { layers[from].z_max };
        let (u, du) = value_at(&layers[from], coeffs[from], z);
        let l = &layers[to];
        let d = z - DrivenField::reference(l);
        let ik = i_unit * l.kz;
        // a e^{ikd} + b e^{−ikd} = u, ik(a e^{ikd} − b e^{−ikd}) = u'
        let a = 0.5 * (u + du / ik) * (-ik * d).exp();
        let b = 0.5 * (u - du / ik) * (ik * d).exp();
        if !(a.norm().is_finite() && b.norm().is_finite()) {
            return Err(HopfieldError::NonConvergentTransfer(format!(
                "overflow while matching at z = {z}"
            )));
        }
        coeffs[to] = (a, b);
    }
    Ok(Homogeneous { coeffs })
}

/// Terms of the Poynting balance on [z1, z2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit {
    /// Net inflow Im(ū u')(z1) − Im(ū u')(z2).
    pub flux_imbalance: f64,
    /// ω² ∫ Im ε̃ |u|² dz.
    pub absorbed: f64,
    /// Power delivered by sheets inside (z1, z2): −ω Σ Re(J ū(z_s)).
    pub source_work: f64,
}

impl EnergyAudit {
    /// |flux + source − absorbed| relative to the largest term.
    pub fn relative_residual(&self) -> f64 {
        let scale = self
            .flux_imbalance
            .abs()
            .max(self.absorbed.abs())
            .max(self.source_work.abs())
            .max(f64::MIN_POSITIVE);
        (self.flux_imbalance + self.source_work - self.absorbed).abs() / scale
    }
}

/// Discrete energy audit of a driven solution on [z1, z2].
pub fn energy_audit(field: &DrivenField, z1: f64, z2: f64) -> Result<EnergyAudit> {
    let flux = |z: f64| {
        let (u, du) = field.eval_with_derivative(z);
        (u.conj() * du).im
    };
    let mut cuts = vec![z1, z2];
    cuts.extend(field.interfaces().into_iter().filter(|&z| z > z1 && z < z2));
    cuts.extend(field.sheets().iter().map(|s| s.z).filter(|&z| z > z1 && z < z2));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let cfg = QuadConfig::with_rel_tol(1e-11);
    let mut absorbed = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let im_eps = field.epsilon_at(mid).im;
        if im_eps != 0.0 {
            absorbed += integrate(|z| field.eval(z).norm_sqr(), w[0], w[1], &cfg)?.value * im_eps;
        }
    }
    let source_work = field
        .sheets()
        .iter()
        .filter(|s| s.z > z1 && s.z < z2)
        .map(|s| -field.omega * (s.amplitude * field.eval(s.z).conj()).re)
        .sum();
    Ok(EnergyAudit {
        flux_imbalance: flux(z1) - flux(z2),
        absorbed: field.omega * field.omega * absorbed,
        source_work,
    })
}
