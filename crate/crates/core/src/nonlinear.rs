//! Scattering coefficients Ξ of the anharmonic matter Hamiltonian
//! ∫ Σ Φ^{j1…jN} X_{j1}⋯X_{jN} d³r, projected on polariton modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HopfieldError, Result};
use crate::media::LayeredGeometry;
use crate::modes::PolaritonMode;
use crate::profile::{c, exp_integral, CVec3, ExpTerm, FieldProfile};
use crate::quad::{integrate, QuadConfig};

/// Relative tolerance of the momentum selection rule Σ k∥ = 0.
pub const MOMENTUM_TOL: f64 = 1e-10;

/// Rank-N Cartesian tensor, stored row-major with 3^N entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearTensor {
    order: usize,
    components: Vec<f64>,
}

/// Outcome of loading a tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizationReport {
    /// Largest change made by symmetrization.
    pub max_change: f64,
}

impl NonlinearTensor {
    /// Builds from row-major components; the tensor is symmetrized.
    pub fn new(order: usize, components: Vec<f64>) -> Result<(Self, SymmetrizationReport)> {
        if order < 3 {
            return Err(HopfieldError::InvalidInput(format!(
                "nonlinear order must be at least 3, got {order}"
            )));
        }
        let expected = 3usize.pow(order as u32);
        if components.len() != expected {
            return Err(HopfieldError::InvalidInput(format!(
                "order {order} needs {expected} components, got {}",
                components.len()
            )));
        }
        if let Some(bad) = components.iter().find(|x| !x.is_finite()) {
            return Err(HopfieldError::InvalidInput(format!("non-finite component {bad}")));
        }
        let raw = Self { order, components };
        let sym = raw.symmetrized();
        let max_change = raw
            .components
            .iter()
            .zip(&sym.components)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((sym, SymmetrizationReport { max_change }))
    }

    /// Φ^{j…j} = 1, all other components zero.
    pub fn diagonal(order: usize) -> Result<Self> {
        let mut comps = vec![0.0; 3usize.pow(order as u32)];
        for j in 0..3 {
            comps[Self::flat(&vec![j; order])] = 1.0;
        }
        Ok(Self::new(order, comps)?.0)
    }

    /// Fully isotropic order-N tensor (sum of δ-pairings for even N is not
    /// needed here): Φ^{j1…jN} = 1 when all indices agree.
    pub fn delta(order: usize) -> Result<Self> {
        Self::diagonal(order)
    }

    /// Parses `{"order": N, "components": [[[…]]]}` (nested rank-N arrays).
    pub fn from_json(value: &Value) -> Result<(Self, SymmetrizationReport)> {
        let order = value
            .get("order")
            .and_then(Value::as_u64)
            .ok_or_else(|| HopfieldError::InvalidInput("missing integer field 'order'".into()))?
            as usize;
        let comps = value
            .get("components")
            .ok_or_else(|| HopfieldError::InvalidInput("missing field 'components'".into()))?;
        let mut flat = Vec::with_capacity(3usize.pow(order as u32));
        flatten(comps, order, &mut flat, "/components")?;
        Self::new(order, flat)
    }

    /// Nested-array JSON form.
    pub fn to_json(&self) -> Value {
        fn nest(c: &[f64], depth: usize) -> Value {
            if depth == 0 {
                return Value::from(c[0]);
            }
            let stride = c.len() / 3;
            Value::Array((0..3).map(|i| nest(&c[i * stride..(i + 1) * stride], depth - 1)).collect())
        }
        serde_json::json!({ "order": self.order, "components": nest(&self.components, self.order) })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[Self::flat(idx)]
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    fn flat(idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &j| 3 * acc + j)
    }

    fn unflat(mut f: usize, order: usize) -> Vec<usize> {
        let mut idx = vec![0; order];
        for slot in idx.iter_mut().rev() {
            *slot = f % 3;
            f /= 3;
        }
        idx
    }

    fn symmetrized(&self) -> Self {
        let perms = permutations(self.order);
        let components = (0..self.components.len())
            .map(|f| {
                let idx = Self::unflat(f, self.order);
                let sum: f64 = perms
                    .iter()
                    .map(|p| {
                        let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                        self.components[Self::flat(&permuted)]
                    })
                    .sum();
                sum / perms.len() as f64
            })
            .collect();
        Self {
            order: self.order,
            components,
        }
    }

    /// Σ Φ^{j1…jN} Π v_l[j_l].
    pub fn contract(&self, vectors: &[CVec3]) -> Complex64 {
        debug_assert_eq!(vectors.len(), self.order);
        let mut total = c(0.0, 0.0);
        for (f, &phi) in self.components.iter().enumerate() {
            if phi == 0.0 {
                continue;
            }
            let idx = Self::unflat(f, self.order);
            let prod = idx
                .iter()
                .zip(vectors)
                .fold(c(1.0, 0.0), |acc, (&j, v)| acc * v[j]);
            total += prod * phi;
        }
        total
    }
}

fn flatten(v: &Value, depth: usize, out: &mut Vec<f64>, path: &str) -> Result<()> {
    if depth == 0 {
        return v
            .as_f64()
            .map(|x| out.push(x))
            .ok_or_else(|| HopfieldError::InvalidInput(format!("{path}: expected a number")));
    }
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| HopfieldError::InvalidInput(format!("{path}: expected an array of length 3")))?;
    for (i, item) in arr.iter().enumerate() {
        flatten(item, depth - 1, out, &format!("{path}/{i}"))?;
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Coefficient with which a mode's operator enters the matter field X:
/// sgn(ω) κω/(ρ(ω_T² − ω²)) θ̄ inside matter, zero in vacuum.
///
/// The sgn(ω) makes the weight of a negative-energy partner the complex
/// conjugate of the original weight.
pub fn matter_weight(mode: &PolaritonMode) -> Result<FieldProfile> {
    let omega = mode.omega;
    if let Some(m) = mode.theta.medium.as_ref() {
        m.epsilon(omega)?;
    }
    let theta = mode.theta.profile().conj();
    let medium = mode.theta.medium;
    Ok(theta.scale_regions(|reg| {
        match medium.filter(|_| reg.z_max <= 0.0) {
            Some(m) => c(
                m.kappa * omega.abs() / (m.rho * (m.omega_t * m.omega_t - omega * omega)),
                0.0,
            ),
            None => c(0.0, 0.0),
        }
    }))
}

/// How the z-integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ZIntegration {
    /// Exact primitives of exponential products.
    #[default]
    Analytic,
    /// Adaptive Gauss–Kronrod with relative tolerance 1e−8.
    Adaptive,
}

/// A computed Ξ with the in-plane selection flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringAmplitude {
    pub value: Complex64,
    /// False when Σ k∥ ≠ 0; `value` is then exactly zero.
    pub momentum_ok: bool,
}

/// In-plane wavevector carried by a weight profile (θ̄ ∝ e^{+i k∥·r∥}).
fn weight_k_par(mode: &PolaritonMode) -> [f64; 2] {
    let k = mode.index.k_par;
    if mode.omega >= 0.0 {
        k
    } else {
        [-k[0], -k[1]]
    }
}

/// Ξ = ∫ d³r Σ Φ^{j1…jN} Π_l w_l,j_l over the matter layers of `geom`.
pub fn scattering_coefficient(
    modes: &[&PolaritonMode],
    phi: &NonlinearTensor,
    geom: &LayeredGeometry,
    method: ZIntegration,
) -> Result<ScatteringAmplitude> {
    if modes.len() != phi.order() {
        return Err(HopfieldError::InvalidInput(format!(
            "tensor order {} needs {} modes, got {}",
            phi.order(),
            phi.order(),
            modes.len()
        )));
    }
    let mut total_k = [0.0, 0.0];
    let mut scale: f64 = 0.0;
    for m in modes {
        let k = weight_k_par(m);
        total_k[0] += k[0];
        total_k[1] += k[1];
        scale = scale.max(k[0].hypot(k[1]));
    }
    if total_k[0].hypot(total_k[1]) > MOMENTUM_TOL * scale.max(1.0) {
        return Ok(ScatteringAmplitude {
            value: c(0.0, 0.0),
            momentum_ok: false,
        });
    }
    let weights: Vec<FieldProfile> = modes.iter().map(|m| matter_weight(m)).collect::<Result<_>>()?;
    let mut z_integral = c(0.0, 0.0);
    for layer in geom.matter_layers() {
        z_integral += match method {
            ZIntegration::Analytic => layer_integral_exact(&weights, phi, layer.z_min, layer.z_max),
            ZIntegration::Adaptive => layer_integral_adaptive(&weights, phi, layer.z_min, layer.z_max)?,
        };
    }
    Ok(ScatteringAmplitude {
        value: z_integral * geom.area(),
        momentum_ok: true,
    })
}

/// Splits [a, b] at the region boundaries shared by all profiles.
fn pieces(weights: &[FieldProfile], a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![a, b];
    for w in weights {
        cuts.extend(w.interfaces().into_iter().filter(|&z| z > a && z < b));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|p| (p[0], p[1])).collect()
}

fn layer_integral_exact(weights: &[FieldProfile], phi: &NonlinearTensor, a: f64, b: f64) -> Complex64 {
    let mut total = c(0.0, 0.0);
    for (lo, hi) in pieces(weights, a, b) {
        let mid = 0.5 * (lo + hi);
        let terms: Vec<&[ExpTerm]> = weights
            .iter()
            .map(|w| {
                w.region_index(mid, crate::profile::Side::Above)
                    .map_or(&[][..], |i| &w.regions()[i].terms[..])
            })
            .collect();
        if terms.iter().any(|t| t.is_empty()) {
            continue;
        }
        // expand the product of sums term by term (odometer over term choices)
        let mut choice = vec![0usize; terms.len()];
        'expand: loop {
            let amps: Vec<CVec3> = choice.iter().zip(&terms).map(|(&i, t)| t[i].amp).collect();
            let s: Complex64 = choice.iter().zip(&terms).map(|(&i, t)| t[i].g[2]).sum();
            total += phi.contract(&amps) * exp_integral(s, lo, hi);
            for slot in 0..choice.len() {
                choice[slot] += 1;
                if choice[slot] < terms[slot].len() {
                    continue 'expand;
                }
                choice[slot] = 0;
            }
            break;
        }
    }
    total
}

fn layer_integral_adaptive(weights: &[FieldProfile], phi: &NonlinearTensor, a: f64, b: f64) -> Result<Complex64> {
    let cfg = QuadConfig::with_rel_tol(1e-8);
    let mut total = c(0.0, 0.0);
    for (lo, hi) in pieces(weights, a, b) {
        let f = |z: f64| {
            let vs: Vec<CVec3> = weights.iter().map(|w| w.eval([0.0, 0.0, z])).collect();
            phi.contract(&vs)
        };
        total += integrate(f, lo, hi, &cfg)?.value;
    }
    Ok(total)
}
