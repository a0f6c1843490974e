//! Piecewise sums of complex exponentials, `Σ a·exp(g·r)` per z-region.
//!
//! Every analytic mode of a planar stack has this form, so curls,
//! divergences, conjugation and z-integrals are evaluated exactly on the
//! term list instead of by sampling.

use nalgebra::Vector3;
use num_complex::Complex64;

pub type CVec3 = Vector3<Complex64>;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn cvec(v: [Complex64; 3]) -> CVec3 {
    CVec3::new(v[0], v[1], v[2])
}

/// Bilinear dot product (no conjugation).
pub fn dot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `amp · exp(g·r)` with complex "gradient" vector g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub amp: CVec3,
    pub g: CVec3,
}

impl ExpTerm {
    pub fn new(amp: CVec3, g: CVec3) -> Self {
        Self { amp, g }
    }

    pub fn phase(&self, r: [f64; 3]) -> Complex64 {
        (self.g[0] * r[0] + self.g[1] * r[1] + self.g[2] * r[2]).exp()
    }

    pub fn eval(&self, r: [f64; 3]) -> CVec3 {
        self.amp * self.phase(r)
    }

    pub fn curl(&self) -> ExpTerm {
        ExpTerm::new(self.g.cross(&self.amp), self.g)
    }

    pub fn divergence(&self) -> ExpTerm {
        ExpTerm::new(CVec3::new(dot(&self.g, &self.amp), c(0.0, 0.0), c(0.0, 0.0)), self.g)
    }

    pub fn conj(&self) -> ExpTerm {
        ExpTerm::new(self.amp.map(|x| x.conj()), self.g.map(|x| x.conj()))
    }
}

/// Terms valid on `z_min < z < z_max` (bounds may be infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub z_min: f64,
    pub z_max: f64,
    pub terms: Vec<ExpTerm>,
}

impl Region {
    pub fn eval(&self, r: [f64; 3]) -> CVec3 {
        self.terms
            .iter()
            .fold(CVec3::zeros(), |acc, t| acc + t.eval(r))
    }

    fn map_terms(&self, f: impl Fn(&ExpTerm) -> ExpTerm) -> Region {
        Region {
            z_min: self.z_min,
            z_max: self.z_max,
            terms: self.terms.iter().map(f).collect(),
        }
    }
}

/// Which side of a region boundary to evaluate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// A vector field given region by region along z.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    regions: Vec<Region>,
}

impl FieldProfile {
    pub fn new(mut regions: Vec<Region>) -> Self {
        regions.sort_by(|a, b| a.z_min.total_cmp(&b.z_min));
        Self { regions }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_index(&self, z: f64, side: Side) -> Option<usize> {
        self.regions.iter().position(|reg| match side {
            Side::Above => z >= reg.z_min && z < reg.z_max,
            Side::Below => z > reg.z_min && z <= reg.z_max,
        })
    }

    /// Evaluates at r; on a boundary the region above is used.
    pub fn eval(&self, r: [f64; 3]) -> CVec3 {
        self.eval_side(r, Side::Above)
    }

    pub fn eval_side(&self, r: [f64; 3], side: Side) -> CVec3 {
        self.region_index(r[2], side)
            .or_else(|| self.region_index(r[2], Side::Below))
            .map(|i| self.regions[i].eval(r))
            .unwrap_or_else(CVec3::zeros)
    }

    pub fn curl(&self) -> FieldProfile {
        self.map(|_, t| t.curl())
    }

    /// Divergence, stored in the x-slot of the result.
    pub fn divergence(&self) -> FieldProfile {
        self.map(|_, t| t.divergence())
    }

    pub fn conj(&self) -> FieldProfile {
        self.map(|_, t| t.conj())
    }

    pub fn scale(&self, s: Complex64) -> FieldProfile {
        self.map(|_, t| ExpTerm::new(t.amp * s, t.g))
    }

    /// Multiplies region `i` by `factor(i)`.
    pub fn scale_regions(&self, factor: impl Fn(&Region) -> Complex64) -> FieldProfile {
        FieldProfile {
            regions: self
                .regions
                .iter()
                .map(|reg| {
                    let s = factor(reg);
                    reg.map_terms(|t| ExpTerm::new(t.amp * s, t.g))
                })
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Region, &ExpTerm) -> ExpTerm) -> FieldProfile {
        FieldProfile {
            regions: self
                .regions
                .iter()
                .map(|reg| reg.map_terms(|t| f(reg, t)))
                .collect(),
        }
    }

    pub fn add(&self, other: &FieldProfile) -> FieldProfile {
        assert_eq!(self.regions.len(), other.regions.len(), "region layouts differ");
        FieldProfile {
            regions: self
                .regions
                .iter()
                .zip(&other.regions)
                .map(|(a, b)| Region {
                    z_min: a.z_min,
                    z_max: a.z_max,
                    terms: a.terms.iter().chain(&b.terms).copied().collect(),
                })
                .collect(),
        }
    }

    /// Region boundaries strictly inside the support.
    pub fn interfaces(&self) -> Vec<f64> {
        self.regions.iter().skip(1).map(|r| r.z_min).collect()
    }
}

/// Exact `∫_a^b exp(s z) dz`, stable for small |s|.
pub fn exp_integral(s: Complex64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let x = s * len;
    if x.norm() < 1e-4 {
        // (e^{x} − 1)/x series
        let series = 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
        return (s * a).exp() * len * series;
    }
    ((s * b).exp() - (s * a).exp()) / s
}

/// Exact `∫_a^∞ exp(s z) dz` for Re s < 0, or `∫_{-∞}^b` for Re s > 0.
pub fn exp_integral_semi(s: Complex64, a: f64, b: f64) -> Option<Complex64> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => Some(exp_integral(s, a, b)),
        (true, false) if s.re < 0.0 => Some(-(s * a).exp() / s),
        (false, true) if s.re > 0.0 => Some((s * b).exp() / s),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(k: [f64; 3]) -> ExpTerm {
        ExpTerm::new(
            CVec3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            CVec3::new(c(0.0, k[0]), c(0.0, k[1]), c(0.0, k[2])),
        )
    }

    #[test]
    fn curl_matches_finite_difference() {
        let t = ExpTerm::new(
            CVec3::new(c(0.3, 0.1), c(-0.2, 0.5), c(1.0, -0.4)),
            CVec3::new(c(0.0, -1.3), c(0.0, 0.4), c(-0.7, 0.9)),
        );
        let r = [0.2, -0.3, 0.45];
        let h = 1e-5;
        let d = |axis: usize, comp: usize| {
            let mut rp = r;
            let mut rm = r;
            rp[axis] += h;
            rm[axis] -= h;
            (t.eval(rp)[comp] - t.eval(rm)[comp]) / (2.0 * h)
        };
        let fd = CVec3::new(d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0));
        let exact = t.curl().eval(r);
        assert!((fd - exact).norm() < 1e-8);
    }

    #[test]
    fn plane_wave_is_transverse_and_curl_curl_is_k_squared() {
        let t = plane([1.5, 0.0, 0.7]);
        assert!(t.divergence().amp.norm() < 1e-15);
        let cc = t.curl().curl();
        let k2 = 1.5f64.powi(2) + 0.7f64.powi(2);
        assert!((cc.amp - t.amp * c(k2, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exp_integral_small_and_large() {
        let s = c(1e-9, 2e-9);
        let v = exp_integral(s, -1.0, 2.0);
        assert!((v - c(3.0, 0.0)).norm() < 1e-7);
        let s = c(-0.5, 2.0);
        let v = exp_integral(s, 0.0, 1.0);
        let exact = ((s).exp() - 1.0) / s;
        assert!((v - exact).norm() < 1e-15);
        let semi = exp_integral_semi(c(-2.0, 0.0), 0.0, f64::INFINITY).unwrap();
        assert!((semi - c(0.5, 0.0)).norm() < 1e-15);
        assert!(exp_integral_semi(c(2.0, 0.0), 0.0, f64::INFINITY).is_none());
    }
}
