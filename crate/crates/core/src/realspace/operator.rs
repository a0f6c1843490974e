//! Assembly of the discrete Hopfield operator.
//!
//! The field and matter degrees of freedom are written as canonical pairs
//! z = (q, p) with energy ½ h zᵀ diag(V, T) z. For TE q = (D_y, X_y) and
//! p = (A_y, P_y). For TM the transverse displacement is parametrized as
//! D = C φ, where C is the staggered curl acting on y-scalars, so q = (φ, X)
//! and p = (H_y, P). Both blocks are real symmetric and positive definite.
//!
//! A mode operator a = h wᵀz evolves as e^{−iωt} iff ℬ₀ w = ω w with
//! ℬ₀ = −i M J, M = diag(V, T) and J = [[0, 1], [−1, 0]]. The Kreĭn metric is
//! K = −i h J, and K ℬ₀ = −h J M J is Hermitian by construction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::band::{SymBand, SymBuilder};
use super::grid::{Grid1D, MaterialMap, NodeOscillator, Stagger};
use crate::error::{HopfieldError, Result};
use crate::media::LayeredGeometry;

/// Advisory resolution: h must not exceed λ_min / this.
pub const POINTS_PER_WAVELENGTH: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::TE => "TE",
            Polarization::TM => "TM",
        })
    }
}

impl std::str::FromStr for Polarization {
    type Err = HopfieldError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TE" => Ok(Polarization::TE),
            "TM" => Ok(Polarization::TM),
            _ => Err(HopfieldError::InvalidInput(format!("unknown polarization '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// What a coordinate q_i stands for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofKind {
    /// D_y (TE) or D_x (TM at k∥ = 0).
    Displacement(Axis),
    /// Stream function φ with D = C φ (TM).
    Stream,
    Oscillator(Axis, NodeOscillator),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dof {
    pub kind: DofKind,
    pub stagger: Stagger,
    /// Node index j (z_j or z_{j+½}).
    pub node: usize,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembleOptions {
    /// Fail with ResolutionTooCoarse when h > λ_min/20.
    pub enforce_resolution: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            enforce_resolution: true,
        }
    }
}

/// Assembled operator at fixed k∥ and polarization.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid1D,
    pub polarization: Polarization,
    pub k_par: f64,
    pub dofs: Vec<Dof>,
    /// Coordinate block.
    pub v: SymBand,
    /// Momentum block.
    pub t: SymBand,
    /// Symmetric form with the same ω² spectrum as V T.
    pub sym: SymBand,
    /// w_q = R u for eigenvectors u of `sym`.
    pub r: SymBand,
}

/// Builds ℬ₀ for `geom` on an N-cell grid.
pub fn assemble_operator(
    geom: &LayeredGeometry,
    n: usize,
    k_par: f64,
    polarization: Polarization,
) -> Result<DiscreteOperator> {
    assemble_operator_with(geom, n, k_par, polarization, AssembleOptions::default())
}

pub fn assemble_operator_with(
    geom: &LayeredGeometry,
    n: usize,
    k_par: f64,
    polarization: Polarization,
    options: AssembleOptions,
) -> Result<DiscreteOperator> {
    if !(k_par >= 0.0 && k_par.is_finite()) {
        return Err(HopfieldError::InvalidInput(format!(
            "k_par must be finite and non-negative, got {k_par}"
        )));
    }
    let grid = Grid1D::for_geometry(geom, n)?;
    let map = MaterialMap::sample(geom, &grid)?;
    let lambda_min = 2.0 * std::f64::consts::PI / k_par.max(map.omega_scale());
    if options.enforce_resolution && grid.h > lambda_min / POINTS_PER_WAVELENGTH {
        return Err(HopfieldError::ResolutionTooCoarse {
            h: grid.h,
            limit: lambda_min / POINTS_PER_WAVELENGTH,
        });
    }
    let parts = match polarization {
        Polarization::TE => assemble_transverse(&grid, &map, k_par, Axis::Y, false),
        Polarization::TM if k_par == 0.0 => assemble_transverse(&grid, &map, 0.0, Axis::X, true),
        Polarization::TM => assemble_stream(&grid, &map, k_par),
    };
    let (dofs, v, t, sym, r) = parts?;
    Ok(DiscreteOperator {
        grid,
        polarization,
        k_par,
        dofs,
        v,
        t,
        sym,
        r,
    })
}

type Parts = (Vec<Dof>, SymBand, SymBand, SymBand, SymBand);

/// D and X along one in-plane axis at interior integer nodes. With
/// `longitudinal`, decoupled X_z oscillators at half nodes are appended in
/// node order (TM at k∥ = 0, where D_z = 0).
fn assemble_transverse(
    grid: &Grid1D,
    map: &MaterialMap,
    k_par: f64,
    axis: Axis,
    longitudinal: bool,
) -> Result<Parts> {
    let h = grid.h;
    let mut dofs = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut field_index = vec![usize::MAX; grid.n + 1];
    for j in 0..grid.n {
        if j >= 1 {
            let mut group = vec![dofs.len()];
            field_index[j] = dofs.len();
            let z = grid.z(Stagger::Integer, j);
            dofs.push(Dof {
                kind: DofKind::Displacement(axis),
                stagger: Stagger::Integer,
                node: j,
                z,
            });
            for o in &map.integer[j] {
                group.push(dofs.len());
                dofs.push(Dof {
                    kind: DofKind::Oscillator(axis, *o),
                    stagger: Stagger::Integer,
                    node: j,
                    z,
                });
            }
            groups.push(group);
        }
        if longitudinal {
            for o in &map.half[j] {
                groups.push(vec![dofs.len()]);
                dofs.push(Dof {
                    kind: DofKind::Oscillator(Axis::Z, *o),
                    stagger: Stagger::Half,
                    node: j,
                    z: grid.z(Stagger::Half, j),
                });
            }
        }
    }
    let n = dofs.len();
    let mut v = SymBuilder::new(n);
    let mut t = SymBuilder::new(n);
    for group in &groups {
        let first = group[0];
        match dofs[first].kind {
            DofKind::Displacement(_) => {
                // ½|D + Σ κ' X|² + Σ ½ ρ'ω_T² X²
                let coeffs: Vec<(usize, f64)> = group
                    .iter()
                    .map(|&i| match dofs[i].kind {
                        DofKind::Oscillator(_, o) => (i, o.kappa()),
                        _ => (i, 1.0),
                    })
                    .collect();
                for &(a, ca) in &coeffs {
                    for &(b, cb) in &coeffs {
                        if a >= b {
                            v.add(a, b, ca * cb);
                        }
                    }
                }
                for &i in &group[1..] {
                    if let DofKind::Oscillator(_, o) = dofs[i].kind {
                        v.add(i, i, o.rho() * o.medium.omega_t.powi(2));
                        t.add(i, i, 1.0 / o.rho());
                    }
                }
            }
            DofKind::Oscillator(_, o) => {
                v.add(first, first, o.stiffness());
                t.add(first, first, 1.0 / o.rho());
            }
            DofKind::Stream => unreachable!(),
        }
    }
    // |∇×A|² with A = 0 on the walls
    for j in 1..grid.n {
        let i = field_index[j];
        t.add(i, i, 2.0 / (h * h) + k_par * k_par);
        if j + 1 < grid.n {
            t.add(field_index[j + 1], i, -1.0 / (h * h));
        }
    }
    let v = v.build();
    let t = t.build();
    let r = block_sqrt(&v, &groups)?;
    let sym = triple_product(&r, &t);
    Ok((dofs, v, t, sym, r))
}

/// TM at k∥ > 0: φ and X_z at half nodes, X_x at interior integer nodes.
fn assemble_stream(grid: &Grid1D, map: &MaterialMap, k_par: f64) -> Result<Parts> {
    let h = grid.h;
    let mut dofs = Vec::new();
    let mut phi = vec![0usize; grid.n];
    let mut osc_x: Vec<Vec<usize>> = vec![Vec::new(); grid.n + 1];
    let mut osc_z: Vec<Vec<usize>> = vec![Vec::new(); grid.n];
    for j in 0..grid.n {
        if j >= 1 {
            let z = grid.z(Stagger::Integer, j);
            for o in &map.integer[j] {
                osc_x[j].push(dofs.len());
                dofs.push(Dof {
                    kind: DofKind::Oscillator(Axis::X, *o),
                    stagger: Stagger::Integer,
                    node: j,
                    z,
                });
            }
        }
        let z = grid.z(Stagger::Half, j);
        phi[j] = dofs.len();
        dofs.push(Dof {
            kind: DofKind::Stream,
            stagger: Stagger::Half,
            node: j,
            z,
        });
        for o in &map.half[j] {
            osc_z[j].push(dofs.len());
            dofs.push(Dof {
                kind: DofKind::Oscillator(Axis::Z, *o),
                stagger: Stagger::Half,
                node: j,
                z,
            });
        }
    }
    let n = dofs.len();
    let kappa_of = |i: usize| match dofs[i].kind {
        DofKind::Oscillator(_, o) => o,
        _ => unreachable!(),
    };
    let mut v = SymBuilder::new(n);
    let add_square = |v: &mut SymBuilder, coeffs: &[(usize, f64)]| {
        for &(a, ca) in coeffs {
            for &(b, cb) in coeffs {
                if a >= b {
                    v.add(a, b, ca * cb);
                }
            }
        }
    };
    // D_x(j) = −(φ_{j+½} − φ_{j−½})/h at interior integer nodes
    for j in 1..grid.n {
        let mut coeffs = vec![(phi[j - 1], 1.0 / h), (phi[j], -1.0 / h)];
        coeffs.extend(osc_x[j].iter().map(|&i| (i, kappa_of(i).kappa())));
        add_square(&mut v, &coeffs);
    }
    // D_z(j+½) = k φ_{j+½} (realified)
    for j in 0..grid.n {
        let mut coeffs = vec![(phi[j], k_par)];
        coeffs.extend(osc_z[j].iter().map(|&i| (i, kappa_of(i).kappa())));
        add_square(&mut v, &coeffs);
    }
    let mut t = SymBuilder::new(n);
    for (i, dof) in dofs.iter().enumerate() {
        match dof.kind {
            DofKind::Oscillator(_, o) => {
                v.add(i, i, o.rho() * o.medium.omega_t.powi(2));
                t.add(i, i, 1.0 / o.rho());
            }
            _ => t.add(i, i, 1.0),
        }
    }
    let v = v.build();
    let t = t.build();
    let mut r = SymBuilder::new(n);
    let mut half = SymBuilder::new(n);
    for i in 0..n {
        let ti = t.get(i, i);
        r.add(i, i, 1.0 / ti.sqrt());
        half.add(i, i, ti.sqrt());
    }
    let sym = triple_product(&half.build(), &v);
    Ok((dofs, v, t, sym, r.build()))
}

/// Symmetric square root of a block-diagonal positive definite matrix.
fn block_sqrt(v: &SymBand, groups: &[Vec<usize>]) -> Result<SymBand> {
    let mut out = SymBuilder::new(v.dim());
    for group in groups {
        let m = DMatrix::from_fn(group.len(), group.len(), |a, b| v.get(group[a], group[b]));
        let eig = SymmetricEigen::new(m);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(HopfieldError::InvalidInput(
                "local potential is not positive definite".into(),
            ));
        }
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        for a in 0..group.len() {
            for b in 0..=a {
                let (ia, ib) = (group[a], group[b]);
                let (i, j) = if ia >= ib { (ia, ib) } else { (ib, ia) };
                out.add(i, j, 0.5 * (root[(a, b)] + root[(b, a)]));
            }
        }
    }
    Ok(out.build())
}

/// S M S for symmetric banded S and M.
fn triple_product(s: &SymBand, m: &SymBand) -> SymBand {
    let n = s.dim();
    let (ks, km) = (s.bandwidth(), m.bandwidth());
    let mut out = SymBuilder::new(n);
    for i in 0..n {
        let jlo = i.saturating_sub(2 * ks + km);
        // row i of S M
        let klo = i.saturating_sub(ks);
        let khi = (i + ks).min(n - 1);
        let mut sm = std::collections::BTreeMap::<usize, f64>::new();
        for k in klo..=khi {
            let sik = s.get(i, k);
            if sik == 0.0 {
                continue;
            }
            let llo = k.saturating_sub(km);
            let lhi = (k + km).min(n - 1);
            for l in llo..=lhi {
                *sm.entry(l).or_insert(0.0) += sik * m.get(k, l);
            }
        }
        for j in jlo..=i {
            let mut acc = 0.0;
            for (&l, &x) in sm.range(j.saturating_sub(ks)..=(j + ks).min(n - 1)) {
                acc += x * s.get(l, j);
            }
            if acc != 0.0 {
                out.add(i, j, acc);
            }
        }
    }
    out.build()
}

impl DiscreteOperator {
    /// Number of canonical coordinates (ℬ₀ has twice this dimension).
    pub fn n_coordinates(&self) -> usize {
        self.dofs.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.dofs.len()
    }

    /// ℬ₀ w = (−i V w_p, i T w_q).
    pub fn apply(&self, w: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.n_coordinates();
        let wq = w.rows(0, n);
        let wp = w.rows(n, n);
        let apply = |m: &SymBand, x: &[Complex64], factor: Complex64| -> Vec<Complex64> {
            let re: Vec<f64> = x.iter().map(|c| c.re).collect();
            let im: Vec<f64> = x.iter().map(|c| c.im).collect();
            let (a, b) = (m.mul_vec(&re), m.mul_vec(&im));
            a.into_iter()
                .zip(b)
                .map(|(x, y)| Complex64::new(x, y) * factor)
                .collect()
        };
        let wp: Vec<Complex64> = wp.iter().copied().collect();
        let wq: Vec<Complex64> = wq.iter().copied().collect();
        let top = apply(&self.v, &wp, Complex64::new(0.0, -1.0));
        let bottom = apply(&self.t, &wq, Complex64::new(0.0, 1.0));
        DVector::from_iterator(2 * n, top.into_iter().chain(bottom))
    }

    /// Dense ℬ₀.
    pub fn b0_dense(&self) -> DMatrix<Complex64> {
        let n = self.n_coordinates();
        let v = self.v.to_dense();
        let t = self.t.to_dense();
        let mut b = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                b[(i, n + j)] = Complex64::new(0.0, -v[(i, j)]);
                b[(n + i, j)] = Complex64::new(0.0, t[(i, j)]);
            }
        }
        b
    }

    /// Dense Kreĭn metric K = −i h J.
    pub fn krein_metric_dense(&self) -> DMatrix<Complex64> {
        let n = self.n_coordinates();
        let mut k = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            k[(i, n + i)] = Complex64::new(0.0, -self.grid.h);
            k[(n + i, i)] = Complex64::new(0.0, self.grid.h);
        }
        k
    }

    /// Real matrix M J, whose eigenvalues are i·(eigenvalues of ℬ₀).
    pub fn mj_dense(&self) -> DMatrix<f64> {
        let n = self.n_coordinates();
        let v = self.v.to_dense();
        let t = self.t.to_dense();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        // M J = [[0, V], [−T, 0]]
        for i in 0..n {
            for j in 0..n {
                m[(i, n + j)] = v[(i, j)];
                m[(n + i, j)] = -t[(i, j)];
            }
        }
        m
    }

    /// Frobenius norm of K ℬ₀ − ℬ₀† K.
    pub fn self_adjointness_defect(&self) -> f64 {
        let k = self.krein_metric_dense();
        let b = self.b0_dense();
        (&k * &b - b.adjoint() * &k).norm()
    }

    /// Discrete Kreĭn product h w_a† (−iJ) w_b.
    pub fn krein_product(&self, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
        let n = self.n_coordinates();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += a[i].conj() * b[n + i] - a[n + i].conj() * b[i];
        }
        acc * Complex64::new(0.0, -self.grid.h)
    }

    /// Node positions of the stream function (TM, k∥ > 0).
    pub fn stream_indices(&self) -> Vec<usize> {
        self.dofs
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d.kind, DofKind::Stream))
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::MediumParams;

    #[test]
    fn symmetric_form_is_similar_to_vt() {
        let geom = LayeredGeometry::interface(MediumParams::reference(), 4.0, 1.0);
        for pol in [Polarization::TE, Polarization::TM] {
            let op = assemble_operator(&geom, 32, 1.5, pol).unwrap();
            let vt = op.v.to_dense() * op.t.to_dense();
            let r = op.r.to_dense();
            let lhs = &vt * &r;
            let rhs = &r * op.sym.to_dense();
            assert!((lhs - rhs).norm() < 1e-9 * vt.norm(), "{pol}");
        }
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let geom = LayeredGeometry::interface(MediumParams::reference(), 40.0, 1.0);
        assert!(matches!(
            assemble_operator(&geom, 64, 2.0, Polarization::TM),
            Err(HopfieldError::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn krein_metric_makes_b0_hermitian() {
        let geom = LayeredGeometry::interface(MediumParams::reference(), 4.0, 1.0);
        let op = assemble_operator(&geom, 32, 1.0, Polarization::TM).unwrap();
        assert!(op.self_adjointness_defect() < 1e-12);
    }
}
