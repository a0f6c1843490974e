//! Spectrum, Kreĭn normalization and resolution of the identity.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::band::eigenpairs_in_range;
use super::grid::{Grid1D, Stagger};
use super::operator::{Axis, DiscreteOperator, DofKind, Polarization};
use crate::error::{HopfieldError, Result};

/// Dense solves are used up to this many cells under [`SolverChoice::Auto`].
pub const DENSE_CELL_LIMIT: usize = 1024;

/// Relative Kreĭn norm below which a vector is treated as null.
pub const KREIN_NULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SolverChoice {
    #[default]
    Auto,
    Dense,
    Banded,
}

/// Eigenpairs of ℬ₀ in a frequency window, Kreĭn normalized.
#[derive(Debug, Clone)]
pub struct DiscreteEigenSolution {
    pub grid: Grid1D,
    pub polarization: Polarization,
    pub k_par: f64,
    /// Ascending eigenfrequencies.
    pub eigenfrequencies: Vec<f64>,
    /// Stacked weights (w_q, w_p) with h w†(−iJ)w = sgn(ω).
    pub eigenvectors: Vec<DVector<Complex64>>,
    /// True when every eigenpair of ℬ₀ is present.
    pub complete: bool,
}

impl DiscreteEigenSolution {
    pub fn len(&self) -> usize {
        self.eigenfrequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenfrequencies.is_empty()
    }
}

/// All eigenpairs with ω in [lo, hi].
pub fn solve_spectrum(op: &DiscreteOperator, window: (f64, f64), choice: SolverChoice) -> Result<DiscreteEigenSolution> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(HopfieldError::InvalidInput(format!("empty window [{lo}, {hi}]")));
    }
    // ω² ranges covered by the positive and negative halves of the window
    let sq_range = |a: f64, b: f64| -> Option<(f64, f64)> {
        (b >= a && b >= 0.0).then(|| (a.max(0.0).powi(2), b * b))
    };
    let pos = sq_range(lo, hi);
    let neg = sq_range(-hi, -lo);
    let (lam_lo, lam_hi) = match (pos, neg) {
        (Some(p), Some(n)) => (p.0.min(n.0), p.1.max(n.1)),
        (Some(p), None) => p,
        (None, Some(n)) => n,
        (None, None) => unreachable!(),
    };
    let dense = match choice {
        SolverChoice::Dense => true,
        SolverChoice::Banded => false,
        SolverChoice::Auto => op.grid.n <= DENSE_CELL_LIMIT,
    };
    let pairs: Vec<(f64, DVector<f64>)> = if dense {
        let eig = SymmetricEigen::new(op.sym.to_dense());
        (0..eig.eigenvalues.len())
            .filter(|&i| {
                let l = eig.eigenvalues[i];
                l >= lam_lo * (1.0 - 1e-14) && l <= lam_hi * (1.0 + 1e-14)
            })
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
            .collect()
    } else {
        let lam_hi_open = lam_hi * (1.0 + 1e-14) + f64::MIN_POSITIVE;
        eigenpairs_in_range(&op.sym, lam_lo * (1.0 - 1e-14), lam_hi_open)
    };
    let mut out: Vec<(f64, DVector<Complex64>)> = Vec::new();
    for (index, (lambda, u)) in pairs.into_iter().enumerate() {
        if !(lambda > 0.0) {
            return Err(HopfieldError::DegenerateKreinNorm { index, norm: lambda });
        }
        let omega = lambda.sqrt();
        let w = mode_weights(op, omega, &u, index)?;
        if omega >= lo && omega <= hi {
            out.push((omega, w.clone()));
        }
        if -omega >= lo && -omega <= hi {
            out.push((-omega, w.map(|c| c.conj())));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    let complete = out.len() == op.dim();
    let (eigenfrequencies, eigenvectors) = out.into_iter().unzip();
    Ok(DiscreteEigenSolution {
        grid: op.grid,
        polarization: op.polarization,
        k_par: op.k_par,
        eigenfrequencies,
        eigenvectors,
        complete,
    })
}

/// Kreĭn-normalized positive-frequency weights from an eigenvector of the
/// symmetric form: w_q = R u, w_p = i T w_q / ω.
fn mode_weights(op: &DiscreteOperator, omega: f64, u: &DVector<f64>, index: usize) -> Result<DVector<Complex64>> {
    let n = op.n_coordinates();
    let wq = op.r.mul_vec(u.as_slice());
    let twq = op.t.mul_vec(&wq);
    let quad: f64 = wq.iter().zip(&twq).map(|(a, b)| a * b).sum();
    let norm = 2.0 * op.grid.h * quad / omega;
    let scale = wq.iter().map(|x| x * x).sum::<f64>() * op.grid.h;
    if !(norm > KREIN_NULL_TOL * scale) {
        return Err(HopfieldError::DegenerateKreinNorm { index, norm });
    }
    let c = 1.0 / norm.sqrt();
    // fix the sign so that the largest coordinate is positive
    let big = wq
        .iter()
        .copied()
        .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    let c = if big < 0.0 { -c } else { c };
    Ok(DVector::from_iterator(
        2 * n,
        wq.iter()
            .map(|&x| Complex64::new(c * x, 0.0))
            .chain(twq.iter().map(|&x| Complex64::new(0.0, c * x / omega))),
    ))
}

/// ⟨⟨Ψ_m|Ψ_n⟩⟩.
pub fn krein_inner(op: &DiscreteOperator, sol: &DiscreteEigenSolution, m: usize, n: usize) -> Complex64 {
    op.krein_product(&sol.eigenvectors[m], &sol.eigenvectors[n])
}

/// ‖ℬ₀Ψ − ωΨ‖/‖Ψ‖ for eigenpair n.
pub fn eigen_residual(op: &DiscreteOperator, sol: &DiscreteEigenSolution, n: usize) -> f64 {
    let w = &sol.eigenvectors[n];
    let r = op.apply(w) - w * Complex64::new(sol.eigenfrequencies[n], 0.0);
    r.norm() / w.norm()
}

/// max_n min_m |ω_n + ω_m|.
pub fn pairing_defect(omegas: &[f64]) -> f64 {
    omegas
        .iter()
        .map(|a| omegas.iter().map(|b| (a + b).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Largest |⟨⟨Ψ_m|Ψ_n⟩⟩ − δ_mn sgn(ω_n)| over all pairs.
pub fn orthonormality_defect(op: &DiscreteOperator, sol: &DiscreteEigenSolution) -> f64 {
    let mut worst = 0.0f64;
    for m in 0..sol.len() {
        for n in 0..sol.len() {
            let target = if m == n { sol.eigenfrequencies[n].signum() } else { 0.0 };
            worst = worst.max((krein_inner(op, sol, m, n) - target).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletenessReport {
    /// max over test vectors of ‖Σ_n sgn(ω_n) Ψ_n⟨⟨Ψ_n|v⟩⟩ − v‖/‖v‖.
    pub max_deviation: f64,
    pub vectors: usize,
}

/// Checks the signed resolution of the identity on `test_vectors`.
pub fn completeness_check(
    op: &DiscreteOperator,
    sol: &DiscreteEigenSolution,
    test_vectors: &[DVector<Complex64>],
) -> Result<CompletenessReport> {
    if sol.len() != op.dim() {
        return Err(HopfieldError::IncompleteSpectrum {
            found: sol.len(),
            dim: op.dim(),
        });
    }
    let mut worst = 0.0f64;
    for v in test_vectors {
        let mut acc = DVector::<Complex64>::zeros(v.len());
        for (w, &omega) in sol.eigenvectors.iter().zip(&sol.eigenfrequencies) {
            let c = op.krein_product(w, v) * omega.signum();
            acc.axpy(c, w, Complex64::new(1.0, 0.0));
        }
        worst = worst.max((acc - v).norm() / v.norm());
    }
    Ok(CompletenessReport {
        max_deviation: worst,
        vectors: test_vectors.len(),
    })
}

/// Which Hopfield field a grid sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HopfieldField {
    Alpha,
    Beta,
    Gamma,
    Eta,
}

impl HopfieldField {
    pub fn as_str(&self) -> &'static str {
        match self {
            HopfieldField::Alpha => "alpha",
            HopfieldField::Beta => "beta",
            HopfieldField::Gamma => "gamma",
            HopfieldField::Eta => "eta",
        }
    }
}

/// One component of one Hopfield field at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSample {
    pub field: HopfieldField,
    pub axis: Axis,
    pub z: f64,
    pub value: Complex64,
}

/// Stacked (α, β, γ, η) of eigenpair `n` with in-plane factor e^{−ik∥x}.
///
/// Mode functions follow from the weights as u = iJw̄; then α = −Ē/ω,
/// β = −H̄/ω, γ = iX̄, η = −iP̄ with E = D + Σκ'X and H = ∇×A.
pub fn hopfield_coefficients(op: &DiscreteOperator, sol: &DiscreteEigenSolution, n: usize) -> Vec<GridSample> {
    let omega = sol.eigenfrequencies[n];
    let w = &sol.eigenvectors[n];
    let nq = op.n_coordinates();
    let h = op.grid.h;
    let k = op.k_par;
    let i = Complex64::new(0.0, 1.0);
    // u_q = T w_q / ω, u_p = −i w_q
    let wq: Vec<Complex64> = w.rows(0, nq).iter().copied().collect();
    let tw = {
        let re: Vec<f64> = wq.iter().map(|c| c.re).collect();
        let im: Vec<f64> = wq.iter().map(|c| c.im).collect();
        let (a, b) = (op.t.mul_vec(&re), op.t.mul_vec(&im));
        a.into_iter().zip(b).map(|(x, y)| Complex64::new(x, y)).collect::<Vec<_>>()
    };
    let uq: Vec<Complex64> = tw.iter().map(|x| x / omega).collect();
    let up: Vec<Complex64> = wq.iter().map(|x| -i * x).collect();
    // realified z components carry a factor i
    let physical = |axis: Axis, x: Complex64| if axis == Axis::Z { i * x } else { x };
    let mut out = Vec::new();
    let push = |out: &mut Vec<GridSample>, field, axis, z, value: Complex64| {
        out.push(GridSample { field, axis, z, value })
    };
    let conj_scale = |x: Complex64, s: Complex64| x.conj() * s;

    let push_matter = |out: &mut Vec<GridSample>| {
        for (idx, dof) in op.dofs.iter().enumerate() {
            if let DofKind::Oscillator(axis, _) = dof.kind {
                let x = physical(axis, uq[idx]);
                let p = physical(axis, up[idx]);
                push(out, HopfieldField::Gamma, axis, dof.z, conj_scale(x, i));
                push(out, HopfieldField::Eta, axis, dof.z, conj_scale(p, -i));
            }
        }
    };

    let stream = op.stream_indices();
    if stream.is_empty() {
        // D along `axis` at interior integer nodes, A its conjugate
        let mut by_node: Vec<(usize, Axis, Complex64, Complex64)> = Vec::new();
        for (idx, dof) in op.dofs.iter().enumerate() {
            match dof.kind {
                DofKind::Displacement(axis) => by_node.push((dof.node, axis, uq[idx], up[idx])),
                DofKind::Oscillator(_, o) if dof.stagger == Stagger::Integer => {
                    if let Some(last) = by_node.last_mut() {
                        last.2 += uq[idx] * o.kappa();
                    }
                }
                _ => {}
            }
        }
        let axis = by_node.first().map_or(Axis::Y, |b| b.1);
        for &(node, _, e, _) in &by_node {
            let z = op.grid.z(Stagger::Integer, node);
            push(&mut out, HopfieldField::Alpha, axis, z, conj_scale(e, Complex64::new(-1.0 / omega, 0.0)));
        }
        // A = 0 on the walls; H = ∇×(A ê) with e^{+ikx}
        let a_at = |j: usize| -> Complex64 {
            by_node
                .iter()
                .find(|b| b.0 == j)
                .map_or(Complex64::new(0.0, 0.0), |b| b.3)
        };
        let (tangential_axis, sign) = match axis {
            Axis::Y => (Axis::X, -1.0),
            _ => (Axis::Y, 1.0),
        };
        for j in 0..op.grid.n {
            let dz = (a_at(j + 1) - a_at(j)) / h * sign;
            push(
                &mut out,
                HopfieldField::Beta,
                tangential_axis,
                op.grid.z(Stagger::Half, j),
                conj_scale(dz, Complex64::new(-1.0 / omega, 0.0)),
            );
        }
        if axis == Axis::Y {
            for &(node, _, _, a) in &by_node {
                let hz = i * k * a;
                push(
                    &mut out,
                    HopfieldField::Beta,
                    Axis::Z,
                    op.grid.z(Stagger::Integer, node),
                    conj_scale(hz, Complex64::new(-1.0 / omega, 0.0)),
                );
            }
        }
        for (idx, dof) in op.dofs.iter().enumerate() {
            if let DofKind::Oscillator(Axis::Z, o) = dof.kind {
                let ez = physical(Axis::Z, uq[idx] * o.kappa());
                push(&mut out, HopfieldField::Alpha, Axis::Z, dof.z, conj_scale(ez, Complex64::new(-1.0 / omega, 0.0)));
            }
        }
        push_matter(&mut out);
        return out;
    }

    // TM: E_x at interior integer nodes, E_z at half nodes, H_y at half nodes
    let phi: Vec<Complex64> = stream.iter().map(|&s| uq[s]).collect();
    let mut ex = vec![Complex64::new(0.0, 0.0); op.grid.n + 1];
    let mut ez: Vec<Complex64> = phi.iter().map(|p| p * k).collect();
    for j in 1..op.grid.n {
        ex[j] = -(phi[j] - phi[j - 1]) / h;
    }
    for (idx, dof) in op.dofs.iter().enumerate() {
        if let DofKind::Oscillator(axis, o) = dof.kind {
            match axis {
                Axis::X => ex[dof.node] += uq[idx] * o.kappa(),
                _ => ez[dof.node] += uq[idx] * o.kappa(),
            }
        }
    }
    let scale = Complex64::new(-1.0 / omega, 0.0);
    for j in 1..op.grid.n {
        push(&mut out, HopfieldField::Alpha, Axis::X, op.grid.z(Stagger::Integer, j), conj_scale(ex[j], scale));
    }
    for j in 0..op.grid.n {
        let z = op.grid.z(Stagger::Half, j);
        push(&mut out, HopfieldField::Alpha, Axis::Z, z, conj_scale(physical(Axis::Z, ez[j]), scale));
        push(&mut out, HopfieldField::Beta, Axis::Y, z, conj_scale(up[stream[j]], scale));
    }
    push_matter(&mut out);
    out
}

/// Projects a TM displacement-like field (x at interior integer nodes, z at
/// half nodes, realified) onto the discrete transverse subspace range(C) by
/// solving the 1D Poisson problem CᵀC φ = Cᵀf.
pub fn transverse_projection(op: &DiscreteOperator, fx: &[f64], fz: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = op.grid.n;
    if op.polarization != Polarization::TM || op.k_par == 0.0 {
        return Err(HopfieldError::InvalidInput(
            "transverse projection needs TM at k_par > 0".into(),
        ));
    }
    if fx.len() != n + 1 || fz.len() != n {
        return Err(HopfieldError::InvalidInput("field length does not match the grid".into()));
    }
    let h = op.grid.h;
    let k = op.k_par;
    // Cᵀf at half nodes: (Cᵀf)_j = (f_x(j+1) − f_x(j))/h·[interior] + k f_z(j)
    let mut rhs = vec![0.0; n];
    for j in 0..n {
        let up = if j + 1 < n { fx[j + 1] } else { 0.0 };
        let dn = if j >= 1 { fx[j] } else { 0.0 };
        rhs[j] = (up - dn) / h + k * fz[j];
    }
    // CᵀC is tridiagonal: −δ²/h² (Neumann-like at the walls) + k²
    let mut b = super::band::SymBuilder::new(n);
    for j in 0..n {
        let mut diag = k * k;
        if j >= 1 {
            diag += 1.0 / (h * h);
            b.add(j, j - 1, -1.0 / (h * h));
        }
        if j + 1 < n {
            diag += 1.0 / (h * h);
        }
        b.add(j, j, diag);
    }
    let phi = b.build().shifted_lu(0.0).solve(&rhs);
    let mut px = vec![0.0; n + 1];
    for j in 1..n {
        px[j] = -(phi[j] - phi[j - 1]) / h;
    }
    let pz = phi.iter().map(|p| k * p).collect();
    Ok((px, pz))
}
