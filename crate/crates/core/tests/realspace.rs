use hopfield_core::dispersion::{bulk_branches, surface_dispersion_omega};
use hopfield_core::modes::PolaritonMode;
use hopfield_core::realspace::*;
use hopfield_core::*;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

const PI: f64 = std::f64::consts::PI;

fn reference_interface(lz: f64) -> LayeredGeometry {
    LayeredGeometry::interface(MediumParams::reference(), lz, 1.0)
}

fn full(op: &DiscreteOperator) -> DiscreteEigenSolution {
    solve_spectrum(op, (f64::NEG_INFINITY, f64::INFINITY), SolverChoice::Dense).unwrap()
}

fn random_vectors(dim: usize, count: usize, seed: u64) -> Vec<DVector<Complex64>> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| DVector::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect()
}

fn surface_mode_omega(n: usize) -> f64 {
    let op = assemble_operator(&reference_interface(40.0), n, 2.0, Polarization::TM).unwrap();
    let sol = solve_spectrum(&op, (1.0 + 1e-6, 1.19), SolverChoice::Banded).unwrap();
    sol.eigenfrequencies[0]
}

#[test]
fn vacuum_box_te_modes_converge_quadratically() {
    let geom = LayeredGeometry::homogeneous(None, 4.0, 1.0);
    let k = 0.7;
    let exact: Vec<f64> = (1..=3).map(|m| (k * k + (m as f64 * PI / 4.0).powi(2)).sqrt()).collect();
    let mut errors = Vec::new();
    for n in [64, 128, 256] {
        let op = assemble_operator(&geom, n, k, Polarization::TE).unwrap();
        let sol = solve_spectrum(&op, (0.0, 3.0), SolverChoice::Dense).unwrap();
        for (w, e) in sol.eigenfrequencies.iter().zip(&exact) {
            assert!((w - e).abs() < 2e-3 * e);
        }
        errors.push(exact[0] - sol.eigenfrequencies[0]);
    }
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((3.9..4.1).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn matter_box_at_normal_incidence_has_longitudinal_cluster_and_bulk_branches() {
    let m = MediumParams::reference();
    let lz = 4.0;
    let geom = LayeredGeometry::homogeneous(Some(m), lz, 1.0);
    let op = assemble_operator(&geom, 256, 0.0, Polarization::TM).unwrap();
    let sol = solve_spectrum(&op, (0.0, 2.5), SolverChoice::Dense).unwrap();
    let at_l = sol.eigenfrequencies.iter().filter(|w| (*w - m.omega_l()).abs() < 1e-9).count();
    assert_eq!(at_l, 256, "one longitudinal oscillator per half node");
    for mz in 1..=3 {
        let (lower, upper) = bulk_branches(&m, mz as f64 * PI / lz).unwrap();
        for target in [lower, upper] {
            let nearest = sol
                .eigenfrequencies
                .iter()
                .map(|w| (w - target).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-3 * target, "k_z index {mz}: {target}");
        }
    }
}

#[test]
fn decoupled_matter_sits_at_the_resonance() {
    let m = MediumParams::new(1.0, 1.0, 0.0).unwrap();
    let geom = LayeredGeometry::interface(m, 4.0, 1.0);
    for pol in [Polarization::TE, Polarization::TM] {
        let op = assemble_operator(&geom, 32, 1.3, pol).unwrap();
        let sol = full(&op);
        let oscillators = op.dofs.iter().filter(|d| matches!(d.kind, DofKind::Oscillator(..))).count();
        let at_t = sol.eigenfrequencies.iter().filter(|w| (w.abs() - 1.0).abs() < 1e-12).count();
        assert_eq!(at_t, 2 * oscillators, "{pol}");
    }
}

#[test]
fn spectrum_is_paired_without_zero_modes() {
    let geom = reference_interface(4.0);
    for pol in [Polarization::TE, Polarization::TM] {
        let op = assemble_operator(&geom, 24, 1.3, pol).unwrap();
        // eigenvalues of ℬ₀ = −i M J from a general (non-symmetric) solve
        let mu = op.mj_dense().complex_eigenvalues();
        let omegas: Vec<f64> = mu.iter().map(|z| z.im).collect();
        let scale = omegas.iter().map(|w| w.abs()).fold(0.0, f64::max);
        assert!(mu.iter().all(|z| z.re.abs() < 1e-9 * scale));
        assert!(pairing_defect(&omegas) < 1e-10 * scale, "{pol}");
        assert!(omegas.iter().all(|w| w.abs() > 1e-6));
        let sol = full(&op);
        let mut independent = omegas.clone();
        independent.sort_by(f64::total_cmp);
        for (a, b) in independent.iter().zip(&sol.eigenfrequencies) {
            assert!((a - b).abs() < 1e-9 * scale);
        }
    }
}

#[test]
fn krein_metric_makes_the_operator_self_adjoint() {
    let geom = reference_interface(8.0);
    for pol in [Polarization::TE, Polarization::TM] {
        let op = assemble_operator(&geom, 128, 2.0, pol).unwrap();
        assert!(op.self_adjointness_defect() < 1e-12, "{pol}");
    }
}

#[test]
fn eigenvectors_are_krein_orthonormal() {
    let geom = reference_interface(6.0);
    let op = assemble_operator(&geom, 60, 2.0, Polarization::TM).unwrap();
    let sol = full(&op);
    assert!(sol.complete);
    assert!(orthonormality_defect(&op, &sol) < 1e-8);
    let pos = sol.eigenfrequencies.iter().position(|&w| w > 0.0).unwrap();
    assert!((krein_inner(&op, &sol, pos, pos).re - 1.0).abs() < 1e-10);
    assert!((krein_inner(&op, &sol, 0, 0).re + 1.0).abs() < 1e-10);
    for n in 0..sol.len() {
        assert!(eigen_residual(&op, &sol, n) < 1e-10);
    }
}

#[test]
fn surface_and_propagating_modes_are_orthogonal() {
    let geom = reference_interface(20.0);
    let op = assemble_operator(&geom, 1000, 2.0, Polarization::TM).unwrap();
    let sol = solve_spectrum(&op, (1.0 + 1e-6, 2.3), SolverChoice::Banded).unwrap();
    let surface = 0;
    assert!((sol.eigenfrequencies[0] - surface_dispersion_omega(&MediumParams::reference(), 2.0).unwrap()).abs() < 1e-3);
    let propagating = sol.eigenfrequencies.iter().position(|&w| w > 2.0).unwrap();
    assert!(krein_inner(&op, &sol, surface, propagating).norm() < 1e-8);
}

#[test]
fn signed_resolution_of_identity() {
    let geom = reference_interface(6.0);
    let op = assemble_operator(&geom, 48, 1.5, Polarization::TM).unwrap();
    let sol = full(&op);
    let report = completeness_check(&op, &sol, &random_vectors(op.dim(), 4, 7)).unwrap();
    assert!(report.max_deviation < 1e-9, "{report:?}");
    let own = completeness_check(&op, &sol, &[sol.eigenvectors[3].clone()]).unwrap();
    assert!(own.max_deviation < 1e-10);
}

#[test]
fn vacuum_completeness_is_exact() {
    let geom = LayeredGeometry::homogeneous(None, 6.0, 1.0);
    for pol in [Polarization::TE, Polarization::TM] {
        let op = assemble_operator(&geom, 64, 1.0, pol).unwrap();
        let sol = full(&op);
        let report = completeness_check(&op, &sol, &random_vectors(op.dim(), 3, 11)).unwrap();
        assert!(report.max_deviation < 1e-10, "{pol}: {report:?}");
    }
}

#[test]
fn partial_spectrum_is_not_complete() {
    let geom = reference_interface(6.0);
    let op = assemble_operator(&geom, 32, 1.5, Polarization::TE).unwrap();
    let sol = solve_spectrum(&op, (0.0, 2.0), SolverChoice::Dense).unwrap();
    assert!(matches!(
        completeness_check(&op, &sol, &random_vectors(op.dim(), 1, 3)),
        Err(HopfieldError::IncompleteSpectrum { .. })
    ));
}

#[test]
fn banded_and_dense_solvers_agree() {
    let geom = reference_interface(8.0);
    for pol in [Polarization::TE, Polarization::TM] {
        let op = assemble_operator(&geom, 200, 1.2, pol).unwrap();
        let window = (-2.0, 2.0);
        let a = solve_spectrum(&op, window, SolverChoice::Dense).unwrap();
        let b = solve_spectrum(&op, window, SolverChoice::Banded).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.eigenfrequencies.iter().zip(&b.eigenfrequencies) {
            assert!((x - y).abs() < 1e-11);
        }
        for n in 0..b.len() {
            assert!(eigen_residual(&op, &b, n) < 1e-10);
        }
    }
}

#[test]
fn surface_eigenfrequency_converges_at_second_order() {
    let exact = surface_dispersion_omega(&MediumParams::reference(), 2.0).unwrap();
    let e1 = surface_mode_omega(500) - exact;
    let e2 = surface_mode_omega(1000) - exact;
    let ratio = e1 / e2;
    assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    assert!(e2.abs() < 5e-3 * exact);
}

#[test]
fn discrete_surface_mode_matches_normalized_analytic_mode() {
    let geom = reference_interface(40.0);
    let op = assemble_operator(&geom, 2000, 2.0, Polarization::TM).unwrap();
    let sol = solve_spectrum(&op, (1.0 + 1e-6, 1.19), SolverChoice::Banded).unwrap();
    let samples = hopfield_coefficients(&op, &sol, 0);
    let mode = PolaritonMode::build(&geom, &ModeIndex::surface([2.0, 0.0])).unwrap();
    let analytic = |s: &GridSample| {
        let p = [0.0, 0.0, s.z];
        let v = match s.field {
            HopfieldField::Alpha => mode.hopfield.alpha.eval(p),
            HopfieldField::Beta => mode.hopfield.beta.eval(p),
            HopfieldField::Gamma => mode.hopfield.gamma.eval(p),
            HopfieldField::Eta => mode.hopfield.eta.eval(p),
        };
        v[match s.axis {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }]
    };
    // global phase from the largest α_z sample
    let anchor = samples
        .iter()
        .filter(|s| s.field == HopfieldField::Alpha && s.axis == Axis::Z)
        .max_by(|a, b| a.value.norm().total_cmp(&b.value.norm()))
        .unwrap();
    let phase = analytic(anchor) / anchor.value;
    assert!((phase.norm() - 1.0).abs() < 1e-3);
    let phase = phase / phase.norm();
    for s in samples.iter().filter(|s| s.z.abs() > 0.011 && s.z.abs() < 1.0) {
        let a = analytic(s);
        assert!((s.value * phase - a).norm() < 1e-3 * a.norm().max(0.05), "{s:?} vs {a}");
    }
}

#[test]
fn hopfield_samples_satisfy_local_relations() {
    let m = MediumParams::reference();
    let geom = reference_interface(10.0);
    let op = assemble_operator(&geom, 400, 2.0, Polarization::TE).unwrap();
    let sol = solve_spectrum(&op, (0.1, 2.5), SolverChoice::Dense).unwrap();
    let n = sol.eigenfrequencies.iter().position(|&w| w > 0.5).unwrap();
    let w = sol.eigenfrequencies[n];
    let samples = hopfield_coefficients(&op, &sol, n);
    let alpha_at = |z: f64| {
        samples
            .iter()
            .find(|s| s.field == HopfieldField::Alpha && (s.z - z).abs() < 1e-12)
            .unwrap()
            .value
    };
    let d = m.omega_t * m.omega_t - w * w;
    for s in samples.iter().filter(|s| s.z < -0.01) {
        match s.field {
            HopfieldField::Gamma => {
                let expect = alpha_at(s.z) * Complex64::new(0.0, m.kappa * w / (m.rho * d));
                assert!((s.value - expect).norm() < 1e-9 * (1.0 + expect.norm()), "{s:?} {expect}");
            }
            HopfieldField::Eta => {
                let expect = alpha_at(s.z) * (m.kappa * w * w / d);
                assert!((s.value - expect).norm() < 1e-9 * (1.0 + expect.norm()));
            }
            _ => {}
        }
    }
}

#[test]
fn mode_displacement_is_transverse() {
    let geom = reference_interface(8.0);
    let op = assemble_operator(&geom, 160, 1.5, Polarization::TM).unwrap();
    let n = op.grid.n;
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let fx: Vec<f64> = (0..=n).map(|j| if j == 0 || j == n { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
    let fz: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (px, pz) = transverse_projection(&op, &fx, &fz).unwrap();
    let (qx, qz) = transverse_projection(&op, &px, &pz).unwrap();
    let diff: f64 = px.iter().zip(&qx).chain(pz.iter().zip(&qz)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-9, "projector is idempotent: {diff}");
    // ∂_x D_x + ∂_z D_z at interior integer nodes, with D_z carrying the factor i
    let h = op.grid.h;
    for j in 1..n {
        let div = op.k_par * px[j] + (pz[j] - pz[j - 1]) / h;
        assert!(div.abs() < 1e-9, "node {j}: {div}");
    }
}

#[test]
fn resolution_guard_can_be_relaxed() {
    let geom = reference_interface(40.0);
    assert!(matches!(
        assemble_operator(&geom, 100, 2.0, Polarization::TE),
        Err(HopfieldError::ResolutionTooCoarse { .. })
    ));
    let relaxed = assemble_operator_with(&geom, 100, 2.0, Polarization::TE, AssembleOptions { enforce_resolution: false });
    assert!(relaxed.is_ok());
}
