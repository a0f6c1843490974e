use hopfield_core::dissipative::{
    damped_lorentz, driven_field, energy_audit, kramers_kronig_real, lossy_epsilon, BathModel, ComplexDielectric,
    CurrentSheet,
};
use hopfield_core::modes::build_theta;
use hopfield_core::{LayeredGeometry, MediumParams, ModeClass, ModeIndex};
use num_complex::Complex64;
use proptest::prelude::*;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn kramers_kronig_reconstructs_real_part() {
    let m = MediumParams::reference();
    let bath = BathModel::flat_for_damping(0.1, m.rho, 5.0);
    let diel = ComplexDielectric::new(m, bath).unwrap();
    let mut max_dev: f64 = 0.0;
    let mut max_re: f64 = 0.0;
    for i in 0..=40 {
        let w = 0.2 + 2.8 * i as f64 / 40.0;
        if (w - 5.0f64).abs() < 1e-6 {
            continue;
        }
        let re = diel.eval(w).unwrap().re - 1.0;
        let kk = kramers_kronig_real(&diel, w, 5.0).unwrap();
        max_dev = max_dev.max((kk - re).abs());
        max_re = max_re.max(re.abs());
    }
    assert!(max_dev <= 0.01 * max_re, "KK deviation {max_dev} vs scale {max_re}");
}

#[test]
fn wide_flat_bath_is_a_damped_lorentz_oscillator() {
    let m = MediumParams::reference();
    let gamma = 0.02;
    let lambda = 8.0;
    let bath = BathModel::flat_for_damping(gamma, m.rho, lambda);
    let diel = ComplexDielectric::new(m, bath).unwrap();
    let f0 = diel.self_energy(m.omega_t).unwrap().re;
    let strength = diel.renormalized_omega_l().powi(2) - m.omega_t.powi(2);
    let omega0_sq = m.omega_t.powi(2) - f0;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 1..50 {
        let w = m.omega_t + (m.omega_l() - m.omega_t) * i as f64 / 50.0;
        let exact = diel.eval(w).unwrap();
        let lorentz = damped_lorentz(strength, omega0_sq, gamma, w);
        worst = worst.max((exact - lorentz).norm());
        scale = scale.max(lorentz.norm());
    }
    assert!(worst < 0.01 * scale, "mismatch {worst} against scale {scale}");
}

#[test]
fn energy_is_conserved_with_absorption() {
    let m = MediumParams::reference();
    let geom = LayeredGeometry::interface(m, 10.0, 1.0);
    let bath = BathModel::flat_for_damping(0.05, m.rho, 6.0);
    let sheets = [
        CurrentSheet {
            z: 0.6,
            amplitude: Complex64::new(1.0, 0.3),
        },
        CurrentSheet {
            z: -0.4,
            amplitude: Complex64::new(-0.2, 0.5),
        },
    ];
    for (w, k) in [(0.5, 0.2), (1.1, 0.4), (1.5, 0.1)] {
        let f = driven_field(&geom, &bath, w, k, &sheets).unwrap();
        let source_free = energy_audit(&f, -3.0, -0.5).unwrap();
        assert!(source_free.source_work == 0.0);
        assert!(source_free.relative_residual() < 1e-6, "{source_free:?}");
        let full = energy_audit(&f, -3.0, 2.0).unwrap();
        assert!(full.relative_residual() < 1e-6, "{full:?}");
        assert!(full.absorbed > 0.0);
    }
}

#[test]
fn lossless_field_below_source_is_a_te_mode() {
    let m = MediumParams::reference();
    let (w, k) = (0.5, 0.2);
    let geom = LayeredGeometry::interface(m, 40.0, 1.0);
    let sheet = CurrentSheet { z: 1.5, amplitude: one() };
    let f = driven_field(&geom, &BathModel::None, w, k, &[sheet]).unwrap();
    let kz = (w * w - k * k).sqrt();
    let theta = build_theta(&geom, &ModeIndex::new(ModeClass::TEv, [k, 0.0], Some(kz)).unwrap()).unwrap();
    assert!((theta.omega - w).abs() < 1e-12);
    let zs = [-3.0, -1.2, -0.3, 0.2, 0.9, 1.4];
    let ratio = |z: f64| f.eval(z) / theta.eval([0.0, 0.0, z])[1].conj();
    let r0 = ratio(zs[0]);
    for &z in &zs[1..] {
        let r = ratio(z);
        assert!((r - r0).norm() < 1e-10 * r0.norm(), "z = {z}: {r} vs {r0}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dressed_medium_is_passive(
        gamma in 1e-3f64..0.3,
        cutoff in 2.0f64..12.0,
        w in 0.05f64..4.0,
        rho in 0.5f64..2.0,
    ) {
        let m = MediumParams::new(1.0, rho, 0.66 * rho.sqrt()).unwrap();
        prop_assume!((w - cutoff).abs() > 1e-3);
        let bath = BathModel::flat_for_damping(gamma, rho, cutoff);
        let e = lossy_epsilon(&m, &bath, w).unwrap();
        prop_assert!(e.im >= 0.0);
        let ohmic = BathModel::Ohmic { alpha: gamma, cutoff };
        prop_assert!(lossy_epsilon(&m, &ohmic, w).unwrap().im >= 0.0);
    }

    #[test]
    fn vanishing_bath_recovers_lossless(w in 0.05f64..3.0) {
        let m = MediumParams::reference();
        prop_assume!((w - m.omega_t).abs() > 1e-3);
        let bath = BathModel::flat_for_damping(0.1, m.rho, 5.0).scaled(0.0);
        let e = lossy_epsilon(&m, &bath, w).unwrap();
        let e0 = m.epsilon(w).unwrap();
        prop_assert!((e.re - e0).abs() <= 1e-12 * e0.abs().max(1.0));
        prop_assert_eq!(e.im, 0.0);
    }
}
