//! Task implementations: each writes CSV artifacts plus a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hopfield_core::dispersion::bulk_branches;
use hopfield_core::dissipative::{driven_field, energy_audit, BathModel, ComplexDielectric, CurrentSheet};
use hopfield_core::modes::{bosonic_norm, PolaritonMode};
use hopfield_core::nonlinear::{scattering_coefficient, NonlinearTensor, ZIntegration};
use hopfield_core::realspace::{
    assemble_operator, eigen_residual, hopfield_coefficients, krein_inner, solve_spectrum, Polarization, SolverChoice,
};
use hopfield_core::table::{Cell, Table};
use hopfield_core::verify::{dispersion_table, report_table, run_criterion, VerifyOptions};
use hopfield_core::{HopfieldError, LayeredGeometry, MediumParams, ModeClass, ModeIndex};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{ConfigError, IntegrationConfig, ModeSpec, PolarizationConfig, RunConfig, SolverConfig};
use crate::units::Units;

/// A run that completed but whose self-checks did not pass (exit code 1).
#[derive(Debug)]
pub struct VerificationFailed(pub Vec<u8>);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed for criteria {:?}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

pub struct TaskContext {
    pub cfg: RunConfig,
    pub units: Units,
    pub medium: MediumParams,
    pub out: PathBuf,
    pub tol: Option<f64>,
}

impl TaskContext {
    pub fn new(cfg: RunConfig, units: Units, out: PathBuf, tol: Option<f64>) -> Result<Self> {
        let medium = units
            .medium(&cfg)
            .map_err(|e| ConfigError::new("/medium", e.to_string()))?;
        let tol = tol.or(cfg.tol);
        Ok(Self {
            cfg,
            units,
            medium,
            out,
            tol,
        })
    }

    fn geometry(&self) -> LayeredGeometry {
        let lz = self.cfg.geometry.lz.map_or(40.0 / self.medium.omega_t, |v| self.units.length_in(v));
        LayeredGeometry::interface(self.medium, lz, self.cfg.geometry.area)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn write_table(&self, name: &str, t: &Table) -> Result<PathBuf> {
        self.write(name, &t.to_csv())
    }

    fn sidecar(&self, task: &str, results: Value) -> Result<PathBuf> {
        let m = &self.medium;
        let doc = json!({
            "task": task,
            "units": self.units.label(),
            "reference_wavenumber": self.units.nu_ref,
            "tol": self.tol,
            "medium_internal": { "omega_t": m.omega_t, "omega_l": m.omega_l(), "rho": m.rho, "kappa": m.kappa },
            "results": results,
        });
        self.write(&format!("{task}.json"), &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    fn mode_index(&self, spec: &ModeSpec, pointer: &str) -> Result<ModeIndex> {
        let u = &self.units;
        let k = [u.freq_in(spec.k_par[0]), u.freq_in(spec.k_par[1])];
        let idx = match spec.class {
            ModeClass::S => Ok(ModeIndex::surface(k)),
            c => ModeIndex::new(c, k, spec.k_z.map(|v| u.freq_in(v))),
        };
        Ok(idx.map_err(|e| ConfigError::new(pointer, e.to_string()))?)
    }
}

fn numeric(e: HopfieldError, task: &str) -> anyhow::Error {
    anyhow::Error::new(e).context(format!("{task} failed"))
}

/// Runs `n` independent evaluations on scoped threads, preserving order.
fn par_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, f: F) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n.max(1));
    let chunk = n.div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                s.spawn(move || (w * chunk..((w + 1) * chunk).min(n)).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

pub fn dispersion(ctx: &TaskContext) -> Result<Vec<PathBuf>> {
    let u = &ctx.units;
    let m = &ctx.medium;
    let d = &ctx.cfg.dispersion;
    let k_min = d.k_min.map_or(0.01, |k| u.freq_in(k) / m.omega_t);
    let k_max = d.k_max.map_or(100.0, |k| u.freq_in(k) / m.omega_t);
    let t = dispersion_table(m, k_min, k_max, d.points).map_err(|e| numeric(e, "dispersion"))?;
    let tol = ctx.tol.unwrap_or(1e-12);
    let mut vieta = 0.0f64;
    let mut out = Table::new(t.headers().to_vec());
    for row in t.rows() {
        let k = row[0].as_f64().unwrap_or(0.0);
        let (l, up) = bulk_branches(m, k).map_err(|e| numeric(e, "dispersion"))?;
        let sum = m.omega_l().powi(2) + k * k;
        vieta = vieta.max(((l * l + up * up) - sum).abs() / sum);
        out.push(row.iter().map(|c| c.as_f64().map_or(Cell::Empty, |v| u.freq_out(v).into())).collect());
    }
    if vieta > tol {
        anyhow::bail!(numeric(
            HopfieldError::InvalidInput(format!("Vieta residual {vieta:e} exceeds tolerance {tol:e}")),
            "dispersion"
        ));
    }
    let csv = ctx.write_table("dispersion.csv", &out)?;
    let side = ctx.sidecar("dispersion", json!({ "rows": out.len(), "max_vieta_residual": vieta }))?;
    Ok(vec![csv, side])
}

pub fn mode(ctx: &TaskContext) -> Result<Vec<PathBuf>> {
    let u = &ctx.units;
    let mc = &ctx.cfg.mode;
    let geom = ctx.geometry();
    let k_par = mc.k_par.unwrap_or([u.freq_out(2.0 * ctx.medium.omega_t), 0.0]);
    let spec = ModeSpec {
        class: mc.class,
        k_par,
        k_z: mc.k_z,
    };
    let idx = ctx.mode_index(&spec, "/mode")?;
    let mode = PolaritonMode::build(&geom, &idx).map_err(|e| numeric(e, "mode"))?;
    let norm_check = bosonic_norm(&mode.theta, &geom).map_err(|e| numeric(e, "mode"))?;
    let tol = ctx.tol.unwrap_or(1e-8);
    if (norm_check - 1.0).abs() > tol {
        anyhow::bail!(numeric(
            HopfieldError::InvalidInput(format!("bosonic norm {norm_check} deviates from 1 beyond {tol:e}")),
            "mode"
        ));
    }
    let default_half = 5.0 / ctx.medium.omega_t;
    let z_min = mc.z_min.map_or(-default_half, |z| u.length_in(z));
    let z_max = mc.z_max.map_or(default_half, |z| u.length_in(z));
    let mut headers = vec!["z".to_string()];
    for f in ["theta", "alpha", "beta", "gamma", "eta"] {
        for a in ["x", "y", "z"] {
            headers.push(format!("Re_{f}_{a}"));
            headers.push(format!("Im_{f}_{a}"));
        }
    }
    let mut t = Table::new(headers);
    let h = &mode.hopfield;
    for i in 0..mc.points {
        let z = if mc.points == 1 {
            z_min
        } else {
            z_min + (z_max - z_min) * i as f64 / (mc.points - 1) as f64
        };
        let r = [0.0, 0.0, z];
        let mut row: Vec<Cell> = vec![u.length_out(z).into()];
        let theta = mode.theta.eval(r);
        let fields = [theta, h.alpha.eval(r), h.beta.eval(r), h.gamma.eval(r), h.eta.eval(r)];
        for v in fields {
            for c in v.iter() {
                row.push(c.re.into());
                row.push(c.im.into());
            }
        }
        t.push(row);
    }
    let csv = ctx.write_table("mode.csv", &t)?;
    let side = ctx.sidecar(
        "mode",
        json!({
            "class": idx.class.as_str(),
            "k_par": k_par,
            "k_z": mc.k_z,
            "omega": u.freq_out(mode.omega),
            "N": mode.norm,
            "bosonic_norm": norm_check,
            "amplitudes": "internal units at x = y = 0",
        }),
    )?;
    Ok(vec![csv, side])
}

pub fn solve(ctx: &TaskContext) -> Result<Vec<PathBuf>> {
    let u = &ctx.units;
    let m = &ctx.medium;
    let sc = &ctx.cfg.solve;
    let geom = ctx.geometry();
    let k = sc.k_par.map_or(2.0 * m.omega_t, |k| u.freq_in(k));
    let pol = match sc.polarization {
        PolarizationConfig::TE => Polarization::TE,
        PolarizationConfig::TM => Polarization::TM,
    };
    let window = sc.window.map_or(
        (m.omega_t * (1.0 + 1e-6), m.omega_t + 0.95 * (m.omega_l() - m.omega_t)),
        |[a, b]| (u.freq_in(a), u.freq_in(b)),
    );
    let choice = match sc.solver {
        SolverConfig::Auto => SolverChoice::Auto,
        SolverConfig::Dense => SolverChoice::Dense,
        SolverConfig::Banded => SolverChoice::Banded,
    };
    let op = assemble_operator(&geom, sc.cells, k, pol).map_err(|e| numeric(e, "solve"))?;
    let sol = solve_spectrum(&op, window, choice).map_err(|e| numeric(e, "solve"))?;
    let tol = ctx.tol.unwrap_or(1e-8);
    let mut t = Table::new(["index", "omega", "krein_norm", "residual"]);
    let mut worst = 0.0f64;
    for n in 0..sol.len() {
        let res = eigen_residual(&op, &sol, n);
        worst = worst.max(res);
        t.push(vec![
            n.into(),
            u.freq_out(sol.eigenfrequencies[n]).into(),
            krein_inner(&op, &sol, n, n).re.into(),
            res.into(),
        ]);
    }
    if worst > tol {
        anyhow::bail!(numeric(
            HopfieldError::InvalidInput(format!("eigen residual {worst:e} exceeds tolerance {tol:e}")),
            "solve"
        ));
    }
    let mut files = vec![ctx.write_table("solve_spectrum.csv", &t)?];
    if let Some(n) = sc.export_mode.filter(|&n| n < sol.len()) {
        let mut s = Table::new(["field", "axis", "z", "re", "im"]);
        for g in hopfield_coefficients(&op, &sol, n) {
            s.push(vec![
                g.field.as_str().into(),
                format!("{:?}", g.axis).to_lowercase().into(),
                u.length_out(g.z).into(),
                g.value.re.into(),
                g.value.im.into(),
            ]);
        }
        files.push(ctx.write_table("solve_mode.csv", &s)?);
    }
    files.push(ctx.sidecar(
        "solve",
        json!({
            "polarization": pol.to_string(),
            "cells": sc.cells,
            "k_par": u.freq_out(k),
            "window": [u.freq_out(window.0), u.freq_out(window.1)],
            "eigenpairs": sol.len(),
            "complete": sol.complete,
            "max_residual": worst,
            "exported_mode": sc.export_mode.filter(|&n| n < sol.len()),
        }),
    )?);
    Ok(files)
}

pub fn scatter(ctx: &TaskContext) -> Result<Vec<PathBuf>> {
    let u = &ctx.units;
    let sc = &ctx.cfg.scatter;
    let geom = ctx.geometry();
    let wt = u.freq_out(ctx.medium.omega_t);
    let specs = sc.modes.clone().unwrap_or_else(|| {
        vec![
            ModeSpec { class: ModeClass::S, k_par: [2.0 * wt, 0.0], k_z: None },
            ModeSpec { class: ModeClass::S, k_par: [-2.0 * wt, 0.0], k_z: None },
            ModeSpec { class: ModeClass::TMv, k_par: [0.0, 0.0], k_z: Some(0.5 * wt) },
        ]
    });
    let mut modes = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let idx = ctx.mode_index(spec, &format!("/scatter/modes/{i}"))?;
        modes.push(PolaritonMode::build(&geom, &idx).map_err(|e| numeric(e, "scatter"))?);
    }
    let phi = match &sc.tensor {
        None => NonlinearTensor::diagonal(modes.len()).map_err(|e| ConfigError::new("/scatter/tensor", e.to_string()))?,
        Some(v) => {
            let (phi, _) = NonlinearTensor::from_json(v).map_err(|e| ConfigError::new("/scatter/tensor", e.to_string()))?;
            if phi.order() != modes.len() {
                return Err(ConfigError::new(
                    "/scatter/tensor/order",
                    format!("order {} does not match {} modes", phi.order(), modes.len()),
                )
                .into());
            }
            phi
        }
    };
    let method = match sc.integration {
        IntegrationConfig::Analytic => ZIntegration::Analytic,
        IntegrationConfig::Adaptive => ZIntegration::Adaptive,
    };
    let refs: Vec<&PolaritonMode> = modes.iter().collect();
    let xi = scattering_coefficient(&refs, &phi, &geom, method).map_err(|e| numeric(e, "scatter"))?;
    let mut t = Table::new(["re", "im", "abs", "momentum_ok"]);
    t.push(vec![xi.value.re.into(), xi.value.im.into(), xi.value.norm().into(), xi.momentum_ok.into()]);
    let csv = ctx.write_table("scatter.csv", &t)?;
    let side = ctx.sidecar(
        "scatter",
        json!({
            "modes": specs,
            "omegas": modes.iter().map(|m| u.freq_out(m.omega)).collect::<Vec<_>>(),
            "tensor": phi.to_json(),
            "momentum_ok": xi.momentum_ok,
            "value": [xi.value.re, xi.value.im],
        }),
    )?;
    Ok(vec![csv, side])
}

fn bath_in(u: &Units, b: &BathModel) -> BathModel {
    match *b {
        BathModel::None => BathModel::None,
        BathModel::Flat { amplitude, zeta_min, zeta_max } => BathModel::Flat {
            amplitude: u.coupling_in(amplitude),
            zeta_min: u.freq_in(zeta_min),
            zeta_max: u.freq_in(zeta_max),
        },
        BathModel::Ohmic { alpha, cutoff } => BathModel::Ohmic { alpha, cutoff: u.freq_in(cutoff) },
    }
}

pub fn lossy(ctx: &TaskContext) -> Result<Vec<PathBuf>> {
    let u = &ctx.units;
    let m = ctx.medium;
    let lc = &ctx.cfg.lossy;
    let bath = lc.bath.as_ref().map_or_else(
        || BathModel::flat_for_damping(0.1 * m.omega_t, m.rho, 5.0 * m.omega_t),
        |b| bath_in(u, b),
    );
    let diel = ComplexDielectric::new(m, bath.clone()).map_err(|e| numeric(e, "lossy"))?;
    let lo = lc.omega_min.map_or(0.2 * m.omega_t, |w| u.freq_in(w));
    let hi = lc.omega_max.map_or(3.0 * m.omega_t, |w| u.freq_in(w));
    let n = lc.points;
    let rows = par_map(n, |i| -> hopfield_core::Result<Vec<Cell>> {
        let w = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let e = diel.eval(w)?;
        let f = diel.self_energy(w)?;
        Ok(vec![
            u.freq_out(w).into(),
            e.re.into(),
            e.im.into(),
            m.epsilon(w).ok().into(),
            (f.re * u.nu_ref * u.nu_ref).into(),
            (f.im * u.nu_ref * u.nu_ref).into(),
        ])
    });
    let mut t = Table::new(["omega", "Re_eps", "Im_eps", "eps_lossless", "Re_self_energy", "Im_self_energy"]);
    let mut passive = true;
    let tol = ctx.tol.unwrap_or(0.0);
    for row in rows {
        let row = row.map_err(|e| numeric(e, "lossy"))?;
        passive &= row[2].as_f64().map_or(true, |im| im >= -tol);
        t.push(row);
    }
    if !passive {
        anyhow::bail!(numeric(HopfieldError::InvalidInput("Im ε̃ < 0 in the sweep".into()), "lossy"));
    }
    let mut files = vec![ctx.write_table("lossy.csv", &t)?];
    let mut results = json!({
        "bath_internal": bath,
        "renormalized_omega_l": u.freq_out(diel.renormalized_omega_l()),
        "points": n,
    });
    if let Some(dr) = &lc.driven {
        let sheets: Vec<CurrentSheet> = dr
            .sheets
            .iter()
            .map(|s| CurrentSheet { z: u.length_in(s.z), amplitude: Complex64::new(s.amplitude[0], s.amplitude[1]) })
            .collect();
        let field = driven_field(&ctx.geometry(), &bath, u.freq_in(dr.omega), u.freq_in(dr.k_par), &sheets)
            .map_err(|e| numeric(e, "lossy driven field"))?;
        let (z0, z1) = (u.length_in(dr.z_min), u.length_in(dr.z_max));
        let mut d = Table::new(["z", "u_re", "u_im", "u_abs"]);
        for i in 0..dr.points {
            let z = z0 + (z1 - z0) * i as f64 / (dr.points - 1) as f64;
            let v = field.eval(z);
            d.push(vec![u.length_out(z).into(), v.re.into(), v.im.into(), v.norm().into()]);
        }
        files.push(ctx.write_table("lossy_driven.csv", &d)?);
        let audit = energy_audit(&field, z0, z1).map_err(|e| numeric(e, "lossy energy audit"))?;
        results["energy_audit"] = json!({
            "flux_imbalance": audit.flux_imbalance,
            "absorbed": audit.absorbed,
            "source_work": audit.source_work,
            "relative_residual": audit.relative_residual(),
        });
    }
    files.push(ctx.sidecar("lossy", results)?);
    Ok(files)
}

pub fn verify(ctx: &TaskContext) -> Result<Vec<PathBuf>> {
    let m = &ctx.medium;
    // the checks are scale-free, so run them with ω_T = 1
    let medium = MediumParams::from_phonons(1.0, m.omega_l() / m.omega_t, m.rho).map_err(|e| numeric(e, "verify"))?;
    let mut opts = VerifyOptions {
        tol_scale: ctx.tol.unwrap_or(1.0),
        medium,
        ..VerifyOptions::default()
    };
    if let Some(seed) = ctx.cfg.verify.seed {
        opts.seed = seed;
    }
    let mut reports = Vec::new();
    for &id in &ctx.cfg.verify.criteria {
        let r = run_criterion(id, &opts);
        println!("{r}");
        for c in &r.checks {
            println!(
                "    {} {:<58} {:>12.3e} < {:.1e}",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.measured,
                c.limit
            );
        }
        reports.push(r);
    }
    let mut files = vec![ctx.write_table("verify.csv", &report_table(&reports))?];
    if let Some(t) = reports.iter().find_map(|r| r.artifact.as_ref()) {
        files.push(ctx.write_table("verify_dispersion.csv", t)?);
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    files.push(ctx.sidecar(
        "verify",
        json!({
            "criteria": reports.iter().map(|r| json!({"id": r.id, "title": r.title, "passed": r.passed()})).collect::<Vec<_>>(),
        }),
    )?);
    if !failed.is_empty() {
        return Err(VerificationFailed(failed).into());
    }
    Ok(files)
}

pub fn relative(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).display().to_string()
}
