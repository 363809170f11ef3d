//! Consistency checks behind `halbach verify`. Each check reports a
//! measured value against its tolerance; physics failures never panic.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{HarmonicTruncation, MotorDesign, OperatingPoint};
use crate::error::Result;
use crate::fd::{mid_gap_comparison, solve_design_fd, GridSpec};
use crate::field::{
    closed_form_coefficients, evaluate_in_region, relative_difference, solve_model, FieldCoefficients, FieldModel,
    Region, SignFlip, Topology,
};
use crate::machine::{back_emf, peak_force, period_grid, power_balance};
use crate::source::{fourier_coefficients, HarmonicSource};
use crate::MU0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub trunc: HarmonicTruncation,
    /// Model whose solve is checked for boundary residuals.
    pub model: FieldModel,
    pub skip_fd: bool,
    pub fd_grid: GridSpec,
    /// Corrupts one matrix entry of `model` before solving.
    pub flip: Option<SignFlip>,
    /// Random points for the tri-model field comparison.
    pub points: usize,
    /// x samples per interface for the boundary check.
    pub boundary_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trunc: HarmonicTruncation::default(),
            model: FieldModel::Laplace,
            skip_fd: false,
            fd_grid: GridSpec::new(1024, 512),
            flip: None,
            points: 200,
            boundary_samples: 256,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Measured error; NaN when the check could not run.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    /// tolerance / value; above 1 means passing with room to spare.
    pub fn margin(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.tolerance / self.value
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "{status} {:<20} value={:.3e} tol={:.1e} margin={:.2e} ({:.2}s) {}",
            self.name,
            self.value,
            self.tolerance,
            self.margin(),
            self.seconds,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn run(name: &'static str, tolerance: f64, body: impl FnOnce() -> Result<(f64, String)>) -> CheckResult {
    let start = Instant::now();
    let (value, detail) = match body() {
        Ok(v) => v,
        Err(e) => (f64::NAN, format!("error: {e}")),
    };
    CheckResult { name, passed: value <= tolerance, value, tolerance, detail, seconds: start.elapsed().as_secs_f64() }
}

fn solve(design: &MotorDesign, source: &HarmonicSource, opts: &VerifyOptions, model: FieldModel) -> Result<FieldCoefficients> {
    let flip = if model == opts.model { opts.flip } else { None };
    solve_model(design, source, opts.trunc, model, flip)
}

/// Closed-form coefficients against the dense Laplace solve.
fn closed_form_check(design: &MotorDesign, source: &HarmonicSource, opts: &VerifyOptions) -> Result<(f64, String)> {
    let dense = solve(design, source, opts, FieldModel::Laplace)?;
    let closed = closed_form_coefficients(design, source, opts.trunc);
    let mut worst: f64 = 0.0;
    let mut at = 0;
    for ((p, q), t) in dense.harmonics.iter().zip(&closed.harmonics).zip(&dense.source.terms) {
        let a = p.n as f64 * design.wave_number();
        let floor = 1e-6 * (t.sigma_n.abs() / (MU0 * a) + t.k_n.abs() / a);
        for j in 0..design_unknowns(design) {
            let r = relative_difference(p.scaled[j], q.scaled[j], floor);
            if r > worst {
                worst = r;
                at = p.n;
            }
        }
    }
    Ok((worst, format!("worst harmonic n={at}")))
}

fn design_unknowns(design: &MotorDesign) -> usize {
    Topology::of(design).unknowns()
}

/// Coefficient maps between the three models.
fn coefficient_map_check(design: &MotorDesign, source: &HarmonicSource, opts: &VerifyOptions) -> Result<(f64, String)> {
    let m1 = solve(design, source, opts, FieldModel::Laplace)?;
    let m2 = solve(design, source, opts, FieldModel::PoissonScalar)?;
    let m3 = solve(design, source, opts, FieldModel::PoissonVector)?;
    let map = [-MU0, MU0, -MU0, MU0, MU0];
    let mut worst: f64 = 0.0;
    for ((h1, h2), h3) in m1.harmonics.iter().zip(&m2.harmonics).zip(&m3.harmonics) {
        let floor = h1.scaled.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..5 {
            worst = worst.max(relative_difference(h1.scaled[j], h2.scaled[j], floor));
            worst = worst.max(relative_difference(map[j] * h1.scaled[j], h3.scaled[j], MU0 * floor));
        }
    }
    Ok((worst, "Model 2 = Model 1, Model 3 = mu0-scaled map".into()))
}

fn domain_top(design: &MotorDesign) -> f64 {
    match Topology::of(design) {
        Topology::BackIron => design.array_top(),
        Topology::NoBackIron => design.array_top() + 0.5 * design.lambda,
    }
}

/// B and H of the three models at random points.
fn tri_model_check(design: &MotorDesign, source: &HarmonicSource, opts: &VerifyOptions) -> Result<(f64, String)> {
    let models = [
        solve(design, source, opts, FieldModel::Laplace)?,
        solve(design, source, opts, FieldModel::PoissonScalar)?,
        solve(design, source, opts, FieldModel::PoissonVector)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let top = domain_top(design);
    let pts: Vec<(f64, f64)> =
        (0..opts.points).map(|_| (rng.gen_range(0.0..design.lambda), rng.gen_range(0.0..top))).collect();
    let samples: Vec<Vec<[f64; 4]>> = models
        .iter()
        .map(|c| {
            pts.iter()
                .map(|&(x, y)| {
                    let region = c.region_of(y)?;
                    let s = evaluate_in_region(c, region, x, y);
                    Ok([s.bx, s.by, MU0 * s.hx, MU0 * s.hy])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    // floor guards points where a component crosses zero
    let scale = samples[0].iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-6 * scale;
    let mut worst: f64 = 0.0;
    for other in &samples[1..] {
        for (p, q) in samples[0].iter().zip(other) {
            for k in 0..4 {
                worst = worst.max(relative_difference(p[k], q[k], floor));
            }
        }
    }
    Ok((worst, format!("{} points, floor {:.0e} of peak", opts.points, 1e-6)))
}

/// Interface conditions evaluated from both sides on a uniform x grid,
/// each normalized by the largest field magnitude on that interface.
pub fn boundary_residual(design: &MotorDesign, coeffs: &FieldCoefficients, samples: usize) -> (f64, String) {
    let st = &coeffs.stack;
    let xs: Vec<f64> = (0..samples).map(|i| design.lambda * (i as f64 + 0.5) / samples as f64).collect();
    let mut worst: f64 = 0.0;
    let mut label = "";
    let mut record = |name: &'static str, jumps: Vec<f64>, scale: f64| {
        let peak = jumps.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let r = if scale == 0.0 { peak } else { peak / scale };
        if r > worst {
            worst = r;
            label = name;
        }
    };
    let peak_of = |vals: &[[f64; 4]]| vals.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let side = |region: Region, y: f64| -> Vec<[f64; 4]> {
        xs.iter()
            .map(|&x| {
                let s = evaluate_in_region(coeffs, region, x, y);
                [s.bx, s.by, MU0 * s.hx, MU0 * s.hy]
            })
            .collect()
    };

    let stator = side(Region::I, 0.0);
    record("stator Hx", stator.iter().map(|v| v[2]).collect(), peak_of(&stator));

    let below = side(Region::I, st.effective_gap);
    let above = side(Region::II, st.effective_gap);
    let scale = peak_of(&below).max(peak_of(&above));
    record("lower By", below.iter().zip(&above).map(|(p, q)| p[1] - q[1]).collect(), scale);
    record("lower Hx", below.iter().zip(&above).map(|(p, q)| p[2] - q[2]).collect(), scale);

    let inner = side(Region::II, st.array_top);
    match coeffs.topology {
        Topology::NoBackIron => {
            let outer = side(Region::III, st.array_top);
            let scale = peak_of(&inner).max(peak_of(&outer));
            record("upper By", inner.iter().zip(&outer).map(|(p, q)| p[1] - q[1]).collect(), scale);
            record("upper Hx", inner.iter().zip(&outer).map(|(p, q)| p[2] - q[2]).collect(), scale);
        }
        Topology::BackIron => {
            record("back-iron Hx", inner.iter().map(|v| v[2]).collect(), peak_of(&inner));
        }
    }
    (worst, format!("worst condition: {label}"))
}

fn fd_check(design: &MotorDesign, source: &HarmonicSource, opts: &VerifyOptions) -> Result<(f64, String)> {
    let coeffs = solve(design, source, opts, FieldModel::Laplace)?;
    let grid = solve_design_fd(design, opts.fd_grid)?;
    let cmp = mid_gap_comparison(&grid, design, &coeffs)?;
    Ok((cmp.max_relative_error, format!("mid-gap By on {}x{}", opts.fd_grid.nx, opts.fd_grid.ny)))
}

fn power_check(design: &MotorDesign, source: &HarmonicSource, opts: &VerifyOptions) -> Result<(f64, String)> {
    let coeffs = solve(design, source, opts, FieldModel::Laplace)?;
    let x0 = peak_force(design, &coeffs)?.x0;
    let pb = power_balance(design, &coeffs, OperatingPoint::at(0.0, x0), &period_grid(design, 720))?;
    Ok((pb.max_relative_deviation, "720 samples at peak-force offset".into()))
}

/// Closed-form EMF against a central difference of the flux linkage,
/// relative to the EMF peak of each phase.
fn emf_check(design: &MotorDesign, source: &HarmonicSource, opts: &VerifyOptions) -> Result<(f64, String)> {
    let coeffs = solve(design, source, opts, FieldModel::Laplace)?;
    let ts = period_grid(design, 720);
    let op = OperatingPoint::at(0.0, 0.0);
    let dt = 1e-7;
    let e = back_emf(design, &coeffs, op, &ts);
    let ep = back_emf(design, &coeffs, op, &ts.iter().map(|t| t + dt).collect::<Vec<_>>());
    let em = back_emf(design, &coeffs, op, &ts.iter().map(|t| t - dt).collect::<Vec<_>>());
    let mut worst: f64 = 0.0;
    for m in 0..design.phases {
        let peak = e.emf[m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..ts.len() {
            let num = (ep.linkage[m][i] - em.linkage[m][i]) / (2.0 * dt);
            let err = (num - e.emf[m][i]).abs();
            worst = worst.max(if peak == 0.0 { err } else { err / peak });
        }
    }
    Ok((worst, format!("dt = {dt:.0e} s")))
}

/// Runs every check on `design`.
pub fn run_checks(design: &MotorDesign, opts: &VerifyOptions) -> VerifyReport {
    let source = fourier_coefficients(design, opts.trunc);
    let mut checks = vec![
        run("closed-form", 1e-10, || closed_form_check(design, &source, opts)),
        run("coefficient-maps", 1e-12, || coefficient_map_check(design, &source, opts)),
        run("tri-model", 1e-10, || tri_model_check(design, &source, opts)),
        run("boundary-residual", 1e-2, || {
            let c = solve(design, &source, opts, opts.model)?;
            Ok(boundary_residual(design, &c, opts.boundary_samples))
        }),
        run("power-balance", 1e-9, || power_check(design, &source, opts)),
        run("emf-derivative", 1e-4, || emf_check(design, &source, opts)),
    ];
    if !opts.skip_fd {
        checks.push(run("fd-oracle", 3e-2, || fd_check(design, &source, opts)));
    }
    VerifyReport { checks }
}
