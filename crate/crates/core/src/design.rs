//! Stage-level metrics, objective functions, parameter sweeps, a grid
//! optimizer and the uniform-field sizing shortcuts.
//!
//! A stage carries N_u = L_stage/λ motor units. The thrust F_t fed to the
//! acceleration is the peak of the force-angle characteristic of one unit
//! evaluated with the stage's in-depth length.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{HarmonicTruncation, MotorDesign};
use crate::error::{Error, Result};
use crate::machine::{emf_thd, peak_force, ripple_at_peak, solve_design};

/// Upper limit on the number of points in one sweep.
pub const MAX_SWEEP_POINTS: usize = 100_000;

/// Time samples used for the ripple term of the extended objective.
const RIPPLE_SAMPLES: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MovingMember {
    Magnets,
    Stator,
}

impl MovingMember {
    pub fn name(self) -> &'static str {
        match self {
            MovingMember::Magnets => "moving-pm",
            MovingMember::Stator => "moving-stator",
        }
    }
}

impl fmt::Display for MovingMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MovingMember {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "moving-pm" | "pm" => Ok(MovingMember::Magnets),
            "moving-stator" | "stator" => Ok(MovingMember::Stator),
            other => Err(format!("unknown moving member `{other}` (expected moving-pm or moving-stator)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageSpec {
    /// Stage length, m.
    pub length: f64,
    /// Stage mass without the moving motor parts, kg.
    pub mass: f64,
    /// In-depth length used for masses, losses and thrust, m.
    pub depth: f64,
    pub moving: MovingMember,
    /// Stator unit count; `None` means N_u + 1.
    pub stator_units: Option<f64>,
}

impl Default for StageSpec {
    fn default() -> Self {
        Self { length: 0.6, mass: 100.0, depth: 0.3, moving: MovingMember::Magnets, stator_units: None }
    }
}

impl StageSpec {
    fn check(&self, design: &MotorDesign) -> Result<()> {
        for (name, value) in [("stage_length_m", self.length), ("stage_mass_kg", self.mass), ("stage_depth_m", self.depth)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        let units = self.units(design);
        if units < 1.0 {
            return Err(Error::InvalidParameter { name: "stage_units", value: units });
        }
        if let Some(n) = self.stator_units {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidParameter { name: "stator_units", value: n });
            }
        }
        Ok(())
    }

    /// N_u = L_stage/λ. Kept real-valued so sweeps over λ stay continuous.
    pub fn units(&self, design: &MotorDesign) -> f64 {
        self.length / design.lambda
    }

    pub fn stator_units(&self, design: &MotorDesign) -> f64 {
        self.stator_units.unwrap_or_else(|| self.units(design) + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageMetrics {
    pub units: f64,
    pub stator_units: f64,
    /// Thrust of one unit at the stage depth, N.
    pub thrust: f64,
    /// m_pm or m_cu depending on the moving member, kg.
    pub moving_mass: f64,
    /// m/s².
    pub acceleration: f64,
    /// Copper loss of the stator, W.
    pub copper_loss: f64,
}

/// Masses, acceleration and copper loss of a stage built from `design`.
pub fn stage_metrics(design: &MotorDesign, stage: &StageSpec, thrust_mean: f64) -> Result<StageMetrics> {
    stage.check(design)?;
    let units = stage.units(design);
    let stator_units = stage.stator_units(design);
    let slab = 4.0 * units * design.lambda * stage.depth;
    let moving_mass = match stage.moving {
        MovingMember::Magnets => slab * design.rho_pm * design.pm_height,
        MovingMember::Stator => slab * design.rho_cu * design.coil_height,
    };
    let acceleration = 2.0 * units * thrust_mean / (stage.mass + moving_mass);
    let copper_loss =
        4.0 * stator_units * design.lambda * stage.depth * design.coil_height * design.j_max.powi(2) / design.sigma_cu;
    Ok(StageMetrics { units, stator_units, thrust: thrust_mean, moving_mass, acceleration, copper_loss })
}

/// Exponents of the extra factors in the extended objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedWeights {
    /// Exponent on the back-EMF THD.
    pub thd: f64,
    /// Exponent on the force ripple (in percent).
    pub ripple: f64,
    /// Drive cost, user-supplied scalar.
    pub cost_drive: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveConfig {
    pub alpha: f64,
    pub beta: f64,
    pub extended: Option<ExtendedWeights>,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 0.2, extended: None }
    }
}

impl ObjectiveConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let obj = Self { alpha, beta, extended: None };
        obj.check()?;
        Ok(obj)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter { name: "alpha", value: self.alpha });
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParameter { name: "beta", value: self.beta });
        }
        if let Some(w) = self.extended {
            for (name, value) in [("thd_exponent", w.thd), ("ripple_exponent", w.ripple)] {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::InvalidParameter { name, value });
                }
            }
            if !(w.cost_drive.is_finite() && w.cost_drive > 0.0) {
                return Err(Error::InvalidParameter { name: "cost_drive", value: w.cost_drive });
            }
        }
        Ok(())
    }
}

/// Quality terms that only the extended objective needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityTerms {
    pub emf_thd: f64,
    pub ripple_pct: f64,
}

/// a^α / P^β, further divided by THD^γ · ripple^δ · cost when the
/// extended weights are set.
pub fn objective(obj: &ObjectiveConfig, metrics: &StageMetrics, quality: Option<&QualityTerms>) -> Result<f64> {
    obj.check()?;
    if metrics.copper_loss <= 0.0 {
        return Err(Error::ZeroLoss);
    }
    let mut score = metrics.acceleration.max(0.0).powf(obj.alpha) / metrics.copper_loss.powf(obj.beta);
    if let Some(w) = obj.extended {
        let q = quality.ok_or(Error::DegenerateObjective("quality terms"))?;
        if w.thd > 0.0 {
            if q.emf_thd <= 0.0 {
                return Err(Error::DegenerateObjective("emf_thd"));
            }
            score /= q.emf_thd.powf(w.thd);
        }
        if w.ripple > 0.0 {
            if q.ripple_pct <= 0.0 {
                return Err(Error::DegenerateObjective("ripple_pct"));
            }
            score /= q.ripple_pct.powf(w.ripple);
        }
        score /= w.cost_drive;
    }
    Ok(score)
}

/// One evaluated design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignPoint {
    pub lambda: f64,
    pub pm_height: f64,
    pub coil_height: f64,
    /// F_t/(λ L), N/m².
    pub shear: f64,
    pub metrics: StageMetrics,
    pub quality: Option<QualityTerms>,
    pub score: f64,
}

/// Full analytic evaluation of one (λ, h_m, h_c) point.
pub fn evaluate_point(
    template: &MotorDesign,
    stage: &StageSpec,
    obj: &ObjectiveConfig,
    trunc: HarmonicTruncation,
    lambda: f64,
    pm_height: f64,
    coil_height: f64,
) -> Result<DesignPoint> {
    let design = template.with(|p| {
        p.lambda = lambda;
        p.pm_height = pm_height;
        p.coil_height = coil_height;
        p.depth = stage.depth;
    })?;
    // the time-averaged thrust only sees the fundamental
    let trunc = if obj.extended.is_some() { trunc } else { HarmonicTruncation::new(1)? };
    let coeffs = solve_design(&design, trunc)?;
    let thrust = peak_force(&design, &coeffs)?.force;
    let metrics = stage_metrics(&design, stage, thrust)?;
    let quality = match obj.extended {
        Some(_) => Some(QualityTerms {
            emf_thd: emf_thd(&design, &coeffs),
            ripple_pct: ripple_at_peak(&design, &coeffs, RIPPLE_SAMPLES)?,
        }),
        None => None,
    };
    let score = objective(obj, &metrics, quality.as_ref())?;
    Ok(DesignPoint {
        lambda,
        pm_height,
        coil_height,
        shear: thrust / (lambda * stage.depth),
        metrics,
        quality,
        score,
    })
}

/// Uniformly spaced values on [lo, hi]; `count = 1` gives `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, hi, count }
    }

    pub fn fixed(value: f64) -> Self {
        Self { lo: value, hi: value, count: 1 }
    }

    fn check(&self, name: &'static str) -> Result<()> {
        let ordered = self.lo.is_finite() && self.hi.is_finite() && self.lo > 0.0 && self.lo <= self.hi;
        if !ordered || self.count == 0 || (self.count == 1 && self.lo != self.hi) {
            return Err(Error::EmptyBounds(name));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepAxes {
    pub lambda: Axis,
    pub pm_height: Axis,
    pub coil_height: Axis,
}

impl SweepAxes {
    fn check(&self) -> Result<usize> {
        self.lambda.check("lambda")?;
        self.pm_height.check("pm_height")?;
        self.coil_height.check("coil_height")?;
        let total = self.lambda.count.saturating_mul(self.pm_height.count).saturating_mul(self.coil_height.count);
        if total > MAX_SWEEP_POINTS {
            return Err(Error::InvalidGrid(format!("{total} sweep points exceed the limit of {MAX_SWEEP_POINTS}")));
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    /// λ outermost, h_c innermost.
    pub points: Vec<DesignPoint>,
    /// Index of the highest score (first on ties).
    pub best: usize,
}

impl Sweep {
    pub fn best_point(&self) -> &DesignPoint {
        &self.points[self.best]
    }
}

fn argmax(points: &[DesignPoint]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.score > points[best].score {
            best = i;
        }
    }
    best
}

fn evaluate_all(
    template: &MotorDesign,
    stage: &StageSpec,
    obj: &ObjectiveConfig,
    trunc: HarmonicTruncation,
    grid: &[[f64; 3]],
) -> Result<Vec<DesignPoint>> {
    grid.par_iter()
        .map(|&[l, hm, hc]| evaluate_point(template, stage, obj, trunc, l, hm, hc))
        .collect()
}

fn product(lambda: &[f64], pm: &[f64], coil: &[f64]) -> Vec<[f64; 3]> {
    let mut grid = Vec::with_capacity(lambda.len() * pm.len() * coil.len());
    for &l in lambda {
        for &hm in pm {
            for &hc in coil {
                grid.push([l, hm, hc]);
            }
        }
    }
    grid
}

/// Full-factorial sweep. Points are evaluated in parallel and returned in
/// grid order.
pub fn sweep(
    template: &MotorDesign,
    stage: &StageSpec,
    obj: &ObjectiveConfig,
    axes: &SweepAxes,
    trunc: HarmonicTruncation,
) -> Result<Sweep> {
    axes.check()?;
    obj.check()?;
    let grid = product(&axes.lambda.values(), &axes.pm_height.values(), &axes.coil_height.values());
    let points = evaluate_all(template, stage, obj, trunc, &grid)?;
    let best = argmax(&points);
    Ok(Sweep { points, best })
}

/// Closed interval per design variable; `lo == hi` pins the variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lambda: (f64, f64),
    pub pm_height: (f64, f64),
    pub coil_height: (f64, f64),
}

impl Bounds {
    fn check(&self) -> Result<()> {
        for (name, (lo, hi)) in [("lambda", self.lambda), ("pm_height", self.pm_height), ("coil_height", self.coil_height)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::EmptyBounds(name));
            }
        }
        Ok(())
    }

    fn ranges(&self) -> [(f64, f64); 3] {
        [self.lambda, self.pm_height, self.coil_height]
    }

    pub fn contains(&self, p: &DesignPoint) -> bool {
        let inside = |(lo, hi): (f64, f64), v: f64| lo <= v && v <= hi;
        inside(self.lambda, p.lambda) && inside(self.pm_height, p.pm_height) && inside(self.coil_height, p.coil_height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerSettings {
    /// Points per free axis in the coarse pass.
    pub coarse: usize,
    /// Refinement passes, each halving the step around the incumbent.
    pub passes: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { coarse: 9, passes: 2 }
    }
}

impl OptimizerSettings {
    /// Grid step of the last pass on an axis spanning `width`.
    pub fn final_step(&self, width: f64) -> f64 {
        if width == 0.0 {
            return 0.0;
        }
        width / (self.coarse - 1) as f64 / 2f64.powi(self.passes as i32)
    }

    /// Points per free axis of the dense grid at the final resolution.
    pub fn dense_count(&self) -> usize {
        (self.coarse - 1) * (1 << self.passes) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    /// 0 for the coarse grid, then 1..=passes.
    pub pass: usize,
    pub point: DesignPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub best: DesignPoint,
    /// Every evaluation performed, in evaluation order.
    pub trace: Vec<TraceRow>,
    /// Incumbent score after each pass.
    pub pass_best: Vec<f64>,
}

fn snap(lo: f64, hi: f64, v: f64) -> f64 {
    v.clamp(lo, hi)
}

/// Coarse grid argmax followed by local refinement. Each refinement pass
/// halves the step and evaluates the incumbent ± 2 steps per free axis,
/// which covers the neighbouring cells of the previous pass.
pub fn optimize(
    template: &MotorDesign,
    stage: &StageSpec,
    obj: &ObjectiveConfig,
    bounds: &Bounds,
    settings: OptimizerSettings,
    trunc: HarmonicTruncation,
) -> Result<Optimum> {
    bounds.check()?;
    obj.check()?;
    if settings.coarse < 2 {
        return Err(Error::InvalidGrid(format!("coarse grid needs at least 2 points per axis, got {}", settings.coarse)));
    }
    let ranges = bounds.ranges();
    let coarse: Vec<Vec<f64>> = ranges
        .iter()
        .map(|&(lo, hi)| if lo == hi { vec![lo] } else { Axis::new(lo, hi, settings.coarse).values() })
        .collect();
    let mut steps: Vec<f64> =
        ranges.iter().map(|&(lo, hi)| if lo == hi { 0.0 } else { (hi - lo) / (settings.coarse - 1) as f64 }).collect();

    let grid = product(&coarse[0], &coarse[1], &coarse[2]);
    let points = evaluate_all(template, stage, obj, trunc, &grid)?;
    let mut best = points[argmax(&points)];
    let mut trace: Vec<TraceRow> = points.into_iter().map(|point| TraceRow { pass: 0, point }).collect();
    let mut pass_best = vec![best.score];

    for pass in 1..=settings.passes {
        for s in steps.iter_mut() {
            *s *= 0.5;
        }
        let centre = [best.lambda, best.pm_height, best.coil_height];
        let local: Vec<Vec<f64>> = (0..3)
            .map(|axis| {
                let (lo, hi) = ranges[axis];
                let mut values: Vec<f64> = Vec::new();
                for j in -2i32..=2 {
                    let v = snap(lo, hi, centre[axis] + j as f64 * steps[axis]);
                    if !values.contains(&v) {
                        values.push(v);
                    }
                }
                values
            })
            .collect();
        let grid = product(&local[0], &local[1], &local[2]);
        let points = evaluate_all(template, stage, obj, trunc, &grid)?;
        let candidate = points[argmax(&points)];
        if candidate.score > best.score {
            best = candidate;
        }
        trace.extend(points.into_iter().map(|point| TraceRow { pass, point }));
        pass_best.push(best.score);
    }
    Ok(Optimum { best, trace, pass_best })
}

/// Exhaustive sweep on the optimizer's final-resolution grid.
pub fn dense_grid(
    template: &MotorDesign,
    stage: &StageSpec,
    obj: &ObjectiveConfig,
    bounds: &Bounds,
    settings: OptimizerSettings,
    trunc: HarmonicTruncation,
) -> Result<Sweep> {
    bounds.check()?;
    let axis = |(lo, hi): (f64, f64)| if lo == hi { Axis::fixed(lo) } else { Axis::new(lo, hi, settings.dense_count()) };
    let axes = SweepAxes { lambda: axis(bounds.lambda), pm_height: axis(bounds.pm_height), coil_height: axis(bounds.coil_height) };
    sweep(template, stage, obj, &axes, trunc)
}

/// Uniform-field sizing estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sizing {
    /// τ_av = h_c J_av B_av, N/m².
    pub shear: f64,
    /// F_av = λ L τ_av, N.
    pub force: f64,
    /// J_av²/σ_cu, W/m³.
    pub loss_density: f64,
}

pub fn initial_sizing(b_av: f64, j_av: f64, design: &MotorDesign) -> Result<Sizing> {
    for (name, value) in [("b_av", b_av), ("j_av", j_av)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter { name, value });
        }
    }
    let shear = design.coil_height * j_av * b_av;
    Ok(Sizing { shear, force: design.lambda * design.depth * shear, loss_density: j_av * j_av / design.sigma_cu })
}
