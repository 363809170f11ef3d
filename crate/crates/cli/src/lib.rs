//! `halbach` command-line front end.
//!
//! Defaults:
//!
//! | setting                  | default                         |
//! |--------------------------|---------------------------------|
//! | harmonic truncation      | config `n_max_harmonic`, else 199 |
//! | field-map grid           | 256x128 over one λ × full stack |
//! | FD grid                  | 1024x512                        |
//! | time samples per period  | 720                             |
//! | force-angle points       | 360                             |
//! | misalignment points      | 11 over [0, gap_offset]         |
//! | optimizer                | 9 coarse points, 2 refinements  |
//! | stage                    | 0.6 m, 100 kg, 0.3 m deep, moving PM |

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use halbach_core::config::render_config;
use halbach_core::design::{
    initial_sizing, optimize, sweep, Axis, Bounds, ExtendedWeights, MovingMember, ObjectiveConfig, OptimizerSettings,
    StageSpec, SweepAxes,
};
use halbach_core::fd::{solve_design_fd, GridSpec};
use halbach_core::field::{field_grid, solve_model, SignFlip};
use halbach_core::machine::{
    attraction_force, back_emf, emf_thd, force_angle_curve, misalignment_force, peak_force, period_grid, solve_design,
    thrust,
};
use halbach_core::output;
use halbach_core::verify::{run_checks, VerifyOptions};
use halbach_core::{
    fourier_coefficients, load_config, DesignParams, Error, FieldModel, HarmonicTruncation, MotorConfig, MotorDesign,
    OperatingPoint,
};

#[derive(Debug, Parser)]
#[command(name = "halbach", version, about = "Field, force and design tools for slotless Halbach linear motors")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Motor config (`key = value` lines). Defaults to the built-in reference machine.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Highest odd harmonic; overrides the config.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field map on a regular grid.
    Fields(FieldsArgs),
    /// Thrust profile and force-angle characteristic.
    Force(ForceArgs),
    /// Flux linkage and back-EMF per phase.
    Emf(EmfArgs),
    /// Attraction and misalignment force.
    Normal,
    /// Full-factorial design sweep.
    Sweep(SweepArgs),
    /// Grid optimizer with local refinement.
    Optimize(OptimizeArgs),
    /// Uniform-field sizing estimates.
    Sizing(SizingArgs),
    /// Consistency checks; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct FieldsArgs {
    #[arg(long, default_value = "laplace")]
    pub model: FieldModel,
    /// NXxNY points; x covers one wavelength, y is inclusive.
    #[arg(long, default_value = "256x128")]
    pub grid: GridSpec,
    /// Lowest y, m.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y0: f64,
    /// Highest y, m; defaults to the top of the magnet array.
    #[arg(long, allow_negative_numbers = true)]
    pub y1: Option<f64>,
    /// Emit the finite-difference solution on its own grid instead.
    #[arg(long)]
    pub fd: bool,
}

#[derive(Debug, Args)]
pub struct ForceArgs {
    #[arg(long, default_value_t = 720)]
    pub samples: usize,
    #[arg(long, default_value_t = 360)]
    pub angle_points: usize,
    /// Rotor offset, m; defaults to the peak-force offset.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EmfArgs {
    #[arg(long, default_value_t = 720)]
    pub samples: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub x0: f64,
    /// Mover velocity, m/s; defaults to synchronous speed.
    #[arg(long, allow_negative_numbers = true)]
    pub velocity: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[arg(long, default_value_t = 0.6)]
    pub stage_length: f64,
    #[arg(long, default_value_t = 100.0)]
    pub stage_mass: f64,
    #[arg(long, default_value_t = 0.3)]
    pub stage_depth: f64,
    /// moving-pm or moving-stator.
    #[arg(long, default_value = "moving-pm")]
    pub moving: MovingMember,
    /// Stator unit count; defaults to N_u + 1.
    #[arg(long)]
    pub stator_units: Option<f64>,
}

impl StageArgs {
    fn spec(&self) -> StageSpec {
        StageSpec {
            length: self.stage_length,
            mass: self.stage_mass,
            depth: self.stage_depth,
            moving: self.moving,
            stator_units: self.stator_units,
        }
    }
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub beta: f64,
    /// Exponent on back-EMF THD; selects the extended objective.
    #[arg(long)]
    pub thd_exp: Option<f64>,
    /// Exponent on force ripple (%); selects the extended objective.
    #[arg(long)]
    pub ripple_exp: Option<f64>,
    /// Drive cost; required with the extended objective.
    #[arg(long)]
    pub cost_drive: Option<f64>,
}

impl ObjectiveArgs {
    fn config(&self) -> Result<ObjectiveConfig, CliError> {
        let extended = match (self.thd_exp, self.ripple_exp, self.cost_drive) {
            (None, None, None) => None,
            (thd, ripple, Some(cost_drive)) => {
                Some(ExtendedWeights { thd: thd.unwrap_or(0.0), ripple: ripple.unwrap_or(0.0), cost_drive })
            }
            _ => return Err(CliError::Usage("the extended objective needs --cost-drive".into())),
        };
        let obj = ObjectiveConfig { alpha: self.alpha, beta: self.beta, extended };
        obj.check()?;
        Ok(obj)
    }
}

/// `lo:hi:count` or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisArg(pub Axis);

impl FromStr for AxisArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number `{v}` in `{s}`"));
        match parts.as_slice() {
            [v] => Ok(AxisArg(Axis::fixed(num(v)?))),
            [lo, hi, n] => {
                let count = n.trim().parse::<usize>().map_err(|_| format!("bad count `{n}` in `{s}`"))?;
                Ok(AxisArg(Axis::new(num(lo)?, num(hi)?, count)))
            }
            _ => Err(format!("expected `lo:hi:count` or a value, got `{s}`")),
        }
    }
}

/// `lo:hi` or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeArg(pub f64, pub f64);

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number `{v}` in `{s}`"));
        match s.split_once(':') {
            None => {
                let v = num(s)?;
                Ok(RangeArg(v, v))
            }
            Some((lo, hi)) => Ok(RangeArg(num(lo)?, num(hi)?)),
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// λ axis; defaults to the config value.
    #[arg(long)]
    pub lambda: Option<AxisArg>,
    /// h_m axis; defaults to the config value.
    #[arg(long)]
    pub hm: Option<AxisArg>,
    /// h_c axis; defaults to the config value.
    #[arg(long)]
    pub hc: Option<AxisArg>,
    #[command(flatten)]
    pub stage: StageArgs,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// λ bounds; defaults to the config value (pinned).
    #[arg(long)]
    pub lambda: Option<RangeArg>,
    #[arg(long, default_value = "0.002:0.02")]
    pub hm: RangeArg,
    #[arg(long, default_value = "0.001:0.02")]
    pub hc: RangeArg,
    #[arg(long, default_value_t = 9)]
    pub coarse: usize,
    #[arg(long, default_value_t = 2)]
    pub passes: usize,
    #[command(flatten)]
    pub stage: StageArgs,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
}

#[derive(Debug, Args)]
pub struct SizingArgs {
    /// Average normal flux density in the coils, T.
    #[arg(long, default_value_t = 0.5)]
    pub b_av: f64,
    /// Average current density, A/m²; defaults to the config J_max.
    #[arg(long)]
    pub j_av: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Model checked for boundary residuals.
    #[arg(long, default_value = "laplace")]
    pub model: FieldModel,
    /// Skip the finite-difference oracle.
    #[arg(long)]
    pub skip_fd: bool,
    /// FD grid.
    #[arg(long, default_value = "1024x512")]
    pub grid: GridSpec,
    /// Flip the sign of matrix entry ROW,COL of the checked model.
    #[arg(long, value_name = "ROW,COL")]
    pub flip: Option<FlipArg>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipArg(pub SignFlip);

impl FromStr for FlipArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (r, c) = s.split_once(',').ok_or_else(|| format!("expected ROW,COL, got `{s}`"))?;
        let idx = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad index `{v}`"));
        Ok(FlipArg(SignFlip { row: idx(r)?, col: idx(c)? }))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Physics(String),
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Physics(_) | CliError::ChecksFailed(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularSystem { .. }
            | Error::NoConvergence { .. }
            | Error::ZeroVelocity
            | Error::ZeroLoss
            | Error::DegenerateObjective(_)
            | Error::Output(_) => CliError::Physics(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    /// Resolved config in the input format.
    pub config: String,
    pub parameters: DesignParams,
    pub n_max: usize,
    pub flags: Value,
    pub output_dir: String,
    pub files: Vec<String>,
    pub summary: Value,
    pub tool_version: String,
    pub duration_s: f64,
}

struct Run {
    out: PathBuf,
    files: Vec<String>,
}

impl Run {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }
}

fn load(common: &Common) -> Result<MotorConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            load_config(&text)?
        }
        None => MotorConfig { design: MotorDesign::new(DesignParams::reference())?, truncation: HarmonicTruncation::default() },
    };
    if let Some(n) = common.nmax {
        config.truncation = HarmonicTruncation::new(n)?;
    }
    Ok(config)
}

fn cmd_fields(cfg: &MotorConfig, args: &FieldsArgs, run: &mut Run) -> Result<(Value, Value), CliError> {
    let d = &cfg.design;
    let flags = json!({ "model": args.model.name(), "grid": args.grid.to_string(), "y0": args.y0, "y1": args.y1, "fd": args.fd });
    if args.fd {
        let grid = solve_design_fd(d, args.grid)?;
        output::write_field_map(run.create("fields.csv")?, &grid.samples(d), output::FD_MODEL)?;
        output::write_residual_log(run.create("residual_log.csv")?, &grid.residual_log)?;
        let residual = grid.residual_log.last().map(|r| r.1).unwrap_or(0.0);
        return Ok((flags, json!({ "final_residual": residual, "passes": grid.residual_log.len() })));
    }
    let source = fourier_coefficients(d, cfg.truncation);
    let coeffs = solve_model(d, &source, cfg.truncation, args.model, None)?;
    let y1 = args.y1.unwrap_or(d.array_top());
    for y in [args.y0, y1] {
        coeffs.region_of(y)?;
    }
    let samples = field_grid(&coeffs, args.grid.nx, args.grid.ny, args.y0, y1)?;
    output::write_field_map(run.create("fields.csv")?, &samples, args.model.name())?;
    output::write_harmonics(run.create("harmonics.csv")?, &source)?;
    let peak_by = samples.iter().fold(0.0f64, |m, s| m.max(s.by.abs()));
    Ok((flags, json!({ "points": samples.len(), "max_abs_By": peak_by })))
}

fn cmd_force(cfg: &MotorConfig, args: &ForceArgs, run: &mut Run) -> Result<(Value, Value), CliError> {
    let d = &cfg.design;
    let coeffs = solve_design(d, cfg.truncation)?;
    let peak = peak_force(d, &coeffs)?;
    let x0 = args.x0.unwrap_or(peak.x0);
    let f = thrust(d, &coeffs, OperatingPoint::at(0.0, x0), &period_grid(d, args.samples))?;
    output::write_force(run.create("force.csv")?, &f)?;
    output::write_force_angle(run.create("force_angle.csv")?, &force_angle_curve(d, &coeffs, args.angle_points)?)?;
    println!("mean force {:.6} N, ripple {:.4} %, peak {:.6} N at force angle {:.6} rad", f.mean_force, f.ripple_pct, peak.force, peak.angle);
    Ok((
        json!({ "samples": args.samples, "angle_points": args.angle_points, "x0": x0 }),
        json!({
            "mean_force_N": f.mean_force,
            "ripple_pct": f.ripple_pct,
            "mean_shear_N_per_m2": f.mean_force / (d.lambda * d.depth),
            "peak_force_N": peak.force,
            "force_angle_rad": peak.angle,
            "peak_x0_m": peak.x0,
        }),
    ))
}

fn cmd_emf(cfg: &MotorConfig, args: &EmfArgs, run: &mut Run) -> Result<(Value, Value), CliError> {
    let d = &cfg.design;
    let coeffs = solve_design(d, cfg.truncation)?;
    let op = OperatingPoint { t: 0.0, x0: args.x0, u_override: args.velocity };
    let e = back_emf(d, &coeffs, op, &period_grid(d, args.samples));
    output::write_emf(run.create("emf.csv")?, &e)?;
    let peak = e.emf.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let thd = emf_thd(d, &coeffs);
    println!("peak back-EMF {peak:.6} V, THD {:.4} %", 100.0 * thd);
    Ok((
        json!({ "samples": args.samples, "x0": args.x0, "velocity": op.velocity(d) }),
        json!({ "peak_emf_V": peak, "emf_thd": thd }),
    ))
}

fn cmd_normal(cfg: &MotorConfig, run: &mut Run) -> Result<(Value, Value), CliError> {
    let d = &cfg.design;
    let source = fourier_coefficients(d, cfg.truncation);
    let coeffs = solve_design(d, cfg.truncation)?;
    let centred = attraction_force(d, &coeffs);
    let mut rows = Vec::with_capacity(11);
    for i in 0..11 {
        let g0 = d.gap_offset * i as f64 / 10.0;
        rows.push((g0, misalignment_force(d, &source, cfg.truncation, g0)?));
    }
    output::write_normal(run.create("normal.csv")?, &rows)?;
    output::write_normal_stress(run.create("normal_stress.csv")?, &centred)?;
    let net = rows.last().map(|r| r.1.f_y_total).unwrap_or(0.0);
    println!("attraction per side {:.6} N, net at g0 = {} m: {net:.6} N", centred.f_y_top, d.gap_offset);
    Ok((json!({ "points": 11 }), json!({ "attraction_per_side_N": centred.f_y_top, "net_at_offset_N": net })))
}

fn point_json(p: &halbach_core::design::DesignPoint) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

fn cmd_sweep(cfg: &MotorConfig, args: &SweepArgs, run: &mut Run) -> Result<(Value, Value), CliError> {
    let d = &cfg.design;
    let axes = SweepAxes {
        lambda: args.lambda.map_or(Axis::fixed(d.lambda), |a| a.0),
        pm_height: args.hm.map_or(Axis::fixed(d.pm_height), |a| a.0),
        coil_height: args.hc.map_or(Axis::fixed(d.coil_height), |a| a.0),
    };
    let stage = args.stage.spec();
    let obj = args.objective.config()?;
    let s = sweep(d, &stage, &obj, &axes, cfg.truncation)?;
    output::write_sweep(run.create("sweep.csv")?, &s.points)?;
    let b = s.best_point();
    println!(
        "best of {} points: lambda {} m, h_m {} m, h_c {} m, a {:.4} m/s^2, P_cu {:.4} W, score {:.6e}",
        s.points.len(),
        b.lambda,
        b.pm_height,
        b.coil_height,
        b.metrics.acceleration,
        b.metrics.copper_loss,
        b.score
    );
    Ok((
        json!({ "axes": axes, "stage": stage, "objective": obj }),
        json!({ "points": s.points.len(), "best": point_json(b) }),
    ))
}

fn cmd_optimize(cfg: &MotorConfig, args: &OptimizeArgs, run: &mut Run) -> Result<(Value, Value), CliError> {
    let d = &cfg.design;
    let lambda = args.lambda.unwrap_or(RangeArg(d.lambda, d.lambda));
    let bounds = Bounds { lambda: (lambda.0, lambda.1), pm_height: (args.hm.0, args.hm.1), coil_height: (args.hc.0, args.hc.1) };
    let settings = OptimizerSettings { coarse: args.coarse, passes: args.passes };
    let stage = args.stage.spec();
    let obj = args.objective.config()?;
    let o = optimize(d, &stage, &obj, &bounds, settings, cfg.truncation)?;
    output::write_trace(run.create("trace.csv")?, &o.trace)?;
    let b = &o.best;
    println!(
        "optimum after {} evaluations: lambda {} m, h_m {} m, h_c {} m, a {:.4} m/s^2, P_cu {:.4} W, score {:.6e}",
        o.trace.len(),
        b.lambda,
        b.pm_height,
        b.coil_height,
        b.metrics.acceleration,
        b.metrics.copper_loss,
        b.score
    );
    Ok((
        json!({ "bounds": bounds, "settings": settings, "stage": stage, "objective": obj }),
        json!({ "evaluations": o.trace.len(), "pass_best": o.pass_best, "best": point_json(b) }),
    ))
}

fn cmd_sizing(cfg: &MotorConfig, args: &SizingArgs, run: &mut Run) -> Result<(Value, Value), CliError> {
    let d = &cfg.design;
    let j_av = args.j_av.unwrap_or(d.j_max);
    let s = initial_sizing(args.b_av, j_av, d)?;
    let mut w = run.create("sizing.csv")?;
    use std::io::Write;
    writeln!(w, "tau_av,F_av,P_per_volume\n{},{},{}", s.shear, s.force, s.loss_density)
        .map_err(|e| CliError::Physics(e.to_string()))?;
    println!("tau_av {} N/m^2", s.shear);
    println!("F_av {} N", s.force);
    println!("P {} W/m^3", s.loss_density);
    Ok((json!({ "b_av": args.b_av, "j_av": j_av }), serde_json::to_value(s).unwrap_or(Value::Null)))
}

fn cmd_verify(cfg: &MotorConfig, args: &VerifyArgs, run: &mut Run) -> Result<(Value, Value), CliError> {
    let opts = VerifyOptions {
        trunc: cfg.truncation,
        model: args.model,
        skip_fd: args.skip_fd,
        fd_grid: args.grid,
        flip: args.flip.map(|f| f.0),
        ..VerifyOptions::default()
    };
    let report = run_checks(&cfg.design, &opts);
    let mut w = run.create("verify.csv")?;
    use std::io::Write;
    let io = |e: std::io::Error| CliError::Physics(e.to_string());
    writeln!(w, "check,passed,value,tolerance,seconds").map_err(io)?;
    for c in &report.checks {
        println!("{}", c.line());
        writeln!(w, "{},{},{},{},{}", c.name, c.passed, c.value, c.tolerance, c.seconds).map_err(io)?;
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let flags = json!({ "model": args.model.name(), "skip_fd": args.skip_fd, "grid": args.grid.to_string(), "flip": opts.flip });
    let summary = json!({ "passed": report.passed(), "failed": failed, "checks": report.checks });
    Ok((flags, summary))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fields(_) => "fields",
        Command::Force(_) => "force",
        Command::Emf(_) => "emf",
        Command::Normal => "normal",
        Command::Sweep(_) => "sweep",
        Command::Optimize(_) => "optimize",
        Command::Sizing(_) => "sizing",
        Command::Verify(_) => "verify",
    }
}

/// Runs a parsed command and writes its manifest.
pub fn execute(cli: &Cli) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let cfg = load(&cli.common)?;
    fs::create_dir_all(&cli.common.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", cli.common.out.display())))?;
    let mut run = Run { out: cli.common.out.clone(), files: Vec::new() };
    let (flags, summary) = match &cli.command {
        Command::Fields(a) => cmd_fields(&cfg, a, &mut run)?,
        Command::Force(a) => cmd_force(&cfg, a, &mut run)?,
        Command::Emf(a) => cmd_emf(&cfg, a, &mut run)?,
        Command::Normal => cmd_normal(&cfg, &mut run)?,
        Command::Sweep(a) => cmd_sweep(&cfg, a, &mut run)?,
        Command::Optimize(a) => cmd_optimize(&cfg, a, &mut run)?,
        Command::Sizing(a) => cmd_sizing(&cfg, a, &mut run)?,
        Command::Verify(a) => cmd_verify(&cfg, a, &mut run)?,
    };
    let mut manifest = RunManifest {
        command: command_name(&cli.command).to_string(),
        config_path: cli.common.config.as_ref().map(|p| p.display().to_string()),
        config: render_config(&cfg),
        parameters: cfg.design.params().clone(),
        n_max: cfg.truncation.n_max(),
        flags,
        output_dir: cli.common.out.display().to_string(),
        files: run.files.clone(),
        summary,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_s: 0.0,
    };
    manifest.files.push("manifest.json".into());
    manifest.duration_s = start.elapsed().as_secs_f64();
    write_manifest(&cli.common.out, &manifest)?;
    if manifest.command == "verify" && manifest.summary["passed"] == Value::Bool(false) {
        return Err(CliError::ChecksFailed(format!("checks failed: {}", manifest.summary["failed"])));
    }
    Ok(manifest)
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Physics(e.to_string()))?;
    fs::write(dir.join("manifest.json"), text + "\n").map_err(|e| CliError::Usage(format!("cannot write manifest: {e}")))
}

/// Parses `args`, runs, and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
