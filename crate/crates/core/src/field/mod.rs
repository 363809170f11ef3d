//! Per-harmonic boundary-value solutions for the three potential
//! formulations and field evaluation in regions I–III.
//!
//! Every harmonic solves a 5×5 (open) or 4×4 (back-iron) system in the
//! unknowns [A₁, B₁, A₂, B₂, B₃]. Coefficients are stored scaled,
//! c = ĉ·e^{s_j} with s = [−a·g_e, 0, −a·T, a·g_e, a·T], a = nk and
//! T = g_e + h_m, so nothing overflows for high harmonics.

mod laplace;
mod poisson;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{HarmonicTruncation, MotorDesign};
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::source::{HarmonicSource, HarmonicTerm};
use crate::MU0;

pub use laplace::{assemble_system, closed_form_coefficients, solve_coefficients};
pub use poisson::{solve_model2, solve_model3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldModel {
    /// Laplace solution with the hybrid charge/current source model.
    Laplace,
    /// Poisson solution in the magnetic scalar potential.
    PoissonScalar,
    /// Poisson solution in the magnetic vector potential.
    PoissonVector,
}

impl FieldModel {
    pub const ALL: [FieldModel; 3] =
        [FieldModel::Laplace, FieldModel::PoissonScalar, FieldModel::PoissonVector];

    pub fn name(self) -> &'static str {
        match self {
            FieldModel::Laplace => "laplace",
            FieldModel::PoissonScalar => "poisson-scalar",
            FieldModel::PoissonVector => "poisson-vector",
        }
    }
}

impl std::str::FromStr for FieldModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FieldModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown model `{s}` (laplace|poisson-scalar|poisson-vector)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    NoBackIron,
    BackIron,
}

impl Topology {
    pub fn of(design: &MotorDesign) -> Self {
        if design.back_iron {
            Topology::BackIron
        } else {
            Topology::NoBackIron
        }
    }

    /// Number of unknowns per harmonic.
    pub fn unknowns(self) -> usize {
        match self {
            Topology::NoBackIron => 5,
            Topology::BackIron => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Coil and airgap, 0 ≤ y ≤ g_e.
    I,
    /// Magnet array, g_e ≤ y ≤ g_e + h_m.
    II,
    /// Free space behind the array.
    III,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
        }
    }
}

/// Horizontal interfaces where boundary rows are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Interface {
    Stator,
    Lower,
    Upper,
}

/// One boundary row: Σ sign·c_j·e^{growth·a·y} = rhs.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub at: Interface,
    pub terms: Vec<(usize, f64, f64)>,
    pub rhs: f64,
}

pub(crate) fn row(at: Interface, terms: &[(usize, f64, f64)], rhs: f64) -> Row {
    Row { at, terms: terms.to_vec(), rhs }
}

/// Column indices of the unknowns.
pub(crate) const A1: usize = 0;
pub(crate) const B1: usize = 1;
pub(crate) const A2: usize = 2;
pub(crate) const B2: usize = 3;
pub(crate) const B3: usize = 4;

/// Flips the sign of one matrix entry before solving. Used to check that
/// the boundary-residual diagnostics catch a corrupted row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignFlip {
    pub row: usize,
    pub col: usize,
}

/// Geometry the coefficients were solved for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stack {
    pub wave_number: f64,
    /// Height of region I.
    pub effective_gap: f64,
    /// Top of region II.
    pub array_top: f64,
}

impl Stack {
    pub fn of(design: &MotorDesign) -> Self {
        Self {
            wave_number: design.wave_number(),
            effective_gap: design.effective_gap(),
            array_top: design.array_top(),
        }
    }

    fn height(&self, at: Interface) -> f64 {
        match at {
            Interface::Stator => 0.0,
            Interface::Lower => self.effective_gap,
            Interface::Upper => self.array_top,
        }
    }

    /// Column scale exponents s_j for harmonic `n`.
    pub fn column_scales(&self, n: usize) -> [f64; 5] {
        let a = n as f64 * self.wave_number;
        [-a * self.effective_gap, 0.0, -a * self.array_top, a * self.effective_gap, a * self.array_top]
    }
}

/// Solution coefficients of one harmonic, scaled form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicCoefficients {
    pub n: usize,
    /// [Â₁, B̂₁, Â₂, B̂₂, B̂₃]; B̂₃ = 0 with back-iron.
    pub scaled: [f64; 5],
}

/// A dense per-harmonic system, either raw or column-scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    /// ‖A·c − b‖∞.
    pub fn residual(&self, c: &[f64]) -> f64 {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| (r.iter().zip(c).map(|(p, q)| p * q).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }
}

/// All harmonic coefficients for one model and topology.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldCoefficients {
    pub model: FieldModel,
    pub topology: Topology,
    pub stack: Stack,
    pub source: HarmonicSource,
    pub harmonics: Vec<HarmonicCoefficients>,
}

impl FieldCoefficients {
    /// Scaled coefficients of harmonic `n`.
    pub fn scaled(&self, n: usize) -> Option<[f64; 5]> {
        if n % 2 == 1 {
            self.harmonics.get(n / 2).map(|h| h.scaled)
        } else {
            None
        }
    }

    /// Unscaled [A₁, B₁, A₂, B₂, B₃] of harmonic `n`. May overflow to ±inf
    /// for very high harmonics; prefer [`Self::scaled`] for arithmetic.
    pub fn raw(&self, n: usize) -> Option<[f64; 5]> {
        let scaled = self.scaled(n)?;
        let s = self.stack.column_scales(n);
        let mut out = [0.0; 5];
        for j in 0..5 {
            out[j] = if scaled[j] == 0.0 { 0.0 } else { scaled[j] * s[j].exp() };
        }
        Some(out)
    }

    /// Region containing height `y`, or `OutOfDomain`.
    pub fn region_of(&self, y: f64) -> Result<Region> {
        let top = self.stack.array_top;
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::OutOfDomain { y, y_max: self.y_max() });
        }
        if y <= self.stack.effective_gap {
            Ok(Region::I)
        } else if y <= top {
            Ok(Region::II)
        } else if self.topology == Topology::BackIron {
            if y <= top * (1.0 + 1e-12) {
                Ok(Region::II)
            } else {
                Err(Error::OutOfDomain { y, y_max: top })
            }
        } else {
            Ok(Region::III)
        }
    }

    /// Upper limit of the modeled domain.
    pub fn y_max(&self) -> f64 {
        match self.topology {
            Topology::BackIron => self.stack.array_top,
            Topology::NoBackIron => f64::INFINITY,
        }
    }
}

/// Fields and potentials at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub region: Region,
    pub bx: f64,
    pub by: f64,
    pub hx: f64,
    pub hy: f64,
    /// Scalar potential, A (Laplace and Poisson-scalar models).
    pub psi: Option<f64>,
    /// Vector potential, T·m (Poisson-vector model).
    pub az: Option<f64>,
}

pub(crate) fn truncated(source: &HarmonicSource, trunc: HarmonicTruncation) -> Vec<HarmonicTerm> {
    source.terms.iter().copied().filter(|t| t.n <= trunc.n_max()).collect()
}

type RowBuilder = fn(HarmonicTerm, f64, Topology) -> Vec<Row>;

/// Raw (unscaled) system for harmonic `term`.
pub(crate) fn raw_system(stack: &Stack, topology: Topology, term: HarmonicTerm, build: RowBuilder) -> LinearSystem {
    let a = term.n as f64 * stack.wave_number;
    let size = topology.unknowns();
    let rows = build(term, a, topology);
    let mut matrix = vec![vec![0.0; size]; size];
    let mut rhs = vec![0.0; size];
    for (i, r) in rows.iter().enumerate() {
        let y = stack.height(r.at);
        for &(col, sign, growth) in &r.terms {
            matrix[i][col] = sign * (growth * a * y).exp();
        }
        rhs[i] = r.rhs;
    }
    LinearSystem { matrix, rhs }
}

/// Column-scaled system; every entry is ±e^{≤0}.
pub(crate) fn scaled_system(stack: &Stack, topology: Topology, term: HarmonicTerm, build: RowBuilder) -> LinearSystem {
    let a = term.n as f64 * stack.wave_number;
    let size = topology.unknowns();
    let s = stack.column_scales(term.n);
    let rows = build(term, a, topology);
    let mut matrix = vec![vec![0.0; size]; size];
    let mut rhs = vec![0.0; size];
    for (i, r) in rows.iter().enumerate() {
        let y = stack.height(r.at);
        for &(col, sign, growth) in &r.terms {
            matrix[i][col] = sign * (growth * a * y + s[col]).exp();
        }
        rhs[i] = r.rhs;
    }
    LinearSystem { matrix, rhs }
}

pub(crate) fn solve_all(
    design: &MotorDesign,
    source: &HarmonicSource,
    trunc: HarmonicTruncation,
    model: FieldModel,
    build: RowBuilder,
    flip: Option<SignFlip>,
) -> Result<FieldCoefficients> {
    let stack = Stack::of(design);
    let topology = Topology::of(design);
    let size = topology.unknowns();
    let terms = truncated(source, trunc);
    let mut harmonics = Vec::with_capacity(terms.len());
    for &term in &terms {
        let mut sys = scaled_system(&stack, topology, term, build);
        if let Some(f) = flip {
            if f.row < size && f.col < size {
                sys.matrix[f.row][f.col] = -sys.matrix[f.row][f.col];
            }
        }
        let mut scaled = [0.0; 5];
        if sys.rhs.iter().any(|&b| b != 0.0) {
            let c = solve_dense(sys.matrix, sys.rhs).ok_or(Error::SingularSystem { n: term.n })?;
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularSystem { n: term.n });
            }
            scaled[..size].copy_from_slice(&c);
        }
        harmonics.push(HarmonicCoefficients { n: term.n, scaled });
    }
    let source = HarmonicSource { wave_number: source.wave_number, terms };
    Ok(FieldCoefficients { model, topology, stack, source, harmonics })
}

/// Solves the chosen model, optionally corrupting one matrix entry first.
pub fn solve_model(
    design: &MotorDesign,
    source: &HarmonicSource,
    trunc: HarmonicTruncation,
    model: FieldModel,
    flip: Option<SignFlip>,
) -> Result<FieldCoefficients> {
    let build = match model {
        FieldModel::Laplace => laplace::rows as RowBuilder,
        FieldModel::PoissonScalar => poisson::scalar_rows,
        FieldModel::PoissonVector => poisson::vector_rows,
    };
    solve_all(design, source, trunc, model, build, flip)
}

/// Raw system for any model and harmonic `n`.
pub fn assemble_model_system(
    design: &MotorDesign,
    source: &HarmonicSource,
    model: FieldModel,
    n: usize,
) -> LinearSystem {
    let build = match model {
        FieldModel::Laplace => laplace::rows as RowBuilder,
        FieldModel::PoissonScalar => poisson::scalar_rows,
        FieldModel::PoissonVector => poisson::vector_rows,
    };
    raw_system(&Stack::of(design), Topology::of(design), source.term(n), build)
}

/// Column-scaled system for any model and harmonic `n`.
pub fn assemble_scaled_system(
    design: &MotorDesign,
    source: &HarmonicSource,
    model: FieldModel,
    n: usize,
) -> LinearSystem {
    let build = match model {
        FieldModel::Laplace => laplace::rows as RowBuilder,
        FieldModel::PoissonScalar => poisson::scalar_rows,
        FieldModel::PoissonVector => poisson::vector_rows,
    };
    scaled_system(&Stack::of(design), Topology::of(design), source.term(n), build)
}

/// Fields at (x, y); the region follows from y.
pub fn evaluate_fields(coeffs: &FieldCoefficients, x: f64, y: f64) -> Result<FieldSample> {
    let region = coeffs.region_of(y)?;
    Ok(evaluate_in_region(coeffs, region, x, y))
}

/// Fields at (x, y) using the series of `region` regardless of where y
/// lies. Used to take one-sided limits at interfaces.
pub fn evaluate_in_region(coeffs: &FieldCoefficients, region: Region, x: f64, y: f64) -> FieldSample {
    let st = &coeffs.stack;
    let region = if coeffs.topology == Topology::BackIron && region == Region::III {
        Region::II
    } else {
        region
    };
    let mut s = FieldSample { x, y, region, bx: 0.0, by: 0.0, hx: 0.0, hy: 0.0, psi: None, az: None };
    let (mut psi, mut az) = (0.0, 0.0);
    let inside = region == Region::II;
    for (h, t) in coeffs.harmonics.iter().zip(&coeffs.source.terms) {
        let a = h.n as f64 * st.wave_number;
        let c = &h.scaled;
        // growing and decaying parts A·e^{ay}, B·e^{-ay}
        let (up, down) = match region {
            Region::I => (c[A1] * (a * (y - st.effective_gap)).exp(), c[B1] * (-a * y).exp()),
            Region::II => (
                c[A2] * (a * (y - st.array_top)).exp(),
                c[B2] * (-a * (y - st.effective_gap)).exp(),
            ),
            Region::III => (0.0, c[B3] * (-a * (y - st.array_top)).exp()),
        };
        let (sn, cs) = (a * x).sin_cos();
        let (mx, my) = if inside { (t.m_xn * cs, t.m_yn * sn) } else { (0.0, 0.0) };
        let sum = up + down;
        let diff = up - down;
        match coeffs.model {
            FieldModel::Laplace => {
                psi += sum * sn;
                let bx = -MU0 * a * sum * cs;
                let hy = -a * diff * sn;
                s.bx += bx;
                s.hy += hy;
                s.hx += bx / MU0 - mx;
                s.by += MU0 * (hy + my);
            }
            FieldModel::PoissonScalar => {
                let p = sum + if inside { t.m_xn / a } else { 0.0 };
                psi += p * sn;
                let hx = -a * p * cs;
                let hy = -a * diff * sn;
                s.hx += hx;
                s.hy += hy;
                s.bx += MU0 * (hx + mx);
                s.by += MU0 * (hy + my);
            }
            FieldModel::PoissonVector => {
                let p = sum + if inside { MU0 * t.m_yn / a } else { 0.0 };
                az += p * cs;
                let bx = a * diff * cs;
                let by = a * p * sn;
                s.bx += bx;
                s.by += by;
                s.hx += bx / MU0 - mx;
                s.hy += by / MU0 - my;
            }
        }
    }
    match coeffs.model {
        FieldModel::PoissonVector => s.az = Some(az),
        _ => s.psi = Some(psi),
    }
    s
}

/// Samples a uniform grid of `nx` × `ny` points over x ∈ [0, λ) and
/// y ∈ [y0, y1] (inclusive).
pub fn field_grid(
    coeffs: &FieldCoefficients,
    nx: usize,
    ny: usize,
    y0: f64,
    y1: f64,
) -> Result<Vec<FieldSample>> {
    let lambda = 2.0 * PI / coeffs.stack.wave_number;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = if ny == 1 { y0 } else { y0 + (y1 - y0) * j as f64 / (ny - 1) as f64 };
        coeffs.region_of(y)?;
        for i in 0..nx {
            out.push(evaluate_fields(coeffs, lambda * i as f64 / nx as f64, y)?);
        }
    }
    Ok(out)
}

/// Relative difference with a floor: |p − q| / max(|p|, |q|, floor).
pub fn relative_difference(p: f64, q: f64, floor: f64) -> f64 {
    let d = (p - q).abs();
    if d == 0.0 {
        0.0
    } else {
        d / p.abs().max(q.abs()).max(floor)
    }
}
