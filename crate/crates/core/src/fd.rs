//! Finite-difference scalar-potential solver used as an independent check
//! on the analytic fields.
//!
//! Solves ∇·(−∇ψ + M) = 0 on one wavelength, periodic in x, with ψ = 0 on
//! the stator iron (y = 0) and at the top of the domain (the back-iron, or
//! a far boundary 3λ above the array). The magnetization is the exact
//! piecewise layout, not its Fourier series.
//!
//! The y-grid is piecewise uniform with nodes on the coil top, the
//! mid-airgap line and both array faces; the free-space region is
//! exponentially stretched. Each node balances the fluxes of its dual cell:
//!
//!   F_x(i+½, j) = −Δ_j (ψ_{i+1,j} − ψ_{i,j})/dx + w_j M̄_x(i+½)
//!   F_y(i, j+½) = −dx (ψ_{i,j+1} − ψ_{i,j})/h_{j+½} + m̃_y(i) f_{j+½}
//!
//! where M̄_x is the exact interval mean of M_x, m̃_y the hat-weighted
//! integral of M_y, w_j the hat-weighted magnet thickness and f the magnet
//! fraction of a y-interval. The linear system is solved by an FFT in x and
//! a tridiagonal solve per mode, with residual-checked refinement.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::config::{phase_current_density, HarmonicTruncation, MotorDesign, OperatingPoint};
use crate::error::{Error, Result};
use crate::field::{evaluate_fields, FieldCoefficients, FieldSample, Region, Topology};
use crate::linalg::solve_tridiagonal;
use crate::machine::{coil_span, solve_design, thrust};
use crate::source::PiecewiseMagnetization;
use crate::MU0;

/// Grid resolution: `nx` periodic columns and `ny` cells in y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// Parses `NXxNY`, e.g. `1024x512`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("expected NXxNY, got `{s}`"));
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let nx = a.trim().parse().map_err(|_| bad())?;
        let ny = b.trim().parse().map_err(|_| bad())?;
        Ok(Self { nx, ny })
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.nx, self.ny)
    }
}

/// Minimum number of cells across the magnet height.
pub const MIN_MAGNET_CELLS: usize = 16;

/// Node rows of the y-grid with the indices of the landmark rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YGrid {
    pub y: Vec<f64>,
    pub coil_top: usize,
    pub mid_gap: usize,
    pub array_bottom: usize,
    pub array_top: usize,
}

fn uniform(out: &mut Vec<f64>, from: f64, to: f64, cells: usize) {
    for c in 1..=cells {
        out.push(if c == cells { to } else { from + (to - from) * c as f64 / cells as f64 });
    }
}

/// Builds the y-grid for `ny` cells.
pub fn build_y_grid(design: &MotorDesign, ny: usize) -> Result<YGrid> {
    let open = !design.back_iron;
    let far_cells = if open { ny / 4 } else { 0 };
    let main = ny - far_cells;
    let top = design.array_top();
    let hc = design.coil_height;
    let half_gap = 0.5 * design.gap;
    let cells = |len: f64| ((main as f64 * len / top).round() as usize).max(1);
    let (c_coil, c_gap) = (cells(hc), cells(half_gap));
    let c_magnet = main.checked_sub(c_coil + 2 * c_gap).unwrap_or(0);
    if c_magnet < MIN_MAGNET_CELLS {
        return Err(Error::InvalidGrid(format!(
            "{ny} rows leave {c_magnet} cells across the magnets (need {MIN_MAGNET_CELLS})"
        )));
    }
    let mut y = vec![0.0];
    uniform(&mut y, 0.0, hc, c_coil);
    let coil_top = y.len() - 1;
    uniform(&mut y, hc, hc + half_gap, c_gap);
    let mid_gap = y.len() - 1;
    uniform(&mut y, hc + half_gap, design.effective_gap(), c_gap);
    let array_bottom = y.len() - 1;
    uniform(&mut y, design.effective_gap(), top, c_magnet);
    let array_top = y.len() - 1;
    if far_cells > 0 {
        let span = 3.0 * design.lambda;
        let first = design.pm_height / c_magnet as f64;
        let n = far_cells as f64;
        if span / n <= first {
            uniform(&mut y, top, top + span, far_cells);
        } else {
            // first spacing of y = T + L(e^{βt} − 1)/(e^β − 1) matches the magnet spacing
            let spacing = |beta: f64| span * (beta / n).exp_m1() / beta.exp_m1();
            let (mut lo, mut hi) = (1e-9, 1.0);
            while spacing(hi) > first {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if spacing(mid) > first {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let beta = 0.5 * (lo + hi);
            for c in 1..=far_cells {
                let t = c as f64 / n;
                y.push(if c == far_cells { top + span } else { top + span * (beta * t).exp_m1() / beta.exp_m1() });
            }
        }
    }
    Ok(YGrid { y, coil_top, mid_gap, array_bottom, array_top })
}

/// A solved potential on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub rows: YGrid,
    pub topology: Topology,
    /// ψ at node (i, j) stored at `j * nx + i`, j = 0..=ny.
    pub psi: Vec<f64>,
    /// (iteration, relative residual) after each solve pass.
    pub residual_log: Vec<(usize, f64)>,
    mx_mean: Vec<f64>,
    my_hat: Vec<f64>,
}

struct Operator {
    nx: usize,
    dx: f64,
    /// Dual-cell height Δ_j, lower/upper spacings, hat magnet weight, magnet fraction above.
    delta: Vec<f64>,
    h_lo: Vec<f64>,
    h_hi: Vec<f64>,
    w: Vec<f64>,
    frac_hi: Vec<f64>,
}

impl Operator {
    fn new(y: &[f64], nx: usize, dx: f64, y_lo: f64, y_hi: f64) -> Self {
        let n = y.len();
        let mut op = Operator {
            nx,
            dx,
            delta: vec![0.0; n],
            h_lo: vec![0.0; n],
            h_hi: vec![0.0; n],
            w: vec![0.0; n],
            frac_hi: vec![0.0; n],
        };
        let inside = |a: f64, b: f64| {
            let mid = 0.5 * (a + b);
            mid > y_lo && mid < y_hi
        };
        for j in 0..n {
            if j > 0 {
                op.h_lo[j] = y[j] - y[j - 1];
                if inside(y[j - 1], y[j]) {
                    op.w[j] += 0.5 * op.h_lo[j];
                }
            }
            if j + 1 < n {
                op.h_hi[j] = y[j + 1] - y[j];
                if inside(y[j], y[j + 1]) {
                    op.w[j] += 0.5 * op.h_hi[j];
                    op.frac_hi[j] = 1.0;
                }
            }
            op.delta[j] = 0.5 * (op.h_lo[j] + op.h_hi[j]);
        }
        op
    }

    fn rows(&self) -> usize {
        self.delta.len()
    }

    /// (L ψ) at interior rows; boundary rows left at zero.
    fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut out = vec![0.0; psi.len()];
        for j in 1..self.rows() - 1 {
            for i in 0..nx {
                let c = psi[j * nx + i];
                let e = psi[j * nx + (i + 1) % nx];
                let wv = psi[j * nx + (i + nx - 1) % nx];
                let up = psi[(j + 1) * nx + i];
                let dn = psi[(j - 1) * nx + i];
                out[j * nx + i] = -self.delta[j] * (e - 2.0 * c + wv) / self.dx
                    - self.dx * ((up - c) / self.h_hi[j] - (c - dn) / self.h_lo[j]);
            }
        }
        out
    }

    /// Exact solve of L ψ = s with ψ = 0 on the first and last rows.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let rows = self.rows();
        let interior = rows - 2;
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(nx);
        let inv = planner.plan_fft_inverse(nx);
        // spectra[j][m] for interior rows
        let mut spectra: Vec<Vec<Complex64>> = (1..rows - 1)
            .map(|j| rhs[j * nx..(j + 1) * nx].iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        for row in spectra.iter_mut() {
            fwd.process(row);
        }
        let modes: Vec<Vec<Complex64>> = (0..nx)
            .into_par_iter()
            .map(|m| {
                let eig = 4.0 * (PI * m as f64 / nx as f64).sin().powi(2);
                let mut lower = vec![0.0; interior];
                let mut diag = vec![0.0; interior];
                let mut upper = vec![0.0; interior];
                for k in 0..interior {
                    let j = k + 1;
                    lower[k] = -self.dx / self.h_lo[j];
                    upper[k] = -self.dx / self.h_hi[j];
                    diag[k] = self.delta[j] / self.dx * eig + self.dx * (1.0 / self.h_lo[j] + 1.0 / self.h_hi[j]);
                }
                let mut re: Vec<f64> = spectra.iter().map(|r| r[m].re).collect();
                let mut im: Vec<f64> = spectra.iter().map(|r| r[m].im).collect();
                solve_tridiagonal(&lower, &diag, &upper, &mut re);
                solve_tridiagonal(&lower, &diag, &upper, &mut im);
                re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
            })
            .collect();
        let mut psi = vec![0.0; rows * nx];
        for k in 0..interior {
            let mut row: Vec<Complex64> = (0..nx).map(|m| modes[m][k]).collect();
            inv.process(&mut row);
            for i in 0..nx {
                psi[(k + 1) * nx + i] = row[i].re / nx as f64;
            }
        }
        psi
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Residual target relative to the source norm.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
const MAX_PASSES: usize = 8;

/// Solves for ψ with the given magnetization.
pub fn solve_scalar_poisson(design: &MotorDesign, magnetization: &PiecewiseMagnetization, spec: GridSpec) -> Result<FdGrid> {
    let GridSpec { nx, ny } = spec;
    if nx < 8 || nx % 2 != 0 {
        return Err(Error::InvalidGrid(format!("nx = {nx} must be even and at least 8")));
    }
    let rows = build_y_grid(design, ny)?;
    let ny = rows.y.len() - 1;
    let dx = design.lambda / nx as f64;
    let op = Operator::new(&rows.y, nx, dx, design.effective_gap(), design.array_top());

    let mx_mean: Vec<f64> = (0..nx)
        .map(|i| {
            let x0 = i as f64 * dx;
            magnetization.integrate_linear(x0, x0 + dx, 1.0, 0.0).0 / dx
        })
        .collect();
    let my_hat: Vec<f64> = (0..nx)
        .map(|i| {
            let x = i as f64 * dx;
            magnetization.integrate_linear(x - dx, x, 0.0, 1.0 / dx).1
                + magnetization.integrate_linear(x, x + dx, 1.0, -1.0 / dx).1
        })
        .collect();

    let mut source = vec![0.0; (ny + 1) * nx];
    for j in 1..ny {
        let df = op.frac_hi[j] - op.frac_hi[j - 1];
        for i in 0..nx {
            let dmx = mx_mean[i] - mx_mean[(i + nx - 1) % nx];
            source[j * nx + i] = -(op.w[j] * dmx + my_hat[i] * df);
        }
    }
    let scale = norm(&source);
    let topology = Topology::of(design);
    let mut psi = vec![0.0; source.len()];
    let mut residual_log = Vec::new();
    if scale > 0.0 {
        let mut residual = source.clone();
        for pass in 1..=MAX_PASSES {
            let correction = op.solve(&residual);
            for (p, c) in psi.iter_mut().zip(&correction) {
                *p += c;
            }
            let applied = op.apply(&psi);
            residual = source.iter().zip(&applied).map(|(s, a)| s - a).collect();
            let rel = norm(&residual) / scale;
            residual_log.push((pass, rel));
            if rel <= RESIDUAL_TOLERANCE {
                break;
            }
        }
    } else {
        residual_log.push((0, 0.0));
    }
    let last = residual_log.last().map_or(0.0, |r| r.1);
    if last > RESIDUAL_TOLERANCE {
        return Err(Error::NoConvergence { residual: last });
    }
    Ok(FdGrid { nx, ny, dx, rows, topology, psi, residual_log, mx_mean, my_hat })
}

/// Solves with the design's own magnetization.
pub fn solve_design_fd(design: &MotorDesign, spec: GridSpec) -> Result<FdGrid> {
    solve_scalar_poisson(design, &PiecewiseMagnetization::new(design)?, spec)
}

/// Node fields, stored like [`FdGrid::psi`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdFields {
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
}

impl FdGrid {
    pub fn psi_at(&self, i: usize, j: usize) -> f64 {
        self.psi[j * self.nx + i % self.nx]
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    fn operator(&self, design: &MotorDesign) -> Operator {
        Operator::new(&self.rows.y, self.nx, self.dx, design.effective_gap(), design.array_top())
    }

    /// Region tag of row `j`; interface rows belong to the lower region.
    pub fn region(&self, j: usize) -> Region {
        if j <= self.rows.array_bottom {
            Region::I
        } else if j <= self.rows.array_top {
            Region::II
        } else {
            Region::III
        }
    }

    /// ∂ψ/∂y at node (i, j), one-sided at the domain edges.
    fn dpsi_dy(&self, i: usize, j: usize) -> f64 {
        let y = &self.rows.y;
        let p = |j: usize| self.psi_at(i, j);
        if j == 0 || j == self.ny {
            let (a, b, c) = if j == 0 { (0, 1, 2) } else { (self.ny, self.ny - 1, self.ny - 2) };
            let h1 = y[b] - y[a];
            let h2 = y[c] - y[b];
            let d = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * p(a) + (h1 + h2) / (h1 * h2) * p(b)
                - h1 / (h2 * (h1 + h2)) * p(c);
            return d;
        }
        let hl = y[j] - y[j - 1];
        let hh = y[j + 1] - y[j];
        (hl * hl * p(j + 1) - hh * hh * p(j - 1) + (hh * hh - hl * hl) * p(j)) / (hl * hh * (hl + hh))
    }

    /// H = −∇ψ by central differences and B = μ0(H + M) with the
    /// cell-averaged magnetization.
    pub fn fields(&self, design: &MotorDesign) -> FdFields {
        let nx = self.nx;
        let op = self.operator(design);
        let n = self.psi.len();
        let mut f = FdFields { hx: vec![0.0; n], hy: vec![0.0; n], bx: vec![0.0; n], by: vec![0.0; n] };
        for j in 0..=self.ny {
            let fill = if op.delta[j] > 0.0 { op.w[j] / op.delta[j] } else { 0.0 };
            for i in 0..nx {
                let k = j * nx + i;
                let hx = -(self.psi_at(i + 1, j) - self.psi_at(i + nx - 1, j)) / (2.0 * self.dx);
                let hy = -self.dpsi_dy(i, j);
                let mx = fill * 0.5 * (self.mx_mean[i] + self.mx_mean[(i + nx - 1) % nx]);
                let my = fill * self.my_hat[i] / self.dx;
                f.hx[k] = hx;
                f.hy[k] = hy;
                f.bx[k] = MU0 * (hx + mx);
                f.by[k] = MU0 * (hy + my);
            }
        }
        f
    }

    /// Node samples in the field-map schema.
    pub fn samples(&self, design: &MotorDesign) -> Vec<FieldSample> {
        let f = self.fields(design);
        let mut out = Vec::with_capacity(self.psi.len());
        for j in 0..=self.ny {
            for i in 0..self.nx {
                let k = j * self.nx + i;
                out.push(FieldSample {
                    x: self.x(i),
                    y: self.rows.y[j],
                    region: self.region(j),
                    bx: f.bx[k],
                    by: f.by[k],
                    hx: f.hx[k],
                    hy: f.hy[k],
                    psi: Some(self.psi[k]),
                    az: None,
                });
            }
        }
        out
    }

    /// Largest |ψ_{nx−i} + ψ_i| relative to max |ψ|.
    pub fn odd_symmetry_error(&self) -> f64 {
        let peak = self.psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for j in 0..=self.ny {
            for i in 0..self.nx {
                worst = worst.max((self.psi_at(self.nx - i, j) + self.psi_at(i, j)).abs());
            }
        }
        worst / peak
    }

    /// Net discrete flux out of the block of dual cells i ∈ [i0, i1),
    /// j ∈ [j0, j1), relative to the sum of absolute boundary fluxes.
    pub fn flux_imbalance(&self, design: &MotorDesign, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        let op = self.operator(design);
        let nx = self.nx;
        let fx = |i: usize, j: usize| {
            // face between i and i+1
            let a = self.psi_at(i, j);
            let b = self.psi_at(i + 1, j);
            -op.delta[j] * (b - a) / self.dx + op.w[j] * self.mx_mean[i % nx]
        };
        let fy = |i: usize, j: usize| {
            // face between j and j+1
            let a = self.psi_at(i, j);
            let b = self.psi_at(i, j + 1);
            -self.dx * (b - a) / op.h_hi[j] + self.my_hat[i % nx] * op.frac_hi[j]
        };
        let (mut net, mut total) = (0.0, 0.0);
        for j in j0..j1 {
            let east = fx(i1 - 1, j);
            let west = fx(i0 + nx - 1, j);
            net += east - west;
            total += east.abs() + west.abs();
        }
        for i in i0..i1 {
            let north = fy(i, j1 - 1);
            let south = fy(i, j0 - 1);
            net += north - south;
            total += north.abs() + south.abs();
        }
        if total == 0.0 {
            0.0
        } else {
            net.abs() / total
        }
    }

    /// Max |ψ_i − (−∫₀^{x_i} H_x dx)| along row `j` relative to max |ψ| on it.
    pub fn reconstruction_error(&self, design: &MotorDesign, j: usize) -> f64 {
        let f = self.fields(design);
        let nx = self.nx;
        let row = &f.hx[j * nx..(j + 1) * nx];
        let peak = (0..nx).map(|i| self.psi_at(i, j).abs()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut integral = 0.0;
        let mut worst = (self.psi_at(0, j)).abs();
        for i in 1..nx {
            integral -= 0.5 * (row[i - 1] + row[i]) * self.dx;
            worst = worst.max((integral - self.psi_at(i, j)).abs());
        }
        worst / peak
    }
}

/// Mid-airgap B_y of the grid against an analytic solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineComparison {
    pub y: f64,
    pub x: Vec<f64>,
    pub fd: Vec<f64>,
    pub analytic: Vec<f64>,
    /// max |fd − analytic| / max |analytic|.
    pub max_relative_error: f64,
    pub max_abs_error: f64,
}

pub fn mid_gap_comparison(grid: &FdGrid, design: &MotorDesign, coeffs: &FieldCoefficients) -> Result<LineComparison> {
    let j = grid.rows.mid_gap;
    let y = grid.rows.y[j];
    let f = grid.fields(design);
    let x: Vec<f64> = (0..grid.nx).map(|i| grid.x(i)).collect();
    let fd = f.by[j * grid.nx..(j + 1) * grid.nx].to_vec();
    let analytic = x.iter().map(|&x| evaluate_fields(coeffs, x, y).map(|s| s.by)).collect::<Result<Vec<_>>>()?;
    let peak = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_abs_error = fd.iter().zip(&analytic).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let max_relative_error = if peak == 0.0 { max_abs_error } else { max_abs_error / peak };
    Ok(LineComparison { y, x, fd, analytic, max_relative_error, max_abs_error })
}

/// Exact integral over [a, b] of the periodic piecewise-linear interpolant
/// of `values` sampled at spacing `dx`.
fn integrate_periodic_linear(values: &[f64], dx: f64, a: f64, b: f64) -> f64 {
    let n = values.len() as i64;
    let at = |k: i64| values[k.rem_euclid(n) as usize];
    let interp = |x: f64| {
        let k = (x / dx).floor();
        let t = x / dx - k;
        at(k as i64) * (1.0 - t) + at(k as i64 + 1) * t
    };
    let mut total = 0.0;
    let mut x = a;
    while x < b {
        let next = (((x / dx).floor() + 1.0) * dx).min(b);
        let next = if next <= x { b.min(x + dx) } else { next };
        total += 0.5 * (interp(x) + interp(next)) * (next - x);
        x = next;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceCheck {
    pub fd_force: f64,
    pub analytic_force: f64,
    /// |fd − analytic| / |analytic| (absolute when the analytic force is 0).
    pub gap: f64,
}

/// Lorentz force from the grid's B_y integrated over the coil sections,
/// against the closed-form thrust at the same operating point.
pub fn fd_force_check(design: &MotorDesign, grid: &FdGrid, op: OperatingPoint) -> Result<ForceCheck> {
    let f = grid.fields(design);
    let nx = grid.nx;
    let y = &grid.rows.y;
    let shift = op.velocity(design) * op.t + op.x0;
    let mut fd_force = 0.0;
    for slot in 1..=design.phases {
        let (xa, xb) = coil_span(design, slot);
        let mut integral = 0.0;
        for j in 0..grid.rows.coil_top {
            let lo = integrate_periodic_linear(&f.by[j * nx..(j + 1) * nx], grid.dx, xa - shift, xb - shift);
            let hi = integrate_periodic_linear(&f.by[(j + 1) * nx..(j + 2) * nx], grid.dx, xa - shift, xb - shift);
            integral += 0.5 * (lo + hi) * (y[j + 1] - y[j]);
        }
        fd_force += 4.0 * design.depth * phase_current_density(design, slot, op.t)? * integral;
    }
    let coeffs = solve_design(design, HarmonicTruncation::default())?;
    let analytic_force = thrust(design, &coeffs, op, &[op.t])?.total[0];
    let diff = (fd_force - analytic_force).abs();
    let gap = if analytic_force == 0.0 { diff } else { diff / analytic_force.abs() };
    Ok(ForceCheck { fd_force, analytic_force, gap })
}
