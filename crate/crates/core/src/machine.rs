//! Thrust, normal force, flux linkage and back-EMF of the double-sided
//! machine, all in closed form from the region-I coefficients.
//!
//! Coil side `m` (1-based) of the first pole pitch spans
//! [(m − 3/2)w, (m − 1/2)w] with w = λ/(2N_ph). Per harmonic,
//!
//!   G_n = −8 μ0 L A₁ sinh(a h_c) / a
//!
//! gives F_m = J_m Σ G_n [cos θ₁ − cos θ₂] with
//! θ₁,₂ = n(m − 3/2, m − 1/2)π/N_ph − a(ut + x₀).

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{phase_current_density, slot_phase, HarmonicTruncation, MotorDesign, OperatingPoint};
use crate::error::{Error, Result};
use crate::field::{solve_coefficients, FieldCoefficients, Topology, A1};
use crate::source::{fourier_coefficients, HarmonicSource};
use crate::MU0;

/// x-extent of coil side `slot` (1-based) in the stator frame.
pub fn coil_span(design: &MotorDesign, slot: usize) -> (f64, f64) {
    let w = design.slot_width();
    ((slot as f64 - 1.5) * w, (slot as f64 - 0.5) * w)
}

/// Per-harmonic thrust constants G_n, paired with a = nk.
fn thrust_constants(design: &MotorDesign, coeffs: &FieldCoefficients) -> Vec<(f64, f64)> {
    let hc = design.coil_height;
    let g = coeffs.stack.effective_gap - hc;
    coeffs
        .harmonics
        .iter()
        .map(|h| {
            let a = h.n as f64 * coeffs.stack.wave_number;
            // A₁ sinh(a h_c) = Â₁ (e^{−a g} − e^{−a(2h_c + g)}) / 2
            let a1_sinh = 0.5 * h.scaled[A1] * ((-a * g).exp() - (-a * (2.0 * hc + g)).exp());
            (a, -8.0 * MU0 * design.depth * a1_sinh / a)
        })
        .collect()
}

fn slot_angles(design: &MotorDesign, slot: usize, n: usize) -> (f64, f64) {
    let base = n as f64 * PI / design.phases as f64;
    (base * (slot as f64 - 1.5), base * (slot as f64 - 0.5))
}

/// Σ G_n [cos θ₁ − cos θ₂] and Σ (G_n/a)[sin θ₁ − sin θ₂] for one slot.
fn slot_sums(design: &MotorDesign, consts: &[(f64, f64)], slot: usize, shift: f64) -> (f64, f64) {
    let (mut c, mut s) = (0.0, 0.0);
    for (i, &(a, g)) in consts.iter().enumerate() {
        let (t1, t2) = slot_angles(design, slot, 2 * i + 1);
        let phase = a * shift;
        let (s1, c1) = (t1 - phase).sin_cos();
        let (s2, c2) = (t2 - phase).sin_cos();
        c += g * (c1 - c2);
        s += g / a * (s1 - s2);
    }
    (c, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceResult {
    pub t: Vec<f64>,
    /// `phase[m][i]`: force of coil side m + 1 at `t[i]`, N.
    pub phase: Vec<Vec<f64>>,
    pub total: Vec<f64>,
    /// Shear stress F_total/(λL), N/m².
    pub shear: Vec<f64>,
    pub mean_force: f64,
    pub ripple_pct: f64,
}

/// Thrust series at absolute times `ts`; `op` supplies x₀ and the velocity.
pub fn thrust(design: &MotorDesign, coeffs: &FieldCoefficients, op: OperatingPoint, ts: &[f64]) -> Result<ForceResult> {
    let consts = thrust_constants(design, coeffs);
    let u = op.velocity(design);
    let mut phase = vec![Vec::with_capacity(ts.len()); design.phases];
    let mut total = Vec::with_capacity(ts.len());
    for &t in ts {
        let mut sum = 0.0;
        for (m, series) in phase.iter_mut().enumerate() {
            let j = phase_current_density(design, m + 1, t)?;
            let f = j * slot_sums(design, &consts, m + 1, u * t + op.x0).0;
            series.push(f);
            sum += f;
        }
        total.push(sum);
    }
    let area = design.lambda * design.depth;
    let shear = total.iter().map(|f| f / area).collect();
    let mean_force = if total.is_empty() { 0.0 } else { total.iter().sum::<f64>() / total.len() as f64 };
    let ripple_pct = ripple(&total, mean_force);
    Ok(ForceResult { t: ts.to_vec(), phase, total, shear, mean_force, ripple_pct })
}

fn ripple(series: &[f64], mean: f64) -> f64 {
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    if mean == 0.0 || series.is_empty() {
        0.0
    } else {
        100.0 * (max - min) / mean
    }
}

/// `count` uniform samples over one electrical period, endpoint excluded.
pub fn period_grid(design: &MotorDesign, count: usize) -> Vec<f64> {
    let period = 1.0 / design.frequency;
    (0..count).map(|i| period * i as f64 / count as f64).collect()
}

/// Time-averaged thrust as a phasor: mean(x₀) = |Z| cos(kx₀ − arg Z).
/// Only the fundamental survives the time average at synchronous speed.
fn mean_phasor(design: &MotorDesign, coeffs: &FieldCoefficients) -> Result<(f64, f64)> {
    let consts = thrust_constants(design, coeffs);
    let Some(&(_, g1)) = consts.first() else { return Ok((0.0, 0.0)) };
    let (mut re, mut im) = (0.0, 0.0);
    for slot in 1..=design.phases {
        let (index, sign) = slot_phase(design.phases, slot)?;
        let phi = design.phi0 - index as f64 * 2.0 * PI / design.phases as f64;
        let (t1, t2) = slot_angles(design, slot, 1);
        let amp = 0.5 * sign * design.j_max * g1;
        re += amp * ((phi + t1).cos() - (phi + t2).cos());
        im += amp * ((phi + t1).sin() - (phi + t2).sin());
    }
    Ok((re, im))
}

/// Mean thrust over one period at rotor offset `x0`, synchronous speed.
pub fn mean_force(design: &MotorDesign, coeffs: &FieldCoefficients, x0: f64) -> Result<f64> {
    let (re, im) = mean_phasor(design, coeffs)?;
    let kx = design.wave_number() * x0;
    Ok(re * kx.cos() + im * kx.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakForce {
    /// Largest mean thrust over x₀, N.
    pub force: f64,
    /// kx₀ at the peak, rad in [0, 2π).
    pub angle: f64,
    /// x₀ at the peak, m in [0, λ).
    pub x0: f64,
}

/// Peak of the force-angle characteristic.
pub fn peak_force(design: &MotorDesign, coeffs: &FieldCoefficients) -> Result<PeakForce> {
    let (re, im) = mean_phasor(design, coeffs)?;
    let angle = im.atan2(re).rem_euclid(2.0 * PI);
    Ok(PeakForce { force: re.hypot(im), angle, x0: angle / design.wave_number() })
}

/// Mean thrust at `count` rotor offsets uniformly covering one wavelength.
pub fn force_angle_curve(design: &MotorDesign, coeffs: &FieldCoefficients, count: usize) -> Result<Vec<(f64, f64)>> {
    (0..count)
        .map(|i| {
            let x0 = design.lambda * i as f64 / count as f64;
            Ok((x0, mean_force(design, coeffs, x0)?))
        })
        .collect()
}

/// Ripple on a `samples`-point period grid at the peak-force offset.
pub fn ripple_at_peak(design: &MotorDesign, coeffs: &FieldCoefficients, samples: usize) -> Result<f64> {
    let peak = peak_force(design, coeffs)?;
    let op = OperatingPoint::at(0.0, peak.x0);
    Ok(thrust(design, coeffs, op, &period_grid(design, samples))?.ripple_pct)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalForceResult {
    pub x: Vec<f64>,
    /// Normal stress on the top stator surface, N/m².
    pub t_yy: Vec<f64>,
    /// Attraction on the top and bottom stators, N.
    pub f_y_top: f64,
    pub f_y_bottom: f64,
    /// Net pull toward the top stator, N.
    pub f_y_total: f64,
}

/// Attraction per stator side, μ0 L λ Σ (a A₁)².
pub fn attraction(design: &MotorDesign, coeffs: &FieldCoefficients) -> f64 {
    let ge = coeffs.stack.effective_gap;
    let sum: f64 = coeffs
        .harmonics
        .iter()
        .map(|h| {
            let a = h.n as f64 * coeffs.stack.wave_number;
            let v = a * h.scaled[A1] * (-a * ge).exp();
            v * v
        })
        .sum();
    MU0 * design.depth * design.lambda * sum
}

/// T_yy = B_y²/(2μ0) on the stator surface at `xs`.
pub fn normal_stress(coeffs: &FieldCoefficients, xs: &[f64]) -> Vec<f64> {
    let ge = coeffs.stack.effective_gap;
    xs.iter()
        .map(|&x| {
            let by: f64 = coeffs
                .harmonics
                .iter()
                .map(|h| {
                    let a = h.n as f64 * coeffs.stack.wave_number;
                    -2.0 * MU0 * a * h.scaled[A1] * (-a * ge).exp() * (a * x).sin()
                })
                .sum();
            by * by / (2.0 * MU0)
        })
        .collect()
}

fn profile_grid(design: &MotorDesign, count: usize) -> Vec<f64> {
    (0..count).map(|i| design.lambda * i as f64 / count as f64).collect()
}

/// Normal force of a centered mover: equal pull on both sides.
pub fn attraction_force(design: &MotorDesign, coeffs: &FieldCoefficients) -> NormalForceResult {
    let f = attraction(design, coeffs);
    let x = profile_grid(design, 256);
    let t_yy = normal_stress(coeffs, &x);
    NormalForceResult { x, t_yy, f_y_top: f, f_y_bottom: f, f_y_total: 0.0 }
}

fn offset_design(design: &MotorDesign, gap: f64) -> Result<MotorDesign> {
    design.with(|p| {
        p.gap = gap;
        p.gap_offset = 0.0;
    })
}

/// Net normal force with the mover displaced `g0` toward the top stator.
pub fn misalignment_force(
    design: &MotorDesign,
    source: &HarmonicSource,
    trunc: HarmonicTruncation,
    g0: f64,
) -> Result<NormalForceResult> {
    if !(g0 >= 0.0 && g0 < design.gap) {
        return Err(Error::OffsetExceedsGap { offset: g0, gap: design.gap });
    }
    let top = offset_design(design, design.gap - g0)?;
    let bottom = offset_design(design, design.gap + g0)?;
    let c_top = solve_coefficients(&top, source, trunc)?;
    let c_bottom = solve_coefficients(&bottom, source, trunc)?;
    let f_y_top = attraction(&top, &c_top);
    let f_y_bottom = attraction(&bottom, &c_bottom);
    let x = profile_grid(design, 256);
    let t_yy = normal_stress(&c_top, &x);
    Ok(NormalForceResult { x, t_yy, f_y_top, f_y_bottom, f_y_total: f_y_top - f_y_bottom })
}

/// d(F_y,total)/dg₀ at g₀ = 0 from the analytic gap derivative of A₁.
pub fn misalignment_stiffness(design: &MotorDesign, coeffs: &FieldCoefficients) -> f64 {
    let ge = coeffs.stack.effective_gap;
    let top = coeffs.stack.array_top;
    let sum: f64 = coeffs
        .harmonics
        .iter()
        .map(|h| {
            let a = h.n as f64 * coeffs.stack.wave_number;
            let a1 = h.scaled[A1] * (-a * ge).exp();
            // dA₁/dg_e = −a·A₁ (open) or −a·coth(aT)·A₁ (back-iron)
            let rate = match coeffs.topology {
                Topology::NoBackIron => a,
                Topology::BackIron => a / (a * top).tanh(),
            };
            a * a * a1 * a1 * rate
        })
        .sum();
    // F_net = F(g − g₀) − F(g + g₀) ⇒ dF_net/dg₀ = −2 dF/dg
    4.0 * MU0 * design.depth * design.lambda * sum
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmfResult {
    pub t: Vec<f64>,
    /// Coil-averaged flux per slot, Wb.
    pub flux_avg: Vec<Vec<f64>>,
    /// N·φ_avg, Wb-turns.
    pub linkage: Vec<Vec<f64>>,
    /// Back-EMF per slot, V.
    pub emf: Vec<Vec<f64>>,
}

/// Flux linkage and back-EMF at absolute times `ts`.
pub fn back_emf(design: &MotorDesign, coeffs: &FieldCoefficients, op: OperatingPoint, ts: &[f64]) -> EmfResult {
    let consts = thrust_constants(design, coeffs);
    let u = op.velocity(design);
    let area = design.coil_height * design.slot_width();
    let turns = design.turns as f64;
    let mut flux_avg = vec![Vec::with_capacity(ts.len()); design.phases];
    let mut linkage = vec![Vec::with_capacity(ts.len()); design.phases];
    let mut emf = vec![Vec::with_capacity(ts.len()); design.phases];
    for &t in ts {
        for m in 0..design.phases {
            let (c, s) = slot_sums(design, &consts, m + 1, u * t + op.x0);
            let phi = -s / area;
            flux_avg[m].push(phi);
            linkage[m].push(turns * phi);
            emf[m].push(turns * u * c / area);
        }
    }
    EmfResult { t: ts.to_vec(), flux_avg, linkage, emf }
}

/// Total harmonic distortion of the phase back-EMF, from the harmonic
/// amplitudes 2|G_n sin(nπ/(2N_ph))|.
pub fn emf_thd(design: &MotorDesign, coeffs: &FieldCoefficients) -> f64 {
    let consts = thrust_constants(design, coeffs);
    let amp = |i: usize, g: f64| {
        let n = (2 * i + 1) as f64;
        2.0 * (g * (n * PI / (2.0 * design.phases as f64)).sin()).abs()
    };
    let Some(&(_, g1)) = consts.first() else { return 0.0 };
    let fundamental = amp(0, g1);
    if fundamental == 0.0 {
        return 0.0;
    }
    let rest: f64 = consts.iter().enumerate().skip(1).map(|(i, &(_, g))| amp(i, g).powi(2)).sum();
    rest.sqrt() / fundamental
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBalance {
    /// Σ E_m I_m / u at each sample, N.
    pub converted: Vec<f64>,
    pub thrust: Vec<f64>,
    /// max |converted − thrust| / max |thrust|.
    pub max_relative_deviation: f64,
}

/// Compares the converted-power force with the Lorentz thrust.
pub fn power_balance(
    design: &MotorDesign,
    coeffs: &FieldCoefficients,
    op: OperatingPoint,
    ts: &[f64],
) -> Result<PowerBalance> {
    let u = op.velocity(design);
    if u == 0.0 {
        return Err(Error::ZeroVelocity);
    }
    let force = thrust(design, coeffs, op, ts)?;
    let emf = back_emf(design, coeffs, op, ts);
    let per_turn_area = design.coil_height * design.slot_width() / design.turns as f64;
    let mut converted = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let mut p = 0.0;
        for m in 0..design.phases {
            let current = per_turn_area * phase_current_density(design, m + 1, t)?;
            p += emf.emf[m][i] * current;
        }
        converted.push(p / u);
    }
    let scale = force.total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = converted.iter().zip(&force.total).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let max_relative_deviation = if scale == 0.0 { worst } else { worst / scale };
    Ok(PowerBalance { converted, thrust: force.total, max_relative_deviation })
}

/// Solves the Laplace model for `design` with its own source.
pub fn solve_design(design: &MotorDesign, trunc: HarmonicTruncation) -> Result<FieldCoefficients> {
    let source = fourier_coefficients(design, trunc);
    solve_coefficients(design, &source, trunc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::evaluate_fields;

    fn solved(nm: usize, phases: usize, back_iron: bool) -> (MotorDesign, FieldCoefficients) {
        let d = MotorDesign::reference(nm, phases, back_iron).unwrap();
        let c = solve_design(&d, HarmonicTruncation::default()).unwrap();
        (d, c)
    }

    #[test]
    fn zero_current_gives_zero_force() {
        let d = MotorDesign::reference(3, 3, false).unwrap().with(|p| p.j_max = 0.0).unwrap();
        let c = solve_design(&d, HarmonicTruncation::default()).unwrap();
        let f = thrust(&d, &c, OperatingPoint::at(0.0, 0.003), &period_grid(&d, 72)).unwrap();
        assert!(f.total.iter().all(|&v| v == 0.0));
        assert_eq!(f.ripple_pct, 0.0);
    }

    #[test]
    fn totals_are_phase_sums_and_periodic() {
        let (d, c) = solved(4, 5, true);
        let ts = period_grid(&d, 50);
        let op = OperatingPoint::at(0.0, 0.0071);
        let f = thrust(&d, &c, op, &ts).unwrap();
        let later: Vec<f64> = ts.iter().map(|t| t + 1.0 / d.frequency).collect();
        let g = thrust(&d, &c, op, &later).unwrap();
        for i in 0..ts.len() {
            let s: f64 = f.phase.iter().map(|p| p[i]).sum();
            assert!((s - f.total[i]).abs() <= 1e-12 * f.total[i].abs().max(1.0));
            assert!((f.total[i] - g.total[i]).abs() <= 1e-10 * f.total[i].abs().max(1.0));
            assert!((f.shear[i] * d.lambda * d.depth - f.total[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn analytic_mean_matches_sampled_average() {
        for (nm, ph, bi) in [(2, 3, false), (5, 5, true), (3, 3, true)] {
            let (d, c) = solved(nm, ph, bi);
            let ts = period_grid(&d, 720);
            for x0 in [0.0, 0.0042, 0.019] {
                let f = thrust(&d, &c, OperatingPoint::at(0.0, x0), &ts).unwrap();
                let m = mean_force(&d, &c, x0).unwrap();
                let peak = peak_force(&d, &c).unwrap().force;
                assert!((f.mean_force - m).abs() < 1e-10 * peak);
            }
            let peak = peak_force(&d, &c).unwrap();
            let curve = force_angle_curve(&d, &c, 360).unwrap();
            let best = curve.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            assert!(best <= peak.force * (1.0 + 1e-12));
            assert!(best >= peak.force * (1.0 - 2e-4));
            assert!((mean_force(&d, &c, peak.x0).unwrap() - peak.force).abs() < 1e-10 * peak.force);
        }
    }

    #[test]
    fn lorentz_force_by_quadrature() {
        // trapezoid quadrature of J·B_y over the coil cross-sections
        let (d, c) = solved(5, 5, false);
        let op = OperatingPoint::at(1.3e-3, 0.0057);
        let (nx, ny) = (512, 64);
        let mut total = 0.0;
        for slot in 1..=d.phases {
            let (xa, xb) = coil_span(&d, slot);
            let shift = d.sync_velocity() * op.t + op.x0;
            let mut integral = 0.0;
            for j in 0..=ny {
                let y = d.coil_height * j as f64 / ny as f64;
                let wy = if j == 0 || j == ny { 0.5 } else { 1.0 };
                for i in 0..=nx {
                    let x = xa + (xb - xa) * i as f64 / nx as f64;
                    let wx = if i == 0 || i == nx { 0.5 } else { 1.0 };
                    integral += wx * wy * evaluate_fields(&c, x - shift, y).unwrap().by;
                }
            }
            integral *= (xb - xa) / nx as f64 * d.coil_height / ny as f64;
            total += 4.0 * d.depth * phase_current_density(&d, slot, op.t).unwrap() * integral;
        }
        let f = thrust(&d, &c, op, &[op.t]).unwrap().total[0];
        assert!((total - f).abs() < 1e-3 * f.abs(), "{total} vs {f}");
    }

    #[test]
    fn force_is_linear_in_sources_and_current() {
        let (d, c) = solved(3, 3, false);
        let ts = period_grid(&d, 36);
        let op = OperatingPoint::at(0.0, 0.002);
        let base = thrust(&d, &c, op, &ts).unwrap();
        let d2 = d.with(|p| {
            p.j_max *= 2.5;
            p.remanence *= 0.7;
        })
        .unwrap();
        let c2 = solve_design(&d2, HarmonicTruncation::default()).unwrap();
        let scaled = thrust(&d2, &c2, op, &ts).unwrap();
        let peak = base.total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in base.total.iter().zip(&scaled.total) {
            assert!((p * 1.75 - q).abs() <= 1e-10 * peak * 1.75);
        }
    }

    #[test]
    fn attraction_matches_trapezoid() {
        for bi in [false, true] {
            let (d, c) = solved(2, 3, bi);
            let n = 8192;
            let xs: Vec<f64> = (0..n).map(|i| d.lambda * i as f64 / n as f64).collect();
            let mut sum = 0.0;
            for &x in &xs {
                let by = evaluate_fields(&c, x, 0.0).unwrap().by;
                sum += by * by / (2.0 * MU0);
            }
            let quad = sum * d.lambda / n as f64 * d.depth;
            let f = attraction(&d, &c);
            assert!((quad - f).abs() < 1e-6 * f);
            let r = attraction_force(&d, &c);
            assert_eq!(r.f_y_total, 0.0);
            assert!(r.t_yy.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn misalignment_pulls_toward_smaller_gap() {
        let d = MotorDesign::reference(4, 3, false).unwrap();
        let t = HarmonicTruncation::default();
        let src = fourier_coefficients(&d, t);
        assert_eq!(misalignment_force(&d, &src, t, 0.0).unwrap().f_y_total, 0.0);
        let mut last = 0.0;
        for g0 in [1e-4, 2e-4, 3e-4] {
            let r = misalignment_force(&d, &src, t, g0).unwrap();
            assert!(r.f_y_total > last);
            last = r.f_y_total;
        }
        assert!(matches!(misalignment_force(&d, &src, t, d.gap), Err(Error::OffsetExceedsGap { .. })));
    }

    #[test]
    fn misalignment_stiffness_matches_finite_difference() {
        for bi in [false, true] {
            let (d, c) = solved(3, 3, bi);
            let t = HarmonicTruncation::default();
            let src = fourier_coefficients(&d, t);
            let h = 1e-7;
            let fd = misalignment_force(&d, &src, t, h).unwrap().f_y_total / h;
            // F_net is odd in g₀, so the one-sided quotient is a central difference
            let k = misalignment_stiffness(&d, &c);
            assert!((fd - k).abs() < 1e-5 * k, "{fd} vs {k}");
        }
    }

    #[test]
    fn emf_is_derivative_of_linkage() {
        let (d, c) = solved(5, 5, false);
        let ts = period_grid(&d, 720);
        let op = OperatingPoint::at(0.0, 0.004);
        let e = back_emf(&d, &c, op, &ts);
        let dt = 1e-7;
        let plus: Vec<f64> = ts.iter().map(|t| t + dt).collect();
        let minus: Vec<f64> = ts.iter().map(|t| t - dt).collect();
        let ep = back_emf(&d, &c, op, &plus);
        let em = back_emf(&d, &c, op, &minus);
        for m in 0..d.phases {
            let peak = e.emf[m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for i in 0..ts.len() {
                let num = (ep.linkage[m][i] - em.linkage[m][i]) / (2.0 * dt);
                assert!((num - e.emf[m][i]).abs() <= 1e-4 * peak);
            }
        }
        let still = back_emf(&d, &c, OperatingPoint { u_override: Some(0.0), ..op }, &ts);
        assert!(still.emf.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn power_balance_holds() {
        for (nm, ph, bi) in [(2, 3, false), (5, 5, true)] {
            let (d, c) = solved(nm, ph, bi);
            let ts = period_grid(&d, 720);
            let op = OperatingPoint::at(0.0, 0.0033);
            let pb = power_balance(&d, &c, op, &ts).unwrap();
            assert!(pb.max_relative_deviation <= 1e-9);
            let d7 = d.with(|p| p.turns = 7).unwrap();
            let pb7 = power_balance(&d7, &c, op, &ts).unwrap();
            assert!(pb7.max_relative_deviation <= 1e-9);
        }
        let (d, c) = solved(2, 3, false);
        let op = OperatingPoint { u_override: Some(0.0), ..Default::default() };
        assert_eq!(power_balance(&d, &c, op, &[0.0]), Err(Error::ZeroVelocity));
    }

    #[test]
    fn emf_phase_shift_and_thd() {
        let (d, c) = solved(5, 3, false);
        let ts = period_grid(&d, 720);
        let e = back_emf(&d, &c, OperatingPoint::at(0.0, 0.0), &ts);
        // fundamental phasors of neighbouring slots differ by π/N_ph
        let phasor = |s: &[f64]| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in s.iter().enumerate() {
                let w = 2.0 * PI * i as f64 / s.len() as f64;
                re += v * w.cos();
                im += v * w.sin();
            }
            im.atan2(re)
        };
        let shift = (phasor(&e.emf[1]) - phasor(&e.emf[0])).rem_euclid(2.0 * PI);
        let expected = PI / d.phases as f64;
        assert!((shift - expected).abs() < 1e-9 || (shift - (2.0 * PI - expected)).abs() < 1e-9);
        let thd = emf_thd(&d, &c);
        assert!(thd > 0.0 && thd < 0.2);
    }
}
