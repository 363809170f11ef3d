//! Hybrid-source Laplace model: ψ = (A e^{ay} + B e^{−ay}) sin(ax) in each
//! region, horizontal magnetization as surface currents K_m and vertical
//! magnetization as surface charges σ_m on the array faces.

use super::{
    raw_system, row, solve_all, FieldCoefficients, FieldModel, HarmonicCoefficients, Interface,
    LinearSystem, Row, Stack, Topology, A1, A2, B1, B2, B3,
};
use crate::config::{HarmonicTruncation, MotorDesign};
use crate::error::Result;
use crate::source::{HarmonicSource, HarmonicTerm};
use crate::MU0;

use Interface::{Lower, Stator, Upper};

pub(crate) fn rows(t: HarmonicTerm, a: f64, topology: Topology) -> Vec<Row> {
    let s = t.sigma_n / (MU0 * a);
    let q = t.k_n / a;
    let mut rows = vec![
        // B_x = 0 on the stator iron
        row(Stator, &[(A1, 1.0, 1.0), (B1, 1.0, -1.0)], 0.0),
        // H_y jumps by σ_m/μ0 at the array bottom
        row(Lower, &[(A1, 1.0, 1.0), (B1, -1.0, -1.0), (A2, -1.0, 1.0), (B2, 1.0, -1.0)], s),
        // B_x jumps by μ0 K_m at the array bottom
        row(Lower, &[(A1, -1.0, 1.0), (B1, -1.0, -1.0), (A2, 1.0, 1.0), (B2, 1.0, -1.0)], q),
    ];
    match topology {
        Topology::NoBackIron => {
            rows.push(row(Upper, &[(A2, 1.0, 1.0), (B2, -1.0, -1.0), (B3, 1.0, -1.0)], -s));
            rows.push(row(Upper, &[(A2, -1.0, 1.0), (B2, -1.0, -1.0), (B3, 1.0, -1.0)], -q));
        }
        Topology::BackIron => {
            // H_x = 0 on the back-iron
            rows.push(row(Upper, &[(A2, -1.0, 1.0), (B2, -1.0, -1.0)], -q));
        }
    }
    rows
}

/// Unscaled 5×5 (open) or 4×4 (back-iron) system of harmonic `n`.
pub fn assemble_system(design: &MotorDesign, source: &HarmonicSource, n: usize) -> LinearSystem {
    raw_system(&Stack::of(design), Topology::of(design), source.term(n), rows)
}

/// Dense per-harmonic solve of the Laplace model.
pub fn solve_coefficients(
    design: &MotorDesign,
    source: &HarmonicSource,
    trunc: HarmonicTruncation,
) -> Result<FieldCoefficients> {
    solve_all(design, source, trunc, FieldModel::Laplace, rows, None)
}

/// Closed-form coefficients, written in scaled form so that only
/// non-positive exponents appear.
pub fn closed_form_coefficients(
    design: &MotorDesign,
    source: &HarmonicSource,
    trunc: HarmonicTruncation,
) -> FieldCoefficients {
    let stack = Stack::of(design);
    let topology = Topology::of(design);
    let (ge, hm, top) = (design.effective_gap(), design.pm_height, design.array_top());
    let terms = super::truncated(source, trunc);
    let harmonics = terms
        .iter()
        .map(|t| {
            let a = t.n as f64 * stack.wave_number;
            let s = t.sigma_n / (MU0 * a);
            let q = t.k_n / a;
            let e_ge = (-a * ge).exp();
            let e_top = (-a * top).exp();
            let e_hm = (-a * hm).exp();
            // 1 − e^{−a h_m} without cancellation
            let one_m_hm = -(-a * hm).exp_m1();
            let scaled = match topology {
                Topology::NoBackIron => {
                    let a1 = 0.5 * one_m_hm * (s - q);
                    let b1 = -a1 * e_ge;
                    let a2 = -0.5 * (s - q);
                    let b2 = 0.5 * q * (1.0 + e_ge * e_ge - e_top * e_ge)
                        + 0.5 * s * (1.0 - e_ge * e_ge + e_top * e_ge);
                    let b3 = 0.5 * s * (e_hm - e_ge * e_top - 1.0 + e_top * e_top)
                        + 0.5 * q * (e_hm + e_ge * e_top - 1.0 - e_top * e_top);
                    [a1, b1, a2, b2, b3]
                }
                Topology::BackIron => {
                    let den = -(-2.0 * a * top).exp_m1();
                    let a1 = 0.5 * (s * one_m_hm * (1.0 + e_hm) - q * one_m_hm * one_m_hm) / den;
                    let b1 = -a1 * e_ge;
                    let a2 = -0.5 * (s * (e_hm - e_ge * e_top) + q * (e_hm + e_ge * e_top - 2.0)) / den;
                    let b2 = 0.5 * (s * (1.0 - e_ge * e_ge) + q * (1.0 + e_ge * e_ge - 2.0 * e_ge * e_top)) / den;
                    [a1, b1, a2, b2, 0.0]
                }
            };
            HarmonicCoefficients { n: t.n, scaled }
        })
        .collect();
    FieldCoefficients {
        model: FieldModel::Laplace,
        topology,
        stack,
        source: HarmonicSource { wave_number: source.wave_number, terms },
        harmonics,
    }
}
