//! Poisson formulations. The scalar model carries the particular term
//! (M_xn/a)·sin(ax) in region II; the vector model carries
//! (μ0 M_yn/a)·cos(ax).

use super::{row, solve_all, FieldCoefficients, FieldModel, Interface, Row, Topology, A1, A2, B1, B2, B3};
use crate::config::{HarmonicTruncation, MotorDesign};
use crate::error::Result;
use crate::source::{HarmonicSource, HarmonicTerm};
use crate::MU0;

use Interface::{Lower, Stator, Upper};

pub(crate) fn scalar_rows(t: HarmonicTerm, a: f64, topology: Topology) -> Vec<Row> {
    let my = t.m_yn / a;
    let mx = t.m_xn / a;
    let mut rows = vec![
        // H_x = 0 on the stator iron
        row(Stator, &[(A1, 1.0, 1.0), (B1, 1.0, -1.0)], 0.0),
        // B_y continuous
        row(Lower, &[(A1, 1.0, 1.0), (B1, -1.0, -1.0), (A2, -1.0, 1.0), (B2, 1.0, -1.0)], -my),
        // H_x continuous
        row(Lower, &[(A1, -1.0, 1.0), (B1, -1.0, -1.0), (A2, 1.0, 1.0), (B2, 1.0, -1.0)], -mx),
    ];
    match topology {
        Topology::NoBackIron => {
            rows.push(row(Upper, &[(A2, 1.0, 1.0), (B2, -1.0, -1.0), (B3, 1.0, -1.0)], my));
            rows.push(row(Upper, &[(A2, -1.0, 1.0), (B2, -1.0, -1.0), (B3, 1.0, -1.0)], mx));
        }
        Topology::BackIron => {
            rows.push(row(Upper, &[(A2, -1.0, 1.0), (B2, -1.0, -1.0)], mx));
        }
    }
    rows
}

pub(crate) fn vector_rows(t: HarmonicTerm, a: f64, topology: Topology) -> Vec<Row> {
    let my = MU0 * t.m_yn / a;
    let mx = MU0 * t.m_xn / a;
    let mut rows = vec![
        // B_x = ∂A_z/∂y = 0 on the stator iron
        row(Stator, &[(A1, -1.0, 1.0), (B1, 1.0, -1.0)], 0.0),
        // B_y continuous
        row(Lower, &[(A1, -1.0, 1.0), (B1, -1.0, -1.0), (A2, 1.0, 1.0), (B2, 1.0, -1.0)], -my),
        // H_x continuous
        row(Lower, &[(A1, 1.0, 1.0), (B1, -1.0, -1.0), (A2, -1.0, 1.0), (B2, 1.0, -1.0)], -mx),
    ];
    match topology {
        Topology::NoBackIron => {
            rows.push(row(Upper, &[(A2, -1.0, 1.0), (B2, -1.0, -1.0), (B3, 1.0, -1.0)], my));
            rows.push(row(Upper, &[(A2, 1.0, 1.0), (B2, -1.0, -1.0), (B3, 1.0, -1.0)], mx));
        }
        Topology::BackIron => {
            rows.push(row(Upper, &[(A2, 1.0, 1.0), (B2, -1.0, -1.0)], mx));
        }
    }
    rows
}

/// Dense per-harmonic solve of the scalar-potential Poisson model.
pub fn solve_model2(
    design: &MotorDesign,
    source: &HarmonicSource,
    trunc: HarmonicTruncation,
) -> Result<FieldCoefficients> {
    solve_all(design, source, trunc, FieldModel::PoissonScalar, scalar_rows, None)
}

/// Dense per-harmonic solve of the vector-potential Poisson model.
pub fn solve_model3(
    design: &MotorDesign,
    source: &HarmonicSource,
    trunc: HarmonicTruncation,
) -> Result<FieldCoefficients> {
    solve_all(design, source, trunc, FieldModel::PoissonVector, vector_rows, None)
}
