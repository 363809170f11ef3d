//! CSV tables: one header line, fixed column order, shortest round-trip
//! float formatting.

use std::io::Write;

use crate::design::{DesignPoint, TraceRow};
use crate::error::{Error, Result};
use crate::field::FieldSample;
use crate::machine::{EmfResult, ForceResult, NormalForceResult};
use crate::source::HarmonicSource;

fn table<W: Write>(out: W, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let err = |e: csv::Error| Error::Output(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `x,y,region,Bx,By,Hx,Hy,psi,Az,model`; the unused potential is blank.
pub fn write_field_map<W: Write>(out: W, samples: &[FieldSample], model: &str) -> Result<()> {
    let header = names(&["x", "y", "region", "Bx", "By", "Hx", "Hy", "psi", "Az", "model"]);
    let rows = samples.iter().map(|s| {
        vec![
            num(s.x),
            num(s.y),
            s.region.name().to_string(),
            num(s.bx),
            num(s.by),
            num(s.hx),
            num(s.hy),
            opt(s.psi),
            opt(s.az),
            model.to_string(),
        ]
    });
    table(out, &header, rows)
}

/// Label for FD field maps in the `model` column.
pub const FD_MODEL: &str = "fd";

/// `t,F_phase_1..F_phase_N,F_total,tau`.
pub fn write_force<W: Write>(out: W, force: &ForceResult) -> Result<()> {
    let mut header = names(&["t"]);
    header.extend((1..=force.phase.len()).map(|m| format!("F_phase_{m}")));
    header.extend(names(&["F_total", "tau"]));
    let rows = (0..force.t.len()).map(|i| {
        let mut row = vec![num(force.t[i])];
        row.extend(force.phase.iter().map(|p| num(p[i])));
        row.push(num(force.total[i]));
        row.push(num(force.shear[i]));
        row
    });
    table(out, &header, rows)
}

/// `x0,F_mean`.
pub fn write_force_angle<W: Write>(out: W, curve: &[(f64, f64)]) -> Result<()> {
    table(out, &names(&["x0", "F_mean"]), curve.iter().map(|&(x, f)| vec![num(x), num(f)]))
}

/// `t,E_1..E_N`.
pub fn write_emf<W: Write>(out: W, emf: &EmfResult) -> Result<()> {
    let mut header = names(&["t"]);
    header.extend((1..=emf.emf.len()).map(|m| format!("E_{m}")));
    let rows = (0..emf.t.len()).map(|i| {
        let mut row = vec![num(emf.t[i])];
        row.extend(emf.emf.iter().map(|e| num(e[i])));
        row
    });
    table(out, &header, rows)
}

/// `g0,Fy_top,Fy_bottom,Fy_net`.
pub fn write_normal<W: Write>(out: W, rows: &[(f64, NormalForceResult)]) -> Result<()> {
    let header = names(&["g0", "Fy_top", "Fy_bottom", "Fy_net"]);
    table(
        out,
        &header,
        rows.iter().map(|(g0, r)| vec![num(*g0), num(r.f_y_top), num(r.f_y_bottom), num(r.f_y_total)]),
    )
}

/// `x,T_yy` on the top stator surface.
pub fn write_normal_stress<W: Write>(out: W, result: &NormalForceResult) -> Result<()> {
    table(out, &names(&["x", "T_yy"]), result.x.iter().zip(&result.t_yy).map(|(x, t)| vec![num(*x), num(*t)]))
}

const POINT_COLUMNS: &[&str] = &[
    "lambda", "h_m", "h_c", "F_t", "shear", "moving_mass", "a", "P_cu", "emf_thd", "ripple_pct", "score",
];

fn point_row(p: &DesignPoint) -> Vec<String> {
    vec![
        num(p.lambda),
        num(p.pm_height),
        num(p.coil_height),
        num(p.metrics.thrust),
        num(p.shear),
        num(p.metrics.moving_mass),
        num(p.metrics.acceleration),
        num(p.metrics.copper_loss),
        opt(p.quality.map(|q| q.emf_thd)),
        opt(p.quality.map(|q| q.ripple_pct)),
        num(p.score),
    ]
}

pub fn write_sweep<W: Write>(out: W, points: &[DesignPoint]) -> Result<()> {
    table(out, &names(POINT_COLUMNS), points.iter().map(point_row))
}

/// Optimizer trace: `pass` followed by the sweep columns.
pub fn write_trace<W: Write>(out: W, trace: &[TraceRow]) -> Result<()> {
    let mut header = names(&["pass"]);
    header.extend(names(POINT_COLUMNS));
    let rows = trace.iter().map(|r| {
        let mut row = vec![r.pass.to_string()];
        row.extend(point_row(&r.point));
        row
    });
    table(out, &header, rows)
}

/// `n,k_n,sigma_n,M_xn,M_yn`.
pub fn write_harmonics<W: Write>(out: W, source: &HarmonicSource) -> Result<()> {
    let header = names(&["n", "k_n", "sigma_n", "M_xn", "M_yn"]);
    let rows = source
        .terms
        .iter()
        .map(|t| vec![t.n.to_string(), num(t.k_n), num(t.sigma_n), num(t.m_xn), num(t.m_yn)]);
    table(out, &header, rows)
}

/// `iteration,residual` of the FD solver.
pub fn write_residual_log<W: Write>(out: W, log: &[(usize, f64)]) -> Result<()> {
    table(out, &names(&["iteration", "residual"]), log.iter().map(|&(i, r)| vec![i.to_string(), num(r)]))
}
