//! Test-only oracles that share no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod rule on [a, b] with the embedded 7-point Gauss error.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod by recursive bisection to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, tol, 40)
}

/// Magnetization angle of the left pole at electrical angle θ ∈ [0, π]:
/// pieces of span π/N_m centered at π/2 + iπ/N_m, magnetized at π/2 − iπ/N_m.
pub fn magnet_angle(nm: usize, theta: f64) -> f64 {
    let span = PI / nm as f64;
    let i = ((theta - 0.5 * PI) / span).round();
    0.5 * PI - i * span
}

/// Piece edges inside (0, π) followed by the end points, sorted.
pub fn piece_edges(nm: usize) -> Vec<f64> {
    let span = PI / nm as f64;
    let mut edges = vec![0.0, PI];
    for i in -(nm as i64)..=(nm as i64) {
        let e = 0.5 * PI + (i as f64 + 0.5) * span;
        if e > 1e-12 && e < PI - 1e-12 {
            edges.push(e);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges
}

/// (k_n, σ_n) by adaptive quadrature of the defining integrals over one
/// pole, with K = −M cos θ_m and σ = −μ0 M sin θ_m.
pub fn source_by_quadrature(nm: usize, magnetization: f64, mu0: f64, n: usize) -> (f64, f64) {
    let edges = piece_edges(nm);
    let nf = n as f64;
    let mut k = 0.0;
    let mut s = 0.0;
    for w in edges.windows(2) {
        let angle = magnet_angle(nm, 0.5 * (w[0] + w[1]));
        let kf = |t: f64| -magnetization * angle.cos() * (nf * t).cos();
        let sf = |t: f64| -mu0 * magnetization * angle.sin() * (nf * t).sin();
        k += integrate(&kf, w[0], w[1], 1e-14 * magnetization);
        s += integrate(&sf, w[0], w[1], 1e-14 * mu0 * magnetization);
    }
    (2.0 / PI * k, 2.0 / PI * s)
}

/// Composite trapezoid rule for a periodic integrand sampled at `n` points.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    (0..n).map(|i| f(h * i as f64)).sum::<f64>() * h
}
