//! Halbach array layout and its Fourier source description.
//!
//! Electrical angle θ = kx. Piece `i` of the left pole (θ ∈ [0, π)) is
//! centered at π/2 + iΔθ and magnetized at π/2 − iΔθ. The right pole is the
//! negated copy, M(θ + π) = −M(θ). With this phase x = 0 is the center of a
//! horizontal magnet, M_x is even in x and M_y is odd.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{HarmonicTruncation, MotorDesign};
use crate::error::{Error, Result};
use crate::MU0;

/// One magnet piece as an electrical-angle interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnetPiece {
    /// Index within its pole, −N_m/2 ..= N_m/2.
    pub index: i32,
    pub pole: usize,
    /// Magnetization angle, rad.
    pub angle: f64,
    pub left: f64,
    pub right: f64,
}

/// Magnet pieces tiling one wavelength, θ ∈ [0, 2π).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalbachLayout {
    pub magnets_per_pole: usize,
    pub pieces: Vec<MagnetPiece>,
}

impl HalbachLayout {
    /// Magnetization angles of the left pole in piece order.
    pub fn angles(&self) -> Vec<f64> {
        self.pieces.iter().filter(|p| p.pole == 0).map(|p| p.angle).collect()
    }

    /// (θ_left, θ_right) of every piece in order.
    pub fn boundaries(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().map(|p| (p.left, p.right)).collect()
    }

    /// Magnetization angle at electrical angle `theta` (any real).
    pub fn angle_at(&self, theta: f64) -> f64 {
        let span = PI / self.magnets_per_pole as f64;
        let theta = theta.rem_euclid(2.0 * PI);
        let pole = (theta / PI).floor().min(1.0);
        let local = theta - pole * PI;
        let i = ((local - 0.5 * PI) / span).round();
        0.5 * PI - i * span - pole * PI
    }
}

/// Builds the piece layout for `magnets_per_pole` pieces per pole.
pub fn build_layout(magnets_per_pole: usize) -> Result<HalbachLayout> {
    if magnets_per_pole < 2 {
        return Err(Error::InvalidMagnetCount(magnets_per_pole));
    }
    let n = magnets_per_pole as i32;
    let span = PI / magnets_per_pole as f64;
    let half = n / 2;
    let mut pieces = Vec::new();
    for pole in 0..2 {
        let offset = pole as f64 * PI;
        for i in -half..=half {
            let center = 0.5 * PI + i as f64 * span;
            let angle = 0.5 * PI - i as f64 * span - offset;
            let (mut left, mut right) = (center - 0.5 * span, center + 0.5 * span);
            if i == -half {
                left = 0.0;
            }
            if i == half {
                right = PI;
            }
            pieces.push(MagnetPiece {
                index: i,
                pole,
                angle,
                left: left + offset,
                right: right + offset,
            });
        }
    }
    Ok(HalbachLayout { magnets_per_pole, pieces })
}

/// Source amplitudes of one odd harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicTerm {
    pub n: usize,
    /// Surface-current amplitude, A/m.
    pub k_n: f64,
    /// Surface-charge amplitude, T.
    pub sigma_n: f64,
    /// M_x amplitude, A/m.
    pub m_xn: f64,
    /// M_y amplitude, A/m.
    pub m_yn: f64,
}

/// K_m(x) = Σ k_n cos(nkx), σ_m(x) = Σ σ_n sin(nkx) over odd n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicSource {
    pub wave_number: f64,
    pub terms: Vec<HarmonicTerm>,
}

impl HarmonicSource {
    pub fn n_max(&self) -> usize {
        self.terms.last().map_or(0, |t| t.n)
    }

    /// Amplitudes of harmonic `n`; even or out-of-range `n` give zeros.
    pub fn term(&self, n: usize) -> HarmonicTerm {
        if n % 2 == 1 && n <= self.n_max() {
            self.terms[n / 2]
        } else {
            HarmonicTerm { n, k_n: 0.0, sigma_n: 0.0, m_xn: 0.0, m_yn: 0.0 }
        }
    }

    /// Scales every amplitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| HarmonicTerm {
                n: t.n,
                k_n: t.k_n * factor,
                sigma_n: t.sigma_n * factor,
                m_xn: t.m_xn * factor,
                m_yn: t.m_yn * factor,
            })
            .collect();
        Self { wave_number: self.wave_number, terms }
    }

    /// Partial sums (K_m, σ_m, M_x, M_y) at `x`.
    pub fn profile_at(&self, x: f64) -> SourceSample {
        let mut s = SourceSample { x, k_m: 0.0, sigma_m: 0.0, m_x: 0.0, m_y: 0.0 };
        for t in &self.terms {
            let (sn, cs) = (t.n as f64 * self.wave_number * x).sin_cos();
            s.k_m += t.k_n * cs;
            s.sigma_m += t.sigma_n * sn;
            s.m_x += t.m_xn * cs;
            s.m_y += t.m_yn * sn;
        }
        s
    }
}

/// Closed-form harmonic amplitudes for all odd n up to the truncation.
pub fn fourier_coefficients(design: &MotorDesign, trunc: HarmonicTruncation) -> HarmonicSource {
    let m = design.magnetization();
    let nm = design.magnets_per_pole as i64;
    let span = design.piece_span();
    let (lo, hi) = if nm % 2 == 0 { (-nm / 2 + 1, nm / 2 - 1) } else { (-(nm - 1) / 2, (nm - 1) / 2) };
    let terms = trunc
        .harmonics()
        .map(|n| {
            let nf = n as f64;
            let width = (0.5 * nf * span).sin();
            let scale = -4.0 / (nf * PI) * m * width;
            let (mut k_n, mut sigma_n) = (0.0, 0.0);
            for i in lo..=hi {
                let theta = 0.5 * PI - i as f64 * span;
                let (ps, pc) = (nf * (0.5 * PI + i as f64 * span)).sin_cos();
                k_n += scale * theta.cos() * pc;
                sigma_n += scale * MU0 * theta.sin() * ps;
            }
            if nm % 2 == 0 {
                k_n += 4.0 / (nf * PI) * m * width;
            }
            HarmonicTerm { n, k_n, sigma_n, m_xn: -k_n, m_yn: -sigma_n / MU0 }
        })
        .collect();
    HarmonicSource { wave_number: design.wave_number(), terms }
}

/// Sampled source profiles at one x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSample {
    pub x: f64,
    pub k_m: f64,
    pub sigma_m: f64,
    pub m_x: f64,
    pub m_y: f64,
}

/// Partial-sum reconstructions of the sources on `xs`.
pub fn source_profiles(source: &HarmonicSource, xs: &[f64]) -> Vec<SourceSample> {
    xs.iter().map(|&x| source.profile_at(x)).collect()
}

/// The exact piecewise-constant magnetization over one wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMagnetization {
    period: f64,
    /// Breakpoints 0 = b_0 < … < b_P = λ.
    breaks: Vec<f64>,
    mx: Vec<f64>,
    my: Vec<f64>,
}

impl PiecewiseMagnetization {
    pub fn new(design: &MotorDesign) -> Result<Self> {
        let layout = build_layout(design.magnets_per_pole)?;
        let k = design.wave_number();
        let m = design.magnetization();
        let mut breaks = vec![0.0];
        let (mut mx, mut my) = (Vec::new(), Vec::new());
        for p in &layout.pieces {
            breaks.push(p.right / k);
            mx.push(m * p.angle.cos());
            my.push(m * p.angle.sin());
        }
        *breaks.last_mut().expect("layout is non-empty") = design.lambda;
        Ok(Self { period: design.lambda, breaks, mx, my })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// The same layout with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            period: self.period,
            breaks: self.breaks.clone(),
            mx: self.mx.iter().map(|v| v * factor).collect(),
            my: self.my.iter().map(|v| v * factor).collect(),
        }
    }

    /// Interior piece boundaries in [0, λ).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks[..self.breaks.len() - 1]
    }

    fn piece_index(&self, x: f64) -> usize {
        let x = x.rem_euclid(self.period);
        match self.breaks.binary_search_by(|b| b.partial_cmp(&x).expect("finite breakpoints")) {
            Ok(i) => i.min(self.mx.len() - 1),
            Err(i) => i - 1,
        }
    }

    /// (M_x, M_y) at `x`; right-continuous at piece boundaries.
    pub fn at(&self, x: f64) -> (f64, f64) {
        let i = self.piece_index(x);
        (self.mx[i], self.my[i])
    }

    /// Exact ∫ M·(c0 + c1·(x − x0)) dx over [x0, x1] for both components.
    pub fn integrate_linear(&self, x0: f64, x1: f64, c0: f64, c1: f64) -> (f64, f64) {
        if x1 <= x0 {
            return (0.0, 0.0);
        }
        let shift = (x0 / self.period).floor() * self.period;
        let (mut sx, mut sy) = (0.0, 0.0);
        let mut base = shift;
        let pieces = self.mx.len();
        while base < x1 {
            for p in 0..pieces {
                let a = (base + self.breaks[p]).max(x0);
                let b = (base + self.breaks[p + 1]).min(x1);
                if b > a {
                    let w = c0 * (b - a) + 0.5 * c1 * ((b - x0).powi(2) - (a - x0).powi(2));
                    sx += self.mx[p] * w;
                    sy += self.my[p] * w;
                }
            }
            base += self.period;
        }
        (sx, sy)
    }
}
