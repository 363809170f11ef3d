//! Machine description, operating point and the flat `key = value` config format.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::MU0;

/// Raw geometric, material and winding parameters of one motor unit (one
/// wavelength). Validated into a [`MotorDesign`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// Pole-pair pitch, m.
    pub lambda: f64,
    /// Mechanical airgap, m.
    pub gap: f64,
    /// Coil height, m.
    pub coil_height: f64,
    /// Magnet height, m.
    pub pm_height: f64,
    /// In-depth length, m.
    pub depth: f64,
    pub magnets_per_pole: usize,
    pub phases: usize,
    pub back_iron: bool,
    /// Remanence, T.
    pub remanence: f64,
    /// Peak current density, A/m².
    pub j_max: f64,
    /// Electrical frequency, Hz.
    pub frequency: f64,
    /// Initial current phase, rad.
    pub phi0: f64,
    /// Turns per coil area.
    pub turns: usize,
    pub rho_pm: f64,
    pub rho_cu: f64,
    /// Copper conductivity, S/m.
    pub sigma_cu: f64,
    /// Airgap misalignment offset, m.
    pub gap_offset: f64,
}

impl DesignParams {
    /// The reference machine: 40 mm wavelength, 7 mm magnets, 4 mm coils,
    /// 0.5 mm airgap, 1.1 T remanence, 10 A/mm² at 50 Hz.
    pub fn reference() -> Self {
        Self {
            lambda: 0.04,
            gap: 0.0005,
            coil_height: 0.004,
            pm_height: 0.007,
            depth: 0.04,
            magnets_per_pole: 2,
            phases: 3,
            back_iron: false,
            remanence: 1.1,
            j_max: 1.0e7,
            frequency: 50.0,
            phi0: 0.0,
            turns: 1,
            rho_pm: 7000.0,
            rho_cu: 9000.0,
            sigma_cu: 5.8e7,
            gap_offset: 0.0,
        }
    }
}

/// A validated machine description with its derived quantities.
///
/// Derefs to [`DesignParams`] so the raw parameters read as fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotorDesign {
    params: DesignParams,
    wave_number: f64,
    magnetization: f64,
    effective_gap: f64,
}

impl Deref for MotorDesign {
    type Target = DesignParams;

    fn deref(&self) -> &DesignParams {
        &self.params
    }
}

impl MotorDesign {
    pub fn new(params: DesignParams) -> Result<Self> {
        let lengths = [
            ("lambda_m", params.lambda),
            ("gap_m", params.gap),
            ("coil_height_m", params.coil_height),
            ("pm_height_m", params.pm_height),
            ("depth_m", params.depth),
        ];
        for (name, value) in lengths {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveLength { name, value });
            }
        }
        let positives = [
            ("remanence_T", params.remanence),
            ("frequency_Hz", params.frequency),
            ("rho_pm_kg_m3", params.rho_pm),
            ("rho_cu_kg_m3", params.rho_cu),
            ("sigma_cu_S_m", params.sigma_cu),
        ];
        for (name, value) in positives {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        if !(params.j_max.is_finite() && params.j_max >= 0.0) {
            return Err(Error::InvalidParameter { name: "j_max_A_per_m2", value: params.j_max });
        }
        if !params.phi0.is_finite() {
            return Err(Error::InvalidParameter { name: "phi0_rad", value: params.phi0 });
        }
        if params.turns == 0 {
            return Err(Error::InvalidParameter { name: "turns_per_coil", value: 0.0 });
        }
        if params.phases != 3 && params.phases != 5 {
            return Err(Error::UnsupportedPhaseCount(params.phases));
        }
        if params.magnets_per_pole < 2 {
            return Err(Error::InvalidMagnetCount(params.magnets_per_pole));
        }
        if !(params.gap_offset >= 0.0 && params.gap_offset < params.gap) {
            return Err(Error::OffsetExceedsGap { offset: params.gap_offset, gap: params.gap });
        }
        Ok(Self {
            wave_number: 2.0 * PI / params.lambda,
            magnetization: params.remanence / MU0,
            effective_gap: params.coil_height + params.gap,
            params,
        })
    }

    /// The reference machine with `magnets_per_pole`, `phases` and topology set.
    pub fn reference(magnets_per_pole: usize, phases: usize, back_iron: bool) -> Result<Self> {
        Self::new(DesignParams { magnets_per_pole, phases, back_iron, ..DesignParams::reference() })
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    /// Rebuilds the design after editing a copy of its parameters.
    pub fn with(&self, edit: impl FnOnce(&mut DesignParams)) -> Result<Self> {
        let mut params = self.params.clone();
        edit(&mut params);
        Self::new(params)
    }

    /// k = 2π/λ, rad/m.
    pub fn wave_number(&self) -> f64 {
        self.wave_number
    }

    pub fn pole_pitch(&self) -> f64 {
        0.5 * self.lambda
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    /// M = B_r/μ0, A/m.
    pub fn magnetization(&self) -> f64 {
        self.magnetization
    }

    /// Height of region I (coil plus airgap): g_e = h_c + g.
    pub fn effective_gap(&self) -> f64 {
        self.effective_gap
    }

    /// Top of the magnet array, g_e + h_m.
    pub fn array_top(&self) -> f64 {
        self.effective_gap + self.pm_height
    }

    /// Synchronous velocity u = fλ.
    pub fn sync_velocity(&self) -> f64 {
        self.frequency * self.lambda
    }

    /// Width of one magnet piece, (λ/2)/N_m.
    pub fn piece_width(&self) -> f64 {
        self.pole_pitch() / self.magnets_per_pole as f64
    }

    /// Electrical span of one magnet piece, π/N_m. Equal to the
    /// magnetization rotation step between neighbouring pieces.
    pub fn piece_span(&self) -> f64 {
        PI / self.magnets_per_pole as f64
    }

    /// Width of one coil side, (λ/2)/N_ph.
    pub fn slot_width(&self) -> f64 {
        self.pole_pitch() / self.phases as f64
    }
}

/// Rotor position and time at which machine quantities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub t: f64,
    pub x0: f64,
    pub u_override: Option<f64>,
}

impl OperatingPoint {
    pub fn at(t: f64, x0: f64) -> Self {
        Self { t, x0, u_override: None }
    }

    pub fn velocity(&self, design: &MotorDesign) -> f64 {
        self.u_override.unwrap_or_else(|| design.sync_velocity())
    }
}

/// Highest odd harmonic index kept in every Fourier sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonicTruncation {
    n_max: usize,
}

impl HarmonicTruncation {
    pub const DEFAULT_N_MAX: usize = 199;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 || n_max % 2 == 0 {
            return Err(Error::InvalidTruncation(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Odd harmonic indices 1, 3, …, n_max.
    pub fn harmonics(&self) -> impl Iterator<Item = usize> {
        (1..=self.n_max).step_by(2)
    }
}

impl Default for HarmonicTruncation {
    fn default() -> Self {
        Self { n_max: Self::DEFAULT_N_MAX }
    }
}

/// Everything a config file specifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotorConfig {
    pub design: MotorDesign,
    pub truncation: HarmonicTruncation,
}

const REQUIRED_KEYS: &[&str] = &[
    "lambda_m",
    "gap_m",
    "coil_height_m",
    "pm_height_m",
    "depth_m",
    "n_magnets_per_pole",
    "n_phases",
    "back_iron",
    "remanence_T",
    "j_max_A_per_m2",
    "frequency_Hz",
];

const OPTIONAL_KEYS: &[&str] = &[
    "phi0_rad",
    "turns_per_coil",
    "rho_pm_kg_m3",
    "rho_cu_kg_m3",
    "sigma_cu_S_m",
    "gap_offset_m",
    "n_max_harmonic",
];

/// Parses the flat `key = value` format. Blank lines and `#` comments are
/// ignored; keys must be unique and known.
pub fn load_config(text: &str) -> Result<MotorConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        if entries.insert(key.to_string(), (line_no, value.trim().to_string())).is_some() {
            return Err(Error::Parse { line: line_no, message: format!("duplicate key `{key}`") });
        }
    }
    for key in REQUIRED_KEYS {
        if !entries.contains_key(*key) {
            return Err(Error::MissingKey((*key).to_string()));
        }
    }

    let float = |key: &str, default: f64| -> Result<f64> {
        match entries.get(key) {
            None => Ok(default),
            Some((line, v)) => v.parse::<f64>().map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{key}` expects a number, got `{v}`"),
            }),
        }
    };
    let integer = |key: &str, default: usize| -> Result<usize> {
        match entries.get(key) {
            None => Ok(default),
            Some((line, v)) => v.parse::<usize>().map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{key}` expects a non-negative integer, got `{v}`"),
            }),
        }
    };
    let back_iron = match entries.get("back_iron") {
        Some((line, v)) => match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            _ => {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("`back_iron` expects true/false, got `{v}`"),
                })
            }
        },
        None => unreachable!("required key checked above"),
    };

    let defaults = DesignParams::reference();
    let params = DesignParams {
        lambda: float("lambda_m", f64::NAN)?,
        gap: float("gap_m", f64::NAN)?,
        coil_height: float("coil_height_m", f64::NAN)?,
        pm_height: float("pm_height_m", f64::NAN)?,
        depth: float("depth_m", f64::NAN)?,
        magnets_per_pole: integer("n_magnets_per_pole", 0)?,
        phases: integer("n_phases", 0)?,
        back_iron,
        remanence: float("remanence_T", f64::NAN)?,
        j_max: float("j_max_A_per_m2", f64::NAN)?,
        frequency: float("frequency_Hz", f64::NAN)?,
        phi0: float("phi0_rad", defaults.phi0)?,
        turns: integer("turns_per_coil", defaults.turns)?,
        rho_pm: float("rho_pm_kg_m3", defaults.rho_pm)?,
        rho_cu: float("rho_cu_kg_m3", defaults.rho_cu)?,
        sigma_cu: float("sigma_cu_S_m", defaults.sigma_cu)?,
        gap_offset: float("gap_offset_m", defaults.gap_offset)?,
    };
    let truncation =
        HarmonicTruncation::new(integer("n_max_harmonic", HarmonicTruncation::DEFAULT_N_MAX)?)?;
    Ok(MotorConfig { design: MotorDesign::new(params)?, truncation })
}

/// Parses a config and returns only the machine description.
pub fn load_design(text: &str) -> Result<MotorDesign> {
    load_config(text).map(|c| c.design)
}

/// Renders a config in the same format [`load_config`] reads.
pub fn render_config(config: &MotorConfig) -> String {
    let d = config.design.params();
    format!(
        "lambda_m = {}\ngap_m = {}\ncoil_height_m = {}\npm_height_m = {}\ndepth_m = {}\n\
         n_magnets_per_pole = {}\nn_phases = {}\nback_iron = {}\nremanence_T = {}\n\
         j_max_A_per_m2 = {}\nfrequency_Hz = {}\nphi0_rad = {}\nturns_per_coil = {}\n\
         rho_pm_kg_m3 = {}\nrho_cu_kg_m3 = {}\nsigma_cu_S_m = {}\ngap_offset_m = {}\n\
         n_max_harmonic = {}\n",
        d.lambda,
        d.gap,
        d.coil_height,
        d.pm_height,
        d.depth,
        d.magnets_per_pole,
        d.phases,
        d.back_iron,
        d.remanence,
        d.j_max,
        d.frequency,
        d.phi0,
        d.turns,
        d.rho_pm,
        d.rho_cu,
        d.sigma_cu,
        d.gap_offset,
        config.truncation.n_max(),
    )
}

/// Winding phase index (0-based, A = 0) and current direction of coil side
/// `slot` (1-based, left to right across the first pole pitch).
///
/// Slots alternate `+` and `-` sides; the phase advances by (N_ph + 1)/2
/// each slot, giving a, c′, b for three phases and a, d′, b, e′, c for five.
pub fn slot_phase(phases: usize, slot: usize) -> Result<(usize, f64)> {
    if phases != 3 && phases != 5 {
        return Err(Error::UnsupportedPhaseCount(phases));
    }
    if slot == 0 || slot > phases {
        return Err(Error::IndexOutOfRange { index: slot, max: phases });
    }
    let phase = ((slot - 1) * (phases + 1) / 2) % phases;
    let sign = if slot % 2 == 1 { 1.0 } else { -1.0 };
    Ok((phase, sign))
}

/// Current density J_m(t) in coil side `slot` (1-based), A/m².
pub fn phase_current_density(design: &MotorDesign, slot: usize, t: f64) -> Result<f64> {
    let (phase, sign) = slot_phase(design.phases, slot)?;
    let shift = phase as f64 * 2.0 * PI / design.phases as f64;
    Ok(sign * design.j_max * (design.omega() * t - shift + design.phi0).cos())
}
