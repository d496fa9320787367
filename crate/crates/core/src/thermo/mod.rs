//! Thermodynamic side quantities: inverse capture cross sections, spectrum
//! temperature, exciton estimates and the relaxation timescales.

mod capture;
mod spectrum;

pub use capture::{inverse_capture_xsec, CaptureTable, InverseCapture};
pub use spectrum::{fit_temperature, scale_spectrum, ScaledPoint, SpectrumPoint, TemperatureFit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// ħ in eV·s.
pub const HBAR_EV_S: f64 = 6.582119e-16;
/// e²/(4πε₀) in MeV·fm.
pub const COULOMB_MEV_FM: f64 = 1.43997;
/// Atomic mass unit in MeV/c².
pub const AMU_MEV: f64 = 931.494;
/// Speed of light in fm/s.
pub const C_FM_PER_S: f64 = 2.99792458e23;
/// Radius parameter in fm (R = r0 · A^(1/3)).
pub const RADIUS_PARAMETER_FM: f64 = 1.5;

/// ħc in MeV·fm, derived from [`HBAR_EV_S`].
pub fn hbar_c() -> f64 {
    HBAR_EV_S * 1e-6 * C_FM_PER_S
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("energy {eps} MeV outside tabulated range [{lo}, {hi}]")]
    OutsideTable { eps: f64, lo: f64, hi: f64 },
    #[error("underdetermined: {0}")]
    Underdetermined(String),
    #[error("invalid point at eps = {eps} MeV: {reason}")]
    InvalidPoint { eps: f64, reason: String },
    #[error("degenerate: {0}")]
    Degenerate(String),
}

/// A nucleus with mass number, charge and excitation energy (MeV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NucleusSpec {
    mass_number: u32,
    charge: u32,
    excitation_energy: f64,
}

impl NucleusSpec {
    pub fn new(mass_number: u32, charge: u32, excitation_energy: f64) -> Result<Self, ThermoError> {
        if charge < 1 || charge >= mass_number {
            return Err(ThermoError::InvalidArgument(format!(
                "need 1 <= Z < A, got Z = {charge}, A = {mass_number}"
            )));
        }
        if !(excitation_energy >= 0.0 && excitation_energy.is_finite()) {
            return Err(ThermoError::InvalidArgument(format!(
                "excitation energy {excitation_energy} MeV must be finite and non-negative"
            )));
        }
        Ok(Self {
            mass_number,
            charge,
            excitation_energy,
        })
    }

    pub fn mass_number(&self) -> u32 {
        self.mass_number
    }

    pub fn charge(&self) -> u32 {
        self.charge
    }

    pub fn excitation_energy(&self) -> f64 {
        self.excitation_energy
    }

    /// Nuclear radius in fm.
    pub fn radius(&self) -> f64 {
        RADIUS_PARAMETER_FM * f64::from(self.mass_number).cbrt()
    }

    /// Proton–nucleus Coulomb barrier at the nuclear radius, MeV.
    pub fn coulomb_barrier(&self) -> f64 {
        COULOMB_MEV_FM * f64::from(self.charge) / self.radius()
    }

    /// Proton–nucleus reduced mass, MeV/c².
    pub fn reduced_mass(&self) -> f64 {
        let a = f64::from(self.mass_number);
        AMU_MEV * a / (a + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitonReport {
    /// Single-particle level density, MeV⁻¹.
    pub g: f64,
    pub n_bar: f64,
    pub n_sigma: f64,
    /// Temperature range in MeV.
    pub t_low: f64,
    pub t_high: f64,
}

/// Mean exciton number `n̄ = √(2 g E*)` with `g = A/13` and the temperature
/// band `E*/(n̄ ± √(n̄/2))`.
pub fn exciton_report(mass_number: u32, e_star: f64) -> Result<ExcitonReport, ThermoError> {
    if mass_number < 1 {
        return Err(ThermoError::InvalidArgument("mass number must be positive".into()));
    }
    if !(e_star >= 0.0 && e_star.is_finite()) {
        return Err(ThermoError::InvalidArgument(format!(
            "excitation energy {e_star} MeV must be finite and non-negative"
        )));
    }
    let g = f64::from(mass_number) / 13.0;
    let n_bar = (2.0 * g * e_star).sqrt();
    let n_sigma = (n_bar / 2.0).sqrt();
    if n_bar <= n_sigma {
        return Err(ThermoError::Degenerate(format!(
            "mean exciton number {n_bar} does not exceed its spread {n_sigma}; temperature range is unbounded"
        )));
    }
    Ok(ExcitonReport {
        g,
        n_bar,
        n_sigma,
        t_low: e_star / (n_bar + n_sigma),
        t_high: e_star / (n_bar - n_sigma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    /// Cross-symmetry phase relaxation width, eV.
    pub beta: f64,
    pub tau_ph: f64,
    /// Compound-nucleus decay width, eV.
    pub gamma_cn: f64,
    pub tau_cn: f64,
    /// Spreading width, MeV.
    pub gamma_spr: f64,
    pub tau_th: f64,
    /// Mean level spacing, MeV.
    pub level_spacing_d: f64,
    pub t_heisenberg: f64,
    pub n_eff: f64,
}

/// Lifetimes `ħ/width` for the phase memory, compound decay, thermalization
/// and level-resolution scales. Times are in seconds.
pub fn timescales(r: f64, gamma_cn: f64, gamma_spr: f64, level_spacing_d: f64) -> Result<TimescaleReport, ThermoError> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(ThermoError::InvalidArgument(format!("r = {r} must be finite and non-negative")));
    }
    for (name, w) in [("gamma_cn", gamma_cn), ("gamma_spr", gamma_spr), ("D", level_spacing_d)] {
        if !(w > 0.0 && w.is_finite()) {
            return Err(ThermoError::InvalidArgument(format!("{name} = {w} must be positive")));
        }
    }
    let beta = r * gamma_cn;
    Ok(TimescaleReport {
        beta,
        tau_ph: HBAR_EV_S / beta,
        gamma_cn,
        tau_cn: HBAR_EV_S / gamma_cn,
        gamma_spr,
        tau_th: HBAR_EV_S / (gamma_spr * 1e6),
        level_spacing_d,
        t_heisenberg: HBAR_EV_S / (level_spacing_d * 1e6),
        n_eff: gamma_spr / level_spacing_d,
    })
}
