//! Molecular ensemble parameters and thermal phonon occupancy.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, PLANCK};
use crate::error::{Error, Result};

/// Physical parameters of the Raman-active ensemble.
///
/// Frequencies are ordinary frequencies in Hz (`omega_v / 2 pi`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MolecularEnsembleParams {
    /// Vibrational frequency, Hz.
    pub nu_v: f64,
    /// Phonon amplitude decay rate, 1/s.
    pub gamma_v: f64,
    pub molecule_count: u32,
    /// Ambient temperature, K.
    pub temperature: f64,
}

impl MolecularEnsembleParams {
    pub fn new(nu_v: f64, gamma_v: f64, molecule_count: u32, temperature: f64) -> Result<Self> {
        let p = Self {
            nu_v,
            gamma_v,
            molecule_count,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("nu_v", self.nu_v)?;
        positive("gamma_v", self.gamma_v)?;
        positive("temperature", self.temperature)?;
        if self.molecule_count == 0 {
            return Err(Error::Domain("molecule_count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.nu_v
    }
}

/// Mean thermal phonon number of the vibrational mode, `0 < n_v < inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ThermalOccupancy(f64);

impl ThermalOccupancy {
    pub fn new(n_v: f64) -> Result<Self> {
        if n_v.is_finite() && n_v > 0.0 {
            Ok(Self(n_v))
        } else {
            Err(Error::Domain(format!(
                "thermal occupancy must be finite and positive, got {n_v}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 + n_v) / n_v`, the correlated-to-uncorrelated weight when Stokes
    /// is detected first. Written as `1/n_v + 1`.
    pub fn stokes_first_weight(self) -> f64 {
        1.0 / self.0 + 1.0
    }

    /// `n_v / (1 + n_v)`, the same weight when anti-Stokes is detected first.
    pub fn anti_stokes_first_weight(self) -> f64 {
        self.0 / (1.0 + self.0)
    }
}

impl TryFrom<f64> for ThermalOccupancy {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ThermalOccupancy> for f64 {
    fn from(n: ThermalOccupancy) -> f64 {
        n.0
    }
}

/// Bose-Einstein occupancy of the vibrational mode of `params`.
pub fn thermal_occupancy(params: &MolecularEnsembleParams) -> Result<ThermalOccupancy> {
    occupancy_at(params.nu_v, params.temperature)
}

/// `n_v = 1 / (exp(h nu_v / k_B T) - 1)`.
///
/// Fails when `nu_v` or `temperature` is not positive, or when the result
/// underflows to zero (deep cryogenic limit).
pub fn occupancy_at(nu_v: f64, temperature: f64) -> Result<ThermalOccupancy> {
    positive("nu_v", nu_v)?;
    positive("temperature", temperature)?;
    let x = PLANCK * nu_v / (BOLTZMANN * temperature);
    let n = 1.0 / x.exp_m1();
    if n == 0.0 {
        return Err(Error::Domain(format!(
            "thermal occupancy underflows at h nu / k T = {x:.3e}"
        )));
    }
    ThermalOccupancy::new(n)
}

/// Inverse of [`occupancy_at`]: the temperature giving occupancy `n_v` at `nu_v`.
pub fn temperature_for(nu_v: f64, n_v: ThermalOccupancy) -> Result<f64> {
    positive("nu_v", nu_v)?;
    Ok(PLANCK * nu_v / (BOLTZMANN * (1.0 / n_v.value()).ln_1p()))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and positive, got {v}")))
    }
}
