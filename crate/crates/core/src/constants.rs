//! Physical constants (CODATA 2018 exact values, SI).
//!
//! Shared by the thermal-occupancy code and its tests so both sides of every
//! comparison use the same numbers.

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// One terahertz in hertz.
pub const THZ: f64 = 1.0e12;
