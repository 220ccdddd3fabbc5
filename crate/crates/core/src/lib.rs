//! Heralded single-photon source built on spontaneous Raman scattering.
//!
//! A drive field scatters on an ensemble of Raman-active molecules. Detecting
//! exactly one Stokes photon heralds the anti-Stokes channel, which then
//! carries (almost) a single photon when the vibrational mode is cold
//! (`n_v << 1`). This crate computes the normalized Stokes/anti-Stokes
//! correlation functions for the ideal case and three degradation scenarios
//! (herald delay, finite drive coherence radius, background light), turns them
//! into purity (heralded `g2(0)`) and efficiency, and cross-checks everything
//! with:
//!
//! - [`oracle`]: brute-force Gaussian-moment (Wick) enumeration over the
//!   phonon operator strings, including molecule-index enumeration;
//! - [`mc`]: a joint photon-number table plus a seeded Monte Carlo
//!   detection/postselection simulator.
//!
//! The [`sweep`] module backs the `raman-herald` command-line tool.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod correlations;
pub mod error;
pub mod extsource;
pub mod mc;
pub mod metrics;
pub mod oracle;
pub mod params;
pub mod sweep;

pub use correlations::{
    BackgroundParams, CorrelationSet, Delay, DetectionOrder, Scenario,
};
pub use error::{Error, Result};
pub use extsource::ExternalSourceStats;
pub use metrics::{HeraldDirection, SourceFigures};
pub use params::{MolecularEnsembleParams, ThermalOccupancy};
