//! Closed-form normalized Stokes/anti-Stokes correlation functions.
//!
//! Every correlator is normalized by the single-channel intensities, so the
//! scattering prefactors (detunings, vibronic coupling, drive amplitude)
//! cancel. Four scenarios are provided, one constructor each; they are not
//! composed with each other.
//!
//! Index convention: `g(m_st, m_ast)` has `m_st` Stokes and `m_ast`
//! anti-Stokes field factors, e.g. `g3_s1a2 = g(1, 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extsource::ExternalSourceStats;
use crate::params::ThermalOccupancy;

/// Which channel is detected first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionOrder {
    StokesFirst,
    AntiStokesFirst,
}

impl DetectionOrder {
    pub fn name(self) -> &'static str {
        match self {
            Self::StokesFirst => "stokes-first",
            Self::AntiStokesFirst => "anti-stokes-first",
        }
    }
}

/// Delay between the Stokes detection at `t` and the anti-Stokes detection
/// at `t + tau`.
///
/// Stored as a magnitude plus an explicit order so that the two one-sided
/// limits at zero delay (`0+`, Stokes first; `0-`, anti-Stokes first) are
/// distinct values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delay {
    magnitude: f64,
    order: DetectionOrder,
}

impl Delay {
    /// Signed delay in seconds. `tau >= +0.0` is Stokes first; negative
    /// values, including `-0.0`, are anti-Stokes first.
    pub fn from_seconds(tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::Domain(format!("delay must be finite, got {tau}")));
        }
        let order = if tau.is_sign_negative() {
            DetectionOrder::AntiStokesFirst
        } else {
            DetectionOrder::StokesFirst
        };
        Ok(Self {
            magnitude: tau.abs(),
            order,
        })
    }

    pub fn stokes_first(seconds: f64) -> Result<Self> {
        Self::from_seconds(seconds.abs())
    }

    pub fn anti_stokes_first(seconds: f64) -> Result<Self> {
        Self::from_seconds(-seconds.abs())
    }

    /// `tau = 0+`.
    pub fn zero() -> Self {
        Self {
            magnitude: 0.0,
            order: DetectionOrder::StokesFirst,
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn order(&self) -> DetectionOrder {
        self.order
    }

    /// Signed delay; `-0.0` for the `0-` limit.
    pub fn seconds(&self) -> f64 {
        match self.order {
            DetectionOrder::StokesFirst => self.magnitude,
            DetectionOrder::AntiStokesFirst => -self.magnitude,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// Whole ensemble inside the drive coherence radius, zero delay, no background.
    Ideal,
    /// As `Ideal` but with a finite herald delay.
    Delay,
    /// Drive coherence radius below the intermolecular distance.
    Incoherent { molecules: u32 },
    /// Uncorrelated background light in both channels.
    Background,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::Delay => "delay",
            Self::Incoherent { .. } => "incoherent",
            Self::Background => "background",
        }
    }
}

/// Normalized correlators feeding the source metrics and the joint table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub scenario: Scenario,
    pub delay: Delay,
    /// `g(1, 1)`.
    pub g2_cross: f64,
    /// `g(1, 2)`: one Stokes, two anti-Stokes.
    pub g3_s1a2: f64,
    /// `g(2, 1)`: two Stokes, one anti-Stokes.
    pub g3_s2a1: f64,
    pub g2_st_auto: f64,
    pub g2_ast_auto: f64,
    pub g3_st_auto: f64,
    pub g3_ast_auto: f64,
}

impl CorrelationSet {
    /// Correlator with `m_st` Stokes and `m_ast` anti-Stokes factors, for
    /// `1 <= m_st + m_ast <= 3`. First-order entries are one by normalization.
    pub fn normalized(&self, m_st: usize, m_ast: usize) -> Option<f64> {
        match (m_st, m_ast) {
            (1, 0) | (0, 1) => Some(1.0),
            (1, 1) => Some(self.g2_cross),
            (1, 2) => Some(self.g3_s1a2),
            (2, 1) => Some(self.g3_s2a1),
            (2, 0) => Some(self.g2_st_auto),
            (0, 2) => Some(self.g2_ast_auto),
            (3, 0) => Some(self.g3_st_auto),
            (0, 3) => Some(self.g3_ast_auto),
            _ => None,
        }
    }

    pub fn entries(&self) -> [f64; 7] {
        [
            self.g2_cross,
            self.g3_s1a2,
            self.g3_s2a1,
            self.g2_st_auto,
            self.g2_ast_auto,
            self.g3_st_auto,
            self.g3_ast_auto,
        ]
    }

    fn checked(self) -> Result<Self> {
        if self.entries().iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(self)
        } else {
            Err(Error::Domain(format!(
                "correlation set has negative or non-finite entries: {:?}",
                self.entries()
            )))
        }
    }
}

/// Same-channel autocorrelations at zero delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoCorrelations {
    pub g2_st: f64,
    pub g2_ast: f64,
    pub g3_st: f64,
    pub g3_ast: f64,
}

/// Stokes-only and anti-Stokes-only autocorrelations of the Raman light
/// from an ensemble inside the drive coherence radius.
///
/// The vibrational mode is thermal (Gaussian), giving `2!` and `3!` pairing
/// counts, multiplied by the drive moments. Independent of `n_v`.
pub fn auto_correlations(src: &ExternalSourceStats) -> Result<AutoCorrelations> {
    let g2 = 2.0 * src.eval_g2(0.0)?;
    let g3 = 6.0 * src.eval_g3(0.0)?;
    Ok(AutoCorrelations {
        g2_st: g2,
        g2_ast: g2,
        g3_st: g3,
        g3_ast: g3,
    })
}

/// Autocorrelations for `molecules` incoherently driven molecules:
/// `g2 = 2 (1 - 1/M) + 2 g2_Omega / M` and
/// `g3 = 6 [(1 - 1/M)(1 - 2/M) + 3 g2_Omega (1 - 1/M) / M + g3_Omega / M^2]`.
pub fn incoherent_auto_correlations(
    molecules: u32,
    src: &ExternalSourceStats,
) -> Result<AutoCorrelations> {
    let inv_m = inverse_count(molecules)?;
    let (g2w, g3w) = (src.eval_g2(0.0)?, src.eval_g3(0.0)?);
    let g2 = 2.0 * (1.0 - inv_m) + 2.0 * g2w * inv_m;
    let g3 = 6.0
        * ((1.0 - inv_m) * (1.0 - 2.0 * inv_m)
            + 3.0 * g2w * inv_m * (1.0 - inv_m)
            + g3w * inv_m * inv_m);
    Ok(AutoCorrelations {
        g2_st: g2,
        g2_ast: g2,
        g3_st: g3,
        g3_ast: g3,
    })
}

/// Correlators of the ideal ensemble at herald delay `delay`.
///
/// With `w = (1 + n_v)/n_v` for Stokes-first and `w = n_v/(1 + n_v)` for
/// anti-Stokes-first detection, and `x = exp(-2 gamma_v |tau|)`:
///
/// - `g2_cross = g2_Omega(|tau|) (1 + w x)`
/// - `g3_s1a2 = g3_s2a1 = 2 g3_Omega(|tau|) (1 + 2 w x)`
///
/// The two third-order orderings coincide for a thermal phonon mode; both
/// are weighted with the same drive moment.
pub fn ideal_correlations(
    n_v: ThermalOccupancy,
    gamma_v: f64,
    delay: Delay,
    src: &ExternalSourceStats,
) -> Result<CorrelationSet> {
    if !(gamma_v.is_finite() && gamma_v > 0.0) {
        return Err(Error::Domain(format!(
            "gamma_v must be finite and positive, got {gamma_v}"
        )));
    }
    let tau = delay.magnitude();
    let weight = match delay.order() {
        DetectionOrder::StokesFirst => n_v.stokes_first_weight(),
        DetectionOrder::AntiStokesFirst => n_v.anti_stokes_first_weight(),
    };
    let decay = (-2.0 * gamma_v * tau).exp();
    let g2_omega = src.eval_g2(tau)?;
    let g3_omega = src.eval_g3(tau)?;
    let g3 = 2.0 * g3_omega * (1.0 + 2.0 * weight * decay);
    let autos = auto_correlations(src)?;
    CorrelationSet {
        scenario: if delay.is_zero() {
            Scenario::Ideal
        } else {
            Scenario::Delay
        },
        delay,
        g2_cross: g2_omega * (1.0 + weight * decay),
        g3_s1a2: g3,
        g3_s2a1: g3,
        g2_st_auto: autos.g2_st,
        g2_ast_auto: autos.g2_ast,
        g3_st_auto: autos.g3_st,
        g3_ast_auto: autos.g3_ast,
    }
    .checked()
}

/// Correlators at `tau = 0+` when each of `molecules` molecules sees an
/// independent drive phase.
///
/// - `g2_cross = 1 - 1/M + (g2_Omega/M)(1 + w)`
/// - `g3 = 2 (1 - 1/M)(1 - 2/M) + (2 g2_Omega/M)(1 - 1/M)(3 + 2w) + (2 g3_Omega/M^2)(1 + 2w)`
///
/// with `w = (1 + n_v)/n_v`; `M = 1` is the ideal set.
pub fn incoherent_correlations(
    n_v: ThermalOccupancy,
    molecules: u32,
    src: &ExternalSourceStats,
) -> Result<CorrelationSet> {
    let inv_m = inverse_count(molecules)?;
    let w = n_v.stokes_first_weight();
    let g2w = src.eval_g2(0.0)?;
    let g3w = src.eval_g3(0.0)?;
    let g2 = 1.0 - inv_m + g2w * inv_m * (1.0 + w);
    let g3 = 2.0 * (1.0 - inv_m) * (1.0 - 2.0 * inv_m)
        + 2.0 * g2w * inv_m * (1.0 - inv_m) * (3.0 + 2.0 * w)
        + 2.0 * g3w * inv_m * inv_m * (1.0 + 2.0 * w);
    let autos = incoherent_auto_correlations(molecules, src)?;
    CorrelationSet {
        scenario: Scenario::Incoherent { molecules },
        delay: Delay::zero(),
        g2_cross: g2,
        g3_s1a2: g3,
        g3_s2a1: g3,
        g2_st_auto: autos.g2_st,
        g2_ast_auto: autos.g2_ast,
        g3_st_auto: autos.g3_st,
        g3_ast_auto: autos.g3_ast,
    }
    .checked()
}

fn inverse_count(molecules: u32) -> Result<f64> {
    if molecules == 0 {
        Err(Error::Domain("molecule count must be at least 1".into()))
    } else {
        Ok(1.0 / f64::from(molecules))
    }
}

/// Background light at the Stokes and anti-Stokes frequencies.
///
/// The background is uncorrelated with the Raman light and between the two
/// channels. SNR is Raman intensity over background intensity per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundParams {
    pub snr_st: f64,
    pub snr_ast: f64,
    pub g2_bg_st: f64,
    pub g2_bg_ast: f64,
    /// Third-order background autocorrelations. They enter only the
    /// three-photon single-channel entries of the joint table.
    pub g3_bg_st: f64,
    pub g3_bg_ast: f64,
}

impl BackgroundParams {
    /// Chaotic (thermal) background: `g2 = 2`, `g3 = 6` in both channels.
    pub fn thermal(snr_st: f64, snr_ast: f64) -> Result<Self> {
        Self {
            snr_st,
            snr_ast,
            g2_bg_st: 2.0,
            g2_bg_ast: 2.0,
            g3_bg_st: 6.0,
            g3_bg_ast: 6.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        for (name, v) in [("snr_st", self.snr_st), ("snr_ast", self.snr_ast)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        let stats = [self.g2_bg_st, self.g2_bg_ast, self.g3_bg_st, self.g3_bg_ast];
        if stats.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!(
                "background correlations must be finite and non-negative, got {stats:?}"
            )));
        }
        Ok(self)
    }

    /// Background moment of `k` photons in the Stokes channel.
    pub(crate) fn stokes_moment(&self, k: usize) -> f64 {
        match k {
            0 | 1 => 1.0,
            2 => self.g2_bg_st,
            _ => self.g3_bg_st,
        }
    }

    pub(crate) fn anti_stokes_moment(&self, k: usize) -> f64 {
        match k {
            0 | 1 => 1.0,
            2 => self.g2_bg_ast,
            _ => self.g3_bg_ast,
        }
    }
}

/// Correlators with background light added to an ideal zero-delay set.
///
/// `g2_cross` and `g3_s1a2` use the closed forms
///
/// ```text
/// g2 = 1 + (g2_0 - 1) S_St S_aSt / ((1 + S_St)(1 + S_aSt))
/// g3 = (g3_0 + 4 g2_0 / S_aSt + g2_aSt,auto / S_St) S_St S_aSt^2 / D
///      + 4 S_aSt / D + g2_BgaSt / (1 + S_aSt)^2,     D = (1 + S_St)(1 + S_aSt)^2
/// ```
///
/// where `g2_aSt,auto = 2 g2_Omega(0)`. The remaining entries come from
/// [`mixture_correlation`].
pub fn background_correlations(
    base: &CorrelationSet,
    bg: &BackgroundParams,
) -> Result<CorrelationSet> {
    if base.scenario != Scenario::Ideal || base.delay != Delay::zero() {
        return Err(Error::Scenario(format!(
            "background is added to an ideal zero-delay set only, got {} at tau = {:e}",
            base.scenario.name(),
            base.delay.seconds()
        )));
    }
    let bg = bg.validated()?;
    let (s, a) = (bg.snr_st, bg.snr_ast);
    let g2 = 1.0 + (base.g2_cross - 1.0) * s * a / ((1.0 + s) * (1.0 + a));
    let d = (1.0 + s) * (1.0 + a) * (1.0 + a);
    let g3 = (base.g3_s1a2 + 4.0 * base.g2_cross / a + base.g2_ast_auto / s) * s * a * a / d
        + 4.0 * a / d
        + bg.g2_bg_ast / ((1.0 + a) * (1.0 + a));
    let mix = |m_st, m_ast| mixture_correlation(base, &bg, m_st, m_ast);
    CorrelationSet {
        scenario: Scenario::Background,
        delay: base.delay,
        g2_cross: g2,
        g3_s1a2: g3,
        g3_s2a1: mix(2, 1)?,
        g2_st_auto: mix(2, 0)?,
        g2_ast_auto: mix(0, 2)?,
        g3_st_auto: mix(3, 0)?,
        g3_ast_auto: mix(0, 3)?,
    }
    .checked()
}

/// Normalized correlator of (Raman + background) fields, `1 <= m_st + m_ast <= 3`.
///
/// Expanding `(E + B)` in every factor and keeping the terms with as many
/// creators as annihilators per field gives
///
/// ```text
/// sum_{k_s, k_a} C(m_st, k_s)^2 C(m_ast, k_a)^2 g_sig(k_s, k_a) S_St^k_s S_aSt^k_a
///                g_BgSt(m_st - k_s) g_BgaSt(m_ast - k_a)
///   / ((1 + S_St)^m_st (1 + S_aSt)^m_ast)
/// ```
pub fn mixture_correlation(
    signal: &CorrelationSet,
    bg: &BackgroundParams,
    m_st: usize,
    m_ast: usize,
) -> Result<f64> {
    if m_st + m_ast == 0 || m_st + m_ast > 3 {
        return Err(Error::UnsupportedOrder {
            m_st,
            m_ast,
            reason: "mixture correlators cover one to three photons",
        });
    }
    let (s, a) = (bg.snr_st, bg.snr_ast);
    let mut total = 0.0;
    for k_s in 0..=m_st {
        for k_a in 0..=m_ast {
            let sig = if k_s + k_a == 0 {
                1.0
            } else {
                signal
                    .normalized(k_s, k_a)
                    .expect("sub-orders of a supported order are supported")
            };
            let weight = (binomial(m_st, k_s) * binomial(m_ast, k_a)).powi(2);
            total += weight
                * sig
                * s.powi(k_s as i32)
                * a.powi(k_a as i32)
                * bg.stokes_moment(m_st - k_s)
                * bg.anti_stokes_moment(m_ast - k_a);
        }
    }
    Ok(total / ((1.0 + s).powi(m_st as i32) * (1.0 + a).powi(m_ast as i32)))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
