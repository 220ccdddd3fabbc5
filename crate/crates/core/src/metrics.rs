//! Purity (heralded `g2(0)`) and efficiency of the source.
//!
//! [`purity_efficiency`] is the exact route from a [`CorrelationSet`]. The
//! `*_limits` functions are the asymptotic closed forms of each scenario;
//! they are kept separate for cross-checks and refuse to evaluate outside
//! the regime where they hold. A regime condition `a << b` is taken as
//! `a <= b / REGIME_MARGIN`.

use serde::{Deserialize, Serialize};

use crate::correlations::{BackgroundParams, CorrelationSet, DetectionOrder, Scenario};
use crate::error::{Error, Result};
use crate::extsource::ExternalSourceStats;
use crate::params::ThermalOccupancy;

/// Factor separating the two sides of a `<<` regime condition.
pub const REGIME_MARGIN: f64 = 10.0;

/// Which channel's single-photon detection heralds the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeraldDirection {
    /// One Stokes photon heralds the anti-Stokes channel (detected later).
    StokesHeralds,
    /// One anti-Stokes photon heralds the Stokes channel (detected later).
    AntiStokesHeralds,
}

impl HeraldDirection {
    pub fn name(self) -> &'static str {
        match self {
            Self::StokesHeralds => "stokes-heralds",
            Self::AntiStokesHeralds => "anti-stokes-heralds",
        }
    }

    /// Detection order this configuration operates in.
    pub fn detection_order(self) -> DetectionOrder {
        match self {
            Self::StokesHeralds => DetectionOrder::StokesFirst,
            Self::AntiStokesHeralds => DetectionOrder::AntiStokesFirst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceFigures {
    pub purity: f64,
    pub efficiency: f64,
    pub scenario: Scenario,
    pub herald: HeraldDirection,
}

/// Purity `g3 / g2_cross^2` and efficiency `g2_cross` of the heralded channel.
///
/// Stokes heralding uses `g3_s1a2`, anti-Stokes heralding `g3_s2a1`. The
/// herald must be the channel detected first in `c`.
pub fn purity_efficiency(c: &CorrelationSet, herald: HeraldDirection) -> Result<SourceFigures> {
    let order = c.delay.order();
    if herald.detection_order() != order {
        return Err(Error::HeraldOrder {
            herald: herald.name(),
            needed: herald.detection_order().name(),
            actual: order.name(),
        });
    }
    if !(c.g2_cross > 0.0) {
        return Err(Error::Degenerate(format!(
            "cross-correlation must be positive, got {}",
            c.g2_cross
        )));
    }
    let g3 = match herald {
        HeraldDirection::StokesHeralds => c.g3_s1a2,
        HeraldDirection::AntiStokesHeralds => c.g3_s2a1,
    };
    Ok(SourceFigures {
        purity: g3 / (c.g2_cross * c.g2_cross),
        efficiency: c.g2_cross,
        scenario: c.scenario,
        herald,
    })
}

fn drive_at(src: &ExternalSourceStats, tau: f64) -> Result<(f64, f64)> {
    let g2 = src.eval_g2(tau)?;
    if !(g2 > 0.0) {
        return Err(Error::Degenerate("drive g2 must be positive".into()));
    }
    Ok((g2, src.eval_g3(tau)?))
}

/// Leading-order ideal figures for `n_v << 1`.
///
/// Stokes heralding: `4 n_v g3/g2^2` and `g2/n_v`; anti-Stokes heralding:
/// `2 g3/g2^2` and `g2`, with the drive moments at zero delay.
pub fn ideal_limits(
    n_v: ThermalOccupancy,
    src: &ExternalSourceStats,
    herald: HeraldDirection,
) -> Result<SourceFigures> {
    let (g2, g3) = drive_at(src, 0.0)?;
    let n = n_v.value();
    if n * REGIME_MARGIN > 1.0 {
        return Err(Error::Regime {
            regime: "ideal",
            reason: format!("needs n_v << 1, got {n}"),
        });
    }
    let (purity, efficiency) = match herald {
        HeraldDirection::StokesHeralds => (4.0 * n * g3 / (g2 * g2), g2 / n),
        HeraldDirection::AntiStokesHeralds => (2.0 * g3 / (g2 * g2), g2),
    };
    Ok(SourceFigures {
        purity,
        efficiency,
        scenario: Scenario::Ideal,
        herald,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayRegime {
    /// `n_v << exp(-2 gamma_v tau)`: correlations intact.
    Small,
    /// `n_v >> exp(-2 gamma_v tau)`: correlations destroyed.
    Large,
}

/// Asymptotic figures at herald delay `tau >= 0` (Stokes heralding).
pub fn delay_limits(
    n_v: ThermalOccupancy,
    gamma_v: f64,
    tau: f64,
    src: &ExternalSourceStats,
    regime: DelayRegime,
) -> Result<SourceFigures> {
    if !(gamma_v.is_finite() && gamma_v > 0.0 && tau.is_finite() && tau >= 0.0) {
        return Err(Error::Domain(format!(
            "need gamma_v > 0 and tau >= 0, got gamma_v={gamma_v}, tau={tau}"
        )));
    }
    let (g2, g3) = drive_at(src, tau)?;
    let n = n_v.value();
    // n_v exp(2 gamma tau): the uncorrelated-to-correlated ratio.
    let ratio = n * (2.0 * gamma_v * tau).exp();
    let (purity, efficiency) = match regime {
        DelayRegime::Small => {
            if ratio * REGIME_MARGIN > 1.0 {
                return Err(Error::Regime {
                    regime: "delay/small",
                    reason: format!("needs n_v exp(2 gamma tau) << 1, got {ratio:.3e}"),
                });
            }
            (
                4.0 * n * g3 / (g2 * g2) * (2.0 * gamma_v * tau).exp(),
                g2 / n * (-2.0 * gamma_v * tau).exp(),
            )
        }
        DelayRegime::Large => {
            if ratio < REGIME_MARGIN {
                return Err(Error::Regime {
                    regime: "delay/large",
                    reason: format!("needs n_v exp(2 gamma tau) >> 1, got {ratio:.3e}"),
                });
            }
            (2.0 * g3 / (g2 * g2), g2)
        }
    };
    Ok(SourceFigures {
        purity,
        efficiency,
        scenario: Scenario::Delay,
        herald: HeraldDirection::StokesHeralds,
    })
}

/// Many-molecule (`M >> 1`) figures for an incoherent drive, with
/// `x = g2_Omega(0) / (M n_v)`: purity `(2 + 4x)/(1 + x)^2`, efficiency `1 + x`.
pub fn incoherent_limits(
    n_v: ThermalOccupancy,
    molecules: u32,
    src: &ExternalSourceStats,
) -> Result<SourceFigures> {
    let m = f64::from(molecules);
    if m < REGIME_MARGIN {
        return Err(Error::Regime {
            regime: "incoherent",
            reason: format!("needs M >> 1, got M = {molecules}"),
        });
    }
    let (g2, _) = drive_at(src, 0.0)?;
    let x = g2 / (m * n_v.value());
    Ok(SourceFigures {
        purity: (2.0 + 4.0 * x) / ((1.0 + x) * (1.0 + x)),
        efficiency: 1.0 + x,
        scenario: Scenario::Incoherent { molecules },
        herald: HeraldDirection::StokesHeralds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundRegime {
    /// Both SNR `>> 1`.
    HighSnr,
    /// Both SNR `<< sqrt(n_v)`: the heralded light is the background.
    LowSnr,
    /// `SNR_St << n_v` and `SNR_aSt >> 1`: correlations lost, anti-Stokes
    /// statistics unchanged by postselection.
    StokesSwamped,
}

/// Asymptotic figures with background light.
///
/// `HighSnr` rescales `base` (the background-free figures) by
/// `1 + 1/SNR_St` and `1 - 1/SNR_St - 1/SNR_aSt`; `LowSnr` gives
/// `(g2_BgaSt, 1)`; `StokesSwamped` gives `(2 g2_Omega(0), 1)`.
pub fn background_limits(
    n_v: ThermalOccupancy,
    bg: &BackgroundParams,
    base: &SourceFigures,
    src: &ExternalSourceStats,
    regime: BackgroundRegime,
) -> Result<SourceFigures> {
    let bg = bg.validated()?;
    let (s, a, n) = (bg.snr_st, bg.snr_ast, n_v.value());
    let check = |ok: bool, name: &'static str, cond: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Regime {
                regime: name,
                reason: format!("needs {cond}, got SNR_St={s:.3e}, SNR_aSt={a:.3e}, n_v={n:.3e}"),
            })
        }
    };
    let (purity, efficiency) = match regime {
        BackgroundRegime::HighSnr => {
            check(
                s >= REGIME_MARGIN && a >= REGIME_MARGIN,
                "background/high-snr",
                "both SNR >> 1",
            )?;
            (
                base.purity * (1.0 + 1.0 / s),
                base.efficiency * (1.0 - 1.0 / s - 1.0 / a),
            )
        }
        BackgroundRegime::LowSnr => {
            let edge = n.sqrt() / REGIME_MARGIN;
            check(s <= edge && a <= edge, "background/low-snr", "both SNR << sqrt(n_v)")?;
            (bg.g2_bg_ast, 1.0)
        }
        BackgroundRegime::StokesSwamped => {
            check(
                s <= n / REGIME_MARGIN && a >= REGIME_MARGIN,
                "background/stokes-swamped",
                "SNR_St << n_v and SNR_aSt >> 1",
            )?;
            (2.0 * src.eval_g2(0.0)?, 1.0)
        }
    };
    Ok(SourceFigures {
        purity,
        efficiency,
        scenario: Scenario::Background,
        herald: HeraldDirection::StokesHeralds,
    })
}
