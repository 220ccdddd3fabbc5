//! Second- and third-order autocorrelations of the external drive field.
//!
//! The drive is stationary, so every function depends on `|tau|` only.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drive-field statistics `g2_Omega(tau)`, `g3_Omega(tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExternalSourceStats {
    /// Coherent (laser) drive: `g2 = g3 = 1` at every delay.
    #[default]
    Coherent,
    /// Delay-independent values, e.g. `(2, 6)` for single-mode thermal light.
    Constant { g2: f64, g3: f64 },
    Tabulated(TabulatedStats),
}

/// Drive autocorrelations sampled on a strictly increasing delay grid.
///
/// Evaluated by linear interpolation; queries outside the grid clamp to the
/// nearest end value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedStats {
    tau: Vec<f64>,
    g2: Vec<f64>,
    g3: Option<Vec<f64>>,
}

impl TabulatedStats {
    pub fn new(tau: Vec<f64>, g2: Vec<f64>, g3: Option<Vec<f64>>) -> Result<Self> {
        if tau.len() != g2.len() || g3.as_ref().is_some_and(|g3| g3.len() != tau.len()) {
            return Err(Error::Config("tabulated columns differ in length".into()));
        }
        if tau.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("tabulated delays must be strictly increasing".into()));
        }
        let bad = |v: &f64| !(v.is_finite() && *v >= 0.0);
        if tau.iter().any(|t| !t.is_finite())
            || g2.iter().any(bad)
            || g3.iter().flatten().any(bad)
        {
            return Err(Error::Config(
                "tabulated values must be finite, correlations non-negative".into(),
            ));
        }
        Ok(Self { tau, g2, g3 })
    }

    /// Reads `tau, g2[, g3]` rows. `#` starts a comment; a non-numeric first
    /// row is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let (mut tau, mut g2, mut g3) = (Vec::new(), Vec::new(), Vec::new());
        let mut width = None;
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
            if fields.is_empty() {
                continue;
            }
            let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::Config(format!(
                        "{} row {}: {e}",
                        path.display(),
                        i + 1
                    )))
                }
            };
            if !(2..=3).contains(&values.len()) || width.is_some_and(|w| w != values.len()) {
                return Err(Error::Config(format!(
                    "{} row {}: expected a consistent 2 or 3 columns",
                    path.display(),
                    i + 1
                )));
            }
            width = Some(values.len());
            tau.push(values[0]);
            g2.push(values[1]);
            if let Some(v) = values.get(2) {
                g3.push(*v);
            }
        }
        let g3 = (width == Some(3)).then_some(g3);
        Self::new(tau, g2, g3)
    }

    fn interpolate(&self, column: &[f64], tau: f64) -> Result<f64> {
        let grid = &self.tau;
        let (Some(&first), Some(&last)) = (grid.first(), grid.last()) else {
            return Err(Error::Config("tabulated drive statistics are empty".into()));
        };
        if tau <= first {
            return Ok(column[0]);
        }
        if tau >= last {
            return Ok(column[column.len() - 1]);
        }
        let hi = grid.partition_point(|&t| t <= tau);
        let lo = hi - 1;
        let w = (tau - grid[lo]) / (grid[hi] - grid[lo]);
        Ok(column[lo] + w * (column[hi] - column[lo]))
    }
}

impl ExternalSourceStats {
    /// Constant statistics; both values must be finite and non-negative.
    pub fn constant(g2: f64, g3: f64) -> Result<Self> {
        if [g2, g3].iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(Self::Constant { g2, g3 })
        } else {
            Err(Error::Domain(format!(
                "drive correlations must be finite and non-negative, got g2={g2}, g3={g3}"
            )))
        }
    }

    /// `g2_Omega(|tau|)`.
    pub fn eval_g2(&self, tau: f64) -> Result<f64> {
        let tau = check_delay(tau)?;
        match self {
            Self::Coherent => Ok(1.0),
            Self::Constant { g2, .. } => Ok(*g2),
            Self::Tabulated(t) => t.interpolate(&t.g2, tau),
        }
    }

    /// `g3_Omega(|tau|)`.
    pub fn eval_g3(&self, tau: f64) -> Result<f64> {
        let tau = check_delay(tau)?;
        match self {
            Self::Coherent => Ok(1.0),
            Self::Constant { g3, .. } => Ok(*g3),
            Self::Tabulated(t) => match &t.g3 {
                Some(g3) => t.interpolate(g3, tau),
                None => Err(Error::Config(
                    "tabulated drive statistics carry no g3 column".into(),
                )),
            },
        }
    }

    /// Drive moment of order `k` (number of `Omega^dagger Omega` pairs) at
    /// delay `tau`; orders 0 and 1 are normalized to one.
    pub fn moment(&self, k: usize, tau: f64) -> Result<f64> {
        match k {
            0 | 1 => Ok(1.0),
            2 => self.eval_g2(tau),
            3 => self.eval_g3(tau),
            _ => Err(Error::UnsupportedOrder {
                m_st: k,
                m_ast: 0,
                reason: "drive moments above third order are not modelled",
            }),
        }
    }
}

fn check_delay(tau: f64) -> Result<f64> {
    if tau.is_finite() {
        Ok(tau.abs())
    } else {
        Err(Error::Domain(format!("delay must be finite, got {tau}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn two_point() -> ExternalSourceStats {
        ExternalSourceStats::Tabulated(
            TabulatedStats::new(vec![0.0, 1e-12], vec![1.5, 1.0], Some(vec![3.0, 1.0])).unwrap(),
        )
    }

    #[test]
    fn coherent_and_constant() {
        assert_eq!(ExternalSourceStats::Coherent.eval_g2(3e-12).unwrap(), 1.0);
        assert_eq!(ExternalSourceStats::Coherent.eval_g3(-3e-12).unwrap(), 1.0);
        let thermal = ExternalSourceStats::constant(2.0, 6.0).unwrap();
        assert_eq!(thermal.eval_g2(7.0).unwrap(), 2.0);
        assert_eq!(thermal.eval_g3(0.0).unwrap(), 6.0);
        assert!(ExternalSourceStats::constant(-1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let src = two_point();
        assert!((src.eval_g2(0.5e-12).unwrap() - 1.25).abs() < 1e-15);
        assert!((src.eval_g3(0.25e-12).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(src.eval_g2(5e-12).unwrap(), 1.0);
        assert_eq!(src.eval_g2(-0.5e-12).unwrap(), src.eval_g2(0.5e-12).unwrap());
    }

    #[test]
    fn tabulated_rejects_bad_grids() {
        let empty = ExternalSourceStats::Tabulated(TabulatedStats::new(vec![], vec![], None).unwrap());
        assert!(matches!(empty.eval_g2(0.0), Err(Error::Config(_))));
        assert!(TabulatedStats::new(vec![0.0, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(TabulatedStats::new(vec![1.0, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(TabulatedStats::new(vec![0.0], vec![1.0, 2.0], None).is_err());
        assert!(TabulatedStats::new(vec![0.0], vec![-1.0], None).is_err());
        let no_g3 = ExternalSourceStats::Tabulated(TabulatedStats::new(vec![0.0], vec![1.0], None).unwrap());
        assert!(no_g3.eval_g3(0.0).is_err());
        assert!(ExternalSourceStats::Coherent.eval_g2(f64::NAN).is_err());
    }

    #[test]
    fn reads_csv_with_header_and_comments() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# drive statistics\ntau,g2,g3\n0, 1.5, 3.0\n1e-12, 1.0, 1.0").unwrap();
        let t = TabulatedStats::from_csv(f.path()).unwrap();
        assert_eq!(ExternalSourceStats::Tabulated(t), two_point());

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "0,2\n1,x").unwrap();
        assert!(matches!(TabulatedStats::from_csv(g.path()), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn stationary_in_delay_sign(tau in -5e-12f64..5e-12) {
            let src = two_point();
            prop_assert_eq!(src.eval_g2(tau).unwrap(), src.eval_g2(-tau).unwrap());
            prop_assert_eq!(src.eval_g3(tau).unwrap(), src.eval_g3(-tau).unwrap());
            prop_assert_eq!(ExternalSourceStats::Coherent.eval_g3(tau).unwrap(), 1.0);
        }
    }
}
