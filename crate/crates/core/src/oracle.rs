//! Brute-force Gaussian-moment (Wick) evaluation of the Raman correlators.
//!
//! Each Stokes field factor carries a phonon creator (`E_St ~ Omega b^dag`),
//! each anti-Stokes factor an annihilator (`E_aSt ~ Omega b`). A correlator is
//! written as an ordered string of phonon operators following the detection
//! time ordering (daggered fields with time increasing to the right,
//! undaggered fields with time decreasing), and its expectation in the
//! thermal phonon state is the sum over all pairings of annihilators with
//! creators. Which two-point function a pair contributes, `<b b^dag>`
//! (weight `n_v + 1`) or `<b^dag b>` (weight `n_v`), depends on which of the
//! two operators stands first in the string.
//!
//! Drive moments are scalar multipliers (`g2_Omega`, `g3_Omega`) and are not
//! Wick-expanded. Equal-time factors within one frequency band are kept in
//! normal order.
//!
//! Nothing here reuses the closed forms in [`crate::correlations`]; the two
//! are compared in tests.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlations::{BackgroundParams, CorrelationSet, Delay, DetectionOrder};
use crate::error::{Error, Result};
use crate::extsource::ExternalSourceStats;
use crate::params::ThermalOccupancy;

/// Largest number of creator/annihilator pairs evaluated.
pub const MAX_PAIRS: usize = 3;

/// Largest ensemble for [`multi_molecule_correlator`] (`M^(2 m)` index terms).
pub const MAX_ENUMERATED_MOLECULES: u32 = 6;

/// Correlator orders `(m_st, m_ast)` the oracle builds.
pub const SUPPORTED_ORDERS: [(usize, usize); 7] =
    [(1, 1), (1, 2), (2, 1), (2, 0), (0, 2), (3, 0), (0, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    PhononCreate,
    PhononAnnihilate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub mode: Mode,
    /// Seconds.
    pub time: f64,
    pub molecule: usize,
}

impl Factor {
    pub fn create(time: f64, molecule: usize) -> Self {
        Self {
            mode: Mode::PhononCreate,
            time,
            molecule,
        }
    }

    pub fn annihilate(time: f64, molecule: usize) -> Self {
        Self {
            mode: Mode::PhononAnnihilate,
            time,
            molecule,
        }
    }
}

/// Ordered product of phonon operators plus the drive moment multiplying it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorString {
    pub factors: Vec<Factor>,
    /// Number of `Omega^dag Omega` pairs of the drive moment (`g^(k)_Omega`).
    pub drive_order: usize,
    /// Delay at which the drive moment is evaluated.
    pub drive_delay: f64,
}

impl OperatorString {
    pub fn new(factors: Vec<Factor>) -> Self {
        Self {
            factors,
            drive_order: 0,
            drive_delay: 0.0,
        }
    }

    pub fn with_drive(mut self, order: usize, delay: f64) -> Self {
        self.drive_order = order;
        self.drive_delay = delay;
        self
    }

    /// Phonon expectation times the drive moment.
    pub fn evaluate(&self, table: &TwoPointTable, src: &ExternalSourceStats) -> Result<Complex64> {
        let moment = gaussian_moment(self, table)?;
        Ok(moment.value * src.moment(self.drive_order, self.drive_delay)?)
    }
}

/// Two-point functions of the damped thermal vibration.
///
/// For `a` standing before `b` in a string, on the same molecule:
///
/// - `<b(t1) b^dag(t2)> = (n_v + 1) exp(-i w (t1 - t2) - gamma |t1 - t2|)`
/// - `<b^dag(t1) b(t2)> = n_v exp(+i w (t1 - t2) - gamma |t1 - t2|)`
///
/// Molecules have independent baths, so cross-molecule pairs vanish, as do
/// `<b b>` and `<b^dag b^dag>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointTable {
    pub n_v: f64,
    /// Amplitude decay rate, 1/s.
    pub gamma_v: f64,
    /// Vibrational frequency, Hz.
    pub nu_v: f64,
}

impl TwoPointTable {
    pub fn new(n_v: ThermalOccupancy, gamma_v: f64, nu_v: f64) -> Result<Self> {
        if !(gamma_v.is_finite() && gamma_v >= 0.0 && nu_v.is_finite()) {
            return Err(Error::Domain(format!(
                "two-point table needs finite gamma_v >= 0 and nu_v, got {gamma_v}, {nu_v}"
            )));
        }
        Ok(Self {
            n_v: n_v.value(),
            gamma_v,
            nu_v,
        })
    }

    /// Contraction of `first` with `second`, `first` to the left in the string.
    pub fn contraction(&self, first: &Factor, second: &Factor) -> Complex64 {
        if first.molecule != second.molecule || first.mode == second.mode {
            return Complex64::new(0.0, 0.0);
        }
        let dt = first.time - second.time;
        let omega = 2.0 * std::f64::consts::PI * self.nu_v;
        let damping = (-self.gamma_v * dt.abs()).exp();
        match first.mode {
            Mode::PhononAnnihilate => {
                (self.n_v + 1.0) * damping * Complex64::from_polar(1.0, -omega * dt)
            }
            Mode::PhononCreate => self.n_v * damping * Complex64::from_polar(1.0, omega * dt),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoment {
    pub value: Complex64,
    /// Number of annihilator-creator pairings enumerated (`m!` for `m` pairs).
    pub matchings: usize,
    /// False when creators and annihilators do not balance; the moment is then zero.
    pub balanced: bool,
}

/// Wick expansion of the ordered operator string `s` (drive moment excluded).
pub fn gaussian_moment(s: &OperatorString, table: &TwoPointTable) -> Result<GaussianMoment> {
    let (annihilators, creators): (Vec<usize>, Vec<usize>) = (0..s.factors.len())
        .partition(|&i| s.factors[i].mode == Mode::PhononAnnihilate);
    if annihilators.len() != creators.len() {
        return Ok(GaussianMoment {
            value: Complex64::new(0.0, 0.0),
            matchings: 0,
            balanced: false,
        });
    }
    let pairs = creators.len();
    if pairs > MAX_PAIRS {
        return Err(Error::UnsupportedOrder {
            m_st: annihilators.len(),
            m_ast: creators.len(),
            reason: "Wick enumeration is limited to three operator pairs",
        });
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut matchings = 0;
    for_each_permutation(&mut creators.clone(), 0, &mut |perm| {
        matchings += 1;
        let term = annihilators
            .iter()
            .zip(perm)
            .map(|(&a, &c)| {
                let (first, second) = if a < c { (a, c) } else { (c, a) };
                table.contraction(&s.factors[first], &s.factors[second])
            })
            .product::<Complex64>();
        value += term;
    });
    Ok(GaussianMoment {
        value,
        matchings,
        balanced: true,
    })
}

fn for_each_permutation(items: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Normalized correlator with its imaginary residual (zero up to rounding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub imaginary: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    StokesDagger,
    AntiStokesDagger,
    AntiStokes,
    Stokes,
}

impl Field {
    fn is_dagger(self) -> bool {
        matches!(self, Self::StokesDagger | Self::AntiStokesDagger)
    }

    fn is_stokes(self) -> bool {
        matches!(self, Self::StokesDagger | Self::Stokes)
    }

    /// Phonon operator inside the field factor.
    fn phonon(self, t_st: f64, t_ast: f64, molecule: usize) -> Factor {
        match self {
            Self::StokesDagger => Factor::annihilate(t_st, molecule),
            Self::Stokes => Factor::create(t_st, molecule),
            Self::AntiStokesDagger => Factor::create(t_ast, molecule),
            Self::AntiStokes => Factor::annihilate(t_ast, molecule),
        }
    }
}

/// Field factors of `g(m_st, m_ast)` in detection-time order.
fn field_string(m_st: usize, m_ast: usize, order: DetectionOrder) -> Vec<Field> {
    let rep = |f: Field, m: usize| std::iter::repeat_n(f, m);
    match order {
        DetectionOrder::StokesFirst => rep(Field::StokesDagger, m_st)
            .chain(rep(Field::AntiStokesDagger, m_ast))
            .chain(rep(Field::AntiStokes, m_ast))
            .chain(rep(Field::Stokes, m_st))
            .collect(),
        DetectionOrder::AntiStokesFirst => rep(Field::AntiStokesDagger, m_ast)
            .chain(rep(Field::StokesDagger, m_st))
            .chain(rep(Field::Stokes, m_st))
            .chain(rep(Field::AntiStokes, m_ast))
            .collect(),
    }
}

fn check_order(m_st: usize, m_ast: usize) -> Result<()> {
    if SUPPORTED_ORDERS.contains(&(m_st, m_ast)) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder {
            m_st,
            m_ast,
            reason: "supported orders are (1,1), (1,2), (2,1), (2,0), (0,2), (3,0), (0,3)",
        })
    }
}

/// Builds the single-molecule operator string of `g(m_st, m_ast)` at `delay`,
/// including its drive moment.
pub fn correlator_string(m_st: usize, m_ast: usize, delay: Delay) -> OperatorString {
    let (t_st, t_ast) = (0.0, delay.seconds());
    let factors = field_string(m_st, m_ast, delay.order())
        .into_iter()
        .map(|f| f.phonon(t_st, t_ast, 0))
        .collect();
    // Single-channel moments are equal-time.
    let drive_delay = if m_st > 0 && m_ast > 0 {
        delay.magnitude()
    } else {
        0.0
    };
    OperatorString::new(factors).with_drive(m_st + m_ast, drive_delay)
}

/// Normalized correlator of a single molecule (equivalently, an ensemble
/// inside the drive coherence radius) by Wick enumeration.
pub fn raman_correlator(
    order: (usize, usize),
    delay: Delay,
    table: &TwoPointTable,
    src: &ExternalSourceStats,
) -> Result<OracleValue> {
    let (m_st, m_ast) = order;
    check_order(m_st, m_ast)?;
    let numerator = correlator_string(m_st, m_ast, delay).evaluate(table, src)?;
    let stokes = OperatorString::new(vec![Factor::annihilate(0.0, 0), Factor::create(0.0, 0)]);
    let anti_stokes = OperatorString::new(vec![Factor::create(0.0, 0), Factor::annihilate(0.0, 0)]);
    let i_st = gaussian_moment(&stokes, table)?.value.re;
    let i_ast = gaussian_moment(&anti_stokes, table)?.value.re;
    let norm = i_st.powi(m_st as i32) * i_ast.powi(m_ast as i32);
    Ok(OracleValue {
        value: numerator.re / norm,
        imaginary: numerator.im / norm,
    })
}

/// Normalized correlator at `tau = 0+` for `molecules` molecules each driven
/// with an independent, zero-mean drive phase.
///
/// Every field factor is expanded over the molecule index. An index
/// assignment survives only if each molecule carries as many `Omega^dag` as
/// `Omega` factors; it then contributes the product of per-molecule drive
/// moments times the Wick expansion of the phonon string (pairs on different
/// molecules vanish).
pub fn multi_molecule_correlator(
    order: (usize, usize),
    molecules: u32,
    n_v: ThermalOccupancy,
    src: &ExternalSourceStats,
) -> Result<f64> {
    let (m_st, m_ast) = order;
    check_order(m_st, m_ast)?;
    if molecules == 0 || molecules > MAX_ENUMERATED_MOLECULES {
        return Err(Error::Domain(format!(
            "molecule enumeration supports 1..={MAX_ENUMERATED_MOLECULES} molecules, got {molecules}"
        )));
    }
    let table = TwoPointTable::new(n_v, 0.0, 0.0)?;
    let m = molecules as usize;
    let numerator = enumerate_molecules(&field_string(m_st, m_ast, DetectionOrder::StokesFirst), m, &table, src)?;
    let i_st = enumerate_molecules(&[Field::StokesDagger, Field::Stokes], m, &table, src)?;
    let i_ast = enumerate_molecules(&[Field::AntiStokesDagger, Field::AntiStokes], m, &table, src)?;
    Ok(numerator / (i_st.powi(m_st as i32) * i_ast.powi(m_ast as i32)))
}

fn enumerate_molecules(
    fields: &[Field],
    molecules: usize,
    table: &TwoPointTable,
    src: &ExternalSourceStats,
) -> Result<f64> {
    let mut index = vec![0usize; fields.len()];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut drive = 1.0;
        let mut balanced = true;
        for j in 0..molecules {
            let (mut dagger, mut plain) = (0, 0);
            for (f, &i) in fields.iter().zip(&index) {
                if i == j {
                    if f.is_dagger() {
                        dagger += 1;
                    } else {
                        plain += 1;
                    }
                }
            }
            if dagger != plain {
                balanced = false;
                break;
            }
            drive *= src.moment(dagger, 0.0)?;
        }
        if balanced {
            let factors = fields
                .iter()
                .zip(&index)
                .map(|(f, &i)| f.phonon(0.0, 0.0, i))
                .collect();
            total += gaussian_moment(&OperatorString::new(factors), table)?.value * drive;
        }
        // Odometer over molecule assignments.
        let mut pos = 0;
        loop {
            if pos == index.len() {
                return Ok(total.re);
            }
            index[pos] += 1;
            if index[pos] < molecules {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Normalized correlator of Raman light plus uncorrelated background, by
/// enumerating which field factors come from the background.
///
/// Each of the `2 (m_st + m_ast)` factors is assigned to signal or
/// background. Signal and background commute and are independent, so an
/// assignment contributes when, per channel, the signal carries as many
/// daggered as undaggered factors; its value is the signal correlator of that
/// sub-order times the background moment of the rest, in units where the
/// background intensity is one and the signal intensity is the SNR.
pub fn background_mixture_correlator(
    order: (usize, usize),
    signal: &CorrelationSet,
    bg: &BackgroundParams,
) -> Result<f64> {
    let (m_st, m_ast) = order;
    check_order(m_st, m_ast)?;
    let fields = field_string(m_st, m_ast, DetectionOrder::StokesFirst);
    let mut total = 0.0;
    for mask in 0u32..(1 << fields.len()) {
        // Counts of signal factors: [stokes dagger, stokes, anti-stokes dagger, anti-stokes].
        let mut counts = [0usize; 4];
        for (bit, f) in fields.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                let slot = match (f.is_stokes(), f.is_dagger()) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                counts[slot] += 1;
            }
        }
        if counts[0] != counts[1] || counts[2] != counts[3] {
            continue;
        }
        let (k_st, k_ast) = (counts[0], counts[2]);
        let sig = if k_st + k_ast == 0 {
            1.0
        } else {
            signal.normalized(k_st, k_ast).ok_or(Error::UnsupportedOrder {
                m_st: k_st,
                m_ast: k_ast,
                reason: "signal sub-order missing",
            })?
        };
        total += sig
            * bg.snr_st.powi(k_st as i32)
            * bg.snr_ast.powi(k_ast as i32)
            * bg.stokes_moment(m_st - k_st)
            * bg.anti_stokes_moment(m_ast - k_ast);
    }
    Ok(total / ((1.0 + bg.snr_st).powi(m_st as i32) * (1.0 + bg.snr_ast).powi(m_ast as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: f64) -> TwoPointTable {
        TwoPointTable::new(ThermalOccupancy::new(n).unwrap(), 1e12, 50e12).unwrap()
    }

    #[test]
    fn equal_time_moments() {
        let n = 0.3;
        let t = table(n);
        let s = OperatorString::new(vec![
            Factor::create(0.0, 0),
            Factor::create(0.0, 0),
            Factor::annihilate(0.0, 0),
            Factor::annihilate(0.0, 0),
        ]);
        let m = gaussian_moment(&s, &t).unwrap();
        assert!((m.value.re - 2.0 * n * n).abs() < 1e-15);
        assert_eq!(m.matchings, 2);

        let s = OperatorString::new(vec![
            Factor::annihilate(0.0, 0),
            Factor::create(0.0, 0),
            Factor::create(0.0, 0),
            Factor::annihilate(0.0, 0),
        ]);
        let m = gaussian_moment(&s, &t).unwrap();
        assert!((m.value.re - 2.0 * n * (n + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn matching_counts_are_factorial() {
        let t = table(0.1);
        for pairs in 1..=3usize {
            let mut f = vec![Factor::create(0.0, 0); pairs];
            f.extend(vec![Factor::annihilate(0.0, 0); pairs]);
            let m = gaussian_moment(&OperatorString::new(f), &t).unwrap();
            assert_eq!(m.matchings, (1..=pairs).product::<usize>());
        }
    }

    #[test]
    fn unbalanced_and_oversized_strings() {
        let t = table(0.1);
        let s = OperatorString::new(vec![Factor::create(0.0, 0), Factor::create(1.0, 0)]);
        let m = gaussian_moment(&s, &t).unwrap();
        assert!(!m.balanced);
        assert_eq!(m.value, Complex64::new(0.0, 0.0));

        let mut f = vec![Factor::create(0.0, 0); 4];
        f.extend(vec![Factor::annihilate(0.0, 0); 4]);
        assert!(matches!(
            gaussian_moment(&OperatorString::new(f), &t),
            Err(Error::UnsupportedOrder { .. })
        ));
    }

    #[test]
    fn cross_molecule_pairs_vanish() {
        let t = table(0.2);
        let s = OperatorString::new(vec![Factor::create(0.0, 0), Factor::annihilate(0.0, 1)]);
        assert_eq!(gaussian_moment(&s, &t).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_channel_autos_are_thermal() {
        for n in [1e-5, 1e-3, 0.2] {
            let t = table(n);
            let src = ExternalSourceStats::Coherent;
            let g = |o| raman_correlator(o, Delay::zero(), &t, &src).unwrap().value;
            assert!((g((2, 0)) - 2.0).abs() < 1e-12);
            assert!((g((0, 2)) - 2.0).abs() < 1e-12);
            assert!((g((3, 0)) - 6.0).abs() < 1e-12);
            assert!((g((0, 3)) - 6.0).abs() < 1e-12);
        }
        let thermal = ExternalSourceStats::constant(2.0, 6.0).unwrap();
        let g = raman_correlator((0, 3), Delay::zero(), &table(0.01), &thermal).unwrap();
        assert!((g.value - 36.0).abs() < 1e-12);
    }

    #[test]
    fn long_delay_third_order_is_two() {
        let t = TwoPointTable::new(ThermalOccupancy::new(1e-3).unwrap(), 1.0, 0.0).unwrap();
        let g = raman_correlator((1, 2), Delay::stokes_first(40.0).unwrap(), &t, &ExternalSourceStats::Coherent).unwrap();
        assert!((g.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsupported_orders_and_sizes() {
        let t = table(0.1);
        let src = ExternalSourceStats::Coherent;
        assert!(raman_correlator((2, 2), Delay::zero(), &t, &src).is_err());
        assert!(raman_correlator((0, 1), Delay::zero(), &t, &src).is_err());
        let n = ThermalOccupancy::new(0.1).unwrap();
        assert!(multi_molecule_correlator((1, 1), 7, n, &src).is_err());
        assert!(multi_molecule_correlator((1, 1), 0, n, &src).is_err());
    }

    #[test]
    fn one_molecule_enumeration_is_single_molecule() {
        let n = ThermalOccupancy::new(0.02).unwrap();
        let src = ExternalSourceStats::constant(1.7, 4.1).unwrap();
        let t = TwoPointTable::new(n, 1.0, 0.0).unwrap();
        for order in SUPPORTED_ORDERS {
            let a = multi_molecule_correlator(order, 1, n, &src).unwrap();
            let b = raman_correlator(order, Delay::zero(), &t, &src).unwrap().value;
            assert!((a / b - 1.0).abs() < 1e-13, "{order:?}");
        }
    }
}
