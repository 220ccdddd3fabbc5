//! Joint photon-number table and Monte Carlo detection sampling.
//!
//! Sampling is split into chunks of [`CHUNK_SIZE`] draws. Chunk `i` of a run
//! with seed `s` uses `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`,
//! so estimates depend only on the seed and the total draw count, never on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::correlations::{CorrelationSet, DetectionOrder};
use crate::error::{Error, Result};

/// Largest total photon number kept in the table.
pub const MAX_PHOTONS: usize = 3;

/// Upper bound on the nonvacuum probability mass of a valid table.
pub const NONVACUUM_LIMIT: f64 = 0.1;

/// Fraction of the retained nonvacuum mass above which the estimated
/// four-photon mass is flagged.
pub const NEGLECTED_MASS_FRACTION: f64 = 0.01;

/// Draws per RNG chunk.
pub const CHUNK_SIZE: u64 = 1 << 20;

/// Outcomes `(n_st, n_ast)` with `n_st + n_ast <= 3`, in sampling order.
pub const OUTCOMES: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

fn outcome_index(n_st: usize, n_ast: usize) -> Option<usize> {
    OUTCOMES.iter().position(|&o| o == (n_st, n_ast))
}

/// Truncated joint probabilities `p[n_st][n_ast]` per detection window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPhotonTable {
    pub mu_st: f64,
    pub mu_ast: f64,
    pub order: DetectionOrder,
    /// Indexed like [`OUTCOMES`].
    pub probabilities: [f64; 10],
    /// Rough four-photon mass, `m3^2 / m2` from the per-order masses.
    pub neglected_mass: f64,
    /// Set when `neglected_mass` exceeds 1% of the retained nonvacuum mass.
    pub truncation_warning: bool,
}

impl JointPhotonTable {
    pub fn get(&self, n_st: usize, n_ast: usize) -> f64 {
        outcome_index(n_st, n_ast).map_or(0.0, |i| self.probabilities[i])
    }

    pub fn nonvacuum_mass(&self) -> f64 {
        self.probabilities[1..].iter().sum()
    }

    /// Probabilities of the herald row, `n = 0, 1, 2` photons in the partner
    /// channel, not normalized.
    fn herald_row(&self, herald: Herald) -> [f64; 3] {
        match herald {
            Herald::OneStokes => [self.get(1, 0), self.get(1, 1), self.get(1, 2)],
            Herald::OneAntiStokes => [self.get(0, 1), self.get(1, 1), self.get(2, 1)],
        }
    }

    /// Single-photon probability of the heralded channel with the herald
    /// channel empty.
    fn partner_single(&self, herald: Herald) -> f64 {
        match herald {
            Herald::OneStokes => self.get(0, 1),
            Herald::OneAntiStokes => self.get(1, 0),
        }
    }
}

/// Build the joint table from normalized correlators and mean counts.
pub fn build_table(c: &CorrelationSet, mu_st: f64, mu_ast: f64) -> Result<JointPhotonTable> {
    for (name, mu) in [("mu_st", mu_st), ("mu_ast", mu_ast)] {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::Domain(format!("{name} must be finite and >= 0, got {mu}")));
        }
    }
    let mut p = [0.0; 10];
    for (i, &(n1, n2)) in OUTCOMES.iter().enumerate().skip(1) {
        let g = c.normalized(n1, n2).expect("orders up to three are tabulated");
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::Domain(format!("correlator ({n1}, {n2}) is {g}")));
        }
        let value = mu_st.powi(n1 as i32) * mu_ast.powi(n2 as i32) * g
            / (factorial(n1) * factorial(n2));
        if value > 1.0 {
            return Err(Error::LowIntensity {
                n_st: n1,
                n_ast: n2,
                value,
                reason: "entry exceeds one",
            });
        }
        p[i] = value;
    }
    let rest: f64 = p[1..].iter().sum();
    if rest > NONVACUUM_LIMIT {
        let (i, value) = p
            .iter()
            .copied()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("table is not empty");
        return Err(Error::LowIntensity {
            n_st: OUTCOMES[i].0,
            n_ast: OUTCOMES[i].1,
            value,
            reason: "nonvacuum mass above 0.1, largest entry shown",
        });
    }
    p[0] = 1.0 - rest;

    let mass = |k: usize| -> f64 {
        OUTCOMES
            .iter()
            .zip(p.iter())
            .filter(|((a, b), _)| a + b == k)
            .map(|(_, v)| v)
            .sum()
    };
    let (m2, m3) = (mass(2), mass(3));
    let neglected_mass = if m2 > 0.0 { m3 * m3 / m2 } else { 0.0 };
    Ok(JointPhotonTable {
        mu_st,
        mu_ast,
        order: c.delay.order(),
        probabilities: p,
        neglected_mass,
        truncation_warning: neglected_mass > NEGLECTED_MASS_FRACTION * rest,
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Which single-photon detection is used for postselection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Herald {
    OneStokes,
    OneAntiStokes,
}

impl Herald {
    pub fn name(self) -> &'static str {
        match self {
            Self::OneStokes => "one_stokes",
            Self::OneAntiStokes => "one_anti_stokes",
        }
    }
}

/// Photon-number distribution of the partner channel given one herald photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalDistribution {
    pub herald: Herald,
    /// `p(n | 1)` for `n = 0, 1, 2`.
    pub probabilities: [f64; 3],
    /// Unconditional single-photon probability of the partner channel.
    pub partner_single: f64,
}

impl ConditionalDistribution {
    /// `2 p(2|1) p(0|1) / p(1|1)^2`. The `p(0|1)` factor removes the
    /// normalization of the herald row and leaves `g3 / g2^2` exactly.
    pub fn purity(&self) -> f64 {
        let [p0, p1, p2] = self.probabilities;
        2.0 * p2 * p0 / (p1 * p1)
    }

    /// `(p(1|1) / p(0|1)) / p_partner(1)`.
    pub fn efficiency(&self) -> f64 {
        let [p0, p1, _] = self.probabilities;
        p1 / p0 / self.partner_single
    }
}

pub fn conditional_distribution(t: &JointPhotonTable, herald: Herald) -> Result<ConditionalDistribution> {
    let row = t.herald_row(herald);
    let total: f64 = row.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate(format!(
            "herald row {} has no probability mass",
            herald.name()
        )));
    }
    Ok(ConditionalDistribution {
        herald,
        probabilities: row.map(|v| v / total),
        partner_single: t.partner_single(herald),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    Ok,
    NoHeralds,
    /// Heralds were seen but none with exactly one partner photon.
    NoSinglePhotonEvents,
}

/// Purity and efficiency estimated from postselected counts.
///
/// Purity is `2 N2 N0 / N1^2`, with relative error
/// `sqrt(1/N0 + 4/N1 + 1/N2)` from multinomial error propagation. When no
/// two-photon event is seen the error uses one count in place of `N2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub herald: Herald,
    pub purity: Option<f64>,
    pub purity_stderr: Option<f64>,
    pub efficiency: Option<f64>,
    pub efficiency_stderr: Option<f64>,
    pub herald_count: u64,
    pub trial_count: u64,
    pub seed: u64,
    /// Heralded events with `0, 1, 2` partner photons.
    pub postselected_counts: [u64; 3],
    pub status: EstimateStatus,
}

/// Unconditional run: the estimate plus counts for every table outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconditionalSample {
    pub estimate: McEstimate,
    /// Indexed like [`OUTCOMES`].
    pub outcome_counts: [u64; 10],
}

fn cumulative<const N: usize>(p: &[f64; N]) -> [f64; N] {
    let mut acc = 0.0;
    let mut c = [0.0; N];
    for (ci, pi) in c.iter_mut().zip(p) {
        acc += pi;
        *ci = acc;
    }
    // Guard against rounding leaving the last bin short of one.
    c[N - 1] = f64::INFINITY;
    c
}

fn sample_counts<const N: usize>(p: &[f64; N], draws: u64, seed: u64) -> [u64; N] {
    let cdf = cumulative(p);
    let chunks = draws.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = CHUNK_SIZE.min(draws - chunk * CHUNK_SIZE);
            let mut counts = [0u64; N];
            for _ in 0..n {
                let u: f64 = rng.random();
                let k = cdf.iter().position(|&c| u < c).unwrap_or(N - 1);
                counts[k] += 1;
            }
            counts
        })
        .reduce(
            || [0u64; N],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

fn estimate(
    herald: Herald,
    counts: [u64; 3],
    trials: u64,
    seed: u64,
    efficiency_from: impl Fn(f64, f64) -> Option<(f64, f64)>,
) -> McEstimate {
    let heralds: u64 = counts.iter().sum();
    let [n0, n1, n2] = counts.map(|c| c as f64);
    let mut est = McEstimate {
        herald,
        purity: None,
        purity_stderr: None,
        efficiency: None,
        efficiency_stderr: None,
        herald_count: heralds,
        trial_count: trials,
        seed,
        postselected_counts: counts,
        status: EstimateStatus::Ok,
    };
    if heralds == 0 {
        est.status = EstimateStatus::NoHeralds;
        return est;
    }
    if counts[1] == 0 {
        est.status = EstimateStatus::NoSinglePhotonEvents;
        return est;
    }
    if counts[0] > 0 {
        let n2_floor = n2.max(1.0);
        est.purity = Some(2.0 * n2 * n0 / (n1 * n1));
        est.purity_stderr =
            Some(2.0 * n2_floor * n0 / (n1 * n1) * (1.0 / n0 + 4.0 / n1 + 1.0 / n2_floor).sqrt());
        if let Some((e, se)) = efficiency_from(n0, n1) {
            est.efficiency = Some(e);
            est.efficiency_stderr = Some(se);
        }
    }
    est
}

/// Sample whole detection windows from the table and postselect on `herald`.
pub fn sample_unconditional(
    t: &JointPhotonTable,
    trials: u64,
    seed: u64,
    herald: Herald,
) -> Result<UnconditionalSample> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let outcome_counts = sample_counts(&t.probabilities, trials, seed);
    let count = |a: usize, b: usize| outcome_counts[outcome_index(a, b).expect("tabulated outcome")];
    let (row, single) = match herald {
        Herald::OneStokes => ([count(1, 0), count(1, 1), count(1, 2)], count(0, 1)),
        Herald::OneAntiStokes => ([count(0, 1), count(1, 1), count(2, 1)], count(1, 0)),
    };
    let n = trials as f64;
    let s = single as f64;
    let estimate = estimate(herald, row, trials, seed, |n0, n1| {
        (single > 0).then(|| {
            let e = n1 / n0 / (s / n);
            (e, e * (1.0 / n1 + 1.0 / n0 + 1.0 / s - 1.0 / n).max(0.0).sqrt())
        })
    });
    Ok(UnconditionalSample {
        estimate,
        outcome_counts,
    })
}

/// Sample the partner channel directly from the conditional distribution,
/// one draw per herald.
pub fn sample_heralded(t: &JointPhotonTable, heralds: u64, seed: u64, herald: Herald) -> Result<McEstimate> {
    if heralds == 0 {
        return Err(Error::Domain("heralds must be >= 1".into()));
    }
    let cond = conditional_distribution(t, herald)?;
    let counts = sample_counts(&cond.probabilities, heralds, seed);
    let single = cond.partner_single;
    Ok(estimate(herald, counts, heralds, seed, |n0, n1| {
        (single > 0.0).then(|| {
            let e = n1 / n0 / single;
            (e, e * (1.0 / n1 + 1.0 / n0).sqrt())
        })
    }))
}

/// Pearson goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredFit {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-squared of observed outcome counts against the table.
///
/// Cells with expected count below five are pooled; if the pool itself stays
/// below five it is merged into the smallest retained cell.
pub fn chi_squared_gof(t: &JointPhotonTable, counts: &[u64; 10]) -> Result<ChiSquaredFit> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::Degenerate("no samples".into()));
    }
    let n = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&p, &c) in t.probabilities.iter().zip(counts) {
        let e = p * n;
        if e >= 5.0 {
            cells.push((e, c as f64));
        } else {
            pool.0 += e;
            pool.1 += c as f64;
        }
    }
    if pool.0 >= 5.0 {
        cells.push(pool);
    } else if pool.0 > 0.0 || pool.1 > 0.0 {
        if let Some(smallest) = cells.iter_mut().min_by(|a, b| a.0.total_cmp(&b.0)) {
            smallest.0 += pool.0;
            smallest.1 += pool.1;
        }
    }
    if cells.len() < 2 {
        return Err(Error::Degenerate(
            "fewer than two cells with expected count >= 5".into(),
        ));
    }
    let statistic: f64 = cells.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    Ok(ChiSquaredFit {
        statistic,
        degrees_of_freedom: dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}
