//! Brute-force Wick enumeration against the closed-form correlators.

use proptest::prelude::*;
use raman_herald::correlations::{
    background_correlations, ideal_correlations, incoherent_correlations, BackgroundParams, Delay,
};
use raman_herald::oracle::{
    background_mixture_correlator, multi_molecule_correlator, raman_correlator, TwoPointTable,
    MAX_ENUMERATED_MOLECULES,
};
use raman_herald::{ExternalSourceStats, ThermalOccupancy};

const ORDERS: [(usize, usize); 7] = [(1, 1), (1, 2), (2, 1), (2, 0), (0, 2), (3, 0), (0, 3)];
const NU_V: f64 = 50e12;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn drives() -> Vec<ExternalSourceStats> {
    vec![
        ExternalSourceStats::Coherent,
        ExternalSourceStats::constant(2.0, 6.0).unwrap(),
        ExternalSourceStats::constant(1.3, 2.1).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn single_molecule_matches_closed_forms(
        log_n in -5.0f64..-1.0,
        gamma in 0.1f64..10.0,
        gt in 0.0f64..5.0,
        negative in any::<bool>(),
        drive in 0usize..3,
    ) {
        let n = ThermalOccupancy::new(10f64.powf(log_n)).unwrap();
        let seconds = gt / gamma;
        let delay = if negative {
            Delay::anti_stokes_first(seconds).unwrap()
        } else {
            Delay::stokes_first(seconds).unwrap()
        };
        let src = &drives()[drive];
        let table = TwoPointTable::new(n, gamma, NU_V).unwrap();
        let closed = ideal_correlations(n, gamma, delay, src).unwrap();
        for (m_st, m_ast) in ORDERS {
            let o = raman_correlator((m_st, m_ast), delay, &table, src).unwrap();
            let c = closed.normalized(m_st, m_ast).unwrap();
            prop_assert!(rel(o.value, c) < 1e-10, "({m_st},{m_ast}) oracle {} closed {c}", o.value);
            prop_assert!(o.imaginary.abs() < 1e-10 * o.value.abs());
        }
    }

    #[test]
    fn background_mixture_matches_closed_forms(
        log_n in -5.0f64..-1.0,
        log_s in -4.0f64..4.0,
        log_a in -4.0f64..4.0,
        g2_bg in 0.0f64..3.0,
        g3_bg in 0.0f64..10.0,
        drive in 0usize..3,
    ) {
        let n = ThermalOccupancy::new(10f64.powf(log_n)).unwrap();
        let src = &drives()[drive];
        let base = ideal_correlations(n, 1.0, Delay::zero(), src).unwrap();
        let bg = BackgroundParams {
            snr_st: 10f64.powf(log_s),
            snr_ast: 10f64.powf(log_a),
            g2_bg_st: g2_bg,
            g2_bg_ast: g2_bg,
            g3_bg_st: g3_bg,
            g3_bg_ast: g3_bg,
        };
        let closed = background_correlations(&base, &bg).unwrap();
        for (m_st, m_ast) in ORDERS {
            let o = background_mixture_correlator((m_st, m_ast), &base, &bg).unwrap();
            let c = closed.normalized(m_st, m_ast).unwrap();
            prop_assert!(rel(o, c) < 1e-10, "({m_st},{m_ast}) oracle {o} closed {c}");
        }
    }
}

#[test]
fn molecule_enumeration_matches_incoherent_forms() {
    for src in drives() {
        for n in [1e-5, 3.359989533310626e-4, 1e-2, 0.2] {
            let n = ThermalOccupancy::new(n).unwrap();
            for m in 1..=MAX_ENUMERATED_MOLECULES {
                let closed = incoherent_correlations(n, m, &src).unwrap();
                for (m_st, m_ast) in ORDERS {
                    let o = multi_molecule_correlator((m_st, m_ast), m, n, &src).unwrap();
                    let c = closed.normalized(m_st, m_ast).unwrap();
                    assert!(rel(o, c) < 1e-10, "M={m} ({m_st},{m_ast}) {src:?}: {o} vs {c}");
                }
            }
        }
    }
}

#[test]
fn enumeration_rejects_large_ensembles() {
    let n = ThermalOccupancy::new(1e-3).unwrap();
    let src = ExternalSourceStats::Coherent;
    assert!(multi_molecule_correlator((1, 2), MAX_ENUMERATED_MOLECULES + 1, n, &src).is_err());
    assert!(multi_molecule_correlator((2, 2), 2, n, &src).is_err());
}
