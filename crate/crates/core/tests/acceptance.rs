//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raman_herald::correlations::{
    background_correlations, ideal_correlations, incoherent_correlations, BackgroundParams,
    CorrelationSet, Delay,
};
use raman_herald::mc::{
    build_table, chi_squared_gof, conditional_distribution, sample_heralded, sample_unconditional,
    Herald,
};
use raman_herald::metrics::{
    background_limits, delay_limits, incoherent_limits, purity_efficiency, BackgroundRegime,
    DelayRegime, HeraldDirection,
};
use raman_herald::oracle::{multi_molecule_correlator, raman_correlator, TwoPointTable};
use raman_herald::params::occupancy_at;
use raman_herald::{DetectionOrder, ExternalSourceStats, ThermalOccupancy};

const THZ: f64 = 1e12;
const COHERENT: ExternalSourceStats = ExternalSourceStats::Coherent;
/// 40-digit evaluation of 1/expm1(h nu / k T) at 50 THz, 300 K.
const N_REF: f64 = 3.359989533310626e-4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn n_ref() -> ThermalOccupancy {
    ThermalOccupancy::new(N_REF).unwrap()
}

fn stokes(c: &CorrelationSet) -> (f64, f64) {
    let f = purity_efficiency(c, HeraldDirection::StokesHeralds).unwrap();
    (f.purity, f.efficiency)
}

fn c1_thermal_occupancy() -> Outcome {
    let n = occupancy_at(50.0 * THZ, 300.0).unwrap().value();
    let value_ok = (n - 3.356e-4).abs() <= 1e-7;
    let precise = rel(n, N_REF) < 1e-12;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=70 {
        let v = occupancy_at((30.0 + i as f64) * THZ, 300.0).unwrap().value();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range_ok = lo >= 1e-5 && hi <= 1e-3;
    outcome(
        value_ok && precise && range_ok,
        format!(
            "n_v={n:.9e} (target 3.356e-4 +/- 1e-7: {}; 40-digit ref agrees to 1e-12: {precise}); \
             30-100 THz range [{lo:.3e}, {hi:.3e}] within [1e-5, 1e-3]: {range_ok}",
            if value_ok { "ok".to_owned() } else { format!("off by {:.2e}", n - 3.356e-4) }
        ),
    )
}

fn c2_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = ThermalOccupancy::new(10f64.powf(rng.random_range(-5.0..-1.0))).unwrap();
        let gt: f64 = rng.random_range(0.0..5.0);
        let delay = if rng.random_bool(0.5) {
            Delay::stokes_first(gt).unwrap()
        } else {
            Delay::anti_stokes_first(gt).unwrap()
        };
        let table = TwoPointTable::new(n, 1.0, 50.0 * THZ).unwrap();
        let closed = ideal_correlations(n, 1.0, delay, &COHERENT).unwrap();
        for order in [(1, 1), (1, 2), (2, 1)] {
            let o = raman_correlator(order, delay, &table, &COHERENT).unwrap().value;
            worst = worst.max(rel(o, closed.normalized(order.0, order.1).unwrap()));
        }
    }
    let mut worst_m = 0.0f64;
    for n in [1e-5, N_REF, 1e-2, 1e-1] {
        let n = ThermalOccupancy::new(n).unwrap();
        for m in 1..=4 {
            let closed = incoherent_correlations(n, m, &COHERENT).unwrap();
            for order in [(1, 1), (1, 2), (2, 1)] {
                let o = multi_molecule_correlator(order, m, n, &COHERENT).unwrap();
                worst_m = worst_m.max(rel(o, closed.normalized(order.0, order.1).unwrap()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-10 && worst_m < 1e-10 && secs < 60.0,
        format!("single-molecule worst rel {worst:.2e}, M=1..4 worst rel {worst_m:.2e}, {secs:.2}s"),
    )
}

fn c3_ideal_figures() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    for nu in [30.0, 40.0, 50.0, 70.0, 100.0] {
        let n = occupancy_at(nu * THZ, 300.0).unwrap();
        let c = ideal_correlations(n, 1.0, Delay::zero(), &COHERENT).unwrap();
        let (p, e) = stokes(&c);
        let nv = n.value();
        let dev = rel(p, 4.0 * nv).max(rel(e, 1.0 / nv));
        worst = worst.max(dev / nv);
        ok &= dev < 5.0 * nv;
    }
    let (p, e) = stokes(&ideal_correlations(n_ref(), 1.0, Delay::zero(), &COHERENT).unwrap());
    outcome(
        ok,
        format!("purity {p:.9e} vs 4n_v {:.9e}, efficiency {e:.6e} vs 1/n_v {:.6e}; worst |ratio-1|/n_v {worst:.3}", 4.0 * N_REF, 1.0 / N_REF),
    )
}

fn c4_reverse_configuration() -> Outcome {
    let c = ideal_correlations(n_ref(), 1.0, Delay::anti_stokes_first(0.0).unwrap(), &COHERENT).unwrap();
    let f = purity_efficiency(&c, HeraldDirection::AntiStokesHeralds).unwrap();
    let ok = (f.purity / 2.0 - 1.0).abs() < 5.0 * N_REF && (f.efficiency - 1.0).abs() < 5.0 * N_REF;
    outcome(ok, format!("anti-Stokes heralding: purity {:.9}, efficiency {:.9}", f.purity, f.efficiency))
}

fn c5_delay_behavior() -> Outcome {
    let n = n_ref();
    let at = |gt: f64| stokes(&ideal_correlations(n, 1.0, Delay::stokes_first(gt).unwrap(), &COHERENT).unwrap());
    let cross = 0.5 * (1.0 / N_REF).ln();
    let (pc, _) = at(cross);
    let expected = (6.0 + 4.0 * N_REF) / (2.0 + N_REF).powi(2);
    let between = delay_limits(n, 1.0, cross, &COHERENT, DelayRegime::Small).is_err()
        && delay_limits(n, 1.0, cross, &COHERENT, DelayRegime::Large).is_err();
    let crossing_ok = rel(pc, expected) < 1e-12 && between && pc > at(0.0).0 && pc < 2.0;
    let (pl, el) = at(20.0);
    let limit_ok = (pl - 2.0).abs() < 1e-3 && (el - 1.0).abs() < 1e-3;
    let grid: Vec<(f64, f64)> = (0..200).map(|i| at(5.0 * i as f64 / 199.0)).collect();
    let monotone = grid.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1);
    outcome(
        crossing_ok && limit_ok && monotone,
        format!(
            "purity at e^(-2 gamma tau)=n_v: {pc:.6} (neither limit valid: {between}); gamma tau=20: purity {pl:.6}, efficiency {el:.6}; monotone on 200 points: {monotone}"
        ),
    )
}

fn c6_coherence_radius() -> Outcome {
    let lim = incoherent_limits(n_ref(), 55, &COHERENT).unwrap();
    let (exact, _) = stokes(&incoherent_correlations(n_ref(), 55, &COHERENT).unwrap());
    let ok = (lim.purity - 0.072).abs() <= 1e-3 && lim.purity <= 0.1 && exact <= 0.1;
    outcome(ok, format!("M=55: many-molecule purity {:.6}, exact {exact:.6}", lim.purity))
}

fn c7_background() -> Outcome {
    let n = n_ref();
    let base = ideal_correlations(n, 1.0, Delay::zero(), &COHERENT).unwrap();
    let base_fig = purity_efficiency(&base, HeraldDirection::StokesHeralds).unwrap();
    let with = |s: f64, a: f64| {
        let bg = BackgroundParams::thermal(s, a).unwrap();
        (bg, stokes(&background_correlations(&base, &bg).unwrap()))
    };
    let (_, (p01, _)) = with(0.1, 0.1);
    let frozen = rel(p01, 0.15316917682) < 1e-9;
    let level = p01 <= 0.1 * 1.5;
    let (bg_low, (p_low, _)) = with(1e-4, 1e-4);
    let low = background_limits(n, &bg_low, &base_fig, &COHERENT, BackgroundRegime::LowSnr).unwrap();
    let (bg_sw, (p_sw, _)) = with(1e-6, 1e3);
    let sw = background_limits(n, &bg_sw, &base_fig, &COHERENT, BackgroundRegime::StokesSwamped).unwrap();
    let limits_ok = rel(p_low, low.purity) < 0.1 && rel(p_sw, sw.purity) < 0.1;
    outcome(
        level && frozen && limits_ok,
        format!(
            "SNR=0.1 purity {p01:.9} (<= 0.15: {level}; regression value: {frozen}); low-SNR {p_low:.4} vs {:.1}; Stokes-swamped {p_sw:.4} vs {:.1}",
            low.purity, sw.purity
        ),
    )
}

fn c8_monte_carlo() -> Outcome {
    let start = Instant::now();
    let c = ideal_correlations(n_ref(), 1.0, Delay::zero(), &COHERENT).unwrap();
    let t = build_table(&c, 1e-4, 1e-4).unwrap();
    let truth = conditional_distribution(&t, Herald::OneStokes).unwrap().purity();
    let mut covered = 0;
    let mut two_photon = 0u64;
    for seed in 0..100u64 {
        let est = sample_heralded(&t, 10_000_000, seed, Herald::OneStokes).unwrap();
        two_photon += est.postselected_counts[2];
        if let (Some(p), Some(se)) = (est.purity, est.purity_stderr) {
            if (p - truth).abs() < 3.0 * se {
                covered += 1;
            }
        }
    }
    let s = sample_unconditional(&t, 1_000_000, 7, Herald::OneStokes).unwrap();
    let fit = chi_squared_gof(&t, &s.outcome_counts).unwrap();
    outcome(
        covered >= 97 && fit.p_value > 1e-3,
        format!(
            "{covered}/100 seeds within 3 stderr of {truth:.6e} (mean two-photon events {:.0}); chi2 p={:.3} on {} dof; {:.1}s",
            two_photon as f64 / 100.0,
            fit.p_value,
            fit.degrees_of_freedom,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c9_bayes_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut tables = 0;
    while tables < 1000 {
        let n = ThermalOccupancy::new(10f64.powf(rng.random_range(-5.0..-1.5))).unwrap();
        let c = match rng.random_range(0..3) {
            0 => {
                let gt = rng.random_range(0.0..4.0);
                let d = if rng.random_bool(0.5) {
                    Delay::stokes_first(gt).unwrap()
                } else {
                    Delay::anti_stokes_first(gt).unwrap()
                };
                ideal_correlations(n, 1.0, d, &COHERENT).unwrap()
            }
            1 => incoherent_correlations(n, rng.random_range(1..500), &COHERENT).unwrap(),
            _ => {
                let base = ideal_correlations(n, 1.0, Delay::zero(), &COHERENT).unwrap();
                let bg = BackgroundParams::thermal(
                    10f64.powf(rng.random_range(-3.0..3.0)),
                    10f64.powf(rng.random_range(-3.0..3.0)),
                )
                .unwrap();
                background_correlations(&base, &bg).unwrap()
            }
        };
        let mu_st = 10f64.powf(rng.random_range(-6.0..-3.0));
        let mu_ast = 10f64.powf(rng.random_range(-6.0..-3.0));
        let Ok(t) = build_table(&c, mu_st, mu_ast) else { continue };
        let (herald, direction) = match c.delay.order() {
            DetectionOrder::StokesFirst => (Herald::OneStokes, HeraldDirection::StokesHeralds),
            DetectionOrder::AntiStokesFirst => (Herald::OneAntiStokes, HeraldDirection::AntiStokesHeralds),
        };
        let cond = conditional_distribution(&t, herald).unwrap();
        let m = purity_efficiency(&c, direction).unwrap();
        worst = worst.max(rel(cond.purity(), m.purity));
        tables += 1;
    }
    outcome(worst < 1e-9, format!("worst relative difference over {tables} tables {worst:.2e}"))
}

fn cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_raman-herald"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

fn c10_cli_reproduction() -> Outcome {
    let g2 = ["g2-curve", "--min", "-3", "--max", "3", "--points", "121"];
    let delay = ["delay-sweep", "--max", "3"];
    let coherence = ["coherence-sweep", "--min", "1", "--max", "1e4"];
    let background = ["background-sweep", "--min", "1e-3", "--max", "1e3"];
    let runs: Vec<&[&str]> = vec![&g2, &delay, &coherence, &background];
    let outputs: Vec<String> = runs.iter().map(|a| cli(a)).collect();
    let deterministic = runs.iter().zip(&outputs).all(|(a, first)| &cli(a) == first);

    let gt = column(&outputs[0], "gamma_tau");
    let g = column(&outputs[0], "g2_cross");
    let plateau = g[gt.iter().position(|x| *x == 0.0).unwrap()];
    let plateau_ok = rel(plateau * N_REF, 1.0) < 5.0 * N_REF;
    let positive: Vec<(f64, f64)> = gt.iter().zip(&g).filter(|(x, _)| **x > 0.0).map(|(x, g)| (*x, (g - 1.0).ln())).collect();
    let rate = -(positive.last().unwrap().1 - positive[0].1) / (positive.last().unwrap().0 - positive[0].0);
    let rate_ok = (rate - 2.0).abs() < 1e-6;
    let negative_ok = gt.iter().zip(&g).filter(|(x, _)| **x < 0.0).all(|(_, g)| (g - 1.0).abs() < 2.0 * N_REF);

    let pd = column(&outputs[1], "purity");
    let ed = column(&outputs[1], "efficiency");
    let delay_ok = pd.windows(2).all(|w| w[1] > w[0]) && ed.windows(2).all(|w| w[1] < w[0]);
    let pc = column(&outputs[2], "purity");
    let ec = column(&outputs[2], "efficiency");
    let coherence_ok = pc.windows(2).all(|w| w[1] >= w[0]) && ec.windows(2).all(|w| w[1] <= w[0]);
    let pb = column(&outputs[3], "purity");
    let eb = column(&outputs[3], "efficiency");
    let background_ok = pb.windows(2).all(|w| w[1] < w[0])
        && eb.windows(2).all(|w| w[1] > w[0])
        && (pb[0] - 2.0).abs() < 0.05
        && rel(*pb.last().unwrap(), pd[0]) < 0.01;
    outcome(
        deterministic && plateau_ok && rate_ok && negative_ok && delay_ok && coherence_ok && background_ok,
        format!(
            "g2 plateau {plateau:.6e} (n_v g2 = {:.6}), decay rate {rate:.9} gamma_v, tau<0 within 2n_v of 1: {negative_ok}; \
             monotone delay/coherence/background: {delay_ok}/{coherence_ok}/{background_ok}; byte-identical reruns: {deterministic}",
            plateau * N_REF
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("thermal occupancy", c1_thermal_occupancy),
        ("oracle equivalence", c2_oracle_equivalence),
        ("ideal figures", c3_ideal_figures),
        ("reverse configuration", c4_reverse_configuration),
        ("delay behavior", c5_delay_behavior),
        ("coherence radius", c6_coherence_radius),
        ("background", c7_background),
        ("monte carlo consistency", c8_monte_carlo),
        ("bayes identity", c9_bayes_identity),
        ("cli reproduction", c10_cli_reproduction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("C{:<2} {:<24} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
