use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_raman-herald");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["ideal", "g2-curve", "delay-sweep", "coherence-sweep", "background-sweep", "mc", "oracle"] {
        for format in ["csv", "json"] {
            let a = dir.path().join(format!("{cmd}-a.{format}"));
            let b = dir.path().join(format!("{cmd}-b.{format}"));
            for path in [&a, &b] {
                let out = run(&[cmd, "--format", format, "--seed", "5", "--out", path.to_str().unwrap()]);
                assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
            }
            assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{cmd} {format}");
        }
    }
}

#[test]
fn outputs_reproduce_from_their_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["delay-sweep", "--temperature", "250", "--points", "7", "--max", "2.5"],
        &["coherence-sweep", "--nu-v-thz", "40", "--g2-omega", "1.2", "--g3-omega", "1.8"],
        &["background-sweep", "--g2-bg", "1.5", "--points", "9"],
        &["g2-curve", "--gamma-v", "2e12", "--min", "-2", "--max", "2", "--points", "11"],
        &["mc", "--mu-st", "1e-3", "--heralds", "50000", "--seed", "17", "--herald", "stokes"],
        &["oracle", "--order", "2,1", "--molecules", "3"],
    ];
    for (i, args) in cases.iter().enumerate() {
        for format in ["csv", "json"] {
            let first = dir.path().join(format!("{i}.{format}"));
            let second = dir.path().join(format!("{i}-again.{format}"));
            let mut a: Vec<&str> = args.to_vec();
            a.extend(["--format", format, "--out", first.to_str().unwrap()]);
            assert!(run(&a).status.success(), "{a:?}");
            let out = run(&[args[0], "--config", first.to_str().unwrap(), "--format", format, "--out", second.to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap(), "{args:?} {format}");
        }
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# low temperature run\ntemperature = 77\npoints = 4\n").unwrap();
    let from_cfg = stdout(&["delay-sweep", "--config", cfg.to_str().unwrap()]);
    assert!(from_cfg.contains("# temperature=77\n"));
    assert_eq!(column(&from_cfg, "purity").len(), 4);
    let overridden = stdout(&["delay-sweep", "--config", cfg.to_str().unwrap(), "--temperature", "300"]);
    assert!(overridden.contains("# temperature=300\n"));
    assert_eq!(column(&overridden, "purity").len(), 4);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["ideal"]), Some(0));
    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["delay-sweep", "--points", "1"]), Some(2));
    assert_eq!(code(&["background-sweep", "--min", "0", "--scale", "log"]), Some(2));
    assert_eq!(code(&["delay-sweep", "--min", "-1"]), Some(2));
    assert_eq!(code(&["ideal", "--temperature=-4"]), Some(3));
    assert_eq!(code(&["mc", "--mu-st", "0.5"]), Some(3));
    assert_eq!(code(&["mc", "--molecules", "3", "--snr", "1"]), Some(3));
    let missing = Path::new("/nonexistent-dir/out.csv");
    assert_eq!(code(&["ideal", "--out", missing.to_str().unwrap()]), Some(4));
    assert_eq!(code(&["ideal", "--config", "/nonexistent-dir/cfg"]), Some(4));
}

#[test]
fn g2_curve_shape() {
    let csv = stdout(&["g2-curve", "--min", "-3", "--max", "3", "--points", "61"]);
    let gt = column(&csv, "gamma_tau");
    let g2 = column(&csv, "g2_cross");
    let n = 3.359989533310626e-4;
    for (x, g) in gt.iter().zip(&g2) {
        if *x < 0.0 {
            let expected = 1.0 + n / (1.0 + n) * (-2.0 * x.abs()).exp();
            assert!((g - expected).abs() < 1e-8, "tau {x}: {g}");
        } else {
            // Plateau near 1/n decaying at rate 2 gamma_v.
            let expected = 1.0 + (1.0 + n) / n * (-2.0 * x).exp();
            assert!((g / expected - 1.0).abs() < 1e-8, "tau {x}: {g}");
        }
    }
    let zero = gt.iter().position(|x| *x == 0.0).unwrap();
    assert!(g2[zero] > 0.99 / n);
    assert!(g2[zero - 1] < 1.001);
}

#[test]
fn sweep_shapes() {
    let delay = stdout(&["delay-sweep", "--max", "5", "--points", "50"]);
    let p = column(&delay, "purity");
    let e = column(&delay, "efficiency");
    assert!(p.windows(2).all(|w| w[1] > w[0]) && e.windows(2).all(|w| w[1] < w[0]));

    let coh = stdout(&["coherence-sweep", "--points", "30"]);
    let p = column(&coh, "purity");
    let e = column(&coh, "efficiency");
    assert!(p.windows(2).all(|w| w[1] >= w[0]) && e.windows(2).all(|w| w[1] <= w[0]));

    let bg = stdout(&["background-sweep", "--points", "30"]);
    let p = column(&bg, "purity");
    let e = column(&bg, "efficiency");
    assert!(p.windows(2).all(|w| w[1] < w[0]) && e.windows(2).all(|w| w[1] > w[0]));
    assert!((p[0] - 2.0).abs() < 0.05 && p[29] < 2e-3);
}
