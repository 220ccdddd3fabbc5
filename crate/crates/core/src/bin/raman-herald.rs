use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use raman_herald::sweep::{
    run_mc, run_oracle, run_point, run_sweep, McSpec, OracleSpec, OutputFormat, PhysicalParams,
    Settings, SweepKind, SweepSpec,
};
use raman_herald::Result;

#[derive(Parser)]
#[command(name = "raman-herald", version, about = "Heralded single photons from Raman scattering: purity, efficiency, sweeps and checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Temperature in kelvin [default: 300]
    #[arg(long, global = true)]
    temperature: Option<f64>,
    /// Vibrational frequency in THz [default: 50]
    #[arg(long, global = true)]
    nu_v_thz: Option<f64>,
    /// Phonon decay rate in 1/s; delays are in units of 1/gamma_v without it
    #[arg(long, global = true)]
    gamma_v: Option<f64>,
    /// Drive g2 at zero delay [default: 1]
    #[arg(long, global = true)]
    g2_omega: Option<f64>,
    /// Drive g3 at zero delay [default: 1]
    #[arg(long, global = true)]
    g3_omega: Option<f64>,
    /// CSV of tau,g2[,g3] for a delay-dependent drive
    #[arg(long, global = true)]
    drive_table: Option<PathBuf>,
    /// Background g2 in both channels [default: 2]
    #[arg(long, global = true)]
    g2_bg: Option<f64>,
    /// Background g3 in both channels [default: 6]
    #[arg(long, global = true)]
    g3_bg: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout if omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed for `mc` [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value settings file, or an earlier output file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct AxisArgs {
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_parser = ["linear", "log"])]
    scale: Option<String>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Signed gamma_v tau; negative means anti-Stokes detected first
    #[arg(long, allow_hyphen_values = true)]
    gamma_tau: Option<f64>,
    /// Number of independent coherence volumes
    #[arg(long)]
    molecules: Option<u32>,
    /// Signal-to-background ratio in both channels
    #[arg(long)]
    snr: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Zero-delay purity and efficiency for both herald directions
    Ideal,
    /// Cross-correlation versus signed gamma_v tau
    G2Curve(AxisArgs),
    /// Purity and efficiency versus gamma_v tau
    DelaySweep(AxisArgs),
    /// Purity and efficiency versus number of coherence volumes
    CoherenceSweep(AxisArgs),
    /// Purity and efficiency versus SNR
    BackgroundSweep(AxisArgs),
    /// Monte Carlo estimate from the joint photon-number table
    Mc {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        mu_st: Option<f64>,
        #[arg(long)]
        mu_ast: Option<f64>,
        /// Heralded draws [default: 1000000]
        #[arg(long)]
        heralds: Option<u64>,
        /// Sample whole detection windows instead of heralded events
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, value_parser = ["stokes", "anti-stokes"])]
        herald: Option<String>,
    },
    /// Brute-force Wick evaluation of one correlator next to its closed form
    Oracle {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Stokes and anti-Stokes factor counts, e.g. 1,2
        #[arg(long, value_parser = parse_order)]
        order: Option<(usize, usize)>,
    },
}

fn parse_order(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected M_ST,M_AST, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

struct Flags(Settings);

impl Flags {
    fn set(&mut self, key: &str, value: Option<impl Display>) -> Result<()> {
        match value {
            Some(v) => self.0.insert(key, &v.to_string()),
            None => Ok(()),
        }
    }

    fn axis(&mut self, a: &AxisArgs) -> Result<()> {
        self.set("min", a.min)?;
        self.set("max", a.max)?;
        self.set("points", a.points)?;
        self.set("scale", a.scale.as_ref())
    }

    fn scenario(&mut self, s: &ScenarioArgs) -> Result<()> {
        self.set("gamma_tau", s.gamma_tau)?;
        self.set("molecules", s.molecules)?;
        self.set("snr", s.snr)
    }
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let mut flags = Flags(Settings::new());
    flags.set("temperature", c.temperature)?;
    flags.set("nu_v_thz", c.nu_v_thz)?;
    flags.set("gamma_v", c.gamma_v)?;
    flags.set("g2_omega", c.g2_omega)?;
    flags.set("g3_omega", c.g3_omega)?;
    flags.set("drive_table", c.drive_table.as_ref().map(|p| p.display()))?;
    flags.set("g2_bg", c.g2_bg)?;
    flags.set("g3_bg", c.g3_bg)?;
    flags.set("seed", c.seed)?;

    let sweep = match &cli.command {
        Cmd::G2Curve(a) => Some((a, SweepKind::G2Curve)),
        Cmd::DelaySweep(a) => Some((a, SweepKind::Delay)),
        Cmd::CoherenceSweep(a) => Some((a, SweepKind::Coherence)),
        Cmd::BackgroundSweep(a) => Some((a, SweepKind::Background)),
        _ => None,
    };
    if let Some((a, _)) = sweep {
        flags.axis(a)?;
    }
    let kind = sweep.map(|(_, k)| k);
    match &cli.command {
        Cmd::Mc {
            scenario,
            mu_st,
            mu_ast,
            heralds,
            trials,
            herald,
        } => {
            flags.scenario(scenario)?;
            flags.set("mu_st", *mu_st)?;
            flags.set("mu_ast", *mu_ast)?;
            flags.set("heralds", *heralds)?;
            flags.set("trials", *trials)?;
            flags.set("herald", herald.as_ref())?;
        }
        Cmd::Oracle { scenario, order } => {
            flags.scenario(scenario)?;
            flags.set("m_st", order.map(|o| o.0))?;
            flags.set("m_ast", order.map(|o| o.1))?;
        }
        _ => {}
    }

    let mut settings = match &c.config {
        Some(path) => Settings::load(path)?,
        None => Settings::new(),
    };
    settings.merge(&flags.0);

    let result = match (&cli.command, kind) {
        (_, Some(kind)) => run_sweep(&SweepSpec::from_settings(kind, &settings)?)?,
        (Cmd::Ideal, _) => run_point(&PhysicalParams::from_settings(&settings)?)?,
        (Cmd::Mc { .. }, _) => run_mc(&McSpec::from_settings(&settings)?)?.0,
        (Cmd::Oracle { .. }, _) => run_oracle(&OracleSpec::from_settings(&settings)?)?,
        _ => unreachable!("sweep commands carry a kind"),
    };
    let format = match c.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    result.write(format, c.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("raman-herald: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
