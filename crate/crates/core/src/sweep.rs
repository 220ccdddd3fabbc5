//! Parameter sweeps, single-point evaluation, MC and oracle runs, and their
//! CSV/JSON rendering.
//!
//! Every run takes its inputs from a [`Settings`] map of `key=value` pairs.
//! The same keys are written back as `# key=value` lines in the output, so an
//! output file can be passed as a config to reproduce itself.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::THZ;
use crate::correlations::{
    background_correlations, ideal_correlations, incoherent_correlations, BackgroundParams,
    CorrelationSet, Delay,
};
use crate::error::{Error, Result};
use crate::extsource::{ExternalSourceStats, TabulatedStats};
use crate::mc::{
    build_table, chi_squared_gof, conditional_distribution, sample_heralded, sample_unconditional,
    Herald, McEstimate,
};
use crate::metrics::{ideal_limits, purity_efficiency, HeraldDirection};
use crate::oracle::{
    background_mixture_correlator, multi_molecule_correlator, raman_correlator, TwoPointTable,
};
use crate::params::{occupancy_at, ThermalOccupancy};

pub const TOOL: &str = "raman-herald";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys accepted in settings.
pub const KEYS: &[&str] = &[
    "temperature",
    "nu_v_thz",
    "gamma_v",
    "g2_omega",
    "g3_omega",
    "g2_bg",
    "g3_bg",
    "drive_table",
    "min",
    "max",
    "points",
    "scale",
    "gamma_tau",
    "molecules",
    "snr",
    "mu_st",
    "mu_ast",
    "heralds",
    "trials",
    "seed",
    "herald",
    "m_st",
    "m_ast",
];

/// Keys written to output headers for information only; ignored on input.
pub const INFO_KEYS: &[&str] = &["tool", "version", "command", "n_v", "status", "truncation_warning"];

/// `key=value` settings from a config file and command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key=value` lines. `#` lines holding `key=value` are read too,
    /// other `#` lines are comments. In a file with `#` metadata, plain lines
    /// without `=` are data rows and skipped; a file starting with `{` is read
    /// as JSON output and its `metadata` object is used.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let doc: JsonDoc = serde_json::from_str(text)
                .map_err(|e| Error::Config(format!("bad JSON config: {e}")))?;
            let mut s = Self::new();
            for (k, v) in doc.metadata {
                s.insert(&k, &v)?;
            }
            return Ok(s);
        }
        let has_metadata = text
            .lines()
            .any(|l| l.trim_start().starts_with('#') && l.contains('='));
        let mut s = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let (body, commented) = match line.strip_prefix('#') {
                Some(rest) => (rest.trim(), true),
                None => (line, false),
            };
            if body.is_empty() {
                continue;
            }
            match body.split_once('=') {
                Some((k, v)) => s.insert(k.trim(), v.trim())?,
                None if commented || has_metadata => {}
                None => {
                    return Err(Error::Config(format!(
                        "line {}: expected key=value, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets `key`, replacing any earlier value. Informational keys are dropped.
    pub fn insert(&mut self, key: &str, value: &str) -> Result<()> {
        if INFO_KEYS.contains(&key) {
            return Ok(());
        }
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        self.0.insert(key.to_owned(), value.to_owned());
        Ok(())
    }

    /// Applies `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("cannot parse {key}={v:?}")))
            })
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ideal,
    G2Curve,
    DelaySweep,
    CoherenceSweep,
    BackgroundSweep,
    Mc,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::G2Curve => "g2-curve",
            Self::DelaySweep => "delay-sweep",
            Self::CoherenceSweep => "coherence-sweep",
            Self::BackgroundSweep => "background-sweep",
            Self::Mc => "mc",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    Linear,
    Log,
}

impl FromStr for AxisScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "log" => Ok(Self::Log),
            _ => Err(Error::Config(format!("scale must be linear or log, got {s:?}"))),
        }
    }
}

impl AxisScale {
    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!("points must be >= 2, got {}", self.points)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(format!(
                "need finite min < max, got min={}, max={}",
                self.min, self.max
            )));
        }
        if self.scale == AxisScale::Log && !(self.min > 0.0) {
            return Err(Error::Config(format!("log axis needs min > 0, got {}", self.min)));
        }
        Ok(())
    }

    /// Grid values; the end points are exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.points - 1 {
                    return self.max;
                }
                let f = i as f64 / last;
                match self.scale {
                    AxisScale::Linear => self.min + f * (self.max - self.min),
                    AxisScale::Log => (self.min.ln() + f * (self.max / self.min).ln()).exp(),
                }
            })
            .collect()
    }

    fn from_settings(s: &Settings, default: Axis) -> Result<Self> {
        let axis = Axis {
            min: s.get_or("min", default.min)?,
            max: s.get_or("max", default.max)?,
            points: s.get_or("points", default.points)?,
            scale: s.get_or("scale", default.scale)?,
        };
        axis.validate()?;
        Ok(axis)
    }

    fn describe(&self, meta: &mut Metadata) {
        meta.set("min", self.min);
        meta.set("max", self.max);
        meta.set("points", self.points);
        meta.set("scale", self.scale.name());
    }
}

/// Physical parameters shared by all commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Kelvin.
    pub temperature: f64,
    pub nu_v_thz: f64,
    /// Phonon decay rate in 1/s. Without it delays are in units of `1/gamma_v`.
    pub gamma_v: Option<f64>,
    pub g2_omega: f64,
    pub g3_omega: f64,
    /// Background `g2`, the same in both channels.
    pub g2_bg: f64,
    pub g3_bg: f64,
    /// CSV of `tau, g2[, g3]` for the drive, replacing `g2_omega`/`g3_omega`.
    pub drive_table: Option<PathBuf>,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            temperature: 300.0,
            nu_v_thz: 50.0,
            gamma_v: None,
            g2_omega: 1.0,
            g3_omega: 1.0,
            g2_bg: 2.0,
            g3_bg: 6.0,
            drive_table: None,
        }
    }
}

impl PhysicalParams {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        let p = Self {
            temperature: s.get_or("temperature", d.temperature)?,
            nu_v_thz: s.get_or("nu_v_thz", d.nu_v_thz)?,
            gamma_v: s.get("gamma_v")?,
            g2_omega: s.get_or("g2_omega", d.g2_omega)?,
            g3_omega: s.get_or("g3_omega", d.g3_omega)?,
            g2_bg: s.get_or("g2_bg", d.g2_bg)?,
            g3_bg: s.get_or("g3_bg", d.g3_bg)?,
            drive_table: s.get("drive_table")?,
        };
        if let Some(g) = p.gamma_v {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Domain(format!("gamma_v must be positive, got {g}")));
            }
        }
        Ok(p)
    }

    pub fn n_v(&self) -> Result<ThermalOccupancy> {
        occupancy_at(self.nu_v_thz * THZ, self.temperature)
    }

    pub fn source(&self) -> Result<ExternalSourceStats> {
        if let Some(path) = &self.drive_table {
            return Ok(ExternalSourceStats::Tabulated(TabulatedStats::from_csv(path)?));
        }
        if self.g2_omega == 1.0 && self.g3_omega == 1.0 {
            Ok(ExternalSourceStats::Coherent)
        } else {
            ExternalSourceStats::constant(self.g2_omega, self.g3_omega)
        }
    }

    pub fn background(&self, snr: f64) -> Result<BackgroundParams> {
        BackgroundParams {
            snr_st: snr,
            snr_ast: snr,
            g2_bg_st: self.g2_bg,
            g2_bg_ast: self.g2_bg,
            g3_bg_st: self.g3_bg,
            g3_bg_ast: self.g3_bg,
        }
        .validated()
    }

    /// Rate used to turn `gamma_v tau` into a delay in seconds.
    fn rate(&self) -> f64 {
        self.gamma_v.unwrap_or(1.0)
    }

    fn delay(&self, gamma_tau: f64) -> Result<Delay> {
        Delay::from_seconds(gamma_tau / self.rate())
    }

    fn describe(&self, meta: &mut Metadata) -> Result<()> {
        meta.set("temperature", self.temperature);
        meta.set("nu_v_thz", self.nu_v_thz);
        if let Some(g) = self.gamma_v {
            meta.set("gamma_v", g);
        }
        if let Some(p) = &self.drive_table {
            meta.set("drive_table", p.display());
        } else {
            meta.set("g2_omega", self.g2_omega);
            meta.set("g3_omega", self.g3_omega);
        }
        meta.set("g2_bg", self.g2_bg);
        meta.set("g3_bg", self.g3_bg);
        meta.set("n_v", self.n_v()?.value());
        Ok(())
    }
}

/// Ordered header metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata(Vec<(String, String)>);

impl Metadata {
    fn new(command: Command) -> Self {
        let mut m = Self::default();
        m.set("tool", TOOL);
        m.set("version", VERSION);
        m.set("command", command.name());
        m
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        let value = value.to_string();
        match self.0.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key.to_owned(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.0
    }
}

/// Tabular output: header metadata, column names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    metadata: BTreeMap<String, String>,
    #[serde(default)]
    columns: Vec<String>,
    #[serde(default)]
    rows: Vec<Vec<Option<f64>>>,
}

impl SweepResult {
    fn new(metadata: Metadata, columns: &[&str]) -> Self {
        Self {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.metadata.entries() {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// JSON with 9 significant digits per value, like the CSV; non-finite
    /// values become `null`.
    pub fn to_json(&self) -> Result<String> {
        let doc = JsonDoc {
            metadata: self.metadata.entries().iter().cloned().collect(),
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|v| {
                            v.is_finite()
                                .then(|| format!("{v:.8e}").parse().expect("formatted float"))
                        })
                        .collect()
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Config(format!("JSON encoding failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes to `out`, or stdout when `None`.
    pub fn write(&self, format: OutputFormat, out: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| Error::io(Path::new("<stdout>"), e))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepKind {
    /// Cross-correlation versus signed `gamma_v tau`.
    G2Curve,
    /// Purity and efficiency versus `gamma_v tau >= 0`.
    Delay,
    /// Purity and efficiency versus the number of coherence volumes.
    Coherence,
    /// Purity and efficiency versus SNR, equal in both channels.
    Background,
}

impl SweepKind {
    pub fn command(self) -> Command {
        match self {
            Self::G2Curve => Command::G2Curve,
            Self::Delay => Command::DelaySweep,
            Self::Coherence => Command::CoherenceSweep,
            Self::Background => Command::BackgroundSweep,
        }
    }

    pub fn default_axis(self) -> Axis {
        let (min, max, points, scale) = match self {
            Self::G2Curve => (-3.0, 3.0, 121, AxisScale::Linear),
            Self::Delay => (0.0, 3.0, 61, AxisScale::Linear),
            Self::Coherence => (1.0, 1e4, 41, AxisScale::Log),
            Self::Background => (1e-3, 1e3, 61, AxisScale::Log),
        };
        Axis {
            min,
            max,
            points,
            scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub axis: Axis,
    pub params: PhysicalParams,
}

impl SweepSpec {
    pub fn from_settings(kind: SweepKind, s: &Settings) -> Result<Self> {
        Ok(Self {
            kind,
            axis: Axis::from_settings(s, kind.default_axis())?,
            params: PhysicalParams::from_settings(s)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.axis.validate()?;
        match self.kind {
            SweepKind::Delay if self.axis.min < 0.0 => Err(Error::Config(
                "delay sweep needs gamma_tau >= 0; use g2-curve for negative delays".into(),
            )),
            SweepKind::Coherence if self.axis.min < 1.0 || self.axis.max > u32::MAX as f64 => {
                Err(Error::Config(format!(
                    "molecule axis must lie in [1, {}], got [{}, {}]",
                    u32::MAX,
                    self.axis.min,
                    self.axis.max
                )))
            }
            SweepKind::Background if !(self.axis.min > 0.0) => {
                Err(Error::Config("SNR axis needs min > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

fn stokes_figures(c: &CorrelationSet) -> Result<[f64; 3]> {
    let f = purity_efficiency(c, HeraldDirection::StokesHeralds)?;
    Ok([f.purity, f.efficiency, c.g2_cross])
}

/// Evaluates a sweep. Points are computed in parallel and emitted in axis
/// order. Coherence sweeps round each axis value to the nearest molecule
/// count, so a log axis can repeat small counts.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let p = &spec.params;
    let n_v = p.n_v()?;
    let src = p.source()?;
    let physical = p.gamma_v.is_some();
    let mut meta = Metadata::new(spec.kind.command());
    p.describe(&mut meta)?;
    spec.axis.describe(&mut meta);

    let columns: Vec<&str> = match spec.kind {
        SweepKind::G2Curve if physical => vec!["gamma_tau", "tau_s", "g2_cross"],
        SweepKind::G2Curve => vec!["gamma_tau", "g2_cross"],
        SweepKind::Delay if physical => vec!["gamma_tau", "tau_s", "purity", "efficiency", "g2_cross"],
        SweepKind::Delay => vec!["gamma_tau", "purity", "efficiency", "g2_cross"],
        SweepKind::Coherence => vec!["molecules", "purity", "efficiency", "g2_cross"],
        SweepKind::Background => vec!["snr", "purity", "efficiency", "g2_cross"],
    };
    let mut result = SweepResult::new(meta, &columns);

    let rows: Result<Vec<Vec<f64>>> = spec
        .axis
        .values()
        .into_par_iter()
        .map(|x| -> Result<Vec<f64>> {
            let mut row = vec![x];
            match spec.kind {
                SweepKind::G2Curve | SweepKind::Delay => {
                    let delay = p.delay(x)?;
                    if physical {
                        row.push(delay.seconds());
                    }
                    let c = ideal_correlations(n_v, p.rate(), delay, &src)?;
                    if spec.kind == SweepKind::G2Curve {
                        row.push(c.g2_cross);
                    } else {
                        row.extend(stokes_figures(&c)?);
                    }
                }
                SweepKind::Coherence => {
                    let m = x.round() as u32;
                    row[0] = m as f64;
                    row.extend(stokes_figures(&incoherent_correlations(n_v, m, &src)?)?);
                }
                SweepKind::Background => {
                    let base = ideal_correlations(n_v, p.rate(), Delay::zero(), &src)?;
                    row.extend(stokes_figures(&background_correlations(&base, &p.background(x)?)?)?);
                }
            }
            Ok(row)
        })
        .collect();
    result.rows = rows?;
    Ok(result)
}

/// Ideal zero-delay figures for both herald directions with their
/// leading-order approximations.
pub fn run_point(params: &PhysicalParams) -> Result<SweepResult> {
    let n_v = params.n_v()?;
    let src = params.source()?;
    let mut meta = Metadata::new(Command::Ideal);
    params.describe(&mut meta)?;
    let mut result = SweepResult::new(
        meta,
        &[
            "n_v",
            "g2_cross",
            "g3_s1a2",
            "purity",
            "efficiency",
            "purity_approx",
            "efficiency_approx",
            "purity_anti_stokes",
            "efficiency_anti_stokes",
        ],
    );
    let st = ideal_correlations(n_v, params.rate(), Delay::stokes_first(0.0)?, &src)?;
    let ast = ideal_correlations(n_v, params.rate(), Delay::anti_stokes_first(0.0)?, &src)?;
    let f = purity_efficiency(&st, HeraldDirection::StokesHeralds)?;
    let lim = ideal_limits(n_v, &src, HeraldDirection::StokesHeralds)?;
    let fa = purity_efficiency(&ast, HeraldDirection::AntiStokesHeralds)?;
    result.rows.push(vec![
        n_v.value(),
        st.g2_cross,
        st.g3_s1a2,
        f.purity,
        f.efficiency,
        lim.purity,
        lim.efficiency,
        fa.purity,
        fa.efficiency,
    ]);
    Ok(result)
}

/// Scenario selection shared by `mc` and `oracle`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub params: PhysicalParams,
    /// Signed; negative means anti-Stokes detected first.
    pub gamma_tau: f64,
    /// Independent coherence volumes; `None` for one.
    pub molecules: Option<u32>,
    /// Background SNR in both channels; `None` for no background.
    pub snr: Option<f64>,
}

impl ScenarioSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let spec = Self {
            params: PhysicalParams::from_settings(s)?,
            gamma_tau: s.get_or("gamma_tau", 0.0)?,
            molecules: s.get("molecules")?,
            snr: s.get("snr")?,
        };
        let composed = [spec.gamma_tau != 0.0, spec.molecules.is_some(), spec.snr.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if composed > 1 {
            return Err(Error::Scenario(
                "choose at most one of gamma_tau != 0, molecules, snr".into(),
            ));
        }
        Ok(spec)
    }

    fn delay(&self) -> Result<Delay> {
        self.params.delay(self.gamma_tau)
    }

    pub fn correlations(&self) -> Result<CorrelationSet> {
        let p = &self.params;
        let n_v = p.n_v()?;
        let src = p.source()?;
        match (self.molecules, self.snr) {
            (Some(m), _) => incoherent_correlations(n_v, m, &src),
            (None, Some(snr)) => {
                let base = ideal_correlations(n_v, p.rate(), Delay::zero(), &src)?;
                background_correlations(&base, &p.background(snr)?)
            }
            (None, None) => ideal_correlations(n_v, p.rate(), self.delay()?, &src),
        }
    }

    fn describe(&self, meta: &mut Metadata) -> Result<()> {
        self.params.describe(meta)?;
        meta.set("gamma_tau", self.gamma_tau);
        if let Some(m) = self.molecules {
            meta.set("molecules", m);
        }
        if let Some(s) = self.snr {
            meta.set("snr", s);
        }
        Ok(())
    }
}

impl FromStr for Herald {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stokes" | "one_stokes" => Ok(Self::OneStokes),
            "anti-stokes" | "anti_stokes" | "one_anti_stokes" => Ok(Self::OneAntiStokes),
            _ => Err(Error::Config(format!("herald must be stokes or anti-stokes, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSpec {
    pub scenario: ScenarioSpec,
    pub mu_st: f64,
    pub mu_ast: f64,
    /// Heralded draws; ignored when `trials` is set.
    pub heralds: u64,
    /// Unconditional detection windows. Selects unconditional sampling.
    pub trials: Option<u64>,
    pub seed: u64,
    pub herald: Herald,
}

impl McSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        Ok(Self {
            scenario: ScenarioSpec::from_settings(s)?,
            mu_st: s.get_or("mu_st", 1e-4)?,
            mu_ast: s.get_or("mu_ast", 1e-4)?,
            heralds: s.get_or("heralds", 1_000_000)?,
            trials: s.get("trials")?,
            seed: s.get_or("seed", 0)?,
            herald: s.get_or("herald", Herald::OneStokes)?,
        })
    }
}

/// Builds the joint table for the scenario and samples it.
pub fn run_mc(spec: &McSpec) -> Result<(SweepResult, McEstimate)> {
    let c = spec.scenario.correlations()?;
    let table = build_table(&c, spec.mu_st, spec.mu_ast)?;
    let exact = conditional_distribution(&table, spec.herald)?;
    let mut meta = Metadata::new(Command::Mc);
    spec.scenario.describe(&mut meta)?;
    meta.set("mu_st", spec.mu_st);
    meta.set("mu_ast", spec.mu_ast);
    meta.set("herald", spec.herald.name());
    meta.set("seed", spec.seed);
    let mut columns = vec![
        "purity",
        "purity_stderr",
        "efficiency",
        "efficiency_stderr",
        "purity_exact",
        "efficiency_exact",
        "herald_count",
        "trial_count",
        "n0",
        "n1",
        "n2",
    ];
    let (estimate, p_value) = match spec.trials {
        Some(trials) => {
            meta.set("trials", trials);
            let sample = sample_unconditional(&table, trials, spec.seed, spec.herald)?;
            let fit = chi_squared_gof(&table, &sample.outcome_counts).map_or(f64::NAN, |f| f.p_value);
            columns.push("chi2_p_value");
            (sample.estimate, Some(fit))
        }
        None => {
            meta.set("heralds", spec.heralds);
            (sample_heralded(&table, spec.heralds, spec.seed, spec.herald)?, None)
        }
    };
    let status = serde_json::to_value(estimate.status).expect("plain enum");
    meta.set("status", status.as_str().unwrap_or("unknown"));
    meta.set("truncation_warning", table.truncation_warning);
    let mut result = SweepResult::new(meta, &columns);
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let [n0, n1, n2] = estimate.postselected_counts.map(|c| c as f64);
    let mut row = vec![
        opt(estimate.purity),
        opt(estimate.purity_stderr),
        opt(estimate.efficiency),
        opt(estimate.efficiency_stderr),
        exact.purity(),
        exact.efficiency(),
        estimate.herald_count as f64,
        estimate.trial_count as f64,
        n0,
        n1,
        n2,
    ];
    row.extend(p_value);
    result.rows.push(row);
    Ok((result, estimate))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub scenario: ScenarioSpec,
    pub m_st: usize,
    pub m_ast: usize,
}

impl OracleSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        Ok(Self {
            scenario: ScenarioSpec::from_settings(s)?,
            m_st: s.get_or("m_st", 1)?,
            m_ast: s.get_or("m_ast", 2)?,
        })
    }
}

/// Brute-force correlator next to the closed form.
pub fn run_oracle(spec: &OracleSpec) -> Result<SweepResult> {
    let sc = &spec.scenario;
    let p = &sc.params;
    let order = (spec.m_st, spec.m_ast);
    let n_v = p.n_v()?;
    let src = p.source()?;
    let closed = sc.correlations()?;
    let closed_value = closed.normalized(spec.m_st, spec.m_ast).ok_or(Error::UnsupportedOrder {
        m_st: spec.m_st,
        m_ast: spec.m_ast,
        reason: "closed forms cover orders up to three",
    })?;
    let oracle = match (sc.molecules, sc.snr) {
        (Some(m), _) => multi_molecule_correlator(order, m, n_v, &src)?,
        (None, Some(snr)) => {
            let base = ideal_correlations(n_v, p.rate(), Delay::zero(), &src)?;
            background_mixture_correlator(order, &base, &p.background(snr)?)?
        }
        (None, None) => {
            let table = TwoPointTable::new(n_v, p.rate(), p.nu_v_thz * THZ)?;
            raman_correlator(order, sc.delay()?, &table, &src)?.value
        }
    };
    let mut meta = Metadata::new(Command::Oracle);
    sc.describe(&mut meta)?;
    meta.set("m_st", spec.m_st);
    meta.set("m_ast", spec.m_ast);
    let mut result = SweepResult::new(meta, &["m_st", "m_ast", "oracle", "closed_form", "rel_diff"]);
    result.rows.push(vec![
        spec.m_st as f64,
        spec.m_ast as f64,
        oracle,
        closed_value,
        (oracle / closed_value - 1.0).abs(),
    ]);
    Ok(result)
}
