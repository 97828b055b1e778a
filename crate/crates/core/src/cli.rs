//! Command-line front end: `spectrum`, `sweep`, `audit` and `oracle`.
//!
//! Exit codes: 0 ok, 1 usage or config, 2 domain, 3 audit failure,
//! 4 oracle disagreement.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fock_oracle::{compare, OracleOptions};
use crate::hamiltonian::{
    quadratic_form, symmetric_gauge_for, PhysicalSystem, Prescription, QuadraticForm,
};
use crate::representations::{
    commutator_table, landau_gauge, make_representation, CommutatorMatrix, GaugePair,
};
use crate::spectra::{
    enumerate_levels, invariants, spectrum, Convention, EigenFrequencies, ModeInvariants,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

/// CSV header of `sweep`.
pub const SWEEP_HEADER: [&str; 9] = [
    "theta",
    "gauge",
    "prescription",
    "omega_tilde_1",
    "omega_tilde_2",
    "S",
    "P",
    "E00",
    "status",
];

/// Tolerance on `(S, P)` drift across gauges in `audit`, relative to
/// `max(1, |reference|)`.
pub const AUDIT_INVARIANT_TOL: f64 = 1e-10;

/// Width of the excluded band `|r − ħ/(Bϑ)| < band·max(1, |ħ/(Bϑ)|)` when
/// sampling audit gauges.
pub const AUDIT_POLE_BAND: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(
    name = "nclandau",
    version,
    about = "Spectra of a charged particle on a noncommutative plane in a magnetic field and harmonic trap"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenfrequencies, mode invariants and the lowest energy levels.
    Spectrum(SpectrumArgs),
    /// Sweep theta and write one CSV row per (theta, gauge, prescription).
    Sweep(SweepArgs),
    /// Check gauge independence over seeded random (r, s) pairs.
    Audit(AuditArgs),
    /// Compare the closed-form spectrum with the dynamical-matrix and Fock oracles.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeKind {
    Landau,
    Symmetric,
    Rs,
}

impl GaugeKind {
    pub fn label(self) -> &'static str {
        match self {
            GaugeKind::Landau => "landau",
            GaugeKind::Symmetric => "symmetric",
            GaugeKind::Rs => "rs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrescriptionKind {
    Group,
    Nmp,
}

impl PrescriptionKind {
    pub fn label(self) -> &'static str {
        match self {
            PrescriptionKind::Group => "group",
            PrescriptionKind::Nmp => "nmp",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// JSON scenario with keys hbar, m, omega1, omega2, omega_c, theta, prescription, r, s.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long = "m", value_name = "MASS")]
    pub m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega2: Option<f64>,
    #[arg(long = "omega-c", allow_negative_numbers = true)]
    pub omega_c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, value_enum)]
    pub gauge: Option<GaugeKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    #[arg(long, value_enum)]
    pub prescription: Option<PrescriptionKind>,
    /// Use the printed C1/C2 frequency formulas instead of the validated invariants.
    #[arg(long)]
    pub paper_convention: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON run report destination.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Largest Fock truncation per mode.
    #[arg(long, default_value_t = 64)]
    pub nmax: usize,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
}

/// Scenario file contents.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub hbar: Option<f64>,
    pub m: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub omega_c: Option<f64>,
    pub theta: Option<f64>,
    pub gauge: Option<GaugeKind>,
    pub prescription: Option<PrescriptionKind>,
    pub r: Option<f64>,
    pub s: Option<f64>,
}

/// A fully resolved scenario. `gauge` and `prescription` stay optional so
/// that `sweep` can expand them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub hbar: f64,
    pub m: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega_c: f64,
    pub theta: f64,
    pub gauge: Option<GaugeKind>,
    pub prescription: Option<PrescriptionKind>,
    pub pair: Option<(f64, f64)>,
    pub paper_convention: bool,
}

/// Anything that ends a command early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(Error),
    Audit(String),
    Oracle(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Audit(_) => EXIT_AUDIT,
            Failure::Oracle(_) => EXIT_ORACLE,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "error: {msg}"),
            Failure::Domain(e) => write!(f, "domain error: {e}"),
            Failure::Audit(msg) => write!(f, "audit failure: {msg}"),
            Failure::Oracle(msg) => write!(f, "oracle failure: {msg}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => Failure::Usage(e.to_string()),
            Error::ConvergenceFailure { .. }
            | Error::NotConverged { .. }
            | Error::NonBiquadratic { .. }
            | Error::OracleDisagreement(_) => Failure::Oracle(e.to_string()),
            other => Failure::Domain(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o: {e}"))
    }
}

type CmdResult = std::result::Result<(), Failure>;

pub fn load_config(path: &Path) -> std::result::Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
}

impl Scenario {
    /// Merges a config file (if any) with flags; flags win. Defaults are
    /// `ħ = m = ω_c = ω₁ = ω₂ = 1`, `ϑ = 0`.
    pub fn resolve(args: &ScenarioArgs) -> std::result::Result<Self, Failure> {
        let cfg = match &args.config {
            Some(path) => load_config(path)?,
            None => ScenarioConfig::default(),
        };
        let pick =
            |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        let r = args.r.or(cfg.r);
        let s = args.s.or(cfg.s);
        let pair = match (r, s) {
            (Some(r), Some(s)) => Some((r, s)),
            (None, None) => None,
            _ => return Err(Failure::Usage("--r and --s must be given together".into())),
        };
        let gauge = match (args.gauge.or(cfg.gauge), pair) {
            (None, Some(_)) => Some(GaugeKind::Rs),
            (Some(GaugeKind::Rs), None) => {
                return Err(Failure::Usage("--gauge rs needs --r and --s".into()))
            }
            (Some(g), Some(_)) if g != GaugeKind::Rs => {
                return Err(Failure::Usage(format!(
                    "--r/--s conflict with --gauge {}",
                    g.label()
                )))
            }
            (g, _) => g,
        };
        let prescription = args.prescription.or(cfg.prescription);
        if prescription == Some(PrescriptionKind::Nmp) && gauge == Some(GaugeKind::Rs) {
            return Err(Failure::Usage(
                "the minimal prescription has no (r, s) family; use --gauge landau or symmetric"
                    .into(),
            ));
        }
        Ok(Self {
            hbar: pick(args.hbar, cfg.hbar, 1.0),
            m: pick(args.m, cfg.m, 1.0),
            omega1: pick(args.omega1, cfg.omega1, 1.0),
            omega2: pick(args.omega2, cfg.omega2, 1.0),
            omega_c: pick(args.omega_c, cfg.omega_c, 1.0),
            theta: pick(args.theta, cfg.theta, 0.0),
            gauge,
            prescription,
            pair,
            paper_convention: args.paper_convention,
        })
    }

    pub fn gauge(&self) -> GaugeKind {
        self.gauge.unwrap_or(GaugeKind::Landau)
    }

    pub fn prescription(&self) -> PrescriptionKind {
        self.prescription.unwrap_or(PrescriptionKind::Group)
    }

    pub fn convention(&self) -> Convention {
        if self.paper_convention {
            Convention::PaperPrinted
        } else {
            Convention::OracleValidated
        }
    }

    pub fn system(&self, theta: f64) -> crate::Result<PhysicalSystem> {
        PhysicalSystem::new(
            self.hbar,
            self.m,
            self.omega1,
            self.omega2,
            self.omega_c,
            theta,
        )
    }

    /// The concrete prescription for one `(gauge, prescription)` choice.
    pub fn prescription_for(
        &self,
        sys: &PhysicalSystem,
        gauge: GaugeKind,
        kind: PrescriptionKind,
    ) -> crate::Result<Prescription> {
        Ok(match (kind, gauge) {
            (PrescriptionKind::Group, GaugeKind::Landau) => {
                Prescription::GroupTheoretic(landau_gauge())
            }
            (PrescriptionKind::Group, GaugeKind::Symmetric) => {
                Prescription::GroupTheoretic(symmetric_gauge_for(sys)?)
            }
            (PrescriptionKind::Group, GaugeKind::Rs) => {
                let (r, s) = self.pair.unwrap_or((1.0, 0.0));
                Prescription::GroupTheoretic(GaugePair::new(r, s))
            }
            (PrescriptionKind::Nmp, GaugeKind::Landau) => Prescription::NmpLandau,
            (PrescriptionKind::Nmp, GaugeKind::Symmetric) => Prescription::NmpSymmetric,
            (PrescriptionKind::Nmp, GaugeKind::Rs) => {
                return Err(Error::OutOfDomain(
                    "the minimal prescription has no (r, s) family".into(),
                ))
            }
        })
    }

    pub fn quadratic_form_at(
        &self,
        theta: f64,
        gauge: GaugeKind,
        kind: PrescriptionKind,
    ) -> crate::Result<(PhysicalSystem, QuadraticForm)> {
        let sys = self.system(theta)?;
        let qf = quadratic_form(&sys, self.prescription_for(&sys, gauge, kind)?)?;
        Ok((sys, qf))
    }

    /// Quadratic form at the scenario's own `ϑ`, gauge and prescription.
    pub fn quadratic_form(&self) -> crate::Result<(PhysicalSystem, QuadraticForm)> {
        self.quadratic_form_at(self.theta, self.gauge(), self.prescription())
    }
}

/// Fixed 17-significant-digit rendering; `-0` prints as `0`.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Row model of the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub theta: f64,
    pub gauge: GaugeKind,
    pub prescription: PrescriptionKind,
    pub values: Option<SweepValues>,
    pub status: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub frequencies: EigenFrequencies,
    pub invariants: ModeInvariants,
    pub e00: f64,
}

impl SweepRecord {
    pub fn fields(&self) -> [String; 9] {
        let num = |f: &dyn Fn(&SweepValues) -> f64| {
            self.values
                .as_ref()
                .map(f)
                .map(format_number)
                .unwrap_or_default()
        };
        [
            format_number(self.theta),
            self.gauge.label().to_string(),
            self.prescription.label().to_string(),
            num(&|v| v.frequencies.omega_tilde_1),
            num(&|v| v.frequencies.omega_tilde_2),
            num(&|v| v.invariants.s),
            num(&|v| v.invariants.p),
            num(&|v| v.e00),
            self.status.to_string(),
        ]
    }
}

/// Row status for an evaluation error.
pub fn status_of(e: &Error) -> &'static str {
    match e {
        Error::DegenerateRepresentation { .. } => "degenerate",
        Error::DynamicallyUnstable { .. } => "unstable",
        _ => "out_of_domain",
    }
}

pub fn evaluate(
    scenario: &Scenario,
    theta: f64,
    gauge: GaugeKind,
    kind: PrescriptionKind,
) -> SweepRecord {
    let outcome = scenario
        .quadratic_form_at(theta, gauge, kind)
        .and_then(|(sys, qf)| {
            let frequencies = spectrum(&qf, scenario.convention())?;
            Ok(SweepValues {
                frequencies,
                invariants: frequencies.invariants(),
                e00: sys.hbar() * (frequencies.omega_tilde_1 + frequencies.omega_tilde_2) / 2.0,
            })
        });
    match outcome {
        Ok(values) => SweepRecord {
            theta,
            gauge,
            prescription: kind,
            values: Some(values),
            status: "ok",
        },
        Err(e) => SweepRecord {
            theta,
            gauge,
            prescription: kind,
            values: None,
            status: status_of(&e),
        },
    }
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn theta_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    let span = to - from;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                to
            } else {
                from + span * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// All sweep rows in `(ϑ, prescription, gauge)` order, evaluated in parallel.
pub fn sweep_records(scenario: &Scenario, thetas: &[f64]) -> Vec<SweepRecord> {
    let gauges: Vec<GaugeKind> = match scenario.gauge {
        Some(g) => vec![g],
        None => vec![GaugeKind::Landau, GaugeKind::Symmetric],
    };
    let kinds: Vec<PrescriptionKind> = match scenario.prescription {
        Some(k) => vec![k],
        None if scenario.gauge == Some(GaugeKind::Rs) => vec![PrescriptionKind::Group],
        None => vec![PrescriptionKind::Group, PrescriptionKind::Nmp],
    };
    let mut points = Vec::with_capacity(thetas.len() * kinds.len() * gauges.len());
    for &t in thetas {
        for &k in &kinds {
            for &g in &gauges {
                points.push((t, g, k));
            }
        }
    }
    points
        .par_iter()
        .map(|&(t, g, k)| evaluate(scenario, t, g, k))
        .collect()
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for rec in records {
        w.write_record(rec.fields())?;
    }
    w.flush()
}

#[derive(Debug, Serialize)]
struct SweepReport<'a> {
    scenario: &'a Scenario,
    from: f64,
    to: f64,
    steps: usize,
    rows: usize,
    status_counts: BTreeMap<&'static str, usize>,
    csv: Option<String>,
}

/// One audited gauge pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSample {
    pub pair: GaugePair,
    pub commutator_deviation: f64,
    pub ds: f64,
    pub dp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub reference: ModeInvariants,
    pub samples: Vec<AuditSample>,
    pub max_ds: f64,
    pub max_dp: f64,
    pub max_commutator_deviation: f64,
    /// First sample that broke a tolerance.
    pub failure: Option<AuditSample>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Draws `count` admissible gauge pairs: `r` uniform on `[−2, 2]` outside
/// the pole band, `s` uniform on `[−2, 2]`. A `forced` pair is used first.
pub fn audit_pairs(
    sys: &PhysicalSystem,
    count: usize,
    seed: u64,
    forced: Option<GaugePair>,
) -> Vec<GaugePair> {
    let pole = sys.nc_parameters().gauge_pole();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<GaugePair> = forced.into_iter().take(count).collect();
    while pairs.len() < count {
        let r: f64 = rng.random_range(-2.0..=2.0);
        let s: f64 = rng.random_range(-2.0..=2.0);
        if let Some(p) = pole {
            if (r - p).abs() < AUDIT_POLE_BAND * p.abs().max(1.0) {
                continue;
            }
        }
        pairs.push(GaugePair::new(r, s));
    }
    pairs
}

/// Gauge-independence audit of `sys` over `pairs` against the Landau gauge.
pub fn audit(sys: &PhysicalSystem, pairs: &[GaugePair]) -> crate::Result<AuditReport> {
    let nc = sys.nc_parameters();
    let reference = invariants(&quadratic_form(
        sys,
        Prescription::GroupTheoretic(landau_gauge()),
    )?);
    let target = CommutatorMatrix::target(&nc);
    let s_scale = reference.s.abs().max(1.0);
    let p_scale = reference.p.abs().max(1.0);

    let mut report = AuditReport {
        reference,
        samples: Vec::with_capacity(pairs.len()),
        max_ds: 0.0,
        max_dp: 0.0,
        max_commutator_deviation: 0.0,
        failure: None,
    };
    for &pair in pairs {
        let rep = make_representation(&nc, pair)?;
        let commutator_deviation = commutator_table(&rep).relative_deviation(&target);
        let inv = invariants(&quadratic_form(sys, Prescription::GroupTheoretic(pair))?);
        let sample = AuditSample {
            pair,
            commutator_deviation,
            ds: (inv.s - reference.s).abs(),
            dp: (inv.p - reference.p).abs(),
        };
        report.max_ds = report.max_ds.max(sample.ds);
        report.max_dp = report.max_dp.max(sample.dp);
        report.max_commutator_deviation = report.max_commutator_deviation.max(commutator_deviation);
        let bad = commutator_deviation > crate::representations::COMMUTATOR_TOL
            || sample.ds > AUDIT_INVARIANT_TOL * s_scale
            || sample.dp > AUDIT_INVARIANT_TOL * p_scale;
        if bad && report.failure.is_none() {
            report.failure = Some(sample);
        }
        report.samples.push(sample);
    }
    Ok(report)
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Audit(a) => cmd_audit(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "{f}");
            f.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(args, &mut out, &mut err);
    let _ = out.flush();
    code
}

fn describe(scenario: &Scenario) -> String {
    let gauge = match (scenario.gauge(), scenario.pair) {
        (GaugeKind::Rs, Some((r, s))) => format!("rs (r = {r}, s = {s})"),
        (g, _) => g.label().to_string(),
    };
    format!(
        "hbar = {}, m = {}, omega1 = {}, omega2 = {}, omega_c = {}, theta = {}, gauge = {}, prescription = {}{}",
        scenario.hbar,
        scenario.m,
        scenario.omega1,
        scenario.omega2,
        scenario.omega_c,
        scenario.theta,
        gauge,
        scenario.prescription().label(),
        if scenario.paper_convention { ", printed C1/C2 convention" } else { "" }
    )
}

fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> CmdResult {
    let scenario = Scenario::resolve(&args.scenario)?;
    let (sys, qf) = scenario.quadratic_form()?;
    let freqs = spectrum(&qf, scenario.convention())?;
    let inv = freqs.invariants();
    writeln!(out, "scenario: {}", describe(&scenario))?;
    writeln!(out, "omega_tilde_1 = {:.12}", freqs.omega_tilde_1)?;
    writeln!(out, "omega_tilde_2 = {:.12}", freqs.omega_tilde_2)?;
    writeln!(out, "S = {:.12}", inv.s)?;
    writeln!(out, "P = {:.12}", inv.p)?;
    if freqs.has_zero_mode() {
        writeln!(
            out,
            "zero mode: omega_tilde_2 = 0, every level is infinitely degenerate; level listing refused"
        )?;
        return Ok(());
    }
    writeln!(out, "levels:")?;
    writeln!(
        out,
        "  {:>4} {:>4} {:>20} {:>6} {:>6}",
        "n1", "n2", "energy", "group", "degen"
    )?;
    for l in enumerate_levels(&freqs, sys.hbar(), args.levels)? {
        writeln!(
            out,
            "  {:>4} {:>4} {:>20.12} {:>6} {:>6}",
            l.level.n1, l.level.n2, l.level.energy, l.group, l.degeneracy
        )?;
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    if !(args.from < args.to) {
        return Err(Failure::Usage(format!(
            "--from {} must be below --to {}",
            args.from, args.to
        )));
    }
    if args.steps < 2 {
        return Err(Failure::Usage("--steps must be at least 2".into()));
    }
    let scenario = Scenario::resolve(&args.scenario)?;
    let thetas = theta_grid(args.from, args.to, args.steps);
    let records = sweep_records(&scenario, &thetas);

    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
            write_sweep_csv(&records, BufWriter::new(file))?;
        }
        None => write_sweep_csv(&records, &mut *out)?,
    }

    let mut status_counts = BTreeMap::new();
    for rec in &records {
        *status_counts.entry(rec.status).or_insert(0) += 1;
    }
    if let Some(path) = &args.report {
        let report = SweepReport {
            scenario: &scenario,
            from: args.from,
            to: args.to,
            steps: args.steps,
            rows: records.len(),
            status_counts: status_counts.clone(),
            csv: args.out.as_ref().map(|p| p.display().to_string()),
        };
        let file = File::create(path)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Failure::Usage(e.to_string()))?;
        writeln!(w)?;
    }
    let summary: Vec<String> = status_counts
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect();
    writeln!(
        err,
        "sweep: {} rows ({})",
        records.len(),
        summary.join(", ")
    )?;
    if status_counts.contains_key("ok") {
        Ok(())
    } else {
        Err(Failure::Domain(Error::OutOfDomain(
            "no sweep row is inside the domain".into(),
        )))
    }
}

fn cmd_audit(args: &AuditArgs, out: &mut dyn Write) -> CmdResult {
    if args.samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let scenario = Scenario::resolve(&args.scenario)?;
    if scenario.prescription == Some(PrescriptionKind::Nmp) {
        return Err(Failure::Usage(
            "audit refused: the minimal prescription has no (r, s) gauge family to audit".into(),
        ));
    }
    let sys = scenario.system(scenario.theta)?;
    let forced = scenario.pair.map(|(r, s)| GaugePair::new(r, s));
    let pairs = audit_pairs(&sys, args.samples, args.seed, forced);
    let report = audit(&sys, &pairs)?;

    writeln!(out, "scenario: {}", describe(&scenario))?;
    writeln!(
        out,
        "samples = {}, seed = {}",
        report.samples.len(),
        args.seed
    )?;
    writeln!(
        out,
        "reference (landau): S = {:.12}, P = {:.12}",
        report.reference.s, report.reference.p
    )?;
    writeln!(out, "max |dS| = {:.3e}", report.max_ds)?;
    writeln!(out, "max |dP| = {:.3e}", report.max_dp)?;
    writeln!(
        out,
        "max commutator deviation = {:.3e}",
        report.max_commutator_deviation
    )?;
    match report.failure {
        None => {
            writeln!(out, "audit passed")?;
            Ok(())
        }
        Some(f) => Err(Failure::Audit(format!(
            "(r, s) = ({}, {}): commutator deviation {:.3e}, |dS| = {:.3e}, |dP| = {:.3e}",
            f.pair.r, f.pair.s, f.commutator_deviation, f.ds, f.dp
        ))),
    }
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> CmdResult {
    if args.nmax < 2 {
        return Err(Failure::Usage("--nmax must be at least 2".into()));
    }
    let scenario = Scenario::resolve(&args.scenario)?;
    let (sys, qf) = scenario.quadratic_form()?;
    let freqs = spectrum(&qf, scenario.convention())?;
    let options = OracleOptions {
        levels: args.levels,
        ..OracleOptions::with_cap(args.nmax)
    };
    let report = compare(&freqs, &qf, sys.hbar(), &options)?;

    writeln!(out, "scenario: {}", describe(&scenario))?;
    writeln!(
        out,
        "analytic: omega_tilde = ({:.12}, {:.12}), S = {:.12}, P = {:.12}",
        freqs.omega_tilde_1,
        freqs.omega_tilde_2,
        report.analytic_invariants.s,
        report.analytic_invariants.p
    )?;
    writeln!(
        out,
        "dynamical matrix: S = {:.12}, P = {:.12}",
        report.oracle_invariants.s, report.oracle_invariants.p
    )?;
    if let Ok(truth) = crate::spectra::eigenfrequencies(&report.oracle_invariants) {
        writeln!(
            out,
            "oracle omega_tilde = ({:.12}, {:.12})",
            truth.omega_tilde_1, truth.omega_tilde_2
        )?;
    }
    writeln!(
        out,
        "invariant deviation: abs {:.3e}, rel {:.3e} (tol {:.0e})",
        report.invariant_abs_deviation, report.invariant_rel_deviation, report.invariant_tol
    )?;
    match (&report.fock, &report.fock_skipped) {
        (Some(f), _) => {
            writeln!(
                out,
                "fock: N_max = {}, converged = {}, last change = {:.3e}",
                f.n_max, f.converged, f.last_change
            )?;
            writeln!(
                out,
                "  {:>4} {:>4} {:>20} {:>20}",
                "n1", "n2", "analytic", "fock"
            )?;
            for (l, o) in f.analytic_levels.iter().zip(&f.oracle_levels) {
                writeln!(
                    out,
                    "  {:>4} {:>4} {:>20.12} {:>20.12}",
                    l.n1, l.n2, l.energy, o
                )?;
            }
            writeln!(
                out,
                "level deviation: abs {:.3e}, rel {:.3e} (tol {:.0e})",
                f.max_abs_deviation, f.max_rel_deviation, report.tol
            )?;
        }
        (None, Some(reason)) => writeln!(out, "fock: skipped, {reason}")?,
        (None, None) => {}
    }
    report.check().map_err(Failure::from)?;
    writeln!(out, "oracle agreement")?;
    Ok(())
}
