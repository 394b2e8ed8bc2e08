//! Command-line adapter. Parses flags and config, calls the library, formats output.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bitstring::{champernowne_spins, BitString};
use crate::dyadic::{angle_to_pi, cos_exact, AngleCos, AnglePi, Dyadic, SinSign};
use crate::epr::{
    build_s0, cauchy_probe, chsh, chsh_settings, corr_curve, definedness,
    reality_condition_check, Perturbation, EPR_LEVEL_LIMIT,
};
use crate::hypercomplex::{
    build_root, quaternion_triple, verify_algebra, OperatorLabel, QuaternionTriple,
    DEFAULT_LEVEL_LIMIT,
};
use crate::qubits::{class_scan, entangle_pair, ket_up, superpose};
use crate::report::{run_acceptance, AcceptanceOptions, SCHEMA_VERSION};
use crate::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Tsv,
    Text,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Text => "text",
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "granular", version, about = "Exact bit-string kinematics workbench")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file with defaults for level, offset, mode and format.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `strict` (default) rejects inexact results; `permissive` rounds and flags them.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Shorthand for `--mode strict`.
    #[arg(long, global = true, conflicts_with_all = ["mode", "permissive"])]
    pub strict: bool,
    /// Shorthand for `--mode permissive`.
    #[arg(long, global = true, conflicts_with = "mode")]
    pub permissive: bool,
    /// Champernowne offset for the base segment.
    #[arg(long, global = true)]
    pub offset: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Operator-algebra invariant suite.
    Algebra {
        #[arg(value_enum)]
        action: Option<AlgebraAction>,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Classify an angle given by its cosine or as a multiple of pi.
    Angle {
        #[arg(long, value_parser = parse_dyadic, conflicts_with = "pi", required_unless_present = "pi")]
        cos: Option<Dyadic>,
        /// Sign of the sine: + - or 0.
        #[arg(long, value_parser = parse_sin, requires = "cos")]
        sin: Option<SinSign>,
        #[arg(long, value_parser = parse_angle_pi)]
        pi: Option<AnglePi>,
    },
    /// Granular qubits.
    Qubit {
        #[command(subcommand)]
        action: QubitCommand,
    },
    /// The EPR-Bohm model.
    Epr {
        #[command(subcommand)]
        action: EprCommand,
    },
    /// Same as `epr bell`.
    Bell(BellArgs),
    /// Run the acceptance suite.
    Report {
        /// Fail on reported superposition deviations.
        #[arg(long)]
        strict_deviations: bool,
        #[arg(long, default_value_t = 90)]
        cauchy_threshold: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgebraAction {
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Ones,
    Champernowne,
}

#[derive(Debug, Args)]
pub struct TripleArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// Any non-`E1` operator index of the triple.
    #[arg(long, default_value_t = 2)]
    pub triple: u64,
}

#[derive(Debug, Subcommand)]
pub enum QubitCommand {
    /// `(cos θ E_a + sin θ E_b)(1s)` for a triple.
    Superpose {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long, value_parser = parse_dyadic)]
        cos: Dyadic,
        #[arg(long, value_parser = parse_sin)]
        sin: Option<SinSign>,
    },
    /// Which angles keep the superposition in the phase class of `E_a(base)`.
    Scan {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long, value_enum, default_value = "champernowne")]
        base: Base,
        /// Repeatable; `m/2^k` or `cos=m/2^k,sin=-`.
        #[arg(long = "angle", value_parser = parse_angle_cos)]
        angles: Vec<AngleCos>,
    },
    /// A pair correlated by `cos θ`.
    Entangle {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long, value_parser = parse_dyadic)]
        cos: Dyadic,
        #[arg(long, value_parser = parse_sin)]
        sin: Option<SinSign>,
    },
}

#[derive(Debug, Args)]
pub struct BellArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// Cosine of the detector orientation θ_A.
    #[arg(long, value_parser = parse_dyadic)]
    pub cos: Dyadic,
    /// Cosine for the CHSH settings, when it differs from `--cos`.
    #[arg(long, value_parser = parse_dyadic)]
    pub chsh_cos: Option<Dyadic>,
    /// Hidden variable for the definedness report.
    #[arg(long, value_parser = parse_angle_pi, default_value = "0")]
    pub lambda: AnglePi,
}

#[derive(Debug, Subcommand)]
pub enum EprCommand {
    /// Correlation curve as CSV.
    Curve {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, value_parser = parse_dyadic, value_delimiter = ',', required = true)]
        thetas: Vec<Dyadic>,
    },
    /// Definedness report plus CHSH table.
    Bell(BellArgs),
    /// `Sp₁` along dyadic approximations of θ_A, as TSV.
    Cauchy {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, value_parser = parse_dyadic)]
        cos: Dyadic,
        #[arg(long, value_parser = parse_sin)]
        sin: Option<SinSign>,
        #[arg(long, value_parser = parse_angle_pi)]
        lambda: AnglePi,
        #[arg(long, default_value_t = 1)]
        jmin: u32,
        #[arg(long)]
        jmax: u32,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "strict" => Ok(Mode::Strict),
        "permissive" => Ok(Mode::Permissive),
        _ => Err(format!("expected strict or permissive, got `{s}`")),
    }
}

fn parse_dyadic(s: &str) -> Result<Dyadic, String> {
    s.parse().map_err(|e: crate::DyadicError| e.to_string())
}

fn parse_sin(s: &str) -> Result<SinSign, String> {
    s.parse().map_err(|e: crate::DyadicError| e.to_string())
}

fn parse_angle_pi(s: &str) -> Result<AnglePi, String> {
    s.parse().map_err(|e: crate::DyadicError| e.to_string())
}

fn parse_angle_cos(s: &str) -> Result<AngleCos, String> {
    s.parse().map_err(|e: crate::DyadicError| e.to_string())
}

/// Optional JSON config; every field may be omitted.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub level: Option<u32>,
    pub offset: Option<u64>,
    pub mode: Option<Mode>,
    pub format: Option<Format>,
}

/// Settings after flags, file and defaults are merged.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub level: u32,
    pub offset: u64,
    pub mode: Mode,
    pub format: Format,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Failed(String),
    /// Help or version text requested.
    #[error("{0}")]
    Info(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
            CliError::Info(_) => 0,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// What a command printed and whether its invariants held.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub failure: Option<String>,
}

struct Resolver {
    global: GlobalArgs,
    file: FileConfig,
}

impl Resolver {
    fn new(global: GlobalArgs) -> Result<Resolver, CliError> {
        let file = match &global.config {
            None => FileConfig::default(),
            Some(path) => {
                let raw = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&raw).map_err(|e| config_err(format!("{}: {e}", path.display())))?
            }
        };
        Ok(Resolver { global, file })
    }

    fn resolve(
        &self,
        level: Option<u32>,
        default_level: u32,
        limit: u32,
        formats: &[Format],
    ) -> Result<RunConfig, CliError> {
        let level = level.or(self.file.level).unwrap_or(default_level);
        if level == 0 || level > limit {
            return Err(config_err(format!("level {level} outside 1..={limit}")));
        }
        let mode = if self.global.strict {
            Mode::Strict
        } else if self.global.permissive {
            Mode::Permissive
        } else {
            self.global.mode.or(self.file.mode).unwrap_or_default()
        };
        let format = self.global.format.or(self.file.format).unwrap_or(formats[0]);
        if !formats.contains(&format) {
            let allowed: Vec<String> = formats.iter().map(Format::to_string).collect();
            return Err(config_err(format!(
                "format {format} not available here; use one of {}",
                allowed.join(", ")
            )));
        }
        Ok(RunConfig {
            level,
            offset: self.global.offset.or(self.file.offset).unwrap_or(0),
            mode,
            format,
        })
    }
}

fn envelope(command: &str, config: &RunConfig, result: serde_json::Value) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

fn angle(cos: &Dyadic, sin: Option<SinSign>) -> Result<AngleCos, CliError> {
    match sin {
        Some(sign) => AngleCos::new(cos.clone(), sign),
        None => AngleCos::upper(cos.clone()),
    }
    .map_err(config_err)
}

fn triple(args: &TripleArgs, level: u32) -> Result<QuaternionTriple, CliError> {
    OperatorLabel::new(level, args.triple)
        .and_then(quaternion_triple)
        .map_err(config_err)
}

fn base_string(base: Base, cfg: &RunConfig) -> Result<BitString, CliError> {
    match base {
        Base::Ones => Ok(ket_up(cfg.level)),
        Base::Champernowne => champernowne_spins(1 << cfg.level, cfg.offset).map_err(config_err),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    })?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    let resolver = Resolver::new(cli.global)?;
    match cli.command {
        Command::Algebra { n, .. } => algebra(&resolver, n),
        Command::Angle { cos, sin, pi } => angle_cmd(&resolver, cos, sin, pi),
        Command::Qubit { action } => qubit(&resolver, action),
        Command::Epr { action } => match action {
            EprCommand::Curve { n, thetas } => curve(&resolver, n, &thetas),
            EprCommand::Bell(args) => bell(&resolver, &args, "epr bell"),
            EprCommand::Cauchy {
                n,
                cos,
                sin,
                lambda,
                jmin,
                jmax,
            } => cauchy(&resolver, n, &cos, sin, &lambda, jmin, jmax),
        },
        Command::Bell(args) => bell(&resolver, &args, "bell"),
        Command::Report {
            strict_deviations,
            cauchy_threshold,
        } => report(&resolver, strict_deviations, cauchy_threshold),
    }
}

fn algebra(r: &Resolver, n: Option<u32>) -> Result<Output, CliError> {
    let cfg = r.resolve(n, 3, DEFAULT_LEVEL_LIMIT, &[Format::Text, Format::Json])?;
    let checks = verify_algebra(cfg.level, DEFAULT_LEVEL_LIMIT).map_err(config_err)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| format!("algebra checks failed: {}", failed.join(", ")));
    let text = match cfg.format {
        Format::Json => envelope("algebra", &cfg, to_value(&checks)),
        _ => {
            let mut s = format!("algebra suite, N = {}\n", cfg.level);
            for c in &checks {
                let _ = writeln!(s, "{}  {:<40} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            s
        }
    };
    Ok(Output { text, failure })
}

fn angle_cmd(
    r: &Resolver,
    cos: Option<Dyadic>,
    sin: Option<SinSign>,
    pi: Option<AnglePi>,
) -> Result<Output, CliError> {
    let cfg = r.resolve(None, 1, u32::MAX, &[Format::Json])?;
    let result = match (cos, pi) {
        (Some(c), _) => {
            let a = angle(&c, sin)?;
            match angle_to_pi(&a) {
                Ok(p) => json!({"input": a, "classification": "commensurable", "angle": p}),
                Err(_) => json!({
                    "input": a,
                    "classification": "incommensurable",
                    "angle_over_pi_approx": a.to_radians() / std::f64::consts::PI,
                }),
            }
        }
        (None, Some(p)) => json!({
            "input": p,
            "cos": cos_exact(&p),
            "cos_approx": p.to_radians().cos(),
        }),
        (None, None) => return Err(config_err("one of --cos or --pi is required")),
    };
    Ok(Output {
        text: envelope("angle", &cfg, result),
        failure: None,
    })
}

fn qubit(r: &Resolver, action: QubitCommand) -> Result<Output, CliError> {
    let limit = DEFAULT_LEVEL_LIMIT;
    let (name, cfg, result) = match action {
        QubitCommand::Superpose { triple: t, cos, sin } => {
            let cfg = r.resolve(t.n, 3, limit, &[Format::Json])?;
            let tr = triple(&t, cfg.level)?;
            let theta = angle(&cos, sin)?;
            let ones = ket_up(cfg.level);
            let sup = superpose(&tr, &theta, &ones, cfg.mode).map_err(config_err)?;
            let reference = build_root(tr.label_a()).and_then(|a| a.apply(&ones)).map_err(config_err)?;
            let corr = sup.string.correlation(&reference).map_err(config_err)?;
            let result = json!({
                "triple": tr,
                "theta": theta,
                "spins": sup.string.to_spins(),
                "string": sup.string,
                "selector": sup.selector,
                "rounded": sup.rounded,
                "correlation_with_a": corr,
            });
            ("qubit superpose", cfg, result)
        }
        QubitCommand::Scan { triple: t, base, angles } => {
            let cfg = r.resolve(t.n, 6, limit, &[Format::Json])?;
            let tr = triple(&t, cfg.level)?;
            let grid = if angles.is_empty() { default_scan_grid() } else { angles };
            let b = base_string(base, &cfg)?;
            let entries = class_scan(&b, &tr, &grid, cfg.mode).map_err(config_err)?;
            ("qubit scan", cfg, json!({"triple": tr, "base": base, "entries": entries}))
        }
        QubitCommand::Entangle { triple: t, cos, sin } => {
            let cfg = r.resolve(t.n, 3, limit, &[Format::Json])?;
            let tr = triple(&t, cfg.level)?;
            let theta = angle(&cos, sin)?;
            let (first, second) = entangle_pair(&tr, &theta, cfg.mode).map_err(config_err)?;
            let corr = first.correlation(&second).map_err(config_err)?;
            let result = json!({
                "triple": tr,
                "theta": theta,
                "first": first.to_spins(),
                "second": second.to_spins(),
                "correlation": corr,
            });
            ("qubit entangle", cfg, result)
        }
    };
    Ok(Output {
        text: envelope(name, &cfg, result),
        failure: None,
    })
}

fn default_scan_grid() -> Vec<AngleCos> {
    ["1", "0", "-1", "cos=0,sin=-", "1/2", "cos=1/2,sin=-", "3/4", "cos=3/4,sin=-"]
        .iter()
        .map(|s| s.parse().expect("valid literal"))
        .collect()
}

fn curve(r: &Resolver, n: Option<u32>, thetas: &[Dyadic]) -> Result<Output, CliError> {
    let cfg = r.resolve(n, 16, EPR_LEVEL_LIMIT, &[Format::Csv, Format::Json])?;
    let angles = thetas
        .iter()
        .map(|c| angle(c, None))
        .collect::<Result<Vec<_>, _>>()?;
    let s0 = build_s0(cfg.level, cfg.offset).map_err(config_err)?;
    let points = corr_curve(&s0, &angles, cfg.mode).map_err(config_err)?;
    let broken = points.iter().filter(|p| !p.exact && !p.rounded).count();
    let failure = (broken > 0).then(|| format!("{broken} curve points miss C = -cos θ"));
    let text = match cfg.format {
        Format::Json => envelope("epr curve", &cfg, to_value(&points)),
        _ => {
            let mut s = String::from("cos_theta,C_measured,C_expected,exact_flag\n");
            for p in &points {
                let _ = writeln!(s, "{},{},{},{}", p.theta.cos(), p.measured, p.expected, p.exact);
            }
            s
        }
    };
    Ok(Output { text, failure })
}

fn bell(r: &Resolver, args: &BellArgs, name: &str) -> Result<Output, CliError> {
    let cfg = r.resolve(args.n, 12, EPR_LEVEL_LIMIT, &[Format::Json])?;
    let theta_a = angle(&args.cos, None)?;
    let reality = reality_condition_check(&theta_a, cfg.level, cfg.offset, cfg.mode).map_err(config_err)?;
    let report = definedness(
        &args.lambda,
        &Perturbation::Align(theta_a.clone()),
        &Perturbation::Grid(AnglePi::zero()),
        &theta_a,
        cfg.level,
    );
    let chsh_theta = angle(args.chsh_cos.as_ref().unwrap_or(&args.cos), None)?;
    let settings = chsh_settings(&chsh_theta);
    let table = chsh(&settings, cfg.level, cfg.offset, cfg.mode).map_err(config_err)?;
    let result = json!({
        "reality_condition": reality,
        "definedness": report,
        "chsh": {
            "settings": settings,
            "report": table,
            "s_approx": table.s_f64(),
            "exceeds_two": table.s_f64().abs() > 2.0,
        },
    });
    Ok(Output {
        text: envelope(name, &cfg, result),
        failure: None,
    })
}

fn cauchy(
    r: &Resolver,
    n: Option<u32>,
    cos: &Dyadic,
    sin: Option<SinSign>,
    lambda: &AnglePi,
    jmin: u32,
    jmax: u32,
) -> Result<Output, CliError> {
    let cfg = r.resolve(n, jmax, EPR_LEVEL_LIMIT, &[Format::Tsv, Format::Json])?;
    let theta = angle(cos, sin)?;
    let s0 = build_s0(cfg.level, cfg.offset).map_err(config_err)?;
    let probe = cauchy_probe(&theta, lambda, jmin..=jmax, &s0).map_err(config_err)?;
    let text = match cfg.format {
        Format::Json => envelope("epr cauchy", &cfg, to_value(&probe)),
        _ => {
            let mut s = String::new();
            for (j, v) in probe.js.iter().zip(&probe.values) {
                match v {
                    Some(spin) => writeln!(s, "{j}\t{}", spin.value()),
                    None => writeln!(s, "{j}\tnan"),
                }
                .expect("string write");
            }
            s
        }
    };
    Ok(Output { text, failure: None })
}

fn report(r: &Resolver, strict_deviations: bool, cauchy_threshold: u32) -> Result<Output, CliError> {
    let cfg = r.resolve(None, 1, u32::MAX, &[Format::Text, Format::Json])?;
    let opts = AcceptanceOptions {
        strict_deviations,
        cauchy_threshold_percent: cauchy_threshold,
        ..AcceptanceOptions::default()
    };
    let rep = run_acceptance(&opts).map_err(|e| CliError::Failed(e.to_string()))?;
    let failed: Vec<String> = rep.criteria.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
    let failure = (!failed.is_empty()).then(|| format!("criteria failed: {}", failed.join(", ")));
    let text = match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rep).expect("serializable");
            s.push('\n');
            s
        }
        _ => {
            let mut s = String::new();
            for c in &rep.criteria {
                let _ = writeln!(s, "{}", c.summary_line());
            }
            let passed = rep.criteria.len() - failed.len();
            let _ = writeln!(s, "{passed}/{} criteria passed", rep.criteria.len());
            s
        }
    };
    Ok(Output { text, failure })
}
