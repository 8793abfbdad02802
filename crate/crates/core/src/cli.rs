//! Command-line front end. `run` returns the process exit code:
//! 0 when every check passes, 1 when a verification fails, 2 on bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::density::{FullDensity, DEFAULT_TOLERANCE};
use crate::impute::{impute, Mode, RealizedData};
use crate::io::ingest::{ingest_csv, IngestOptions};
use crate::io::model_spec::{parse_model, ModelSpec};
use crate::io::report::{
    chain_csv, render_text, ChainSection, MarSection, ModelInfo, Report,
    ViolationInfo,
};
use crate::pattern::MissingnessPattern;
use crate::space::{Outcome, SubVector};
use crate::verify::{find_mar_violation, verify_model};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "missingness", version, about = "Exact checks for finite models of incomplete data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pattern counts, empirical p(r) and the pattern lattice of a dataset or model.
    Patterns(Args),
    /// Search every observed data event for a MAR violation.
    CheckMar(Args),
    /// Verify the identity chain on every event of the model.
    VerifyIdentities(Args),
    /// Run an F or T imputation chain from a realized data point.
    Impute(Args),
    /// Everything available for the given inputs in one document.
    Report(Args),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Patterns(_) => "patterns",
            Command::CheckMar(_) => "check-mar",
            Command::VerifyIdentities(_) => "verify-identities",
            Command::Impute(_) => "impute",
            Command::Report(_) => "report",
        }
    }

    fn args(&self) -> &Args {
        match self {
            Command::Patterns(a)
            | Command::CheckMar(a)
            | Command::VerifyIdentities(a)
            | Command::Impute(a)
            | Command::Report(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Args {
    /// Model specification (TOML).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Incomplete dataset (CSV with a header row).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "NA")]
    pub missing_marker: String,
    /// Imputation mode: F (formal) or T (temporal).
    #[arg(long, default_value = "F", value_parser = parse_mode)]
    pub mode: Mode,
    /// Chain length.
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the tolerance declared in the model.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Output file: chain CSV for `impute` (stdout when absent), the machine
    /// document otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Realized data as comma-separated values, missing cells given by the marker.
    /// Defaults to the first positive-mass point with an incomplete pattern.
    #[arg(long)]
    pub realized: Option<String>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: crate::impute::SimError| e.to_string())
}

/// Any input or usage problem; always exit code 2.
#[derive(Debug)]
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

struct Loaded {
    spec: ModelSpec,
    h: FullDensity,
}

fn load_model(path: &Path) -> Result<Loaded, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let (spec, h) =
        parse_model(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok(Loaded { spec, h })
}

/// `ỹ` is the first outcome in canonical order consistent with the observed
/// cells that has positive probability under pattern `r̃`.
fn parse_realized(h: &FullDensity, text: &str, marker: &str) -> Result<RealizedData, InputError> {
    let space = h.space();
    let cells: Vec<&str> = text.split(',').map(str::trim).collect();
    if cells.len() != space.d() {
        return Err(InputError(format!(
            "--realized has {} values, the model has {} variables",
            cells.len(),
            space.d()
        )));
    }
    let bits: Vec<bool> = cells.iter().map(|c| *c != marker && !c.is_empty()).collect();
    let r = MissingnessPattern::from_bits(&bits)?;
    let mut observed = SubVector::empty();
    for (c, cell) in cells.iter().enumerate().filter(|(c, _)| bits[*c]) {
        let code = space.domains()[c].code_of(cell).ok_or_else(|| {
            InputError(format!(
                "--realized: {cell:?} is not a value of {}",
                space.domains()[c].name
            ))
        })?;
        observed.coords.push(c);
        observed.codes.push(code);
    }
    let event = space.event_for(&r, &observed)?;
    let point = event
        .members
        .iter()
        .find(|p| h.prob(p) > 0.0)
        .ok_or_else(|| {
            InputError(format!(
                "--realized {} has zero probability under the model",
                space.format_event(&event)
            ))
        })?;
    Ok(RealizedData::new(h, Outcome(point.y.0.clone()), r)?)
}

/// Without `--realized`, the chain starts from the first point of `Ω` in
/// canonical order that has positive mass and an incomplete pattern, or
/// the first positive point if every incomplete pattern has zero mass.
fn default_realized(h: &FullDensity) -> Result<RealizedData, InputError> {
    let space = h.space();
    let positive = || space.enumerate_omega().filter(|p| h.prob(p) > 0.0);
    let p = positive()
        .find(|p| !p.r.is_all_observed())
        .or_else(|| positive().next())
        .ok_or_else(|| InputError("model has no point with positive mass".into()))?;
    Ok(RealizedData::new(h, p.y, p.r)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), InputError> {
    std::fs::write(path, contents)
        .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<bool, InputError> {
    let args = cmd.args();
    let model = args.model.as_deref().map(load_model).transpose()?;
    let tol = args
        .tolerance
        .or(model.as_ref().map(|m| m.spec.tolerance))
        .unwrap_or(DEFAULT_TOLERANCE);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(InputError(format!("--tolerance must be a non-negative number, got {tol}")));
    }
    let need_model = || {
        model
            .as_ref()
            .ok_or_else(|| InputError(format!("{} requires --model", cmd.name())))
    };

    let mut rep = Report::new(cmd.name(), tol);
    if let Some(m) = &model {
        rep.model = Some(ModelInfo::new(&m.spec.space));
    }
    let ingest = |path: &Path| {
        let opts = IngestOptions {
            missing_marker: args.missing_marker.clone(),
            ..IngestOptions::default()
        };
        ingest_csv(path, &opts, model.as_ref().map(|m| &m.spec.space))
    };
    let mut chain_out = None;

    match cmd {
        Command::Patterns(_) => {
            if args.data.is_none() && model.is_none() {
                return Err(InputError("patterns requires --data or --model".into()));
            }
            if let Some(path) = &args.data {
                rep.data = Some(ingest(path)?);
            }
        }
        Command::CheckMar(_) => {
            let m = need_model()?;
            rep.mar = Some(mar_section(&m.h, tol));
        }
        Command::VerifyIdentities(_) => {
            let m = need_model()?;
            rep.identities = Some(verify_model(&m.h, tol).into());
        }
        Command::Impute(_) => {
            let m = need_model()?;
            let real = match &args.realized {
                Some(text) => parse_realized(&m.h, text, &args.missing_marker)?,
                None => default_realized(&m.h)?,
            };
            let chain = impute(&m.h, &real, args.mode, args.m, args.seed)?;
            rep.seed = Some(args.seed);
            rep.chain = Some(ChainSection::new(&m.h, &chain)?);
            chain_out = Some(chain_csv(&m.spec.space, &chain));
        }
        Command::Report(_) => {
            if args.data.is_none() && model.is_none() {
                return Err(InputError("report requires --data or --model".into()));
            }
            if let Some(path) = &args.data {
                rep.data = Some(ingest(path)?);
            }
            if let Some(m) = &model {
                rep.mar = Some(mar_section(&m.h, tol));
                rep.identities = Some(verify_model(&m.h, tol).into());
                if let Some(text) = &args.realized {
                    let real = parse_realized(&m.h, text, &args.missing_marker)?;
                    let chain = impute(&m.h, &real, args.mode, args.m, args.seed)?;
                    rep.seed = Some(args.seed);
                    rep.chain = Some(ChainSection::new(&m.h, &chain)?);
                }
            }
        }
    }

    rep.passed = match cmd {
        Command::CheckMar(_) => rep.mar.as_ref().is_none_or(|m| m.violation.is_none()),
        _ => rep.identities.as_ref().is_none_or(|i| i.passed),
    };

    // without --out the chain itself is the output of `impute`
    match (&args.out, chain_out) {
        (Some(path), Some(csv)) => write_file(path, &csv)?,
        (Some(path), None) => write_file(path, &rep.to_json())?,
        (None, Some(csv)) => {
            stdout.write_all(csv.as_bytes())?;
            return Ok(rep.passed);
        }
        (None, None) => {}
    }
    let body = match args.format {
        Format::Text => render_text(&rep),
        Format::Machine => rep.to_json(),
    };
    stdout.write_all(body.as_bytes())?;
    Ok(rep.passed)
}

fn mar_section(h: &FullDensity, tol: f64) -> MarSection {
    let violation = find_mar_violation(h, tol);
    MarSection {
        everywhere_mar: violation.is_none(),
        violation: violation.map(|v| ViolationInfo::new(h.space(), &v)),
    }
}

pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(InputError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}
