//! `embedlab` command-line front end.
//!
//! Every analysis prints one JSON report on stdout. Exit status:
//! 0 positive verdict or success, 1 negative verdict, 2 undetermined,
//! 64 usage error, 65 malformed input.

mod input;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use embedlab::embed::{
    check_embeddable_with, check_strong_inf_divisible_with, BoundMode, DivisibilityVerdict,
    EmbedOptions, EmbedVerdict,
};
use embedlab::numkit::{eig, eigenvalues, expm, logm_branch, logm_principal, primary_root, BranchSelection};
use embedlab::structure::necessary_conditions;
use embedlab::{classify_matrix, frobenius_form, RealMatrix, ToleranceConfig};
use serde::Serialize;
use serde_json::{json, Value};

use input::MatrixFile;

const EX_USAGE: u8 = 64;
const EX_DATAERR: u8 = 65;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input: {0}")]
    Format(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EX_USAGE,
            CliError::Format(_) => EX_DATAERR,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "embedlab", version, about = "Embeddability and infinite divisibility of nonnegative matrices")]
struct Cli {
    /// Entrywise tolerance for sign and zero decisions
    #[arg(long, global = true, env = "EMBEDLAB_TOL", allow_negative_numbers = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class membership flags with witnesses
    Classify { file: PathBuf },
    /// Frobenius normal form and structural necessary conditions
    Structure { file: PathBuf },
    /// Matrix exponential
    Expm { file: PathBuf },
    /// Principal logarithm, or the branch with the given offsets
    Logm {
        file: PathBuf,
        /// One offset per eigenvalue in canonical order, e.g. `--branch=0,-1,1`
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        branch: Option<Vec<i64>>,
    },
    /// Primary nth root
    Root {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
    },
    /// Is the stochastic matrix exp(R) for an intensity matrix R?
    Embed {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Bound::Israel)]
        bound: Bound,
        /// Perturb matrices with repeated eigenvalues before searching
        #[arg(long)]
        allow_perturb: bool,
    },
    /// Is the nonnegative matrix exp(-Q) for a Z-matrix Q?
    Infdiv {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5",
              value_parser = clap::value_parser!(u32).range(2..))]
        roots: Vec<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Bound {
    Israel,
    Paper,
    Theorem4,
}

impl From<Bound> for BoundMode {
    fn from(b: Bound) -> Self {
        match b {
            Bound::Israel => BoundMode::IsraelTwoSided,
            Bound::Paper => BoundMode::PaperOneSided,
            Bound::Theorem4 => BoundMode::Theorem4General,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Success,
    Positive,
    Negative,
    Undetermined,
}

impl Status {
    fn exit_code(self) -> u8 {
        match self {
            Status::Success | Status::Positive => 0,
            Status::Negative => 1,
            Status::Undetermined => 2,
        }
    }
}

#[derive(Serialize)]
struct CommandEcho {
    subcommand: &'static str,
    /// Canonical arguments, tolerance included, that reproduce this report.
    argv: Vec<String>,
}

#[derive(Serialize)]
struct Report {
    command: CommandEcho,
    tolerance: ToleranceConfig,
    input: MatrixFile,
    status: Status,
    exit_code: u8,
    result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    version: &'static str,
    duration_ms: f64,
}

struct Outcome {
    status: Status,
    result: Value,
    error: Option<String>,
    summary: String,
}

impl Outcome {
    fn new(status: Status, result: Value, summary: impl Into<String>) -> Self {
        Outcome {
            status,
            result,
            error: None,
            summary: summary.into(),
        }
    }

    fn numerical(err: embedlab::Error, result: Value) -> Self {
        Outcome {
            status: Status::Undetermined,
            result,
            summary: format!("undetermined: {err}"),
            error: Some(err.to_string()),
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Errors that describe the input rather than the numerics.
fn input_error(err: &embedlab::Error) -> Option<CliError> {
    use embedlab::Error::*;
    match err {
        NotSquare { .. } | Empty | NonFinite { .. } | NotStochastic(_) | NotNonnegative { .. } => {
            Some(CliError::Format(err.to_string()))
        }
        InvalidTolerance(_) => Some(CliError::Usage(err.to_string())),
        _ => None,
    }
}

fn numerical_or_input(err: embedlab::Error, result: Value) -> Result<Outcome, CliError> {
    match input_error(&err) {
        Some(e) => Err(e),
        None => Ok(Outcome::numerical(err, result)),
    }
}

impl Command {
    fn file(&self) -> &PathBuf {
        match self {
            Command::Classify { file }
            | Command::Structure { file }
            | Command::Expm { file }
            | Command::Logm { file, .. }
            | Command::Root { file, .. }
            | Command::Embed { file, .. }
            | Command::Infdiv { file, .. } => file,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Structure { .. } => "structure",
            Command::Expm { .. } => "expm",
            Command::Logm { .. } => "logm",
            Command::Root { .. } => "root",
            Command::Embed { .. } => "embed",
            Command::Infdiv { .. } => "infdiv",
        }
    }

    fn argv(&self, cfg: &ToleranceConfig) -> Vec<String> {
        let join = |xs: &[String]| xs.join(",");
        let mut argv = vec![self.name().to_string(), self.file().display().to_string()];
        match self {
            Command::Logm { branch: Some(k), .. } => {
                let k: Vec<String> = k.iter().map(i64::to_string).collect();
                argv.push(format!("--branch={}", join(&k)));
            }
            Command::Root { n, .. } => argv.extend(["--n".into(), n.to_string()]),
            Command::Embed {
                bound,
                allow_perturb,
                ..
            } => {
                let bound = bound.to_possible_value().expect("no skipped variants");
                argv.extend(["--bound".into(), bound.get_name().to_string()]);
                if *allow_perturb {
                    argv.push("--allow-perturb".into());
                }
            }
            Command::Infdiv { roots, .. } => {
                let r: Vec<String> = roots.iter().map(u32::to_string).collect();
                argv.extend(["--roots".into(), join(&r)]);
            }
            _ => {}
        }
        argv.extend(["--tol".into(), format!("{:e}", cfg.entry_tol)]);
        argv
    }

    fn run(&self, a: &RealMatrix, cfg: &ToleranceConfig) -> Result<Outcome, CliError> {
        match self {
            Command::Classify { .. } => {
                let report = classify_matrix(a, cfg);
                let on: Vec<&str> = [
                    ("nonnegative", report.flags.nonnegative),
                    ("stochastic", report.flags.stochastic),
                    ("z", report.flags.z_matrix),
                    ("intensity", report.flags.intensity_matrix),
                    ("m", report.flags.m_matrix),
                    ("inverse-m", report.flags.inverse_m_matrix),
                    ("irreducible", report.flags.irreducible),
                ]
                .into_iter()
                .filter_map(|(name, on)| on.then_some(name))
                .collect();
                Ok(Outcome::new(Status::Success, to_value(&report), format!("classes: {}", on.join(", "))))
            }
            Command::Structure { .. } => {
                let d = frobenius_form(a, cfg);
                let nc = necessary_conditions(a, cfg);
                let summary = format!(
                    "{} blocks {:?}; necessary conditions {}",
                    d.num_blocks(),
                    d.block_sizes,
                    if nc.passed { "pass" } else { "fail" }
                );
                let result = json!({ "decomposition": d, "necessary_conditions": nc });
                Ok(Outcome::new(Status::Success, result, summary))
            }
            Command::Expm { .. } => match expm(a) {
                Ok(m) => Ok(Outcome::new(Status::Success, json!({ "matrix": m }), format!("exp =\n{m}"))),
                Err(e) => numerical_or_input(e, Value::Null),
            },
            Command::Logm { branch: None, .. } => match logm_principal(a) {
                Ok(l) => Ok(Outcome::new(
                    Status::Success,
                    json!({ "branch": "principal", "real": true, "logarithm": l }),
                    format!("principal log =\n{l}"),
                )),
                Err(e @ embedlab::Error::NegativeRealEigenvalue(_)) => Ok(Outcome {
                    status: Status::Negative,
                    result: json!({ "branch": "principal", "real": false, "logarithm": null,
                                    "eigenvalues": eigenvalues(a) }),
                    summary: format!("no real principal logarithm: {e}"),
                    error: Some(e.to_string()),
                }),
                Err(e) => numerical_or_input(e, Value::Null),
            },
            Command::Logm { branch: Some(offsets), .. } => {
                if offsets.len() != a.dim() {
                    return Err(CliError::Usage(format!(
                        "--branch needs {} offsets, got {}",
                        a.dim(),
                        offsets.len()
                    )));
                }
                let e = match eig(a, cfg) {
                    Ok(e) => e,
                    Err(err) => return numerical_or_input(err, Value::Null),
                };
                let sel = BranchSelection {
                    offsets: offsets.clone(),
                };
                let c = match logm_branch(&e, &sel) {
                    Ok(c) => c,
                    Err(err) => return numerical_or_input(err, json!({ "eigenvalues": e.eigenvalues() })),
                };
                Ok(match c.to_real(cfg.entry_tol) {
                    Some(l) => Outcome::new(
                        Status::Success,
                        json!({ "branch": offsets, "eigenvalues": e.eigenvalues(),
                                "real": true, "logarithm": l }),
                        format!("log on branch {offsets:?} =\n{l}"),
                    ),
                    None => Outcome::new(
                        Status::Negative,
                        json!({ "branch": offsets, "eigenvalues": e.eigenvalues(),
                                "real": false, "max_imag": c.max_imag(), "logarithm": null }),
                        format!("branch {offsets:?} is not real (max |Im| {:.3e})", c.max_imag()),
                    ),
                })
            }
            Command::Root { n, .. } => match primary_root(a, *n) {
                Ok(r) => Ok(Outcome::new(
                    Status::Success,
                    json!({ "n": n, "root": r }),
                    format!("primary root of order {n} =\n{r}"),
                )),
                Err(e) => numerical_or_input(e, Value::Null),
            },
            Command::Embed {
                bound,
                allow_perturb,
                ..
            } => {
                let opts = EmbedOptions {
                    bound_mode: (*bound).into(),
                    allow_perturb: *allow_perturb,
                    ..EmbedOptions::default()
                };
                match check_embeddable_with(a, cfg, &opts) {
                    Ok(r) => {
                        let status = match r.verdict {
                            EmbedVerdict::Embeddable => Status::Positive,
                            EmbedVerdict::NotEmbeddable => Status::Negative,
                            EmbedVerdict::Undetermined => Status::Undetermined,
                        };
                        let summary = format!("{:?} via {:?}", r.verdict, r.method);
                        Ok(Outcome::new(status, to_value(&r), summary))
                    }
                    Err(e) => numerical_or_input(e, json!({ "verdict": EmbedVerdict::Undetermined })),
                }
            }
            Command::Infdiv { roots, .. } => {
                let opts = EmbedOptions {
                    roots: roots.clone(),
                    ..EmbedOptions::default()
                };
                match check_strong_inf_divisible_with(a, cfg, &opts) {
                    Ok(r) => {
                        let status = match r.verdict {
                            DivisibilityVerdict::StronglyInfDivisible => Status::Positive,
                            DivisibilityVerdict::NotStronglyInfDivisible => Status::Negative,
                            DivisibilityVerdict::Undetermined => Status::Undetermined,
                        };
                        let summary = format!("{:?} via {:?}", r.verdict, r.method);
                        Ok(Outcome::new(status, to_value(&r), summary))
                    }
                    Err(e) => numerical_or_input(e, json!({ "verdict": DivisibilityVerdict::Undetermined })),
                }
            }
        }
    }
}

fn run(cli: Cli) -> Result<(Report, String), CliError> {
    let start = Instant::now();
    let mut cfg = ToleranceConfig::default();
    if let Some(tol) = cli.tol {
        cfg = cfg.with_entry_tol(tol);
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let (file, _format) = MatrixFile::read(cli.command.file())?;
    let a = file.matrix()?;
    if let Some(kind) = file.kind {
        if !kind.holds(&classify_matrix(&a, &cfg)) {
            return Err(CliError::Format(format!("matrix declared {kind:?} does not have that class")));
        }
    }

    let outcome = cli.command.run(&a, &cfg)?;
    let report = Report {
        command: CommandEcho {
            subcommand: cli.command.name(),
            argv: cli.command.argv(&cfg),
        },
        tolerance: cfg,
        input: file,
        status: outcome.status,
        exit_code: outcome.status.exit_code(),
        result: outcome.result,
        error: outcome.error,
        version: env!("CARGO_PKG_VERSION"),
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((report, outcome.summary))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version go to stdout and are not errors
            return ExitCode::from(if e.use_stderr() { EX_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok((report, summary)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if std::io::stderr().is_terminal() {
                eprintln!("{}: {summary} ({:.1} ms)", report.command.subcommand, report.duration_ms);
            }
            ExitCode::from(report.exit_code)
        }
        Err(e) => {
            eprintln!("embedlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
