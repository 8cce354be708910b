//! The `sant` command-line front end.
//!
//! Exit codes: 0 on success, 1 for user errors (unreadable or malformed
//! input, validation failures, bad flags) and 2 for internal errors.

use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::concretize::{concretize, ConcretizeError};
use crate::diag::{Diagnostic, Severity};
use crate::formats::{
    instance_from_json, instance_to_dot, instance_to_json, template_from_json, template_to_dot, template_to_json,
    AssignmentDocument, ModelDocument,
};
use crate::lex::ParseError;
use crate::san::{validate_san, ConcreteSan};
use crate::sim::{simulate, RewardSpec, SimConfig, SimError, SimResult};
use crate::template::{validate_template, SanTemplate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sant", version, about = "Build, check and simulate stochastic activity network templates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a template (.sant or JSON) or an instance (.sanx) and print diagnostics.
    Validate { model: PathBuf },
    /// Concretize a template under a named assignment and write the instance.
    Instantiate {
        model: PathBuf,
        /// Assignment file (.sasg).
        assignments: PathBuf,
        #[arg(long)]
        assignment: Option<String>,
        /// Output path; the instance JSON goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate rewards by simulating an instance, or a template plus assignment.
    Simulate {
        input: PathBuf,
        assignments: Option<PathBuf>,
        #[arg(long)]
        assignment: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000.0)]
        horizon: f64,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// tokens(PLACE), throughput(ACTIVITY) or prob(PLACE>=N); repeatable.
        #[arg(long = "reward")]
        rewards: Vec<RewardSpec>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a template or instance as Graphviz DOT or JSON.
    Export {
        input: PathBuf,
        /// With a template, concretize under this assignment file first.
        assignments: Option<PathBuf>,
        #[arg(long)]
        assignment: Option<String>,
        #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    User(String),
    #[error("internal error: {0}")]
    Internal(String),
    /// Diagnostics were already printed.
    #[error("{0}")]
    Reported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) | CliError::Reported(_) => EXIT_USER,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn user(e: impl std::fmt::Display) -> CliError {
    CliError::User(e.to_string())
}

/// Output sinks and settings for one invocation.
pub struct Console<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub color: bool,
}

impl Console<'_> {
    fn diagnostic(&mut self, path: &Path, doc: Option<&ModelDocument>, d: &Diagnostic) {
        let (label, code) = match d.severity {
            Severity::Error => ("error", "31"),
            Severity::Warning => ("warning", "33"),
        };
        let label = if self.color { format!("\x1b[1;{code}m{label}\x1b[0m") } else { label.to_string() };
        let mut loc = path.display().to_string();
        if let Some(pos) = doc.and_then(|doc| doc.locate(d)) {
            let _ = write!(loc, ":{}:{}", pos.line, pos.column);
        }
        let _ = writeln!(self.err, "{loc}: {label}[{:?}] {}: {}", d.kind, d.element, d.message);
    }

    fn diagnostics(&mut self, path: &Path, doc: Option<&ModelDocument>, diags: &[Diagnostic]) {
        for d in diags {
            self.diagnostic(path, doc, d);
        }
    }
}

/// `SANT_COLOR`: `1`/`always`/`on` forces color, `0`/`never`/`off` disables
/// it; otherwise color is used when stderr is a terminal.
pub fn color_from_env() -> bool {
    match std::env::var("SANT_COLOR").map(|v| v.to_ascii_lowercase()) {
        Ok(v) if matches!(v.as_str(), "1" | "always" | "on" | "true" | "yes") => true,
        Ok(v) if matches!(v.as_str(), "0" | "never" | "off" | "false" | "no") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let color = color_from_env();
    let outcome = std::panic::catch_unwind(|| {
        let mut out = std::io::stdout().lock();
        let mut err = std::io::stderr().lock();
        let mut console = Console { out: &mut out, err: &mut err, color };
        run(std::env::args_os(), &mut console)
    });
    outcome.unwrap_or(EXIT_INTERNAL)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, console: &mut Console<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let text = if console.color { e.render().ansi().to_string() } else { e.render().to_string() };
            let sink = if e.use_stderr() { &mut *console.err } else { &mut *console.out };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    match execute(cli.command, console) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !matches!(e, CliError::Reported(_)) {
                let _ = writeln!(console.err, "error: {e}");
            } else {
                let _ = writeln!(console.err, "{e}");
            }
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command, console: &mut Console<'_>) -> Result<(), CliError> {
    match cmd {
        Command::Validate { model } => cmd_validate(&model, console),
        Command::Instantiate { model, assignments, assignment, out } => {
            cmd_instantiate(&model, &assignments, assignment.as_deref(), out.as_deref(), console)
        }
        Command::Simulate { input, assignments, assignment, seed, horizon, reps, rewards, format, out } => {
            let cfg = SimConfig { seed, horizon, replications: reps, ..SimConfig::default() };
            let san = load_instance(&input, assignments.as_deref(), assignment.as_deref(), console)?;
            let result = run_simulation(&san, &cfg, &rewards)?;
            let text = match format {
                ReportFormat::Table => report_table(&result),
                ReportFormat::Json => serde_json::to_string_pretty(&result).map_err(|e| CliError::Internal(e.to_string()))? + "\n",
            };
            emit(out.as_deref(), &text, console)
        }
        Command::Export { input, assignments, assignment, format, out } => {
            let text = match (load(&input)?, assignments) {
                (Loaded::Template(t, _), None) => match format {
                    ExportFormat::Dot => template_to_dot(&t),
                    ExportFormat::Json => template_to_json(&t) + "\n",
                },
                (loaded, assignments) => {
                    let (san, warnings) = match loaded {
                        Loaded::Instance(san, w) => (san, w),
                        Loaded::Template(t, doc) => {
                            let asg = assignments.expect("template without assignments handled above");
                            instantiate(&t, doc.as_ref(), &input, &asg, assignment.as_deref(), console)?
                        }
                    };
                    match format {
                        ExportFormat::Dot => instance_to_dot(&san),
                        ExportFormat::Json => instance_to_json(&san, &warnings) + "\n",
                    }
                }
            };
            emit(out.as_deref(), &text, console)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str, console: &mut Console<'_>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::User(format!("cannot write {}: {e}", p.display()))),
        None => console.out.write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn parse_error(path: &Path, e: &ParseError) -> CliError {
    CliError::User(format!("{}:{}:{}: {}", path.display(), e.pos.line, e.pos.column, ParseErrorBody(e)))
}

/// A parse error without its leading position.
struct ParseErrorBody<'a>(&'a ParseError);

impl std::fmt::Display for ParseErrorBody<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0.message)?;
        if !self.0.expected.is_empty() {
            write!(f, " (expected one of: {})", self.0.expected.join(", "))?;
        }
        Ok(())
    }
}

pub enum Loaded {
    Template(SanTemplate, Option<ModelDocument>),
    Instance(ConcreteSan, Vec<Diagnostic>),
}

/// Reads a `.sant` model, a `.sanx` instance or a JSON template/instance.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "sanx" => instance_from_json(&text)
            .map(|(s, w)| Loaded::Instance(s, w))
            .map_err(|e| CliError::User(format!("{}: {e}", path.display()))),
        "json" => template_from_json(&text)
            .map(|t| Loaded::Template(t, None))
            .or_else(|_| instance_from_json(&text).map(|(s, w)| Loaded::Instance(s, w)))
            .map_err(|e| CliError::User(format!("{}: {e}", path.display()))),
        _ => {
            let doc = ModelDocument::parse(&text).map_err(|e| parse_error(path, &e))?;
            Ok(Loaded::Template(doc.template.clone(), Some(doc)))
        }
    }
}

fn cmd_validate(path: &Path, console: &mut Console<'_>) -> Result<(), CliError> {
    let (diags, doc) = match load(path)? {
        Loaded::Template(t, doc) => (validate_template(&t), doc),
        Loaded::Instance(san, _) => (validate_san(&san), None),
    };
    console.diagnostics(path, doc.as_ref(), &diags);
    let errors = diags.iter().filter(|d| d.is_error()).count();
    let warnings = diags.len() - errors;
    let summary = format!("{}: {errors} error(s), {warnings} warning(s)", path.display());
    if errors > 0 {
        return Err(CliError::Reported(summary));
    }
    let _ = writeln!(console.out, "{summary}");
    Ok(())
}

fn instantiate(
    t: &SanTemplate,
    doc: Option<&ModelDocument>,
    model_path: &Path,
    assignments: &Path,
    name: Option<&str>,
    console: &mut Console<'_>,
) -> Result<(ConcreteSan, Vec<Diagnostic>), CliError> {
    let asg = AssignmentDocument::parse(&read(assignments)?)
        .map_err(|e| CliError::User(format!("{}: {e}", assignments.display())))?;
    let xi = asg.select(name).map_err(user)?;
    match concretize(t, xi) {
        Ok(inst) => {
            console.diagnostics(model_path, doc, &inst.warnings);
            Ok((inst.san, inst.warnings))
        }
        Err(e @ (ConcretizeError::InvalidTemplate(_) | ConcretizeError::InvalidInstance(_))) => {
            console.diagnostics(model_path, doc, e.diagnostics());
            Err(CliError::Reported(format!("{}: {e}", model_path.display())))
        }
        Err(ConcretizeError::Assignment(e)) => Err(CliError::Reported(format!(
            "{}: error[{}] {e} ({})",
            model_path.display(),
            e.kind(),
            assignments.display()
        ))),
        Err(e) => Err(CliError::User(format!("{}: {e}", model_path.display()))),
    }
}

fn cmd_instantiate(
    model: &Path,
    assignments: &Path,
    name: Option<&str>,
    out: Option<&Path>,
    console: &mut Console<'_>,
) -> Result<(), CliError> {
    let (t, doc) = match load(model)? {
        Loaded::Template(t, doc) => (t, doc),
        Loaded::Instance(..) => return Err(user(format!("{} is already an instance", model.display()))),
    };
    let (san, warnings) = instantiate(&t, doc.as_ref(), model, assignments, name, console)?;
    emit(out, &(instance_to_json(&san, &warnings) + "\n"), console)?;
    let summary = format!("{}: {}", san.name, san.summary());
    if out.is_some() {
        let _ = writeln!(console.out, "{summary}");
    } else {
        let _ = writeln!(console.err, "{summary}");
    }
    Ok(())
}

fn load_instance(
    input: &Path,
    assignments: Option<&Path>,
    name: Option<&str>,
    console: &mut Console<'_>,
) -> Result<ConcreteSan, CliError> {
    match (load(input)?, assignments) {
        (Loaded::Instance(san, _), _) => Ok(san),
        (Loaded::Template(t, doc), Some(asg)) => instantiate(&t, doc.as_ref(), input, asg, name, console).map(|r| r.0),
        (Loaded::Template(..), None) => {
            Err(user(format!("{} is a template; pass an assignment file to simulate it", input.display())))
        }
    }
}

fn run_simulation(san: &ConcreteSan, cfg: &SimConfig, rewards: &[RewardSpec]) -> Result<SimResult, CliError> {
    let defaults: Vec<RewardSpec>;
    let rewards = if rewards.is_empty() {
        defaults = san.activities.iter().map(|a| RewardSpec::throughput(&a.name)).collect();
        &defaults
    } else {
        rewards
    };
    simulate(san, cfg, rewards).map_err(|e| match e {
        SimError::Fire { .. } => CliError::Internal(e.to_string()),
        _ => user(e),
    })
}

pub fn report_table(r: &SimResult) -> String {
    let width = r.rewards.iter().map(|e| e.name.len()).max().unwrap_or(0).max("reward".len());
    let mut s = format!("{:<width$}  {:>14}  {:>14}  {:>6}\n", "reward", "estimate", "std", "reps");
    for e in &r.rewards {
        let _ = writeln!(s, "{:<width$}  {:>14.6}  {:>14.6}  {:>6}", e.name, e.estimate, e.std, e.replications);
    }
    s
}
