//! `twinmat` command line. [`run`] takes explicit streams so tests can drive
//! it in-process; `main` only wires up the real ones.
//!
//! Exit codes: 0 success, 1 domain failure (gate refusal, invalid model,
//! engine or storage error), 2 usage error.

mod input;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use twinmat_core::analysis::{compare, ComparisonReport};
use twinmat_core::fixtures::{fixture, FIXTURE_NAMES};
use twinmat_core::gatekeeper::{evaluate_gates, gate_report};
use twinmat_core::report::{comparison_svg, series_csv};
use twinmat_core::schema::{validate_model, MaturityModel, ModelRef, Violation};
use twinmat_core::scorer::{score_assessment, Assessment, RoundingPolicy, ScoreReport, Subject};
use twinmat_core::store::{FixedClock, SystemClock, Workspace};
use twinmat_core::{builtin_paper_model, exact, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "twinmat", version, about = "Digital twin maturity assessment")]
pub struct Cli {
    /// Model document, or `builtin`.
    #[arg(long, global = true, value_name = "PATH|builtin")]
    pub model: Option<String>,

    #[arg(long, global = true, value_name = "DIR")]
    pub workspace: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Print exact fractions instead of two-decimal values.
    #[arg(long, global = true)]
    pub exact: bool,

    /// Embedded reference case. Repeatable for compare and report.
    #[arg(long, global = true, value_name = "NAME", value_parser = PossibleValuesParser::new(FIXTURE_NAMES))]
    pub fixture: Vec<String>,

    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Fixed clock for timestamps (RFC 3339).
    #[arg(long, global = true, hide = true)]
    pub now: Option<DateTime<Utc>>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model document against the structural rules.
    ModelValidate {
        #[arg(value_name = "PATH|builtin")]
        path: Option<String>,
    },
    /// Evaluate the fundamental-condition checklist.
    Gate {
        /// `yes`, `no`, or ITEM=yes|no,...
        #[arg(long)]
        gate: Option<String>,
        /// Stored assessment id.
        #[arg(long)]
        assessment: Option<String>,
        /// Assessment document.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Create an assessment, prompting for whatever the flags leave out.
    Assess {
        #[arg(long)]
        subject: Option<String>,
        #[arg(long)]
        description: Option<String>,
        #[arg(long)]
        rater: Option<String>,
        /// `yes`, `no`, or ITEM=yes|no,...
        #[arg(long)]
        gate: Option<String>,
        /// KEY=LEVEL,...
        #[arg(long)]
        levels: Option<String>,
        /// KEY=SCORE,...
        #[arg(long)]
        weights: Option<String>,
        /// Fail instead of prompting when something is missing.
        #[arg(long)]
        no_input: bool,
    },
    /// Score one assessment.
    Score {
        #[arg(long)]
        assessment: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Rank several assessments and place their dimensions in quadrants.
    Compare {
        #[arg(long)]
        assessment: Vec<String>,
        /// Assessment documents.
        files: Vec<PathBuf>,
    },
    /// Write the series CSV and the comparison chart into --out.
    Report {
        #[arg(long)]
        assessment: Vec<String>,
        files: Vec<PathBuf>,
    },
    /// Run the HTTP API over --workspace.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Built UI bundle to host under `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Engine(Error),
    /// Output already written; exit with this code.
    Exit(i32),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Engine(Error::Storage(e))
    }
}

type CmdResult = Result<(), Failure>;

struct Io<'a> {
    stdin: &'a mut dyn BufRead,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let format = cli.format;
    let mut io = Io {
        stdin,
        stdout,
        stderr,
    };
    match execute(&cli, &mut io) {
        Ok(()) => 0,
        Err(Failure::Exit(code)) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(io.stderr, "error: {msg}");
            2
        }
        Err(Failure::Engine(e)) => {
            report_error(io.stderr, format, &e);
            1
        }
    }
}

fn report_error(stderr: &mut dyn Write, format: Format, e: &Error) {
    if format == Format::Human {
        let _ = writeln!(stderr, "error[{}]: {e}", e.code());
        if let Error::Validation(v) = e {
            for line in violation_lines(v) {
                let _ = writeln!(stderr, "  {line}");
            }
        }
    } else {
        let body = serde_json::json!({ "code": e.code(), "message": e.to_string() });
        let _ = writeln!(stderr, "{body}");
    }
}

fn execute(cli: &Cli, io: &mut Io) -> CmdResult {
    match &cli.command {
        Command::ModelValidate { path } => model_validate(cli, io, path.as_deref()),
        Command::Gate {
            gate,
            assessment,
            file,
        } => gate_cmd(
            cli,
            io,
            gate.as_deref(),
            assessment.as_deref(),
            file.as_deref(),
        ),
        Command::Assess { .. } => assess(cli, io),
        Command::Score { assessment, file } => {
            score(cli, io, assessment.as_deref(), file.as_deref())
        }
        Command::Compare { assessment, files } => {
            let report = comparison(cli, assessment, files)?;
            print_comparison(cli, io, &report)
        }
        Command::Report { assessment, files } => {
            let report = comparison(cli, assessment, files)?;
            write_report(cli, io, &report)
        }
        Command::Serve { addr, static_dir } => serve(cli, io, *addr, static_dir.clone()),
    }
}

fn is_builtin(spec: &str) -> bool {
    matches!(spec, "builtin" | "builtin.model")
}

fn read_model(spec: &str) -> Result<MaturityModel, Failure> {
    if is_builtin(spec) {
        return Ok(builtin_paper_model());
    }
    let text = fs::read_to_string(spec)?;
    Ok(twinmat_core::load_model(&text)?)
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn reject_csv(cli: &Cli, what: &str) -> CmdResult {
    if cli.format == Format::Csv {
        return Err(Failure::usage(format!("{what} has no csv output")));
    }
    Ok(())
}

fn violation_lines(v: &[Violation]) -> Vec<String> {
    v.iter()
        .map(|v| format!("{} at {}: {}", v.rule, v.path, v.message))
        .collect()
}

fn model_validate(cli: &Cli, io: &mut Io, path: Option<&str>) -> CmdResult {
    reject_csv(cli, "model-validate")?;
    let spec = path.or(cli.model.as_deref()).unwrap_or("builtin");
    let model = if is_builtin(spec) {
        builtin_paper_model()
    } else {
        let text = fs::read_to_string(spec)?;
        serde_json::from_str::<MaturityModel>(&text).map_err(Error::from)?
    };
    let violations = validate_model(&model);
    match cli.format {
        Format::Json => emit_json(
            io.stdout,
            &serde_json::json!({ "model": model.model_ref(), "violations": violations }),
        )?,
        _ => {
            writeln!(io.stdout, "{}", model.model_ref())?;
            for line in violation_lines(&violations) {
                writeln!(io.stdout, "  {line}")?;
            }
            let n = violations.len();
            writeln!(io.stdout, "{n} violation{}", if n == 1 { "" } else { "s" })?;
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Exit(1))
    }
}

fn open_workspace(cli: &Cli, writer: bool) -> Result<Option<Workspace>, Failure> {
    let Some(root) = &cli.workspace else {
        return Ok(None);
    };
    let ws = if writer {
        let clock: Arc<dyn twinmat_core::store::Clock> = match cli.now {
            Some(t) => Arc::new(FixedClock(t)),
            None => Arc::new(SystemClock),
        };
        Workspace::open_writer_with_clock(root, clock)?
    } else {
        Workspace::open(root)?
    };
    Ok(Some(ws))
}

fn require_workspace(cli: &Cli, writer: bool) -> Result<Workspace, Failure> {
    open_workspace(cli, writer)?.ok_or_else(|| Failure::usage("--workspace is required here"))
}

/// Model for an assessment: --model wins, then the workspace registry, then
/// the builtin model.
fn model_for(cli: &Cli, ws: Option<&Workspace>, r: &ModelRef) -> Result<MaturityModel, Failure> {
    if let Some(spec) = &cli.model {
        return read_model(spec);
    }
    if let Some(ws) = ws {
        return Ok(ws.model(r)?);
    }
    let builtin = builtin_paper_model();
    if &builtin.model_ref() == r {
        Ok(builtin)
    } else {
        Err(Error::UnknownModel {
            id: r.id.clone(),
            version: r.version.clone(),
        }
        .into())
    }
}

fn read_assessment(path: &Path) -> Result<Assessment, Failure> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

/// Where a single assessment comes from.
enum Source {
    Fixture(Assessment),
    Stored(String, Assessment),
    File(Assessment),
}

impl Source {
    fn assessment(&self) -> &Assessment {
        match self {
            Source::Fixture(a) | Source::Stored(_, a) | Source::File(a) => a,
        }
    }
}

fn single_source(
    cli: &Cli,
    ws: Option<&Workspace>,
    id: Option<&str>,
    file: Option<&Path>,
) -> Result<Option<Source>, Failure> {
    let given = cli.fixture.len() + usize::from(id.is_some()) + usize::from(file.is_some());
    if given > 1 {
        return Err(Failure::usage(
            "give one of --fixture, --assessment, --file",
        ));
    }
    if let Some(name) = cli.fixture.first() {
        return Ok(Some(Source::Fixture(
            fixture(name).expect("validated by clap"),
        )));
    }
    if let Some(id) = id {
        let ws = ws.ok_or_else(|| Failure::usage("--assessment needs --workspace"))?;
        return Ok(Some(Source::Stored(id.to_owned(), ws.get_assessment(id)?)));
    }
    if let Some(path) = file {
        return Ok(Some(Source::File(read_assessment(path)?)));
    }
    Ok(None)
}

fn gate_cmd(
    cli: &Cli,
    io: &mut Io,
    gate: Option<&str>,
    id: Option<&str>,
    file: Option<&Path>,
) -> CmdResult {
    reject_csv(cli, "gate")?;
    let ws = open_workspace(cli, false)?;
    let source = single_source(cli, ws.as_ref(), id, file)?;
    let (model, checklist) = match (source, gate) {
        (Some(_), Some(_)) => {
            return Err(Failure::usage(
                "--gate cannot be combined with an assessment",
            ))
        }
        (Some(src), None) => {
            let a = src.assessment();
            (model_for(cli, ws.as_ref(), &a.model_ref)?, a.checklist())
        }
        (None, Some(text)) => {
            let model = read_model(cli.model.as_deref().unwrap_or("builtin"))?;
            let checklist = input::gate_answers(&model, text)?;
            (model, checklist)
        }
        (None, None) => {
            return Err(Failure::usage(
                "give --gate, --fixture, --assessment or --file",
            ))
        }
    };
    let verdict = evaluate_gates(&checklist, &model)?;
    match cli.format {
        Format::Json => emit_json(io.stdout, &verdict)?,
        _ => write!(io.stdout, "{}", gate_report(&verdict, &checklist, &model)?)?,
    }
    if verdict.passed {
        Ok(())
    } else {
        Err(Failure::Exit(1))
    }
}

fn assess(cli: &Cli, io: &mut Io) -> CmdResult {
    let Command::Assess {
        subject,
        description,
        rater,
        gate,
        levels,
        weights,
        no_input,
    } = &cli.command
    else {
        unreachable!()
    };
    reject_csv(cli, "assess")?;
    let ws = require_workspace(cli, true)?;

    let assessment = if let Some(name) = cli.fixture.first() {
        if cli.fixture.len() > 1 {
            return Err(Failure::usage("assess takes one --fixture"));
        }
        fixture(name).expect("validated by clap")
    } else {
        let model = match &cli.model {
            Some(spec) => {
                let m = read_model(spec)?;
                ws.put_model(&m)?;
                m
            }
            None => builtin_paper_model(),
        };
        let checklist = gate
            .as_deref()
            .map(|g| input::gate_answers(&model, g))
            .transpose()?;
        let levels = match levels {
            Some(text) => input::key_values("--levels", text)?,
            None => BTreeMap::new(),
        };
        let weight_scores = match weights {
            Some(text) => input::key_values("--weights", text)?,
            None => BTreeMap::new(),
        };
        let complete = subject.is_some()
            && checklist.is_some()
            && model
                .dimensions
                .iter()
                .all(|d| levels.contains_key(&d.key) && weight_scores.contains_key(&d.key));
        if *no_input && !complete {
            return Err(Failure::usage(
                "--no-input needs --subject, --gate, and --levels and --weights for every dimension",
            ));
        }
        let answers = input::interview(
            &model,
            io.stdin,
            io.stdout,
            subject.clone(),
            checklist,
            levels,
            weight_scores,
        )?;
        if !answers.verdict.passed {
            match cli.format {
                Format::Json => emit_json(io.stdout, &answers.verdict)?,
                _ => write!(
                    io.stdout,
                    "{}",
                    gate_report(&answers.verdict, &answers.checklist, &model)?
                )?,
            }
            writeln!(
                io.stderr,
                "assessment not stored: subject refused at the gate"
            )?;
            return Err(Failure::Exit(1));
        }
        Assessment {
            id: None,
            subject: Subject {
                name: answers.subject,
                description: description.clone(),
            },
            model_ref: model.model_ref(),
            gate_answers: answers.checklist.answers,
            gate_notes: answers.checklist.notes,
            levels: answers.levels,
            weight_scores: answers.weight_scores,
            rater: rater.clone(),
            timestamp: ws.now(),
        }
    };

    let id = ws.put_assessment(&assessment)?;
    let stored = ws.get_assessment(&id)?;
    match cli.format {
        Format::Json => emit_json(io.stdout, &stored)?,
        _ => writeln!(io.stdout, "stored assessment {id}")?,
    }
    Ok(())
}

fn policy(cli: &Cli) -> RoundingPolicy {
    if cli.exact || cli.format != Format::Human {
        RoundingPolicy::Exact
    } else {
        RoundingPolicy::Display2dp
    }
}

fn score(cli: &Cli, io: &mut Io, id: Option<&str>, file: Option<&Path>) -> CmdResult {
    // a stored assessment gets a history line when the workspace is free
    let ws = match (id, open_workspace(cli, id.is_some())) {
        (Some(_), Err(Failure::Engine(Error::LockHeld(root)))) => {
            writeln!(io.stderr, "note: {root} is locked; history not recorded")?;
            open_workspace(cli, false)?
        }
        (_, other) => other?,
    };
    let source = single_source(cli, ws.as_ref(), id, file)?
        .ok_or_else(|| Failure::usage("give --fixture, --assessment or --file"))?;
    let a = source.assessment();
    let model = model_for(cli, ws.as_ref(), &a.model_ref)?;
    let report = score_assessment(a, &model, policy(cli))?;
    if let (Source::Stored(id, _), Some(ws)) = (&source, &ws) {
        if ws.is_writer() {
            ws.append_history(id, &report)?;
        }
    }
    print_score(cli, io, a, &report)
}

/// Score output as printed by `score`; shared with tests that compare it to
/// the service.
pub fn score_json(report: &ScoreReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization is infallible")
}

fn print_score(cli: &Cli, io: &mut Io, a: &Assessment, report: &ScoreReport) -> CmdResult {
    match cli.format {
        Format::Human => write!(io.stdout, "{}", report.render())?,
        Format::Json => writeln!(io.stdout, "{}", score_json(report))?,
        Format::Csv => {
            let cmp = compare(&[(a.clone(), report.clone())])?;
            write!(io.stdout, "{}", series_csv(&cmp.series())?)?;
        }
    }
    Ok(())
}

fn comparison(cli: &Cli, ids: &[String], files: &[PathBuf]) -> Result<ComparisonReport, Failure> {
    let ws = open_workspace(cli, false)?;
    let mut portfolio = Vec::new();
    let mut assessments: Vec<Assessment> = cli
        .fixture
        .iter()
        .map(|n| fixture(n).expect("validated by clap"))
        .collect();
    if !ids.is_empty() {
        let ws = ws
            .as_ref()
            .ok_or_else(|| Failure::usage("--assessment needs --workspace"))?;
        for id in ids {
            assessments.push(ws.get_assessment(id)?);
        }
    }
    for path in files {
        assessments.push(read_assessment(path)?);
    }
    if assessments.is_empty() {
        return Err(Failure::usage("nothing to compare"));
    }
    for a in assessments {
        let model = model_for(cli, ws.as_ref(), &a.model_ref)?;
        let r = score_assessment(&a, &model, RoundingPolicy::Exact)?;
        portfolio.push((a, r));
    }
    Ok(compare(&portfolio)?)
}

fn print_comparison(cli: &Cli, io: &mut Io, report: &ComparisonReport) -> CmdResult {
    match cli.format {
        Format::Json => emit_json(io.stdout, report),
        Format::Csv => {
            write!(io.stdout, "{}", series_csv(&report.series())?)?;
            Ok(())
        }
        Format::Human => {
            let value = |v| {
                if cli.exact {
                    format!(
                        "{} ({})",
                        exact::to_fraction_string(v),
                        exact::exact_decimal(v)
                    )
                } else {
                    exact::display_2dp(v)
                }
            };
            writeln!(io.stdout, "model: {}", report.model_ref)?;
            writeln!(io.stdout, "{:<5} {:<24} L_DT", "rank", "subject")?;
            for r in &report.ranking {
                let tie = if r.tied { " (tied)" } else { "" };
                writeln!(
                    io.stdout,
                    "{:<5} {:<24} {}{tie}",
                    r.rank,
                    r.subject,
                    value(&r.overall)
                )?;
            }
            for s in &report.subjects {
                writeln!(io.stdout, "\n{}", s.subject)?;
                for d in &s.quadrants.dimensions {
                    writeln!(
                        io.stdout,
                        "  {:<4} m={:<8} W={:<8} {}",
                        d.key,
                        exact::display_2dp(&d.maturity),
                        exact::display_2dp(&d.normalized_weight),
                        d.label.as_str()
                    )?;
                }
            }
            Ok(())
        }
    }
}

fn write_report(cli: &Cli, io: &mut Io, report: &ComparisonReport) -> CmdResult {
    let dir = cli
        .out
        .as_ref()
        .ok_or_else(|| Failure::usage("report needs --out DIR"))?;
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("series.csv");
    let svg_path = dir.join("comparison.svg");
    fs::write(&csv_path, series_csv(&report.series())?)?;
    fs::write(&svg_path, comparison_svg(report))?;
    match cli.format {
        Format::Json => emit_json(
            io.stdout,
            &serde_json::json!({ "csv": csv_path, "svg": svg_path }),
        ),
        _ => {
            writeln!(io.stdout, "{}", csv_path.display())?;
            writeln!(io.stdout, "{}", svg_path.display())?;
            Ok(())
        }
    }
}

fn serve(cli: &Cli, io: &mut Io, addr: SocketAddr, static_dir: Option<PathBuf>) -> CmdResult {
    let ws = require_workspace(cli, true)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let config = twinmat_service::ServiceConfig { static_dir };
        let handle = twinmat_service::serve(ws, addr, config)
            .await
            .map_err(|e| match e {
                twinmat_service::ServeError::Workspace(e) => Failure::Engine(e),
                twinmat_service::ServeError::Bind { source, .. } => {
                    Failure::Engine(Error::Storage(source))
                }
            })?;
        writeln!(io.stdout, "listening on http://{}", handle.local_addr())?;
        io.stdout.flush()?;
        tokio::signal::ctrl_c().await?;
        handle.shutdown().await?;
        Ok(())
    })
}
