use std::fs;
use std::io::{self, BufRead, IsTerminal, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use agentgraph::backend::DEFAULT_API_KEY_ENV;
use agentgraph::eval::suite::spread_sizes;
use agentgraph::eval::{node_range, run_suite, write_csv, write_size_csv, SuiteConfig, SuiteReport};
use agentgraph::orchestrator::{classify_as, classify_problem, solve_spec, solve_with_run, ProblemSpec, Solution};
use agentgraph::runtime::Schedule;
use agentgraph::{AgentBackend, BackendConfig, BackendMode, EngineConfig, TaskKind};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "agentgraph", version, about = "Solve graph problems stated in text with one agent per node")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Agent executor.
    #[arg(long, global = true, default_value = "deterministic")]
    backend: BackendMode,
    /// Chat-completion base URL (LLM mode).
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Chat model name (LLM and replay mode; default gpt-4o-mini)
    #[arg(long, global = true)]
    model: Option<String>,
    /// Name of the environment variable holding the API key.
    #[arg(long, global = true, default_value = DEFAULT_API_KEY_ENV)]
    api_key_env: String,
    /// Directory of recorded exchanges: written in LLM mode, read in replay mode.
    #[arg(long, global = true)]
    transcripts: Option<PathBuf>,
    /// Concurrent agent calls per superstep.
    #[arg(long, global = true, default_value_t = 4)]
    concurrency: usize,
    /// Override the program's iteration cap.
    #[arg(long, global = true)]
    max_supersteps: Option<usize>,
    /// Evaluate agents of a superstep in parallel.
    #[arg(long, global = true)]
    parallel: bool,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// More logging on stderr (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Input {
    /// Problem file; `-` reads standard input.
    file: Option<PathBuf>,
    /// Problem text given inline.
    #[arg(long)]
    text: Option<String>,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Skip classification and use this task.
    #[arg(long)]
    task: Option<TaskKind>,
    /// Treat edges as directed
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    /// Treat edges as undirected
    #[arg(long)]
    undirected: bool,
    /// Read the third tuple element as an edge weight
    #[arg(long, conflicts_with = "unweighted")]
    weighted: bool,
    /// Ignore edge weights
    #[arg(long)]
    unweighted: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem, or a JSON-lines batch with --batch.
    Solve {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        overrides: Overrides,
        /// Input holds one `{"id", "text", "task_hint"}` object per line.
        #[arg(long)]
        batch: bool,
    },
    /// Run generated instances against the oracles.
    Bench {
        /// Task name(s), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        task: Vec<TaskKind>,
        /// Instances per task.
        #[arg(long)]
        count: usize,
        /// Node counts to cycle through; defaults to five sizes across the task's range.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Seed of the first instance; later ones count up from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write per-instance rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write accuracy per task and size here.
        #[arg(long)]
        size_csv: Option<PathBuf>,
        /// Allow sizes outside the task's node range.
        #[arg(long)]
        unbounded: bool,
    },
    /// Solve and print the round-by-round log.
    Trace {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the algorithm library, or print one template.
    Templates { name: Option<TaskKind> },
}

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! emit {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)?
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    // usage errors never get here: clap exits with 2 on its own
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Templates { name } => templates(*name),
        Command::Solve { input, overrides, batch } => {
            let backend = build_backend(g)?;
            let text = read_input(input)?;
            if *batch {
                solve_batch(g, backend.as_ref(), &text, overrides)
            } else {
                let sol = solve_one(g, backend.as_ref(), &text, overrides)?;
                print_solution(g.format, None, &sol)?;
                Ok(())
            }
        }
        Command::Trace { input, overrides } => {
            let backend = build_backend(g)?;
            let text = read_input(input)?;
            let spec = make_spec(&text, overrides, None)?;
            let cfg = engine_config(g).with_trace();
            let graph = spec.parse_graph().context("graph")?;
            let program = spec.program(&graph).context("program")?;
            let (sol, result) = solve_with_run(&spec, Some(&text), backend.as_ref(), &cfg).context("trace")?;
            let trace = result.trace.as_ref().context("engine returned no trace")?;
            match g.format {
                Format::Text => {
                    emit!("{}", trace.render(program.as_ref(), result.termination));
                    emit!("{}", result.render_states(program.as_ref()));
                    emit!("{}", sol.answer.narrative);
                }
                Format::Json => emit!("{}", serde_json::to_string(&result).context("serialize")?),
            }
            Ok(())
        }
        Command::Bench { task, count, sizes, seed, workers, csv, size_csv, unbounded } => {
            let backend = build_backend(g)?;
            let engine = engine_config(g);
            let mut reports = Vec::new();
            for &t in task {
                let sizes = if sizes.is_empty() {
                    let (lo, hi) = node_range(t);
                    spread_sizes(lo, hi, 5)
                } else {
                    sizes.clone()
                };
                let cfg =
                    SuiteConfig { count: *count, sizes, base_seed: *seed, workers: *workers, unbounded: *unbounded };
                let report = run_suite(t, &cfg, backend.as_ref(), &engine);
                print_report(g.format, &report)?;
                reports.push(report);
            }
            if let Some(path) = csv {
                let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_csv(&reports, file).context("writing CSV")?;
            }
            if let Some(path) = size_csv {
                let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_size_csv(&reports, file).context("writing CSV")?;
            }
            Ok(())
        }
    }
}

fn build_backend(g: &GlobalOpts) -> Result<Box<dyn AgentBackend>> {
    let cfg = BackendConfig {
        mode: g.backend,
        endpoint: g.endpoint.clone(),
        model_name: g.model.clone(),
        transcript_store: g.transcripts.clone(),
        api_key_env: g.api_key_env.clone(),
        concurrency: g.concurrency.max(1),
        ..BackendConfig::default()
    };
    cfg.build().context("backend")
}

fn engine_config(g: &GlobalOpts) -> EngineConfig {
    let mut cfg = EngineConfig { max_supersteps: g.max_supersteps, ..EngineConfig::default() };
    if g.parallel {
        cfg = cfg.with_schedule(Schedule::Parallel);
    }
    cfg
}

fn read_input(input: &Input) -> Result<String> {
    if let Some(t) = &input.text {
        return Ok(t.clone());
    }
    match input.file.as_deref() {
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading standard input")?;
            Ok(s)
        }
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => bail!("no problem input"),
    }
}

fn make_spec(text: &str, o: &Overrides, hint: Option<TaskKind>) -> Result<ProblemSpec> {
    let mut spec = match o.task.or(hint) {
        Some(t) => classify_as(text, t),
        None => classify_problem(text),
    }?;
    if o.directed {
        spec.directed = true;
    }
    if o.undirected {
        spec.directed = false;
    }
    if o.weighted {
        spec.weighted = true;
    }
    if o.unweighted {
        spec.weighted = false;
    }
    Ok(spec)
}

fn solve_one(g: &GlobalOpts, backend: &dyn AgentBackend, text: &str, o: &Overrides) -> Result<Solution> {
    let spec = make_spec(text, o, None)?;
    Ok(solve_spec(&spec, Some(text), backend, &engine_config(g))?)
}

#[derive(Deserialize)]
struct BatchItem {
    id: serde_json::Value,
    text: String,
    #[serde(default)]
    task_hint: Option<String>,
}

#[derive(Serialize)]
struct AnswerOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a serde_json::Value>,
    task: TaskKind,
    kind: agentgraph::AnswerKind,
    value: &'a agentgraph::orchestrator::AnswerValue,
    narrative: &'a str,
    supersteps: usize,
    termination: agentgraph::Termination,
}

fn print_solution(format: Format, id: Option<&serde_json::Value>, sol: &Solution) -> Result<()> {
    match format {
        Format::Text => match id {
            Some(id) => emit!("{id}: {}", sol.answer.narrative),
            None => emit!("{}", sol.answer.narrative),
        },
        Format::Json => {
            let out = AnswerOut {
                id,
                task: sol.task,
                kind: sol.answer.kind,
                value: &sol.answer.value,
                narrative: &sol.answer.narrative,
                supersteps: sol.supersteps,
                termination: sol.termination,
            };
            emit!("{}", serde_json::to_string(&out)?);
        }
    }
    Ok(())
}

fn solve_batch(g: &GlobalOpts, backend: &dyn AgentBackend, input: &str, o: &Overrides) -> Result<()> {
    let mut failed = 0usize;
    for (lineno, line) in input.as_bytes().lines().enumerate() {
        let line = line.context("reading batch")?;
        if line.trim().is_empty() {
            continue;
        }
        let item: BatchItem =
            serde_json::from_str(&line).with_context(|| format!("line {}: not a batch object", lineno + 1))?;
        let hint = match item.task_hint.as_deref().map(str::parse::<TaskKind>).transpose() {
            Ok(h) => h,
            Err(e) => {
                failed += 1;
                report_batch_error(g.format, &item.id, &e)?;
                continue;
            }
        };
        let result = make_spec(&item.text, o, hint)
            .and_then(|spec| Ok(solve_spec(&spec, Some(&item.text), backend, &engine_config(g))?));
        match result {
            Ok(sol) => print_solution(g.format, Some(&item.id), &sol)?,
            Err(e) => {
                failed += 1;
                report_batch_error(g.format, &item.id, &format!("{e:#}"))?;
            }
        }
    }
    if failed > 0 {
        bail!("{failed} problem(s) failed");
    }
    Ok(())
}

fn report_batch_error(format: Format, id: &serde_json::Value, msg: &str) -> Result<()> {
    match format {
        Format::Text => eprintln!("{id}: error: {msg}"),
        Format::Json => emit!("{}", serde_json::json!({ "id": id, "error": msg })),
    }
    Ok(())
}

fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none() && io::stdout().is_terminal()
}

fn print_report(format: Format, r: &SuiteReport) -> Result<()> {
    let mut out = io::stdout().lock();
    if format == Format::Json {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
        return Ok(());
    }
    let (on, off) = match (color_enabled(), r.correct == r.total && r.total > 0) {
        (false, _) => ("", ""),
        (true, true) => ("\x1b[32m", "\x1b[0m"),
        (true, false) => ("\x1b[31m", "\x1b[0m"),
    };
    writeln!(out, "{}: {on}accuracy {:.4}{off} ({}/{})", r.task, r.accuracy, r.correct, r.total)?;
    for b in &r.per_size {
        writeln!(out, "  size {:>4}: {:.4} ({}/{})", b.size, b.accuracy, b.correct, b.total)?;
    }
    for f in r.failures.iter().take(5) {
        writeln!(out, "  failed size {} seed {}: expected {} got {}", f.size, f.seed, f.expected, f.got)?;
    }
    Ok(())
}

fn templates(name: Option<TaskKind>) -> Result<()> {
    match name {
        Some(t) => write!(io::stdout().lock(), "{}", t.library_program().template())?,
        None => {
            for t in TaskKind::ALL {
                emit!("{:<18} {}", t.as_str(), t.library_program().template().summary);
            }
        }
    }
    Ok(())
}
