use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diagsplit::analytics::{analytic_csv, analytic_row, bound_report, bound_report_csv};
use diagsplit::likelihood::{matrix_csv, occurrence_column, occurrence_count, OutcomePattern};
use diagsplit::sim::{parse_regime, render_chart, run_sweep, write_csv, Metric, Regime, SweepFile};
use diagsplit::sim::{csv_string, SweepAlgorithm};
use diagsplit::{
    drive, run, AlgorithmConfig, AlgorithmKind, CountKnowledge, Error, InfectionInstance, Model,
    Oracle, Pool, TestLedger,
};

const OUT_DIR_VAR: &str = "DIAGSPLIT_OUT_DIR";

#[derive(Parser)]
#[command(name = "diagsplit", version, about = "Adaptive group testing with diagonal splitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one generated instance and print its test ledger
    Run(RunArgs),
    /// Monte Carlo sweep over k or p, written as CSV (and optionally SVG charts)
    Sweep(SweepArgs),
    /// Closed-form expectations and bounds
    Analytic(AnalyticArgs),
    /// Occurrence counts of first-stage outcome patterns (n <= 16)
    Matrix(MatrixArgs),
    /// Drive an algorithm interactively, reading test outcomes from stdin
    Session(SessionArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    n: usize,
    /// comb:K or prob:P
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "dsa")]
    algo: AlgorithmKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Count handed to HGBSA; defaults to k, or round(p n) for prob models
    #[arg(long)]
    k_input: Option<usize>,
    #[arg(long)]
    initial_screen: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// key = value file; flags given on the command line take precedence
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// e.g. comb:1..16, comb:all, prob:0..0.5:0.05
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated list, default all four
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    initial_screen: bool,
    /// CSV destination; defaults to $DIAGSPLIT_OUT_DIR/sweep_n<N>_<regime>.csv, else stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG destination for the tests chart; the stages chart goes next to it
    #[arg(long)]
    chart: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Comma-separated population sizes
    #[arg(long, value_delimiter = ',', default_values_t = [16usize, 32, 64, 128, 256, 512, 1024])]
    n: Vec<usize>,
    #[arg(long)]
    model: Option<String>,
    /// Compare the asymptotic upper bound with the exact expectation instead
    #[arg(long)]
    bound_report: bool,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: Option<usize>,
    /// Bitstring, largest pool first, e.g. 1100
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SessionArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "dsa")]
    algo: AlgorithmKind,
    /// Believed number of positives for HGBSA
    #[arg(long)]
    k_input: Option<usize>,
    /// Trust --k-input as exact instead of verifying what is left over
    #[arg(long)]
    exact_count: bool,
    #[arg(long)]
    initial_screen: bool,
}

enum Failure {
    Usage { flag: &'static str, message: String },
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(flag: &'static str) -> impl Fn(Error) -> Failure {
    move |e| Failure::Usage {
        flag,
        message: e.to_string(),
    }
}

fn single_model(text: &str, n: usize) -> Result<Model, Failure> {
    let regime = parse_regime(text, n).map_err(usage("--model"))?;
    if regime.len() != 1 {
        return Err(Failure::Usage {
            flag: "--model",
            message: format!("expected a single value, got {}", regime.len()),
        });
    }
    let model = regime.model(0);
    model.validate(n).map_err(usage("--model"))?;
    Ok(model)
}

fn check_config(config: &AlgorithmConfig, n: usize) -> Result<(), Failure> {
    config.validate(n).map_err(|e| {
        let flag = match e {
            Error::NotPowerOfTwo(_) => "--n",
            _ => "--k-input",
        };
        usage(flag)(e)
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_ledger(ledger: &TestLedger) {
    for (i, stage) in ledger.stages().iter().enumerate() {
        let pools: Vec<String> = stage
            .tests
            .iter()
            .map(|t| format!("{{{}}}{}", t.pool, if t.outcome { '+' } else { '-' }))
            .collect();
        println!("stage {}: {}", i + 1, pools.join(" "));
    }
}

fn join(items: &[usize]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let model = single_model(&args.model, args.n)?;
    let mut config = SweepAlgorithm {
        kind: args.algo,
        initial_screen: args.initial_screen,
    }
    .config_for(args.n, model);
    if let Some(k_input) = args.k_input {
        config.algorithm = args.algo.with_count(k_input, CountKnowledge::Estimate);
    }
    check_config(&config, args.n)?;
    let instance = InfectionInstance::generate(model, args.n, args.seed)?;
    let result = run(&instance, &config)?;
    println!("algorithm={config} n={} model={model} seed={}", args.n, args.seed);
    print_ledger(&result.ledger);
    println!("infected={}", join(&result.diagnosis.infected()));
    println!(
        "tests={} stages={} correct={}",
        result.ledger.tests_total(),
        result.ledger.stages_total(),
        result.diagnosis.matches(&instance)
    );
    Ok(())
}

fn default_csv_path(n: usize, regime: &Regime) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_VAR)?;
    Some(PathBuf::from(dir).join(format!("sweep_n{n}_{}.csv", regime.tag())))
}

fn stages_chart_path(tests_chart: &Path) -> PathBuf {
    let stem = tests_chart.file_stem().and_then(|s| s.to_str()).unwrap_or("chart");
    tests_chart.with_file_name(format!("{stem}_stages.svg"))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut file = match &args.spec {
        Some(path) => SweepFile::load(path).map_err(usage("--spec"))?,
        None => SweepFile::default(),
    };
    file.n = args.n.or(file.n);
    file.model = args.model.or(file.model);
    file.algo = args.algo.or(file.algo);
    file.trials = args.trials.or(file.trials);
    file.seed = args.seed.or(file.seed);
    if args.initial_screen {
        file.initial_screen = Some(true);
    }
    file.out = args.out.or(file.out);
    file.chart = args.chart.or(file.chart);

    if file.n.is_none() {
        return Err(Failure::Usage { flag: "--n", message: "population size is required".into() });
    }
    let Some(model) = file.model.as_deref() else {
        return Err(Failure::Usage { flag: "--model", message: "model is required".into() });
    };
    let n = file.n.unwrap_or_default();
    parse_regime(model, n).map_err(usage("--model"))?;
    let spec = file.to_spec().map_err(usage("--algo"))?;
    spec.validate().map_err(|e| {
        let flag = match e {
            Error::NotPowerOfTwo(_) => "--n",
            Error::InvalidParameter(ref m) if m.contains("trials") => "--trials",
            _ => "--model",
        };
        usage(flag)(e)
    })?;

    let rows = run_sweep(&spec)?;
    match file.out.clone().or_else(|| default_csv_path(n, &spec.regime)) {
        Some(path) => {
            write_csv(&rows, &path)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{}", csv_string(&rows)?),
    }
    if let Some(chart) = &file.chart {
        render_chart(&rows, chart, Metric::Tests)?;
        let stages = stages_chart_path(chart);
        render_chart(&rows, &stages, Metric::Stages)?;
        eprintln!("wrote {} and {}", chart.display(), stages.display());
    }
    Ok(())
}

fn cmd_analytic(args: AnalyticArgs) -> Result<(), Failure> {
    if args.bound_report {
        let rows = bound_report(args.k, args.epsilon, &args.n).map_err(usage("--epsilon"))?;
        return emit(&bound_report_csv(&rows), args.out.as_deref());
    }
    let Some(model) = args.model.as_deref() else {
        return Err(Failure::Usage { flag: "--model", message: "model is required".into() });
    };
    let mut rows = Vec::new();
    for &n in &args.n {
        let regime = parse_regime(model, n).map_err(usage("--model"))?;
        for j in 0..regime.len() {
            rows.push(analytic_row(n, regime.model(j)).map_err(usage("--n"))?);
        }
    }
    emit(&analytic_csv(&rows), args.out.as_deref())
}

fn cmd_matrix(args: MatrixArgs) -> Result<(), Failure> {
    if args.n > 16 {
        return Err(Failure::Usage { flag: "--n", message: format!("matrix dumps need n <= 16, got {}", args.n) });
    }
    match (args.k, args.pattern.as_deref()) {
        (Some(k), Some(pattern)) => {
            let pattern = OutcomePattern::parse(args.n, pattern).map_err(usage("--pattern"))?;
            let count = occurrence_count(args.n, k, &pattern).map_err(usage("--k"))?;
            emit(&format!("{count}\n"), args.out.as_deref())
        }
        (None, Some(pattern)) => {
            let pattern = OutcomePattern::parse(args.n, pattern).map_err(usage("--pattern"))?;
            let column = occurrence_column(args.n, &pattern)?;
            let mut text = String::from("k,count\n");
            for (k, c) in column.iter().enumerate() {
                text.push_str(&format!("{k},{c}\n"));
            }
            emit(&text, args.out.as_deref())
        }
        (Some(_), None) => Err(Failure::Usage { flag: "--pattern", message: "--k needs a pattern".into() }),
        (None, None) => emit(&matrix_csv(args.n).map_err(usage("--n"))?, args.out.as_deref()),
    }
}

/// Oracle answered by a person: prints each stage and reads one outcome per
/// pool.
struct PromptOracle<R, W> {
    input: R,
    output: W,
    ledger: TestLedger,
}

fn parse_outcome(token: &str) -> Option<bool> {
    match token.to_ascii_lowercase().as_str() {
        "+" | "1" | "true" | "t" | "pos" | "positive" | "y" | "yes" => Some(true),
        "-" | "0" | "false" | "f" | "neg" | "negative" | "n" | "no" => Some(false),
        _ => None,
    }
}

impl<R: BufRead, W: Write> PromptOracle<R, W> {
    fn read_outcomes(&mut self, count: usize) -> io::Result<Vec<bool>> {
        let mut outcomes = Vec::with_capacity(count);
        let mut line = String::new();
        while outcomes.len() < count {
            write!(self.output, "outcomes {}/{count}> ", outcomes.len() + 1)?;
            self.output.flush()?;
            line.clear();
            if self.input.read_line(&mut line)? == 0 {
                return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "input ended mid-stage"));
            }
            let tokens: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
            let parsed: Option<Vec<bool>> = tokens.iter().map(|t| parse_outcome(t)).collect();
            match parsed {
                Some(values) if outcomes.len() + values.len() <= count => outcomes.extend(values),
                Some(_) => writeln!(self.output, "too many outcomes, {} still expected; line ignored", count - outcomes.len())?,
                None => writeln!(self.output, "could not read {:?}; use +/-, 1/0 or true/false; line ignored", line.trim())?,
            }
        }
        Ok(outcomes)
    }
}

impl<R: BufRead, W: Write> Oracle for PromptOracle<R, W> {
    fn run_stage(&mut self, pools: Vec<Pool>) -> diagsplit::Result<Vec<bool>> {
        let stage = self.ledger.stages_total() + 1;
        let io_err = |e: io::Error| Error::Protocol(format!("session input: {e}"));
        writeln!(self.output, "stage {stage}: {} pools", pools.len()).map_err(io_err)?;
        for (j, pool) in pools.iter().enumerate() {
            writeln!(self.output, "  [{}] {{{pool}}}", j + 1).map_err(io_err)?;
        }
        let outcomes = self.read_outcomes(pools.len()).map_err(io_err)?;
        self.ledger.record(pools, &outcomes)?;
        Ok(outcomes)
    }
}

fn cmd_session(args: SessionArgs) -> Result<(), Failure> {
    if args.algo == AlgorithmKind::Hgbsa && args.k_input.is_none() {
        return Err(Failure::Usage { flag: "--k-input", message: "hgbsa needs a believed count".into() });
    }
    let knowledge = if args.exact_count { CountKnowledge::Exact } else { CountKnowledge::Estimate };
    let config = AlgorithmConfig::new(args.algo.with_count(args.k_input.unwrap_or(0), knowledge))
        .with_screen(args.initial_screen);
    check_config(&config, args.n)?;
    let mut strategy = config.build(args.n)?;
    let stdin = io::stdin();
    let mut oracle = PromptOracle {
        input: stdin.lock(),
        output: io::stdout(),
        ledger: TestLedger::new(),
    };
    let diagnosis = drive(strategy.as_mut(), &mut oracle)?;
    println!("infected={}", join(&diagnosis.infected()));
    println!("tests={} stages={}", oracle.ledger.tests_total(), oracle.ledger.stages_total());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Matrix(args) => cmd_matrix(args),
        Command::Session(args) => cmd_session(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage { flag, message }) => {
            eprintln!("error: invalid value for {flag}: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
