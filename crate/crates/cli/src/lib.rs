//! Library half of the `canonica` command-line tool.
//!
//! Everything the binary does is reachable through [`main_with_args`], which
//! returns the process exit code: 0 on success, 1 when a numerical suite or
//! experiment misses its targets, 2 for malformed input and 3 for parameter or
//! admissibility violations.

pub mod output;
pub mod suites;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use canonica::lattices::{check_sqrt_admissible, counterexample_lines, SamplingSet, SamplingSpec};
use canonica::lct::{induced_grid, lct_b_zero, lct_direct, lct_fast, LctParams, NormalizationMode};
use canonica::phase_retrieval::{
    bandlimited_experiment, counterexample_pair, prop24_experiment, solve, sqrt_uniqueness_experiment, verify_ambiguity,
    BandlimitedConfig, MeasurementSet, Prop24Config, SolverConfig, SqrtExperimentConfig, PAIR_WINDOW,
};
use canonica::signal::{format_sig17, Grid, Signal};
use canonica::stlct::{stlct, TfPoint};
use canonica::windows::WindowSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use output::{Outputs, RunManifest};
use suites::{counterexample_mu_grid, run_suite, Suite, SuiteOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] canonica::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use canonica::Error as E;
        match self {
            CliError::Core(E::Parameter(_) | E::Admissibility(_) | E::Misaligned { .. } | E::GridMismatch(_)) => 3,
            CliError::Core(E::Solver { .. }) | CliError::Failed(_) => 1,
            CliError::Core(_) | CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } => 2,
        }
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "canonica", version, about = "Linear canonical transforms, STLCT sampling and phase retrieval")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Multiplies every residual tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Unitary,
    Paper,
}

impl From<ModeArg> for NormalizationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Unitary => NormalizationMode::Unitary,
            ModeArg::Paper => NormalizationMode::PaperKernel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ExperimentKind {
    SqrtUniqueness,
    Bandlimited,
    Prop24,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Apply an LCT to a signal file.
    Transform(TransformArgs),
    /// Evaluate the STLCT at a list of points and write CSV.
    Stlct(StlctArgs),
    /// Build a sampling set.
    Sample(SampleArgs),
    /// Write the ambiguous pair, its measurements on the line family and a gap report.
    Counterexample(CounterexampleArgs),
    /// Run a residual suite.
    Verify(VerifyArgs),
    /// Reconstruct a signal from magnitudes.
    Retrieve(RetrieveArgs),
    /// Run a seeded experiment.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    /// Inline JSON `{"a":..,"b":..,"c":..,"d":..}` or a path to one.
    #[arg(long)]
    pub params: String,
    #[arg(long, value_enum, default_value = "unitary")]
    pub mode: ModeArg,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Use direct quadrature instead of the fast path.
    #[arg(long)]
    pub direct: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct StlctArgs {
    #[arg(long)]
    pub params: String,
    #[arg(long, value_enum, default_value = "unitary")]
    pub mode: ModeArg,
    /// Inline window JSON such as `{"kind":"gaussian","gamma":0.5}` or a path.
    #[arg(long)]
    pub window: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Sampling-set JSON, or a plain list of `[x, mu]` pairs.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write magnitudes only.
    #[arg(long)]
    pub magnitudes: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Inline sampling-spec JSON or a path, e.g. `{"kind":"sqrt","tau":0.4,"v":0.4,"K":20}`.
    #[arg(long)]
    pub spec: String,
    /// Window whose envelope the square-root lattice must respect.
    #[arg(long)]
    pub window: Option<String>,
    /// Parameter `b` entering the frequency-step bound.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Use the smaller reading of the time-step bound.
    #[arg(long)]
    pub strict: bool,
    /// JSON output; a CSV with the same stem is written next to it.
    #[arg(long, default_value = "sampling.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub u: f64,
    #[arg(long)]
    pub params: String,
    #[arg(long, value_enum, default_value = "unitary")]
    pub mode: ModeArg,
    /// Lines `k·πb/u` for `|k| ≤ x_count`.
    #[arg(long, default_value_t = 4)]
    pub x_count: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, value_enum, default_value = "unitary")]
    pub mode: ModeArg,
    /// Modulation parameter of the counterexample suite (default: 1, 2 and 4).
    #[arg(long)]
    pub u: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RetrieveArgs {
    #[arg(long)]
    pub meas: PathBuf,
    /// Inline grid JSON `{"t0":..,"dt":..,"n":..}` or a path.
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value = "estimate.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: ExperimentKind,
    /// Overrides the experiment's default transform parameters.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, value_enum, default_value = "unitary")]
    pub mode: ModeArg,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.4)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.4)]
    pub v: f64,
    #[arg(long = "K", default_value_t = 20)]
    pub k: u32,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long)]
    pub strict: bool,
    #[arg(long = "B", default_value_t = 1.0)]
    pub bandwidth: f64,
    #[arg(long, default_value_t = 0.2)]
    pub m: f64,
    /// `b` of the default shear `(1, b, 0, 1)` used by the band-limited experiment.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
}

/// Parses arguments, runs the command and reports failures on stderr as `E<code>: message`.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("E2: {first}");
            return 2;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("E{}: {}", e.exit_code(), one_line(&e));
        return e.exit_code();
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("E{}: {}", e.exit_code(), one_line(&e));
            e.exit_code()
        }
    }
}

fn one_line(e: &CliError) -> String {
    e.to_string().replace('\n', " ")
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CANONICA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("CANONICA_THREADS must be a positive integer, got {raw:?}")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.display().to_string(), source })
}

/// Inline JSON when the argument looks like an object, otherwise a file path.
fn inline_or_file(arg: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') || arg.trim_start().starts_with('[') {
        Ok(arg.to_string())
    } else {
        read_text(Path::new(arg))
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Core(canonica::Error::Malformed(format!("{what}: {e}"))))
}

#[derive(Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

/// Reads LCT parameters; a determinant violation is a parameter error, not a parse error.
fn load_params(arg: &str) -> Result<LctParams, CliError> {
    let raw: RawParams = parse_json(&inline_or_file(arg)?, "params")?;
    Ok(LctParams::new(raw.a, raw.b, raw.c, raw.d)?)
}

fn load_window(arg: &str) -> Result<WindowSpec, CliError> {
    let w: WindowSpec = parse_json(&inline_or_file(arg)?, "window")?;
    w.validate()?;
    Ok(w)
}

fn load_signal(path: &Path) -> Result<Signal, CliError> {
    parse_json(&read_text(path)?, "signal")
}

fn load_points(path: &Path) -> Result<Vec<TfPoint>, CliError> {
    let text = read_text(path)?;
    if let Ok(set) = serde_json::from_str::<SamplingSet>(&text) {
        return Ok(set.points().to_vec());
    }
    let pairs: Vec<[f64; 2]> = parse_json(&text, "points")?;
    Ok(pairs.into_iter().map(|[x, mu]| TfPoint::new(x, mu)).collect())
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Transform(_) => "transform".into(),
        Command::Stlct(_) => "stlct".into(),
        Command::Sample(_) => "sample".into(),
        Command::Counterexample(_) => "counterexample".into(),
        Command::Verify(v) => format!("verify_{}", value_name(v.suite)),
        Command::Retrieve(_) => "retrieve".into(),
        Command::Experiment(e) => format!("experiment_{}", value_name(e.kind)),
    }
}

fn value_name<V: ValueEnum>(v: V) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut out = Outputs::new(&cli.out_dir)?;
    let result = dispatch(cli, &mut out);
    // the manifest is written for failed suites too, since their data files exist
    if matches!(result, Ok(()) | Err(CliError::Failed(_))) {
        let name = command_name(&cli.command);
        let manifest = RunManifest::new(name.clone(), cli, cli.seed, out.written().to_vec())?;
        out.write_json(Path::new(&format!("{name}.manifest.json")), &manifest)?;
    }
    result
}

fn dispatch(cli: &Cli, out: &mut Outputs) -> Result<(), CliError> {
    match &cli.command {
        Command::Transform(a) => transform(a, out),
        Command::Stlct(a) => stlct_cmd(a, out),
        Command::Sample(a) => sample(a, out),
        Command::Counterexample(a) => counterexample(a, out),
        Command::Verify(a) => verify(cli, a, out),
        Command::Retrieve(a) => retrieve(cli, a, out),
        Command::Experiment(a) => experiment(cli, a, out),
    }
}

fn transform(args: &TransformArgs, out: &mut Outputs) -> Result<(), CliError> {
    let params = load_params(&args.params)?;
    let f = load_signal(&args.input)?;
    let mode = args.mode.into();
    let result = if params.has_zero_b() {
        lct_b_zero(&params, &f)?
    } else if args.direct {
        lct_direct(&params, mode, &f, &induced_grid(&params, f.grid())?)?
    } else {
        lct_fast(&params, mode, &f)?
    };
    out.write_json(&args.out, &result)
}

fn stlct_cmd(args: &StlctArgs, out: &mut Outputs) -> Result<(), CliError> {
    let params = load_params(&args.params)?;
    let window = load_window(&args.window)?;
    let f = load_signal(&args.input)?;
    let points = load_points(&args.points)?;
    let mut samples = stlct(&params, args.mode.into(), &window, &f, &points)?;
    if args.magnitudes {
        samples = canonica::stlct::magnitudes(&samples);
    }
    out.write(&args.out, &samples.to_csv())
}

fn sample(args: &SampleArgs, out: &mut Outputs) -> Result<(), CliError> {
    let spec: SamplingSpec = parse_json(&inline_or_file(&args.spec)?, "sampling spec")?;
    if let (SamplingSpec::Sqrt(s), Some(w)) = (&spec, &args.window) {
        let env = load_window(w)?.envelope();
        check_sqrt_admissible(env.m, env.n, args.b, s.tau, s.v, args.strict)?;
    }
    let set = spec.build()?;
    out.write_json(&args.out, &set)?;
    out.write(&args.out.with_extension("csv"), &set.to_csv())
}

#[derive(Serialize)]
struct GapReport {
    u: f64,
    params: LctParams,
    line_gap: f64,
    off_line_abscissa: f64,
    off_line_gap: f64,
    phase_distance: f64,
}

fn counterexample(args: &CounterexampleArgs, out: &mut Outputs) -> Result<(), CliError> {
    let params = load_params(&args.params)?;
    let mode: NormalizationMode = args.mode.into();
    let pair = counterexample_pair(args.u, &params, suites::counterexample_grid())?;
    let mu_grid = counterexample_mu_grid(args.u, params.b)?;
    let lines = counterexample_lines(params.b, args.u, args.x_count, &mu_grid)?;
    let on = verify_ambiguity(&pair, mode, lines.points())?;
    let x_off = std::f64::consts::PI * params.b / (2.0 * args.u);
    let off_points: Vec<TfPoint> = mu_grid.points().map(|m| TfPoint::new(x_off, m)).collect();
    let off = verify_ambiguity(&pair, mode, &off_points)?;
    out.write_json(Path::new("f_plus.json"), &pair.f_plus)?;
    out.write_json(Path::new("f_minus.json"), &pair.f_minus)?;
    for (name, f) in [("meas_plus.csv", &pair.f_plus), ("meas_minus.csv", &pair.f_minus)] {
        let s = canonica::stlct::magnitudes(&stlct(&params, mode, &PAIR_WINDOW, f, lines.points())?);
        out.write(Path::new(name), &s.to_csv())?;
    }
    out.write_json(
        Path::new("gap_report.json"),
        &GapReport {
            u: args.u,
            params,
            line_gap: on.max_gap,
            off_line_abscissa: x_off,
            off_line_gap: off.max_gap,
            phase_distance: on.phase_distance,
        },
    )
}

fn verify(cli: &Cli, args: &VerifyArgs, out: &mut Outputs) -> Result<(), CliError> {
    let opts = SuiteOptions { seed: cli.seed, tol_scale: cli.tol_scale, mode: args.mode.into(), u: args.u };
    let rows = run_suite(args.suite, &opts)?;
    let mut csv = String::from("case,quantity,value,bound,kind,pass\n");
    for r in &rows {
        let kind = if r.kind == suites::Bound::Max { "max" } else { "min" };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.case,
            r.quantity,
            format_sig17(r.value),
            format_sig17(r.bound),
            kind,
            r.pass()
        ));
    }
    let name = value_name(args.suite);
    out.write(Path::new(&format!("verify_{name}.csv")), &csv)?;
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass()).map(|r| format!("{}/{}", r.case, r.quantity)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("verify {name}: {} of {} checks failed: {}", failed.len(), rows.len(), failed.join(" "))))
    }
}

fn retrieve(cli: &Cli, args: &RetrieveArgs, out: &mut Outputs) -> Result<(), CliError> {
    let meas: MeasurementSet = parse_json(&read_text(&args.meas)?, "measurement set")?;
    let grid: Grid = parse_json(&inline_or_file(&args.grid)?, "grid")?;
    let grid = Grid::new(grid.t0, grid.dt, grid.n)?;
    let cfg = SolverConfig { restarts: args.restarts, max_iters: args.max_iters, seed: cli.seed, ..SolverConfig::default() };
    let result = solve(&meas, grid, &cfg)?;
    out.write_json(&args.out, &result)
}

#[derive(Serialize)]
struct Timing {
    seconds: f64,
}

fn experiment(cli: &Cli, args: &ExperimentArgs, out: &mut Outputs) -> Result<(), CliError> {
    let params = args.params.as_deref().map(load_params).transpose()?;
    let mode: NormalizationMode = args.mode.into();
    let start = Instant::now();
    let (passed, summary) = match args.kind {
        ExperimentKind::SqrtUniqueness => {
            let base = SqrtExperimentConfig::default();
            let cfg = SqrtExperimentConfig {
                gamma: args.gamma,
                tau: args.tau,
                v: args.v,
                k: args.k,
                params: params.unwrap_or(base.params),
                mode,
                trials: args.trials.unwrap_or(base.trials),
                seed: cli.seed,
                solver: SolverConfig { restarts: args.restarts, max_iters: args.max_iters, ..base.solver.clone() },
                strict: args.strict,
                ..base
            };
            let report = sqrt_uniqueness_experiment(&cfg)?;
            let mut csv = String::from("trial,signal_seed,phase_distance,residual,restart_index,iterations,success\n");
            for t in &report.trials {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    t.trial,
                    t.signal_seed,
                    format_sig17(t.phase_distance),
                    format_sig17(t.residual),
                    t.restart_index,
                    t.iterations,
                    t.success
                ));
            }
            out.write(Path::new("sqrt_uniqueness_trials.csv"), &csv)?;
            let passed = report.success_rate >= 0.8;
            (
                passed,
                serde_json::json!({
                    "success_rate": report.success_rate,
                    "median_phase_distance": report.median_phase_distance,
                    "trials": report.trials.len(),
                    "passed": passed,
                }),
            )
        }
        ExperimentKind::Bandlimited => {
            let base = BandlimitedConfig::default();
            let cfg = BandlimitedConfig {
                bandwidth: args.bandwidth,
                m: args.m,
                params: params.unwrap_or(LctParams::new(1.0, args.b, 0.0, 1.0)?),
                mode,
                trials: args.trials.unwrap_or(base.trials),
                seed: cli.seed,
                ..base
            };
            // frequencies k·m·b up to |μ| ≤ 3.2
            let cfg = BandlimitedConfig { mu_count: (3.2 / (cfg.m * cfg.params.b).abs() + 1e-9).floor().max(1.0) as u32, ..cfg };
            let report = bandlimited_experiment(&cfg)?;
            let mut csv = String::from("trial,equivalent,gap,phase_distance\n");
            for p in &report.pairs {
                csv.push_str(&format!("{},{},{},{}\n", p.trial, p.equivalent, format_sig17(p.gap), format_sig17(p.phase_distance)));
            }
            out.write(Path::new("bandlimited_trials.csv"), &csv)?;
            (
                report.passed,
                serde_json::json!({
                    "equivalent_rate": report.equivalent_rate,
                    "distinguish_rate": report.distinguish_rate,
                    "trials": cfg.trials,
                    "passed": report.passed,
                }),
            )
        }
        ExperimentKind::Prop24 => {
            let base = Prop24Config::default();
            let cfg = Prop24Config {
                params: params.unwrap_or(base.params),
                mode,
                gamma: args.gamma,
                trials: args.trials.unwrap_or(base.trials),
                seed: cli.seed,
                ..base
            };
            let report = prop24_experiment(&cfg)?;
            let mut csv = String::from("trial,variant,phase_gap,pair_gap\n");
            for r in &report.records {
                let variant = serde_json::to_value(r.variant).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                csv.push_str(&format!("{},{},{},{}\n", r.trial, variant, format_sig17(r.phase_gap), format_sig17(r.pair_gap)));
            }
            out.write(Path::new("prop24_trials.csv"), &csv)?;
            (
                report.passed,
                serde_json::json!({
                    "max_phase_gap": report.max_phase_gap,
                    "triplet_rate": report.triplet_rate,
                    "sin_pair_rate": report.sin_pair_rate,
                    "dilation_rate": report.dilation_rate,
                    "passed": report.passed,
                }),
            )
        }
    };
    let name = value_name(args.kind);
    out.write_json(Path::new(&format!("{name}_summary.json")), &summary)?;
    // wall-clock time lives in its own file so the data files stay reproducible
    out.write_json(Path::new(&format!("{name}_timing.json")), &Timing { seconds: start.elapsed().as_secs_f64() })?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("experiment {name} missed its target; see {name}_summary.json")))
    }
}
