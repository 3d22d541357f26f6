#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod render;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rectfrag_core::functionals::{kappa, kappa_map_csv, rate_i, rate_j, rate_k, rate_ktilde};
use rectfrag_core::optimizer::{optimize, BallMetric, OptConstraint, OptProblem};
use rectfrag_core::paths::path_from_csv;
use rectfrag_core::simulator::{Horizon, MarkedTree};
use rectfrag_core::verify::{run_suite, SUITES};
use rectfrag_core::{LogPoint, PLGrid};

use config::{set, FileConfig};
use error::{config, CliError};

#[derive(Debug, Parser)]
#[command(name = "rectfrag", version, about = "Shape-dependent rectangle fragmentation toolkit")]
struct Cli {
    /// TOML file with one table per command; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for replica-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expand one marked tree and write its vertices, optionally with frames.
    Simulate(SimulateArgs),
    /// Draw frame CSVs as SVG.
    Render(RenderArgs),
    /// Evaluate I, J, K-tilde and K along a path.
    Rates(RatesArgs),
    /// Tabulate kappa over a grid of slopes.
    KappaMap(KappaMapArgs),
    /// Run a Monte Carlo or numerical verification suite.
    Verify(VerifyArgs),
    /// Maximize K over piecewise-linear paths.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Time horizon.
    #[arg(long, short)]
    time: Option<f64>,
    /// Generation horizon instead of a time horizon.
    #[arg(long, short)]
    generation: Option<u32>,
    /// Maximum number of materialized vertices.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Number of evenly spaced frames over [0, time].
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    frames_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Frame CSVs to draw.
    frames: Vec<PathBuf>,
    /// Draw every `*.csv` in this directory, in name order.
    #[arg(long)]
    frames_dir: Option<PathBuf>,
    #[arg(long, short)]
    out_dir: Option<PathBuf>,
    /// Largest |ln(B/H)| drawn as near-square.
    #[arg(long)]
    threshold: Option<f64>,
    /// Side of the SVG canvas in pixels.
    #[arg(long)]
    size: Option<f64>,
}

#[derive(Debug, Args)]
struct RatesArgs {
    /// Path CSV.
    path: Option<PathBuf>,
    #[arg(long, short, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, short)]
    b: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KappaMapArgs {
    /// Lambda range as `lo,hi`.
    #[arg(long, value_parser = parse_pair)]
    lambda: Option<[f64; 2]>,
    /// Mu range as `lo,hi`.
    #[arg(long, value_parser = parse_pair)]
    mu: Option<[f64; 2]>,
    /// Points per axis.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite to run; all suites when omitted.
    suite: Option<String>,
    /// Print the suite names and exit.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of the full sample sizes, in (0, 1].
    #[arg(long)]
    scale: Option<f64>,
    /// Write the reports as JSON.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Number of grid intervals.
    #[arg(long, short)]
    n: Option<usize>,
    /// Good-set constant M.
    #[arg(long, short)]
    m: Option<f64>,
    /// Fixed endpoint `x,y`.
    #[arg(long, value_parser = parse_pair)]
    endpoint: Option<[f64; 2]>,
    /// Slopes `lambda,mu` of a linear ball center.
    #[arg(long, value_parser = parse_pair)]
    ball_center: Option<[f64; 2]>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    random_starts: Option<usize>,
    #[arg(long, short)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum MetricArg {
    Grid,
    Sup,
    Levy,
}

impl From<MetricArg> for BallMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Grid => BallMetric::Grid,
            MetricArg::Sup => BallMetric::Sup,
            MetricArg::Levy => BallMetric::Levy,
        }
    }
}

/// Two comma-separated numbers.
fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> =
        s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"))).collect::<Result<_, _>>()?;
    <[f64; 2]>::try_from(v).map_err(|v| format!("expected two values, got {}", v.len()))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return config("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(a) => simulate(file, a),
        Command::Render(a) => render_frames(file, a),
        Command::Rates(a) => rates(file, a),
        Command::KappaMap(a) => kappa_map(file, a),
        Command::Verify(a) => verify(file, a),
        Command::Optimize(a) => optimize_cmd(file, a),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn simulate(file: FileConfig, a: SimulateArgs) -> Result<(), CliError> {
    let mut c = file.simulate;
    set(&mut c.seed, a.seed);
    set(&mut c.cap, a.cap);
    set(&mut c.snapshot, a.out);
    set(&mut c.frames, a.frames);
    set(&mut c.frames_dir, a.frames_dir);
    // A flag horizon replaces whichever horizon the file gave.
    if a.time.is_some() || a.generation.is_some() {
        c.time = a.time;
        c.generation = a.generation;
    }
    let horizon = match (c.time, c.generation) {
        (Some(_), Some(_)) => return config("give either a time or a generation horizon, not both"),
        (Some(t), None) => Horizon::Time(t),
        (None, Some(g)) => Horizon::Generation(g),
        (None, None) => Horizon::Time(2.0),
    };
    if c.cap == 0 {
        return config("cap must be positive");
    }
    let frame_end = match horizon {
        Horizon::Time(t) => t,
        Horizon::Generation(_) if c.frames > 0 => return config("frames need a time horizon"),
        Horizon::Generation(_) => 0.0,
    };
    let tree = MarkedTree::expand(c.seed, horizon, c.cap)?;
    write(&c.snapshot, &tree.snapshot_csv())?;
    for k in 0..c.frames {
        let t = if c.frames == 1 { frame_end } else { frame_end * k as f64 / (c.frames - 1) as f64 };
        write(&c.frames_dir.join(format!("frame_{k:03}.csv")), &tree.frame_csv(t)?)?;
    }
    println!("{} vertices written to {}", tree.len(), c.snapshot.display());
    if c.frames > 0 {
        println!("{} frames written to {}", c.frames, c.frames_dir.display());
    }
    Ok(())
}

fn render_frames(file: FileConfig, a: RenderArgs) -> Result<(), CliError> {
    let mut c = file.render;
    if !a.frames.is_empty() {
        c.frames = a.frames;
    }
    if a.frames_dir.is_some() {
        c.frames_dir = a.frames_dir;
    }
    set(&mut c.out_dir, a.out_dir);
    set(&mut c.threshold, a.threshold);
    set(&mut c.size, a.size);
    if !(c.threshold >= 0.0) || !(c.size > 0.0) {
        return config("threshold must be non-negative and size positive");
    }
    let mut inputs = c.frames;
    if let Some(dir) = &c.frames_dir {
        let mut found: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| CliError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        found.sort();
        inputs.extend(found);
    }
    if inputs.is_empty() {
        return config("no frames to render");
    }
    for input in &inputs {
        let text = fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
        let rects = render::parse_frame(&text).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
        let stem = input.file_stem().map_or("frame".into(), |s| s.to_string_lossy().into_owned());
        let out = c.out_dir.join(format!("{stem}.svg"));
        write(&out, &render::to_svg(&rects, c.size, c.threshold))?;
        println!("{} rectangles -> {}", rects.len(), out.display());
    }
    Ok(())
}

fn rates(file: FileConfig, a: RatesArgs) -> Result<(), CliError> {
    let mut c = file.rates;
    if a.path.is_some() {
        c.path = a.path;
    }
    set(&mut c.a, a.a);
    set(&mut c.b, a.b);
    if a.out.is_some() {
        c.out = a.out;
    }
    let Some(path) = c.path else { return config("no path CSV given") };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let f = path_from_csv(&text)?;
    let i = rate_i(&f, c.a, c.b)?;
    let j = rate_j(&f, c.a, c.b)?;
    let kt = rate_ktilde(&f, c.a, c.b)?;
    let report = rate_k(&f)?;
    let bottleneck = report.bottleneck.map_or(String::new(), |s| format!("{s:?}"));
    let csv = format!(
        "a,b,I,J,Ktilde,K,bottleneck\n{:?},{:?},{:?},{:?},{:?},{:?},{bottleneck}\n",
        c.a,
        c.b,
        i.to_f64(),
        j.to_f64(),
        kt.to_f64(),
        report.k_value
    );
    match c.out {
        Some(out) => write(&out, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn axis([lo, hi]: [f64; 2], steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

fn kappa_map(file: FileConfig, a: KappaMapArgs) -> Result<(), CliError> {
    let mut c = file.kappa_map;
    set(&mut c.lambda, a.lambda);
    set(&mut c.mu, a.mu);
    set(&mut c.steps, a.steps);
    set(&mut c.out, a.out);
    if c.steps == 0 {
        return config("steps must be positive");
    }
    let (ls, ms) = (axis(c.lambda, c.steps), axis(c.mu, c.steps));
    write(&c.out, &kappa_map_csv(&ls, &ms)?)?;

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &l in &ls {
        for &m in &ms {
            let k = kappa(l, m)?;
            if k > best.0 {
                best = (k, l, m);
            }
        }
    }
    println!("{} rows written to {}", ls.len() * ms.len(), c.out.display());
    println!("max kappa on grid: {:.6} at lambda = {:.4}, mu = {:.4}", best.0, best.1, best.2);
    // Sign changes of kappa along the diagonal, over the lambda axis.
    let diag: Vec<(f64, f64)> = ls.iter().map(|&l| kappa(l, l).map(|k| (l, k))).collect::<Result<_, _>>()?;
    for w in diag.windows(2) {
        if (w[0].1 > 0.0) != (w[1].1 > 0.0) {
            println!("diagonal root in [{:.6}, {:.6}]", w[0].0, w[1].0);
        }
    }
    Ok(())
}

fn verify(file: FileConfig, a: VerifyArgs) -> Result<(), CliError> {
    if a.list {
        for s in SUITES {
            println!("{s}");
        }
        return Ok(());
    }
    let mut c = file.verify;
    set(&mut c.seed, a.seed);
    set(&mut c.scale, a.scale);
    if a.out.is_some() {
        c.out = a.out;
    }
    let names: Vec<&str> = match &a.suite {
        Some(s) if SUITES.contains(&s.as_str()) => vec![s.as_str()],
        Some(s) => return config(format!("unknown suite '{s}'; known suites: {}", SUITES.join(", "))),
        None => SUITES.to_vec(),
    };
    let mut reports = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for name in names {
        let r = run_suite(name, c.seed, c.scale)?;
        for ch in &r.checks {
            let _ =
                writeln!(stdout, "{} {}/{}: {}", if ch.pass { "PASS" } else { "FAIL" }, r.suite, ch.name, ch.detail);
        }
        reports.push(r);
    }
    if let Some(out) = &c.out {
        let json = serde_json::to_string_pretty(&reports).map_err(|e| CliError::Config(e.to_string()))?;
        write(out, &(json + "\n"))?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.suite.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn optimize_cmd(file: FileConfig, a: OptimizeArgs) -> Result<(), CliError> {
    let mut c = file.optimize;
    set(&mut c.seed, a.seed);
    set(&mut c.n, a.n);
    set(&mut c.m, a.m);
    if a.endpoint.is_some() {
        c.endpoint = a.endpoint;
    }
    if a.ball_center.is_some() {
        c.ball_center = a.ball_center;
    }
    set(&mut c.radius, a.radius);
    set(&mut c.metric, a.metric.map(Into::into));
    if a.sweeps.is_some() {
        c.sweeps = a.sweeps;
    }
    if a.random_starts.is_some() {
        c.random_starts = a.random_starts;
    }
    set(&mut c.out_dir, a.out_dir);

    let constraint = match (c.endpoint, c.ball_center) {
        (Some(_), Some(_)) => return config("give either an endpoint or a ball center, not both"),
        (Some([x, y]), None) => OptConstraint::Endpoint(LogPoint::new(x, y)?),
        (None, Some([l, m])) => {
            OptConstraint::Ball { center: PLGrid::linear(c.n, l, m), radius: c.radius, metric: c.metric }
        }
        (None, None) => OptConstraint::None,
    };
    let mut problem = OptProblem::new(c.n, c.m, constraint)?;
    set(&mut problem.budget.sweeps, c.sweeps);
    set(&mut problem.budget.random_starts, c.random_starts);
    problem.validate()?;

    let result = optimize(&problem, c.seed)?;
    write(&c.out_dir.join("path.csv"), &result.path_csv())?;
    let mut log = String::new();
    for e in &result.log {
        log += &serde_json::to_string(e).map_err(|e| CliError::Config(e.to_string()))?;
        log.push('\n');
    }
    write(&c.out_dir.join("log.jsonl"), &log)?;
    let summary = serde_json::json!({
        "problem": problem,
        "seed": c.seed,
        "feasible": result.feasible(),
        "value": if result.feasible() { format!("{:?}", result.value) } else { "-inf".into() },
        "bottleneck": result.report.bottleneck,
        "starts": result.starts,
        "multistarts": result.multistarts,
    });
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    write(&c.out_dir.join("result.json"), &(json + "\n"))?;
    if !result.feasible() {
        return Err(CliError::Infeasible("no K-feasible path in the search space".into()));
    }
    println!("K = {:.6} ({} starts), written to {}", result.value, result.multistarts, c.out_dir.display());
    Ok(())
}
