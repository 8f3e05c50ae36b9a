use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use unimap::experiment::{
    fit_log_scaling, gnuplot_script, plan_grid, run_scaling_experiment, write_csv, ExperimentConfig, Metric,
};
use unimap::explore::{coupling_tree_levels, explore_one, explore_two, ProcessTwoConfig, Thresholds};
use unimap::graph::parse_graphs;
use unimap::gw::{
    critical_geometric_tail_bound, lower_deviation_curve, normalized_means, tail_probabilities, OffspringSpec,
};
use unimap::quotient::{glue, metric_report, MetricReport};
use unimap::sample::{parts_for_genus, sample_marked_tree};
use unimap::stats::stream_rng;
use unimap::verify::{run_checks, Scale, CHECK_COUNT, DEFAULT_SEED};
use unimap::{Error, MarkedTree};

#[derive(Parser)]
#[command(name = "unimap", version, about = "Sample and measure random unicellular maps")]
struct Cli {
    /// Master seed; every random stream is derived from it [default: 12648430].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON experiment config (scaling); flags given explicitly override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Main output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample marked trees, compositions or glued graphs.
    Sample(SampleArgs),
    /// Distance statistics of sampled or given graphs.
    Metrics(MetricsArgs),
    /// Run the exploration processes.
    Explore(ExploreArgs),
    /// Galton-Watson simulations and bounds.
    Gw(GwArgs),
    /// Run the built-in end-to-end checks.
    Verify(VerifyArgs),
    /// Distance scaling experiment over a grid of sizes.
    Scaling(ScalingArgs),
}

#[derive(Args)]
struct Size {
    /// Number of edges.
    #[arg(long)]
    n: usize,
    /// Genus (exclusive with --theta).
    #[arg(long, conflicts_with = "theta")]
    g: Option<usize>,
    /// Genus ratio; g = round(theta n).
    #[arg(long)]
    theta: Option<f64>,
}

impl Size {
    fn genus(&self) -> Result<usize, Error> {
        let g = match (self.g, self.theta) {
            (Some(g), _) => g,
            (None, Some(t)) if (0.0..0.5).contains(&t) => (t * self.n as f64).round() as usize,
            (None, Some(t)) => return Err(Error::InvalidParameter(format!("theta = {t} outside [0, 1/2)"))),
            (None, None) => 0,
        };
        parts_for_genus(self.n, g)?;
        Ok(g)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleFormat {
    /// Contour word and marks.
    Tree,
    /// Glued graph: header `v n g root`, then 1-based edges.
    Graph,
    /// Composition parts on one line.
    Composition,
    Json,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    size: Size,
    #[arg(long, value_enum, default_value_t = SampleFormat::Tree)]
    format: SampleFormat,
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Json,
    Csv,
}

#[derive(Args)]
struct MetricsArgs {
    /// Graph file (blank-line separated, as written by `sample --format graph`).
    #[arg(long = "in", conflicts_with_all = ["n", "g", "theta"])]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input")]
    n: Option<usize>,
    #[arg(long, conflicts_with = "theta")]
    g: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Report::Csv)]
    report: Report,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Process {
    One,
    Two,
}

#[derive(Args)]
struct ExploreArgs {
    /// Marked tree file (contour line, marks line); otherwise sample one per trial.
    #[arg(long = "in", conflicts_with_all = ["n", "g", "theta"])]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input")]
    n: Option<usize>,
    #[arg(long, conflicts_with = "theta")]
    g: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum, default_value_t = Process::One)]
    process: Process,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Death radius for the second process (default ln^3 n).
    #[arg(long)]
    death_radius: Option<f64>,
    /// Run until the process stops by itself.
    #[arg(long)]
    untruncated: bool,
    /// Newline-delimited JSON, one trace per trial.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// CSV of event counts and frequencies.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct GwArgs {
    /// Offspring law, e.g. "1:0.95,2:0.05" or "geometric".
    #[arg(long, default_value = "1:0.95,2:0.05")]
    spec: String,
    #[arg(long, default_value_t = 20)]
    generations: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Lower-deviation level (default (1 + mean) / 2); supercritical laws only.
    #[arg(long)]
    gamma: Option<f64>,
    /// Tail threshold k for P(Z_r >= k).
    #[arg(long, default_value_t = 10)]
    k: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Full-size checks (several minutes) instead of the quick variants.
    #[arg(long)]
    full: bool,
    /// Only these check ids (1-13).
    #[arg(long = "check", value_delimiter = ',')]
    checks: Vec<u8>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long)]
    theta: Option<f64>,
    /// Comma-separated edge counts.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<MetricArg>>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[arg(long)]
    gnuplot_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Typical,
    Diameter,
    Injectivity,
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EulerViolation { .. } => Failure::Verification(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sample(cli: &Cli, args: &SampleArgs) -> Result<(), Failure> {
    let n = args.size.n;
    let g = args.size.genus()?;
    let mut out = output(cli.out.as_deref())?;
    let mut items = Vec::new();
    for i in 0..args.count {
        let mut rng = stream_rng(cli.seed(), n as u64, i as u64);
        let (mt, attempts) = sample_marked_tree(n, g, &mut rng)?;
        match args.format {
            SampleFormat::Tree => write!(out, "{}", mt.to_text())?,
            SampleFormat::Graph => write!(out, "{}", glue(&mt).to_text())?,
            SampleFormat::Composition => {
                let parts: Vec<String> = mt.lambda().parts().iter().map(u32::to_string).collect();
                writeln!(out, "{}", parts.join(" "))?;
            }
            SampleFormat::Json => {
                let gq = glue(&mt);
                items.push(json!({
                    "n": n,
                    "g": g,
                    "attempts": attempts,
                    "composition": mt.lambda().parts(),
                    "contour": mt.tree().to_contour(),
                    "marks": mt.marks(),
                    "root": gq.root(),
                    "edges": gq.edges(),
                }));
            }
        }
        if i + 1 < args.count && matches!(args.format, SampleFormat::Tree | SampleFormat::Graph) {
            writeln!(out)?;
        }
    }
    if matches!(args.format, SampleFormat::Json) {
        serde_json::to_writer_pretty(&mut out, &items).map_err(|e| Failure::Usage(e.to_string()))?;
        writeln!(out)?;
    }
    Ok(out.flush()?)
}

fn metrics(cli: &Cli, args: &MetricsArgs) -> Result<(), Failure> {
    let mut reports: Vec<MetricReport> = Vec::new();
    if let Some(path) = &args.input {
        for (i, gq) in parse_graphs(&read(path)?)?.iter().enumerate() {
            reports.push(metric_report(gq, &mut stream_rng(cli.seed(), u64::MAX, i as u64)));
        }
    } else {
        let size = Size { n: args.n.expect("clap requires n"), g: args.g, theta: args.theta };
        let g = size.genus()?;
        for i in 0..args.trials {
            let mut rng = stream_rng(cli.seed(), size.n as u64, i as u64);
            let (mt, _) = sample_marked_tree(size.n, g, &mut rng)?;
            reports.push(metric_report(&glue(&mt), &mut rng));
        }
    }
    let mut out = output(cli.out.as_deref())?;
    match args.report {
        Report::Csv => write_csv(&reports, &mut out)?,
        Report::Json => {
            serde_json::to_writer_pretty(&mut out, &reports).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(out.flush()?)
}

#[derive(Serialize)]
struct EventRow {
    event: String,
    count: usize,
    frequency: f64,
}

fn explore(cli: &Cli, args: &ExploreArgs) -> Result<(), Failure> {
    let given = match &args.input {
        Some(p) => Some(MarkedTree::from_text(&read(p)?)?),
        None => None,
    };
    let (n, g) = match &given {
        Some(mt) => (mt.n(), mt.lambda().genus()),
        None => {
            let size = Size { n: args.n.expect("clap requires n"), g: args.g, theta: args.theta };
            (size.n, size.genus()?)
        }
    };
    let mut traces = match &args.trace_out {
        Some(p) => Some(io::BufWriter::new(fs::File::create(p)?)),
        None => None,
    };
    let mut events: BTreeMap<String, usize> = BTreeMap::new();
    let mut bump = |k: String| *events.entry(k).or_insert(0) += 1;
    for trial in 0..args.trials {
        let mut rng = stream_rng(cli.seed(), n as u64, trial as u64);
        let mt = match &given {
            Some(mt) => mt.clone(),
            None => sample_marked_tree(n, g, &mut rng)?.0,
        };
        let line = match args.process {
            Process::One => {
                let limits = (!args.untruncated).then(|| Thresholds::process_one(n));
                let trace = explore_one(&mt, limits, &mut rng);
                bump(format!("termination:{:?}", trace.termination));
                json!({ "trial": trial, "process": "one", "trace": trace })
            }
            Process::Two => {
                let mut cfg = ProcessTwoConfig::for_n(n);
                if args.untruncated {
                    cfg.thresholds = None;
                }
                if let Some(r) = args.death_radius {
                    cfg = cfg.with_death_radius(r);
                }
                let run = explore_two(&mt, cfg, &mut rng)?;
                if run.collided() {
                    bump("collision".into());
                }
                if run.disaster() {
                    bump("disaster".into());
                }
                bump(format!("termination1:{:?}", run.events.termination[0]));
                bump(format!("termination2:{:?}", run.events.termination[1]));
                let levels = coupling_tree_levels(&run.stage1);
                json!({ "trial": trial, "process": "two", "levels": levels, "run": run })
            }
        };
        if let Some(w) = traces.as_mut() {
            serde_json::to_writer(&mut *w, &line).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(w)?;
        }
    }
    if let Some(w) = traces.as_mut() {
        w.flush()?;
    }
    let rows: Vec<EventRow> = events
        .into_iter()
        .map(|(event, count)| EventRow { event, count, frequency: count as f64 / args.trials as f64 })
        .collect();
    let mut out = output(args.summary_out.as_deref().or(cli.out.as_deref()))?;
    write_csv(&rows, &mut out)?;
    Ok(out.flush()?)
}

#[derive(Serialize)]
struct GwRow {
    r: usize,
    mean: f64,
    lower_deviation: Option<f64>,
    tail: f64,
    bound: Option<f64>,
}

fn gw(cli: &Cli, args: &GwArgs) -> Result<(), Failure> {
    let spec = OffspringSpec::parse(&args.spec)?;
    let means = normalized_means(&spec, args.generations, args.trials, cli.seed())?;
    let tails = tail_probabilities(&spec, args.generations, args.k, args.trials, cli.seed())?;
    let lower = if spec.is_supercritical() {
        let gamma = args.gamma.unwrap_or((1.0 + spec.mean()) / 2.0);
        Some(lower_deviation_curve(&spec, gamma, args.generations, args.trials, cli.seed())?)
    } else if args.gamma.is_some() {
        return Err(Failure::Usage("--gamma needs a supercritical offspring law".into()));
    } else {
        None
    };
    let critical = args.spec.trim().eq_ignore_ascii_case("geometric");
    let rows: Vec<GwRow> = (0..=args.generations)
        .map(|r| GwRow {
            r,
            mean: means[r].0 * spec.mean().powi(r as i32),
            lower_deviation: lower.as_ref().map(|l| l[r]),
            tail: tails[r][args.k as usize],
            bound: (critical && r >= 1 && args.k >= 1).then(|| critical_geometric_tail_bound(r, args.k)),
        })
        .collect();
    let mut out = output(cli.out.as_deref())?;
    write_csv(&rows, &mut out)?;
    Ok(out.flush()?)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<(), Failure> {
    let ids: Vec<u8> = if args.checks.is_empty() { (1..=CHECK_COUNT).collect() } else { args.checks.clone() };
    if let Some(bad) = ids.iter().find(|id| !(1..=CHECK_COUNT).contains(id)) {
        return Err(Failure::Usage(format!("no check {bad}; ids are 1-{CHECK_COUNT}")));
    }
    let scale = if args.full { Scale::Full } else { Scale::Quick };
    let outcomes = run_checks(&ids, scale, cli.seed());
    let mut out = output(cli.out.as_deref())?;
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    out.flush()?;
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("failed checks: {failed:?}")))
    }
}

fn scaling(cli: &Cli, args: &ScalingArgs) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_json(&read(p)?)?,
        None => ExperimentConfig::default(),
    };
    if cli.seed.is_some() || cli.config.is_none() {
        cfg.master_seed = cli.seed();
    }
    if let Some(t) = args.theta {
        cfg.theta = t;
    }
    if let Some(grid) = &args.n_grid {
        cfg.n_grid = grid.clone();
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(m) = &args.metrics {
        cfg.metrics = m
            .iter()
            .map(|m| match m {
                MetricArg::Typical => Metric::Typical,
                MetricArg::Diameter => Metric::Diameter,
                MetricArg::Injectivity => Metric::Injectivity,
            })
            .collect();
    }
    if let Some(p) = &cli.out {
        cfg.trials_csv = Some(p.clone());
    }
    if let Some(p) = &args.summary_out {
        cfg.summary_csv = Some(p.clone());
    }
    if let Some(p) = &args.gnuplot_out {
        cfg.gnuplot = Some(p.clone());
    }
    cfg.validate()?;
    for p in plan_grid(cfg.theta, &cfg.n_grid) {
        match p.g {
            Some(g) => eprintln!("n = {}: g = {g} ({})", p.n, p.note),
            None => eprintln!("n = {}: skipped ({})", p.n, p.note),
        }
    }
    let result = run_scaling_experiment(&cfg)?;
    let mut out = output(cfg.trials_csv.as_deref())?;
    write_csv(&result.records, &mut out)?;
    out.flush()?;
    if let Some(p) = &cfg.summary_csv {
        write_csv(&result.summary, fs::File::create(p)?)?;
        if let Some(script) = &cfg.gnuplot {
            fs::write(script, gnuplot_script(&p.display().to_string()))?;
        }
    } else if cfg.gnuplot.is_some() {
        return Err(Failure::Usage("a gnuplot script needs --summary-out".into()));
    }
    let ns: Vec<usize> = result.summary.iter().map(|s| s.n).collect();
    for (name, values) in [
        ("typical", result.summary.iter().map(|s| s.typical_mean).collect::<Vec<_>>()),
        ("diameter", result.summary.iter().map(|s| s.diameter_mean).collect()),
    ] {
        if values.iter().any(|v| v.is_nan()) {
            continue;
        }
        match fit_log_scaling(&ns, &values) {
            Ok(f) => eprintln!(
                "{name}: slope {:.4} per ln n, intercept {:.3}, top-3 ratio spread {:.1}%, max residual {:.1}%",
                f.slope,
                f.intercept,
                100.0 * f.ratio_spread,
                100.0 * f.relative_residual
            ),
            Err(e) => eprintln!("{name}: no fit ({e})"),
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Sample(a) => sample(cli, a),
        Command::Metrics(a) => metrics(cli, a),
        Command::Explore(a) => explore(cli, a),
        Command::Gw(a) => gw(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::Scaling(a) => scaling(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}
