mod grid;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;
use smin_lab::alphaeta::{cube_example_structure, AlphaEtaStructure};
use smin_lab::combinatorics::{greedy_decomposition, rho_set, vertex_value, DecompositionMode, Graph};
use smin_lab::experiments::{
    counterexample_experiment, distance_profile_sweep, emit_results, estimate_tail, profile_slope,
    CounterexampleConfig, CounterexampleReport, ExperimentConfig, OutputFormat, Proportion, Statistic,
    SweepPoint, TailEstimate,
};
use smin_lab::samplers::{RowDistribution, ShiftSpec};
use smin_lab::verification::{run_suite, Suite};

/// Monte Carlo and exact checks for the smallest singular value of shifted
/// random matrices.
///
/// Worker threads are capped by the SMINLAB_THREADS environment variable.
#[derive(Parser)]
#[command(name = "smin-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a tail probability over a grid of thresholds
    Tail(TailArgs),
    /// Bernoulli matrix plus diag(τ,…,τ,0,0): rates of small s_min and large κ
    Counterexample(CounterexampleArgs),
    /// Rate of "at least k rows within distance a of the other rows' span", swept over k
    DistanceProfile(ProfileArgs),
    /// Run a randomized verification suite; exits 1 if any check fails
    LemmaCheck(LemmaArgs),
    /// Exact section-sum check on a finite product structure
    AlphaetaDemo(DemoArgs),
    /// Greedy edge-halving decomposition of a graph around an isolated vertex
    GraphDecompose(GraphArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Tail(_) => "tail",
            Command::Counterexample(_) => "counterexample",
            Command::DistanceProfile(_) => "distance-profile",
            Command::LemmaCheck(_) => "lemma-check",
            Command::AlphaetaDemo(_) => "alphaeta-demo",
            Command::GraphDecompose(_) => "graph-decompose",
        }
    }
}

#[derive(Args)]
struct Sampling {
    /// Row distribution: gaussian, bernoulli, uniform_entry, symmetric_exponential, ball_uniform
    #[arg(long, default_value_t = RowDistribution::Gaussian)]
    dist: RowDistribution,
    /// Matrix dimension
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Deterministic shift: zero, identity:τ, diag:v1,v2,…, counterexample:τ
    #[arg(long, default_value = "zero")]
    shift: ShiftSpec,
    /// Master seed; trial k uses the stream keyed by (seed, k)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Output {
    /// Write results to this file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format [default: from the --out extension, csv unless .json]
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl Output {
    fn format(&self, path: &Path) -> OutputFormat {
        match self.format {
            Some(FormatArg::Csv) => OutputFormat::Csv,
            Some(FormatArg::Json) => OutputFormat::Json,
            None => OutputFormat::from_path(path),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatisticArg {
    /// hit iff √n·s_min ≤ t
    SminScaled,
    /// hit iff ‖B⁻¹‖_HS ≥ t√n
    HsScaledSqrt,
    /// hit iff ‖B⁻¹‖_HS ≥ tn
    HsScaledN,
    /// hit iff at least k rows have dist(R_i, H^i) ≤ a·t
    DistanceProfile,
}

#[derive(Args)]
struct TailArgs {
    /// Experiment config in JSON, as echoed by a previous run; replaces the experiment flags
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with_all = ["dist", "n", "trials", "shift", "seed", "t_grid", "geom", "statistic", "k", "a"]
    )]
    config: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
    /// Threshold grid
    #[arg(long, value_name = "START:END:COUNT", default_value = "0.05:0.5:10")]
    t_grid: String,
    /// Space the grid geometrically instead of evenly
    #[arg(long)]
    geom: bool,
    #[arg(long, value_enum, default_value_t = StatisticArg::SminScaled)]
    statistic: StatisticArg,
    /// Row count for the distance-profile statistic
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Distance scale for the distance-profile statistic
    #[arg(long, default_value_t = 0.05)]
    a: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// Counterexample config in JSON, as echoed by a previous run; replaces the other flags
    #[arg(long, value_name = "FILE", conflicts_with_all = ["n", "tau", "trials", "seed"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Shift magnitude τ
    #[arg(long, default_value_t = 2500.0)]
    tau: f64,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    sampling: Sampling,
    /// Fixed distance level
    #[arg(long, default_value_t = 0.05)]
    a: f64,
    /// Row counts to sweep
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    ks: Vec<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    /// Number of generated instances [default: pivot 10000, q-sets 1000, edge-interval 200,
    /// low-value 100, dichotomy 200, alpharho 500, biorthogonality 1000]
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report (JSON) to this file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Pivot,
    QSets,
    EdgeInterval,
    LowValue,
    Dichotomy,
    Alpharho,
    Biorthogonality,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Pivot => Suite::Pivot,
            SuiteArg::QSets => Suite::QSets,
            SuiteArg::EdgeInterval => Suite::EdgeInterval,
            SuiteArg::LowValue => Suite::LowValue,
            SuiteArg::Dichotomy => Suite::Dichotomy,
            SuiteArg::Alpharho => Suite::Alpharho,
            SuiteArg::Biorthogonality => Suite::Biorthogonality,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["cube", "structure"])))]
struct DemoArgs {
    /// Use the discrete cube {0,…,m−1}ⁿ example; exits 1 unless P(E) ≤ 4/K
    #[arg(long)]
    cube: bool,
    /// Read a structure document (JSON) instead
    #[arg(long, value_name = "FILE")]
    structure: Option<PathBuf>,
    /// Cube dimension, a perfect square
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Cube constant K
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    /// Atoms per cube factor
    #[arg(long, default_value_t = 40)]
    atoms: usize,
    /// Write the check (JSON) to this file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// minimum-size increments by exhaustive search, n ≤ 16
    Exact,
    /// largest residual degree first
    Greedy,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list: one "j k" pair per line, 1-indexed; lines starting with '#' are skipped
    graph: PathBuf,
    /// Vertex count [default: largest vertex mentioned]
    #[arg(long)]
    n: Option<usize>,
    /// Decomposed vertex (1-indexed); must have no edges
    #[arg(long, default_value_t = 1)]
    vertex: usize,
    /// Number of halving steps
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Also report the vertex value and ρ-set at this level
    #[arg(long)]
    level: Option<usize>,
    /// Write the decomposition (JSON) to this file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

enum Failure {
    /// Bad flags or inputs: exit 2 with a synopsis.
    Usage(String),
    /// The computation itself broke down: exit 1.
    Runtime(String),
}

impl From<smin_lab::Error> for Failure {
    fn from(e: smin_lab::Error) -> Self {
        match e {
            smin_lab::Error::Degenerate(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn echo_config(value: &impl serde::Serialize) {
    println!("config:\n{}", pretty(value));
}

fn interval(p: &Proportion) -> String {
    format!("{}/{}  p_hat {:.4}  [{:.4}, {:.4}]", p.hits, p.trials, p.p_hat, p.ci_low, p.ci_high)
}

fn tail(args: TailArgs) -> Outcome {
    let config = match &args.config {
        Some(path) => ExperimentConfig::from_json(&read(path)?)?,
        None => {
            let s = args.sampling;
            ExperimentConfig {
                dist: s.dist,
                shift: s.shift,
                n: s.n,
                trials: s.trials,
                t_grid: grid::parse_grid(&args.t_grid, args.geom).map_err(Failure::Usage)?,
                master_seed: s.seed,
                statistic: match args.statistic {
                    StatisticArg::SminScaled => Statistic::SminScaled,
                    StatisticArg::HsScaledSqrt => Statistic::HsScaledSqrt,
                    StatisticArg::HsScaledN => Statistic::HsScaledN,
                    StatisticArg::DistanceProfile => Statistic::DistanceProfile { k: args.k, a: args.a },
                },
            }
        }
    };
    echo_config(&config);
    let est = estimate_tail(&config)?;
    print_tail(&est);
    if let Some(path) = &args.output.out {
        emit_results(&est, path, args.output.format(path))?;
        println!("wrote {}", path.display());
    }
    Ok(true)
}

fn print_tail(est: &TailEstimate) {
    println!("{:>12}  {:>12}  {:>8}  95% interval", "t", "hits/trials", "p_hat");
    for p in &est.points {
        let frac = format!("{}/{}", p.hits, p.trials);
        println!("{:>12.6}  {frac:>12}  {:>8.4}  [{:.4}, {:.4}]", p.t, p.p_hat, p.ci_low, p.ci_high);
    }
    println!("wall time {:.2}s", est.wall_time_secs);
}

fn counterexample(args: CounterexampleArgs) -> Outcome {
    let config = match &args.config {
        Some(path) => serde_json::from_str(&read(path)?).map_err(smin_lab::Error::from)?,
        None => CounterexampleConfig {
            n: args.n,
            tau: args.tau,
            trials: args.trials,
            master_seed: args.seed,
        },
    };
    echo_config(&config);
    let r = counterexample_experiment(&config)?;
    println!("corner event: {}", interval(&r.corner_event));
    for x in &r.smin {
        println!("s_min <= {}n/tau = {:.4e}: {}", x.constant, x.threshold, interval(&x.rate));
    }
    for x in &r.kappa {
        println!("kappa >= {}tau^2/n = {:.4e}: {}", x.constant, x.threshold, interval(&x.rate));
    }
    if let (Some(s), Some(w)) = (r.corner_smin_median, r.corner_witness_median) {
        println!("on the corner event: median s_min {s:.4e}, median witness ratio {w:.4e}");
    }
    println!("witness violations: {}", r.witness_violations);
    println!("wall time {:.2}s", r.wall_time_secs);
    if let Some(path) = &args.output.out {
        let bytes = match args.output.format(path) {
            OutputFormat::Json => pretty(&r).into_bytes(),
            OutputFormat::Csv => counterexample_csv(&r)?,
        };
        write(path, bytes)?;
    }
    Ok(true)
}

fn counterexample_csv(r: &CounterexampleReport) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |event: &str, constant: String, threshold: String, p: &Proportion| {
        [
            event.to_string(),
            constant,
            threshold,
            p.hits.to_string(),
            p.trials.to_string(),
            p.p_hat.to_string(),
            p.ci_low.to_string(),
            p.ci_high.to_string(),
        ]
    };
    let mut rows = vec![row("corner", String::new(), String::new(), &r.corner_event)];
    rows.extend(r.smin.iter().map(|x| row("smin", x.constant.to_string(), x.threshold.to_string(), &x.rate)));
    rows.extend(r.kappa.iter().map(|x| row("kappa", x.constant.to_string(), x.threshold.to_string(), &x.rate)));
    let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(["event", "constant", "threshold", "hits", "trials", "p_hat", "ci_low", "ci_high"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Failure::Usage(e.to_string()))
}

fn distance_profile(args: ProfileArgs) -> Outcome {
    let s = &args.sampling;
    let echo = json!({
        "dist": s.dist,
        "shift": s.shift,
        "n": s.n,
        "trials": s.trials,
        "master_seed": s.seed,
        "a": args.a,
        "ks": args.ks,
    });
    echo_config(&echo);
    let sweep = distance_profile_sweep(s.dist, &s.shift, s.n, s.trials, s.seed, args.a, &args.ks)?;
    for p in &sweep {
        println!("k = {:>4}: {}", p.k, interval(&p.rate));
    }
    let slope = profile_slope(s.n, &sweep);
    match slope {
        Some(v) => println!("slope of log p_hat against log(n/k): {v:.4}"),
        None => println!("slope undefined: fewer than two points with a positive lower bound"),
    }
    if let Some(path) = &args.output.out {
        let bytes = match args.output.format(path) {
            OutputFormat::Json => pretty(&json!({ "config": echo, "points": sweep, "slope": slope })).into_bytes(),
            OutputFormat::Csv => sweep_csv(args.a, &sweep)?,
        };
        write(path, bytes)?;
    }
    Ok(true)
}

fn sweep_csv(a: f64, sweep: &[SweepPoint]) -> Result<Vec<u8>, Failure> {
    let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["a", "k", "trials", "hits", "p_hat", "ci_low", "ci_high"]).map_err(csv_err)?;
    for p in sweep {
        let r = &p.rate;
        w.write_record([
            a.to_string(),
            p.k.to_string(),
            r.trials.to_string(),
            r.hits.to_string(),
            r.p_hat.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Failure::Usage(e.to_string()))
}

fn lemma_check(args: LemmaArgs) -> Outcome {
    let suite = Suite::from(args.suite);
    let instances = args.instances.unwrap_or(suite.default_instances());
    echo_config(&json!({ "suite": suite, "instances": instances, "seed": args.seed }));
    let r = run_suite(suite, instances, args.seed)?;
    println!(
        "{}: {} instances, {} qualifying, {} checks, {} failures",
        r.suite, r.instances, r.qualifying, r.checks, r.failures
    );
    if let Some(w) = r.worst {
        println!("worst case {w:.4e}");
    }
    for note in &r.notes {
        println!("failure: {note}");
    }
    println!("wall time {:.2}s", r.wall_time_secs);
    let passed = r.passed();
    println!("{}", if passed { "PASS" } else { "FAIL" });
    if let Some(path) = &args.out {
        write(path, pretty(&r))?;
    }
    Ok(passed)
}

fn alphaeta_demo(args: DemoArgs) -> Outcome {
    let structure = match &args.structure {
        Some(path) => {
            echo_config(&json!({ "structure": path }));
            serde_json::from_str::<AlphaEtaStructure>(&read(path)?).map_err(smin_lab::Error::from)?
        }
        None => {
            echo_config(&json!({ "cube": true, "n": args.n, "k": args.k, "atoms": args.atoms }));
            cube_example_structure(args.n, args.k, args.atoms)?
        }
    };
    let check = structure.verify_alpharho()?;
    println!("atoms: {}", structure.space().atom_count());
    println!("sharps: {:?}", structure.sharps());
    println!("exact P(E) = {:.6}", check.event_probability);
    println!("section sum {:.6} <= |Psi|^2 |Lambda| = {}: {}", check.lhs, check.rhs, check.holds);
    if let (Some(w), Some(b)) = (check.min_weight, check.implied_probability_bound()) {
        println!("min weight {w:.4}, implied bound P(E) <= {b:.6}");
    }
    let mut passed = check.holds;
    let mut cube_bound = None;
    if args.cube {
        let bound = 4.0 / args.k;
        let ok = check.event_probability <= bound;
        println!("P(E) <= 4/K = {bound}: {ok}");
        passed &= ok;
        cube_bound = Some(bound);
    }
    println!("{}", if passed { "PASS" } else { "FAIL" });
    if let Some(path) = &args.out {
        write(path, pretty(&json!({ "check": check, "cube_bound": cube_bound, "passed": passed })))?;
    }
    Ok(passed)
}

/// Largest vertex label in an edge list, skipping anything unparsable.
fn largest_vertex(text: &str) -> usize {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace)
        .filter_map(|t| t.parse::<usize>().ok())
        .max()
        .unwrap_or(0)
}

fn graph_decompose(args: GraphArgs) -> Outcome {
    if args.vertex == 0 {
        return Err(Failure::Usage("vertices are 1-indexed".into()));
    }
    let text = read(&args.graph)?;
    let n = args.n.unwrap_or_else(|| largest_vertex(&text).max(args.vertex));
    let mode = match args.mode {
        ModeArg::Exact => DecompositionMode::Exact,
        ModeArg::Greedy => DecompositionMode::Greedy,
    };
    echo_config(&json!({
        "graph": args.graph, "n": n, "vertex": args.vertex, "depth": args.depth,
        "mode": mode, "level": args.level,
    }));
    let g = Graph::from_edge_list(n, &text)?;
    let i = args.vertex - 1;
    let dec = greedy_decomposition(&g, i, args.depth, mode)?;
    let one_based = |s: &[usize]| s.iter().map(|v| v + 1).collect::<Vec<_>>();
    let mut steps = Vec::new();
    println!("{} vertices, {} edges", g.n(), g.edge_count());
    for k in 0..=dec.depth() {
        let s = one_based(dec.s(k));
        let e = dec.e(k).len();
        let inc = (k > 0).then(|| dec.increment(k));
        println!("k = {k}: |E_k| = {e}, |S_k| = {}, S_k = {s:?}", s.len());
        steps.push(json!({ "k": k, "s": s, "residual_edges": e, "increment": inc }));
    }
    let mut report = json!({ "n": n, "vertex": args.vertex, "mode": mode, "steps": steps });
    if let Some(level) = args.level {
        let value = vertex_value(&g, i, level, mode)?;
        let rho: Vec<(usize, usize)> = rho_set(&g, i, level, mode)?.iter().map(|&(j, k)| (j + 1, k + 1)).collect();
        println!("vertex value at level {level}: {value:.6}");
        println!("rho-set ({} edges): {rho:?}", rho.len());
        report["level"] = json!(level);
        report["value"] = json!(value);
        report["rho"] = json!(rho);
    }
    if let Some(path) = &args.out {
        write(path, pretty(&report))?;
    }
    Ok(true)
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Tail(a) => tail(a),
        Command::Counterexample(a) => counterexample(a),
        Command::DistanceProfile(a) => distance_profile(a),
        Command::LemmaCheck(a) => lemma_check(a),
        Command::AlphaetaDemo(a) => alphaeta_demo(a),
        Command::GraphDecompose(a) => graph_decompose(a),
    }
}

/// Synopsis of `verb`, or of the whole program when `verb` is unknown.
fn usage(verb: Option<&str>) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    match verb.and_then(|v| cmd.find_subcommand_mut(v)) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            if text.contains("Usage:") {
                eprint!("{text}");
            } else {
                let args: Vec<String> = std::env::args().collect();
                let verb = args.get(1).map(String::as_str);
                let (head, tail) = text.split_once("\n\n").unwrap_or((text.trim_end(), ""));
                eprint!("{head}\n\n{}\n\n{tail}", usage(verb));
            }
            return ExitCode::from(2);
        }
    };
    let verb = cli.command.name();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}\n\nFor more information, try '--help'.", usage(Some(verb)));
            ExitCode::from(2)
        }
    }
}
