use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geodp::mechanisms::shape::CurveTopology;
use geodp::{ChainConfig, Mechanism};
use geodp_harness::audit::{run_audit, AuditConfig};
use geodp_harness::bench::{run_benchmark, summarize};
use geodp_harness::config::{BenchmarkConfig, ChainOverrides, ManifoldKind};
use geodp_harness::io::{load_landmarks, write_landmarks, write_plot_script, write_results, write_summary};
use geodp_harness::shape::{gen_synthetic_corpus, prepare_shapes, run_shape_benchmark, ShapeOptions, Template};
use geodp_harness::{Execution, HarnessError, Result};

#[derive(Parser)]
#[command(name = "geodp", version, about = "Private Fréchet means: benchmarks, shape releases and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo utility benchmark
    Bench {
        #[command(subcommand)]
        manifold: BenchTarget,
    },
    /// Private mean shape from a landmark file
    Shape {
        #[command(subcommand)]
        action: ShapeAction,
    },
    /// Grid audit of the privacy guarantee on the 2-sphere
    Audit {
        #[command(subcommand)]
        kind: AuditKind,
    },
    /// Synthetic data
    Gen {
        #[command(subcommand)]
        what: GenWhat,
    },
}

#[derive(Subcommand)]
enum BenchTarget {
    Sphere(BenchArgs),
    Spd(BenchArgs),
}

#[derive(Subcommand)]
enum ShapeAction {
    Run(ShapeArgs),
}

#[derive(Subcommand)]
enum AuditKind {
    Dp(AuditArgs),
}

#[derive(Subcommand)]
enum GenWhat {
    Corpus(CorpusArgs),
}

#[derive(Args, Clone, Default)]
struct ChainArgs {
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Proposal step multiplier in (0, 1]
    #[arg(long)]
    step: Option<f64>,
    /// Skip the reverse-move correction in the acceptance ratio
    #[arg(long)]
    plain_ratio: bool,
}

impl ChainArgs {
    fn overrides(&self) -> ChainOverrides {
        ChainOverrides { burn_in: self.burn_in, thin: self.thin, step: self.step, plain_ratio: self.plain_ratio }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    mechanisms: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    chain: ChainArgs,
    /// Matrix size (SPD only)
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Also write a gnuplot script
    #[arg(long)]
    emit_plot: bool,
    /// Run replicates on one thread
    #[arg(long)]
    sequential: bool,
    /// Fill the wall_ms column (makes output non-reproducible)
    #[arg(long)]
    record_timing: bool,
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    smooth_bandwidth: Option<f64>,
    /// Treat landmarks as an open curve when smoothing
    #[arg(long)]
    open_curve: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    emit_plot: bool,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Budget to check against (defaults to --epsilon)
    #[arg(long)]
    check_epsilon: Option<f64>,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_8)]
    radius: f64,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value_t = 20)]
    pairs: usize,
    #[arg(long, value_delimiter = ',', default_value = "kng,laplace")]
    mechanisms: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Optional CSV report
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, default_value = "ellipse")]
    template: String,
    #[arg(long, default_value_t = 32)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_mechanisms(names: &[String]) -> Result<Vec<Mechanism>> {
    names
        .iter()
        .map(|s| s.trim().parse::<Mechanism>().map_err(|e| HarnessError::Config(e.to_string())))
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io { path: dir.to_path_buf(), source: e })
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn bench(kind: ManifoldKind, a: BenchArgs) -> Result<()> {
    let mut cfg = BenchmarkConfig::default_for(kind);
    if let Some(e) = a.epsilon {
        cfg.epsilon = e;
    }
    if let Some(r) = a.radius {
        cfg.radius = r;
    }
    if let Some(s) = a.sizes {
        cfg.sizes = s;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(m) = a.mechanisms {
        cfg.mechanisms = parse_mechanisms(&m)?;
    }
    cfg.seed = a.seed;
    cfg.chain = a.chain.overrides();
    cfg.spd_k = a.k;
    cfg.execution = execution(a.sequential);
    cfg.record_timing = a.record_timing;
    cfg.validate()?;

    let rows = run_benchmark(&cfg)?;
    let summary = summarize(&rows);
    ensure_dir(&a.out)?;
    write_results(&a.out.join("results.csv"), &rows)?;
    write_summary(&a.out.join("summary.csv"), &summary)?;
    if a.emit_plot {
        write_plot_script(&a.out.join("plot.gp"), "summary.csv", &summary, kind.as_str())?;
    }
    for s in &summary {
        println!(
            "{:<20} n={:<5} mean={} 2se={}",
            s.mechanism,
            s.n,
            s.mean_euclidean.map_or("-".into(), |v| format!("{v:.6}")),
            s.two_se_euclidean.map_or("-".into(), |v| format!("{v:.6}")),
        );
    }
    Ok(())
}

fn shape(a: ShapeArgs) -> Result<()> {
    let shapes = load_landmarks(&a.input)?;
    let base = ChainConfig::kendall_default(a.seed);
    let mut opts = ShapeOptions::new(a.epsilon, a.seed);
    opts.chain = a.chain.overrides().apply(base)?;
    opts.smoothing = a.smooth_bandwidth;
    opts.topology = if a.open_curve { CurveTopology::Open } else { CurveTopology::Closed };
    if !(a.epsilon > 0.0) {
        return Err(HarnessError::Config("epsilon must be positive".into()));
    }
    let sd = prepare_shapes(&shapes)?;
    let (rows, releases) = run_shape_benchmark(&sd, &opts, a.replicates, execution(a.sequential))?;
    let summary = summarize(&rows);
    ensure_dir(&a.out)?;
    write_results(&a.out.join("results.csv"), &rows)?;
    write_summary(&a.out.join("summary.csv"), &summary)?;
    if a.emit_plot {
        write_plot_script(&a.out.join("plot.gp"), "summary.csv", &summary, "kendall")?;
    }
    let first = &releases[0];
    write_landmarks(
        &a.out.join("release.csv"),
        &[
            sd.mean.landmarks().clone(),
            first.kng.landmarks().clone(),
            first.pointwise_aligned.clone(),
            first.pointwise_unaligned.clone(),
        ],
        Some("rows: mean, kng, pointwise-aligned, pointwise-unaligned (replicate 0)"),
    )?;
    let meta = format!(
        "shapes={}\nlandmarks={}\nepsilon={}\nradius={}\nradius_data_dependent={}\nkng_sigma={}\n",
        sd.data.len(),
        sd.space.k(),
        a.epsilon,
        sd.radius,
        sd.radius_data_dependent,
        first.kng_sigma
    );
    let meta_path = a.out.join("metadata.txt");
    fs::write(&meta_path, &meta).map_err(|e| HarnessError::Io { path: meta_path, source: e })?;
    print!("{meta}");
    for s in &summary {
        println!(
            "{:<20} mean shape distance={}",
            s.mechanism,
            s.mean_intrinsic.map_or("-".into(), |v| format!("{v:.6}"))
        );
    }
    Ok(())
}

fn audit(a: AuditArgs) -> Result<()> {
    let cfg = AuditConfig {
        n: a.n,
        radius: a.radius,
        epsilon: a.epsilon,
        check_epsilon: a.check_epsilon.unwrap_or(a.epsilon),
        grid: a.grid,
        pairs: a.pairs,
        seed: a.seed,
        mechanisms: parse_mechanisms(&a.mechanisms)?,
    };
    let report = run_audit(&cfg)?;
    if let Some(out) = &a.out {
        let mut s = String::from("mechanism,pair,max_log_ratio,threshold\n");
        for l in &report.lines {
            s.push_str(&format!("{},{},{},{}\n", l.mechanism, l.pair, l.max_log_ratio, report.threshold));
        }
        fs::write(out, s).map_err(|e| HarnessError::Io { path: out.clone(), source: e })?;
    }
    for &m in &cfg.mechanisms {
        let v = report.max_for(m);
        let verdict = if v <= report.threshold { "pass" } else { "FAIL" };
        println!("{m:<10} max |log ratio| = {v:.6}  threshold = {:.6}  {verdict}", report.threshold);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(HarnessError::AuditFailed(format!("some cells exceed {:.6}", report.threshold)))
    }
}

fn corpus(a: CorpusArgs) -> Result<()> {
    let t: Template = a.template.parse()?;
    let shapes = gen_synthetic_corpus(t, a.k, a.count, a.noise, a.seed)?;
    write_landmarks(
        &a.out,
        &shapes,
        Some(&format!("template={} k={} count={} noise={} seed={}", a.template, a.k, a.count, a.noise, a.seed)),
    )
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench { manifold: BenchTarget::Sphere(a) } => bench(ManifoldKind::Sphere, a),
        Command::Bench { manifold: BenchTarget::Spd(a) } => bench(ManifoldKind::Spd, a),
        Command::Shape { action: ShapeAction::Run(a) } => shape(a),
        Command::Audit { kind: AuditKind::Dp(a) } => audit(a),
        Command::Gen { what: GenWhat::Corpus(a) } => corpus(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
