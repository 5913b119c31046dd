use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lpseg::manifest;
use lpseg::optimize::optimize_image;
use lpseg::report::{self, GaConfigFile, ParamsFile, RunReport};
use lpseg::service::{self, ServiceConfig};
use lpseg::{io, Error, Result, Threaded};
use lpseg_core::ga::GaConfig;
use lpseg_core::metrics::error_rate;
use lpseg_core::pipeline::{build_graph, encode_mask, segment_prepared, PreparedImage};
use lpseg_core::{ConvergenceMonitor, SegParams};

/// Interactive segmentation by label propagation on kNN pixel graphs.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment one image from a trimap.
    Segment(SegmentArgs),
    /// Segment every entry of a manifest and tabulate error rates.
    Evaluate(EvaluateArgs),
    /// Search (k, lambda) for one image with a genetic algorithm.
    Optimize(OptimizeArgs),
    /// Run the HTTP service used by the scribble UI.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Neighbors per pixel [default: 10].
    #[arg(long)]
    k: Option<usize>,
    /// 23 feature weights: a file with one value per line, or a
    /// comma-separated list [default: all ones].
    #[arg(long)]
    lambda: Option<String>,
    /// JSON parameter file `{k, lambda}` as written by `optimize`;
    /// --k and --lambda override its fields.
    #[arg(long)]
    params: Option<PathBuf>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<(SegParams, bool)> {
        let (mut params, tuned) = match &self.params {
            Some(p) => {
                let file = ParamsFile::read(p)?;
                (file.params()?, file.oracle_tuned)
            }
            None => (SegParams::default(), false),
        };
        if let Some(k) = self.k {
            params = SegParams::new(k, params.lambda)?;
        }
        if let Some(l) = &self.lambda {
            params = SegParams::new(params.k, io::parse_lambda_arg(l)?)?;
        }
        Ok((params, tuned))
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// RGB image (PNG, BMP or JPEG).
    #[arg(long)]
    image: PathBuf,
    /// Gray trimap: 0 ignore, 64 background, 128 unlabeled, 255 foreground.
    #[arg(long)]
    trimap: PathBuf,
    /// Ground-truth mask; enables the error rate.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    /// Output mask (255 foreground, 0 background).
    #[arg(long)]
    out: PathBuf,
    /// JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV of the convergence statistic at each checkpoint.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Worker threads for graph construction and propagation [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
    /// Debug: write the kNN graph as `i j` edge lines.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// JSON array of `{image, trimap, gt, params?}`; paths relative to the manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for `results.csv` and `masks/`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    /// Entries segmented concurrently [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    trimap: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// JSON overrides for the search settings (population_size, generations, ...).
    #[arg(long)]
    ga_config: Option<PathBuf>,
    /// Random seed; overrides `rng_seed` from --ga-config.
    #[arg(long)]
    seed: Option<u64>,
    /// Best genome as a JSON parameter file.
    #[arg(long)]
    out: PathBuf,
    /// CSV of best and mean fitness per generation.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Genomes evaluated concurrently [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Allowed CORS origin [default: any].
    #[arg(long)]
    cors_origin: Option<String>,
    /// Largest accepted upload, in pixels.
    #[arg(long, default_value_t = 2_000_000)]
    max_pixels: u64,
    /// Minutes before an idle session is dropped.
    #[arg(long, default_value_t = 30)]
    idle_minutes: u64,
}

fn jobs(n: Option<usize>) -> usize {
    n.unwrap_or_else(|| Threaded::available().workers()).max(1)
}

fn cmd_segment(a: &SegmentArgs) -> Result<()> {
    let start = Instant::now();
    let (params, oracle_tuned) = a.params.resolve()?;
    let image = io::load_rgb(&a.image)?;
    let seeds = io::load_trimap(&a.trimap)?;
    let gt = a.gt.as_deref().map(io::load_ground_truth).transpose()?;
    let exec = Threaded::new(jobs(a.jobs));

    let prepared = PreparedImage::new(&image);
    let result = segment_prepared(&prepared, &seeds, &params, &ConvergenceMonitor::default(), &exec, |cp| {
        log::debug!("iteration {}: statistic {}", cp.iteration, cp.statistic)
    })?;
    let rate = gt.map(|gt| error_rate(&result, &gt, &seeds)).transpose()?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    io::save_mask(&a.out, result.width(), result.height(), &encode_mask(&result))?;
    if let Some(path) = &a.trace {
        report::write_trace(path, &result.checkpoints)?;
    }
    if let Some(path) = &a.edges {
        let graph = build_graph(&prepared, &seeds.node_pixels(), &params, &exec)?;
        io::write_edge_list(path, &graph)?;
    }
    if let Some(path) = &a.report {
        let run = RunReport {
            error_rate: rate,
            iterations: result.iterations,
            converged: result.converged,
            k: params.k,
            lambda: report::lambda_vec(&params.lambda),
            wall_ms,
            oracle_tuned,
        };
        report::write_json(path, &run)?;
    }
    if !result.converged {
        log::warn!("stopped at the iteration cap without converging");
    }
    match rate {
        Some(r) => println!("error {:.4}% ({} iterations)", r * 100.0, result.iterations),
        None => println!("{} iterations", result.iterations),
    }
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<bool> {
    let (params, _) = a.params.resolve()?;
    let entries = manifest::read_manifest(&a.manifest)?;
    let summary = manifest::evaluate(&entries, &params, &a.out, jobs(a.jobs))?;
    println!("{:<40} {:>9} {:>10} {:>10}", "image", "error %", "iterations", "wall ms");
    for e in &summary.entries {
        let name = e.image.display().to_string();
        match &e.outcome {
            Ok(s) => println!(
                "{name:<40} {:>9.4} {:>10} {:>10.1}",
                s.error_rate * 100.0,
                s.iterations,
                s.wall_ms
            ),
            Err(msg) => println!("{name:<40} failed: {msg}"),
        }
    }
    match summary.mean_error() {
        Some(m) => println!("{:<40} {:>9.4}", "mean", m * 100.0),
        None => println!("{:<40} {:>9}", "mean", "-"),
    }
    Ok(summary.failures() == 0)
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<()> {
    let mut config = GaConfig::default();
    if let Some(path) = &a.ga_config {
        let file: GaConfigFile = report::read_json(path)?;
        config = file.apply(config);
    }
    if let Some(seed) = a.seed {
        config.rng_seed = seed;
    }
    let image = io::load_rgb(&a.image)?;
    let seeds = io::load_trimap(&a.trimap)?;
    let gt = io::load_ground_truth(&a.gt)?;
    let outcome = optimize_image(&image, seeds, gt, &config, &[], jobs(a.jobs))?;
    report::write_json(&a.out, &ParamsFile::from_genome(&outcome.best))?;
    if let Some(path) = &a.history {
        report::write_history(path, &outcome.history)?;
    }
    println!(
        "best k={} error {:.4}%",
        outcome.best.k,
        outcome.best.fitness.unwrap_or(f64::NAN) * 100.0
    );
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> Result<()> {
    let config = ServiceConfig {
        max_pixels: a.max_pixels,
        idle_timeout: std::time::Duration::from_secs(a.idle_minutes * 60),
        cors_origin: a.cors_origin.clone(),
        ..ServiceConfig::default()
    };
    let addr = SocketAddr::new(a.bind, a.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    runtime
        .block_on(service::serve(addr, config))
        .map_err(|e| Error::io(addr.to_string(), e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Segment(a) => cmd_segment(a).map(|()| true),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Optimize(a) => cmd_optimize(a).map(|()| true),
        Command::Serve(a) => cmd_serve(a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("lpseg: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
