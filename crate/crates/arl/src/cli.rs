//! Command-line front-end: train, adversary, dynamics, pareto, gen-data.
//! Every run writes its artifacts plus a manifest that reproduces it.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{DynamicsBlock, ExperimentConfig};
use crate::data::MixtureConfig;
use crate::dynamics::{
    grid_export, integrate, write_trajectory_csv, DynamicsReport, Frozen, GameForm, LinearGame,
    Variant,
};
use crate::error::{Error, Result};
use crate::eval::{hypervolume_2d, nondominated, normalize, write_front_csv, TradeoffPoint};
use crate::nn::{read_checkpoint, write_checkpoint, write_metric_csv, Role};
use crate::training::{eval_adversary, train_adversary, train_arl, ArlModels};

#[derive(Debug, Parser)]
#[command(name = "arl", version, about = "Adversarial representation learning lab")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the three-player game and write checkpoint + metric log.
    Train(TrainArgs),
    /// Train a post-hoc adversary against a frozen encoder checkpoint.
    Adversary(AdversaryArgs),
    /// Analyze the linear game: field grid, trajectory, stability report.
    Dynamics(DynamicsArgs),
    /// Merge trade-off points, filter the front, compute hypervolume.
    Pareto(ParetoArgs),
    /// Generate the Gaussian-mixture dataset as CSV.
    GenData(GenDataArgs),
}

#[derive(Debug, Args)]
struct CommonRunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides config `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run seed override; may repeat for a sweep.
    #[arg(long)]
    seed: Vec<u64>,
    /// Trade-off weight override.
    #[arg(long)]
    alpha: Option<f64>,
    /// Variant override: ml | maxent.
    #[arg(long)]
    variant: Option<Variant>,
    /// Overwrite existing outputs.
    #[arg(long)]
    force: bool,
    /// Max concurrent runs in a seed sweep.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonRunArgs,
}

#[derive(Debug, Args)]
struct AdversaryArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Checkpoint from `arl train` holding encoder + predictor.
    #[arg(long)]
    checkpoint: PathBuf,
}

#[derive(Debug, Args)]
struct DynamicsArgs {
    /// Optional config with a [dynamics] block; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    alpha: Option<f64>,
    /// bilinear | quadratic.
    #[arg(long)]
    game_form: Option<GameForm>,
    /// Start point as "w1,w2,w3".
    #[arg(long)]
    start: Option<String>,
    /// Frozen coordinates, e.g. "w3" or "none".
    #[arg(long)]
    frozen: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    grid_range: Option<f64>,
    #[arg(long)]
    record_stride: Option<usize>,
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    /// Trade-off point CSV files (from `arl adversary`).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// accuracy_accuracy | accuracy_entropy.
    #[arg(long, default_value = "accuracy_accuracy")]
    objectives: String,
    /// Sensitive-attribute class count (entropy normalizer).
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    force: bool,
}

/// Entry point: returns the process exit code (0 ok, 2 config, 3 runtime).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } => 2,
                _ => 3,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Adversary(args) => cmd_adversary(args),
        Command::Dynamics(args) => cmd_dynamics(args),
        Command::Pareto(args) => cmd_pareto(args),
        Command::GenData(args) => cmd_gen_data(args),
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    run: RunInfo,
    config: &'a ExperimentConfig,
}

#[derive(Debug, Serialize)]
struct RunInfo {
    command: String,
    version: String,
    seed: u64,
}

fn write_manifest(path: &Path, command: &str, config: &ExperimentConfig, seed: u64) -> Result<()> {
    let manifest = Manifest {
        run: RunInfo {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
        },
        config,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Invalid(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Refuses to clobber existing outputs unless --force.
fn ensure_writable(paths: &[PathBuf], force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    for p in paths {
        if p.exists() {
            return Err(Error::Config(format!(
                "refusing to overwrite {} (pass --force)",
                p.display()
            )));
        }
    }
    Ok(())
}

fn make_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

/// Resolves config + CLI overrides; returns per-seed configs and out dirs.
fn resolve_runs(common: &CommonRunArgs) -> Result<Vec<(ExperimentConfig, PathBuf)>> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(alpha) = common.alpha {
        if !(alpha >= 0.0) {
            return Err(Error::Config(format!("--alpha must be >= 0, got {alpha}")));
        }
        config.arl.alpha = alpha;
    }
    if let Some(variant) = common.variant {
        config.arl.variant = variant;
    }
    let base_out = common
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .ok_or_else(|| Error::Config("no output directory (set --out or output.dir)".into()))?;
    let seeds: Vec<u64> = if common.seed.is_empty() {
        vec![config.arl.seed]
    } else {
        common.seed.clone()
    };
    let sweep = seeds.len() > 1;
    Ok(seeds
        .into_iter()
        .map(|seed| {
            let mut c = config.clone();
            c.arl.seed = seed;
            let dir = if sweep {
                base_out.join(format!("seed-{seed}"))
            } else {
                base_out.clone()
            };
            (c, dir)
        })
        .collect())
}

/// Runs the per-seed closures, up to `jobs` at a time.
fn run_jobs<F>(runs: Vec<(ExperimentConfig, PathBuf)>, jobs: usize, f: F) -> Result<()>
where
    F: Fn(&ExperimentConfig, &Path) -> Result<()> + Sync,
{
    let jobs = jobs.max(1);
    for chunk in runs.chunks(jobs) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(config, dir)| scope.spawn(|| f(config, dir)))
                .collect();
            for h in handles {
                h.join()
                    .map_err(|_| Error::Invalid("worker thread panicked".into()))??;
            }
            Ok::<(), Error>(())
        })?;
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let runs = resolve_runs(&args.common)?;
    let force = args.common.force;
    run_jobs(runs, args.common.jobs, |config, dir| {
        let ckpt = dir.join("checkpoint.txt");
        let metrics = dir.join("metrics.csv");
        let manifest = dir.join("manifest.toml");
        ensure_writable(&[ckpt.clone(), metrics.clone(), manifest.clone()], force)?;
        let (train, _test) = config.load_splits()?;
        let (models, log) = train_arl(&config.arl_config(), &train)?;
        make_dir(dir)?;
        write_checkpoint(&ckpt, &[&models.encoder, &models.predictor, &models.discriminator])?;
        write_metric_csv(&metrics, &log)?;
        write_manifest(&manifest, "train", config, config.arl.seed)?;
        println!(
            "train: {} epochs, final target_acc {:.2}% -> {}",
            log.len(),
            log.last().map(|m| m.target_acc).unwrap_or(0.0),
            dir.display()
        );
        Ok(())
    })
}

fn load_game_models(path: &Path) -> Result<ArlModels> {
    let models = read_checkpoint(path)?;
    let find = |role: Role| {
        models
            .iter()
            .find(|m| m.role == role)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("checkpoint has no {role} model")))
    };
    Ok(ArlModels {
        encoder: find(Role::Encoder)?,
        predictor: find(Role::Predictor)?,
        discriminator: find(Role::Discriminator)?,
    })
}

fn cmd_adversary(args: AdversaryArgs) -> Result<()> {
    let runs = resolve_runs(&args.common)?;
    let force = args.common.force;
    let checkpoint = args.checkpoint.clone();
    run_jobs(runs, args.common.jobs, |config, dir| {
        let adv_ckpt = dir.join("adversary.txt");
        let tradeoff = dir.join("tradeoff.csv");
        let manifest = dir.join("manifest.toml");
        ensure_writable(&[adv_ckpt.clone(), tradeoff.clone(), manifest.clone()], force)?;
        let models = load_game_models(&checkpoint)?;
        let (train, test) = config.load_splits()?;
        let (train, val) = crate::data::split(&train, 0.8, config.arl.seed)?;
        let outcome = train_adversary(&models.encoder, &config.adversary_config(), &train, &val)?;
        let (adv_acc, adv_entropy) = eval_adversary(&models.encoder, &outcome.model, &test)?;
        let t_logits = models.predictor.forward(&models.encoder.forward(&test.features)?)?;
        let target_acc =
            crate::eval::accuracy(&crate::training::argmax_rows(&t_logits), &test.t)?;
        make_dir(dir)?;
        write_checkpoint(&adv_ckpt, &[&outcome.model])?;
        let point = TradeoffPoint {
            target_acc,
            adv_acc,
            adv_entropy,
            variant: config.arl.variant.to_string(),
            alpha: config.arl.alpha,
            seed: config.arl.seed,
        };
        write_points_csv(&tradeoff, std::slice::from_ref(&point))?;
        write_manifest(&manifest, "adversary", config, config.arl.seed)?;
        println!(
            "adversary: target_acc {target_acc:.2}% adv_acc {adv_acc:.2}% entropy {adv_entropy:.4} nats ({} epochs{}) -> {}",
            outcome.epochs_run,
            if outcome.stopped_early { ", early stop" } else { "" },
            dir.display()
        );
        Ok(())
    })
}

/// Trade-off point CSV (also the pareto input format).
pub fn write_points_csv(path: &Path, points: &[TradeoffPoint]) -> Result<()> {
    let mut out = String::from("target_acc,adv_acc,adv_entropy,variant,alpha,seed\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.target_acc, p.adv_acc, p.adv_entropy, p.variant, p.alpha, p.seed
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_points_csv(path: &Path) -> Result<Vec<TradeoffPoint>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let fname = path.display().to_string();
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                file: fname.clone(),
                line: i + 1,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            fields[idx].trim().parse().map_err(|_| Error::Parse {
                file: fname.clone(),
                line: i + 1,
                msg: format!("bad number '{}'", fields[idx]),
            })
        };
        points.push(TradeoffPoint {
            target_acc: num(0)?,
            adv_acc: num(1)?,
            adv_entropy: num(2)?,
            variant: fields[3].trim().to_string(),
            alpha: num(4)?,
            seed: fields[5].trim().parse().map_err(|_| Error::Parse {
                file: fname.clone(),
                line: i + 1,
                msg: format!("bad seed '{}'", fields[5]),
            })?,
        });
    }
    Ok(points)
}

fn cmd_pareto(args: ParetoArgs) -> Result<()> {
    let objectives = match args.objectives.as_str() {
        "accuracy_accuracy" => crate::eval::ObjectivePair::AccuracyAccuracy,
        "accuracy_entropy" => crate::eval::ObjectivePair::AccuracyEntropy,
        other => {
            return Err(Error::Config(format!(
                "--objectives must be 'accuracy_accuracy' or 'accuracy_entropy', got '{other}'"
            )))
        }
    };
    if args.m < 2 {
        return Err(Error::Config(format!("--m must be >= 2, got {}", args.m)));
    }
    let front_path = args.out.join("front.csv");
    ensure_writable(&[front_path.clone()], args.force)?;
    let mut points = Vec::new();
    for input in &args.inputs {
        points.extend(read_points_csv(input)?);
    }
    let front = nondominated(&points, objectives);
    let normalized = normalize(&front.points, args.m)?;
    let hv = hypervolume_2d(&normalized, objectives)?;
    make_dir(&args.out)?;
    write_front_csv(&front_path, &front, hv)?;
    println!(
        "pareto: {} in, {} retained, hypervolume {:.6} -> {}",
        points.len(),
        front.points.len(),
        hv,
        front_path.display()
    );
    Ok(())
}

fn cmd_dynamics(args: DynamicsArgs) -> Result<()> {
    let mut block = match &args.config {
        Some(path) => ExperimentConfig::load(path)?.dynamics.unwrap_or_default(),
        None => DynamicsBlock::default(),
    };
    if let Some(v) = args.variant {
        block.variant = v;
    }
    if let Some(a) = args.alpha {
        block.alpha = a;
    }
    if let Some(g) = args.game_form {
        block.game_form = match g {
            GameForm::Bilinear => "bilinear".into(),
            GameForm::Quadratic => "quadratic".into(),
        };
    }
    if let Some(s) = &args.start {
        let parts: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("bad --start '{s}', want w1,w2,w3")))?;
        if parts.len() != 3 {
            return Err(Error::Config(format!("--start needs 3 coordinates, got {}", parts.len())));
        }
        block.start = [parts[0], parts[1], parts[2]];
    }
    if let Some(f) = &args.frozen {
        block.frozen = f.clone();
    }
    if let Some(dt) = args.dt {
        block.dt = dt;
    }
    if let Some(steps) = args.steps {
        block.steps = steps;
    }
    if let Some(n) = args.grid_n {
        block.grid_n = n;
    }
    if let Some(r) = args.grid_range {
        block.grid_range = r;
    }
    if let Some(rs) = args.record_stride {
        block.record_stride = rs;
    }
    if !(block.alpha >= 0.0) {
        return Err(Error::Config(format!("alpha must be >= 0, got {}", block.alpha)));
    }
    if !(block.dt > 0.0) {
        return Err(Error::Config(format!("dt must be > 0, got {}", block.dt)));
    }
    if block.grid_n < 2 {
        return Err(Error::Config(format!("grid_n must be >= 2, got {}", block.grid_n)));
    }
    let frozen: Frozen = block.frozen.parse()?;
    let form: GameForm = block.game_form.parse()?;

    let grid = args.out.join("grid.csv");
    let traj = args.out.join("trajectory.csv");
    let report_path = args.out.join("report.txt");
    ensure_writable(&[grid.clone(), traj.clone(), report_path.clone()], args.force)?;

    let game = LinearGame {
        variant: block.variant,
        alpha: block.alpha,
        form,
    };
    let mut report = DynamicsReport::analyze(&game, [0.0; 3])?;
    let trajectory = integrate(
        |w| game.field(w),
        block.start,
        block.dt,
        block.steps,
        frozen,
        block.record_stride,
    )?;
    report.trajectories.push(trajectory);
    make_dir(&args.out)?;
    grid_export(&grid, &game, -block.grid_range, block.grid_range, block.grid_n)?;
    write_trajectory_csv(&traj, &report.trajectories[0])?;
    std::fs::write(&report_path, report.render())
        .map_err(|e| Error::io(report_path.display().to_string(), e))?;
    println!(
        "dynamics: {} {} verdict {} final field norm {:.3e} -> {}",
        block.variant,
        block.game_form,
        report.verdict,
        report.trajectories[0].final_field_norm,
        args.out.display()
    );
    Ok(())
}

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    ensure_writable(&[args.out.clone()], args.force)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            make_dir(parent)?;
        }
    }
    let dataset = crate::data::gen_mixture(&MixtureConfig {
        samples_per_component: args.samples,
        sigma: args.sigma,
        seed: args.seed,
        ..MixtureConfig::default()
    })?;
    crate::data::export_csv(&dataset, &args.out)?;
    println!("gen-data: {} rows -> {}", dataset.len(), args.out.display());
    Ok(())
}
