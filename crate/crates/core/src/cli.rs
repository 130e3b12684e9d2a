//! Command-line front end.
//!
//! Machine-readable results (key=value lines or CSV) go to stdout, progress
//! and diagnostics to stderr. Exit status is 0 on success, 2 for usage or
//! validation errors and 1 for failures while running.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::classifier::{accuracy, KnnModel};
use crate::dataset::{load_dataset, make_folds, save_dataset, synth_clusters, LabeledDataset};
use crate::error::Error;
use crate::gabor::{default_bank, gabor_lift_dataset};
use crate::mfpc::{SolverConfig, StepSize};
use crate::model::{load_model, save_model, Model, ModelMetadata};
use crate::trainer::{fit, transform, FitConfig, ProjectionStack, TrainReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "margin-tensor", version, about = "Large-margin low-rank tensor subspace learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn per-mode projections and write a model file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Embed a dataset with a trained model.
    Transform {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print `index,label` predictions for every sample of `--data`.
    Predict {
        #[command(flatten)]
        knn: KnnArgs,
    },
    /// Print test accuracy of `--data`.
    Eval {
        #[command(flatten)]
        knn: KnnArgs,
    },
    /// Stratified k-fold cross-validation.
    Xval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Lift every 2D sample into a stack of Gabor magnitude responses.
    Gabor {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        scales: usize,
        #[arg(long, default_value_t = 7)]
        orients: usize,
        #[arg(long, default_value_t = 11)]
        ksize: usize,
    },
    /// Generate low-rank Gaussian clusters.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        subdims: Vec<usize>,
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, default_value_t = 7)]
    pub k1: usize,
    #[arg(long, default_value_t = 15)]
    pub k2: usize,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub mu_bar: Option<f64>,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    pub mu_decay: f64,
    #[arg(long, default_value_t = 200)]
    pub tmax: usize,
    #[arg(long, default_value_t = 1e-5, allow_negative_numbers = true)]
    pub rel_tol: f64,
    /// Fixed step size; automatic when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub outer_max: usize,
    #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
    pub outer_tol: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct KnnArgs {
    /// Model to embed with; raw tensors are compared when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    /// Labeled neighbor pool. Defaults to the training set recorded in the model.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::BadKernel(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

impl FitArgs {
    pub fn to_config(&self) -> Result<FitConfig, Error> {
        let cfg = FitConfig {
            k1: self.k1,
            k2: self.k2,
            lambda: self.lambda,
            solver: SolverConfig {
                mu_bar: self.mu_bar,
                mu_decay: self.mu_decay,
                t_max: self.tmax,
                rel_tol: self.rel_tol,
                tau: self.tau.map_or(StepSize::Auto, StepSize::Fixed),
                ..SolverConfig::default()
            },
            outer_max: self.outer_max,
            outer_tol: self.outer_tol,
            seed: self.seed,
            ..FitConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Train { data, out, fit } => cmd_train(&data, &out, &fit),
        Command::Transform { model, data, out } => cmd_transform(&model, &data, &out),
        Command::Predict { knn } => cmd_predict(&knn),
        Command::Eval { knn } => cmd_eval(&knn),
        Command::Xval { data, folds, k, fit } => cmd_xval(&data, folds, k, &fit),
        Command::Gabor { data, out, scales, orients, ksize } => {
            cmd_gabor(&data, &out, scales, orients, ksize)
        }
        Command::Synth { out, classes, per_class, dims, subdims, noise, seed } => {
            cmd_synth(&out, classes, per_class, &dims, &subdims, noise, seed)
        }
    }
}

fn metadata(cfg: &FitConfig, report: &TrainReport, train_data: &Path) -> ModelMetadata {
    ModelMetadata {
        k1: cfg.k1,
        k2: cfg.k2,
        lambda: cfg.lambda,
        mu_bar: report.mu_bar,
        mu_decay: cfg.solver.mu_decay,
        mu_init_scale: cfg.solver.mu_init_scale,
        t_max: cfg.solver.t_max,
        rel_tol: cfg.solver.rel_tol,
        tau: match cfg.solver.tau {
            StepSize::Fixed(t) => Some(t),
            StepSize::Auto => None,
        },
        outer_max: cfg.outer_max,
        outer_tol: cfg.outer_tol,
        seed: cfg.seed,
        ranks: report.final_ranks.clone(),
        objective_history: report.objective_history.clone(),
        train_data: Some(train_data.to_string_lossy().into_owned()),
    }
}

fn cmd_train(data: &Path, out: &Path, args: &FitArgs) -> Outcome {
    let cfg = args.to_config()?;
    let ds = load_dataset(data)?;
    eprintln!("training on {} samples of dims {:?}, {} classes", ds.len(), ds.dims(), ds.class_count());
    let (stack, report) = fit(&ds, &cfg)?;
    let model = Model { stack, metadata: metadata(&cfg, &report, data) };
    save_model(&model, out)?;
    eprintln!("wrote {} in {:.2}s", out.display(), report.wall_time);
    println!("seed={}", cfg.seed);
    println!("ranks={}", join(&report.final_ranks));
    println!("sweeps={}", report.outer_iterations);
    println!("mode_solves={}", report.objective_history.len());
    println!("rejected_solves={}", report.rejected_solves);
    println!("mu_bar={:e}", report.mu_bar);
    println!("initial_objective={:.10e}", report.initial_objective);
    println!("final_objective={:.10e}", report.objective_history.last().copied().unwrap_or(f64::NAN));
    Ok(())
}

fn cmd_transform(model: &Path, data: &Path, out: &Path) -> Outcome {
    let model = load_model(model)?;
    let ds = load_dataset(data)?;
    let embedded = transform(&model.stack, &ds)?;
    save_dataset(&embedded, out)?;
    eprintln!("wrote {} samples to {}", embedded.len(), out.display());
    println!("dims={}", join(embedded.dims()));
    println!("samples={}", embedded.len());
    Ok(())
}

/// Neighbor pool and query set, both embedded.
fn embedded_pair(args: &KnnArgs) -> Outcome<(LabeledDataset, LabeledDataset)> {
    if args.k == 0 {
        return usage("--k must be >= 1");
    }
    let model = args.model.as_deref().map(load_model).transpose()?;
    let pool_path = match (&args.train, &model) {
        (Some(p), _) => p.clone(),
        (None, Some(m)) => match &m.metadata.train_data {
            Some(p) => PathBuf::from(p),
            None => return usage("model records no training set; pass --train"),
        },
        (None, None) => return usage("need --train when no --model is given"),
    };
    let pool = load_dataset(&pool_path)?;
    let queries = load_dataset(&args.data)?;
    let stack = match model {
        Some(m) => m.stack,
        None => ProjectionStack::identity(pool.dims()),
    };
    Ok((transform(&stack, &pool)?, transform(&stack, &queries)?))
}

fn predictions(args: &KnnArgs) -> Outcome<(Vec<u32>, Vec<u32>)> {
    let (pool, queries) = embedded_pair(args)?;
    let knn = KnnModel::from_dataset(&pool, args.k)?;
    Ok((knn.predict_all(queries.tensors())?, queries.labels().to_vec()))
}

fn cmd_predict(args: &KnnArgs) -> Outcome {
    let (pred, _) = predictions(args)?;
    println!("index,label");
    for (i, y) in pred.iter().enumerate() {
        println!("{i},{y}");
    }
    Ok(())
}

fn cmd_eval(args: &KnnArgs) -> Outcome {
    let (pred, truth) = predictions(args)?;
    let acc = accuracy(&pred, &truth);
    eprintln!("{} of {} correct", (acc * truth.len() as f64).round(), truth.len());
    println!("{acc:.6}");
    Ok(())
}

fn cmd_xval(data: &Path, folds: usize, k: usize, args: &FitArgs) -> Outcome {
    if folds < 2 {
        return usage("--folds must be >= 2");
    }
    if k == 0 {
        return usage("--k must be >= 1");
    }
    let cfg = args.to_config()?;
    let ds = load_dataset(data)?;
    let plan = make_folds(&ds, folds, cfg.seed).map_err(|e| match e {
        Error::TooFewSamples { .. } => Failure::Usage(e.to_string()),
        other => other.into(),
    })?;
    let start = Instant::now();
    let mut accs = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (train_idx, test_idx) = plan.split(fold);
        let train = ds.subset(&train_idx)?;
        let test = ds.subset(&test_idx)?;
        let stack = match fit(&train, &cfg) {
            Ok((stack, _)) => stack,
            // Too few samples per class in this fold to form any target pair.
            Err(Error::DegenerateGraph) => {
                eprintln!("fold {fold}: no same-class neighbor pairs, using the identity projection");
                ProjectionStack::identity(train.dims())
            }
            Err(e) => return Err(e.into()),
        };
        let acc = crate::classifier::evaluate(&stack, &train, &test, k)?;
        eprintln!("fold {fold}: accuracy {acc:.4}, ranks {:?}", stack.ranks());
        println!("fold={fold} accuracy={acc:.6} ranks={}", join(&stack.ranks()));
        accs.push(acc);
    }
    let mean = accs.iter().sum::<f64>() / folds as f64;
    let std = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / folds as f64).sqrt();
    eprintln!("{folds}-fold mean {mean:.4} +/- {std:.4} in {:.1}s", start.elapsed().as_secs_f64());
    println!("lambda={} mean={mean:.6} std={std:.6} seed={}", cfg.lambda, cfg.seed);
    Ok(())
}

fn cmd_gabor(data: &Path, out: &Path, scales: usize, orients: usize, ksize: usize) -> Outcome {
    let bank = crate::gabor::GaborBank {
        scale_count: scales,
        orientation_count: orients,
        kernel_size: ksize,
        ..default_bank()
    };
    bank.validate()?;
    let ds = load_dataset(data)?;
    if ds.order() != 2 {
        return usage(format!("gabor needs order-2 samples, got dims {:?}", ds.dims()));
    }
    let lifted = gabor_lift_dataset(&ds, &bank)?;
    save_dataset(&lifted, out)?;
    eprintln!("lifted {} images into {} channels", lifted.len(), bank.channel_count());
    println!("dims={}", join(lifted.dims()));
    Ok(())
}

fn cmd_synth(
    out: &Path,
    classes: usize,
    per_class: usize,
    dims: &[usize],
    subdims: &[usize],
    noise: f64,
    seed: u64,
) -> Outcome {
    if classes == 0 || per_class == 0 {
        return usage("--classes and --per-class must be >= 1");
    }
    if dims.len() != subdims.len() || dims.iter().zip(subdims).any(|(&d, &r)| r == 0 || r > d) {
        return usage(format!("--subdims {subdims:?} must fit inside --dims {dims:?}"));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return usage(format!("--noise must be >= 0, got {noise}"));
    }
    let ds = synth_clusters(classes, per_class, dims, subdims, noise, seed)?;
    save_dataset(&ds, out)?;
    eprintln!("wrote {} samples to {}", ds.len(), out.display());
    println!("seed={seed}");
    println!("dims={}", join(ds.dims()));
    println!("samples={}", ds.len());
    Ok(())
}
