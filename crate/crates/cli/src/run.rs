//! Subcommand parsing and dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use svarm::mesh::{load_mesh, MeshFormat, ShapeKind, TriMesh};
use svarm::model::{lipschitz_upper_bound, load_checkpoint, param_count, save_checkpoint, CheckpointMeta, SVarMModel};
use svarm::so3::Axis;
use svarm::train::{
    ablate_representation, ablation_csv, evaluate, fit, robustness_sweep, split_indices, sweep_csv, Label, LabeledDataset,
    LabeledItem, LossKind, Perturbation, Task, TrainConfig,
};
use svarm::varifold::{DiscreteVarifold, Representation};

use crate::datasets::{ingest_mnist, synth_rotation_dataset, MnistOptions, RotationMode, RotationOptions};
use crate::error::{CliError, Result};
use crate::inspect::{inspect_csv, inspect_h};
use crate::manifest::{resolve_manifest, Manifest, TaskKind};

#[derive(Debug, Parser)]
#[command(name = "svarm", version, about = "Support varifold machines on meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rotated copies of a synthetic shape, labelled by the rotation.
    SynthData(SynthArgs),
    /// Extrude MNIST digits from IDX files into closed OFF meshes.
    IngestMnist(IngestArgs),
    /// Train a model on a dataset manifest.
    Train(TrainArgs),
    /// Score a checkpoint on the held-out part of a dataset.
    Eval(EvalArgs),
    /// Score a checkpoint on increasingly perturbed meshes.
    Robustness(RobustnessArgs),
    /// Train one model per representation and compare them.
    Ablate(AblateArgs),
    /// Dump the learned test function on every face of a mesh.
    InspectH(InspectArgs),
    /// Print the layer widths, parameter count and Lipschitz bound.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// blob, ellipsoid, torus or bumped_box.
    #[arg(long, default_value = "blob")]
    shape: String,
    #[arg(long, default_value_t = 8)]
    resolution: usize,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Rotation axis for single-angle labels.
    #[arg(long, default_value = "z", conflicts_with = "full")]
    axis: Axis,
    /// Haar-uniform rotations labelled by their matrices.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 5.0)]
    height_scale: f64,
    #[arg(long, default_value_t = 16)]
    threshold: u8,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Dataset directory or manifest file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.005)]
    lr: f64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Fraction of the dataset used for training.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// Comma-separated layer widths; defaults to d,16,64,outputs.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, default_value = "varifold")]
    representation: Representation,
    /// Rescale every input to the mean training mass.
    #[arg(long)]
    normalize_mass: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Training fraction used when the checkpoint was trained.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// Output directory for `eval_metrics.csv`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RobustnessArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// remove_faces or decimate.
    #[arg(long, default_value = "remove_faces")]
    perturbation: Perturbation,
    /// Comma-separated perturbation levels.
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2,0.4,0.6")]
    levels: Vec<f64>,
    /// Rescale perturbed inputs to the training mass (or the clean mean mass).
    #[arg(long)]
    rescale: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Layer widths to describe without a checkpoint.
    #[arg(long, value_delimiter = ',', required_unless_present = "checkpoint")]
    dims: Option<Vec<usize>>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors go to stderr as `error[code]: message`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::SynthData(a) => synth(a),
        Command::IngestMnist(a) => ingest(a),
        Command::Train(a) => train(a.fit),
        Command::Eval(a) => eval(a),
        Command::Robustness(a) => robustness(a),
        Command::Ablate(a) => ablate(a.fit),
        Command::InspectH(a) => inspect(a),
        Command::Info(a) => info(a),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn synth(a: SynthArgs) -> Result<()> {
    let shape = ShapeKind::from_name(&a.shape).map_err(|e| CliError::Usage(e.to_string()))?;
    let opts = RotationOptions {
        shape,
        resolution: a.resolution,
        samples: a.samples,
        mode: if a.full { RotationMode::Full } else { RotationMode::Axis(a.axis) },
        seed: a.seed,
    };
    let m = synth_rotation_dataset(&opts, &a.out)?;
    log::info!("wrote {} meshes to {}", m.entries.len(), a.out.display());
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let opts = MnistOptions {
        height_scale: a.height_scale,
        threshold: a.threshold,
        ..MnistOptions::default()
    };
    let m = ingest_mnist(&a.images, &a.labels, a.count, &opts, &a.out)?;
    log::info!("wrote {} digits to {}", m.entries.len(), a.out.display());
    Ok(())
}

/// Loaded manifest with its meshes already turned into varifolds.
struct Loaded {
    manifest: Manifest,
    meshes: Vec<(TriMesh, Label)>,
    dataset: LabeledDataset,
}

fn load_data(path: &Path, representation: Representation) -> Result<Loaded> {
    let (file, base) = resolve_manifest(path);
    let manifest = Manifest::load(&file)?;
    let meshes = manifest.load_meshes(&base)?;
    let items = meshes
        .iter()
        .map(|(m, l)| Ok((DiscreteVarifold::from_mesh(m)?, l.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut dataset = LabeledDataset::from_varifolds(items, representation)?;
    if manifest.task == TaskKind::Classification {
        let classes = manifest.num_classes.or(dataset.num_classes()).unwrap_or(2);
        dataset = dataset.with_num_classes(classes)?;
    }
    Ok(Loaded {
        manifest,
        meshes,
        dataset,
    })
}

fn normalized(data: &LabeledDataset, target: Option<f64>) -> Result<LabeledDataset> {
    let Some(t) = target else { return Ok(data.clone()) };
    let items = data
        .items()
        .iter()
        .map(|it| {
            Ok(LabeledItem {
                measure: it.measure.normalize_mass(t)?,
                label: it.label.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = LabeledDataset::new(items)?;
    if let Some(c) = data.num_classes() {
        out = out.with_num_classes(c)?;
    }
    Ok(out)
}

fn train_config(a: &FitArgs, loaded: &Loaded, train: &LabeledDataset) -> Result<TrainConfig> {
    let outputs = loaded.manifest.task.output_dim(loaded.dataset.num_classes());
    let dims = a
        .dims
        .clone()
        .unwrap_or_else(|| vec![loaded.dataset.feature_dim(), 16, 64, outputs]);
    let cfg = TrainConfig {
        dims,
        lr: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: a.seed,
        split_fraction: a.split,
        mass_normalization: if a.normalize_mass { Some(train.mean_mass()) } else { None },
        representation: a.representation,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn loss_kind(task: Task) -> LossKind {
    match task {
        Task::Classification => LossKind::CrossEntropy,
        Task::Regression(_) => LossKind::Mse,
    }
}

fn train(a: FitArgs) -> Result<()> {
    let loaded = load_data(&a.data, a.representation)?;
    let (tr, te) = loaded.dataset.split(a.split, a.seed)?;
    let cfg = train_config(&a, &loaded, &tr)?;
    let task = loaded.manifest.task.task();
    let (model, curve) = fit(&tr, &cfg, loss_kind(task))?;
    let test_metrics = evaluate(&model, &normalized(&te, cfg.mass_normalization)?, task)?;
    log::info!("trained {} epochs in {:.1}s", cfg.epochs, curve.wall_clock_secs);
    create_dir(&a.out)?;
    let meta = CheckpointMeta {
        seed: cfg.seed,
        epochs: cfg.epochs,
        representation: cfg.representation,
        mass_normalization: cfg.mass_normalization,
    };
    let ckpt = a.out.join("checkpoint.json");
    save_checkpoint(&model, &meta, &ckpt)?;
    write(&a.out.join("config.json"), &cfg.to_json())?;
    write(&a.out.join("metrics.csv"), &curve.curve_csv())?;
    write(&a.out.join("test_metrics.csv"), &test_metrics.summary_csv())?;
    print!("{}", test_metrics.summary_csv());
    Ok(())
}

fn check_model(model: &SVarMModel, loaded: &Loaded) -> Result<()> {
    if model.input_dim() != loaded.dataset.feature_dim() {
        return Err(CliError::DimensionMismatch(format!(
            "checkpoint takes {} inputs, dataset features have {}",
            model.input_dim(),
            loaded.dataset.feature_dim()
        )));
    }
    let expected = loaded.manifest.task.output_dim(loaded.dataset.num_classes());
    if model.output_dim() != expected && loaded.manifest.task != TaskKind::Classification {
        return Err(CliError::DimensionMismatch(format!(
            "checkpoint has {} outputs, the task needs {expected}",
            model.output_dim()
        )));
    }
    Ok(())
}

/// Reloads a checkpoint and the held-out part of its dataset.
fn held_out(checkpoint: &Path, data: &Path, split: f64) -> Result<(SVarMModel, CheckpointMeta, Loaded, Vec<usize>)> {
    let (model, meta) = load_checkpoint(checkpoint)?;
    let mut loaded = load_data(data, meta.representation)?;
    check_model(&model, &loaded)?;
    if let Some(c) = loaded.dataset.num_classes() {
        if c < model.output_dim() {
            loaded.dataset = loaded.dataset.with_num_classes(model.output_dim())?;
        }
    }
    let (_, ids) = split_indices(loaded.dataset.len(), split, meta.seed)?;
    Ok((model, meta, loaded, ids))
}

fn eval(a: EvalArgs) -> Result<()> {
    let (model, meta, loaded, ids) = held_out(&a.checkpoint, &a.data, a.split)?;
    let test = normalized(&loaded.dataset.subset(&ids), meta.mass_normalization)?;
    let metrics = evaluate(&model, &test, loaded.manifest.task.task())?;
    let csv = metrics.summary_csv();
    match a.out {
        Some(dir) => {
            create_dir(&dir)?;
            write(&dir.join("eval_metrics.csv"), &csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn robustness(a: RobustnessArgs) -> Result<()> {
    let (model, meta, loaded, ids) = held_out(&a.checkpoint, &a.data, a.split)?;
    if a.levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(CliError::Usage("levels must lie in [0, 1]".into()));
    }
    let meshes: Vec<_> = ids.iter().map(|&i| loaded.meshes[i].clone()).collect();
    let rescale = if a.rescale {
        Some(meta.mass_normalization.unwrap_or(loaded.dataset.subset(&ids).mean_mass()))
    } else {
        meta.mass_normalization
    };
    let task = loaded.manifest.task.task();
    let rows = robustness_sweep(
        &model,
        &meshes,
        meta.representation,
        task,
        a.perturbation,
        &a.levels,
        rescale,
        a.seed,
    )?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write(&a.out, &sweep_csv(&rows, task))
}

fn ablate(a: FitArgs) -> Result<()> {
    let loaded = load_data(&a.data, Representation::Varifold)?;
    let (tr, te) = loaded.dataset.split(a.split, a.seed)?;
    let cfg = train_config(&a, &loaded, &tr)?;
    let task = loaded.manifest.task.task();
    let (tr, te) = (normalized(&tr, cfg.mass_normalization)?, normalized(&te, cfg.mass_normalization)?);
    let cfg = TrainConfig {
        mass_normalization: None,
        ..cfg
    };
    let rows = ablate_representation(&tr, &te, &cfg, task)?;
    create_dir(&a.out)?;
    let csv = ablation_csv(&rows, task);
    write(&a.out.join("ablation.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let (model, meta) = load_checkpoint(&a.checkpoint)?;
    let mesh = load_mesh(&a.mesh, MeshFormat::from_path(&a.mesh)?)?;
    let rows = inspect_h(&model, meta.representation, &mesh)?;
    write(&a.out, &inspect_csv(&rows, model.output_dim()))
}

fn info(a: InfoArgs) -> Result<()> {
    let model = match (&a.checkpoint, &a.dims) {
        (Some(path), _) => load_checkpoint(path)?.0,
        (None, Some(dims)) => SVarMModel::init(dims, 0).map_err(|e| CliError::Usage(e.to_string()))?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let dims: Vec<String> = model.dims().iter().map(usize::to_string).collect();
    println!("dims: {}", dims.join(","));
    println!("param_count: {}", param_count(model.dims()));
    if a.checkpoint.is_some() {
        println!("lipschitz_bound: {}", lipschitz_upper_bound(model.mlp()));
    }
    Ok(())
}
