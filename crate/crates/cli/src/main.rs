//! `tubelet`: build thermal transfer fields, tubes and droplet vectors from
//! trajectory files and run the clustering, classification, detection and
//! skeleton action experiments on them.

mod action;
mod args;
mod error;
mod experiments;
mod figures;
mod manifest;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::{ConfigArgs, Format, Scene, TrajInput};
use crate::error::{exit, CliResult};

#[derive(Parser, Debug)]
#[command(name = "tubelet", version, about = "Tube-and-droplet trajectory representation")]
struct Cli {
    /// Log progress to stderr (-vv for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labeled synthetic scene as trajectory JSONL.
    Synth(SynthArgs),
    /// Build a thermal transfer field (binary plus JSON sidecar).
    BuildField(BuildFieldArgs),
    /// Build tubes and write their quad meshes as JSON.
    Tube(TubeArgs),
    /// Compute droplet vectors as CSV, optionally with polar plots.
    Droplet(DropletArgs),
    /// Cluster trajectories with droplet features and the baselines.
    Cluster(ClusterArgs),
    /// Train and test a classifier on droplet vectors.
    Classify(ClassifyArgs),
    /// Calibrate abnormality detection on normal trajectories and evaluate it.
    Detect(DetectArgs),
    /// Clustering accuracy under noise and omitted points.
    Robustness(RobustnessArgs),
    /// Skeleton action recognition.
    #[command(subcommand)]
    Action3d(ActionCommand),
    /// Render figures from saved droplets, fields and ROC curves.
    Export(ExportArgs),
}

#[derive(clap::Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "intersection")]
    pub scene: Scene,
    /// Trajectories per lane.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random walks to append.
    #[arg(long, default_value_t = 0)]
    pub walks: usize,
    #[arg(long, default_value_t = 40)]
    pub walk_steps: usize,
    /// Heading noise of the walks in radians per step.
    #[arg(long, default_value_t = 0.8)]
    pub wander: f64,
    /// Label given to walks; unlabeled when omitted.
    #[arg(long)]
    pub walk_label: Option<String>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct BuildFieldArgs {
    #[command(flatten)]
    pub input: TrajInput,
    /// Binary field file; the sidecar goes to `<out>.json`.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the per-direction heatmap panels as PNG.
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    /// Pixels per cell in the heatmap.
    #[arg(long, default_value_t = 4)]
    pub png_scale: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::Args, Debug)]
pub struct TubeArgs {
    /// Field written by `build-field`.
    #[arg(long)]
    pub field: PathBuf,
    #[command(flatten)]
    pub input: TrajInput,
    /// Only this trajectory; the output is then a single mesh instead of a list.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::Args, Debug)]
pub struct DropletArgs {
    #[command(flatten)]
    pub input: TrajInput,
    /// Field to use; built from the input trajectories when omitted.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// CSV with header id,d_1,...,d_N.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Directory for one polar SVG per trajectory.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::Args, Debug)]
pub struct ClusterArgs {
    /// Labeled trajectories; a synthetic scene is generated from the seed when omitted.
    #[arg(long = "traj", short = 'i')]
    pub traj: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Scene to generate when no input is given [default: fifteen-routes if k = 15, else intersection].
    #[arg(long, value_enum)]
    pub scene: Option<Scene>,
    /// Trajectories per lane for a generated scene.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Number of clusters [default: number of labels].
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated subset of droplet+sc, ed+kmeans, ed+sc, dtw+kmeans, dtw+sc.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long, short, default_value = "tubelet-out/cluster")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::Args, Debug)]
pub struct ClassifyArgs {
    /// Labeled trajectories.
    #[arg(long, alias = "traj", short = 'i')]
    pub train: PathBuf,
    /// Held-out test file. Without it, `--splits` seeded 50/50 splits of the training file are used.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = 4)]
    pub splits: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub classifier: ClassifierArg,
    #[arg(long, short, default_value = "tubelet-out/classify")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::Args, Debug)]
pub struct DetectArgs {
    /// Normal trajectories used for calibration.
    #[arg(long)]
    pub train: PathBuf,
    /// Mixed test trajectories.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub format: Option<Format>,
    /// Test trajectories with this label are truly abnormal.
    #[arg(long, default_value = "abnormal")]
    pub abnormal_label: String,
    /// ROC curve CSV [default: <out>/roc.csv].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write roc.svg.
    #[arg(long)]
    pub plot: bool,
    #[arg(long, short, default_value = "tubelet-out/detect")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::Args, Debug)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub input: TrajInput,
    /// Number of clusters [default: number of labels].
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, short, default_value = "tubelet-out/robustness")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierArg {
    Linear,
    Knn,
}

impl From<ClassifierArg> for tubelet::experiment::Classifier {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Linear => Self::Linear,
            ClassifierArg::Knn => Self::Knn,
        }
    }
}

// Parsed once per process, so variant size does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand, Debug)]
pub enum ActionCommand {
    /// Generate synthetic gesture sequences as skeleton JSONL.
    Synth(ActionSynthArgs),
    /// Convert per-sequence skeleton text files to skeleton JSONL.
    Convert(ConvertArgs),
    /// Store training sequences, settings and body-point weights as a model.
    Train(ActionTrainArgs),
    /// Recognize test sequences with a trained model.
    Eval(ActionEvalArgs),
}

#[derive(clap::Args, Debug)]
pub struct ActionSynthArgs {
    #[arg(long, default_value_t = 6)]
    pub per_action: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct ConvertArgs {
    /// Joints per frame.
    #[arg(long, default_value_t = 20)]
    pub joints: usize,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Text files named like a01_s01_e01_skeleton.txt.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ActionTrainArgs {
    /// Labeled skeleton JSONL.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Tune per-body-point weights by leave-one-out kNN accuracy.
    #[arg(long)]
    pub tune: bool,
    /// Weight candidates for tuning.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
    pub candidates: Vec<f64>,
    /// Sphere sampling: 26 or ico42.
    #[arg(long, default_value = "26")]
    pub sphere: String,
    /// Cells per axis of the aligned volume.
    #[arg(long)]
    pub volume: Option<usize>,
    /// Half-width of the aligned volume in torso lengths.
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub root: Option<usize>,
    #[arg(long)]
    pub torso: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(clap::Args, Debug)]
pub struct ActionEvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Skeleton JSONL; labels, when present, are used for accuracy.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, value_enum, default_value = "knn")]
    pub classifier: ClassifierArg,
    #[arg(long, short, default_value = "tubelet-out/action3d")]
    pub out: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct ExportArgs {
    /// Droplet CSV; one polar SVG per row.
    #[arg(long)]
    pub droplets: Option<PathBuf>,
    /// Field file; per-direction heatmap panels as PNG.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// ROC CSV with header fpr,tpr; rendered as SVG.
    #[arg(long)]
    pub roc: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub png_scale: usize,
    #[arg(long, short, default_value = "tubelet-out/figures")]
    pub out: PathBuf,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth(a) => pipeline::synth(a),
        Command::BuildField(a) => pipeline::build_field(a),
        Command::Tube(a) => pipeline::tube(a),
        Command::Droplet(a) => pipeline::droplet(a),
        Command::Cluster(a) => experiments::cluster(a),
        Command::Classify(a) => experiments::classify(a),
        Command::Detect(a) => experiments::detect(a),
        Command::Robustness(a) => experiments::robustness(a),
        Command::Action3d(c) => action::run(c),
        Command::Export(a) => figures::export(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
