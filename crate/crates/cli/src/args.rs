use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use det3d_core::geom::IouKind;

const PRECEDENCE: &str = "\
Settings are resolved as: command-line flags, then keys from --config, then \
built-in defaults. Every run that writes --output also writes \
<output>.manifest.json with the resolved config and SHA-256 digests of all \
inputs and outputs. Set DET3D_LOG (error, warn, info, debug, trace) for logs.

Exit codes: 0 success, 2 usage or config error, 3 malformed input, \
4 internal invariant violation.";

#[derive(Debug, Parser)]
#[command(name = "det3d", version, about = "Batch tools for LiDAR 3D detection outputs", after_help = PRECEDENCE)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON pipeline config; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for per-frame work (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Main output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IouArg {
    Bev,
    #[value(name = "3d")]
    ThreeD,
}

impl From<IouArg> for IouKind {
    fn from(v: IouArg) -> Self {
        match v {
            IouArg::Bev => IouKind::Bev,
            IouArg::ThreeD => IouKind::ThreeD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FuseMethod {
    Wbf,
    Nms,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crop and voxelize a PCF1 point cloud; prints a JSON summary.
    Voxelize(VoxelizeArgs),
    /// Undo test-time augmentation on per-variant detections and fuse them.
    Tta(TtaArgs),
    /// Greedy dynamic-k target assignment of candidates to ground truth.
    Assign(AssignArgs),
    /// Per-frame, per-class WBF or NMS over one detection file.
    Fuse(FuseArgs),
    /// Weighted per-class fusion of several models' detections.
    Ensemble(EnsembleArgs),
    /// AP and APH per class against ground truth.
    Eval(EvalArgs),
    /// Build an object database from annotated frames.
    GtpasteBuild(GtpasteBuildArgs),
    /// Paste database objects into one frame for a given epoch.
    GtpasteApply(GtpasteApplyArgs),
}

#[derive(Debug, Args)]
pub struct VoxelizeArgs {
    /// PCF1 point cloud.
    pub input: PathBuf,
    /// Voxel edge lengths, overriding `voxel.voxel_size`.
    #[arg(long, value_delimiter = ',', num_args = 3, value_name = "X,Y,Z")]
    pub voxel_size: Option<Vec<f64>>,
    /// Also write occupied cells as JSON Lines.
    #[arg(long, value_name = "PATH")]
    pub cells: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TtaArgs {
    /// Directory with `variant_<index>.jsonl`, one per configured transform.
    #[arg(long, value_name = "DIR")]
    pub input_dir: PathBuf,
    /// Point cloud to augment with every transform.
    #[arg(long, value_name = "PATH", requires = "emit_clouds")]
    pub cloud: Option<PathBuf>,
    /// Where to write `variant_<index>.pcf` for --cloud.
    #[arg(long, value_name = "DIR", requires = "cloud")]
    pub emit_clouds: Option<PathBuf>,
    /// Overrides `tta.iou_match_threshold`.
    #[arg(long)]
    pub iou_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    /// Ground truth JSON Lines.
    #[arg(long, value_name = "PATH", required_unless_present = "cost", requires = "candidates")]
    pub gts: Option<PathBuf>,
    /// Candidate detections JSON Lines (`class_probs` optional).
    #[arg(long, value_name = "PATH")]
    pub candidates: Option<PathBuf>,
    /// A precomputed problem `{"cost": [[..]], "budgets": [..]}` instead of boxes.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["gts", "candidates"])]
    pub cost: Option<PathBuf>,
    /// Overrides `assign.iou_kind`.
    #[arg(long, value_enum)]
    pub iou: Option<IouArg>,
    /// Overrides `assign.top_m`.
    #[arg(long)]
    pub top_m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Detections JSON Lines.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "wbf")]
    pub method: FuseMethod,
    /// Overrides `fusion.wbf_iou_threshold` or `fusion.nms_iou_threshold`.
    #[arg(long)]
    pub iou_threshold: Option<f64>,
    /// Overrides `fusion.max_boxes`.
    #[arg(long)]
    pub max_boxes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// One detections file per model. A record's `model_id` wins over the
    /// file stem.
    #[arg(long = "input", value_name = "PATH", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Overrides `fusion.wbf_iou_threshold`.
    #[arg(long)]
    pub iou_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub detections: PathBuf,
    #[arg(long = "ground-truth", value_name = "PATH")]
    pub ground_truth: PathBuf,
    /// Overrides `eval.iou_kind`.
    #[arg(long, value_enum)]
    pub iou: Option<IouArg>,
    /// Also write PR curves as CSV.
    #[arg(long, value_name = "PATH")]
    pub pr_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GtpasteBuildArgs {
    /// Directory of `<frame_id>.pcf` clouds.
    #[arg(long, value_name = "DIR")]
    pub clouds: PathBuf,
    /// Ground truth JSON Lines for those frames.
    #[arg(long, value_name = "PATH")]
    pub gts: PathBuf,
}

#[derive(Debug, Args)]
pub struct GtpasteApplyArgs {
    /// Object database JSON Lines.
    #[arg(long, value_name = "PATH")]
    pub db: PathBuf,
    /// Scene cloud; its file stem is the frame id.
    #[arg(long, value_name = "PATH")]
    pub cloud: PathBuf,
    /// Ground truth JSON Lines containing the scene's boxes.
    #[arg(long, value_name = "PATH")]
    pub gts: PathBuf,
    #[arg(long)]
    pub epoch: usize,
    /// Where to write the scene's boxes after pasting (the cloud goes to --output).
    #[arg(long, value_name = "PATH")]
    pub output_gts: PathBuf,
}
