mod assign;
mod cloud;
mod detections;
mod eval;

use std::collections::BTreeMap;
use std::path::Path;

use det3d_core::{io, Detection64, GroundTruth64};
use rayon::prelude::*;

use crate::args::{Command, FuseMethod};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunContext;

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Voxelize(_) => "voxelize",
            Command::Tta(_) => "tta",
            Command::Assign(_) => "assign",
            Command::Fuse(_) => "fuse",
            Command::Ensemble(_) => "ensemble",
            Command::Eval(_) => "eval",
            Command::GtpasteBuild(_) => "gtpaste-build",
            Command::GtpasteApply(_) => "gtpaste-apply",
        }
    }

    /// Folds command-specific flags into the config so the manifest records
    /// the settings actually used.
    pub fn apply_overrides(&self, config: &mut PipelineConfig) {
        match self {
            Command::Voxelize(a) => {
                if let Some(v) = &a.voxel_size {
                    config.voxel.voxel_size = [v[0], v[1], v[2]];
                }
            }
            Command::Tta(a) => {
                if let Some(t) = a.iou_threshold {
                    config.tta.iou_match_threshold = t;
                }
            }
            Command::Assign(a) => {
                if let Some(k) = a.iou {
                    config.assign.iou_kind = k.into();
                }
                if let Some(m) = a.top_m {
                    config.assign.top_m = m;
                }
            }
            Command::Fuse(a) => {
                if let Some(t) = a.iou_threshold {
                    match a.method {
                        FuseMethod::Wbf => config.fusion.wbf_iou_threshold = t,
                        FuseMethod::Nms => config.fusion.nms_iou_threshold = t,
                    }
                }
                if let Some(m) = a.max_boxes {
                    config.fusion.max_boxes = m;
                }
            }
            Command::Ensemble(a) => {
                if let Some(t) = a.iou_threshold {
                    config.fusion.wbf_iou_threshold = t;
                }
            }
            Command::Eval(a) => {
                if let Some(k) = a.iou {
                    config.eval.iou_kind = k.into();
                }
            }
            Command::GtpasteBuild(_) | Command::GtpasteApply(_) => {}
        }
    }

    pub fn execute(&self, ctx: &mut RunContext) -> CliResult<()> {
        match self {
            Command::Voxelize(a) => cloud::voxelize(ctx, a),
            Command::Tta(a) => detections::tta(ctx, a),
            Command::Assign(a) => assign::assign(ctx, a),
            Command::Fuse(a) => detections::fuse(ctx, a),
            Command::Ensemble(a) => detections::ensemble(ctx, a),
            Command::Eval(a) => eval::eval(ctx, a),
            Command::GtpasteBuild(a) => cloud::gtpaste_build(ctx, a),
            Command::GtpasteApply(a) => cloud::gtpaste_apply(ctx, a),
        }
    }
}

fn read_detections(ctx: &mut RunContext, path: &Path) -> CliResult<Vec<(String, Detection64)>> {
    let bytes = ctx.read_input(path)?;
    io::read_detections(bytes.as_slice()).map_err(|e| CliError::input(path, e))
}

fn read_ground_truths(ctx: &mut RunContext, path: &Path) -> CliResult<Vec<(String, GroundTruth64)>> {
    let bytes = ctx.read_input(path)?;
    io::read_ground_truths(bytes.as_slice()).map_err(|e| CliError::input(path, e))
}

fn group_by_frame<V>(items: impl IntoIterator<Item = (String, V)>) -> BTreeMap<String, Vec<V>> {
    let mut out: BTreeMap<String, Vec<V>> = BTreeMap::new();
    for (frame, v) in items {
        out.entry(frame).or_default().push(v);
    }
    out
}

/// Runs `f` on every frame using the --jobs pool. Results come back in
/// frame-id order whatever order the workers finish in.
fn per_frame<V, R, F>(ctx: &RunContext, frames: &BTreeMap<String, V>, f: F) -> CliResult<Vec<(String, R)>>
where
    V: Sync,
    R: Send,
    F: Fn(&V) -> CliResult<R> + Sync + Send,
{
    let items: Vec<(&String, &V)> = frames.iter().collect();
    ctx.install(|| items.par_iter().map(|(k, v)| f(v).map(|r| ((*k).clone(), r))).collect())
}

fn detections_jsonl(frames: &[(String, Vec<Detection64>)]) -> Vec<u8> {
    let mut buf = Vec::new();
    io::write_detections(
        &mut buf,
        frames
            .iter()
            .flat_map(|(f, dets)| dets.iter().map(move |d| (f.as_str(), d))),
    )
    .expect("writing to memory");
    buf
}
