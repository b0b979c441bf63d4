use std::collections::BTreeMap;

use det3d_core::augment::{apply_to_cloud, inverse_to_box};
use det3d_core::fusion::{ensemble_fuse_with, nms_with, wbf_with};
use det3d_core::{pcf, ClassId, Detection64};

use super::{detections_jsonl, group_by_frame, per_frame, read_detections};
use crate::args::{EnsembleArgs, FuseArgs, FuseMethod, TtaArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunContext;

fn by_class(dets: &[Detection64]) -> BTreeMap<ClassId, Vec<Detection64>> {
    let mut out: BTreeMap<ClassId, Vec<Detection64>> = BTreeMap::new();
    for d in dets {
        out.entry(d.class_id).or_default().push(d.clone());
    }
    out
}

pub fn tta(ctx: &mut RunContext, args: &TtaArgs) -> CliResult<()> {
    let transforms = ctx.config.tta_transforms()?;
    if let (Some(cloud_path), Some(dir)) = (&args.cloud, &args.emit_clouds) {
        let bytes = ctx.read_input(cloud_path)?;
        let cloud = pcf::decode::<f64>(&bytes).map_err(|e| CliError::input(cloud_path, e))?;
        for (idx, t) in transforms.iter().enumerate() {
            let out = pcf::encode(&apply_to_cloud(t, &cloud));
            ctx.write_file(&dir.join(format!("variant_{idx}.pcf")), &out)?;
        }
    }

    let mut pooled = Vec::new();
    for (idx, t) in transforms.iter().enumerate() {
        let path = args.input_dir.join(format!("variant_{idx}.jsonl"));
        if !path.is_file() {
            return Err(CliError::InputFormat(format!(
                "missing detections for TTA variant {idx} (expected {})",
                path.display()
            )));
        }
        for (frame, mut det) in read_detections(ctx, &path)? {
            det.bbox = inverse_to_box(t, &det.bbox);
            pooled.push((frame, det));
        }
    }
    log::info!("pooled {} detections from {} variants", pooled.len(), transforms.len());

    let frames = group_by_frame(pooled);
    let threshold = ctx.config.tta.iou_match_threshold;
    let max_boxes = ctx.config.tta.max_boxes;
    let options = ctx.config.wbf_options();
    let fused = per_frame(ctx, &frames, |dets| {
        Ok(by_class(dets)
            .values()
            .flat_map(|d| wbf_with(d, threshold, max_boxes, &options))
            .collect())
    })?;
    ctx.write_main(&detections_jsonl(&fused))
}

pub fn fuse(ctx: &mut RunContext, args: &FuseArgs) -> CliResult<()> {
    let frames = group_by_frame(read_detections(ctx, &args.input)?);
    let fusion = ctx.config.fusion.clone();
    let options = ctx.config.wbf_options();
    let method = args.method;
    let fused = per_frame(ctx, &frames, |dets| {
        Ok(by_class(dets)
            .values()
            .flat_map(|d| match method {
                FuseMethod::Wbf => wbf_with(d, fusion.wbf_iou_threshold, fusion.max_boxes, &options),
                FuseMethod::Nms => {
                    let mut kept = nms_with(d, fusion.nms_iou_threshold, fusion.iou_kind);
                    kept.truncate(fusion.max_boxes);
                    kept
                }
            })
            .collect())
    })?;
    ctx.write_main(&detections_jsonl(&fused))
}

pub fn ensemble(ctx: &mut RunContext, args: &EnsembleArgs) -> CliResult<()> {
    // frame -> model -> detections
    let mut frames: BTreeMap<String, BTreeMap<String, Vec<Detection64>>> = BTreeMap::new();
    let mut seen = Vec::new();
    for path in &args.inputs {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for (frame, det) in read_detections(ctx, path)? {
            let model = det.model_id.clone().unwrap_or_else(|| stem.clone());
            seen.push((det.class_id, model.clone()));
            frames.entry(frame).or_default().entry(model).or_default().push(det);
        }
    }
    seen.sort();
    seen.dedup();
    let config = ctx.config.ensemble_config(&seen);
    config.validate().map_err(CliError::from_core)?;
    let options = ctx.config.wbf_options();
    let fused = per_frame(ctx, &frames, |per_model| {
        ensemble_fuse_with(per_model, &config, &options).map_err(CliError::from_core)
    })?;
    ctx.write_main(&detections_jsonl(&fused))
}
