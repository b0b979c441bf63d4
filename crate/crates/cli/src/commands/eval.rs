use std::collections::BTreeMap;
use std::fmt::Write as _;

use det3d_core::eval::{evaluate, EvalConfig, EvalResult, Frame};
use serde::Serialize;

use super::{read_detections, read_ground_truths};
use crate::args::EvalArgs;
use crate::error::CliResult;
use crate::manifest::RunContext;

#[derive(Serialize)]
struct EvalReport<'a> {
    num_frames: usize,
    config: &'a EvalConfig,
    #[serde(flatten)]
    result: &'a EvalResult<f64>,
}

pub fn eval(ctx: &mut RunContext, args: &EvalArgs) -> CliResult<()> {
    let mut frames: BTreeMap<String, Frame<f64>> = BTreeMap::new();
    for (frame, gt) in read_ground_truths(ctx, &args.ground_truth)? {
        frames.entry(frame).or_default().ground_truths.push(gt);
    }
    for (frame, det) in read_detections(ctx, &args.detections)? {
        frames.entry(frame).or_default().detections.push(det);
    }
    let result = evaluate(&frames, &ctx.config.eval);
    log::info!("evaluated {} frames, mAPH {:?}", frames.len(), result.maph);

    if let Some(path) = &args.pr_csv {
        ctx.write_file(path, pr_csv(&result).as_bytes())?;
    }
    let report = EvalReport {
        num_frames: frames.len(),
        config: &ctx.config.eval,
        result: &result,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    ctx.write_main(text.as_bytes())
}

fn pr_csv(result: &EvalResult<f64>) -> String {
    let mut out = String::from("class_id,metric,score,recall,precision\n");
    for (class, m) in &result.per_class {
        for (metric, curve) in [("ap", &m.pr), ("aph", &m.pr_heading)] {
            for p in curve {
                writeln!(out, "{class},{metric},{},{},{}", p.score, p.recall, p.precision).expect("string write");
            }
        }
    }
    out
}
