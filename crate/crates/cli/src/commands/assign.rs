use std::collections::{BTreeMap, BTreeSet};

use det3d_core::assign::{
    assign_targets, ota_assign, AssignOptions, Assignment, AssignmentResult, Candidate, CostMatrix,
};
use det3d_core::io::{read_detection_records, DetectionRecord};
use det3d_core::{Box3D64, GroundTruth64};
use serde::{Deserialize, Serialize};

use super::{group_by_frame, per_frame, read_ground_truths};
use crate::args::AssignArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::RunContext;

type FrameProblem = (Vec<GroundTruth64>, Vec<(usize, Candidate<f64>)>);

/// A raw assignment problem, for checking the greedy rule by hand.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostProblem {
    #[serde(default)]
    frame_id: Option<String>,
    cost: Vec<Vec<f64>>,
    budgets: Vec<usize>,
}

/// One output line per frame. `candidates` are 0-based record indices in
/// the candidate file; `assignments[j]` is a gt index within the frame or
/// null for background.
#[derive(Debug, Serialize)]
struct FrameAssignment {
    frame_id: String,
    candidates: Vec<usize>,
    assignments: Vec<Option<usize>>,
    budgets: Vec<usize>,
    used: Vec<usize>,
}

impl FrameAssignment {
    fn new(frame_id: String, candidates: Vec<usize>, r: AssignmentResult) -> Self {
        Self {
            frame_id,
            candidates,
            assignments: r.assignments.iter().map(|a| a.gt()).collect(),
            budgets: r.budgets,
            used: r.used,
        }
    }
}

fn to_jsonl(lines: &[FrameAssignment]) -> Vec<u8> {
    let mut out = Vec::new();
    for line in lines {
        serde_json::to_writer(&mut out, line).expect("writing to memory");
        out.push(b'\n');
    }
    out
}

pub fn assign(ctx: &mut RunContext, args: &AssignArgs) -> CliResult<()> {
    if let Some(path) = &args.cost {
        let bytes = ctx.read_input(path)?;
        let problem: CostProblem =
            serde_json::from_slice(&bytes).map_err(|e| CliError::InputFormat(format!("{}: {e}", path.display())))?;
        let cost = CostMatrix::from_rows(&problem.cost).map_err(|e| CliError::input(path, e))?;
        let result = ota_assign(&cost, &problem.budgets).map_err(|e| CliError::input(path, e))?;
        let line = FrameAssignment::new(problem.frame_id.unwrap_or_default(), (0..cost.cols()).collect(), result);
        return ctx.write_main(&to_jsonl(&[line]));
    }

    let (gt_path, cand_path) = match (&args.gts, &args.candidates) {
        (Some(g), Some(c)) => (g, c),
        _ => return Err(CliError::Usage("assign needs --gts and --candidates, or --cost".into())),
    };
    let gts = group_by_frame(read_ground_truths(ctx, gt_path)?);
    let bytes = ctx.read_input(cand_path)?;
    let records = read_detection_records(bytes.as_slice()).map_err(|e| CliError::input(cand_path, e))?;

    let num_classes = gts
        .values()
        .flatten()
        .map(|g| g.class_id)
        .chain(records.iter().map(|(_, r)| r.class_id))
        .max()
        .map_or(1, |c| c as usize + 1);
    let mut candidates: BTreeMap<String, Vec<(usize, Candidate<f64>)>> = BTreeMap::new();
    for (index, (line, record)) in records.iter().enumerate() {
        let candidate = to_candidate(record, num_classes)
            .map_err(|reason| CliError::InputFormat(format!("{}: line {line}: {reason}", cand_path.display())))?;
        candidates
            .entry(record.frame_id.clone())
            .or_default()
            .push((index, candidate));
    }

    let frames: BTreeSet<String> = gts.keys().chain(candidates.keys()).cloned().collect();
    let problems: BTreeMap<String, FrameProblem> = frames
        .into_iter()
        .map(|f| {
            let g = gts.get(&f).cloned().unwrap_or_default();
            let c = select(candidates.remove(&f).unwrap_or_default(), &ctx.config.assign);
            (f, (g, c))
        })
        .collect();
    let options = AssignOptions {
        budget_iou: ctx.config.assign.iou_kind,
    };
    let lines = per_frame(ctx, &problems, |(gts, cands)| {
        let indices: Vec<usize> = cands.iter().map(|(i, _)| *i).collect();
        if gts.is_empty() || cands.is_empty() {
            let empty = AssignmentResult {
                assignments: vec![Assignment::Background; cands.len()],
                budgets: vec![0; gts.len()],
                used: vec![0; gts.len()],
            };
            return Ok((indices, empty));
        }
        let list: Vec<Candidate<f64>> = cands.iter().map(|(_, c)| c.clone()).collect();
        let (_, result) = assign_targets(gts, &list, &options).map_err(CliError::from_core)?;
        Ok((indices, result))
    })?;
    let lines: Vec<FrameAssignment> = lines
        .into_iter()
        .map(|(frame, (indices, result))| FrameAssignment::new(frame, indices, result))
        .collect();
    ctx.write_main(&to_jsonl(&lines))
}

/// Keeps candidates above the score threshold, then the `top_m` best
/// (stable on ties), restoring file order.
fn select(
    mut cands: Vec<(usize, Candidate<f64>)>,
    config: &crate::config::AssignConfig,
) -> Vec<(usize, Candidate<f64>)> {
    cands.retain(|(_, c)| c.iou_pred > config.score_threshold);
    if cands.len() > config.top_m {
        cands.sort_by(|a, b| b.1.iou_pred.total_cmp(&a.1.iou_pred));
        cands.truncate(config.top_m);
        cands.sort_by_key(|(i, _)| *i);
    }
    cands
}

/// Without explicit probabilities the score is put on the record's class.
fn to_candidate(r: &DetectionRecord, num_classes: usize) -> Result<Candidate<f64>, String> {
    let bbox = Box3D64::from_array(r.bbox).map_err(|e| e.to_string())?;
    let class_probs = match &r.class_probs {
        Some(p) => {
            if p.len() < num_classes {
                return Err(format!("class_probs has {} entries, need {num_classes}", p.len()));
            }
            if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err("class_probs must lie in [0, 1]".into());
            }
            p.clone()
        }
        None => {
            let mut p = vec![0.0; num_classes];
            p[r.class_id as usize] = r.score;
            p
        }
    };
    if !(0.0..=1.0).contains(&r.score) {
        return Err(format!("score {} outside [0, 1]", r.score));
    }
    Ok(Candidate {
        bbox,
        class_probs,
        iou_pred: r.score,
    })
}
