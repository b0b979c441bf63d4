//! Pipeline configuration: one JSON document, every key optional.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use det3d_core::augment::{tta_set, FadingSchedule, PasteOptions, Placement};
use det3d_core::eval::EvalConfig;
use det3d_core::fusion::{EnsembleConfig, WbfOptions, YawFusion, DEFAULT_MAX_BOXES};
use det3d_core::geom::IouKind;
use det3d_core::pointcloud::VoxelGridSpec;
use det3d_core::{ClassId, TtaTransform64, VoxelGridSpec64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct PipelineConfig {
    pub voxel: VoxelConfig,
    pub tta: TtaConfig,
    pub assign: AssignConfig,
    pub fusion: FusionConfig,
    pub eval: EvalConfig,
    pub gtpaste: GtPasteConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoxelConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub voxel_size: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TtaConfig {
    /// Radians.
    pub yaws: Vec<f64>,
    pub scales: Vec<f64>,
    pub z_offsets: Vec<f64>,
    pub iou_match_threshold: f64,
    pub max_boxes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssignConfig {
    pub iou_kind: IouKind,
    /// Highest-scoring candidates kept per frame.
    pub top_m: usize,
    /// Candidates scoring at or below this are dropped.
    pub score_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub nms_iou_threshold: f64,
    pub wbf_iou_threshold: f64,
    pub max_boxes: usize,
    pub iou_kind: IouKind,
    pub yaw: YawFusion,
    /// `class_id -> (model_id -> weight)`. Empty means weight 1 for every
    /// model seen in the inputs.
    pub ensemble_weights: BTreeMap<ClassId, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GtPasteConfig {
    pub per_class_counts: BTreeMap<ClassId, usize>,
    pub total_epochs: usize,
    pub fade_last: usize,
    /// `None` keeps stored poses; otherwise `[[x_lo, x_hi], [y_lo, y_hi]]`.
    pub resample_range: Option<[[f64; 2]; 2]>,
}

impl Default for VoxelConfig {
    fn default() -> Self {
        let spec = VoxelGridSpec64::waymo_default();
        Self {
            min: spec.min(),
            max: spec.max(),
            voxel_size: spec.voxel_size(),
        }
    }
}

impl Default for TtaConfig {
    fn default() -> Self {
        Self {
            yaws: vec![0.0, -0.13 * PI, -0.07 * PI, 0.07 * PI],
            scales: vec![0.95, 1.05],
            z_offsets: vec![-0.2, 0.2],
            iou_match_threshold: 0.55,
            max_boxes: DEFAULT_MAX_BOXES,
        }
    }
}

impl Default for AssignConfig {
    fn default() -> Self {
        Self {
            iou_kind: IouKind::ThreeD,
            top_m: 512,
            score_threshold: 0.0,
        }
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            nms_iou_threshold: 0.5,
            wbf_iou_threshold: 0.55,
            max_boxes: DEFAULT_MAX_BOXES,
            iou_kind: IouKind::Bev,
            yaw: YawFusion::Full,
            ensemble_weights: BTreeMap::new(),
        }
    }
}

impl Default for GtPasteConfig {
    fn default() -> Self {
        Self {
            per_class_counts: BTreeMap::new(),
            total_epochs: 20,
            fade_last: 5,
            resample_range: None,
        }
    }
}

fn unit_interval(name: &str, v: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} = {v} is outside [0, 1]")))
    }
}

impl PipelineConfig {
    /// Reads and validates a config file. Unknown keys are rejected by name.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.voxel_spec()?;
        self.tta_transforms()?;
        unit_interval("tta.iou_match_threshold", self.tta.iou_match_threshold)?;
        unit_interval("assign.score_threshold", self.assign.score_threshold)?;
        unit_interval("fusion.nms_iou_threshold", self.fusion.nms_iou_threshold)?;
        unit_interval("fusion.wbf_iou_threshold", self.fusion.wbf_iou_threshold)?;
        unit_interval("eval.thresholds.default", self.eval.thresholds.default)?;
        for (class, t) in &self.eval.thresholds.per_class {
            unit_interval(&format!("eval.thresholds.per_class.{class}"), *t)?;
        }
        if self.assign.top_m == 0 {
            return Err(CliError::Usage("assign.top_m must be positive".into()));
        }
        if !self.fusion.ensemble_weights.is_empty() {
            self.ensemble_config(&[]).validate().map_err(CliError::from_core)?;
        }
        self.fading_schedule()?;
        Ok(())
    }

    pub fn voxel_spec(&self) -> CliResult<VoxelGridSpec64> {
        VoxelGridSpec::new(self.voxel.min, self.voxel.max, self.voxel.voxel_size).map_err(CliError::from_core)
    }

    pub fn tta_transforms(&self) -> CliResult<Vec<TtaTransform64>> {
        tta_set(&self.tta.yaws, &self.tta.scales, &self.tta.z_offsets).map_err(CliError::from_core)
    }

    pub fn wbf_options(&self) -> WbfOptions {
        WbfOptions {
            iou_kind: self.fusion.iou_kind,
            yaw: self.fusion.yaw,
        }
    }

    /// Configured weights, or weight 1 for each `(class, model)` pair seen.
    pub fn ensemble_config(&self, seen: &[(ClassId, String)]) -> EnsembleConfig {
        let mut classes = self.fusion.ensemble_weights.clone();
        if classes.is_empty() {
            for (class, model) in seen {
                classes.entry(*class).or_default().insert(model.clone(), 1.0);
            }
        }
        EnsembleConfig {
            classes,
            iou_match_threshold: self.fusion.wbf_iou_threshold,
            max_boxes: self.fusion.max_boxes,
        }
    }

    pub fn fading_schedule(&self) -> CliResult<FadingSchedule> {
        FadingSchedule::new(self.gtpaste.total_epochs, self.gtpaste.fade_last).map_err(CliError::from_core)
    }

    pub fn paste_options(&self) -> PasteOptions<f64> {
        PasteOptions {
            per_class_counts: self.gtpaste.per_class_counts.clone(),
            placement: match self.gtpaste.resample_range {
                None => Placement::Original,
                Some([x_range, y_range]) => Placement::Resample { x_range, y_range },
            },
        }
    }

    /// Canonical serialization used for digests and manifests.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = serde_json::from_str::<PipelineConfig>(r#"{"fusion": {"wbf_thresh": 0.5}}"#).unwrap_err();
        assert!(err.to_string().contains("wbf_thresh"));
    }

    #[test]
    fn defaults_round_trip_exactly() {
        let c = PipelineConfig::default();
        let back: PipelineConfig = serde_json::from_str(&c.to_canonical_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.tta_transforms().unwrap().len(), 16);
        assert_eq!(c.voxel_spec().unwrap().dims(), [1504, 1504, 40]);
    }

    #[test]
    fn partial_config_keeps_other_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"seed": 7, "tta": {"yaws": [0.0]}}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.tta.scales, vec![0.95, 1.05]);
        assert_eq!(c.tta_transforms().unwrap().len(), 4);
    }

    #[test]
    fn rejects_bad_threshold() {
        let mut c = PipelineConfig::default();
        c.fusion.wbf_iou_threshold = 1.5;
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
    }
}
