use crate::error::{Error, Result};
use crate::geom::Box3D;
use crate::scalar::Real;

/// Class label.
pub type ClassId = u32;

/// Scored, class-labeled box.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub bbox: Box3D<T>,
    pub class_id: ClassId,
    score: T,
    pub model_id: Option<String>,
}

impl<T: Real> Detection<T> {
    pub fn new(bbox: Box3D<T>, class_id: ClassId, score: T) -> Result<Self> {
        if !(score >= T::zero() && score <= T::one()) {
            return Err(Error::InvalidParameter(format!("score {score} outside [0, 1]")));
        }
        Ok(Self {
            bbox,
            class_id,
            score,
            model_id: None,
        })
    }

    pub fn with_model(mut self, model_id: impl Into<String>) -> Self {
        self.model_id = Some(model_id.into());
        self
    }

    pub fn score(&self) -> T {
        self.score
    }

    /// Replaces the score, clamping into `[0, 1]`.
    pub fn set_score_clamped(&mut self, score: T) {
        self.score = score.max(T::zero()).min(T::one());
    }
}

/// Annotated box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthObject<T> {
    pub bbox: Box3D<T>,
    pub class_id: ClassId,
}

impl<T> GroundTruthObject<T> {
    pub fn new(bbox: Box3D<T>, class_id: ClassId) -> Self {
        Self { bbox, class_id }
    }
}

/// Indices of `items` sorted by descending key; equal keys keep input order.
pub(crate) fn order_by_score_desc<T: Real>(scores: impl Iterator<Item = T>) -> Vec<usize> {
    let scores: Vec<T> = scores.collect();
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}
