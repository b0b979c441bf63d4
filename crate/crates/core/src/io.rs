//! JSON Lines interchange for detections, annotations and the object
//! database.
//!
//! Detections: `{"frame_id", "class_id", "score", "box": [cx,cy,cz,l,w,h,yaw]}`
//! with optional `"model_id"` and `"class_probs"`. Ground truth: the same
//! without `score`. Object database: `{"class_id", "box", "points"}` with
//! box-local point rows.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::augment::ObjectDbEntry;
use crate::detection::{ClassId, Detection, GroundTruthObject};
use crate::error::{Error, Result};
use crate::geom::Box3D;
use crate::pointcloud::PointCloud;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub frame_id: String,
    pub class_id: ClassId,
    pub score: f64,
    #[serde(rename = "box")]
    pub bbox: [f64; 7],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthRecord {
    pub frame_id: String,
    pub class_id: ClassId,
    #[serde(rename = "box")]
    pub bbox: [f64; 7],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDbRecord {
    pub class_id: ClassId,
    #[serde(rename = "box")]
    pub bbox: [f64; 7],
    pub points: Vec<Vec<f64>>,
}

/// Parses one JSON value per non-blank line, keeping 1-based line numbers.
pub fn read_jsonl<R: BufRead, D: DeserializeOwned>(reader: R) -> Result<Vec<(usize, D)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Schema {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

pub fn write_jsonl<W: Write, S: Serialize>(mut writer: W, items: impl IntoIterator<Item = S>) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, &item)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

fn to_box<T: Real>(v: [f64; 7], line: usize) -> Result<Box3D<T>> {
    Box3D::from_array(v.map(T::lit)).map_err(|e| Error::Schema {
        line,
        reason: e.to_string(),
    })
}

fn box_array<T: Real>(b: &Box3D<T>) -> [f64; 7] {
    b.to_array().map(Real::to_f64_lossy)
}

impl DetectionRecord {
    pub fn from_detection<T: Real>(frame_id: &str, det: &Detection<T>) -> Self {
        Self {
            frame_id: frame_id.to_string(),
            class_id: det.class_id,
            score: det.score().to_f64_lossy(),
            bbox: box_array(&det.bbox),
            model_id: det.model_id.clone(),
            class_probs: None,
        }
    }

    pub fn to_detection<T: Real>(&self, line: usize) -> Result<Detection<T>> {
        let bbox = to_box(self.bbox, line)?;
        let mut det = Detection::new(bbox, self.class_id, T::lit(self.score)).map_err(|e| Error::Schema {
            line,
            reason: e.to_string(),
        })?;
        det.model_id = self.model_id.clone();
        Ok(det)
    }
}

impl GroundTruthRecord {
    pub fn from_ground_truth<T: Real>(frame_id: &str, gt: &GroundTruthObject<T>) -> Self {
        Self {
            frame_id: frame_id.to_string(),
            class_id: gt.class_id,
            bbox: box_array(&gt.bbox),
        }
    }

    pub fn to_ground_truth<T: Real>(&self, line: usize) -> Result<GroundTruthObject<T>> {
        Ok(GroundTruthObject::new(to_box(self.bbox, line)?, self.class_id))
    }
}

/// Reads detections as `(frame_id, detection)` in file order.
pub fn read_detections<T: Real, R: BufRead>(reader: R) -> Result<Vec<(String, Detection<T>)>> {
    read_jsonl::<_, DetectionRecord>(reader)?
        .into_iter()
        .map(|(line, r)| Ok((r.frame_id.clone(), r.to_detection(line)?)))
        .collect()
}

/// Reads raw detection records (keeping optional class probabilities).
pub fn read_detection_records<R: BufRead>(reader: R) -> Result<Vec<(usize, DetectionRecord)>> {
    read_jsonl(reader)
}

pub fn write_detections<'a, T: Real + 'a, W: Write>(
    writer: W,
    dets: impl IntoIterator<Item = (&'a str, &'a Detection<T>)>,
) -> Result<()> {
    write_jsonl(
        writer,
        dets.into_iter().map(|(f, d)| DetectionRecord::from_detection(f, d)),
    )
}

pub fn read_ground_truths<T: Real, R: BufRead>(reader: R) -> Result<Vec<(String, GroundTruthObject<T>)>> {
    read_jsonl::<_, GroundTruthRecord>(reader)?
        .into_iter()
        .map(|(line, r)| Ok((r.frame_id.clone(), r.to_ground_truth(line)?)))
        .collect()
}

pub fn write_ground_truths<'a, T: Real + 'a, W: Write>(
    writer: W,
    gts: impl IntoIterator<Item = (&'a str, &'a GroundTruthObject<T>)>,
) -> Result<()> {
    write_jsonl(
        writer,
        gts.into_iter().map(|(f, g)| GroundTruthRecord::from_ground_truth(f, g)),
    )
}

pub fn read_object_db<T: Real, R: BufRead>(reader: R) -> Result<Vec<ObjectDbEntry<T>>> {
    read_jsonl::<_, ObjectDbRecord>(reader)?
        .into_iter()
        .map(|(line, r)| {
            let bbox = to_box(r.bbox, line)?;
            let schema = |reason: String| Error::Schema { line, reason };
            let channels = r.points.first().map_or(3, Vec::len);
            if channels < 3 {
                return Err(schema("points need at least x, y, z".into()));
            }
            let mut points = PointCloud::new(channels - 3);
            for row in &r.points {
                let row: Vec<T> = row.iter().map(|&v| T::lit(v)).collect();
                points.push(&row).map_err(|e| schema(e.to_string()))?;
            }
            Ok(ObjectDbEntry {
                bbox,
                class_id: r.class_id,
                points,
            })
        })
        .collect()
}

pub fn write_object_db<T: Real, W: Write>(writer: W, db: &[ObjectDbEntry<T>]) -> Result<()> {
    write_jsonl(
        writer,
        db.iter().map(|e| ObjectDbRecord {
            class_id: e.class_id,
            bbox: box_array(&e.bbox),
            points: e
                .points
                .points()
                .map(|p| p.iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detections_round_trip() {
        let d = Detection::new(Box3D::new([1.0, 2.0, 3.0], [4.0, 2.0, 1.5], 0.5).unwrap(), 2, 0.75)
            .unwrap()
            .with_model("m1");
        let mut buf = Vec::new();
        write_detections(&mut buf, [("f7", &d)]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"box\":[1.0,2.0,3.0,4.0,2.0,1.5,0.5]"));
        let back = read_detections::<f64, _>(&buf[..]).unwrap();
        assert_eq!(back, vec![("f7".to_string(), d)]);
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let text =
            "{\"frame_id\":\"a\",\"class_id\":0,\"box\":[0,0,0,1,1,1,0]}\n\n{\"frame_id\":\"a\",\"class_id\":0}\n";
        match read_ground_truths::<f64, _>(text.as_bytes()) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad_box = "{\"frame_id\":\"a\",\"class_id\":0,\"box\":[0,0,0,-1,1,1,0]}\n";
        assert!(matches!(
            read_ground_truths::<f64, _>(bad_box.as_bytes()),
            Err(Error::Schema { line: 1, .. })
        ));
        let extra = "{\"frame_id\":\"a\",\"class_id\":0,\"box\":[0,0,0,1,1,1,0],\"oops\":1}\n";
        assert!(read_ground_truths::<f64, _>(extra.as_bytes()).is_err());
        let score = "{\"frame_id\":\"a\",\"class_id\":0,\"score\":1.5,\"box\":[0,0,0,1,1,1,0]}\n";
        assert!(read_detections::<f64, _>(score.as_bytes()).is_err());
    }

    #[test]
    fn object_db_round_trip() {
        let entry = ObjectDbEntry {
            bbox: Box3D::new([1.0, 0.0, 0.0], [2.0, 2.0, 2.0], 0.1).unwrap(),
            class_id: 1,
            points: PointCloud::from_flat(vec![0.5, 0.0, 0.0, 0.25], 1).unwrap(),
        };
        let mut buf = Vec::new();
        write_object_db(&mut buf, std::slice::from_ref(&entry)).unwrap();
        assert_eq!(read_object_db::<f64, _>(&buf[..]).unwrap(), vec![entry]);
    }
}
