//! `PCF1` binary point cloud files.
//!
//! Layout: magic `PCF1`, little-endian `u32` point count, `u32` channels per
//! point (at least 3, counting x, y, z), then `count * channels`
//! little-endian `f32` values, row-major.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"PCF1";
const HEADER_LEN: usize = 12;

pub fn decode<T: Real>(bytes: &[u8]) -> Result<PointCloud<T>> {
    let malformed = |offset: usize, reason: &str| Error::MalformedPointCloud {
        offset,
        reason: reason.to_string(),
    };
    if bytes.len() < 4 {
        return Err(malformed(bytes.len(), "truncated magic"));
    }
    if &bytes[..4] != MAGIC {
        return Err(malformed(0, "bad magic, expected PCF1"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(malformed(bytes.len(), "truncated header"));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let channels = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if channels < 3 {
        return Err(malformed(8, "channels_per_point must be at least 3"));
    }
    let expected = count
        .checked_mul(channels)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| malformed(4, "point_count overflows"))?;
    if bytes.len() < expected {
        // offset of the first incomplete value
        let body = bytes.len() - HEADER_LEN;
        return Err(malformed(HEADER_LEN + body / 4 * 4, "truncated point data"));
    }
    if bytes.len() > expected {
        return Err(malformed(expected, "trailing bytes after point data"));
    }
    let mut data = Vec::with_capacity(count * channels);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if i % channels < 3 && !v.is_finite() {
            return Err(malformed(HEADER_LEN + 4 * i, "non-finite coordinate"));
        }
        data.push(T::from_f32(v).ok_or_else(|| malformed(HEADER_LEN + 4 * i, "unrepresentable value"))?);
    }
    PointCloud::from_flat(data, channels - 3)
}

pub fn encode<T: Real>(cloud: &PointCloud<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + cloud.as_flat().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(cloud.len() as u32).to_le_bytes());
    out.extend_from_slice(&(cloud.stride() as u32).to_le_bytes());
    for v in cloud.as_flat() {
        out.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
    }
    out
}

pub fn read<T: Real, R: Read>(mut reader: R) -> Result<PointCloud<T>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn write<T: Real, W: Write>(cloud: &PointCloud<T>, mut writer: W) -> Result<()> {
    writer.write_all(&encode(cloud))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_exact_for_f32_values() {
        let cloud = PointCloud::<f64>::from_flat(vec![1.5, -2.25, 0.125, 0.75, 3.0, 4.0, 5.0, 0.5], 1).unwrap();
        let bytes = encode(&cloud);
        assert_eq!(&bytes[..4], b"PCF1");
        assert_eq!(bytes.len(), 12 + 8 * 4);
        assert_eq!(decode::<f64>(&bytes).unwrap().as_flat(), cloud.as_flat());
    }

    #[test]
    fn empty_cloud() {
        let bytes = encode(&PointCloud::<f32>::new(0));
        let cloud = decode::<f32>(&bytes).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        let good = encode(&PointCloud::<f32>::from_xyz(&[[1.0, 2.0, 3.0]]));
        let err = decode::<f32>(&good[..good.len() - 2]).unwrap_err();
        assert!(matches!(err, Error::MalformedPointCloud { offset: 20, .. }), "{err}");
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(
            decode::<f32>(&bad),
            Err(Error::MalformedPointCloud { offset: 0, .. })
        ));
        let mut two = good.clone();
        two[8] = 2;
        assert!(matches!(
            decode::<f32>(&two),
            Err(Error::MalformedPointCloud { offset: 8, .. })
        ));
        assert!(decode::<f32>(&good[..6]).is_err());
        let mut long = good;
        long.push(0);
        assert!(matches!(
            decode::<f32>(&long),
            Err(Error::MalformedPointCloud { offset: 24, .. })
        ));
    }
}
