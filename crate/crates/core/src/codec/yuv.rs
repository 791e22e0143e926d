//! Raw planar YUV 4:0:0: luma only, one little-endian u16 word per sample,
//! frames concatenated in temporal order.

use crate::conversion::PackedFrame;
use crate::error::{Error, Result};

/// Serializes frames; every sample must fit in the frame's bit depth.
pub fn write_yuv400(frames: &[PackedFrame]) -> Result<Vec<u8>> {
    let total: usize = frames.iter().map(|f| f.samples.len()).sum();
    let mut out = Vec::with_capacity(total * 2);
    for f in frames {
        let max = PackedFrame::max_sample(f.bitdepth);
        for &s in &f.samples {
            if s > max {
                return Err(Error::SampleOutOfRange { value: s as u32, bitdepth: f.bitdepth });
            }
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_yuv400(bytes: &[u8], width: usize, height: usize, bitdepth: u8) -> Result<Vec<PackedFrame>> {
    if !bytes.len().is_multiple_of(2) {
        return Err(Error::OddByteLength(bytes.len()));
    }
    let frame_bytes = width * height * 2;
    if frame_bytes == 0 || !bytes.len().is_multiple_of(frame_bytes) {
        return Err(Error::CorruptPayload(format!(
            "{} bytes is not a whole number of {width}x{height} frames",
            bytes.len()
        )));
    }
    let max = PackedFrame::max_sample(bitdepth);
    bytes
        .chunks_exact(frame_bytes)
        .map(|chunk| {
            let samples = chunk
                .chunks_exact(2)
                .map(|b| {
                    let s = u16::from_le_bytes([b[0], b[1]]);
                    if s > max {
                        Err(Error::SampleOutOfRange { value: s as u32, bitdepth })
                    } else {
                        Ok(s)
                    }
                })
                .collect::<Result<Vec<u16>>>()?;
            Ok(PackedFrame { height, width, bitdepth, samples })
        })
        .collect()
}

pub fn write_yuv400_10(frames: &[PackedFrame]) -> Result<Vec<u8>> {
    if let Some(f) = frames.iter().find(|f| f.bitdepth != 10) {
        return Err(Error::InvalidConfig(format!("expected 10-bit frames, got {}-bit", f.bitdepth)));
    }
    write_yuv400(frames)
}

pub fn read_yuv400_10(bytes: &[u8], width: usize, height: usize) -> Result<Vec<PackedFrame>> {
    read_yuv400(bytes, width, height, 10)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(samples: Vec<u16>) -> PackedFrame {
        PackedFrame { height: 2, width: 2, bitdepth: 10, samples }
    }

    #[test]
    fn byte_layout() {
        let bytes = write_yuv400_10(&[frame(vec![0, 1, 2, 3])]).unwrap();
        assert_eq!(bytes, vec![0, 0, 1, 0, 2, 0, 3, 0]);
    }

    #[test]
    fn round_trip() {
        let frames = vec![frame(vec![0, 1023, 512, 7]), frame(vec![9, 8, 1000, 1])];
        let bytes = write_yuv400_10(&frames).unwrap();
        assert_eq!(read_yuv400_10(&bytes, 2, 2).unwrap(), frames);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            write_yuv400_10(&[frame(vec![0, 1024, 0, 0])]),
            Err(Error::SampleOutOfRange { value: 1024, .. })
        ));
        assert!(matches!(
            read_yuv400_10(&[0, 4, 0, 0, 0, 0, 0, 0], 2, 2),
            Err(Error::SampleOutOfRange { value: 1024, .. })
        ));
    }

    #[test]
    fn odd_and_partial_lengths() {
        assert!(matches!(read_yuv400_10(&[0, 0, 0], 2, 2), Err(Error::OddByteLength(3))));
        assert!(matches!(read_yuv400_10(&[0; 6], 2, 2), Err(Error::CorruptPayload(_))));
    }
}
