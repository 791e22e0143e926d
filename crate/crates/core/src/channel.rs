//! Channel adjustment: drop near-constant channels of the reduced tensor and
//! mean-fill them back at the decoder.

use crate::error::{Error, Result};
use crate::tensor::LayerShape;
use crate::transform::ReducedFeature;

pub const DEFAULT_ALPHA: f64 = 0.1;

/// `removed[c]` is true when channel `c` was dropped. Equality looks at
/// `removed` only.
#[derive(Debug, Clone)]
pub struct ActivityMap {
    pub removed: Vec<bool>,
    /// Encoder-side threshold that produced the map. Not transmitted, so
    /// `None` for maps read back from a stream.
    pub threshold: Option<f64>,
}

impl PartialEq for ActivityMap {
    fn eq(&self, other: &Self) -> bool {
        self.removed == other.removed
    }
}

impl ActivityMap {
    /// Map that keeps all `channels`.
    pub fn keep_all(channels: usize) -> Self {
        ActivityMap { removed: vec![false; channels], threshold: None }
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn kept_count(&self) -> usize {
        self.removed.iter().filter(|r| !**r).count()
    }

    /// Packed bitfield, channel 0 in the least significant bit of byte 0.
    pub fn to_bits(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.removed.len().div_ceil(8)];
        for (c, _) in self.removed.iter().enumerate().filter(|(_, r)| **r) {
            out[c / 8] |= 1 << (c % 8);
        }
        out
    }

    pub fn from_bits(bits: &[u8], channels: usize) -> Result<Self> {
        if bits.len() != channels.div_ceil(8) {
            return Err(Error::LengthMismatch { expected: channels.div_ceil(8), actual: bits.len() });
        }
        let removed: Vec<bool> = (0..channels).map(|c| bits[c / 8] >> (c % 8) & 1 == 1).collect();
        // padding bits must be zero
        if (channels..bits.len() * 8).any(|c| bits[c / 8] >> (c % 8) & 1 == 1) {
            return Err(Error::InvalidField("activity map padding bits set".into()));
        }
        let map = ActivityMap { removed, threshold: None };
        if map.kept_count() == 0 && channels > 0 {
            return Err(Error::InvalidField("activity map removes every channel".into()));
        }
        Ok(map)
    }
}

/// `max - min` of every channel plane.
pub fn channel_ranges(z: &ReducedFeature) -> Vec<f64> {
    (0..z.channels())
        .map(|c| {
            let (lo, hi) = z
                .channel(c)
                .iter()
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if lo > hi {
                0.0
            } else {
                hi as f64 - lo as f64
            }
        })
        .collect()
}

/// Removes channels whose range falls strictly below `alpha × mean(range)`.
/// If that would remove everything, the widest channel is kept.
pub fn activity_map(ranges: &[f64], alpha: f64) -> Result<ActivityMap> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if ranges.is_empty() {
        return Err(Error::EmptyTensor);
    }
    let mean = ranges.iter().sum::<f64>() / ranges.len() as f64;
    let threshold = alpha * mean;
    let mut removed: Vec<bool> = ranges.iter().map(|&r| r < threshold).collect();
    if removed.iter().all(|r| *r) {
        let widest = ranges
            .iter()
            .enumerate()
            .fold(0, |best, (c, &r)| if r > ranges[best] { c } else { best });
        removed[widest] = false;
    }
    Ok(ActivityMap { removed, threshold: Some(threshold) })
}

pub fn drop_channels(z: &ReducedFeature, map: &ActivityMap) -> Result<ReducedFeature> {
    if map.len() != z.channels() {
        return Err(Error::LengthMismatch { expected: z.channels(), actual: map.len() });
    }
    let plane = z.shape().plane();
    let mut data = Vec::with_capacity(map.kept_count() * plane);
    for c in (0..z.channels()).filter(|&c| !map.removed[c]) {
        data.extend_from_slice(z.channel(c));
    }
    Ok(ReducedFeature::from_parts_unchecked(
        LayerShape::new(map.kept_count(), z.height(), z.width()),
        data,
    ))
}

/// Puts kept channels back at their indices; every removed channel becomes the
/// per-position mean of the kept channels.
pub fn restore_channels(kept: &ReducedFeature, map: &ActivityMap) -> Result<ReducedFeature> {
    if kept.channels() != map.kept_count() {
        return Err(Error::LengthMismatch { expected: map.kept_count(), actual: kept.channels() });
    }
    let plane = kept.shape().plane();
    let fill: Vec<f32> = if map.kept_count() == map.len() {
        Vec::new()
    } else {
        let n = kept.channels() as f64;
        (0..plane)
            .map(|i| ((0..kept.channels()).fold(0.0f64, |acc, c| acc + kept.channel(c)[i] as f64) / n) as f32)
            .collect()
    };
    let mut data = Vec::with_capacity(map.len() * plane);
    let mut next = 0;
    for &removed in &map.removed {
        if removed {
            data.extend_from_slice(&fill);
        } else {
            data.extend_from_slice(kept.channel(next));
            next += 1;
        }
    }
    Ok(ReducedFeature::from_parts_unchecked(
        LayerShape::new(map.len(), kept.height(), kept.width()),
        data,
    ))
}
