//! Rate-quality curve generation over the lossy codec's qshift ladder.

use super::bdrate::{RateCurve, RatePoint};
use super::fidelity;
use crate::bitstream::measure_rate;
use crate::codec::CodecKind;
use crate::error::{Error, Result};
use crate::pipeline::{decode, encode, EncoderConfig};
use crate::tensor::FeatureSequence;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub qshift: u8,
    pub bytes: usize,
    pub bits_per_element: f64,
    pub cosine: f64,
    pub mse: f64,
}

/// One encode/decode per distinct qshift, ordered by increasing rate.
pub fn sweep_points(seq: &FeatureSequence, base: &EncoderConfig, qshifts: &[u8]) -> Result<Vec<SweepPoint>> {
    let mut qs = qshifts.to_vec();
    qs.sort_unstable();
    qs.dedup();
    if qs.len() < 2 {
        return Err(Error::TooFewPoints(qs.len()));
    }
    let elements = seq.element_count();
    let mut out = Vec::with_capacity(qs.len());
    for q in qs {
        let mut cfg = base.clone();
        cfg.codec.kind = CodecKind::RefLossy;
        cfg.codec.qshift = q;
        let bytes = encode(seq, &cfg)?;
        let rec = decode(&bytes)?;
        let f = fidelity(seq, &rec)?;
        let rate = measure_rate(bytes.len(), seq.len(), 1.0, elements);
        out.push(SweepPoint { qshift: q, bytes: bytes.len(), bits_per_element: rate.bits_per_element, cosine: f.cosine, mse: f.mse });
    }
    out.sort_by(|a, b| a.bits_per_element.total_cmp(&b.bits_per_element).then(b.qshift.cmp(&a.qshift)));
    Ok(out)
}

/// Collapses points of equal rate (keeping the best quality) into a curve.
pub fn to_curve(points: &[SweepPoint]) -> Result<RateCurve> {
    let mut pts: Vec<RatePoint> = Vec::with_capacity(points.len());
    for p in points {
        match pts.last_mut() {
            Some(last) if last.rate == p.bits_per_element => last.quality = last.quality.max(p.cosine),
            _ => pts.push(RatePoint { rate: p.bits_per_element, quality: p.cosine }),
        }
    }
    RateCurve::new(pts)
}

pub fn sweep(seq: &FeatureSequence, base: &EncoderConfig, qshifts: &[u8]) -> Result<RateCurve> {
    to_curve(&sweep_points(seq, base, qshifts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{FeatureLayer, FeatureSet};

    fn seq() -> FeatureSequence {
        let mut s = 12345u32;
        let mut next = || {
            s = s.wrapping_mul(1664525).wrapping_add(1013904223);
            (s >> 8) as f32 / (1u32 << 24) as f32 - 0.5
        };
        let sets = (0..3)
            .map(|_| {
                let data: Vec<f32> = (0..4 * 16 * 16).map(|_| next()).collect();
                FeatureSet::new(vec![FeatureLayer::new((4, 16, 16), data).unwrap()]).unwrap()
            })
            .collect();
        FeatureSequence::new(sets).unwrap()
    }

    #[test]
    fn rates_fall_with_qshift() {
        let cfg = EncoderConfig { alpha: None, ..EncoderConfig::default() };
        let pts = sweep_points(&seq(), &cfg, &[3, 0, 1, 2, 2]).unwrap();
        assert_eq!(pts.len(), 4);
        let qs: Vec<u8> = pts.iter().map(|p| p.qshift).collect();
        assert_eq!(qs, [3, 2, 1, 0]);
        assert!(pts.windows(2).all(|w| w[0].bits_per_element < w[1].bits_per_element));
        assert_eq!(to_curve(&pts).unwrap().points().len(), 4);
    }

    #[test]
    fn single_qshift() {
        assert!(matches!(sweep(&seq(), &EncoderConfig::default(), &[2, 2]), Err(Error::TooFewPoints(1))));
    }
}
