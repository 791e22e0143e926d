//! Rate, fidelity and complexity evaluation.
//!
//! Quality here is a feature-space proxy (cosine similarity between original
//! and decoded features). It is not a task metric such as mAP or MOTA.

pub mod bdrate;
pub mod complexity;
pub mod report;
pub mod sweep;

pub use bdrate::{bd_rate, RateCurve, RatePoint};
pub use complexity::{aggregate, ComplexityRatios, ComplexityReport};
pub use report::{read_curve, write_curve, ReportRow};
pub use sweep::{sweep, sweep_points, SweepPoint};

use crate::error::{Error, Result};
use crate::tensor::FeatureSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct Fidelity {
    /// MSE of each layer index over all timesteps.
    pub layer_mse: Vec<f64>,
    /// Element-weighted mean squared error over the whole sequence.
    pub mse: f64,
    /// `10·log10(peak² / mse)` with the original's value range as peak.
    pub psnr: f64,
    /// Cosine similarity of the flattened sequences.
    pub cosine: f64,
}

pub fn fidelity(x: &FeatureSequence, y: &FeatureSequence) -> Result<Fidelity> {
    if x.len() != y.len() || x.shape_signature() != y.shape_signature() {
        return Err(Error::ShapeMismatch("sequences are not shape-congruent".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    let layers = x.shape_signature().len();
    let mut sse = vec![0.0f64; layers];
    let mut count = vec![0usize; layers];
    let (mut dot, mut nx, mut ny) = (0.0f64, 0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (a, b) in x.sets().iter().zip(y.sets()) {
        for (li, (la, lb)) in a.layers().iter().zip(b.layers()).enumerate() {
            for (&p, &q) in la.data().iter().zip(lb.data()) {
                let (p, q) = (p as f64, q as f64);
                sse[li] += (p - q) * (p - q);
                dot += p * q;
                nx += p * p;
                ny += q * q;
                lo = lo.min(p);
                hi = hi.max(p);
            }
            count[li] += la.len();
        }
    }
    let total: usize = count.iter().sum();
    let layer_mse = sse.iter().zip(&count).map(|(&s, &n)| if n == 0 { 0.0 } else { s / n as f64 }).collect();
    let mse = if total == 0 { 0.0 } else { sse.iter().sum::<f64>() / total as f64 };
    let peak = if hi > lo { hi - lo } else { 1.0 };
    let psnr = if mse == 0.0 { f64::INFINITY } else { 10.0 * (peak * peak / mse).log10() };
    let cosine = match (nx > 0.0, ny > 0.0) {
        (true, true) => dot / (nx.sqrt() * ny.sqrt()),
        (false, false) => 1.0,
        _ => 0.0,
    };
    Ok(Fidelity { layer_mse, mse, psnr, cosine })
}
