//! Temporal downsampling of feature sets and linear-interpolation upsampling.

use crate::error::{Error, Result};
use crate::tensor::{FeatureLayer, FeatureSequence, FeatureSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemporalRatio {
    #[default]
    X1,
    X2,
}

impl TemporalRatio {
    pub fn from_factor(f: u32) -> Result<Self> {
        match f {
            1 => Ok(TemporalRatio::X1),
            2 => Ok(TemporalRatio::X2),
            _ => Err(Error::InvalidConfig(format!(
                "temporal ratio {f} unsupported, only 1 and 2 are allowed"
            ))),
        }
    }

    pub fn factor(self) -> u32 {
        match self {
            TemporalRatio::X1 => 1,
            TemporalRatio::X2 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalPlan {
    pub ratio: TemporalRatio,
    pub original_count: usize,
    pub kept_indices: Vec<usize>,
}

impl TemporalPlan {
    /// 2x keeps the even indices, plus the final index when it is odd.
    pub fn new(ratio: TemporalRatio, original_count: usize) -> Self {
        let kept_indices = match ratio {
            TemporalRatio::X1 => (0..original_count).collect(),
            TemporalRatio::X2 => {
                let mut kept: Vec<usize> = (0..original_count).step_by(2).collect();
                if original_count > 0 && (original_count - 1) % 2 == 1 {
                    kept.push(original_count - 1);
                }
                kept
            }
        };
        TemporalPlan { ratio, original_count, kept_indices }
    }

    pub fn kept_count(&self) -> usize {
        self.kept_indices.len()
    }
}

pub fn downsample(seq: &FeatureSequence, ratio: TemporalRatio) -> Result<(FeatureSequence, TemporalPlan)> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let plan = TemporalPlan::new(ratio, seq.len());
    let kept = plan.kept_indices.iter().map(|&i| seq.sets()[i].clone()).collect();
    Ok((FeatureSequence::new(kept)?, plan))
}

fn midpoint(past: &FeatureSet, future: &FeatureSet) -> FeatureSet {
    let layers = past
        .layers()
        .iter()
        .zip(future.layers())
        .map(|(a, b)| {
            let data = a.data().iter().zip(b.data()).map(|(&p, &f)| (p + f) / 2.0).collect();
            FeatureLayer::from_parts_unchecked(a.shape(), data)
        })
        .collect();
    FeatureSet::new(layers).expect("non-empty layer list")
}

/// Reinserts each discarded set as the element-wise mean of its immediate
/// kept neighbours.
pub fn upsample(kept: FeatureSequence, plan: &TemporalPlan) -> Result<FeatureSequence> {
    if kept.len() != plan.kept_count() {
        return Err(Error::PlanMismatch(format!(
            "plan keeps {} sets, received {}",
            plan.kept_count(),
            kept.len()
        )));
    }
    if plan.ratio == TemporalRatio::X1 {
        return Ok(kept);
    }
    let expected = TemporalPlan::new(plan.ratio, plan.original_count);
    if expected.kept_indices != plan.kept_indices {
        return Err(Error::PlanMismatch("kept indices disagree with the 2x rule".into()));
    }
    let kept = kept.into_sets();
    let mut out: Vec<FeatureSet> = Vec::with_capacity(plan.original_count);
    let mut slot: Vec<Option<usize>> = vec![None; plan.original_count];
    for (k, &idx) in plan.kept_indices.iter().enumerate() {
        slot[idx] = Some(k);
    }
    for t in 0..plan.original_count {
        match slot[t] {
            Some(k) => out.push(kept[k].clone()),
            None => {
                // the 2x rule guarantees both neighbours were kept
                let past = slot[t - 1].expect("past neighbour kept");
                let future = slot[t + 1].expect("future neighbour kept");
                out.push(midpoint(&kept[past], &kept[future]));
            }
        }
    }
    FeatureSequence::new(out)
}
