//! Statistical parameters signalled from encoder to decoder.
//!
//! The global parameters of a feature set sum per-layer means and per-layer
//! population variances; they are carried as two bfloat16 values. The reduced
//! parameters are the plain mean and population standard deviation over every
//! element of the reduced tensor, carried as two f32 values.
//!
//! All sums run sequentially in index order in f64 so that streams are
//! reproducible across platforms.

use crate::error::{Error, Result};
use crate::tensor::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalStats {
    pub mu: f32,
    pub sigma: f32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedStats {
    pub mu: f32,
    pub sigma: f32,
}

/// Population mean and variance of `values`, two passes.
pub fn mean_var(values: &[f32]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().fold(0.0f64, |acc, &v| acc + v as f64) / n;
    let var = values
        .iter()
        .fold(0.0f64, |acc, &v| {
            let d = v as f64 - mean;
            acc + d * d
        })
        / n;
    (mean, var)
}

/// Sum of layer means and sum of layer variances, in f64.
pub(crate) fn summed_moments<'a>(layers: impl Iterator<Item = &'a [f32]>) -> Result<(f64, f64)> {
    let mut mu = 0.0f64;
    let mut var = 0.0f64;
    for (i, data) in layers.enumerate() {
        if data.is_empty() {
            return Err(Error::EmptyLayer(i));
        }
        let (m, v) = mean_var(data);
        mu += m;
        var += v;
    }
    Ok((mu, var))
}

/// Global statistics of a feature set: the SUM of per-layer means and the
/// square root of the sum of per-layer population variances.
pub fn global_stats(x: &FeatureSet) -> Result<GlobalStats> {
    let (mu, var) = summed_moments(x.layers().iter().map(|l| l.data()))?;
    Ok(GlobalStats { mu: mu as f32, sigma: var.sqrt() as f32 })
}

/// Mean and population standard deviation over all elements.
pub fn reduced_stats(z: &[f32]) -> Result<ReducedStats> {
    if z.is_empty() {
        return Err(Error::EmptyTensor);
    }
    let (mu, var) = mean_var(z);
    Ok(ReducedStats { mu: mu as f32, sigma: var.sqrt() as f32 })
}

/// Brain floating point: the top 16 bits of an IEEE-754 binary32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bf16(pub u16);

impl Bf16 {
    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn to_f32(self) -> f32 {
        from_bfloat16(self)
    }
}

/// Rounds to nearest, ties to even. Values whose rounding would overflow to
/// infinity saturate at the largest finite bfloat16 of the same sign.
pub fn to_bfloat16(v: f32) -> Result<Bf16> {
    if !v.is_finite() {
        return Err(Error::NonFinite(v as f64));
    }
    let bits = v.to_bits();
    let lsb = (bits >> 16) & 1;
    let rounded = bits.wrapping_add(0x7FFF + lsb) >> 16;
    let out = rounded as u16;
    if out & 0x7F80 == 0x7F80 {
        // exponent all-ones after rounding: saturate
        return Ok(Bf16((bits >> 16) as u16 & 0x8000 | 0x7F7F));
    }
    Ok(Bf16(out))
}

pub fn from_bfloat16(b: Bf16) -> f32 {
    f32::from_bits((b.0 as u32) << 16)
}

impl GlobalStats {
    /// Values as they reach the decoder after bfloat16 signalling.
    pub fn quantized(&self) -> Result<(Bf16, Bf16)> {
        Ok((to_bfloat16(self.mu)?, to_bfloat16(self.sigma)?))
    }

    pub fn from_bf16(mu: Bf16, sigma: Bf16) -> Self {
        GlobalStats { mu: mu.to_f32(), sigma: sigma.to_f32() }
    }
}
