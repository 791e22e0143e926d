//! Encoder/decoder complexity relative to the split network halves.
//!
//! The encoder runs on the edge in place of the remote half of the network,
//! the decoder runs on the server in place of the edge half, so a ratio below
//! one is a net saving.

use crate::error::{Error, Result};

/// Wall-clock seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityReport {
    pub encoder_seconds: f64,
    pub decoder_seconds: f64,
    pub nn_part1_seconds: f64,
    pub nn_part2_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityRatios {
    /// encoder / NN part 2
    pub encoder: f64,
    /// decoder / NN part 1
    pub decoder: f64,
}

impl ComplexityRatios {
    pub fn encoder_flagged(&self) -> bool {
        self.encoder >= 1.0
    }

    pub fn decoder_flagged(&self) -> bool {
        self.decoder >= 1.0
    }
}

impl ComplexityReport {
    pub fn ratios(&self) -> Result<ComplexityRatios> {
        let check = |v: f64, name| if v > 0.0 && v.is_finite() { Ok(v) } else { Err(Error::ZeroTiming(name)) };
        let enc = check(self.encoder_seconds, "encoder")?;
        let dec = check(self.decoder_seconds, "decoder")?;
        let p1 = check(self.nn_part1_seconds, "nn_part1")?;
        let p2 = check(self.nn_part2_seconds, "nn_part2")?;
        Ok(ComplexityRatios { encoder: enc / p2, decoder: dec / p1 })
    }
}

/// Weighted arithmetic mean of `(value, weight)` rows.
pub fn aggregate(rows: &[(f64, f64)]) -> Result<f64> {
    let w: f64 = rows.iter().map(|r| r.1).sum();
    if rows.is_empty() || w <= 0.0 || rows.iter().any(|r| r.1 < 0.0) {
        return Err(Error::InvalidConfig("aggregation needs positive weights".into()));
    }
    Ok(rows.iter().map(|(v, wt)| v * wt).sum::<f64>() / w)
}
