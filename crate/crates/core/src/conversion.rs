//! Feature conversion: tile the reduced tensor into one monochrome frame,
//! min-max normalize it, quantize to `bitdepth` bits, and the inverses.
//!
//! The quantizer multiplies by `2^bitdepth` and clamps, while the dequantizer
//! divides by `2^bitdepth - 1`. The two are deliberately not exact inverses;
//! the round trip error on `[0, 1]` stays within `2^-bitdepth`.

use crate::error::{Error, Result};
use crate::stats::{mean_var, ReducedStats};
use crate::tensor::LayerShape;
use crate::transform::ReducedFeature;

pub const DEFAULT_BITDEPTH: u8 = 10;

/// Real-valued single-plane frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

/// Integer frame handed to the inner codec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedFrame {
    pub height: usize,
    pub width: usize,
    pub bitdepth: u8,
    pub samples: Vec<u16>,
}

impl PackedFrame {
    pub fn max_sample(bitdepth: u8) -> u16 {
        ((1u32 << bitdepth) - 1) as u16
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackLayout {
    pub grid_rows: u16,
    pub grid_cols: u16,
    pub channel_h: u16,
    pub channel_w: u16,
    pub channel_count: u16,
}

impl PackLayout {
    /// Near-square raster grid: `ceil(sqrt(C))` columns.
    pub fn for_shape(shape: LayerShape) -> Result<Self> {
        let c = shape.channels;
        let mut cols = (c as f64).sqrt() as usize;
        while cols * cols < c {
            cols += 1;
        }
        while cols > 0 && (cols - 1) * (cols - 1) >= c {
            cols -= 1;
        }
        let rows = if cols == 0 { 0 } else { c.div_ceil(cols) };
        let field = |v: usize, name: &str| {
            u16::try_from(v).map_err(|_| Error::LayoutMismatch(format!("{name} {v} exceeds u16")))
        };
        let layout = PackLayout {
            grid_rows: field(rows, "grid rows")?,
            grid_cols: field(cols, "grid cols")?,
            channel_h: field(shape.height, "channel height")?,
            channel_w: field(shape.width, "channel width")?,
            channel_count: field(c, "channel count")?,
        };
        layout.frame_dims_checked()?;
        Ok(layout)
    }

    pub fn frame_height(&self) -> usize {
        self.grid_rows as usize * self.channel_h as usize
    }

    pub fn frame_width(&self) -> usize {
        self.grid_cols as usize * self.channel_w as usize
    }

    pub fn shape(&self) -> LayerShape {
        LayerShape::new(self.channel_count as usize, self.channel_h as usize, self.channel_w as usize)
    }

    pub fn frame_dims_checked(&self) -> Result<(usize, usize)> {
        if (self.grid_rows as usize * self.grid_cols as usize) < self.channel_count as usize {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} grid cannot hold {} channels",
                self.grid_rows, self.grid_cols, self.channel_count
            )));
        }
        Ok((self.frame_height(), self.frame_width()))
    }
}

/// Tiles channels row-major; channel `c` lands in tile `(c / cols, c % cols)`.
/// Unoccupied tiles are zero.
pub fn pack(z: &ReducedFeature) -> Result<(RawFrame, PackLayout)> {
    if z.is_empty() {
        return Err(Error::EmptyTensor);
    }
    let layout = PackLayout::for_shape(z.shape())?;
    let (fh, fw) = (layout.frame_height(), layout.frame_width());
    let (ch, cw, cols) = (z.height(), z.width(), layout.grid_cols as usize);
    let mut data = vec![0.0f64; fh * fw];
    for c in 0..z.channels() {
        let (tr, tc) = (c / cols, c % cols);
        let plane = z.channel(c);
        for i in 0..ch {
            let row = &mut data[(tr * ch + i) * fw + tc * cw..][..cw];
            for (o, &v) in row.iter_mut().zip(&plane[i * cw..(i + 1) * cw]) {
                *o = v as f64;
            }
        }
    }
    Ok((RawFrame { height: fh, width: fw, data }, layout))
}

pub fn unpack(frame: &RawFrame, layout: &PackLayout) -> Result<ReducedFeature> {
    let (fh, fw) = layout.frame_dims_checked()?;
    if frame.height != fh || frame.width != fw || frame.data.len() != fh * fw {
        return Err(Error::LayoutMismatch(format!(
            "frame {}x{} does not match layout {}x{}",
            frame.height, frame.width, fh, fw
        )));
    }
    let shape = layout.shape();
    let (ch, cw, cols) = (shape.height, shape.width, layout.grid_cols as usize);
    let mut data = Vec::with_capacity(shape.len());
    for c in 0..shape.channels {
        let (tr, tc) = (c / cols, c % cols);
        for i in 0..ch {
            let row = &frame.data[(tr * ch + i) * fw + tc * cw..][..cw];
            data.extend(row.iter().map(|&v| v as f32));
        }
    }
    Ok(ReducedFeature::from_parts_unchecked(shape, data))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams {
    pub min: f64,
    pub max: f64,
}

impl NormParams {
    /// Maps a normalized value back to feature units.
    pub fn denormalize(&self, v: f64) -> f64 {
        v * (self.max - self.min) + self.min
    }
}

/// Min-max normalization into `[0, 1]`. A constant frame maps to zeros.
pub fn normalize(frame: &RawFrame) -> (RawFrame, NormParams) {
    let (min, max) = frame
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let params = NormParams { min, max };
    let range = max - min;
    let data = if range > 0.0 {
        frame.data.iter().map(|&v| ((v - min) / range).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; frame.data.len()]
    };
    (RawFrame { height: frame.height, width: frame.width, data }, params)
}

/// `clamp(floor(v · 2^bitdepth), 0, 2^bitdepth - 1)`.
pub fn quantize(frame: &RawFrame, bitdepth: u8) -> PackedFrame {
    let levels = (1u32 << bitdepth) as f64;
    let max = PackedFrame::max_sample(bitdepth) as f64;
    let samples = frame.data.iter().map(|&v| (v * levels).floor().clamp(0.0, max) as u16).collect();
    PackedFrame { height: frame.height, width: frame.width, bitdepth, samples }
}

/// `q / (2^bitdepth - 1)`.
pub fn dequantize(frame: &PackedFrame) -> RawFrame {
    let max = PackedFrame::max_sample(frame.bitdepth) as f64;
    RawFrame {
        height: frame.height,
        width: frame.width,
        data: frame.samples.iter().map(|&q| q as f64 / max).collect(),
    }
}

/// Re-standardizes the decoded tensor to the signalled mean and standard
/// deviation. A constant input becomes the signalled mean everywhere.
pub fn refine_reduced(z: &ReducedFeature, stats: ReducedStats) -> ReducedFeature {
    let (mu, var) = mean_var(z.data());
    let sigma = var.sqrt();
    let (target_mu, target_sigma) = (stats.mu as f64, stats.sigma as f64);
    let data = if sigma > 0.0 && !z.is_empty() {
        z.data().iter().map(|&v| (((v as f64 - mu) / sigma) * target_sigma + target_mu) as f32).collect()
    } else {
        vec![stats.mu; z.len()]
    };
    ReducedFeature::from_parts_unchecked(z.shape(), data)
}
