//! Inner codec for packed monochrome frames.
//!
//! Two reference backends are built in. `ref_lossless` predicts every sample
//! from its left neighbour (the first sample of a row from the sample above,
//! the frame origin from mid-grey), zigzag-maps the residual and writes it as
//! an order-0 Exp-Golomb code; each frame ends byte-aligned. `ref_lossy`
//! right-shifts samples by `qshift` first and runs the lossless path at the
//! reduced depth; the decoder reconstructs bin midpoints. The third backend
//! hands raw YUV to an external tool, see [`external`].

pub mod bits;
pub mod external;
pub mod yuv;

use crate::conversion::PackedFrame;
use crate::error::{Error, Result};
use bits::{unzigzag, zigzag, BitReader, BitWriter};

pub const MAX_QSHIFT: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CodecKind {
    #[default]
    RefLossless,
    RefLossy,
    External,
}

impl CodecKind {
    pub fn id(self) -> u8 {
        match self {
            CodecKind::RefLossless => 0,
            CodecKind::RefLossy => 1,
            CodecKind::External => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(CodecKind::RefLossless),
            1 => Ok(CodecKind::RefLossy),
            2 => Ok(CodecKind::External),
            _ => Err(Error::InvalidField(format!("unknown codec id {id}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecKind::RefLossless => "ref_lossless",
            CodecKind::RefLossy => "ref_lossy",
            CodecKind::External => "external",
        }
    }
}

impl std::str::FromStr for CodecKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ref_lossless" => Ok(CodecKind::RefLossless),
            "ref_lossy" => Ok(CodecKind::RefLossy),
            "external" => Ok(CodecKind::External),
            _ => Err(Error::InvalidConfig(format!("unknown codec {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecConfig {
    pub kind: CodecKind,
    pub qshift: u8,
    pub intra_period: u32,
    pub external_encode: Option<String>,
    pub external_decode: Option<String>,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            kind: CodecKind::RefLossless,
            qshift: 0,
            intra_period: 32,
            external_encode: None,
            external_decode: None,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.intra_period == 0 {
            return Err(Error::InvalidConfig("intra period must be at least 1".into()));
        }
        if self.qshift > MAX_QSHIFT {
            return Err(Error::InvalidConfig(format!("qshift {} outside 0..={MAX_QSHIFT}", self.qshift)));
        }
        Ok(())
    }

    /// Shift actually applied to samples.
    fn shift(&self) -> u8 {
        match self.kind {
            CodecKind::RefLossy => self.qshift,
            _ => 0,
        }
    }

    fn template(&self, encode: bool) -> Result<&str> {
        let t = if encode { &self.external_encode } else { &self.external_decode };
        t.as_deref().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "external codec needs {}",
                if encode { "external_cmd_encode" } else { "external_cmd_decode" }
            ))
        })
    }
}

/// Dimensions the decoder needs to rebuild frames from a payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameMeta {
    pub width: usize,
    pub height: usize,
    pub count: usize,
    pub bitdepth: u8,
}

fn check_frames(frames: &[PackedFrame]) -> Result<FrameMeta> {
    let first = frames.first().ok_or(Error::EmptyInput)?;
    let meta = FrameMeta { width: first.width, height: first.height, count: frames.len(), bitdepth: first.bitdepth };
    if !(1..=16).contains(&meta.bitdepth) {
        return Err(Error::InvalidConfig(format!("bit depth {} unsupported", meta.bitdepth)));
    }
    for f in frames {
        if (f.width, f.height, f.bitdepth) != (meta.width, meta.height, meta.bitdepth)
            || f.samples.len() != f.width * f.height
        {
            return Err(Error::ShapeMismatch("inner codec frames must be congruent".into()));
        }
        let max = PackedFrame::max_sample(f.bitdepth);
        if let Some(&s) = f.samples.iter().find(|&&s| s > max) {
            return Err(Error::SampleOutOfRange { value: s as u32, bitdepth: f.bitdepth });
        }
    }
    Ok(meta)
}

fn encode_plane(w: &mut BitWriter, samples: &[u16], width: usize, origin: i32) {
    for (i, row) in samples.chunks_exact(width).enumerate() {
        let mut pred = if i == 0 { origin } else { samples[(i - 1) * width] as i32 };
        for &s in row {
            w.write_ue(zigzag(s as i32 - pred));
            pred = s as i32;
        }
    }
    w.align();
}

fn decode_plane(r: &mut BitReader<'_>, width: usize, height: usize, origin: i32, max: i32) -> Result<Vec<u16>> {
    let mut out: Vec<u16> = Vec::with_capacity(width * height);
    for i in 0..height {
        let mut pred = if i == 0 { origin } else { out[(i - 1) * width] as i32 };
        for _ in 0..width {
            let s = pred
                .checked_add(unzigzag(r.read_ue()?))
                .filter(|s| (0..=max).contains(s))
                .ok_or_else(|| Error::CorruptPayload("sample outside valid range".into()))?;
            out.push(s as u16);
            pred = s;
        }
    }
    r.align();
    Ok(out)
}

fn origin_predictor(depth: u8) -> i32 {
    if depth == 0 {
        0
    } else {
        1 << (depth - 1)
    }
}

pub fn encode_frames(frames: &[PackedFrame], cfg: &CodecConfig) -> Result<Vec<u8>> {
    cfg.validate()?;
    let meta = check_frames(frames)?;
    match cfg.kind {
        CodecKind::External => external::encode(frames, meta, cfg.intra_period, cfg.template(true)?),
        CodecKind::RefLossless | CodecKind::RefLossy => {
            let shift = cfg.shift().min(meta.bitdepth);
            let origin = origin_predictor(meta.bitdepth - shift);
            let mut w = BitWriter::new();
            for f in frames {
                if shift == 0 {
                    encode_plane(&mut w, &f.samples, meta.width, origin);
                } else {
                    let shifted: Vec<u16> = f.samples.iter().map(|&s| s >> shift).collect();
                    encode_plane(&mut w, &shifted, meta.width, origin);
                }
            }
            Ok(w.finish())
        }
    }
}

pub fn decode_frames(payload: &[u8], meta: FrameMeta, cfg: &CodecConfig) -> Result<Vec<PackedFrame>> {
    cfg.validate()?;
    if meta.count == 0 || meta.width == 0 || meta.height == 0 {
        return Err(Error::CorruptPayload("empty frame geometry".into()));
    }
    match cfg.kind {
        CodecKind::External => external::decode(payload, meta, cfg.intra_period, cfg.template(false)?),
        CodecKind::RefLossless | CodecKind::RefLossy => {
            let shift = cfg.shift().min(meta.bitdepth);
            let depth = meta.bitdepth - shift;
            let origin = origin_predictor(depth);
            let max = (1i32 << depth) - 1;
            let mid = if shift == 0 { 0 } else { 1u16 << (shift - 1) };
            let mut r = BitReader::new(payload);
            let mut frames = Vec::with_capacity(meta.count);
            for _ in 0..meta.count {
                let mut samples = decode_plane(&mut r, meta.width, meta.height, origin, max)?;
                if shift > 0 {
                    for s in &mut samples {
                        *s = (*s << shift) + mid;
                    }
                }
                frames.push(PackedFrame { height: meta.height, width: meta.width, bitdepth: meta.bitdepth, samples });
            }
            if r.byte_pos() != payload.len() {
                return Err(Error::CorruptPayload(format!(
                    "{} trailing bytes after {} frames",
                    payload.len() - r.byte_pos(),
                    meta.count
                )));
            }
            Ok(frames)
        }
    }
}
