//! Reduction transform: N multi-scale layers in, one compact tensor out.
//!
//! [`FeatureTransform`] is the plug-in point. The reference implementation
//! [`PyramidFuse`] average-pools every layer of a dyadic pyramid to half the
//! size of the smallest layer and concatenates channels; its inverse
//! replicates each pooled sample over its block. [`Identity`] passes a single
//! layer through. Both share the channel stage: optional importance ordering,
//! truncation to `target_channels`, and the per-channel gain vector.

use crate::error::{Error, Result};
use crate::stats::mean_var;
use crate::tensor::{FeatureLayer, FeatureSet, LayerShape};

/// The single tensor a feature set is reduced to.
pub type ReducedFeature = FeatureLayer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformKind {
    Identity,
    #[default]
    PyramidFuse,
}

impl TransformKind {
    pub fn id(self) -> u8 {
        match self {
            TransformKind::Identity => 0,
            TransformKind::PyramidFuse => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(TransformKind::Identity),
            1 => Ok(TransformKind::PyramidFuse),
            _ => Err(Error::InvalidField(format!("unknown transform id {id}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Identity => "identity",
            TransformKind::PyramidFuse => "pyramid_fuse",
        }
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(TransformKind::Identity),
            "pyramid_fuse" => Ok(TransformKind::PyramidFuse),
            _ => Err(Error::InvalidConfig(format!("unknown transform {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelOrder {
    #[default]
    None,
    VarianceDesc,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformConfig {
    pub kind: TransformKind,
    /// `None` keeps every fused channel.
    pub target_channels: Option<usize>,
    /// Per output channel; `None` means all ones.
    pub gain: Option<Vec<f32>>,
    pub order: ChannelOrder,
}

/// What the decoder needs to invert the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSideInfo {
    pub kind: TransformKind,
    pub original: Vec<LayerShape>,
    /// `permutation[k]` is the fused channel placed at position `k`. Empty
    /// means no reordering.
    pub permutation: Vec<u16>,
    /// One entry per output channel; its length is the output channel count.
    pub gain: Vec<f32>,
}

impl TransformSideInfo {
    pub fn output_channels(&self) -> usize {
        self.gain.len()
    }

    pub fn fused_channels(&self) -> usize {
        self.original.iter().map(|s| s.channels).sum()
    }

    pub fn output_shape(&self) -> Result<LayerShape> {
        let (h, w) = fused_plane(self.kind, &self.original)?;
        Ok(LayerShape::new(self.output_channels(), h, w))
    }

    fn validate(&self) -> Result<()> {
        let fused = self.fused_channels();
        let out = self.output_channels();
        if out == 0 || out > fused {
            return Err(Error::SideInfoMismatch(format!(
                "{out} output channels from {fused} fused channels"
            )));
        }
        if !self.permutation.is_empty() {
            if self.permutation.len() != fused {
                return Err(Error::SideInfoMismatch(format!(
                    "permutation of length {} for {fused} channels",
                    self.permutation.len()
                )));
            }
            let mut seen = vec![false; fused];
            for &p in &self.permutation {
                let p = p as usize;
                if p >= fused || std::mem::replace(&mut seen[p], true) {
                    return Err(Error::SideInfoMismatch("permutation is not a bijection".into()));
                }
            }
        }
        if self.gain.iter().any(|g| *g == 0.0 || !g.is_finite()) {
            return Err(Error::SideInfoMismatch("gain entries must be finite and nonzero".into()));
        }
        Ok(())
    }
}

/// Plug-in interface for reduction transforms.
pub trait FeatureTransform {
    /// Derives the side information for `x`. Data-dependent choices (channel
    /// ordering) are made here, so an encoder can hold them fixed over a
    /// refresh period.
    fn analyze(&self, x: &FeatureSet, cfg: &TransformConfig) -> Result<TransformSideInfo>;
    fn forward(&self, x: &FeatureSet, side: &TransformSideInfo) -> Result<ReducedFeature>;
    fn inverse(&self, z: &ReducedFeature, side: &TransformSideInfo) -> Result<FeatureSet>;
}

/// Spatial size of the fused tensor for a layer signature.
fn fused_plane(kind: TransformKind, sig: &[LayerShape]) -> Result<(usize, usize)> {
    match kind {
        TransformKind::Identity => {
            if sig.len() != 1 {
                return Err(Error::IdentityWithMultipleLayers(sig.len()));
            }
            Ok((sig[0].height, sig[0].width))
        }
        TransformKind::PyramidFuse => {
            for pair in sig.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if a.height != 2 * b.height || a.width != 2 * b.width {
                    return Err(Error::NonDyadicPyramid(format!(
                        "{}x{} followed by {}x{}",
                        a.height, a.width, b.height, b.width
                    )));
                }
            }
            let last = sig.last().ok_or_else(|| Error::NonDyadicPyramid("no layers".into()))?;
            if last.height < 2 || last.width < 2 || last.height % 2 != 0 || last.width % 2 != 0 {
                return Err(Error::NonDyadicPyramid(format!(
                    "smallest layer {}x{} cannot be halved",
                    last.height, last.width
                )));
            }
            Ok((last.height / 2, last.width / 2))
        }
    }
}

/// Concatenates all layers' channels at the fused resolution.
fn fuse(x: &FeatureSet, kind: TransformKind) -> Result<(Vec<f32>, usize, usize, usize)> {
    let (h, w) = fused_plane(kind, &x.signature())?;
    let channels: usize = x.layers().iter().map(|l| l.channels()).sum();
    let mut out = Vec::with_capacity(channels * h * w);
    for layer in x.layers() {
        let f = layer.height() / h;
        if f == 1 {
            out.extend_from_slice(layer.data());
            continue;
        }
        let lw = layer.width();
        let norm = (f * f) as f64;
        for c in 0..layer.channels() {
            let plane = layer.channel(c);
            for i in 0..h {
                for j in 0..w {
                    let mut acc = 0.0f64;
                    for di in 0..f {
                        let row = &plane[(i * f + di) * lw + j * f..][..f];
                        for &v in row {
                            acc += v as f64;
                        }
                    }
                    out.push((acc / norm) as f32);
                }
            }
        }
    }
    Ok((out, channels, h, w))
}

/// Per-channel population variance, descending, ties to the lower index.
pub fn channel_importance(z: &FeatureLayer) -> Vec<usize> {
    let var: Vec<f64> = (0..z.channels()).map(|c| mean_var(z.channel(c)).1).collect();
    let mut order: Vec<usize> = (0..z.channels()).collect();
    order.sort_by(|&a, &b| var[b].total_cmp(&var[a]));
    order
}

fn resolve_output_channels(cfg: &TransformConfig, fused: usize) -> Result<usize> {
    let target = cfg.target_channels.unwrap_or(fused);
    if target == 0 || target > fused {
        return Err(Error::TargetChannelsTooLarge { target, available: fused });
    }
    Ok(target)
}

fn analyze_common(x: &FeatureSet, cfg: &TransformConfig) -> Result<TransformSideInfo> {
    let (data, channels, h, w) = fuse(x, cfg.kind)?;
    if channels > u16::MAX as usize + 1 {
        return Err(Error::InvalidConfig(format!("{channels} fused channels exceed 65536")));
    }
    let target = resolve_output_channels(cfg, channels)?;
    let permutation = match cfg.order {
        ChannelOrder::None => Vec::new(),
        ChannelOrder::VarianceDesc => {
            let fused = FeatureLayer::from_parts_unchecked(LayerShape::new(channels, h, w), data);
            channel_importance(&fused).into_iter().map(|c| c as u16).collect()
        }
    };
    let gain = match &cfg.gain {
        None => vec![1.0; target],
        Some(g) if g.len() == target => g.clone(),
        Some(g) => {
            return Err(Error::InvalidConfig(format!(
                "gain vector has {} entries for {target} output channels",
                g.len()
            )))
        }
    };
    let side = TransformSideInfo { kind: cfg.kind, original: x.signature(), permutation, gain };
    side.validate().map_err(|e| match e {
        Error::SideInfoMismatch(m) => Error::InvalidConfig(m),
        other => other,
    })?;
    Ok(side)
}

fn forward_common(x: &FeatureSet, side: &TransformSideInfo) -> Result<ReducedFeature> {
    side.validate()?;
    if x.signature() != side.original {
        return Err(Error::SideInfoMismatch(format!(
            "input signature {:?} differs from {:?}",
            x.signature(),
            side.original
        )));
    }
    let (data, _channels, h, w) = fuse(x, side.kind)?;
    let plane = h * w;
    let k = side.output_channels();
    let mut out = Vec::with_capacity(k * plane);
    for (pos, &g) in side.gain.iter().enumerate() {
        let src = if side.permutation.is_empty() { pos } else { side.permutation[pos] as usize };
        out.extend(data[src * plane..(src + 1) * plane].iter().map(|&v| v * g));
    }
    Ok(FeatureLayer::from_parts_unchecked(LayerShape::new(k, h, w), out))
}

fn inverse_common(z: &ReducedFeature, side: &TransformSideInfo) -> Result<FeatureSet> {
    side.validate()?;
    let expected = side.output_shape()?;
    if z.shape() != expected {
        return Err(Error::SideInfoMismatch(format!(
            "reduced tensor {:?}, side info expects {:?}",
            z.shape(),
            expected
        )));
    }
    let plane = expected.plane();
    let fused = side.fused_channels();
    // truncated channels come back as zeros
    let mut full = vec![0.0f32; fused * plane];
    for (pos, &g) in side.gain.iter().enumerate() {
        let dst = if side.permutation.is_empty() { pos } else { side.permutation[pos] as usize };
        for (o, &v) in full[dst * plane..(dst + 1) * plane].iter_mut().zip(z.channel(pos)) {
            *o = v / g;
        }
    }
    let (h, w) = (expected.height, expected.width);
    let mut layers = Vec::with_capacity(side.original.len());
    let mut offset = 0;
    for shape in &side.original {
        let src = &full[offset * plane..(offset + shape.channels) * plane];
        offset += shape.channels;
        let f = shape.height / h;
        if f == 1 {
            layers.push(FeatureLayer::from_parts_unchecked(*shape, src.to_vec()));
            continue;
        }
        let mut data = Vec::with_capacity(shape.len());
        for c in 0..shape.channels {
            let ch = &src[c * plane..(c + 1) * plane];
            for row in 0..shape.height {
                let i = row / f;
                for col in 0..shape.width {
                    data.push(ch[i * w + col / f]);
                }
            }
        }
        layers.push(FeatureLayer::from_parts_unchecked(*shape, data));
    }
    FeatureSet::new(layers)
}

/// Deterministic stand-in for a learned fusion network.
#[derive(Debug, Clone, Copy, Default)]
pub struct PyramidFuse;

/// Single-layer pass-through.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl FeatureTransform for PyramidFuse {
    fn analyze(&self, x: &FeatureSet, cfg: &TransformConfig) -> Result<TransformSideInfo> {
        analyze_common(x, &TransformConfig { kind: TransformKind::PyramidFuse, ..cfg.clone() })
    }
    fn forward(&self, x: &FeatureSet, side: &TransformSideInfo) -> Result<ReducedFeature> {
        forward_common(x, side)
    }
    fn inverse(&self, z: &ReducedFeature, side: &TransformSideInfo) -> Result<FeatureSet> {
        inverse_common(z, side)
    }
}

impl FeatureTransform for Identity {
    fn analyze(&self, x: &FeatureSet, cfg: &TransformConfig) -> Result<TransformSideInfo> {
        analyze_common(x, &TransformConfig { kind: TransformKind::Identity, ..cfg.clone() })
    }
    fn forward(&self, x: &FeatureSet, side: &TransformSideInfo) -> Result<ReducedFeature> {
        forward_common(x, side)
    }
    fn inverse(&self, z: &ReducedFeature, side: &TransformSideInfo) -> Result<FeatureSet> {
        inverse_common(z, side)
    }
}

pub fn transform_for(kind: TransformKind) -> &'static dyn FeatureTransform {
    match kind {
        TransformKind::Identity => &Identity,
        TransformKind::PyramidFuse => &PyramidFuse,
    }
}

pub fn reduce(x: &FeatureSet, cfg: &TransformConfig) -> Result<(ReducedFeature, TransformSideInfo)> {
    let t = transform_for(cfg.kind);
    let side = t.analyze(x, cfg)?;
    let z = t.forward(x, &side)?;
    Ok((z, side))
}

pub fn restore(z: &ReducedFeature, side: &TransformSideInfo) -> Result<FeatureSet> {
    transform_for(side.kind).inverse(z, side)
}
