//! Feature tensor containers and the FCFT feature file format.
//!
//! A [`FeatureLayer`] is one `C×H×W` tensor stored row-major (channel, then
//! row, then column). A [`FeatureSet`] is the ordered list of layers emitted at
//! the network split point for one timestep, and a [`FeatureSequence`] is a
//! time series of shape-congruent sets.
//!
//! FCFT layout, all integers little-endian:
//!
//! ```text
//! "FCFT" | version u16 (=1) | T u32 | N u16 | N × (C u32, H u32, W u32)
//! payload: T × N layers, each C·H·W f32 LE, row-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::wire::{PutLe, Reader};

pub const FCFT_MAGIC: &[u8; 4] = b"FCFT";
pub const FCFT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl LayerShape {
    pub const fn new(channels: usize, height: usize, width: usize) -> Self {
        LayerShape { channels, height, width }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plane(&self) -> usize {
        self.height * self.width
    }
}

impl From<(usize, usize, usize)> for LayerShape {
    fn from((c, h, w): (usize, usize, usize)) -> Self {
        LayerShape::new(c, h, w)
    }
}

/// One dense `C×H×W` feature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayer {
    shape: LayerShape,
    data: Vec<f32>,
}

impl FeatureLayer {
    /// Builds a layer, rejecting a data length that disagrees with the shape
    /// and any NaN or infinity.
    pub fn new(shape: impl Into<LayerShape>, data: Vec<f32>) -> Result<Self> {
        let shape = shape.into();
        if data.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{}x{} layer needs {} values, got {}",
                shape.channels,
                shape.height,
                shape.width,
                shape.len(),
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { layer: 0, index });
        }
        Ok(FeatureLayer { shape, data })
    }

    pub fn filled(shape: impl Into<LayerShape>, value: f32) -> Self {
        let shape = shape.into();
        FeatureLayer { data: vec![value; shape.len()], shape }
    }

    pub(crate) fn from_parts_unchecked(shape: LayerShape, data: Vec<f32>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        FeatureLayer { shape, data }
    }

    pub fn shape(&self) -> LayerShape {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.shape.channels
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Spatial plane of channel `c`.
    pub fn channel(&self, c: usize) -> &[f32] {
        let plane = self.shape.plane();
        &self.data[c * plane..(c + 1) * plane]
    }
}

/// The layers produced at one timestep. Order is significant.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    layers: Vec<FeatureLayer>,
}

impl FeatureSet {
    pub fn new(layers: Vec<FeatureLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("a feature set needs at least one layer".into()));
        }
        Ok(FeatureSet { layers })
    }

    pub fn layers(&self) -> &[FeatureLayer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<FeatureLayer> {
        self.layers
    }

    pub fn signature(&self) -> Vec<LayerShape> {
        self.layers.iter().map(FeatureLayer::shape).collect()
    }

    pub fn element_count(&self) -> usize {
        self.layers.iter().map(FeatureLayer::len).sum()
    }
}

/// A time series of shape-congruent feature sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSequence {
    sets: Vec<FeatureSet>,
}

impl FeatureSequence {
    /// Rejects sets whose layer-shape signature differs from the first set's.
    pub fn new(sets: Vec<FeatureSet>) -> Result<Self> {
        if let Some(first) = sets.first() {
            let sig = first.signature();
            for (t, set) in sets.iter().enumerate().skip(1) {
                if set.signature() != sig {
                    return Err(Error::ShapeMismatch(format!(
                        "set {t} has signature {:?}, expected {:?}",
                        set.signature(),
                        sig
                    )));
                }
            }
        }
        Ok(FeatureSequence { sets })
    }

    pub fn sets(&self) -> &[FeatureSet] {
        &self.sets
    }

    pub fn into_sets(self) -> Vec<FeatureSet> {
        self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Per-layer dims shared by every set; empty for an empty sequence.
    pub fn shape_signature(&self) -> Vec<LayerShape> {
        self.sets.first().map(FeatureSet::signature).unwrap_or_default()
    }

    /// Element count of the whole sequence.
    pub fn element_count(&self) -> usize {
        self.sets.iter().map(FeatureSet::element_count).sum()
    }

    pub fn to_fcft_bytes(&self) -> Result<Vec<u8>> {
        if self.sets.is_empty() {
            return Err(Error::EmptySequence);
        }
        let sig = self.shape_signature();
        let t = u32::try_from(self.sets.len())
            .map_err(|_| Error::ShapeMismatch("too many sets for FCFT".into()))?;
        let n = u16::try_from(sig.len())
            .map_err(|_| Error::ShapeMismatch("too many layers for FCFT".into()))?;
        let payload = self.element_count() * 4;
        let mut out = Vec::with_capacity(12 + sig.len() * 12 + payload);
        out.extend_from_slice(FCFT_MAGIC);
        out.put_u16(FCFT_VERSION);
        out.put_u32(t);
        out.put_u16(n);
        for s in &sig {
            for dim in [s.channels, s.height, s.width] {
                let dim = u32::try_from(dim)
                    .map_err(|_| Error::ShapeMismatch(format!("dimension {dim} exceeds u32")))?;
                out.put_u32(dim);
            }
        }
        for set in &self.sets {
            for layer in set.layers() {
                for v in layer.data() {
                    out.put_f32(*v);
                }
            }
        }
        Ok(out)
    }

    pub fn from_fcft_bytes(bytes: &[u8]) -> Result<Self> {
        let truncated = |what| Error::TruncatedFile { what };
        let mut r = Reader::new(bytes);
        if r.take(4, "magic").map_err(truncated)? != FCFT_MAGIC {
            return Err(Error::BadMagic { expected: "FCFT" });
        }
        let version = r.u16("version").map_err(truncated)?;
        if version != FCFT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let t = r.u32("set count").map_err(truncated)? as usize;
        let n = r.u16("layer count").map_err(truncated)? as usize;
        if n == 0 {
            return Err(Error::ShapeMismatch("FCFT header declares zero layers".into()));
        }
        let mut sig = Vec::with_capacity(n);
        for _ in 0..n {
            let c = r.u32("shape table").map_err(truncated)? as usize;
            let h = r.u32("shape table").map_err(truncated)? as usize;
            let w = r.u32("shape table").map_err(truncated)? as usize;
            sig.push(LayerShape::new(c, h, w));
        }
        if t == 0 {
            return Err(Error::EmptySequence);
        }
        let per_set: u128 = sig.iter().map(|s| s.channels as u128 * s.height as u128 * s.width as u128).sum();
        let expected = per_set * t as u128 * 4;
        if expected != r.remaining() as u128 {
            return Err(Error::ShapeMismatch(format!(
                "header declares {expected} payload bytes, file carries {}",
                r.remaining()
            )));
        }
        let mut sets = Vec::with_capacity(t);
        for _ in 0..t {
            let mut layers = Vec::with_capacity(n);
            for (li, shape) in sig.iter().enumerate() {
                let raw = r.take(shape.len() * 4, "payload").map_err(truncated)?;
                let data: Vec<f32> = raw
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                    .collect();
                if let Some(index) = data.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteValue { layer: li, index });
                }
                layers.push(FeatureLayer::from_parts_unchecked(*shape, data));
            }
            sets.push(FeatureSet { layers });
        }
        Ok(FeatureSequence { sets })
    }
}

pub fn load_feature_sequence(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureSequence::from_fcft_bytes(&bytes)
}

pub fn save_feature_sequence(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = seq.to_fcft_bytes()?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
