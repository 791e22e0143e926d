//! End-to-end encoder and decoder.
//!
//! Encoding runs, per sequence: global statistics per window, temporal
//! downsampling, the reduction transform, channel adjustment, reduced
//! statistics, packing, normalization, quantization, the inner codec and
//! finally the container. Decoding runs the inverse chain and finishes with
//! temporal upsampling and restored-feature refinement.
//!
//! Data-dependent side information (transform ordering, activity map, reduced
//! statistics) is computed on the first coded frame of each refresh period and
//! held for the rest of it. Global statistics are computed on the first set of
//! each `global_stats_period` window of the original timeline.

use crate::bitstream::{self, Container, GlobalStatsRecord, PeriodSideInfo, SequenceHeader, SideRecord};
use crate::channel::{activity_map, channel_ranges, drop_channels, restore_channels, ActivityMap};
use crate::codec::{self, CodecConfig, FrameMeta};
use crate::conversion::{self, NormParams, PackLayout, PackedFrame, RawFrame, DEFAULT_BITDEPTH};
use crate::error::{Error, Result};
use crate::stats::{global_stats, reduced_stats, summed_moments, GlobalStats};
use crate::temporal::{downsample, upsample, TemporalRatio};
use crate::tensor::{FeatureLayer, FeatureSequence, FeatureSet};
use crate::transform::{transform_for, ReducedFeature, TransformConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub transform: TransformConfig,
    pub codec: CodecConfig,
    pub ratio: TemporalRatio,
    /// Channel-adjustment threshold scale; `None` disables the stage.
    pub alpha: Option<f64>,
    pub bitdepth: u8,
    /// Defaults to the codec intra period.
    pub global_stats_period: Option<u32>,
    /// Defaults to the codec intra period.
    pub refresh_period: Option<u32>,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            transform: TransformConfig::default(),
            codec: CodecConfig::default(),
            ratio: TemporalRatio::X1,
            alpha: Some(crate::channel::DEFAULT_ALPHA),
            bitdepth: DEFAULT_BITDEPTH,
            global_stats_period: None,
            refresh_period: None,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        self.codec.validate()?;
        if !(1..=16).contains(&self.bitdepth) {
            return Err(Error::InvalidConfig(format!("bit depth {} outside 1..=16", self.bitdepth)));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidAlpha(a));
            }
        }
        if self.global_stats_period == Some(0) || self.refresh_period == Some(0) {
            return Err(Error::InvalidConfig("periods must be at least 1".into()));
        }
        Ok(())
    }

    pub fn refresh_period(&self) -> u32 {
        self.refresh_period.unwrap_or(self.codec.intra_period)
    }

    pub fn global_stats_period(&self) -> u32 {
        self.global_stats_period.unwrap_or(self.codec.intra_period)
    }
}

/// Encoder-internal values exposed for verification.
#[derive(Debug, Clone, Default)]
pub struct EncodeTrace {
    /// Per coded frame: the reduced tensor after channel adjustment.
    pub reduced: Vec<ReducedFeature>,
    /// Per coded frame: min-max parameters used before quantization.
    pub norm: Vec<NormParams>,
    /// Exact (pre-bfloat16) global statistics per window.
    pub global: Vec<GlobalStats>,
}

/// Decoder-internal values exposed for verification.
#[derive(Debug, Clone, Default)]
pub struct DecodeTrace {
    /// Per coded frame: dequantized frame before unpacking and refinement.
    pub dequantized: Vec<RawFrame>,
    pub layouts: Vec<PackLayout>,
    /// Per coded frame: reduced tensor after refinement, before mean fill.
    pub refined: Vec<ReducedFeature>,
    /// Per original set: restored features before the final refinement.
    pub unrefined: Vec<FeatureSet>,
}

pub fn encode(seq: &FeatureSequence, cfg: &EncoderConfig) -> Result<Vec<u8>> {
    encode_with_trace(seq, cfg).map(|(bytes, _)| bytes)
}

pub fn encode_with_trace(seq: &FeatureSequence, cfg: &EncoderConfig) -> Result<(Vec<u8>, EncodeTrace)> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let original_count =
        u32::try_from(seq.len()).map_err(|_| Error::InvalidConfig("sequence too long".into()))?;
    let mut trace = EncodeTrace::default();
    let mut records = Vec::new();

    let gp = cfg.global_stats_period() as usize;
    for (w, set) in seq.sets().iter().step_by(gp).enumerate() {
        let g = global_stats(set)?;
        let (mu, sigma) = g.quantized()?;
        trace.global.push(g);
        records.push(SideRecord::GlobalStats(GlobalStatsRecord { start: (w * gp) as u32, mu, sigma }));
    }

    let (kept, _plan) = downsample(seq, cfg.ratio)?;
    let transform = transform_for(cfg.transform.kind);
    let mut payload = Vec::new();
    let mut target_channels = 0u32;
    let rp = cfg.refresh_period() as usize;

    for (p, period) in kept.sets().chunks(rp).enumerate() {
        let side = transform.analyze(&period[0], &cfg.transform)?;
        target_channels = side.output_channels() as u32;
        let mut activity: Option<ActivityMap> = None;
        let mut reduced = None;
        let mut layout = None;
        let mut frames: Vec<PackedFrame> = Vec::with_capacity(period.len());
        for set in period {
            let z = transform.forward(set, &side)?;
            let map = match &activity {
                Some(m) => m,
                None => activity.insert(match cfg.alpha {
                    Some(a) => activity_map(&channel_ranges(&z), a)?,
                    None => ActivityMap::keep_all(z.channels()),
                }),
            };
            let kept_z = drop_channels(&z, map)?;
            if reduced.is_none() {
                reduced = Some(reduced_stats(kept_z.data())?);
            }
            let (raw, l) = conversion::pack(&kept_z)?;
            layout.get_or_insert(l);
            let (norm, params) = conversion::normalize(&raw);
            frames.push(conversion::quantize(&norm, cfg.bitdepth));
            trace.norm.push(params);
            trace.reduced.push(kept_z);
        }
        let segment = codec::encode_frames(&frames, &cfg.codec)?;
        records.push(SideRecord::Period(PeriodSideInfo {
            first_frame: (p * rp) as u32,
            frame_count: period.len() as u32,
            payload_len: segment.len() as u64,
            reduced: reduced.expect("period has a first frame"),
            activity: activity.expect("period has a first frame"),
            layout: layout.expect("period has a first frame"),
            transform: side,
        }));
        payload.extend_from_slice(&segment);
    }

    let header = SequenceHeader {
        layers: seq.shape_signature(),
        ratio: cfg.ratio,
        original_count,
        transform: cfg.transform.kind,
        target_channels,
        bitdepth: cfg.bitdepth,
        intra_period: cfg.codec.intra_period,
        refresh_period: cfg.refresh_period(),
        global_stats_period: cfg.global_stats_period(),
        codec: cfg.codec.kind,
        qshift: cfg.codec.qshift,
    };
    let bytes = bitstream::serialize(&Container { header, records, payload })?;
    Ok((bytes, trace))
}

/// Standardizes every layer by the summed statistics of the whole set and
/// rescales to the signalled global statistics. When the set has zero spread
/// only the mean is shifted.
pub fn refine_restored(y: &FeatureSet, g: GlobalStats) -> Result<FeatureSet> {
    let (m, var) = summed_moments(y.layers().iter().map(|l| l.data()))?;
    let s = var.sqrt();
    let (mu_x, sigma_x) = (g.mu as f64, g.sigma as f64);
    let layers = y
        .layers()
        .iter()
        .map(|l| {
            let data = if s > 0.0 {
                l.data().iter().map(|&v| ((v as f64 - m) / s * sigma_x + mu_x) as f32).collect()
            } else {
                l.data().iter().map(|&v| (v as f64 - m + mu_x) as f32).collect()
            };
            FeatureLayer::from_parts_unchecked(l.shape(), data)
        })
        .collect();
    FeatureSet::new(layers)
}

/// Decoder options that are not carried in the stream.
#[derive(Debug, Clone, Default)]
pub struct DecoderOptions {
    pub external_decode: Option<String>,
}

pub fn decode(bytes: &[u8]) -> Result<FeatureSequence> {
    decode_with(bytes, &DecoderOptions::default()).map(|(seq, _)| seq)
}

pub fn decode_with(bytes: &[u8], opts: &DecoderOptions) -> Result<(FeatureSequence, DecodeTrace)> {
    let c = bitstream::parse(bytes)?;
    let h = &c.header;
    let codec_cfg = CodecConfig {
        kind: h.codec,
        qshift: h.qshift,
        intra_period: h.intra_period,
        external_encode: None,
        external_decode: opts.external_decode.clone(),
    };
    let transform = transform_for(h.transform);
    let mut trace = DecodeTrace::default();
    let mut restored_sets = Vec::with_capacity(h.coded_count());
    let mut offset = 0usize;
    for p in c.period_records() {
        let (fh, fw) = p.layout.frame_dims_checked()?;
        let meta = FrameMeta { width: fw, height: fh, count: p.frame_count as usize, bitdepth: h.bitdepth };
        let segment = &c.payload[offset..offset + p.payload_len as usize];
        offset += p.payload_len as usize;
        for frame in codec::decode_frames(segment, meta, &codec_cfg)? {
            let dq = conversion::dequantize(&frame);
            let z_dq = conversion::unpack(&dq, &p.layout)?;
            let z = conversion::refine_reduced(&z_dq, p.reduced);
            let full = restore_channels(&z, &p.activity)?;
            restored_sets.push(transform.inverse(&full, &p.transform)?);
            trace.dequantized.push(dq);
            trace.layouts.push(p.layout);
            trace.refined.push(z);
        }
    }
    let restored = upsample(FeatureSequence::new(restored_sets)?, &h.plan())?;

    let globals: Vec<GlobalStats> = c.global_records().map(GlobalStatsRecord::stats).collect();
    let gp = h.global_stats_period as usize;
    let mut out = Vec::with_capacity(restored.len());
    for (t, set) in restored.into_sets().into_iter().enumerate() {
        let refined = refine_restored(&set, globals[t / gp])?;
        if refined.layers().iter().any(|l| l.data().iter().any(|v| !v.is_finite())) {
            return Err(Error::CorruptPayload(format!("set {t} decodes to non-finite values")));
        }
        trace.unrefined.push(set);
        out.push(refined);
    }
    Ok((FeatureSequence::new(out)?, trace))
}
