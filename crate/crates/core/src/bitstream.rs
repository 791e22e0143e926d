//! The FCMB container: sequence header, side-information records, and the
//! inner-codec payload.
//!
//! ```text
//! header   "FCMB" | version u16 | N u16 | N × (C u32, H u32, W u32)
//!          | ratio u8 | original_count u32 | transform_id u8
//!          | target_channels u32 | bitdepth u8 | intra_period u32
//!          | refresh_period u32 | global_stats_period u32 | codec_id u8 | qshift u8
//! records  count u32, then count × (type u8 | length u32 | body)
//! payload  length u64 | bytes
//! ```
//!
//! Record type 1 carries global statistics for the original-time window that
//! starts at `start`. Record type 2 carries everything the decoder needs for
//! one refresh period of coded frames. Records of any other type are kept as
//! opaque bytes so they survive a parse/serialize cycle.
//!
//! All integers are little-endian.

use crate::channel::ActivityMap;
use crate::conversion::PackLayout;
use crate::codec::CodecKind;
use crate::error::{Error, Result};
use crate::stats::{Bf16, GlobalStats, ReducedStats};
use crate::temporal::{TemporalPlan, TemporalRatio};
use crate::tensor::LayerShape;
use crate::transform::{TransformKind, TransformSideInfo};
use crate::wire::{PutLe, Reader};

pub const FCMB_MAGIC: &[u8; 4] = b"FCMB";
pub const FCMB_VERSION: u16 = 1;

pub const RECORD_GLOBAL_STATS: u8 = 1;
pub const RECORD_PERIOD: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceHeader {
    pub layers: Vec<LayerShape>,
    pub ratio: TemporalRatio,
    pub original_count: u32,
    pub transform: TransformKind,
    pub target_channels: u32,
    pub bitdepth: u8,
    pub intra_period: u32,
    pub refresh_period: u32,
    pub global_stats_period: u32,
    pub codec: CodecKind,
    pub qshift: u8,
}

impl SequenceHeader {
    pub fn coded_count(&self) -> usize {
        TemporalPlan::new(self.ratio, self.original_count as usize).kept_count()
    }

    pub fn plan(&self) -> TemporalPlan {
        TemporalPlan::new(self.ratio, self.original_count as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalStatsRecord {
    /// First original set index this record applies to.
    pub start: u32,
    pub mu: Bf16,
    pub sigma: Bf16,
}

impl GlobalStatsRecord {
    pub fn stats(&self) -> GlobalStats {
        GlobalStats::from_bf16(self.mu, self.sigma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSideInfo {
    /// First coded frame of the period.
    pub first_frame: u32,
    pub frame_count: u32,
    /// Bytes of the payload belonging to this period.
    pub payload_len: u64,
    pub reduced: ReducedStats,
    pub activity: ActivityMap,
    pub layout: PackLayout,
    pub transform: TransformSideInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SideRecord {
    GlobalStats(GlobalStatsRecord),
    Period(PeriodSideInfo),
    Unknown { kind: u8, body: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub header: SequenceHeader,
    pub records: Vec<SideRecord>,
    pub payload: Vec<u8>,
}

impl Container {
    pub fn global_records(&self) -> impl Iterator<Item = &GlobalStatsRecord> {
        self.records.iter().filter_map(|r| match r {
            SideRecord::GlobalStats(g) => Some(g),
            _ => None,
        })
    }

    pub fn period_records(&self) -> impl Iterator<Item = &PeriodSideInfo> {
        self.records.iter().filter_map(|r| match r {
            SideRecord::Period(p) => Some(p),
            _ => None,
        })
    }

    /// Checks that the records tile both timelines and the payload exactly.
    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        let bad = |m: String| Err(Error::InconsistentRecordCount(m));
        if h.layers.is_empty() {
            return Err(Error::InvalidField("empty layer shape table".into()));
        }
        if h.original_count == 0 {
            return Err(Error::InvalidField("original set count is zero".into()));
        }
        if h.refresh_period == 0 || h.global_stats_period == 0 || h.intra_period == 0 {
            return Err(Error::InvalidField("periods must be at least 1".into()));
        }
        if !(1..=16).contains(&h.bitdepth) {
            return Err(Error::InvalidField(format!("bit depth {}", h.bitdepth)));
        }

        let globals: Vec<_> = self.global_records().collect();
        let want = (h.original_count as usize).div_ceil(h.global_stats_period as usize);
        if globals.len() != want {
            return bad(format!("{} global stats records, expected {want}", globals.len()));
        }
        for (i, g) in globals.iter().enumerate() {
            if g.start as u64 != i as u64 * h.global_stats_period as u64 {
                return bad(format!("global stats record {i} starts at {}", g.start));
            }
        }

        let periods: Vec<_> = self.period_records().collect();
        let coded = h.coded_count();
        let want = coded.div_ceil(h.refresh_period as usize);
        if periods.len() != want {
            return bad(format!("{} period records, expected {want}", periods.len()));
        }
        let mut next = 0u64;
        let mut bytes = 0u64;
        for (i, p) in periods.iter().enumerate() {
            let expect_count = (coded as u64 - next).min(h.refresh_period as u64);
            if p.first_frame as u64 != next || p.frame_count as u64 != expect_count {
                return bad(format!(
                    "period {i} covers frames {}+{}, expected {next}+{expect_count}",
                    p.first_frame, p.frame_count
                ));
            }
            next += p.frame_count as u64;
            bytes = bytes.saturating_add(p.payload_len);
            if p.transform.kind != h.transform || p.transform.original != h.layers {
                return Err(Error::InvalidField(format!("period {i} transform disagrees with header")));
            }
            if p.transform.output_channels() != h.target_channels as usize
                || p.activity.len() != h.target_channels as usize
            {
                return Err(Error::InvalidField(format!("period {i} channel count disagrees with header")));
            }
            if p.layout.channel_count as usize != p.activity.kept_count() {
                return Err(Error::InvalidField(format!("period {i} layout disagrees with activity map")));
            }
            let out = p.transform.output_shape()?;
            if (p.layout.channel_h as usize, p.layout.channel_w as usize) != (out.height, out.width) {
                return Err(Error::InvalidField(format!("period {i} layout tile size disagrees with transform")));
            }
            p.layout.frame_dims_checked()?;
        }
        if bytes != self.payload.len() as u64 {
            return bad(format!("periods claim {bytes} payload bytes, payload has {}", self.payload.len()));
        }
        Ok(())
    }
}

fn u32_field(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidField(format!("{what} {v} exceeds u32")))
}

fn put_shapes(out: &mut Vec<u8>, shapes: &[LayerShape]) -> Result<()> {
    out.put_u16(
        u16::try_from(shapes.len()).map_err(|_| Error::InvalidField("too many layers".into()))?,
    );
    for s in shapes {
        out.put_u32(u32_field(s.channels, "channels")?);
        out.put_u32(u32_field(s.height, "height")?);
        out.put_u32(u32_field(s.width, "width")?);
    }
    Ok(())
}

fn put_period(out: &mut Vec<u8>, p: &PeriodSideInfo) -> Result<()> {
    out.put_u32(p.first_frame);
    out.put_u32(p.frame_count);
    out.put_u64(p.payload_len);
    out.put_f32(p.reduced.mu);
    out.put_f32(p.reduced.sigma);
    out.put_u32(u32_field(p.activity.len(), "activity map length")?);
    out.extend_from_slice(&p.activity.to_bits());
    for v in [p.layout.grid_rows, p.layout.grid_cols, p.layout.channel_h, p.layout.channel_w, p.layout.channel_count] {
        out.put_u16(v);
    }
    let t = &p.transform;
    out.put_u8(t.kind.id());
    put_shapes(out, &t.original)?;
    out.put_u32(u32_field(t.permutation.len(), "permutation length")?);
    for &c in &t.permutation {
        out.put_u16(c);
    }
    out.put_u32(u32_field(t.gain.len(), "gain length")?);
    for &g in &t.gain {
        out.put_f32(g);
    }
    Ok(())
}

pub fn serialize(c: &Container) -> Result<Vec<u8>> {
    c.validate()?;
    let h = &c.header;
    let mut out = Vec::with_capacity(64 + c.payload.len());
    out.extend_from_slice(FCMB_MAGIC);
    out.put_u16(FCMB_VERSION);
    put_shapes(&mut out, &h.layers)?;
    out.put_u8(h.ratio.factor() as u8);
    out.put_u32(h.original_count);
    out.put_u8(h.transform.id());
    out.put_u32(h.target_channels);
    out.put_u8(h.bitdepth);
    out.put_u32(h.intra_period);
    out.put_u32(h.refresh_period);
    out.put_u32(h.global_stats_period);
    out.put_u8(h.codec.id());
    out.put_u8(h.qshift);

    out.put_u32(u32_field(c.records.len(), "record count")?);
    for r in &c.records {
        let mut body = Vec::new();
        let kind = match r {
            SideRecord::GlobalStats(g) => {
                body.put_u32(g.start);
                body.put_u16(g.mu.0);
                body.put_u16(g.sigma.0);
                RECORD_GLOBAL_STATS
            }
            SideRecord::Period(p) => {
                put_period(&mut body, p)?;
                RECORD_PERIOD
            }
            SideRecord::Unknown { kind, body: b } => {
                if *kind == RECORD_GLOBAL_STATS || *kind == RECORD_PERIOD {
                    return Err(Error::InvalidField(format!("opaque record uses reserved type {kind}")));
                }
                body.extend_from_slice(b);
                *kind
            }
        };
        out.put_u8(kind);
        out.put_u32(u32_field(body.len(), "record length")?);
        out.extend_from_slice(&body);
    }
    out.put_u64(c.payload.len() as u64);
    out.extend_from_slice(&c.payload);
    Ok(out)
}

fn get_shapes(r: &mut Reader<'_>) -> Result<Vec<LayerShape>> {
    let n = r.u16("layer count").map_err(Error::Truncated)? as usize;
    if n * 12 > r.remaining() {
        return Err(Error::Truncated("shape table"));
    }
    (0..n)
        .map(|_| {
            let c = r.u32("shape table").map_err(Error::Truncated)?;
            let h = r.u32("shape table").map_err(Error::Truncated)?;
            let w = r.u32("shape table").map_err(Error::Truncated)?;
            Ok(LayerShape::new(c as usize, h as usize, w as usize))
        })
        .collect()
}

fn get_period(body: &[u8]) -> Result<PeriodSideInfo> {
    let mut r = Reader::new(body);
    let t = Error::Truncated;
    let first_frame = r.u32("period record").map_err(t)?;
    let frame_count = r.u32("period record").map_err(t)?;
    let payload_len = r.u64("period record").map_err(t)?;
    let reduced = ReducedStats { mu: r.f32("reduced stats").map_err(t)?, sigma: r.f32("reduced stats").map_err(t)? };
    if !reduced.mu.is_finite() || !reduced.sigma.is_finite() || reduced.sigma < 0.0 {
        return Err(Error::InvalidField("reduced stats not finite".into()));
    }
    let channels = r.u32("activity map").map_err(t)? as usize;
    let bits = r.take(channels.div_ceil(8), "activity map").map_err(t)?;
    let activity = ActivityMap::from_bits(bits, channels)?;
    let mut l = [0u16; 5];
    for v in &mut l {
        *v = r.u16("pack layout").map_err(t)?;
    }
    let layout = PackLayout { grid_rows: l[0], grid_cols: l[1], channel_h: l[2], channel_w: l[3], channel_count: l[4] };
    let kind = TransformKind::from_id(r.u8("transform id").map_err(t)?)?;
    let original = get_shapes(&mut r)?;
    let n = r.u32("permutation").map_err(t)? as usize;
    if n.saturating_mul(2) > r.remaining() {
        return Err(Error::Truncated("permutation"));
    }
    let permutation = (0..n).map(|_| r.u16("permutation").map_err(t)).collect::<Result<Vec<_>>>()?;
    let n = r.u32("gain").map_err(t)? as usize;
    if n.saturating_mul(4) > r.remaining() {
        return Err(Error::Truncated("gain"));
    }
    let gain = (0..n).map(|_| r.f32("gain").map_err(t)).collect::<Result<Vec<_>>>()?;
    if r.remaining() != 0 {
        return Err(Error::InvalidField(format!("{} unread bytes in period record", r.remaining())));
    }
    Ok(PeriodSideInfo {
        first_frame,
        frame_count,
        payload_len,
        reduced,
        activity,
        layout,
        transform: TransformSideInfo { kind, original, permutation, gain },
    })
}

pub fn parse(bytes: &[u8]) -> Result<Container> {
    let t = Error::Truncated;
    let mut r = Reader::new(bytes);
    if r.take(4, "magic").map_err(t)? != FCMB_MAGIC {
        return Err(Error::BadMagic { expected: "FCMB" });
    }
    let version = r.u16("version").map_err(t)?;
    if version != FCMB_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let layers = get_shapes(&mut r)?;
    let ratio = TemporalRatio::from_factor(r.u8("header").map_err(t)? as u32)
        .map_err(|_| Error::InvalidField("temporal ratio".into()))?;
    let header = SequenceHeader {
        layers,
        ratio,
        original_count: r.u32("header").map_err(t)?,
        transform: TransformKind::from_id(r.u8("header").map_err(t)?)?,
        target_channels: r.u32("header").map_err(t)?,
        bitdepth: r.u8("header").map_err(t)?,
        intra_period: r.u32("header").map_err(t)?,
        refresh_period: r.u32("header").map_err(t)?,
        global_stats_period: r.u32("header").map_err(t)?,
        codec: CodecKind::from_id(r.u8("header").map_err(t)?)?,
        qshift: r.u8("header").map_err(t)?,
    };

    let count = r.u32("record count").map_err(t)? as usize;
    // every record needs at least its 5-byte prefix
    if count.saturating_mul(5) > r.remaining() {
        return Err(Error::Truncated("side records"));
    }
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let kind = r.u8("record type").map_err(t)?;
        let len = r.u32("record length").map_err(t)? as u64;
        if len > r.remaining() as u64 {
            return Err(Error::OverlongLength { declared: len, remaining: r.remaining() as u64 });
        }
        let body = r.take(len as usize, "record body").map_err(t)?;
        records.push(match kind {
            RECORD_GLOBAL_STATS => {
                let mut b = Reader::new(body);
                let g = GlobalStatsRecord {
                    start: b.u32("global stats").map_err(t)?,
                    mu: Bf16(b.u16("global stats").map_err(t)?),
                    sigma: Bf16(b.u16("global stats").map_err(t)?),
                };
                if b.remaining() != 0 {
                    return Err(Error::InvalidField("oversized global stats record".into()));
                }
                if !g.stats().mu.is_finite() || !g.stats().sigma.is_finite() {
                    return Err(Error::InvalidField("global stats not finite".into()));
                }
                SideRecord::GlobalStats(g)
            }
            RECORD_PERIOD => SideRecord::Period(get_period(body)?),
            other => SideRecord::Unknown { kind: other, body: body.to_vec() },
        });
    }
    let len = r.u64("payload length").map_err(t)?;
    if len > r.remaining() as u64 {
        return Err(Error::OverlongLength { declared: len, remaining: r.remaining() as u64 });
    }
    let payload = r.take(len as usize, "payload").map_err(t)?.to_vec();
    if r.remaining() != 0 {
        return Err(Error::InvalidField(format!("{} trailing bytes after payload", r.remaining())));
    }
    let c = Container { header, records, payload };
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub bits: u64,
    pub bits_per_second: f64,
    pub bits_per_element: f64,
}

/// Rate of a whole container: every byte counts, side information included.
pub fn measure_rate(container_len: usize, frame_count: usize, fps: f64, element_count: usize) -> Rate {
    let bits = container_len as u64 * 8;
    Rate {
        bits,
        bits_per_second: bits as f64 * fps / frame_count.max(1) as f64,
        bits_per_element: if element_count == 0 { 0.0 } else { bits as f64 / element_count as f64 },
    }
}
