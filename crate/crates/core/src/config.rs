//! Line-oriented `key = value` encoder settings.
//!
//! Blank lines and `#` comments are ignored; unknown keys and malformed
//! values are errors. Keys use underscores (`target_channels`), the same
//! names as the CLI flags without the leading dashes.

use crate::error::{Error, Result};
use crate::pipeline::EncoderConfig;
use crate::temporal::TemporalRatio;
use crate::transform::ChannelOrder;

pub const KEYS: &[&str] = &[
    "transform",
    "target_channels",
    "gain",
    "channel_order",
    "ratio",
    "alpha",
    "bitdepth",
    "codec",
    "qshift",
    "intra_period",
    "refresh_period",
    "global_stats_period",
    "external_encode",
    "external_decode",
];

/// Splits a config file into `(key, value)` pairs, in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::InvalidConfig(format!("line {}: unknown key {k:?}", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {v:?}")))
}

/// Applies one setting; values are range-checked by [`EncoderConfig::validate`].
pub fn apply(cfg: &mut EncoderConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "transform" => cfg.transform.kind = value.parse()?,
        "target_channels" => cfg.transform.target_channels = Some(num(key, value)?),
        "gain" => {
            let g = value.split(',').map(|s| num::<f32>(key, s.trim())).collect::<Result<Vec<_>>>()?;
            cfg.transform.gain = Some(g);
        }
        "channel_order" => {
            cfg.transform.order = match value {
                "none" => ChannelOrder::None,
                "variance" => ChannelOrder::VarianceDesc,
                _ => return Err(Error::InvalidConfig(format!("channel_order: expected none or variance, got {value:?}"))),
            }
        }
        "ratio" => cfg.ratio = TemporalRatio::from_factor(num(key, value)?)?,
        "alpha" => {
            cfg.alpha = match value {
                "off" | "none" => None,
                _ => {
                    let a: f64 = num(key, value)?;
                    if !(a > 0.0 && a < 1.0) {
                        return Err(Error::InvalidAlpha(a));
                    }
                    Some(a)
                }
            }
        }
        "bitdepth" => cfg.bitdepth = num(key, value)?,
        "codec" => cfg.codec.kind = value.parse()?,
        "qshift" => cfg.codec.qshift = num(key, value)?,
        "intra_period" => cfg.codec.intra_period = num(key, value)?,
        "refresh_period" => cfg.refresh_period = Some(num(key, value)?),
        "global_stats_period" => cfg.global_stats_period = Some(num(key, value)?),
        "external_encode" => cfg.codec.external_encode = Some(value.to_string()),
        "external_decode" => cfg.codec.external_decode = Some(value.to_string()),
        _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
    }
    Ok(())
}
