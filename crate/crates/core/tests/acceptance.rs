//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run alone with `cargo test -p fcm-core --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fcm_core::bitstream::{parse, serialize, SideRecord};
use fcm_core::channel::{activity_map, channel_ranges, drop_channels, restore_channels, ActivityMap};
use fcm_core::codec::{CodecConfig, CodecKind};
use fcm_core::conversion::{dequantize, quantize, unpack, RawFrame};
use fcm_core::eval::bdrate::{bd_rate, RateCurve, RatePoint};
use fcm_core::eval::complexity::aggregate;
use fcm_core::pipeline::{decode_with, encode, encode_with_trace, DecoderOptions, EncoderConfig};
use fcm_core::stats::{global_stats, reduced_stats};
use fcm_core::temporal::{downsample, upsample, TemporalPlan, TemporalRatio};
use fcm_core::tensor::{FeatureLayer, FeatureSequence, FeatureSet, LayerShape};
use fcm_core::transform::{ChannelOrder, TransformConfig, TransformKind};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---- generators ----

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_layer(r: &mut ChaCha8Rng, shape: (usize, usize, usize), offset: f32, scale: f32) -> FeatureLayer {
    let n = shape.0 * shape.1 * shape.2;
    let data = (0..n).map(|_| offset + scale * (r.random::<f32>() - 0.5)).collect();
    FeatureLayer::new(shape, data).unwrap()
}

/// `layers` levels of a dyadic pyramid whose smallest level is `base` square.
fn pyramid_shapes(layers: usize, channels: usize, base: usize) -> Vec<(usize, usize, usize)> {
    (0..layers).map(|i| (channels, base << (layers - 1 - i), base << (layers - 1 - i))).collect()
}

fn random_sequence(r: &mut ChaCha8Rng, t: usize, shapes: &[(usize, usize, usize)]) -> FeatureSequence {
    let offset = r.random_range(-3.0f32..3.0);
    let scale = r.random_range(0.5f32..20.0);
    let sets = (0..t)
        .map(|_| FeatureSet::new(shapes.iter().map(|&s| random_layer(r, s, offset, scale)).collect()).unwrap())
        .collect();
    FeatureSequence::new(sets).unwrap()
}

/// Random sequence plus a config that can encode it.
fn random_case(r: &mut ChaCha8Rng, max_t: usize) -> (FeatureSequence, EncoderConfig) {
    let t = r.random_range(1..=max_t);
    let pyramid = r.random_bool(0.6);
    let (shapes, transform) = if pyramid {
        let n = r.random_range(1..=3);
        let c = r.random_range(1..=4);
        let base = 2 * r.random_range(1..=3);
        let total = n * c;
        let target = if r.random_bool(0.5) { Some(r.random_range(1..=total)) } else { None };
        let gain = target.filter(|_| r.random_bool(0.5)).map(|k| (0..k).map(|_| r.random_range(0.25f32..4.0)).collect());
        let order = if r.random_bool(0.5) { ChannelOrder::VarianceDesc } else { ChannelOrder::None };
        (pyramid_shapes(n, c, base), TransformConfig { kind: TransformKind::PyramidFuse, target_channels: target, gain, order })
    } else {
        let shape = (r.random_range(1..=6), r.random_range(1..=9), r.random_range(1..=9));
        (vec![shape], TransformConfig { kind: TransformKind::Identity, ..TransformConfig::default() })
    };
    let seq = random_sequence(r, t, &shapes);
    let lossy = r.random_bool(0.5);
    let cfg = EncoderConfig {
        transform,
        codec: CodecConfig {
            kind: if lossy { CodecKind::RefLossy } else { CodecKind::RefLossless },
            qshift: if lossy { r.random_range(0..=8) } else { 0 },
            intra_period: r.random_range(1..=6),
            external_encode: None,
            external_decode: None,
        },
        ratio: if r.random_bool(0.5) { TemporalRatio::X2 } else { TemporalRatio::X1 },
        alpha: if r.random_bool(0.5) { Some(r.random_range(0.05..0.6)) } else { None },
        bitdepth: r.random_range(8..=12),
        global_stats_period: if r.random_bool(0.5) { Some(r.random_range(1..=5)) } else { None },
        refresh_period: if r.random_bool(0.5) { Some(r.random_range(1..=5)) } else { None },
    };
    (seq, cfg)
}

// ---- criteria ----

fn bitstream_round_trip() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut truncations = 0usize;
    let mut mutations = 0usize;
    for i in 0..1000 {
        let (seq, cfg) = random_case(&mut r, 8);
        let bytes = encode(&seq, &cfg).unwrap();
        let mut c = parse(&bytes).unwrap();
        if serialize(&c).unwrap() != bytes {
            return outcome(false, format!("container {i}: serialize(parse(b)) != b"));
        }
        // opaque records must survive too
        for _ in 0..r.random_range(0..3) {
            let body: Vec<u8> = (0..r.random_range(0..24)).map(|_| r.random()).collect();
            let at = r.random_range(0..=c.records.len());
            c.records.insert(at, SideRecord::Unknown { kind: r.random_range(3..=255), body });
        }
        let b2 = serialize(&c).unwrap();
        let c2 = parse(&b2).unwrap();
        if c2 != c || serialize(&c2).unwrap() != b2 {
            return outcome(false, format!("container {i}: parse/serialize not an identity"));
        }

        let mut lens: Vec<usize> = (0..32).map(|_| r.random_range(0..b2.len())).collect();
        lens.extend([0, 1, 4, 6, b2.len() - 1]);
        for len in lens {
            truncations += 1;
            match catch_unwind(|| parse(&b2[..len])) {
                Ok(Ok(_)) => return outcome(false, format!("container {i}: {len}-byte prefix parsed")),
                Ok(Err(_)) => {}
                Err(_) => return outcome(false, format!("container {i}: panic on {len}-byte prefix")),
            }
        }
        for _ in 0..8 {
            mutations += 1;
            let mut m = b2.clone();
            let k = r.random_range(0..m.len());
            m[k] ^= 1 << r.random_range(0..8);
            let res = catch_unwind(AssertUnwindSafe(|| {
                if let Ok(p) = parse(&m) {
                    let _ = decode_with(&m, &DecoderOptions::default());
                    let _ = serialize(&p);
                }
            }));
            if res.is_err() {
                return outcome(false, format!("container {i}: panic after flipping a bit of byte {k}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        secs < 30.0,
        format!("1000 containers byte-exact, {truncations} truncations and {mutations} bit flips without panic, {secs:.1}s"),
    )
}

fn quantization_bound() -> Outcome {
    let start = Instant::now();
    let bound = 2f64.powi(-10);
    let mut xs: Vec<f64> = Vec::with_capacity(1_000_000 + 4096);
    for k in 0..1024u32 {
        xs.push(k as f64 / 1023.0);
        xs.push(k as f64 / 1024.0);
        // just below each bin edge
        xs.push(((k + 1) as f64 / 1024.0).min(1.0) - f64::EPSILON);
    }
    xs.push(1.0);
    let mut r = rng(2);
    xs.extend((0..1_000_000).map(|_| r.random::<f64>()));
    let frame = RawFrame { height: 1, width: xs.len(), data: xs };
    let back = dequantize(&quantize(&frame, 10));
    let worst = frame.data.iter().zip(&back.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= bound && secs < 10.0,
        format!("{} values, worst |dq(q(x)) - x| = {worst:.3e} (bound {bound:.3e}), {secs:.2}s", frame.data.len()),
    )
}

fn refinement_contracts() -> Outcome {
    let mut r = rng(3);
    let (mut z_checked, mut z_fail) = (0usize, 0usize);
    let mut worst_z = 0.0f64;
    // (sets checked, sigma misses, mean misses, either) for single- and multi-layer input
    let mut single = (0usize, 0usize, 0usize, 0usize);
    let mut multi = (0usize, 0usize, 0usize, 0usize);
    let mut worst_single = 0.0f64;
    let mut worst_multi_mean = 0.0f64;
    let mut degenerate = 0usize;
    for _ in 0..200 {
        let (seq, mut cfg) = random_case(&mut r, 6);
        cfg.codec.kind = CodecKind::RefLossless;
        cfg.codec.qshift = 0;
        cfg.bitdepth = 10;
        let (bytes, etrace) = encode_with_trace(&seq, &cfg).unwrap();
        let c = parse(&bytes).unwrap();
        let (out, dtrace) = decode_with(&bytes, &DecoderOptions::default()).unwrap();

        let periods: Vec<_> = c.period_records().collect();
        for (f, z) in dtrace.refined.iter().enumerate() {
            let p = periods.iter().find(|p| (p.first_frame as usize..(p.first_frame + p.frame_count) as usize).contains(&f)).unwrap();
            let got = reduced_stats(z.data()).unwrap();
            let want = p.reduced;
            // a constant tensor has nothing to rescale; skip it
            if want.sigma == 0.0 {
                continue;
            }
            let scale = (want.mu.abs() as f64).max(want.sigma as f64);
            let err = ((got.mu - want.mu).abs() as f64).max((got.sigma - want.sigma).abs() as f64) / scale;
            worst_z = worst_z.max(err);
            z_checked += 1;
            if err > 1e-5 {
                z_fail += 1;
            }
        }

        let gp = c.header.global_stats_period as usize;
        let layers = c.header.layers.len();
        for (t, set) in out.sets().iter().enumerate() {
            // zero spread before refinement: only the mean can be restored
            if global_stats(&dtrace.unrefined[t]).unwrap().sigma == 0.0 {
                degenerate += 1;
                continue;
            }
            let want = etrace.global[t / gp];
            let got = global_stats(set).unwrap();
            let scale = (want.mu.abs() as f64).max(want.sigma as f64);
            let tol = 2f64.powi(-8) * scale;
            let mean_err = (got.mu - want.mu).abs() as f64;
            let sigma_err = (got.sigma - want.sigma).abs() as f64;
            let bucket = if layers == 1 { &mut single } else { &mut multi };
            bucket.0 += 1;
            bucket.1 += (sigma_err > tol) as usize;
            bucket.2 += (mean_err > tol) as usize;
            bucket.3 += (sigma_err > tol || mean_err > tol) as usize;
            if layers == 1 {
                worst_single = worst_single.max(mean_err.max(sigma_err) / scale);
            } else {
                worst_multi_mean = worst_multi_mean.max(mean_err / scale);
            }
        }
    }
    let pass = z_fail == 0 && single.3 + multi.3 == 0;
    outcome(
        pass,
        format!(
            "reduced: {}/{z_checked} within 1e-5 (worst {worst_z:.1e}); global, 1 layer: {}/{} within 2^-8 (worst {worst_single:.1e}); \
             global, 2-3 layers: sigma {}/{} ok, mean {}/{} ok (worst {worst_multi_mean:.2}); {degenerate} flat sets skipped",
            z_checked - z_fail,
            single.0 - single.3,
            single.0,
            multi.0 - multi.1,
            multi.0,
            multi.0 - multi.2,
            multi.0,
        ),
    )
}

fn near_lossless() -> Outcome {
    let mut r = rng(4);
    let mut worst_ratio = 0.0f64;
    for i in 0..100 {
        let shape = (r.random_range(1..=8), r.random_range(1..=12), r.random_range(1..=12));
        let t = r.random_range(1..=5);
        let seq = random_sequence(&mut r, t, &[shape]);
        let cfg = EncoderConfig {
            transform: TransformConfig { kind: TransformKind::Identity, ..TransformConfig::default() },
            codec: CodecConfig { kind: CodecKind::RefLossless, ..CodecConfig::default() },
            ratio: TemporalRatio::X1,
            alpha: None,
            ..EncoderConfig::default()
        };
        let (bytes, etrace) = encode_with_trace(&seq, &cfg).unwrap();
        let (_, dtrace) = decode_with(&bytes, &DecoderOptions::default()).unwrap();
        for (t, set) in seq.sets().iter().enumerate() {
            let x = set.layers()[0].data();
            let norm = etrace.norm[t];
            let range = norm.max - norm.min;
            let z = unpack(&dtrace.dequantized[t], &dtrace.layouts[t]).unwrap();
            let err = x
                .iter()
                .zip(z.data())
                .map(|(&a, &b)| (norm.denormalize(b as f64) - a as f64).abs())
                .fold(0.0, f64::max);
            let bound = range * 2f64.powi(-10);
            if range > 0.0 {
                worst_ratio = worst_ratio.max(err / bound);
            }
            // float rounding of the dequantized values is far below 1e-9 of the bound
            if err > bound * (1.0 + 1e-9) + f32::EPSILON as f64 * norm.min.abs().max(norm.max.abs()) {
                return outcome(false, format!("sequence {i} set {t}: error {err:.3e} > bound {bound:.3e}"));
            }
        }
    }
    outcome(
        true,
        format!("100 sequences, worst pre-refinement error {worst_ratio:.3} of (z_max - z_min)*2^-10"),
    )
}

fn temporal_exactness() -> Outcome {
    let plan4 = TemporalPlan::new(TemporalRatio::X2, 4).kept_indices;
    let plan5 = TemporalPlan::new(TemporalRatio::X2, 5).kept_indices;
    if plan4 != [0, 2, 3] || plan5 != [0, 2, 4] {
        return outcome(false, format!("kept indices 4 -> {plan4:?}, 5 -> {plan5:?}"));
    }
    let mut r = rng(5);
    for case in 0..200 {
        let t = r.random_range(1..=12);
        let shape = LayerShape::new(r.random_range(1..=3), r.random_range(1..=5), r.random_range(1..=5));
        // multiples of 1/8 keep every midpoint exactly representable
        let a: Vec<f32> = (0..shape.len()).map(|_| r.random_range(-512..=512) as f32 / 8.0).collect();
        let b: Vec<f32> = (0..shape.len()).map(|_| r.random_range(-64..=64) as f32 / 8.0).collect();
        let sets = (0..t)
            .map(|k| {
                let data = a.iter().zip(&b).map(|(&a, &b)| a + b * k as f32).collect();
                FeatureSet::new(vec![FeatureLayer::new(shape, data).unwrap()]).unwrap()
            })
            .collect();
        let seq = FeatureSequence::new(sets).unwrap();
        for ratio in [TemporalRatio::X1, TemporalRatio::X2] {
            let (kept, plan) = downsample(&seq, ratio).unwrap();
            for (k, &idx) in plan.kept_indices.iter().enumerate() {
                if kept.sets()[k] != seq.sets()[idx] {
                    return outcome(false, format!("case {case}: kept set {idx} altered"));
                }
            }
            if upsample(kept, &plan).unwrap() != seq {
                return outcome(false, format!("case {case}: {}x round trip not exact ({t} sets)", ratio.factor()));
            }
        }
    }
    outcome(true, "4-set keeps [0, 2, 3], 5-set keeps [0, 2, 4]; 200 affine sequences exact at 1x and 2x")
}

/// Independent oracle: sort each channel, range from the ends.
fn oracle_activity(z: &FeatureLayer, alpha: f64) -> Vec<bool> {
    let ranges: Vec<f64> = (0..z.channels())
        .map(|c| {
            let mut v: Vec<f32> = z.channel(c).to_vec();
            v.sort_by(f32::total_cmp);
            v[v.len() - 1] as f64 - v[0] as f64
        })
        .collect();
    let t = alpha * ranges.iter().sum::<f64>() / ranges.len() as f64;
    let mut removed: Vec<bool> = ranges.iter().map(|&x| x < t).collect();
    if removed.iter().all(|&x| x) {
        let mut best = 0;
        for c in 1..ranges.len() {
            if ranges[c] > ranges[best] {
                best = c;
            }
        }
        removed[best] = false;
    }
    removed
}

fn channel_adjustment() -> Outcome {
    // hand oracle: channel 1 is flat and gets removed, then refilled with the
    // per-position mean of channels 0 and 2
    let z = FeatureLayer::new((3, 1, 2), vec![1.0, 5.0, 2.0, 2.0, 3.0, -1.0]).unwrap();
    let map = activity_map(&channel_ranges(&z), 0.1).unwrap();
    if map.removed != [false, true, false] {
        return outcome(false, format!("hand case map {:?}", map.removed));
    }
    let restored = restore_channels(&drop_channels(&z, &map).unwrap(), &map).unwrap();
    if restored.data() != [1.0, 5.0, 2.0, 2.0, 3.0, -1.0] {
        return outcome(false, format!("hand case restored {:?}", restored.data()));
    }

    let mut r = rng(6);
    let mut removed_total = 0usize;
    for case in 0..500 {
        let shape = (r.random_range(1..=16), r.random_range(1..=6), r.random_range(1..=6));
        let mut z = random_layer(&mut r, shape, 0.0, 10.0);
        // squash some channels so the threshold has something to do
        let mut data = z.clone().into_data();
        let plane = shape.1 * shape.2;
        for c in 0..shape.0 {
            if r.random_bool(0.3) {
                let s = r.random_range(0.0f32..0.2);
                for v in &mut data[c * plane..(c + 1) * plane] {
                    *v *= s;
                }
            }
        }
        z = FeatureLayer::new(shape, data).unwrap();
        let alpha = r.random_range(0.001..0.999);
        let map = activity_map(&channel_ranges(&z), alpha).unwrap();
        if map.removed != oracle_activity(&z, alpha) {
            return outcome(false, format!("case {case}: activity map disagrees with oracle"));
        }
        removed_total += map.len() - map.kept_count();
        let back = ActivityMap::from_bits(&map.to_bits(), map.len()).unwrap();
        if back.removed != map.removed {
            return outcome(false, format!("case {case}: bitfield round trip"));
        }
        let kept = drop_channels(&z, &map).unwrap();
        let out = restore_channels(&kept, &map).unwrap();
        let kept_idx: Vec<usize> = (0..map.len()).filter(|&c| !map.removed[c]).collect();
        for c in 0..map.len() {
            if !map.removed[c] {
                if out.channel(c).iter().zip(z.channel(c)).any(|(a, b)| a.to_bits() != b.to_bits()) {
                    return outcome(false, format!("case {case}: kept channel {c} changed"));
                }
            } else {
                for i in 0..plane {
                    let mean = kept_idx.iter().map(|&k| z.channel(k)[i] as f64).sum::<f64>() / kept_idx.len() as f64;
                    if out.channel(c)[i] != mean as f32 {
                        return outcome(false, format!("case {case}: fill of channel {c} at {i}"));
                    }
                }
            }
        }
    }
    outcome(true, format!("hand case ok; 500 random tensors match oracle, {removed_total} channels removed and refilled"))
}

fn rate_monotonicity() -> Outcome {
    let mut r = rng(7);
    let mut checks = 0;
    for i in 0..20 {
        let t = r.random_range(2..=12);
        let (shapes, kind) = if r.random_bool(0.5) {
            (pyramid_shapes(r.random_range(1..=3), r.random_range(1..=4), 2 * r.random_range(1..=4)), TransformKind::PyramidFuse)
        } else {
            (vec![(r.random_range(1..=8), r.random_range(2..=16), r.random_range(2..=16))], TransformKind::Identity)
        };
        let seq = random_sequence(&mut r, t, &shapes);
        let base = EncoderConfig {
            transform: TransformConfig { kind, ..TransformConfig::default() },
            ..EncoderConfig::default()
        };
        let size = |ratio: TemporalRatio, kind: CodecKind, q: u8| {
            let mut cfg = base.clone();
            cfg.ratio = ratio;
            cfg.codec.kind = kind;
            cfg.codec.qshift = q;
            encode(&seq, &cfg).unwrap().len()
        };
        for ratio in [TemporalRatio::X1, TemporalRatio::X2] {
            let sizes: Vec<usize> = (0..=8).map(|q| size(ratio, CodecKind::RefLossy, q)).collect();
            if sizes.windows(2).any(|w| w[1] > w[0]) {
                return outcome(false, format!("sequence {i}, {}x: sizes over qshift {sizes:?}", ratio.factor()));
            }
            checks += 8;
        }
        for (kind, q) in [(CodecKind::RefLossless, 0), (CodecKind::RefLossy, 3)] {
            let (one, two) = (size(TemporalRatio::X1, kind, q), size(TemporalRatio::X2, kind, q));
            if two > one {
                return outcome(false, format!("sequence {i}: 2x stream {two} B > 1x stream {one} B"));
            }
            checks += 1;
        }
    }
    outcome(true, format!("20 sequences, {checks} ordered pairs non-increasing"))
}

// test-only PCHIP, written from the textbook definition
fn oracle_pchip(x: &[f64], y: &[f64], v: f64) -> f64 {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d = vec![s[0], s[0]];
    } else {
        for i in 1..n - 1 {
            if s[i - 1] * s[i] > 0.0 {
                let (w1, w2) = (2.0 * h[i] + h[i - 1], h[i] + 2.0 * h[i - 1]);
                d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
            }
        }
        let end = |h0: f64, h1: f64, s0: f64, s1: f64| {
            let e = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
            if e * s0 <= 0.0 {
                0.0
            } else if s0 * s1 <= 0.0 && e.abs() > 3.0 * s0.abs() {
                3.0 * s0
            } else {
                e
            }
        };
        d[0] = end(h[0], h[1], s[0], s[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
    }
    let mut k = 0;
    while k < n - 2 && v > x[k + 1] {
        k += 1;
    }
    let t = (v - x[k]) / h[k];
    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    h00 * y[k] + h10 * h[k] * d[k] + h01 * y[k + 1] + h11 * h[k] * d[k + 1]
}

fn oracle_bd_rate(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let prep = |c: &[(f64, f64)]| {
        let mut c = c.to_vec();
        c.sort_by(|p, q| p.1.total_cmp(&q.1));
        (c.iter().map(|p| p.1).collect::<Vec<_>>(), c.iter().map(|p| p.0.log10()).collect::<Vec<_>>())
    };
    let (qa, la) = prep(a);
    let (qb, lb) = prep(b);
    let lo = qa[0].max(qb[0]);
    let hi = qa[qa.len() - 1].min(qb[qb.len() - 1]);
    let steps = 20_000;
    let dx = (hi - lo) / steps as f64;
    let f = |v: f64| oracle_pchip(&qb, &lb, v) - oracle_pchip(&qa, &la, v);
    let mut acc = 0.5 * (f(lo) + f(hi));
    for i in 1..steps {
        acc += f(lo + i as f64 * dx);
    }
    (10f64.powf(acc * dx / (hi - lo)) - 1.0) * 100.0
}

fn curve(points: &[(f64, f64)]) -> RateCurve {
    RateCurve::new(points.iter().map(|&(rate, quality)| RatePoint { rate, quality }).collect()).unwrap()
}

fn bd_rate_correctness() -> Outcome {
    let a = [(100.0, 30.0), (200.0, 34.0), (400.0, 37.0), (800.0, 39.0)];
    let half = a.map(|(r, q)| (r / 2.0, q));
    let same = bd_rate(&curve(&a), &curve(&a)).unwrap();
    let h = bd_rate(&curve(&a), &curve(&half)).unwrap();
    if same != 0.0 || (h + 50.0).abs() > 0.01 {
        return outcome(false, format!("bd(A, A) = {same}, half rate = {h}"));
    }
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let mut make = || {
            let mut rate = r.random_range(0.05..2.0);
            let mut q = r.random_range(0.3..0.6);
            (0..4)
                .map(|_| {
                    rate *= r.random_range(1.2..3.0);
                    q += r.random_range(0.01..0.15);
                    (rate, q)
                })
                .collect::<Vec<_>>()
        };
        let (ca, cb) = (make(), make());
        let got = match bd_rate(&curve(&ca), &curve(&cb)) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let want = oracle_bd_rate(&ca, &cb);
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 0.1 {
            return outcome(false, format!("curve pair {i}: {got:.4}% vs oracle {want:.4}%"));
        }
    }
    outcome(true, format!("bd(A, A) = 0, half rate {h:.6}%, 500 random pairs within {worst:.1e} pp of dense oracle"))
}

fn complexity_arithmetic() -> Outcome {
    // (task, dataset, BD-rate %, encoder ratio, decoder ratio) as printed
    let rows = [
        ("Instance Segmentation", "OpenImagesV6", -94.24, 6.15, 0.26),
        ("Object Detection", "OpenImagesV6", -95.45, 14.34, 0.22),
        ("Object Detection", "SFU (Class A/B)", -38.13, 3.02, 0.28),
        ("Object Detection", "SFU (Class C)", -85.55, 3.41, 0.48),
        ("Object Detection", "SFU (Class D)", -85.91, 2.59, 0.36),
        ("Object Tracking", "TVD", -94.57, 0.78, 0.19),
        ("Object Tracking", "HiEve (1080p)", -94.58, 0.43, 0.12),
        ("Object Tracking", "HiEve (720p)", -92.67, 0.43, 0.12),
    ];
    let equal = |f: fn(&(&str, &str, f64, f64, f64)) -> f64| {
        aggregate(&rows.iter().map(|r| (f(r), 1.0)).collect::<Vec<_>>()).unwrap()
    };
    let bd = equal(|r| r.2);
    let enc = equal(|r| r.3);
    let dec = equal(|r| r.4);
    // each task weighted equally, datasets equally within a task
    let per_task = |f: fn(&(&str, &str, f64, f64, f64)) -> f64| {
        let tasks = ["Instance Segmentation", "Object Detection", "Object Tracking"];
        let w: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (f(r), 1.0 / rows.iter().filter(|s| s.0 == r.0).count() as f64 / tasks.len() as f64))
            .collect();
        aggregate(&w).unwrap()
    };
    let (enc_t, dec_t) = (per_task(|r| r.3), per_task(|r| r.4));
    let ok = |e: f64, d: f64| (e - 4.39).abs() <= 0.01 && (d - 0.27).abs() <= 0.01;
    outcome(
        ok(enc, dec) || ok(enc_t, dec_t),
        format!(
            "printed overall 4.39 / 0.27; equal row weights give {enc:.2} / {dec:.3} (the same weights reproduce BD-rate {bd:.2}%), \
             equal task weights give {enc_t:.2} / {dec_t:.3}; no weights are printed"
        ),
    )
}

// recorded on x86_64 Linux; any other host must reproduce it byte for byte
const GOLDEN_SHA256: &str = "1989516af59a655384683ba1501bb39052aa022b7c983837846eaf2f589983f2";

fn determinism() -> Outcome {
    let mut r = rng(2024);
    let seq = random_sequence(&mut r, 7, &pyramid_shapes(3, 4, 4));
    let dir = tempfile::TempDir::new().unwrap();
    let input = dir.path().join("in.fcft");
    fcm_core::tensor::save_feature_sequence(&seq, &input).unwrap();
    let mut streams = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.fcmb"));
        let status = Command::new(env!("CARGO_BIN_EXE_fcm"))
            .arg("encode")
            .arg(&input)
            .arg(&out)
            .args(["--transform", "pyramid_fuse", "--target-channels", "8", "--ratio", "2"])
            .args(["--alpha", "0.1", "--codec", "ref_lossy", "--qshift", "1", "--intra-period", "4"])
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("encode failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        streams.push(std::fs::read(&out).unwrap());
    }
    let digest: String = Sha256::digest(&streams[0]).iter().map(|b| format!("{b:02x}")).collect();
    if streams[0] != streams[1] {
        return outcome(false, "two encode processes produced different streams");
    }
    outcome(
        digest == GOLDEN_SHA256,
        format!(
            "two processes byte-identical ({} B), sha256 {digest} {} the frozen digest; second host platform not exercised here",
            streams[0].len(),
            if digest == GOLDEN_SHA256 { "matches" } else { "DOES NOT match" }
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("bitstream round trip", bitstream_round_trip),
        ("quantization bound", quantization_bound),
        ("refinement contracts", refinement_contracts),
        ("near-lossless end-to-end", near_lossless),
        ("temporal exactness", temporal_exactness),
        ("channel adjustment", channel_adjustment),
        ("rate monotonicity", rate_monotonicity),
        ("BD-rate correctness", bd_rate_correctness),
        ("complexity-ratio arithmetic", complexity_arithmetic),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (name, f) in criteria {
        let start = Instant::now();
        let o = catch_unwind(f).unwrap_or_else(|_| outcome(false, "panicked"));
        let took: Duration = start.elapsed();
        failed += !o.pass as usize;
        println!("{} {name}: {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, took.as_secs_f64());
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        criteria.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
