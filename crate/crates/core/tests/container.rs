//! Container parsing against hostile input.

use fcm_core::bitstream::{parse, serialize, Container, SideRecord};
use fcm_core::codec::CodecKind;
use fcm_core::error::Error;
use fcm_core::pipeline::{decode, encode, EncoderConfig};
use fcm_core::tensor::{FeatureLayer, FeatureSequence, FeatureSet};
use fcm_core::transform::{TransformConfig, TransformKind};
use proptest::prelude::*;

fn stream(t: usize, codec: CodecKind) -> Vec<u8> {
    let sets = (0..t)
        .map(|k| {
            let layers = [(3, 8, 8), (3, 4, 4)]
                .iter()
                .map(|&s| {
                    let n = s.0 * s.1 * s.2;
                    FeatureLayer::new(s, (0..n).map(|i| ((i * 31 + k * 7) % 53) as f32 * 0.1 - 2.0).collect()).unwrap()
                })
                .collect();
            FeatureSet::new(layers).unwrap()
        })
        .collect();
    let mut cfg = EncoderConfig::default();
    cfg.codec.kind = codec;
    cfg.codec.qshift = 2;
    cfg.codec.intra_period = 2;
    encode(&FeatureSequence::new(sets).unwrap(), &cfg).unwrap()
}

#[test]
fn encoder_output_round_trips_structurally() {
    for codec in [CodecKind::RefLossless, CodecKind::RefLossy] {
        let bytes = stream(5, codec);
        let c = parse(&bytes).unwrap();
        assert_eq!(serialize(&c).unwrap(), bytes);
        assert_eq!(parse(&serialize(&c).unwrap()).unwrap(), c);
        assert_eq!(c.period_records().count(), 3);
        // both periods default to the intra period
        assert_eq!(c.global_records().count(), 3);
    }
}

#[test]
fn every_prefix_is_rejected() {
    let bytes = stream(3, CodecKind::RefLossy);
    for len in 0..bytes.len() {
        assert!(parse(&bytes[..len]).is_err(), "prefix of {len} bytes accepted");
        assert!(decode(&bytes[..len]).is_err());
    }
}

#[test]
fn trailing_garbage_is_rejected() {
    let mut bytes = stream(2, CodecKind::RefLossless);
    bytes.push(0);
    assert!(parse(&bytes).is_err());
}

#[test]
fn wrong_magic_and_version() {
    let mut bytes = stream(2, CodecKind::RefLossless);
    bytes[0] = b'X';
    assert!(matches!(parse(&bytes), Err(Error::BadMagic { .. })));
    let mut bytes = stream(2, CodecKind::RefLossless);
    bytes[4] = 9;
    assert!(matches!(parse(&bytes), Err(Error::UnsupportedVersion(9))));
}

#[test]
fn unknown_records_are_carried_but_ignored() {
    let bytes = stream(3, CodecKind::RefLossy);
    let mut c: Container = parse(&bytes).unwrap();
    c.records.insert(1, SideRecord::Unknown { kind: 0x40, body: b"vendor data".to_vec() });
    let with = serialize(&c).unwrap();
    assert_eq!(parse(&with).unwrap(), c);
    assert_eq!(decode(&with).unwrap(), decode(&bytes).unwrap());
}

#[test]
fn identity_single_layer_stream() {
    let data = (0..2 * 4 * 4).map(|i| i as f32).collect();
    let seq = FeatureSequence::new(vec![FeatureSet::new(vec![FeatureLayer::new((2, 4, 4), data).unwrap()]).unwrap()]).unwrap();
    let cfg = EncoderConfig {
        transform: TransformConfig { kind: TransformKind::Identity, ..TransformConfig::default() },
        ..EncoderConfig::default()
    };
    let bytes = encode(&seq, &cfg).unwrap();
    assert_eq!(&bytes[..4], b"FCMB");
    assert_eq!(decode(&bytes).unwrap().shape_signature(), seq.shape_signature());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse(&bytes);
        let _ = decode(&bytes);
    }

    #[test]
    fn mutated_streams_never_panic(edits in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..6)) {
        let mut bytes = stream(3, CodecKind::RefLossy);
        let n = bytes.len();
        for (at, v) in edits {
            bytes[at % n] = v;
        }
        if let Ok(c) = parse(&bytes) {
            prop_assert_eq!(serialize(&c).unwrap(), bytes.clone());
        }
        let _ = decode(&bytes);
    }

    #[test]
    fn random_header_after_magic(tail in proptest::collection::vec(any::<u8>(), 0..256)) {
        let mut bytes = b"FCMB\x01\x00".to_vec();
        bytes.extend(tail);
        let _ = parse(&bytes);
        let _ = decode(&bytes);
    }
}
