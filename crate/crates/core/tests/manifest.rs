use proptest::prelude::*;
use realseal::identity::{DeviceId, Location};
use realseal::manifest::{
    canonical_encode, parse_manifest, quantize_score, ImageDigest, ManifestError, RealismManifest,
    ScoresMilli,
};

fn manifest() -> impl Strategy<Value = RealismManifest> {
    let scores = [
        0u16..=1000,
        0u16..=1000,
        0u16..=1000,
        0u16..=1000,
        0u16..=1000,
    ]
    .prop_map(
        |[depth, thermal, audio_sync, motion, overall]| ScoresMilli {
            depth,
            thermal,
            audio_sync,
            motion,
            overall,
        },
    );
    let location = prop::option::of(
        (-90_000_000i64..=90_000_000, -180_000_000i64..=180_000_000)
            .prop_map(|(lat, lon)| Location::new(lat, lon).unwrap()),
    );
    (
        "[A-Za-z0-9_-]{1,64}",
        any::<i64>(),
        location,
        scores,
        any::<[u8; 32]>(),
    )
        .prop_map(|(id, ts, location, scores, digest)| RealismManifest {
            device_id: DeviceId::new(id).unwrap(),
            timestamp_unix: ts,
            location,
            scores,
            image_sha256: ImageDigest::from_bytes(&digest),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn round_trip(m in manifest()) {
        let bytes = canonical_encode(&m).unwrap();
        let back = parse_manifest(bytes.as_bytes()).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(canonical_encode(&back).unwrap().into_vec(), bytes.into_vec());
    }

    #[test]
    fn distinct_manifests_encode_distinctly(a in manifest(), b in manifest()) {
        let (ea, eb) = (canonical_encode(&a).unwrap(), canonical_encode(&b).unwrap());
        prop_assert_eq!(a == b, ea.as_bytes() == eb.as_bytes());
    }

    #[test]
    fn single_field_change_changes_bytes(m in manifest(), delta in 1u16..1000) {
        let mut other = m.clone();
        other.scores.overall = (m.scores.overall + delta) % 1001;
        prop_assert_ne!(canonical_encode(&m).unwrap().into_vec(), canonical_encode(&other).unwrap().into_vec());
    }

    #[test]
    fn accepted_byte_strings_reencode_identically(m in manifest(), pos in any::<prop::sample::Index>(), byte in any::<u8>()) {
        let mut bytes = canonical_encode(&m).unwrap().into_vec();
        let i = pos.index(bytes.len());
        bytes[i] = byte;
        if let Ok(parsed) = parse_manifest(&bytes) {
            prop_assert_eq!(canonical_encode(&parsed).unwrap().into_vec(), bytes);
        }
    }

    #[test]
    fn quantize_monotone_and_idempotent(a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (qlo, qhi) = (quantize_score(lo).unwrap(), quantize_score(hi).unwrap());
        prop_assert!(qlo <= qhi && qhi <= 1000);
        prop_assert_eq!(quantize_score(qlo as f64 / 1000.0).unwrap(), qlo);
    }
}

fn minimal() -> RealismManifest {
    RealismManifest {
        device_id: DeviceId::new("CAM-001").unwrap(),
        timestamp_unix: 1_700_000_000,
        location: None,
        scores: ScoresMilli {
            depth: 0,
            thermal: 0,
            audio_sync: 500,
            motion: 1000,
            overall: 0,
        },
        image_sha256: ImageDigest::new("0".repeat(64)).unwrap(),
    }
}

fn encoded(m: &RealismManifest) -> String {
    String::from_utf8(canonical_encode(m).unwrap().into_vec()).unwrap()
}

#[test]
fn quantize_examples() {
    assert_eq!(quantize_score(0.0).unwrap(), 0);
    assert_eq!(quantize_score(1.0).unwrap(), 1000);
    assert_eq!(quantize_score(0.0005).unwrap(), 1);
    assert_eq!(quantize_score(0.956770).unwrap(), 957);
    assert_eq!(quantize_score(-3.0).unwrap(), 0);
    assert_eq!(quantize_score(7.0).unwrap(), 1000);
    assert!(matches!(
        quantize_score(f64::NAN),
        Err(ManifestError::NonFiniteScore(_))
    ));
    assert!(quantize_score(f64::INFINITY).is_err());
}

#[test]
fn location_sits_between_digest_and_scores() {
    let mut m = minimal();
    m.location = Some(Location::new(12_345_678, -98_765_432).unwrap());
    let text = encoded(&m);
    let needle = format!(
        r#""image_sha256":"{}","location":{{"lat_microdeg":12345678,"lon_microdeg":-98765432}},"scores":"#,
        "0".repeat(64)
    );
    assert!(text.contains(&needle), "{text}");
}

#[test]
fn inserted_space_is_non_canonical() {
    let text = encoded(&minimal());
    for i in [1, text.find(':').unwrap() + 1, text.len() - 1] {
        let mut spaced = text.clone();
        spaced.insert(i, ' ');
        assert_eq!(
            parse_manifest(spaced.as_bytes()),
            Err(ManifestError::NonCanonical),
            "{spaced}"
        );
    }
    let mut newline = text.clone();
    newline.push('\n');
    assert!(parse_manifest(newline.as_bytes()).is_err());
}

#[test]
fn reordered_keys_are_non_canonical() {
    let text = encoded(&minimal()).replace(
        r#""hash":"sha-256","scoring":"realseal-v1""#,
        r#""scoring":"realseal-v1","hash":"sha-256""#,
    );
    assert_eq!(
        parse_manifest(text.as_bytes()),
        Err(ManifestError::NonCanonical)
    );
}

#[test]
fn out_of_range_score() {
    let text = encoded(&minimal()).replace(r#""depth":0"#, r#""depth":1001"#);
    let err = parse_manifest(text.as_bytes()).unwrap_err();
    assert!(matches!(err, ManifestError::OutOfRange { .. }));
    assert!(err.to_string().contains("out of range"));
}

#[test]
fn structural_errors() {
    let text = encoded(&minimal());
    let cases = [
        (text.replace(r#""version":1"#, r#""version":2"#), "version"),
        (
            text.replace(r#""sig":"ed25519""#, r#""sig":"rsa""#),
            "algorithm",
        ),
        (text.replace(r#","version":1"#, ""), "missing"),
        (
            text.replace(r#""version":1"#, r#""version":1,"zzz":1"#),
            "unknown",
        ),
        (text.replace("CAM-001", "CAM 001"), "device id"),
        (text.replacen(&"0".repeat(64), &"A".repeat(64), 1), "digest"),
        (
            text.replace(
                r#""timestamp_unix":1700000000"#,
                r#""timestamp_unix":"1700000000""#,
            ),
            "type",
        ),
        (text[..text.len() - 1].to_string(), "truncated"),
        ("[]".to_string(), "array"),
        (String::new(), "empty"),
    ];
    for (input, what) in cases {
        assert!(parse_manifest(input.as_bytes()).is_err(), "{what}: {input}");
    }
}

#[test]
fn structurally_equal_manifests_encode_identically() {
    assert_eq!(encoded(&minimal()), encoded(&minimal().clone()));
}

#[test]
fn minimal_manifest_length_and_digest() {
    let bytes = canonical_encode(&minimal()).unwrap().into_vec();
    assert_eq!(bytes.len(), 288);
    assert_eq!(
        realseal::sealing::image_hash(&bytes),
        "9229e81c238aead35f2a236efd89f001acd9dd04cd531cd75e1dcda427cca036"
    );
    assert_eq!(&bytes[..10], b"{\"algos\":{");
}

#[test]
fn leading_zero_is_non_canonical() {
    let text = encoded(&minimal()).replace(r#""overall":0"#, r#""overall":007"#);
    assert_eq!(parse_manifest(text.as_bytes()), Err(ManifestError::NonCanonical));
    let text = encoded(&minimal()).replace(r#""motion":1000"#, r#""motion":1e3"#);
    assert!(matches!(parse_manifest(text.as_bytes()), Err(ManifestError::Syntax { .. })));
}
