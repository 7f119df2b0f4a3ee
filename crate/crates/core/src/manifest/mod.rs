//! The realism manifest: the metadata record a device signs.
//!
//! Scores travel as integer milli-units and coordinates as integer
//! micro-degrees, so the signed bytes never depend on float formatting.
//! The wire form is described in `MANIFEST.md` at the repository root.

mod canonical;

use std::fmt;

use thiserror::Error;

use crate::identity::{DeviceId, Location};
use crate::scoring::{DimensionScores, OverallScore};

pub use canonical::{canonical_encode, parse_manifest, CanonicalBytes};

pub const MANIFEST_VERSION: u32 = 1;
pub const ALGO_HASH: &str = "sha-256";
pub const ALGO_SIG: &str = "ed25519";
pub const ALGO_SCORING: &str = "realseal-v1";
pub const MAX_SCORE_MILLI: u16 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("malformed manifest at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("missing key {0:?}")]
    MissingKey(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("key {key:?} must be {expected}")]
    WrongType { key: String, expected: &'static str },
    #[error("{field} out of range: {value}")]
    OutOfRange { field: String, value: String },
    #[error("invalid device id {0:?}")]
    InvalidDeviceId(String),
    #[error("image_sha256 must be 64 lowercase hex chars, got {0:?}")]
    InvalidDigest(String),
    #[error("unsupported manifest version {0}")]
    UnsupportedVersion(String),
    #[error("unsupported algorithm {key}={value:?}")]
    UnsupportedAlgorithm { key: String, value: String },
    #[error("non-canonical encoding")]
    NonCanonical,
    #[error("score is not finite: {0}")]
    NonFiniteScore(String),
}

/// Clamp to `[0, 1]` and round half up to milli-units.
pub fn quantize_score(score: f64) -> Result<u16, ManifestError> {
    if !score.is_finite() {
        return Err(ManifestError::NonFiniteScore(score.to_string()));
    }
    Ok((1000.0 * score.clamp(0.0, 1.0) + 0.5).floor() as u16)
}

/// SHA-256 digest as 64 lowercase hex characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageDigest(String);

impl ImageDigest {
    pub fn new(hex: impl Into<String>) -> Result<Self, ManifestError> {
        let hex = hex.into();
        let ok = hex.len() == 64
            && hex
                .bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
        if ok {
            Ok(Self(hex))
        } else {
            Err(ManifestError::InvalidDigest(hex))
        }
    }

    pub fn from_bytes(digest: &[u8; 32]) -> Self {
        Self(hex::encode(digest))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ImageDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ScoresMilli {
    pub depth: u16,
    pub thermal: u16,
    pub audio_sync: u16,
    pub motion: u16,
    pub overall: u16,
}

impl ScoresMilli {
    pub fn quantize(dims: &DimensionScores, overall: OverallScore) -> Result<Self, ManifestError> {
        Ok(Self {
            depth: quantize_score(dims.depth)?,
            thermal: quantize_score(dims.thermal)?,
            audio_sync: quantize_score(dims.audio_sync)?,
            motion: quantize_score(dims.motion)?,
            overall: quantize_score(overall.value())?,
        })
    }

    /// `(name, value)` pairs in canonical key order.
    pub fn entries(&self) -> [(&'static str, u16); 5] {
        [
            ("audio_sync", self.audio_sync),
            ("depth", self.depth),
            ("motion", self.motion),
            ("overall", self.overall),
            ("thermal", self.thermal),
        ]
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        for (name, v) in self.entries() {
            if v > MAX_SCORE_MILLI {
                return Err(ManifestError::OutOfRange {
                    field: format!("scores.{name}"),
                    value: v.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Signed capture metadata. Version and algorithm identifiers are fixed
/// and implied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RealismManifest {
    pub device_id: DeviceId,
    pub timestamp_unix: i64,
    pub location: Option<Location>,
    pub scores: ScoresMilli,
    pub image_sha256: ImageDigest,
}

impl RealismManifest {
    pub fn validate(&self) -> Result<(), ManifestError> {
        self.scores.validate()
    }

    pub fn to_canonical(&self) -> Result<CanonicalBytes, ManifestError> {
        canonical_encode(self)
    }
}
