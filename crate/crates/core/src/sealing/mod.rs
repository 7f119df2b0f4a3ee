//! Hashing, signing, and verification of sealed bundles.
//!
//! A device seals an image by hashing it into the manifest and signing the
//! manifest's canonical bytes with its Ed25519 key. The signature covers
//! the manifest only; the image is bound through `image_sha256`.
//!
//! Trust boundary: [`DeviceKeyPair`] never exposes its secret seed except
//! through [`DeviceKeyPair::write_key_files`], and its `Debug` output
//! omits it.

mod keyfile;
mod sidecar;

use std::fmt;
use std::path::PathBuf;

use ed25519_dalek::{Signature, Signer, SigningKey, VerifyingKey};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::identity::{DeviceId, Location};
use crate::manifest::{ImageDigest, ManifestError, RealismManifest, ScoresMilli};
use crate::registry::{Registry, TrustStatus};
use crate::scoring::{DimensionScores, OverallScore};

pub use keyfile::{load_public_key_file, public_key_path, secret_key_path, PUBLIC_EXT, SECRET_EXT};
pub use sidecar::{
    read_container, read_sidecar, write_sidecar, ContainerError, Sidecar, SIDECAR_MAGIC,
};

pub const SEED_LEN: usize = 32;
pub const PUBLIC_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;

#[derive(Debug, Error)]
pub enum SealError {
    #[error("secret seed must be {SEED_LEN} bytes, got {0}")]
    BadSeedLength(usize),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{}: {msg}", path.display())]
    KeyFile { path: PathBuf, msg: String },
    #[error("{} already exists (use --force to overwrite)", .0.display())]
    KeyFileExists(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// SHA-256 of `bytes` as 64 lowercase hex characters.
pub fn image_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A device identity: id plus Ed25519 keypair derived from a 32-byte seed
/// per RFC 8032.
#[derive(Clone)]
pub struct DeviceKeyPair {
    device_id: DeviceId,
    signing: SigningKey,
}

impl fmt::Debug for DeviceKeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeviceKeyPair")
            .field("device_id", &self.device_id)
            .field("public_key", &self.public_key_hex())
            .finish_non_exhaustive()
    }
}

impl DeviceKeyPair {
    pub fn keygen(device_id: DeviceId, seed: &[u8]) -> Result<Self, SealError> {
        let seed: [u8; SEED_LEN] = seed
            .try_into()
            .map_err(|_| SealError::BadSeedLength(seed.len()))?;
        Ok(Self {
            device_id,
            signing: SigningKey::from_bytes(&seed),
        })
    }

    pub fn device_id(&self) -> &DeviceId {
        &self.device_id
    }

    pub fn public_key(&self) -> [u8; PUBLIC_KEY_LEN] {
        self.signing.verifying_key().to_bytes()
    }

    pub fn public_key_hex(&self) -> String {
        hex::encode(self.public_key())
    }

    /// Deterministic Ed25519 signature over `message`.
    pub fn sign(&self, message: &[u8]) -> [u8; SIGNATURE_LEN] {
        self.signing.sign(message).to_bytes()
    }
}

/// Strict Ed25519 verification. Returns false for malformed keys.
pub fn verify_signature(
    public_key: &[u8; PUBLIC_KEY_LEN],
    message: &[u8],
    signature: &[u8; SIGNATURE_LEN],
) -> bool {
    let Ok(key) = VerifyingKey::from_bytes(public_key) else {
        return false;
    };
    key.verify_strict(message, &Signature::from_bytes(signature))
        .is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBundle {
    pub image_bytes: Vec<u8>,
    pub manifest: RealismManifest,
    pub signature: [u8; SIGNATURE_LEN],
}

impl SealedBundle {
    pub fn sidecar_bytes(&self) -> Result<Vec<u8>, SealError> {
        write_sidecar(self)
    }
}

pub fn seal(
    image_bytes: &[u8],
    scores: &DimensionScores,
    overall: OverallScore,
    identity: &DeviceKeyPair,
    timestamp_unix: i64,
    location: Option<Location>,
) -> Result<SealedBundle, SealError> {
    let manifest = RealismManifest {
        device_id: identity.device_id.clone(),
        timestamp_unix,
        location,
        scores: ScoresMilli::quantize(scores, overall)?,
        image_sha256: ImageDigest::new(image_hash(image_bytes))?,
    };
    let signed = manifest.to_canonical()?;
    let signature = identity.sign(signed.as_bytes());
    Ok(SealedBundle {
        image_bytes: image_bytes.to_vec(),
        manifest,
        signature,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Authentic,
    TamperedImage,
    TamperedManifest,
    UntrustedDevice,
    UnknownDevice,
    Malformed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Authentic => "authentic",
            Verdict::TamperedImage => "tampered_image",
            Verdict::TamperedManifest => "tampered_manifest",
            Verdict::UntrustedDevice => "untrusted_device",
            Verdict::UnknownDevice => "unknown_device",
            Verdict::Malformed => "malformed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub signature_valid: bool,
    pub image_hash_match: bool,
    pub device_trusted: bool,
    pub manifest: Option<RealismManifest>,
    pub verdict: Verdict,
    /// Why a malformed sidecar was rejected.
    pub detail: Option<String>,
}

/// Check a sidecar and its image against the registry. Never fails; every
/// problem becomes a verdict, chosen in this order: malformed, unknown
/// device, bad signature, image mismatch, revoked device, authentic.
pub fn verify(image_bytes: &[u8], sidecar_bytes: &[u8], registry: &Registry) -> VerificationReport {
    let sidecar = match read_sidecar(sidecar_bytes) {
        Ok(s) => s,
        Err(e) => {
            return VerificationReport {
                signature_valid: false,
                image_hash_match: false,
                device_trusted: false,
                manifest: None,
                verdict: Verdict::Malformed,
                detail: Some(e.to_string()),
            }
        }
    };
    let image_hash_match = image_hash(image_bytes) == sidecar.manifest.image_sha256.as_str();
    let entry = registry.lookup(sidecar.manifest.device_id.as_str());
    let signature_valid = entry.is_some_and(|e| {
        verify_signature(&e.public_key, &sidecar.manifest_bytes, &sidecar.signature)
    });
    let device_trusted = entry.is_some_and(|e| e.status == TrustStatus::Trusted);

    let verdict = if entry.is_none() {
        Verdict::UnknownDevice
    } else if !signature_valid {
        Verdict::TamperedManifest
    } else if !image_hash_match {
        Verdict::TamperedImage
    } else if !device_trusted {
        Verdict::UntrustedDevice
    } else {
        Verdict::Authentic
    };
    VerificationReport {
        signature_valid,
        image_hash_match,
        device_trusted,
        manifest: Some(sidecar.manifest),
        verdict,
        detail: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::RegistryEntry;

    fn identity() -> DeviceKeyPair {
        DeviceKeyPair::keygen(DeviceId::new("CAM-001").unwrap(), &[42u8; 32]).unwrap()
    }

    fn registry_for(kp: &DeviceKeyPair) -> Registry {
        Registry::new()
            .insert(RegistryEntry::trusted(
                kp.device_id().clone(),
                kp.public_key(),
            ))
            .unwrap()
    }

    fn scores() -> (DimensionScores, OverallScore) {
        (
            DimensionScores::from_array([0.9, 0.8, 0.7, 0.6]),
            OverallScore::new(0.75),
        )
    }

    #[test]
    fn sha256_vectors() {
        assert_eq!(
            image_hash(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            image_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn single_bit_changes_digest() {
        let input = b"realseal".to_vec();
        let base = image_hash(&input);
        for byte in 0..input.len() {
            for bit in 0..8 {
                let mut m = input.clone();
                m[byte] ^= 1 << bit;
                assert_ne!(image_hash(&m), base);
            }
        }
    }

    #[test]
    fn keygen_is_deterministic_and_checks_length() {
        let a = identity();
        let b = identity();
        assert_eq!(a.public_key(), b.public_key());
        assert!(matches!(
            DeviceKeyPair::keygen(DeviceId::new("X").unwrap(), &[0u8; 31]),
            Err(SealError::BadSeedLength(31))
        ));
        assert!(!format!("{a:?}").contains(&hex::encode([42u8; 32])));
    }

    #[test]
    fn seal_then_verify() {
        let kp = identity();
        let (dims, overall) = scores();
        let bundle = seal(b"pixels", &dims, overall, &kp, 1_700_000_000, None).unwrap();
        assert_eq!(bundle.manifest.scores.overall, 750);
        assert_eq!(bundle.manifest.image_sha256.as_str(), image_hash(b"pixels"));
        let sidecar = bundle.sidecar_bytes().unwrap();
        let report = verify(b"pixels", &sidecar, &registry_for(&kp));
        assert_eq!(report.verdict, Verdict::Authentic);
        assert!(report.signature_valid && report.image_hash_match && report.device_trusted);
        assert_eq!(report.manifest.as_ref(), Some(&bundle.manifest));

        let again = seal(b"pixels", &dims, overall, &kp, 1_700_000_000, None).unwrap();
        assert_eq!(again.signature, bundle.signature);
    }

    #[test]
    fn zero_scores_quantize_to_zero() {
        let kp = identity();
        let dims = DimensionScores::from_array([0.0; 4]);
        let bundle = seal(b"", &dims, OverallScore::new(0.0), &kp, 0, None).unwrap();
        assert_eq!(bundle.manifest.scores, ScoresMilli::default());
    }

    #[test]
    fn verdicts() {
        let kp = identity();
        let (dims, overall) = scores();
        let bundle = seal(b"pixels", &dims, overall, &kp, 5, None).unwrap();
        let sidecar = bundle.sidecar_bytes().unwrap();
        let reg = registry_for(&kp);

        assert_eq!(
            verify(b"pixelz", &sidecar, &reg).verdict,
            Verdict::TamperedImage
        );

        let mut bad_sig = sidecar.clone();
        *bad_sig.last_mut().unwrap() ^= 1;
        assert_eq!(
            verify(b"pixels", &bad_sig, &reg).verdict,
            Verdict::TamperedManifest
        );
        // Signature failure outranks an image mismatch.
        assert_eq!(
            verify(b"pixelz", &bad_sig, &reg).verdict,
            Verdict::TamperedManifest
        );

        let report = verify(b"pixels", &sidecar, &Registry::new());
        assert_eq!(report.verdict, Verdict::UnknownDevice);
        assert!(!report.device_trusted && !report.signature_valid && report.image_hash_match);

        let revoked = reg.revoke("CAM-001").unwrap();
        let report = verify(b"pixels", &sidecar, &revoked);
        assert_eq!(report.verdict, Verdict::UntrustedDevice);
        assert!(report.signature_valid && report.image_hash_match && !report.device_trusted);
        // A revoked device with a tampered image still reports the image.
        assert_eq!(
            verify(b"pixelz", &sidecar, &revoked).verdict,
            Verdict::TamperedImage
        );

        let report = verify(b"pixels", b"RSL2", &reg);
        assert_eq!(report.verdict, Verdict::Malformed);
        assert!(report.manifest.is_none());

        // Registered under the same id with someone else's key.
        let other = DeviceKeyPair::keygen(DeviceId::new("CAM-001").unwrap(), &[7u8; 32]).unwrap();
        assert_eq!(
            verify(b"pixels", &sidecar, &registry_for(&other)).verdict,
            Verdict::TamperedManifest
        );
    }

    #[test]
    fn invalid_registry_key_fails_closed() {
        let kp = identity();
        let (dims, overall) = scores();
        let sidecar = seal(b"x", &dims, overall, &kp, 5, None)
            .unwrap()
            .sidecar_bytes()
            .unwrap();
        // Not a valid curve point encoding.
        let reg = Registry::new()
            .insert(RegistryEntry::trusted(kp.device_id().clone(), [0xFF; 32]))
            .unwrap();
        assert_eq!(
            verify(b"x", &sidecar, &reg).verdict,
            Verdict::TamperedManifest
        );
    }
}
