//! `.rsl` sidecar container:
//!
//! ```text
//! "RSL1" | u32 BE manifest length | canonical manifest | u32 BE 64 | signature
//! ```
//!
//! The image travels as a separate file.

use thiserror::Error;

use super::{SealError, SealedBundle, SIGNATURE_LEN};
use crate::manifest::{parse_manifest, ManifestError, RealismManifest};

pub const SIDECAR_MAGIC: &[u8; 4] = b"RSL1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("bad magic")]
    BadMagic,
    #[error("truncated")]
    Truncated,
    #[error("signature length {0}, expected 64")]
    SignatureLength(u32),
    #[error("{0} trailing bytes after signature")]
    TrailingBytes(usize),
    #[error("manifest: {0}")]
    Manifest(#[from] ManifestError),
}

/// A parsed sidecar: the manifest exactly as signed, plus the signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sidecar {
    pub manifest_bytes: Vec<u8>,
    pub manifest: RealismManifest,
    pub signature: [u8; SIGNATURE_LEN],
}

pub fn write_sidecar(bundle: &SealedBundle) -> Result<Vec<u8>, SealError> {
    let manifest = bundle.manifest.to_canonical()?;
    let manifest = manifest.as_bytes();
    let len = u32::try_from(manifest.len()).expect("manifest fits in u32");
    let mut out = Vec::with_capacity(12 + manifest.len() + SIGNATURE_LEN);
    out.extend_from_slice(SIDECAR_MAGIC);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(manifest);
    out.extend_from_slice(&(SIGNATURE_LEN as u32).to_be_bytes());
    out.extend_from_slice(&bundle.signature);
    Ok(out)
}

/// Split a container into manifest bytes and signature without looking at
/// the manifest.
pub fn read_container(bytes: &[u8]) -> Result<(&[u8], [u8; SIGNATURE_LEN]), ContainerError> {
    let magic = bytes.get(..4).ok_or(ContainerError::Truncated)?;
    if magic != SIDECAR_MAGIC {
        return Err(ContainerError::BadMagic);
    }
    let mut pos: usize = 4;
    let mut take = |n: usize| -> Result<&[u8], ContainerError> {
        let end = pos.checked_add(n).ok_or(ContainerError::Truncated)?;
        let out = bytes.get(pos..end).ok_or(ContainerError::Truncated)?;
        pos = end;
        Ok(out)
    };
    let be32 = |b: &[u8]| u32::from_be_bytes(b.try_into().unwrap());

    let manifest_len = be32(take(4)?) as usize;
    let manifest = take(manifest_len)?;
    let sig_len = be32(take(4)?);
    if sig_len as usize != SIGNATURE_LEN {
        return Err(ContainerError::SignatureLength(sig_len));
    }
    let signature: [u8; SIGNATURE_LEN] = take(SIGNATURE_LEN)?.try_into().unwrap();
    if pos != bytes.len() {
        return Err(ContainerError::TrailingBytes(bytes.len() - pos));
    }
    Ok((manifest, signature))
}

pub fn read_sidecar(bytes: &[u8]) -> Result<Sidecar, ContainerError> {
    let (manifest_bytes, signature) = read_container(bytes)?;
    let manifest = parse_manifest(manifest_bytes)?;
    Ok(Sidecar {
        manifest_bytes: manifest_bytes.to_vec(),
        manifest,
        signature,
    })
}
