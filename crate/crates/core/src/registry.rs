//! Device trust store.
//!
//! File format (`registry.rsr`), one entry per LF-terminated line:
//!
//! ```text
//! # comment
//! CAM-001 trusted d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a
//! CAM-002 revoked 3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c
//! ```
//!
//! Comment and blank lines are skipped on load and not preserved on save.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::identity::DeviceId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("registry line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("registry line {line}: duplicate device id {id}")]
    Duplicate { line: usize, id: String },
    #[error("registry line {line}: public key must be 64 lowercase hex chars")]
    BadHex { line: usize },
    #[error("device {0} is already registered")]
    AlreadyRegistered(String),
    #[error("unknown device {0}")]
    UnknownDevice(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrustStatus {
    Trusted,
    Revoked,
}

impl TrustStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrustStatus::Trusted => "trusted",
            TrustStatus::Revoked => "revoked",
        }
    }
}

impl fmt::Display for TrustStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrustStatus {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trusted" => Ok(TrustStatus::Trusted),
            "revoked" => Ok(TrustStatus::Revoked),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub device_id: DeviceId,
    pub public_key: [u8; 32],
    pub status: TrustStatus,
}

impl RegistryEntry {
    pub fn trusted(device_id: DeviceId, public_key: [u8; 32]) -> Self {
        Self {
            device_id,
            public_key,
            status: TrustStatus::Trusted,
        }
    }

    pub fn public_key_hex(&self) -> String {
        hex::encode(self.public_key)
    }
}

/// Parse 64 lowercase hex characters into a 32-byte key.
pub fn parse_key_hex(s: &str) -> Option<[u8; 32]> {
    let lower = s.len() == 64
        && s.bytes()
            .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
    if !lower {
        return None;
    }
    let mut key = [0u8; 32];
    hex::decode_to_slice(s, &mut key).ok()?;
    Some(key)
}

/// Immutable snapshot; mutations return a new registry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    entries: Vec<RegistryEntry>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact, case-sensitive match.
    pub fn lookup(&self, device_id: &str) -> Option<&RegistryEntry> {
        self.entries
            .iter()
            .find(|e| e.device_id.as_str() == device_id)
    }

    pub fn insert(&self, entry: RegistryEntry) -> Result<Registry, RegistryError> {
        if self.lookup(entry.device_id.as_str()).is_some() {
            return Err(RegistryError::AlreadyRegistered(
                entry.device_id.to_string(),
            ));
        }
        let mut next = self.clone();
        next.entries.push(entry);
        Ok(next)
    }

    /// Mark a device revoked. Revoking an already revoked device is a no-op.
    pub fn revoke(&self, device_id: &str) -> Result<Registry, RegistryError> {
        let mut next = self.clone();
        let entry = next
            .entries
            .iter_mut()
            .find(|e| e.device_id.as_str() == device_id)
            .ok_or_else(|| RegistryError::UnknownDevice(device_id.to_owned()))?;
        entry.status = TrustStatus::Revoked;
        Ok(next)
    }
}

pub fn load_registry(bytes: &[u8]) -> Result<Registry, RegistryError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = 1 + bytes[..e.valid_up_to()]
            .iter()
            .filter(|b| **b == b'\n')
            .count();
        RegistryError::Syntax {
            line,
            msg: "not valid UTF-8".into(),
        }
    })?;
    let mut entries: Vec<RegistryEntry> = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split(' ').collect();
        let [id, status, key] = fields[..] else {
            return Err(RegistryError::Syntax {
                line,
                msg: format!(
                    "expected `device_id status pubkey_hex` separated by single spaces, got {} fields",
                    fields.len()
                ),
            });
        };
        let device_id = DeviceId::new(id).map_err(|e| RegistryError::Syntax {
            line,
            msg: e.to_string(),
        })?;
        let status = status.parse().map_err(|_| RegistryError::Syntax {
            line,
            msg: format!("status {status:?} is neither trusted nor revoked"),
        })?;
        let public_key = parse_key_hex(key).ok_or(RegistryError::BadHex { line })?;
        if entries.iter().any(|e| e.device_id == device_id) {
            return Err(RegistryError::Duplicate {
                line,
                id: device_id.to_string(),
            });
        }
        entries.push(RegistryEntry {
            device_id,
            public_key,
            status,
        });
    }
    Ok(Registry { entries })
}

pub fn save_registry(registry: &Registry) -> Vec<u8> {
    let mut out = String::new();
    for e in &registry.entries {
        out.push_str(&format!(
            "{} {} {}\n",
            e.device_id,
            e.status,
            e.public_key_hex()
        ));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEY1: &str = "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a";
    const KEY2: &str = "3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c";

    fn fixture() -> String {
        format!("CAM-001 trusted {KEY1}\nCAM-002 revoked {KEY2}\n")
    }

    #[test]
    fn load_single_entry() {
        let reg = load_registry(format!("CAM-001 trusted {KEY1}\n").as_bytes()).unwrap();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.entries()[0].public_key_hex(), KEY1);
        assert_eq!(reg.entries()[0].status, TrustStatus::Trusted);
    }

    #[test]
    fn duplicate_names_line() {
        let text = format!("# keys\nCAM-001 trusted {KEY1}\nCAM-001 trusted {KEY2}\n");
        assert_eq!(
            load_registry(text.as_bytes()),
            Err(RegistryError::Duplicate {
                line: 3,
                id: "CAM-001".into()
            })
        );
        assert!(load_registry(text.as_bytes())
            .unwrap_err()
            .to_string()
            .contains("line 3"));
    }

    #[test]
    fn canonical_roundtrip() {
        let text = fixture();
        assert_eq!(
            save_registry(&load_registry(text.as_bytes()).unwrap()),
            text.as_bytes()
        );
    }

    #[test]
    fn comments_and_missing_final_newline() {
        let text = format!("# header\n\nCAM-001 trusted {KEY1}");
        let reg = load_registry(text.as_bytes()).unwrap();
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn syntax_errors() {
        let upper = format!("CAM-001 trusted {}\n", KEY1.to_uppercase());
        assert_eq!(
            load_registry(upper.as_bytes()),
            Err(RegistryError::BadHex { line: 1 })
        );
        assert_eq!(
            load_registry(format!("CAM-001 trusted {}\n", &KEY1[..62]).as_bytes()),
            Err(RegistryError::BadHex { line: 1 })
        );
        assert!(matches!(
            load_registry(format!("CAM-001 maybe {KEY1}\n").as_bytes()),
            Err(RegistryError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            load_registry(format!("CAM-001  trusted {KEY1}\n").as_bytes()),
            Err(RegistryError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            load_registry(format!("CAM 001 trusted {KEY1}\n").as_bytes()),
            Err(RegistryError::Syntax { line: 1, .. })
        ));
        // CRLF leaves a '\r' on the key.
        assert_eq!(
            load_registry(format!("CAM-001 trusted {KEY1}\r\n").as_bytes()),
            Err(RegistryError::BadHex { line: 1 })
        );
    }

    #[test]
    fn lookup_is_exact() {
        let reg = load_registry(fixture().as_bytes()).unwrap();
        assert!(reg.lookup("CAM-001").is_some());
        assert!(reg.lookup("CAM-003").is_none());
        assert!(reg.lookup("cam-001").is_none());
    }

    #[test]
    fn revoke_is_idempotent() {
        let reg = load_registry(fixture().as_bytes()).unwrap();
        let once = reg.revoke("CAM-001").unwrap();
        assert_eq!(once.lookup("CAM-001").unwrap().status, TrustStatus::Revoked);
        assert_eq!(reg.lookup("CAM-001").unwrap().status, TrustStatus::Trusted);
        let twice = once.revoke("CAM-001").unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.lookup("CAM-002"), reg.lookup("CAM-002"));
        assert_eq!(
            reg.revoke("CAM-404"),
            Err(RegistryError::UnknownDevice("CAM-404".into()))
        );
    }

    #[test]
    fn insert_rejects_duplicates() {
        let reg = Registry::new()
            .insert(RegistryEntry::trusted(
                DeviceId::new("A").unwrap(),
                parse_key_hex(KEY1).unwrap(),
            ))
            .unwrap();
        assert!(reg
            .insert(RegistryEntry::trusted(DeviceId::new("A").unwrap(), [0; 32]))
            .is_err());
    }
}
