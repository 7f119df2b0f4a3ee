//! Device identifiers and capture locations shared by captures, manifests
//! and the registry.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub const MAX_DEVICE_ID_LEN: usize = 64;
pub const MAX_LAT_MICRODEG: i64 = 90_000_000;
pub const MAX_LON_MICRODEG: i64 = 180_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentityError {
    #[error("invalid device id {0:?}: expected 1-64 chars from [A-Za-z0-9_-]")]
    DeviceId(String),
    #[error("location out of range: lat {lat} / lon {lon} micro-degrees")]
    Location { lat: i64, lon: i64 },
}

/// Camera identifier. 1 to 64 ASCII characters from `[A-Za-z0-9_-]`,
/// compared case-sensitively.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeviceId(String);

impl DeviceId {
    pub fn new(id: impl Into<String>) -> Result<Self, IdentityError> {
        let id = id.into();
        if is_valid_device_id(&id) {
            Ok(Self(id))
        } else {
            Err(IdentityError::DeviceId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub fn is_valid_device_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= MAX_DEVICE_ID_LEN
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for DeviceId {
    type Err = IdentityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl AsRef<str> for DeviceId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Capture position in integer micro-degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Location {
    lat_microdeg: i32,
    lon_microdeg: i32,
}

impl Location {
    pub fn new(lat_microdeg: i64, lon_microdeg: i64) -> Result<Self, IdentityError> {
        if lat_microdeg.abs() > MAX_LAT_MICRODEG || lon_microdeg.abs() > MAX_LON_MICRODEG {
            return Err(IdentityError::Location {
                lat: lat_microdeg,
                lon: lon_microdeg,
            });
        }
        Ok(Self {
            lat_microdeg: lat_microdeg as i32,
            lon_microdeg: lon_microdeg as i32,
        })
    }

    pub fn lat_microdeg(&self) -> i32 {
        self.lat_microdeg
    }

    pub fn lon_microdeg(&self) -> i32 {
        self.lon_microdeg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_id_charset() {
        assert!(DeviceId::new("CAM-001").is_ok());
        assert!(DeviceId::new("a_b-C9").is_ok());
        assert!(DeviceId::new("").is_err());
        assert!(DeviceId::new("cam 1").is_err());
        assert!(DeviceId::new("cam\"1").is_err());
        assert!(DeviceId::new("é").is_err());
        assert!(DeviceId::new("x".repeat(64)).is_ok());
        assert!(DeviceId::new("x".repeat(65)).is_err());
    }

    #[test]
    fn location_bounds() {
        assert!(Location::new(90_000_000, -180_000_000).is_ok());
        assert!(Location::new(90_000_001, 0).is_err());
        assert!(Location::new(0, -180_000_001).is_err());
    }
}
