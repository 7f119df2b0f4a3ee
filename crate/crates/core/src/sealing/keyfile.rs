//! Key files: `<device_id>.sk` holds the 32-byte secret seed and
//! `<device_id>.pk` the public key, each as 64 lowercase hex characters
//! followed by a newline.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{DeviceKeyPair, SealError};
use crate::identity::DeviceId;
use crate::registry::parse_key_hex;

pub const SECRET_EXT: &str = "sk";
pub const PUBLIC_EXT: &str = "pk";

fn io_err(path: &Path, source: std::io::Error) -> SealError {
    SealError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn key_err(path: &Path, msg: &str) -> SealError {
    SealError::KeyFile {
        path: path.to_path_buf(),
        msg: msg.to_owned(),
    }
}

fn read_hex_key(path: &Path) -> Result<[u8; 32], SealError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let body = text.strip_suffix('\n').unwrap_or(&text);
    parse_key_hex(body).ok_or_else(|| key_err(path, "expected 64 lowercase hex characters"))
}

fn device_id_from_stem(path: &Path) -> Result<DeviceId, SealError> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| key_err(path, "file name is not a device id"))?;
    DeviceId::new(stem).map_err(|e| key_err(path, &e.to_string()))
}

pub fn secret_key_path(dir: &Path, device_id: &DeviceId) -> PathBuf {
    dir.join(format!("{device_id}.{SECRET_EXT}"))
}

pub fn public_key_path(dir: &Path, device_id: &DeviceId) -> PathBuf {
    dir.join(format!("{device_id}.{PUBLIC_EXT}"))
}

impl DeviceKeyPair {
    /// Write `<id>.sk` and `<id>.pk` into `dir`. Without `force`, refuses
    /// (and writes nothing) if either file exists.
    pub fn write_key_files(
        &self,
        dir: &Path,
        force: bool,
    ) -> Result<(PathBuf, PathBuf), SealError> {
        let sk = secret_key_path(dir, &self.device_id);
        let pk = public_key_path(dir, &self.device_id);
        if !force {
            for path in [&sk, &pk] {
                if path.exists() {
                    return Err(SealError::KeyFileExists(path.clone()));
                }
            }
        }
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        write_private(
            &sk,
            format!("{}\n", hex::encode(self.signing.to_bytes())).as_bytes(),
        )?;
        fs::write(&pk, format!("{}\n", self.public_key_hex())).map_err(|e| io_err(&pk, e))?;
        Ok((sk, pk))
    }

    /// Load a keypair from `<id>.sk`; the device id is the file stem.
    pub fn load_secret_key_file(path: &Path) -> Result<DeviceKeyPair, SealError> {
        let device_id = device_id_from_stem(path)?;
        let seed = read_hex_key(path)?;
        DeviceKeyPair::keygen(device_id, &seed)
    }
}

/// Read `<id>.pk`.
pub fn load_public_key_file(path: &Path) -> Result<(DeviceId, [u8; 32]), SealError> {
    Ok((device_id_from_stem(path)?, read_hex_key(path)?))
}

fn write_private(path: &Path, bytes: &[u8]) -> Result<(), SealError> {
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut file = opts.open(path).map_err(|e| io_err(path, e))?;
    file.write_all(bytes).map_err(|e| io_err(path, e))
}
