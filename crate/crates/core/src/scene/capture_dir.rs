//! Capture directory layout:
//!
//! ```text
//! capture.json       metadata
//! frame_0000.pgm     binary PGM per frame
//! depth_0000.rsd     "RSD1", u32 width, u32 height, f32 depths
//! thermal.rst        "RST1", u32 width, u32 height, f32 temps
//! audio.rsa          "RSA1", u32 sample_rate, u32 count, f32 samples
//! imu.rsi            "RSI1", u32 count, f32 yaw rates
//! ```
//!
//! All integers and reals are little-endian.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    decode_frame_pgm, encode_frame_pgm, AudioTrack, DepthMap, ImuTrace, SceneCapture, SceneError,
    ThermalMap,
};
use crate::identity::{DeviceId, Location};

const META_FILE: &str = "capture.json";
const DEPTH_MAGIC: &[u8; 4] = b"RSD1";
const THERMAL_MAGIC: &[u8; 4] = b"RST1";
const AUDIO_MAGIC: &[u8; 4] = b"RSA1";
const IMU_MAGIC: &[u8; 4] = b"RSI1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaptureMeta {
    width: u32,
    height: u32,
    frame_count: u32,
    frame_rate: u32,
    sample_rate: u32,
    pixels_per_radian: f64,
    device_id: String,
    timestamp_unix: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    location: Option<MetaLocation>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLocation {
    lat_microdeg: i64,
    lon_microdeg: i64,
}

fn frame_name(k: usize) -> String {
    format!("frame_{k:04}.pgm")
}

fn depth_name(k: usize) -> String {
    format!("depth_{k:04}.rsd")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), SceneError> {
    fs::write(path, bytes).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>, SceneError> {
    fs::read(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn u32_dim(v: usize, what: &str) -> Result<u32, SceneError> {
    u32::try_from(v).map_err(|_| SceneError::Invalid(format!("{what} {v} exceeds u32")))
}

pub fn write_capture_dir(capture: &SceneCapture, dir: &Path) -> Result<(), SceneError> {
    capture.validate()?;
    fs::create_dir_all(dir).map_err(|source| SceneError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let meta = CaptureMeta {
        width: u32_dim(capture.width(), "width")?,
        height: u32_dim(capture.height(), "height")?,
        frame_count: u32_dim(capture.frame_count(), "frame count")?,
        frame_rate: capture.frame_rate,
        sample_rate: capture.audio.sample_rate,
        pixels_per_radian: capture.pixels_per_radian,
        device_id: capture.device_id.to_string(),
        timestamp_unix: capture.timestamp_unix,
        location: capture.location.map(|l| MetaLocation {
            lat_microdeg: l.lat_microdeg().into(),
            lon_microdeg: l.lon_microdeg().into(),
        }),
    };
    let mut json = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
    json.push(b'\n');
    write_file(&dir.join(META_FILE), &json)?;

    for (k, frame) in capture.frames.iter().enumerate() {
        write_file(&dir.join(frame_name(k)), &encode_frame_pgm(frame))?;
    }
    for (k, depth) in capture.depth_maps.iter().enumerate() {
        let bytes = encode_grid(DEPTH_MAGIC, depth.width, depth.height, &depth.depths)?;
        write_file(&dir.join(depth_name(k)), &bytes)?;
    }
    let t = &capture.thermal;
    write_file(
        &dir.join("thermal.rst"),
        &encode_grid(THERMAL_MAGIC, t.width, t.height, &t.temps)?,
    )?;

    let mut audio = AUDIO_MAGIC.to_vec();
    audio.extend_from_slice(&capture.audio.sample_rate.to_le_bytes());
    audio.extend_from_slice(&u32_dim(capture.audio.samples.len(), "sample count")?.to_le_bytes());
    extend_f32(&mut audio, &capture.audio.samples);
    write_file(&dir.join("audio.rsa"), &audio)?;

    let mut imu = IMU_MAGIC.to_vec();
    imu.extend_from_slice(&u32_dim(capture.imu.yaw_rates.len(), "imu count")?.to_le_bytes());
    extend_f32(&mut imu, &capture.imu.yaw_rates);
    write_file(&dir.join("imu.rsi"), &imu)?;
    Ok(())
}

pub fn read_capture_dir(dir: &Path) -> Result<SceneCapture, SceneError> {
    let meta: CaptureMeta = serde_json::from_slice(&read_file(&dir.join(META_FILE))?)
        .map_err(|e| SceneError::Corrupt(format!("{META_FILE}: {e}")))?;
    let (w, h) = (meta.width as usize, meta.height as usize);
    let n = meta.frame_count as usize;
    if n == 0 {
        return Err(SceneError::Invalid("capture has no frames".into()));
    }

    let mut frames = Vec::with_capacity(n);
    let mut depth_maps = Vec::with_capacity(n);
    for k in 0..n {
        let frame = decode_frame_pgm(&read_file(&dir.join(frame_name(k)))?)?;
        check_dims(&frame_name(k), frame.width, frame.height, w, h)?;
        frames.push(frame);

        let (dw, dh, depths) = decode_grid(DEPTH_MAGIC, &read_file(&dir.join(depth_name(k)))?)?;
        check_dims(&depth_name(k), dw, dh, w, h)?;
        depth_maps.push(DepthMap::new(dw, dh, depths)?);
    }

    let (tw, th, temps) = decode_grid(THERMAL_MAGIC, &read_file(&dir.join("thermal.rst"))?)?;
    check_dims("thermal.rst", tw, th, w, h)?;
    let thermal = ThermalMap::new(tw, th, temps)?;

    let raw = read_file(&dir.join("audio.rsa"))?;
    let mut cur = Cursor::new(&raw, "audio.rsa");
    cur.magic(AUDIO_MAGIC)?;
    let sample_rate = cur.u32()?;
    let count = cur.u32()? as usize;
    let samples = cur.f32s(count)?;
    cur.finish()?;
    if sample_rate != meta.sample_rate {
        return Err(SceneError::Invalid(format!(
            "audio.rsa sample rate {sample_rate} disagrees with metadata {}",
            meta.sample_rate
        )));
    }

    let raw = read_file(&dir.join("imu.rsi"))?;
    let mut cur = Cursor::new(&raw, "imu.rsi");
    cur.magic(IMU_MAGIC)?;
    let count = cur.u32()? as usize;
    let yaw_rates = cur.f32s(count)?;
    cur.finish()?;

    let device_id =
        DeviceId::new(meta.device_id).map_err(|e| SceneError::Invalid(e.to_string()))?;
    let location = meta
        .location
        .map(|l| Location::new(l.lat_microdeg, l.lon_microdeg))
        .transpose()
        .map_err(|e| SceneError::Invalid(e.to_string()))?;

    let capture = SceneCapture {
        frames,
        depth_maps,
        thermal,
        audio: AudioTrack {
            sample_rate,
            samples,
        },
        imu: ImuTrace { yaw_rates },
        frame_rate: meta.frame_rate,
        pixels_per_radian: meta.pixels_per_radian,
        device_id,
        timestamp_unix: meta.timestamp_unix,
        location,
    };
    capture.validate()?;
    Ok(capture)
}

fn check_dims(name: &str, w: usize, h: usize, ew: usize, eh: usize) -> Result<(), SceneError> {
    if (w, h) != (ew, eh) {
        return Err(SceneError::Invalid(format!(
            "{name} is {w}x{h}, metadata says {ew}x{eh}"
        )));
    }
    Ok(())
}

fn extend_f32(out: &mut Vec<u8>, values: &[f32]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn encode_grid(
    magic: &[u8; 4],
    width: usize,
    height: usize,
    values: &[f32],
) -> Result<Vec<u8>, SceneError> {
    let mut out = Vec::with_capacity(12 + 4 * values.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&u32_dim(width, "width")?.to_le_bytes());
    out.extend_from_slice(&u32_dim(height, "height")?.to_le_bytes());
    extend_f32(&mut out, values);
    Ok(out)
}

fn decode_grid(magic: &[u8; 4], raw: &[u8]) -> Result<(usize, usize, Vec<f32>), SceneError> {
    let name = String::from_utf8_lossy(magic).into_owned();
    let mut cur = Cursor::new(raw, &name);
    cur.magic(magic)?;
    let w = cur.u32()? as usize;
    let h = cur.u32()? as usize;
    let n = w
        .checked_mul(h)
        .ok_or_else(|| SceneError::Corrupt(format!("{name}: dimensions overflow")))?;
    let values = cur.f32s(n)?;
    cur.finish()?;
    Ok((w, h, values))
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    name: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8], name: &'a str) -> Self {
        Self { buf, pos: 0, name }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], SceneError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|end| *end <= self.buf.len())
            .ok_or_else(|| SceneError::Corrupt(format!("{}: truncated", self.name)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn magic(&mut self, magic: &[u8; 4]) -> Result<(), SceneError> {
        if self.take(4)? != magic {
            return Err(SceneError::Corrupt(format!("{}: bad magic", self.name)));
        }
        Ok(())
    }

    fn u32(&mut self) -> Result<u32, SceneError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, SceneError> {
        let bytes = n
            .checked_mul(4)
            .ok_or_else(|| SceneError::Corrupt(format!("{}: count overflow", self.name)))?;
        let raw = self.take(bytes)?;
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SceneError::Invalid(format!(
                "{}: non-finite value",
                self.name
            )));
        }
        Ok(values)
    }

    fn finish(&self) -> Result<(), SceneError> {
        if self.pos != self.buf.len() {
            return Err(SceneError::Corrupt(format!(
                "{}: {} trailing bytes",
                self.name,
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}
