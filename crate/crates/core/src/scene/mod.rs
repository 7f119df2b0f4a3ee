//! Synthetic multisensory captures and their on-disk formats.

mod capture_dir;
mod generate;
mod pgm;
mod rng;

use std::path::PathBuf;

use thiserror::Error;

use crate::identity::{DeviceId, Location};

pub use capture_dir::{read_capture_dir, write_capture_dir};
pub use generate::{
    generate_genuine_scene, generate_printed_photo_scene, generate_screen_replay_scene, Scenario,
    PIXELS_PER_RADIAN,
};
pub use pgm::{decode_frame_pgm, encode_frame_pgm};
pub use rng::Rng64;

pub const MIN_THERMAL_C: f32 = -40.0;
pub const MAX_THERMAL_C: f32 = 150.0;

pub const DEFAULT_DEVICE_ID: &str = "CAM-001";
pub const DEFAULT_TIMESTAMP_UNIX: i64 = 1_700_000_000;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),
    #[error("invalid capture: {0}")]
    Invalid(String),
    #[error("corrupt capture: {0}")]
    Corrupt(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn check_grid(kind: &str, width: usize, height: usize, len: usize) -> Result<(), SceneError> {
    if width < 2 || height < 2 {
        return Err(SceneError::Invalid(format!(
            "{kind} is {width}x{height}, both dimensions must be at least 2"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(SceneError::Invalid(format!(
            "{kind} is {width}x{height} but holds {len} values"
        )));
    }
    Ok(())
}

/// 8-bit luminance frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LumaFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl LumaFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, SceneError> {
        check_grid("frame", width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        check_grid("frame", self.width, self.height, self.pixels.len())
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Per-pixel distance in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    pub depths: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, depths: Vec<f32>) -> Result<Self, SceneError> {
        let map = Self {
            width,
            height,
            depths,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        check_grid("depth map", self.width, self.height, self.depths.len())?;
        if let Some(d) = self.depths.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(SceneError::Invalid(format!(
                "depth {d} is not a finite positive distance"
            )));
        }
        Ok(())
    }
}

/// Per-pixel temperature in degrees Celsius.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalMap {
    pub width: usize,
    pub height: usize,
    pub temps: Vec<f32>,
}

impl ThermalMap {
    pub fn new(width: usize, height: usize, temps: Vec<f32>) -> Result<Self, SceneError> {
        let map = Self {
            width,
            height,
            temps,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        check_grid("thermal map", self.width, self.height, self.temps.len())?;
        if let Some(t) = self
            .temps
            .iter()
            .find(|t| !(t.is_finite() && (MIN_THERMAL_C..=MAX_THERMAL_C).contains(*t)))
        {
            return Err(SceneError::Invalid(format!(
                "temperature {t} outside [{MIN_THERMAL_C}, {MAX_THERMAL_C}] C"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioTrack {
    pub sample_rate: u32,
    pub samples: Vec<f32>,
}

impl AudioTrack {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.sample_rate == 0 {
            return Err(SceneError::Invalid("audio sample rate is zero".into()));
        }
        if let Some(s) = self
            .samples
            .iter()
            .find(|s| !(s.is_finite() && (-1.0..=1.0).contains(*s)))
        {
            return Err(SceneError::Invalid(format!(
                "audio sample {s} outside [-1, 1]"
            )));
        }
        Ok(())
    }
}

/// Gyro yaw rate in radians/second, one sample per video frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuTrace {
    pub yaw_rates: Vec<f32>,
}

/// One synchronized multisensory recording.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneCapture {
    pub frames: Vec<LumaFrame>,
    pub depth_maps: Vec<DepthMap>,
    pub thermal: ThermalMap,
    pub audio: AudioTrack,
    pub imu: ImuTrace,
    pub frame_rate: u32,
    /// Converts gyro radians into horizontal image shift in pixels.
    pub pixels_per_radian: f64,
    pub device_id: DeviceId,
    pub timestamp_unix: i64,
    pub location: Option<Location>,
}

impl SceneCapture {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn width(&self) -> usize {
        self.frames.first().map_or(0, |f| f.width)
    }

    pub fn height(&self) -> usize {
        self.frames.first().map_or(0, |f| f.height)
    }

    pub fn with_identity(
        mut self,
        device_id: DeviceId,
        timestamp_unix: i64,
        location: Option<Location>,
    ) -> Self {
        self.device_id = device_id;
        self.timestamp_unix = timestamp_unix;
        self.location = location;
        self
    }

    /// The payload that gets hashed and sealed: frame 0 as binary PGM.
    pub fn sealed_image_bytes(&self) -> Vec<u8> {
        encode_frame_pgm(&self.frames[0])
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let first = self
            .frames
            .first()
            .ok_or_else(|| SceneError::Invalid("capture has no frames".into()))?;
        let (w, h) = (first.width, first.height);
        if self.depth_maps.len() != self.frames.len() {
            return Err(SceneError::Invalid(format!(
                "{} frames but {} depth maps",
                self.frames.len(),
                self.depth_maps.len()
            )));
        }
        for (k, frame) in self.frames.iter().enumerate() {
            frame.validate()?;
            if (frame.width, frame.height) != (w, h) {
                return Err(SceneError::Invalid(format!(
                    "frame {k} is {}x{}, expected {w}x{h}",
                    frame.width, frame.height
                )));
            }
        }
        for (k, depth) in self.depth_maps.iter().enumerate() {
            depth.validate()?;
            if (depth.width, depth.height) != (w, h) {
                return Err(SceneError::Invalid(format!(
                    "depth map {k} is {}x{}, expected {w}x{h}",
                    depth.width, depth.height
                )));
            }
        }
        self.thermal.validate()?;
        self.audio.validate()?;
        if self.frame_rate == 0 {
            return Err(SceneError::Invalid("frame rate is zero".into()));
        }
        if !(self.pixels_per_radian.is_finite() && self.pixels_per_radian > 0.0) {
            return Err(SceneError::Invalid(format!(
                "pixels-per-radian {} must be finite and positive",
                self.pixels_per_radian
            )));
        }
        // samples / sample_rate >= frames / frame_rate, in integers.
        let have = self.audio.samples.len() as u128 * self.frame_rate as u128;
        let need = self.frames.len() as u128 * self.audio.sample_rate as u128;
        if have < need {
            return Err(SceneError::Invalid(format!(
                "audio covers {} samples, shorter than {} frames at {} fps",
                self.audio.samples.len(),
                self.frames.len(),
                self.frame_rate
            )));
        }
        if self.imu.yaw_rates.len() != self.frames.len() {
            return Err(SceneError::Invalid(format!(
                "imu has {} samples for {} frames",
                self.imu.yaw_rates.len(),
                self.frames.len()
            )));
        }
        if let Some(r) = self.imu.yaw_rates.iter().find(|r| !r.is_finite()) {
            return Err(SceneError::Invalid(format!("non-finite yaw rate {r}")));
        }
        Ok(())
    }
}

/// Synthesis knobs. Defaults give a 32x32, 16-frame capture.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub frame_rate: u32,
    pub sample_rate: u32,
    pub ambient_temp_c: f64,
    pub body_temp_c: f64,
    pub screen_temp_c: f64,
    pub depth_base_m: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            width: 32,
            height: 32,
            frame_count: 16,
            frame_rate: 8,
            sample_rate: 8000,
            ambient_temp_c: 20.0,
            body_temp_c: 37.0,
            screen_temp_c: 37.0,
            depth_base_m: 2.0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |msg: String| Err(SceneError::InvalidParams(msg));
        if self.width < 2 || self.height < 2 {
            return bad(format!(
                "grid {}x{} must be at least 2x2",
                self.width, self.height
            ));
        }
        if self.frame_count < 4 {
            return bad(format!(
                "frame_count {} must be at least 4",
                self.frame_count
            ));
        }
        if self.frame_rate == 0 || self.sample_rate < self.frame_rate {
            return bad(format!(
                "frame_rate {} must be positive and at most sample_rate {}",
                self.frame_rate, self.sample_rate
            ));
        }
        for (name, t) in [
            ("ambient_temp_c", self.ambient_temp_c),
            ("body_temp_c", self.body_temp_c),
            ("screen_temp_c", self.screen_temp_c),
        ] {
            // Leave 2 C of headroom for gradients and noise.
            let lo = MIN_THERMAL_C as f64 + 2.0;
            let hi = MAX_THERMAL_C as f64 - 5.0;
            if !(t > 0.0 && t >= lo && t <= hi) {
                return bad(format!(
                    "{name} = {t} must be positive and within [{lo}, {hi}]"
                ));
            }
        }
        if !(self.depth_base_m.is_finite() && self.depth_base_m > 0.0) {
            return bad(format!(
                "depth_base_m = {} must be positive",
                self.depth_base_m
            ));
        }
        Ok(())
    }
}
