//! Scenario generators: genuine scenes and analog-hole attacks.
//!
//! All three share the same luminance synthesis (a smooth wrap-around
//! texture panned horizontally) so that the attacks differ from the
//! genuine scene only in the channels a re-capture cannot fake: depth,
//! thermal, and the coupling between audio and motion.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use super::{
    AudioTrack, DepthMap, ImuTrace, LumaFrame, Rng64, ScenarioParams, SceneCapture, SceneError,
    ThermalMap, DEFAULT_DEVICE_ID, DEFAULT_TIMESTAMP_UNIX,
};
use crate::identity::DeviceId;
use crate::scoring::motion_energy;

/// Horizontal image shift, in pixels, per radian of yaw. Stored in every
/// capture so the motion scorer can relate gyro and optical flow.
pub const PIXELS_PER_RADIAN: f64 = 40.0;

const CARRIER_HZ: f64 = 440.0;
const BACKGROUND_OFFSET_M: f64 = 1.5;

const STREAM_TEXTURE: u64 = 1;
const STREAM_PAN: u64 = 2;
const STREAM_DEPTH: u64 = 3;
const STREAM_THERMAL: u64 = 4;
const STREAM_AUDIO_LEVEL: u64 = 5;
const STREAM_AUDIO_NOISE: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Genuine,
    ScreenReplay,
    PrintedPhoto,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::Genuine,
        Scenario::ScreenReplay,
        Scenario::PrintedPhoto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Genuine => "genuine",
            Scenario::ScreenReplay => "screen-replay",
            Scenario::PrintedPhoto => "printed-photo",
        }
    }

    pub fn generate(self, seed: u64, params: &ScenarioParams) -> Result<SceneCapture, SceneError> {
        match self {
            Scenario::Genuine => generate_genuine_scene(seed, params),
            Scenario::ScreenReplay => generate_screen_replay_scene(seed, params),
            Scenario::PrintedPhoto => generate_printed_photo_scene(seed, params),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                format!("unknown scenario {s:?} (expected genuine, screen-replay or printed-photo)")
            })
    }
}

/// A real scene filmed by a panning camera: a warm foreground body in
/// front of a distant, sun-graded background, with sound that swells with
/// the on-screen motion.
pub fn generate_genuine_scene(seed: u64, p: &ScenarioParams) -> Result<SceneCapture, SceneError> {
    p.validate()?;
    let world = world_texture(&mut Rng64::substream(seed, STREAM_TEXTURE), p);
    let pan = Pan::draw(&mut Rng64::substream(seed, STREAM_PAN), p);
    let frames = pan.render(&world, p);

    let mut rng = Rng64::substream(seed, STREAM_DEPTH);
    let body = BodyRegion::for_grid(p.width, p.height);
    let layered = |x: usize, y: usize, rng: &mut Rng64| {
        if body.contains(x, y) {
            p.depth_base_m + rng.uniform(-0.01, 0.01)
        } else {
            p.depth_base_m + BACKGROUND_OFFSET_M + 0.01 * y as f64 + rng.uniform(-0.01, 0.01)
        }
    };
    let base = grid(p, |x, y| layered(x, y, &mut rng));
    let depth_maps = pan
        .offsets
        .iter()
        .map(|&off| DepthMap {
            width: p.width,
            height: p.height,
            depths: roll_columns(&base, p.width, off)
                .into_iter()
                .map(|d| d as f32)
                .collect(),
        })
        .collect();

    let mut rng = Rng64::substream(seed, STREAM_THERMAL);
    let thermal = ThermalMap {
        width: p.width,
        height: p.height,
        temps: grid(p, |x, y| {
            if body.contains(x, y) {
                p.body_temp_c + rng.uniform(-0.3, 0.3)
            } else {
                // Sunlit background: warmer toward the top.
                let rows = p.height as f64;
                p.ambient_temp_c + 3.0 * (rows - y as f64) / rows + rng.uniform(-0.2, 0.2)
            }
        })
        .into_iter()
        .map(|t| t as f32)
        .collect(),
    };

    // Sound level follows motion energy: window k+1 carries the energy of
    // transition k -> k+1, window 0 sits at the floor level.
    let energy = motion_energy(&frames).expect("frames share dimensions");
    let peak = energy.iter().copied().fold(0.0, f64::max);
    let levels: Vec<f64> = std::iter::once(0.1)
        .chain(energy.iter().map(|e| {
            if peak > 0.0 {
                0.1 + 0.7 * e / peak
            } else {
                0.1
            }
        }))
        .collect();
    let audio = synth_audio(seed, &levels, p);

    assemble(frames, depth_maps, thermal, audio, pan.imu(), p)
}

/// A display filmed by a genuinely moving camera: the pixels pan, the gyro
/// agrees, but the depth sensor sees a flat panel, the thermal camera sees
/// a uniformly warm screen, and the soundtrack has no relation to the
/// motion.
pub fn generate_screen_replay_scene(
    seed: u64,
    p: &ScenarioParams,
) -> Result<SceneCapture, SceneError> {
    p.validate()?;
    let world = world_texture(&mut Rng64::substream(seed, STREAM_TEXTURE), p);
    let pan = Pan::draw(&mut Rng64::substream(seed, STREAM_PAN), p);
    let frames = pan.render(&world, p);

    let plane = planar_depth(&mut Rng64::substream(seed, STREAM_DEPTH), p);
    let depth_maps = vec![plane; p.frame_count];
    let thermal = uniform_thermal(
        &mut Rng64::substream(seed, STREAM_THERMAL),
        p,
        p.screen_temp_c,
    );
    let audio = unrelated_audio(seed, p);

    assemble(frames, depth_maps, thermal, audio, pan.imu(), p)
}

/// A printout held in front of a static camera: identical frames, flat
/// depth, the print at room temperature, ambient sound.
pub fn generate_printed_photo_scene(
    seed: u64,
    p: &ScenarioParams,
) -> Result<SceneCapture, SceneError> {
    p.validate()?;
    let world = world_texture(&mut Rng64::substream(seed, STREAM_TEXTURE), p);
    let frame = LumaFrame {
        width: p.width,
        height: p.height,
        pixels: world,
    };
    let frames = vec![frame; p.frame_count];

    let plane = planar_depth(&mut Rng64::substream(seed, STREAM_DEPTH), p);
    let depth_maps = vec![plane; p.frame_count];
    let thermal = uniform_thermal(
        &mut Rng64::substream(seed, STREAM_THERMAL),
        p,
        p.ambient_temp_c,
    );
    let audio = unrelated_audio(seed, p);
    let imu = ImuTrace {
        yaw_rates: vec![0.0; p.frame_count],
    };

    assemble(frames, depth_maps, thermal, audio, imu, p)
}

fn assemble(
    frames: Vec<LumaFrame>,
    depth_maps: Vec<DepthMap>,
    thermal: ThermalMap,
    audio: AudioTrack,
    imu: ImuTrace,
    p: &ScenarioParams,
) -> Result<SceneCapture, SceneError> {
    let capture = SceneCapture {
        frames,
        depth_maps,
        thermal,
        audio,
        imu,
        frame_rate: p.frame_rate,
        pixels_per_radian: PIXELS_PER_RADIAN,
        device_id: DeviceId::new(DEFAULT_DEVICE_ID).expect("valid default id"),
        timestamp_unix: DEFAULT_TIMESTAMP_UNIX,
        location: None,
    };
    capture.validate()?;
    Ok(capture)
}

fn grid(p: &ScenarioParams, mut f: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.width * p.height);
    for y in 0..p.height {
        for x in 0..p.width {
            out.push(f(x, y));
        }
    }
    out
}

/// `out[y][x] = src[y][(x - offset) mod w]`, i.e. content moves right by
/// `offset` pixels with wrap-around.
fn roll_columns<T: Copy>(src: &[T], width: usize, offset: i64) -> Vec<T> {
    let w = width as i64;
    let mut out = Vec::with_capacity(src.len());
    for row in src.chunks_exact(width) {
        for x in 0..w {
            out.push(row[(x - offset).rem_euclid(w) as usize]);
        }
    }
    out
}

/// Smooth periodic luminance: a few horizontal harmonics with random
/// phases, one vertical harmonic, and mild pixel noise. Periodic in x so
/// panning can wrap around without a seam.
fn world_texture(rng: &mut Rng64, p: &ScenarioParams) -> Vec<u8> {
    let w = p.width as f64;
    let h = p.height as f64;
    let harmonics: Vec<(f64, f64, f64)> = [(1.0, 40.0), (2.0, 25.0), (3.0, 15.0)]
        .into_iter()
        .map(|(k, amp)| (k, amp * rng.uniform(0.8, 1.2), rng.uniform(0.0, TAU)))
        .collect();
    let row_phase = rng.uniform(0.0, TAU);
    grid(p, |x, y| {
        let col: f64 = harmonics
            .iter()
            .map(|(k, amp, phase)| amp * (TAU * k * x as f64 / w + phase).cos())
            .sum();
        let row = 20.0 * (TAU * y as f64 / h + row_phase).cos();
        128.0 + col + row + rng.uniform(-6.0, 6.0)
    })
    .into_iter()
    .map(|v| v.round().clamp(0.0, 255.0) as u8)
    .collect()
}

/// Camera pan. `rates[k]` is the instantaneous image shift rate at frame
/// k in pixels per frame; the displacement between frames k and k+1 is the
/// trapezoid `(rates[k] + rates[k+1]) / 2`. Rates are even so every
/// displacement is a whole number of pixels.
struct Pan {
    rates: Vec<i64>,
    offsets: Vec<i64>,
}

impl Pan {
    fn draw(rng: &mut Rng64, p: &ScenarioParams) -> Self {
        let (lo, hi): (i64, i64) = if p.width >= 12 { (1, 3) } else { (0, 1) };
        let direction: i64 = if rng.below(2) == 0 { 1 } else { -1 };
        let mut rates = Vec::new();
        // A constant displacement would give flow and gyro nothing to
        // correlate; redraw until it varies.
        for _ in 0..64 {
            rates = (0..p.frame_count)
                .map(|_| direction * 2 * (lo + rng.below((hi - lo + 1) as u64) as i64))
                .collect();
            let first = rates[0] + rates[1];
            if rates.windows(2).any(|r| r[0] + r[1] != first) {
                break;
            }
        }
        let mut offsets = vec![0i64];
        for r in rates.windows(2) {
            let last = *offsets.last().unwrap();
            offsets.push(last + (r[0] + r[1]) / 2);
        }
        Self { rates, offsets }
    }

    fn render(&self, world: &[u8], p: &ScenarioParams) -> Vec<LumaFrame> {
        self.offsets
            .iter()
            .map(|&off| LumaFrame {
                width: p.width,
                height: p.height,
                pixels: roll_columns(world, p.width, off),
            })
            .collect()
    }

    fn imu(&self) -> ImuTrace {
        ImuTrace {
            yaw_rates: self
                .rates
                .iter()
                .map(|&r| (r as f64 / PIXELS_PER_RADIAN) as f32)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BodyRegion {
    x0: usize,
    x1: usize,
    y0: usize,
}

impl BodyRegion {
    /// Centered horizontally, lower three quarters vertically; never empty
    /// and never the whole grid.
    fn for_grid(width: usize, height: usize) -> Self {
        let x0 = width / 4;
        let x1 = (3 * width / 4).max(x0 + 1);
        let y0 = (height / 4).max(1);
        Self { x0, x1, y0 }
    }

    fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && y >= self.y0
    }
}

fn planar_depth(rng: &mut Rng64, p: &ScenarioParams) -> DepthMap {
    let a = rng.uniform(-0.004, 0.004);
    let b = rng.uniform(-0.004, 0.004);
    let c = p.depth_base_m;
    DepthMap {
        width: p.width,
        height: p.height,
        depths: grid(p, |x, y| c + a * x as f64 + b * y as f64)
            .into_iter()
            .map(|d| d as f32)
            .collect(),
    }
}

fn uniform_thermal(rng: &mut Rng64, p: &ScenarioParams, temp_c: f64) -> ThermalMap {
    ThermalMap {
        width: p.width,
        height: p.height,
        temps: grid(p, |_, _| temp_c + rng.uniform(-0.05, 0.05))
            .into_iter()
            .map(|t| t as f32)
            .collect(),
    }
}

/// Per-window levels drawn independently of anything visual.
fn unrelated_audio(seed: u64, p: &ScenarioParams) -> AudioTrack {
    let mut rng = Rng64::substream(seed, STREAM_AUDIO_LEVEL);
    let levels: Vec<f64> = (0..p.frame_count).map(|_| rng.uniform(0.1, 0.8)).collect();
    synth_audio(seed, &levels, p)
}

/// Sine carrier whose amplitude is `levels[k]` during frame window k, plus
/// a little broadband noise.
fn synth_audio(seed: u64, levels: &[f64], p: &ScenarioParams) -> AudioTrack {
    let sr = p.sample_rate as u64;
    let fr = p.frame_rate as u64;
    let total = (levels.len() as u64 * sr).div_ceil(fr) as usize;
    let mut noise = Rng64::substream(seed, STREAM_AUDIO_NOISE);
    let samples = (0..total)
        .map(|i| {
            let window = ((i as u64 * fr) / sr) as usize;
            let level = levels[window.min(levels.len() - 1)];
            let t = i as f64 / sr as f64;
            let s = level * (TAU * CARRIER_HZ * t).sin() + noise.uniform(-0.003, 0.003);
            s.clamp(-1.0, 1.0) as f32
        })
        .collect();
    AudioTrack {
        sample_rate: p.sample_rate,
        samples,
    }
}
