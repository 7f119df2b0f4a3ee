//! Per-dimension credibility scores and their aggregate.
//!
//! Every scorer maps a capture to `[0, 1]`, 1 being most credible:
//!
//! - depth: how far frame-0 depth departs from a plane (a filmed screen or a
//!   printout is flat),
//! - thermal: spatial temperature spread (a display or a print is
//!   uniform),
//! - audio sync: correlation between the sound envelope and visual motion
//!   energy, discounted by how many frames apart they line up,
//! - motion: agreement between optical flow and the gyro.
//!
//! [`aggregate`] combines them with a veto: a weighted mean scaled down
//! when any single dimension falls below the veto threshold.

mod plane;
mod signal;

use thiserror::Error;

use crate::scene::{DepthMap, SceneCapture, SceneError, ThermalMap};

pub use plane::{fit_plane, PlaneFit};
pub use signal::{
    audio_envelope, best_lag_correlation, flow_shift, is_flat, motion_energy, pearson,
    LagCorrelation, TIE_EPSILON,
};

/// Residuals and spreads at or below this count as exactly zero.
pub const ZERO_SPREAD: f64 = 1e-12;

/// Magnitudes at or below this count as "no motion" in the motion scorer.
pub const STILL_MAGNITUDE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("invalid scoring parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate grid: {pixels} pixels, need at least 3")]
    DegenerateGrid { pixels: usize },
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("frame dimension mismatch")]
    DimensionMismatch,
    #[error("insufficient audio samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Capture(#[from] SceneError),
}

/// Dimension weights in the order depth, thermal, audio sync, motion.
pub type Weights = [f64; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct ScoringParams {
    /// Residual scale for the depth score, meters.
    pub tau_depth_m: f64,
    /// Spread scale for the thermal score, degrees Celsius.
    pub tau_thermal_c: f64,
    pub max_lag_frames: usize,
    pub veto_threshold: f64,
    pub weights: Weights,
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self {
            tau_depth_m: 0.05,
            tau_thermal_c: 1.5,
            max_lag_frames: 2,
            veto_threshold: 0.2,
            weights: [0.25; 4],
        }
    }
}

impl ScoringParams {
    /// Default parameters with weights normalized from the given ratios.
    pub fn with_weight_ratios(ratios: Weights) -> Result<Self, ScoringError> {
        let total: f64 = ratios.iter().sum();
        if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0))
            || total <= 0.0
            || !total.is_finite()
        {
            return Err(ScoringError::InvalidParams(format!(
                "weight ratios {ratios:?} must be non-negative with a positive sum"
            )));
        }
        let params = Self {
            weights: ratios.map(|r| r / total),
            ..Self::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        let bad = |msg: String| Err(ScoringError::InvalidParams(msg));
        if !(self.tau_depth_m.is_finite() && self.tau_depth_m > 0.0) {
            return bad(format!(
                "tau_depth_m = {} must be positive",
                self.tau_depth_m
            ));
        }
        if !(self.tau_thermal_c.is_finite() && self.tau_thermal_c > 0.0) {
            return bad(format!(
                "tau_thermal_c = {} must be positive",
                self.tau_thermal_c
            ));
        }
        if !(self.veto_threshold > 0.0 && self.veto_threshold <= 1.0) {
            return bad(format!(
                "veto_threshold = {} must be in (0, 1]",
                self.veto_threshold
            ));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad(format!("weights {:?} must be non-negative", self.weights));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {total}, expected 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionScores {
    pub depth: f64,
    pub thermal: f64,
    pub audio_sync: f64,
    pub motion: f64,
}

impl DimensionScores {
    pub fn as_array(&self) -> [f64; 4] {
        [self.depth, self.thermal, self.audio_sync, self.motion]
    }

    pub fn from_array([depth, thermal, audio_sync, motion]: [f64; 4]) -> Self {
        Self {
            depth,
            thermal,
            audio_sync,
            motion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OverallScore(f64);

impl OverallScore {
    pub fn new(value: f64) -> Self {
        Self(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `1 - exp(-x / tau)`, exactly zero for `x <= ZERO_SPREAD`.
fn saturate(x: f64, tau: f64) -> f64 {
    if x <= ZERO_SPREAD {
        0.0
    } else {
        -(-x / tau).exp_m1()
    }
}

pub fn score_depth(map: &DepthMap, p: &ScoringParams) -> Result<f64, ScoringError> {
    let fit = fit_plane(map)?;
    Ok(saturate(fit.rms_residual, p.tau_depth_m))
}

/// Population standard deviation of the map, in degrees.
pub fn thermal_spread(map: &ThermalMap) -> f64 {
    let n = map.temps.len() as f64;
    if map.temps.is_empty() {
        return 0.0;
    }
    let mean = map.temps.iter().map(|&t| t as f64).sum::<f64>() / n;
    let var = map
        .temps
        .iter()
        .map(|&t| (t as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    var.sqrt()
}

pub fn score_thermal(map: &ThermalMap, p: &ScoringParams) -> f64 {
    saturate(thermal_spread(map), p.tau_thermal_c)
}

/// Audio-sync score from an envelope aligned to frame transitions and the
/// motion-energy series. Neutral 0.5 when neither lag gives a defined
/// correlation.
pub fn sync_score(envelope: &[f64], motion: &[f64], max_lag: usize) -> Result<f64, ScoringError> {
    let best = best_lag_correlation(envelope, motion, max_lag)?;
    Ok(match best.rho {
        None => 0.5,
        Some(rho) => {
            let discount = 1.0 - best.lag.unsigned_abs() as f64 / (max_lag as f64 + 1.0);
            (rho.max(0.0) * discount).clamp(0.0, 1.0)
        }
    })
}

pub fn score_audio_sync(capture: &SceneCapture, p: &ScoringParams) -> Result<f64, ScoringError> {
    let n = capture.frame_count();
    let envelope = audio_envelope(&capture.audio, capture.frame_rate, n)?;
    let motion = motion_energy(&capture.frames)?;
    // Window k+1 follows transition k -> k+1.
    sync_score(&envelope[1..], &motion, p.max_lag_frames)
}

/// Flow/gyro agreement: `max(0, pearson(flow, gyro))`. When either series
/// is flat, 1 if both are (numerically) still and 0 if only one of them
/// reports motion.
pub fn motion_consistency(flow: &[f64], gyro: &[f64]) -> Result<f64, ScoringError> {
    if flow.len() != gyro.len() {
        return Err(ScoringError::LengthMismatch {
            left: flow.len(),
            right: gyro.len(),
        });
    }
    match pearson(flow, gyro) {
        Some(rho) => Ok(rho.max(0.0)),
        None => {
            let still = |xs: &[f64]| xs.iter().all(|v| v.abs() <= STILL_MAGNITUDE);
            Ok(if still(flow) && still(gyro) { 1.0 } else { 0.0 })
        }
    }
}

pub fn score_motion(capture: &SceneCapture, _p: &ScoringParams) -> Result<f64, ScoringError> {
    let flow = flow_shift(&capture.frames)?;
    let rates = &capture.imu.yaw_rates;
    if rates.len() != capture.frame_count() {
        return Err(ScoringError::LengthMismatch {
            left: rates.len(),
            right: capture.frame_count(),
        });
    }
    let gyro: Vec<f64> = rates
        .windows(2)
        .map(|r| (r[0] as f64 + r[1] as f64) / 2.0 * capture.pixels_per_radian)
        .collect();
    motion_consistency(&flow, &gyro)
}

/// Weighted mean times `min(1, min_score / veto_threshold)`.
pub fn aggregate(scores: &DimensionScores, p: &ScoringParams) -> OverallScore {
    let values = scores.as_array();
    let mean: f64 = values.iter().zip(&p.weights).map(|(s, w)| s * w).sum();
    let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
    let veto = (lowest / p.veto_threshold).min(1.0);
    OverallScore::new(mean * veto)
}

pub fn score_capture(
    capture: &SceneCapture,
    p: &ScoringParams,
) -> Result<(DimensionScores, OverallScore), ScoringError> {
    p.validate()?;
    capture.validate()?;
    let scores = DimensionScores {
        depth: score_depth(&capture.depth_maps[0], p)?,
        thermal: score_thermal(&capture.thermal, p),
        audio_sync: score_audio_sync(capture, p)?,
        motion: score_motion(capture, p)?,
    };
    Ok((scores, aggregate(&scores, p)))
}
