//! Series utilities behind the audio-sync and motion scorers.

use super::ScoringError;
use crate::scene::{AudioTrack, LumaFrame};

/// Two correlation values closer than this are treated as tied.
pub const TIE_EPSILON: f64 = 1e-12;

/// True when every value is identical (zero variance), including series of
/// length 0 or 1.
pub fn is_flat(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Pearson correlation, `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    if x.len() < 2 || is_flat(x) || is_flat(y) {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Candidate offsets `0, -1, 1, -2, 2, ..., -max, max`: the order in which
/// ties are resolved.
pub(crate) fn offsets_by_preference(max: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=max).flat_map(|k| [-k, k]))
}

/// Per-frame RMS of the samples falling in `[k/fps, (k+1)/fps)`.
pub fn audio_envelope(
    audio: &AudioTrack,
    frame_rate: u32,
    frame_count: usize,
) -> Result<Vec<f64>, ScoringError> {
    if frame_rate == 0 || audio.sample_rate == 0 {
        return Err(ScoringError::InvalidInput(
            "frame rate and sample rate must be positive".into(),
        ));
    }
    let sr = audio.sample_rate as u64;
    let fr = frame_rate as u64;
    // First sample index at or after time k/fps.
    let boundary = |k: u64| (k * sr).div_ceil(fr) as usize;
    let needed = boundary(frame_count as u64);
    if audio.samples.len() < needed {
        return Err(ScoringError::InsufficientSamples {
            needed,
            available: audio.samples.len(),
        });
    }
    Ok((0..frame_count as u64)
        .map(|k| {
            let window = &audio.samples[boundary(k)..boundary(k + 1)];
            if window.is_empty() {
                return 0.0;
            }
            let energy: f64 = window.iter().map(|&s| (s as f64) * (s as f64)).sum();
            (energy / window.len() as f64).sqrt()
        })
        .collect())
}

fn check_frames(frames: &[LumaFrame]) -> Result<(), ScoringError> {
    if frames.len() < 2 {
        return Err(ScoringError::InvalidInput(format!(
            "need at least 2 frames, got {}",
            frames.len()
        )));
    }
    let (w, h) = (frames[0].width, frames[0].height);
    for f in frames {
        if (f.width, f.height) != (w, h) || f.pixels.len() != w * h {
            return Err(ScoringError::DimensionMismatch);
        }
    }
    Ok(())
}

/// Mean absolute pixel difference of each consecutive frame pair, scaled to
/// `[0, 1]`.
pub fn motion_energy(frames: &[LumaFrame]) -> Result<Vec<f64>, ScoringError> {
    check_frames(frames)?;
    Ok(frames
        .windows(2)
        .map(|pair| {
            let total: u64 = pair[0]
                .pixels
                .iter()
                .zip(&pair[1].pixels)
                .map(|(a, b)| a.abs_diff(*b) as u64)
                .sum();
            total as f64 / (pair[0].pixels.len() as f64 * 255.0)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagCorrelation {
    /// Positive lag means `y` trails `x`: `x[i]` pairs with `y[i + lag]`.
    pub lag: i64,
    /// `None` when no lag has a defined correlation.
    pub rho: Option<f64>,
}

/// Exhaustive search over lags in `[-max_lag, max_lag]` for the highest
/// Pearson correlation between the overlapping parts of `x` and `y`.
/// Ties go to the smallest |lag|, then to the negative lag.
pub fn best_lag_correlation(
    x: &[f64],
    y: &[f64],
    max_lag: usize,
) -> Result<LagCorrelation, ScoringError> {
    if x.len() != y.len() {
        return Err(ScoringError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 || max_lag >= n {
        return Err(ScoringError::InvalidInput(format!(
            "series length {n} with max lag {max_lag}: need length >= 3 and lag < length"
        )));
    }
    let mut best = LagCorrelation { lag: 0, rho: None };
    for lag in offsets_by_preference(max_lag as i64) {
        let (xs, ys) = if lag >= 0 {
            let l = lag as usize;
            (&x[..n - l], &y[l..])
        } else {
            let l = (-lag) as usize;
            (&x[l..], &y[..n - l])
        };
        let Some(rho) = pearson(xs, ys) else { continue };
        match best.rho {
            Some(current) if rho <= current + TIE_EPSILON => {}
            _ => {
                best = LagCorrelation {
                    lag,
                    rho: Some(rho),
                }
            }
        }
    }
    Ok(best)
}

/// Global horizontal shift between consecutive frames, in whole pixels.
///
/// Each frame collapses to its column-sum profile; the shift is the
/// circular offset `s` in `[-w/2, w/2]` that maximizes the normalized
/// cross-correlation `corr(next[x], cur[x - s])`. Flat profiles give 0.
pub fn flow_shift(frames: &[LumaFrame]) -> Result<Vec<f64>, ScoringError> {
    check_frames(frames)?;
    let w = frames[0].width;
    let profiles: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| {
            let mut cols = vec![0.0; w];
            for row in f.pixels.chunks_exact(w) {
                for (c, &p) in cols.iter_mut().zip(row) {
                    *c += p as f64;
                }
            }
            cols
        })
        .collect();

    let mut shifted = vec![0.0; w];
    Ok(profiles
        .windows(2)
        .map(|pair| {
            let (cur, next) = (&pair[0], &pair[1]);
            let mut best: Option<(i64, f64)> = None;
            for s in offsets_by_preference((w / 2) as i64) {
                for (x, out) in shifted.iter_mut().enumerate() {
                    *out = cur[(x as i64 - s).rem_euclid(w as i64) as usize];
                }
                let Some(ncc) = pearson(next, &shifted) else {
                    continue;
                };
                match best {
                    Some((_, top)) if ncc <= top + TIE_EPSILON => {}
                    _ => best = Some((s, ncc)),
                }
            }
            best.map_or(0.0, |(s, _)| s as f64)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> LumaFrame {
        let pixels = (0..w * h).map(|i| f(i % w, i / w)).collect();
        LumaFrame::new(w, h, pixels).unwrap()
    }

    #[test]
    fn envelope_cases() {
        let silent = AudioTrack {
            sample_rate: 100,
            samples: vec![0.0; 400],
        };
        assert_eq!(audio_envelope(&silent, 4, 4).unwrap(), vec![0.0; 4]);

        let constant = AudioTrack {
            sample_rate: 100,
            samples: vec![0.5; 400],
        };
        for v in audio_envelope(&constant, 4, 4).unwrap() {
            assert!((v - 0.5).abs() < 1e-12);
        }

        // One full sine period per 25-sample window.
        let sine = AudioTrack {
            sample_rate: 100,
            samples: (0..100)
                .map(|i| (std::f64::consts::TAU * i as f64 / 25.0).sin() as f32)
                .collect(),
        };
        for v in audio_envelope(&sine, 4, 4).unwrap() {
            assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn envelope_needs_coverage() {
        let short = AudioTrack {
            sample_rate: 100,
            samples: vec![0.1; 99],
        };
        assert!(matches!(
            audio_envelope(&short, 4, 4),
            Err(ScoringError::InsufficientSamples {
                needed: 100,
                available: 99
            })
        ));
    }

    #[test]
    fn envelope_uneven_windows() {
        // 10 samples over 3 frames at 3 fps: windows [0,4) [4,7) [7,10).
        let audio = AudioTrack {
            sample_rate: 10,
            samples: vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5],
        };
        let env = audio_envelope(&audio, 3, 3).unwrap();
        assert_eq!(env, vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn motion_energy_cases() {
        let a = frame(4, 4, |_, _| 0);
        let b = frame(4, 4, |_, _| 255);
        assert_eq!(motion_energy(&[a.clone(), a.clone()]).unwrap(), vec![0.0]);
        assert_eq!(motion_energy(&[a.clone(), b.clone()]).unwrap(), vec![1.0]);
        let check = frame(4, 4, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 });
        let inverted = frame(4, 4, |x, y| if (x + y) % 2 == 0 { 255 } else { 0 });
        assert_eq!(motion_energy(&[check, inverted]).unwrap(), vec![1.0]);
        let small = frame(2, 2, |_, _| 0);
        assert!(matches!(
            motion_energy(&[a, small]),
            Err(ScoringError::DimensionMismatch)
        ));
    }

    #[test]
    fn lag_identical_series() {
        let x = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let r = best_lag_correlation(&x, &x, 2).unwrap();
        assert_eq!(r.lag, 0);
        assert!((r.rho.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lag_delayed_ramp() {
        let x = [0.0, 1.0, 2.0, 3.0, 0.0, 1.0, 2.0, 3.0, 0.0];
        // y[i] = x[i - 1]
        let y = [3.0, 0.0, 1.0, 2.0, 3.0, 0.0, 1.0, 2.0, 3.0];
        let r = best_lag_correlation(&x, &y, 2).unwrap();
        assert_eq!(r.lag, 1);
        assert!((r.rho.unwrap() - 1.0).abs() < 1e-12);
        let r = best_lag_correlation(&y, &x, 2).unwrap();
        assert_eq!(r.lag, -1);
    }

    #[test]
    fn lag_constant_is_undefined() {
        let x = [2.0; 6];
        let y = [0.0, 1.0, 0.0, 2.0, 0.0, 1.0];
        let r = best_lag_correlation(&x, &y, 2).unwrap();
        assert_eq!(r, LagCorrelation { lag: 0, rho: None });
    }

    #[test]
    fn lag_errors() {
        assert!(matches!(
            best_lag_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0], 1),
            Err(ScoringError::LengthMismatch { .. })
        ));
        assert!(best_lag_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 3).is_err());
        assert!(best_lag_correlation(&[1.0, 2.0], &[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn flow_identical_and_uniform() {
        let f = frame(8, 4, |x, y| (x * 30 + y * 7) as u8);
        assert_eq!(flow_shift(&[f.clone(), f]).unwrap(), vec![0.0]);
        let u = frame(8, 4, |_, _| 90);
        assert_eq!(flow_shift(&[u.clone(), u]).unwrap(), vec![0.0]);
    }

    #[test]
    fn flow_detects_translation() {
        let base: Vec<u8> = vec![10, 200, 30, 90, 40, 250, 0, 120, 60, 15];
        let w = base.len();
        let f0 = frame(w, 3, |x, y| base[x].wrapping_add(y as u8));
        for s in [-5i64, -3, -1, 1, 2, 4, 5] {
            let f1 = frame(w, 3, |x, y| {
                base[(x as i64 - s).rem_euclid(w as i64) as usize].wrapping_add(y as u8)
            });
            let got = flow_shift(&[f0.clone(), f1]).unwrap();
            // +5 and -5 are the same circular shift for w = 10; the tie
            // resolves to the negative one.
            let expected = if s == 5 { -5.0 } else { s as f64 };
            assert_eq!(got, vec![expected], "shift {s}");
        }
    }

    #[test]
    fn pearson_basics() {
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 9.0 / 84f64.sqrt()).abs() < 1e-12);
        let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }
}
