//! Fixtures and independent reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use realseal::identity::DeviceId;
use realseal::registry::{Registry, RegistryEntry};
use realseal::scene::{Scenario, ScenarioParams, SceneCapture};
use realseal::scoring::{score_capture, ScoringParams};
use realseal::sealing::{seal, DeviceKeyPair, SealedBundle};

pub const FIXTURE_SEED: [u8; 32] = [7u8; 32];
pub const FIXTURE_DEVICE: &str = "CAM-001";

pub fn fixture_key() -> DeviceKeyPair {
    DeviceKeyPair::keygen(DeviceId::new(FIXTURE_DEVICE).unwrap(), &FIXTURE_SEED).unwrap()
}

pub fn fixture_capture() -> SceneCapture {
    Scenario::Genuine
        .generate(42, &ScenarioParams::default())
        .unwrap()
}

/// Genuine seed-42 capture sealed with the fixture key.
pub fn fixture_bundle() -> SealedBundle {
    let capture = fixture_capture();
    let (dims, overall) = score_capture(&capture, &ScoringParams::default()).unwrap();
    seal(
        &capture.sealed_image_bytes(),
        &dims,
        overall,
        &fixture_key(),
        capture.timestamp_unix,
        capture.location,
    )
    .unwrap()
}

pub fn fixture_registry() -> Registry {
    let key = fixture_key();
    Registry::new()
        .insert(RegistryEntry::trusted(
            key.device_id().clone(),
            key.public_key(),
        ))
        .unwrap()
}

/// Solve the uncentered 3x3 normal equations `[x y 1]` by Gaussian
/// elimination with partial pivoting and return the rms residual.
pub fn oracle_plane_rms(width: usize, height: usize, depths: &[f32]) -> f64 {
    let mut m = [[0.0f64; 4]; 3];
    for yi in 0..height {
        for xi in 0..width {
            let z = depths[yi * width + xi] as f64;
            let row = [xi as f64, yi as f64, 1.0];
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] += row[r] * row[c];
                }
                m[r][3] += row[r] * z;
            }
        }
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                let pivot_row = m[col];
                for (dst, src) in m[r].iter_mut().zip(pivot_row).skip(col) {
                    *dst -= f * src;
                }
            }
        }
    }
    let coef: Vec<f64> = (0..3).map(|r| m[r][3] / m[r][r]).collect();
    let mut sse = 0.0;
    for yi in 0..height {
        for xi in 0..width {
            let z = depths[yi * width + xi] as f64;
            let r = z - (coef[0] * xi as f64 + coef[1] * yi as f64 + coef[2]);
            sse += r * r;
        }
    }
    (sse / (width * height) as f64).sqrt()
}

/// Pearson correlation from raw sums; `None` if either side is constant.
fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let constant = |s: &[f64]| s.iter().all(|v| *v == s[0]);
    if constant(x) || constant(y) {
        return None;
    }
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let cov = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx <= 0.0 || vy <= 0.0 {
        return None;
    }
    Some((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}

/// Exhaustive lag search written independently of the library: collect
/// every defined lag, then pick the maximum, preferring small |lag| and
/// then the negative lag among near-equal values.
pub fn oracle_best_lag(x: &[f64], y: &[f64], max_lag: usize) -> (i64, Option<f64>) {
    let n = x.len() as i64;
    let l = max_lag as i64;
    let mut found: Vec<(i64, f64)> = Vec::new();
    for lag in -l..=l {
        let pairs: Vec<(f64, f64)> = (0..n)
            .filter(|i| (0..n).contains(&(i + lag)))
            .map(|i| (x[i as usize], y[(i + lag) as usize]))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Some(r) = oracle_pearson(&xs, &ys) {
            found.push((lag, r));
        }
    }
    let Some(top) = found.iter().map(|(_, r)| *r).reduce(f64::max) else {
        return (0, None);
    };
    found
        .into_iter()
        .filter(|(_, r)| *r >= top - 1e-12)
        .min_by_key(|(lag, _)| (lag.abs(), *lag))
        .map(|(lag, r)| (lag, Some(r)))
        .unwrap()
}
