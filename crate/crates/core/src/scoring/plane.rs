use super::ScoringError;
use crate::scene::DepthMap;

/// Least-squares plane `depth = a*x' + b*y' + c` with pixel coordinates
/// centered on the grid mean, so `c` is the fitted depth at the grid
/// center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `sqrt(SSE / N)` in meters.
    pub rms_residual: f64,
}

pub fn fit_plane(map: &DepthMap) -> Result<PlaneFit, ScoringError> {
    let (w, h) = (map.width, map.height);
    let n = map.depths.len();
    if n < 3 || w * h != n {
        return Err(ScoringError::DegenerateGrid { pixels: n });
    }
    let xm = (w as f64 - 1.0) / 2.0;
    let ym = (h as f64 - 1.0) / 2.0;

    // On a full rectangular grid the centered regressors are orthogonal to
    // each other and to the constant, so the normal equations decouple.
    let (mut sum, mut sxd, mut syd, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &d) in map.depths.iter().enumerate() {
        let d = d as f64;
        let x = (i % w) as f64 - xm;
        let y = (i / w) as f64 - ym;
        sum += d;
        sxd += x * d;
        syd += y * d;
        sxx += x * x;
        syy += y * y;
    }
    let c = sum / n as f64;
    let a = if sxx > 0.0 { sxd / sxx } else { 0.0 };
    let b = if syy > 0.0 { syd / syy } else { 0.0 };

    let sse: f64 = map
        .depths
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let x = (i % w) as f64 - xm;
            let y = (i / w) as f64 - ym;
            let r = d as f64 - (a * x + b * y + c);
            r * r
        })
        .sum();
    Ok(PlaneFit {
        a,
        b,
        c,
        rms_residual: (sse / n as f64).sqrt(),
    })
}
