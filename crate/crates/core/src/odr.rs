//! Orthogonal distance regression for the through-origin line
//! 1/T2* = A [N], with uncertainties on both axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One concentration-series sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub n_ppm: f64,
    pub sigma_n_ppm: f64,
    pub t2_s: f64,
    pub sigma_t2_s: f64,
}

impl ConcentrationPoint {
    pub fn validate(&self) -> Result<()> {
        if self.n_ppm <= 0.0 || self.t2_s <= 0.0 {
            return Err(Error::InvalidArgument("concentration and T2 must be positive".into()));
        }
        if self.sigma_n_ppm < 0.0 || self.sigma_t2_s < 0.0 {
            return Err(Error::InvalidArgument("uncertainties must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdrFit {
    /// Slope A of 1/T2 = A [N], rad/s per ppm.
    pub slope: f64,
    /// Standard error from the chi-square curvature at the minimum.
    pub slope_err: f64,
    pub chi2: f64,
    /// False when all uncertainties were zero and the fit fell back to
    /// unweighted total least squares.
    pub weighted: bool,
}

fn chi2_of(points: &[(f64, f64, f64, f64)], a: f64) -> f64 {
    points
        .iter()
        .map(|&(x, sx, y, sy)| {
            let r = y - a * x;
            r * r / (sy * sy + a * a * sx * sx)
        })
        .sum()
}

fn golden_minimize(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if (hi - lo).abs() <= 1e-14 * (lo.abs() + hi.abs()).max(1e-30) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Fit 1/T2 = A [N] minimizing per-axis-weighted orthogonal distances.
///
/// When every uncertainty is zero the fit degrades to unweighted total least
/// squares (unit variances on both axes) and `weighted` is false in the
/// result.
pub fn odr_fit_linear(points: &[ConcentrationPoint]) -> Result<OdrFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 points".into()));
    }
    for p in points {
        p.validate()?;
    }
    let weighted = points.iter().any(|p| p.sigma_n_ppm > 0.0 || p.sigma_t2_s > 0.0);
    let data: Vec<(f64, f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let y = 1.0 / p.t2_s;
            let sy = p.sigma_t2_s / (p.t2_s * p.t2_s);
            if weighted {
                // guard individual zero uncertainties with a tiny floor
                let sx = p.sigma_n_ppm.max(1e-9 * p.n_ppm);
                (p.n_ppm, sx, y, sy.max(1e-9 * y))
            } else {
                (p.n_ppm, 1.0, y, 1.0)
            }
        })
        .collect();

    // bracket around the median per-point slope
    let mut slopes: Vec<f64> = data.iter().map(|&(x, _, y, _)| y / x).collect();
    slopes.sort_by(f64::total_cmp);
    let a0 = slopes[slopes.len() / 2];
    let f = |a: f64| chi2_of(&data, a);
    let slope = golden_minimize(&f, a0 / 100.0, a0 * 100.0);
    let chi2 = f(slope);

    // curvature-based standard error: delta chi2 = 1 at one sigma
    let h = slope * 1e-5;
    let second = (f(slope + h) - 2.0 * chi2 + f(slope - h)) / (h * h);
    let slope_err = if second > 0.0 { (2.0 / second).sqrt() } else { f64::INFINITY };

    Ok(OdrFit { slope, slope_err, chi2, weighted })
}
