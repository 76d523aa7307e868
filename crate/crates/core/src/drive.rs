//! Spin-bath driving model: dephasing from a resonantly driven nitrogen bath
//! and its fit to (drive strength, T2*) data.
//!
//! Units follow how each quantity is usually quoted: the NV-N coupling
//! `gamma_nvn` is an angular rate in rad/s (e.g. 2 pi x 7 kHz), while the
//! bath half-linewidth `delta_n` and the Rabi drive `omega_n` are ordinary
//! frequencies in hertz.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LeastSquares, LmOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveModel {
    /// NV-N coupling, rad/s.
    pub gamma_nvn: f64,
    /// Bath resonance half width at half max, Hz.
    pub delta_n_hz: f64,
    /// Sensing basis multiplier (1 = SQ, 2 = DQ).
    pub dm: u8,
    /// Drive-independent dephasing channels, seconds.
    pub t2_other_s: f64,
}

impl DriveModel {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_nvn < 0.0 || !self.gamma_nvn.is_finite() {
            return Err(Error::InvalidArgument("gamma_nvn must be >= 0".into()));
        }
        if self.delta_n_hz <= 0.0 {
            return Err(Error::InvalidArgument("delta_n must be positive".into()));
        }
        if self.t2_other_s <= 0.0 {
            return Err(Error::InvalidArgument("t2_other must be positive".into()));
        }
        if self.dm != 1 && self.dm != 2 {
            return Err(Error::InvalidArgument("dm must be 1 or 2".into()));
        }
        Ok(())
    }
}

/// Bath-limited dephasing rate at drive strength `omega_n`:
/// rate = dm * gamma_nvn * delta^2 / (delta^2 + omega^2), in 1/s.
pub fn drive_limited_rate(model: &DriveModel, omega_n_hz: f64) -> Result<f64> {
    model.validate()?;
    if omega_n_hz < 0.0 || !omega_n_hz.is_finite() {
        return Err(Error::InvalidArgument("omega_n must be >= 0".into()));
    }
    let d2 = model.delta_n_hz * model.delta_n_hz;
    Ok(model.dm as f64 * model.gamma_nvn * d2 / (d2 + omega_n_hz * omega_n_hz))
}

/// Total T2* including drive-independent channels:
/// 1/T2* = drive_limited_rate + 1/t2_other.
pub fn total_t2_with_drive(model: &DriveModel, omega_n_hz: f64) -> Result<f64> {
    let rate = drive_limited_rate(model, omega_n_hz)?;
    Ok(1.0 / (rate + 1.0 / model.t2_other_s))
}

/// One measured point of a drive sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DrivePoint {
    pub omega_n_hz: f64,
    pub t2star_s: f64,
    /// Measurement uncertainty on t2star; zero or negative means unweighted.
    pub sigma_s: f64,
}

struct DriveProblem<'a> {
    data: &'a [DrivePoint],
    dm: u8,
    weighted: bool,
}

impl DriveProblem<'_> {
    fn model_t2(&self, p: &[f64], omega: f64) -> f64 {
        let (gamma, delta, t2o) = (p[0], p[1], p[2]);
        let d2 = delta * delta;
        1.0 / (self.dm as f64 * gamma * d2 / (d2 + omega * omega) + 1.0 / t2o)
    }
}

impl LeastSquares for DriveProblem<'_> {
    fn residual_count(&self) -> usize {
        self.data.len()
    }
    fn parameter_count(&self) -> usize {
        3
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (k, pt) in self.data.iter().enumerate() {
            let w = if self.weighted { 1.0 / pt.sigma_s } else { 1.0 };
            out[k] = (self.model_t2(p, pt.omega_n_hz) - pt.t2star_s) * w;
        }
    }
    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        let (gamma, delta, t2o) = (p[0], p[1], p[2]);
        let dm = self.dm as f64;
        for (k, pt) in self.data.iter().enumerate() {
            let w = if self.weighted { 1.0 / pt.sigma_s } else { 1.0 };
            let o2 = pt.omega_n_hz * pt.omega_n_hz;
            let d2 = delta * delta;
            let lor = d2 / (d2 + o2);
            let rate = dm * gamma * lor + 1.0 / t2o;
            let t2 = 1.0 / rate;
            let dt2_drate = -t2 * t2;
            // d rate / d gamma, delta, t2o
            let dr_dgamma = dm * lor;
            let dr_ddelta = dm * gamma * 2.0 * delta * o2 / ((d2 + o2) * (d2 + o2));
            let dr_dt2o = -1.0 / (t2o * t2o);
            out[(k, 0)] = dt2_drate * dr_dgamma * w;
            out[(k, 1)] = dt2_drate * dr_ddelta * w;
            out[(k, 2)] = dt2_drate * dr_dt2o * w;
        }
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY), (1.0, f64::INFINITY), (1e-9, f64::INFINITY)]
    }
    fn is_weighted(&self) -> bool {
        self.weighted
    }
}

/// Result of [`fit_drive_model`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriveFit {
    pub model: DriveModel,
    pub gamma_err: f64,
    pub delta_err: f64,
    pub t2_other_err: f64,
    pub residual_norm: f64,
    /// False when gamma and delta are effectively degenerate (all data in the
    /// omega >> delta regime constrains only gamma * delta^2).
    pub delta_identifiable: bool,
    /// delta_n landed on its lower bound.
    pub delta_at_bound: bool,
    /// Points with omega_n < delta_n, where the coherent-driving picture of
    /// the model is marginal; reported per input point.
    pub below_linewidth: Vec<bool>,
    pub iterations: usize,
}

/// Weighted least squares of the drive model over {gamma, delta, t2_other}.
/// Weights default to 1/sigma^2 when every point carries a positive sigma.
pub fn fit_drive_model(data: &[DrivePoint], dm: u8) -> Result<DriveFit> {
    if data.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 drive points".into()));
    }
    if dm != 1 && dm != 2 {
        return Err(Error::InvalidArgument("dm must be 1 or 2".into()));
    }
    for pt in data {
        if pt.omega_n_hz < 0.0 || pt.t2star_s <= 0.0 {
            return Err(Error::InvalidArgument("drive points must have omega >= 0, t2 > 0".into()));
        }
    }
    let weighted = data.iter().all(|p| p.sigma_s > 0.0);

    // initial guesses straight off the data
    let t2_min = data.iter().map(|p| p.t2star_s).fold(f64::INFINITY, f64::min);
    let t2_max = data.iter().map(|p| p.t2star_s).fold(0.0_f64, f64::max);
    let omega_max = data.iter().map(|p| p.omega_n_hz).fold(0.0_f64, f64::max);
    let gamma0 = ((1.0 / t2_min - 1.0 / (2.0 * t2_max)).max(1e-3)) / dm as f64;
    let delta0 = (omega_max / 10.0).max(10.0);

    let problem = DriveProblem { data, dm, weighted };
    let fit =
        levenberg_marquardt(&problem, &[gamma0, delta0, 2.0 * t2_max], &LmOptions::default())?;

    // Jacobian rank check at the solution: with every point in the
    // omega >> delta regime the model constrains only gamma * delta^2 and the
    // gamma and delta columns become parallel.
    let mut jac = DMatrix::<f64>::zeros(data.len(), 3);
    problem.jacobian(&fit.params, &mut jac);
    let dot: f64 = (0..data.len()).map(|k| jac[(k, 0)] * jac[(k, 1)]).sum();
    let n0: f64 = (0..data.len()).map(|k| jac[(k, 0)] * jac[(k, 0)]).sum::<f64>().sqrt();
    let n1: f64 = (0..data.len()).map(|k| jac[(k, 1)] * jac[(k, 1)]).sum::<f64>().sqrt();
    let column_cosine = if n0 > 0.0 && n1 > 0.0 { (dot / (n0 * n1)).abs() } else { 1.0 };
    let identifiable = column_cosine < 0.9999;

    let model = DriveModel {
        gamma_nvn: fit.params[0],
        delta_n_hz: fit.params[1],
        dm,
        t2_other_s: fit.params[2],
    };
    let below = data.iter().map(|p| p.omega_n_hz < model.delta_n_hz).collect();
    Ok(DriveFit {
        model,
        gamma_err: fit.std_errors[0],
        delta_err: fit.std_errors[1],
        t2_other_err: fit.std_errors[2],
        residual_norm: fit.cost.sqrt(),
        delta_identifiable: identifiable,
        delta_at_bound: fit.at_bound[1],
        below_linewidth: below,
        iterations: fit.iterations,
    })
}
