//! Ramsey DC magnetometry sensitivity, optimal sensing time, the
//! concentration figure of merit eta_N, and Allan deviation.

use serde::{Deserialize, Serialize};

use crate::constants::{A_NV_N, A_NV_NV};
use crate::error::{Error, Result};

/// Inputs of the shot-noise sensitivity expression
/// eta = sigma sqrt(tau + tau_d) / (dm C gamma tau).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SensitivityParams {
    /// Per-measurement contrast standard deviation.
    pub sigma: f64,
    /// Sensing time, seconds.
    pub tau_s: f64,
    /// Initialization/readout dead time, seconds.
    pub tau_d_s: f64,
    /// Measurement contrast C(tau).
    pub contrast: f64,
    /// Sensing basis multiplier (1 = SQ, 2 = DQ).
    pub dm: u8,
    /// Angular gyromagnetic ratio, rad/(s T). The sensitivity analysis uses
    /// 2 pi x 28 GHz/T.
    pub gamma_rad_per_s_t: f64,
}

impl SensitivityParams {
    pub fn new(sigma: f64, tau_s: f64, tau_d_s: f64, contrast: f64, dm: u8) -> Self {
        SensitivityParams {
            sigma,
            tau_s,
            tau_d_s,
            contrast,
            dm,
            gamma_rad_per_s_t: 2.0 * std::f64::consts::PI * 28e9,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sigma <= 0.0 || self.tau_s <= 0.0 || self.tau_d_s < 0.0 || self.contrast <= 0.0 {
            return Err(Error::InvalidArgument(
                "sigma, tau, contrast must be positive; tau_d >= 0".into(),
            ));
        }
        if self.dm != 1 && self.dm != 2 {
            return Err(Error::InvalidArgument("dm must be 1 or 2".into()));
        }
        if self.gamma_rad_per_s_t <= 0.0 {
            return Err(Error::InvalidArgument("gamma must be positive".into()));
        }
        Ok(())
    }
}

/// DC magnetic-field sensitivity in T/sqrt(Hz).
pub fn ramsey_sensitivity(p: &SensitivityParams) -> Result<f64> {
    p.validate()?;
    Ok(p.sigma * (p.tau_s + p.tau_d_s).sqrt()
        / (p.dm as f64 * p.contrast * p.gamma_rad_per_s_t * p.tau_s))
}

/// Sensing time that minimizes eta(tau) with C(tau) = C0 exp[-(tau/T2*)^p].
///
/// For tau_d = 0 and p in [1, 2] the minimizer is T2*/2 exactly; with a
/// dominant dead time it moves up toward T2*.
pub fn optimal_tau(t2star_s: f64, p_exponent: f64, tau_d_s: f64) -> Result<f64> {
    if t2star_s <= 0.0 || tau_d_s < 0.0 || !(0.5..=3.0).contains(&p_exponent) {
        return Err(Error::InvalidArgument("bad optimal_tau inputs".into()));
    }
    // log of the tau-dependent part of eta; C0, sigma, dm, gamma are constant
    let objective = |tau: f64| -> f64 {
        0.5 * (tau + tau_d_s).ln() + (tau / t2star_s).powf(p_exponent) - tau.ln()
    };
    let mut lo = 1e-6 * t2star_s;
    let mut hi = 10.0 * (t2star_s + tau_d_s);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..400 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = objective(x2);
        }
    }
    Ok(0.5 * (lo + hi))
}

// ------------------------------------------------------------------- eta_N

/// Channel constants entering the eta_N concentration sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FomChannels {
    /// 13C-limited T2*, seconds (SQ basis).
    pub c13_t2_s: f64,
    /// Strain-limited T2*, seconds; acts in the SQ basis only.
    pub strain_t2_s: f64,
    /// NV-N coupling, rad/s per ppm (SQ sub-basis).
    pub a_nvn: f64,
    /// NV-NV coupling, rad/s per ppm.
    pub a_nvnv: f64,
    /// Bath half-linewidth anchor: delta_n(n_ppm) = anchor_hz * n/anchor_ppm.
    pub delta_anchor_hz: f64,
    pub delta_anchor_ppm: f64,
}

impl Default for FomChannels {
    fn default() -> Self {
        FomChannels {
            c13_t2_s: 100e-6,
            strain_t2_s: 5e-6,
            a_nvn: A_NV_N,
            a_nvnv: A_NV_NV,
            delta_anchor_hz: 80e3,
            delta_anchor_ppm: 0.75,
        }
    }
}

/// Sweep description: concentration grid, conversion fraction, and the
/// (basis, drive) settings to evaluate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FomSpec {
    pub n_ppm_min: f64,
    pub n_ppm_max: f64,
    pub n_points: usize,
    /// N-to-NV conversion fraction.
    pub n_nv: f64,
    pub channels: FomChannels,
    /// (dm, drive strength in Hz) settings, one curve each.
    pub settings: Vec<(u8, f64)>,
}

impl FomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_ppm_min <= 0.0 || self.n_ppm_max <= self.n_ppm_min {
            return Err(Error::InvalidArgument("need 0 < n_min < n_max".into()));
        }
        if self.n_points < 2 {
            return Err(Error::InvalidArgument("need at least 2 sweep points".into()));
        }
        if !(self.n_nv > 0.0 && self.n_nv <= 1.0) {
            return Err(Error::InvalidArgument("n_nv must be in (0, 1]".into()));
        }
        for &(dm, omega) in &self.settings {
            if dm != 1 && dm != 2 {
                return Err(Error::InvalidArgument("dm must be 1 or 2".into()));
            }
            if omega < 0.0 {
                return Err(Error::InvalidArgument("omega must be >= 0".into()));
            }
        }
        Ok(())
    }
}

/// T2*([N]) in the chosen basis: magnetic channels (13C, NV-N, NV-NV) dephase
/// twice as fast in the DQ basis, the strain channel drops out there.
pub fn t2_of_concentration(
    ch: &FomChannels,
    n_nv: f64,
    n_ppm: f64,
    dm: u8,
    omega_hz: f64,
) -> f64 {
    let dmf = dm as f64;
    let delta = ch.delta_anchor_hz * n_ppm / ch.delta_anchor_ppm;
    let lorentz = if omega_hz == 0.0 {
        1.0
    } else {
        delta * delta / (delta * delta + omega_hz * omega_hz)
    };
    let mut rate = dmf / ch.c13_t2_s;
    if dm == 1 {
        rate += 1.0 / ch.strain_t2_s;
    }
    rate += dmf * ch.a_nvn * n_ppm * lorentz;
    rate += dmf * ch.a_nvnv * n_nv * n_ppm / 4.0;
    1.0 / rate
}

/// eta_N = [dm sqrt(n_nv [N] T2*([N]))]^-1, up to the proportionality of the
/// volume-normalized sensitivity.
pub fn eta_n(ch: &FomChannels, n_nv: f64, n_ppm: f64, dm: u8, omega_hz: f64) -> f64 {
    let t2 = t2_of_concentration(ch, n_nv, n_ppm, dm, omega_hz);
    1.0 / (dm as f64 * (n_nv * n_ppm * t2).sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaNCurve {
    pub dm: u8,
    pub omega_hz: f64,
    /// Normalized eta_N values, one per grid point.
    pub eta: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaNSweep {
    pub n_ppm: Vec<f64>,
    pub curves: Vec<EtaNCurve>,
    /// Concentration at which the N-independent SQ rate (strain + 13C)
    /// equals the N-dependent rate; the knee of the SQ curve.
    pub crossover_ppm: f64,
}

/// Evaluate the sweep on a log grid. Curves are normalized so that the
/// SQ, no-drive value at the lowest grid point equals 1.
pub fn eta_n_sweep(spec: &FomSpec) -> Result<EtaNSweep> {
    spec.validate()?;
    let n = spec.n_points;
    let log_lo = spec.n_ppm_min.ln();
    let log_hi = spec.n_ppm_max.ln();
    let grid: Vec<f64> = (0..n)
        .map(|k| (log_lo + (log_hi - log_lo) * k as f64 / (n - 1) as f64).exp())
        .collect();

    let reference = eta_n(&spec.channels, spec.n_nv, grid[0], 1, 0.0);
    let curves = spec
        .settings
        .iter()
        .map(|&(dm, omega)| EtaNCurve {
            dm,
            omega_hz: omega,
            eta: grid
                .iter()
                .map(|&c| eta_n(&spec.channels, spec.n_nv, c, dm, omega) / reference)
                .collect(),
        })
        .collect();

    // bisect for the SQ knee: strain + 13C rate == N-dependent rate
    let ch = &spec.channels;
    let imbalance = |n_ppm: f64| {
        (1.0 / ch.strain_t2_s + 1.0 / ch.c13_t2_s)
            - (ch.a_nvn * n_ppm + ch.a_nvnv * spec.n_nv * n_ppm / 4.0)
    };
    let mut lo = 1e-4_f64;
    let mut hi = 1e4_f64;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if imbalance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EtaNSweep { n_ppm: grid, curves, crossover_ppm: (lo * hi).sqrt() })
}

// ------------------------------------------------------------------- Allan

/// White Gaussian measurement stream, deterministic per seed.
pub fn white_noise_series(n: usize, sd: f64, seed: u64) -> Result<Vec<f64>> {
    use rand::SeedableRng;
    use rand_distr::Distribution;
    let normal = rand_distr::Normal::new(0.0, sd)
        .map_err(|e| Error::InvalidArgument(format!("noise sd: {e}")))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// Pure linear drift c * t sampled at fixed cadence.
pub fn drift_series(n: usize, cadence_s: f64, rate_per_s: f64) -> Vec<f64> {
    (0..n).map(|k| rate_per_s * k as f64 * cadence_s).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllanPoint {
    pub tau_s: f64,
    pub adev: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllanResult {
    pub points: Vec<AllanPoint>,
    /// Requested averaging times beyond the series span, dropped.
    pub dropped_tau_s: Vec<f64>,
}

/// Overlapping Allan deviation of a series sampled at fixed cadence.
pub fn allan_deviation(series: &[f64], cadence_s: f64, taus_s: &[f64]) -> Result<AllanResult> {
    if cadence_s <= 0.0 {
        return Err(Error::InvalidArgument("cadence must be positive".into()));
    }
    if series.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 samples".into()));
    }
    // integrated series ("phase"): x[k] = cadence * sum of first k samples
    let mut x = Vec::with_capacity(series.len() + 1);
    x.push(0.0);
    let mut acc = 0.0;
    for &v in series {
        acc += v * cadence_s;
        x.push(acc);
    }
    let n = series.len();

    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &tau in taus_s {
        let m = (tau / cadence_s).round() as i64;
        if m < 1 || 2 * m as usize > n {
            dropped.push(tau);
            continue;
        }
        let m = m as usize;
        let terms = n - 2 * m + 1;
        let mut sum = 0.0;
        for j in 0..terms {
            let d = x[j + 2 * m] - 2.0 * x[j + m] + x[j];
            sum += d * d;
        }
        let avar = sum / (2.0 * terms as f64 * (m as f64 * cadence_s).powi(2));
        points.push(AllanPoint { tau_s: m as f64 * cadence_s, adev: avar.sqrt() });
    }
    Ok(AllanResult { points, dropped_tau_s: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn sensitivity_matches_hand_oracle() {
        // sigma sqrt(70 us) / (0.026 * 2pi*28e9 * 1.308 us) = 44.888 nT/rtHz
        let p = SensitivityParams::new(0.0321, 1.308e-6, 70e-6 - 1.308e-6, 0.026, 1);
        let eta = ramsey_sensitivity(&p).unwrap();
        assert_relative_eq!(eta, 4.488_849_66e-8, max_relative = 1e-6);
    }

    #[test]
    fn doubling_dm_halves_eta() {
        let p1 = SensitivityParams::new(0.03, 2e-6, 10e-6, 0.02, 1);
        let p2 = SensitivityParams { dm: 2, ..p1 };
        assert_relative_eq!(
            ramsey_sensitivity(&p1).unwrap(),
            2.0 * ramsey_sensitivity(&p2).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn eta_homogeneity() {
        let p = SensitivityParams::new(0.03, 2e-6, 10e-6, 0.02, 1);
        let base = ramsey_sensitivity(&p).unwrap();
        let p_sigma = SensitivityParams { sigma: 3.0 * p.sigma, ..p };
        assert_relative_eq!(ramsey_sensitivity(&p_sigma).unwrap(), 3.0 * base, max_relative = 1e-15);
        let p_c = SensitivityParams { contrast: 2.0 * p.contrast, ..p };
        assert_relative_eq!(ramsey_sensitivity(&p_c).unwrap(), base / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_dead_time_sqrt_tau_scaling() {
        let p = SensitivityParams::new(0.03, 2e-6, 0.0, 0.02, 1);
        let p4 = SensitivityParams { tau_s: 4.0 * p.tau_s, ..p };
        assert_relative_eq!(
            ramsey_sensitivity(&p).unwrap() / ramsey_sensitivity(&p4).unwrap(),
            2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn optimal_tau_limits() {
        // tau_d = 0, p = 1: exactly T2/2
        let t = optimal_tau(10e-6, 1.0, 0.0).unwrap();
        assert_relative_eq!(t, 5e-6, max_relative = 1e-6);
        // p = 2: also T2/2 (tau_opt = T2 (1/(2p))^(1/p))
        let t2 = optimal_tau(10e-6, 2.0, 0.0).unwrap();
        assert_relative_eq!(t2, 5e-6, max_relative = 1e-6);
        // dead-time dominated: moves to ~T2
        let t3 = optimal_tau(10e-6, 1.0, 100.0 * 10e-6).unwrap();
        assert!((t3 - 10e-6).abs() / 10e-6 < 0.10, "tau_opt = {t3}");
    }

    #[test]
    fn optimal_tau_nondecreasing_in_dead_time() {
        let mut prev = 0.0;
        for k in 0..20 {
            let tau_d = 10e-6 * k as f64;
            let t = optimal_tau(10e-6, 1.3, tau_d).unwrap();
            assert!(t >= prev - 1e-12, "tau_opt decreased at tau_d {tau_d}");
            prev = t;
        }
    }

    #[test]
    fn eta_n_ratio_and_crossover() {
        let spec = FomSpec {
            n_ppm_min: 0.1,
            n_ppm_max: 100.0,
            n_points: 61,
            n_nv: 0.4,
            channels: FomChannels::default(),
            settings: vec![(1, 0.0), (2, 0.0), (2, 1e6), (2, 10e6)],
        };
        let sweep = eta_n_sweep(&spec).unwrap();
        assert_relative_eq!(sweep.curves[0].eta[0], 1.0, max_relative = 1e-12);
        assert!((0.3..=3.0).contains(&sweep.crossover_ppm), "knee {}", sweep.crossover_ppm);
        // high-concentration DQ/SQ ratio -> 1/sqrt(2)
        let last = sweep.n_ppm.len() - 1;
        let ratio = sweep.curves[1].eta[last] / sweep.curves[0].eta[last];
        assert_relative_eq!(ratio, std::f64::consts::FRAC_1_SQRT_2, max_relative = 0.05);
        // ordering: driven DQ <= DQ <= SQ everywhere
        for k in 0..sweep.n_ppm.len() {
            assert!(sweep.curves[2].eta[k] <= sweep.curves[1].eta[k] + 1e-15);
            assert!(sweep.curves[1].eta[k] <= sweep.curves[0].eta[k] + 1e-15);
        }
    }

    #[test]
    fn removing_strain_leaves_only_basis_factors() {
        // with no strain channel, SQ and DQ T2 differ exactly by the factor 2
        let ch = FomChannels { strain_t2_s: f64::INFINITY, ..FomChannels::default() };
        for n in [0.1, 1.0, 10.0, 100.0] {
            let sq = t2_of_concentration(&ch, 0.4, n, 1, 0.0);
            let dq = t2_of_concentration(&ch, 0.4, n, 2, 0.0);
            assert_relative_eq!(sq / dq, 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn allan_white_noise_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let normal = Normal::new(0.0, 0.7).unwrap();
        let series: Vec<f64> = (0..200_000).map(|_| normal.sample(&mut rng)).collect();
        let taus: Vec<f64> = (0..9).map(|k| 2f64.powi(k)).collect();
        let res = allan_deviation(&series, 1.0, &taus).unwrap();
        assert!(res.dropped_tau_s.is_empty());
        // sigma(tau) = sd / sqrt(m) within 10 %
        for p in &res.points {
            let expect = 0.7 / p.tau_s.sqrt();
            assert_relative_eq!(p.adev, expect, max_relative = 0.10);
        }
        // log-log slope -1/2
        let n = res.points.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for p in &res.points {
            let x = p.tau_s.ln();
            let y = p.adev.ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope + 0.5).abs() < 0.03, "slope {slope}");
    }

    #[test]
    fn allan_constant_series_is_zero() {
        let series = vec![3.2; 1000];
        let res = allan_deviation(&series, 0.5, &[0.5, 2.0, 8.0]).unwrap();
        for p in &res.points {
            assert!(p.adev.abs() < 1e-12);
        }
    }

    #[test]
    fn allan_linear_drift_closed_form() {
        // y_k = c * t_k gives adev(tau) = c tau / sqrt(2)
        let c = 0.37;
        let dt = 0.25;
        let series: Vec<f64> = (0..40_000).map(|k| c * (k as f64 * dt)).collect();
        let res = allan_deviation(&series, dt, &[dt, 4.0 * dt, 32.0 * dt]).unwrap();
        for p in &res.points {
            let expect = c * p.tau_s / 2f64.sqrt();
            assert_relative_eq!(p.adev, expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn allan_drops_out_of_span_taus() {
        let series = vec![1.0; 100];
        let res = allan_deviation(&series, 1.0, &[1.0, 49.0, 51.0, 1000.0]).unwrap();
        assert_eq!(res.points.len(), 2);
        assert_eq!(res.dropped_tau_s, vec![51.0, 1000.0]);
    }
}
