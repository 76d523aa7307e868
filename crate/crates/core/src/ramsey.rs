//! Ramsey free-induction-decay synthesis, fitting, spectra, and DC fringes.
//!
//! The signal model is
//!   s(tau) = C0 exp[-(tau/T2*)^p] sum_i cos(2 pi f_i (tau - tau0_i))
//! with up to three modulation lines.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::constants::NvConstants;
use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LeastSquares, LmOptions};

/// One modulation line: frequency and time offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyLine {
    pub frequency_hz: f64,
    pub tau0_s: f64,
}

/// Parameters of the decay model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyParams {
    /// Contrast at tau = 0.
    pub c0: f64,
    pub t2star_s: f64,
    /// Stretched-exponential exponent.
    pub p: f64,
    pub lines: Vec<RamseyLine>,
    /// Spin quantum-number change of the sensing basis (1 = SQ, 2 = DQ).
    pub dm: u8,
}

impl RamseyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0 && self.c0 <= 1.0) {
            return Err(Error::InvalidArgument(format!("c0 = {} outside (0, 1]", self.c0)));
        }
        if !(self.t2star_s > 0.0 && self.t2star_s.is_finite()) {
            return Err(Error::InvalidArgument("t2star must be positive".into()));
        }
        if !(0.5..=3.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!("p = {} outside [0.5, 3]", self.p)));
        }
        if self.lines.is_empty() || self.lines.len() > 3 {
            return Err(Error::InvalidArgument("between 1 and 3 lines are supported".into()));
        }
        if self.dm != 1 && self.dm != 2 {
            return Err(Error::InvalidArgument("dm must be 1 or 2".into()));
        }
        Ok(())
    }

    pub fn envelope(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            1.0
        } else {
            (-(tau / self.t2star_s).powf(self.p)).exp()
        }
    }

    pub fn model(&self, tau: f64) -> f64 {
        let osc: f64 = self
            .lines
            .iter()
            .map(|l| (2.0 * std::f64::consts::PI * l.frequency_hz * (tau - l.tau0_s)).cos())
            .sum();
        self.c0 * self.envelope(tau) * osc
    }
}

/// Synthesize a Ramsey signal on `times`, adding white Gaussian noise of
/// standard deviation `noise_sd` (deterministic per `seed`).
pub fn synthesize_ramsey(
    params: &RamseyParams,
    times: &[f64],
    noise_sd: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
    }
    let mut out: Vec<f64> = times.iter().map(|&t| params.model(t)).collect();
    if noise_sd > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sd)
            .map_err(|e| Error::InvalidArgument(format!("noise_sd: {e}")))?;
        for v in &mut out {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- fitting

struct RamseyProblem<'a> {
    times: &'a [f64],
    signal: &'a [f64],
    sigma: Option<&'a [f64]>,
    n_lines: usize,
}

impl RamseyProblem<'_> {
    fn unpack(&self, p: &[f64]) -> (f64, f64, f64, Vec<RamseyLine>) {
        let lines = (0..self.n_lines)
            .map(|i| RamseyLine { frequency_hz: p[3 + 2 * i], tau0_s: p[4 + 2 * i] })
            .collect();
        (p[0], p[1], p[2], lines)
    }
}

impl LeastSquares for RamseyProblem<'_> {
    fn residual_count(&self) -> usize {
        self.times.len()
    }
    fn parameter_count(&self) -> usize {
        3 + 2 * self.n_lines
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let (c0, t2, pexp, lines) = self.unpack(p);
        for (k, (&t, &y)) in self.times.iter().zip(self.signal).enumerate() {
            let env = if t <= 0.0 { 1.0 } else { (-(t / t2).powf(pexp)).exp() };
            let osc: f64 = lines
                .iter()
                .map(|l| (2.0 * std::f64::consts::PI * l.frequency_hz * (t - l.tau0_s)).cos())
                .sum();
            let w = self.sigma.map_or(1.0, |s| 1.0 / s[k]);
            out[k] = (c0 * env * osc - y) * w;
        }
    }
    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        let (c0, t2, pexp, lines) = self.unpack(p);
        let two_pi = 2.0 * std::f64::consts::PI;
        for (k, &t) in self.times.iter().enumerate() {
            let w = self.sigma.map_or(1.0, |s| 1.0 / s[k]);
            let x = t / t2;
            let (env, xp, lnx) = if t <= 0.0 {
                (1.0, 0.0, 0.0)
            } else {
                let xp = x.powf(pexp);
                (( -xp).exp(), xp, x.ln())
            };
            let mut osc = 0.0;
            for l in &lines {
                osc += (two_pi * l.frequency_hz * (t - l.tau0_s)).cos();
            }
            out[(k, 0)] = env * osc * w;
            out[(k, 1)] = c0 * osc * env * (pexp * xp / t2) * w;
            out[(k, 2)] = c0 * osc * env * (-xp * lnx) * w;
            for (i, l) in lines.iter().enumerate() {
                let phase = two_pi * l.frequency_hz * (t - l.tau0_s);
                let s = phase.sin();
                out[(k, 3 + 2 * i)] = -c0 * env * s * two_pi * (t - l.tau0_s) * w;
                out[(k, 4 + 2 * i)] = c0 * env * s * two_pi * l.frequency_hz * w;
            }
        }
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(1e-9, 1.0), (1e-12, 1e3), (0.5, 3.0)];
        for _ in 0..self.n_lines {
            b.push((0.0, f64::INFINITY)); // frequency
            b.push((f64::NEG_INFINITY, f64::INFINITY)); // tau0
        }
        b
    }
    fn is_weighted(&self) -> bool {
        self.sigma.is_some()
    }
}

/// Fit outcome with per-parameter standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RamseyFit {
    pub params: RamseyParams,
    pub c0_err: f64,
    pub t2star_err: f64,
    pub p_err: f64,
    pub line_errs: Vec<RamseyLine>,
    pub residual_norm: f64,
    pub converged: bool,
    /// The stretch exponent landed on a bound of [0.5, 3].
    pub p_at_bound: bool,
    pub iterations: usize,
}

/// Peak-based initial guess for the line frequencies.
fn spectrum_peaks(freqs: &[f64], mags: &[f64], n: usize) -> Vec<f64> {
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for k in 1..mags.len().saturating_sub(1) {
        if mags[k] > mags[k - 1] && mags[k] >= mags[k + 1] {
            peaks.push((mags[k], freqs[k]));
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let min_sep = if freqs.len() > 1 { 2.0 * (freqs[1] - freqs[0]) } else { 0.0 };
    let mut out: Vec<f64> = Vec::new();
    for (_, f) in peaks {
        if out.iter().all(|&g| (g - f).abs() > min_sep) {
            out.push(f);
            if out.len() == n {
                break;
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn initial_guess(times: &[f64], signal: &[f64], n_lines: usize) -> RamseyParams {
    let peak = signal.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let c0 = (peak / n_lines as f64).clamp(1e-3, 1.0);

    // frequency seeds from the spectrum when the grid is uniform
    let lines: Vec<RamseyLine> = match ramsey_spectrum(times, signal) {
        Ok((freqs, mags)) => {
            let mut fs = spectrum_peaks(&freqs[1..], &mags[1..], n_lines);
            let span = times.last().copied().unwrap_or(1.0).max(1e-12);
            while fs.len() < n_lines {
                fs.push((fs.len() + 1) as f64 / span);
            }
            fs.iter().map(|&f| RamseyLine { frequency_hz: f, tau0_s: 0.0 }).collect()
        }
        Err(_) => {
            let span = times.last().copied().unwrap_or(1.0).max(1e-12);
            (1..=n_lines)
                .map(|k| RamseyLine { frequency_hz: k as f64 / span, tau0_s: 0.0 })
                .collect()
        }
    };

    // T2 seed: first time the rectified signal stays below peak/e
    let threshold = peak / std::f64::consts::E;
    let mut t2 = times.last().copied().unwrap_or(1.0) * 0.5;
    let window = (times.len() / 20).max(3);
    'outer: for k in 0..times.len().saturating_sub(window) {
        let local_max = signal[k..k + window].iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        if local_max < threshold && times[k] > 0.0 {
            t2 = times[k];
            break 'outer;
        }
    }
    RamseyParams { c0, t2star_s: t2.max(1e-9), p: 1.0, lines, dm: 1 }
}

/// Nonlinear least-squares fit of the decay model.
///
/// `initial` overrides the built-in guess. `sigma`, when given, weights the
/// residuals by 1/sigma_k.
pub fn fit_ramsey(
    times: &[f64],
    signal: &[f64],
    n_lines: usize,
    sigma: Option<&[f64]>,
    initial: Option<&RamseyParams>,
) -> Result<RamseyFit> {
    if times.len() != signal.len() {
        return Err(Error::InvalidArgument("times and signal lengths differ".into()));
    }
    if n_lines == 0 || n_lines > 3 {
        return Err(Error::InvalidArgument("n_lines must be 1..=3".into()));
    }
    let n_params = 3 + 2 * n_lines;
    if times.len() < 10 * n_params {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for {} free parameters",
            10 * n_params,
            n_params
        )));
    }
    if let Some(s) = sigma {
        if s.len() != times.len() || s.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidArgument("sigma must be positive, one per sample".into()));
        }
    }
    let guess = match initial {
        Some(g) => {
            g.validate()?;
            g.clone()
        }
        None => initial_guess(times, signal, n_lines),
    };
    let span = times.last().copied().unwrap_or(0.0) - times.first().copied().unwrap_or(0.0);
    if span < guess.t2star_s {
        return Err(Error::InvalidArgument(format!(
            "time span {:.3e} s is shorter than the T2* guess {:.3e} s",
            span, guess.t2star_s
        )));
    }

    let mut p0 = vec![guess.c0, guess.t2star_s, guess.p];
    for l in guess.lines.iter().take(n_lines) {
        p0.push(l.frequency_hz);
        p0.push(l.tau0_s);
    }
    while p0.len() < n_params {
        p0.push(1.0 / span);
        p0.push(0.0);
    }

    let problem = RamseyProblem { times, signal, sigma, n_lines };
    let fit = levenberg_marquardt(&problem, &p0, &LmOptions::default())?;

    let mut lines: Vec<(RamseyLine, RamseyLine)> = (0..n_lines)
        .map(|i| {
            (
                RamseyLine { frequency_hz: fit.params[3 + 2 * i], tau0_s: fit.params[4 + 2 * i] },
                RamseyLine {
                    frequency_hz: fit.std_errors[3 + 2 * i],
                    tau0_s: fit.std_errors[4 + 2 * i],
                },
            )
        })
        .collect();
    lines.sort_by(|a, b| a.0.frequency_hz.total_cmp(&b.0.frequency_hz));

    Ok(RamseyFit {
        params: RamseyParams {
            c0: fit.params[0],
            t2star_s: fit.params[1],
            p: fit.params[2],
            lines: lines.iter().map(|(l, _)| *l).collect(),
            dm: 1,
        },
        c0_err: fit.std_errors[0],
        t2star_err: fit.std_errors[1],
        p_err: fit.std_errors[2],
        line_errs: lines.iter().map(|(_, e)| *e).collect(),
        residual_norm: fit.cost.sqrt(),
        converged: fit.converged,
        p_at_bound: fit.at_bound[2],
        iterations: fit.iterations,
    })
}

// ---------------------------------------------------------------- spectrum

/// Discrete Fourier magnitude of a uniformly sampled signal.
/// Returns (frequencies in hertz, amplitude-normalized magnitudes) for the
/// nonnegative-frequency half.
pub fn ramsey_spectrum(times: &[f64], signal: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if times.len() != signal.len() || times.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 samples".into()));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(Error::InvalidArgument("times must be increasing".into()));
    }
    for k in 1..times.len() {
        let step = times[k] - times[k - 1];
        if (step - dt).abs() > 1e-6 * dt {
            return Err(Error::InvalidArgument(format!(
                "non-uniform time grid at index {k}: step {step:.3e} vs {dt:.3e}"
            )));
        }
    }
    let n = signal.len();
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&y| Complex::new(y, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let freqs = (0..half).map(|k| k as f64 / (n as f64 * dt)).collect();
    let mags = buf[..half].iter().map(|z| 2.0 * z.norm() / n as f64).collect();
    Ok((freqs, mags))
}

// ---------------------------------------------------------------- DC fringe

/// Ramsey DC magnetometry fringe S(B) = C sin(dm * gamma * B * tau).
pub fn dc_fringe(
    constants: &NvConstants,
    contrast: f64,
    dm: u8,
    tau_s: f64,
    b_values_t: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if tau_s <= 0.0 {
        return Err(Error::InvalidArgument("tau must be positive".into()));
    }
    if dm != 1 && dm != 2 {
        return Err(Error::InvalidArgument("dm must be 1 or 2".into()));
    }
    let g = constants.gamma_rad_per_s_t();
    Ok(b_values_t
        .iter()
        .map(|&b| (b, contrast * (dm as f64 * g * b * tau_s).sin()))
        .collect())
}

/// Fringe period in tesla: Delta B = 2 pi / (dm * gamma * tau).
pub fn fringe_period(constants: &NvConstants, dm: u8, tau_s: f64) -> f64 {
    2.0 * std::f64::consts::PI / (dm as f64 * constants.gamma_rad_per_s_t() * tau_s)
}
