//! Dephasing-channel budget: per-mechanism rates, their combination per
//! sensing basis, and the table-style report.
//!
//! Rate conventions differ per mechanism and are fixed here once:
//! dipolar channels use an angular rate (1/T2* = gamma in rad/s), the strain
//! gradient uses 1/T2* = pi * delta_f, and the magnetic-field gradient uses
//! 1/T2* = delta_f directly. This is the only combination that reproduces
//! the published per-channel numbers simultaneously.

use serde::{Deserialize, Serialize};

use crate::constants::{A_EE_DIPOLAR, A_NV_C13, A_NV_N, A_NV_NV};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Nitrogen,
    Carbon13,
    OtherSpins,
    StrainGradient,
    FieldGradient,
    TempFluctuation,
    NvNv,
}

impl ChannelKind {
    /// Factor applied to the channel rate in the DQ basis: 2 for magnetic
    /// (dipolar and field-gradient) channels, 0 for common-mode channels.
    pub fn basis_scaling(&self) -> u8 {
        match self {
            ChannelKind::StrainGradient | ChannelKind::TempFluctuation => 0,
            _ => 2,
        }
    }
}

/// A named dephasing mechanism with its SQ-basis rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DephasingChannel {
    pub kind: ChannelKind,
    pub label: String,
    /// Human-readable magnitude, e.g. "0.0028 MHz/um".
    pub magnitude: String,
    /// Single-quantum dephasing rate, 1/s.
    pub rate_per_s: f64,
    /// How the rate was obtained (estimate, calibration, SEDOR, ...).
    pub method: String,
}

impl DephasingChannel {
    pub fn t2_s(&self) -> f64 {
         1.0 / self.rate_per_s
    }
}

/// Which coefficient converts nitrogen concentration into a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NitrogenModel {
    /// Dipolar estimate 2 pi x 9.1 kHz/ppm.
    #[default]
    Dipolar,
    /// Concentration-series fit 2 pi x 16.6 kHz/ppm.
    Empirical,
}

/// Dipolar nitrogen-bath rate, 1/s (2 pi x 9.1 kHz per ppm).
pub fn dipolar_rate_nn(n_ppm: f64) -> Result<f64> {
    if n_ppm < 0.0 || !n_ppm.is_finite() {
        return Err(Error::InvalidArgument("n_ppm must be >= 0".into()));
    }
    Ok(A_EE_DIPOLAR * n_ppm)
}

/// Concentration-series NV-N rate, 1/s (2 pi x 16.6 kHz per ppm).
pub fn empirical_nvn_rate(n_ppm: f64) -> Result<f64> {
    if n_ppm < 0.0 || !n_ppm.is_finite() {
        return Err(Error::InvalidArgument("n_ppm must be >= 0".into()));
    }
    Ok(A_NV_N * n_ppm)
}

/// 13C bath rate, 1/s (2 pi x 160 kHz per percent). Valid in the dilute
/// limit; see [`c13_regime_warning`] for concentrations above natural
/// abundance.
pub fn rate_13c(c13_percent: f64) -> Result<f64> {
    if c13_percent < 0.0 || !c13_percent.is_finite() {
        return Err(Error::InvalidArgument("c13_percent must be >= 0".into()));
    }
    Ok(A_NV_C13 * c13_percent)
}

/// Warns when the dilute-limit coefficient is stretched past natural
/// abundance (the neglected contact term starts to matter there).
pub fn c13_regime_warning(c13_percent: f64) -> Option<String> {
    (c13_percent > 1.1).then(|| {
        format!("13C = {c13_percent} % exceeds natural abundance; dilute-limit coefficient is a lower bound")
    })
}

/// Back out the 13C coefficient (rad/s per percent) from a measured DQ
/// dephasing time, correcting for the nitrogen contribution:
/// A = (1/(2 t2_dq) - A_NV-N n_ppm) / c13_percent.
pub fn calibrate_13c(t2_dq_s: f64, n_ppm: f64, c13_percent: f64) -> Result<f64> {
    if t2_dq_s <= 0.0 || c13_percent <= 0.0 || n_ppm < 0.0 {
        return Err(Error::InvalidArgument("inputs must be positive".into()));
    }
    let numerator = 1.0 / (2.0 * t2_dq_s) - A_NV_N * n_ppm;
    if numerator < 0.0 {
        return Err(Error::InconsistentInputs(format!(
            "nitrogen contribution exceeds the measured DQ rate by {:.3e} 1/s",
            -numerator
        )));
    }
    Ok(numerator / c13_percent)
}

/// Strain-gradient T2* limit in seconds: T2* = 1/(pi * gradient * length).
pub fn strain_limit(gradient_hz_per_um: f64, length_um: f64) -> Result<f64> {
    if gradient_hz_per_um < 0.0 || length_um <= 0.0 {
        return Err(Error::InvalidArgument("gradient >= 0 and length > 0 required".into()));
    }
    Ok(1.0 / (std::f64::consts::PI * gradient_hz_per_um * length_um))
}

/// Magnetic-field-gradient rate in 1/s: rate = 1e6 * coeff[MHz/G] * bias[G].
pub fn field_gradient_limit(coeff_mhz_per_gauss: f64, bias_gauss: f64) -> Result<f64> {
    if coeff_mhz_per_gauss < 0.0 || bias_gauss < 0.0 {
        return Err(Error::InvalidArgument("coefficient and bias must be >= 0".into()));
    }
    Ok(1e6 * coeff_mhz_per_gauss * bias_gauss)
}

/// NV-NV rate for sensitivity sweeps: A_NV-NV * n_nv * [N] / 4, 1/s.
pub fn nvnv_rate(n_nv_fraction: f64, n_ppm: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&n_nv_fraction) || n_ppm < 0.0 {
        return Err(Error::InvalidArgument("n_nv in [0,1] and n_ppm >= 0 required".into()));
    }
    Ok(A_NV_NV * n_nv_fraction * n_ppm / 4.0)
}

/// Opaque measured channel (e.g. SEDOR rows) fed through as-is.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExtraChannel {
    pub label: String,
    /// SQ-basis rate in 1/us, as the tables quote them.
    pub rate_per_us: f64,
    #[serde(default = "default_method")]
    pub method: String,
    /// Channel kind for basis bookkeeping; defaults to other electronic spins.
    #[serde(default = "default_extra_kind")]
    pub kind: ChannelKind,
}

fn default_method() -> String {
    "SEDOR".into()
}

fn default_extra_kind() -> ChannelKind {
    ChannelKind::OtherSpins
}

/// Everything needed to assemble a sample's dephasing budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SampleSpec {
    #[serde(default)]
    pub n_ppm: f64,
    #[serde(default)]
    pub nitrogen_model: NitrogenModel,
    #[serde(default)]
    pub c13_percent: f64,
    /// Strain gradient in Hz/um (0 disables the channel).
    #[serde(default)]
    pub strain_gradient_hz_per_um: f64,
    /// Effective interrogation length for the strain gradient, um.
    #[serde(default)]
    pub spot_length_um: f64,
    /// Field-gradient coefficient, MHz per gauss.
    #[serde(default)]
    pub grad_coeff_mhz_per_gauss: f64,
    #[serde(default)]
    pub bias_gauss: f64,
    /// Temperature fluctuation rate, 1/s; represented but defaults to zero.
    #[serde(default)]
    pub temp_rate_per_s: f64,
    #[serde(default)]
    pub extra_channels: Vec<ExtraChannel>,
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_ppm", self.n_ppm),
            ("c13_percent", self.c13_percent),
            ("strain_gradient_hz_per_um", self.strain_gradient_hz_per_um),
            ("spot_length_um", self.spot_length_um),
            ("grad_coeff_mhz_per_gauss", self.grad_coeff_mhz_per_gauss),
            ("bias_gauss", self.bias_gauss),
            ("temp_rate_per_s", self.temp_rate_per_s),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0")));
            }
        }
        for c in &self.extra_channels {
            if c.rate_per_us < 0.0 || !c.rate_per_us.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "extra channel '{}' has invalid rate",
                    c.label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Basis {
    Sq,
    Dq,
}

/// The assembled budget. Rates are SQ-basis; the DQ view reports both
/// T2*_DQ and the table-style 2 x T2*_DQ (which equals the inverse of the
/// SQ-equivalent sum over magnetic channels).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetReport {
    pub channels: Vec<DephasingChannel>,
    pub total_sq_rate_per_s: f64,
    pub total_sq_t2_s: f64,
    /// Sum of SQ rates over channels that survive in the DQ basis.
    pub dq_sum_rate_per_s: f64,
    pub t2_dq_s: f64,
    pub two_t2_dq_s: f64,
    pub notes: Vec<String>,
}

impl BudgetReport {
    pub fn total_for(&self, basis: Basis) -> (f64, f64) {
        match basis {
            Basis::Sq => (self.total_sq_rate_per_s, self.total_sq_t2_s),
            Basis::Dq => (2.0 * self.dq_sum_rate_per_s, self.t2_dq_s),
        }
    }
}

/// Assemble the per-channel budget and the basis totals for a sample.
pub fn combine_budget(spec: &SampleSpec) -> Result<BudgetReport> {
    spec.validate()?;
    let mut channels = Vec::new();
    let mut notes = Vec::new();

    if spec.strain_gradient_hz_per_um > 0.0 && spec.spot_length_um > 0.0 {
        let t2 = strain_limit(spec.strain_gradient_hz_per_um, spec.spot_length_um)?;
        channels.push(DephasingChannel {
            kind: ChannelKind::StrainGradient,
            label: "strain".into(),
            magnitude: format!("{} MHz/um", spec.strain_gradient_hz_per_um / 1e6),
            rate_per_s: 1.0 / t2,
            method: "estimate".into(),
        });
    }
    if spec.n_ppm > 0.0 {
        let (rate, method) = match spec.nitrogen_model {
            NitrogenModel::Dipolar => (dipolar_rate_nn(spec.n_ppm)?, "dipolar estimate"),
            NitrogenModel::Empirical => (empirical_nvn_rate(spec.n_ppm)?, "concentration fit"),
        };
        channels.push(DephasingChannel {
            kind: ChannelKind::Nitrogen,
            label: "N".into(),
            magnitude: format!("{} ppm", spec.n_ppm),
            rate_per_s: rate,
            method: method.into(),
        });
    }
    if spec.c13_percent > 0.0 {
        if let Some(w) = c13_regime_warning(spec.c13_percent) {
            notes.push(w);
        }
        channels.push(DephasingChannel {
            kind: ChannelKind::Carbon13,
            label: "13C".into(),
            magnitude: format!("{} %", spec.c13_percent),
            rate_per_s: rate_13c(spec.c13_percent)?,
            method: "calibration".into(),
        });
    }
    if spec.grad_coeff_mhz_per_gauss > 0.0 && spec.bias_gauss > 0.0 {
        channels.push(DephasingChannel {
            kind: ChannelKind::FieldGradient,
            label: format!("magnetic field gradient @ {} G", spec.bias_gauss),
            magnitude: format!("{} MHz/G", spec.grad_coeff_mhz_per_gauss),
            rate_per_s: field_gradient_limit(spec.grad_coeff_mhz_per_gauss, spec.bias_gauss)?,
            method: "estimate".into(),
        });
    }
    if spec.temp_rate_per_s > 0.0 {
        channels.push(DephasingChannel {
            kind: ChannelKind::TempFluctuation,
            label: "temperature fluctuations".into(),
            magnitude: String::new(),
            rate_per_s: spec.temp_rate_per_s,
            method: "estimate".into(),
        });
    }
    for extra in &spec.extra_channels {
        channels.push(DephasingChannel {
            kind: extra.kind,
            label: extra.label.clone(),
            magnitude: String::new(),
            rate_per_s: extra.rate_per_us * 1e6,
            method: extra.method.clone(),
        });
    }

    if channels.is_empty() {
        return Err(Error::InvalidArgument("no dephasing channels configured".into()));
    }

    let total_sq: f64 = channels.iter().map(|c| c.rate_per_s).sum();
    let dq_sum: f64 = channels
        .iter()
        .filter(|c| c.kind.basis_scaling() == 2)
        .map(|c| c.rate_per_s)
        .sum();
    Ok(BudgetReport {
        channels,
        total_sq_rate_per_s: total_sq,
        total_sq_t2_s: 1.0 / total_sq,
        dq_sum_rate_per_s: dq_sum,
        t2_dq_s: 1.0 / (2.0 * dq_sum),
        two_t2_dq_s: 1.0 / dq_sum,
        notes,
    })
}
