//! Scenario files: a TOML tree with explicit unit suffixes on every physical
//! quantity. Exactly one task block per scenario.

use serde::{Deserialize, Serialize};
use t2star_core::budget::{ExtraChannel, NitrogenModel, SampleSpec};
use t2star_core::constants::NvConstants;
use t2star_core::spin_models::Isotope;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: ConstantsBlock,
    #[serde(default)]
    pub budget: Option<BudgetBlock>,
    #[serde(default)]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default)]
    pub ramsey: Option<RamseyBlock>,
    #[serde(default)]
    pub drive: Option<DriveBlock>,
    #[serde(default)]
    pub montecarlo: Option<MonteCarloBlock>,
    #[serde(default)]
    pub sensitivity: Option<SensitivityBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct ConstantsBlock {
    pub d_ghz: Option<f64>,
    pub gamma_nv_ghz_per_t: Option<f64>,
}

impl ConstantsBlock {
    pub fn to_constants(&self) -> NvConstants {
        let mut c = NvConstants::default();
        if let Some(d) = self.d_ghz {
            c.d_hz = d * 1e9;
        }
        if let Some(g) = self.gamma_nv_ghz_per_t {
            c.gamma_hz_per_t = g * 1e9;
        }
        c
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BudgetBlock {
    #[serde(default)]
    pub n_ppm: f64,
    #[serde(default)]
    pub nitrogen_model: NitrogenModel,
    #[serde(default)]
    pub c13_percent: f64,
    #[serde(default)]
    pub strain_gradient_khz_per_um: f64,
    #[serde(default)]
    pub strain_length_um: f64,
    #[serde(default)]
    pub grad_coeff_mhz_per_gauss: f64,
    #[serde(default)]
    pub bias_gauss: f64,
    #[serde(default)]
    pub temp_rate_per_us: f64,
    #[serde(default)]
    pub extra_channels: Vec<ExtraChannel>,
}

impl BudgetBlock {
    pub fn to_sample_spec(&self) -> SampleSpec {
        SampleSpec {
            n_ppm: self.n_ppm,
            nitrogen_model: self.nitrogen_model,
            c13_percent: self.c13_percent,
            strain_gradient_hz_per_um: self.strain_gradient_khz_per_um * 1e3,
            spot_length_um: self.strain_length_um,
            grad_coeff_mhz_per_gauss: self.grad_coeff_mhz_per_gauss,
            bias_gauss: self.bias_gauss,
            temp_rate_per_s: self.temp_rate_per_us * 1e6,
            extra_channels: self.extra_channels.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumBlock {
    pub species: Isotope,
    pub field_mt: f64,
    #[serde(default)]
    pub misalignment_deg: f64,
    pub hwhm_khz: f64,
    #[serde(default = "default_forbidden_amplitude")]
    pub forbidden_amplitude: f64,
    pub window_mhz: [f64; 2],
    #[serde(default = "default_spectrum_points")]
    pub points: usize,
    #[serde(default = "default_group_tol_khz")]
    pub group_tol_khz: f64,
}

fn default_forbidden_amplitude() -> f64 {
    0.1
}
fn default_spectrum_points() -> usize {
    4000
}
fn default_group_tol_khz() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RamseyLineBlock {
    pub f_mhz: f64,
    #[serde(default)]
    pub tau0_us: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RamseyBlock {
    pub c0: f64,
    pub t2star_us: f64,
    pub p: f64,
    #[serde(default = "default_dm")]
    pub dm: u8,
    pub lines: Vec<RamseyLineBlock>,
    pub tau_max_us: f64,
    #[serde(default = "default_ramsey_points")]
    pub points: usize,
    #[serde(default)]
    pub noise_sd: f64,
    /// Fit the synthesized signal back and report the recovered parameters.
    #[serde(default)]
    pub fit: bool,
    /// Optional DC magnetometry fringe at the scenario's NV constants.
    #[serde(default)]
    pub fringe: Option<FringeBlock>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FringeBlock {
    /// Sensing time; the fringe period is 2 pi / (dm gamma tau).
    pub tau_us: f64,
    pub b_max_mt: f64,
    #[serde(default = "default_fringe_points")]
    pub points: usize,
    pub contrast: f64,
}

fn default_fringe_points() -> usize {
    400
}

fn default_dm() -> u8 {
    1
}
fn default_ramsey_points() -> usize {
    600
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DrivePointBlock {
    pub omega_khz: f64,
    pub t2_us: f64,
    #[serde(default)]
    pub sigma_us: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DriveBlock {
    #[serde(default = "default_dm")]
    pub dm: u8,
    pub gamma_nvn_over_2pi_khz: f64,
    pub delta_n_khz: f64,
    pub t2_other_us: f64,
    #[serde(default = "default_omega_max_mhz")]
    pub omega_max_mhz: f64,
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
    /// When present, the model is also fitted to these points.
    #[serde(default)]
    pub data: Vec<DrivePointBlock>,
}

fn default_omega_max_mhz() -> f64 {
    2.0
}
fn default_curve_points() -> usize {
    200
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct OdrPointBlock {
    pub n_ppm: f64,
    pub sigma_n_ppm: f64,
    pub t2_us: f64,
    pub sigma_t2_us: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MonteCarloBlock {
    #[serde(default)]
    pub densities_ppm: Vec<f64>,
    #[serde(default = "default_n_configs")]
    pub n_configs: usize,
    /// Optional concentration-series fit input.
    #[serde(default)]
    pub odr_points: Vec<OdrPointBlock>,
}

fn default_n_configs() -> usize {
    10_000
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensitivityBlock {
    /// Single evaluation of the shot-noise sensitivity expression.
    Eta {
        sigma: f64,
        tau_us: f64,
        dead_time_us: f64,
        contrast: f64,
        #[serde(default = "default_dm")]
        dm: u8,
    },
    /// Numeric minimizer of eta(tau).
    OptimalTau { t2star_us: f64, p: f64, dead_time_us: f64 },
    /// Concentration figure-of-merit sweep.
    EtaN {
        n_ppm_range: [f64; 2],
        #[serde(default = "default_eta_n_points")]
        n_points: usize,
        n_nv: f64,
        #[serde(default)]
        drives_mhz: Vec<f64>,
        #[serde(default = "default_strain_t2_us")]
        strain_t2_us: f64,
        #[serde(default = "default_c13_t2_us")]
        c13_t2_us: f64,
    },
    /// Allan deviation of a synthetic measurement stream.
    Allan {
        series: AllanSeries,
        n_samples: usize,
        cadence_s: f64,
        #[serde(default)]
        noise_sd: f64,
        #[serde(default)]
        drift_per_s: f64,
        taus_s: Vec<f64>,
    },
}

fn default_eta_n_points() -> usize {
    61
}
fn default_strain_t2_us() -> f64 {
    5.0
}
fn default_c13_t2_us() -> f64 {
    100.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AllanSeries {
    White,
    Drift,
}

/// A violated invariant, reported by `validate`.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Scenario {
    pub fn task_blocks(&self) -> Vec<&'static str> {
        let mut blocks = Vec::new();
        if self.budget.is_some() {
            blocks.push("budget");
        }
        if self.spectrum.is_some() {
            blocks.push("spectrum");
        }
        if self.ramsey.is_some() {
            blocks.push("ramsey");
        }
        if self.drive.is_some() {
            blocks.push("drive");
        }
        if self.montecarlo.is_some() {
            blocks.push("montecarlo");
        }
        if self.sensitivity.is_some() {
            blocks.push("sensitivity");
        }
        blocks
    }

    /// Check every invariant without running any computation.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |field: &str, message: String| {
            v.push(Violation { field: field.into(), message });
        };

        let blocks = self.task_blocks();
        if blocks.len() != 1 {
            push(
                "scenario",
                format!("exactly one task block is required, found {}: {:?}", blocks.len(), blocks),
            );
        }
        if let Some(d) = self.constants.d_ghz {
            if d <= 0.0 {
                push("constants.d_ghz", "zero-field splitting must be positive".into());
            }
        }
        if let Some(g) = self.constants.gamma_nv_ghz_per_t {
            if g <= 0.0 {
                push("constants.gamma_nv_ghz_per_t", "gyromagnetic ratio must be positive".into());
            }
        }

        if let Some(b) = &self.budget {
            if let Err(e) = b.to_sample_spec().validate() {
                push("budget", e.to_string());
            }
        }
        if let Some(s) = &self.spectrum {
            if s.field_mt <= 0.0 || s.field_mt >= 1000.0 {
                push("spectrum.field_mt", "field must be in (0, 1000) mT".into());
            }
            if s.hwhm_khz <= 0.0 {
                push("spectrum.hwhm_khz", "linewidth must be positive".into());
            }
            if s.window_mhz[1] <= s.window_mhz[0] {
                push("spectrum.window_mhz", "window must be increasing".into());
            }
            if s.forbidden_amplitude < 0.0 {
                push("spectrum.forbidden_amplitude", "amplitude must be >= 0".into());
            }
        }
        if let Some(r) = &self.ramsey {
            let params = r.to_params();
            if let Err(e) = params.validate() {
                push("ramsey", e.to_string());
            }
            if r.tau_max_us <= 0.0 {
                push("ramsey.tau_max_us", "tau range must be positive".into());
            }
            if r.points < 2 {
                push("ramsey.points", "need at least 2 samples".into());
            }
            if r.noise_sd < 0.0 {
                push("ramsey.noise_sd", "noise must be >= 0".into());
            }
            if let Some(f) = &r.fringe {
                if f.tau_us <= 0.0 || f.b_max_mt <= 0.0 || f.contrast <= 0.0 || f.points < 2 {
                    push("ramsey.fringe", "tau, b_max, contrast > 0 and points >= 2".into());
                }
            }
        }
        if let Some(d) = &self.drive {
            if let Err(e) = d.to_model().validate() {
                push("drive", e.to_string());
            }
            for (k, pt) in d.data.iter().enumerate() {
                if pt.omega_khz < 0.0 || pt.t2_us <= 0.0 {
                    push(&format!("drive.data[{k}]"), "omega >= 0 and t2 > 0 required".into());
                }
            }
        }
        if let Some(m) = &self.montecarlo {
            for (k, &d) in m.densities_ppm.iter().enumerate() {
                if d <= 0.0 {
                    push(&format!("montecarlo.densities_ppm[{k}]"), "density must be positive".into());
                }
            }
            if !m.densities_ppm.is_empty() && m.n_configs < 100 {
                push("montecarlo.n_configs", "need at least 100 configurations".into());
            }
            if m.densities_ppm.is_empty() && m.odr_points.is_empty() {
                push("montecarlo", "nothing to do: no densities and no odr_points".into());
            }
            for (k, p) in m.odr_points.iter().enumerate() {
                if p.n_ppm <= 0.0 || p.t2_us <= 0.0 {
                    push(
                        &format!("montecarlo.odr_points[{k}]"),
                        "concentration and T2 must be positive".into(),
                    );
                }
            }
        }
        if let Some(s) = &self.sensitivity {
            match s {
                SensitivityBlock::Eta { sigma, tau_us, dead_time_us, contrast, dm } => {
                    if *sigma <= 0.0 || *tau_us <= 0.0 || *dead_time_us < 0.0 || *contrast <= 0.0 {
                        push("sensitivity", "sigma, tau, contrast > 0 and dead_time >= 0".into());
                    }
                    if *dm != 1 && *dm != 2 {
                        push("sensitivity.dm", "dm must be 1 or 2".into());
                    }
                }
                SensitivityBlock::OptimalTau { t2star_us, p, dead_time_us } => {
                    if *t2star_us <= 0.0 || *dead_time_us < 0.0 || !(0.5..=3.0).contains(p) {
                        push("sensitivity", "t2star > 0, dead_time >= 0, p in [0.5, 3]".into());
                    }
                }
                SensitivityBlock::EtaN { n_ppm_range, n_points, n_nv, drives_mhz, strain_t2_us, c13_t2_us } => {
                    if n_ppm_range[0] <= 0.0 || n_ppm_range[1] <= n_ppm_range[0] {
                        push("sensitivity.n_ppm_range", "need 0 < min < max".into());
                    }
                    if *n_points < 2 {
                        push("sensitivity.n_points", "need at least 2 points".into());
                    }
                    if !(*n_nv > 0.0 && *n_nv <= 1.0) {
                        push("sensitivity.n_nv", "conversion fraction must be in (0, 1]".into());
                    }
                    if drives_mhz.iter().any(|&o| o < 0.0) {
                        push("sensitivity.drives_mhz", "drive strengths must be >= 0".into());
                    }
                    if *strain_t2_us <= 0.0 || *c13_t2_us <= 0.0 {
                        push("sensitivity", "channel T2 values must be positive".into());
                    }
                }
                SensitivityBlock::Allan { n_samples, cadence_s, noise_sd, taus_s, .. } => {
                    if *n_samples < 3 {
                        push("sensitivity.n_samples", "need at least 3 samples".into());
                    }
                    if *cadence_s <= 0.0 {
                        push("sensitivity.cadence_s", "cadence must be positive".into());
                    }
                    if *noise_sd < 0.0 {
                        push("sensitivity.noise_sd", "noise must be >= 0".into());
                    }
                    if taus_s.is_empty() {
                        push("sensitivity.taus_s", "need at least one averaging time".into());
                    }
                }
            }
        }
        v
    }
}

impl RamseyBlock {
    pub fn to_params(&self) -> t2star_core::ramsey::RamseyParams {
        t2star_core::ramsey::RamseyParams {
            c0: self.c0,
            t2star_s: self.t2star_us * 1e-6,
            p: self.p,
            lines: self
                .lines
                .iter()
                .map(|l| t2star_core::ramsey::RamseyLine {
                    frequency_hz: l.f_mhz * 1e6,
                    tau0_s: l.tau0_us * 1e-6,
                })
                .collect(),
            dm: self.dm,
        }
    }
}

impl DriveBlock {
    pub fn to_model(&self) -> t2star_core::drive::DriveModel {
        t2star_core::drive::DriveModel {
            gamma_nvn: 2.0 * std::f64::consts::PI * self.gamma_nvn_over_2pi_khz * 1e3,
            delta_n_hz: self.delta_n_khz * 1e3,
            dm: self.dm,
            t2_other_s: self.t2_other_us * 1e-6,
        }
    }
}

// ------------------------------------------------------- parsing + schema

/// Keys known to each table; anything else is reported as a warning (forward
/// compatibility), never an error.
fn known_keys(path: &[String]) -> Option<&'static [&'static str]> {
    let segments: Vec<&str> = path.iter().map(|s| s.as_str()).collect();
    match segments.as_slice() {
        [] => Some(&[
            "name", "seed", "constants", "budget", "spectrum", "ramsey", "drive", "montecarlo",
            "sensitivity",
        ]),
        ["constants"] => Some(&["d_ghz", "gamma_nv_ghz_per_t"]),
        ["budget"] => Some(&[
            "n_ppm",
            "nitrogen_model",
            "c13_percent",
            "strain_gradient_khz_per_um",
            "strain_length_um",
            "grad_coeff_mhz_per_gauss",
            "bias_gauss",
            "temp_rate_per_us",
            "extra_channels",
        ]),
        ["budget", "extra_channels"] => Some(&["label", "rate_per_us", "method", "kind"]),
        ["spectrum"] => Some(&[
            "species",
            "field_mt",
            "misalignment_deg",
            "hwhm_khz",
            "forbidden_amplitude",
            "window_mhz",
            "points",
            "group_tol_khz",
        ]),
        ["ramsey"] => Some(&[
            "c0",
            "t2star_us",
            "p",
            "dm",
            "lines",
            "tau_max_us",
            "points",
            "noise_sd",
            "fit",
            "fringe",
        ]),
        ["ramsey", "lines"] => Some(&["f_mhz", "tau0_us"]),
        ["ramsey", "fringe"] => Some(&["tau_us", "b_max_mt", "points", "contrast"]),
        ["drive"] => Some(&[
            "dm",
            "gamma_nvn_over_2pi_khz",
            "delta_n_khz",
            "t2_other_us",
            "omega_max_mhz",
            "curve_points",
            "data",
        ]),
        ["drive", "data"] => Some(&["omega_khz", "t2_us", "sigma_us"]),
        ["montecarlo"] => Some(&["densities_ppm", "n_configs", "odr_points"]),
        ["montecarlo", "odr_points"] => Some(&["n_ppm", "sigma_n_ppm", "t2_us", "sigma_t2_us"]),
        ["sensitivity"] => Some(&[
            "kind",
            "sigma",
            "tau_us",
            "dead_time_us",
            "contrast",
            "dm",
            "t2star_us",
            "p",
            "n_ppm_range",
            "n_points",
            "n_nv",
            "drives_mhz",
            "strain_t2_us",
            "c13_t2_us",
            "series",
            "n_samples",
            "cadence_s",
            "noise_sd",
            "drift_per_s",
            "taus_s",
        ]),
        _ => None,
    }
}

fn collect_unknown_keys(value: &toml::Value, path: &mut Vec<String>, warnings: &mut Vec<String>) {
    match value {
        toml::Value::Table(table) => {
            let known = known_keys(path);
            for (key, sub) in table {
                if let Some(list) = known {
                    if !list.contains(&key.as_str()) {
                        let mut full = path.join(".");
                        if !full.is_empty() {
                            full.push('.');
                        }
                        warnings.push(format!("unknown key `{full}{key}` ignored"));
                        continue;
                    }
                }
                path.push(key.clone());
                collect_unknown_keys(sub, path, warnings);
                path.pop();
            }
        }
        toml::Value::Array(items) => {
            for item in items {
                collect_unknown_keys(item, path, warnings);
            }
        }
        _ => {}
    }
}

/// Parse a scenario from TOML text. Returns the scenario plus warnings for
/// unrecognized keys.
pub fn parse_scenario(text: &str) -> Result<(Scenario, Vec<String>), String> {
    let value: toml::Value =
        toml::from_str(text).map_err(|e| format!("scenario parse error: {e}"))?;
    let mut warnings = Vec::new();
    collect_unknown_keys(&value, &mut Vec::new(), &mut warnings);
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| format!("scenario parse error: {e}"))?;
    Ok((scenario, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
seed = 3

[budget]
n_ppm = 0.05
c13_percent = 0.01
strain_gradient_khz_per_um = 2.8
strain_length_um = 21.6
grad_coeff_mhz_per_gauss = 0.000056
bias_gauss = 20.0
"#;

    #[test]
    fn parses_and_validates() {
        let (s, warnings) = parse_scenario(MINIMAL).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(s.name, "demo");
        assert!(s.validate().is_empty());
    }

    #[test]
    fn unknown_key_is_a_warning_not_an_error() {
        let text = format!("{MINIMAL}\nfuture_key = 1\n");
        let (s, warnings) = parse_scenario(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("future_key"));
        assert!(s.validate().is_empty());
    }

    #[test]
    fn negative_concentration_is_one_violation() {
        let text = MINIMAL.replace("n_ppm = 0.05", "n_ppm = -1.0");
        let (s, _) = parse_scenario(&text).unwrap();
        let v = s.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("n_ppm"));
    }

    #[test]
    fn two_task_blocks_are_rejected() {
        let text = format!(
            "{MINIMAL}\n[sensitivity]\nkind = \"optimal_tau\"\nt2star_us = 10.0\np = 1.0\ndead_time_us = 0.0\n"
        );
        let (s, _) = parse_scenario(&text).unwrap();
        let v = s.validate();
        assert!(v.iter().any(|x| x.message.contains("exactly one task block")));
    }

    #[test]
    fn serialize_parse_round_trip_is_identical() {
        let (s, _) = parse_scenario(MINIMAL).unwrap();
        let text = toml::to_string(&s).unwrap();
        let (s2, warnings) = parse_scenario(&text).unwrap();
        assert!(warnings.is_empty(), "round-trip produced warnings: {warnings:?}");
        assert_eq!(s, s2);
    }
}
