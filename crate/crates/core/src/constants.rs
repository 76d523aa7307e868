//! Physical constants and the tunable NV model constants.
//!
//! Everything that enters a Hamiltonian or a coupling coefficient lives here
//! so that scenarios can override the model constants in one place and the
//! sensitivity of downstream numbers to them can be probed.

use serde::{Deserialize, Serialize};

/// Bohr magneton, J/T.
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Planck constant, J s.
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817_646_156_5e-34;
/// mu_0 / 4 pi, T m / A.
pub const MU0_OVER_4PI: f64 = 1e-7;

/// Substitutional-nitrogen electronic g-factor.
pub const G_P1: f64 = 2.0025;

/// Nitrogen concentration unit: 1 ppm of carbon sites in diamond, per m^3.
pub const PPM_PER_M3: f64 = 1.76e23;

/// Convert a nitrogen concentration in ppm to a number density in m^-3.
pub fn ppm_to_per_m3(n_ppm: f64) -> f64 {
    n_ppm * PPM_PER_M3
}

/// Convert a number density in m^-3 back to ppm.
pub fn per_m3_to_ppm(n: f64) -> f64 {
    n / PPM_PER_M3
}

/// NV-N ensemble coupling from the concentration-series fit, rad/s per ppm
/// (2 pi x 16.6 kHz/ppm, single-quantum sub-basis).
pub const A_NV_N: f64 = 2.0 * std::f64::consts::PI * 16.6e3;

/// Electron-electron dipolar estimate, rad/s per ppm (2 pi x 9.1 kHz/ppm).
pub const A_EE_DIPOLAR: f64 = 2.0 * std::f64::consts::PI * 9.1e3;

/// NV-13C coupling, rad/s per percent 13C (2 pi x 160 kHz/%).
pub const A_NV_C13: f64 = 2.0 * std::f64::consts::PI * 160e3;

/// NV-NV coupling, rad/s per ppm; about twice A_NV_N from the higher spin
/// multiplicity of the NV center.
pub const A_NV_NV: f64 = 2.0 * std::f64::consts::PI * 33e3;

/// Temperature coefficient of the zero-field splitting, Hz/K.
pub const DDDT: f64 = -74e3;

/// Mean spacing between bath spins at 1 ppm: <r> = 0.55 [N]^(-1/3).
pub const MEAN_SPACING_FACTOR: f64 = 0.55;

/// Zero-field splitting and gyromagnetic ratio of the NV ground state.
///
/// `Default` gives the values used throughout: D = 2.870 GHz and
/// gamma/2pi = 28.025 GHz/T. Scenarios may override either.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvConstants {
    /// Zero-field splitting D, Hz.
    pub d_hz: f64,
    /// Gyromagnetic ratio gamma/2pi, Hz/T.
    pub gamma_hz_per_t: f64,
}

impl Default for NvConstants {
    fn default() -> Self {
        NvConstants {
            d_hz: 2.870e9,
            gamma_hz_per_t: 28.025e9,
        }
    }
}

impl NvConstants {
    /// Angular gyromagnetic ratio, rad/(s T).
    pub fn gamma_rad_per_s_t(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.gamma_hz_per_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trip_is_exact() {
        for x in [0.05, 0.75, 3.0, 10.0, 48.0] {
            assert_eq!(per_m3_to_ppm(ppm_to_per_m3(x)), x);
        }
    }

    #[test]
    fn defaults() {
        let c = NvConstants::default();
        assert_eq!(c.d_hz, 2.870e9);
        assert_eq!(c.gamma_hz_per_t, 28.025e9);
    }
}
