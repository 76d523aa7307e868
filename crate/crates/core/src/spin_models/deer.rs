//! NV-detected DEER spectrum of the nitrogen bath: all four Jahn-Teller
//! orientations, line grouping, and a Lorentzian-sum rendering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_models::nitrogen::{p1_transitions, JtAxis, NitrogenSpecies};
use crate::spin_models::nv::FieldVector;

/// One spectral line of the bath spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralLine {
    pub frequency_hz: f64,
    pub relative_amplitude: f64,
    /// Orientation / hyperfine tag, e.g. "jt1 mI=+1" or "jt0 mI 0->-1".
    pub label: String,
    pub allowed: bool,
}

/// A cluster of degenerate (or nearly degenerate) allowed lines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineGroup {
    pub frequency_hz: f64,
    /// Summed relative amplitude of the member lines (the degeneracy weight).
    pub weight: f64,
    pub members: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeerSpectrum {
    pub lines: Vec<SpectralLine>,
    pub groups: Vec<LineGroup>,
    /// (frequency_hz, amplitude) samples of the Lorentzian sum.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DeerOptions {
    /// Half width at half maximum of each rendered line, hertz.
    pub hwhm_hz: f64,
    /// Relative amplitude given to every forbidden line (the data constrain
    /// the positions only, so the amplitude is a display parameter).
    pub forbidden_amplitude: f64,
    /// Lines closer than this are merged into one group.
    pub group_tol_hz: f64,
    /// Sampling window, hertz.
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub n_samples: usize,
}

impl Default for DeerOptions {
    fn default() -> Self {
        DeerOptions {
            hwhm_hz: 30e3,
            forbidden_amplitude: 0.1,
            group_tol_hz: 1e3,
            f_min_hz: 100e6,
            f_max_hz: 500e6,
            n_samples: 4000,
        }
    }
}

/// The bias field for a magnitude `b0_t` nominally along the [111] JT axis,
/// misaligned by `misalignment_deg` toward the [1,-1,-1] axis. This tilt
/// plane keeps the other two off-axis orientations equivalent, so a nonzero
/// misalignment splits each weight-3 group into a 2+1 pattern.
pub fn tilted_field(b0_t: f64, misalignment_deg: f64) -> Result<FieldVector> {
    let u0 = JtAxis::P111.unit();
    let u1 = JtAxis::P1M1M1.unit();
    let d = u0[0] * u1[0] + u0[1] * u1[1] + u0[2] * u1[2];
    let w = [u1[0] - d * u0[0], u1[1] - d * u0[1], u1[2] - d * u0[2]];
    let wn = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let a = misalignment_deg.to_radians();
    let (s, c) = a.sin_cos();
    FieldVector::new(
        b0_t * (c * u0[0] + s * w[0] / wn),
        b0_t * (c * u0[1] + s * w[1] / wn),
        b0_t * (c * u0[2] + s * w[2] / wn),
    )
}

fn mi_tag(mi: f64) -> String {
    if (mi - mi.round()).abs() < 1e-9 {
        format!("{:+}", mi.round() as i64)
    } else {
        format!("{:+.1}", mi)
    }
}

/// Full DEER spectrum over the four Jahn-Teller orientations.
pub fn p1_deer_spectrum(
    b0_t: f64,
    misalignment_deg: f64,
    species: &NitrogenSpecies,
    opts: &DeerOptions,
) -> Result<DeerSpectrum> {
    if opts.hwhm_hz <= 0.0 {
        return Err(Error::InvalidArgument("hwhm must be positive".into()));
    }
    let b = tilted_field(b0_t, misalignment_deg)?;

    let mut lines = Vec::new();
    for axis in JtAxis::ALL {
        for t in p1_transitions(&b, species, axis)? {
            if !t.allowed && t.relative_intensity < 1e-6 {
                continue; // drop numerically invisible high-order lines
            }
            let label = if t.allowed {
                format!("jt{} mI={}", axis.index(), mi_tag(t.mi_to))
            } else {
                format!("jt{} mI {}->{}", axis.index(), mi_tag(t.mi_from), mi_tag(t.mi_to))
            };
            lines.push(SpectralLine {
                frequency_hz: t.frequency_hz,
                relative_amplitude: if t.allowed { 1.0 } else { opts.forbidden_amplitude },
                label,
                allowed: t.allowed,
            });
        }
    }
    lines.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));

    let mut groups: Vec<LineGroup> = Vec::new();
    let mut acc: Vec<&SpectralLine> = Vec::new();
    let flush = |acc: &mut Vec<&SpectralLine>, groups: &mut Vec<LineGroup>| {
        if acc.is_empty() {
            return;
        }
        let weight: f64 = acc.iter().map(|l| l.relative_amplitude).sum();
        let freq = acc.iter().map(|l| l.frequency_hz).sum::<f64>() / acc.len() as f64;
        groups.push(LineGroup { frequency_hz: freq, weight, members: acc.len() });
        acc.clear();
    };
    for line in lines.iter().filter(|l| l.allowed) {
        if let Some(last) = acc.last() {
            if line.frequency_hz - last.frequency_hz > opts.group_tol_hz {
                flush(&mut acc, &mut groups);
            }
        }
        acc.push(line);
    }
    flush(&mut acc, &mut groups);

    let mut samples = Vec::with_capacity(opts.n_samples);
    if opts.n_samples >= 2 {
        let step = (opts.f_max_hz - opts.f_min_hz) / (opts.n_samples - 1) as f64;
        let h2 = opts.hwhm_hz * opts.hwhm_hz;
        for k in 0..opts.n_samples {
            let f = opts.f_min_hz + step * k as f64;
            let mut amp = 0.0;
            for line in &lines {
                let df = f - line.frequency_hz;
                amp += line.relative_amplitude * h2 / (df * df + h2);
            }
            samples.push((f, amp));
        }
    }

    Ok(DeerSpectrum { lines, groups, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n14_aligned_has_six_groups_with_1_3_1_3_3_1_weights() {
        let spec =
            p1_deer_spectrum(8.5e-3, 0.0, &NitrogenSpecies::n14(), &DeerOptions::default()).unwrap();
        let weights: Vec<f64> = spec.groups.iter().map(|g| g.weight).collect();
        assert_eq!(weights, vec![1.0, 3.0, 1.0, 3.0, 3.0, 1.0]);
        // 12 partially degenerate allowed lines reduce to 6 groups
        assert_eq!(spec.lines.iter().filter(|l| l.allowed).count(), 12);
        for g in &spec.groups {
            assert!(g.frequency_hz > 100e6 && g.frequency_hz < 500e6);
        }
    }

    #[test]
    fn n14_generic_field_has_twelve_allowed_lines() {
        // misaligned enough that nothing is degenerate
        let spec =
            p1_deer_spectrum(8.5e-3, 7.0, &NitrogenSpecies::n14(), &DeerOptions::default()).unwrap();
        assert_eq!(spec.lines.iter().filter(|l| l.allowed).count(), 12);
        assert!(spec.groups.len() > 6);
    }

    #[test]
    fn n15_aligned_has_four_groups() {
        let spec =
            p1_deer_spectrum(9.8e-3, 0.0, &NitrogenSpecies::n15(), &DeerOptions::default()).unwrap();
        let weights: Vec<f64> = spec.groups.iter().map(|g| g.weight).collect();
        assert_eq!(weights, vec![1.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn misalignment_splits_a_weight_three_group_into_2_plus_1() {
        let opts = DeerOptions::default();
        let spec = p1_deer_spectrum(8.5e-3, 0.3, &NitrogenSpecies::n14(), &opts).unwrap();
        // the second-order-shifted group near 275 MHz splits by ~80 kHz
        let near: Vec<_> = spec
            .groups
            .iter()
            .filter(|g| (g.frequency_hz - 275.0e6).abs() < 2e6)
            .collect();
        assert_eq!(near.len(), 2, "expected a 2+1 split, got {:?}", near);
        let (pair, single) = if near[0].weight > near[1].weight {
            (near[0], near[1])
        } else {
            (near[1], near[0])
        };
        assert_eq!(pair.members, 2);
        assert_eq!(single.members, 1);
        let sep = (pair.frequency_hz - single.frequency_hz).abs();
        assert!((65e3..=95e3).contains(&sep), "separation {sep}");
    }

    #[test]
    fn forbidden_lines_carry_user_amplitude() {
        let opts = DeerOptions { forbidden_amplitude: 0.07, ..DeerOptions::default() };
        let spec = p1_deer_spectrum(8.5e-3, 0.0, &NitrogenSpecies::n14(), &opts).unwrap();
        assert!(spec.lines.iter().any(|l| !l.allowed));
        for l in spec.lines.iter().filter(|l| !l.allowed) {
            assert_eq!(l.relative_amplitude, 0.07);
        }
    }

    #[test]
    fn spectrum_samples_peak_at_group_frequencies() {
        // grid fine enough that a sample lands within hwhm/3 of each line
        let opts = DeerOptions { n_samples: 40_001, ..DeerOptions::default() };
        let spec = p1_deer_spectrum(8.5e-3, 0.0, &NitrogenSpecies::n14(), &opts).unwrap();
        let step = (opts.f_max_hz - opts.f_min_hz) / (opts.n_samples - 1) as f64;
        assert!(step < opts.hwhm_hz / 2.0);
        for g in &spec.groups {
            let k = ((g.frequency_hz - opts.f_min_hz) / step).round() as usize;
            let local = spec.samples[k].1;
            assert!(local > 0.85 * g.weight, "peak at {} too low: {local}", g.frequency_hz);
        }
    }
}
