//! Execute the single task block of a scenario and write its artifacts.

use std::path::Path;

use anyhow::{anyhow, Result};
use serde::Serialize;

use t2star_core::budget::{combine_budget, BudgetReport};
use t2star_core::drive::{fit_drive_model, total_t2_with_drive, DrivePoint};
use t2star_core::montecarlo::ensemble_t2;
use t2star_core::odr::{odr_fit_linear, ConcentrationPoint};
use t2star_core::constants::NvConstants;
use t2star_core::ramsey::{dc_fringe, fit_ramsey, fringe_period, ramsey_spectrum, synthesize_ramsey};
use t2star_core::sensitivity::{
    allan_deviation, drift_series, eta_n_sweep, optimal_tau, ramsey_sensitivity,
    white_noise_series, FomChannels, FomSpec, SensitivityParams,
};
use t2star_core::spin_models::{p1_deer_spectrum, DeerOptions, NitrogenSpecies};

use crate::output::{OutputWriter, StdoutFormat};
use crate::scenario::{AllanSeries, Scenario, SensitivityBlock};

fn emit<T: Serialize>(format: StdoutFormat, text: String, record: &T) {
    match format {
        StdoutFormat::Text => println!("{text}"),
        StdoutFormat::Records => {
            println!("{}", serde_json::to_string(record).unwrap_or_else(|_| "{}".into()))
        }
    }
}

pub fn run_scenario(
    scenario: &Scenario,
    scenario_text: &str,
    out_dir: &Path,
    format: StdoutFormat,
) -> Result<()> {
    let mut out = OutputWriter::new(out_dir)?;
    let seed = scenario.seed;

    if let Some(block) = &scenario.budget {
        run_budget(block, &mut out, format)?;
    } else if let Some(block) = &scenario.spectrum {
        run_spectrum(block, &mut out, format)?;
    } else if let Some(block) = &scenario.ramsey {
        run_ramsey(block, &scenario.constants.to_constants(), seed, &mut out, format)?;
    } else if let Some(block) = &scenario.drive {
        run_drive(block, &mut out, format)?;
    } else if let Some(block) = &scenario.montecarlo {
        run_montecarlo(block, seed, &mut out, format)?;
    } else if let Some(block) = &scenario.sensitivity {
        run_sensitivity(block, seed, &mut out, format)?;
    } else {
        return Err(anyhow!("scenario has no task block"));
    }

    out.finish(&scenario.name, scenario_text, seed)?;
    Ok(())
}

pub fn render_budget_text(report: &BudgetReport) -> String {
    let mut text = String::new();
    text.push_str(&format!(
        "{:<34} {:<16} {:>10} {:>10}  {}\n",
        "channel", "magnitude", "1/us", "us", "method"
    ));
    for c in &report.channels {
        text.push_str(&format!(
            "{:<34} {:<16} {:>10.4} {:>10.1} {}\n",
            c.label,
            c.magnitude,
            c.rate_per_s / 1e6,
            c.t2_s() * 1e6,
            c.method
        ));
    }
    text.push_str(&format!(
        "{:<34} {:<16} {:>10.4} {:>10.1}\n",
        "total SQ",
        "",
        report.total_sq_rate_per_s / 1e6,
        report.total_sq_t2_s * 1e6
    ));
    text.push_str(&format!(
        "{:<34} {:<16} {:>10.4} {:>10.1}\n",
        "total DQ x2 (no strain)",
        "",
        report.dq_sum_rate_per_s / 1e6,
        report.two_t2_dq_s * 1e6
    ));
    for note in &report.notes {
        text.push_str(&format!("note: {note}\n"));
    }
    text
}

fn run_budget(
    block: &crate::scenario::BudgetBlock,
    out: &mut OutputWriter,
    format: StdoutFormat,
) -> Result<()> {
    let report = combine_budget(&block.to_sample_spec())?;
    out.write_text("budget.txt", &render_budget_text(&report))?;
    out.write_json("budget.json", &report)?;
    emit(format, render_budget_text(&report), &report);
    Ok(())
}

fn run_spectrum(
    block: &crate::scenario::SpectrumBlock,
    out: &mut OutputWriter,
    format: StdoutFormat,
) -> Result<()> {
    let species = NitrogenSpecies::for_isotope(block.species);
    let opts = DeerOptions {
        hwhm_hz: block.hwhm_khz * 1e3,
        forbidden_amplitude: block.forbidden_amplitude,
        group_tol_hz: block.group_tol_khz * 1e3,
        f_min_hz: block.window_mhz[0] * 1e6,
        f_max_hz: block.window_mhz[1] * 1e6,
        n_samples: block.points,
    };
    let spectrum =
        p1_deer_spectrum(block.field_mt * 1e-3, block.misalignment_deg, &species, &opts)?;

    let rows: Vec<Vec<f64>> = spectrum.samples.iter().map(|&(f, a)| vec![f, a]).collect();
    out.write_table("spectrum.tsv", &["frequency_hz", "amplitude"], &rows)?;

    let mut lines_text = String::from("# frequency_hz\tweight\tlabel\tallowed\n");
    for l in &spectrum.lines {
        lines_text.push_str(&format!(
            "{:.9e}\t{}\t{}\t{}\n",
            l.frequency_hz, l.relative_amplitude, l.label, l.allowed
        ));
    }
    out.write_text("lines.tsv", &lines_text)?;
    out.write_json("lines.json", &spectrum.lines)?;
    out.write_json("groups.json", &spectrum.groups)?;

    let summary: Vec<String> = spectrum
        .groups
        .iter()
        .map(|g| format!("{:.3} MHz (weight {})", g.frequency_hz / 1e6, g.weight))
        .collect();
    emit(
        format,
        format!("{} allowed groups: {}", spectrum.groups.len(), summary.join(", ")),
        &spectrum.groups,
    );
    Ok(())
}

fn run_ramsey(
    block: &crate::scenario::RamseyBlock,
    constants: &NvConstants,
    seed: u64,
    out: &mut OutputWriter,
    format: StdoutFormat,
) -> Result<()> {
    let params = block.to_params();
    let times: Vec<f64> = (0..block.points)
        .map(|k| block.tau_max_us * 1e-6 * k as f64 / (block.points - 1) as f64)
        .collect();
    let signal = synthesize_ramsey(&params, &times, block.noise_sd, seed)?;
    let rows: Vec<Vec<f64>> = times.iter().zip(&signal).map(|(&t, &s)| vec![t, s]).collect();
    out.write_table("signal.tsv", &["time_s", "signal"], &rows)?;

    let (freqs, mags) = ramsey_spectrum(&times, &signal)?;
    let spec_rows: Vec<Vec<f64>> =
        freqs.iter().zip(&mags).map(|(&f, &m)| vec![f, m]).collect();
    out.write_table("spectrum.tsv", &["frequency_hz", "magnitude"], &spec_rows)?;

    if let Some(fringe) = &block.fringe {
        let bs: Vec<f64> = (0..fringe.points)
            .map(|k| fringe.b_max_mt * 1e-3 * k as f64 / (fringe.points - 1) as f64)
            .collect();
        let curve = dc_fringe(constants, fringe.contrast, block.dm, fringe.tau_us * 1e-6, &bs)?;
        let rows: Vec<Vec<f64>> = curve.iter().map(|&(b, s)| vec![b, s]).collect();
        out.write_table("fringe.tsv", &["b_t", "signal"], &rows)?;
        emit(
            format,
            format!(
                "fringe period = {:.4} uT at dm = {}, tau = {} us",
                fringe_period(constants, block.dm, fringe.tau_us * 1e-6) * 1e6,
                block.dm,
                fringe.tau_us
            ),
            &serde_json::json!({
                "fringe_period_t": fringe_period(constants, block.dm, fringe.tau_us * 1e-6)
            }),
        );
    }

    if block.fit {
        let fit = fit_ramsey(&times, &signal, params.lines.len(), None, None)?;
        out.write_json("fit.json", &fit)?;
        emit(
            format,
            format!(
                "fit: C0 = {:.4}, T2* = {:.4} us, p = {:.3}, f = [{}] MHz{}",
                fit.params.c0,
                fit.params.t2star_s * 1e6,
                fit.params.p,
                fit.params
                    .lines
                    .iter()
                    .map(|l| format!("{:.4}", l.frequency_hz / 1e6))
                    .collect::<Vec<_>>()
                    .join(", "),
                if fit.p_at_bound { " (p at bound)" } else { "" }
            ),
            &fit,
        );
    } else {
        emit(
            format,
            format!("synthesized {} samples to {}", times.len(), out.dir().display()),
            &serde_json::json!({"samples": times.len()}),
        );
    }
    Ok(())
}

fn run_drive(
    block: &crate::scenario::DriveBlock,
    out: &mut OutputWriter,
    format: StdoutFormat,
) -> Result<()> {
    let model = block.to_model();
    let n = block.curve_points.max(2);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let omega = block.omega_max_mhz * 1e6 * k as f64 / (n - 1) as f64;
            let t2 = total_t2_with_drive(&model, omega).expect("validated model");
            vec![omega, t2]
        })
        .collect();
    out.write_table("curve.tsv", &["omega_hz", "t2_s"], &rows)?;

    if !block.data.is_empty() {
        let points: Vec<DrivePoint> = block
            .data
            .iter()
            .map(|p| DrivePoint {
                omega_n_hz: p.omega_khz * 1e3,
                t2star_s: p.t2_us * 1e-6,
                sigma_s: p.sigma_us * 1e-6,
            })
            .collect();
        let fit = fit_drive_model(&points, block.dm)?;
        out.write_json("fit.json", &fit)?;
        emit(
            format,
            format!(
                "fit: gamma = 2pi x {:.3} kHz, delta = {:.2} kHz, t2_other = {:.2} us{}",
                fit.model.gamma_nvn / (2.0 * std::f64::consts::PI * 1e3),
                fit.model.delta_n_hz / 1e3,
                fit.model.t2_other_s * 1e6,
                if fit.delta_identifiable { "" } else { " (delta unidentifiable)" }
            ),
            &fit,
        );
    } else {
        emit(
            format,
            format!("model curve written to {}", out.dir().display()),
            &model,
        );
    }
    Ok(())
}

fn run_montecarlo(
    block: &crate::scenario::MonteCarloBlock,
    seed: u64,
    out: &mut OutputWriter,
    format: StdoutFormat,
) -> Result<()> {
    if !block.densities_ppm.is_empty() {
        let mut rows = Vec::new();
        let mut stats_list = Vec::new();
        for (k, &density) in block.densities_ppm.iter().enumerate() {
            // per-density substream of the scenario seed
            let stats = ensemble_t2(density, block.n_configs, seed.wrapping_add(k as u64))?;
            rows.push(vec![
                density,
                stats.t2_s * 1e6,
                1e6 / stats.q90_rad_per_s,
                1e6 / stats.q10_rad_per_s,
            ]);
            stats_list.push(stats);
        }
        out.write_table("sweep.tsv", &["density_ppm", "t2_us", "t2_q10_us", "t2_q90_us"], &rows)?;
        out.write_json("sweep.json", &stats_list)?;
        let text = rows
            .iter()
            .map(|r| format!("{:>7.2} ppm: T2 = {:.3} us [{:.3}, {:.3}]", r[0], r[1], r[2], r[3]))
            .collect::<Vec<_>>()
            .join("\n");
        emit(format, text, &stats_list);
    }

    if !block.odr_points.is_empty() {
        let points: Vec<ConcentrationPoint> = block
            .odr_points
            .iter()
            .map(|p| ConcentrationPoint {
                n_ppm: p.n_ppm,
                sigma_n_ppm: p.sigma_n_ppm,
                t2_s: p.t2_us * 1e-6,
                sigma_t2_s: p.sigma_t2_us * 1e-6,
            })
            .collect();
        let fit = odr_fit_linear(&points)?;
        out.write_json("odr.json", &fit)?;
        let khz = fit.slope / (2.0 * std::f64::consts::PI * 1e3);
        let khz_err = fit.slope_err / (2.0 * std::f64::consts::PI * 1e3);
        emit(
            format,
            format!("ODR: A_NV-N = 2pi x {khz:.2}({khz_err:.2}) kHz/ppm"),
            &fit,
        );
    }
    Ok(())
}

fn run_sensitivity(
    block: &SensitivityBlock,
    seed: u64,
    out: &mut OutputWriter,
    format: StdoutFormat,
) -> Result<()> {
    match block {
        SensitivityBlock::Eta { sigma, tau_us, dead_time_us, contrast, dm } => {
            let params =
                SensitivityParams::new(*sigma, tau_us * 1e-6, dead_time_us * 1e-6, *contrast, *dm);
            let eta = ramsey_sensitivity(&params)?;
            #[derive(Serialize)]
            struct EtaRecord {
                params: SensitivityParams,
                eta_t_per_sqrt_hz: f64,
            }
            let record = EtaRecord { params, eta_t_per_sqrt_hz: eta };
            out.write_json("eta.json", &record)?;
            emit(format, format!("eta = {:.3} nT/sqrt(Hz)", eta * 1e9), &record);
        }
        SensitivityBlock::OptimalTau { t2star_us, p, dead_time_us } => {
            let tau = optimal_tau(t2star_us * 1e-6, *p, dead_time_us * 1e-6)?;
            let record = serde_json::json!({
                "t2star_s": t2star_us * 1e-6,
                "p": p,
                "tau_d_s": dead_time_us * 1e-6,
                "tau_opt_s": tau,
            });
            out.write_json("optimal_tau.json", &record)?;
            emit(format, format!("tau_opt = {:.4} us", tau * 1e6), &record);
        }
        SensitivityBlock::EtaN { n_ppm_range, n_points, n_nv, drives_mhz, strain_t2_us, c13_t2_us } => {
            let mut settings = Vec::new();
            for &dm in &[1u8, 2u8] {
                for &omega in drives_mhz {
                    settings.push((dm, omega * 1e6));
                }
                if drives_mhz.is_empty() {
                    settings.push((dm, 0.0));
                }
            }
            let spec = FomSpec {
                n_ppm_min: n_ppm_range[0],
                n_ppm_max: n_ppm_range[1],
                n_points: *n_points,
                n_nv: *n_nv,
                channels: FomChannels {
                    strain_t2_s: strain_t2_us * 1e-6,
                    c13_t2_s: c13_t2_us * 1e-6,
                    ..FomChannels::default()
                },
                settings,
            };
            let sweep = eta_n_sweep(&spec)?;
            let mut header: Vec<String> = vec!["n_ppm".into()];
            for c in &sweep.curves {
                header.push(format!("eta_dm{}_omega{:.0}hz", c.dm, c.omega_hz));
            }
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let rows: Vec<Vec<f64>> = (0..sweep.n_ppm.len())
                .map(|k| {
                    let mut row = vec![sweep.n_ppm[k]];
                    row.extend(sweep.curves.iter().map(|c| c.eta[k]));
                    row
                })
                .collect();
            out.write_table("eta_n.tsv", &header_refs, &rows)?;
            out.write_json("eta_n.json", &sweep)?;
            emit(
                format,
                format!("eta_N sweep: SQ knee at {:.2} ppm", sweep.crossover_ppm),
                &sweep,
            );
        }
        SensitivityBlock::Allan { series, n_samples, cadence_s, noise_sd, drift_per_s, taus_s } => {
            let data = match series {
                AllanSeries::White => white_noise_series(*n_samples, *noise_sd, seed)?,
                AllanSeries::Drift => drift_series(*n_samples, *cadence_s, *drift_per_s),
            };
            let result = allan_deviation(&data, *cadence_s, taus_s)?;
            let rows: Vec<Vec<f64>> =
                result.points.iter().map(|p| vec![p.tau_s, p.adev]).collect();
            out.write_table("allan.tsv", &["tau_s", "adev"], &rows)?;
            out.write_json("allan.json", &result)?;
            for tau in &result.dropped_tau_s {
                eprintln!("warning: tau = {tau} s is beyond the series span, dropped");
            }
            emit(
                format,
                format!("allan deviation over {} averaging times", result.points.len()),
                &result,
            );
        }
    }
    Ok(())
}
