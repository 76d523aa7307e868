//! Bundled reproduction targets: run the stored scenario, compare against
//! the published numbers at fixed tolerances, and print one line per check.

use std::path::Path;

use anyhow::{anyhow, Result};
use serde::Serialize;

use t2star_core::budget::combine_budget;
use t2star_core::drive::{fit_drive_model, total_t2_with_drive, DrivePoint};
use t2star_core::odr::{odr_fit_linear, ConcentrationPoint};
use t2star_core::sensitivity::{eta_n_sweep, FomChannels, FomSpec};

use crate::output::StdoutFormat;
use crate::scenario::parse_scenario;
use crate::tasks::run_scenario;

pub const TARGETS: [&str; 6] = ["table-s3", "table-s4", "table-s5", "fig-4a", "fig-4c", "fig-s9"];

pub fn bundled_scenario(target: &str) -> Option<&'static str> {
    match target {
        "table-s3" => Some(include_str!("../scenarios/table-s3.toml")),
        "table-s4" => Some(include_str!("../scenarios/table-s4.toml")),
        "table-s5" => Some(include_str!("../scenarios/table-s5.toml")),
        "fig-4a" => Some(include_str!("../scenarios/fig-4a.toml")),
        "fig-4c" => Some(include_str!("../scenarios/fig-4c.toml")),
        "fig-s9" => Some(include_str!("../scenarios/fig-s9.toml")),
        "bath-sweep" => Some(include_str!("../scenarios/bath-sweep.toml")),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    pub got: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl Check {
    fn window(label: impl Into<String>, got: f64, lo: f64, hi: f64) -> Check {
        Check { label: label.into(), got, lo, hi, passed: got.is_finite() && got >= lo && got <= hi }
    }

    /// Relative-tolerance check around a published value.
    fn near(label: impl Into<String>, got: f64, expected: f64, rel_tol: f64) -> Check {
        let half = expected.abs() * rel_tol;
        Check::window(label, got, expected - half, expected + half)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub target: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn print_report(report: &TargetReport) {
    for c in &report.checks {
        let mark = if c.passed { " ok " } else { "FAIL" };
        println!(
            "[{mark}] {}: {} = {:.5} (expected in [{:.5}, {:.5}])",
            report.target, c.label, c.got, c.lo, c.hi
        );
    }
}

const BUDGET_TOL: f64 = 0.05;

/// (channel label, published rate in 1/us) rows plus the two totals.
struct BudgetExpectation {
    rows: &'static [(&'static str, f64)],
    total_sq: f64,
    total_dq2: f64,
    note: Option<&'static str>,
}

fn budget_expectation(target: &str) -> Option<BudgetExpectation> {
    match target {
        "table-s3" => Some(BudgetExpectation {
            rows: &[
                ("strain", 0.190),
                ("N", 0.0029),
                ("13C", 0.01),
                ("magnetic field gradient @ 20 G", 0.00112),
            ],
            total_sq: 0.2035,
            total_dq2: 0.014,
            note: None,
        }),
        "table-s4" => Some(BudgetExpectation {
            rows: &[
                ("strain", 0.190),
                ("14N (allowed)", 0.056),
                ("14N (forbidden)", 0.0047),
                ("13C", 0.01),
                ("magnetic field gradient @ 85 G", 0.00474),
            ],
            total_sq: 0.265,
            total_dq2: 0.076,
            note: None,
        }),
        "table-s5" => Some(BudgetExpectation {
            rows: &[
                ("strain", 0.140),
                ("15N (allowed)", 0.59),
                ("15N (forbidden)", 0.15),
                ("14N (5% of 15N)", 0.0391),
                ("13C", 0.05),
                ("magnetic field gradient @ 100 G", 0.0022),
            ],
            total_sq: 1.01,
            total_dq2: 0.87,
            note: Some(
                "published total SQ (1.01 1/us) disagrees with its own rows (0.97 1/us); \
                 both stay inside the 5 % gate and the discrepancy is reported, not patched",
            ),
        }),
        _ => None,
    }
}

fn check_budget_target(target: &str, out_dir: &Path, format: StdoutFormat) -> Result<TargetReport> {
    let text = bundled_scenario(target).ok_or_else(|| anyhow!("no such target"))?;
    let (scenario, _) = parse_scenario(text).map_err(|e| anyhow!(e))?;
    run_scenario(&scenario, text, out_dir, format)?;

    let expectation = budget_expectation(target).unwrap();
    let report = combine_budget(&scenario.budget.as_ref().unwrap().to_sample_spec())?;
    let mut checks = Vec::new();
    for (label, expected) in expectation.rows {
        let got = report
            .channels
            .iter()
            .find(|c| c.label == *label)
            .map(|c| c.rate_per_s / 1e6)
            .unwrap_or(f64::NAN);
        checks.push(Check::near(format!("rate[{label}] (1/us)"), got, *expected, BUDGET_TOL));
    }
    checks.push(Check::near(
        "total SQ rate (1/us)",
        report.total_sq_rate_per_s / 1e6,
        expectation.total_sq,
        BUDGET_TOL,
    ));
    checks.push(Check::near(
        "total DQ x2 rate (1/us)",
        report.dq_sum_rate_per_s / 1e6,
        expectation.total_dq2,
        BUDGET_TOL,
    ));
    if let Some(note) = expectation.note {
        println!("note: {note}");
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(TargetReport { target: target.into(), checks, passed })
}

fn check_fig_4a(out_dir: &Path, format: StdoutFormat) -> Result<TargetReport> {
    let text = bundled_scenario("fig-4a").unwrap();
    let (scenario, _) = parse_scenario(text).map_err(|e| anyhow!(e))?;
    run_scenario(&scenario, text, out_dir, format)?;

    let block = scenario.drive.as_ref().unwrap();
    let model = block.to_model();
    let mut checks = Vec::new();

    let saturation = total_t2_with_drive(&model, 10e6)?;
    checks.push(Check::near("saturation T2 at 10 MHz drive (us)", saturation * 1e6, 27.0, 0.02));

    let mut worst = 0.0_f64;
    for p in &block.data {
        let t2 = total_t2_with_drive(&model, p.omega_khz * 1e3)?;
        worst = worst.max((t2 * 1e6 - p.t2_us).abs() / p.t2_us);
    }
    checks.push(Check::window("max |model - data| / data over sweep", worst, 0.0, 0.15));

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
    checks.push(Check::near(
        "fitted gamma/2pi (kHz)",
        fit.model.gamma_nvn / (2.0 * std::f64::consts::PI * 1e3),
        9.3,
        0.10,
    ));
    checks.push(Check::near("fitted delta (kHz)", fit.model.delta_n_hz / 1e3, 60.0, 0.15));

    let passed = checks.iter().all(|c| c.passed);
    Ok(TargetReport { target: "fig-4a".into(), checks, passed })
}

fn check_fig_4c(out_dir: &Path, format: StdoutFormat) -> Result<TargetReport> {
    let text = bundled_scenario("fig-4c").unwrap();
    let (scenario, _) = parse_scenario(text).map_err(|e| anyhow!(e))?;
    run_scenario(&scenario, text, out_dir, format)?;

    let block = scenario.montecarlo.as_ref().unwrap();
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
    let khz = fit.slope / (2.0 * std::f64::consts::PI * 1e3);
    let checks = vec![Check::window("A_NV-N / 2pi (kHz/ppm)", khz, 16.6 - 2.6, 16.6 + 2.6)];
    let passed = checks.iter().all(|c| c.passed);
    Ok(TargetReport { target: "fig-4c".into(), checks, passed })
}

fn check_fig_s9(out_dir: &Path, format: StdoutFormat) -> Result<TargetReport> {
    let text = bundled_scenario("fig-s9").unwrap();
    let (scenario, _) = parse_scenario(text).map_err(|e| anyhow!(e))?;
    run_scenario(&scenario, text, out_dir, format)?;

    let spec = FomSpec {
        n_ppm_min: 0.1,
        n_ppm_max: 100.0,
        n_points: 61,
        n_nv: 0.4,
        channels: FomChannels::default(),
        settings: vec![(1, 0.0), (2, 0.0), (2, 1e6), (2, 10e6)],
    };
    let sweep = eta_n_sweep(&spec)?;
    let mut checks = Vec::new();
    checks.push(Check::window("SQ crossover concentration (ppm)", sweep.crossover_ppm, 0.3, 3.0));
    let last = sweep.n_ppm.len() - 1;
    let ratio = sweep.curves[1].eta[last] / sweep.curves[0].eta[last];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    checks.push(Check::near("DQ/SQ eta ratio at 100 ppm", ratio, inv_sqrt2, 0.05));
    let ordered = (0..sweep.n_ppm.len()).all(|k| {
        sweep.curves[3].eta[k] <= sweep.curves[2].eta[k] + 1e-15
            && sweep.curves[2].eta[k] <= sweep.curves[1].eta[k] + 1e-15
            && sweep.curves[1].eta[k] <= sweep.curves[0].eta[k] + 1e-15
    });
    checks.push(Check::window(
        "ordering driven-DQ <= DQ <= SQ (1 = holds)",
        if ordered { 1.0 } else { 0.0 },
        1.0,
        1.0,
    ));
    let passed = checks.iter().all(|c| c.passed);
    Ok(TargetReport { target: "fig-s9".into(), checks, passed })
}

/// Run one reproduce target; returns its report after printing the per-check
/// lines and writing artifacts (plus report.json) under `out_dir/<target>`.
pub fn reproduce_target(
    target: &str,
    out_root: &Path,
    format: StdoutFormat,
) -> Result<TargetReport> {
    let out_dir = out_root.join(target);
    let report = match target {
        "table-s3" | "table-s4" | "table-s5" => check_budget_target(target, &out_dir, format)?,
        "fig-4a" => check_fig_4a(&out_dir, format)?,
        "fig-4c" => check_fig_4c(&out_dir, format)?,
        "fig-s9" => check_fig_s9(&out_dir, format)?,
        other => {
            return Err(anyhow!(
                "unknown reproduce target `{other}`; available: {} or `all`",
                TARGETS.join(", ")
            ))
        }
    };
    print_report(&report);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(out_dir.join("report.json"), text)?;
    Ok(report)
}
