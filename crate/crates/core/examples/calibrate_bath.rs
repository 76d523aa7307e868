//! Recompute the bath second-moment calibration: the raw 1-ppm median
//! linewidth for the frozen seed and the scale that pins the ensemble T2*
//! to the measured 1/A_NV-N. Maintenance tool for when the sampling scheme
//! or the target spin count changes.

use t2star_core::constants::A_NV_N;
use t2star_core::montecarlo::{ensemble_t2, SECOND_MOMENT_SCALE};

fn main() {
    let n_configs = 200_000;
    let seed = 20240901;
    let stats = ensemble_t2(1.0, n_configs, seed).expect("ensemble");
    let raw_median = stats.median_rad_per_s / SECOND_MOMENT_SCALE;
    println!("configs            : {n_configs}");
    println!("seed               : {seed}");
    println!("spin count         : {}", stats.spin_count);
    println!("region radius      : {:.3e} m", stats.region_radius_m);
    println!("raw median         : {:.6e} rad/s", raw_median);
    println!("current scale      : {SECOND_MOMENT_SCALE}");
    println!("scale for A_NV-N   : {:.6}", A_NV_N / raw_median);
    println!("t2 at current scale: {:.4} us", stats.t2_s * 1e6);
}
