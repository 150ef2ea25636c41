//! Relative-phase distribution of the squeezed pair, with a crude text plot.

use twinbeam::phase::{distribution_variance, phase_distribution, PhaseGrid, PLOT_M_MAX};
use twinbeam::squeeze::{tmsv_coefficients_to_order, SqueezeParams};

fn main() -> twinbeam::Result<()> {
    let grid = PhaseGrid::new(0.0, 64)?;
    for r in [0.5, 1.0, 1.5] {
        let coeffs = tmsv_coefficients_to_order(SqueezeParams::new(r, 0.0)?, PLOT_M_MAX)?;
        let dist = phase_distribution(&coeffs, grid);
        let var = distribution_variance(&dist)?;
        println!("r = {r}: variance {var:.5}, peak at {:.4}", grid.point(dist.argmax()));
        for (k, v) in dist.values().iter().enumerate().step_by(4) {
            println!("  {:>6.3} {}", grid.point(k), "#".repeat((v * 60.0).round() as usize));
        }
    }
    Ok(())
}
