//! Log-ratio of the phase variance to its vacuum value, and a straight-line fit
//! over the large-squeezing points.

use twinbeam::phase::{decay_curve, fit_decay, PhaseGrid, PLOT_M_MAX};
use twinbeam::squeeze::Truncation;

fn main() -> twinbeam::Result<()> {
    let rs: Vec<f64> = (1..=25).map(|k| k as f64 / 10.0).collect();
    let points = decay_curve(&rs, PhaseGrid::new(0.0, 4096)?, Truncation::Order(PLOT_M_MAX))?;
    let fit = fit_decay(&points, 1.0)?;
    println!("slope {:.4}, intercept {:.4}, residual {:.3e}", fit.slope, fit.intercept, fit.residual_norm);
    for p in &points {
        println!("r={:.1} ln ratio={:+.4} fit={:+.4}", p.r, p.log_ratio, fit.predict(p.r));
    }
    Ok(())
}
