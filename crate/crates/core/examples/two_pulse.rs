//! Single-pulse and two-pulse oscillator schemes give the same statistics.

use twinbeam::homodyne::pulse_comparison;
use twinbeam::squeeze::{Budget, HomodyneSetup, SqueezeParams, Truncation};

fn main() -> twinbeam::Result<()> {
    let setup = HomodyneSetup::from_quadratures(0.0, 0.0, Budget::Photons(0.0))?;
    for r in [0.1, 0.3, 0.5] {
        let params = SqueezeParams::new(r, 0.0)?;
        for row in pulse_comparison(params, Truncation::default(), &setup, &[80, 160, 320])? {
            println!(
                "r={r} N={:<4} single={:<12.6} two-pulse={:<12.6} rel diff={:.3e} (bound {:.3})",
                row.n, row.single_pulse, row.two_pulse, row.relative_difference, row.bound
            );
        }
    }
    Ok(())
}
