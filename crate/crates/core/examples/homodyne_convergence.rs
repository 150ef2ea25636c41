//! Exact four-mode variance against the large-N limit as the photon budget grows.

use twinbeam::homodyne::{convergence_scan, SplitterModel};
use twinbeam::squeeze::{Budget, HomodyneSetup, SqueezeParams, Truncation};

fn main() -> twinbeam::Result<()> {
    let params = SqueezeParams::new(0.3, 0.0)?;
    let setup = HomodyneSetup::from_quadratures(0.0, 0.0, Budget::Photons(0.0))?;
    for model in [SplitterModel::Binomial, SplitterModel::Uniform { half_width: 12 }] {
        println!("{model:?}");
        let rows = convergence_scan(params, Truncation::default(), &setup, &[40, 80, 160, 320, 640], model)?;
        for row in rows {
            println!(
                "  N={:<4} m_max={:<3} exact={:<12.6} limit={:<12.6} deviation={:.3e}",
                row.n, row.m_max, row.exact, row.analytic, row.deviation
            );
        }
    }
    Ok(())
}
