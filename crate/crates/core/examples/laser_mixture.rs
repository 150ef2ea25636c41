//! Poisson mixture over laser photon numbers versus a fixed Fock budget.

use twinbeam::squeeze::{mixture_average_variance, Budget, HomodyneSetup, LaserModel, SqueezeParams};

fn main() -> twinbeam::Result<()> {
    let params = SqueezeParams::new(0.5, 0.0)?;
    let setup = HomodyneSetup::from_quadratures(0.0, 0.0, Budget::Photons(0.0))?;
    for alpha in [5.0f64, 20.0, 50.0] {
        let laser = LaserModel::poisson(alpha)?;
        let fock = LaserModel::fock(laser.mean_photons().round() as u64);
        println!(
            "alpha={alpha:<5} <N>={:<10.3} mixture={:<12.6} fock={:<12.6} weight={:.12}",
            laser.mean_photons(),
            mixture_average_variance(&laser, params, &setup),
            mixture_average_variance(&fock, params, &setup),
            laser.total_weight()
        );
    }
    Ok(())
}
