//! Coherent and Fock descriptions of the local oscillator predict the same
//! count-difference variance once `N = 2β²`.

use std::f64::consts::PI;

use twinbeam::squeeze::{
    quadrature_variance_from_counts, variance_coherent_description, variance_fock_description, variance_series_sum,
    Budget, HomodyneSetup, SqueezeParams,
};

fn main() -> twinbeam::Result<()> {
    let params = SqueezeParams::new(0.8, 0.0)?;
    let beta = 10.0;
    println!("{:>8} {:>14} {:>14} {:>14} {:>10} squeezed", "angle", "coherent", "fock", "series", "quad var");
    for k in 0..8 {
        let angle = k as f64 * PI / 8.0;
        let coherent = HomodyneSetup::from_quadratures(angle, 0.0, Budget::LoAmplitude(beta))?;
        let fock = coherent.with_budget(Budget::Photons(2.0 * beta * beta));
        let v_coh = variance_coherent_description(params, &coherent);
        let v_fock = variance_fock_description(params, &fock);
        let v_series = variance_series_sum(params, &fock, 200);
        let q = quadrature_variance_from_counts(v_coh, beta)?;
        println!(
            "{angle:>8.4} {v_coh:>14.6} {v_fock:>14.6} {v_series:>14.6} {:>10.5} {}",
            q.value, q.squeezed
        );
    }
    Ok(())
}
