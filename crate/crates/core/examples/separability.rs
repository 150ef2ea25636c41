//! After tracing out the oscillators the signal and idler are separable, while
//! the bare squeezed pair is entangled.

use twinbeam::entangle::{log_negativity, partial_trace_cd, tmsv_density};
use twinbeam::homodyne::{build_four_mode_state, SplitterAmplitudes, SplitterModel};
use twinbeam::squeeze::{tmsv_coefficients, tmsv_coefficients_to_order, SqueezeParams, DEFAULT_EPSILON};

fn main() -> twinbeam::Result<()> {
    for r in [0.0, 0.25, 0.5, 0.75] {
        let params = SqueezeParams::new(r, 0.0)?;
        let coeffs = tmsv_coefficients(params, DEFAULT_EPSILON)?;
        let n = 200;
        let splitter = SplitterAmplitudes::for_budget(SplitterModel::Binomial, n, coeffs.m_max())?;
        let reduced = partial_trace_cd(&build_four_mode_state(&coeffs, n, &splitter)?);
        let pure = tmsv_density(&tmsv_coefficients_to_order(params, 40)?);
        println!(
            "r={r:<5} reduced: E_N={:.3e} purity={:.4}   pure pair: E_N={:.6} (2r={:.2})",
            log_negativity(&reduced)?,
            reduced.purity(),
            log_negativity(&pure)?,
            2.0 * r
        );
    }
    Ok(())
}
