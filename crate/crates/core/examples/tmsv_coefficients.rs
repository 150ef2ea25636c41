//! Prints the truncated two-mode squeezed vacuum expansion.
//!
//! cargo run --example tmsv_coefficients -- 1.0 0.0

use twinbeam::squeeze::{tmsv_coefficients, SqueezeParams, DEFAULT_EPSILON};

fn main() -> twinbeam::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let r = args.next().unwrap_or(1.0);
    let phi = args.next().unwrap_or(0.0);
    let coeffs = tmsv_coefficients(SqueezeParams::new(r, phi)?, DEFAULT_EPSILON)?;
    println!("r = {r}, phi = {phi}, m_max = {}", coeffs.m_max());
    println!("retained weight {:.15}", coeffs.norm_sqr());
    for (m, c) in coeffs.as_slice().iter().enumerate().take(8) {
        println!("C_{m:<3} = {:+.12} {:+.12}i   |C|^2 = {:.6e}", c.re, c.im, c.norm_sqr());
    }
    Ok(())
}
