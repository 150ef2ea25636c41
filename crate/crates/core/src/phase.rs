//! Distribution of the four-mode relative phase
//! `Φ = (ϑ_b − ϑ_d) − (ϑ_a − ϑ_c)`.
//!
//! For the pure four-mode state the distribution only depends on the pair
//! coefficients:
//!
//! ```text
//! P(Φ) = (1/2π) |Σ_m e^{−imΦ} C_m|²
//! ```
//!
//! which for squeezed-vacuum coefficients sums to
//! `sech²r / (2π (1 + tanh²r + 2 tanh r cos(Φ − φ)))`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::squeeze::{truncated_coefficients, CoefficientVector, SqueezeParams, Truncation};

pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const MIN_GRID_POINTS: usize = 16;

/// High truncation for plotting runs.
pub const PLOT_M_MAX: usize = 10_000;

/// Normalization defect beyond which a variance is refused.
pub const MAX_NORMALIZATION_DEFECT: f64 = 1e-4;

/// Uniform endpoint-exclusive grid over `[start, start + 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    start: f64,
    points: usize,
}

impl PhaseGrid {
    pub fn new(start: f64, points: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::InvalidParameter(format!("window start must be finite, got {start}")));
        }
        if points < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "phase grid needs at least {MIN_GRID_POINTS} points, got {points}"
            )));
        }
        Ok(PhaseGrid { start, points })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn step(&self) -> f64 {
        TAU / self.points as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |k| self.point(k))
    }
}

impl Default for PhaseGrid {
    fn default() -> Self {
        PhaseGrid {
            start: 0.0,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

/// Sampled `P(Φ)` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDistribution {
    grid: PhaseGrid,
    values: Vec<f64>,
    m_max: usize,
    params: SqueezeParams,
}

impl PhaseDistribution {
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn params(&self) -> SqueezeParams {
        self.params
    }

    /// Sampled value with periodic continuation outside the window.
    pub fn value_at_index(&self, k: isize) -> f64 {
        self.values[k.rem_euclid(self.values.len() as isize) as usize]
    }

    /// Untruncated closed form at `phi` for the same squeeze parameters.
    pub fn closed_form(&self, phi: f64) -> f64 {
        tmsv_phase_density(self.params, phi)
    }

    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
            .0
    }

    /// Trapezoid integral of `f(Φ) P(Φ)` over the closed window, with the
    /// endpoint value taken from periodicity of `P`.
    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.grid.step();
        let end = self.grid.start + TAU;
        let interior: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &p)| f(self.grid.point(k)) * p)
            .sum();
        let first = f(self.grid.start) * self.values[0];
        let last = f(end) * self.values[0];
        h * (interior - 0.5 * first + 0.5 * last)
    }

    pub fn normalization(&self) -> f64 {
        self.integrate(|_| 1.0)
    }
}

/// `sech²r / (2π (1 + tanh²r + 2 tanh r cos(Φ − φ)))`.
pub fn tmsv_phase_density(params: SqueezeParams, phi: f64) -> f64 {
    let t = params.ratio();
    let sech2 = 1.0 - t * t;
    sech2 / (TAU * (1.0 + t * t + 2.0 * t * (phi - params.phi()).cos()))
}

/// Evaluates the truncated Fourier sum on every grid point.
///
/// Coefficients are folded modulo the grid size and transformed with one
/// FFT, so the cost is `O(m_max + K log K)` rather than `O(m_max · K)`.
pub fn phase_distribution(coeffs: &CoefficientVector, grid: PhaseGrid) -> PhaseDistribution {
    let k = grid.points;
    let mut folded = vec![Complex64::new(0.0, 0.0); k];
    for (m, &c) in coeffs.as_slice().iter().enumerate() {
        let shift = if grid.start == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, -(m as f64 * grid.start).rem_euclid(TAU))
        };
        folded[m % k] += c * shift;
    }
    let fft = FftPlanner::new().plan_fft_forward(k);
    fft.process(&mut folded);
    let values = folded.iter().map(|z| z.norm_sqr() / TAU).collect();
    PhaseDistribution {
        grid,
        values,
        m_max: coeffs.m_max(),
        params: coeffs.params(),
    }
}

/// Linear variance over the window: `μ = ∫Φ P`, `σ² = ∫(Φ − μ)² P`.
pub fn distribution_variance(dist: &PhaseDistribution) -> Result<f64> {
    let defect = (dist.normalization() - 1.0).abs();
    if defect > MAX_NORMALIZATION_DEFECT {
        return Err(Error::NormalizationDefect(defect));
    }
    let mean = dist.integrate(|x| x);
    Ok(dist.integrate(|x| (x - mean) * (x - mean)))
}

/// `σ₀² = π²/3`, the variance for vacuum signal and idler.
pub fn vacuum_reference_variance() -> f64 {
    PI * PI / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub r: f64,
    /// `ln(σ²/σ₀²)`.
    pub log_ratio: f64,
}

/// `ln(σ²(r)/σ₀²)` for each `r` at `φ = 0`, in input order.
pub fn decay_curve(rs: &[f64], grid: PhaseGrid, truncation: Truncation) -> Result<Vec<DecayPoint>> {
    if let Some(&bad) = rs.iter().find(|&&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidParameter(format!("decay curve needs positive r, got {bad}")));
    }
    let reference = vacuum_reference_variance();
    rs.par_iter()
        .map(|&r| {
            let coeffs = truncated_coefficients(SqueezeParams::new(r, 0.0)?, truncation)?;
            let var = distribution_variance(&phase_distribution(&coeffs, grid))?;
            Ok(DecayPoint {
                r,
                log_ratio: (var / reference).ln(),
            })
        })
        .collect()
}

/// Least-squares line through `(r, ln ratio)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
    pub r_range: (f64, f64),
    pub points: usize,
}

impl FitResult {
    pub fn predict(&self, r: f64) -> f64 {
        self.slope * r + self.intercept
    }
}

/// Fits a line to the points with `r > r_min`.
pub fn fit_decay(points: &[DecayPoint], r_min: f64) -> Result<FitResult> {
    let used: Vec<&DecayPoint> = points.iter().filter(|p| p.r > r_min).collect();
    if used.len() < 3 {
        return Err(Error::TooFewFitPoints {
            r_min,
            found: used.len(),
        });
    }
    let n = used.len() as f64;
    let mean_r = used.iter().map(|p| p.r).sum::<f64>() / n;
    let mean_y = used.iter().map(|p| p.log_ratio).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.r - mean_r).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.r - mean_r) * (p.log_ratio - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit points share a single r value".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_r;
    let residual_norm = used
        .iter()
        .map(|p| (p.log_ratio - slope * p.r - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    let r_lo = used.iter().map(|p| p.r).fold(f64::INFINITY, f64::min);
    let r_hi = used.iter().map(|p| p.r).fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        slope,
        intercept,
        residual_norm,
        r_range: (r_lo, r_hi),
        points: used.len(),
    })
}
