//! Two-mode squeezed vacuum coefficients and the closed-form homodyne
//! variances of the coherent-laser and Fock-laser descriptions.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Default tail tolerance for coefficient truncation.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Largest truncation order [`tmsv_coefficients`] will produce.
pub const TRUNCATION_CAP: u64 = 1_000_000;

/// Above this order magnitudes are evaluated as `exp(ln sech r + m ln tanh r)`.
const LOG_SPACE_ORDER: usize = 1000;

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if y >= TAU {
        0.0
    } else {
        y
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
    }
}

/// Squeeze magnitude `r ≥ 0` and phase `φ ∈ [0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParams {
    r: f64,
    phi: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        check_finite("r", r)?;
        check_finite("phi", phi)?;
        if r < 0.0 {
            return Err(Error::InvalidParameter(format!("r must be non-negative, got {r}")));
        }
        Ok(SqueezeParams {
            r,
            phi: reduce_angle(phi),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Ratio `|C_{m+1}| / |C_m| = tanh r`.
    pub fn ratio(&self) -> f64 {
        self.r.tanh()
    }
}

/// How many coefficients to keep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// Smallest order whose discarded probability is below the tolerance.
    Epsilon(f64),
    /// Fixed `m_max`.
    Order(usize),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Epsilon(DEFAULT_EPSILON)
    }
}

/// `C_m = sech r (−e^{iφ} tanh r)^m` for `m = 0..=m_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    params: SqueezeParams,
    coeffs: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn params(&self) -> SqueezeParams {
        self.params
    }

    pub fn m_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, m: usize) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Discarded probability `tanh^{2(m_max+1)} r`.
    pub fn tail_bound(&self) -> f64 {
        geometric_tail(self.params.ratio(), self.m_max())
    }
}

fn geometric_tail(t: f64, m_max: usize) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        (2.0 * (m_max as f64 + 1.0) * t.ln()).exp()
    }
}

/// Truncation order for a tail tolerance: the least `m` with
/// `tanh^{2(m+1)} r < epsilon`.
pub fn truncation_order(params: SqueezeParams, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let t = params.ratio();
    if t == 0.0 {
        return Ok(0);
    }
    if t >= 1.0 {
        return Err(Error::TruncationCap {
            needed: u64::MAX,
            cap: TRUNCATION_CAP,
        });
    }
    let x = epsilon.ln() / (2.0 * t.ln());
    if x >= TRUNCATION_CAP as f64 {
        return Err(Error::TruncationCap {
            needed: x.ceil() as u64,
            cap: TRUNCATION_CAP,
        });
    }
    let mut m = x.floor().max(0.0) as usize;
    while geometric_tail(t, m) >= epsilon {
        m += 1;
    }
    while m > 0 && geometric_tail(t, m - 1) < epsilon {
        m -= 1;
    }
    Ok(m)
}

/// Coefficients truncated where the geometric tail drops below `epsilon`.
pub fn tmsv_coefficients(params: SqueezeParams, epsilon: f64) -> Result<CoefficientVector> {
    let m_max = truncation_order(params, epsilon)?;
    tmsv_coefficients_to_order(params, m_max)
}

/// Coefficients `C_0..=C_{m_max}` for a fixed order.
pub fn tmsv_coefficients_to_order(params: SqueezeParams, m_max: usize) -> Result<CoefficientVector> {
    if m_max as u64 > TRUNCATION_CAP {
        return Err(Error::TruncationCap {
            needed: m_max as u64,
            cap: TRUNCATION_CAP,
        });
    }
    let t = params.ratio();
    let sech = 1.0 / params.r.cosh();
    let ln_sech = sech.ln();
    let ln_t = t.ln();
    let zeta = -Complex64::from_polar(1.0, params.phi);
    let coeffs = (0..=m_max)
        .map(|m| {
            let mag = if m == 0 {
                sech
            } else if m <= LOG_SPACE_ORDER {
                sech * t.powi(m as i32)
            } else {
                (ln_sech + m as f64 * ln_t).exp()
            };
            if mag == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let phase = zeta.powu(m as u32);
            phase.unscale(phase.norm()) * mag
        })
        .collect();
    Ok(CoefficientVector { params, coeffs })
}

pub fn truncated_coefficients(params: SqueezeParams, truncation: Truncation) -> Result<CoefficientVector> {
    match truncation {
        Truncation::Epsilon(eps) => tmsv_coefficients(params, eps),
        Truncation::Order(m) => tmsv_coefficients_to_order(params, m),
    }
}

/// Photon scale of the measurement: coherent local-oscillator amplitude `β`
/// or total Fock photon budget `N`. The two are identified via `N = 2β²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    LoAmplitude(f64),
    Photons(f64),
}

/// Homodyne angles and photon scale.
///
/// Quadrature angles relate to local-oscillator phases by
/// `θ_j = ϕ_j + π/2`; both are kept reduced to `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomodyneSetup {
    theta_a: f64,
    theta_b: f64,
    budget: Budget,
}

impl HomodyneSetup {
    pub fn from_quadratures(theta_a: f64, theta_b: f64, budget: Budget) -> Result<Self> {
        check_finite("theta_a", theta_a)?;
        check_finite("theta_b", theta_b)?;
        match budget {
            Budget::LoAmplitude(b) | Budget::Photons(b) => {
                check_finite("budget", b)?;
                if b < 0.0 {
                    return Err(Error::InvalidParameter(format!("budget must be non-negative, got {b}")));
                }
            }
        }
        Ok(HomodyneSetup {
            theta_a: reduce_angle(theta_a),
            theta_b: reduce_angle(theta_b),
            budget,
        })
    }

    pub fn from_lo_phases(varphi_a: f64, varphi_b: f64, budget: Budget) -> Result<Self> {
        HomodyneSetup::from_quadratures(varphi_a + FRAC_PI_2, varphi_b + FRAC_PI_2, budget)
    }

    pub fn theta_a(&self) -> f64 {
        self.theta_a
    }

    pub fn theta_b(&self) -> f64 {
        self.theta_b
    }

    pub fn varphi_a(&self) -> f64 {
        reduce_angle(self.theta_a - FRAC_PI_2)
    }

    pub fn varphi_b(&self) -> f64 {
        reduce_angle(self.theta_b - FRAC_PI_2)
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    /// `N`, or `2β²` for a coherent budget.
    pub fn photon_budget(&self) -> f64 {
        match self.budget {
            Budget::Photons(n) => n,
            Budget::LoAmplitude(b) => 2.0 * b * b,
        }
    }

    /// `β`, or `√(N/2)` for a Fock budget.
    pub fn lo_amplitude(&self) -> f64 {
        match self.budget {
            Budget::LoAmplitude(b) => b,
            Budget::Photons(n) => (0.5 * n).sqrt(),
        }
    }

    /// `θ_a + θ_b − φ`.
    pub fn phase_mismatch(&self, params: SqueezeParams) -> f64 {
        self.theta_a + self.theta_b - params.phi
    }

    /// Local oscillators must dominate the signal: `N ≥ 20·m_max`.
    pub fn check_strong_oscillator(&self, m_max: usize) -> Result<()> {
        let n = self.photon_budget();
        if n >= 20.0 * m_max as f64 {
            Ok(())
        } else {
            Err(Error::BudgetTooSmall {
                budget: n as i64,
                m_max,
            })
        }
    }
}

/// `cosh²r + sinh²r − 2 cosh r sinh r cos δ`, written as `cosh 2r − sinh 2r cos δ`.
pub fn squeeze_factor(params: SqueezeParams, mismatch: f64) -> f64 {
    let two_r = 2.0 * params.r;
    two_r.cosh() - two_r.sinh() * mismatch.cos()
}

/// Count-difference variance when the laser is a coherent state.
pub fn variance_coherent_description(params: SqueezeParams, setup: &HomodyneSetup) -> f64 {
    let beta = setup.lo_amplitude();
    2.0 * beta * beta * squeeze_factor(params, setup.phase_mismatch(params))
}

/// Count-difference variance when the laser is in a Fock state with budget `N`.
pub fn variance_fock_description(params: SqueezeParams, setup: &HomodyneSetup) -> f64 {
    setup.photon_budget() * squeeze_factor(params, setup.phase_mismatch(params))
}

/// Direct truncated sum
/// `N Σ_{m≤m_max} sech²r [t^{2m}(2m+1) − 2 t^{2m+1}(m+1) cos δ]`, `t = tanh r`.
pub fn variance_series_sum(params: SqueezeParams, setup: &HomodyneSetup, m_max: usize) -> f64 {
    let t = params.ratio();
    let sech2 = 1.0 / params.r.cosh().powi(2);
    let cos = setup.phase_mismatch(params).cos();
    let mut t2m = 1.0;
    let mut sum = 0.0;
    for m in 0..=m_max {
        let mf = m as f64;
        sum += t2m * (2.0 * mf + 1.0) - 2.0 * t2m * t * (mf + 1.0) * cos;
        t2m *= t * t;
        if t2m == 0.0 {
            break;
        }
    }
    setup.photon_budget() * sech2 * sum
}

/// Bound on `|series − closed form|`: `2N cosh 2r · t^{2m_max} (2m_max + 3)`.
pub fn series_tail_bound(params: SqueezeParams, n: f64, m_max: usize) -> f64 {
    let t = params.ratio();
    let m = m_max as f64;
    2.0 * n * (2.0 * params.r).cosh() * t.powf(2.0 * m) * (2.0 * m + 3.0)
}

/// Quadrature variance inferred from a count-difference variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureVariance {
    pub value: f64,
    /// Below the vacuum level of 1/4.
    pub squeezed: bool,
}

/// `[ΔX]² = [Δn]² / (8β²)`, flagged as squeezed when below 1/4.
pub fn quadrature_variance_from_counts(count_variance: f64, beta: f64) -> Result<QuadratureVariance> {
    if !(count_variance > 0.0) {
        return Err(Error::NonPositiveVariance(count_variance));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let value = count_variance / (8.0 * beta * beta);
    Ok(QuadratureVariance {
        value,
        squeezed: value < 0.25,
    })
}

/// Photon-number distribution of the laser: a phase-averaged coherent
/// state (Poissonian) or a single Fock state.
#[derive(Clone, Debug, PartialEq)]
pub struct LaserModel {
    weights: Vec<(u64, f64)>,
}

impl LaserModel {
    /// Poisson weights `α^{2n} e^{−α²} / n!` for `n ≤ α² + 10|α| + 20`.
    pub fn poisson(alpha: f64) -> Result<Self> {
        check_finite("alpha", alpha)?;
        let mean = alpha * alpha;
        if mean == 0.0 {
            return Ok(LaserModel { weights: vec![(0, 1.0)] });
        }
        let cutoff = (mean + 10.0 * alpha.abs() + 20.0).ceil() as u64;
        let ln_mean = mean.ln();
        let weights = (0..=cutoff)
            .map(|n| (n, (n as f64 * ln_mean - mean - ln_factorial(n)).exp()))
            .collect();
        Ok(LaserModel { weights })
    }

    /// A laser with exactly `n` photons.
    pub fn fock(n: u64) -> Self {
        LaserModel { weights: vec![(n, 1.0)] }
    }

    pub fn weights(&self) -> &[(u64, f64)] {
        &self.weights
    }

    pub fn cutoff(&self) -> u64 {
        self.weights.last().map(|w| w.0).unwrap_or(0)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.1).sum()
    }

    pub fn mean_photons(&self) -> f64 {
        self.weights.iter().map(|&(n, w)| n as f64 * w).sum()
    }
}

/// Laser-weighted average of the Fock-description variance over the photon
/// budget. Only the angles of `setup` are used.
pub fn mixture_average_variance(laser: &LaserModel, params: SqueezeParams, setup: &HomodyneSetup) -> f64 {
    let factor = squeeze_factor(params, setup.phase_mismatch(params));
    laser
        .weights
        .iter()
        .map(|&(n, w)| w * n as f64 * factor)
        .sum()
}
