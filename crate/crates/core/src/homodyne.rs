//! Four-mode Fock-description states of the homodyne setup and their exact
//! count-difference statistics.
//!
//! Modes are ordered signal `a`, idler `b`, and the two local oscillators
//! `c`, `d`. The detected observable is
//! `n_ef + n_gh = a†c e^{iθa} + c†a e^{−iθa} + b†d e^{iθb} + d†b e^{−iθb}`.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::fock::{apply_observable, FockState, LadderMonomial, Observable, Occupation};
use crate::squeeze::{
    truncated_coefficients, variance_fock_description, Budget, CoefficientVector, HomodyneSetup, SqueezeParams,
    Truncation,
};

pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_C: usize = 2;
pub const MODE_D: usize = 3;

/// Splitter windows extend this many `√L` around `L/2`.
pub const WINDOW_HALF_WIDTH_SCALE: f64 = 6.0;

/// Below `ANALYTIC_FLOOR · N` deviations are reported as absolute values.
pub const ANALYTIC_FLOOR: f64 = 1e-6;

fn binomial_half_ln_pmf(total: u32, k: u32) -> f64 {
    ln_binomial(total as u64, k as u64) - total as f64 * std::f64::consts::LN_2
}

/// `[⌈L/2 − 6√L⌉, ⌊L/2 + 6√L⌋] ∩ [lo, L − lo]`.
fn centered_window(total: u32, lo: u32) -> RangeInclusive<u32> {
    let l = total as f64;
    let half = WINDOW_HALF_WIDTH_SCALE * l.sqrt();
    let start = ((0.5 * l - half).ceil().max(0.0) as u32).max(lo);
    let end = ((0.5 * l + half).floor() as u32).min(total.saturating_sub(lo));
    start..=end
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitterModel {
    /// `|Q_ℓ|²` proportional to the binomial(L, 1/2) mass.
    Binomial,
    /// Equal weight on `⌊L/2⌋ ± half_width`.
    Uniform { half_width: u32 },
}

/// Amplitudes `Q_ℓ` for splitting `L` photons into `(ℓ, L − ℓ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitterAmplitudes {
    total: u32,
    start: u32,
    amps: Vec<f64>,
    model: SplitterModel,
}

impl SplitterAmplitudes {
    /// Real positive square roots of binomial masses, renormalized on `window`.
    pub fn balanced(total: u32, window: RangeInclusive<u32>) -> Result<Self> {
        Self::from_weights(total, window, SplitterModel::Binomial, |l| {
            (0.5 * binomial_half_ln_pmf(total, l)).exp()
        })
    }

    /// Flat amplitudes on `window`.
    pub fn uniform(total: u32, window: RangeInclusive<u32>) -> Result<Self> {
        let half_width = (window.end() - window.start()) / 2;
        Self::from_weights(total, window, SplitterModel::Uniform { half_width }, |_| 1.0)
    }

    /// Splitter for a photon budget, windowed so every ket keeps
    /// `m_max` photons available in each local oscillator.
    pub fn for_budget(model: SplitterModel, total: u32, m_max: usize) -> Result<Self> {
        let lo = u32::try_from(m_max).map_err(|_| Error::BudgetTooSmall {
            budget: total as i64,
            m_max,
        })?;
        if (total as u64) < 2 * m_max as u64 {
            return Err(Error::BudgetTooSmall {
                budget: total as i64,
                m_max,
            });
        }
        match model {
            SplitterModel::Binomial => Self::balanced(total, centered_window(total, lo)),
            SplitterModel::Uniform { half_width } => {
                let centre = total / 2;
                let start = centre.saturating_sub(half_width).max(lo);
                let end = (centre + half_width).min(total - lo);
                Self::uniform(total, start..=end)
            }
        }
    }

    fn from_weights(
        total: u32,
        window: RangeInclusive<u32>,
        model: SplitterModel,
        weight: impl Fn(u32) -> f64,
    ) -> Result<Self> {
        let (start, end) = (*window.start(), *window.end());
        if start > end || end > total {
            return Err(Error::InvalidParameter(format!(
                "splitter window {start}..={end} invalid for {total} photons"
            )));
        }
        let mut amps: Vec<f64> = (start..=end).map(weight).collect();
        let norm = amps.iter().map(|q| q * q).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        amps.iter_mut().for_each(|q| *q /= norm);
        Ok(SplitterAmplitudes {
            total,
            start,
            amps,
            model,
        })
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn model(&self) -> SplitterModel {
        self.model
    }

    pub fn window(&self) -> RangeInclusive<u32> {
        self.start..=self.start + self.amps.len() as u32 - 1
    }

    pub fn amplitude(&self, l: u32) -> f64 {
        l.checked_sub(self.start)
            .and_then(|i| self.amps.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.amps.iter().enumerate().map(move |(i, &q)| (self.start + i as u32, q))
    }
}

/// Two binomial stages: the second laser pulse takes `l` of `stock`
/// photons, then the local-oscillator splitter sends `p` of them to mode `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PulseSplitter {
    stock: u32,
}

impl PulseSplitter {
    pub fn new(stock: u32) -> Self {
        PulseSplitter { stock }
    }

    /// Stock of `2N` photons, centring the pulse stage on the budget.
    pub fn for_budget(n: u32) -> Self {
        PulseSplitter::new(2 * n)
    }

    pub fn stock(&self) -> u32 {
        self.stock
    }

    /// `B_{l,p}`, unnormalized.
    pub fn amplitude(&self, l: u32, p: u32) -> f64 {
        if l > self.stock || p > l {
            return 0.0;
        }
        (0.5 * (binomial_half_ln_pmf(self.stock, l) + binomial_half_ln_pmf(l, p))).exp()
    }

    /// Values of `p` kept for a second pulse of `l` photons.
    pub fn window(&self, l: u32) -> RangeInclusive<u32> {
        centered_window(l, 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseScheme {
    SinglePulse,
    TwoPulse { m_prime: u64, m_las: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Provenance {
    pub scheme: PulseScheme,
    pub budget: u32,
    pub params: SqueezeParams,
    pub m_max: usize,
}

/// Normalized state over modes `(a, b, c, d)` with `n_a = n_b` on every ket.
#[derive(Clone, Debug, PartialEq)]
pub struct FourModeState {
    state: FockState,
    provenance: Provenance,
}

impl FourModeState {
    pub fn state(&self) -> &FockState {
        &self.state
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn budget(&self) -> u32 {
        self.provenance.budget
    }
}

fn check_budget(n: i64, m_max: usize) -> Result<u32> {
    if n < 0 {
        return Err(Error::NegativeBudget(n));
    }
    if n < 2 * m_max as i64 || n > u32::MAX as i64 {
        return Err(Error::BudgetTooSmall { budget: n, m_max });
    }
    Ok(n as u32)
}

/// `Σ C_m Q_{N'} |m⟩_a |m⟩_b |N'−m⟩_c |N−N'−m⟩_d`, normalized.
pub fn build_four_mode_state(
    coeffs: &CoefficientVector,
    n: u32,
    splitter: &SplitterAmplitudes,
) -> Result<FourModeState> {
    let m_max = coeffs.m_max();
    let n = check_budget(n as i64, m_max)?;
    if splitter.total() != n {
        return Err(Error::InvalidParameter(format!(
            "splitter distributes {} photons, budget is {n}",
            splitter.total()
        )));
    }
    let window = splitter.window();
    if (*window.start() as usize) < m_max || (*window.end() as usize) > n as usize - m_max {
        return Err(Error::BudgetTooSmall {
            budget: n as i64,
            m_max,
        });
    }
    let mut entries = Vec::with_capacity(coeffs.as_slice().len() * splitter.amps.len());
    for (m, &c) in coeffs.as_slice().iter().enumerate() {
        let m = m as u32;
        for (np, q) in splitter.iter() {
            entries.push((Occupation::new(&[m, m, np - m, n - np - m]), c * q));
        }
    }
    Ok(FourModeState {
        state: FockState::new(4, entries)?,
        provenance: Provenance {
            scheme: PulseScheme::SinglePulse,
            budget: n,
            params: coeffs.params(),
            m_max,
        },
    })
}

/// Two-pulse state with budget `N = M' − M_las`:
/// `Σ C_m B_{N−2m,p} |m⟩_a |m⟩_b |p⟩_c |N−2m−p⟩_d`, normalized.
pub fn build_two_pulse_state(
    coeffs: &CoefficientVector,
    m_prime: u64,
    m_las: u64,
    splitter: &PulseSplitter,
) -> Result<FourModeState> {
    let m_max = coeffs.m_max();
    let n = check_budget(m_prime as i64 - m_las as i64, m_max)?;
    let mut entries = Vec::new();
    for (m, &c) in coeffs.as_slice().iter().enumerate() {
        let m = m as u32;
        let l = n - 2 * m;
        for p in splitter.window(l) {
            entries.push((Occupation::new(&[m, m, p, l - p]), c * splitter.amplitude(l, p)));
        }
    }
    Ok(FourModeState {
        state: FockState::new(4, entries)?,
        provenance: Provenance {
            scheme: PulseScheme::TwoPulse { m_prime, m_las },
            budget: n,
            params: coeffs.params(),
            m_max,
        },
    })
}

/// `n_ef + n_gh` in terms of the mode operators before the homodyne splitters.
pub fn count_difference_observable(setup: &HomodyneSetup) -> Observable {
    let hop = |from: usize, to: usize, theta: f64| {
        LadderMonomial::raise(to)
            .then(&LadderMonomial::lower(from))
            .scaled(Complex64::from_polar(1.0, theta))
    };
    Observable::new(vec![
        hop(MODE_C, MODE_A, setup.theta_a()),
        hop(MODE_A, MODE_C, -setup.theta_a()),
        hop(MODE_D, MODE_B, setup.theta_b()),
        hop(MODE_B, MODE_D, -setup.theta_b()),
    ])
}

/// `⟨O²⟩ − ⟨O⟩²` for Hermitian `O`, using `⟨O²⟩ = ‖Oψ‖²`.
fn hermitian_variance(state: &FockState, obs: &Observable) -> Result<f64> {
    let image = apply_observable(state, obs)?;
    let mean = state.inner(&image).re;
    Ok(image.norm_sqr() - mean * mean)
}

/// Exact variance of the count-difference sum on a four-mode state.
pub fn exact_count_variance(state: &FourModeState, setup: &HomodyneSetup) -> Result<f64> {
    hermitian_variance(&state.state, &count_difference_observable(setup))
}

/// `⟨n_ef + n_gh⟩` on a four-mode state.
pub fn mean_count_difference(state: &FourModeState, setup: &HomodyneSetup) -> Result<f64> {
    let obs = count_difference_observable(setup);
    let image = apply_observable(&state.state, &obs)?;
    Ok(state.state.inner(&image).re)
}

/// `Var(n_a − n_b)`; zero for every state built here.
pub fn twin_beam_variance(state: &FourModeState) -> Result<f64> {
    let obs = Observable::new(vec![
        LadderMonomial::number(MODE_A),
        LadderMonomial::number(MODE_B).scaled(Complex64::new(-1.0, 0.0)),
    ]);
    hermitian_variance(&state.state, &obs)
}

/// Relative deviation, or absolute once the analytic value is below
/// `ANALYTIC_FLOOR · N`.
pub fn deviation(exact: f64, analytic: f64, n: f64) -> f64 {
    if analytic.abs() < ANALYTIC_FLOOR * n {
        (exact - analytic).abs()
    } else {
        (exact / analytic - 1.0).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub n: u32,
    pub m_max: usize,
    pub exact: f64,
    pub analytic: f64,
    pub deviation: f64,
}

/// Exact single-pulse variance against the closed form for each budget.
/// Rows come back sorted by `N`; budgets are evaluated in parallel.
pub fn convergence_scan(
    params: SqueezeParams,
    truncation: Truncation,
    setup: &HomodyneSetup,
    ns: &[u32],
    model: SplitterModel,
) -> Result<Vec<ScanRow>> {
    let coeffs = truncated_coefficients(params, truncation)?;
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.par_iter()
        .map(|&n| {
            let splitter = SplitterAmplitudes::for_budget(model, n, coeffs.m_max())?;
            let state = build_four_mode_state(&coeffs, n, &splitter)?;
            let exact = exact_count_variance(&state, setup)?;
            let analytic = variance_fock_description(params, &setup.with_budget(Budget::Photons(n as f64)));
            Ok(ScanRow {
                n,
                m_max: coeffs.m_max(),
                exact,
                analytic,
                deviation: deviation(exact, analytic, n as f64),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseComparisonRow {
    pub n: u32,
    pub m_max: usize,
    pub single_pulse: f64,
    pub two_pulse: f64,
    pub relative_difference: f64,
    /// `5 · m_max / N`.
    pub bound: f64,
}

/// Single-pulse (binomial splitter) against two-pulse exact variances.
/// The two-pulse state uses `M' = N`, `M_las = 0` and a `2N` photon stock.
pub fn pulse_comparison(
    params: SqueezeParams,
    truncation: Truncation,
    setup: &HomodyneSetup,
    ns: &[u32],
) -> Result<Vec<PulseComparisonRow>> {
    let coeffs = truncated_coefficients(params, truncation)?;
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.par_iter()
        .map(|&n| {
            let m_max = coeffs.m_max();
            let splitter = SplitterAmplitudes::for_budget(SplitterModel::Binomial, n, m_max)?;
            let single = exact_count_variance(&build_four_mode_state(&coeffs, n, &splitter)?, setup)?;
            let two = build_two_pulse_state(&coeffs, n as u64, 0, &PulseSplitter::for_budget(n))?;
            let two = exact_count_variance(&two, setup)?;
            Ok(PulseComparisonRow {
                n,
                m_max,
                single_pulse: single,
                two_pulse: two,
                relative_difference: (two - single).abs() / single.abs(),
                bound: 5.0 * m_max as f64 / n as f64,
            })
        })
        .collect()
}
