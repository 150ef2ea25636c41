//! Sparse truncated multimode Fock space.
//!
//! States are maps from occupation tuples to complex amplitudes. Only the
//! kets a state actually populates are stored, which keeps the four-mode
//! homodyne states (a thin sliver of the full tensor space) small.
//!
//! Beamsplitter convention: symmetric 50:50 with `+i` on reflection,
//!
//! ```text
//! a_i^† -> (a_i^† + i a_j^†) / √2
//! a_j^† -> (i a_i^† + a_j^†) / √2
//! ```
//!
//! so a single photon entering mode `i` leaves as `(|1,0⟩ + i|0,1⟩)/√2`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{Error, Result};

/// Amplitudes with modulus below this are dropped after unitary application.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Allowed deviation of `Σ|amplitude|²` from one for a normalized state.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Photon counts of each mode of a basis ket.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(SmallVec<[u32; 4]>);

impl Occupation {
    pub fn new(counts: &[u32]) -> Self {
        Occupation(SmallVec::from_slice(counts))
    }

    pub fn vacuum(modes: usize) -> Self {
        Occupation(SmallVec::from_elem(0, modes))
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }

    fn set(&mut self, mode: usize, n: u32) {
        self.0[mode] = n;
    }
}

impl fmt::Debug for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

impl<const N: usize> From<[u32; N]> for Occupation {
    fn from(counts: [u32; N]) -> Self {
        Occupation::new(&counts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    Raise,
    Lower,
}

/// A product of creation and annihilation operators with a complex prefactor.
///
/// Factors are stored in written order: `[(0, Raise), (2, Lower)]` is
/// `a₀† a₂`, so the last factor acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderMonomial {
    prefactor: Complex64,
    factors: Vec<(usize, Ladder)>,
}

impl LadderMonomial {
    pub fn new(prefactor: Complex64, factors: Vec<(usize, Ladder)>) -> Self {
        LadderMonomial { prefactor, factors }
    }

    pub fn identity() -> Self {
        LadderMonomial::new(Complex64::new(1.0, 0.0), Vec::new())
    }

    pub fn raise(mode: usize) -> Self {
        LadderMonomial::new(Complex64::new(1.0, 0.0), vec![(mode, Ladder::Raise)])
    }

    pub fn lower(mode: usize) -> Self {
        LadderMonomial::new(Complex64::new(1.0, 0.0), vec![(mode, Ladder::Lower)])
    }

    /// `a† a` on `mode`.
    pub fn number(mode: usize) -> Self {
        LadderMonomial::raise(mode).then(&LadderMonomial::lower(mode))
    }

    /// Operator product `self · rhs`.
    pub fn then(&self, rhs: &LadderMonomial) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&rhs.factors);
        LadderMonomial::new(self.prefactor * rhs.prefactor, factors)
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        self.prefactor *= c;
        self
    }

    pub fn adjoint(&self) -> Self {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|&(m, l)| {
                let l = match l {
                    Ladder::Raise => Ladder::Lower,
                    Ladder::Lower => Ladder::Raise,
                };
                (m, l)
            })
            .collect();
        LadderMonomial::new(self.prefactor.conj(), factors)
    }

    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    pub fn factors(&self) -> &[(usize, Ladder)] {
        &self.factors
    }

    fn check_modes(&self, modes: usize) -> Result<()> {
        match self.factors.iter().find(|(m, _)| *m >= modes) {
            Some(&(index, _)) => Err(Error::ModeOutOfRange { index, modes }),
            None => Ok(()),
        }
    }

    /// Image of a basis ket without the prefactor: the target ket and its
    /// real matrix element, or `None` when the ket is annihilated.
    fn act(&self, ket: &Occupation, cutoffs: Option<&[u32]>) -> Option<(Occupation, f64)> {
        let mut out = ket.clone();
        // Accumulate the product of integers under a single square root so
        // that e.g. a†a returns exactly n.
        let mut radicand = 1.0f64;
        for &(mode, ladder) in self.factors.iter().rev() {
            let n = out.get(mode);
            match ladder {
                Ladder::Lower => {
                    if n == 0 {
                        return None;
                    }
                    radicand *= n as f64;
                    out.set(mode, n - 1);
                }
                Ladder::Raise => {
                    if let Some(c) = cutoffs {
                        if n >= c[mode] {
                            return None;
                        }
                    }
                    radicand *= (n + 1) as f64;
                    out.set(mode, n + 1);
                }
            }
        }
        Some((out, radicand.sqrt()))
    }
}

/// A sum of ladder monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Observable {
    terms: Vec<LadderMonomial>,
}

impl Observable {
    pub fn new(terms: Vec<LadderMonomial>) -> Self {
        Observable { terms }
    }

    pub fn terms(&self) -> &[LadderMonomial] {
        &self.terms
    }

    pub fn push(&mut self, term: LadderMonomial) {
        self.terms.push(term);
    }

    pub fn adjoint(&self) -> Self {
        Observable::new(self.terms.iter().map(LadderMonomial::adjoint).collect())
    }

    /// Operator product, expanded term by term.
    pub fn then(&self, rhs: &Observable) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for l in &self.terms {
            for r in &rhs.terms {
                terms.push(l.then(r));
            }
        }
        Observable::new(terms)
    }

    /// Formal Hermiticity: equal prefactor sums on each operator word after
    /// taking the adjoint. Does not apply commutation relations.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let collect = |obs: &Observable| {
            let mut words: BTreeMap<Vec<(usize, Ladder)>, Complex64> = BTreeMap::new();
            for t in &obs.terms {
                *words.entry(t.factors.clone()).or_default() += t.prefactor;
            }
            words
        };
        let this = collect(self);
        let adj = collect(&self.adjoint());
        let keys: std::collections::BTreeSet<_> = this.keys().chain(adj.keys()).collect();
        let hermitian = keys.into_iter().all(|k| {
            let a = this.get(k).copied().unwrap_or_default();
            let b = adj.get(k).copied().unwrap_or_default();
            (a - b).norm() <= tol
        });
        hermitian
    }

    fn check_modes(&self, modes: usize) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.check_modes(modes))
    }
}

impl From<LadderMonomial> for Observable {
    fn from(m: LadderMonomial) -> Self {
        Observable::new(vec![m])
    }
}

/// Sparse multimode pure state.
///
/// Constructors via [`FockState::new`] normalize; the operator applications
/// return unnormalized vectors, which [`FockState::normalized`] fixes up.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: usize,
    cutoffs: Option<SmallVec<[u32; 4]>>,
    amps: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    /// Normalized state from (ket, amplitude) pairs. Repeated kets add up.
    pub fn new<I>(modes: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        FockState::unnormalized(modes, entries)?.normalized()
    }

    /// Like [`FockState::new`] but keeps the amplitudes as given.
    pub fn unnormalized<I>(modes: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut amps: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (ket, amp) in entries {
            if ket.modes() != modes {
                return Err(Error::ModeCountMismatch {
                    expected: modes,
                    got: ket.modes(),
                });
            }
            *amps.entry(ket).or_default() += amp;
        }
        let mut s = FockState {
            modes,
            cutoffs: None,
            amps,
        };
        s.prune(PRUNE_THRESHOLD);
        Ok(s)
    }

    /// The basis ket `|counts⟩`.
    pub fn basis(counts: &[u32]) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(Occupation::new(counts), Complex64::new(1.0, 0.0));
        FockState {
            modes: counts.len(),
            cutoffs: None,
            amps,
        }
    }

    pub fn zero(modes: usize) -> Self {
        FockState {
            modes,
            cutoffs: None,
            amps: BTreeMap::new(),
        }
    }

    /// Declares per-mode maximum occupations. Raising past a cutoff
    /// annihilates the term.
    pub fn with_cutoffs(mut self, cutoffs: &[u32]) -> Result<Self> {
        if cutoffs.len() != self.modes {
            return Err(Error::ModeCountMismatch {
                expected: self.modes,
                got: cutoffs.len(),
            });
        }
        if let Some(ket) = self
            .amps
            .keys()
            .find(|k| k.as_slice().iter().zip(cutoffs).any(|(n, c)| n > c))
        {
            return Err(Error::InvalidParameter(format!(
                "ket {ket:?} exceeds cutoffs {cutoffs:?}"
            )));
        }
        self.cutoffs = Some(SmallVec::from_slice(cutoffs));
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoffs(&self) -> Option<&[u32]> {
        self.cutoffs.as_deref()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, ket: &Occupation) -> Complex64 {
        self.amps.get(ket).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        for a in self.amps.values_mut() {
            *a *= s;
        }
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &small.amps {
            if let Some(b) = large.amps.get(k) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        acc
    }

    pub fn prune(&mut self, threshold: f64) {
        self.amps.retain(|_, a| a.norm() >= threshold && a.norm() > 0.0);
    }

    fn empty_like(&self) -> Self {
        FockState {
            modes: self.modes,
            cutoffs: self.cutoffs.clone(),
            amps: BTreeMap::new(),
        }
    }
}

/// Applies one monomial; the result is not renormalized.
pub fn apply_ladder_monomial(state: &FockState, op: &LadderMonomial) -> Result<FockState> {
    apply_observable(state, &Observable::from(op.clone()))
}

/// Applies a sum of monomials; the result is not renormalized.
pub fn apply_observable(state: &FockState, obs: &Observable) -> Result<FockState> {
    obs.check_modes(state.modes)?;
    let mut out = state.empty_like();
    let cutoffs = state.cutoffs.as_deref();
    for term in &obs.terms {
        for (ket, amp) in &state.amps {
            if let Some((target, elem)) = term.act(ket, cutoffs) {
                *out.amps.entry(target).or_default() += term.prefactor * amp * elem;
            }
        }
    }
    out.amps.retain(|_, a| *a != Complex64::new(0.0, 0.0));
    Ok(out)
}

/// `⟨ψ|O|ψ⟩` on the sparse support of `state`.
pub fn expectation(state: &FockState, obs: &Observable) -> Result<Complex64> {
    let image = apply_observable(state, obs)?;
    Ok(state.inner(&image))
}

fn i_pow(p: u32) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Amplitudes `⟨k, n-k| U |n_i, n_j⟩` for `k = 0..=n` under the 50:50 mixer.
fn beamsplitter_row(n_i: u32, n_j: u32) -> Vec<Complex64> {
    let n = n_i + n_j;
    let (ni, nj) = (n_i as u64, n_j as u64);
    let base = -(n as f64) * 0.5 * std::f64::consts::LN_2 - 0.5 * (ln_factorial(ni) + ln_factorial(nj));
    (0..=n)
        .map(|k| {
            let k64 = k as u64;
            let norm_out = 0.5 * (ln_factorial(k64) + ln_factorial((n - k) as u64));
            let s_lo = k.saturating_sub(n_j);
            let s_hi = k.min(n_i);
            let mut acc = Complex64::new(0.0, 0.0);
            for s in s_lo..=s_hi {
                let t = k - s;
                let w = (base + norm_out + ln_binomial(ni, s as u64) + ln_binomial(nj, t as u64)).exp();
                acc += i_pow((n_i - s) + t) * w;
            }
            acc
        })
        .collect()
}

/// Mixes `mode_i` and `mode_j` on a symmetric 50:50 beamsplitter.
pub fn apply_beamsplitter(state: &FockState, mode_i: usize, mode_j: usize) -> Result<FockState> {
    for &m in &[mode_i, mode_j] {
        if m >= state.modes {
            return Err(Error::ModeOutOfRange {
                index: m,
                modes: state.modes,
            });
        }
    }
    if mode_i == mode_j {
        return Err(Error::IdenticalModes(mode_i));
    }
    let mut out = state.empty_like();
    let mut rows: BTreeMap<(u32, u32), Vec<Complex64>> = BTreeMap::new();
    for (ket, amp) in &state.amps {
        let (n_i, n_j) = (ket.get(mode_i), ket.get(mode_j));
        let row = rows
            .entry((n_i, n_j))
            .or_insert_with(|| beamsplitter_row(n_i, n_j));
        let n = n_i + n_j;
        for (k, u) in row.iter().enumerate() {
            let k = k as u32;
            let mut target = ket.clone();
            target.set(mode_i, k);
            target.set(mode_j, n - k);
            *out.amps.entry(target).or_default() += amp * u;
        }
    }
    out.prune(PRUNE_THRESHOLD);
    Ok(out)
}
