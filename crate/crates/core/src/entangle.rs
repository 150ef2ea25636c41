//! Signal/idler density matrices and partial-transpose log-negativity.
//!
//! Matrices are indexed by occupation pairs `(n_a, n_b)` flattened as
//! `n_a · dim + n_b`. Storage is sparse: the states here live on the
//! `n_a = n_b` diagonal, so almost every element of the full matrix is zero.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::homodyne::{FourModeState, MODE_A, MODE_B, MODE_C, MODE_D};
use crate::squeeze::CoefficientVector;

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-8;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Two-mode density matrix with `dim` levels per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl DensityMatrix {
    pub fn new<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), Complex64)>,
    {
        let size = dim * dim;
        let mut map = BTreeMap::new();
        for ((i, j), v) in entries {
            if i >= size || j >= size {
                return Err(Error::InvalidParameter(format!(
                    "matrix index ({i}, {j}) outside {size}x{size}"
                )));
            }
            if v != Complex64::new(0.0, 0.0) {
                *map.entry((i, j)).or_default() += v;
            }
        }
        Ok(DensityMatrix { dim, entries: map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * self.dim + n_b
    }

    /// Element `⟨n_a, n_b| ρ |n_a', n_b'⟩`.
    pub fn get(&self, row: (usize, usize), col: (usize, usize)) -> Complex64 {
        let (i, j) = (self.index(row.0, row.1), self.index(col.0, col.1));
        self.entries.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Complex64)> {
        self.entries.iter()
    }

    pub fn trace(&self) -> f64 {
        self.entries
            .iter()
            .filter(|((i, j), _)| i == j)
            .map(|(_, v)| v.re)
            .sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.entries.values().map(|v| v.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(i, j), v)| {
                let w = self.entries.get(&(j, i)).copied().unwrap_or_default();
                (v - w.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn partial_transpose_b(&self) -> DensityMatrix {
        let d = self.dim;
        let entries = self
            .entries
            .iter()
            .map(|(&(i, j), &v)| {
                let (a, b) = (i / d, i % d);
                let (a2, b2) = (j / d, j % d);
                ((a * d + b2, a2 * d + b), v)
            })
            .collect();
        DensityMatrix { dim: d, entries }
    }

    /// Eigenvalues of the Hermitian matrix restricted to its populated
    /// indices, computed block by block over connected components.
    /// Unpopulated indices carry eigenvalue zero and are omitted.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for block in self.blocks() {
            if block.len() == 1 {
                let i = block[0];
                out.push(self.entries.get(&(i, i)).map(|v| v.re).unwrap_or(0.0));
                continue;
            }
            let pos: BTreeMap<usize, usize> = block.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let mut m = DMatrix::<Complex64>::zeros(block.len(), block.len());
            for (&(i, j), &v) in &self.entries {
                if let (Some(&r), Some(&c)) = (pos.get(&i), pos.get(&j)) {
                    m[(r, c)] = v;
                }
            }
            out.extend(m.symmetric_eigenvalues().iter().copied());
        }
        out
    }

    /// Connected components of the populated index graph, each sorted,
    /// ordered by smallest index.
    fn blocks(&self) -> Vec<Vec<usize>> {
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        fn find(parent: &mut BTreeMap<usize, usize>, i: usize) -> usize {
            let p = *parent.entry(i).or_insert(i);
            if p == i {
                return i;
            }
            let root = find(parent, p);
            parent.insert(i, root);
            root
        }
        for &(i, j) in self.entries.keys() {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent.insert(hi, lo);
            }
        }
        let keys: Vec<usize> = parent.keys().copied().collect();
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in keys {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// Hermitian, unit trace, positive semidefinite within tolerances.
    pub fn validate(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(defect));
        }
        let tr = self.trace();
        if !(1.0 - TRACE_TOLERANCE..=1.0 + HERMITIAN_TOLERANCE).contains(&tr) {
            return Err(Error::InvalidParameter(format!("trace {tr} outside [1 - 1e-8, 1]")));
        }
        if let Some(&ev) = self.eigenvalues().iter().find(|&&e| e < EIGENVALUE_FLOOR) {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {ev:e}")));
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim * self.dim;
        let mut m = DMatrix::zeros(n, n);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }
}

/// `Σ |C_m|² |m, m⟩⟨m, m|`.
pub fn reduced_ab_from_coeffs(coeffs: &CoefficientVector) -> DensityMatrix {
    let dim = coeffs.m_max() + 1;
    let entries = coeffs.as_slice().iter().enumerate().map(|(m, c)| {
        let i = m * dim + m;
        ((i, i), Complex64::new(c.norm_sqr(), 0.0))
    });
    DensityMatrix::new(dim, entries).expect("indices within truncation")
}

/// Projector onto `Σ C_m |m, m⟩`.
pub fn tmsv_density(coeffs: &CoefficientVector) -> DensityMatrix {
    let dim = coeffs.m_max() + 1;
    let c = coeffs.as_slice();
    let mut entries = Vec::with_capacity(c.len() * c.len());
    for (m, cm) in c.iter().enumerate() {
        for (k, ck) in c.iter().enumerate() {
            entries.push(((m * dim + m, k * dim + k), cm * ck.conj()));
        }
    }
    DensityMatrix::new(dim, entries).expect("indices within truncation")
}

/// Reduced state of modes `a, b` after tracing out both local oscillators.
pub fn partial_trace_cd(state: &FourModeState) -> DensityMatrix {
    let fock = state.state();
    let max_ab = fock
        .iter()
        .map(|(k, _)| k.get(MODE_A).max(k.get(MODE_B)) as usize)
        .max()
        .unwrap_or(0);
    let dim = (state.provenance().m_max + 1).max(max_ab + 1);
    let mut by_remainder: BTreeMap<(u32, u32), Vec<(usize, Complex64)>> = BTreeMap::new();
    for (k, &amp) in fock.iter() {
        let idx = k.get(MODE_A) as usize * dim + k.get(MODE_B) as usize;
        by_remainder
            .entry((k.get(MODE_C), k.get(MODE_D)))
            .or_default()
            .push((idx, amp));
    }
    let mut entries: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    for group in by_remainder.values() {
        for &(i, a) in group {
            for &(j, b) in group {
                *entries.entry((i, j)).or_default() += a * b.conj();
            }
        }
    }
    DensityMatrix::new(dim, entries).expect("indices within truncation")
}

/// `ln ‖ρ^{T_b}‖₁` for a unit-trace `ρ` (the trace is divided out).
pub fn log_negativity(rho: &DensityMatrix) -> Result<f64> {
    let defect = rho.hermiticity_defect();
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(defect));
    }
    let trace = rho.trace();
    if !(trace > 0.0) {
        return Err(Error::InvalidParameter(format!("trace must be positive, got {trace}")));
    }
    let trace_norm: f64 = rho.partial_transpose_b().eigenvalues().iter().map(|e| e.abs()).sum();
    // ‖ρ^{T_b}‖₁ ≥ Tr ρ; anything below is rounding.
    Ok((trace_norm / trace).ln().max(0.0))
}
