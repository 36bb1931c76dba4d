//! State containers: two-mode Fock amplitudes and their irrep-block expansion.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::scalar::{czero, Cx, Real};

pub const DEFAULT_TOL_NORM: f64 = 1e-8;

/// Mass threshold above which truncation is reported as a warning.
pub const TAIL_WARNING: f64 = 1e-6;

/// Pure two-mode state in the truncated Fock basis `|n_a, n_b>`,
/// `0 <= n_a <= cutoff_a`, `0 <= n_b <= cutoff_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState<T> {
    amplitudes: Array2<Cx<T>>,
    truncated_mass: f64,
    boundary_mass: f64,
}

impl<T: Real> TwoModeState<T> {
    /// Validates the norm against `tol_norm`, floored at the rounding level
    /// of `T` for an array of this size. An all-zero array is accepted as
    /// the empty state.
    pub fn new(amplitudes: Array2<Cx<T>>, tol_norm: f64) -> Result<Self> {
        if amplitudes.nrows() == 0 || amplitudes.ncols() == 0 {
            return Err(Error::InvalidArgument("amplitude array must be non-empty".into()));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("amplitudes must be finite".into()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr().as_f64()).sum::<f64>();
        let floor = 8.0 * T::epsilon().as_f64() * (amplitudes.len() as f64).sqrt();
        let tol = tol_norm.max(floor);
        if norm != 0.0 && (norm - 1.0).abs() > tol {
            return Err(Error::Normalization { norm, tol });
        }
        let mut s = Self {
            amplitudes,
            truncated_mass: 0.0,
            boundary_mass: 0.0,
        };
        s.boundary_mass = s.compute_boundary_mass();
        Ok(s)
    }

    /// Rescales to unit norm, recording `truncated_mass` (probability that was
    /// lost beyond the cutoff before renormalization).
    pub(crate) fn from_unnormalized(mut amplitudes: Array2<Cx<T>>, truncated_mass: f64) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Domain("state has zero or non-finite norm".into()));
        }
        let scale = T::one() / norm.sqrt();
        amplitudes.mapv_inplace(|z| z * scale);
        let mut s = Self::new(amplitudes, DEFAULT_TOL_NORM)?;
        s.truncated_mass = truncated_mass;
        Ok(s)
    }

    /// Skips the norm check; finiteness and shape are still validated.
    pub(crate) fn unchecked(amplitudes: Array2<Cx<T>>, truncated_mass: f64) -> Result<Self> {
        if amplitudes.nrows() == 0 || amplitudes.ncols() == 0 {
            return Err(Error::InvalidArgument("amplitude array must be non-empty".into()));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("amplitudes must be finite".into()));
        }
        let mut s = Self { amplitudes, truncated_mass, boundary_mass: 0.0 };
        s.boundary_mass = s.compute_boundary_mass();
        Ok(s)
    }

    pub fn vacuum(cutoff: usize) -> Self {
        let mut a = Array2::from_elem((cutoff + 1, cutoff + 1), czero());
        a[[0, 0]] = Cx::new(T::one(), T::zero());
        Self::new(a, DEFAULT_TOL_NORM).expect("vacuum is normalized")
    }

    pub fn cutoff_a(&self) -> usize {
        self.amplitudes.nrows() - 1
    }

    pub fn cutoff_b(&self) -> usize {
        self.amplitudes.ncols() - 1
    }

    /// `c[[n_a, n_b]]`.
    pub fn amplitudes(&self) -> &Array2<Cx<T>> {
        &self.amplitudes
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> Cx<T> {
        self.amplitudes
            .get([n_a, n_b])
            .copied()
            .unwrap_or_else(czero)
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }

    /// Mass on the shells `n_a = cutoff_a` or `n_b = cutoff_b`.
    pub fn boundary_mass(&self) -> f64 {
        self.boundary_mass
    }

    /// Mass discarded by truncation before renormalization (analytic builders).
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub fn tail_warning(&self) -> bool {
        self.boundary_mass > TAIL_WARNING || self.truncated_mass > TAIL_WARNING
    }

    fn compute_boundary_mass(&self) -> f64 {
        let (na, nb) = (self.cutoff_a(), self.cutoff_b());
        let mut m = 0.0;
        for ((i, j), z) in self.amplitudes.indexed_iter() {
            if i == na || j == nb {
                m += z.norm_sqr().as_f64();
            }
        }
        m
    }

    pub fn metadata(&self) -> StateMetadata {
        StateMetadata {
            cutoff_a: self.cutoff_a(),
            cutoff_b: self.cutoff_b(),
            boundary_mass: self.boundary_mass,
            truncated_mass: self.truncated_mass,
            tail_warning: self.tail_warning(),
        }
    }
}

/// Truncation bookkeeping carried alongside derived data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateMetadata {
    pub cutoff_a: usize,
    pub cutoff_b: usize,
    pub boundary_mass: f64,
    pub truncated_mass: f64,
    pub tail_warning: bool,
}

/// Which of the two mirrored Fock sectors `n_a - n_b = +/-(2k - 1)` a block
/// came from. `k = 1/2` (the diagonal) is always `Upper`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// `n_a >= n_b`
    Upper,
    /// `n_b > n_a`
    Lower,
}

/// Amplitudes `psi[j] = Psi_{k, k+j}` of one copy of the irrep `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrepBlock<T> {
    k: HalfInteger,
    sector: Sector,
    psi: Vec<Cx<T>>,
}

impl<T: Real> IrrepBlock<T> {
    pub fn new(k: HalfInteger, sector: Sector, psi: Vec<Cx<T>>) -> Result<Self> {
        if k.twice() < 1 {
            return Err(Error::InvalidArgument(format!(
                "irrep label must be >= 1/2, got {k}"
            )));
        }
        if k == HalfInteger::HALF && sector == Sector::Lower {
            return Err(Error::InvalidArgument("k = 1/2 has no mirrored sector".into()));
        }
        Ok(Self { k, sector, psi })
    }

    pub fn k(&self) -> HalfInteger {
        self.k
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn mu_count(&self) -> usize {
        self.psi.len()
    }

    pub fn psi(&self) -> &[Cx<T>] {
        &self.psi
    }

    pub fn mu(&self, j: usize) -> HalfInteger {
        self.k + HalfInteger::from_int(j as i64)
    }

    pub fn norm_sqr(&self) -> T {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Fock labels `(n_a, n_b)` of entry `j`.
    pub fn fock_index(&self, j: usize) -> (usize, usize) {
        let d = (self.k.twice() - 1) as usize;
        match self.sector {
            Sector::Upper => (j + d, j),
            Sector::Lower => (j, j + d),
        }
    }
}

/// A state expanded over irrep blocks, sorted by `(k, sector)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedState<T> {
    blocks: Vec<IrrepBlock<T>>,
    metadata: StateMetadata,
}

impl<T: Real> DecomposedState<T> {
    /// Rejects unsorted input or repeated `(k, sector)` keys.
    pub fn new(blocks: Vec<IrrepBlock<T>>, metadata: StateMetadata) -> Result<Self> {
        for w in blocks.windows(2) {
            if (w[0].k, w[0].sector) >= (w[1].k, w[1].sector) {
                return Err(Error::InvalidArgument(
                    "blocks must be strictly increasing in (k, sector)".into(),
                ));
            }
        }
        Ok(Self { blocks, metadata })
    }

    pub fn empty() -> Self {
        Self {
            blocks: Vec::new(),
            metadata: StateMetadata::default(),
        }
    }

    pub fn blocks(&self) -> &[IrrepBlock<T>] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn norm_sqr(&self) -> T {
        self.blocks.iter().map(|b| b.norm_sqr()).sum()
    }

    pub fn metadata(&self) -> &StateMetadata {
        &self.metadata
    }

    pub fn block(&self, k: HalfInteger, sector: Sector) -> Option<&IrrepBlock<T>> {
        self.blocks
            .binary_search_by(|b| (b.k, b.sector).cmp(&(k, sector)))
            .ok()
            .map(|i| &self.blocks[i])
    }

    /// Keeps only blocks for which `keep(k)` holds.
    pub fn filter_blocks(&self, keep: impl Fn(HalfInteger) -> bool) -> Self {
        Self {
            blocks: self.blocks.iter().filter(|b| keep(b.k)).cloned().collect(),
            metadata: self.metadata,
        }
    }

    /// Applies `psi_{k mu} -> f(k, mu) psi_{k mu}` blockwise.
    pub fn map_amplitudes(&self, f: impl Fn(HalfInteger, HalfInteger) -> Cx<T>) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let psi = b
                    .psi
                    .iter()
                    .enumerate()
                    .map(|(j, z)| *z * f(b.k, b.mu(j)))
                    .collect();
                IrrepBlock { k: b.k, sector: b.sector, psi }
            })
            .collect();
        Self { blocks, metadata: self.metadata }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn rejects_unnormalized() {
        let mut a = Array2::from_elem((3, 3), czero::<f64>());
        a[[0, 0]] = cx(0.9, 0.0);
        assert!(matches!(
            TwoModeState::new(a.clone(), 1e-8),
            Err(Error::Normalization { .. })
        ));
        assert!(TwoModeState::new(a, 0.5).is_ok());
    }

    #[test]
    fn empty_state_is_allowed() {
        let a = Array2::from_elem((2, 2), czero::<f64>());
        let s = TwoModeState::new(a, 1e-8).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn boundary_mass_is_recorded() {
        let mut a = Array2::from_elem((3, 3), czero::<f64>());
        a[[0, 0]] = cx(0.8, 0.0);
        a[[2, 1]] = cx(0.6, 0.0);
        let s = TwoModeState::new(a, 1e-12).unwrap();
        assert!((s.boundary_mass() - 0.36).abs() < 1e-15);
        assert!(s.tail_warning());
    }

    #[test]
    fn block_ordering_enforced() {
        let b1 = IrrepBlock::<f64>::new(HalfInteger::ONE, Sector::Upper, vec![]).unwrap();
        let b0 = IrrepBlock::<f64>::new(HalfInteger::HALF, Sector::Upper, vec![]).unwrap();
        assert!(DecomposedState::new(vec![b1.clone(), b0.clone()], StateMetadata::default()).is_err());
        assert!(DecomposedState::new(vec![b0, b1], StateMetadata::default()).is_ok());
        assert!(IrrepBlock::<f64>::new(HalfInteger::HALF, Sector::Lower, vec![]).is_err());
        assert!(IrrepBlock::<f64>::new(HalfInteger::ZERO, Sector::Upper, vec![]).is_err());
    }

    #[test]
    fn fock_labels() {
        let b = IrrepBlock::<f64>::new(HalfInteger::from_twice(3), Sector::Lower, vec![]).unwrap();
        assert_eq!(b.fock_index(1), (1, 3));
        let b = IrrepBlock::<f64>::new(HalfInteger::from_twice(3), Sector::Upper, vec![]).unwrap();
        assert_eq!(b.fock_index(0), (2, 0));
    }
}
