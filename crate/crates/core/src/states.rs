//! Example states in the two-mode Fock basis and the irrep decomposition
//! `k = (|n_a - n_b| + 1)/2`, `mu = (n_a + n_b + 1)/2`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::coords::DiskPoint;
use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::oracle::{displaced_vacuum, sector_chain, squeezed_vacuum, LEAK_LIMIT};
use crate::scalar::{cx, czero, Cx, Real};
use crate::state::{DecomposedState, IrrepBlock, Sector, StateMetadata, TwoModeState};

pub const DEFAULT_TMSV_CUTOFF: usize = 60;

/// Starting cutoff of the automatic search for the coherent-times-squeezed state.
pub const DEFAULT_COHERENT_SQUEEZED_CUTOFF: usize = 80;

/// Largest cutoff the automatic search will try.
pub const MAX_AUTO_CUTOFF: usize = 1 << 17;

pub fn default_su11_cutoff(k: HalfInteger) -> usize {
    60 + k.twice() as usize
}

/// How mirrored pairs `(n_a, n_b)`, `(n_b, n_a)` enter the block expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Folding {
    /// Both sectors kept as separate copies of the irrep: lossless, and the
    /// Wigner function of the expansion equals that of the Fock state.
    #[default]
    Separate,
    /// One block per `k` holding `(c_{ab} + c_{ba})/sqrt 2` off the diagonal.
    /// Exact for exchange-symmetric states; in general the block norm differs
    /// from the Fock norm by `2 Re sum c_ab^* c_ba`.
    Symmetric,
    /// Keeps `n_a >= n_b` and discards the mirrored mass.
    UpperOnly,
}

/// `sqrt(1 - |xi|^2) sum_n xi^n |n, n>` truncated at `cutoff` and
/// renormalized; the discarded mass `|xi|^{2(cutoff+1)}` is recorded.
pub fn build_tmsv<T: Real>(xi: Cx<T>, cutoff: usize) -> Result<TwoModeState<T>> {
    let r2 = xi.norm_sqr();
    if !(r2 < T::one()) {
        return Err(Error::OutsideDisk(r2.sqrt().as_f64()));
    }
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    let mut amps = Array2::from_elem((cutoff + 1, cutoff + 1), czero());
    let mut c = cx((T::one() - r2).sqrt(), T::zero());
    for n in 0..=cutoff {
        amps[[n, n]] = c;
        c *= xi;
    }
    let tail = r2.as_f64().powf(cutoff as f64 + 1.0);
    TwoModeState::from_unnormalized(amps, tail)
}

/// `|alpha>_a |zeta>_b`: each factor is `exp(...)|0>` computed on a
/// single-mode truncation. `zeta` is the squeeze parameter of
/// `exp((zeta b^dag^2 - zeta^* b^2)/2)`, so `|zeta|` is the squeeze strength
/// and may exceed 1.
///
/// With `cutoff = None` each mode's cutoff starts at
/// [`DEFAULT_COHERENT_SQUEEZED_CUTOFF`] and doubles until the two outermost levels
/// hold less than the leak limit.
pub fn build_coherent_squeezed<T: Real>(
    alpha: Cx<T>,
    zeta: Cx<T>,
    cutoff: Option<usize>,
) -> Result<TwoModeState<T>> {
    if !(alpha.re.is_finite() && alpha.im.is_finite() && zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(Error::InvalidArgument("parameters must be finite".into()));
    }
    let (ca, _) = single_mode(cutoff, |n| displaced_vacuum(alpha, n))?;
    let (cb, _) = single_mode(cutoff, |n| squeezed_vacuum(zeta, n))?;
    let mut amps = Array2::from_elem((ca.len(), cb.len()), czero());
    for (i, a) in ca.iter().enumerate() {
        if *a == czero() {
            continue;
        }
        for (j, b) in cb.iter().enumerate() {
            amps[[i, j]] = *a * *b;
        }
    }
    TwoModeState::from_unnormalized(amps, 0.0)
}

fn single_mode<T: Real>(
    cutoff: Option<usize>,
    build: impl Fn(usize) -> (Vec<Cx<T>>, f64),
) -> Result<(Vec<Cx<T>>, f64)> {
    if let Some(n) = cutoff {
        if n == 0 {
            return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
        }
        return Ok(build(n));
    }
    let mut n = DEFAULT_COHERENT_SQUEEZED_CUTOFF;
    loop {
        let (v, leak) = build(n);
        if leak < LEAK_LIMIT {
            return Ok((v, leak));
        }
        if n >= MAX_AUTO_CUTOFF {
            return Err(Error::TruncationLeak { leak, limit: LEAK_LIMIT, cutoff: n });
        }
        n *= 2;
    }
}

/// `S(zeta)|k, k>` with `zeta = artanh|xi| e^{i arg xi}`, computed on the
/// Fock sector `n_a - n_b = 2k - 1` starting from `|2k - 1, 0>`, then
/// decomposed.
pub fn build_su11_coherent<T: Real>(k: HalfInteger, xi: DiskPoint<T>, cutoff: usize) -> Result<DecomposedState<T>> {
    if k.twice() < 1 {
        return Err(Error::InvalidArgument(format!("k must be >= 1/2, got {k}")));
    }
    let d = (k.twice() - 1) as usize;
    if cutoff <= d {
        return Err(Error::InvalidArgument(format!("cutoff {cutoff} leaves no room above |{d}, 0>")));
    }
    let chain = sector_chain::<T>(cutoff, cutoff, d as i64)?;
    let zeta = xi.to_hyperboloid().squeeze_parameter().zeta();
    let mut v = vec![czero(); chain.len()];
    v[0] = cx(T::one(), T::zero());
    let out = chain.squeeze_action(zeta, &v);
    let mut amps = Array2::from_elem((cutoff + 1, cutoff + 1), czero());
    for (&(na, nb), z) in chain.fock().iter().zip(&out) {
        amps[[na, nb]] = *z;
    }
    let state = TwoModeState::from_unnormalized(amps, 0.0)?;
    decompose(&state, Folding::Separate)
}

/// Maps `c_{n_a n_b}` onto `Psi_{k mu}` blocks sorted by `(k, sector)`.
/// Trailing zero amplitudes of each block are dropped; blocks that are
/// entirely zero are omitted.
pub fn decompose<T: Real>(state: &TwoModeState<T>, folding: Folding) -> Result<DecomposedState<T>> {
    let amps = state.amplitudes();
    let (na, nb) = (state.cutoff_a(), state.cutoff_b());
    let mut blocks = Vec::new();
    let max_d = na.max(nb);
    let inv_sqrt2 = T::one() / T::two().sqrt();
    for d in 0..=max_d {
        let k = HalfInteger::from_twice(d as i64 + 1);
        let upper: Vec<Cx<T>> = (0..).map_while(|j| (j + d <= na && j <= nb).then(|| amps[[j + d, j]])).collect();
        let lower: Vec<Cx<T>> = if d == 0 {
            Vec::new()
        } else {
            (0..).map_while(|j| (j <= na && j + d <= nb).then(|| amps[[j, j + d]])).collect()
        };
        match folding {
            Folding::Separate => {
                push_block(&mut blocks, k, Sector::Upper, upper)?;
                push_block(&mut blocks, k, Sector::Lower, lower)?;
            }
            Folding::UpperOnly => push_block(&mut blocks, k, Sector::Upper, upper)?,
            Folding::Symmetric => {
                let len = upper.len().max(lower.len());
                let psi = (0..len)
                    .map(|j| {
                        let u = upper.get(j).copied().unwrap_or_else(czero);
                        if d == 0 {
                            return u;
                        }
                        let l = lower.get(j).copied().unwrap_or_else(czero);
                        (u + l) * inv_sqrt2
                    })
                    .collect();
                push_block(&mut blocks, k, Sector::Upper, psi)?;
            }
        }
    }
    DecomposedState::new(blocks, state.metadata())
}

fn push_block<T: Real>(out: &mut Vec<IrrepBlock<T>>, k: HalfInteger, sector: Sector, mut psi: Vec<Cx<T>>) -> Result<()> {
    while psi.last() == Some(&czero()) {
        psi.pop();
    }
    if !psi.is_empty() {
        out.push(IrrepBlock::new(k, sector, psi)?);
    }
    Ok(())
}

/// Inverse of [`decompose`] with [`Folding::Separate`]; cutoffs are the
/// smallest that hold every block, or those recorded in the metadata if larger.
pub fn recompose<T: Real>(state: &DecomposedState<T>) -> Result<TwoModeState<T>> {
    let meta = state.metadata();
    let (mut na, mut nb) = (meta.cutoff_a, meta.cutoff_b);
    for b in state.blocks() {
        if let Some(last) = b.mu_count().checked_sub(1) {
            let (a, c) = b.fock_index(last);
            na = na.max(a);
            nb = nb.max(c);
        }
    }
    let mut amps = Array2::from_elem((na + 1, nb + 1), czero());
    for b in state.blocks() {
        for (j, z) in b.psi().iter().enumerate() {
            let (a, c) = b.fock_index(j);
            amps[[a, c]] = *z;
        }
    }
    // filtered expansions are not normalized and are kept as they are
    TwoModeState::unchecked(amps, meta.truncated_mass)
}

/// Serializable state description.
///
/// ```json
/// {"variant": "tmsv", "params": {"xi": [0.485, 0.0]}, "cutoff": 60}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    #[serde(flatten)]
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

/// Complex numbers are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum StateKind {
    Tmsv {
        xi: [f64; 2],
    },
    CoherentTimesSqueezed {
        alpha: [f64; 2],
        xi: [f64; 2],
    },
    Su11Coherent {
        k: HalfInteger,
        xi: [f64; 2],
    },
    /// `amplitudes[n_a][n_b] = [re, im]`; an all-zero array is the empty state.
    RawAmplitudes {
        amplitudes: Vec<Vec<[f64; 2]>>,
    },
}

/// A built state in whichever form its constructor produces.
#[derive(Clone, Debug)]
pub enum BuiltState<T> {
    Fock(TwoModeState<T>),
    Decomposed(DecomposedState<T>),
}

impl<T: Real> BuiltState<T> {
    pub fn decomposed(&self, folding: Folding) -> Result<DecomposedState<T>> {
        match self {
            Self::Fock(s) => decompose(s, folding),
            Self::Decomposed(d) => Ok(d.clone()),
        }
    }

    pub fn fock(&self) -> Result<TwoModeState<T>> {
        match self {
            Self::Fock(s) => Ok(s.clone()),
            Self::Decomposed(d) => recompose(d),
        }
    }

    pub fn metadata(&self) -> StateMetadata {
        match self {
            Self::Fock(s) => s.metadata(),
            Self::Decomposed(d) => *d.metadata(),
        }
    }
}

fn pair<T: Real>(p: [f64; 2]) -> Cx<T> {
    cx(T::lit(p[0]), T::lit(p[1]))
}

impl StateSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |p: &[f64; 2]| p[0].is_finite() && p[1].is_finite();
        match &self.kind {
            StateKind::Tmsv { xi } | StateKind::Su11Coherent { xi, .. } => {
                if !finite(xi) {
                    return Err(Error::Schema("xi must be finite".into()));
                }
                let r = xi[0].hypot(xi[1]);
                if r >= 1.0 {
                    return Err(Error::OutsideDisk(r));
                }
            }
            StateKind::CoherentTimesSqueezed { alpha, xi } => {
                if !finite(alpha) || !finite(xi) {
                    return Err(Error::Schema("alpha and xi must be finite".into()));
                }
            }
            StateKind::RawAmplitudes { amplitudes } => {
                let cols = amplitudes.first().map_or(0, Vec::len);
                if cols == 0 || amplitudes.iter().any(|r| r.len() != cols) {
                    return Err(Error::Schema("amplitudes must be a non-empty rectangular array".into()));
                }
            }
        }
        if let StateKind::Su11Coherent { k, .. } = &self.kind {
            if k.twice() < 1 {
                return Err(Error::Schema(format!("k must be >= 1/2, got {k}")));
            }
        }
        if self.cutoff == Some(0) {
            return Err(Error::Schema("cutoff must be >= 1".into()));
        }
        Ok(())
    }

    pub fn build<T: Real>(&self) -> Result<BuiltState<T>> {
        self.validate()?;
        Ok(match &self.kind {
            StateKind::Tmsv { xi } => {
                BuiltState::Fock(build_tmsv(pair(*xi), self.cutoff.unwrap_or(DEFAULT_TMSV_CUTOFF))?)
            }
            StateKind::CoherentTimesSqueezed { alpha, xi } => {
                BuiltState::Fock(build_coherent_squeezed(pair(*alpha), pair(*xi), self.cutoff)?)
            }
            StateKind::Su11Coherent { k, xi } => {
                let p = DiskPoint::new(pair(*xi))?;
                let n = self.cutoff.unwrap_or_else(|| default_su11_cutoff(*k));
                BuiltState::Decomposed(build_su11_coherent(*k, p, n)?)
            }
            StateKind::RawAmplitudes { amplitudes } => {
                let (r, c) = (amplitudes.len(), amplitudes[0].len());
                let amps = Array2::from_shape_fn((r, c), |(i, j)| pair(amplitudes[i][j]));
                BuiltState::Fock(TwoModeState::new(amps, crate::state::DEFAULT_TOL_NORM)?)
            }
        })
    }
}
