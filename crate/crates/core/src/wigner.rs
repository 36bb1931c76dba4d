//! Closed-form SU(1,1) Wigner function of a block-decomposed state.
//!
//! For one irrep block the kernel `w = 2 S(zeta) e^{i pi K0} S(zeta)^dag`
//! has matrix elements
//!
//! ```text
//! <k mu| w |k mu'> = 2 e^{i chi (mu - mu')} d_{mu mu'}(2 tau) e^{i pi mu'}
//! ```
//!
//! With `u_j = Psi_{k+j} e^{-i chi j}` and `M_{jj'} = d_{jj'}(2 tau) (-1)^{j'}`,
//! which is real and symmetric, the block contributes `e^{i pi k} u^dag M u`.
//! Under [`PhaseConvention::PerIrrepNormalized`] the prefactor `e^{i pi k}`
//! is dropped and every block is real.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coords::{DiskPoint, HyperboloidPoint};
use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::scalar::{cis, cx, CompensatedSum, Cx, Real};
use crate::special::{ln_block_bound, sweep_offset_where, HalfAngle, LnGammaTable};
use crate::state::{DecomposedState, StateMetadata, TwoModeState};
use crate::states::{decompose, Folding};

/// Relative budget for dropping the small tail of each block.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// `(-1)^mu` read as `e^{i pi mu}`; complex in general.
    Literal,
    /// Each irrep contribution multiplied by `e^{-i pi k}`.
    #[default]
    PerIrrepNormalized,
}

impl PhaseConvention {
    pub fn name(self) -> &'static str {
        match self {
            Self::Literal => "literal",
            Self::PerIrrepNormalized => "per_irrep_normalized",
        }
    }
}

impl std::str::FromStr for PhaseConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Self::Literal),
            "per_irrep_normalized" | "normalized" => Ok(Self::PerIrrepNormalized),
            _ => Err(Error::InvalidArgument(format!("unknown phase convention '{s}'"))),
        }
    }
}

struct PreparedBlock<T> {
    phase: Cx<T>,
    psi: Vec<Cx<T>>,
    table: LnGammaTable<T>,
}

/// A decomposed state with the point-independent work done once:
/// tails trimmed and the log-gamma tables of every block filled.
pub struct WignerEvaluator<T> {
    blocks: Vec<PreparedBlock<T>>,
}

impl<T: Real> WignerEvaluator<T> {
    pub fn new(state: &DecomposedState<T>) -> Self {
        let mut tables: HashMap<(HalfInteger, usize), LnGammaTable<T>> = HashMap::new();
        let blocks = state
            .blocks()
            .iter()
            .filter_map(|b| {
                let psi = trim_tail(b.psi());
                if psi.is_empty() {
                    return None;
                }
                let table = tables
                    .entry((b.k(), psi.len()))
                    .or_insert_with(|| LnGammaTable::new(b.k(), psi.len()))
                    .clone();
                Some(PreparedBlock { phase: b.k().phase(), psi, table })
            })
            .collect();
        Self { blocks }
    }

    pub fn eval(&self, point: &HyperboloidPoint<T>, conv: PhaseConvention) -> Cx<T> {
        let args = HalfAngle::new(point.tau());
        let chi = point.chi();
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        let mut u = Vec::new();
        let cutoff = T::lit(TAIL_TOLERANCE.ln());
        for b in &self.blocks {
            // |u^dag M u| <= len |u|^2 max |M|
            let len = T::of(b.psi.len() as i64);
            if ln_block_bound(b.table.two_k, b.psi.len(), &args) + (T::two() * len).ln() < cutoff {
                continue;
            }
            u.clear();
            u.extend(b.psi.iter().enumerate().map(|(j, z)| *z * cis(-chi * T::of(j as i64))));
            let q = quadratic_form(&b.table, &args, &u);
            match conv {
                PhaseConvention::PerIrrepNormalized => re.add(q),
                PhaseConvention::Literal => {
                    re.add(b.phase.re * q);
                    im.add(b.phase.im * q);
                }
            }
        }
        cx(re.value(), im.value())
    }
}

/// Drops trailing entries whose combined effect on the block value is
/// below `TAIL_TOLERANCE` times the block norm. Since `|M| <= 1` in operator
/// norm, truncating `u = v + t` changes `u^dag M u` by at most
/// `2 |v| |t| + |t|^2` in magnitude (times the factor 2 of the kernel).
fn trim_tail<T: Real>(psi: &[Cx<T>]) -> Vec<Cx<T>> {
    let total: f64 = psi.iter().map(|z| z.norm_sqr().as_f64()).sum();
    if total == 0.0 {
        return Vec::new();
    }
    let budget = TAIL_TOLERANCE * total;
    let mut tail = 0.0;
    let mut len = psi.len();
    while len > 1 {
        let t = tail + psi[len - 1].norm_sqr().as_f64();
        let head = (total - t).max(0.0);
        if 2.0 * (2.0 * head.sqrt() * t.sqrt() + t) > budget {
            break;
        }
        tail = t;
        len -= 1;
    }
    psi[..len].to_vec()
}

/// `u^dag M u` times 2, with `M` real symmetric so only `Re(conj(u_j) u_j')`
/// enters.
fn quadratic_form<T: Real>(table: &LnGammaTable<T>, args: &HalfAngle<T>, u: &[Cx<T>]) -> T {
    let len = u.len();
    let mut acc = T::zero();
    for n in 0..len {
        let mut diag = T::zero();
        let need = |m: usize| u[m + n] != Cx::new(T::zero(), T::zero()) && u[m] != Cx::new(T::zero(), T::zero());
        sweep_offset_where(table, args, n, len - 1 - n, need, |m, v| {
            let m_val = if m % 2 == 0 { v } else { -v };
            let (a, b) = (u[m + n], u[m]);
            diag += m_val * (a.re * b.re + a.im * b.im);
        });
        acc += if n == 0 { diag } else { T::two() * diag };
    }
    T::two() * acc
}

/// `W(tau, chi)` of a block-decomposed state. The empty state gives 0.
pub fn wigner_point<T: Real>(state: &DecomposedState<T>, point: &HyperboloidPoint<T>, conv: PhaseConvention) -> Cx<T> {
    WignerEvaluator::new(state).eval(point, conv)
}

/// Decomposes with sectors kept separate, then evaluates.
pub fn wigner_of_two_mode<T: Real>(
    state: &TwoModeState<T>,
    point: &HyperboloidPoint<T>,
    conv: PhaseConvention,
) -> Result<Cx<T>> {
    Ok(wigner_point(&decompose(state, Folding::Separate)?, point, conv))
}

/// Evenly spaced samples `min ..= max`; a single sample sits at `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let a = Self { min, max, count };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::InvalidArgument(format!("bad axis range [{}, {}]", self.min, self.max)));
        }
        if self.count == 0 {
            return Err(Error::InvalidArgument("axis needs at least one sample".into()));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn step(&self) -> f64 {
        if self.count == 1 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coords", rename_all = "snake_case")]
pub enum GridSpec {
    /// `xi = x + i y`; samples with `|xi| >= 1` are left out.
    DiskCartesian { x: Axis, y: Axis },
    HyperboloidPolar { tau: Axis, chi: Axis },
}

/// One evaluated location; `(ix, iy)` index the two axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint<T> {
    pub ix: usize,
    pub iy: usize,
    pub xi: Cx<T>,
    pub point: HyperboloidPoint<T>,
}

impl GridSpec {
    /// Square disk grid over `[-extent, extent]^2`.
    pub fn disk(extent: f64, count: usize) -> Result<Self> {
        let a = Axis::new(-extent, extent, count)?;
        Ok(Self::DiskCartesian { x: a, y: a })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::DiskCartesian { x, y } => {
                x.validate()?;
                y.validate()
            }
            Self::HyperboloidPolar { tau, chi } => {
                tau.validate()?;
                chi.validate()?;
                if tau.min < 0.0 {
                    return Err(Error::InvalidArgument("tau axis must be >= 0".into()));
                }
                Ok(())
            }
        }
    }

    pub fn axes(&self) -> (Axis, Axis) {
        match *self {
            Self::DiskCartesian { x, y } => (x, y),
            Self::HyperboloidPolar { tau, chi } => (tau, chi),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::DiskCartesian { .. } => "disk_cartesian",
            Self::HyperboloidPolar { .. } => "hyperboloid_polar",
        }
    }

    /// Points in row-major order (`iy` outer, `ix` inner).
    pub fn points<T: Real>(&self) -> Result<Vec<GridPoint<T>>> {
        self.validate()?;
        let (ax, ay) = self.axes();
        let mut out = Vec::with_capacity(ax.count * ay.count);
        for iy in 0..ay.count {
            for ix in 0..ax.count {
                let (u, v) = (ax.value(ix), ay.value(iy));
                match self {
                    Self::DiskCartesian { .. } => {
                        if u.hypot(v) >= 1.0 {
                            continue;
                        }
                        let d = DiskPoint::from_parts(T::lit(u), T::lit(v))?;
                        out.push(GridPoint { ix, iy, xi: d.xi(), point: d.to_hyperboloid() });
                    }
                    Self::HyperboloidPolar { .. } => {
                        let p = HyperboloidPoint::new(T::lit(u), T::lit(v))?;
                        out.push(GridPoint { ix, iy, xi: p.to_disk().xi(), point: p });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct WignerField<T> {
    pub grid: GridSpec,
    pub points: Vec<GridPoint<T>>,
    pub values: Vec<Cx<T>>,
    pub convention: PhaseConvention,
    pub metadata: StateMetadata,
}

impl<T: Real> WignerField<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the largest `|W|`; the first one on ties.
    pub fn argmax_abs(&self) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (i, w) in self.values.iter().enumerate() {
            let a = w.norm();
            if best.map_or(true, |(_, b)| a > b) {
                best = Some((i, a));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Strict local maxima of `|W|` over the 8-neighbourhood, ignoring
    /// those below `floor` times the global maximum.
    pub fn local_maxima_abs(&self, floor: f64) -> Vec<usize> {
        let (ax, ay) = self.grid.axes();
        let mut index = vec![usize::MAX; ax.count * ay.count];
        for (i, p) in self.points.iter().enumerate() {
            index[p.iy * ax.count + p.ix] = i;
        }
        let abs: Vec<f64> = self.values.iter().map(|w| w.norm().as_f64()).collect();
        let top = abs.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            if abs[i] < floor * top {
                continue;
            }
            let mut is_max = true;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (x, y) = (p.ix as i64 + dx, p.iy as i64 + dy);
                    if x < 0 || y < 0 || x >= ax.count as i64 || y >= ay.count as i64 {
                        continue;
                    }
                    let j = index[y as usize * ax.count + x as usize];
                    if j != usize::MAX && abs[j] >= abs[i] {
                        is_max = false;
                    }
                }
            }
            if is_max {
                out.push(i);
            }
        }
        out
    }
}

/// Evaluates every grid point; the result does not depend on scheduling.
pub fn wigner_grid<T: Real>(state: &DecomposedState<T>, grid: &GridSpec, conv: PhaseConvention) -> Result<WignerField<T>> {
    let points = grid.points::<T>()?;
    let eval = WignerEvaluator::new(state);
    let values = points.par_iter().map(|p| eval.eval(&p.point, conv)).collect();
    Ok(WignerField { grid: *grid, points, values, convention: conv, metadata: *state.metadata() })
}

/// Evaluates a field at arbitrary points, e.g. Möbius preimages of a grid.
pub(crate) fn wigner_at<T: Real>(
    state: &DecomposedState<T>,
    points: &[HyperboloidPoint<T>],
    conv: PhaseConvention,
) -> Vec<Cx<T>> {
    let eval = WignerEvaluator::new(state);
    points.par_iter().map(|p| eval.eval(p, conv)).collect()
}
