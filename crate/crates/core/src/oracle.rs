//! Brute-force truncated-Fock realization of the two-mode algebra.
//!
//! Everything here is built from the ladder matrices `a, a^dag, b, b^dag`
//! and serves as ground truth for the closed-form evaluators. The SU(1,1)
//! generators conserve `n_a - n_b`, so exponentials are computed sector by
//! sector: each sector is a chain `|j + d, j>` (or `|j, j - d>`) on which
//! `K_+` is a single subdiagonal.

use ndarray::{Array1, Array2};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coords::HyperboloidPoint;
use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::linalg::{adjoint, expm, expm_skew_action, identity, SparseMatrix};
use crate::scalar::{cis, cx, czero, CompensatedSum, Cx, Real};
use crate::special::ln_cosh;
use crate::state::TwoModeState;

/// Gate on the probability found in the two outermost Fock shells.
pub const LEAK_LIMIT: f64 = 1e-8;

/// Gate on the change of a ground-truth number under cutoff doubling.
pub const CONVERGENCE_LIMIT: f64 = 1e-8;

/// Two-mode ladder and SU(1,1) operators on `0 <= n_a <= N_a`, `0 <= n_b <= N_b`.
/// Basis index of `|n_a, n_b>` is `n_a (N_b + 1) + n_b`.
#[derive(Clone, Debug)]
pub struct OperatorSet<T> {
    cutoff_a: usize,
    cutoff_b: usize,
    a: SparseMatrix<T>,
    a_dag: SparseMatrix<T>,
    b: SparseMatrix<T>,
    b_dag: SparseMatrix<T>,
    k_plus: SparseMatrix<T>,
    k_minus: SparseMatrix<T>,
    k0: SparseMatrix<T>,
    number: SparseMatrix<T>,
}

/// Square truncation `N_a = N_b = cutoff`.
pub fn build_operators<T: Real>(cutoff: usize) -> Result<OperatorSet<T>> {
    OperatorSet::new(cutoff, cutoff)
}

impl<T: Real> OperatorSet<T> {
    pub fn new(cutoff_a: usize, cutoff_b: usize) -> Result<Self> {
        if cutoff_a < 1 || cutoff_b < 1 {
            return Err(Error::InvalidArgument(format!(
                "cutoffs must be >= 1, got ({cutoff_a}, {cutoff_b})"
            )));
        }
        let (da, db) = (cutoff_a + 1, cutoff_b + 1);
        let dim = da * db;
        let idx = |na: usize, nb: usize| na * db + nb;
        let sq = |n: usize| cx(T::of(n as i64).sqrt(), T::zero());

        let mut ea = Vec::new();
        let mut eb = Vec::new();
        for na in 0..da {
            for nb in 0..db {
                if na > 0 {
                    ea.push((idx(na - 1, nb), idx(na, nb), sq(na)));
                }
                if nb > 0 {
                    eb.push((idx(na, nb - 1), idx(na, nb), sq(nb)));
                }
            }
        }
        let a = SparseMatrix::from_triplets(dim, dim, ea);
        let b = SparseMatrix::from_triplets(dim, dim, eb);
        let a_dag = a.adjoint();
        let b_dag = b.adjoint();
        let k_plus = a_dag.matmul(&b_dag);
        let k_minus = a.matmul(&b);
        // diagonal in the Fock basis; built from the counts so that it is exact
        let number = SparseMatrix::diagonal(
            (0..dim)
                .map(|i| cx(T::of((i / db + i % db) as i64), T::zero()))
                .collect(),
        );
        let k0 = SparseMatrix::diagonal(
            (0..dim)
                .map(|i| cx((T::of((i / db + i % db) as i64) + T::one()) * T::half(), T::zero()))
                .collect(),
        );
        Ok(Self {
            cutoff_a,
            cutoff_b,
            a,
            a_dag,
            b,
            b_dag,
            k_plus,
            k_minus,
            k0,
            number,
        })
    }

    pub fn cutoff_a(&self) -> usize {
        self.cutoff_a
    }

    pub fn cutoff_b(&self) -> usize {
        self.cutoff_b
    }

    pub fn dim(&self) -> usize {
        (self.cutoff_a + 1) * (self.cutoff_b + 1)
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * (self.cutoff_b + 1) + n_b
    }

    pub fn fock(&self, index: usize) -> (usize, usize) {
        (index / (self.cutoff_b + 1), index % (self.cutoff_b + 1))
    }

    pub fn a(&self) -> &SparseMatrix<T> {
        &self.a
    }

    pub fn a_dag(&self) -> &SparseMatrix<T> {
        &self.a_dag
    }

    pub fn b(&self) -> &SparseMatrix<T> {
        &self.b
    }

    pub fn b_dag(&self) -> &SparseMatrix<T> {
        &self.b_dag
    }

    pub fn k_plus(&self) -> &SparseMatrix<T> {
        &self.k_plus
    }

    pub fn k_minus(&self) -> &SparseMatrix<T> {
        &self.k_minus
    }

    pub fn k0(&self) -> &SparseMatrix<T> {
        &self.k0
    }

    pub fn number(&self) -> &SparseMatrix<T> {
        &self.number
    }

    /// True when `|n_a, n_b>` lies in one of the two outermost shells.
    pub fn on_boundary(&self, n_a: usize, n_b: usize) -> bool {
        n_a + 1 >= self.cutoff_a || n_b + 1 >= self.cutoff_b
    }

    /// Sector `n_a - n_b = d` as a chain ordered by `min(n_a, n_b)`.
    pub fn chain(&self, d: i64) -> Result<Chain<T>> {
        if d > self.cutoff_a as i64 || -d > self.cutoff_b as i64 {
            return Err(Error::InvalidArgument(format!("sector {d} outside the truncation")));
        }
        let (oa, ob) = if d >= 0 { (d as usize, 0) } else { (0, (-d) as usize) };
        let len = (self.cutoff_a - oa).min(self.cutoff_b - ob) + 1;
        let fock: Vec<(usize, usize)> = (0..len).map(|j| (j + oa, j + ob)).collect();
        let up = (0..len - 1)
            .map(|j| {
                let (r, c) = (fock[j + 1], fock[j]);
                self.k_plus.get(self.index(r.0, r.1), self.index(c.0, c.1)).re
            })
            .collect();
        let boundary = fock.iter().map(|&(na, nb)| self.on_boundary(na, nb)).collect();
        Ok(Chain { d, fock, up, boundary })
    }

    /// All sectors `-N_b <= d <= N_a`.
    pub fn chains(&self) -> Vec<Chain<T>> {
        (-(self.cutoff_b as i64)..=self.cutoff_a as i64)
            .map(|d| self.chain(d).expect("sector in range"))
            .collect()
    }

    /// Largest entrywise residuals of `[K_-, K_+] - 2 K_0` and
    /// `[K_0, K_+] - K_+` over rows and columns below `interior` total quanta.
    pub fn commutator_residuals(&self, interior: usize) -> (f64, f64) {
        let kp = self.k_plus.to_dense();
        let km = self.k_minus.to_dense();
        let k0 = self.k0.to_dense();
        let c1 = km.dot(&kp) - kp.dot(&km) - k0.mapv(|z| z * T::two());
        let c2 = k0.dot(&kp) - kp.dot(&k0) - &kp;
        let inside = |i: usize| {
            let (na, nb) = self.fock(i);
            na + 1 < self.cutoff_a && nb + 1 < self.cutoff_b && na + nb < interior
        };
        let mut r = (0.0f64, 0.0f64);
        for ((i, j), z) in c1.indexed_iter() {
            if inside(i) && inside(j) {
                r.0 = r.0.max(z.norm().as_f64());
                r.1 = r.1.max(c2[[i, j]].norm().as_f64());
            }
        }
        r
    }

    /// `e^{i pi K_0}` on the diagonal, phases exact.
    pub fn parity_diagonal(&self) -> Vec<Cx<T>> {
        (0..self.dim())
            .map(|i| {
                let (na, nb) = self.fock(i);
                HalfInteger::from_twice((na + nb + 1) as i64).phase()
            })
            .collect()
    }
}

/// Sector `n_a - n_b = d` of the `N_a x N_b` truncation without assembling
/// the two-mode matrices: `<j+1| K_+ |j>` is the product of the single-mode
/// `a^dag` and `b^dag` elements, which is how `K_+ = a^dag b^dag` acts on it.
pub fn sector_chain<T: Real>(cutoff_a: usize, cutoff_b: usize, d: i64) -> Result<Chain<T>> {
    if cutoff_a < 1 || cutoff_b < 1 {
        return Err(Error::InvalidArgument("cutoffs must be >= 1".into()));
    }
    if d > cutoff_a as i64 || -d > cutoff_b as i64 {
        return Err(Error::InvalidArgument(format!("sector {d} outside the truncation")));
    }
    let a_dag = single_mode_ladder::<T>(cutoff_a).adjoint();
    let b_dag = single_mode_ladder::<T>(cutoff_b).adjoint();
    let (oa, ob) = if d >= 0 { (d as usize, 0) } else { (0, (-d) as usize) };
    let len = (cutoff_a - oa).min(cutoff_b - ob) + 1;
    let fock: Vec<(usize, usize)> = (0..len).map(|j| (j + oa, j + ob)).collect();
    let up = fock[..len - 1]
        .iter()
        .map(|&(na, nb)| (a_dag.get(na + 1, na) * b_dag.get(nb + 1, nb)).re)
        .collect();
    let boundary = fock
        .iter()
        .map(|&(na, nb)| na + 1 >= cutoff_a || nb + 1 >= cutoff_b)
        .collect();
    Ok(Chain { d, fock, up, boundary })
}

/// One `n_a - n_b = d` sector.
#[derive(Clone, Debug)]
pub struct Chain<T> {
    d: i64,
    fock: Vec<(usize, usize)>,
    up: Vec<T>,
    boundary: Vec<bool>,
}

impl<T: Real> Chain<T> {
    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.fock.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fock.is_empty()
    }

    pub fn fock(&self) -> &[(usize, usize)] {
        &self.fock
    }

    /// Irrep label `k = (|d| + 1)/2` of the sector.
    pub fn k(&self) -> HalfInteger {
        HalfInteger::from_twice(self.d.abs() + 1)
    }

    /// `<j+1| K_+ |j>`.
    pub fn up(&self) -> &[T] {
        &self.up
    }

    /// `exp(zeta K_+ - zeta^* K_-) v` on the chain.
    pub fn squeeze_action(&self, zeta: Cx<T>, v: &[Cx<T>]) -> Vec<Cx<T>> {
        tridiagonal_skew_action(&self.up, zeta, v)
    }

    /// Dense `zeta K_+ - zeta^* K_-` on the chain.
    pub fn generator(&self, zeta: Cx<T>) -> Array2<Cx<T>> {
        let n = self.len();
        let mut g = Array2::zeros((n, n));
        for (j, &u) in self.up.iter().enumerate() {
            g[[j + 1, j]] = zeta * u;
            g[[j, j + 1]] = -zeta.conj() * u;
        }
        g
    }

    /// Probability of `v` in the two outermost shells.
    pub fn boundary_mass(&self, v: &[Cx<T>]) -> f64 {
        v.iter()
            .zip(&self.boundary)
            .filter(|(_, &b)| b)
            .map(|(z, _)| z.norm_sqr().as_f64())
            .sum()
    }

    /// `e^{i pi K_0}` along the chain.
    pub fn parity(&self) -> Vec<Cx<T>> {
        self.fock
            .iter()
            .map(|&(na, nb)| HalfInteger::from_twice((na + nb + 1) as i64).phase())
            .collect()
    }
}

/// `exp(z U - z^* U^dag) v` where `U` has subdiagonal `up` (`U|j> = up[j] |j+1>`).
pub(crate) fn tridiagonal_skew_action<T: Real>(up: &[T], z: Cx<T>, v: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = v.len();
    debug_assert_eq!(up.len() + 1, n.max(1));
    if n <= 1 || z == czero() {
        return v.to_vec();
    }
    let mut rho = T::zero();
    for j in 0..n {
        let lo = if j > 0 { up[j - 1] } else { T::zero() };
        let hi = if j + 1 < n { up[j] } else { T::zero() };
        rho = rho.max(lo + hi);
    }
    rho = rho * z.norm();
    let zc = z.conj();
    let apply = |x: &[Cx<T>], y: &mut [Cx<T>]| {
        for j in 0..n {
            let mut acc = czero();
            if j > 0 {
                acc += z * (x[j - 1] * up[j - 1]);
            }
            if j + 1 < n {
                acc -= zc * (x[j + 1] * up[j]);
            }
            y[j] = acc;
        }
    };
    expm_skew_action(apply, rho, v)
}

/// Block-diagonal operator, one dense block per sector.
#[derive(Clone, Debug)]
pub struct BlockOperator<T> {
    cutoff_a: usize,
    cutoff_b: usize,
    blocks: Vec<(Chain<T>, Array2<Cx<T>>)>,
}

impl<T: Real> BlockOperator<T> {
    pub fn blocks(&self) -> &[(Chain<T>, Array2<Cx<T>>)] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        (self.cutoff_a + 1) * (self.cutoff_b + 1)
    }

    fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * (self.cutoff_b + 1) + n_b
    }

    /// Full matrix in the two-mode basis; intended for small cutoffs.
    pub fn to_dense(&self) -> Array2<Cx<T>> {
        let mut m = Array2::zeros((self.dim(), self.dim()));
        for (chain, block) in &self.blocks {
            let idx: Vec<usize> = chain.fock.iter().map(|&(a, b)| self.index(a, b)).collect();
            for (r, &ir) in idx.iter().enumerate() {
                for (c, &ic) in idx.iter().enumerate() {
                    m[[ir, ic]] = block[[r, c]];
                }
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            cutoff_a: self.cutoff_a,
            cutoff_b: self.cutoff_b,
            blocks: self.blocks.iter().map(|(c, b)| (c.clone(), adjoint(b))).collect(),
        }
    }

    /// Applies the operator to a state array shaped `(N_a + 1, N_b + 1)`.
    pub fn apply(&self, amps: &Array2<Cx<T>>) -> Array2<Cx<T>> {
        assert_eq!(amps.dim(), (self.cutoff_a + 1, self.cutoff_b + 1));
        let mut out = Array2::zeros(amps.raw_dim());
        for (chain, block) in &self.blocks {
            let v: Array1<Cx<T>> = chain.fock.iter().map(|&(a, b)| amps[[a, b]]).collect();
            if v.iter().all(|z| *z == czero()) {
                continue;
            }
            let w = block.dot(&v);
            for (&(a, b), z) in chain.fock.iter().zip(w.iter()) {
                out[[a, b]] = *z;
            }
        }
        out
    }
}

/// `S(zeta) = exp(zeta K_+ - zeta^* K_-)` by dense exponentiation of each
/// sector block. Fails the leak gate when `S(zeta)|0,0>` puts more than
/// [`LEAK_LIMIT`] into the two outermost shells.
pub fn squeeze_matrix<T: Real>(ops: &OperatorSet<T>, zeta: Cx<T>) -> Result<BlockOperator<T>> {
    let mut blocks = Vec::new();
    for chain in ops.chains() {
        let g = chain.generator(zeta);
        let s = if zeta == czero() { identity(chain.len()) } else { expm(&g)? };
        if chain.d == 0 {
            let col: Vec<Cx<T>> = s.column(0).to_vec();
            let leak = chain.boundary_mass(&col);
            if leak > LEAK_LIMIT {
                return Err(Error::TruncationLeak {
                    leak,
                    limit: LEAK_LIMIT,
                    cutoff: ops.cutoff_a.min(ops.cutoff_b),
                });
            }
        }
        blocks.push((chain, s));
    }
    Ok(BlockOperator {
        cutoff_a: ops.cutoff_a,
        cutoff_b: ops.cutoff_b,
        blocks,
    })
}

/// `w = 2 S(zeta) e^{i pi K_0} S^dag(zeta)` with `zeta = (tau/2) e^{i chi}`.
pub fn wigner_kernel_matrix<T: Real>(ops: &OperatorSet<T>, point: &HyperboloidPoint<T>) -> Result<BlockOperator<T>> {
    let zeta = point.squeeze_parameter().zeta();
    let s = squeeze_matrix(ops, zeta)?;
    let blocks = s
        .blocks
        .into_iter()
        .map(|(chain, m)| {
            let p = chain.parity();
            let mut left = m.clone();
            for (mut col, ph) in left.columns_mut().into_iter().zip(&p) {
                col.mapv_inplace(|z| z * *ph * T::two());
            }
            let k = left.dot(&adjoint(&m));
            (chain, k)
        })
        .collect();
    Ok(BlockOperator {
        cutoff_a: ops.cutoff_a,
        cutoff_b: ops.cutoff_b,
        blocks,
    })
}

/// `<k, mu| w |k, mu'>` in the Fock realization on the sector
/// `n_a - n_b = 2k - 1`, by exponential actions on a chain of the given
/// length. Returns the value and the leak measured on both columns.
pub fn boxed_kernel_element<T: Real>(
    k: HalfInteger,
    mu: HalfInteger,
    mu_prime: HalfInteger,
    point: &HyperboloidPoint<T>,
    chain_len: usize,
) -> Result<(Cx<T>, f64)> {
    check_weights(k, mu, mu_prime)?;
    let d = k.twice() - 1;
    let chain = sector_chain::<T>(d as usize + chain_len - 1, chain_len - 1, d)?;
    let (j, jp) = (((mu - k).twice() / 2) as usize, ((mu_prime - k).twice() / 2) as usize);
    if j.max(jp) >= chain.len() {
        return Err(Error::InvalidArgument("weight beyond the chain".into()));
    }
    let zeta = point.squeeze_parameter().zeta();
    let unit = |i: usize| {
        let mut v = vec![czero(); chain.len()];
        v[i] = cx(T::one(), T::zero());
        v
    };
    // S^dag = exp(-zeta K_+ + zeta^* K_-)
    let u = chain.squeeze_action(-zeta, &unit(j));
    let v = chain.squeeze_action(-zeta, &unit(jp));
    let leak = chain.boundary_mass(&u).max(chain.boundary_mass(&v));
    let parity = chain.parity();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for i in 0..chain.len() {
        let t = u[i].conj() * parity[i] * v[i] * T::two();
        re.add(t.re);
        im.add(t.im);
    }
    Ok((cx(re.value(), im.value()), leak))
}

/// `<k, k+j| w |k, k+j'>` for `0 <= j, j' < count` on a chain of the given
/// length, from `count` exponential actions. Returns the block and the
/// largest leak over its columns.
pub fn boxed_kernel_block<T: Real>(
    k: HalfInteger,
    count: usize,
    point: &HyperboloidPoint<T>,
    chain_len: usize,
) -> Result<(Array2<Cx<T>>, f64)> {
    check_weights(k, k, k)?;
    if count == 0 || count > chain_len {
        return Err(Error::InvalidArgument(format!("block of {count} does not fit a chain of {chain_len}")));
    }
    let d = k.twice() - 1;
    let chain = sector_chain::<T>(d as usize + chain_len - 1, chain_len - 1, d)?;
    let zeta = point.squeeze_parameter().zeta();
    let parity = chain.parity();
    let mut leak = 0.0f64;
    let cols: Vec<Vec<Cx<T>>> = (0..count)
        .map(|j| {
            let mut v = vec![czero(); chain.len()];
            v[j] = cx(T::one(), T::zero());
            let u = chain.squeeze_action(-zeta, &v);
            leak = leak.max(chain.boundary_mass(&u));
            u
        })
        .collect();
    let mut out = Array2::from_elem((count, count), czero());
    for j in 0..count {
        for jp in 0..count {
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            for i in 0..chain.len() {
                let t = cols[j][i].conj() * parity[i] * cols[jp][i] * T::two();
                re.add(t.re);
                im.add(t.im);
            }
            out[[j, jp]] = cx(re.value(), im.value());
        }
    }
    Ok((out, leak))
}

fn check_weights(k: HalfInteger, mu: HalfInteger, mu_prime: HalfInteger) -> Result<()> {
    if k.twice() < 1 {
        return Err(Error::Domain(format!("k must be >= 1/2, got {k}")));
    }
    for w in [mu, mu_prime] {
        if w < k || !(w - k).is_integer() {
            return Err(Error::Domain(format!("weight {w} must be k + nonnegative integer (k = {k})")));
        }
    }
    Ok(())
}

/// Coefficients of the normal-ordered kernel
/// `w = 2 e^{gamma_+ K_+} e^{i pi K_0} gamma_0^{K_0} e^{gamma_- K_-}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisentangledKernelParams<T> {
    pub gamma_plus: Cx<T>,
    pub gamma_minus: Cx<T>,
    pub gamma_zero: T,
}

impl<T: Real> DisentangledKernelParams<T> {
    /// `gamma_+- = e^{+-i chi} tanh tau`, `gamma_0 = 1/cosh^2 tau`.
    pub fn at(point: &HyperboloidPoint<T>) -> Self {
        let t = point.tau().tanh();
        let c = point.tau().cosh();
        Self {
            gamma_plus: cis(point.chi()) * t,
            gamma_minus: cis(-point.chi()) * t,
            gamma_zero: T::one() / (c * c),
        }
    }
}

/// `<k, mu| w |k, mu'>` from the normal-ordered kernel: the three
/// exponentials are expanded with the ladder actions
/// `K_+- |k, mu> = sqrt((mu +- k)(mu -+ k +- 1)) |k, mu +- 1>`, which makes
/// the element a finite sum over the intermediate weight `nu`.
pub fn disentangled_kernel_element<T: Real>(
    k: HalfInteger,
    mu: HalfInteger,
    mu_prime: HalfInteger,
    point: &HyperboloidPoint<T>,
) -> Result<Cx<T>> {
    check_weights(k, mu, mu_prime)?;
    let p = DisentangledKernelParams::at(point);
    let kk: T = k.to_real();
    let top = mu.min(mu_prime);
    let span = ((top - k).twice() / 2) as usize;
    let max_q = ((mu.max(mu_prime) - k).twice() / 2) as usize;

    // ln q! and ln <nu + q| K_+^q |nu> accumulated from single steps
    let mut ln_fact = vec![T::zero(); max_q + 1];
    for q in 1..=max_q {
        ln_fact[q] = ln_fact[q - 1] + T::of(q as i64).ln();
    }
    let ln_step = |nu: T| ((nu + kk) * (nu - kk + T::one())).ln() * T::half();
    let ln_ladder = |nu: T, q: usize| -> T {
        let mut s = T::zero();
        for i in 0..q {
            s += ln_step(nu + T::of(i as i64));
        }
        s
    };
    let ln_t = point.tau().tanh().ln();
    let ln_g0 = p.gamma_zero.ln();

    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for i in 0..=span {
        let nu_h = k + HalfInteger::from_int(i as i64);
        let nu: T = nu_h.to_real();
        let q = ((mu - nu_h).twice() / 2) as usize;
        let qp = ((mu_prime - nu_h).twice() / 2) as usize;
        if point.tau() == T::zero() && q + qp > 0 {
            continue;
        }
        let pow = |n: usize| if n == 0 { T::zero() } else { T::of(n as i64) * ln_t };
        let ln_mag = pow(q) - ln_fact[q] + ln_ladder(nu, q) + nu * ln_g0 + pow(qp) - ln_fact[qp]
            + ln_ladder(nu, qp);
        let phase = cis(point.chi() * T::of(q as i64 - qp as i64)) * nu_h.phase::<T>();
        let t = phase * ln_mag.exp() * T::two();
        re.add(t.re);
        im.add(t.im);
    }
    Ok(cx(re.value(), im.value()))
}

/// `d^{(k)}_{mu mu'}(tau)` from the disentangled kernel series, summed in
/// exact rational arithmetic. With `y = tanh^2(tau/2)` and
/// `A(nu) = (nu + k - 1)! (nu - k)!` the series is
///
/// ```text
/// d = sqrt(A(mu) A(mu')) (1 - y)^k y^{|mu - mu'|/2}
///     sum_nu (-1)^{mu' - nu} y^{min(mu,mu') - nu} (1 - y)^{nu - k} / (A(nu) (mu - nu)! (mu' - nu)!)
/// ```
///
/// The polynomial is evaluated exactly at the binary value of `y`, so the
/// alternating terms cancel without rounding; only the prefactor is formed
/// in floating point.
pub fn disentangled_dfunction_exact(k: HalfInteger, mu: HalfInteger, mu_prime: HalfInteger, tau: f64) -> Result<f64> {
    check_weights(k, mu, mu_prime)?;
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::InvalidArgument(format!("tau must be finite and >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(if mu == mu_prime { 1.0 } else { 0.0 });
    }
    let idx = |x: HalfInteger| ((x - k).twice() / 2) as u64;
    let (j, jp) = (idx(mu), idx(mu_prime));
    let two_k = k.twice() as u64;
    let fact = |n: u64| (1..=n).fold(BigInt::one(), |acc, i| acc * i);
    // A(k + i) with k + i + k - 1 = 2k - 1 + i
    let a = |i: u64| fact(two_k + i - 1) * fact(i);

    let half_tau = tau / 2.0;
    let y_f = half_tau.tanh().powi(2);
    let y = BigRational::from_float(y_f).expect("finite");
    let one_minus = BigRational::one() - &y;
    let span = j.min(jp);
    let mut p = BigRational::zero();
    for i in 0..=span {
        let den = a(i) * fact(j - i) * fact(jp - i);
        let mut term = BigRational::new(BigInt::one(), den);
        for _ in 0..span - i {
            term *= &y;
        }
        for _ in 0..i {
            term *= &one_minus;
        }
        if (jp - i) % 2 == 1 {
            p -= term;
        } else {
            p += term;
        }
    }
    if p.is_zero() {
        return Ok(0.0);
    }
    let ln_big = |n: &BigInt| {
        let bits = n.bits();
        let shift = bits.saturating_sub(64);
        (n >> shift).to_f64().expect("64-bit value").abs().ln() + shift as f64 * std::f64::consts::LN_2
    };
    let ln_p = ln_big(p.numer()) - ln_big(p.denom());
    let ln_pref = 0.5 * (ln_big(&a(j)) + ln_big(&a(jp))) - 2.0 * k.to_real::<f64>() * ln_cosh(half_tau)
        + j.abs_diff(jp) as f64 * half_tau.tanh().ln();
    let sign = if p.is_negative() { -1.0 } else { 1.0 };
    Ok(sign * (ln_p + ln_pref).exp())
}

/// Single-mode annihilation matrix on `0..=cutoff`.
pub fn single_mode_ladder<T: Real>(cutoff: usize) -> SparseMatrix<T> {
    let e = (1..=cutoff)
        .map(|n| (n - 1, n, cx(T::of(n as i64).sqrt(), T::zero())))
        .collect();
    SparseMatrix::from_triplets(cutoff + 1, cutoff + 1, e)
}

/// `exp(alpha a^dag - alpha^* a)|0>` on `0..=cutoff`, with its boundary mass.
pub fn displaced_vacuum<T: Real>(alpha: Cx<T>, cutoff: usize) -> (Vec<Cx<T>>, f64) {
    let a_dag = single_mode_ladder::<T>(cutoff).adjoint();
    let up: Vec<T> = (0..cutoff).map(|n| a_dag.get(n + 1, n).re).collect();
    let mut v = vec![czero(); cutoff + 1];
    v[0] = cx(T::one(), T::zero());
    let out = tridiagonal_skew_action(&up, alpha, &v);
    let leak = out[cutoff.saturating_sub(1)..].iter().map(|z| z.norm_sqr().as_f64()).sum();
    (out, leak)
}

/// `exp((zeta b^dag^2 - zeta^* b^2)/2)|0>` on `0..=cutoff`, with its boundary
/// mass. Only even levels couple to the vacuum, so the exponential acts on
/// the chain `|0>, |2>, |4>, ...` cut from `b^dag^2`.
pub fn squeezed_vacuum<T: Real>(zeta: Cx<T>, cutoff: usize) -> (Vec<Cx<T>>, f64) {
    let b_dag = single_mode_ladder::<T>(cutoff).adjoint();
    let b_dag2 = b_dag.matmul(&b_dag);
    let half = cutoff / 2;
    let up: Vec<T> = (0..half).map(|j| b_dag2.get(2 * j + 2, 2 * j).re).collect();
    let mut v = vec![czero(); half + 1];
    v[0] = cx(T::one(), T::zero());
    let even = tridiagonal_skew_action(&up, zeta * T::half(), &v);
    let mut out = vec![czero(); cutoff + 1];
    for (j, z) in even.into_iter().enumerate() {
        out[2 * j] = z;
    }
    let leak = out[cutoff.saturating_sub(1)..].iter().map(|z| z.norm_sqr().as_f64()).sum();
    (out, leak)
}

/// `<Psi| w(zeta) |Psi>` by exponential actions on every occupied sector, with
/// the state padded to `work_a x work_b`. Returns the value and the total
/// probability found on the two outermost shells after `S^dag`.
pub fn fock_wigner<T: Real>(
    state: &TwoModeState<T>,
    point: &HyperboloidPoint<T>,
    work_a: usize,
    work_b: usize,
) -> Result<(Cx<T>, f64)> {
    let (na, nb) = (state.cutoff_a(), state.cutoff_b());
    if work_a < na || work_b < nb {
        return Err(Error::InvalidArgument("work cutoffs below the state cutoffs".into()));
    }
    let zeta = point.squeeze_parameter().zeta();
    let amps = state.amplitudes();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut leak = 0.0;
    for d in -(nb as i64)..=na as i64 {
        let chain = sector_chain::<T>(work_a, work_b, d)?;
        let v: Vec<Cx<T>> = chain
            .fock()
            .iter()
            .map(|&(a, b)| if a <= na && b <= nb { amps[[a, b]] } else { czero() })
            .collect();
        if v.iter().all(|z| *z == czero()) {
            continue;
        }
        let u = chain.squeeze_action(-zeta, &v);
        leak += chain.boundary_mass(&u);
        for (z, ph) in u.iter().zip(chain.parity()) {
            let t = ph * z.norm_sqr() * T::two();
            re.add(t.re);
            im.add(t.im);
        }
    }
    Ok((cx(re.value(), im.value()), leak))
}

/// Result of evaluating an oracle quantity at a cutoff and at its double.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GateReport {
    pub cutoff: usize,
    pub doubled_cutoff: usize,
    pub leak: f64,
    pub convergence_residual: f64,
    pub passed: bool,
}

/// Evaluates `f(cutoff)` and `f(2 cutoff)`; the doubled value is returned
/// together with the leak and convergence gates.
pub fn converged<V>(
    cutoff: usize,
    f: impl Fn(usize) -> Result<(V, f64)>,
    distance: impl Fn(&V, &V) -> f64,
) -> Result<(V, GateReport)> {
    let (v1, leak1) = f(cutoff)?;
    let (v2, leak2) = f(2 * cutoff)?;
    let residual = distance(&v1, &v2);
    let leak = leak1.max(leak2);
    let report = GateReport {
        cutoff,
        doubled_cutoff: 2 * cutoff,
        leak,
        convergence_residual: residual,
        passed: leak < LEAK_LIMIT && residual < CONVERGENCE_LIMIT,
    };
    Ok((v2, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cx<f64>;

    fn h(twice: i64) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    fn max_abs(a: &Array2<C>) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vacuum_weight_and_number() {
        let ops = build_operators::<f64>(6).unwrap();
        let i0 = ops.index(0, 0);
        assert_eq!(ops.k0().get(i0, i0), cx(0.5, 0.0));
        for i in 0..ops.dim() {
            let (na, nb) = ops.fock(i);
            assert_eq!(ops.number().get(i, i), cx((na + nb) as f64, 0.0));
        }
        assert!(build_operators::<f64>(0).is_err());
    }

    #[test]
    fn number_matches_ladder_products() {
        let ops = build_operators::<f64>(7).unwrap();
        let n = ops.a_dag().matmul(ops.a()).add(&ops.b_dag().matmul(ops.b()));
        let diff = &n.to_dense() - &ops.number().to_dense();
        assert!(max_abs(&diff) < 1e-14);
    }

    #[test]
    fn sector_chain_matches_operator_set() {
        let ops = OperatorSet::<f64>::new(9, 6).unwrap();
        for d in -6..=9 {
            let a = ops.chain(d).unwrap();
            let b = sector_chain::<f64>(9, 6, d).unwrap();
            assert_eq!(a.fock(), b.fock());
            assert_eq!(a.up(), b.up());
            assert_eq!(a.boundary, b.boundary);
        }
    }

    #[test]
    fn products_are_exact() {
        let ops = build_operators::<f64>(5).unwrap();
        let kp = ops.a_dag().to_dense().dot(&ops.b_dag().to_dense());
        assert_eq!(ops.k_plus().to_dense(), kp);
        let km = ops.a().to_dense().dot(&ops.b().to_dense());
        assert_eq!(ops.k_minus().to_dense(), km);
    }

    #[test]
    fn commutators_in_interior() {
        let ops = build_operators::<f64>(10).unwrap();
        let (c1, c2) = ops.commutator_residuals(8);
        assert!(c1 < 1e-10 && c2 < 1e-10, "{c1} {c2}");
    }

    #[test]
    fn chain_couplings_match_ladder_rule() {
        let ops = build_operators::<f64>(12).unwrap();
        for d in [-3i64, 0, 4] {
            let chain = ops.chain(d).unwrap();
            let k = chain.k().to_f64();
            for (j, u) in chain.up().iter().enumerate() {
                let mu = k + j as f64;
                assert!((u - ((mu + k) * (mu - k + 1.0)).sqrt()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_squeeze_is_identity() {
        let ops = build_operators::<f64>(4).unwrap();
        let s = squeeze_matrix(&ops, cx(0.0, 0.0)).unwrap().to_dense();
        assert_eq!(s, identity(ops.dim()));
    }

    #[test]
    fn squeezed_vacuum_is_two_mode_squeezed() {
        let ops = build_operators::<f64>(40).unwrap();
        let zeta = cx(0.3, -0.2);
        let s = squeeze_matrix(&ops, zeta).unwrap();
        let out = s.apply(&TwoModeState::<f64>::vacuum(40).amplitudes().clone());
        let xi = cis(zeta.arg()) * zeta.norm().tanh();
        let c0 = (1.0 - xi.norm_sqr()).sqrt();
        for n in 0..30 {
            let want = xi.powi(n as i32) * c0;
            assert!((out[[n, n]] - want).norm() < 1e-8);
        }
        let u = s.to_dense();
        let eye = identity::<f64>(ops.dim());
        assert!(max_abs(&(&u.dot(&adjoint(&u)) - &eye)) < 1e-8);
    }

    #[test]
    fn leak_gate_trips() {
        let ops = build_operators::<f64>(8).unwrap();
        let e = squeeze_matrix(&ops, cx(2.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::TruncationLeak { .. }));
    }

    #[test]
    fn kernel_spectrum_is_preserved() {
        let ops = build_operators::<f64>(30).unwrap();
        let p = HyperboloidPoint::new(0.6, 1.1).unwrap();
        let w = wigner_kernel_matrix(&ops, &p).unwrap();
        for (chain, blk) in w.blocks() {
            // unitary up to the factor 2, and the same traces of powers
            let n = chain.len();
            let g = blk.dot(&adjoint(blk)).mapv(|z| z / 4.0);
            assert!(max_abs(&(&g - &identity(n))) < 1e-8);
            let par = chain.parity();
            let mut pw = identity::<f64>(n);
            for power in 1..4i32 {
                pw = pw.dot(blk);
                let tr: C = pw.diag().sum();
                let want: C = par.iter().map(|z| (z * 2.0).powi(power)).sum();
                assert!((tr - want).norm() < 1e-8 * (1 << power) as f64 * n as f64);
            }
        }
        let w0 = wigner_kernel_matrix(&ops, &HyperboloidPoint::origin()).unwrap().to_dense();
        let diag = Array2::from_diag(&Array1::from(ops.parity_diagonal())).mapv(|z| z * 2.0);
        assert_eq!(w0, diag);
    }

    #[test]
    fn two_kernel_constructions_agree() {
        for (k2, tau, chi) in [(1, 0.7, 0.3), (2, 1.4, -2.0), (3, 2.0, 2.9)] {
            let p = HyperboloidPoint::new(tau, chi).unwrap();
            for a in 0..6 {
                for b in 0..6 {
                    let (mu, mup) = (h(k2 + 2 * a), h(k2 + 2 * b));
                    let dis = disentangled_kernel_element(h(k2), mu, mup, &p).unwrap();
                    let (boxed, leak) = boxed_kernel_element(h(k2), mu, mup, &p, 200).unwrap();
                    assert!(leak < LEAK_LIMIT);
                    assert!((dis - boxed).norm() < 1e-10, "{k2} {a} {b}: {dis} {boxed}");
                }
            }
        }
    }

    #[test]
    fn disentangled_at_origin_is_parity() {
        let p = HyperboloidPoint::origin();
        for k2 in 1..5 {
            for a in 0..4 {
                for b in 0..4 {
                    let v = disentangled_kernel_element(h(k2), h(k2 + 2 * a), h(k2 + 2 * b), &p).unwrap();
                    let want: C = if a == b { h(k2 + 2 * a).phase::<f64>() * 2.0 } else { cx(0.0, 0.0) };
                    assert_eq!(v, want);
                }
            }
        }
    }

    #[test]
    fn params_satisfy_identity() {
        let p = DisentangledKernelParams::at(&HyperboloidPoint::new(1.7f64, 0.4).unwrap());
        assert!((p.gamma_plus.norm_sqr() - (1.0 - p.gamma_zero)).abs() < 1e-12);
        assert!((p.gamma_minus - p.gamma_plus.conj()).norm() < 1e-15);
    }

    #[test]
    fn single_mode_states() {
        let (v, leak) = displaced_vacuum(cx(1.0f64, 0.5), 40);
        assert!(leak < 1e-20);
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        // Poisson weights with mean |alpha|^2
        let n_mean: f64 = v.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum();
        assert!((n_mean - 1.25).abs() < 1e-10);

        let (s, leak) = squeezed_vacuum(cx(0.8f64, 0.0), 200);
        assert!(leak < 1e-20);
        assert!(s.iter().skip(1).step_by(2).all(|z| *z == cx(0.0, 0.0)));
        // <n> = sinh^2 r
        let n_mean: f64 = s.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum();
        assert!((n_mean - 0.8f64.sinh().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn kernel_block_matches_elements() {
        let p = HyperboloidPoint::new(0.9, -0.4).unwrap();
        let (b, leak) = boxed_kernel_block::<f64>(h(3), 5, &p, 120).unwrap();
        assert!(leak < LEAK_LIMIT);
        for j in 0..5 {
            for jp in 0..5 {
                let (e, _) = boxed_kernel_element(h(3), h(3 + 2 * j as i64), h(3 + 2 * jp as i64), &p, 120).unwrap();
                assert!((b[[j, jp]] - e).norm() < 1e-14);
            }
        }
        assert!(boxed_kernel_block::<f64>(h(3), 0, &p, 10).is_err());
    }

    #[test]
    fn fock_wigner_of_vacuum_at_origin() {
        let s = TwoModeState::<f64>::vacuum(4);
        let (w, leak) = fock_wigner(&s, &HyperboloidPoint::origin(), 8, 8).unwrap();
        assert_eq!(w, cx(0.0, 2.0));
        assert_eq!(leak, 0.0);
    }

    #[test]
    fn exact_dfunction_matches_floating_series() {
        for k2 in 1..=4 {
            let k = HalfInteger::from_twice(k2);
            for (a, b) in [(0, 0), (3, 1), (1, 3), (6, 6), (8, 2)] {
                let mu = k + HalfInteger::from_int(a);
                let mup = k + HalfInteger::from_int(b);
                for tau in [0.0, 0.4, 1.7, 4.0] {
                    let e = disentangled_dfunction_exact(k, mu, mup, tau).unwrap();
                    let q = crate::special::DFunctionQuery::new(k, mu, mup, tau).unwrap();
                    let c = crate::special::dfunction(&q);
                    assert!((e - c).abs() < 1e-12, "{k2} {a} {b} {tau}: {e} {c}");
                }
            }
        }
    }

}
