//! Dense and sparse complex linear algebra used by the truncated-Fock oracle.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::{cx, czero, Cx, Real};

/// Padé(13) numerator coefficients.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Maximum absolute column sum.
pub fn one_norm<T: Real>(a: &Array2<Cx<T>>) -> T {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<T>())
        .fold(T::zero(), T::max)
}

pub fn identity<T: Real>(n: usize) -> Array2<Cx<T>> {
    Array2::from_diag_elem(n, cx(T::one(), T::zero()))
}

pub fn adjoint<T: Real>(a: &Array2<Cx<T>>) -> Array2<Cx<T>> {
    a.t().mapv(|z| z.conj())
}

/// `exp(A)` by Padé(13) scaling and squaring.
pub fn expm<T: Real>(a: &Array2<Cx<T>>) -> Result<Array2<Cx<T>>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "expm needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Domain("expm of a non-finite matrix".into()));
    }
    let norm = one_norm(a).as_f64();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = T::lit(0.5f64.powi(s));
    let a = a.mapv(|z| z * scale);

    let eye = identity::<T>(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let inner_u = combo(&[(13, &a6), (11, &a4), (9, &a2)]);
    let u = a.dot(&(a6.dot(&inner_u) + combo(&[(7, &a6), (5, &a4), (3, &a2), (1, &eye)])));
    let inner_v = combo(&[(12, &a6), (10, &a4), (8, &a2)]);
    let v = a6.dot(&inner_v) + combo(&[(6, &a6), (4, &a4), (2, &a2), (0, &eye)]);

    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// `sum_i PADE13[idx_i] * M_i`
fn combo<T: Real>(terms: &[(usize, &Array2<Cx<T>>)]) -> Array2<Cx<T>> {
    let mut out = Array2::zeros(terms[0].1.raw_dim());
    for &(i, m) in terms {
        let c = T::lit(PADE13[i]);
        out.zip_mut_with(m, |o, x| *o += *x * c);
    }
    out
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve<T: Real>(a: &Array2<Cx<T>>, b: &Array2<Cx<T>>) -> Result<Array2<Cx<T>>> {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, lu[[r, col]].norm()))
            .fold((col, T::zero()), |acc, c| if c.1 > acc.1 { c } else { acc });
        if pmax == T::zero() {
            return Err(Error::Domain("singular matrix in linear solve".into()));
        }
        if piv != col {
            for j in 0..n {
                lu.swap([col, j], [piv, j]);
            }
            for j in 0..x.ncols() {
                x.swap([col, j], [piv, j]);
            }
        }
        let d = lu[[col, col]];
        for r in col + 1..n {
            let f = lu[[r, col]] / d;
            if f == czero() {
                continue;
            }
            lu[[r, col]] = f;
            for j in col + 1..n {
                let t = lu[[col, j]];
                lu[[r, j]] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[[col, j]];
                x[[r, j]] -= f * t;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[[col, col]];
        for j in 0..x.ncols() {
            let mut acc = x[[col, j]];
            for c in col + 1..n {
                acc -= lu[[col, c]] * x[[c, j]];
            }
            x[[col, j]] = acc / d;
        }
    }
    Ok(x)
}

/// Compressed sparse row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Cx<T>>,
}

impl<T: Real> SparseMatrix<T> {
    /// Duplicate entries are summed; explicit zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, Cx<T>)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<Cx<T>> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self { nrows, ncols, indptr, indices, values };
        m.prune();
        m
    }

    pub fn diagonal(values: Vec<Cx<T>>) -> Self {
        let n = values.len();
        Self::from_triplets(n, n, values.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect())
    }

    fn prune(&mut self) {
        let mut indptr = vec![0; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                if self.values[p] != czero() {
                    indices.push(self.indices[p]);
                    values.push(self.values[p]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Cx<T> {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(p) => self.values[self.indptr[r] + p],
            Err(_) => czero(),
        }
    }

    /// `(row, col, value)` of every stored entry, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Cx<T>)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |p| (r, self.indices[p], self.values[p]))
        })
    }

    pub fn mul_vec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|p| self.values[p] * x[self.indices[p]])
                    .fold(czero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut entries = Vec::new();
        for (r, k, v) in self.iter() {
            for p in other.indptr[k]..other.indptr[k + 1] {
                entries.push((r, other.indices[p], v * other.values[p]));
            }
        }
        Self::from_triplets(self.nrows, other.ncols, entries)
    }

    pub fn adjoint(&self) -> Self {
        let entries = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, entries)
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        let entries = self.iter().map(|(r, c, v)| (r, c, v * s)).collect();
        Self::from_triplets(self.nrows, self.ncols, entries)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.iter().chain(other.iter()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(cx(-T::one(), T::zero())))
    }

    pub fn to_dense(&self) -> Array2<Cx<T>> {
        let mut d = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.iter() {
            d[[r, c]] = v;
        }
        d
    }

    /// Submatrix on the given row and column index lists.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Array2<Cx<T>> {
        let mut d = Array2::zeros((rows.len(), cols.len()));
        let mut pos = vec![usize::MAX; self.ncols];
        for (j, &c) in cols.iter().enumerate() {
            pos[c] = j;
        }
        for (i, &r) in rows.iter().enumerate() {
            for p in self.indptr[r]..self.indptr[r + 1] {
                let j = pos[self.indices[p]];
                if j != usize::MAX {
                    d[[i, j]] = self.values[p];
                }
            }
        }
        d
    }

    /// Upper bound on the spectral radius (maximum absolute row sum).
    pub fn row_sum_bound(&self) -> T {
        (0..self.nrows)
            .map(|r| (self.indptr[r]..self.indptr[r + 1]).map(|p| self.values[p].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }
}

/// Bessel functions `J_0(x) .. J_{n}(x)` for `x >= 0`, by downward Miller
/// recurrence normalized with `J_0 + 2 sum J_{2k} = 1`. The returned vector
/// is cut where the values fall below `1e-300` past the turning point.
pub(crate) fn bessel_j_sequence(x: f64) -> Vec<f64> {
    if x == 0.0 {
        return vec![1.0];
    }
    let start = (x + 30.0 * x.cbrt() + 60.0).ceil() as usize;
    let mut j = vec![0.0f64; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = j[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * j[k];
    }
    let mut out: Vec<f64> = j[..=start].iter().map(|v| v / norm).collect();
    let cut = out
        .iter()
        .enumerate()
        .rposition(|(k, v)| k as f64 <= x || v.abs() > 1e-300)
        .unwrap_or(0);
    out.truncate(cut + 1);
    out
}

/// `exp(A) v` for skew-Hermitian `A` given only through `apply(x, y)`:
/// `y <- A x`. `rho` must bound the spectral radius of `A`.
///
/// Chebyshev expansion of `e^{-i rho y}` on `[-1, 1]`, coefficients
/// `(-i)^k J_k(rho)`; the number of products is about `rho + O(rho^{1/3})`.
pub fn expm_skew_action<T: Real>(
    apply: impl Fn(&[Cx<T>], &mut [Cx<T>]),
    rho: T,
    v: &[Cx<T>],
) -> Vec<Cx<T>> {
    let n = v.len();
    let rho_f = rho.as_f64();
    if !(rho_f > 0.0) || v.iter().all(|z| *z == czero()) {
        return v.to_vec();
    }
    let coef = bessel_j_sequence(rho_f);
    let tol = 1e-18;
    // H = i A / rho has spectrum in [-1, 1]
    let h = |x: &[Cx<T>], y: &mut [Cx<T>]| {
        apply(x, y);
        let s = cx(T::zero(), T::one() / rho);
        for z in y.iter_mut() {
            *z *= s;
        }
    };
    let phase = [
        cx(T::one(), T::zero()),
        cx(T::zero(), -T::one()),
        cx(-T::one(), T::zero()),
        cx(T::zero(), T::one()),
    ];
    let mut acc: Vec<Cx<T>> = v.iter().map(|z| *z * T::lit(coef[0])).collect();
    let mut prev = v.to_vec();
    let mut cur = vec![czero(); n];
    h(&prev, &mut cur);
    let mut next = vec![czero(); n];
    for (k, &c) in coef.iter().enumerate().skip(1) {
        if k as f64 > rho_f && c.abs() < tol {
            break;
        }
        let w = phase[k % 4] * T::lit(2.0 * c);
        for (a, z) in acc.iter_mut().zip(&cur) {
            *a += *z * w;
        }
        h(&cur, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = *nx * T::two() - *p;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    acc
}

/// Dense matrix-vector product.
pub fn mat_vec<T: Real>(a: &Array2<Cx<T>>, x: &[Cx<T>]) -> Vec<Cx<T>> {
    a.dot(&Array1::from(x.to_vec())).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Cx<f64>;

    fn random_matrix(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Array2<C> {
        Array2::from_shape_fn((n, n), |_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
    }

    fn max_abs(a: &Array2<C>) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Taylor series in exact steps: reference for small norms.
    fn taylor(a: &Array2<C>) -> Array2<C> {
        let n = a.nrows();
        let mut acc = identity::<f64>(n);
        let mut term = identity::<f64>(n);
        for p in 1..60 {
            term = term.dot(a).mapv(|z| z / p as f64);
            acc = acc + &term;
        }
        acc
    }

    #[test]
    fn zero_and_diagonal() {
        let z = Array2::<C>::zeros((4, 4));
        assert_eq!(expm(&z).unwrap(), identity(4));
        let d = Array2::from_diag(&Array1::from(vec![cx(1.0, 0.0), cx(0.0, 2.0), cx(-3.0, 0.5)]));
        let e = expm(&d).unwrap();
        for i in 0..3 {
            assert!((e[[i, i]] - d[[i, i]].exp()).norm() < 1e-14 * d[[i, i]].exp().norm());
        }
    }

    #[test]
    fn rotation_generator() {
        let x: f64 = 7.3;
        let a = Array2::from_shape_vec((2, 2), vec![cx(0.0, 0.0), cx(x, 0.0), cx(-x, 0.0), cx(0.0, 0.0)]).unwrap();
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]].re - x.cos()).abs() < 1e-14);
        assert!((e[[0, 1]].re - x.sin()).abs() < 1e-14);
    }

    #[test]
    fn matches_taylor_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 3, 8, 20] {
            let a = random_matrix(n, 0.4 / n as f64, &mut rng);
            let diff = &expm(&a).unwrap() - &taylor(&a);
            assert!(max_abs(&diff) < 1e-14, "n={n}");
        }
    }

    #[test]
    fn inverse_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(30, 1.0, &mut rng);
        let p = expm(&a).unwrap().dot(&expm(&a.mapv(|z| -z)).unwrap());
        assert!(max_abs(&(&p - &identity(30))) < 1e-10);
    }

    #[test]
    fn solve_recovers_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(12, 1.0, &mut rng);
        let x = random_matrix(12, 1.0, &mut rng);
        let b = a.dot(&x);
        assert!(max_abs(&(&solve(&a, &b).unwrap() - &x)) < 1e-12);
        assert!(solve(&Array2::<C>::zeros((2, 2)), &identity(2)).is_err());
    }

    #[test]
    fn sparse_roundtrip_and_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ea = Vec::new();
        let mut eb = Vec::new();
        for _ in 0..40 {
            ea.push((rng.gen_range(0..7), rng.gen_range(0..5), cx(rng.gen(), rng.gen())));
            eb.push((rng.gen_range(0..5), rng.gen_range(0..6), cx(rng.gen(), rng.gen())));
        }
        let a = SparseMatrix::from_triplets(7, 5, ea);
        let b = SparseMatrix::from_triplets(5, 6, eb);
        let prod = a.matmul(&b).to_dense();
        assert!(max_abs(&(&prod - &a.to_dense().dot(&b.to_dense()))) < 1e-13);
        assert_eq!(a.adjoint().to_dense(), adjoint(&a.to_dense()));
        let x: Vec<C> = (0..5).map(|i| cx(i as f64, 1.0)).collect();
        let y = a.mul_vec(&x);
        let yd = mat_vec(&a.to_dense(), &x);
        for (p, q) in y.iter().zip(&yd) {
            assert!((p - q).norm() < 1e-13);
        }
        let r = a.restrict(&[1, 4], &[0, 3]);
        assert_eq!(r[[1, 1]], a.get(4, 3));
    }

    #[test]
    fn bessel_values() {
        // J_0(1), J_5(1), J_0(10), J_3(10), J_10(10)
        let j = bessel_j_sequence(1.0);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[5] - 2.497_577_302_112_344e-4).abs() < 1e-18);
        let j = bessel_j_sequence(10.0);
        assert!((j[0] + 0.245_935_764_451_348_3).abs() < 1e-15);
        assert!((j[3] - 0.058_379_379_305_186_81).abs() < 1e-15);
        assert!((j[10] - 0.207_486_106_633_358_9).abs() < 1e-15);
        // J_0(1000) = 0.02478668615242017...
        let j = bessel_j_sequence(1000.0);
        assert!((j[0] - 0.024_786_686_152_420_17).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_action_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for scale in [0.01, 1.0, 25.0] {
            let m = random_matrix(16, scale, &mut rng);
            let a = &m - &adjoint(&m);
            let v: Vec<C> = (0..16).map(|_| cx(rng.gen(), rng.gen())).collect();
            let dense = mat_vec(&expm(&a).unwrap(), &v);
            let rho = one_norm(&a);
            let act = expm_skew_action(|x, y| y.copy_from_slice(&mat_vec(&a, x)), rho, &v);
            let err = dense.iter().zip(&act).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(err < 1e-11 * (1.0 + scale), "scale={scale}: {err}");
        }
    }
}
