//! `d^{(k)}_{mu mu'}(tau) = <k, mu| e^{i tau K_y} |k, mu'>` for the positive
//! discrete series.
//!
//! For `mu >= mu'`, with `n = mu - mu'` and `m = mu' - k`,
//!
//! ```text
//! d = sqrt(G(mu+k) G(mu-k+1) / (G(mu'+k) G(mu'-k+1))) / n!
//!     * cosh(tau/2)^(-2k-n) sinh(tau/2)^n
//!     * 2F1(k - mu', k + mu; n + 1; tanh^2(tau/2))
//! ```
//!
//! The terminating series equals `P_m^{(n, 2k-1)}(1 - 2 tanh^2(tau/2)) / C(m+n, m)`.
//! Summing it term by term cancels catastrophically once `m` reaches a few
//! dozen at moderate `tau`, so the Jacobi form is evaluated by its degree
//! recurrence and every factor is combined in log space. The case
//! `mu < mu'` uses `d_{mu mu'} = (-1)^{mu' - mu} d_{mu' mu}`.

use ndarray::Array2;

use super::gamma::log_gamma;
use super::hypergeometric::jacobi_sweep;
use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::scalar::Real;

/// Validated argument of [`dfunction`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DFunctionQuery<T> {
    k: HalfInteger,
    mu: HalfInteger,
    mu_prime: HalfInteger,
    tau: T,
}

impl<T: Real> DFunctionQuery<T> {
    pub fn new(k: HalfInteger, mu: HalfInteger, mu_prime: HalfInteger, tau: T) -> Result<Self> {
        check_k(k)?;
        for (name, w) in [("mu", mu), ("mu'", mu_prime)] {
            if w < k || !(w - k).is_integer() {
                return Err(Error::Domain(format!(
                    "{name} = {w} must be k + nonnegative integer (k = {k})"
                )));
            }
        }
        if !tau.is_finite() || tau < T::zero() {
            return Err(Error::Domain(format!("tau must be finite and >= 0, got {tau}")));
        }
        Ok(Self { k, mu, mu_prime, tau })
    }

    pub fn k(&self) -> HalfInteger {
        self.k
    }

    pub fn mu(&self) -> HalfInteger {
        self.mu
    }

    pub fn mu_prime(&self) -> HalfInteger {
        self.mu_prime
    }

    pub fn tau(&self) -> T {
        self.tau
    }
}

fn check_k(k: HalfInteger) -> Result<()> {
    if k.twice() < 1 {
        return Err(Error::Domain(format!("k must be >= 1/2, got {k}")));
    }
    Ok(())
}

fn offset(w: HalfInteger, k: HalfInteger) -> usize {
    ((w - k).twice() / 2) as usize
}

/// `d^{(k)}_{mu mu'}(tau)`. Exactly the Kronecker delta at `tau = 0`.
pub fn dfunction<T: Real>(q: &DFunctionQuery<T>) -> T {
    let (j, jp) = (offset(q.mu, q.k), offset(q.mu_prime, q.k));
    let table = LnGammaTable::new(q.k, j.max(jp) + 1);
    let args = HalfAngle::new(q.tau * T::half());
    entry(&table, &args, j, jp)
}

/// `d^{(k)}_{mu, k+j}(tau)` for `j = 0 .. count`.
pub fn dfunction_row<T: Real>(k: HalfInteger, mu: HalfInteger, tau: T, count: usize) -> Result<Vec<T>> {
    if count == 0 {
        return Err(Error::InvalidArgument("row length must be >= 1".into()));
    }
    let q = DFunctionQuery::new(k, mu, k, tau)?;
    let j = offset(q.mu, k);
    let table = LnGammaTable::new(k, j.max(count - 1) + 1);
    let args = HalfAngle::new(tau * T::half());
    Ok((0..count).map(|jp| entry(&table, &args, j, jp)).collect())
}

/// Matrix `D[j, j'] = d^{(k)}_{k+j, k+j'}(tau)`, `0 <= j, j' < count`, built
/// with one recurrence sweep per diagonal.
pub fn dfunction_matrix<T: Real>(k: HalfInteger, count: usize, tau: T) -> Result<Array2<T>> {
    DFunctionQuery::new(k, k, k, tau)?;
    let mut d = Array2::zeros((count, count));
    if count == 0 {
        return Ok(d);
    }
    let table = LnGammaTable::new(k, count);
    let args = HalfAngle::new(tau * T::half());
    for n in 0..count {
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        sweep_offset(&table, &args, n, count - 1 - n, |m, v| {
            d[[m + n, m]] = v;
            if n > 0 {
                d[[m, m + n]] = sign * v;
            }
        });
    }
    Ok(d)
}

/// `ln cosh x` without overflow.
pub(crate) fn ln_cosh<T: Real>(x: T) -> T {
    let x = x.abs();
    if x > T::lit(20.0) {
        x - T::LN_2() + (-(x + x)).exp().ln_1p()
    } else {
        x.cosh().ln()
    }
}

/// `ln sinh x` for `x > 0` without overflow.
pub(crate) fn ln_sinh<T: Real>(x: T) -> T {
    if x > T::lit(20.0) {
        x - T::LN_2() + (-(-(x + x)).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// Hyperbolic data of the half angle `h = tau/2` shared by every entry.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HalfAngle<T> {
    zero: bool,
    ln_cosh: T,
    ln_sinh: T,
    x: T,
}

impl<T: Real> HalfAngle<T> {
    pub(crate) fn new(h: T) -> Self {
        if h == T::zero() {
            return Self {
                zero: true,
                ln_cosh: T::zero(),
                ln_sinh: T::neg_infinity(),
                x: T::one(),
            };
        }
        let t = h.tanh();
        Self {
            zero: false,
            ln_cosh: ln_cosh(h),
            ln_sinh: ln_sinh(h),
            x: T::one() - T::two() * t * t,
        }
    }
}

/// `ln G(2k + i)` and `ln i!` for `i < len`.
#[derive(Clone, Debug)]
pub(crate) struct LnGammaTable<T> {
    pub(crate) two_k: i64,
    shifted: Vec<T>,
    factorial: Vec<T>,
}

impl<T: Real> LnGammaTable<T> {
    pub(crate) fn new(k: HalfInteger, len: usize) -> Self {
        let two_k = k.twice();
        let lg = |x: T| log_gamma(x).expect("positive argument");
        Self {
            two_k,
            shifted: (0..len).map(|i| lg(T::of(two_k + i as i64))).collect(),
            factorial: (0..len).map(|i| lg(T::of(i as i64 + 1))).collect(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.shifted.len()
    }

    /// `ln sqrt(G(2k+m+n) m! / (G(2k+m) (m+n)!))`
    fn ln_prefactor(&self, m: usize, n: usize) -> T {
        (self.shifted[m + n] + self.factorial[m] - self.shifted[m] - self.factorial[m + n]) * T::half()
    }
}

/// Calls `visit(m, d_{k+m+n, k+m})` for `m = 0 ..= max_m`.
pub(crate) fn sweep_offset<T: Real>(
    table: &LnGammaTable<T>,
    args: &HalfAngle<T>,
    n: usize,
    max_m: usize,
    visit: impl FnMut(usize, T),
) {
    sweep_offset_where(table, args, n, max_m, |_| true, visit)
}

/// As [`sweep_offset`], but only entries with `need(m)` are visited; the
/// recurrence still runs through every `m`.
pub(crate) fn sweep_offset_where<T: Real>(
    table: &LnGammaTable<T>,
    args: &HalfAngle<T>,
    n: usize,
    max_m: usize,
    need: impl Fn(usize) -> bool,
    mut visit: impl FnMut(usize, T),
) {
    debug_assert!(max_m + n < table.len());
    if args.zero {
        for m in (0..=max_m).filter(|&m| need(m)) {
            visit(m, if n == 0 { T::one() } else { T::zero() });
        }
        return;
    }
    let nn = T::of(n as i64);
    let beta = T::of(table.two_k - 1);
    let ln_powers = -(T::of(table.two_k) + nn) * args.ln_cosh
        + if n == 0 { T::zero() } else { nn * args.ln_sinh };
    jacobi_sweep(max_m, nn, beta, args.x, |m, p, ln_scale| {
        if !need(m) {
            return;
        }
        let v = if p == T::zero() {
            T::zero()
        } else {
            let mag = (p.abs().ln() + ln_scale + table.ln_prefactor(m, n) + ln_powers).exp();
            if p < T::zero() {
                -mag
            } else {
                mag
            }
        };
        visit(m, v);
    });
}

/// Upper bound on `ln |d_{k+m+n, k+m}|` over `m + n < len`, from
/// `|P_m^{(a,b)}| <= C(m + max(a, b), m)` on `[-1, 1]`. Never positive.
pub(crate) fn ln_block_bound<T: Real>(two_k: i64, len: usize, args: &HalfAngle<T>) -> T {
    if args.zero || len == 0 {
        return T::zero();
    }
    let l = T::of(len as i64);
    let grow = l * (T::of(two_k) + l + l).ln();
    (grow - T::of(two_k) * args.ln_cosh).min(T::zero())
}

fn entry<T: Real>(table: &LnGammaTable<T>, args: &HalfAngle<T>, j: usize, jp: usize) -> T {
    let (hi, lo) = if j >= jp { (j, jp) } else { (jp, j) };
    let n = hi - lo;
    let mut out = T::zero();
    sweep_offset(table, args, n, lo, |m, v| {
        if m == lo {
            out = v;
        }
    });
    if j < jp && n % 2 == 1 {
        -out
    } else {
        out
    }
}
