use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// `2F1(a, b; c; z)` for a nonpositive integer `a`: the finite sum
/// `sum_{n=0}^{-a} (a)_n (b)_n / (c)_n z^n / n!`, accumulated with
/// Neumaier compensation.
pub fn gauss_2f1_terminating<T: Real>(a: T, b: T, c: T, z: T) -> Result<T> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::Domain("2F1 arguments must be finite".into()));
    }
    if a > T::zero() || a.fract() != T::zero() {
        return Err(Error::Domain(format!(
            "2F1 series terminates only for nonpositive integer a, got {a}"
        )));
    }
    let terms = (-a).to_i64().expect("finite integer") as usize;
    for n in 0..terms {
        let cn = c + T::of(n as i64);
        if cn == T::zero() {
            return Err(Error::Domain(format!(
                "2F1 lower parameter c = {c} hits a pole before termination"
            )));
        }
    }
    let mut acc = CompensatedSum::new();
    let mut term = T::one();
    acc.add(term);
    for n in 0..terms {
        let nn = T::of(n as i64);
        term = term * (a + nn) * (b + nn) / ((c + nn) * (nn + T::one())) * z;
        acc.add(term);
    }
    Ok(acc.value())
}

/// Jacobi polynomial `P_m^{(alpha, beta)}(x)` by the three-term recurrence in
/// the degree, returned as `(mantissa, ln_scale)` with
/// `P = mantissa * exp(ln_scale)`.
pub fn jacobi_p<T: Real>(m: usize, alpha: T, beta: T, x: T) -> (T, T) {
    let mut out = (T::one(), T::zero());
    jacobi_sweep(m, alpha, beta, x, |deg, p, s| {
        if deg == m {
            out = (p, s);
        }
    });
    out
}

/// Runs the degree recurrence for `P_0 .. P_m`, calling `visit(deg, p, ln_scale)`.
pub(crate) fn jacobi_sweep<T: Real>(
    m: usize,
    alpha: T,
    beta: T,
    x: T,
    mut visit: impl FnMut(usize, T, T),
) {
    let one = T::one();
    let two = T::two();
    let big = T::max_value().sqrt() * T::lit(1e-4);
    let mut ln_scale = T::zero();

    let mut p_prev = one;
    visit(0, p_prev, ln_scale);
    if m == 0 {
        return;
    }
    let mut p = (alpha + one) + (alpha + beta + two) * (x - one) * T::half();
    visit(1, p, ln_scale);
    let ab = alpha + beta;
    let a2b2 = alpha * alpha - beta * beta;
    for n in 2..=m {
        let nn = T::of(n as i64);
        let s = two * nn + ab;
        let c1 = two * nn * (nn + ab) * (s - two);
        let c2 = (s - one) * (s * (s - two) * x + a2b2);
        let c3 = two * (nn + alpha - one) * (nn + beta - one) * s;
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
        if p.abs() > big {
            p = p / big;
            p_prev = p_prev / big;
            ln_scale += big.ln();
        }
        visit(n, p, ln_scale);
    }
}
