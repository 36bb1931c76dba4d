//! Phase-space coordinates: the upper sheet of the two-sheeted hyperboloid,
//! the unit disk it projects onto, and the squeeze parameter `zeta`.
//!
//! The three descriptions of a point are related by
//!
//! ```text
//! xi   = tanh(tau/2) e^{i chi}          (disk)
//! n    = (cosh tau, sinh tau cos chi, sinh tau sin chi)
//! zeta = (tau/2) e^{i chi}              (argument of S(zeta))
//! ```

use crate::error::{Error, Result};
use crate::scalar::{cis, Cx, Real};

/// Point on the upper hyperboloid sheet, `tau >= 0`, `chi` in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperboloidPoint<T> {
    tau: T,
    chi: T,
}

impl<T: Real> HyperboloidPoint<T> {
    /// Canonicalizes `chi` into `(-pi, pi]`; `chi = 0` at the apex.
    pub fn new(tau: T, chi: T) -> Result<Self> {
        if !tau.is_finite() || tau < T::zero() {
            return Err(Error::InvalidArgument(format!(
                "hyperbolic angle must be finite and >= 0, got {tau}"
            )));
        }
        if !chi.is_finite() {
            return Err(Error::InvalidArgument(format!("azimuth must be finite, got {chi}")));
        }
        let chi = if tau == T::zero() {
            T::zero()
        } else {
            normalize_angle(chi)
        };
        Ok(Self { tau, chi })
    }

    pub fn origin() -> Self {
        Self {
            tau: T::zero(),
            chi: T::zero(),
        }
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn chi(&self) -> T {
        self.chi
    }

    /// Minkowski unit vector `(n0, n1, n2)` with `n0^2 - n1^2 - n2^2 = 1`.
    pub fn minkowski_vector(&self) -> [T; 3] {
        let (s, c) = (self.tau.sinh(), self.tau.cosh());
        [c, s * self.chi.cos(), s * self.chi.sin()]
    }

    pub fn to_disk(&self) -> DiskPoint<T> {
        hyperboloid_to_disk(*self)
    }

    pub fn squeeze_parameter(&self) -> SqueezeParameter<T> {
        SqueezeParameter {
            zeta: cis(self.chi) * (self.tau * T::half()),
        }
    }
}

/// Point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint<T> {
    xi: Cx<T>,
}

impl<T: Real> DiskPoint<T> {
    /// Rejects `|xi| >= 1` and non-finite input.
    pub fn new(xi: Cx<T>) -> Result<Self> {
        let r = xi.norm();
        if !r.is_finite() || r >= T::one() {
            return Err(Error::OutsideDisk(r.as_f64()));
        }
        Ok(Self { xi })
    }

    pub fn from_parts(re: T, im: T) -> Result<Self> {
        Self::new(Cx::new(re, im))
    }

    pub fn origin() -> Self {
        Self { xi: Cx::new(T::zero(), T::zero()) }
    }

    pub fn xi(&self) -> Cx<T> {
        self.xi
    }

    pub fn to_hyperboloid(&self) -> HyperboloidPoint<T> {
        disk_to_hyperboloid(*self)
    }
}

/// `zeta = (tau/2) e^{i chi}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParameter<T> {
    zeta: Cx<T>,
}

impl<T: Real> SqueezeParameter<T> {
    pub fn new(zeta: Cx<T>) -> Result<Self> {
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return Err(Error::InvalidArgument("squeeze parameter must be finite".into()));
        }
        Ok(Self { zeta })
    }

    pub fn zeta(&self) -> Cx<T> {
        self.zeta
    }

    pub fn to_hyperboloid(&self) -> HyperboloidPoint<T> {
        let tau = self.zeta.norm() * T::two();
        let chi = if tau == T::zero() { T::zero() } else { self.zeta.arg() };
        HyperboloidPoint { tau, chi: normalize_angle(chi) }
    }
}

/// `tau = 2 artanh|xi|`, `chi = arg xi` (0 at the origin).
pub fn disk_to_hyperboloid<T: Real>(p: DiskPoint<T>) -> HyperboloidPoint<T> {
    let r = p.xi.norm();
    if r == T::zero() {
        return HyperboloidPoint::origin();
    }
    HyperboloidPoint {
        tau: T::two() * r.atanh(),
        chi: normalize_angle(p.xi.arg()),
    }
}

/// `xi = tanh(tau/2) e^{i chi}`.
pub fn hyperboloid_to_disk<T: Real>(p: HyperboloidPoint<T>) -> DiskPoint<T> {
    let r = (p.tau * T::half()).tanh();
    // tanh saturates to exactly 1 for tau beyond ~38 in f64.
    let r = if r >= T::one() { T::one() - T::epsilon() } else { r };
    DiskPoint { xi: cis(p.chi) * r }
}

pub fn minkowski_vector<T: Real>(p: HyperboloidPoint<T>) -> [T; 3] {
    p.minkowski_vector()
}

/// Maps any finite angle into `(-pi, pi]`.
pub(crate) fn normalize_angle<T: Real>(a: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    if a > -pi && a <= pi {
        return a;
    }
    let mut r = a - two_pi * ((a + pi) / two_pi).floor();
    // r is now in [-pi, pi)
    if r <= -pi {
        r += two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn origin_maps_to_apex() {
        let h = disk_to_hyperboloid(DiskPoint::<f64>::origin());
        assert_eq!((h.tau(), h.chi()), (0.0, 0.0));
        let d = hyperboloid_to_disk(HyperboloidPoint::new(0.0, 2.0).unwrap());
        assert_eq!(d.xi(), Cx::new(0.0, 0.0));
    }

    #[test]
    fn real_and_imaginary_axis() {
        let h = DiskPoint::from_parts(0.485, 0.0).unwrap().to_hyperboloid();
        assert_abs_diff_eq!(h.tau(), 2.0 * 0.485f64.atanh(), epsilon = 1e-15);
        assert_eq!(h.chi(), 0.0);
        // tanh(tau/2) recovers the radius
        assert_abs_diff_eq!((h.tau() / 2.0).tanh(), 0.485, epsilon = 1e-15);

        let h = DiskPoint::from_parts(0.0, 0.5).unwrap().to_hyperboloid();
        assert_abs_diff_eq!(h.tau(), 2.0 * 0.5f64.atanh(), epsilon = 1e-15);
        assert_abs_diff_eq!(h.chi(), FRAC_PI_2, epsilon = 1e-15);

        let d = HyperboloidPoint::new(2.0, 0.0).unwrap().to_disk();
        assert_abs_diff_eq!(d.xi().re, 0.761_594_155_955_764_9, epsilon = 1e-15);
    }

    #[test]
    fn rejects_outside_disk() {
        assert!(DiskPoint::from_parts(1.0, 0.0).is_err());
        assert!(DiskPoint::from_parts(0.8, 0.7).is_err());
        assert!(DiskPoint::from_parts(f64::NAN, 0.0).is_err());
        assert!(HyperboloidPoint::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn chi_canonical_range() {
        let h = HyperboloidPoint::new(1.0, -PI).unwrap();
        assert_eq!(h.chi(), PI);
        let h = HyperboloidPoint::new(1.0, 3.0 * PI).unwrap();
        assert_abs_diff_eq!(h.chi(), PI, epsilon = 1e-14);
        let h = HyperboloidPoint::new(1.0, 7.0).unwrap();
        assert_abs_diff_eq!(h.chi(), 7.0 - 2.0 * PI, epsilon = 1e-14);
    }

    #[test]
    fn minkowski_axis() {
        assert_eq!(HyperboloidPoint::<f64>::origin().minkowski_vector(), [1.0, 0.0, 0.0]);
        let n = HyperboloidPoint::new(1.0, FRAC_PI_2).unwrap().minkowski_vector();
        assert_abs_diff_eq!(n[0], 1f64.cosh(), epsilon = 1e-15);
        assert_abs_diff_eq!(n[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n[2], 1f64.sinh(), epsilon = 1e-15);
    }

    #[test]
    fn squeeze_parameter_matches_point() {
        let h = HyperboloidPoint::new(1.3, -0.4).unwrap();
        let z = h.squeeze_parameter().zeta();
        assert_abs_diff_eq!(z.norm(), 0.65, epsilon = 1e-15);
        assert_abs_diff_eq!(z.arg(), -0.4, epsilon = 1e-15);
        let back = h.squeeze_parameter().to_hyperboloid();
        assert_abs_diff_eq!(back.tau(), 1.3, epsilon = 1e-15);
        assert_abs_diff_eq!(back.chi(), -0.4, epsilon = 1e-15);
    }

    #[test]
    fn single_precision_instantiation() {
        let d = DiskPoint::<f32>::from_parts(0.3, -0.2).unwrap();
        let back = d.to_hyperboloid().to_disk();
        assert!((back.xi() - d.xi()).norm() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn disk_round_trip(r in 0.0f64..0.999_999, a in -PI..PI) {
            let d = DiskPoint::new(cis(a) * r).unwrap();
            let back = d.to_hyperboloid().to_disk();
            prop_assert!((back.xi() - d.xi()).norm() <= 1e-12);
        }

        #[test]
        fn minkowski_unit_norm(tau in 0.0f64..8.0, chi in -10.0f64..10.0) {
            let n = HyperboloidPoint::new(tau, chi).unwrap().minkowski_vector();
            let q = n[0] * n[0] - n[1] * n[1] - n[2] * n[2];
            // relative to the size of the components
            prop_assert!((q - 1.0).abs() <= 1e-10 * n[0] * n[0]);
            if tau < 4.0 {
                prop_assert!((q - 1.0).abs() <= 1e-10);
            }
        }
    }
}
