//! SU(1,1) group elements `g = [[alpha, beta], [beta^*, alpha^*]]`,
//! `|alpha|^2 - |beta|^2 = 1`, and their Möbius action on the unit disk.

use serde::{Deserialize, Serialize};

use crate::coords::DiskPoint;
use crate::error::{Error, Result};
use crate::scalar::{cis, cx, Cx, Real};

/// Determinant drift that is silently rescaled away.
pub const DETERMINANT_DRIFT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement<T> {
    alpha: Cx<T>,
    beta: Cx<T>,
}

impl<T: Real> GroupElement<T> {
    /// Rescales by `1/sqrt(det)` when `|det - 1| <= 1e-9`; rejects otherwise.
    pub fn new(alpha: Cx<T>, beta: Cx<T>) -> Result<Self> {
        let det = alpha.norm_sqr() - beta.norm_sqr();
        let drift = (det - T::one()).abs().as_f64();
        if !(drift <= DETERMINANT_DRIFT) {
            return Err(Error::Determinant(det.as_f64()));
        }
        let s = T::one() / det.sqrt();
        Ok(Self { alpha: alpha * s, beta: beta * s })
    }

    pub fn identity() -> Self {
        Self { alpha: cx(T::one(), T::zero()), beta: cx(T::zero(), T::zero()) }
    }

    pub fn alpha(&self) -> Cx<T> {
        self.alpha
    }

    pub fn beta(&self) -> Cx<T> {
        self.beta
    }

    pub fn determinant(&self) -> T {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    /// `[[alpha^*, -beta], [-beta^*, alpha]]`.
    pub fn inverse(&self) -> Self {
        Self { alpha: self.alpha.conj(), beta: -self.beta }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        compose(self, other)
    }

    pub fn matrix(&self) -> [[Cx<T>; 2]; 2] {
        [[self.alpha, self.beta], [self.beta.conj(), self.alpha.conj()]]
    }
}

pub fn compose<T: Real>(g1: &GroupElement<T>, g2: &GroupElement<T>) -> Result<GroupElement<T>> {
    GroupElement::new(
        g1.alpha * g2.alpha + g1.beta * g2.beta.conj(),
        g1.alpha * g2.beta + g1.beta * g2.alpha.conj(),
    )
}

/// Settings of the balanced interferometer `S(zeta) e^{i Phi K0} S(zeta)^dag`
/// with `zeta = gain e^{i pump_phase}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    pub gain: f64,
    pub pump_phase: f64,
    pub total_phase: f64,
}

impl InterferometerConfig {
    pub fn new(gain: f64, pump_phase: f64, total_phase: f64) -> Result<Self> {
        let c = Self { gain, pump_phase, total_phase };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain.is_finite() && self.pump_phase.is_finite() && self.total_phase.is_finite()) {
            return Err(Error::InvalidArgument("interferometer settings must be finite".into()));
        }
        if self.gain < 0.0 {
            return Err(Error::InvalidArgument(format!("gain must be >= 0, got {}", self.gain)));
        }
        Ok(())
    }

    /// Squeeze argument of the amplifiers.
    pub fn zeta<T: Real>(&self) -> Cx<T> {
        cis(T::lit(self.pump_phase)) * T::lit(self.gain)
    }
}

/// Group element of the interferometer, with `tau = 2 gain`, `chi = pump_phase`:
///
/// ```text
/// alpha = cos(Phi/2) + i sin(Phi/2) cosh tau
/// beta  = -i e^{i chi} sin(Phi/2) sinh tau
/// ```
pub fn interferometer_element<T: Real>(cfg: &InterferometerConfig) -> Result<GroupElement<T>> {
    cfg.validate()?;
    let tau = T::lit(2.0 * cfg.gain);
    let half = T::lit(cfg.total_phase) * T::half();
    let (s, c) = half.sin_cos();
    let alpha = cx(c, s * tau.cosh());
    let beta = cis(T::lit(cfg.pump_phase)) * cx(T::zero(), -(s * tau.sinh()));
    GroupElement::new(alpha, beta)
}

/// `g^{-1} xi = (-alpha^* xi + beta) / (beta^* xi - alpha)`.
pub fn mobius_apply_inverse<T: Real>(g: &GroupElement<T>, xi: &DiskPoint<T>) -> DiskPoint<T> {
    let z = xi.xi();
    let den = g.beta.conj() * z - g.alpha;
    assert!(den != cx(T::zero(), T::zero()), "Möbius denominator vanished inside the disk");
    let w = (-g.alpha.conj() * z + g.beta) / den;
    DiskPoint::new(w).unwrap_or_else(|_| {
        // rounding can push images of points within 1 ulp of the rim outward
        let r = T::one() - T::epsilon();
        DiskPoint::new(w * (r / w.norm())).expect("rescaled point inside the disk")
    })
}

/// `g xi = (alpha xi + beta) / (beta^* xi + alpha^*)`.
pub fn mobius_apply<T: Real>(g: &GroupElement<T>, xi: &DiskPoint<T>) -> DiskPoint<T> {
    mobius_apply_inverse(&g.inverse(), xi)
}
