//! The balanced SU(1,1) interferometer `T = S(zeta) e^{i Phi K0} S(zeta)^dag`,
//! propagated either through the Möbius covariance `W_out(xi) = W_in(g^{-1} xi)`
//! or directly on the Fock amplitudes.

use ndarray::Array2;

use crate::coords::{DiskPoint, HyperboloidPoint};
use crate::error::{Error, Result};
use crate::geometry::{interferometer_element, mobius_apply_inverse, GroupElement};
use crate::half_integer::HalfInteger;
use crate::oracle::sector_chain;
use crate::scalar::{cis, czero, Cx, Real};
use crate::state::{DecomposedState, TwoModeState};
use crate::wigner::{wigner_at, GridSpec, PhaseConvention, WignerField};

pub use crate::geometry::InterferometerConfig;

/// Largest working cutoff tried by [`output_state_direct`].
pub const MAX_WORK_CUTOFF: usize = 4096;

/// Input Wigner function pulled back through `g^{-1}` at every grid point.
pub fn output_wigner_covariant<T: Real>(
    state: &DecomposedState<T>,
    cfg: &InterferometerConfig,
    grid: &GridSpec,
    conv: PhaseConvention,
) -> Result<WignerField<T>> {
    let g = interferometer_element::<T>(cfg)?;
    let points = grid.points::<T>()?;
    let pre: Vec<HyperboloidPoint<T>> = if g == GroupElement::identity() {
        points.iter().map(|p| p.point).collect()
    } else {
        points.iter().map(|p| preimage(&g, p.xi)).collect::<Result<_>>()?
    };
    let values = wigner_at(state, &pre, conv);
    Ok(WignerField { grid: *grid, points, values, convention: conv, metadata: *state.metadata() })
}

fn preimage<T: Real>(g: &GroupElement<T>, xi: Cx<T>) -> Result<HyperboloidPoint<T>> {
    Ok(mobius_apply_inverse(g, &DiskPoint::new(xi)?).to_hyperboloid())
}

/// `T |Psi>` on the truncation `work_a x work_b`, sector by sector. Returns
/// the unnormalized amplitudes and the largest boundary mass met after
/// either squeeze.
pub fn propagate_direct<T: Real>(
    state: &TwoModeState<T>,
    cfg: &InterferometerConfig,
    work_a: usize,
    work_b: usize,
) -> Result<(Array2<Cx<T>>, f64)> {
    cfg.validate()?;
    let (na, nb) = (state.cutoff_a(), state.cutoff_b());
    if work_a < na || work_b < nb {
        return Err(Error::InvalidArgument("work cutoffs below the state cutoffs".into()));
    }
    let zeta = cfg.zeta::<T>();
    let phi = T::lit(cfg.total_phase);
    let amps = state.amplitudes();
    let mut out = Array2::from_elem((work_a + 1, work_b + 1), czero());
    let mut leak = 0.0f64;
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
        let mut u = chain.squeeze_action(-zeta, &v);
        leak = leak.max(chain.boundary_mass(&u));
        for (z, &(a, b)) in u.iter_mut().zip(chain.fock()) {
            *z *= cis(phi * HalfInteger::from_twice((a + b + 1) as i64).to_real::<T>());
        }
        let w = chain.squeeze_action(zeta, &u);
        leak = leak.max(chain.boundary_mass(&w));
        for (z, &(a, b)) in w.into_iter().zip(chain.fock()) {
            out[[a, b]] = z;
        }
    }
    Ok((out, leak))
}

/// Boundary mass accepted by [`output_state_direct`]. Amplitude errors scale
/// like the square root of this mass, so it sits well below the leak limit.
pub const DIRECT_LEAK_TARGET: f64 = 1e-18;

/// Direct propagation with the working cutoffs doubled from
/// `state cutoff + 40` until the boundary mass is below
/// [`DIRECT_LEAK_TARGET`]. The output is renormalized and carries the leak
/// as truncated mass.
pub fn output_state_direct<T: Real>(state: &TwoModeState<T>, cfg: &InterferometerConfig) -> Result<TwoModeState<T>> {
    let (mut wa, mut wb) = (state.cutoff_a() + 40, state.cutoff_b() + 40);
    loop {
        let (amps, leak) = propagate_direct(state, cfg, wa, wb)?;
        if leak < DIRECT_LEAK_TARGET {
            if state.is_empty() {
                return TwoModeState::new(amps, 0.0);
            }
            return TwoModeState::from_unnormalized(amps, leak);
        }
        if wa.max(wb) >= MAX_WORK_CUTOFF {
            return Err(Error::TruncationLeak { leak, limit: DIRECT_LEAK_TARGET, cutoff: wa.max(wb) });
        }
        wa *= 2;
        wb *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::compose;
    use crate::oracle::LEAK_LIMIT;
    use crate::scalar::cx;
    use crate::states::{build_coherent_squeezed, build_su11_coherent, build_tmsv, decompose, Folding};
    use crate::wigner::{wigner_grid, wigner_point};
    use std::f64::consts::PI;

    fn cfg(gain: f64, pump: f64, phi: f64) -> InterferometerConfig {
        InterferometerConfig::new(gain, pump, phi).unwrap()
    }

    #[test]
    fn zero_phase_is_identity() {
        let s = build_tmsv::<f64>(cx(0.5, 0.0), 40).unwrap();
        let d = decompose(&s, Folding::Separate).unwrap();
        let g = GridSpec::disk(0.9, 15).unwrap();
        let c = cfg(0.5, 0.2, 0.0);
        let out = output_wigner_covariant(&d, &c, &g, PhaseConvention::Literal).unwrap();
        let inp = wigner_grid(&d, &g, PhaseConvention::Literal).unwrap();
        assert_eq!(out.values, inp.values);
        let direct = output_state_direct(&s, &c).unwrap();
        for ((i, j), z) in direct.amplitudes().indexed_iter() {
            assert!((z - s.amplitude(i, j)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_gain_is_shell_phase() {
        let s = build_coherent_squeezed::<f64>(cx(0.4, 0.1), cx(0.3, 0.0), Some(10)).unwrap();
        let phi = 0.8;
        let out = output_state_direct(&s, &cfg(0.0, 0.0, phi)).unwrap();
        for ((i, j), z) in s.amplitudes().indexed_iter() {
            let want = z * cis(phi * (i + j + 1) as f64 / 2.0);
            assert!((out.amplitude(i, j) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn direct_route_is_unitary() {
        let s = build_su11_coherent::<f64>(HalfInteger::from_twice(3), DiskPoint::from_parts(0.2, 0.3).unwrap(), 50).unwrap();
        let f = crate::states::recompose(&s).unwrap();
        let (amps, leak) = propagate_direct(&f, &cfg(0.5, 0.4, 1.1), 160, 160).unwrap();
        assert!(leak < LEAK_LIMIT);
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn routes_agree_on_random_points() {
        let states = vec![
            build_tmsv::<f64>(cx(0.5, 0.0), 60).unwrap(),
            crate::states::recompose(
                &build_su11_coherent(HalfInteger::from_twice(4), DiskPoint::from_parts(-0.2, 0.25).unwrap(), 64).unwrap(),
            )
            .unwrap(),
        ];
        let settings = [cfg(0.5, 0.0, PI / 2.0), cfg(0.8, 1.3, -2.0)];
        let g = GridSpec::disk(0.9, 9).unwrap();
        for s in &states {
            let d = decompose(s, Folding::Separate).unwrap();
            for c in &settings {
                let cov = output_wigner_covariant(&d, c, &g, PhaseConvention::Literal).unwrap();
                let out = decompose(&output_state_direct(s, c).unwrap(), Folding::Separate).unwrap();
                let dir = wigner_grid(&out, &g, PhaseConvention::Literal).unwrap();
                for (a, b) in cov.values.iter().zip(&dir.values) {
                    assert!((a - b).norm() < 1e-6, "{a} {b} {c:?} {:?}", s.cutoff_a());
                }
            }
        }
    }

    #[test]
    fn phases_add_on_single_irrep() {
        let s = build_su11_coherent::<f64>(HalfInteger::ONE, DiskPoint::from_parts(0.3, -0.1).unwrap(), 62).unwrap();
        let (c1, c2, c12) = (cfg(0.4, 0.7, 0.6), cfg(0.4, 0.7, 1.5), cfg(0.4, 0.7, 2.1));
        let g = compose(&interferometer_element::<f64>(&c1).unwrap(), &interferometer_element(&c2).unwrap()).unwrap();
        let g12 = interferometer_element::<f64>(&c12).unwrap();
        assert!((g.alpha() - g12.alpha()).norm() < 1e-12 && (g.beta() - g12.beta()).norm() < 1e-12);
        let grid = GridSpec::disk(0.9, 11).unwrap();
        let once = output_wigner_covariant(&s, &c12, &grid, PhaseConvention::Literal).unwrap();
        for (p, w) in once.points.iter().zip(&once.values) {
            let q = preimage(&g, p.xi).unwrap();
            assert!((wigner_point(&s, &q, PhaseConvention::Literal) - w).norm() < 1e-8);
        }
    }

    #[test]
    fn pure_rotation_turns_the_peak() {
        let d = decompose(&build_tmsv::<f64>(cx(0.485, 0.0), 60).unwrap(), Folding::Separate).unwrap();
        let grid = GridSpec::disk(1.0, 41).unwrap();
        let f = output_wigner_covariant(&d, &cfg(0.0, 0.0, PI / 2.0), &grid, PhaseConvention::PerIrrepNormalized).unwrap();
        let p = f.points[f.argmax_abs().unwrap()];
        assert!((p.xi - cx(0.0, 0.485)).norm() < 0.05 * 1.5, "{}", p.xi);
    }

    #[test]
    fn empty_state_propagates_to_empty() {
        let s = TwoModeState::<f64>::new(Array2::from_elem((2, 2), czero()), 0.0).unwrap();
        assert!(output_state_direct(&s, &cfg(0.5, 0.0, 1.0)).unwrap().is_empty());
    }
}
