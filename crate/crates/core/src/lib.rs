//! Wigner functions of two-mode bosonic states on the SU(1,1) hyperboloid.
//!
//! A two-mode state splits into positive discrete series irreps of SU(1,1)
//! (`K+ = a^dag b^dag`), labelled by `k = (|n_a - n_b| + 1)/2`. The Wigner
//! function is the expectation value of the displaced parity kernel
//! `w(zeta) = 2 S(zeta) e^{i pi K0} S(zeta)^dag`, evaluated irrep by irrep
//! through the hyperbolic d-functions.
//!
//! The numerical core is generic over `f32`/`f64` through [`Real`]; the
//! aliases at the crate root fix it to `f64`.
//!
//! ```
//! use su11::{build_tmsv, decompose, wigner_point, Folding, HyperboloidPoint, PhaseConvention};
//! use num_complex::Complex64;
//!
//! let state = build_tmsv(Complex64::new(0.485, 0.0), 60).unwrap();
//! let blocks = decompose(&state, Folding::Separate).unwrap();
//! let p: HyperboloidPoint = HyperboloidPoint::new(0.5, 0.0).unwrap();
//! let w = wigner_point(&blocks, &p, PhaseConvention::PerIrrepNormalized);
//! assert!(w.im.abs() < 1e-12);
//! ```

pub mod coords;
pub mod error;
pub mod geometry;
pub mod half_integer;
pub mod interferometer;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod special;
pub mod state;
pub mod states;
pub mod verify;
pub mod wigner;

pub use coords::{disk_to_hyperboloid, hyperboloid_to_disk, minkowski_vector};
pub use error::{Error, Result};
pub use geometry::{compose, interferometer_element, mobius_apply, mobius_apply_inverse, InterferometerConfig};
pub use half_integer::HalfInteger;
pub use interferometer::{output_state_direct, output_wigner_covariant};
pub use scalar::{Cx, Real};
pub use special::{dfunction, dfunction_matrix, DFunctionQuery};
pub use state::{Sector, StateMetadata};
pub use states::{
    build_coherent_squeezed, build_su11_coherent, build_tmsv, decompose, recompose, Folding, StateKind, StateSpec,
};
pub use wigner::{wigner_grid, wigner_point, Axis, GridSpec, PhaseConvention};

pub type HyperboloidPoint<T = f64> = coords::HyperboloidPoint<T>;
pub type DiskPoint<T = f64> = coords::DiskPoint<T>;
pub type SqueezeParameter<T = f64> = coords::SqueezeParameter<T>;
pub type TwoModeState<T = f64> = state::TwoModeState<T>;
pub type IrrepBlock<T = f64> = state::IrrepBlock<T>;
pub type DecomposedState<T = f64> = state::DecomposedState<T>;
pub type GroupElement<T = f64> = geometry::GroupElement<T>;
pub type WignerField<T = f64> = wigner::WignerField<T>;
pub type GridPoint<T = f64> = wigner::GridPoint<T>;
pub type BuiltState<T = f64> = states::BuiltState<T>;
