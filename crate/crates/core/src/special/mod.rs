//! Log-gamma, terminating Gauss hypergeometric series and the SU(1,1)
//! d-functions of the positive discrete series.

mod dfunction;
mod gamma;
mod hypergeometric;

pub use dfunction::{dfunction, dfunction_matrix, dfunction_row, DFunctionQuery};
pub use gamma::log_gamma;
pub use hypergeometric::{gauss_2f1_terminating, jacobi_p};

pub(crate) use dfunction::{ln_block_bound, ln_cosh, sweep_offset_where, HalfAngle, LnGammaTable};
