//! Dense complex linear algebra, closed-form tridiagonal inversion and
//! inverse-decay diagnostics.

mod decay;
mod inverse;
mod matrix;
mod tridiagonal;

pub use decay::{
    demko_bound, demko_from_parts, distance_profile, fit_decay_profile, fit_decay_rate,
    linear_fit, DecayBound, DecayFit,
};
pub use inverse::{
    condition_number, invert_general, invert_with_threshold, singular_values,
    DEFAULT_PIVOT_THRESHOLD,
};
pub use matrix::{relative_frobenius, ComplexMatrix};
pub use tridiagonal::{
    tridiagonal_aux, tridiagonal_inverse, tridiagonal_inverse_or_general, TridiagonalAux,
    BREAKDOWN_THRESHOLD,
};
