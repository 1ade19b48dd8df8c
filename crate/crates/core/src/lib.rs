//! Numerical laboratory for quantum normal forms on finite spectral
//! truncations: spectral models, a graded operator algebra, homological
//! solvers, the iterative smoothing conjugation, exact frequency-lattice
//! arithmetic, Magnus propagation and a config-driven harness.

pub mod algebra;
pub mod arithmetic;
pub mod error;
pub mod expm;
pub mod intlinalg;
pub mod model;

pub use algebra::GradedOperator;
pub use error::NfError;
pub use model::{C64, SpectralModel};
