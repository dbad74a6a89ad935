//! Symmetric general linear methods for time-reversible ODEs.
//!
//! The crate bundles:
//!
//! - a registry of symmetric multivalue methods of order 4 (the `4123`,
//!   `4223` and `4124` families) together with comparator Runge-Kutta
//!   methods (implicit midpoint, the 5-stage Suzuki composition DIRK, and
//!   3-stage Lobatto IIIB), all with exact rational coefficients where they
//!   exist ([`tableau`]);
//! - algebraic and spectral verification of consistency, time-reversal
//!   symmetry, parasitism growth factors, linear stability on the
//!   imaginary axis, the transfer-function identities, and
//!   G-symplecticity ([`analysis`]);
//! - rooted-tree B-series machinery that verifies method order exactly in
//!   rational arithmetic ([`bseries`]);
//! - a fixed-step integration engine with Newton stage solves, compensated
//!   summation, and invariant monitoring ([`integrator`]);
//! - the four Hamiltonian benchmark systems used by the long-time
//!   conservation experiments ([`problems`]).
//!
//! The `examples/` directory shows one runnable program per capability;
//! the `symglm` binary wraps the same calls behind a small command-line
//! interface (`list`, `verify`, `order`, `run`, `convergence`,
//! `stability`).

pub mod analysis;
pub mod bseries;
pub mod integrator;
pub mod linalg;
pub mod manifest;
pub mod problems;
pub mod rational;
pub mod tableau;
pub mod trees;

pub use tableau::{registry, MethodEntry, Registry};
