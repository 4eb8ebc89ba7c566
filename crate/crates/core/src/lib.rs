//! Exact and numerical machinery for trace-set statistics of finitely
//! generated subgroups of SL(2,R).
//!
//! The crate is organized around six concerns:
//!
//! * [`field`]: exact scalars — arbitrary-precision rationals and real
//!   quadratic extensions Q(√d).
//! * [`mat`]: determinant-one 2×2 matrices over those scalars, with the
//!   projective normal form used to identify M with −M.
//! * [`matgroup`]: word-ball enumeration, trace sets, growth statistics,
//!   and the Θ/Φ trace-family maps.
//! * [`qrs`]: quadratic recurrence sequences with exact terms, reduced
//!   forms, valuations, and boundedness/GCD plateau checks.
//! * [`zaffine`]: Z-GCD/Z-LCM of reals, Z-affine subspaces with exact
//!   density and intersection arithmetic, interval counting, Bonferroni
//!   bounds, prime sieving, and effective Dirichlet sums.
//! * [`arithmeticity`]: cusp normalization, trace integrality (Takeuchi
//!   conditions), scalar-rationality decompositions, and the square-free
//!   class homomorphism.
//! * [`fricke`]: floating-point surface-group embeddings from Fricke
//!   coordinates, fundamental-relation tail solving, orbit counting,
//!   critical-exponent estimation, and the Cheeger → λ₁ → δ pipeline.

pub mod arithmeticity;
pub mod error;
pub mod field;
pub mod fricke;
pub mod mat;
pub mod matgroup;
pub mod primes;
pub mod qrs;
pub mod zaffine;

pub use error::Error;
pub use field::{FieldElem, FieldKind};
pub use mat::ExactMat2;

/// Crate result type.
pub type Result<T> = std::result::Result<T, Error>;
