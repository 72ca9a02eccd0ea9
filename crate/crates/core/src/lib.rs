//! The Cauchy family on complex p-space.
//!
//! The standard member `γ` has density `π⁻ᵖ Γ(p+1) (1 + ‖z‖²)^-(p+1)` on
//! `ℂᵖ ≅ ℝ²ᵖ`; the family is its orbit under complex affine maps. The
//! family is closed under the larger group of projective (Möbius) maps
//! `z ↦ (az + b)/(cz + d)`, and [`ComplexCauchy::pushforward`] computes the
//! image parameters exactly through an RQ factorization.
//!
//! Modules:
//! - [`linalg`]: dense complex kernels (Cholesky, QR/RQ, determinants, random matrices).
//! - [`mobius`]: the group action on `ℂᵖ` and the affine subgroup.
//! - [`cauchy`]: the distribution, its sampler, densities and the real `t₂` embedding.
//! - [`stats`]: goodness-of-fit and two-sample machinery.
//! - [`verify`]: the seeded verification suite shared by the CLI and the tests.

// `!(x > floor)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod error;
pub mod json;
pub mod linalg;
pub mod mobius;
pub mod rng;
pub mod stats;
pub mod verify;

pub use cauchy::{marginal_cdf, ComplexCauchy, RealT2, SpherePoint};
pub use error::{Error, Result};
pub use linalg::{CMat, HermitianPd, RqFactors, C64};
pub use mobius::{AffineMap, MobiusMap};
pub use stats::GofReport;
