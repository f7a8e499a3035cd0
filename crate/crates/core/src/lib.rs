//! Transportation distances between one-dimensional Lévy measures.
//!
//! Every Lévy measure on the real line is the image of the Cauchy reference
//! measure `Π₀(dv) = dv / v²` under a monotone, sign-preserving
//! *transportation function* `c`. Comparing two measures then reduces to a
//! truncated `Lᵖ(Π₀)` distance between their transportation functions:
//!
//! ```text
//! T_p(Π₁, Π₂) = ( ∫ (|c₁(v) − c₂(v)| ∧ 1)ᵖ Π₀(dv) )^{1/p}
//! ```
//!
//! The crate provides
//!
//! * [`measures`]: measure specifications and their transportation functions,
//! * [`distance`]: closed forms and a breakpoint-aware quadrature for `T_p`,
//! * [`sampling`]: reproducible Pareto sampling and empirical measures,
//! * [`jumpsde`]: finite-intensity jump diffusions driven by a shared Cauchy
//!   mark stream, synchronous coupling and the noise-sensitivity bound terms,
//! * [`timeseries`]: regime-wise jump extraction and exponent fitting,
//! * [`study`]: the repeated-sampling study of `T̃₁` between empirical and
//!   Pareto measures.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod error;
pub mod io;
pub mod jumpsde;
pub mod measures;
pub mod quadrature;
pub mod sampling;
pub mod special;
pub mod study;
pub mod timeseries;

pub use distance::{DistanceResult, Method};
pub use error::{Error, ErrorKind, Result};
pub use jumpsde::{BoundReport, JumpDiffusionSpec, Path};
pub use measures::{MeasureSpec, TransportFunction};
pub use sampling::RngStream;
pub use study::{StudyCell, StudyGrid};
pub use timeseries::{FitReport, RegimeConfig};
