//! p-adic valuations of Stirling numbers.
//!
//! The crate computes `ν_p(S(n,k))` and `ν_p(s(n,k))` exactly, evaluates the
//! four standard lower estimates (minimum zero, shifted, almost, shifted
//! almost), decides when each is sharp, predicts maximum poles of
//! higher-order Bernoulli polynomials, and checks a registry of closed-form
//! valuation formulas against the exact oracles.
//!
//! Modules:
//!
//! * [`basep`]: digits, digit sums, carries and segments.
//! * [`bernoulli`]: exact higher-order Bernoulli numbers and Newton polygons.
//! * [`stirling`]: exact Stirling numbers and their valuations.
//! * [`poles`]: Kimura chains and maximum poles.
//! * [`cases`]: estimates and case criteria.
//! * [`theorems`]: closed-form predictions with applicability guards.
//! * [`scan`]: grid verification and conjecture scanners.

pub mod basep;
pub mod bernoulli;
pub mod cases;
pub mod error;
pub mod poles;
pub mod scan;
pub mod stirling;
pub mod theorems;

pub use basep::{Prime, Valuation};
pub use error::{Error, Result};
pub use stirling::StirlingKind;
