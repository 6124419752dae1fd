//! Exact arithmetic for measures on `Q_p^n` with values in the `s`-adic rationals.
//!
//! Everything here is exact: scalars are arbitrary-precision rationals, character
//! values live in a cyclotomic ring over `Q`, and pseudo-differential results are
//! symbolic Laurent expressions in `T = s^{-b}` with closed-form geometric tails.
//!
//! Module map:
//!
//! - [`padic`]: valuations, balls, canonical clopen sets and shell partitions of `Q_p`.
//! - [`scalar`]: `s`-adic norms, the cyclotomic ring and Laurent values in `T`.
//! - [`measures`]: cell measures with locally constant densities against Haar measure.
//! - [`fourier`]: additive characters, characteristic functionals and finite inversion.
//! - [`quasi`]: shell-density measures, shift cocycles, the product dichotomy and
//!   linear-transform densities.
//! - [`pdiff`]: the pseudo-differential operator and shifted-measure derivatives.
//! - [`weakdist`]: projective towers of finite-dimensional measures.
//! - [`oracle`]: brute-force reference computations used to cross-check the above.
//! - [`acceptance`]: the end-to-end acceptance criteria, runnable from tests or the CLI.

pub mod acceptance;
pub mod error;
pub mod fourier;
pub mod measures;
pub mod oracle;
pub mod padic;
pub mod pdiff;
pub mod quasi;
pub mod rational;
pub mod scalar;
pub mod weakdist;

pub use error::{Error, Result};
pub use rational::Q;
