//! Exact arithmetic in `Q_p` at desk scale.
//!
//! Scalars are plain rationals; the prime is carried alongside. Balls are stored
//! with an integer radius exponent `k` (radius `p^{-k}`) and a canonical center,
//! and finite unions of balls are kept in a unique canonical form.

mod ball;
mod clopen;
mod shell;
mod valuation;

pub use ball::Ball;
pub use clopen::ClopenSet;
pub use shell::{shell_index, Shell, ShellSystem};
pub use valuation::{fractional_part, ord, ord_finite, residue, PrimePair, Valuation};
