//! The value side: `s`-adic norms, exact cyclotomic arithmetic and Laurent values in `T`.

mod cyclo;
mod laurent;
mod snorm;

pub use cyclo::Cyclo;
pub use laurent::{tail_sum, BParam, Direction, LaurentT, Tail, TailValue};
pub use snorm::{s_norm, SNorm};
