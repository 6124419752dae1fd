use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use num_traits::Zero;

use crate::rational::{pow, rat_valuation, Q};

/// An `s`-adic absolute value: either `0` or `s^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SNorm {
    Zero,
    Pow(i64),
}

impl SNorm {
    pub const ONE: SNorm = SNorm::Pow(0);

    pub fn to_q(self, s: u32) -> Q {
        match self {
            SNorm::Zero => Q::zero(),
            SNorm::Pow(e) => pow(s, e),
        }
    }

    /// Text form `0` or `s^e`, e.g. `3^-2`.
    pub fn render(self, s: u32) -> String {
        match self {
            SNorm::Zero => "0".into(),
            SNorm::Pow(e) => format!("{s}^{e}"),
        }
    }

    pub fn exponent(self) -> Option<i64> {
        match self {
            SNorm::Zero => None,
            SNorm::Pow(e) => Some(e),
        }
    }
}

impl Ord for SNorm {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (SNorm::Zero, SNorm::Zero) => Ordering::Equal,
            (SNorm::Zero, _) => Ordering::Less,
            (_, SNorm::Zero) => Ordering::Greater,
            (SNorm::Pow(a), SNorm::Pow(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for SNorm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for SNorm {
    type Output = SNorm;

    // norms multiply by adding exponents
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: SNorm) -> SNorm {
        match (self, rhs) {
            (SNorm::Pow(a), SNorm::Pow(b)) => SNorm::Pow(a + b),
            _ => SNorm::Zero,
        }
    }
}

impl fmt::Display for SNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SNorm::Zero => f.write_str("0"),
            SNorm::Pow(e) => write!(f, "s^{e}"),
        }
    }
}

/// `|x|_s = s^{-ord_s(x)}`.
pub fn s_norm(x: &Q, s: u32) -> SNorm {
    if x.is_zero() {
        SNorm::Zero
    } else {
        SNorm::Pow(-rat_valuation(x, s))
    }
}
