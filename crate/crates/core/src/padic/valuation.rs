use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{is_prime, mod_inverse, pow, rat_valuation, Q};

/// The standing pair of distinct primes: `p` for the field, `s` for the values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePair {
    pub p: u32,
    pub s: u32,
}

impl PrimePair {
    pub fn new(p: u32, s: u32) -> Result<Self> {
        for x in [p, s] {
            if !is_prime(x) {
                return Err(Error::NotPrime(x));
            }
        }
        if p == s {
            return Err(Error::EqualPrimes(p));
        }
        Ok(Self { p, s })
    }
}

impl fmt::Display for PrimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, s={})", self.p, self.s)
    }
}

/// A valuation in `Z ∪ {+∞}`; `Infinite` sorts above every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// `v >= k` with `+∞ >= k` for all `k`.
    pub fn at_least(self, k: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= k,
            Valuation::Infinite => true,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// The `p`-adic valuation of a rational.
pub fn ord(x: &Q, p: u32) -> Valuation {
    if x.is_zero() {
        Valuation::Infinite
    } else {
        Valuation::Finite(rat_valuation(x, p))
    }
}

/// Valuation of a nonzero rational; panics on zero.
pub fn ord_finite(x: &Q, p: u32) -> i64 {
    assert!(!x.is_zero(), "ord_finite of zero");
    rat_valuation(x, p)
}

/// Canonical representative of `x + p^k Z_p`: the unique rational in `[0, p^k)` whose
/// denominator is a power of `p` and which is congruent to `x` modulo `p^k Z_p`.
pub fn residue(x: &Q, p: u32, k: i64) -> Q {
    match ord(x, p) {
        Valuation::Infinite => return Q::zero(),
        Valuation::Finite(v) if v >= k => return Q::zero(),
        Valuation::Finite(_) => {}
    }
    let v = rat_valuation(x, p);
    let e = (-v).max(0);
    // y = x p^e has no p in its denominator
    let y = x * pow(p, e);
    let modulus = BigInt::from(p).pow((k + e) as u32);
    let (a, b) = (y.numer().clone(), y.denom().clone());
    let b_inv = mod_inverse(&b, &modulus);
    let mut m = (a * b_inv) % &modulus;
    if m.is_negative() {
        m += &modulus;
    }
    Q::from_integer(m) * pow(p, -e)
}

/// The `p`-adic fractional part `{x}_p`: the rational in `[0,1)` with `p`-power
/// denominator that differs from `x` by an element of `Z_p`.
pub fn fractional_part(x: &Q, p: u32) -> Q {
    residue(x, p, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn ord_examples() {
        assert_eq!(ord(&q(12), 2), Valuation::Finite(2));
        assert_eq!(ord(&qf(3, 4), 2), Valuation::Finite(-2));
        assert_eq!(ord(&q(0), 2), Valuation::Infinite);
        assert!(Valuation::Infinite > Valuation::Finite(1_000_000));
    }

    #[test]
    fn fractional_part_examples() {
        assert_eq!(fractional_part(&qf(7, 8), 2), qf(7, 8));
        assert_eq!(fractional_part(&qf(5, 2), 2), qf(1, 2));
        assert_eq!(fractional_part(&q(3), 2), q(0));
        // denominators coprime to p are units
        assert_eq!(fractional_part(&qf(1, 3), 2), q(0));
        let x = qf(5, 2);
        assert!(ord(&(&x - fractional_part(&x, 2)), 2).at_least(0));
    }

    #[test]
    fn fractional_part_with_mixed_denominator() {
        // 1/6 = 1/(2*3); {1/6}_2 = 1/2 since 1/6 - 1/2 = -1/3 in Z_2
        assert_eq!(fractional_part(&qf(1, 6), 2), qf(1, 2));
        // 1/12 in Q_2: 1/12 - r must lie in Z_2 with r in [0,1) of denominator 4
        let r = fractional_part(&qf(1, 12), 2);
        assert!(ord(&(qf(1, 12) - &r), 2).at_least(0));
        assert!(r >= q(0) && r < q(1));
        assert_eq!(r.denom() % 4u32, BigInt::from(0));
    }

    #[test]
    fn residue_is_canonical() {
        assert_eq!(residue(&q(5), 2, 2), q(1));
        assert_eq!(residue(&q(-1), 3, 2), q(8));
        assert_eq!(residue(&qf(1, 2), 2, -1), q(0));
        assert_eq!(residue(&qf(3, 4), 2, -1), qf(1, 4));
    }

    #[test]
    fn prime_pair_validation() {
        assert!(PrimePair::new(2, 3).is_ok());
        assert_eq!(PrimePair::new(2, 2), Err(Error::EqualPrimes(2)));
        assert_eq!(PrimePair::new(4, 3), Err(Error::NotPrime(4)));
    }
}
