//! Rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// `base^exp` for any integer exponent.
pub fn pow(base: u32, exp: i64) -> Q {
    let b = Q::from_integer(BigInt::from(base));
    if exp >= 0 {
        num_traits::pow(b, exp as usize)
    } else {
        num_traits::pow(b.recip(), (-exp) as usize)
    }
}

pub fn qpow(base: &Q, exp: i64) -> Q {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

/// Multiplicity of the prime `p` in a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u32) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (d, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = d;
        v += 1;
    }
}

/// Valuation of a nonzero rational at `p`.
pub fn rat_valuation(x: &Q, p: u32) -> i64 {
    int_valuation(x.numer(), p) - int_valuation(x.denom(), p)
}

/// Canonical text form `num/den`, always with a denominator.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(text: &str) -> Result<Q> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational: {t:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Modular inverse of `a` modulo `m` (gcd must be one).
pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one() || (-e.gcd.clone()).is_one());
    let inv = if e.gcd.is_negative() { -e.x } else { e.x };
    inv.mod_floor(m)
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-6/4").unwrap(), qf(-3, 2));
        assert_eq!(parse_q("7").unwrap(), q(7));
        assert_eq!(fmt_q(&q(0)), "0/1");
        assert_eq!(fmt_q(&qf(3, -6)), "-1/2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn valuations() {
        assert_eq!(rat_valuation(&q(12), 2), 2);
        assert_eq!(rat_valuation(&qf(3, 4), 2), -2);
        assert_eq!(rat_valuation(&qf(-3, 2), 3), 1);
        assert_eq!(pow(2, -3), qf(1, 8));
    }

    #[test]
    fn inverse_mod() {
        let inv = mod_inverse(&BigInt::from(3), &BigInt::from(8));
        assert_eq!(inv, BigInt::from(3));
        let inv = mod_inverse(&BigInt::from(-5), &BigInt::from(9));
        assert_eq!((inv * BigInt::from(-5)).mod_floor(&BigInt::from(9)), BigInt::from(1));
    }
}
