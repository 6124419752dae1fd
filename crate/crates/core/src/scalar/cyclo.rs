use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{fmt_q, Q};

use super::snorm::{s_norm, SNorm};

/// An element of `Q(ζ_{p^L})` in the power basis `1, ζ, …, ζ^{φ(p^L)-1}`.
///
/// Values are kept reduced modulo `Φ_{p^L}` and at the smallest level `L` that
/// holds them, so derived equality is equality in the field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cyclo {
    p: u32,
    level: u32,
    coeffs: Vec<Q>,
}

fn ppow(p: u32, k: u32) -> usize {
    (p as usize).pow(k)
}

fn phi(p: u32, k: u32) -> usize {
    if k == 0 {
        1
    } else {
        (p as usize - 1) * ppow(p, k - 1)
    }
}

impl Cyclo {
    pub fn from_q(p: u32, x: Q) -> Self {
        Self { p, level: 0, coeffs: vec![x] }
    }

    /// From power-basis coordinates at `level`; there must be exactly `φ(p^level)` of them.
    pub fn from_power_basis(p: u32, level: u32, coeffs: Vec<Q>) -> crate::error::Result<Self> {
        if coeffs.len() != phi(p, level) {
            return Err(crate::error::Error::Invalid(format!(
                "level {level} needs {} coefficients, got {}",
                phi(p, level),
                coeffs.len()
            )));
        }
        Ok(Self { p, level, coeffs }.normalized())
    }

    pub fn zero(p: u32) -> Self {
        Self::from_q(p, Q::zero())
    }

    pub fn one(p: u32) -> Self {
        Self::from_q(p, Q::one())
    }

    /// `ζ_{p^k}^m` for any integer `m`.
    pub fn root(p: u32, k: u32, m: i64) -> Self {
        let n = ppow(p, k);
        let mut ring = vec![Q::zero(); n];
        ring[m.rem_euclid(n as i64) as usize] = Q::one();
        Self::from_group_ring(p, k, ring)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Power-basis coordinates at the current level.
    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.level == 0 && self.coeffs[0].is_zero()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        (self.level == 0).then(|| &self.coeffs[0])
    }

    pub fn is_rational(&self) -> bool {
        self.level == 0
    }

    /// `max_i |c_i|_s`: an upper bound for `|x|_s`, exact when `x` is rational.
    pub fn norm_bound(&self, s: u32) -> SNorm {
        self.coeffs
            .iter()
            .map(|c| s_norm(c, s))
            .max()
            .unwrap_or(SNorm::Zero)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Self { p: self.p, level: self.level, coeffs }.normalized()
    }

    /// Multiply by `ζ_{p^k}^m`.
    pub fn mul_root(&self, k: u32, m: i64) -> Self {
        let level = self.level.max(k);
        let n = ppow(self.p, level) as i64;
        let shift = m * ppow(self.p, level - k) as i64;
        let lifted = self.group_ring(level);
        let mut ring = vec![Q::zero(); n as usize];
        for (e, c) in lifted.into_iter().enumerate() {
            if !c.is_zero() {
                ring[(e as i64 + shift).rem_euclid(n) as usize] += c;
            }
        }
        Self::from_group_ring(self.p, level, ring)
    }

    /// Coefficients as a vector of length `p^level` indexed by exponents of `ζ_{p^level}`.
    pub(crate) fn group_ring(&self, level: u32) -> Vec<Q> {
        debug_assert!(level >= self.level);
        let stride = ppow(self.p, level - self.level);
        let mut ring = vec![Q::zero(); ppow(self.p, level)];
        for (e, c) in self.coeffs.iter().enumerate() {
            ring[e * stride] = c.clone();
        }
        ring
    }

    /// Reduce a group-ring vector modulo `Φ_{p^level}` and normalize the level.
    pub(crate) fn from_group_ring(p: u32, level: u32, mut ring: Vec<Q>) -> Self {
        if level == 0 {
            return Self { p, level, coeffs: ring };
        }
        let h = ppow(p, level - 1);
        let f = phi(p, level);
        // x^e = -Σ_{i<p-1} x^{e-(p-1)h+ih} for e >= φ
        for e in (f..ring.len()).rev() {
            let c = std::mem::take(&mut ring[e]);
            if c.is_zero() {
                continue;
            }
            let base = e - (p as usize - 1) * h;
            for i in 0..(p as usize - 1) {
                ring[base + i * h] -= &c;
            }
        }
        ring.truncate(f);
        Self { p, level, coeffs: ring }.normalized()
    }

    fn normalized(mut self) -> Self {
        loop {
            if self.level == 0 {
                return self;
            }
            let p = self.p as usize;
            let drop = if self.level == 1 {
                self.coeffs.iter().skip(1).all(Zero::is_zero)
            } else {
                self.coeffs
                    .iter()
                    .enumerate()
                    .all(|(e, c)| e % p == 0 || c.is_zero())
            };
            if !drop {
                return self;
            }
            self.coeffs = self.coeffs.into_iter().step_by(p).collect();
            if self.level == 1 {
                self.coeffs.truncate(1);
            }
            self.level -= 1;
        }
    }

    fn combine(&self, other: &Cyclo, f: impl Fn(&Q, &Q) -> Q) -> Cyclo {
        assert_eq!(self.p, other.p, "cyclotomic values over different primes");
        let level = self.level.max(other.level);
        let a = self.lift(level);
        let b = other.lift(level);
        let coeffs = a.iter().zip(&b).map(|(x, y)| f(x, y)).collect();
        Cyclo { p: self.p, level, coeffs }.normalized()
    }

    /// Power-basis coordinates at a higher level (no reduction needed).
    fn lift(&self, level: u32) -> Vec<Q> {
        let stride = ppow(self.p, level - self.level);
        let mut out = vec![Q::zero(); phi(self.p, level)];
        for (e, c) in self.coeffs.iter().enumerate() {
            out[e * stride] = c.clone();
        }
        out
    }
}

impl Add<&Cyclo> for &Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub<&Cyclo> for &Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        self.combine(rhs, |a, b| a - b)
    }
}

impl Mul<&Cyclo> for &Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        assert_eq!(self.p, rhs.p, "cyclotomic values over different primes");
        if let Some(c) = self.as_rational() {
            return rhs.scale(c);
        }
        if let Some(c) = rhs.as_rational() {
            return self.scale(c);
        }
        let level = self.level.max(rhs.level);
        let n = ppow(self.p, level);
        let a = self.group_ring(level);
        let b = rhs.group_ring(level);
        let mut ring = vec![Q::zero(); n];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                ring[(i + j) % n] += x * y;
            }
        }
        Cyclo::from_group_ring(self.p, level, ring)
    }
}

impl Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        self.scale(&-Q::one())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Cyclo> for Cyclo {
            type Output = Cyclo;
            fn $m(self, rhs: Cyclo) -> Cyclo {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        -&self
    }
}

impl fmt::Display for Cyclo {
    /// Rationals print as `a/b`; other values as `c*z<N>^e` terms with `z<N>` a primitive `N`-th root.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_rational() {
            return f.write_str(&fmt_q(c));
        }
        let n = ppow(self.p, self.level);
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if e == 0 {
                f.write_str(&fmt_q(c))?;
            } else {
                write!(f, "{}*z{}^{}", fmt_q(c), n, e)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn mul_examples() {
        let m1 = Cyclo::root(2, 1, 1);
        assert_eq!(m1, Cyclo::from_q(2, q(-1)));
        assert_eq!(&m1 * &m1, Cyclo::one(2));
        let i = Cyclo::root(2, 2, 1);
        assert_eq!(&i * &i, Cyclo::from_q(2, q(-1)));
        assert_eq!(&i * &Cyclo::one(2), i);
    }

    #[test]
    fn roots_multiply_by_exponent() {
        for (p, k) in [(2u32, 4u32), (3, 2), (5, 1), (7, 1)] {
            let n = ppow(p, k) as i64;
            for a in 0..n {
                for b in [0, 1, n - 1, 3 % n] {
                    let lhs = &Cyclo::root(p, k, a) * &Cyclo::root(p, k, b);
                    assert_eq!(lhs, Cyclo::root(p, k, a + b));
                    assert_eq!(Cyclo::root(p, k, a).mul_root(k, b), lhs);
                }
            }
        }
    }

    #[test]
    fn root_sum_vanishes() {
        // Φ_{p^k}(ζ) = Σ_{i<p} ζ^{i p^{k-1}} = 0 for a primitive ζ
        for (p, k) in [(2u32, 3u32), (3, 2), (5, 1)] {
            let h = ppow(p, k - 1) as i64;
            let sum = (0..p as i64).fold(Cyclo::zero(p), |acc, i| &acc + &Cyclo::root(p, k, i * h));
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn level_drops_to_smallest() {
        let z = Cyclo::root(3, 3, 9);
        assert_eq!(z.level(), 1);
        assert_eq!(Cyclo::root(2, 3, 4), Cyclo::from_q(2, q(-1)));
    }

    #[test]
    fn norm_bound_examples() {
        let a = &Cyclo::root(2, 2, 1).scale(&q(3)) + &Cyclo::from_q(2, q(9));
        assert_eq!(a.norm_bound(3), SNorm::Pow(-1));
        assert_eq!(Cyclo::one(2).norm_bound(3), SNorm::ONE);
        assert_eq!(Cyclo::zero(2).norm_bound(3), SNorm::Zero);
        assert_eq!(Cyclo::root(3, 2, 5).norm_bound(2), SNorm::ONE);
    }

    #[test]
    fn display() {
        assert_eq!(Cyclo::from_q(2, qf(1, 2)).to_string(), "1/2");
        assert_eq!(Cyclo::root(2, 2, 1).to_string(), "1/1*z4^1");
        assert_eq!(Cyclo::root(2, 2, 3).to_string(), "-1/1*z4^1");
    }
}
