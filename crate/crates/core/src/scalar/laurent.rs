use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, qpow, rat_valuation, Q};

/// Sign of the `T` exponent in a geometric tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Neg,
    Pos,
}

impl Direction {
    pub fn sign(self) -> i64 {
        match self {
            Direction::Neg => -1,
            Direction::Pos => 1,
        }
    }
}

/// `Σ_{k >= k0} c · u^k · T^{dir·k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tail {
    pub c: Q,
    pub u: Q,
    pub k0: i64,
    pub dir: Direction,
}

/// The evaluation point `T = s^{-b}`: its norm `|T|_s = s^{t_exp}` and optionally its exact value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BParam {
    pub t_exp: Q,
    pub t: Option<Q>,
}

impl BParam {
    /// A concrete rational `T`; its norm is read off exactly.
    pub fn at(t: Q, s: u32) -> Result<Self> {
        if t.is_zero() {
            return Err(Error::Invalid("T must be nonzero".into()));
        }
        let t_exp = Q::from_integer((-rat_valuation(&t, s)).into());
        Ok(Self { t_exp, t: Some(t) })
    }

    /// Only the norm `|T|_s = s^{t_exp}`; results stay symbolic.
    pub fn norm_only(t_exp: Q) -> Self {
        Self { t_exp, t: None }
    }
}

/// Outcome of summing one geometric tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailValue {
    /// Converges; the exact value when `T` is known.
    Convergent(Option<Q>),
    Divergent,
}

impl Tail {
    /// `log_s |u T^dir|_s`; the tail converges iff this is negative.
    pub fn ratio_exp(&self, at: &BParam, s: u32) -> Option<Q> {
        if self.u.is_zero() {
            return None;
        }
        let u_exp = Q::from_integer((-rat_valuation(&self.u, s)).into());
        Some(u_exp + Q::from_integer(self.dir.sign().into()) * &at.t_exp)
    }

    pub fn converges(&self, at: &BParam, s: u32) -> bool {
        self.c.is_zero() || self.ratio_exp(at, s).is_none_or(|e| e.is_negative())
    }

    pub fn sum(&self, at: &BParam, s: u32) -> TailValue {
        tail_sum(&self.c, &self.u, self.k0, self.dir, at, s)
    }

    /// The single term at index `k`, as `(coefficient, T exponent)`.
    pub fn term(&self, k: i64) -> (Q, i64) {
        (&self.c * qpow(&self.u, k), self.dir.sign() * k)
    }

    /// Split off the first `n` terms as monomials; the rest stays a tail.
    pub fn split(&self, n: usize) -> (LaurentT, Tail) {
        let mut head = LaurentT::zero();
        for k in self.k0..self.k0 + n as i64 {
            let (c, e) = self.term(k);
            head.add_monomial(c, e);
        }
        let rest = Tail { k0: self.k0 + n as i64, ..self.clone() };
        (head, rest)
    }
}

/// Closed form of `Σ_{k>=k0} c (u T^dir)^k = c r^{k0} / (1 - r)` when `|r|_s < 1`.
pub fn tail_sum(c: &Q, u: &Q, k0: i64, dir: Direction, at: &BParam, s: u32) -> TailValue {
    let tail = Tail { c: c.clone(), u: u.clone(), k0, dir };
    if c.is_zero() {
        return TailValue::Convergent(Some(Q::zero()));
    }
    if !tail.converges(at, s) {
        return TailValue::Divergent;
    }
    let Some(t) = &at.t else {
        return TailValue::Convergent(None);
    };
    if u.is_zero() {
        let v = if k0 == 0 { c.clone() } else { Q::zero() };
        return TailValue::Convergent(Some(v));
    }
    let r = u * qpow(t, dir.sign());
    TailValue::Convergent(Some(c * qpow(&r, k0) / (Q::one() - r)))
}

/// A Laurent polynomial in `T` plus finitely many geometric tails.
///
/// Tails sharing `(u, dir)` are merged, so two values are equal exactly when their
/// difference has no tails and no monomials.
#[derive(Clone, Debug, Default)]
pub struct LaurentT {
    monomials: BTreeMap<i64, Q>,
    tails: Vec<Tail>,
}

impl LaurentT {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(c: Q, e: i64) -> Self {
        let mut out = Self::zero();
        out.add_monomial(c, e);
        out
    }

    pub fn tail(tail: Tail) -> Self {
        Self { monomials: BTreeMap::new(), tails: vec![tail] }.canonical()
    }

    pub fn monomials(&self) -> &BTreeMap<i64, Q> {
        &self.monomials
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty() && self.tails.is_empty()
    }

    pub fn add_monomial(&mut self, c: Q, e: i64) {
        if c.is_zero() {
            return;
        }
        let slot = self.monomials.entry(e).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.monomials.remove(&e);
        }
    }

    pub fn scale(&self, a: &Q) -> Self {
        if a.is_zero() {
            return Self::zero();
        }
        let monomials = self.monomials.iter().map(|(e, c)| (*e, c * a)).collect();
        let tails = self
            .tails
            .iter()
            .map(|t| Tail { c: &t.c * a, ..t.clone() })
            .collect();
        Self { monomials, tails }
    }

    /// Expand every tail by `n` terms; returns the expanded part (a polynomial) and the remainder.
    pub fn expand(&self, n: usize) -> (LaurentT, LaurentT) {
        let mut head = LaurentT { monomials: self.monomials.clone(), tails: Vec::new() };
        let mut rest = LaurentT::zero();
        for t in &self.tails {
            let (h, r) = t.split(n);
            head = head + h;
            rest.tails.push(r);
        }
        (head, rest)
    }

    /// Tails that fail to converge at `at`.
    pub fn divergent_tails(&self, at: &BParam, s: u32) -> Vec<&Tail> {
        self.tails.iter().filter(|t| !t.converges(at, s)).collect()
    }

    /// Exact value at `at`; `Ok(None)` if `T` is symbolic.
    pub fn evaluate(&self, at: &BParam, s: u32) -> Result<Option<Q>> {
        if let Some(t) = self.divergent_tails(at, s).first() {
            return Err(Error::Divergent { ratio: t.u.clone(), dir: t.dir.sign() as i8 });
        }
        let Some(tv) = &at.t else {
            return Ok(None);
        };
        let mut total = Q::zero();
        for (e, c) in &self.monomials {
            total += c * qpow(tv, *e);
        }
        for t in &self.tails {
            match t.sum(at, s) {
                TailValue::Convergent(Some(v)) => total += v,
                _ => unreachable!("convergence checked above"),
            }
        }
        Ok(Some(total))
    }

    /// Merge tails by `(u, dir)`, reindexing each group to its largest start.
    fn canonical(mut self) -> Self {
        let mut groups: BTreeMap<(Q, Direction), (i64, Vec<Tail>)> = BTreeMap::new();
        for t in std::mem::take(&mut self.tails) {
            if t.c.is_zero() {
                continue;
            }
            if t.u.is_zero() {
                if t.k0 <= 0 {
                    // only the k = 0 term survives (0^0 = 1); negative indices are excluded
                    self.add_monomial(t.c.clone(), 0);
                }
                continue;
            }
            let g = groups.entry((t.u.clone(), t.dir)).or_insert((t.k0, Vec::new()));
            g.0 = g.0.max(t.k0);
            g.1.push(t);
        }
        for ((u, dir), (k_max, members)) in groups {
            let mut c_total = Q::zero();
            for t in members {
                let (head, _) = t.split((k_max - t.k0) as usize);
                for (e, c) in head.monomials {
                    self.add_monomial(c, e);
                }
                c_total += t.c;
            }
            if !c_total.is_zero() {
                self.tails.push(Tail { c: c_total, u, k0: k_max, dir });
            }
        }
        self
    }
}

impl PartialEq for LaurentT {
    fn eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_zero()
    }
}

impl Add for LaurentT {
    type Output = LaurentT;
    fn add(mut self, rhs: LaurentT) -> LaurentT {
        for (e, c) in rhs.monomials {
            self.add_monomial(c, e);
        }
        self.tails.extend(rhs.tails);
        self.canonical()
    }
}

impl Neg for LaurentT {
    type Output = LaurentT;
    fn neg(self) -> LaurentT {
        self.scale(&-Q::one())
    }
}

impl Sub for LaurentT {
    type Output = LaurentT;
    fn sub(self, rhs: LaurentT) -> LaurentT {
        self + (-rhs)
    }
}

impl fmt::Display for LaurentT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0/1");
        }
        let mut parts: Vec<String> = self
            .monomials
            .iter()
            .map(|(e, c)| match e {
                0 => fmt_q(c),
                _ => format!("{}*T^{}", fmt_q(c), e),
            })
            .collect();
        for t in &self.tails {
            let sign = if t.dir == Direction::Pos { "" } else { "-" };
            parts.push(format!(
                "sum_{{k>={}}} {}*({})^k*T^{}k",
                t.k0,
                fmt_q(&t.c),
                fmt_q(&t.u),
                sign
            ));
        }
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn tail_sum_examples() {
        let at = BParam::at(q(1), 3).unwrap();
        assert_eq!(
            tail_sum(&q(1), &q(6), 1, Direction::Pos, &at, 3),
            TailValue::Convergent(Some(qf(-6, 5)))
        );
        let wide = BParam::norm_only(q(1));
        assert_eq!(
            tail_sum(&q(1), &qf(1, 3), 0, Direction::Pos, &wide, 3),
            TailValue::Divergent
        );
        assert_eq!(
            tail_sum(&q(0), &qf(1, 3), 0, Direction::Pos, &wide, 3),
            TailValue::Convergent(Some(q(0)))
        );
        assert_eq!(
            tail_sum(&q(1), &q(6), 1, Direction::Pos, &BParam::norm_only(q(0)), 3),
            TailValue::Convergent(None)
        );
    }

    #[test]
    fn reindexed_tails_merge() {
        let t = |k0| Tail { c: q(2), u: q(3), k0, dir: Direction::Neg };
        let a = LaurentT::tail(t(0));
        let (head, rest) = t(0).split(3);
        let b = head + LaurentT::tail(rest);
        assert_eq!(a, b);
        assert!((a.clone() - b).is_zero());
        assert_ne!(a, LaurentT::tail(t(1)));
    }

    #[test]
    fn expansion_matches_closed_form() {
        let at = BParam::at(qf(1, 2), 3).unwrap();
        let x = LaurentT::tail(Tail { c: q(5), u: q(3), k0: -2, dir: Direction::Pos })
            + LaurentT::monomial(q(7), -1);
        let full = x.evaluate(&at, 3).unwrap().unwrap();
        for n in 0..30 {
            let (head, rest) = x.expand(n);
            let h = head.evaluate(&at, 3).unwrap().unwrap();
            let r = rest.evaluate(&at, 3).unwrap().unwrap();
            assert_eq!(h + r, full);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let x = LaurentT::tail(Tail { c: q(1), u: qf(1, 3), k0: 0, dir: Direction::Pos });
        let at = BParam::at(q(1), 3).unwrap();
        assert!(matches!(x.evaluate(&at, 3), Err(Error::Divergent { .. })));
    }
}
