use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;

use crate::rational::{fmt_q, pow, Q};

use super::valuation::{ord, residue};

/// A product ball `{y : ord(y_i - c_i) >= k_i for all i}` in `Q_p^n`.
///
/// The center is kept canonical (each coordinate reduced modulo `p^{k_i} Z_p`), so
/// structural equality is set equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    p: u32,
    center: Vec<Q>,
    radius_exp: Vec<i64>,
}

impl Ball {
    pub fn new(p: u32, center: Vec<Q>, radius_exp: Vec<i64>) -> Self {
        assert_eq!(center.len(), radius_exp.len(), "center and radius dimensions differ");
        assert!(!center.is_empty(), "balls need dimension at least one");
        let center = center
            .iter()
            .zip(&radius_exp)
            .map(|(c, &k)| residue(c, p, k))
            .collect();
        Self { p, center, radius_exp }
    }

    /// One-dimensional ball `B(c, k)`.
    pub fn new1(p: u32, center: Q, k: i64) -> Self {
        Self::new(p, vec![center], vec![k])
    }

    /// `Z_p^n`.
    pub fn unit(p: u32, dim: usize) -> Self {
        Self::new(p, vec![Q::from_integer(BigInt::from(0)); dim], vec![0; dim])
    }

    /// `p^k Z_p` in every coordinate.
    pub fn centered(p: u32, dim: usize, k: i64) -> Self {
        Self::new(p, vec![Q::from_integer(BigInt::from(0)); dim], vec![k; dim])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[Q] {
        &self.center
    }

    pub fn radius_exp(&self) -> &[i64] {
        &self.radius_exp
    }

    pub fn contains_point(&self, x: &[Q]) -> bool {
        assert_eq!(x.len(), self.dim(), "point dimension");
        self.center
            .iter()
            .zip(&self.radius_exp)
            .zip(x)
            .all(|((c, &k), xi)| ord(&(xi - c), self.p).at_least(k))
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Ball) -> bool {
        self.radius_exp.iter().zip(&other.radius_exp).all(|(a, b)| a <= b)
            && self.contains_point(&other.center)
    }

    pub fn is_disjoint(&self, other: &Ball) -> bool {
        self.intersect(other).is_none()
    }

    /// Intersection of two product balls; coordinatewise the factors are nested or disjoint.
    pub fn intersect(&self, other: &Ball) -> Option<Ball> {
        let mut center = Vec::with_capacity(self.dim());
        let mut exps = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let (a, b) = (self.factor(i), other.factor(i));
            if a.contains(&b) {
                center.push(b.center[0].clone());
                exps.push(b.radius_exp[0]);
            } else if b.contains(&a) {
                center.push(a.center[0].clone());
                exps.push(a.radius_exp[0]);
            } else {
                return None;
            }
        }
        Some(Ball { p: self.p, center, radius_exp: exps })
    }

    /// Normalized Haar measure `p^{-Σ k_i}`.
    pub fn haar(&self) -> Q {
        pow(self.p, -self.radius_exp.iter().sum::<i64>())
    }

    /// The one-dimensional factor in coordinate `i`.
    pub fn factor(&self, i: usize) -> Ball {
        Ball {
            p: self.p,
            center: vec![self.center[i].clone()],
            radius_exp: vec![self.radius_exp[i]],
        }
    }

    /// Cartesian product `self × other`.
    pub fn times(&self, other: &Ball) -> Ball {
        assert_eq!(self.p, other.p);
        let mut center = self.center.clone();
        center.extend(other.center.iter().cloned());
        let mut exps = self.radius_exp.clone();
        exps.extend(other.radius_exp.iter().copied());
        Ball { p: self.p, center, radius_exp: exps }
    }

    /// Coordinates `range` as a ball of lower dimension.
    pub fn project(&self, range: std::ops::Range<usize>) -> Ball {
        Ball {
            p: self.p,
            center: self.center[range.clone()].to_vec(),
            radius_exp: self.radius_exp[range].to_vec(),
        }
    }

    /// The `p` sub-balls one level finer in coordinate `i`.
    pub fn children(&self, i: usize) -> Vec<Ball> {
        let k = self.radius_exp[i];
        let step = pow(self.p, k);
        (0..self.p)
            .map(|t| {
                let mut center = self.center.clone();
                center[i] = &center[i] + &step * Q::from_integer(BigInt::from(t));
                let mut exps = self.radius_exp.clone();
                exps[i] = k + 1;
                Ball::new(self.p, center, exps)
            })
            .collect()
    }

    /// The enclosing ball one level coarser in coordinate `i`.
    pub fn parent(&self, i: usize) -> Ball {
        let mut exps = self.radius_exp.clone();
        exps[i] -= 1;
        Ball::new(self.p, self.center.clone(), exps)
    }

    pub fn translate(&self, a: &[Q]) -> Ball {
        let center = self.center.iter().zip(a).map(|(c, t)| c + t).collect();
        Ball::new(self.p, center, self.radius_exp.clone())
    }

    /// All sub-balls with the given radius exponents (each at least the current one).
    pub fn refine_to(&self, levels: &[i64]) -> Vec<Ball> {
        let mut out = vec![self.clone()];
        for (i, &target) in levels.iter().enumerate() {
            assert!(target >= self.radius_exp[i], "refinement must be finer");
            for _ in self.radius_exp[i]..target {
                out = out.iter().flat_map(|b| b.children(i)).collect();
            }
        }
        out
    }

    /// `self ∖ other` as a list of pairwise disjoint balls.
    pub fn difference(&self, other: &Ball) -> Vec<Ball> {
        let Some(inner) = self.intersect(other) else {
            return vec![self.clone()];
        };
        let mut out = Vec::new();
        // Peel one coordinate at a time: points agreeing with `inner` on coordinates
        // before `i` but leaving it at coordinate `i`.
        for i in 0..self.dim() {
            let outer_i = self.factor(i);
            let inner_i = inner.factor(i);
            for piece in difference_1d(&outer_i, &inner_i) {
                let mut center = inner.center[..i].to_vec();
                let mut exps = inner.radius_exp[..i].to_vec();
                center.push(piece.center[0].clone());
                exps.push(piece.radius_exp[0]);
                center.extend(self.center[i + 1..].iter().cloned());
                exps.extend(self.radius_exp[i + 1..].iter().copied());
                out.push(Ball { p: self.p, center, radius_exp: exps });
            }
        }
        out
    }
}

/// `outer ∖ inner` for nested one-dimensional balls: the siblings along the path down.
fn difference_1d(outer: &Ball, inner: &Ball) -> Vec<Ball> {
    let mut out = Vec::new();
    let mut cur = outer.clone();
    while cur.radius_exp[0] < inner.radius_exp[0] {
        let mut next = None;
        for child in cur.children(0) {
            if child.contains(inner) {
                next = Some(child);
            } else {
                out.push(child);
            }
        }
        cur = next.expect("inner ball lies inside outer");
    }
    out
}

impl Ord for Ball {
    /// Radius exponents in descending lexicographic order (fine balls first), then centers.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .radius_exp
            .cmp(&self.radius_exp)
            .then_with(|| self.center.cmp(&other.center))
            .then_with(|| self.p.cmp(&other.p))
    }
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("B(")?;
        for (i, (c, k)) in self.center.iter().zip(&self.radius_exp).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", fmt_q(c), k)?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn center_is_canonical() {
        let a = Ball::new1(2, q(5), 2);
        let b = Ball::new1(2, q(1), 2);
        assert_eq!(a, b);
        assert_eq!(Ball::new1(2, qf(7, 2), 0), Ball::new1(2, qf(1, 2), 0));
    }

    #[test]
    fn haar_and_children() {
        let z2 = Ball::unit(2, 1);
        assert_eq!(z2.haar(), q(1));
        let kids = z2.children(0);
        assert_eq!(kids.len(), 2);
        assert!(kids.iter().all(|k| z2.contains(k) && k.haar() == qf(1, 2)));
        assert!(kids[0].is_disjoint(&kids[1]));
        assert_eq!(kids[1].parent(0), z2);
        assert_eq!(Ball::new1(3, q(0), -1).haar(), q(3));
    }

    #[test]
    fn ultrametric_dichotomy() {
        let big = Ball::new1(3, q(1), 1);
        let small = Ball::new1(3, q(4), 2);
        assert_eq!(big.intersect(&small), Some(small.clone()));
        assert!(Ball::new1(3, q(2), 1).is_disjoint(&small));
    }

    #[test]
    fn difference_partitions() {
        let outer = Ball::unit(2, 2);
        let inner = Ball::new(2, vec![q(1), q(2)], vec![2, 3]);
        let pieces = outer.difference(&inner);
        let total: Q = pieces.iter().map(Ball::haar).sum();
        assert_eq!(total + inner.haar(), q(1));
        for (i, a) in pieces.iter().enumerate() {
            assert!(a.is_disjoint(&inner));
            for b in &pieces[i + 1..] {
                assert!(a.is_disjoint(b));
            }
        }
    }

    #[test]
    fn ordering_puts_fine_first() {
        let mut v = [Ball::new1(2, q(1), 1), Ball::unit(2, 1), Ball::new1(2, q(0), 1)];
        v.sort();
        assert_eq!(v[0], Ball::new1(2, q(0), 1));
        assert_eq!(v[2], Ball::unit(2, 1));
    }
}
