use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{Ball, ClopenSet};
use crate::rational::Q;
use crate::scalar::Cyclo;

/// Values a step function may take.
pub trait Coefficient: Clone + PartialEq + Debug {
    fn from_q(p: u32, x: Q) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn scale(&self, c: &Q) -> Self;
}

impl Coefficient for Q {
    fn from_q(_: u32, x: Q) -> Self {
        x
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: &Q) -> Self {
        self * c
    }
}

impl Coefficient for Cyclo {
    fn from_q(p: u32, x: Q) -> Self {
        Cyclo::from_q(p, x)
    }
    fn is_zero(&self) -> bool {
        Cyclo::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: &Q) -> Self {
        Cyclo::scale(self, c)
    }
}

/// A locally constant function with compact support, zero off its pieces.
///
/// Pieces are disjoint and stored canonically: zero values are dropped, each level
/// set is written in canonical clopen form and the pieces are sorted by ball.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<V: Coefficient> {
    p: u32,
    dim: usize,
    pieces: Vec<(Ball, V)>,
}

impl<V: Coefficient> StepFunction<V> {
    pub fn zero(p: u32, dim: usize) -> Self {
        Self { p, dim, pieces: Vec::new() }
    }

    /// Pieces must be pairwise disjoint.
    pub fn from_disjoint(p: u32, dim: usize, pieces: Vec<(Ball, V)>) -> Result<Self> {
        for (i, (a, _)) in pieces.iter().enumerate() {
            check_ball(p, dim, a)?;
            if let Some((b, _)) = pieces[i + 1..].iter().find(|(b, _)| !a.is_disjoint(b)) {
                return Err(Error::OverlappingCells(format!("{a} and {b}")));
            }
        }
        Ok(Self::canonical(p, dim, pieces))
    }

    /// Pieces may overlap; values add where they do.
    pub fn from_overlapping(p: u32, dim: usize, pieces: Vec<(Ball, V)>) -> Result<Self> {
        let mut acc: Vec<(Ball, V)> = Vec::new();
        for (b, v) in pieces {
            check_ball(p, dim, &b)?;
            let mut rest = vec![b.clone()];
            let mut next = Vec::with_capacity(acc.len() + 1);
            for (c, w) in acc {
                let Some(inter) = c.intersect(&b) else {
                    next.push((c, w));
                    continue;
                };
                next.extend(c.difference(&b).into_iter().map(|piece| (piece, w.clone())));
                rest = rest.iter().flat_map(|r| r.difference(&inter)).collect();
                next.push((inter, w.plus(&v)));
            }
            next.extend(rest.into_iter().map(|r| (r, v.clone())));
            acc = next;
        }
        Ok(Self::canonical(p, dim, acc))
    }

    pub fn indicator(set: &ClopenSet) -> Self {
        let one = V::from_q(set.p(), Q::one());
        let pieces = set.balls().iter().map(|b| (b.clone(), one.clone())).collect();
        Self::canonical(set.p(), set.dim(), pieces)
    }

    fn canonical(p: u32, dim: usize, pieces: Vec<(Ball, V)>) -> Self {
        let mut groups: Vec<(V, Vec<Ball>)> = Vec::new();
        for (b, v) in pieces {
            if v.is_zero() {
                continue;
            }
            match groups.iter_mut().find(|(w, _)| *w == v) {
                Some(g) => g.1.push(b),
                None => groups.push((v, vec![b])),
            }
        }
        let mut out: Vec<(Ball, V)> = groups
            .into_iter()
            .flat_map(|(v, balls)| {
                let set = ClopenSet::canonicalize(p, dim, balls);
                set.balls()
                    .iter()
                    .map(|b| (b.clone(), v.clone()))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Self { p, dim, pieces: out }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[(Ball, V)] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn value_at(&self, x: &[Q]) -> V {
        self.pieces
            .iter()
            .find(|(b, _)| b.contains_point(x))
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| V::from_q(self.p, Q::zero()))
    }

    pub fn support(&self) -> ClopenSet {
        let balls = self.pieces.iter().map(|(b, _)| b.clone()).collect();
        ClopenSet::canonicalize(self.p, self.dim, balls)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let pieces = self.pieces.iter().map(|(b, v)| (b.clone(), v.scale(c))).collect();
        Self::canonical(self.p, self.dim, pieces)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "step function dimension");
        let mut all = self.pieces.clone();
        all.extend(other.pieces.iter().cloned());
        Self::from_overlapping(self.p, self.dim, all).expect("pieces already validated")
    }

    /// `x ↦ f(x - a)`.
    pub fn translate(&self, a: &[Q]) -> Self {
        let pieces = self.pieces.iter().map(|(b, v)| (b.translate(a), v.clone())).collect();
        Self::canonical(self.p, self.dim, pieces)
    }

    /// Largest radius exponent per coordinate over all pieces.
    pub fn finest_levels(&self) -> Option<Vec<i64>> {
        let mut it = self.pieces.iter().map(|(b, _)| b.radius_exp().to_vec());
        let first = it.next()?;
        Some(it.fold(first, |acc, k| acc.iter().zip(&k).map(|(a, b)| *a.max(b)).collect()))
    }

    pub fn map<W: Coefficient>(&self, f: impl Fn(&V) -> W) -> StepFunction<W> {
        let pieces = self.pieces.iter().map(|(b, v)| (b.clone(), f(v))).collect();
        StepFunction::<W>::canonical(self.p, self.dim, pieces)
    }
}

impl StepFunction<Q> {
    /// Pointwise product with a rational step function.
    pub fn mul(&self, other: &StepFunction<Q>) -> StepFunction<Q> {
        let pieces = self
            .pieces
            .iter()
            .flat_map(|(a, x)| {
                other
                    .pieces
                    .iter()
                    .filter_map(move |(b, y)| a.intersect(b).map(|c| (c, x * y)))
            })
            .collect();
        Self::canonical(self.p, self.dim, pieces)
    }
}

fn check_ball(p: u32, dim: usize, b: &Ball) -> Result<()> {
    if b.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
    }
    if b.p() != p {
        return Err(Error::PrimeMismatch(p, b.p()));
    }
    Ok(())
}
