use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::rational::Q;

use super::ball::Ball;

/// A finite union of product balls, stored in a unique canonical form.
///
/// In one dimension the canonical form is the set of maximal balls. In higher
/// dimension the set is sliced along the first coordinate: first-coordinate regions
/// with the same fiber are grouped, each region is written with maximal balls and
/// each fiber is canonical by recursion. Two sets are equal iff their forms agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    p: u32,
    dim: usize,
    balls: Vec<Ball>,
}

impl ClopenSet {
    pub fn empty(p: u32, dim: usize) -> Self {
        Self { p, dim, balls: Vec::new() }
    }

    pub fn from_ball(ball: Ball) -> Self {
        Self::canonicalize(ball.p(), ball.dim(), vec![ball])
    }

    /// The canonical form of the union of `balls` (which may overlap).
    pub fn canonicalize(p: u32, dim: usize, balls: Vec<Ball>) -> Self {
        for b in &balls {
            assert_eq!(b.dim(), dim, "ball dimension");
            assert_eq!(b.p(), p, "ball prime");
        }
        let mut balls = canonical_balls(dim, balls);
        balls.sort();
        Self { p, dim, balls }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn haar(&self) -> Q {
        self.balls.iter().map(Ball::haar).fold(Q::zero(), |a, b| a + b)
    }

    pub fn contains_point(&self, x: &[Q]) -> bool {
        self.balls.iter().any(|b| b.contains_point(x))
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        let mut all = self.balls.clone();
        all.extend(other.balls.iter().cloned());
        Self::canonicalize(self.p, self.dim, all)
    }

    pub fn intersection(&self, other: &ClopenSet) -> ClopenSet {
        let pieces = self
            .balls
            .iter()
            .flat_map(|a| other.balls.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        Self::canonicalize(self.p, self.dim, pieces)
    }

    pub fn intersect_ball(&self, ball: &Ball) -> ClopenSet {
        let pieces = self.balls.iter().filter_map(|a| a.intersect(ball)).collect();
        Self::canonicalize(self.p, self.dim, pieces)
    }

    pub fn difference(&self, other: &ClopenSet) -> ClopenSet {
        let pieces = subtract_all(self.balls.clone(), &other.balls);
        Self::canonicalize(self.p, self.dim, pieces)
    }

    /// `bound ∖ self`.
    pub fn complement_in(&self, bound: &Ball) -> ClopenSet {
        ClopenSet::from_ball(bound.clone()).difference(self)
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        subtract_all(self.balls.clone(), &other.balls).is_empty()
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> bool {
        self.balls
            .iter()
            .all(|a| other.balls.iter().all(|b| a.is_disjoint(b)))
    }

    pub fn translate(&self, a: &[Q]) -> ClopenSet {
        let balls = self.balls.iter().map(|b| b.translate(a)).collect();
        Self::canonicalize(self.p, self.dim, balls)
    }

    /// Cartesian product.
    pub fn times(&self, other: &ClopenSet) -> ClopenSet {
        let balls = self
            .balls
            .iter()
            .flat_map(|a| other.balls.iter().map(move |b| a.times(b)))
            .collect();
        Self::canonicalize(self.p, self.dim + other.dim, balls)
    }
}

/// Remove every ball of `cut` from the disjoint-or-not list `pieces`.
fn subtract_all(mut pieces: Vec<Ball>, cut: &[Ball]) -> Vec<Ball> {
    for c in cut {
        pieces = pieces.iter().flat_map(|a| a.difference(c)).collect();
    }
    pieces
}

fn canonical_balls(dim: usize, balls: Vec<Ball>) -> Vec<Ball> {
    if balls.is_empty() {
        return balls;
    }
    if dim == 1 {
        return maximal_balls_1d(balls);
    }
    let firsts: Vec<Ball> = balls.iter().map(|b| b.factor(0)).collect();
    let atoms = laminar_atoms(&firsts);

    // fiber (canonical, dimension dim-1) -> first-coordinate atoms carrying it
    let mut groups: BTreeMap<Vec<Ball>, Vec<Ball>> = BTreeMap::new();
    for atom in atoms {
        let fiber: Vec<Ball> = balls
            .iter()
            .zip(&firsts)
            .filter(|(_, f)| f.contains(&atom))
            .map(|(b, _)| b.project(1..dim))
            .collect();
        let mut fiber = canonical_balls(dim - 1, fiber);
        if fiber.is_empty() {
            continue;
        }
        fiber.sort();
        groups.entry(fiber).or_default().push(atom);
    }

    let mut out = Vec::new();
    for (fiber, atoms) in groups {
        for a in maximal_balls_1d(atoms) {
            out.extend(fiber.iter().map(|f| a.times(f)));
        }
    }
    out
}

/// Disjoint one-dimensional balls refining a laminar family so that every member
/// is a union of atoms.
fn laminar_atoms(family: &[Ball]) -> Vec<Ball> {
    let members: BTreeSet<Ball> = family.iter().cloned().collect();
    let mut atoms = Vec::new();
    for b in &members {
        let inside: Vec<&Ball> = members.iter().filter(|c| *c != b && b.contains(c)).collect();
        let mut pieces = vec![b.clone()];
        for c in inside {
            pieces = pieces.iter().flat_map(|a| a.difference(c)).collect();
        }
        atoms.extend(pieces);
    }
    atoms
}

/// Maximal-ball form of a union of one-dimensional balls.
fn maximal_balls_1d(balls: Vec<Ball>) -> Vec<Ball> {
    let mut set: BTreeSet<Ball> = balls.into_iter().collect();
    loop {
        // absorb nested balls: keep only those not inside another member
        let sorted: Vec<Ball> = set.iter().cloned().collect();
        let kept: BTreeSet<Ball> = sorted
            .iter()
            .filter(|b| !sorted.iter().any(|c| c != *b && c.contains(b)))
            .cloned()
            .collect();

        // merge full sibling families into their parent
        let mut by_parent: BTreeMap<Ball, usize> = BTreeMap::new();
        for b in &kept {
            *by_parent.entry(b.parent(0)).or_default() += 1;
        }
        let p = kept.iter().next().map(|b| b.p()).unwrap_or(2) as usize;
        let full: Vec<Ball> = by_parent
            .into_iter()
            .filter(|(_, n)| *n == p)
            .map(|(parent, _)| parent)
            .collect();
        if full.is_empty() {
            return kept.into_iter().collect();
        }
        set = kept.into_iter().filter(|b| !full.contains(&b.parent(0))).collect();
        set.extend(full);
    }
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.balls.is_empty() {
            return f.write_str("{}");
        }
        for (i, b) in self.balls.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn b1(c: i64, k: i64) -> Ball {
        Ball::new1(2, q(c), k)
    }

    #[test]
    fn canonicalize_examples() {
        let z2 = ClopenSet::from_ball(b1(0, 0));
        assert_eq!(ClopenSet::canonicalize(2, 1, vec![b1(0, 1), b1(1, 1)]), z2);
        assert_eq!(ClopenSet::canonicalize(2, 1, vec![b1(0, 0), b1(0, 2)]), z2);
        assert_eq!(
            ClopenSet::canonicalize(2, 1, vec![b1(0, 1), b1(0, 1)]).balls(),
            &[b1(0, 1)]
        );
    }

    #[test]
    fn cascading_merge() {
        let pieces = vec![b1(0, 2), b1(2, 2), b1(1, 1)];
        assert_eq!(
            ClopenSet::canonicalize(2, 1, pieces),
            ClopenSet::from_ball(b1(0, 0))
        );
    }

    #[test]
    fn two_dimensional_form_is_unique() {
        let full = Ball::unit(2, 2);
        // Z_2^2 cut into the four quarter-boxes along the first coordinate only
        let a = full.refine_to(&[2, 0]);
        // and along the second only
        let b = full.refine_to(&[0, 2]);
        let ca = ClopenSet::canonicalize(2, 2, a);
        let cb = ClopenSet::canonicalize(2, 2, b);
        assert_eq!(ca, cb);
        assert_eq!(ca.balls(), &[full]);
    }

    #[test]
    fn overlapping_rectangles() {
        let x = Ball::new(2, vec![q(0), q(0)], vec![1, 0]);
        let y = Ball::new(2, vec![q(0), q(0)], vec![0, 1]);
        let u = ClopenSet::canonicalize(2, 2, vec![x.clone(), y.clone()]);
        assert_eq!(u.haar(), qf(3, 4));
        let i = ClopenSet::from_ball(x).intersection(&ClopenSet::from_ball(y));
        assert_eq!(i.haar(), qf(1, 4));
    }

    #[test]
    fn complement_and_subset() {
        let s = ClopenSet::from_ball(b1(1, 3));
        let c = s.complement_in(&b1(0, 0));
        assert_eq!(c.haar(), qf(7, 8));
        assert!(c.is_disjoint(&s));
        assert_eq!(c.union(&s), ClopenSet::from_ball(b1(0, 0)));
        assert!(s.is_subset(&ClopenSet::from_ball(b1(1, 1))));
        assert!(!s.is_subset(&ClopenSet::from_ball(b1(0, 1))));
    }
}
