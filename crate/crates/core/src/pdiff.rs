//! Pseudo-differentiation with kernel `s^{(-1-b) ord(x-y)}`, computed symbolically in `T = s^{-b}`.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::measures::{CellMeasure, StepFunction};
use crate::padic::{ord, Ball, ClopenSet, PrimePair, Valuation};
use crate::quasi::FactorFamily;
use crate::rational::{pow, q, Q};
use crate::scalar::{s_norm, BParam, Direction, LaurentT, SNorm, Tail};

/// `g(x, y, b) = s^{-j} T^j` with `j = ord(x - y)`.
pub fn pd_kernel(pp: PrimePair, x: &Q, y: &Q) -> Result<LaurentT> {
    match ord(&(x - y), pp.p) {
        Valuation::Infinite => Err(Error::Invalid("kernel pole at x = y".into())),
        Valuation::Finite(j) => Ok(LaurentT::monomial(pow(pp.s, -j), j)),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Domain {
    /// Integrate over all of `Q_p`.
    #[default]
    FullK,
    /// Integrate over `Z_p` only.
    UnitBall,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Convergence {
    /// All tails converge; the exact value when `T` is known.
    Convergent(Option<Q>),
    Divergent(Vec<Tail>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PDResult {
    pub value: LaurentT,
    pub at: BParam,
    pub verdict: Convergence,
}

impl PDResult {
    fn new(value: LaurentT, at: &BParam, s: u32) -> Result<Self> {
        let bad: Vec<Tail> = value.divergent_tails(at, s).into_iter().cloned().collect();
        let verdict = if bad.is_empty() {
            Convergence::Convergent(value.evaluate(at, s)?)
        } else {
            Convergence::Divergent(bad)
        };
        Ok(Self { value, at: at.clone(), verdict })
    }

    pub fn exact(&self) -> Option<&Q> {
        match &self.verdict {
            Convergence::Convergent(v) => v.as_ref(),
            Convergence::Divergent(_) => None,
        }
    }
}

impl fmt::Display for PDResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        match &self.verdict {
            Convergence::Convergent(Some(v)) => write!(f, " = {}", crate::rational::fmt_q(v)),
            Convergence::Convergent(None) => write!(f, " (convergent)"),
            Convergence::Divergent(t) => write!(f, " (divergent: {} tail(s))", t.len()),
        }
    }
}

fn check_1d(f: &StepFunction<Q>) -> Result<()> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
    }
    Ok(())
}

/// `∫_{B(x, j)} f`.
fn ball_integral(f: &StepFunction<Q>, x: &Q, j: i64) -> Q {
    let b = Ball::new1(f.p(), x.clone(), j);
    f.pieces()
        .iter()
        .filter_map(|(piece, v)| piece.intersect(&b).map(|i| v * i.haar()))
        .sum()
}

/// Shell range `[lo, hi)` around `x` outside of which `f` is trivial: below `lo` every
/// ball `B(x, j)` swallows all pieces, from `hi` on `f` is constant on `B(x, j)`.
fn shell_window(f: &StepFunction<Q>, x: &Q) -> Option<(i64, i64)> {
    let p = f.p();
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (piece, _) in f.pieces() {
        let k = piece.radius_exp()[0];
        match ord(&(&piece.center()[0] - x), p) {
            Valuation::Finite(d) if d < k => {
                lo = lo.min(d);
                hi = hi.max(d + 1);
            }
            _ => {
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// `Σ_{lo <= j < hi} s^{-j} T^j (w·Haar(shell j) - ∫_{shell j} f)`.
fn window_sum(pp: PrimePair, f: &StepFunction<Q>, x: &Q, w: &Q, lo: i64, hi: i64) -> LaurentT {
    let mut out = LaurentT::zero();
    let edge = Q::one() - pow(pp.p, -1);
    let mut inner = ball_integral(f, x, lo);
    for j in lo..hi {
        let next = ball_integral(f, x, j + 1);
        let c = w * pow(pp.p, -j) * &edge - (&inner - &next);
        out.add_monomial(c * pow(pp.s, -j), j);
        inner = next;
    }
    out
}

/// `PD(b, f)(x)` over `Q_p`, or `PD_c(b, f)(x)` over `Z_p`.
pub fn pd_evaluate(pp: PrimePair, f: &StepFunction<Q>, x: &Q, domain: Domain, at: &BParam) -> Result<PDResult> {
    check_1d(f)?;
    let value = match domain {
        Domain::FullK => pd_full(pp, f, x),
        Domain::UnitBall => {
            // (f(x) - f) restricted to Z_p, integrated over all of Q_p
            let unit = ClopenSet::from_ball(Ball::unit(pp.p, 1));
            let mask = StepFunction::indicator(&unit);
            let g = mask.scale(&f.value_at(std::slice::from_ref(x))).add(&f.mul(&mask).scale(&-q(1)));
            match shell_window(&g, x) {
                Some((lo, hi)) => window_sum(pp, &g, x, &Q::zero(), lo, hi).scale(&-q(1)),
                None => LaurentT::zero(),
            }
        }
    };
    PDResult::new(value, at, pp.s)
}

fn pd_full(pp: PrimePair, f: &StepFunction<Q>, x: &Q) -> LaurentT {
    let Some((lo, hi)) = shell_window(f, x) else {
        return LaurentT::zero();
    };
    let fx = f.value_at(std::slice::from_ref(x));
    let mut out = window_sum(pp, f, x, &fx, lo, hi);
    if !fx.is_zero() {
        // shells j < lo: only f(x) survives, Σ_{k >= 1-lo} f(x)(1-1/p)(ps)^k T^{-k}
        out = out
            + LaurentT::tail(Tail {
                c: fx * (Q::one() - pow(pp.p, -1)),
                u: q(pp.p as i64 * pp.s as i64),
                k0: 1 - lo,
                dir: Direction::Neg,
            });
    }
    out
}

/// `D̃^b_a μ(S) = ∫_K [μ(S - λa) - μ(S)] g(λ, 0, b) dλ` at finite level.
pub fn pd_measure_shift(mu: &CellMeasure, a: &[Q], set: &ClopenSet, at: &BParam) -> Result<PDResult> {
    let n = mu.dim();
    if a.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.len() });
    }
    if set.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: set.dim() });
    }
    let p = mu.p();
    let active: Vec<(usize, i64)> = a
        .iter()
        .enumerate()
        .filter_map(|(i, ai)| ord(ai, p).finite().map(|v| (i, v)))
        .collect();
    if active.is_empty() {
        return Err(Error::Invalid("shift direction must be nonzero".into()));
    }
    if mu.is_zero() || set.is_empty() {
        return PDResult::new(LaurentT::zero(), at, mu.s());
    }
    // S - λa is unchanged when λ moves inside a ball of level `level`
    let fine = set.balls().iter().fold(vec![i64::MIN; n], |acc, b| {
        acc.iter().zip(b.radius_exp()).map(|(x, y)| (*x).max(*y)).collect()
    });
    let level = active.iter().map(|&(i, v)| fine[i] - v).max().unwrap();
    // μ(S - λa) = 0 unless λa_i lands in the coarse hull of S - supp μ
    let hull = |balls: &[Ball], i: usize| {
        balls
            .iter()
            .map(|b| {
                let k = b.radius_exp()[i];
                ord(&b.center()[i], p).finite().map_or(k, |d| d.min(k))
            })
            .min()
            .unwrap()
    };
    let support = mu.support();
    let outer = active
        .iter()
        .map(|&(i, v)| hull(set.balls(), i).min(hull(support.balls(), i)) - v)
        .min()
        .unwrap()
        .min(level);
    let mut pieces = Vec::new();
    for cell in Ball::new1(p, Q::zero(), outer).refine_to(&[level]) {
        let lambda = &cell.center()[0];
        let shift: Vec<Q> = a.iter().map(|ai| -(lambda * ai)).collect();
        let m = mu.measure_of(&set.translate(&shift));
        if !m.is_zero() {
            pieces.push((cell, m));
        }
    }
    let psi = StepFunction::from_disjoint(p, 1, pieces)?;
    let value = pd_full(mu.pp(), &psi, &Q::zero()).scale(&-q(1));
    PDResult::new(value, at, mu.s())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallnessSample {
    pub t: Q,
    /// `μ_N(ty + S)`.
    pub shifted: Q,
    pub shifted_norm: SNorm,
    /// `μ_N(ty + S) - μ_N(S)`.
    pub gap: Q,
    pub gap_norm: SNorm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallnessReport {
    pub samples: Vec<SmallnessSample>,
    /// `Δ log_s |μ_N(ty + S)|_s / Δ ord_p t` between consecutive samples with nonzero mass.
    pub exponents: Vec<Q>,
}

impl SmallnessReport {
    /// The common fitted exponent, when every consecutive pair agrees.
    pub fn fitted(&self) -> Option<&Q> {
        let first = self.exponents.first()?;
        self.exponents.iter().all(|e| e == first).then_some(first)
    }
}

/// Orders of smallness of `|μ_N(ty + S) - μ_N(S)|_s` over the samples `t`.
pub fn smallness_order(fam: &FactorFamily, y: &[Q], set: &ClopenSet, ts: &[Q]) -> Result<SmallnessReport> {
    let n = set.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if fam.len() < n {
        return Err(Error::DimensionMismatch { expected: n, got: fam.len() });
    }
    let s = family_s(fam)?;
    let mass = |set: &ClopenSet| -> Result<Q> {
        let mut total = Q::zero();
        for b in set.balls() {
            let mut m = Q::one();
            for (i, f) in fam.factors()[..n].iter().enumerate() {
                m *= f.ball_mass(&b.factor(i))?;
            }
            total += m;
        }
        Ok(total)
    };
    let base = mass(set)?;
    let mut samples = Vec::new();
    for t in ts {
        let shift: Vec<Q> = y.iter().map(|yi| t * yi).collect();
        let shifted = mass(&set.translate(&shift))?;
        let gap = &shifted - &base;
        samples.push(SmallnessSample {
            t: t.clone(),
            shifted_norm: s_norm(&shifted, s),
            shifted,
            gap_norm: s_norm(&gap, s),
            gap,
        });
    }
    let p = set.p();
    let exponents = samples
        .windows(2)
        .filter_map(|w| {
            let (e0, e1) = (w[0].shifted_norm.exponent()?, w[1].shifted_norm.exponent()?);
            let (o0, o1) = (ord(&w[0].t, p).finite()?, ord(&w[1].t, p).finite()?);
            (o0 != o1).then(|| Q::new((e1 - e0).into(), (o1 - o0).into()))
        })
        .collect();
    Ok(SmallnessReport { samples, exponents })
}

fn family_s(fam: &FactorFamily) -> Result<u32> {
    use crate::quasi::Factor;
    fn s(f: &Factor) -> u32 {
        match f {
            Factor::Cells(m) => m.s(),
            Factor::Shell(m) => m.pp().s,
            Factor::Power(k) => k.s(),
            Factor::Weighted(inner, _) => s(inner),
        }
    }
    fam.factors().first().map(s).ok_or_else(|| Error::Invalid("empty family".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasi::{Factor, PowerKernel};
    use crate::rational::qf;

    fn pp() -> PrimePair {
        PrimePair::new(2, 3).unwrap()
    }

    fn ch_z2() -> StepFunction<Q> {
        StepFunction::indicator(&ClopenSet::from_ball(Ball::unit(2, 1)))
    }

    fn t1() -> BParam {
        BParam::at(q(1), 3).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(pd_kernel(pp(), &q(4), &q(0)).unwrap(), LaurentT::monomial(qf(1, 9), 2));
        assert_eq!(pd_kernel(pp(), &q(1), &q(0)).unwrap(), LaurentT::monomial(q(1), 0));
        assert_eq!(pd_kernel(pp(), &qf(1, 2), &q(0)).unwrap(), LaurentT::monomial(q(3), -1));
        assert!(pd_kernel(pp(), &q(1), &q(1)).is_err());
    }

    #[test]
    fn indicator_at_zero() {
        let r = pd_evaluate(pp(), &ch_z2(), &q(0), Domain::FullK, &t1()).unwrap();
        assert_eq!(r.exact(), Some(&qf(-3, 5)));
        let r = pd_evaluate(pp(), &ch_z2(), &q(0), Domain::FullK, &BParam::norm_only(q(-1))).unwrap();
        assert!(matches!(r.verdict, Convergence::Divergent(_)));
        let r = pd_evaluate(pp(), &ch_z2(), &q(0), Domain::FullK, &BParam::norm_only(qf(-1, 2))).unwrap();
        assert_eq!(r.verdict, Convergence::Convergent(None));
        // 3/(T-6) at T = 2
        let r = pd_evaluate(pp(), &ch_z2(), &q(0), Domain::FullK, &BParam::at(q(2), 3).unwrap()).unwrap();
        assert_eq!(r.exact(), Some(&qf(-3, 4)));
    }

    #[test]
    fn unit_ball_interior_vanishes() {
        for x in [q(0), q(1), qf(3, 1), q(-7)] {
            let r = pd_evaluate(pp(), &ch_z2(), &x, Domain::UnitBall, &t1()).unwrap();
            assert!(r.value.is_zero());
        }
    }

    #[test]
    fn constant_on_unit_ball_window() {
        // f = ch_{2Z_2} seen from x = 1: y ∈ 2Z_2 sits on shell 0
        let f = StepFunction::indicator(&ClopenSet::from_ball(Ball::new1(2, q(0), 1)));
        let r = pd_evaluate(pp(), &f, &q(1), Domain::UnitBall, &t1()).unwrap();
        assert_eq!(r.value, LaurentT::monomial(qf(-1, 2), 0));
        let full = pd_evaluate(pp(), &f, &q(1), Domain::FullK, &t1()).unwrap();
        assert_eq!(full.value, LaurentT::monomial(qf(-1, 2), 0));
    }

    #[test]
    fn shift_of_haar() {
        let mu = CellMeasure::haar(pp(), Ball::unit(2, 1));
        let set = ClopenSet::from_ball(Ball::unit(2, 1));
        let r = pd_measure_shift(&mu, &[q(1)], &set, &t1()).unwrap();
        assert_eq!(r.exact(), Some(&qf(3, 5)));
        let r = pd_measure_shift(&mu, &[q(1)], &set, &BParam::norm_only(q(0))).unwrap();
        let direct = pd_evaluate(pp(), &ch_z2(), &q(0), Domain::FullK, &BParam::norm_only(q(0))).unwrap();
        assert_eq!(r.value, -direct.value);
    }

    #[test]
    fn shift_additive_in_set() {
        let mu = CellMeasure::new(pp(), 1, vec![(Ball::new1(2, q(0), 1), q(3)), (Ball::new1(2, q(1), 2), qf(1, 2))]).unwrap();
        let s1 = ClopenSet::from_ball(Ball::new1(2, q(0), 2));
        let s2 = ClopenSet::from_ball(Ball::new1(2, q(1), 1));
        let at = BParam::norm_only(q(0));
        let a = [qf(1, 2)];
        let r1 = pd_measure_shift(&mu, &a, &s1, &at).unwrap().value;
        let r2 = pd_measure_shift(&mu, &a, &s2, &at).unwrap().value;
        let r = pd_measure_shift(&mu, &a, &s1.union(&s2), &at).unwrap().value;
        assert_eq!(r, r1 + r2);
    }

    #[test]
    fn smallness_exponent_is_q() {
        let k = PowerKernel::new(2, 3, 2, 0, q(0)).unwrap();
        let fam = FactorFamily::new(vec![Factor::Power(k)]).unwrap();
        let set = ClopenSet::from_ball(Ball::unit(2, 1));
        let ts: Vec<Q> = (1..=5).map(|m| pow(2, -m)).collect();
        let r = smallness_order(&fam, &[q(1)], &set, &ts).unwrap();
        assert_eq!(r.fitted(), Some(&q(2)));
        let small = smallness_order(&fam, &[q(1)], &set, &[q(0), q(4)]).unwrap();
        assert!(small.samples.iter().all(|x| x.gap.is_zero()));
    }
}
