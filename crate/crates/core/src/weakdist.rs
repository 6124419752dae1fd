//! Projector-consistent towers of finite-dimensional measures.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::measures::CellMeasure;
use crate::padic::{ord, Ball, ClopenSet, PrimePair, Valuation};
use crate::quasi::{OrdReading, PowerKernel};
use crate::rational::Q;
use crate::scalar::{s_norm, SNorm};

/// One level `μ_{L_n}` of a tower, either as explicit cells or as a product of
/// factors kept unexpanded.
#[derive(Clone, Debug, PartialEq)]
pub enum Level {
    Cells(CellMeasure),
    Product(Vec<CellMeasure>),
}

impl Level {
    pub fn dim(&self) -> usize {
        match self {
            Level::Cells(m) => m.dim(),
            Level::Product(fs) => fs.iter().map(CellMeasure::dim).sum(),
        }
    }

    fn pp(&self) -> Option<PrimePair> {
        match self {
            Level::Cells(m) => Some(m.pp()),
            Level::Product(fs) => fs.first().map(CellMeasure::pp),
        }
    }

    /// Expand into explicit cells.
    pub fn materialize(&self) -> Result<CellMeasure> {
        match self {
            Level::Cells(m) => Ok(m.clone()),
            Level::Product(fs) => {
                let (first, rest) = fs.split_first().ok_or_else(|| Error::Invalid("empty product".into()))?;
                rest.iter().try_fold(first.clone(), |acc, f| acc.product(f))
            }
        }
    }

    /// `μ(A × Q_p^{dim - dim A})`.
    pub fn cylinder_measure(&self, a: &ClopenSet) -> Q {
        let n = a.dim();
        assert!(n >= 1 && n <= self.dim(), "cylinder base dimension");
        match self {
            Level::Cells(m) => m.marginal(n).measure_of(a),
            Level::Product(fs) => a
                .balls()
                .iter()
                .map(|b| {
                    let mut offset = 0;
                    let mut total = Q::one();
                    for f in fs {
                        let d = f.dim();
                        total *= if offset + d <= n {
                            f.measure_of_ball(&b.project(offset..offset + d))
                        } else if offset < n {
                            f.marginal(n - offset).measure_of_ball(&b.project(offset..n))
                        } else {
                            f.total_mass()
                        };
                        offset += d;
                    }
                    total
                })
                .sum(),
        }
    }

    pub fn total_norm(&self) -> SNorm {
        match self {
            Level::Cells(m) => m.total_norm(),
            Level::Product(fs) => fs.iter().map(CellMeasure::total_norm).fold(SNorm::ONE, |a, b| a * b),
        }
    }

    /// `‖L ∖ B(0, p^e)‖_μ`, the ball being `p^{-e} Z_p` in every coordinate.
    pub fn norm_outside(&self, e: i64) -> SNorm {
        match self {
            Level::Cells(m) => cells_outside(m, e),
            Level::Product(fs) => {
                // a product cell leaves the box iff one of its coordinates does
                let totals: Vec<SNorm> = fs.iter().map(CellMeasure::total_norm).collect();
                (0..fs.len())
                    .map(|i| {
                        totals
                            .iter()
                            .enumerate()
                            .map(|(j, t)| if i == j { cells_outside(&fs[i], e) } else { *t })
                            .fold(SNorm::ONE, |a, b| a * b)
                    })
                    .max()
                    .unwrap_or(SNorm::Zero)
            }
        }
    }

    /// `∫ Π_i g(x_i) μ(dx)` for `g` given through its integrals over 1-d balls.
    pub fn integrate_separable(&self, g: &dyn Fn(&Ball) -> Q) -> Q {
        let over = |m: &CellMeasure| -> Q {
            m.cells()
                .iter()
                .map(|(b, d)| (0..b.dim()).map(|i| g(&b.factor(i))).fold(d.clone(), |a, x| a * x))
                .sum()
        };
        match self {
            Level::Cells(m) => over(m),
            Level::Product(fs) => fs.iter().map(over).product(),
        }
    }
}

fn cells_outside(m: &CellMeasure, e: i64) -> SNorm {
    let bx = Ball::centered(m.p(), m.dim(), -e);
    m.cells()
        .iter()
        .filter(|(c, _)| !bx.contains(c))
        .map(|(_, d)| s_norm(d, m.s()))
        .max()
        .unwrap_or(SNorm::Zero)
}

/// A tower `μ_{L_1}, μ_{L_2}, …` on `Q_p^{n_1} ⊂ Q_p^{n_2} ⊂ …`, projected by dropping
/// trailing coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakDistribution {
    pp: PrimePair,
    levels: Vec<Level>,
}

impl WeakDistribution {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        let pp = levels
            .first()
            .and_then(Level::pp)
            .ok_or_else(|| Error::Invalid("empty tower".into()))?;
        for w in levels.windows(2) {
            if w[1].dim() <= w[0].dim() {
                return Err(Error::DimensionMismatch { expected: w[0].dim() + 1, got: w[1].dim() });
            }
        }
        if let Some(other) = levels.iter().filter_map(Level::pp).find(|o| *o != pp) {
            return Err(Error::PrimeMismatch(pp.p, other.p));
        }
        Ok(Self { pp, levels })
    }

    /// Levels `⊗_{i<n} factors[i]` for each `n` in `dims`.
    pub fn product_tower(factors: &[CellMeasure], dims: &[usize]) -> Result<Self> {
        let levels = dims
            .iter()
            .map(|&n| {
                if n == 0 || n > factors.len() {
                    return Err(Error::DimensionMismatch { expected: factors.len(), got: n });
                }
                Ok(Level::Product(factors[..n].to_vec()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    pub fn pp(&self) -> PrimePair {
        self.pp
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Level::dim).collect()
    }
}

/// Test sets for consistency: explicit cells of `Cells` levels, for `Product` levels
/// one box per factor cell with the other coordinates running over the hull of their
/// factors' supports, and the projections of all of these to lower dimensions.
pub fn default_samples(wd: &WeakDistribution) -> Vec<ClopenSet> {
    let p = wd.pp().p;
    let mut out = Vec::new();
    for level in wd.levels() {
        match level {
            Level::Cells(m) => out.extend(m.cells().iter().map(|(b, _)| ClopenSet::from_ball(b.clone()))),
            Level::Product(fs) => {
                let hulls: Vec<Ball> = fs.iter().map(|f| hull(p, f)).collect();
                for (i, f) in fs.iter().enumerate() {
                    for (cell, _) in f.cells() {
                        let ball = hulls
                            .iter()
                            .enumerate()
                            .map(|(j, h)| if i == j { cell.clone() } else { h.clone() })
                            .reduce(|a, b| a.times(&b))
                            .unwrap();
                        out.push(ClopenSet::from_ball(ball));
                    }
                }
            }
        }
    }
    // lower levels see the upper samples through their projections
    let dims = wd.dims();
    let projected: Vec<ClopenSet> = out
        .iter()
        .flat_map(|a| {
            dims.iter().filter(|&&d| d < a.dim()).map(move |&d| {
                let balls = a.balls().iter().map(|b| b.project(0..d)).collect();
                ClopenSet::canonicalize(p, d, balls)
            })
        })
        .collect();
    out.extend(projected);
    out.sort_by(|a, b| a.balls().cmp(b.balls()));
    out.dedup();
    out
}

/// The smallest box `p^k Z_p^d` containing the support.
fn hull(p: u32, m: &CellMeasure) -> Ball {
    let k = m
        .cells()
        .iter()
        .flat_map(|(b, _)| {
            b.center().iter().zip(b.radius_exp()).map(|(c, r)| match ord(c, p) {
                Valuation::Finite(v) => v.min(*r),
                Valuation::Infinite => *r,
            })
        })
        .min()
        .unwrap_or(0);
    Ball::centered(p, m.dim(), k)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyWitness {
    /// Tower indices `n < m`.
    pub lower: usize,
    pub upper: usize,
    pub set: ClopenSet,
    pub lower_value: Q,
    pub upper_value: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyVerdict {
    pub checked: usize,
    pub witness: Option<ConsistencyWitness>,
}

impl ConsistencyVerdict {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// `μ_{L_n}(A) = μ_{L_m}(P^{-1}(A) ∩ L_m)` for every pair `n < m` and every sample of
/// dimension `dim L_n`.
pub fn consistency_check(wd: &WeakDistribution, samples: &[ClopenSet]) -> ConsistencyVerdict {
    let mut checked = 0;
    let levels = wd.levels();
    for (i, lower) in levels.iter().enumerate() {
        for a in samples.iter().filter(|a| a.dim() == lower.dim()) {
            let lower_value = lower.cylinder_measure(a);
            for (j, upper) in levels.iter().enumerate().skip(i + 1) {
                let upper_value = upper.cylinder_measure(a);
                checked += 1;
                if upper_value != lower_value {
                    let witness = ConsistencyWitness {
                        lower: i,
                        upper: j,
                        set: a.clone(),
                        lower_value,
                        upper_value,
                    };
                    return ConsistencyVerdict { checked, witness: Some(witness) };
                }
            }
        }
    }
    ConsistencyVerdict { checked, witness: None }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightnessReport {
    /// Per level, the least grid exponent `e` with `‖L_n ∖ B(0, p^e)‖ <= c`.
    pub least_radius: Vec<Option<i64>>,
    /// An exponent on the grid that works for every level.
    pub uniform: Option<i64>,
    pub sup_norm: SNorm,
    pub bounded: bool,
}

impl TightnessReport {
    pub fn passed(&self) -> bool {
        self.uniform.is_some() && self.bounded
    }
}

/// Tightness: a radius `r` on the grid with `‖L_n ∖ B(0, r)‖ <= c` for
/// all `n`, together with `sup_n ‖L_n‖ <= norm_bound`.
pub fn tightness_check(wd: &WeakDistribution, c: SNorm, grid: &[i64], norm_bound: SNorm) -> TightnessReport {
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    let least_radius: Vec<Option<i64>> = wd
        .levels()
        .iter()
        .map(|l| grid.iter().copied().find(|&e| l.norm_outside(e) <= c))
        .collect();
    let uniform = grid
        .iter()
        .copied()
        .find(|&e| wd.levels().iter().all(|l| l.norm_outside(e) <= c));
    let sup_norm = wd.levels().iter().map(Level::total_norm).max().unwrap_or(SNorm::Zero);
    TightnessReport { least_radius, uniform, sup_norm, bounded: sup_norm <= norm_bound }
}

/// Exponent of the smoothing kernel `γ_ξ`.
pub const GAMMA_EXPONENT: u32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SXiValue {
    pub xi: Q,
    pub level: usize,
    pub reading: OrdReading,
    pub value: Q,
    /// `|value - 1|_s`.
    pub defect: SNorm,
}

/// `∫ Π_i ν̂_ξ(x_i) μ_{L_N}(dx)`, with `ν_ξ` the normalized kernel `C(ξ) s^{-2 min(0, ord(y, ξ))}`.
pub fn s_xi_functional(wd: &WeakDistribution, xi: &Q, level: usize, reading: OrdReading) -> Result<SXiValue> {
    let pp = wd.pp();
    let l = wd
        .levels()
        .get(level)
        .ok_or(Error::DimensionMismatch { expected: wd.levels().len(), got: level })?;
    let kernel = PowerKernel::from_xi(pp.p, pp.s, GAMMA_EXPONENT, xi, Q::zero(), reading)?;
    debug_assert!(kernel.is_normalized());
    let value = l.integrate_separable(&|b| kernel.transform_ball_integral(b));
    let defect = s_norm(&(&value - Q::one()), pp.s);
    Ok(SXiValue { xi: xi.clone(), level, reading, value, defect })
}

/// `S_ξ` along a schedule of frequencies, typically of growing `|ξ|_p`.
pub fn s_xi_trend(wd: &WeakDistribution, schedule: &[Q], level: usize, reading: OrdReading) -> Result<Vec<SXiValue>> {
    schedule.iter().map(|xi| s_xi_functional(wd, xi, level, reading)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasi::ShellDensityMeasure;
    use crate::rational::{pow, q, qf};

    fn pp() -> PrimePair {
        PrimePair::new(2, 3).unwrap()
    }

    fn haar() -> CellMeasure {
        CellMeasure::haar(pp(), Ball::unit(2, 1))
    }

    fn lumpy() -> CellMeasure {
        CellMeasure::new(pp(), 1, vec![(Ball::new1(2, q(0), 1), qf(3, 2)), (Ball::new1(2, q(1), 1), qf(1, 2))]).unwrap()
    }

    fn shell_factors(n: i64, j_min: i64) -> Vec<CellMeasure> {
        (1..=n)
            .map(|k| ShellDensityMeasure::new(pp(), k).unwrap().truncated(j_min).unwrap())
            .collect()
    }

    #[test]
    fn product_tower_is_consistent() {
        let fs = vec![lumpy(), haar(), lumpy(), haar()];
        let wd = WeakDistribution::product_tower(&fs, &[1, 2, 3, 4]).unwrap();
        let v = consistency_check(&wd, &default_samples(&wd));
        assert!(v.passed() && v.checked > 0);
        // explicit cells agree with the factored form
        let cells = WeakDistribution::new(wd.levels().iter().map(|l| Level::Cells(l.materialize().unwrap())).collect()).unwrap();
        assert!(consistency_check(&cells, &default_samples(&cells)).passed());
    }

    #[test]
    fn perturbation_is_caught() {
        let wd = WeakDistribution::new(vec![
            Level::Product(vec![haar(), haar()]),
            Level::Product(vec![lumpy(), haar(), haar()]),
        ])
        .unwrap();
        let v = consistency_check(&wd, &default_samples(&wd));
        let w = v.witness.expect("witness");
        assert_ne!(w.lower_value, w.upper_value);
    }

    #[test]
    fn single_level_is_vacuous() {
        let wd = WeakDistribution::new(vec![Level::Cells(haar())]).unwrap();
        assert!(consistency_check(&wd, &default_samples(&wd)).passed());
    }

    #[test]
    fn haar_tower_is_tight_at_one() {
        let wd = WeakDistribution::product_tower(&[haar(), haar(), haar()], &[1, 2, 3]).unwrap();
        let r = tightness_check(&wd, SNorm::Pow(-30), &[-2, -1, 0, 1, 2], SNorm::ONE);
        assert_eq!(r.least_radius, vec![Some(0); 3]);
        assert_eq!(r.uniform, Some(0));
        assert!(r.passed());
    }

    #[test]
    fn shell_tower_is_tight() {
        let fs = shell_factors(4, -6);
        let wd = WeakDistribution::product_tower(&fs, &[1, 2, 3, 4]).unwrap();
        let grid: Vec<i64> = (-2..=8).collect();
        let loose = tightness_check(&wd, SNorm::Pow(-2), &grid, SNorm::ONE);
        let tight = tightness_check(&wd, SNorm::Pow(-5), &grid, SNorm::ONE);
        assert!(loose.passed() && tight.passed());
        assert!(loose.uniform <= tight.uniform);
    }

    #[test]
    fn unbounded_factor_fails() {
        let big = CellMeasure::new(pp(), 1, vec![(Ball::new1(2, q(0), 3), qf(1, 27)), (Ball::new1(2, q(1), 1), qf(3, 4))]).unwrap();
        let wd = WeakDistribution::product_tower(&[haar(), big], &[1, 2]).unwrap();
        let r = tightness_check(&wd, SNorm::ONE, &[0, 1], SNorm::ONE);
        assert!(!r.bounded && !r.passed());
    }

    #[test]
    fn s_xi_tends_to_one() {
        let wd = WeakDistribution::product_tower(&[haar(), lumpy(), haar()], &[1, 2, 3]).unwrap();
        let schedule: Vec<Q> = (1..=6).map(|m| pow(2, -m)).collect();
        let trend = s_xi_trend(&wd, &schedule, 2, OrdReading::Product).unwrap();
        let defects: Vec<SNorm> = trend.iter().map(|v| v.defect).collect();
        assert!(defects.windows(2).all(|w| w[1] < w[0]), "{defects:?}");
    }

    #[test]
    fn s_xi_stabilizes_on_shell_tower() {
        let fs = shell_factors(8, -4);
        let wd = WeakDistribution::product_tower(&fs, &(1..=8).collect::<Vec<_>>()).unwrap();
        let xi = qf(1, 2);
        let a = s_xi_functional(&wd, &xi, 6, OrdReading::Product).unwrap().value;
        let b = s_xi_functional(&wd, &xi, 7, OrdReading::Product).unwrap().value;
        assert!(s_norm(&(a - b), 3) <= SNorm::Pow(-10));
    }
}
