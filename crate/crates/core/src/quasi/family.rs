use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::measures::{CellMeasure, StepFunction};
use crate::padic::{ord, Ball, Valuation};
use crate::rational::{fmt_q, pow, rat_valuation, Q};
use crate::scalar::{s_norm, SNorm};

use super::kernel::PowerKernel;
use super::shell::ShellDensityMeasure;

/// A one-dimensional factor measure `m(j; dx) = f_j(x) dx`.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Cells(CellMeasure),
    Shell(ShellDensityMeasure),
    Power(PowerKernel),
    /// `g · m` for a rational step function `g`.
    Weighted(Box<Factor>, StepFunction<Q>),
}

impl Factor {
    pub fn density(&self, x: &Q) -> Q {
        match self {
            Factor::Cells(m) => m.density_at(std::slice::from_ref(x)),
            Factor::Shell(m) => m.density(x),
            Factor::Power(k) => k.density(x),
            Factor::Weighted(inner, g) => g.value_at(std::slice::from_ref(x)) * inner.density(x),
        }
    }

    /// The level parameter `k(j)`: the finest cell level, the shell level or the core exponent.
    pub fn level(&self) -> i64 {
        match self {
            Factor::Cells(m) => m.density().finest_levels().map_or(0, |v| v[0]),
            Factor::Shell(m) => m.n(),
            Factor::Power(k) => k.rho(),
            Factor::Weighted(inner, g) => {
                let gk = g.finest_levels().map_or(i64::MIN, |v| v[0]);
                inner.level().max(gk)
            }
        }
    }

    /// Mass of a one-dimensional ball.
    pub fn ball_mass(&self, ball: &Ball) -> Result<Q> {
        match self {
            Factor::Cells(m) => Ok(m.measure_of_ball(ball)),
            Factor::Shell(m) => Ok(m.ball_mass(ball)),
            Factor::Power(k) => Ok(k.ball_mass(ball)),
            Factor::Weighted(..) => Err(Error::Invalid("ball mass of a weighted factor".into())),
        }
    }

    /// Ratio `f(x - a) / f(x)`.
    fn shift_ratio(&self, coord: usize, a: &Q, x: &Q) -> Result<Q> {
        let den = self.density(x);
        let shifted = x - a;
        let num = self.density(&shifted);
        for (value, at) in [(&den, x), (&num, &shifted)] {
            if value.is_zero() {
                return Err(Error::UndefinedCocycle { coord, point: fmt_q(at) });
            }
        }
        Ok(num / den)
    }
}

/// Factors `m(1), m(2), …` of a product measure, with nondecreasing levels.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorFamily {
    factors: Vec<Factor>,
}

impl FactorFamily {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.windows(2).any(|w| w[0].level() > w[1].level()) {
            return Err(Error::LevelsNotMonotone);
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product density `Π_{j<n} f_j(x_j)`.
    pub fn density(&self, x: &[Q]) -> Q {
        self.factors.iter().zip(x).map(|(f, xi)| f.density(xi)).product()
    }
}

/// Truncated shift density `ρ_N(a, x) = Π_{j<N} f_j(x_j - a_j) / f_j(x_j)`.
///
/// Coordinates with `a_j = 0` (including those past the end of `a`) contribute `1`.
pub fn rho_shift(fam: &FactorFamily, a: &[Q], x: &[Q], n: usize) -> Result<Q> {
    let mut out = Q::one();
    for (j, f) in fam.factors.iter().enumerate().take(n) {
        let Some(aj) = a.get(j).filter(|v| !v.is_zero()) else {
            continue;
        };
        let xj = x.get(j).ok_or(Error::DimensionMismatch { expected: j + 1, got: x.len() })?;
        out *= f.shift_ratio(j, aj, xj)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    /// `max |d(j; a_j, x_j) - 1|_s` over the grid and coordinates.
    pub max_gap: SNorm,
    pub points: usize,
    pub within: bool,
}

/// `|d(j; a_j, x_j) - 1|_s` over a grid of points, for shifts with `|a_j| <= p^{-k(j)}`.
pub fn quasi_invariance_gap(fam: &FactorFamily, a: &[Q], grid: &[Vec<Q>], s: u32, c: SNorm) -> Result<GapReport> {
    for (j, (f, aj)) in fam.factors.iter().zip(a).enumerate() {
        if !aj.is_zero() && rat_valuation(aj, p_of(f)?) < f.level() {
            return Err(Error::ShiftTooLarge(format!("coordinate {j}: {}", fmt_q(aj))));
        }
    }
    let mut max_gap = SNorm::Zero;
    for x in grid {
        for (j, f) in fam.factors.iter().enumerate().take(a.len().min(x.len())) {
            if a[j].is_zero() {
                continue;
            }
            let d = f.shift_ratio(j, &a[j], &x[j])?;
            max_gap = max_gap.max(s_norm(&(d - Q::one()), s));
        }
    }
    Ok(GapReport { max_gap, points: grid.len(), within: max_gap < c })
}

fn p_of(f: &Factor) -> Result<u32> {
    Ok(match f {
        Factor::Cells(m) => m.p(),
        Factor::Shell(m) => m.pp().p,
        Factor::Power(_) | Factor::Weighted(..) => {
            return Err(Error::Invalid("shift radius needs a cell or shell factor".into()))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportRadii {
    /// Radius exponent `r_j` (radius `p^{-r_j}`) of the smallest ball about `0`
    /// holding `{N_{m_j} >= c_j}`; `None` when that set is empty.
    pub exps: Vec<Option<i64>>,
    /// The radii decrease along the family.
    pub shrinking: bool,
}

/// Smallest balls `B(0, p^{-r_j})` containing `{x : N_{m_j}(x) >= c_j}`.
pub fn support_radii(fam: &FactorFamily, thresholds: &[SNorm], s: u32) -> Result<SupportRadii> {
    if thresholds.len() < fam.len() {
        return Err(Error::DimensionMismatch { expected: fam.len(), got: thresholds.len() });
    }
    let exps: Vec<Option<i64>> = fam
        .factors
        .iter()
        .zip(thresholds)
        .map(|(f, c)| radius_exp(f, *c, s))
        .collect::<Result<_>>()?;
    let known: Vec<i64> = exps.iter().flatten().copied().collect();
    let shrinking = known.windows(2).all(|w| w[0] <= w[1]) && known.first() < known.last();
    Ok(SupportRadii { exps, shrinking })
}

fn radius_exp(f: &Factor, c: SNorm, s: u32) -> Result<Option<i64>> {
    let big = |x: &Q| s_norm(x, s) >= c;
    match f {
        Factor::Cells(m) => {
            let p = m.p();
            Ok(m.cells()
                .iter()
                .filter(|(_, d)| big(d))
                .map(|(b, _)| match ord(&b.center()[0], p) {
                    Valuation::Infinite => b.radius_exp()[0],
                    Valuation::Finite(v) => v.min(b.radius_exp()[0]),
                })
                .min())
        }
        Factor::Shell(m) => {
            // |a(j,n)|_s shrinks as j decreases, so scan down from the core
            let mut best = big(&m.coefficient(m.n())).then_some(m.n());
            let mut j = m.n() - 1;
            while big(&m.coefficient(j)) {
                best = Some(j);
                j -= 1;
            }
            Ok(best)
        }
        Factor::Power(k) => {
            if !k.center().is_zero() {
                return Err(Error::Invalid("support radii need a kernel centred at 0".into()));
            }
            let mut best = big(k.constant()).then_some(k.rho());
            let mut j = k.rho() - 1;
            while big(&k.density(&pow(k.p(), j))) {
                best = Some(j);
                j -= 1;
            }
            Ok(best)
        }
        Factor::Weighted(..) => Err(Error::Invalid("support radii of a weighted factor".into())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleReport {
    /// `∫ ρ_n(a,·) ψ dμ` for `n = k, …, N`.
    pub values: Vec<Q>,
    pub holds: bool,
}

/// `∫ ρ_{n+1}(a,·) ψ dμ = ∫ ρ_n(a,·) ψ dμ` for `k <= n < N`, with `ψ` depending on the
/// first `k` coordinates and `μ` the product of the first `N` cell factors.
///
/// On a product ball `Π B_j` the integrand factors, so each term is a product of
/// one-dimensional integrals of `f_j(x - a_j)` (shifted coordinates) or `f_j`.
pub fn martingale_check(fam: &FactorFamily, a: &[Q], psi: &StepFunction<Q>, n_max: usize) -> Result<MartingaleReport> {
    let k = psi.dim();
    if n_max > fam.len() || k > n_max {
        return Err(Error::Invalid(format!(
            "need k <= N <= family length, got k={k}, N={n_max}, length {}",
            fam.len()
        )));
    }
    let cells: Vec<&CellMeasure> = fam.factors[..n_max]
        .iter()
        .map(|f| match f {
            Factor::Cells(m) => Ok(m),
            _ => Err(Error::Invalid("martingale check needs cell factors".into())),
        })
        .collect::<Result<_>>()?;
    let zero = Q::zero();
    let shift = |j: usize| a.get(j).unwrap_or(&zero).clone();

    let mut values = Vec::new();
    for n in k..=n_max {
        // coordinates past ψ integrate over their whole support
        let mut rest = Q::one();
        for (j, m) in cells.iter().enumerate().skip(k) {
            rest *= coordinate_integral(m, None, (j < n).then(|| shift(j)).as_ref());
        }
        let mut total = Q::zero();
        for (ball, v) in psi.pieces() {
            let mut term = v.clone();
            for (j, m) in cells.iter().enumerate().take(k) {
                let bj = ball.factor(j);
                term *= coordinate_integral(m, Some(&bj), (j < n).then(|| shift(j)).as_ref());
            }
            total += term;
        }
        values.push(total * rest);
    }
    let holds = values.windows(2).all(|w| w[0] == w[1]);
    Ok(MartingaleReport { values, holds })
}

/// `∫_{B ∩ supp f} f(y - a) dy` (or `f(y)` when `a` is `None`); `B` defaults to all of `K`.
fn coordinate_integral(m: &CellMeasure, within: Option<&Ball>, a: Option<&Q>) -> Q {
    let mut total = Q::zero();
    for (c, _) in m.cells() {
        let region = match within {
            Some(b) => match c.intersect(b) {
                Some(r) => r,
                None => continue,
            },
            None => c.clone(),
        };
        match a {
            None => total += m.measure_of_ball(&region),
            Some(a) => {
                // ∫_region f(y - a) dy = μ(region - a)
                total += m.measure_of_ball(&region.translate(&[-a.clone()]));
            }
        }
    }
    total
}
