use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::measures::CellMeasure;
use crate::padic::{ord, shell_index, Ball, PrimePair, Shell};
use crate::rational::{pow, q, Q};
use crate::scalar::{s_norm, tail_sum, BParam, Direction, SNorm, TailValue};

/// The raw shell coefficient
/// `a(j,n) = (1-s)(1-1/p) s^{2n-1-j} p^{-n}` for `j < n`, `a(n,n) = (1-s^{-n}) p^{-n}`.
pub fn shell_coefficient(pp: PrimePair, n: i64, j: i64) -> Q {
    assert!(j <= n, "shell index above level");
    let (p, s) = (pp.p, pp.s);
    if j == n {
        (Q::one() - pow(s, -n)) * pow(p, -n)
    } else {
        (q(1) - q(s as i64)) * (Q::one() - pow(p, -1)) * pow(s, 2 * n - 1 - j) * pow(p, -n)
    }
}

/// `a(j,n)` for the shell `S(j,n)` containing `x`.
pub fn shell_density(pp: PrimePair, n: i64, x: &Q) -> Q {
    shell_coefficient(pp, n, shell_index(x, pp.p, n))
}

/// The measure with density proportional to `a(j,n)` on each shell `S(j,n)`, rescaled
/// to total mass one. The raw total is kept for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellDensityMeasure {
    pp: PrimePair,
    n: i64,
    raw_total: Q,
}

impl ShellDensityMeasure {
    pub fn new(pp: PrimePair, n: i64) -> Result<Self> {
        let raw_total = raw_window(pp, n, n) + raw_tail(pp, n, n)?;
        if raw_total.is_zero() {
            return Err(Error::Invalid("shell coefficients have zero total".into()));
        }
        Ok(Self { pp, n, raw_total })
    }

    pub fn pp(&self) -> PrimePair {
        self.pp
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn raw_total(&self) -> &Q {
        &self.raw_total
    }

    /// The factor `1 / raw_total` applied to every `a(j,n)`.
    pub fn normalization(&self) -> Q {
        self.raw_total.recip()
    }

    pub fn coefficient(&self, j: i64) -> Q {
        shell_coefficient(self.pp, self.n, j) / &self.raw_total
    }

    pub fn density(&self, x: &Q) -> Q {
        self.coefficient(shell_index(x, self.pp.p, self.n))
    }

    /// Mass of a one-dimensional ball.
    pub fn ball_mass(&self, ball: &Ball) -> Q {
        assert_eq!(ball.dim(), 1);
        let p = self.pp.p;
        let (a, k) = (&ball.center()[0], ball.radius_exp()[0]);
        if !ord(a, p).at_least(k) || k >= self.n {
            // constant density on the ball
            return self.density(a) * ball.haar();
        }
        let mut total = self.coefficient(self.n) * pow(p, -self.n);
        for j in k..self.n {
            total += self.coefficient(j) * Shell::new(p, j, self.n).haar;
        }
        total
    }

    /// The shells `j >= j_min` as cells, with the mass of the shells below folded into
    /// `S(j_min, n)` so the result keeps total mass one.
    pub fn truncated(&self, j_min: i64) -> Result<CellMeasure> {
        if j_min > self.n {
            return Err(Error::Invalid(format!("window start {j_min} above level {}", self.n)));
        }
        let p = self.pp.p;
        let folded = raw_tail(self.pp, self.n, j_min)? / &self.raw_total;
        let mut cells = Vec::new();
        for j in j_min..=self.n {
            let shell = Shell::new(p, j, self.n);
            let mut d = self.coefficient(j);
            if j == j_min {
                d += &folded / &shell.haar;
            }
            cells.extend(shell.set.balls().iter().map(|b| (b.clone(), d.clone())));
        }
        CellMeasure::new(self.pp, 1, cells)
    }
}

/// `Σ_{j=j_min}^{n} a(j,n) Haar(S(j,n))`.
fn raw_window(pp: PrimePair, n: i64, j_min: i64) -> Q {
    (j_min..=n)
        .map(|j| shell_coefficient(pp, n, j) * shell_haar(pp.p, j, n))
        .fold(Q::zero(), |a, b| a + b)
}

fn shell_haar(p: u32, j: i64, n: i64) -> Q {
    if j == n {
        pow(p, -n)
    } else {
        pow(p, -j) * (Q::one() - pow(p, -1))
    }
}

/// `Σ_{j<j_min} a(j,n) Haar(S(j,n))` in closed form.
///
/// With `k = -j` the terms are `c (sp)^k` for `c = (1-s)(1-1/p)^2 s^{2n-1} p^{-n}`.
fn raw_tail(pp: PrimePair, n: i64, j_min: i64) -> Result<Q> {
    let (p, s) = (pp.p, pp.s);
    let c = (q(1) - q(s as i64)) * num_traits::pow(Q::one() - pow(p, -1), 2) * pow(s, 2 * n - 1) * pow(p, -n);
    let u = q(s as i64 * p as i64);
    let at = BParam::at(Q::one(), s)?;
    match tail_sum(&c, &u, 1 - j_min, Direction::Pos, &at, s) {
        TailValue::Convergent(Some(v)) => Ok(v),
        _ => Err(Error::Divergent { ratio: u, dir: 1 }),
    }
}

/// Exact bookkeeping of the shell-density normalization over a window `[j_min, n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationReport {
    pub n: i64,
    pub j_min: i64,
    /// Raw window sum `Σ_{j_min <= j <= n} a(j,n) Haar(S(j,n))`.
    pub raw_window: Q,
    /// Closed-form raw tail over `j < j_min`.
    pub raw_tail: Q,
    pub raw_total: Q,
    pub normalization: Q,
    /// Normalized closed-form total; one by construction of the normalization.
    pub total: Q,
    /// `|total - normalization · raw_window|_s`.
    pub window_gap: SNorm,
    /// Raw core mass `a(n,n) p^{-n}` and `|core - 1|_s` against the threshold.
    pub core_mass: Q,
    pub core_gap: SNorm,
    pub core_within: bool,
}

pub fn normalize_check(pp: PrimePair, n: i64, j_min: i64, c: SNorm) -> Result<NormalizationReport> {
    if j_min > n {
        return Err(Error::Invalid(format!("window start {j_min} above level {n}")));
    }
    let m = ShellDensityMeasure::new(pp, n)?;
    let raw_window = raw_window(pp, n, j_min);
    let raw_tail = raw_tail(pp, n, j_min)?;
    let normalization = m.normalization();
    let total = (&raw_window + &raw_tail) * &normalization;
    let window_gap = s_norm(&(&total - &normalization * &raw_window), pp.s);
    let core_mass = shell_coefficient(pp, n, n) * pow(pp.p, -n);
    let core_gap = s_norm(&(&core_mass - Q::one()), pp.s);
    Ok(NormalizationReport {
        n,
        j_min,
        raw_window,
        raw_tail,
        raw_total: m.raw_total,
        normalization,
        total,
        window_gap,
        core_within: core_gap < c,
        core_mass,
        core_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn pp() -> PrimePair {
        PrimePair::new(2, 3).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(shell_density(pp(), 1, &q(1)), qf(-3, 2));
        assert_eq!(shell_density(pp(), 1, &q(2)), qf(1, 3));
        assert_eq!(shell_density(pp(), 1, &qf(1, 2)), qf(-9, 2));
        assert_eq!(shell_density(pp(), 1, &q(0)), qf(1, 3));
    }

    #[test]
    fn raw_total_is_not_one() {
        let m = ShellDensityMeasure::new(pp(), 1).unwrap();
        assert_eq!(m.raw_total(), &qf(19, 60));
    }

    #[test]
    fn normalized_total_is_one() {
        for n in 1..=3 {
            let r = normalize_check(pp(), n, -12, SNorm::Pow(-1)).unwrap();
            assert_eq!(r.total, q(1));
            assert!(r.window_gap <= SNorm::Pow(-10));
        }
    }

    #[test]
    fn degenerate_window() {
        let r = normalize_check(pp(), 1, 1, SNorm::Pow(-1)).unwrap();
        assert_eq!(r.raw_window, qf(1, 6));
        assert_eq!(r.core_gap, SNorm::Pow(1));
        assert!(!r.core_within);
    }

    #[test]
    fn truncation_keeps_mass() {
        let m = ShellDensityMeasure::new(pp(), 2).unwrap();
        let t = m.truncated(-4).unwrap();
        assert_eq!(t.total_mass(), q(1));
        assert_eq!(t.density_at(&[q(1)]), m.density(&q(1)));
        // inside the window the truncation is exact
        let inner = Ball::new1(2, q(0), -3);
        assert_eq!(t.measure_of_ball(&inner), m.ball_mass(&inner));
        assert_eq!(m.ball_mass(&Ball::new1(2, q(4), 2)), m.density(&q(0)) * qf(1, 4));
    }
}
