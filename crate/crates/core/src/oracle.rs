//! Reference computations by brute refinement and enumeration.
//!
//! Each routine here reaches its answer by a different route than the closed forms it
//! is compared against: explicit sub-cell sums, grid enumeration, and partial sums.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::measures::{CellMeasure, StepFunction};
use crate::padic::{fractional_part, ord, Ball, ClopenSet, PrimePair, ShellSystem, Valuation};
use crate::quasi::{shell_coefficient, solve, Factor, FactorFamily};
use crate::rational::{pow, qpow, rat_valuation, Q};
use crate::scalar::{s_norm, Cyclo, SNorm};

/// `θ_μ(z)` by splitting every cell until the character is constant on each piece.
pub fn theta_by_refinement(mu: &CellMeasure, z: &[Q]) -> Cyclo {
    let p = mu.p();
    let mut total = Cyclo::zero(p);
    for (b, d) in mu.cells() {
        // χ_z is constant on B(c, k) once ord z_i + k_i >= 0
        let levels: Vec<i64> = z
            .iter()
            .zip(b.radius_exp())
            .map(|(zi, k)| match ord(zi, p) {
                Valuation::Finite(v) => (*k).max(-v),
                Valuation::Infinite => *k,
            })
            .collect();
        for piece in b.refine_to(&levels) {
            let phase: Q = z.iter().zip(piece.center()).map(|(a, c)| a * c).sum();
            let eta = fractional_part(&phase, p);
            let chi = if eta.is_zero() {
                Cyclo::one(p)
            } else {
                let k = -rat_valuation(&eta, p);
                let m: i64 = (&eta * pow(p, k)).to_integer().try_into().expect("phase fits");
                Cyclo::root(p, k as u32, m)
            };
            total = &total + &chi.scale(&(d * piece.haar()));
        }
    }
    total
}

/// `‖A‖_μ` as the largest `|μ(C)|_s` over the cells `C` of `A` refined to `level`.
pub fn mu_norm_by_refinement(mu: &CellMeasure, a: &ClopenSet, level: i64) -> SNorm {
    a.balls()
        .iter()
        .flat_map(|b| {
            let levels: Vec<i64> = b.radius_exp().iter().map(|k| (*k).max(level)).collect();
            b.refine_to(&levels)
        })
        .map(|c| s_norm(&mu.measure_of_ball(&c), mu.s()))
        .max()
        .unwrap_or(SNorm::Zero)
}

/// `Σ_{j=j_min}^{n} a(j,n) Haar(S(j,n))` over an explicit shell system.
pub fn shell_partial_sum(pp: PrimePair, n: i64, j_min: i64) -> Q {
    ShellSystem::new(pp.p, n, j_min)
        .shells
        .iter()
        .map(|sh| shell_coefficient(pp, n, sh.j) * &sh.haar)
        .sum()
}

/// `Σ_j s^{-j} T^j ∫_{ord(y-x)=j} (f(x) - f(y)) dy` over the `depth` shells below the
/// finest level of `f`, at a rational `T`.
pub fn pd_partial_sum(pp: PrimePair, f: &StepFunction<Q>, x: &Q, t: &Q, depth: i64) -> Q {
    let Some(top) = f.pieces().iter().map(|(b, _)| b.radius_exp()[0]).max() else {
        return Q::zero();
    };
    let fx = f.value_at(std::slice::from_ref(x));
    let mut total = Q::zero();
    for j in (top - depth..top).rev() {
        // the shell is the p - 1 balls B(x + u p^j, j + 1)
        let mut integral = Q::zero();
        let mut haar = Q::zero();
        for u in 1..pp.p {
            let ball = Ball::new1(pp.p, x + pow(pp.p, j) * Q::from_integer(u.into()), j + 1);
            integral += CellMeasure::haar(pp, ball.clone()).integrate(f);
            haar += ball.haar();
        }
        total += (&fx * haar - integral) * pow(pp.s, -j) * qpow(t, j);
    }
    total
}

/// A level `k` with the factor density constant on `B(y, k)`.
fn local_level(f: &Factor, y: &Q) -> i64 {
    let near = |c: &Q, k: i64| match ord(&(y - c), f_p(f)) {
        Valuation::Finite(v) if v < k => v + 1,
        _ => k,
    };
    match f {
        Factor::Cells(m) => m
            .cells()
            .iter()
            .map(|(b, _)| near(&b.center()[0], b.radius_exp()[0]))
            .max()
            .unwrap_or(0),
        Factor::Shell(m) => near(&Q::zero(), m.n()),
        Factor::Power(k) => near(k.center(), k.rho()),
        Factor::Weighted(inner, g) => {
            let gk = g
                .pieces()
                .iter()
                .map(|(b, _)| near(&b.center()[0], b.radius_exp()[0]))
                .max()
                .unwrap_or(i64::MIN);
            local_level(inner, y).max(gk)
        }
    }
}

fn f_p(f: &Factor) -> u32 {
    match f {
        Factor::Cells(m) => m.p(),
        Factor::Shell(m) => m.pp().p,
        Factor::Power(k) => k.p(),
        Factor::Weighted(inner, _) => f_p(inner),
    }
}

fn min_ord(m: &[Vec<Q>], p: u32) -> i64 {
    m.iter()
        .flatten()
        .filter_map(|v| ord(v, p).finite())
        .min()
        .unwrap_or(0)
}

fn inverse(u: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let n = u.len();
    let cols = (0..n)
        .map(|i| {
            let e: Vec<Q> = (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect();
            solve(u, &e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect())
}

fn apply(m: &[Vec<Q>], x: &[Q]) -> Vec<Q> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Density of `U_* μ` with respect to `μ` at `x`, as `μ(U^{-1} B) / μ(B)` for a ball
/// `B ∋ x` small enough that both densities are constant; `μ(U^{-1} B)` is counted on a
/// grid of sub-cells.
pub fn pushforward_density(fam: &FactorFamily, u: &[Vec<Q>], x: &[Q]) -> Result<Q> {
    let n = x.len();
    if u.len() != n || fam.len() < n {
        return Err(Error::DimensionMismatch { expected: n, got: u.len().min(fam.len()) });
    }
    let p = f_p(&fam.factors()[0]);
    let uinv = inverse(u)?;
    let y0 = apply(&uinv, x);
    let fs = &fam.factors()[..n];
    let lx = fs.iter().zip(x).map(|(f, xi)| local_level(f, xi)).max().unwrap();
    let ly = fs.iter().zip(&y0).map(|(f, yi)| local_level(f, yi)).max().unwrap();
    let (mu, mi) = (min_ord(u, p), min_ord(&uinv, p));
    let d = lx.max(ly - mi);
    let l = d + mi;
    let m = d - mu;
    let side = num_traits::pow(p as u64, (m - l) as usize);
    let step = pow(p, l);
    let density = |v: &[Q]| -> Q { fs.iter().zip(v).map(|(f, vi)| f.density(vi)).product() };
    let mut preimage = Q::zero();
    let mut digits = vec![0u64; n];
    loop {
        let y: Vec<Q> = y0
            .iter()
            .zip(&digits)
            .map(|(c, dgt)| c + &step * Q::from_integer((*dgt).into()))
            .collect();
        let image = apply(u, &y);
        if image.iter().zip(x).all(|(a, b)| ord(&(a - b), p).at_least(d)) {
            preimage += density(&y);
        }
        // odometer over the grid
        let mut i = 0;
        while i < n {
            digits[i] += 1;
            if digits[i] < side {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    let cell = pow(p, -(n as i64) * m);
    let ball = pow(p, -(n as i64) * d);
    let base = density(x);
    if base.is_zero() {
        return Err(Error::UndefinedCocycle { coord: 0, point: crate::rational::fmt_q(&x[0]) });
    }
    Ok(preimage * cell / (base * ball))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::theta;
    use crate::quasi::transform_density;
    use crate::rational::{q, qf};

    fn pp() -> PrimePair {
        PrimePair::new(2, 3).unwrap()
    }

    #[test]
    fn theta_agrees_with_closed_form() {
        let mu = CellMeasure::new(pp(), 1, vec![(Ball::new1(2, q(1), 2), qf(5, 3)), (Ball::new1(2, qf(1, 2), 0), q(-2))]).unwrap();
        for z in [q(0), qf(1, 2), qf(1, 4), qf(3, 8), q(3)] {
            assert_eq!(theta_by_refinement(&mu, std::slice::from_ref(&z)), theta(&mu, &[z]));
        }
    }

    #[test]
    fn diagonal_pushforward_of_haar() {
        let h = CellMeasure::uniform(pp(), Ball::new1(2, q(0), -3));
        let fam = FactorFamily::new(vec![Factor::Cells(h.clone()), Factor::Cells(h)]).unwrap();
        let u = vec![vec![q(2), q(0)], vec![q(0), q(1)]];
        // U^{-1} x stays inside the flat support: the density is |det U|^{-1} = 2
        let x = [q(1), q(1)];
        assert_eq!(pushforward_density(&fam, &u, &x).unwrap(), q(2));
        assert_eq!(transform_density(&u, &fam, &x).unwrap(), q(2));
    }
}
