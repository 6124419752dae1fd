use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{ord, Valuation};
use crate::rational::{pow, Q};

use super::family::{rho_shift, FactorFamily};

fn check_square(u: &[Vec<Q>]) -> Result<usize> {
    let n = u.len();
    if let Some(row) = u.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
    }
    Ok(n)
}

/// Exact determinant by Gaussian elimination.
pub fn det(u: &[Vec<Q>]) -> Result<Q> {
    let n = check_square(u)?;
    let mut m: Vec<Vec<Q>> = u.to_vec();
    let mut d = Q::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(Q::zero());
        };
        if pivot != col {
            m.swap(pivot, col);
            d = -d;
        }
        d *= &m[col][col];
        let pivot = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            let f = &row[col] / &pivot[col];
            if f.is_zero() {
                continue;
            }
            for (v, w) in row.iter_mut().zip(&pivot).skip(col) {
                *v -= &f * w;
            }
        }
    }
    Ok(d)
}

/// Solve `U y = x` exactly.
pub fn solve(u: &[Vec<Q>], x: &[Q]) -> Result<Vec<Q>> {
    let n = check_square(u)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let mut m: Vec<Vec<Q>> = u
        .iter()
        .zip(x)
        .map(|(row, xi)| {
            let mut r = row.clone();
            r.push(xi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::NotInvertible)?;
        m.swap(pivot, col);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut().skip(col) {
            *v *= &inv;
        }
        let pivot = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, w) in row.iter_mut().zip(&pivot).skip(col) {
                *v -= &f * w;
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Density `ν(dx)/μ(dx)` of the image `ν = U_* μ` of a product measure:
/// `|det U|_K^{-1} ρ(x - U^{-1} x, x)`.
pub fn transform_density(u: &[Vec<Q>], fam: &FactorFamily, x: &[Q]) -> Result<Q> {
    let n = check_square(u)?;
    if fam.len() < n {
        return Err(Error::DimensionMismatch { expected: n, got: fam.len() });
    }
    let d = det(u)?;
    let Valuation::Finite(v) = ord(&d, p_of(fam)?) else {
        return Err(Error::NotInvertible);
    };
    let pre = solve(u, x)?;
    let a: Vec<Q> = x.iter().zip(&pre).map(|(xi, yi)| xi - yi).collect();
    Ok(pow(p_of(fam)?, v) * rho_shift(fam, &a, x, n)?)
}

fn p_of(fam: &FactorFamily) -> Result<u32> {
    use super::family::Factor;
    fn p(f: &Factor) -> u32 {
        match f {
            Factor::Cells(m) => m.p(),
            Factor::Shell(m) => m.pp().p,
            Factor::Power(k) => k.p(),
            Factor::Weighted(inner, _) => p(inner),
        }
    }
    fam.factors().first().map(p).ok_or_else(|| Error::Invalid("empty family".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn det_and_solve() {
        let u = vec![vec![q(2), q(1)], vec![q(0), q(3)]];
        assert_eq!(det(&u).unwrap(), q(6));
        let y = solve(&u, &[q(1), q(3)]).unwrap();
        assert_eq!(y, vec![q(0), q(1)]);
        let s = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(det(&s).unwrap(), q(0));
        assert_eq!(solve(&s, &[q(1), q(1)]), Err(Error::NotInvertible));
        let p = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert_eq!(det(&p).unwrap(), q(-1));
        assert_eq!(solve(&p, &[qf(1, 2), q(5)]).unwrap(), vec![q(5), qf(1, 2)]);
    }
}
