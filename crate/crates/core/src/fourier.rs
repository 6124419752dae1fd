//! Additive characters of `Q_p^n`, characteristic functionals and finite inversion.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measures::CellMeasure;
use crate::padic::{fractional_part, ord, Ball, PrimePair, Valuation};
use crate::rational::{fmt_q, pow, rat_valuation, Q};
use crate::scalar::{Cyclo, SNorm};

fn dot(a: &[Q], b: &[Q]) -> Q {
    assert_eq!(a.len(), b.len(), "vector dimension");
    a.iter().zip(b).map(|(x, y)| x * y).fold(Q::zero(), |s, t| s + t)
}

fn fmt_vec(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_q).collect();
    format!("({})", parts.join(", "))
}

/// `{⟨ξ,x⟩}_p = m/p^k` in lowest terms, as `(k, m)`.
fn phase(p: u32, xi: &[Q], x: &[Q]) -> (u32, i64) {
    let eta = fractional_part(&dot(xi, x), p);
    if eta.is_zero() {
        return (0, 0);
    }
    let k = -rat_valuation(&eta, p);
    let m = eta.numer().to_i64().expect("phase numerator fits in i64");
    (k as u32, m)
}

/// `χ_ξ(x) = ζ_{p^k}^m` where `{⟨ξ,x⟩}_p = m/p^k`.
pub fn character_value(p: u32, xi: &[Q], x: &[Q]) -> Cyclo {
    let (k, m) = phase(p, xi, x);
    Cyclo::root(p, k, m)
}

/// `θ_μ(z) = ∫ χ_z(x) μ(dx)`.
///
/// On a cell `B(c,k)` with density `d` the integral is `d p^{-Σk} χ_z(c)` when
/// `ord z_i + k_i >= 0` for every `i`, and zero otherwise.
pub fn theta(mu: &CellMeasure, z: &[Q]) -> Cyclo {
    assert_eq!(z.len(), mu.dim(), "frequency dimension");
    let p = mu.p();
    let mut total = Cyclo::zero(p);
    for (b, d) in mu.cells() {
        let visible = z
            .iter()
            .zip(b.radius_exp())
            .all(|(zi, k)| ord(zi, p).at_least(-k));
        if visible {
            let chi = character_value(p, z, b.center());
            total = &total + &chi.scale(&(d * b.haar()));
        }
    }
    total
}

/// The dual of `p^a Z_p^n / p^m Z_p^n`: frequencies `j p^{-m}`, `0 <= j < p^{m-a}`, per coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualGrid {
    pub p: u32,
    pub dim: usize,
    pub level: i64,
    pub support_exp: i64,
}

impl DualGrid {
    pub fn new(p: u32, dim: usize, level: i64, support_exp: i64) -> Result<Self> {
        if support_exp > level {
            return Err(Error::Invalid(format!(
                "support exponent {support_exp} above level {level}"
            )));
        }
        Ok(Self { p, dim, level, support_exp })
    }

    /// The smallest grid resolving `mu` at level at least `level`.
    pub fn for_measure(mu: &CellMeasure, level: i64) -> Self {
        let p = mu.p();
        let mut m = level;
        let mut a = 0i64;
        for (b, _) in mu.cells() {
            for (c, k) in b.center().iter().zip(b.radius_exp()) {
                m = m.max(*k);
                a = a.min(*k);
                if let Valuation::Finite(v) = ord(c, p) {
                    a = a.min(v);
                }
            }
        }
        Self { p, dim: mu.dim(), level: m, support_exp: a }
    }

    /// Points per coordinate, `p^{m-a}`.
    pub fn side(&self) -> usize {
        (self.p as usize).pow((self.level - self.support_exp) as u32)
    }

    fn tuples(&self, scale: &Q) -> Vec<Vec<Q>> {
        let side = self.side();
        let mut out = vec![Vec::new()];
        for _ in 0..self.dim {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..side).map(move |j| {
                        let mut v = prefix.clone();
                        v.push(Q::from_integer(BigInt::from(j)) * scale);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Dual frequencies, in lexicographic order of `j`.
    pub fn frequencies(&self) -> Vec<Vec<Q>> {
        self.tuples(&pow(self.p, -self.level))
    }

    /// Cell centers `t p^a` of the primal grid.
    pub fn points(&self) -> Vec<Vec<Q>> {
        self.tuples(&pow(self.p, self.support_exp))
    }
}

/// Samples of `θ` on a full dual grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTable {
    pub grid: DualGrid,
    pub samples: BTreeMap<Vec<Q>, Cyclo>,
}

impl ThetaTable {
    pub fn sample(mu: &CellMeasure, grid: DualGrid) -> Self {
        let samples = grid.frequencies().into_iter().map(|z| {
            let v = theta(mu, &z);
            (z, v)
        });
        Self { grid, samples: samples.collect() }
    }

    pub fn get(&self, z: &[Q]) -> Option<&Cyclo> {
        self.samples.get(z)
    }
}

/// Reconstruct the cell measure of resolution `p^{-m}` whose transform is `table`.
///
/// `d(x) p^{-mn} = N^{-n} Σ_z θ(z) χ_z(-x)` with `N = p^{m-a}`.
pub fn invert(table: &ThetaTable, pp: PrimePair) -> Result<CellMeasure> {
    let grid = table.grid;
    if grid.p != pp.p {
        return Err(Error::PrimeMismatch(grid.p, pp.p));
    }
    let freqs = grid.frequencies();
    let values: Vec<&Cyclo> = freqs
        .iter()
        .map(|z| table.get(z).ok_or_else(|| Error::IncompleteTable(fmt_vec(z))))
        .collect::<Result<_>>()?;
    let big_l = (grid.level - grid.support_exp) as u32;
    let ring_len = (grid.p as usize).pow(big_l);
    let rings: Vec<Vec<Q>> = values
        .iter()
        .map(|v| {
            if v.level() > big_l {
                Err(Error::Invalid("table value outside the grid's root order".into()))
            } else {
                Ok(v.group_ring(big_l))
            }
        })
        .collect::<Result<_>>()?;

    let n = grid.dim as i64;
    let norm = pow(grid.p, (grid.level * n) - (grid.level - grid.support_exp) * n);
    let mut cells = Vec::new();
    for x in grid.points() {
        let mut acc = vec![Q::zero(); ring_len];
        for (z, ring) in freqs.iter().zip(&rings) {
            let (k, m) = phase(grid.p, z, &x);
            // χ_z(-x) = ζ_{p^L}^{-m p^{L-k}}
            let shift = (-m * (grid.p as i64).pow(big_l - k)).rem_euclid(ring_len as i64) as usize;
            for (e, c) in ring.iter().enumerate() {
                if !c.is_zero() {
                    acc[(e + shift) % ring_len] += c;
                }
            }
        }
        let sum = Cyclo::from_group_ring(grid.p, big_l, acc);
        let Some(r) = sum.as_rational() else {
            return Err(Error::NonRationalInverse(fmt_vec(&x)));
        };
        let d = r * &norm;
        if !d.is_zero() {
            cells.push((Ball::new(grid.p, x, vec![grid.level; grid.dim]), d));
        }
    }
    CellMeasure::new(pp, grid.dim, cells)
}

/// Result of checking a transform identity on a frequency grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityVerdict {
    pub checked: usize,
    pub first_failure: Option<Vec<Q>>,
}

impl IdentityVerdict {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    fn run(grid: &[Vec<Q>], holds: impl Fn(&[Q]) -> bool) -> Self {
        let mut checked = 0;
        for z in grid {
            checked += 1;
            if !holds(z) {
                return Self { checked, first_failure: Some(z.clone()) };
            }
        }
        Self { checked, first_failure: None }
    }
}

/// `θ_μ(z_1,…,z_n) = Π θ_{μ_l}(z_l)` on the grid.
pub fn check_product(mu: &CellMeasure, factors: &[CellMeasure], grid: &[Vec<Q>]) -> Result<IdentityVerdict> {
    let total: usize = factors.iter().map(CellMeasure::dim).sum();
    if total != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: total });
    }
    Ok(IdentityVerdict::run(grid, |z| {
        let mut rhs = Cyclo::one(mu.p());
        let mut at = 0;
        for f in factors {
            rhs = &rhs * &theta(f, &z[at..at + f.dim()]);
            at += f.dim();
        }
        theta(mu, z) == rhs
    }))
}

/// `θ_μ(z) = θ_{μ_1}(z) θ_{μ_2}(z)` on the grid.
pub fn check_convolution(
    mu: &CellMeasure,
    mu1: &CellMeasure,
    mu2: &CellMeasure,
    grid: &[Vec<Q>],
) -> Result<IdentityVerdict> {
    for other in [mu1, mu2] {
        if other.dim() != mu.dim() {
            return Err(Error::DimensionMismatch { expected: mu.dim(), got: other.dim() });
        }
    }
    Ok(IdentityVerdict::run(grid, |z| theta(mu, z) == &theta(mu1, z) * &theta(mu2, z)))
}

/// `θ_ν(z) = θ_μ(c z)` for `ν` the image of `μ` under `x ↦ c x`.
pub fn check_image(mu: &CellMeasure, c: &Q, grid: &[Vec<Q>]) -> Result<IdentityVerdict> {
    let nu = mu.image_affine(c, &vec![Q::zero(); mu.dim()])?;
    Ok(IdentityVerdict::run(grid, |z| {
        let cz: Vec<Q> = z.iter().map(|zi| zi * c).collect();
        theta(&nu, z) == theta(mu, &cz)
    }))
}

/// Window convention for the finite-dimensional continuity diagnostic.
pub const SAZONOV_WINDOW: &str = "|<z,Sz>|_K < 1, i.e. ord_p(sum S_i z_i^2) > 0";

#[derive(Clone, Debug, PartialEq)]
pub struct SazonovEntry {
    pub x: Vec<Q>,
    pub y: Vec<Q>,
    /// `Some((θ(y) - θ(x), norm bound))` inside the window, `None` when skipped.
    pub gap: Option<(Cyclo, SNorm)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SazonovReport {
    pub window: &'static str,
    pub entries: Vec<SazonovEntry>,
    /// Largest norm bound over in-window pairs.
    pub max_bound: SNorm,
    pub skipped: usize,
}

/// `θ(y) - θ(x)` for sample pairs with `z = x - y` inside the window of the diagonal operator `S`.
pub fn sazonov_gap(mu: &CellMeasure, diag: &[Q], pairs: &[(Vec<Q>, Vec<Q>)]) -> Result<SazonovReport> {
    if diag.len() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: diag.len() });
    }
    if diag.iter().any(Zero::is_zero) {
        return Err(Error::Invalid("diagonal entries must be nonzero".into()));
    }
    let mut entries = Vec::new();
    let (mut max_bound, mut skipped) = (SNorm::Zero, 0);
    for (x, y) in pairs {
        let z: Vec<Q> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let form: Q = z.iter().zip(diag).map(|(zi, si)| si * zi * zi).fold(Q::zero(), |a, b| a + b);
        let gap = if ord(&form, mu.p()).at_least(1) {
            let diff = &theta(mu, y) - &theta(mu, x);
            let bound = diff.norm_bound(mu.s());
            max_bound = max_bound.max(bound);
            Some((diff, bound))
        } else {
            skipped += 1;
            None
        };
        entries.push(SazonovEntry { x: x.clone(), y: y.clone(), gap });
    }
    Ok(SazonovReport { window: SAZONOV_WINDOW, entries, max_bound, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn pp() -> PrimePair {
        PrimePair::new(2, 3).unwrap()
    }

    fn z2() -> CellMeasure {
        CellMeasure::haar(pp(), Ball::unit(2, 1))
    }

    #[test]
    fn character_examples() {
        assert_eq!(character_value(2, &[q(1)], &[q(5)]), Cyclo::one(2));
        assert_eq!(character_value(2, &[q(1)], &[qf(1, 2)]), Cyclo::from_q(2, q(-1)));
        assert_eq!(character_value(2, &[q(1)], &[qf(1, 4)]), Cyclo::root(2, 2, 1));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(&z2(), &[q(3)]), Cyclo::one(2));
        assert!(theta(&z2(), &[qf(1, 2)]).is_zero());
        let mu = CellMeasure::new(pp(), 1, vec![(Ball::new1(2, q(1), 2), q(4))]).unwrap();
        assert_eq!(theta(&mu, &[q(0)]), Cyclo::one(2));
    }

    #[test]
    fn inversion_examples() {
        let grid = DualGrid::new(2, 1, 1, 0).unwrap();
        let t = ThetaTable::sample(&z2(), grid);
        assert_eq!(invert(&t, pp()).unwrap(), z2());

        let grid = DualGrid::new(2, 1, 2, 0).unwrap();
        let mut spike = ThetaTable::sample(&CellMeasure::zero(pp(), 1), grid);
        assert!(invert(&spike, pp()).unwrap().is_zero());
        spike.samples.insert(vec![q(0)], Cyclo::one(2));
        let mu = invert(&spike, pp()).unwrap();
        assert_eq!(mu, z2());
        assert_eq!(ThetaTable::sample(&mu, grid), spike);
    }

    #[test]
    fn missing_sample_is_reported() {
        let grid = DualGrid::new(2, 1, 1, 0).unwrap();
        let mut t = ThetaTable::sample(&z2(), grid);
        t.samples.remove(&vec![qf(1, 2)]);
        assert!(matches!(invert(&t, pp()), Err(Error::IncompleteTable(_))));
    }

    #[test]
    fn sazonov_examples() {
        let pairs = vec![
            (vec![q(1)], vec![q(1)]),
            (vec![q(2)], vec![q(0)]),
            (vec![q(1)], vec![q(0)]),
        ];
        let r = sazonov_gap(&z2(), &[q(1)], &pairs).unwrap();
        assert_eq!(r.entries[0].gap.as_ref().unwrap().0, Cyclo::zero(2));
        assert_eq!(r.entries[1].gap.as_ref().unwrap().1, SNorm::Zero);
        assert!(r.entries[2].gap.is_none());
        assert_eq!(r.skipped, 1);
    }
}
