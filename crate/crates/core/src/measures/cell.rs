use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{ord, Ball, ClopenSet, PrimePair, Valuation};
use crate::rational::{pow, Q};
use crate::scalar::{s_norm, SNorm};

use super::step::{Coefficient, StepFunction};

/// A measure `μ(dx) = d(x) dx` with `d` a rational step function and `dx` the
/// Haar measure normalized by `Haar(Z_p^n) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMeasure {
    pp: PrimePair,
    density: StepFunction<Q>,
}

impl CellMeasure {
    /// Cells must be pairwise disjoint.
    pub fn new(pp: PrimePair, dim: usize, cells: Vec<(Ball, Q)>) -> Result<Self> {
        Ok(Self { pp, density: StepFunction::from_disjoint(pp.p, dim, cells)? })
    }

    /// Densities of overlapping cells add.
    pub fn from_overlapping(pp: PrimePair, dim: usize, cells: Vec<(Ball, Q)>) -> Result<Self> {
        Ok(Self { pp, density: StepFunction::from_overlapping(pp.p, dim, cells)? })
    }

    pub fn from_density(pp: PrimePair, density: StepFunction<Q>) -> Self {
        assert_eq!(pp.p, density.p());
        Self { pp, density }
    }

    /// Density one on `ball`.
    pub fn haar(pp: PrimePair, ball: Ball) -> Self {
        let dim = ball.dim();
        Self::new(pp, dim, vec![(ball, Q::one())]).expect("single cell")
    }

    /// Uniform probability on `ball`.
    pub fn uniform(pp: PrimePair, ball: Ball) -> Self {
        let d = ball.haar().recip();
        let dim = ball.dim();
        Self::new(pp, dim, vec![(ball, d)]).expect("single cell")
    }

    pub fn zero(pp: PrimePair, dim: usize) -> Self {
        Self { pp, density: StepFunction::zero(pp.p, dim) }
    }

    pub fn pp(&self) -> PrimePair {
        self.pp
    }

    pub fn p(&self) -> u32 {
        self.pp.p
    }

    pub fn s(&self) -> u32 {
        self.pp.s
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn density(&self) -> &StepFunction<Q> {
        &self.density
    }

    pub fn cells(&self) -> &[(Ball, Q)] {
        self.density.pieces()
    }

    pub fn is_zero(&self) -> bool {
        self.density.is_zero()
    }

    pub fn density_at(&self, x: &[Q]) -> Q {
        self.density.value_at(x)
    }

    pub fn support(&self) -> ClopenSet {
        self.density.support()
    }

    pub fn measure_of_ball(&self, ball: &Ball) -> Q {
        self.cells()
            .iter()
            .filter_map(|(c, d)| c.intersect(ball).map(|i| d * i.haar()))
            .fold(Q::zero(), |a, b| a + b)
    }

    /// `μ(A) = Σ d · Haar(A ∩ cell)`.
    pub fn measure_of(&self, a: &ClopenSet) -> Q {
        self.check_set(a);
        a.balls()
            .iter()
            .map(|b| self.measure_of_ball(b))
            .fold(Q::zero(), |x, y| x + y)
    }

    pub fn total_mass(&self) -> Q {
        self.cells().iter().map(|(c, d)| d * c.haar()).fold(Q::zero(), |a, b| a + b)
    }

    /// `‖A‖_μ`: the largest `|d|_s` over cells meeting `A`.
    pub fn mu_norm(&self, a: &ClopenSet) -> SNorm {
        self.check_set(a);
        self.cells()
            .iter()
            .filter(|(c, _)| a.balls().iter().any(|b| !c.is_disjoint(b)))
            .map(|(_, d)| s_norm(d, self.s()))
            .max()
            .unwrap_or(SNorm::Zero)
    }

    /// `‖X‖_μ`.
    pub fn total_norm(&self) -> SNorm {
        self.cells()
            .iter()
            .map(|(_, d)| s_norm(d, self.s()))
            .max()
            .unwrap_or(SNorm::Zero)
    }

    /// `N_μ(x)`: the density norm of the cell containing `x`.
    pub fn n_mu(&self, x: &[Q]) -> SNorm {
        s_norm(&self.density_at(x), self.s())
    }

    /// Mass one and `‖X‖_μ = 1`.
    pub fn is_probability(&self) -> bool {
        self.total_mass().is_one() && self.total_norm() == SNorm::ONE
    }

    /// `∫ f dμ` over the common refinement of `f` and the cells.
    pub fn integrate<V: Coefficient>(&self, f: &StepFunction<V>) -> V {
        assert_eq!(f.dim(), self.dim(), "integrand dimension");
        let mut total = V::from_q(self.p(), Q::zero());
        for (b, v) in f.pieces() {
            for (c, d) in self.cells() {
                if let Some(i) = b.intersect(c) {
                    total = total.plus(&v.scale(&(d * i.haar())));
                }
            }
        }
        total
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { pp: self.pp, density: self.density.scale(c) }
    }

    /// `μ_1 ⊗ μ_2` on the concatenated coordinates.
    pub fn product(&self, other: &CellMeasure) -> Result<CellMeasure> {
        self.check_pp(other)?;
        let cells = self
            .cells()
            .iter()
            .flat_map(|(a, x)| other.cells().iter().map(move |(b, y)| (a.times(b), x * y)))
            .collect();
        CellMeasure::new(self.pp, self.dim() + other.dim(), cells)
    }

    /// Image of `μ_1 ⊗ μ_2` under addition.
    ///
    /// For a pair of cells the sum of uniform variables on `B(c1,k1)` and `B(c2,k2)`
    /// is uniform on `B(c1+c2, min(k1,k2))`, which fixes the density of each pair.
    pub fn convolve(&self, other: &CellMeasure) -> Result<CellMeasure> {
        self.check_pp(other)?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let p = self.p();
        let mut cells = Vec::new();
        for (a, x) in self.cells() {
            for (b, y) in other.cells() {
                let center = a.center().iter().zip(b.center()).map(|(u, v)| u + v).collect();
                let (mut ks, mut shrink) = (Vec::new(), 0);
                for (ka, kb) in a.radius_exp().iter().zip(b.radius_exp()) {
                    ks.push(*ka.min(kb));
                    shrink += *ka.max(kb);
                }
                cells.push((Ball::new(p, center, ks), x * y * pow(p, -shrink)));
            }
        }
        CellMeasure::from_overlapping(self.pp, self.dim(), cells)
    }

    /// Image under `x ↦ c x + a`; densities scale by `|c|_K^{-n}`.
    pub fn image_affine(&self, c: &Q, a: &[Q]) -> Result<CellMeasure> {
        let Valuation::Finite(v) = ord(c, self.p()) else {
            return Err(Error::NotInvertible);
        };
        if a.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: a.len() });
        }
        let factor = pow(self.p(), v * self.dim() as i64);
        let cells = self
            .cells()
            .iter()
            .map(|(b, d)| {
                let center = b.center().iter().zip(a).map(|(x, t)| c * x + t).collect();
                let ks = b.radius_exp().iter().map(|k| k + v).collect();
                (Ball::new(self.p(), center, ks), d * &factor)
            })
            .collect();
        CellMeasure::new(self.pp, self.dim(), cells)
    }

    /// Marginal on the first `n` coordinates.
    pub fn marginal(&self, n: usize) -> CellMeasure {
        assert!(n >= 1 && n <= self.dim(), "marginal dimension");
        let cells = self
            .cells()
            .iter()
            .map(|(b, d)| {
                let dropped: i64 = b.radius_exp()[n..].iter().sum();
                (b.project(0..n), d * pow(self.p(), -dropped))
            })
            .collect();
        CellMeasure::from_overlapping(self.pp, n, cells).expect("projected cells")
    }

    /// Values `|μ(A_k)|_s` along a nested chain of clopen sets with empty intersection.
    pub fn shrink_limit_check(&self, chain: &[ClopenSet]) -> Result<Vec<SNorm>> {
        for (i, w) in chain.windows(2).enumerate() {
            if !w[1].is_subset(&w[0]) {
                return Err(Error::ChainNotDecreasing(i + 1));
            }
        }
        if chain.last().is_some_and(|last| !last.is_empty()) {
            return Err(Error::ChainNotShrinking);
        }
        Ok(chain.iter().map(|a| s_norm(&self.measure_of(a), self.s())).collect())
    }

    fn check_pp(&self, other: &CellMeasure) -> Result<()> {
        if self.pp != other.pp {
            return Err(Error::PrimeMismatch(self.p(), other.p()));
        }
        Ok(())
    }

    fn check_set(&self, a: &ClopenSet) {
        assert_eq!(a.dim(), self.dim(), "set dimension");
        assert_eq!(a.p(), self.p(), "set prime");
    }
}

/// `μ = Σ_y ν(y) μ_y` over a finite mixing base.
///
/// Errors if the mixture violates `‖A‖_μ ≤ sup_y ‖A‖_{μ_y} · ‖Y‖_ν` on its cells.
pub fn mix(family: &[(Q, CellMeasure)]) -> Result<CellMeasure> {
    let Some((_, first)) = family.first() else {
        return Err(Error::Invalid("empty mixing base".into()));
    };
    let (pp, dim) = (first.pp(), first.dim());
    let mut cells = Vec::new();
    for (w, mu) in family {
        if mu.pp() != pp {
            return Err(Error::PrimeMismatch(pp.p, mu.p()));
        }
        if mu.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: mu.dim() });
        }
        cells.extend(mu.cells().iter().map(|(b, d)| (b.clone(), w * d)));
    }
    let out = CellMeasure::from_overlapping(pp, dim, cells)?;
    let nu_norm = family.iter().map(|(w, _)| s_norm(w, pp.s)).max().unwrap_or(SNorm::Zero);
    for (b, _) in out.cells() {
        let a = ClopenSet::from_ball(b.clone());
        let sup = family.iter().map(|(_, mu)| mu.mu_norm(&a)).max().unwrap_or(SNorm::Zero);
        if out.mu_norm(&a) > sup * nu_norm {
            return Err(Error::Invalid(format!("mixture norm bound fails on {b}")));
        }
    }
    Ok(out)
}
