use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{ord, Ball, Shell, Valuation};
use crate::rational::{pow, q, qpow, Q};

/// How the two-argument valuation `ord_p(y, ξ)` in the kernel exponent is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OrdReading {
    /// `ord_p(y / ξ)`.
    #[default]
    Quotient,
    /// `ord_p(y · ξ)`.
    Product,
}

impl OrdReading {
    pub fn label(self) -> &'static str {
        match self {
            OrdReading::Quotient => "ord_p(y/xi)",
            OrdReading::Product => "ord_p(y*xi)",
        }
    }
}

/// The probability density `C s^{-q min(0, ord(x - x0) - ρ)}` on `Q_p`.
///
/// It is flat (value `C`) on the core `B(x0, ρ)` and equals `C s^{q(ρ-k)}` on the
/// annulus `ord(x - x0) = k < ρ`. The constant `C = p^ρ (1 - s^q p) / (1 - s^q)`
/// makes the total mass one in `Q_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerKernel {
    p: u32,
    s: u32,
    q: u32,
    rho: i64,
    center: Q,
    c: Q,
}

impl PowerKernel {
    pub fn new(p: u32, s: u32, q_exp: u32, rho: i64, center: Q) -> Result<Self> {
        if q_exp == 0 {
            return Err(Error::Invalid("kernel exponent q must be positive".into()));
        }
        let sq = pow(s, q_exp as i64);
        let c = pow(p, rho) * (Q::one() - &sq * q(p as i64)) / (Q::one() - &sq);
        Ok(Self { p, s, q: q_exp, rho, center, c })
    }

    /// The kernel for frequency `ξ`: the core exponent is `ord ξ` under the quotient
    /// reading and `-ord ξ` under the product reading.
    pub fn from_xi(p: u32, s: u32, q_exp: u32, xi: &Q, center: Q, reading: OrdReading) -> Result<Self> {
        let Valuation::Finite(v) = ord(xi, p) else {
            return Err(Error::Invalid("frequency must be nonzero".into()));
        };
        let rho = match reading {
            OrdReading::Quotient => v,
            OrdReading::Product => -v,
        };
        Self::new(p, s, q_exp, rho, center)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn rho(&self) -> i64 {
        self.rho
    }

    pub fn q_exp(&self) -> u32 {
        self.q
    }

    pub fn constant(&self) -> &Q {
        &self.c
    }

    pub fn center(&self) -> &Q {
        &self.center
    }

    fn sq(&self) -> Q {
        pow(self.s, self.q as i64)
    }

    /// Density on the annulus `ord(x - x0) = k`, or on the core when `k >= ρ`.
    fn shell_value(&self, k: i64) -> Q {
        if k >= self.rho {
            self.c.clone()
        } else {
            &self.c * pow(self.s, self.q as i64 * (self.rho - k))
        }
    }

    pub fn density(&self, x: &Q) -> Q {
        match ord(&(x - &self.center), self.p) {
            Valuation::Infinite => self.c.clone(),
            Valuation::Finite(k) => self.shell_value(k),
        }
    }

    /// Mass of a one-dimensional ball.
    pub fn ball_mass(&self, ball: &Ball) -> Q {
        assert_eq!(ball.dim(), 1);
        let (a, k) = (&ball.center()[0], ball.radius_exp()[0]);
        if !ord(&(a - &self.center), self.p).at_least(k) || k >= self.rho {
            return self.density(a) * ball.haar();
        }
        let mut total = &self.c * pow(self.p, -self.rho);
        for j in k..self.rho {
            total += self.shell_value(j) * Shell::new(self.p, j, self.rho).haar;
        }
        total
    }

    /// Fourier transform `∫ χ(x y) ν(dy)` of the kernel recentred at `0`.
    ///
    /// It is `1 - (s^q p)^{ρ + ord x + 1}` when `ord x + ρ >= 0` and zero otherwise.
    pub fn transform(&self, x: &Q) -> Q {
        match ord(x, self.p) {
            Valuation::Infinite => Q::one(),
            Valuation::Finite(k) if k + self.rho < 0 => Q::zero(),
            Valuation::Finite(k) => {
                let r = self.sq() * q(self.p as i64);
                Q::one() - num_traits::pow(r, (self.rho + k + 1) as usize)
            }
        }
    }

    /// `∫_B transform(x) dx` over a one-dimensional ball.
    pub fn transform_ball_integral(&self, ball: &Ball) -> Q {
        assert_eq!(ball.dim(), 1);
        let (a, k) = (&ball.center()[0], ball.radius_exp()[0]);
        if !ord(a, self.p).at_least(k) {
            return self.transform(a) * ball.haar();
        }
        // the transform vanishes off B(0, -ρ)
        let j0 = k.max(-self.rho);
        let sq = self.sq();
        let r = &sq * q(self.p as i64);
        pow(self.p, -j0)
            - (Q::one() - pow(self.p, -1)) * qpow(&r, self.rho + 1) * qpow(&sq, j0) / (Q::one() - sq)
    }

    pub fn is_normalized(&self) -> bool {
        // mass = C p^{-ρ} (1 - s^q) / (1 - s^q p)
        let sq = self.sq();
        let mass = &self.c * pow(self.p, -self.rho) * (Q::one() - &sq) / (Q::one() - &sq * q(self.p as i64));
        mass.is_one() && !self.c.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn normalized_and_flat_core() {
        let k = PowerKernel::new(2, 3, 2, 1, q(0)).unwrap();
        assert!(k.is_normalized());
        assert_eq!(k.density(&q(2)), k.density(&q(0)));
        assert_eq!(k.density(&q(1)), k.constant() * q(9));
        assert_eq!(k.density(&qf(1, 2)), k.constant() * q(81));
    }

    #[test]
    fn ball_mass_partial_sums() {
        // Z_2 mass against direct shell sums
        let k = PowerKernel::new(2, 3, 1, 2, q(0)).unwrap();
        let direct = k.constant() * qf(1, 4)
            + k.density(&q(2)) * qf(1, 4)
            + k.density(&q(1)) * qf(1, 2);
        assert_eq!(k.ball_mass(&Ball::unit(2, 1)), direct);
        assert_eq!(k.ball_mass(&Ball::new1(2, q(1), 3)), k.density(&q(1)) * qf(1, 8));
    }

    #[test]
    fn transform_integral_matches_shell_sum() {
        let k = PowerKernel::new(2, 3, 2, 1, q(0)).unwrap();
        // ∫_{B(0,0)} ν̂ = Σ_{K>=0} ν̂(p^K) Haar(ord = K); the constant part of the
        // truncated sum is completed by the Haar mass of B(0,40)
        let mut partial = pow(2, -40);
        for kk in 0..40 {
            partial += k.transform(&pow(2, kk)) * pow(2, -kk) * qf(1, 2);
        }
        let closed = k.transform_ball_integral(&Ball::unit(2, 1));
        let gap = crate::scalar::s_norm(&(closed - partial), 3);
        assert!(gap <= crate::scalar::SNorm::Pow(-40));
        assert_eq!(k.transform(&qf(1, 4)), Q::zero());
    }

    #[test]
    fn readings_flip_core() {
        let a = PowerKernel::from_xi(2, 3, 2, &qf(1, 8), q(0), OrdReading::Quotient).unwrap();
        let b = PowerKernel::from_xi(2, 3, 2, &qf(1, 8), q(0), OrdReading::Product).unwrap();
        assert_eq!((a.rho(), b.rho()), (-3, 3));
    }
}
