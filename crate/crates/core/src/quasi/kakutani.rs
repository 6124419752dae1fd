use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::measures::CellMeasure;
use crate::padic::{Ball, ClopenSet};
use crate::rational::{fmt_q, Q};
use crate::scalar::{s_norm, SNorm};

/// `β = ‖dμ/dν‖_φ` with `φ = N_ν`: the largest `|dμ/dν|_s · |d_ν|_s` over the common
/// refinement of the two densities.
pub fn beta_factor(mu: &CellMeasure, nu: &CellMeasure) -> Result<SNorm> {
    check_ac(mu, nu)?;
    let s = mu.s();
    let mut beta = SNorm::Zero;
    for (b, dn) in nu.cells() {
        for (c, dm) in mu.cells() {
            if b.intersect(c).is_some() {
                beta = beta.max(s_norm(&(dm / dn), s) * s_norm(dn, s));
            }
        }
    }
    Ok(beta)
}

/// `μ ≪ ν` cellwise: `μ` has no mass where `ν`'s density vanishes.
fn check_ac(mu: &CellMeasure, nu: &CellMeasure) -> Result<()> {
    let outside = mu.support().difference(&nu.support());
    match outside.balls().first() {
        Some(b) => Err(Error::NotAbsolutelyContinuous(b.to_string())),
        None => Ok(()),
    }
}

/// What is known about `β_j` beyond the supplied prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KakutaniTail {
    /// `β_j = 1` for every later `j`.
    EventuallyOne,
    /// `β_j <= q < 1` for every `j >= from` (prefix included).
    Geometric { q: Q, from: usize },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KakutaniVerdict {
    /// The infinite product converges to `product ∈ (0, 1]`.
    Equivalent { product: Q },
    /// The product tends to zero under the envelope and the prefix is below tolerance.
    Singular { partial: Q, envelope: Q },
    Inconclusive { partial: Q },
}

/// Classify `Π β_j` from a prefix of exact values and a description of the tail.
pub fn kakutani_classify(betas: &[Q], tail: &KakutaniTail, tol: &Q) -> Result<KakutaniVerdict> {
    for b in betas {
        if !b.is_positive() || *b > Q::one() {
            return Err(Error::BetaOutOfRange(fmt_q(b)));
        }
    }
    let partial: Q = betas.iter().product();
    Ok(match tail {
        KakutaniTail::EventuallyOne => KakutaniVerdict::Equivalent { product: partial },
        KakutaniTail::Geometric { q, from } => {
            if !q.is_positive() || *q >= Q::one() {
                return Err(Error::Invalid(format!("envelope {} is not in (0,1)", fmt_q(q))));
            }
            if let Some(b) = betas.iter().skip(*from).find(|b| *b > q) {
                return Err(Error::Invalid(format!("beta {} exceeds envelope {}", fmt_q(b), fmt_q(q))));
            }
            if partial <= *tol {
                KakutaniVerdict::Singular { partial, envelope: q.clone() }
            } else {
                KakutaniVerdict::Inconclusive { partial }
            }
        }
        KakutaniTail::Unknown => KakutaniVerdict::Inconclusive { partial },
    })
}

/// Direct look at the finite products `⊗_{j<N} μ_j` and `⊗_{j<N} ν_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductInspection {
    pub n: usize,
    /// `β` of the finite products, computed from their cells.
    pub beta: SNorm,
    /// The finite products are mutually absolutely continuous.
    pub equivalent: bool,
}

pub fn inspect_products(pairs: &[(CellMeasure, CellMeasure)], n_max: usize) -> Result<Vec<ProductInspection>> {
    let mut out = Vec::new();
    let Some((mu0, nu0)) = pairs.first() else {
        return Ok(out);
    };
    let (mut mu, mut nu) = (mu0.clone(), nu0.clone());
    for n in 1..=n_max.min(pairs.len()) {
        if n > 1 {
            mu = mu.product(&pairs[n - 1].0)?;
            nu = nu.product(&pairs[n - 1].1)?;
        }
        let beta = beta_factor(&mu, &nu)?;
        let equivalent = mu.support() == nu.support();
        out.push(ProductInspection { n, beta, equivalent });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalityReport {
    /// `N_{μ1}(x) N_{μ2}(x) = 0` everywhere.
    pub orthogonal: bool,
    /// A set `F` with `‖F‖_{μ2} = 0` carrying `μ1` when orthogonal.
    pub separating: ClopenSet,
    /// A region where both norms are positive, otherwise.
    pub witness: Option<Ball>,
}

pub fn orthogonality_check(mu1: &CellMeasure, mu2: &CellMeasure) -> Result<OrthogonalityReport> {
    if mu1.dim() != mu2.dim() {
        return Err(Error::DimensionMismatch { expected: mu1.dim(), got: mu2.dim() });
    }
    // canonical cells carry nonzero densities, so overlap of cells is overlap of supports
    let witness = mu1
        .cells()
        .iter()
        .find_map(|(a, _)| mu2.cells().iter().find_map(|(b, _)| a.intersect(b)));
    let separating = if witness.is_none() {
        mu1.support()
    } else {
        ClopenSet::empty(mu1.p(), mu1.dim())
    };
    Ok(OrthogonalityReport { orthogonal: witness.is_none(), separating, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrimePair;
    use crate::rational::{q, qf};

    fn pp() -> PrimePair {
        PrimePair::new(2, 3).unwrap()
    }

    fn haar() -> CellMeasure {
        CellMeasure::haar(pp(), Ball::unit(2, 1))
    }

    fn singular_factor() -> CellMeasure {
        CellMeasure::new(pp(), 1, vec![(Ball::new1(2, q(0), 1), q(3))]).unwrap()
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_factor(&haar(), &haar()).unwrap(), SNorm::ONE);
        assert_eq!(beta_factor(&singular_factor(), &haar()).unwrap(), SNorm::Pow(-1));
        assert_eq!(beta_factor(&haar().scale(&q(9)), &haar()).unwrap(), SNorm::Pow(-2));
        assert!(matches!(
            beta_factor(&haar(), &singular_factor()),
            Err(Error::NotAbsolutelyContinuous(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let ones = vec![q(1); 4];
        assert_eq!(
            kakutani_classify(&ones, &KakutaniTail::EventuallyOne, &qf(1, 1000)).unwrap(),
            KakutaniVerdict::Equivalent { product: q(1) }
        );
        let thirds = vec![qf(1, 3); 12];
        let tail = KakutaniTail::Geometric { q: qf(1, 3), from: 0 };
        assert!(matches!(
            kakutani_classify(&thirds, &tail, &qf(1, 1000)).unwrap(),
            KakutaniVerdict::Singular { .. }
        ));
        let mut prefix = vec![qf(1, 3); 5];
        prefix.extend(vec![q(1); 3]);
        assert_eq!(
            kakutani_classify(&prefix, &KakutaniTail::EventuallyOne, &qf(1, 1000)).unwrap(),
            KakutaniVerdict::Equivalent { product: qf(1, 243) }
        );
        assert!(matches!(
            kakutani_classify(&[q(3)], &KakutaniTail::Unknown, &q(0)),
            Err(Error::BetaOutOfRange(_))
        ));
    }

    #[test]
    fn orthogonality_examples() {
        let a = CellMeasure::haar(pp(), Ball::new1(2, q(0), 1));
        let b = CellMeasure::haar(pp(), Ball::new1(2, q(1), 1));
        let r = orthogonality_check(&a, &b).unwrap();
        assert!(r.orthogonal);
        assert_eq!(r.separating, a.support());
        assert!(!orthogonality_check(&haar(), &haar()).unwrap().orthogonal);
    }

    #[test]
    fn products_track_beta() {
        let pairs: Vec<_> = (0..4).map(|_| (singular_factor(), haar())).collect();
        let rows = inspect_products(&pairs, 4).unwrap();
        assert_eq!(rows.iter().map(|r| r.beta).collect::<Vec<_>>(),
            vec![SNorm::Pow(-1), SNorm::Pow(-2), SNorm::Pow(-3), SNorm::Pow(-4)]);
        assert!(rows.iter().all(|r| !r.equivalent));
    }
}
