use num_traits::Zero;

use crate::rational::{pow, Q};

use super::ball::Ball;
use super::clopen::ClopenSet;
use super::valuation::{ord, Valuation};

/// One shell `S(j, n)`: the annulus `p^j Z_p ∖ p^{j+1} Z_p` for `j < n`, or `p^n Z_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shell {
    pub j: i64,
    pub set: ClopenSet,
    pub haar: Q,
}

impl Shell {
    pub fn new(p: u32, j: i64, n: i64) -> Self {
        assert!(j <= n, "shell index above level");
        let set = if j == n {
            ClopenSet::from_ball(Ball::new1(p, Q::zero(), n))
        } else {
            let balls = (1..p)
                .map(|u| Ball::new1(p, pow(p, j) * Q::from_integer(u.into()), j + 1))
                .collect();
            ClopenSet::canonicalize(p, 1, balls)
        };
        let haar = set.haar();
        Self { j, set, haar }
    }
}

/// The shells `S(j, n)` for `j` in `[j_min, n]`; together they tile `p^{j_min} Z_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShellSystem {
    pub p: u32,
    pub n: i64,
    pub j_min: i64,
    pub shells: Vec<Shell>,
}

impl ShellSystem {
    pub fn new(p: u32, n: i64, j_min: i64) -> Self {
        assert!(j_min <= n, "window must end at the level");
        let shells = (j_min..=n).map(|j| Shell::new(p, j, n)).collect();
        Self { p, n, j_min, shells }
    }

    pub fn total_haar(&self) -> Q {
        self.shells.iter().map(|s| &s.haar).fold(Q::zero(), |a, b| a + b)
    }

    pub fn shell(&self, j: i64) -> Option<&Shell> {
        self.shells.iter().find(|s| s.j == j)
    }
}

/// Index `j` of the shell `S(j, n)` containing `x`: `min(ord x, n)`.
pub fn shell_index(x: &Q, p: u32, n: i64) -> i64 {
    match ord(x, p) {
        Valuation::Infinite => n,
        Valuation::Finite(v) => v.min(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn shell_examples() {
        let sys = ShellSystem::new(2, 1, 0);
        assert_eq!(sys.shell(0).unwrap().haar, qf(1, 2));
        assert_eq!(sys.shell(1).unwrap().haar, qf(1, 2));
        assert!(sys.shell(0).unwrap().set.contains_point(&[q(1)]));
        assert!(sys.shell(1).unwrap().set.contains_point(&[q(2)]));
        assert_eq!(Shell::new(3, -1, 0).haar, q(2));
    }

    #[test]
    fn window_tiles_ball() {
        for n in 0..=5 {
            for j_min in -5..=n {
                let sys = ShellSystem::new(3, n, j_min);
                assert_eq!(sys.total_haar(), pow(3, -j_min));
            }
        }
    }

    #[test]
    fn index_matches_membership() {
        assert_eq!(shell_index(&q(0), 2, 3), 3);
        assert_eq!(shell_index(&q(16), 2, 3), 3);
        assert_eq!(shell_index(&qf(3, 4), 2, 3), -2);
    }
}
