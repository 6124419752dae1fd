use num_traits::Zero;
use proptest::prelude::*;

use uml_core::fourier::{invert, theta, DualGrid, ThetaTable};
use uml_core::measures::{CellMeasure, StepFunction};
use uml_core::padic::{Ball, PrimePair};
use uml_core::pdiff::{pd_evaluate, Domain};
use uml_core::quasi::{rho_shift, Factor, FactorFamily, ShellDensityMeasure};
use uml_core::rational::{q, qf};
use uml_core::scalar::{s_norm, BParam, SNorm};
use uml_core::weakdist::{consistency_check, default_samples, tightness_check, WeakDistribution};
use uml_core::Q;

fn pp() -> PrimePair {
    PrimePair::new(2, 3).unwrap()
}

fn rational() -> impl Strategy<Value = Q> {
    (-12i64..=12, 1i64..=9).prop_map(|(n, d)| qf(n, d))
}

/// A dyadic point `a / 2^b`.
fn point() -> impl Strategy<Value = Q> {
    (-16i64..16, 0u32..3).prop_map(|(a, b)| qf(a, 1 << b))
}

fn ball() -> impl Strategy<Value = Ball> {
    (point(), -2i64..4).prop_map(|(c, k)| Ball::new1(2, c, k))
}

fn measure() -> impl Strategy<Value = CellMeasure> {
    prop::collection::vec((ball(), rational()), 1..4)
        .prop_map(|cells| CellMeasure::from_overlapping(pp(), 1, cells).unwrap())
}

fn step() -> impl Strategy<Value = StepFunction<Q>> {
    prop::collection::vec((ball(), rational()), 1..4)
        .prop_map(|pieces| StepFunction::from_overlapping(2, 1, pieces).unwrap())
}

/// Measures of total mass one, or `None` when the mass vanishes.
fn probability() -> impl Strategy<Value = CellMeasure> {
    measure().prop_filter_map("zero mass", |m| {
        let t = m.total_mass();
        (!t.is_zero()).then(|| m.scale(&(Q::from_integer(1.into()) / t)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_table_inverts(mu in measure()) {
        let back = invert(&ThetaTable::sample(&mu, DualGrid::for_measure(&mu, 0)), pp()).unwrap();
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn theta_of_convolution_is_product(a in measure(), b in measure(), z in point()) {
        let c = a.convolve(&b).unwrap();
        let z = [z];
        prop_assert_eq!(theta(&c, &z), &theta(&a, &z) * &theta(&b, &z));
    }

    #[test]
    fn s_norm_is_ultrametric(a in rational(), b in rational()) {
        prop_assert!(s_norm(&(&a + &b), 3) <= s_norm(&a, 3).max(s_norm(&b, 3)));
        prop_assert_eq!(s_norm(&(&a * &b), 3), s_norm(&a, 3) * s_norm(&b, 3));
    }

    #[test]
    fn pd_is_linear(f in step(), g in step(), c in rational(), x in point()) {
        let at = BParam::at(q(1), 3).unwrap();
        let eval = |h: &StepFunction<Q>| pd_evaluate(pp(), h, &x, Domain::FullK, &at).unwrap().exact().cloned().unwrap();
        let lhs = eval(&f.add(&g.scale(&c)));
        prop_assert_eq!(lhs, eval(&f) + c * eval(&g));
    }

    #[test]
    fn pd_commutes_with_translation(f in step(), x in point(), a in point()) {
        let at = BParam::at(q(1), 3).unwrap();
        let moved = pd_evaluate(pp(), &f.translate(std::slice::from_ref(&a)), &(&x + &a), Domain::FullK, &at).unwrap();
        let here = pd_evaluate(pp(), &f, &x, Domain::FullK, &at).unwrap();
        prop_assert_eq!(moved.exact(), here.exact());
    }

    #[test]
    fn shift_density_is_a_cocycle(a in point(), b in point(), x in point()) {
        let fam = FactorFamily::new(vec![Factor::Shell(ShellDensityMeasure::new(pp(), 2).unwrap())]).unwrap();
        let r = |shift: &Q, at: &Q| rho_shift(&fam, std::slice::from_ref(shift), std::slice::from_ref(at), 1);
        // undefined where the density vanishes
        if let (Ok(ab), Ok(ra), Ok(rb)) = (r(&(&a + &b), &x), r(&a, &x), r(&b, &(&x - &a))) {
            prop_assert_eq!(ab, ra * rb);
        }
    }

    #[test]
    fn product_towers_are_consistent(fs in prop::collection::vec(probability(), 3)) {
        let wd = WeakDistribution::product_tower(&fs, &[1, 2, 3]).unwrap();
        prop_assert!(consistency_check(&wd, &default_samples(&wd)).passed());
    }

    #[test]
    fn mass_defect_breaks_consistency(fs in prop::collection::vec(probability(), 2), k in 2i64..5) {
        let mut fs = fs;
        fs[1] = fs[1].scale(&q(k));
        let wd = WeakDistribution::product_tower(&fs, &[1, 2]).unwrap();
        prop_assert!(!consistency_check(&wd, &default_samples(&wd)).passed());
    }

    #[test]
    fn tightness_is_monotone_in_c(fs in prop::collection::vec(probability(), 3), c in -3i64..3, d in 0i64..3) {
        let wd = WeakDistribution::product_tower(&fs, &[1, 2, 3]).unwrap();
        let grid: Vec<i64> = (-4..=6).collect();
        let tight = tightness_check(&wd, SNorm::Pow(c), &grid, SNorm::Pow(10));
        let loose = tightness_check(&wd, SNorm::Pow(c + d), &grid, SNorm::Pow(10));
        for (t, l) in tight.least_radius.iter().zip(&loose.least_radius) {
            if let Some(t) = t {
                prop_assert!(l.is_some_and(|l| l <= *t));
            }
        }
        if let Some(t) = tight.uniform {
            prop_assert!(loose.uniform.is_some_and(|l| l <= t));
        }
    }
}
