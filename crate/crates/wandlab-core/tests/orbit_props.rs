mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use wandlab_core::orbit::*;
use wandlab_core::params::{Degree, IndexKey, ParameterSet};
use wandlab_core::tower::{CertifiedOrdering, TowerReal};

/// d_111 at lambda = 4 pi, neighborhood 0.05, budget 1e-6; recomputed by
/// the plain MPFR oracle below and by a 400-digit mpmath session.
const D111: &str = "171453483760162128051794429063544672103935682993033060626836350754450147813899762647704213998618797127797653654278313451540308806451369246542901235493126";

#[test]
fn spacing_and_derivative_verdicts_through_step_25() {
    let o = iterate_orbit(&ParameterSet::new(4), DEFAULT_SYMBOLIC_STEPS).unwrap();
    assert_eq!(o.len(), 26);
    for r in &o {
        assert_eq!(r.spacing, CertifiedOrdering::Greater, "step {}", r.k);
        assert_eq!(r.deriv, CertifiedOrdering::Greater, "step {}", r.k);
    }
    for (k, v) in factorial_growth(&o) {
        assert!(v.is_ge(), "factorial floor at {k}: {v:?}");
    }
    // the second step already needs level 3: ln x_2 = 4 pi sinh(x_1) - ln 2
    assert!(o[2].x.level() >= 3);
    let c = ConcreteOrbit::new(&ParameterSet::new(4));
    let ln_x2 = TowerReal::from_interval(c.ln_x2.to_interval()).unwrap();
    assert_eq!(o[2].x.ln().unwrap().compare(&ln_x2), CertifiedOrdering::Indeterminate, "enclosures overlap");
}

#[test]
fn orbit_step_values_at_four_pi() {
    let o = iterate_orbit(&ParameterSet::new(4), 1).unwrap();
    let x1 = o[1].x.to_interval().unwrap();
    // x_1 - x_0 is about 348.5
    assert!((x1.mid() - 0.5 - 348.52).abs() < 0.01);
    let fp = o[0].ln_fprime.to_interval().unwrap().mid().exp();
    assert!((fp - 4945.0).abs() < 1.0, "{fp}");
}

#[test]
fn landing_index_for_four_pi() {
    let p = ParameterSet::new(4);
    let o = iterate_orbit(&p, 3).unwrap();
    let l1 = select_p(1, &o, &p).unwrap();
    assert_eq!(l1.index, Some(111));
    assert!(l1.gap < gap_bound().lo);
    let l2 = select_p(2, &o, &p).unwrap();
    assert!(l2.index.is_none());
    assert_eq!(l2.proxy.compare(&l1.proxy), CertifiedOrdering::Greater);
}

#[test]
fn koebe_constants_exact() {
    let (inner, outer) = pullback_constants();
    assert_eq!(inner, BigRational::new(BigInt::from(1), BigInt::from(108)));
    assert!(inner >= BigRational::new(BigInt::from(9), BigInt::from(1000)));
    assert_eq!(outer, BigRational::from_integer(BigInt::from(20)));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let k = koebe_factors_exact(&half).unwrap();
    assert_eq!(k.deriv_max, BigRational::from_integer(BigInt::from(12)));
    assert_eq!(k.deriv_min, BigRational::new(BigInt::from(4), BigInt::from(27)));
}

#[test]
fn landing_degree_matches_oracle() {
    let p = ParameterSet::new(4);
    let a = adjust_parameters(&p, 1).unwrap();
    let Degree::Exact(d) = &a.params.d_overrides[&IndexKey::Literal(111)] else { panic!() };
    let oracle = common::smallest_landing_degree(4, p.neighborhood_radius, p.correction_budget);
    assert_eq!(d.to_string(), oracle.to_string());
    assert_eq!(d.to_string(), D111);
    assert!(a.steps[0].d_smallest);
}

#[test]
fn shooting_oracle_agrees_with_first_certificate() {
    let p = ParameterSet::new(4);
    let o = iterate_orbit(&p, 2).unwrap();
    let cert = build_U(1, &o, &p).unwrap();
    let shot = common::shoot(4, 111, 10_000);
    assert!(shot.max_residual < 1e-30, "{}", shot.max_residual);
    let (r_in, r_out) = (cert.radius_inner.unwrap(), cert.radius_outer.unwrap());
    let off = cert.center_offset.unwrap();
    let c = (0.5 + off.re.mid(), off.im.mid());
    let oc = shot.center.to_f64();
    assert!((oc.0 - c.0).hypot(oc.1 - c.1) < 1e-6 * r_in);
    for &(x, y) in &shot.boundary {
        assert!((x - 0.5).hypot(y) <= r_out, "sample outside the outer disk");
    }
    assert_eq!(common::winding(&shot.boundary, c), 1);
    let n = shot.boundary.len();
    let dmin = (0..n).map(|i| common::seg_dist(c, shot.boundary[i], shot.boundary[(i + 1) % n])).fold(f64::INFINITY, f64::min);
    assert!(dmin >= r_in * (1.0 - 1e-6), "{dmin} vs {r_in}");
}

#[test]
fn nesting_for_the_first_two_steps() {
    let a = adjust_parameters(&ParameterSet::new(4), 2).unwrap();
    assert_eq!(a.nesting[0].regime, Regime::Concrete);
    assert!(a.nesting[0].margin.unwrap() > 0.0);
    assert_eq!(a.nesting[1].regime, Regime::Symbolic);
    assert!(a.nesting.iter().all(|c| c.passed()));
    let json = serde_json::to_string(&a.to_json_value()).unwrap();
    assert!(json.contains("center(U2)"));
    let back = ParameterSet::from_json(&a.params.to_json()).unwrap();
    assert_eq!(back.d_overrides, a.params.d_overrides);
}

#[test]
fn budget_and_monotonicity_errors() {
    let mut p = ParameterSet::new(4);
    p.correction_budget = 0.0;
    assert!(matches!(adjust_parameters(&p, 1), Err(OrbitError::Budget { n: 1, .. })));
    let mut p = ParameterSet::new(4);
    p.d_overrides.insert(IndexKey::Literal(3), Degree::small(2));
    assert!(adjust_parameters(&p, 1).is_err());
    assert!(matches!(iterate_orbit(&ParameterSet::new(1), 2), Err(OrbitError::EscapeCondition(_))));
}

#[test]
fn radius_sandwich_for_every_certificate() {
    let p = ParameterSet::new(4);
    let o = iterate_orbit(&p, 6).unwrap();
    for n in 1..=5 {
        let c = build_U(n, &o, &p).unwrap();
        assert!(c.passed(), "n = {n}");
        if let (Some(i), Some(out)) = (c.radius_inner, c.radius_outer) {
            assert!(i / out >= 0.009 / 20.0 * (1.0 - 1e-9));
        }
        // ln r_in - ln r_out = ln(0.009 / 20) exactly; towers only see the leading term
        assert_ne!(c.ln_radius_inner.compare(&c.ln_radius_outer), CertifiedOrdering::Greater);
    }
}

static FIRST: std::sync::LazyLock<(ParameterSet, PullbackCertificate)> = std::sync::LazyLock::new(|| {
    let p = ParameterSet::new(4);
    let o = iterate_orbit(&p, 2).unwrap();
    let c = build_U(1, &o, &p).unwrap();
    (p, c)
});

proptest! {
    #[test]
    fn koebe_bounds_bracket_identity(r in 1e-6f64..0.999) {
        let k = koebe_factors(r).unwrap();
        prop_assert!(k.growth_min <= r && r <= k.growth_max);
        prop_assert!(k.deriv_min <= 1.0 && 1.0 <= k.deriv_max);
        prop_assert_eq!(k.quarter, 0.25);
    }

    #[test]
    fn koebe_factors_tend_to_one(r in 1e-12f64..1e-9) {
        let k = koebe_factors(r).unwrap();
        prop_assert!((k.growth_max / r - 1.0).abs() < 1e-8);
        prop_assert!((k.deriv_min - 1.0).abs() < 1e-8);
    }

    #[test]
    fn exact_and_float_factors_agree(num in 1u32..999) {
        let r = BigRational::new(BigInt::from(num), BigInt::from(1000));
        let e = koebe_factors_exact(&r).unwrap();
        let f = koebe_factors(num as f64 / 1000.0).unwrap();
        let v = |q: &BigRational| num_traits::ToPrimitive::to_f64(q).unwrap();
        prop_assert!((v(&e.growth_max) / f.growth_max - 1.0).abs() < 1e-12);
        prop_assert!((v(&e.deriv_min) / f.deriv_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_degree_shrinks_landing(d in 1u64..200) {
        let (p, cert) = &*FIRST;
        let mut q = p.clone();
        q.d_overrides.insert(IndexKey::Literal(111), Degree::small(2 * d));
        let a = schwarz_landing(1, cert, &q).unwrap();
        q.d_overrides.insert(IndexKey::Literal(111), Degree::small(4 * d));
        let b = schwarz_landing(1, cert, &q).unwrap();
        prop_assert_eq!(b.ln_radius.compare(&a.ln_radius), CertifiedOrdering::Less);
    }
}
