use num_complex::Complex64;
use proptest::prelude::*;
use wandlab_core::graph::geometry::{check_bounded_geometry, geometry_sweep, spacing_ratios, tau_size_strip_edges};
use wandlab_core::graph::thin::{thin_area, Piece, ThinSetSpec, ThinVerdict};
use wandlab_core::graph::{build_graph, Component};
use wandlab_core::params::ParameterSet;

#[test]
fn spacing_ratio_estimates_hold() {
    for m in [1, 4, 10] {
        for r in spacing_ratios(m, 2000) {
            assert!(r.pass, "lambda = {m} pi: {r:?}");
        }
    }
}

#[test]
fn junction_ratio_is_extremal_at_lambda_pi() {
    let r = &spacing_ratios(1, 1)[2];
    assert!((r.max - r.upper).abs() < 1e-15);
}

#[test]
fn strip_edges_have_tau_size_pi() {
    let t = tau_size_strip_edges(&ParameterSet::new(10), 2000);
    assert_eq!(t.len(), 10 + 1990);
    let worst = t.iter().map(|e| (e.image_length - std::f64::consts::PI).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn geometry_maxima_are_running_and_finite() {
    let sweep = geometry_sweep(&ParameterSet::new(4), 12).unwrap();
    for w in sweep.windows(2) {
        assert!(w[1].max_adjacent_diam_ratio >= w[0].max_adjacent_diam_ratio);
        assert!(w[1].max_nonadjacent_diam_over_dist >= w[0].max_nonadjacent_diam_over_dist);
        assert!(w[1].min_angle <= w[0].min_angle);
    }
    assert!(sweep.iter().all(|r| r.all_finite()));
}

#[test]
fn repeated_builds_give_identical_reports() {
    let p = ParameterSet::new(4);
    let a = check_bounded_geometry(&build_graph(&p, 50).unwrap());
    let b = check_bounded_geometry(&build_graph(&p, 50).unwrap());
    assert_eq!(a, b);
    assert!(a.all_finite());
}

#[test]
fn graph_json_round_trips() {
    let g = build_graph(&ParameterSet::new(4), 3).unwrap();
    let back: wandlab_core::graph::Graph = serde_json::from_str(&g.to_json()).unwrap();
    assert_eq!(back, g);
}

#[test]
fn every_family_is_present() {
    let g = build_graph(&ParameterSet::new(4), 3).unwrap();
    for tag in [Component::StripBoundary, Component::DiskBoundary(3), Component::Connector(2), Component::Ray(1), Component::Axis] {
        assert!(g.edges.iter().any(|e| e.tag == tag), "{tag:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncations_are_bipartite_and_symmetric(k in 1u64..=12, alpha in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0]), n in 1u64..=8) {
        let g = build_graph(&ParameterSet::new(k).with_alpha(alpha), n).unwrap();
        prop_assert_eq!(g.bipartite_violations(), 0);
        prop_assert!(g.is_symmetric(1e-9));
    }

    #[test]
    fn annulus_area_shrinks_with_degree(d in 1u32..40, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let ring = |d: f64| ThinSetSpec::new(vec![Piece::Annulus { center: Complex64::new(0.0, 0.0), outer: 1.0, width: 1.0 - 0.75f64.powf(1.0 / d) }]);
        let z = Complex64::new(x, y);
        let small = thin_area(&ring(2.0 * d as f64 + 2.0), z);
        let large = thin_area(&ring(2.0 * d as f64), z);
        prop_assert!(small.area_lo <= large.area_hi);
        prop_assert!(small.area_lo <= small.area_hi);
    }

    #[test]
    fn far_centers_see_nothing(r in 40.0f64..60.0, t in 0.0f64..6.283) {
        let spec = ThinSetSpec::from_params(&ParameterSet::new(4), 3, 0.1).unwrap();
        let a = thin_area(&spec, Complex64::from_polar(r, t));
        prop_assert_eq!(a.area_hi, 0.0);
        prop_assert_eq!(a.verdict, ThinVerdict::Pass);
    }
}

#[test]
fn antitone_sweep_on_the_comparison_centers() {
    use wandlab_core::graph::thin::*;
    use wandlab_core::params::ParameterSet;
    let c = comparison_centers(4).unwrap();
    assert_eq!(c.len(), 20);
    assert!(c.iter().all(|z| z.norm() <= 30.0));
    let base = ParameterSet::new(4);
    let s = antitone_sweep(&base, &base.clone().with_alpha(2.0), &ParameterSet::new(8), &ParameterSet::new(10).with_alpha(2.0), &c, 11, DEFAULT_R0).unwrap();
    assert!(s.steeper_all, "alpha");
    assert!(s.wider_all, "lambda");
    assert!(s.strong_all, "bound");
}
