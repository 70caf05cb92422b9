use num_complex::Complex64;
use proptest::prelude::*;
use wandlab_core::graph::build_graph;
use wandlab_core::model::ModelMap;
use wandlab_core::params::ParameterSet;
use wandlab_core::render::*;

fn job() -> RasterJob {
    let mut j = RasterJob::new((-8.0, 8.0), (-4.5, 4.5), 96, 54);
    j.max_steps = 24;
    j
}

#[test]
fn repeat_renders_are_byte_identical() {
    let p = ParameterSet::new(4);
    let a = render(&job(), &p, None).unwrap();
    let b = render(&job(), &p, None).unwrap();
    assert_eq!(a.ppm, b.ppm);
    assert_eq!(a.csv, b.csv);
    assert_eq!(a.legend, b.legend);
    assert_eq!(a.ppm.len(), "P6\n96 54\n255\n".len() + 96 * 54 * 3);
}

#[test]
fn symmetric_window_mirrors_rows() {
    let j = job();
    let out = render(&j, &ParameterSet::new(4), None).unwrap();
    let (w, h) = (j.width as usize, j.height as usize);
    for r in 0..h {
        assert_eq!(out.classes[r * w..(r + 1) * w], out.classes[(h - 1 - r) * w..(h - r) * w], "row {r}");
    }
    // every class except the chain shows up in this window
    for code in ["escaping", "entered-disk", "outside-model"] {
        assert!(out.classes.iter().any(|c| c.code() == code), "{code}");
    }
}

#[test]
fn single_pixel_on_the_critical_value() {
    let j = RasterJob::new((0.5, 0.5), (0.0, 0.0), 1, 1);
    let out = render(&j, &ParameterSet::new(4), None).unwrap();
    assert!(matches!(out.classes[0], PointClass::Escaping { .. }));
    assert_eq!(out.csv.lines().next().unwrap(), "x,y,class,steps,detail");
    assert!(out.csv.lines().nth(1).unwrap().starts_with("5e-1,0e0,escaping,1,"));
}

#[test]
fn zero_steps_leave_everything_undetermined() {
    let mut j = job();
    j.max_steps = 0;
    let out = render(&j, &ParameterSet::new(4), None).unwrap();
    assert!(out.classes.iter().all(|c| *c == PointClass::Undetermined));
    assert_eq!(out.legend["counts"]["undetermined"], 96 * 54);
}

#[test]
fn graph_overlay_only_changes_colors() {
    let p = ParameterSet::new(4);
    let g = build_graph(&p, 3).unwrap();
    let mut j = job();
    let plain = render(&j, &p, Some(&g)).unwrap();
    j.overlay_graph = true;
    let over = render(&j, &p, Some(&g)).unwrap();
    assert_eq!(plain.classes, over.classes);
    assert_ne!(plain.ppm, over.ppm);
}

#[test]
fn outputs_are_written() {
    let dir = std::env::temp_dir().join(format!("wandlab-render-{}", std::process::id()));
    let out = render(&RasterJob::new((0.0, 1.0), (-1.0, 1.0), 4, 4), &ParameterSet::new(4), None).unwrap();
    let files = out.write(&dir, "r").unwrap();
    assert_eq!(files.len(), 3);
    assert_eq!(std::fs::read(&files[0]).unwrap(), out.ppm);
    std::fs::remove_dir_all(dir).unwrap();
}

static CTX: std::sync::LazyLock<(ModelMap, UChain)> = std::sync::LazyLock::new(|| {
    let p = ParameterSet::new(4);
    (ModelMap::new(p.clone(), 32).unwrap(), UChain::from_params(&p))
});

proptest! {
    #[test]
    fn conjugate_points_share_a_class(x in -40.0f64..40.0, y in -6.0f64..6.0, steps in 0u32..30) {
        let (m, c) = &*CTX;
        let z = Complex64::new(x, y);
        prop_assert_eq!(classify_point(z, m, c, steps, 2), classify_point(z.conj(), m, c, steps, 2));
    }

    #[test]
    fn more_steps_never_undo_a_verdict(x in -20.0f64..20.0, y in -4.0f64..4.0, steps in 1u32..20) {
        let (m, c) = &*CTX;
        let z = Complex64::new(x, y);
        let a = classify_point(z, m, c, steps, 2);
        if a != PointClass::Undetermined {
            prop_assert_eq!(a, classify_point(z, m, c, steps + 10, 2));
        }
    }
}
