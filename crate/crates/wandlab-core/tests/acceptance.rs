//! End-to-end acceptance run: one line per criterion, then a single verdict.

mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use std::time::Instant;
use wandlab_core::compose;
use wandlab_core::graph::geometry::strip_vertex_residuals;
use wandlab_core::graph::thin::{antitone_sweep, comparison_centers, DEFAULT_R0};
use wandlab_core::model::{compute_a_certified, ModelMap};
use wandlab_core::orbit::{adjust_parameters, build_U, factorial_growth, iterate_orbit, pullback_constants, Regime};
use wandlab_core::params::ParameterSet;
use wandlab_core::render::{render, RasterJob};
use wandlab_core::tower::CertifiedOrdering;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a_bounds() -> Check {
    let t = Instant::now();
    for k in [1, 4, 10] {
        for n in 1..=500 {
            let c = compute_a_certified(n, k).map_err(|e| format!("lambda {k} pi, n {n}: {e}"))?;
            if !(c.upper_ok && c.lower_ok) {
                return Err(format!("lambda {k} pi, n {n}: upper {} lower {}", c.upper_ok, c.lower_ok));
            }
        }
    }
    let s = t.elapsed().as_secs_f64();
    ensure(s < 2.0, format!("1500 values certified in {s:.2} s"))
}

fn vertex_identity() -> Check {
    let r = strip_vertex_residuals(&ParameterSet::new(4), 10_000);
    ensure(r.max_residual < 1e-9, format!("{} vertices, max residual {:.2e}", r.count, r.max_residual))
}

fn escape_estimates() -> Check {
    let o = iterate_orbit(&ParameterSet::new(4), 25).map_err(|e| e.to_string())?;
    let bad = o
        .iter()
        .filter(|r| r.spacing != CertifiedOrdering::Greater || r.deriv != CertifiedOrdering::Greater)
        .count();
    ensure(o.len() == 26 && bad == 0, format!("steps 0..=25, {bad} not certified"))
}

fn factorial_growth_check() -> Check {
    let o = iterate_orbit(&ParameterSet::new(4), 25).map_err(|e| e.to_string())?;
    let f = factorial_growth(&o);
    let bad: Vec<_> = f.iter().filter(|(_, v)| !v.is_ge()).map(|(k, _)| *k).collect();
    ensure(f.len() >= 25 && bad.is_empty(), format!("{} levels, failing {bad:?}", f.len()))
}

fn koebe_constants() -> Check {
    let (inner, outer) = pullback_constants();
    let ok = inner == BigRational::new(BigInt::from(1), BigInt::from(108))
        && inner >= BigRational::new(BigInt::from(9), BigInt::from(1000))
        && outer == BigRational::from_integer(BigInt::from(20));
    ensure(ok, format!("inner {inner}, outer {outer}"))
}

fn wandering_step() -> Check {
    let t = Instant::now();
    let a = adjust_parameters(&ParameterSet::new(4), 2).map_err(|e| e.to_string())?;
    let s = t.elapsed().as_secs_f64();
    let lines: Vec<String> = a
        .nesting
        .iter()
        .map(|c| format!("U{} -> U{} {:?} margin {:?}", c.n, c.target, c.verdict, c.margin))
        .collect();
    let ok = a.nesting.len() == 2
        && a.nesting.iter().all(|c| c.passed() && c.target == c.n + 1)
        && a.nesting[0].regime == Regime::Concrete
        && a.nesting[0].margin.is_some_and(|m| m > 0.0)
        && s < 60.0;
    ensure(ok, format!("{}; {s:.1} s", lines.join(", ")))
}

fn shooting_oracle() -> Check {
    let p = ParameterSet::new(4);
    let o = iterate_orbit(&p, 2).map_err(|e| e.to_string())?;
    let cert = build_U(1, &o, &p).map_err(|e| e.to_string())?;
    let (Some(r_in), Some(r_out), Some(off)) = (cert.radius_inner, cert.radius_outer, cert.center_offset) else {
        return Err("first certificate has no explicit radii".into());
    };
    let shot = common::shoot(4, 111, 10_000);
    let c = (0.5 + off.re.mid(), off.im.mid());
    let oc = shot.center.to_f64();
    let center_err = (oc.0 - c.0).hypot(oc.1 - c.1) / r_in;
    let far = shot.boundary.iter().map(|&(x, y)| (x - 0.5).hypot(y)).fold(0.0, f64::max);
    let n = shot.boundary.len();
    let near = (0..n)
        .map(|i| common::seg_dist(c, shot.boundary[i], shot.boundary[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min);
    let ok = shot.max_residual < 1e-30
        && center_err < 1e-6
        && far <= r_out * (1.0 + 1e-6)
        && near >= r_in * (1.0 - 1e-6)
        && common::winding(&shot.boundary, c) == 1;
    ensure(
        ok,
        format!("{n} samples; center offset {center_err:.1e} r_in; boundary in [{near:.3e}, {far:.3e}] vs [{r_in:.3e}, {r_out:.3e}]"),
    )
}

fn schedule_chase() -> Check {
    let t = Instant::now();
    let tables = compose::derive_tables(&compose::schedule_statements()).map_err(|e| e.to_string())?;
    let r = compose::verify_schedule(&tables, 200).map_err(|e| e.to_string())?;
    let s = t.elapsed().as_secs_f64();
    let counts = r.levels.iter().all(|l| l.fg_steps == 16 * l.n + 10);
    let periodic_to = r.periodicity.iter().map(|p| p.start).max().unwrap_or(0);
    ensure(
        r.passed() && counts && r.levels.len() == 200 && periodic_to >= 804 && s < 5.0,
        format!("n <= 200, steps 16n+10: {counts}, periodic from every m <= {periodic_to}; {s:.2} s"),
    )
}

fn dilatation() -> Check {
    let m = ModelMap::new(ParameterSet::new(4), 16).map_err(|e| e.to_string())?;
    let sups: Vec<f64> = (1..=100).map(|n| m.dilatation_sup(n, 64, 32, 64).sup_mu).collect();
    let hi = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = sups.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    ensure(hi < 1.0 && spread <= 1e-12, format!("sup |mu| = {hi:.6}, spread over n <= 100 = {spread:.1e}"))
}

fn thin_antitone() -> Check {
    let centers = comparison_centers(4).map_err(|e| e.to_string())?;
    let base = ParameterSet::new(4);
    let s = antitone_sweep(
        &base,
        &base.clone().with_alpha(2.0),
        &ParameterSet::new(8),
        &ParameterSet::new(10).with_alpha(2.0),
        &centers,
        11,
        DEFAULT_R0,
    )
    .map_err(|e| e.to_string())?;
    let in_range = centers.len() == 20 && centers.iter().all(|z| z.norm() <= 30.0);
    ensure(
        in_range && s.passed(),
        format!("{} centers; alpha {}, lambda {}, bound {}", centers.len(), s.steeper_all, s.wider_all, s.strong_all),
    )
}

fn render_symmetry() -> Check {
    let p = ParameterSet::new(4);
    let job = RasterJob::new((0.0, 4.0), (-2.0, 2.0), 64, 48);
    let a = render(&job, &p, None).map_err(|e| e.to_string())?;
    let b = render(&job, &p, None).map_err(|e| e.to_string())?;
    let same = a.ppm == b.ppm && a.csv == b.csv;
    let (w, h) = (64, 48);
    let mirrored = (0..h).all(|j| a.classes[j * w..(j + 1) * w] == a.classes[(h - 1 - j) * w..(h - j) * w]);
    ensure(same && mirrored, format!("repeat identical {same}, mirrored {mirrored}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("a_n bounds", a_bounds),
        ("strip vertex identity", vertex_identity),
        ("escape estimates", escape_estimates),
        ("factorial derivative growth", factorial_growth_check),
        ("Koebe chain constants", koebe_constants),
        ("concrete wandering step", wandering_step),
        ("shooting oracle equivalence", shooting_oracle),
        ("two-map schedule chase", schedule_chase),
        ("disk-map dilatation", dilatation),
        ("thin-area antitonicity", thin_antitone),
        ("render determinism and symmetry", render_symmetry),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let r = check();
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] {:>2}. {name}: {detail}", i + 1);
        if r.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
