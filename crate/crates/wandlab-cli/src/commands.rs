use crate::config::RunConfig;
use num_rational::BigRational;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;
use wandlab_core::compose::{self, ComposeError};
use wandlab_core::graph::geometry::{check_bounded_geometry, spacing_ratios, strip_vertex_residuals, tau_size_strip_edges};
use wandlab_core::graph::thin::{antitone_sweep, comparison_centers};
use wandlab_core::graph::build_graph;
use wandlab_core::model::{compute_a_certified, ModelMap, MAX_A_INDEX};
use wandlab_core::orbit::{
    adjust_parameters, check_escape_condition, factorial_growth, iterate_orbit, pullback_constants, select_p,
    DEFAULT_SYMBOLIC_STEPS,
};
use wandlab_core::params::ParameterSet;
use wandlab_core::render::render;
use wandlab_core::tower::CertifiedOrdering;

pub const TAU_K_MAX: u64 = 2000;
pub const VERTEX_K_MAX: u64 = 10_000;
pub const DILATATION_N_MAX: u64 = 100;
pub const BOUNDARY_POINTS: usize = 64;

#[derive(Debug, Default)]
pub struct Outcome {
    pub report: Value,
    pub verdicts: BTreeMap<String, bool>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn verdict(&mut self, name: &str, ok: bool) {
        self.verdicts.insert(name.to_string(), ok);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }

    fn failure(name: &str, err: impl std::fmt::Display) -> Self {
        let mut o = Outcome { report: json!({ "error": err.to_string() }), ..Default::default() };
        o.verdict(name, false);
        o
    }
}

fn write_json(out: &Path, name: &str, v: &Value) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let p = out.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(v).map_err(std::io::Error::other)?)?;
    Ok(p)
}

pub fn geometry(cfg: &RunConfig, out: &Path) -> std::io::Result<Outcome> {
    let p = &cfg.params;
    let n_disks = cfg.n.unwrap_or(cfg.n_disks);
    let start = Instant::now();
    let g = match build_graph(p, n_disks) {
        Ok(g) => g,
        Err(e) => return Ok(Outcome::failure("graph", e)),
    };
    let mut o = Outcome::default();
    let geo = check_bounded_geometry(&g);
    o.verdict("bounded_geometry", geo.all_finite() && g.bipartite_violations() == 0 && g.is_symmetric(1e-9));
    let ratios = spacing_ratios(p.lambda_over_pi, TAU_K_MAX);
    o.verdict("spacing_ratios", ratios.iter().all(|r| r.pass));
    let tau = tau_size_strip_edges(p, TAU_K_MAX);
    let tau_dev = tau.iter().map(|e| (e.image_length - std::f64::consts::PI).abs()).fold(0.0, f64::max);
    o.verdict("tau_size", tau_dev < 1e-9);
    let vid = strip_vertex_residuals(p, VERTEX_K_MAX);
    o.verdict("vertex_identity", vid.max_residual < 1e-9);

    let centers = match cfg.thin.centers() {
        Some(c) => c,
        None => comparison_centers(p.lambda_over_pi).unwrap_or_default(),
    };
    let steeper = p.clone().with_alpha(2.0 * p.alpha);
    let mut wider = p.clone();
    wider.lambda_over_pi *= 2;
    let strong = ParameterSet::new(cfg.thin.strong_lambda_over_pi).with_alpha(2.0 * p.alpha);
    let sweep = antitone_sweep(p, &steeper, &wider, &strong, &centers, n_disks.max(11), cfg.thin.r0);
    let sweep_json = match &sweep {
        Ok(s) => {
            o.verdict("thin_steeper_schedule_smaller", s.steeper_all);
            o.verdict("thin_larger_lambda_smaller", s.wider_all);
            o.verdict("thin_strong_within_bound", s.strong_all);
            serde_json::to_value(s).unwrap()
        }
        Err(e) => {
            o.verdict("thin_sweep", false);
            json!({ "error": e.to_string() })
        }
    };
    o.report = json!({
        "n_disks": n_disks,
        "geometry": geo,
        "bipartite_violations": g.bipartite_violations(),
        "spacing_ratios": ratios,
        "tau_size": { "edges": tau.len(), "max_deviation_from_pi": tau_dev },
        "vertex_identity": vid,
        "thin_sweep": sweep_json,
        "seconds": start.elapsed().as_secs_f64(),
    });
    o.files.push(write_json(out, "graph.json", &serde_json::from_str(&g.to_json()).unwrap())?);
    Ok(o)
}

pub fn orbit(cfg: &RunConfig) -> Outcome {
    let p = &cfg.params;
    let n = cfg.n.unwrap_or(DEFAULT_SYMBOLIC_STEPS as u64) as usize;
    let esc = match check_escape_condition(p, 400.0) {
        Ok(e) => e,
        Err(e) => return Outcome::failure("escape_condition", e),
    };
    let orbit = match iterate_orbit(p, n) {
        Ok(o) => o,
        Err(e) => return Outcome::failure("orbit", e),
    };
    let mut o = Outcome::default();
    o.verdict("escape_condition", esc.pass);
    o.verdict("spacing", orbit.iter().all(|r| r.spacing == CertifiedOrdering::Greater));
    o.verdict("derivative", orbit.iter().all(|r| r.deriv == CertifiedOrdering::Greater));
    let fact = factorial_growth(&orbit);
    o.verdict("factorial_growth", fact.iter().all(|(_, v)| v.is_ge()));
    let landing = (n >= 1).then(|| select_p(1, &orbit, p));
    o.report = json!({
        "escape": esc,
        "records": orbit,
        "factorial": fact.iter().map(|(k, v)| json!({"k": k, "verdict": format!("{v:?}")})).collect::<Vec<_>>(),
        "landing_1": landing.map(|l| l.map_or_else(|e| json!({"error": e.to_string()}), |l| serde_json::to_value(l).unwrap())),
    });
    o
}

pub fn disks(cfg: &RunConfig) -> Outcome {
    let p = &cfg.params;
    let n = cfg.n.unwrap_or(MAX_A_INDEX).clamp(1, MAX_A_INDEX);
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    let mut ok = true;
    for k in 1..=n {
        match compute_a_certified(k, p.lambda_over_pi) {
            Ok(c) => {
                ok &= c.upper_ok && c.lower_ok;
                rows.push(json!({"n": k, "a": c.a_f64(), "upper_ok": c.upper_ok, "lower_ok": c.lower_ok}));
            }
            Err(e) => return Outcome::failure("a_bounds", e),
        }
    }
    o.verdict("a_bounds", ok);
    let (inner, outer) = pullback_constants();
    let floor = BigRational::new(9.into(), 1000.into());
    o.verdict("koebe_constants", inner >= floor && outer == BigRational::from_integer(20.into()));
    let map = match ModelMap::new(p.clone(), 16) {
        Ok(m) => m,
        Err(e) => return Outcome::failure("model", e),
    };
    let dil: Vec<_> = (1..=DILATATION_N_MAX.min(n)).map(|k| map.dilatation_sup(k, BOUNDARY_POINTS, 32, 64)).collect();
    let sups: Vec<f64> = dil.iter().map(|d| d.sup_mu).collect();
    let spread = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - sups.iter().cloned().fold(f64::INFINITY, f64::min);
    o.verdict("dilatation_uniform", spread <= 1e-12);
    o.verdict("dilatation_below_one", sups.iter().all(|s| *s < 1.0));
    o.report = json!({
        "a": rows,
        "koebe": { "inner": inner.to_string(), "outer": outer.to_string() },
        "dilatation": { "per_n": dil, "spread": spread },
    });
    o
}

pub fn wander(cfg: &RunConfig) -> Outcome {
    let n = cfg.n.unwrap_or(2) as usize;
    let a = match adjust_parameters(&cfg.params, n) {
        Ok(a) => a,
        Err(e) => return Outcome::failure("wander", e),
    };
    let mut o = Outcome::default();
    o.verdict("certificates", a.certificates.iter().all(|c| c.passed()));
    o.verdict("nesting", a.nesting.iter().all(|c| c.passed()));
    o.verdict("budget", a.budget_used <= cfg.params.correction_budget);
    // smallest N with every nesting certificate from N on passing
    let smallest = (1..=n + 1).find(|&s| a.nesting.iter().skip(s - 1).all(|c| c.passed()));
    let mut report = a.to_json_value();
    report["smallest_passing_n"] = json!(smallest);
    o.report = report;
    o
}

pub fn compose(cfg: &RunConfig) -> Outcome {
    let n = cfg.n.unwrap_or(200);
    let tables = match compose::derive_tables(&compose::schedule_statements()) {
        Ok(t) => t,
        Err(e) => return Outcome::failure("tables", e),
    };
    let mut o = Outcome::default();
    if n == 0 {
        o.report = json!({ "n_max": 0, "levels": [] });
        return o;
    }
    let start = Instant::now();
    match compose::verify_schedule(&tables, n) {
        Ok(r) => {
            let secs = start.elapsed().as_secs_f64();
            o.verdict("schedule", r.passed());
            let classes = compose::classify_schedules(&tables, n.min(10));
            let wandering_ok = classes.iter().all(|c| (c.word.contains('∘')) == (c.schedule == compose::Schedule::Wandering));
            o.verdict("classification", wandering_ok);
            let metric = compose::metric_consistency(&tables, &cfg.params);
            o.report = json!({
                "tables": { "f": tables.f, "g": tables.g },
                "step_counts": r.levels.iter().map(|l| json!([l.n, l.fg_steps])).collect::<Vec<_>>(),
                "report": r,
                "classification": classes,
                "metric_consistency": metric,
                "ladder_n1": compose::ladder(&tables, 1).unwrap_or_default(),
                "seconds": secs,
            });
        }
        Err(ComposeError::Mismatch { what, trace }) => {
            o.verdict("schedule", false);
            o.report = json!({ "error": what, "trace": trace });
        }
        Err(e) => return Outcome::failure("schedule", e),
    }
    o
}

pub fn render_cmd(cfg: &RunConfig, out: &Path) -> std::io::Result<Outcome> {
    let job = cfg.render.job();
    let graph = if job.overlay_graph { build_graph(&cfg.params, cfg.n_disks).ok() } else { None };
    let r = match render(&job, &cfg.params, graph.as_ref()) {
        Ok(r) => r,
        Err(wandlab_core::render::RenderError::Io(e)) => return Err(e),
        Err(e) => return Ok(Outcome::failure("render", e)),
    };
    let mut o = Outcome::default();
    o.files = r.write(out, "render")?;
    // the raster must be mirror-symmetric when the window is
    let sym = job.im_min == -job.im_max;
    if sym {
        let (w, h) = (job.width as usize, job.height as usize);
        let mirrored = (0..h).all(|j| r.classes[j * w..(j + 1) * w] == r.classes[(h - 1 - j) * w..(h - j) * w]);
        o.verdict("mirror_symmetry", mirrored);
    }
    o.verdict("rendered", true);
    o.report = r.legend;
    Ok(o)
}
