//! Bounded-geometry constants of a built graph, spacing ratios of the strip
//! boundary and the images of strip vertices under the strip map.

use super::lengths::acosh_diff;
use super::{build_graph, Edge, Graph, GraphError};
use crate::bigfloat::BigComplex;
use crate::params::ParameterSet;
use num_complex::Complex64;
use rayon::prelude::*;
use rug::float::Constant;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};

/// Nonadjacent pairs with diam/dist below this are not guaranteed to be seen.
pub const PRUNE_RATIO: f64 = 0.5;
const CELL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub min_angle: f64,
    pub max_adjacent_diam_ratio: f64,
    pub max_nonadjacent_diam_over_dist: f64,
}

impl Default for FamilyStats {
    fn default() -> Self {
        FamilyStats { min_angle: PI, max_adjacent_diam_ratio: 1.0, max_nonadjacent_diam_over_dist: 0.0 }
    }
}

impl FamilyStats {
    fn merge(&mut self, o: &FamilyStats) {
        self.min_angle = self.min_angle.min(o.min_angle);
        self.max_adjacent_diam_ratio = self.max_adjacent_diam_ratio.max(o.max_adjacent_diam_ratio);
        self.max_nonadjacent_diam_over_dist = self.max_nonadjacent_diam_over_dist.max(o.max_nonadjacent_diam_over_dist);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub n_disks: u64,
    pub vertices: usize,
    pub edges: usize,
    pub elided_edges: String,
    pub min_angle: f64,
    pub max_adjacent_diam_ratio: f64,
    pub max_nonadjacent_diam_over_dist: f64,
    pub worst_angle_at: Complex64,
    pub per_component: BTreeMap<String, FamilyStats>,
    pub prune_ratio: f64,
}

impl GeometryReport {
    pub fn all_finite(&self) -> bool {
        self.min_angle > 0.0 && self.max_adjacent_diam_ratio.is_finite() && self.max_nonadjacent_diam_over_dist.is_finite()
    }

    /// Fold in a smaller truncation so the maxima become running maxima.
    fn absorb(&mut self, prev: &GeometryReport) {
        if prev.min_angle < self.min_angle {
            self.min_angle = prev.min_angle;
            self.worst_angle_at = prev.worst_angle_at;
        }
        self.max_adjacent_diam_ratio = self.max_adjacent_diam_ratio.max(prev.max_adjacent_diam_ratio);
        self.max_nonadjacent_diam_over_dist = self.max_nonadjacent_diam_over_dist.max(prev.max_nonadjacent_diam_over_dist);
        for (k, v) in &prev.per_component {
            self.per_component.entry(k.clone()).or_default().merge(v);
        }
    }
}

struct Stub {
    dir: Complex64,
    diam: f64,
    fam: &'static str,
}

fn arc_tangent(theta: f64) -> Complex64 {
    Complex64::i() * Complex64::from_polar(1.0, theta)
}

/// Unit tangents leaving the endpoints a and b into the edge.
fn end_dirs(g: &Graph, e: &Edge) -> (Complex64, Complex64) {
    match e.arc {
        Some(arc) => {
            let s = arc.sweep.signum();
            (arc_tangent(arc.theta) * s, -arc_tangent(arc.theta + arc.sweep) * s)
        }
        None => {
            let d = g.relative(e.b, e.a);
            let u = d / d.norm();
            (u, -u)
        }
    }
}

fn angle_between(a: Complex64, b: Complex64) -> f64 {
    let dot = a.re * b.re + a.im * b.im;
    let cross = a.re * b.im - a.im * b.re;
    cross.abs().atan2(dot)
}

/// Edge as a polyline in the frame of vertex `reference`.
fn polyline(g: &Graph, e: &Edge, reference: usize) -> Vec<Complex64> {
    let pa = g.relative(e.a, reference);
    let pb = g.relative(e.b, reference);
    match e.arc {
        None => vec![pa, pb],
        Some(arc) => {
            let mut pts = Vec::with_capacity(9);
            // from the chord, which is exact even when theta is not
            let half = arc.sweep / 2.0;
            for i in 0..=8 {
                let t = i as f64 / 8.0;
                let scale = (t * half).sin() / half.sin();
                pts.push(if i == 8 { pb } else { pa + (pb - pa) * scale * Complex64::from_polar(1.0, (t - 1.0) * half) });
            }
            pts
        }
    }
}

fn point_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
    let (ab, cd, ac) = (b - a, d - c, c - a);
    let den = cross(ab, cd);
    if den == 0.0 {
        return false;
    }
    let t = cross(ac, cd) / den;
    let u = cross(ac, ab) / den;
    let inside = |x: f64| x > 1e-9 && x < 1.0 - 1e-9;
    inside(t) && inside(u)
}

fn polyline_distance(p: &[Complex64], q: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for s in p.windows(2) {
        for t in q.windows(2) {
            if segments_cross(s[0], s[1], t[0], t[1]) {
                return 0.0;
            }
            best = best.min(point_segment(s[0], t[0], t[1])).min(point_segment(s[1], t[0], t[1]));
            best = best.min(point_segment(t[0], s[0], s[1])).min(point_segment(t[1], s[0], s[1]));
        }
    }
    best
}

fn bbox(g: &Graph, e: &Edge) -> (f64, f64, f64, f64) {
    let (pa, pb) = (g.vertices[e.a].pos, g.vertices[e.b].pos);
    let bulge = if e.arc.is_some() { e.diameter } else { 0.0 };
    let eps = 1e-12 * (1.0 + pa.norm());
    let pad = bulge + eps;
    (pa.re.min(pb.re) - pad, pa.im.min(pb.im) - pad, pa.re.max(pb.re) + pad, pa.im.max(pb.im) + pad)
}

fn cell_range(lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    ((lo / CELL).floor() as i64)..=((hi / CELL).floor() as i64)
}

pub fn check_bounded_geometry(g: &Graph) -> GeometryReport {
    let mut fams: BTreeMap<String, FamilyStats> = BTreeMap::new();
    for e in &g.edges {
        fams.entry(e.tag.family().to_string()).or_default();
    }

    // angles and adjacent ratios at every vertex
    let mut stubs: Vec<Vec<Stub>> = (0..g.vertices.len()).map(|_| Vec::new()).collect();
    for e in &g.edges {
        let (da, db) = end_dirs(g, e);
        let fam = e.tag.family();
        stubs[e.a].push(Stub { dir: da, diam: e.diameter, fam });
        stubs[e.b].push(Stub { dir: db, diam: e.diameter, fam });
    }
    for r in &g.runs {
        let fam = r.tag.family();
        stubs[r.from].push(Stub { dir: r.dir_from, diam: r.first_diam, fam });
        stubs[r.to].push(Stub { dir: r.dir_to, diam: r.last_diam, fam });
        let inner = r.ratio_hi.max(1.0 / r.ratio_lo);
        let f = fams.entry(fam.to_string()).or_default();
        f.max_adjacent_diam_ratio = f.max_adjacent_diam_ratio.max(inner);
        f.max_nonadjacent_diam_over_dist = f.max_nonadjacent_diam_over_dist.max(inner);
    }
    let mut min_angle = PI;
    let mut worst_angle_at = Complex64::new(0.0, 0.0);
    for (v, ss) in stubs.iter().enumerate() {
        for i in 0..ss.len() {
            for j in i + 1..ss.len() {
                let ang = angle_between(ss[i].dir, ss[j].dir);
                let ratio = (ss[i].diam / ss[j].diam).max(ss[j].diam / ss[i].diam);
                // pairs from two families are reported under "junction"
                let fam = if ss[i].fam == ss[j].fam { ss[i].fam } else { "junction" };
                let f = fams.entry(fam.to_string()).or_default();
                f.min_angle = f.min_angle.min(ang);
                f.max_adjacent_diam_ratio = f.max_adjacent_diam_ratio.max(ratio);
                if ang < min_angle {
                    min_angle = ang;
                    worst_angle_at = g.vertices[v].pos;
                }
            }
        }
    }

    // nonadjacent pairs through a uniform grid on absolute positions
    let boxes: Vec<_> = g.edges.iter().map(|e| bbox(g, e)).collect();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, b) in boxes.iter().enumerate() {
        for cx in cell_range(b.0, b.2) {
            for cy in cell_range(b.1, b.3) {
                grid.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    let nonadj: Vec<(usize, f64)> = (0..g.edges.len())
        .into_par_iter()
        .map(|i| {
            let e = &g.edges[i];
            let b = boxes[i];
            let reach = e.diameter / PRUNE_RATIO;
            let q = (b.0 - reach, b.1 - reach, b.2 + reach, b.3 + reach);
            let mine = polyline(g, e, e.a);
            let mut worst: f64 = 0.0;
            let mut seen = std::collections::HashSet::new();
            for cx in cell_range(q.0, q.2) {
                for cy in cell_range(q.1, q.3) {
                    let Some(list) = grid.get(&(cx, cy)) else { continue };
                    for &j in list {
                        if j == i || !seen.insert(j) {
                            continue;
                        }
                        let o = &g.edges[j];
                        if o.a == e.a || o.a == e.b || o.b == e.a || o.b == e.b {
                            continue;
                        }
                        let ob = boxes[j];
                        if ob.2 < q.0 || ob.0 > q.2 || ob.3 < q.1 || ob.1 > q.3 {
                            continue;
                        }
                        // cheap reject in local coordinates
                        let ra = g.relative(o.a, e.a);
                        let near = ra.norm() - o.diameter - e.diameter;
                        if near > reach {
                            continue;
                        }
                        let dist = polyline_distance(&mine, &polyline(g, o, e.a));
                        let ratio = if dist > 0.0 { e.diameter / dist } else { f64::INFINITY };
                        worst = worst.max(ratio);
                    }
                }
            }
            (i, worst)
        })
        .collect();
    for (i, w) in nonadj {
        let f = fams.get_mut(g.edges[i].tag.family()).unwrap();
        f.max_nonadjacent_diam_over_dist = f.max_nonadjacent_diam_over_dist.max(w);
    }

    let max_adj = fams.values().map(|f| f.max_adjacent_diam_ratio).fold(1.0, f64::max);
    let max_non = fams.values().map(|f| f.max_nonadjacent_diam_over_dist).fold(0.0, f64::max);
    GeometryReport {
        n_disks: g.n_disks,
        vertices: g.vertices.len(),
        edges: g.edges.len(),
        elided_edges: g.elided_edge_count().to_string(),
        min_angle,
        max_adjacent_diam_ratio: max_adj,
        max_nonadjacent_diam_over_dist: max_non,
        worst_angle_at,
        per_component: fams,
        prune_ratio: PRUNE_RATIO,
    }
}

/// Reports for truncations 1..=n_max, each folded with its predecessors.
pub fn geometry_sweep(params: &ParameterSet, n_max: u64) -> Result<Vec<GeometryReport>, GraphError> {
    let mut out: Vec<GeometryReport> = Vec::new();
    for n in 1..=n_max {
        let mut r = check_bounded_geometry(&build_graph(params, n)?);
        if let Some(prev) = out.last() {
            r.absorb(prev);
        }
        out.push(r);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub name: String,
    pub count: u64,
    pub min: f64,
    pub max: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

fn ratio_check(name: &str, ratios: &[f64], lower: f64, upper: f64) -> RatioCheck {
    let tol = 1e-12;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pass = ratios.iter().all(|&r| r >= lower * (1.0 - tol) && r <= upper * (1.0 + tol));
    RatioCheck { name: name.into(), count: ratios.len() as u64, min, max, lower, upper, pass }
}

/// The three spacing-ratio estimates of the strip boundary: consecutive
/// asin edges on the vertical side, consecutive acosh edges on the
/// horizontal side for k < m + k_extra, and the two edges at the corner.
pub fn spacing_ratios(lambda_over_pi: u64, k_extra: u64) -> Vec<RatioCheck> {
    let m = lambda_over_pi;
    let c = 1.0 / m as f64;
    let y = |k: u64| if k == m { FRAC_PI_2 } else { (k as f64 * c).asin() };
    let asin: Vec<f64> = (2..=m).map(|k| (y(k) - y(k - 1)) / (y(k - 1) - y(k - 2))).collect();
    let sqrt2 = std::f64::consts::SQRT_2;
    let len = |k: u64| acosh_diff(&Integer::from(k + 1), &Integer::from(k), m);
    let acosh: Vec<f64> = (m..m + k_extra).map(|k| len(k + 1) / len(k)).collect();
    let junction = (FRAC_PI_2 - (1.0 - c).asin()) / (1.0 + c).acosh();
    vec![
        ratio_check("asin", &asin, 1.0, sqrt2 / (2.0 - sqrt2)),
        ratio_check("acosh", &acosh, 3f64.acosh() / 2f64.acosh() - 1.0, 1.0),
        ratio_check("junction", &[junction], 1.0, FRAC_PI_2 / 2f64.acosh()),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripSide {
    Vertical,
    Horizontal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauEdge {
    pub side: StripSide,
    /// Edge from vertex k to vertex k + 1.
    pub k: u64,
    pub image_length: f64,
}

fn strip_vertex(prec: u32, side: StripSide, k: u64, m: u64) -> (Float, Float) {
    let mut half_pi = Float::with_val(prec, Constant::Pi);
    half_pi /= 2u32;
    match side {
        StripSide::Vertical => {
            let y = if k == m {
                half_pi
            } else {
                let mut y = Float::with_val(prec, k);
                y /= m;
                y.asin_mut();
                y
            };
            (Float::new(prec), y)
        }
        StripSide::Horizontal => {
            let mut x = Float::with_val(prec, k);
            x /= m;
            x.acosh_mut();
            (x, half_pi)
        }
    }
}

/// Image lengths |lambda sinh(v_{k+1}) - lambda sinh(v_k)| of the strip
/// edges in the first quadrant, horizontal side up to vertex k_max.
pub fn tau_size_strip_edges(params: &ParameterSet, k_max: u64) -> Vec<TauEdge> {
    let m = params.lambda_over_pi;
    let prec = 128 + 64 - (k_max.max(1)).leading_zeros();
    let lambda = Float::with_val(prec, Constant::Pi) * m;
    let image = |side, k| {
        let (x, y) = strip_vertex(prec, side, k, m);
        BigComplex::from_floats(x, y).sinh().scale(&lambda)
    };
    let mut out = Vec::new();
    let mut push = |side, k: u64| {
        let d = image(side, k + 1).sub(&image(side, k));
        out.push(TauEdge { side, k, image_length: d.abs().to_f64() });
    };
    for k in 0..m {
        push(StripSide::Vertical, k);
    }
    for k in m..k_max {
        push(StripSide::Horizontal, k);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexIdentityReport {
    pub count: u64,
    pub max_residual: f64,
    pub worst: Option<(StripSide, i64)>,
}

/// |cosh(lambda sinh v) - (-1)^k| over the strip-boundary vertices
/// i asin(k/m) for |k| <= m and acosh(k/m) +- i pi/2 for m <= k <= k_max.
pub fn strip_vertex_residuals(params: &ParameterSet, k_max: u64) -> VertexIdentityReport {
    let m = params.lambda_over_pi;
    let prec = 192;
    let lambda = Float::with_val(prec, Constant::Pi) * m;
    let residual = |x: Float, y: Float, k: u64| {
        let v = BigComplex::from_floats(x, y).sinh().scale(&lambda).cosh();
        let target = BigComplex::new(prec, if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        v.sub(&target).abs().to_f64()
    };
    let mut jobs: Vec<(StripSide, i64)> = Vec::new();
    for k in 0..=m as i64 {
        jobs.push((StripSide::Vertical, k));
        if k > 0 {
            jobs.push((StripSide::Vertical, -k));
        }
    }
    for k in m as i64..=k_max as i64 {
        jobs.push((StripSide::Horizontal, k));
        jobs.push((StripSide::Horizontal, -k));
    }
    let res: Vec<f64> = jobs
        .par_iter()
        .map(|&(side, k)| {
            let (x, y) = strip_vertex(prec, side, k.unsigned_abs(), m);
            // negative k stands for the conjugate vertex
            let y = if k < 0 { -y } else { y };
            residual(x, y, k.unsigned_abs())
        })
        .collect();
    let (mut max_residual, mut worst) = (0.0, None);
    for (r, j) in res.iter().zip(&jobs) {
        if *r > max_residual || worst.is_none() {
            max_residual = max_residual.max(*r);
            worst = Some(*j);
        }
    }
    VertexIdentityReport { count: jobs.len() as u64, max_residual, worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Component;

    #[test]
    fn asin_ratios_for_lambda_4pi() {
        let r = &spacing_ratios(4, 10)[0];
        assert_eq!(r.count, 3);
        assert!(r.pass);
        assert!(r.max <= std::f64::consts::SQRT_2 / (2.0 - std::f64::consts::SQRT_2));
    }

    #[test]
    fn tau_sizes_are_pi() {
        let t = tau_size_strip_edges(&ParameterSet::new(4), 200);
        assert_eq!(t[0].image_length.to_bits(), PI.to_bits());
        assert!(t.iter().all(|e| (e.image_length - PI).abs() < 1e-9));
    }

    #[test]
    fn adjacent_disk_arcs_are_congruent() {
        let g = build_graph(&ParameterSet::new(4), 2).unwrap();
        let r = check_bounded_geometry(&g);
        assert_eq!(r.per_component["disk_boundary"].max_adjacent_diam_ratio, 1.0);
        assert!(r.all_finite());
    }

    #[test]
    fn doubling_edges_have_ratio_two() {
        let g = build_graph(&ParameterSet::new(4), 3).unwrap();
        let conn: Vec<&Edge> = g.edges.iter().filter(|e| e.tag == Component::Connector(3)).collect();
        let ratios: Vec<f64> = conn.windows(2).map(|w| w[1].diameter / w[0].diameter).collect();
        assert!(ratios.iter().filter(|&&r| r == 2.0).count() >= 10);
    }

    #[test]
    fn small_vertex_identity() {
        let r = strip_vertex_residuals(&ParameterSet::new(4), 100);
        assert!(r.max_residual < 1e-30, "{r:?}");
    }

    #[test]
    fn angle_between_is_symmetric() {
        let a = Complex64::new(1.0, 0.0);
        assert!((angle_between(a, Complex64::i()) - FRAC_PI_2).abs() < 1e-15);
        assert!((angle_between(a, -a) - PI).abs() < 1e-15);
    }
}
