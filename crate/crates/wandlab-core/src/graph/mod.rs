//! The bipartite graph on which the model map folds: the half-strip
//! boundary, the disk boundaries, their connectors, the vertical rays and
//! the imaginary axis, truncated to finitely many disks.
//!
//! Long families of congruent or slowly varying edges are kept only near
//! their ends; the middle is recorded as an elided run with its edge count
//! and diameter range. Every vertex carries a local frame so that edges far
//! below machine resolution at their absolute position keep exact shape.

pub mod geometry;
pub mod lengths;
pub mod thin;

use crate::model::{compute_a_certified, ModelError};
use crate::params::{to_integer, Degree, ParameterSet};
use lengths::{acosh_at, acosh_diff, acosh_step_forward, ConnectorLayout, CONNECTOR_LEN};
use num_complex::Complex64;
use rug::float::Round;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Edges kept explicitly at each end of a long family.
pub const WINDOW: u64 = 8;
pub const MAX_GRAPH_DISKS: u64 = 200;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Params(#[from] crate::params::ParamError),
    #[error("disk count {0} outside 1..=200")]
    DiskCount(u64),
    #[error("degree d_{0} is not an exact integer of machine size")]
    Degree(u64),
    #[error("inconsistent labels: {0}")]
    Labels(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family", content = "n", rename_all = "snake_case")]
pub enum Component {
    StripBoundary,
    DiskBoundary(u64),
    Connector(u64),
    Ray(u64),
    Axis,
}

impl Component {
    pub fn family(&self) -> &'static str {
        match self {
            Component::StripBoundary => "strip_boundary",
            Component::DiskBoundary(_) => "disk_boundary",
            Component::Connector(_) => "connector",
            Component::Ray(_) => "ray",
            Component::Axis => "axis",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Segment,
    CircularArc,
    RaySegment,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub pos: Complex64,
    pub frame: usize,
    /// Position relative to its frame, exact to machine precision.
    pub offset: Complex64,
    pub label: i8,
    pub tag: Component,
    pub on_imag_axis: bool,
    pub on_real_axis: bool,
}

/// Unit-circle arc: angle of the first endpoint and signed sweep to the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcShape {
    pub center: Complex64,
    pub theta: f64,
    pub sweep: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    pub diameter: f64,
    pub tag: Component,
    pub arc: Option<ArcShape>,
}

/// A block of consecutive edges that is not materialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElidedRun {
    pub tag: Component,
    pub kind: EdgeKind,
    pub from: usize,
    pub to: usize,
    /// Edge count, in decimal.
    pub count: String,
    pub count_odd: bool,
    pub first_diam: f64,
    pub last_diam: f64,
    /// Range of diam(next)/diam(previous) inside the run.
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    /// Unit tangents pointing into the run at `from` and at `to`.
    pub dir_from: Complex64,
    pub dir_to: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub lambda_over_pi: u64,
    pub n_disks: u64,
    /// Rays stop at this height; the strip boundary stops at x = a_N + pi/2.
    pub height: f64,
    pub frames: Vec<Complex64>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub runs: Vec<ElidedRun>,
}

fn sign_of_parity(odd: bool) -> i8 {
    if odd {
        -1
    } else {
        1
    }
}

fn reflect(z: Complex64, fx: bool, fy: bool) -> Complex64 {
    Complex64::new(if fx { -z.re } else { z.re }, if fy { -z.im } else { z.im })
}

#[derive(Default)]
struct Builder {
    frames: Vec<Complex64>,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    runs: Vec<ElidedRun>,
}

impl Builder {
    fn frame(&mut self, p: Complex64) -> usize {
        self.frames.push(p);
        self.frames.len() - 1
    }

    fn vertex(&mut self, frame: usize, offset: Complex64, label: i8, tag: Component) -> usize {
        let pos = self.frames[frame] + offset;
        self.vertices.push(Vertex { pos, frame, offset, label, tag, on_imag_axis: false, on_real_axis: false });
        self.vertices.len() - 1
    }

    fn segment(&mut self, a: usize, b: usize, kind: EdgeKind, diameter: f64, tag: Component) {
        self.edges.push(Edge { a, b, kind, diameter, tag, arc: None });
    }

    #[allow(clippy::too_many_arguments)]
    fn run(&mut self, tag: Component, kind: EdgeKind, from: usize, to: usize, count: &Integer, diams: (f64, f64), ratios: (f64, f64), dirs: (Complex64, Complex64)) {
        self.runs.push(ElidedRun {
            tag,
            kind,
            from,
            to,
            count: count.to_string(),
            count_odd: count.is_odd(),
            first_diam: diams.0,
            last_diam: diams.1,
            ratio_lo: ratios.0,
            ratio_hi: ratios.1,
            dir_from: dirs.0,
            dir_to: dirs.1,
        });
    }

    /// Strip boundary vertices acosh(k/m) + i pi/2 for p < k <= q; returns the
    /// vertex of q, framed at `q_pos`.
    fn horizontal(&mut self, m: u64, p: &Integer, p_vertex: usize, q: &Integer, q_pos: Complex64) -> usize {
        let tag = Component::StripBoundary;
        let p_frame = self.vertices[p_vertex].frame;
        let p_off = self.vertices[p_vertex].offset;
        let q_frame = self.frame(q_pos);
        let label = |k: &Integer| sign_of_parity(k.is_odd());
        let len = |k: &Integer| acosh_diff(&Integer::from(k + 1u32), k, m);
        let n_edges = Integer::from(q - p);
        let w = Integer::from(WINDOW);
        let near_p = |k: &Integer, this: &mut Builder| this.vertex(p_frame, p_off + acosh_diff(k, p, m), label(k), tag);
        let near_q = |k: &Integer, this: &mut Builder| this.vertex(q_frame, Complex64::new(-acosh_diff(q, k, m), 0.0), label(k), tag);
        if n_edges <= Integer::from(2 * WINDOW + 1) {
            let mut prev = p_vertex;
            let mut k = p.clone();
            while k < *q {
                let next = Integer::from(&k + 1u32);
                let v = if Integer::from(&next - p) <= Integer::from(q - &next) { near_p(&next, self) } else { near_q(&next, self) };
                self.segment(prev, v, EdgeKind::Segment, len(&k), tag);
                prev = v;
                k = next;
            }
            return prev;
        }
        let mut prev = p_vertex;
        let mut k = p.clone();
        for _ in 0..WINDOW {
            let next = Integer::from(&k + 1u32);
            let v = near_p(&next, self);
            self.segment(prev, v, EdgeKind::Segment, len(&k), tag);
            prev = v;
            k = next;
        }
        let run_from = prev;
        let k_from = k.clone();
        let k_to = Integer::from(q - &w);
        let run_to = near_q(&k_to, self);
        let first = len(&k_from);
        let last = len(&Integer::from(&k_to - 1u32));
        let r0 = len(&Integer::from(&k_from + 1u32)) / first;
        let r1 = last / len(&Integer::from(&k_to - 2u32));
        let count = Integer::from(&k_to - &k_from);
        let one = Complex64::new(1.0, 0.0);
        self.run(tag, EdgeKind::Segment, run_from, run_to, &count, (first, last), (r0.min(r1), r0.max(r1)), (one, -one));
        let mut prev = run_to;
        let mut k = k_to;
        while k < *q {
            let next = Integer::from(&k + 1u32);
            let v = near_q(&next, self);
            self.segment(prev, v, EdgeKind::Segment, len(&k), tag);
            prev = v;
            k = next;
        }
        prev
    }

    /// `count` equal edges of length `len` from `start` in direction `dir`.
    #[allow(clippy::too_many_arguments)]
    fn uniform_chain(&mut self, start: usize, dir: Complex64, len: f64, count: &Integer, kind: EdgeKind, tag: Component, on_imag: bool) {
        if *count == 0 {
            return;
        }
        let s = self.vertices[start];
        let label0 = s.label;
        let alt = |i: u64| if i % 2 == 0 { label0 } else { -label0 };
        let mark = |this: &mut Builder, v: usize| {
            this.vertices[v].on_imag_axis = on_imag;
            v
        };
        if *count <= Integer::from(2 * WINDOW + 1) {
            let c = count.to_u64().unwrap();
            let mut prev = start;
            for i in 1..=c {
                let v = self.vertex(s.frame, s.offset + dir * (i as f64 * len), alt(i), tag);
                let v = mark(self, v);
                self.segment(prev, v, kind, len, tag);
                prev = v;
            }
            return;
        }
        let mut prev = start;
        for i in 1..=WINDOW {
            let v = self.vertex(s.frame, s.offset + dir * (i as f64 * len), alt(i), tag);
            let v = mark(self, v);
            self.segment(prev, v, kind, len, tag);
            prev = v;
        }
        let end_pos = s.pos + dir * (count.to_f64() * len);
        let top = self.frame(end_pos);
        // labels from the far end follow the parity of the total count
        let end_label = if count.is_odd() { -label0 } else { label0 };
        let far = |j: u64| if j % 2 == 0 { end_label } else { -end_label };
        let run_to = self.vertex(top, -dir * (WINDOW as f64 * len), far(WINDOW), tag);
        let run_to = mark(self, run_to);
        let inner = Integer::from(count - 2 * WINDOW);
        self.run(tag, kind, prev, run_to, &inner, (len, len), (1.0, 1.0), (dir, -dir));
        let mut prev = run_to;
        for j in (0..WINDOW).rev() {
            let v = self.vertex(top, -dir * (j as f64 * len), far(j), tag);
            let v = mark(self, v);
            self.segment(prev, v, kind, len, tag);
            prev = v;
        }
    }
}

/// Everything the graph and the thin set need about one disk.
#[derive(Clone, Debug)]
pub struct DiskData {
    pub n: u64,
    pub a: f64,
    /// floor(lambda/pi cosh(n pi)): index of the strip vertex below the disk.
    pub k_floor: Integer,
    pub d: Integer,
    pub ell: f64,
    pub big_l: f64,
    pub layout: ConnectorLayout,
}

impl DiskData {
    pub fn compute(params: &ParameterSet, n: u64) -> Result<Self, GraphError> {
        let m = params.lambda_over_pi;
        let cert = compute_a_certified(n, m)?;
        let d = match params.d(n) {
            Degree::Exact(d) => to_integer(&d),
            Degree::Tower(_) => return Err(GraphError::Degree(n)),
        };
        let df = d.to_f64();
        if !df.is_finite() || df < 2.0 {
            return Err(GraphError::Degree(n));
        }
        let ell = PI / df;
        let big_l = acosh_step_forward(n as f64 * PI, 1.0 / m as f64);
        // strip end label (-1)^K, disk end label (-1)^{d/2}
        let half_odd = Integer::from(&d >> 1).is_odd();
        let layout = ConnectorLayout::new(ell, big_l, cert.floor.is_odd() != half_odd);
        Ok(DiskData { n, a: cert.a_f64(), k_floor: cert.floor, d, ell, big_l, layout })
    }

    pub fn half_degree_odd(&self) -> bool {
        Integer::from(&self.d >> 1).is_odd()
    }

    /// Connector edge lengths from the strip end upward, with the uniform block
    /// as (count, length).
    pub fn connector_items(&self) -> Vec<ConnectorItem> {
        let lay = &self.layout;
        let block = ConnectorItem::Block(lay.uniform_count.clone(), lay.uniform_len);
        let mut out = Vec::new();
        if lay.from_bottom {
            out.extend(lay.progression.iter().map(|&l| ConnectorItem::One(l)));
            out.push(block);
        } else {
            out.push(block);
            out.extend(lay.progression.iter().rev().map(|&l| ConnectorItem::One(l)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConnectorItem {
    One(f64),
    Block(Integer, f64),
}

/// Height of the ray truncation and the end of the strip boundary.
pub fn truncation(disks: &[DiskData]) -> (f64, f64) {
    let a_n = disks.last().map_or(PI, |d| d.a);
    (a_n, a_n + FRAC_PI_2)
}

pub fn build_graph(params: &ParameterSet, n_disks: u64) -> Result<Graph, GraphError> {
    let q = build_quadrant(params, n_disks)?;
    let g = symmetrize(&q, params.lambda_over_pi, n_disks);
    let bad = g.bipartite_violations();
    if bad > 0 {
        return Err(GraphError::Labels(format!("{bad} edges or runs join equal labels")));
    }
    Ok(g)
}

struct Quadrant {
    b: Builder,
    height: f64,
    imag_edges: Vec<bool>,
    imag_runs: Vec<bool>,
}

fn build_quadrant(params: &ParameterSet, n_disks: u64) -> Result<Quadrant, GraphError> {
    if n_disks == 0 || n_disks > MAX_GRAPH_DISKS {
        return Err(GraphError::DiskCount(n_disks));
    }
    params.validate()?;
    let m = params.lambda_over_pi;
    let c = 1.0 / m as f64;
    let disks = (1..=n_disks).map(|n| DiskData::compute(params, n)).collect::<Result<Vec<_>, _>>()?;
    let (height, x_end) = truncation(&disks);
    let mut b = Builder::default();
    let origin = b.frame(Complex64::new(0.0, 0.0));

    // half-strip, vertical side: i asin(k/m)
    let ys: Vec<f64> = (0..=m).map(|k| if k == m { FRAC_PI_2 } else { (k as f64 * c).asin() }).collect();
    let mut prev = b.vertex(origin, Complex64::new(0.0, 0.0), 1, Component::StripBoundary);
    b.vertices[prev].on_imag_axis = true;
    b.vertices[prev].on_real_axis = true;
    for k in 1..=m as usize {
        let v = b.vertex(origin, Complex64::new(0.0, ys[k]), sign_of_parity(k % 2 == 1), Component::StripBoundary);
        b.vertices[v].on_imag_axis = true;
        b.segment(prev, v, EdgeKind::Segment, ys[k] - ys[k - 1], Component::StripBoundary);
        prev = v;
    }
    let corner = prev;

    // half-strip, horizontal side, broken at the connector feet
    let mut junctions = Vec::new();
    let mut p = Integer::from(m);
    let mut pv = corner;
    for dd in &disks {
        pv = b.horizontal(m, &p, pv, &dd.k_floor, Complex64::new(dd.a, FRAC_PI_2));
        junctions.push(pv);
        p = dd.k_floor.clone();
    }
    let k_end = {
        let prec = 64 + (x_end * std::f64::consts::LOG2_E) as u32 + 64;
        let mut x = Float::with_val(prec, x_end);
        x.cosh_mut();
        x *= m;
        x.to_integer_round(Round::Down).unwrap().0
    };
    let end_pos = Complex64::new(acosh_at(&k_end, m), FRAC_PI_2);
    b.horizontal(m, &p, pv, &k_end, end_pos);

    for (dd, &jv) in disks.iter().zip(&junctions) {
        let n = dd.n;
        let z_n = Complex64::new(dd.a, PI);
        let half_odd = dd.half_degree_odd();
        let top_label = sign_of_parity(half_odd);
        let fb = b.frame(z_n - Complex64::i());
        let ft = b.frame(z_n + Complex64::i());
        let bottom = b.vertex(fb, Complex64::new(0.0, 0.0), top_label, Component::DiskBoundary(n));
        let top = b.vertex(ft, Complex64::new(0.0, 0.0), top_label, Component::DiskBoundary(n));
        circle(&mut b, dd, z_n, bottom, top);
        connector(&mut b, dd, jv, bottom);
        if height > PI + 1.0 {
            let prec = dd.d.significant_bits() + 64;
            let mut cnt = Float::with_val(prec, height) - Float::with_val(prec, rug::float::Constant::Pi) - 1u32;
            cnt *= &dd.d;
            cnt /= Float::with_val(prec, rug::float::Constant::Pi);
            let count = cnt.to_integer_round(Round::Down).map(|x| x.0).unwrap_or_default().max(Integer::new());
            b.uniform_chain(top, Complex64::i(), dd.ell, &count, EdgeKind::RaySegment, Component::Ray(n), false);
        }
    }

    // imaginary axis above i pi/2
    let s0 = FRAC_PI_2 - (1.0 - c).asin();
    let count = Integer::from_f64(((height - FRAC_PI_2) / s0).floor().max(0.0)).unwrap();
    b.uniform_chain(corner, Complex64::i(), s0, &count, EdgeKind::RaySegment, Component::Axis, true);

    let imag_edges = b.edges.iter().map(|e| b.vertices[e.a].on_imag_axis && b.vertices[e.b].on_imag_axis).collect();
    let imag_runs = b.runs.iter().map(|r| b.vertices[r.from].on_imag_axis && b.vertices[r.to].on_imag_axis).collect();
    Ok(Quadrant { b, height, imag_edges, imag_runs })
}

/// Offset of z_n + e^{i theta_j} from the junction at angle theta_junction,
/// where theta_j - theta_junction = delta.
fn arc_offset(theta_junction: f64, delta: f64) -> Complex64 {
    Complex64::i() * (2.0 * (delta / 2.0).sin()) * Complex64::from_polar(1.0, theta_junction + delta / 2.0)
}

fn circle(b: &mut Builder, dd: &DiskData, z_n: Complex64, bottom: usize, top: usize) {
    let n = dd.n;
    let tag = Component::DiskBoundary(n);
    let df = dd.d.to_f64();
    let step = PI / df;
    let chord = 2.0 * (step / 2.0).sin();
    let two_d = Integer::from(&dd.d * 2u32);
    let half = Integer::from(&dd.d >> 1);
    let jt = half.clone();
    let jb = Integer::from(&half * 3u32);
    let (ft, fb) = (b.vertices[top].frame, b.vertices[bottom].frame);
    let label = |j: &Integer| sign_of_parity(j.is_odd());
    // vertex j relative to a junction at index jj, angle theta
    let make = |b: &mut Builder, j: &Integer, jj: &Integer, theta: f64, frame: usize| {
        let rel = Integer::from(j - jj).to_f64();
        b.vertex(frame, arc_offset(theta, rel * step), label(j), tag)
    };
    let arc = |b: &mut Builder, u: usize, v: usize, theta: f64| {
        b.edges.push(Edge { a: u, b: v, kind: EdgeKind::CircularArc, diameter: chord, tag, arc: Some(ArcShape { center: z_n, theta, sweep: step }) });
    };
    let theta_of = |j: &Integer, jj: &Integer, theta: f64| theta + Integer::from(j - jj).to_f64() * step;
    if two_d <= Integer::from(4 * WINDOW + 4) {
        let d = dd.d.to_u64().unwrap();
        let (jt, jb) = (d / 2, 3 * d / 2);
        let mut ids = Vec::new();
        for j in 0..2 * d {
            let dist = |a: u64| {
                let x = j.abs_diff(a);
                x.min(2 * d - x)
            };
            let id = if j == jt {
                top
            } else if j == jb {
                bottom
            } else if dist(jt) <= dist(jb) {
                let rel = if j + d < jt { j as i64 + 2 * d as i64 } else { j as i64 };
                b.vertex(ft, arc_offset(FRAC_PI_2, (rel - jt as i64) as f64 * step), label(&Integer::from(j)), tag)
            } else {
                let rel = if j + d < jb { j as i64 + 2 * d as i64 } else { j as i64 };
                b.vertex(fb, arc_offset(3.0 * FRAC_PI_2, (rel - jb as i64) as f64 * step), label(&Integer::from(j)), tag)
            };
            ids.push(id);
        }
        for j in 0..2 * d {
            let nxt = ((j + 1) % (2 * d)) as usize;
            arc(b, ids[j as usize], ids[nxt], j as f64 * step);
        }
        return;
    }
    // windows around both junctions, two elided runs between them
    let w = WINDOW as i64;
    let window = |b: &mut Builder, jj: &Integer, theta: f64, frame: usize, center: usize| {
        let mut ids = Vec::new();
        for r in -w..=w {
            let j = Integer::from(jj + r);
            ids.push(if r == 0 { center } else { make(b, &j, jj, theta, frame) });
        }
        for (i, r) in (-w..w).enumerate() {
            let j = Integer::from(jj + r);
            arc(b, ids[i], ids[i + 1], theta_of(&j, jj, theta));
        }
        (ids[0], ids[2 * w as usize])
    };
    let (t_lo, t_hi) = window(b, &jt, FRAC_PI_2, ft, top);
    let (b_lo, b_hi) = window(b, &jb, 3.0 * FRAC_PI_2, fb, bottom);
    let count = Integer::from(&dd.d - 2 * WINDOW);
    let tangent = |theta: f64, forward: bool| {
        let t = Complex64::i() * Complex64::from_polar(1.0, theta);
        if forward {
            t
        } else {
            -t
        }
    };
    let th_t_hi = FRAC_PI_2 + w as f64 * step;
    let th_b_lo = 3.0 * FRAC_PI_2 - w as f64 * step;
    let th_b_hi = 3.0 * FRAC_PI_2 + w as f64 * step;
    let th_t_lo = FRAC_PI_2 - w as f64 * step;
    b.run(tag, EdgeKind::CircularArc, t_hi, b_lo, &count, (chord, chord), (1.0, 1.0), (tangent(th_t_hi, true), tangent(th_b_lo, false)));
    b.run(tag, EdgeKind::CircularArc, b_hi, t_lo, &count, (chord, chord), (1.0, 1.0), (tangent(th_b_hi, true), tangent(th_t_lo, false)));
}

fn connector(b: &mut Builder, dd: &DiskData, bottom_v: usize, top_v: usize) {
    let tag = Component::Connector(dd.n);
    let mut seq: Vec<ConnectorItem> = Vec::new();
    for it in dd.connector_items() {
        match it {
            ConnectorItem::Block(c, l) if c > 2 * WINDOW + 1 => {
                seq.extend((0..WINDOW).map(|_| ConnectorItem::One(l)));
                seq.push(ConnectorItem::Block(Integer::from(&c - 2 * WINDOW), l));
                seq.extend((0..WINDOW).map(|_| ConnectorItem::One(l)));
            }
            ConnectorItem::Block(c, l) => seq.extend((0..c.to_u64().unwrap()).map(|_| ConnectorItem::One(l))),
            one => seq.push(one),
        }
    }
    let fj = b.vertices[bottom_v].frame;
    let fb = b.vertices[top_v].frame;
    let label_j = b.vertices[bottom_v].label;
    let label_b = b.vertices[top_v].label;
    let split = seq.iter().position(|it| matches!(it, ConnectorItem::Block(..)));
    let lens: Vec<f64> = seq.iter().map(|it| if let ConnectorItem::One(l) = it { *l } else { 0.0 }).collect();
    // cumulative distances from each end, summed from that end
    let mut from_bottom = vec![0.0; seq.len() + 1];
    for i in 0..seq.len() {
        from_bottom[i + 1] = from_bottom[i] + lens[i];
    }
    let mut from_top = vec![0.0; seq.len() + 1];
    for i in (0..seq.len()).rev() {
        from_top[i] = from_top[i + 1] + lens[i];
    }
    let alt = |l: i8, i: usize| if i % 2 == 0 { l } else { -l };
    let mut ids = vec![usize::MAX; seq.len() + 1];
    ids[0] = bottom_v;
    ids[seq.len()] = top_v;
    for i in 1..seq.len() {
        let low = match split {
            Some(s) => i <= s,
            None => from_bottom[i] <= CONNECTOR_LEN / 2.0,
        };
        ids[i] = if low {
            b.vertex(fj, Complex64::new(0.0, from_bottom[i]), alt(label_j, i), tag)
        } else {
            b.vertex(fb, Complex64::new(0.0, -from_top[i]), alt(label_b, seq.len() - i - split.map_or(0, |_| 0)), tag)
        };
    }
    // above the elided block labels count edges from the top end
    if let Some(s) = split {
        let ConnectorItem::Block(c, l) = &seq[s] else { unreachable!() };
        for i in s + 1..seq.len() {
            b.vertices[ids[i]].label = alt(label_b, seq.len() - i);
        }
        for (i, it) in seq.iter().enumerate() {
            if let ConnectorItem::One(len) = it {
                b.segment(ids[i], ids[i + 1], EdgeKind::Segment, *len, tag);
            }
        }
        let up = Complex64::i();
        b.run(tag, EdgeKind::Segment, ids[s], ids[s + 1], c, (*l, *l), (1.0, 1.0), (up, -up));
    } else {
        for i in 0..seq.len() {
            b.segment(ids[i], ids[i + 1], EdgeKind::Segment, lens[i], tag);
        }
    }
}

fn symmetrize(q: &Quadrant, lambda_over_pi: u64, n_disks: u64) -> Graph {
    let b = &q.b;
    let flips = [(false, false), (false, true), (true, false), (true, true)];
    let nf = b.frames.len();
    let mut frames = Vec::with_capacity(4 * nf);
    for &(fx, fy) in &flips {
        frames.extend(b.frames.iter().map(|&p| reflect(p, fx, fy)));
    }
    let flip_index = |fx: bool, fy: bool| (fx as usize) * 2 + fy as usize;
    let mut ids: HashMap<(usize, bool, bool), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut id_of = |v: usize, fx: bool, fy: bool, vertices: &mut Vec<Vertex>| -> usize {
        let src = b.vertices[v];
        let key = (v, fx && !src.on_imag_axis, fy && !src.on_real_axis);
        *ids.entry(key).or_insert_with(|| {
            let (ex, ey) = (key.1, key.2);
            let mut nv = src;
            nv.frame = flip_index(ex, ey) * nf + src.frame;
            nv.offset = reflect(src.offset, ex, ey);
            nv.pos = reflect(src.pos, ex, ey);
            vertices.push(nv);
            vertices.len() - 1
        })
    };
    let mut edges = Vec::new();
    let mut runs = Vec::new();
    for &(fx, fy) in &flips {
        for (i, e) in b.edges.iter().enumerate() {
            if fx && q.imag_edges[i] {
                continue;
            }
            let mut ne = *e;
            ne.a = id_of(e.a, fx, fy, &mut vertices);
            ne.b = id_of(e.b, fx, fy, &mut vertices);
            if let Some(arc) = e.arc {
                let mut theta = arc.theta;
                if fx {
                    theta = PI - theta;
                }
                if fy {
                    theta = -theta;
                }
                let sweep = if fx != fy { -arc.sweep } else { arc.sweep };
                ne.arc = Some(ArcShape { center: reflect(arc.center, fx, fy), theta, sweep });
            }
            edges.push(ne);
        }
        for (i, r) in b.runs.iter().enumerate() {
            if fx && q.imag_runs[i] {
                continue;
            }
            let mut nr = r.clone();
            nr.from = id_of(r.from, fx, fy, &mut vertices);
            nr.to = id_of(r.to, fx, fy, &mut vertices);
            nr.dir_from = reflect(r.dir_from, fx, fy);
            nr.dir_to = reflect(r.dir_to, fx, fy);
            runs.push(nr);
        }
    }
    Graph { lambda_over_pi, n_disks, height: q.height, frames, vertices, edges, runs }
}

impl Graph {
    /// Edges or elided runs whose end labels contradict bipartiteness.
    pub fn bipartite_violations(&self) -> usize {
        let lab = |v: usize| self.vertices[v].label;
        let e = self.edges.iter().filter(|e| lab(e.a) == lab(e.b)).count();
        let r = self.runs.iter().filter(|r| (lab(r.from) != lab(r.to)) != r.count_odd).count();
        e + r
    }

    pub fn elided_edge_count(&self) -> Integer {
        self.runs.iter().map(|r| r.count.parse::<Integer>().unwrap()).sum()
    }

    /// Position of vertex `v` relative to the frame of vertex `reference`.
    pub fn relative(&self, v: usize, reference: usize) -> Complex64 {
        let a = &self.vertices[v];
        let r = &self.vertices[reference];
        if a.frame == r.frame {
            a.offset - r.offset
        } else {
            (self.frames[a.frame] - self.frames[r.frame]) + (a.offset - r.offset)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    /// Whether the vertex set is invariant under conjugation and negation,
    /// up to `tol` in position.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let key = |z: Complex64, l: i8| ((z.re / tol).round() as i64, (z.im / tol).round() as i64, l);
        let set: std::collections::HashSet<_> = self.vertices.iter().map(|v| key(v.pos, v.label)).collect();
        self.vertices.iter().all(|v| set.contains(&key(v.pos.conj(), v.label)) && set.contains(&key(-v.pos, v.label)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::IndexKey;

    #[test]
    fn vertical_side_for_lambda_4pi() {
        let g = build_graph(&ParameterSet::new(4), 2).unwrap();
        let mut ys: Vec<f64> = g
            .vertices
            .iter()
            .filter(|v| v.tag == Component::StripBoundary && v.pos.re == 0.0 && v.pos.im >= 0.0)
            .map(|v| v.pos.im)
            .collect();
        ys.sort_by(f64::total_cmp);
        let expect: Vec<f64> = (0..=4).map(|k| (k as f64 / 4.0).asin()).collect();
        assert_eq!(ys.len(), 5);
        for (y, e) in ys.iter().zip(&expect) {
            assert!((y - e).abs() < 1e-15);
        }
        assert_eq!(ys[4], FRAC_PI_2);
    }

    #[test]
    fn small_disk_has_alternating_roots_of_unity() {
        let mut p = ParameterSet::new(4);
        p.d_overrides.insert(IndexKey::Literal(1), Degree::small(4));
        let g = build_graph(&p, 1).unwrap();
        let z1 = Complex64::new(compute_a_certified(1, 4).unwrap().a_f64(), PI);
        let ring: Vec<&Vertex> = g.vertices.iter().filter(|v| v.tag == Component::DiskBoundary(1) && v.pos.re > 0.0 && v.pos.im > 0.0).collect();
        assert_eq!(ring.len(), 8);
        for v in ring {
            let ang = (v.pos - z1).arg().rem_euclid(2.0 * PI);
            let j = (ang / (PI / 4.0)).round() as i64;
            assert!((ang - j as f64 * PI / 4.0).abs() < 1e-12);
            assert_eq!(v.label, if j % 2 == 0 { 1 } else { -1 });
        }
        let arcs: Vec<&Edge> = g.edges.iter().filter(|e| e.tag == Component::DiskBoundary(1)).collect();
        assert!(arcs.iter().all(|e| (e.diameter - arcs[0].diameter).abs() == 0.0));
    }

    #[test]
    fn connector_starts_with_pi_over_d() {
        let mut p = ParameterSet::new(4);
        p.d_overrides.insert(IndexKey::Literal(1), Degree::small(4));
        let dd = DiskData::compute(&p, 1).unwrap();
        assert_eq!(dd.ell, PI / 4.0);
        let items = dd.connector_items();
        // the strip end is far shorter, so the progression grows from it
        assert!(dd.layout.from_bottom);
        let ConnectorItem::One(first) = items[0] else { panic!() };
        assert_eq!(first, dd.big_l);
    }

    #[test]
    fn bipartite_and_symmetric_on_several_truncations() {
        for &(k, alpha, n) in &[(1, 1.0, 3), (4, 1.0, 6), (10, 2.0, 4), (4, 1.0, 20)] {
            let g = build_graph(&ParameterSet::new(k).with_alpha(alpha), n).unwrap();
            assert_eq!(g.bipartite_violations(), 0);
            assert!(g.is_symmetric(1e-9), "{k} {alpha} {n}");
            assert!(g.edges.iter().all(|e| e.diameter > 0.0 && e.diameter.is_finite()));
        }
    }

    #[test]
    fn large_disks_are_elided() {
        let g = build_graph(&ParameterSet::new(4), 30).unwrap();
        assert!(g.elided_edge_count() > Integer::from(Integer::u_pow_u(10, 12)));
        assert!(g.edges.len() < 60_000);
    }
}
