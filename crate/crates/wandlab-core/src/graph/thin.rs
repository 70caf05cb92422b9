//! Area of the dilatation support inside unit disks, with certified lower
//! and upper bounds from slab decompositions.

use super::lengths::{acosh_step_forward, CONNECTOR_LEN};
use super::{truncation, ConnectorItem, DiskData, GraphError};
use crate::params::ParameterSet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

pub const DEFAULT_R0: f64 = 0.1;
const START_SLABS: usize = 64;
const MAX_SLABS: usize = 1 << 16;
/// Relative slack absorbing rounding in a single piece bound.
const SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Piece {
    Rect { center: Complex64, half_w: f64, half_h: f64 },
    Annulus { center: Complex64, outer: f64, width: f64 },
    /// Tubes of half-width r0 * len(e) around the horizontal strip edges
    /// acosh(k c) + i y for sx * x in [t0, t1].
    StripTube { y: f64, sx: f64, t0: f64, t1: f64, c: f64, r0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// h(r) = exp(-rate r)
    Exp { rate: f64 },
}

impl Weight {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Weight::Exp { rate } => (-rate * r).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinSetSpec {
    pub pieces: Vec<Piece>,
    pub epsilon: f64,
    pub weight: Weight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThinVerdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinArea {
    pub area_lo: f64,
    pub area_hi: f64,
    pub bound: f64,
    pub verdict: ThinVerdict,
    pub slabs: usize,
}

impl ThinArea {
    pub fn area(&self) -> f64 {
        0.5 * (self.area_lo + self.area_hi)
    }

    /// Certified strict inequality self < other.
    pub fn certainly_less(&self, other: &ThinArea) -> bool {
        self.area_hi < other.area_lo
    }
}

fn four(c: Complex64) -> [Complex64; 4] {
    [c, c.conj(), -c, -c.conj()]
}

impl ThinSetSpec {
    pub fn new(pieces: Vec<Piece>) -> Self {
        ThinSetSpec { pieces, epsilon: 1.0, weight: Weight::Exp { rate: 1.0 } }
    }

    /// Tubes of relative radius r0 around the connectors, rays, axis and
    /// strip boundary, and the annuli where the disk maps are interpolated.
    pub fn from_params(params: &ParameterSet, n_disks: u64, r0: f64) -> Result<Self, GraphError> {
        params.validate()?;
        let m = params.lambda_over_pi;
        let c = 1.0 / m as f64;
        let disks = (1..=n_disks).map(|n| DiskData::compute(params, n)).collect::<Result<Vec<_>, _>>()?;
        let (height, x_end) = truncation(&disks);
        let mut pieces = Vec::new();
        let vertical = |y0: f64, y1: f64, len: f64, pieces: &mut Vec<Piece>| {
            for s in [1.0, -1.0] {
                pieces.push(Piece::Rect { center: Complex64::new(0.0, s * 0.5 * (y0 + y1)), half_w: r0 * len, half_h: 0.5 * (y1 - y0) });
            }
        };
        let ys: Vec<f64> = (0..=m).map(|k| if k == m { FRAC_PI_2 } else { (k as f64 * c).asin() }).collect();
        for k in 0..m as usize {
            vertical(ys[k], ys[k + 1], ys[k + 1] - ys[k], &mut pieces);
        }
        let s0 = FRAC_PI_2 - (1.0 - c).asin();
        if height > FRAC_PI_2 {
            vertical(FRAC_PI_2, height, s0, &mut pieces);
        }
        for sx in [1.0, -1.0] {
            for y in [FRAC_PI_2, -FRAC_PI_2] {
                pieces.push(Piece::StripTube { y, sx, t0: 0.0, t1: x_end, c, r0 });
            }
        }
        for dd in &disks {
            let df = dd.d.to_f64();
            let chord = 2.0 * (PI / (2.0 * df)).sin();
            let gap = (-(0.75f64.ln() / df).exp_m1()).max(r0 * chord);
            for z in four(Complex64::new(dd.a, PI)) {
                pieces.push(Piece::Annulus { center: z, outer: 1.0 + r0 * chord, width: r0 * chord + gap });
            }
            let mut y = FRAC_PI_2;
            for it in dd.connector_items() {
                let (len, n) = match it {
                    ConnectorItem::One(l) => (l, 1.0),
                    ConnectorItem::Block(cnt, l) => (l, cnt.to_f64()),
                };
                let total = n * len;
                for z in four(Complex64::new(dd.a, y + 0.5 * total)) {
                    pieces.push(Piece::Rect { center: z, half_w: r0 * len, half_h: 0.5 * total });
                }
                y += total;
            }
            debug_assert!((y - (FRAC_PI_2 + CONNECTOR_LEN)).abs() < 1e-12);
            if height > PI + 1.0 {
                for z in four(Complex64::new(dd.a, 0.5 * (PI + 1.0 + height))) {
                    pieces.push(Piece::Rect { center: z, half_w: r0 * dd.ell, half_h: 0.5 * (height - PI - 1.0) });
                }
            }
        }
        Ok(ThinSetSpec::new(pieces))
    }
}

fn disk_h(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt()
}

/// Length of [c - hh, c + hh] inside [-h, h].
fn overlap(c: f64, hh: f64, h: f64) -> f64 {
    if c.abs() + hh <= h {
        2.0 * hh
    } else {
        ((c + hh).min(h) - (c - hh).max(-h)).max(0.0)
    }
}

/// Area of the rectangle [dx - hw, dx + hw] x [dy - hh, dy + hh] inside the unit disk.
fn rect_disk(dx: f64, dy: f64, hw: f64, hh: f64, slabs: usize) -> (f64, f64) {
    let (dx, dy, hw, hh) = if hw < hh { (dy, dx, hh, hw) } else { (dx, dy, hw, hh) };
    let ex = (dx.abs() - hw).max(0.0);
    let ey = (dy.abs() - hh).max(0.0);
    if ex * ex + ey * ey >= 1.0 {
        return (0.0, 0.0);
    }
    let full = 4.0 * hw * hh;
    let fx = dx.abs() + hw;
    let fy = dy.abs() + hh;
    if fx * fx + fy * fy <= 1.0 {
        return (full, full);
    }
    // integrate along u = x - dx
    let u0 = (-hw).max(-1.0 - dx);
    let u1 = hw.min(1.0 - dx);
    if u1 <= u0 {
        return (0.0, 0.0);
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    let step = (u1 - u0) / slabs as f64;
    for i in 0..slabs {
        let ua = u0 + i as f64 * step;
        let ub = if i + 1 == slabs { u1 } else { ua + step };
        let (xa, xb) = (dx + ua, dx + ub);
        let h_min = disk_h(xa).min(disk_h(xb));
        let h_max = if xa <= 0.0 && xb >= 0.0 { 1.0 } else { disk_h(xa).max(disk_h(xb)) };
        lo += (ub - ua) * overlap(dy, hh, h_min);
        hi += (ub - ua) * overlap(dy, hh, h_max);
    }
    (lo * (1.0 - SLACK), (hi * (1.0 + SLACK)).min(full))
}

/// Angular measure of {|w - center| = r} inside the unit disk at distance dist.
fn circle_inside(r: f64, dist: f64) -> f64 {
    let g = (r * r + dist * dist - 1.0) / (2.0 * r * dist);
    2.0 * g.clamp(-1.0, 1.0).acos()
}

fn annulus_disk(dist: f64, outer: f64, width: f64, slabs: usize) -> (f64, f64) {
    let inner = outer - width;
    let exact = PI * width * (2.0 * outer - width);
    if dist + outer <= 1.0 {
        return (exact, exact);
    }
    if dist >= outer + 1.0 || inner >= dist + 1.0 {
        return (0.0, 0.0);
    }
    if dist < 1e-300 {
        let a = PI * (outer.min(1.0).powi(2) - inner.min(1.0).powi(2));
        return (a * (1.0 - SLACK), a * (1.0 + SLACK));
    }
    let crit = if dist > 1.0 { (dist * dist - 1.0).sqrt() } else { f64::NAN };
    let (mut lo, mut hi) = (0.0, 0.0);
    let step = width / slabs as f64;
    for i in 0..slabs {
        let sa = i as f64 * step;
        let sb = if i + 1 == slabs { width } else { sa + step };
        let (rb, ra) = (outer - sa, outer - sb);
        let mut th = [circle_inside(ra, dist), circle_inside(rb, dist)];
        let mut tmin = th[0].min(th[1]);
        let mut tmax = th[0].max(th[1]);
        if crit > ra && crit < rb {
            th[0] = circle_inside(crit, dist);
            tmin = tmin.min(th[0]);
            tmax = tmax.max(th[0]);
        }
        // integral of r dr over the slab
        let ring = (sb - sa) * (2.0 * outer - sa - sb) / 2.0;
        lo += tmin * ring;
        hi += tmax * ring;
    }
    (lo * (1.0 - SLACK), (hi * (1.0 + SLACK)).min(exact))
}

/// Largest length of a strip edge containing abscissa t.
fn strip_len_upper(t: f64, c: f64) -> f64 {
    let w = t.cosh() - c;
    if w <= 1.0 {
        acosh_step_forward(0.0, c)
    } else {
        super::lengths::acosh_step_back(t, c)
    }
}

fn tube_disk(zt: f64, zy: f64, t0: f64, t1: f64, c: f64, r0: f64, slabs: usize) -> (f64, f64) {
    let ta = t0.max(zt - 1.0);
    let tb = t1.min(zt + 1.0);
    if tb <= ta || zy.abs() >= 1.0 + r0 * acosh_step_forward(0.0, c) {
        return (0.0, 0.0);
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    let step = (tb - ta) / slabs as f64;
    for i in 0..slabs {
        let a = ta + i as f64 * step;
        let b = if i + 1 == slabs { tb } else { a + step };
        let w_lo = r0 * acosh_step_forward(b, c);
        let w_hi = r0 * strip_len_upper(a, c);
        let cx = 0.5 * (a + b) - zt;
        lo += rect_disk(cx, -zy, 0.5 * (b - a), w_lo, 2).0;
        hi += rect_disk(cx, -zy, 0.5 * (b - a), w_hi, 2).1;
    }
    (lo, hi)
}

fn piece_bbox(p: &Piece) -> (f64, f64, f64, f64) {
    match *p {
        Piece::Rect { center, half_w, half_h } => (center.re - half_w, center.im - half_h, center.re + half_w, center.im + half_h),
        Piece::Annulus { center, outer, .. } => (center.re - outer, center.im - outer, center.re + outer, center.im + outer),
        Piece::StripTube { y, sx, t0, t1, c, r0 } => {
            let w = r0 * acosh_step_forward(0.0, c);
            let (x0, x1) = if sx > 0.0 { (t0, t1) } else { (-t1, -t0) };
            (x0, y - w, x1, y + w)
        }
    }
}

fn piece_disk(p: &Piece, z: Complex64, slabs: usize) -> (f64, f64) {
    match *p {
        Piece::Rect { center, half_w, half_h } => {
            let d = center - z;
            rect_disk(d.re, d.im, half_w, half_h, slabs)
        }
        Piece::Annulus { center, outer, width } => annulus_disk((center - z).norm(), outer, width, slabs),
        Piece::StripTube { y, sx, t0, t1, c, r0 } => tube_disk(sx * z.re, z.im - y, t0, t1, c, r0, slabs),
    }
}

fn box_overlap(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> f64 {
    let w = a.2.min(b.2) - a.0.max(b.0);
    let h = a.3.min(b.3) - a.1.max(b.1);
    if w > 0.0 && h > 0.0 {
        w * h
    } else {
        0.0
    }
}

/// Area bounds at a fixed slab count.
pub fn thin_area_at(spec: &ThinSetSpec, z: Complex64, slabs: usize) -> ThinArea {
    let near = (z.re - 1.0, z.im - 1.0, z.re + 1.0, z.im + 1.0);
    let mut parts = Vec::new();
    for p in &spec.pieces {
        let b = piece_bbox(p);
        if box_overlap(b, near) == 0.0 {
            continue;
        }
        let (lo, hi) = piece_disk(p, z, slabs);
        if hi > 0.0 {
            // clip the box to the disk's box for the overlap correction
            let cb = (b.0.max(near.0), b.1.max(near.1), b.2.min(near.2), b.3.min(near.3));
            parts.push((lo, hi, cb));
        }
    }
    let hi: f64 = parts.iter().map(|p| p.1).sum();
    let sum_lo: f64 = parts.iter().map(|p| p.0).sum();
    let max_lo = parts.iter().map(|p| p.0).fold(0.0, f64::max);
    let mut overlaps = 0.0;
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            overlaps += box_overlap(parts[i].2, parts[j].2).min(parts[i].1).min(parts[j].1);
        }
    }
    let lo = max_lo.max(sum_lo - overlaps);
    let bound = spec.epsilon * spec.weight.eval(z.norm());
    let verdict = if hi <= bound {
        ThinVerdict::Pass
    } else if lo > bound {
        ThinVerdict::Fail
    } else {
        ThinVerdict::Indeterminate
    };
    ThinArea { area_lo: lo, area_hi: hi.min(PI), bound, verdict, slabs }
}

/// Area bounds, refining until the comparison with the bound is decided.
pub fn thin_area(spec: &ThinSetSpec, z: Complex64) -> ThinArea {
    let mut slabs = START_SLABS;
    loop {
        let r = thin_area_at(spec, z, slabs);
        if r.verdict != ThinVerdict::Indeterminate || slabs >= MAX_SLABS {
            return r;
        }
        slabs *= 4;
    }
}

/// Whether area(a, z) < area(b, z) is certified, refining as needed.
pub fn certainly_smaller(a: &ThinSetSpec, b: &ThinSetSpec, z: Complex64) -> (bool, ThinArea, ThinArea) {
    let mut slabs = START_SLABS;
    loop {
        let (x, y) = (thin_area_at(a, z, slabs), thin_area_at(b, z, slabs));
        if x.certainly_less(&y) || slabs >= MAX_SLABS {
            return (x.certainly_less(&y), x, y);
        }
        slabs *= 4;
    }
}

/// Twenty centers near the first disk where its annulus and the strip
/// tube both reach the unit disk: z_1 + r e^{i phi} and mirror images.
pub fn comparison_centers(lambda_over_pi: u64) -> Result<Vec<Complex64>, GraphError> {
    let z1 = Complex64::new(crate::model::compute_a(1, lambda_over_pi)?, PI);
    let base = [(-120.0f64, 1.9), (-135.0, 1.8), (-135.0, 2.0), (-150.0, 1.9), (-160.0, 1.9)];
    Ok(base
        .iter()
        .flat_map(|&(deg, r)| four(z1 + Complex64::from_polar(r, deg.to_radians())))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub z: Complex64,
    pub base: ThinArea,
    pub steeper: ThinArea,
    pub wider: ThinArea,
    pub strong: ThinArea,
    pub steeper_smaller: bool,
    pub wider_smaller: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntitoneSweep {
    pub rows: Vec<SweepRow>,
    pub steeper_all: bool,
    pub wider_all: bool,
    pub strong_all: bool,
}

impl AntitoneSweep {
    pub fn passed(&self) -> bool {
        self.steeper_all && self.wider_all && self.strong_all
    }
}

/// Compare the thin set of `base` with a steeper degree schedule and a
/// larger lambda at each center, and test `strong` against its bound.
pub fn antitone_sweep(
    base: &ParameterSet,
    steeper: &ParameterSet,
    wider: &ParameterSet,
    strong: &ParameterSet,
    centers: &[Complex64],
    n_disks: u64,
    r0: f64,
) -> Result<AntitoneSweep, GraphError> {
    let specs = [base, steeper, wider, strong].map(|p| ThinSetSpec::from_params(p, n_disks, r0));
    let [b, s, w, g] = specs;
    let (b, s, w, g) = (b?, s?, w?, g?);
    let rows: Vec<SweepRow> = centers
        .iter()
        .map(|&z| {
            let (steeper_smaller, sa, ba) = certainly_smaller(&s, &b, z);
            let (wider_smaller, wa, _) = certainly_smaller(&w, &b, z);
            SweepRow { z, base: ba, steeper: sa, wider: wa, strong: thin_area(&g, z), steeper_smaller, wider_smaller }
        })
        .collect();
    Ok(AntitoneSweep {
        steeper_all: rows.iter().all(|r| r.steeper_smaller),
        wider_all: rows.iter().all(|r| r.wider_smaller),
        strong_all: rows.iter().all(|r| r.strong.verdict == ThinVerdict::Pass),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus(d: f64) -> ThinSetSpec {
        let inner = 0.75f64.powf(1.0 / d);
        ThinSetSpec::new(vec![Piece::Annulus { center: Complex64::new(0.0, 0.0), outer: 1.0, width: 1.0 - inner }])
    }

    #[test]
    fn far_point_has_zero_area() {
        let r = thin_area(&annulus(4.0), Complex64::new(5.0, 0.0));
        assert_eq!((r.area_lo, r.area_hi), (0.0, 0.0));
        assert_eq!(r.verdict, ThinVerdict::Pass);
    }

    #[test]
    fn annulus_centered_on_z_has_closed_form_area() {
        let z = Complex64::new(0.0, 0.0);
        let a4 = thin_area(&annulus(4.0), z);
        let a8 = thin_area(&annulus(8.0), z);
        // pi (1 - (3/4)^{1/2}) and pi (1 - (3/4)^{1/4})
        assert!((a4.area_lo - 0.4208936).abs() < 1e-7 && a4.area_lo == a4.area_hi, "{a4:?}");
        assert!((a8.area_hi - 0.2180113).abs() < 1e-7, "{a8:?}");
        assert!(a8.certainly_less(&a4));
    }

    #[test]
    fn rect_bounds_bracket_the_true_area() {
        // quarter of the unit disk: rect [0,1]x[0,1]
        let (lo, hi) = rect_disk(0.5, 0.5, 0.5, 0.5, 4096);
        assert!(lo <= PI / 4.0 && hi >= PI / 4.0 && hi - lo < 1e-3, "{lo} {hi}");
        let (lo, hi) = annulus_disk(1.2, 0.6, 0.3, 4096);
        assert!(lo <= hi && hi - lo < 1e-3);
    }

    #[test]
    fn tube_thins_out_along_the_strip() {
        let near = tube_disk(0.5, 0.0, 0.0, 20.0, 0.25, 0.1, 256);
        let far = tube_disk(10.0, 0.0, 0.0, 20.0, 0.25, 0.1, 256);
        assert!(far.1 < near.0);
        assert!(far.1 < 1e-4);
    }
}
