//! Brute-force big-float oracles shared by the integration tests.
#![allow(dead_code)]

use rug::float::Constant;
use rug::{Float, Integer};

pub const PREC: u32 = 256;

#[derive(Clone, Debug)]
pub struct C {
    pub re: Float,
    pub im: Float,
}

fn f(v: impl Into<f64>) -> Float {
    Float::with_val(PREC, v.into())
}

impl C {
    pub fn new(re: Float, im: Float) -> Self {
        C { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        C { re: f(re), im: f(im) }
    }

    pub fn add(&self, o: &C) -> C {
        C::new(Float::with_val(PREC, &self.re + &o.re), Float::with_val(PREC, &self.im + &o.im))
    }

    pub fn sub(&self, o: &C) -> C {
        C::new(Float::with_val(PREC, &self.re - &o.re), Float::with_val(PREC, &self.im - &o.im))
    }

    pub fn mul(&self, o: &C) -> C {
        let re = Float::with_val(PREC, &self.re * &o.re) - Float::with_val(PREC, &self.im * &o.im);
        let im = Float::with_val(PREC, &self.re * &o.im) + Float::with_val(PREC, &self.im * &o.re);
        C::new(re, im)
    }

    pub fn scale(&self, k: &Float) -> C {
        C::new(Float::with_val(PREC, &self.re * k), Float::with_val(PREC, &self.im * k))
    }

    pub fn div(&self, o: &C) -> C {
        let den = Float::with_val(PREC, o.re.square_ref()) + Float::with_val(PREC, o.im.square_ref());
        let re = (Float::with_val(PREC, &self.re * &o.re) + Float::with_val(PREC, &self.im * &o.im)) / &den;
        let im = (Float::with_val(PREC, &self.im * &o.re) - Float::with_val(PREC, &self.re * &o.im)) / &den;
        C::new(re, im)
    }

    fn parts(&self) -> (Float, Float, Float, Float) {
        let (s, c) = self.im.clone().sin_cos(f(0.0));
        let (sh, ch) = self.re.clone().sinh_cosh(f(0.0));
        (sh, ch, s, c)
    }

    pub fn sinh(&self) -> C {
        let (sh, ch, s, c) = self.parts();
        C::new(sh * c, ch * s)
    }

    pub fn cosh(&self) -> C {
        let (sh, ch, s, c) = self.parts();
        C::new(ch * c, sh * s)
    }

    pub fn abs(&self) -> Float {
        Float::with_val(PREC, self.re.hypot_ref(&self.im))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

pub fn lambda(k: u64) -> Float {
    Float::with_val(PREC, Constant::Pi) * k
}

/// cosh(lam sinh z) and its derivative.
pub fn strip(z: &C, lam: &Float) -> (C, C) {
    let s = z.sinh().scale(lam);
    let d = s.sinh().mul(&z.cosh()).scale(lam);
    (s.cosh(), d)
}

/// acosh(floor(k cosh(m pi)) / k) at generous precision.
pub fn anchor(m: u64, k: u64) -> Float {
    let p = 64 + 10 * m as u32;
    let c = (Float::with_val(p, Constant::Pi) * m).cosh() * k;
    let fl = c.floor().to_integer().unwrap();
    let r = Float::with_val(p, &fl) / k;
    Float::with_val(PREC, r.acosh())
}

pub fn newton(target: &C, start: &C, lam: &Float, iters: usize) -> C {
    let mut z = start.clone();
    for _ in 0..iters {
        let (v, d) = strip(&z, lam);
        z = z.sub(&v.sub(target).div(&d));
    }
    z
}

/// Preimages under the strip map near 1/2 of the landing point z_p and of
/// `samples` points on the circle of radius 1/4 around it.
pub struct Shooting {
    pub center: C,
    pub boundary: Vec<(f64, f64)>,
    pub max_residual: f64,
}

pub fn shoot(k: u64, p: u64, samples: usize) -> Shooting {
    let lam = lambda(k);
    let a = anchor(p, k);
    // real-axis Newton: f(x) = a_p
    let mut x = f(0.5);
    for _ in 0..60 {
        let (v, d) = strip(&C::new(x.clone(), f(0.0)), &lam);
        x -= (v.re - &a) / d.re;
    }
    let zp = C::new(a.clone(), Float::with_val(PREC, Constant::Pi));
    let center = newton(&zp, &C::new(x, f(0.0)), &lam, 60);
    let (_, dc) = strip(&center, &lam);
    let mut boundary = Vec::with_capacity(samples);
    let mut max_residual: f64 = 0.0;
    let mut prev = center.clone();
    for j in 0..samples {
        let th = Float::with_val(PREC, Constant::Pi) * 2u32 * j as u32 / samples as u32;
        let (s, c) = th.sin_cos(f(0.0));
        let w = C::new(c / 4u32, s / 4u32);
        let target = zp.add(&w);
        let start = if j == 0 { center.add(&w.div(&dc)) } else { prev.clone() };
        let z = newton(&target, &start, &lam, 40);
        let (v, _) = strip(&z, &lam);
        max_residual = max_residual.max(v.sub(&target).abs().to_f64());
        boundary.push(z.to_f64());
        prev = z;
    }
    Shooting { center, boundary, max_residual }
}

/// Distance from q to the segment [a, b].
pub fn seg_dist(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / l2).clamp(0.0, 1.0) };
    let (px, py) = (a.0 + t * dx - q.0, a.1 + t * dy - q.1);
    px.hypot(py)
}

/// Winding number of the closed polygon around q.
pub fn winding(poly: &[(f64, f64)], q: (f64, f64)) -> i64 {
    let mut total = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let a1 = (a.1 - q.1).atan2(a.0 - q.0);
        let b1 = (b.1 - q.1).atan2(b.0 - q.0);
        let mut d = b1 - a1;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Smallest even d with ln(delta) + d ln(1/4 + eps) < ln(0.009) - ln (f^2)'(1/2),
/// from plain MPFR arithmetic on the closed forms.
pub fn smallest_landing_degree(k: u64, nbhd: f64, eps: f64) -> Integer {
    let p = 1200;
    let fl = |v: f64| Float::with_val(p, v);
    let lam = Float::with_val(p, Constant::Pi) * k;
    let half = fl(0.5);
    let w0 = Float::with_val(p, &lam * half.clone().sinh());
    let x1 = w0.clone().cosh();
    let l1 = (w0.sinh() * &lam * half.cosh()).ln();
    let w1 = Float::with_val(p, &lam * x1.clone().sinh());
    // ln sinh w1 = w1 - ln 2 up to e^{-2 w1}, far below this precision
    let l2 = l1 + &w1 - fl(2.0).ln() + lam.ln() + x1.cosh().ln();
    let delta = fl(0.5) - fl(nbhd);
    let q = (delta.ln() - (fl(9.0) / 1000u32).ln() + l2) / -(fl(0.25) + fl(eps)).ln();
    let fq = q.floor().to_integer().unwrap();
    let d = fq + 1u32;
    if d.is_even() {
        d
    } else {
        d + 1u32
    }
}
