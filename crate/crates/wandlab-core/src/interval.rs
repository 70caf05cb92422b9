//! Outward-rounded interval arithmetic on machine reals.
//!
//! Field operations use error-free transformations (two-sum, fma) to round
//! each endpoint in the correct direction. Transcendental functions are
//! evaluated by MPFR at 53 bits with directed rounding, so every endpoint is
//! the correctly rounded bound.

use rug::float::Round;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if s.is_infinite() {
        return if s > 0.0 { f64::MAX } else { s };
    }
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if s.is_infinite() {
        return if s < 0.0 { f64::MIN } else { s };
    }
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_infinite() {
        return if p > 0.0 { f64::MAX } else { p };
    }
    if p == 0.0 {
        // underflow or exact zero
        return if a == 0.0 || b == 0.0 || (a > 0.0) == (b > 0.0) { 0.0 } else { -f64::from_bits(1) };
    }
    let e = a.mul_add(b, -p);
    if e < 0.0 || (e == 0.0 && p.abs() < f64::MIN_POSITIVE) {
        p.next_down()
    } else {
        p
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_infinite() {
        return if p < 0.0 { f64::MIN } else { p };
    }
    if p == 0.0 {
        return if a == 0.0 || b == 0.0 || (a > 0.0) != (b > 0.0) { 0.0 } else { f64::from_bits(1) };
    }
    let e = a.mul_add(b, -p);
    if e > 0.0 || (e == 0.0 && p.abs() < f64::MIN_POSITIVE) {
        p.next_up()
    } else {
        p
    }
}

pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q.is_infinite() {
        return if q > 0.0 { f64::MAX } else { q };
    }
    if q == 0.0 {
        return if a == 0.0 || (a > 0.0) == (b > 0.0) { 0.0 } else { -f64::from_bits(1) };
    }
    if q.abs() < f64::MIN_POSITIVE {
        return q.next_down();
    }
    // a - q*b has the sign of the true remainder
    let r = (-q).mul_add(b, a);
    let s = if b > 0.0 { r } else { -r };
    if s < 0.0 {
        q.next_down()
    } else {
        q
    }
}

pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q.is_infinite() {
        return if q < 0.0 { f64::MIN } else { q };
    }
    if q == 0.0 {
        return if a == 0.0 || (a > 0.0) != (b > 0.0) { 0.0 } else { f64::from_bits(1) };
    }
    if q.abs() < f64::MIN_POSITIVE {
        return q.next_up();
    }
    let r = (-q).mul_add(b, a);
    let s = if b > 0.0 { r } else { -r };
    if s > 0.0 {
        q.next_up()
    } else {
        q
    }
}

/// Evaluate a unary MPFR function at 53 bits with the given rounding.
pub fn mpfr_unary(x: f64, round: Round, f: impl Fn(&mut Float, Round) -> std::cmp::Ordering) -> f64 {
    let mut v = Float::with_val(53, x);
    f(&mut v, round);
    v.to_f64_round(round)
}

fn pi_bounds() -> (f64, f64) {
    let lo = Float::with_val_round(53, rug::float::Constant::Pi, Round::Down).0;
    let hi = Float::with_val_round(53, rug::float::Constant::Pi, Round::Up).0;
    (lo.to_f64(), hi.to_f64())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn pi() -> Self {
        let (lo, hi) = pi_bounds();
        Interval { lo, hi }
    }

    pub fn ln2() -> Self {
        Interval::point(2.0).ln()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn mig(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(add_down(self.lo, -o.hi), add_up(self.hi, -o.lo))
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        if a >= 0.0 && c >= 0.0 {
            return Interval::new(mul_down(a, c), mul_up(b, d));
        }
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Interval::new(lo, hi)
    }

    pub fn scale(&self, k: f64) -> Interval {
        self.mul(&Interval::point(k))
    }

    /// Division by an interval not containing zero.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by interval containing zero");
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let lo = div_down(a, c).min(div_down(a, d)).min(div_down(b, c)).min(div_down(b, d));
        let hi = div_up(a, c).max(div_up(a, d)).max(div_up(b, c)).max(div_up(b, d));
        Interval::new(lo, hi)
    }

    pub fn sqr(&self) -> Interval {
        let m = self.mig();
        let g = self.mag();
        Interval::new(mul_down(m, m), mul_up(g, g))
    }

    pub fn sqrt(&self) -> Interval {
        let lo = mpfr_unary(self.lo.max(0.0), Round::Down, |v, r| v.sqrt_round(r));
        let hi = mpfr_unary(self.hi.max(0.0), Round::Up, |v, r| v.sqrt_round(r));
        Interval::new(lo, hi)
    }

    pub fn exp(&self) -> Interval {
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.exp_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.exp_round(r));
        Interval::new(lo, hi)
    }

    /// Natural log; requires a positive lower endpoint.
    pub fn ln(&self) -> Interval {
        assert!(self.lo > 0.0, "ln of nonpositive interval {:?}", self);
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.ln_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.ln_round(r));
        Interval::new(lo, hi)
    }

    pub fn ln_1p(&self) -> Interval {
        assert!(self.lo > -1.0);
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.ln_1p_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.ln_1p_round(r));
        Interval::new(lo, hi)
    }

    pub fn sinh(&self) -> Interval {
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.sinh_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.sinh_round(r));
        Interval::new(lo, hi)
    }

    pub fn cosh(&self) -> Interval {
        let m = self.mig();
        let g = self.mag();
        let lo = mpfr_unary(m, Round::Down, |v, r| v.cosh_round(r));
        let hi = mpfr_unary(g, Round::Up, |v, r| v.cosh_round(r));
        Interval::new(lo, hi)
    }

    pub fn tanh(&self) -> Interval {
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.tanh_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.tanh_round(r));
        Interval::new(lo, hi)
    }

    pub fn asinh(&self) -> Interval {
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.asinh_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.asinh_round(r));
        Interval::new(lo, hi)
    }

    pub fn acosh(&self) -> Interval {
        assert!(self.lo >= 1.0);
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.acosh_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.acosh_round(r));
        Interval::new(lo, hi)
    }

    pub fn asin(&self) -> Interval {
        assert!(self.lo >= -1.0 && self.hi <= 1.0);
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.asin_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.asin_round(r));
        Interval::new(lo, hi)
    }

    pub fn atan(&self) -> Interval {
        let lo = mpfr_unary(self.lo, Round::Down, |v, r| v.atan_round(r));
        let hi = mpfr_unary(self.hi, Round::Up, |v, r| v.atan_round(r));
        Interval::new(lo, hi)
    }

    /// Range of a periodic function with extrema at `offset + j*pi`.
    fn periodic(&self, f: impl Fn(f64, Round) -> f64, max_at_even: bool, half_shift: bool) -> Interval {
        if !(self.width() < 6.0) {
            return Interval::new(-1.0, 1.0);
        }
        let mut lo = f(self.lo, Round::Down).min(f(self.hi, Round::Down));
        let mut hi = f(self.lo, Round::Up).max(f(self.hi, Round::Up));
        let (plo, phi) = pi_bounds();
        let shift = if half_shift { 0.5 } else { 0.0 };
        let j0 = (self.lo / std::f64::consts::PI - shift).floor() as i64 - 1;
        let j1 = (self.hi / std::f64::consts::PI - shift).ceil() as i64 + 1;
        for j in j0..=j1 {
            let t = j as f64 + shift;
            let (a, b) = if t >= 0.0 {
                (mul_down(t, plo), mul_up(t, phi))
            } else {
                (mul_down(t, phi), mul_up(t, plo))
            };
            if b >= self.lo && a <= self.hi {
                let even = j.rem_euclid(2) == 0;
                if even == max_at_even {
                    hi = 1.0;
                } else {
                    lo = -1.0;
                }
            }
        }
        Interval::new(lo.max(-1.0), hi.min(1.0))
    }

    pub fn cos(&self) -> Interval {
        self.periodic(|x, r| mpfr_unary(x, r, |v, rr| v.cos_round(rr)), true, false)
    }

    pub fn sin(&self) -> Interval {
        self.periodic(|x, r| mpfr_unary(x, r, |v, rr| v.sin_round(rr)), true, true)
    }
}

/// Rectangular complex interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl CInterval {
    pub fn new(re: Interval, im: Interval) -> Self {
        CInterval { re, im }
    }

    pub fn point(re: f64, im: f64) -> Self {
        CInterval { re: Interval::point(re), im: Interval::point(im) }
    }

    pub fn real(re: Interval) -> Self {
        CInterval { re, im: Interval::point(0.0) }
    }

    pub fn add(&self, o: &CInterval) -> CInterval {
        CInterval::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &CInterval) -> CInterval {
        CInterval::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn mul(&self, o: &CInterval) -> CInterval {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        CInterval::new(re, im)
    }

    pub fn scale(&self, k: &Interval) -> CInterval {
        CInterval::new(self.re.mul(k), self.im.mul(k))
    }

    pub fn sinh(&self) -> CInterval {
        let (c, s) = (self.im.cos(), self.im.sin());
        CInterval::new(self.re.sinh().mul(&c), self.re.cosh().mul(&s))
    }

    pub fn cosh(&self) -> CInterval {
        let (c, s) = (self.im.cos(), self.im.sin());
        CInterval::new(self.re.cosh().mul(&c), self.re.sinh().mul(&s))
    }

    /// Upper bound of the modulus over the box.
    pub fn abs_hi(&self) -> f64 {
        let x = self.re.mag();
        let y = self.im.mag();
        Interval::point(x).sqr().add(&Interval::point(y).sqr()).sqrt().hi
    }

    /// Lower bound of the modulus over the box.
    pub fn abs_lo(&self) -> f64 {
        let x = self.re.mig();
        let y = self.im.mig();
        Interval::point(x).sqr().add(&Interval::point(y).sqr()).sqrt().lo
    }

    pub fn hull(&self, o: &CInterval) -> CInterval {
        CInterval::new(self.re.hull(&o.re), self.im.hull(&o.im))
    }

    pub fn contains_interval(&self, o: &CInterval) -> bool {
        self.re.contains_interval(&o.re) && self.im.contains_interval(&o.im)
    }

    pub fn mid(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.mid(), self.im.mid())
    }
}
