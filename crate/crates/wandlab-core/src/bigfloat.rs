//! Big-float intervals and plain big-float complex numbers on MPFR.

use crate::interval::Interval;
use rug::float::{Constant, Round};
use rug::{Float, Integer};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq)]
pub struct BigInterval {
    pub lo: Float,
    pub hi: Float,
}

fn rd<T>(prec: u32, v: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Down).0
}

fn ru<T>(prec: u32, v: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Up).0
}

impl BigInterval {
    pub fn prec(&self) -> u32 {
        self.lo.prec()
    }

    pub fn from_f64(prec: u32, x: f64) -> Self {
        BigInterval { lo: rd(prec, x), hi: ru(prec, x) }
    }

    pub fn from_interval(prec: u32, x: &Interval) -> Self {
        BigInterval { lo: rd(prec, x.lo), hi: ru(prec, x.hi) }
    }

    pub fn from_integer(prec: u32, n: &Integer) -> Self {
        BigInterval { lo: rd(prec, n), hi: ru(prec, n) }
    }

    pub fn from_u64(prec: u32, n: u64) -> Self {
        BigInterval { lo: rd(prec, n), hi: ru(prec, n) }
    }

    pub fn pi(prec: u32) -> Self {
        BigInterval { lo: rd(prec, Constant::Pi), hi: ru(prec, Constant::Pi) }
    }

    pub fn to_interval(&self) -> Interval {
        Interval::new(self.lo.to_f64_round(Round::Down), self.hi.to_f64_round(Round::Up))
    }

    pub fn mid_f64(&self) -> f64 {
        let p = self.prec();
        let m: Float = rd(p, &self.lo + &self.hi) / 2u32;
        m.to_f64()
    }

    pub fn width(&self) -> Float {
        ru(self.prec(), &self.hi - &self.lo)
    }

    pub fn add(&self, o: &BigInterval) -> BigInterval {
        let p = self.prec().max(o.prec());
        BigInterval { lo: rd(p, &self.lo + &o.lo), hi: ru(p, &self.hi + &o.hi) }
    }

    pub fn sub(&self, o: &BigInterval) -> BigInterval {
        let p = self.prec().max(o.prec());
        BigInterval { lo: rd(p, &self.lo - &o.hi), hi: ru(p, &self.hi - &o.lo) }
    }

    pub fn neg(&self) -> BigInterval {
        BigInterval { lo: Float::with_val(self.prec(), -&self.hi), hi: Float::with_val(self.prec(), -&self.lo) }
    }

    pub fn mul(&self, o: &BigInterval) -> BigInterval {
        let p = self.prec().max(o.prec());
        let cands = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in cands {
            let l = rd(p, a * b);
            let h = ru(p, a * b);
            lo = Some(match lo {
                Some(x) if x <= l => x,
                _ => l,
            });
            hi = Some(match hi {
                Some(x) if x >= h => x,
                _ => h,
            });
        }
        BigInterval { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    /// Division by a positive interval.
    pub fn div_pos(&self, o: &BigInterval) -> BigInterval {
        assert!(o.lo > 0, "divisor must be positive");
        let p = self.prec().max(o.prec());
        let lo = if self.lo >= 0 { rd(p, &self.lo / &o.hi) } else { rd(p, &self.lo / &o.lo) };
        let hi = if self.hi >= 0 { ru(p, &self.hi / &o.lo) } else { ru(p, &self.hi / &o.hi) };
        BigInterval { lo, hi }
    }

    pub fn exp(&self) -> BigInterval {
        let p = self.prec();
        BigInterval { lo: rd(p, self.lo.exp_ref()), hi: ru(p, self.hi.exp_ref()) }
    }

    pub fn ln(&self) -> BigInterval {
        assert!(self.lo > 0, "ln of nonpositive big interval");
        let p = self.prec();
        BigInterval { lo: rd(p, self.lo.ln_ref()), hi: ru(p, self.hi.ln_ref()) }
    }

    pub fn ln_1p(&self) -> BigInterval {
        let p = self.prec();
        BigInterval { lo: rd(p, self.lo.ln_1p_ref()), hi: ru(p, self.hi.ln_1p_ref()) }
    }

    pub fn sinh(&self) -> BigInterval {
        let p = self.prec();
        BigInterval { lo: rd(p, self.lo.sinh_ref()), hi: ru(p, self.hi.sinh_ref()) }
    }

    /// cosh on an interval with nonnegative lower endpoint.
    pub fn cosh_nonneg(&self) -> BigInterval {
        assert!(self.lo >= 0);
        let p = self.prec();
        BigInterval { lo: rd(p, self.lo.cosh_ref()), hi: ru(p, self.hi.cosh_ref()) }
    }

    pub fn acosh(&self) -> BigInterval {
        let p = self.prec();
        BigInterval { lo: rd(p, self.lo.acosh_ref()), hi: ru(p, self.hi.acosh_ref()) }
    }

    pub fn scale_u64(&self, k: u64) -> BigInterval {
        self.mul(&BigInterval::from_u64(self.prec(), k))
    }

    /// Integer part, when both endpoints agree on it.
    pub fn floor_exact(&self) -> Option<Integer> {
        let a = self.lo.to_integer_round(Round::Down)?.0;
        let b = self.hi.to_integer_round(Round::Down)?.0;
        (a == b).then_some(a)
    }

    pub fn certainly_lt(&self, o: &BigInterval) -> bool {
        self.hi < o.lo
    }

    pub fn certainly_gt(&self, o: &BigInterval) -> bool {
        self.lo > o.hi
    }
}

/// Plain (non-interval) big-float complex number; used by oracles only.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn new(prec: u32, re: f64, im: f64) -> Self {
        BigComplex { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        BigComplex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &BigComplex) -> BigComplex {
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }

    pub fn sub(&self, o: &BigComplex) -> BigComplex {
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }

    pub fn mul(&self, o: &BigComplex) -> BigComplex {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        BigComplex { re, im }
    }

    pub fn scale(&self, k: &Float) -> BigComplex {
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re * k), im: Float::with_val(p, &self.im * k) }
    }

    pub fn div(&self, o: &BigComplex) -> BigComplex {
        let p = self.prec();
        let den = Float::with_val(p, o.re.square_ref()) + Float::with_val(p, o.im.square_ref());
        let re = (Float::with_val(p, &self.re * &o.re) + Float::with_val(p, &self.im * &o.im)) / &den;
        let im = (Float::with_val(p, &self.im * &o.re) - Float::with_val(p, &self.re * &o.im)) / &den;
        BigComplex { re, im }
    }

    fn sin_cos(x: &Float) -> (Float, Float) {
        let p = x.prec();
        let mut s = Float::with_val(p, x);
        let mut c = Float::new(p);
        s.sin_cos_mut(&mut c);
        (s, c)
    }

    fn sinh_cosh(x: &Float) -> (Float, Float) {
        let p = x.prec();
        let mut s = Float::with_val(p, x);
        let mut c = Float::new(p);
        s.sinh_cosh_mut(&mut c);
        (s, c)
    }

    pub fn sinh(&self) -> BigComplex {
        let (sh, ch) = Self::sinh_cosh(&self.re);
        let (s, c) = Self::sin_cos(&self.im);
        BigComplex { re: sh * c, im: ch * s }
    }

    pub fn cosh(&self) -> BigComplex {
        let (sh, ch) = Self::sinh_cosh(&self.re);
        let (s, c) = Self::sin_cos(&self.im);
        BigComplex { re: ch * c, im: sh * s }
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}
