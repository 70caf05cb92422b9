//! Level-index ("tower") reals: magnitude = exp applied `level` times to an
//! interval index. Used for orbit points and derivative products that
//! overflow every fixed-exponent float.

use crate::interval::{div_down, div_up, mpfr_unary, mul_up, Interval};
use rug::float::Round;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const MAX_LEVEL: u32 = 64;

/// Ratio below which the smaller summand is absorbed: if ln a - ln b >= 745
/// then b/a < 2^-1074 and ln(a+b) - ln a lies in [0, smallest subnormal].
pub const ABSORPTION_LOG_GAP: f64 = 745.0;

const TINY: f64 = 4.9406564584124654e-324;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TowerError {
    #[error("input must be finite and nonnegative, got {0}")]
    BadInput(f64),
    #[error("level overflow: tower deeper than {MAX_LEVEL}")]
    LevelOverflow,
    #[error("logarithm needs an argument certified >= 1")]
    LnDomain,
    #[error("operation defined for nonnegative operands only")]
    NegativeOperand,
    #[error("enclosure straddles zero")]
    SignUnknown,
    #[error("indeterminate: {0}")]
    Indeterminate(&'static str),
    #[error("cannot parse tower: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TowerError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertifiedOrdering {
    Less,
    Greater,
    Equal,
    Indeterminate,
}

impl CertifiedOrdering {
    pub fn reverse(self) -> Self {
        match self {
            CertifiedOrdering::Less => CertifiedOrdering::Greater,
            CertifiedOrdering::Greater => CertifiedOrdering::Less,
            o => o,
        }
    }

    /// Certainly greater or certainly equal.
    pub fn is_ge(self) -> bool {
        matches!(self, CertifiedOrdering::Greater | CertifiedOrdering::Equal)
    }
}

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowerReal {
    sign: i8,
    level: u32,
    index: Interval,
}

fn ln_up(x: f64) -> f64 {
    mpfr_unary(x, Round::Up, |v, r| v.ln_round(r))
}

fn exp_up(x: f64) -> f64 {
    mpfr_unary(x, Round::Up, |v, r| v.exp_round(r))
}

fn exp_down(x: f64) -> f64 {
    mpfr_unary(x, Round::Down, |v, r| v.exp_round(r))
}

/// ln(1 + e^d), increasing in d.
fn softplus(d: &Interval) -> Interval {
    fn at(x: f64) -> Interval {
        let p = Interval::point(x);
        if x >= 0.0 {
            p.add(&p.neg().exp().ln_1p())
        } else {
            p.exp().ln_1p()
        }
    }
    Interval::new(at(d.lo).lo, at(d.hi).hi)
}

impl TowerReal {
    pub fn zero() -> Self {
        TowerReal { sign: 0, level: 0, index: Interval::point(0.0) }
    }

    pub fn one() -> Self {
        TowerReal { sign: 1, level: 1, index: Interval::point(0.0) }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> Interval {
        self.index
    }

    /// Raw constructor; normalizes the index.
    pub fn from_parts(sign: i8, level: u32, index: Interval) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(TowerError::LevelOverflow);
        }
        if sign == 0 {
            return Ok(Self::zero());
        }
        if !(index.lo >= 0.0) || index.hi.is_nan() {
            return Err(TowerError::Parse(format!("bad index {:?}", index)));
        }
        let mut t = if level == 0 {
            Self::from_interval(index)?
        } else {
            let mut t = TowerReal { sign: 1, level, index };
            // a lower endpoint >= 1 belongs one level up
            while t.index.lo >= 1.0 {
                t.index = t.index.ln();
                t.level += 1;
                if t.level > MAX_LEVEL {
                    return Err(TowerError::LevelOverflow);
                }
            }
            t
        };
        if sign < 0 {
            t = t.neg();
        }
        Ok(t)
    }

    pub fn from_real(x: f64) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(TowerError::BadInput(x));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        if x < 1.0 {
            return Ok(TowerReal { sign: 1, level: 0, index: Interval::point(x) });
        }
        let mut lo = Float::with_val(128, x);
        let mut hi = Float::with_val(128, x);
        let mut level = 0;
        while lo >= 1 {
            lo.ln_round(Round::Down);
            hi.ln_round(Round::Up);
            level += 1;
        }
        let index = Interval::new(lo.to_f64_round(Round::Down).max(0.0), hi.to_f64_round(Round::Up));
        Ok(TowerReal { sign: 1, level, index })
    }

    /// Tower enclosing every real in `iv`; the interval must not straddle 0.
    pub fn from_interval(iv: Interval) -> Result<Self> {
        if iv.lo.is_nan() || iv.hi.is_nan() {
            return Err(TowerError::BadInput(f64::NAN));
        }
        if iv.lo >= 0.0 {
            Self::from_magnitude(iv)
        } else if iv.hi <= 0.0 {
            Ok(Self::from_magnitude(iv.neg())?.neg())
        } else {
            Err(TowerError::SignUnknown)
        }
    }

    fn from_magnitude(iv: Interval) -> Result<Self> {
        if !iv.hi.is_finite() {
            return Err(TowerError::BadInput(iv.hi));
        }
        if iv.hi == 0.0 {
            return Ok(Self::zero());
        }
        let mut cur = iv;
        let mut level = 0;
        while cur.lo >= 1.0 {
            cur = cur.ln();
            level += 1;
        }
        Ok(TowerReal { sign: 1, level, index: cur })
    }

    pub fn neg(&self) -> Self {
        TowerReal { sign: -self.sign, ..*self }
    }

    /// Upper bound on the magnitude (may be +inf).
    pub fn mag_hi(&self) -> f64 {
        let mut y = self.index.hi;
        for _ in 0..self.level {
            y = exp_up(y);
            if y == f64::INFINITY {
                break;
            }
        }
        y
    }

    /// Lower bound on the magnitude, saturating at f64::MAX.
    pub fn mag_lo(&self) -> f64 {
        let mut y = self.index.lo;
        for _ in 0..self.level {
            y = exp_down(y);
            if y >= f64::MAX {
                return f64::MAX;
            }
        }
        y
    }

    /// Magnitude as a machine interval, when it fits.
    pub fn mag_interval(&self) -> Option<Interval> {
        let hi = self.mag_hi();
        hi.is_finite().then(|| Interval::new(self.mag_lo(), hi))
    }

    /// Signed machine interval, when it fits.
    pub fn to_interval(&self) -> Option<Interval> {
        let m = self.mag_interval()?;
        Some(if self.sign < 0 { m.neg() } else { m })
    }

    fn require_nonneg(&self) -> Result<()> {
        if self.sign < 0 {
            Err(TowerError::NegativeOperand)
        } else {
            Ok(())
        }
    }

    pub fn exp(&self) -> Result<Self> {
        match self.sign {
            0 => Ok(Self::one()),
            1 => {
                if self.level + 1 > MAX_LEVEL {
                    return Err(TowerError::LevelOverflow);
                }
                Ok(TowerReal { sign: 1, level: self.level + 1, index: self.index })
            }
            _ => {
                let lo = exp_down(-self.mag_hi());
                let hi = exp_up(-self.mag_lo());
                Self::from_magnitude(Interval::new(lo, hi))
            }
        }
    }

    /// Natural log of a tower certified >= 1.
    pub fn ln(&self) -> Result<Self> {
        if self.sign != 1 || self.level == 0 {
            return Err(TowerError::LnDomain);
        }
        if self.level == 1 {
            Self::from_magnitude(self.index)
        } else {
            Ok(TowerReal { sign: 1, level: self.level - 1, index: self.index })
        }
    }

    /// Natural log of a positive tower; negative results allowed when small.
    pub fn ln_signed(&self) -> Result<Self> {
        if self.sign != 1 {
            return Err(TowerError::LnDomain);
        }
        if self.level >= 1 {
            return self.ln();
        }
        if self.index.lo <= 0.0 {
            return Err(TowerError::LnDomain);
        }
        Self::from_interval(self.index.ln())
    }

    pub fn compare(&self, o: &TowerReal) -> CertifiedOrdering {
        use CertifiedOrdering::*;
        match (self.sign, o.sign) {
            (0, 0) => Equal,
            (a, b) if a >= 0 && b >= 0 => mag_cmp(self, o),
            (a, b) if a <= 0 && b <= 0 => mag_cmp(self, o).reverse(),
            (a, _) => {
                let (pos, neg) = if a > 0 { (self, o) } else { (o, self) };
                let strict = pos.level > 0 || pos.index.lo > 0.0 || neg.level > 0 || neg.index.lo > 0.0;
                let r = if strict { Greater } else { Indeterminate };
                if a > 0 {
                    r
                } else {
                    r.reverse()
                }
            }
        }
    }

    /// Certified enclosure of self + c for a nonnegative tower and a machine
    /// interval c; the sum must be certified nonnegative.
    pub fn add_interval(&self, c: &Interval) -> Result<Self> {
        self.require_nonneg()?;
        if let Some(t) = self.mag_interval() {
            let s = t.add(c);
            if s.hi.is_finite() {
                return Self::from_interval(s);
            }
        }
        if self.level == 0 {
            return Err(TowerError::Indeterminate("level-0 operand overflowed"));
        }
        // ln(t + c) = ln t + ln1p(c/t) with t >= tlo
        let tlo = self.mag_lo();
        let u = Interval::new(div_down(c.lo, tlo).min(0.0), div_up(c.hi, tlo).max(0.0));
        if u.lo <= -1.0 {
            return Err(TowerError::Indeterminate("offset comparable to tower"));
        }
        self.ln()?.add_interval(&u.ln_1p())?.exp()
    }

    /// Sum of two nonnegative towers.
    pub fn add(&self, o: &TowerReal) -> Result<Self> {
        self.require_nonneg()?;
        o.require_nonneg()?;
        if self.sign == 0 {
            return Ok(*o);
        }
        if o.sign == 0 {
            return Ok(*self);
        }
        let (ra, rb) = (self.mag_interval(), o.mag_interval());
        match (ra, rb) {
            (Some(a), Some(b)) => {
                let s = a.add(&b);
                if s.hi.is_finite() {
                    return Self::from_magnitude(s);
                }
                if a.lo >= b.lo {
                    self.add_interval(&b)
                } else {
                    o.add_interval(&a)
                }
            }
            (None, Some(b)) => self.add_interval(&b),
            (Some(a), None) => o.add_interval(&a),
            (None, None) => {
                let la = self.ln()?;
                let lb = o.ln()?;
                let gap = Interval::point(ABSORPTION_LOG_GAP);
                let absorbed = Interval::new(0.0, TINY);
                if la.compare(&lb.add_interval(&gap)?).is_ge() {
                    return la.add_interval(&absorbed)?.exp();
                }
                if lb.compare(&la.add_interval(&gap)?).is_ge() {
                    return lb.add_interval(&absorbed)?.exp();
                }
                if let (Some(x), Some(y)) = (la.mag_interval(), lb.mag_interval()) {
                    let s = x.add(&softplus(&y.sub(&x)));
                    return Self::from_magnitude(s)?.exp();
                }
                // max(a,b) <= a+b <= 2 max(a,b)
                la.hull(&lb)?.add_interval(&Interval::new(0.0, Interval::ln2().hi))?.exp()
            }
        }
    }

    /// Product of two nonnegative towers.
    pub fn mul(&self, o: &TowerReal) -> Result<Self> {
        self.require_nonneg()?;
        o.require_nonneg()?;
        if self.sign == 0 || o.sign == 0 {
            return Ok(Self::zero());
        }
        if let (Some(a), Some(b)) = (self.mag_interval(), o.mag_interval()) {
            let p = a.mul(&b);
            if p.hi.is_finite() {
                return Self::from_magnitude(p);
            }
        }
        let la = self.ln_signed()?;
        let lb = o.ln_signed()?;
        let s = match (la.sign >= 0, lb.sign >= 0) {
            (true, true) => la.add(&lb)?,
            (true, false) => la.add_interval(&lb.to_interval().ok_or(TowerError::Indeterminate("log factor"))?)?,
            (false, true) => lb.add_interval(&la.to_interval().ok_or(TowerError::Indeterminate("log factor"))?)?,
            (false, false) => return Err(TowerError::Indeterminate("product of two small factors overflowed")),
        };
        s.exp()
    }

    /// Smallest tower enclosing both nonnegative operands.
    pub fn hull(&self, o: &TowerReal) -> Result<Self> {
        self.require_nonneg()?;
        o.require_nonneg()?;
        let low = if (self.level, self.index.lo) <= (o.level, o.index.lo) { self } else { o };
        // express the larger upper endpoint at low.level
        let upper_self = lift_upper(self, low.level);
        let upper_o = lift_upper(o, low.level);
        let hi = upper_self.max(upper_o);
        if !hi.is_finite() {
            return Err(TowerError::Indeterminate("hull spans levels beyond machine range"));
        }
        Ok(TowerReal { sign: 1, level: low.level, index: Interval::new(low.index.lo, hi) })
    }
}

/// Upper endpoint of `t` expressed as an index at a lower level.
fn lift_upper(t: &TowerReal, level: u32) -> f64 {
    let mut y = t.index.hi;
    for _ in level..t.level {
        y = exp_up(y);
    }
    y
}

fn mag_cmp(a: &TowerReal, b: &TowerReal) -> CertifiedOrdering {
    use CertifiedOrdering::*;
    if a.level == b.level {
        let (x, y) = (a.index, b.index);
        if x.hi < y.lo {
            Less
        } else if x.lo > y.hi {
            Greater
        } else if x.lo == x.hi && y.lo == y.hi && x.lo == y.lo {
            Equal
        } else {
            Indeterminate
        }
    } else if a.level < b.level {
        if upper_below(a.index.hi, b.level - a.level, b.index.lo) {
            Less
        } else {
            Indeterminate
        }
    } else {
        mag_cmp(b, a).reverse()
    }
}

/// Is E^k(hi) < E^k... i.e. does an index `hi` at some level stay strictly
/// below a tower `steps` levels higher with lower index `target_lo`?
fn upper_below(hi: f64, steps: u32, target_lo: f64) -> bool {
    let mut y = hi;
    for _ in 0..steps {
        if y < 1.0 {
            return true;
        }
        y = ln_up(y);
    }
    y < target_lo
}

impl fmt::Display for TowerReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            1 => "+1",
            -1 => "-1",
            _ => "0",
        };
        write!(f, "{} * E^{}({}..{})", s, self.level, self.index.lo, self.index.hi)
    }
}

impl fmt::Debug for TowerReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TowerReal {
    type Err = TowerError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || TowerError::Parse(s.to_string());
        let (sign, rest) = s.split_once(" * E^").ok_or_else(bad)?;
        let sign: i8 = match sign.trim() {
            "+1" | "1" => 1,
            "-1" => -1,
            "0" => 0,
            _ => return Err(bad()),
        };
        let (level, rest) = rest.split_once('(').ok_or_else(bad)?;
        let level: u32 = level.parse().map_err(|_| bad())?;
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        let (lo, hi) = body.split_once("..").ok_or_else(bad)?;
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        if !(lo <= hi) {
            return Err(bad());
        }
        let t = TowerReal { sign, level, index: Interval::new(lo, hi) };
        if sign == 0 {
            return if level == 0 && lo == 0.0 && hi == 0.0 { Ok(t) } else { Err(bad()) };
        }
        if level > MAX_LEVEL || lo < 0.0 || (level > 0 && lo >= 1.0) || (level == 0 && lo >= 1.0) {
            return Err(bad());
        }
        Ok(t)
    }
}

pub fn tw_from_real(x: f64) -> Result<TowerReal> {
    TowerReal::from_real(x)
}

pub fn tw_exp(a: &TowerReal) -> Result<TowerReal> {
    a.exp()
}

pub fn tw_ln(a: &TowerReal) -> Result<TowerReal> {
    a.ln()
}

pub fn tw_cmp(a: &TowerReal, b: &TowerReal) -> CertifiedOrdering {
    a.compare(b)
}

pub fn tw_add(a: &TowerReal, b: &TowerReal) -> Result<TowerReal> {
    a.add(b)
}

pub fn tw_mul(a: &TowerReal, b: &TowerReal) -> Result<TowerReal> {
    a.mul(b)
}

/// Largest W for which cosh(W) is evaluated directly in machine intervals.
const DIRECT_COSH_LIMIT: f64 = 700.0;

/// ln(lambda * sinh x) for x beyond machine range of sinh.
fn ln_sinh_scaled(x: &TowerReal, lambda: &Interval) -> Result<TowerReal> {
    let xlo = x.mag_lo();
    // ln(1 - e^{-2x}) in [-2 e^{-2x}, 0] once e^{-2x} <= 1/2
    let tail = Interval::new(-mul_up(2.0, exp_up(-2.0 * xlo)), 0.0);
    let c = lambda.ln().sub(&Interval::ln2()).add(&tail);
    x.add_interval(&c)
}

/// Certified enclosure of cosh(lambda * sinh x) for x >= 0.
pub fn prototype_step(x: &TowerReal, lambda: &Interval) -> Result<TowerReal> {
    x.require_nonneg()?;
    if let Some(xi) = x.mag_interval() {
        let w = xi.sinh().mul(lambda);
        if w.hi <= DIRECT_COSH_LIMIT {
            return TowerReal::from_magnitude(w.cosh());
        }
        if w.hi.is_finite() {
            let corr = Interval::new(0.0, exp_up(-2.0 * w.lo));
            let lnf = w.sub(&Interval::ln2()).add(&corr);
            return TowerReal::from_magnitude(lnf)?.exp();
        }
    }
    let w = ln_sinh_scaled(x, lambda)?.exp()?;
    let corr = Interval::new(0.0, exp_up(-2.0 * w.mag_lo()));
    w.add_interval(&Interval::ln2().neg().add(&corr))?.exp()
}

/// Certified enclosure of ln f'(x) where f(x) = cosh(lambda * sinh x),
/// f'(x) = sinh(lambda sinh x) * lambda cosh x.
pub fn prototype_log_derivative(x: &TowerReal, lambda: &Interval) -> Result<TowerReal> {
    x.require_nonneg()?;
    let ln2 = Interval::ln2();
    let xi = x.mag_interval();
    let ln_cosh_x: Option<Interval> = xi.map(|v| {
        if v.hi <= DIRECT_COSH_LIMIT {
            v.cosh().ln()
        } else {
            v.sub(&ln2).add(&Interval::new(0.0, exp_up(-2.0 * v.lo)))
        }
    });
    if let (Some(v), Some(lc)) = (xi, ln_cosh_x) {
        let w = v.sinh().mul(lambda);
        if w.lo <= 0.0 {
            return Err(TowerError::LnDomain);
        }
        let ln_sinh_w = if w.hi <= DIRECT_COSH_LIMIT {
            Some(w.sinh().ln())
        } else if w.hi.is_finite() && w.lo >= 1.0 {
            Some(w.sub(&ln2).add(&Interval::new(-mul_up(2.0, exp_up(-2.0 * w.lo)), 0.0)))
        } else {
            None
        };
        if let Some(ls) = ln_sinh_w {
            return TowerReal::from_interval(ls.add(&lambda.ln()).add(&lc));
        }
    }
    let w = ln_sinh_scaled(x, lambda)?.exp()?;
    let ln_cosh = match ln_cosh_x {
        Some(lc) => TowerReal::from_interval(lc)?,
        None => {
            let xlo = x.mag_lo();
            x.add_interval(&ln2.neg().add(&Interval::new(0.0, exp_up(-2.0 * xlo))))?
        }
    };
    let wlo = w.mag_lo();
    let c = lambda.ln().sub(&ln2).add(&Interval::new(-mul_up(2.0, exp_up(-2.0 * wlo)), 0.0));
    w.add(&ln_cosh)?.add_interval(&c)
}
