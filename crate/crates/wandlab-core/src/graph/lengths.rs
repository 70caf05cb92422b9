//! Edge lengths of the strip-boundary families and the connector layout.

use rug::float::Round;
use rug::{Float, Integer};
use std::f64::consts::FRAC_PI_2;

/// Length of the vertical segment joining a disk to the half-strip.
pub const CONNECTOR_LEN: f64 = FRAC_PI_2 - 1.0;
/// Two lengths are comparable when their ratio lies in [1/COMPARABLE, COMPARABLE].
pub const COMPARABLE: f64 = 2.0;

/// acosh(cosh x + c) - x without cancellation, for 0 <= x <= 700.
pub fn acosh_step_forward(x: f64, c: f64) -> f64 {
    let v = x.cosh();
    let sv = x.sinh();
    let su = (sv * sv + c * (2.0 * v + c)).sqrt();
    ((c + c * (2.0 * v + c) / (su + sv)) * (-x).exp()).ln_1p()
}

/// x - acosh(max(1, cosh x - c)): the length of the edge ending at x.
pub fn acosh_step_back(x: f64, c: f64) -> f64 {
    let v = x.cosh();
    let w = v - c;
    if w <= 1.0 {
        return x;
    }
    let sv = x.sinh();
    let sw = (sv * sv - c * (2.0 * v - c)).max(0.0).sqrt();
    ((c + c * (2.0 * v - c) / (sv + sw)) / (w + sw)).ln_1p()
}

/// acosh(k/m) - acosh(p/m) for large integers, to full relative accuracy.
pub fn acosh_diff(k: &Integer, p: &Integer, m: u64) -> f64 {
    if k == p {
        return 0.0;
    }
    let prec = k.significant_bits().max(p.significant_bits()) + 128;
    let f = |q: &Integer| {
        let mut x = Float::with_val(prec, q);
        x /= m;
        x.acosh_mut();
        x
    };
    let d = f(k) - f(p);
    d.to_f64_round(Round::Nearest)
}

/// acosh(k/m) in machine precision.
pub fn acosh_at(k: &Integer, m: u64) -> f64 {
    let mut x = Float::with_val(k.significant_bits() + 64, k);
    x /= m;
    x.acosh_mut();
    x.to_f64()
}

/// Connector lengths from the disk end (length ell = pi/d) to the strip end
/// (length big_l): a doubling progression out of the shorter end until it
/// becomes comparable with the longer one, then a uniform block.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectorLayout {
    /// The progression starts at the strip end.
    pub from_bottom: bool,
    /// Progression lengths, starting from the short end.
    pub progression: Vec<f64>,
    pub uniform_count: Integer,
    pub uniform_len: f64,
}

impl ConnectorLayout {
    /// `odd` when the two end labels differ, so the edge count must be odd.
    pub fn new(ell: f64, big_l: f64, odd: bool) -> Self {
        let from_bottom = big_l <= ell;
        let (s, b) = if from_bottom { (big_l, ell) } else { (ell, big_l) };
        let mut progression = Vec::new();
        let mut total = 0.0;
        if b / s > COMPARABLE {
            let mut e = s;
            loop {
                if total + e > CONNECTOR_LEN - e / 2.0 {
                    break;
                }
                total += e;
                progression.push(e);
                if e >= b / COMPARABLE {
                    break;
                }
                e *= 2.0;
            }
        }
        let rest = CONNECTOR_LEN - total;
        let q = (rest / b).round().max(1.0);
        let mut uniform_count = Integer::from_f64(q).expect("finite count");
        let edges = Integer::from(&uniform_count + progression.len() as u64);
        if edges.is_odd() != odd {
            uniform_count += 1;
        }
        let uniform_len = rest / uniform_count.to_f64();
        ConnectorLayout { from_bottom, progression, uniform_count, uniform_len }
    }

    pub fn total_edges(&self) -> Integer {
        Integer::from(&self.uniform_count + self.progression.len() as u64)
    }
}
