//! Orbit of 1/2 under the strip map, derivative growth along it, the Koebe
//! constants, and the pullback disks U_n built from them.

mod pullback;

pub use pullback::*;

use crate::bigfloat::BigInterval;
use crate::interval::Interval;
use crate::model::{compute_a_certified, MAX_A_INDEX};
use crate::params::{ParamError, ParameterSet};
use crate::tower::{prototype_log_derivative, prototype_step, tw_add, CertifiedOrdering, TowerError, TowerReal};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Steps certified symbolically by default.
pub const DEFAULT_SYMBOLIC_STEPS: usize = 25;
/// Working precision of the concrete orbit prefix.
pub const CONCRETE_PREC: u32 = 1024;
const MIN_LAMBDA: f64 = 10.0;
const ESCAPE_CELLS: usize = 1024;

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error("lambda = {0} < 10: the model needs dphi/dx >= 10/lambda with phi = id")]
    EscapeCondition(f64),
    #[error("indeterminate {what} at step {k}")]
    Indeterminate { k: usize, what: &'static str },
    #[error("{what} fails at step {k}")]
    Violated { k: usize, what: &'static str },
    #[error("orbit too short: need step {0}")]
    Short(usize),
    #[error("koebe radius {0} outside (0, 1)")]
    KoebeRadius(f64),
    #[error("pullback n = {n}: {msg}")]
    Pullback { n: usize, msg: String },
    #[error("correction budget exhausted at step {n}: used {used:e} of {budget:e}")]
    Budget { n: usize, used: f64, budget: f64 },
    #[error("tower: {0}")]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

pub type Result<T> = std::result::Result<T, OrbitError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EscapeReport {
    pub lambda: f64,
    pub x_max: f64,
    pub cells: usize,
    /// Cells settled by direct interval evaluation at the cell ends.
    pub direct_cells: usize,
    /// Cells settled by the minorants f' >= lambda^2 x, f >= 1 + lambda^2 x^2 / 2.
    pub minorant_cells: usize,
    pub pass: bool,
}

/// f'(x) >= 100 x and f(x) >= 50 x^2 - 1 on [0, x_max] for f = cosh(lambda sinh x).
pub fn check_escape_condition(params: &ParameterSet, x_max: f64) -> Result<EscapeReport> {
    let lam = params.lambda();
    if !(lam.lo >= MIN_LAMBDA) {
        return Err(OrbitError::EscapeCondition(params.lambda_f64()));
    }
    let minorant_ok = lam.sqr().lo >= 100.0;
    let cells = if x_max > 0.0 { ESCAPE_CELLS } else { 1 };
    let h = Interval::point(x_max.max(0.0)).div(&Interval::point(cells as f64));
    let mut direct = 0;
    let mut minorant = 0;
    let mut pass = true;
    for j in 0..cells {
        let u = h.scale(j as f64).lo.max(0.0);
        let v = h.scale((j + 1) as f64).hi.min(x_max.max(0.0));
        let uu = Interval::point(u);
        let w = uu.sinh().mul(&lam);
        let fp = w.sinh().mul(&lam).mul(&uu.cosh());
        let f = w.cosh();
        let vv = Interval::point(v);
        let need_fp = vv.scale(100.0).hi;
        let need_f = vv.sqr().scale(50.0).sub(&Interval::point(1.0)).hi;
        // both functions increase on [0, inf)
        if fp.lo.is_finite() && f.lo.is_finite() && fp.lo >= need_fp && f.lo >= need_f {
            direct += 1;
        } else if minorant_ok {
            minorant += 1;
        } else {
            pass = false;
        }
    }
    Ok(EscapeReport { lambda: params.lambda_f64(), x_max, cells, direct_cells: direct, minorant_cells: minorant, pass })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub k: usize,
    pub x: TowerReal,
    /// x_{k+1} - x_k >= 11.
    pub spacing: CertifiedOrdering,
    /// f'(x_k) >= 50.
    pub deriv: CertifiedOrdering,
    pub ln_fprime: TowerReal,
    /// ln (f^k)'(1/2).
    pub logderiv: TowerReal,
}

/// Records k = 0..=n with certified spacing and derivative verdicts.
pub fn iterate_orbit(params: &ParameterSet, n: usize) -> Result<Vec<OrbitRecord>> {
    check_escape_condition(params, 0.0)?;
    let lam = params.lambda();
    let ln50 = TowerReal::from_interval(Interval::point(50.0).ln())?;
    let mut x = TowerReal::from_real(0.5)?;
    let mut logderiv = TowerReal::zero();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let next = prototype_step(&x, &lam)?;
        let spacing = next.compare(&x.add_interval(&Interval::point(11.0))?);
        let ln_fprime = prototype_log_derivative(&x, &lam)?;
        let deriv = ln_fprime.compare(&ln50);
        for (v, what) in [(spacing, "spacing"), (deriv, "derivative bound")] {
            match v {
                CertifiedOrdering::Greater => {}
                CertifiedOrdering::Indeterminate => return Err(OrbitError::Indeterminate { k, what }),
                _ => return Err(OrbitError::Violated { k, what }),
            }
        }
        out.push(OrbitRecord { k, x, spacing, deriv, ln_fprime, logderiv });
        logderiv = tw_add(&logderiv, &ln_fprime)?;
        x = next;
    }
    Ok(out)
}

/// n ln 50 + ln n!, outward rounded.
pub fn factorial_floor(n: usize) -> Interval {
    let mut s = Interval::point(50.0).ln().scale(n as f64);
    for j in 2..=n {
        s = s.add(&Interval::point(j as f64).ln());
    }
    s
}

/// logderiv_k >= k ln 50 + ln k! for every record.
pub fn factorial_growth(orbit: &[OrbitRecord]) -> Vec<(usize, CertifiedOrdering)> {
    orbit
        .iter()
        .map(|r| {
            let f = factorial_floor(r.k);
            let v = if r.k == 0 {
                CertifiedOrdering::Equal
            } else {
                TowerReal::from_interval(f).map_or(CertifiedOrdering::Indeterminate, |t| r.logderiv.compare(&t))
            };
            (r.k, v)
        })
        .collect()
}

/// Orbit prefix at CONCRETE_PREC bits: x_0, x_1 and the logarithmic
/// quantities that stay representable one step further.
#[derive(Clone, Debug)]
pub struct ConcreteOrbit {
    pub lambda_over_pi: u64,
    pub lambda: BigInterval,
    pub x1: BigInterval,
    pub ln_x2: BigInterval,
    pub ln_fprime0: BigInterval,
    pub ln_fprime1: BigInterval,
}

impl ConcreteOrbit {
    pub fn new(params: &ParameterSet) -> Self {
        let p = CONCRETE_PREC;
        let lam = BigInterval::pi(p).scale_u64(params.lambda_over_pi);
        let half = BigInterval::from_f64(p, 0.5);
        let w0 = half.sinh().mul(&lam);
        let x1 = w0.cosh_nonneg();
        let ln_lam = lam.ln();
        let ln_fprime0 = w0.sinh().ln().add(&ln_lam).add(&half.cosh_nonneg().ln());
        let w1 = x1.sinh().mul(&lam);
        let ln2 = BigInterval::from_u64(p, 2).ln();
        // e^{-2 W1}; upward rounding keeps the upper end positive on underflow
        let t = w1.scale_u64(2).neg().exp().hi;
        assert!(t > 0);
        let zero = rug::Float::with_val(p, 0);
        // ln(1 - t) in [-2t, 0] and ln(1 + t) in [0, t]
        let mut m2t = t.clone();
        m2t *= -2i32;
        let down = BigInterval { lo: m2t, hi: zero.clone() };
        let up = BigInterval { lo: zero, hi: t };
        let ln_sinh_w1 = w1.sub(&ln2).add(&down);
        let ln_fprime1 = ln_sinh_w1.add(&ln_lam).add(&x1.cosh_nonneg().ln());
        let ln_x2 = w1.sub(&ln2).add(&up);
        ConcreteOrbit { lambda_over_pi: params.lambda_over_pi, lambda: lam, x1, ln_x2, ln_fprime0, ln_fprime1 }
    }

    pub fn logderiv(&self, n: usize) -> Option<BigInterval> {
        match n {
            0 => Some(BigInterval::from_u64(CONCRETE_PREC, 0)),
            1 => Some(self.ln_fprime0.clone()),
            2 => Some(self.ln_fprime0.add(&self.ln_fprime1)),
            _ => None,
        }
    }
}

/// Enclosure of a_m = acosh(floor(k cosh(m pi)) / k). Beyond the certified
/// table a_m lies within 4 e^{-m pi} of m pi.
pub fn anchor_enclosure(m: u64, lambda_over_pi: u64) -> Interval {
    if m <= MAX_A_INDEX {
        if let Ok(c) = compute_a_certified(m, lambda_over_pi) {
            return c.a.to_interval();
        }
    }
    let mpi = Interval::pi().scale(m as f64);
    let gap = Interval::point(4.0).mul(&mpi.neg().exp());
    Interval::new(mpi.sub(&gap).lo, mpi.hi)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LandingIndex {
    pub n: usize,
    /// Enclosure of x_n / pi.
    pub proxy: TowerReal,
    /// The integer p_n, when x_n is a machine number.
    pub index: Option<u64>,
    /// Upper bound of |x_n - a_{p_n}|.
    pub gap: f64,
    /// Set when the gap bound was evaluated, not inferred from a_m spacing.
    pub gap_certified: bool,
    /// Two candidates could not be separated; the smaller was taken.
    pub tie: bool,
}

/// (pi + 1/10) / 2, the farthest x_n can sit from its nearest anchor.
pub fn gap_bound() -> Interval {
    Interval::pi().add(&Interval::point(0.1)).scale(0.5)
}

/// p_n minimizing |x_n - a_p|; ties go to the smaller index.
pub fn select_p(n: usize, orbit: &[OrbitRecord], params: &ParameterSet) -> Result<LandingIndex> {
    let rec = orbit.get(n).ok_or(OrbitError::Short(n))?;
    let inv_pi = TowerReal::from_interval(Interval::point(1.0).div(&Interval::pi()))?;
    let proxy = rec.x.mul(&inv_pi)?;
    let bound = gap_bound();
    let Some(x) = rec.x.mag_interval().filter(|x| x.hi < 1e15) else {
        return Ok(LandingIndex { n, proxy, index: None, gap: bound.hi, gap_certified: false, tie: false });
    };
    let q = x.div(&Interval::pi());
    let lo = (q.lo.floor() as u64).max(2) - 1;
    let hi = q.hi.ceil() as u64 + 1;
    let dists: Vec<(u64, Interval)> = (lo..=hi)
        .map(|m| {
            let a = anchor_enclosure(m, params.lambda_over_pi);
            let d = x.sub(&a);
            (m, Interval::new(d.mig(), d.mag()))
        })
        .collect();
    let best_hi = dists.iter().map(|(_, d)| d.hi).fold(f64::INFINITY, f64::min);
    // every candidate that might attain the minimum
    let contenders: Vec<&(u64, Interval)> = dists.iter().filter(|(_, d)| d.lo <= best_hi).collect();
    let (m, d) = contenders[0];
    let gap = d.hi;
    if !(gap <= bound.lo) {
        return Err(OrbitError::Violated { k: n, what: "landing gap" });
    }
    Ok(LandingIndex { n, proxy, index: Some(*m), gap, gap_certified: true, tie: contenders.len() > 1 })
}

/// Distortion bounds at |z| = r for univalent F on the unit disk with
/// F(0) = 0, F'(0) = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoebeFactors {
    pub growth_max: f64,
    pub growth_min: f64,
    pub deriv_max: f64,
    pub deriv_min: f64,
    pub quarter: f64,
}

pub fn koebe_factors(r: f64) -> Result<KoebeFactors> {
    if !(r > 0.0 && r < 1.0) {
        return Err(OrbitError::KoebeRadius(r));
    }
    Ok(KoebeFactors {
        growth_max: r / ((1.0 - r) * (1.0 - r)),
        growth_min: r / ((1.0 + r) * (1.0 + r)),
        deriv_max: (1.0 + r) / (1.0 - r).powi(3),
        deriv_min: (1.0 - r) / (1.0 + r).powi(3),
        quarter: 0.25,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KoebeFactorsExact {
    pub growth_max: BigRational,
    pub growth_min: BigRational,
    pub deriv_max: BigRational,
    pub deriv_min: BigRational,
    pub quarter: BigRational,
}

pub fn koebe_factors_exact(r: &BigRational) -> Result<KoebeFactorsExact> {
    let one = BigRational::one();
    if !(r > &BigRational::zero() && r < &one) {
        return Err(OrbitError::KoebeRadius(num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)));
    }
    let m = &one - r;
    let p = &one + r;
    Ok(KoebeFactorsExact {
        growth_max: r / (&m * &m),
        growth_min: r / (&p * &p),
        deriv_max: &p / (&m * &m * &m),
        deriv_min: &m / (&p * &p * &p),
        quarter: BigRational::new(BigInt::from(1), BigInt::from(4)),
    })
}

/// (inner, outer): the pullback of a quarter disk contains a disk of radius
/// inner / (f^n)'(1/2) and lies in one of radius outer / (f^n)'(1/2).
/// The inverse branch lives on D(x_n, 10) and is evaluated at relative
/// radius 1/2.
pub fn pullback_constants() -> (BigRational, BigRational) {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let k = koebe_factors_exact(&half).expect("1/2 is inside");
    let inner = &k.quarter * &k.quarter * &k.deriv_min;
    let outer = BigRational::from_integer(BigInt::from(10)) * &k.growth_max;
    (inner, outer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_pi() -> ParameterSet {
        ParameterSet::new(4)
    }

    #[test]
    fn escape_condition_at_four_pi() {
        let r = check_escape_condition(&four_pi(), 400.0).unwrap();
        assert!(r.pass);
        assert!(r.minorant_cells >= 1, "the first cell needs the minorant");
        assert!(r.direct_cells > 0);
        assert!(matches!(check_escape_condition(&ParameterSet::new(1), 1.0), Err(OrbitError::EscapeCondition(_))));
        assert!(check_escape_condition(&four_pi(), 0.0).unwrap().pass);
    }

    #[test]
    fn first_orbit_points() {
        let o = iterate_orbit(&four_pi(), 2).unwrap();
        assert_eq!(o[0].x.to_interval().unwrap(), Interval::point(0.5));
        let x1 = o[1].x.to_interval().unwrap();
        let direct = (4.0 * std::f64::consts::PI * 0.5f64.sinh()).cosh();
        assert!(x1.contains(direct) || (x1.mid() - direct).abs() < 1e-9 * direct);
        assert!(o[2].x.level() >= 3);
        // ln 5000 floor at n = 2
        assert!(o[2].logderiv.compare(&TowerReal::from_real(5000f64.ln()).unwrap()).is_ge());
    }

    #[test]
    fn concrete_prefix_matches_machine_values() {
        let c = ConcreteOrbit::new(&four_pi());
        let lam = 4.0 * std::f64::consts::PI;
        let fp = (lam * 0.5f64.sinh()).sinh() * lam * 0.5f64.cosh();
        assert!((c.ln_fprime0.mid_f64() - fp.ln()).abs() < 1e-12);
        assert!(c.logderiv(2).unwrap().lo > c.ln_x2.lo);
        let w = c.ln_fprime1.width();
        assert!(w < 1e-100, "{w}");
    }

    #[test]
    fn koebe_values() {
        let k = koebe_factors(0.5).unwrap();
        assert_eq!(k.growth_max, 2.0);
        assert!((k.deriv_min - 4.0 / 27.0).abs() < 1e-16);
        assert_eq!(k.deriv_max, 12.0);
        assert!(koebe_factors(1.0).is_err());
        let (inner, outer) = pullback_constants();
        assert_eq!(inner, BigRational::new(1.into(), 108.into()));
        assert_eq!(outer, BigRational::from_integer(20.into()));
    }

    #[test]
    fn anchors_beyond_the_table() {
        let a = anchor_enclosure(600, 4);
        assert!(a.contains(600.0 * std::f64::consts::PI) || a.hi <= 600.0 * std::f64::consts::PI + 1e-12);
        assert!(a.width() < 1e-12);
    }
}
