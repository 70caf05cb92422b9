//! Pullback disks U_n, the landing bound through a disk map, and the
//! parameter adjustment that nests f^{n+1}(U_n) inside U_{n+1}.

use super::{iterate_orbit, pullback_constants, select_p, ConcreteOrbit, LandingIndex, OrbitError, OrbitRecord, Result, CONCRETE_PREC};
use crate::bigfloat::BigInterval;
use crate::interval::{CInterval, Interval};
use crate::model::SEAM_INNER;
use crate::orbit::anchor_enclosure;
use crate::params::{default_degree_tower, from_integer, to_integer, Degree, IndexKey, ParameterSet, WValue};
use crate::tower::{CertifiedOrdering, TowerReal};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rug::float::Round;
use rug::Integer;
use serde::{Deserialize, Serialize};

/// Arcs covering the boundary of U_1 in the interval image test.
pub const BOUNDARY_BOXES: usize = 512;
const PULLBACK_INNER: f64 = 0.009;
const PULLBACK_OUTER: f64 = 20.0;
/// Radius of the disk around x_k on which the inverse branch is univalent.
const BRANCH_RADIUS: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Concrete,
    Symbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rigor {
    CertifiedInterval,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    OrbitPoint(usize),
    DiskIndex(String),
    BasePoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evidence {
    pub claim: String,
    pub verdict: CertifiedOrdering,
}

impl Evidence {
    fn new(claim: impl Into<String>, verdict: CertifiedOrdering) -> Self {
        Evidence { claim: claim.into(), verdict }
    }

    fn holds(b: bool, claim: impl Into<String>) -> Self {
        Evidence::new(claim, if b { CertifiedOrdering::Greater } else { CertifiedOrdering::Indeterminate })
    }

    pub fn ok(&self) -> bool {
        self.verdict == CertifiedOrdering::Greater
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KoebeStep {
    pub role: String,
    pub exact: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PullbackCertificate {
    pub n: usize,
    pub landing: LandingIndex,
    pub logderiv: TowerReal,
    /// Center of U_n minus 1/2, when located.
    pub center_offset: Option<CInterval>,
    pub radius_inner: Option<f64>,
    pub radius_outer: Option<f64>,
    pub ln_radius_inner: TowerReal,
    pub ln_radius_outer: TowerReal,
    pub koebe_chain: Vec<KoebeStep>,
    pub regime: Regime,
    /// Upper bound of |f^n - z_{p_n}| on U_n.
    pub landing_radius: f64,
    pub evidence: Vec<Evidence>,
}

impl PullbackCertificate {
    pub fn passed(&self) -> bool {
        self.evidence.iter().all(Evidence::ok)
    }

    pub fn key(&self) -> IndexKey {
        match self.landing.index {
            Some(p) => IndexKey::Literal(p),
            None => IndexKey::Landing(self.n as u32),
        }
    }
}

fn strip_image(z: &CInterval, lam: &Interval) -> CInterval {
    z.sinh().scale(lam).cosh()
}

fn strip_derivative(z: &CInterval, lam: &Interval) -> CInterval {
    z.sinh().scale(lam).sinh().mul(&z.cosh()).scale(lam)
}

fn strip_point(z: Complex64, lam: f64) -> (Complex64, Complex64) {
    let s = z.sinh() * lam;
    (s.cosh(), s.sinh() * z.cosh() * lam)
}

fn strictly_inside(inner: &CInterval, outer: &CInterval) -> bool {
    inner.re.lo > outer.re.lo && inner.re.hi < outer.re.hi && inner.im.lo > outer.im.lo && inner.im.hi < outer.im.hi
}

fn intersect(a: &CInterval, b: &CInterval) -> Option<CInterval> {
    Some(CInterval::new(a.re.intersect(&b.re)?, a.im.intersect(&b.im)?))
}

/// Box around the unique root of f(c) = target near `guess`, by the
/// Krawczyk test.
pub fn locate_preimage(target: &CInterval, guess: Complex64, lam: &Interval) -> Option<CInterval> {
    let lam_f = lam.mid();
    let zt = target.mid();
    let mut c = guess;
    for _ in 0..8 {
        let (f, fp) = strip_point(c, lam_f);
        c -= (f - zt) / fp;
    }
    let (_, fp) = strip_point(c, lam_f);
    let y = fp.inv();
    let yc = CInterval::point(y.re, y.im);
    let cc = CInterval::point(c.re, c.im);
    let one = CInterval::point(1.0, 0.0);
    for rad in [1e-14, 1e-13, 1e-12, 1e-11, 1e-10] {
        let r = Interval::new(-rad, rad);
        let x = cc.add(&CInterval::new(r, r));
        let resid = strip_image(&cc, lam).sub(target);
        let k = cc.sub(&yc.mul(&resid)).add(&one.sub(&yc.mul(&strip_derivative(&x, lam))).mul(&x.sub(&cc)));
        if strictly_inside(&k, &x) {
            return intersect(&k, &x);
        }
    }
    None
}

fn koebe_chain() -> Vec<KoebeStep> {
    let (inner, outer) = pullback_constants();
    let step = |role: &str, exact: String, value: f64| KoebeStep { role: role.into(), exact, value };
    vec![
        step("landing disk radius", "1/4".into(), 0.25),
        step("quarter theorem", "1/4".into(), 0.25),
        step("derivative distortion at r = 1/2", "4/27".into(), 4.0 / 27.0),
        step("inner constant", inner.to_string(), inner.to_f64().unwrap()),
        step("outer: 10 x growth at r = 1/2", outer.to_string(), outer.to_f64().unwrap()),
    ]
}

fn logderiv_big(n: usize, concrete: &ConcreteOrbit) -> Option<BigInterval> {
    concrete.logderiv(n)
}

fn big_const(num: u64, den: u64) -> BigInterval {
    BigInterval::from_u64(CONCRETE_PREC, num).div_pos(&BigInterval::from_u64(CONCRETE_PREC, den))
}

fn exp_hi(x: f64) -> f64 {
    Interval::point(x).exp().hi
}

/// Certificate for U_n with radii 0.009 and 20 over (f^n)'(1/2).
#[allow(non_snake_case)]
pub fn build_U(n: usize, orbit: &[OrbitRecord], params: &ParameterSet) -> Result<PullbackCertificate> {
    if n == 0 {
        return Err(OrbitError::Pullback { n, msg: "indices start at 1".into() });
    }
    let rec = orbit.get(n).ok_or(OrbitError::Short(n))?;
    let landing = select_p(n, orbit, params)?;
    let lam = params.lambda();
    let mut evidence = Vec::new();

    let eleven = TowerReal::from_real(1.0 + BRANCH_RADIUS)?;
    let preimage_floor = TowerReal::from_interval(Interval::point(40.0).div(&Interval::pi()).ln())?;
    for k in 1..=n {
        evidence.push(Evidence::new(format!("D(x_{k}, 10) misses the closed unit disk"), orbit[k].x.compare(&eleven)));
        evidence.push(Evidence::new(
            format!("20 / f'(x_{}) < pi/2: the preimage stays in the half-strip", k - 1),
            orbit[k - 1].ln_fprime.compare(&preimage_floor),
        ));
    }
    let gap = Interval::point(landing.gap);
    let reach = gap.sqr().add(&Interval::pi().sqr()).sqrt().add(&Interval::point(0.25));
    evidence.push(Evidence::holds(reach.hi < 5.0, format!("landing quarter disk lies in D(x_{n}, 5): {:.4} < 5", reach.hi)));
    let (inner, _) = pullback_constants();
    evidence.push(Evidence::holds(inner.to_f64().unwrap() > PULLBACK_INNER * (1.0 + 1e-12), "0.009 < 1/108"));

    let concrete = ConcreteOrbit::new(params);
    let ln_inner_c = Interval::point(9.0).div(&Interval::point(1000.0)).ln();
    let ln_outer_c = Interval::point(PULLBACK_OUTER).ln();
    let logderiv = rec.logderiv;
    // ln r = c - L as negative towers
    let ln_radius_inner = logderiv.add_interval(&ln_inner_c.neg())?.neg();
    let ln_radius_outer = logderiv.add_interval(&ln_outer_c.neg())?.neg();
    let big = logderiv_big(n, &concrete).map(|l| l.to_interval());
    let radius_inner = big.map(|l| Interval::point(PULLBACK_INNER).mul(&l.neg().exp()).hi);
    let radius_outer = big.map(|l| Interval::point(PULLBACK_OUTER).mul(&l.neg().exp()).hi);
    let nbhd = params.neighborhood_radius;
    let outer_in_nbhd = match radius_outer {
        Some(r) => r < nbhd,
        None => ln_radius_outer.compare(&TowerReal::from_real(nbhd)?.ln_signed()?) == CertifiedOrdering::Less,
    };
    evidence.push(Evidence::holds(outer_in_nbhd, "D(1/2, radius_outer) lies in the neighborhood of 1/2"));

    let mut center_offset = None;
    let mut landing_radius = 0.25;
    let mut regime = Regime::Symbolic;
    if let (Some(p), Some(r_in), Some(r_out), 1) = (landing.index, radius_inner, radius_outer, n) {
        regime = Regime::Concrete;
        let zp = CInterval::new(anchor_enclosure(p, params.lambda_over_pi), Interval::pi());
        let w = zp.mid().acosh();
        let guess = (w / lam.mid()).asinh();
        let c = locate_preimage(&zp, guess, &lam)
            .ok_or_else(|| OrbitError::Pullback { n, msg: "Krawczyk test did not contract".into() })?;
        let off = c.sub(&CInterval::point(0.5, 0.0));
        evidence.push(Evidence::holds(
            off.abs_hi() + r_in <= r_out,
            "D(center, radius_inner) lies in D(1/2, radius_outer)",
        ));
        let big_r = boundary_image_radius(&c, r_in, &zp, &lam);
        let eps = params.correction_budget;
        evidence.push(Evidence::holds(
            big_r + eps < 0.25,
            format!("f(boundary of U_1) lies in D(z_{p}, {big_r:.6e}), inside the quarter disk"),
        ));
        center_offset = Some(off);
        landing_radius = big_r;
    }
    Ok(PullbackCertificate {
        n,
        landing,
        logderiv,
        center_offset,
        radius_inner,
        radius_outer,
        ln_radius_inner,
        ln_radius_outer,
        koebe_chain: koebe_chain(),
        regime,
        landing_radius,
        evidence,
    })
}

/// Upper bound of |f(z) - z_p| over the circle |z - c| = r, from interval
/// boxes covering BOUNDARY_BOXES arcs. By the maximum principle it bounds
/// f on the whole disk.
pub fn boundary_image_radius(center: &CInterval, r: f64, zp: &CInterval, lam: &Interval) -> f64 {
    let m = BOUNDARY_BOXES as f64;
    let two_pi = Interval::pi().scale(2.0);
    let rr = Interval::point(r);
    (0..BOUNDARY_BOXES)
        .map(|j| {
            let a = two_pi.mul(&Interval::point(j as f64)).div(&Interval::point(m));
            let b = two_pi.mul(&Interval::point((j + 1) as f64)).div(&Interval::point(m));
            let th = Interval::new(a.lo, b.hi);
            let arc = CInterval::new(th.cos().mul(&rr), th.sin().mul(&rr));
            strip_image(&center.add(&arc), lam).sub(zp).abs_hi()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskEnclosure {
    pub anchor: Anchor,
    pub offset_center: Complex64,
    pub radius: Option<f64>,
    pub ln_radius: TowerReal,
    pub rigor: Rigor,
}

/// ln(delta) + d ln(s), upper end, for an exact or tower degree.
enum LogRadius {
    Big(BigInterval),
    Tower(TowerReal),
}

impl LogRadius {
    fn tower(&self) -> Result<TowerReal> {
        Ok(match self {
            LogRadius::Big(b) => TowerReal::from_interval(b.to_interval())?,
            LogRadius::Tower(t) => *t,
        })
    }
}

/// a + b for machine numbers, exact at `prec` bits.
fn exact_sum(prec: u32, a: f64, b: f64) -> BigInterval {
    BigInterval::from_f64(prec, a).add(&BigInterval::from_f64(prec, b))
}

fn ln_delta(prec: u32, params: &ParameterSet) -> BigInterval {
    exact_sum(prec, 0.5, -params.neighborhood_radius).ln()
}

/// ln delta + d ln(r + eps) for the landing radius r.
fn landing_log(d: &Degree, r: f64, params: &ParameterSet) -> Result<LogRadius> {
    let eps = params.correction_budget;
    match d {
        Degree::Exact(v) => {
            let prec = CONCRETE_PREC.max(v.bits() as u32 + 128);
            let dd = BigInterval::from_integer(prec, &to_integer(v));
            let ls = exact_sum(prec, r, eps).ln();
            Ok(LogRadius::Big(dd.mul(&ls).add(&ln_delta(prec, params))))
        }
        Degree::Tower(t) => {
            let neg_ls = Interval::point(r).add(&Interval::point(eps)).ln().neg();
            let a = t.mul(&TowerReal::from_interval(neg_ls)?)?;
            Ok(LogRadius::Tower(a.add_interval(&params.delta_interval().ln().neg())?.neg()))
        }
    }
}

fn degree_at(params: &ParameterSet, key: IndexKey, cert: &PullbackCertificate) -> Result<Degree> {
    Ok(match key {
        IndexKey::Literal(p) => params.d(p),
        IndexKey::Landing(_) => match params.d_overrides.get(&key) {
            Some(d) => d.clone(),
            None => default_degree_tower(params.alpha, &cert.landing.proxy)?,
        },
    })
}

fn w_at(params: &ParameterSet, key: IndexKey) -> Complex64 {
    params.w_overrides.get(&key).map(|w| w.value()).unwrap_or(Complex64::new(0.5, 0.0))
}

/// f^{n+1}(U_n) lies in D(w_{p_n}, delta (R + eps)^{d_{p_n}}), R the landing
/// radius of the certificate (at most 1/4).
pub fn schwarz_landing(n: usize, cert: &PullbackCertificate, params: &ParameterSet) -> Result<DiskEnclosure> {
    if cert.n != n || !cert.passed() {
        return Err(OrbitError::Pullback { n, msg: "certificate missing or failed".into() });
    }
    let key = cert.key();
    let d = degree_at(params, key, cert)?;
    let ln = landing_log(&d, cert.landing_radius, params)?;
    let radius = match &ln {
        LogRadius::Big(b) => {
            let hi = b.hi.to_f64_round(Round::Up);
            (hi > -740.0).then(|| exp_hi(hi))
        }
        LogRadius::Tower(_) => None,
    };
    Ok(DiskEnclosure {
        anchor: Anchor::BasePoint,
        offset_center: w_at(params, key) - 0.5,
        radius,
        ln_radius: ln.tower()?,
        rigor: Rigor::CertifiedInterval,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjustStep {
    pub n: usize,
    pub key: String,
    pub d_before: String,
    pub d_after: String,
    /// d_after - 2 certainly fails the landing inequality.
    pub d_smallest: bool,
    pub w_after: String,
    /// |w_after - w_before| / delta, upper bound.
    pub t: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NestingCertificate {
    pub n: usize,
    /// Index of the disk receiving f^{n+1}(U_n).
    pub target: usize,
    pub regime: Regime,
    /// Upper bound of ln of the radius enclosing f^{n+1}(U_n).
    pub ln_r_land: TowerReal,
    /// Lower bound of ln radius_inner(target).
    pub ln_r_target: TowerReal,
    /// ln r_target - ln r_land, when representable.
    pub margin: Option<f64>,
    /// Ordering of ln r_target against ln r_land.
    pub verdict: CertifiedOrdering,
    pub chain: Vec<String>,
}

impl NestingCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == CertifiedOrdering::Greater && self.margin.map_or(true, |m| m > 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct Adjustment {
    pub params: ParameterSet,
    pub certificates: Vec<PullbackCertificate>,
    pub steps: Vec<AdjustStep>,
    pub nesting: Vec<NestingCertificate>,
    pub budget_used: f64,
}

impl Adjustment {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params.to_json_value(),
            "certificates": self.certificates,
            "steps": self.steps,
            "nesting": self.nesting,
            "budget_used": self.budget_used,
            "budget": self.params.correction_budget,
            "budget_note": "corrections are measured shifts of the affine branch of rho; the bound on |phi - id| is a model assumption",
        })
    }
}

fn ordering_of(a: &BigInterval, b: &BigInterval) -> CertifiedOrdering {
    if a.certainly_gt(b) {
        CertifiedOrdering::Greater
    } else if a.certainly_lt(b) {
        CertifiedOrdering::Less
    } else {
        CertifiedOrdering::Indeterminate
    }
}

/// Enlarge d_{p_n} and re-target w_{p_n} at the center of U_{n+1} for
/// n = 1..=n_max, then certify f^{n+1}(U_n) inside U_{n+1}.
pub fn adjust_parameters(params: &ParameterSet, n_max: usize) -> Result<Adjustment> {
    adjust_with_targets(params, n_max, &|n| n + 1)
}

/// Same as [`adjust_parameters`] with f^{n+1}(U_n) sent into U_{target(n)},
/// 1 <= target(n) <= n_max + 1.
pub fn adjust_with_targets(params: &ParameterSet, n_max: usize, target: &dyn Fn(usize) -> usize) -> Result<Adjustment> {
    params.validate()?;
    let mut out = params.clone();
    if n_max == 0 {
        return Ok(Adjustment { params: out, certificates: vec![], steps: vec![], nesting: vec![], budget_used: 0.0 });
    }
    let orbit = iterate_orbit(params, n_max + 1)?;
    let concrete = ConcreteOrbit::new(params);
    let certs = (1..=n_max + 1).map(|n| build_U(n, &orbit, params)).collect::<Result<Vec<_>>>()?;
    if let Some(c) = certs.iter().find(|c| !c.passed()) {
        let bad: Vec<_> = c.evidence.iter().filter(|e| !e.ok()).map(|e| e.claim.clone()).collect();
        return Err(OrbitError::Pullback { n: c.n, msg: bad.join("; ") });
    }
    let delta = params.delta_interval();
    let eps = params.correction_budget;
    let quarter = Interval::point(0.25).add(&Interval::point(eps)).hi;
    let mut steps = Vec::new();
    let mut nesting = Vec::new();
    let mut used = 0.0;
    for n in 1..=n_max {
        let m = target(n);
        if m == 0 || m > n_max + 1 {
            return Err(OrbitError::Pullback { n, msg: format!("target U_{m} outside 1..={}", n_max + 1) });
        }
        let (cur, next) = (&certs[n - 1], &certs[m - 1]);
        let key = cur.key();
        let d_before = degree_at(&out, key, cur)?;
        let target_big = logderiv_big(m, &concrete).map(|l| big_const(9, 1000).ln().sub(&l));
        let (d_need, smallest) = match (&key, &target_big) {
            (IndexKey::Literal(_), Some(t)) => {
                // smallest even d with ln delta + d ln(1/4 + eps) < t
                let ld = ln_delta(CONCRETE_PREC, params);
                let neg_l = exact_sum(CONCRETE_PREC, 0.25, eps).ln().neg();
                let q = ld.sub(t).div_pos(&neg_l);
                let half_floor = |x: &rug::Float| -> Integer { (x.clone() / 2u32).to_integer_round(Round::Down).unwrap().0 };
                let d = (half_floor(&q.hi) + 1u32) * 2u32;
                let below = Integer::from(&d - 2u32);
                let smallest = rug::Float::with_val(CONCRETE_PREC, &below) <= q.lo;
                (Degree::Exact(from_integer(&d)), smallest)
            }
            _ => {
                // tower regime: only a dominating degree can be certified
                let b = next.ln_radius_inner.neg();
                let q = b.add_interval(&delta.ln())?.mul(&TowerReal::from_interval(Interval::point(1.0).div(&Interval::point(quarter).ln().neg()))?)?;
                (Degree::Tower(q.exp()?), false)
            }
        };
        let (d_after, smallest) = match d_before.compare(&d_need) {
            CertifiedOrdering::Greater | CertifiedOrdering::Equal => (d_before.clone(), false),
            _ => (d_need, smallest),
        };
        if d_after != d_before {
            out.d_overrides.insert(key, d_after.clone());
        }
        let w_before = w_at(&out, key);
        let approx = Complex64::new(0.5, 0.0) + next.center_offset.map_or(Complex64::new(0.0, 0.0), |c| c.mid());
        out.w_overrides.insert(key, WValue::CenterOf { n: m as u32, approx });
        let r_out_next = match next.radius_outer {
            Some(r) => r,
            None => exp_hi(next.ln_radius_outer.to_interval().map_or(-1e300, |i| i.hi).max(-1e300)),
        };
        let t = Interval::point((w_before - 0.5).norm()).add(&Interval::point(r_out_next)).div(&delta).hi;
        used = Interval::point(used).add(&Interval::point(t)).hi;
        if used > params.correction_budget {
            return Err(OrbitError::Budget { n, used, budget: params.correction_budget });
        }
        steps.push(AdjustStep {
            n,
            key: key.to_string(),
            d_before: d_before.to_string(),
            d_after: d_after.to_string(),
            d_smallest: smallest,
            w_after: format!("center(U{m})"),
            t,
        });
        nesting.push(nest(n, m, cur, next, &out, target_big.as_ref())?);
    }
    Ok(Adjustment { params: out, certificates: certs, steps, nesting, budget_used: used })
}

fn nest(
    n: usize,
    m: usize,
    cur: &PullbackCertificate,
    next: &PullbackCertificate,
    params: &ParameterSet,
    target_big: Option<&BigInterval>,
) -> Result<NestingCertificate> {
    let key = cur.key();
    let d = degree_at(params, key, cur)?;
    let s = Interval::point(cur.landing_radius).add(&Interval::point(params.correction_budget)).hi;
    let land = landing_log(&d, cur.landing_radius, params)?;
    let mut chain = Vec::new();
    match cur.regime {
        Regime::Concrete => chain.push(format!(
            "f^{n}(boundary of U_{n}) lies in D(z_p, {:.6e}) by {BOUNDARY_BOXES} interval boxes",
            cur.landing_radius
        )),
        Regime::Symbolic => chain.push(format!("f^{n}(U_{n}) lies in the landing quarter disk by the Koebe chain")),
    }
    chain.push(format!("power map: |(z - z_p)^d| <= (R + eps)^d with R + eps = {s:.6e}, d = {d}"));
    chain.push(format!("rho is affine on |zeta| <= {SEAM_INNER}: image in D(w_p, delta (R + eps)^d)"));
    chain.push(format!("w_p is the center of U_{m}"));
    let (ln_r_land, ln_r_target, margin, verdict) = match (&land, target_big) {
        (LogRadius::Big(l), Some(t)) => {
            let affine = l.hi < BigInterval::from_f64(CONCRETE_PREC, SEAM_INNER).ln().sub(&ln_delta(CONCRETE_PREC, params)).lo;
            let v = if affine { ordering_of(t, l) } else { CertifiedOrdering::Indeterminate };
            let m = t.lo.clone() - &l.hi;
            (land.tower()?, TowerReal::from_interval(t.to_interval())?, Some(m.to_f64_round(Round::Down)), v)
        }
        _ => {
            let lt = land.tower()?;
            let target = next.ln_radius_inner;
            (lt, target, None, target.compare(&lt))
        }
    };
    chain.push(format!("delta (R + eps)^d < radius_inner(U_{m}): {verdict:?}"));
    Ok(NestingCertificate { n, target: m, regime: cur.regime, ln_r_land, ln_r_target, margin, verdict, chain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DEFAULT_CORRECTION_BUDGET;

    fn setup() -> (ParameterSet, Vec<OrbitRecord>) {
        let p = ParameterSet::new(4);
        let o = iterate_orbit(&p, 3).unwrap();
        (p, o)
    }

    #[test]
    fn first_pullback_is_concrete() {
        let (p, o) = setup();
        let c = build_U(1, &o, &p).unwrap();
        assert!(c.passed(), "{:?}", c.evidence);
        assert_eq!(c.regime, Regime::Concrete);
        assert_eq!(c.landing.index, Some(111));
        let (ri, ro) = (c.radius_inner.unwrap(), c.radius_outer.unwrap());
        assert!((ri / 1.820e-6 - 1.0).abs() < 1e-3, "{ri}");
        assert!((ro / 4.045e-3 - 1.0).abs() < 1e-3, "{ro}");
        assert!(ri / ro >= 0.009 / 20.0 * (1.0 - 1e-12));
        assert!(c.landing_radius < 0.25);
    }

    #[test]
    fn second_pullback_is_symbolic() {
        let (p, o) = setup();
        let c = build_U(2, &o, &p).unwrap();
        assert!(c.passed());
        assert_eq!(c.regime, Regime::Symbolic);
        assert!(c.landing.index.is_none());
        assert_eq!(c.key(), IndexKey::Landing(2));
        assert!(c.ln_radius_inner.sign() < 0);
    }

    #[test]
    fn landing_radius_for_small_degree() {
        let (mut p, o) = setup();
        p.correction_budget = 0.0;
        let mut c = build_U(1, &o, &p).unwrap();
        c.landing_radius = 0.25;
        p.d_overrides.insert(IndexKey::Literal(111), Degree::small(4));
        // bypass validation: the probe only evaluates the bound
        let e = schwarz_landing(1, &c, &p).unwrap();
        let r = e.radius.unwrap();
        assert!((r / (0.45 / 256.0) - 1.0).abs() < 1e-12, "{r}");
        p.d_overrides.insert(IndexKey::Literal(111), Degree::small(8));
        let e2 = schwarz_landing(1, &c, &p).unwrap();
        assert!(e2.radius.unwrap() < r);
    }

    #[test]
    fn trivial_adjustment_is_identity() {
        let p = ParameterSet::new(4);
        let a = adjust_parameters(&p, 0).unwrap();
        assert_eq!(a.params, p);
        assert!(a.nesting.is_empty());
    }

    #[test]
    fn adjustment_nests_the_first_two_disks() {
        let p = ParameterSet::new(4);
        assert_eq!(p.correction_budget, DEFAULT_CORRECTION_BUDGET);
        let a = adjust_parameters(&p, 2).unwrap();
        assert_eq!(a.nesting.len(), 2);
        for c in &a.nesting {
            assert!(c.passed(), "{c:?}");
        }
        assert!(a.steps[0].d_smallest);
        assert!(a.budget_used <= p.correction_budget);
        assert!(a.params.validate().is_ok());
        assert!(matches!(a.params.d_overrides[&IndexKey::Literal(111)], Degree::Exact(_)));
        assert!(matches!(a.params.d_overrides[&IndexKey::Landing(2)], Degree::Tower(_)));
    }
}
