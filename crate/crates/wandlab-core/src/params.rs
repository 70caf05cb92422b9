//! Parameter tuple driving the model map and its JSON form.

use crate::bigfloat::BigInterval;
use crate::interval::Interval;
use crate::tower::{CertifiedOrdering, TowerError, TowerReal};
use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("non-monotone degree override at {key}: {value} is below the default {default}")]
    NonMonotone { key: String, value: String, default: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("tower: {0}")]
    Tower(#[from] TowerError),
}

pub type Result<T> = std::result::Result<T, ParamError>;

/// Disk index: a literal integer, or the landing index p_n of the n-th
/// orbit point when that integer is too large to write down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexKey {
    Literal(u64),
    Landing(u32),
}

impl fmt::Display for IndexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexKey::Literal(m) => write!(f, "{m}"),
            IndexKey::Landing(n) => write!(f, "p{n}"),
        }
    }
}

impl FromStr for IndexKey {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || ParamError::Invalid(format!("bad index key {s:?}"));
        if let Some(n) = s.strip_prefix('p') {
            Ok(IndexKey::Landing(n.parse().map_err(|_| bad())?))
        } else {
            let m: u64 = s.parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(bad());
            }
            Ok(IndexKey::Literal(m))
        }
    }
}

/// Local degree of a disk. `Tower(t)` stands for an even integer at least
/// the upper end of `t`; only its logarithm is ever used.
#[derive(Clone, Debug, PartialEq)]
pub enum Degree {
    Exact(BigUint),
    Tower(TowerReal),
}

impl Degree {
    pub fn small(d: u64) -> Self {
        Degree::Exact(BigUint::from(d))
    }

    pub fn to_f64(&self) -> Option<f64> {
        match self {
            Degree::Exact(d) => {
                let v = num_traits::ToPrimitive::to_f64(d)?;
                v.is_finite().then_some(v)
            }
            Degree::Tower(_) => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Degree::Exact(d) => num_traits::ToPrimitive::to_u64(d),
            Degree::Tower(_) => None,
        }
    }

    /// Enclosure of the degree as a tower (for `Tower` degrees, a lower bound).
    pub fn as_tower(&self) -> TowerReal {
        match self {
            Degree::Exact(d) => {
                let bi = BigInterval::from_integer(64 + d.bits() as u32, &to_integer(d));
                let lo = bi.ln();
                let l = lo.to_interval();
                TowerReal::from_interval(Interval::new(l.lo.max(0.0), l.hi)).and_then(|t| t.exp()).unwrap()
            }
            Degree::Tower(t) => *t,
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            Degree::Exact(d) => !d.bit(0),
            Degree::Tower(_) => true,
        }
    }

    pub fn compare(&self, o: &Degree) -> CertifiedOrdering {
        match (self, o) {
            (Degree::Exact(a), Degree::Exact(b)) => match a.cmp(b) {
                std::cmp::Ordering::Less => CertifiedOrdering::Less,
                std::cmp::Ordering::Equal => CertifiedOrdering::Equal,
                std::cmp::Ordering::Greater => CertifiedOrdering::Greater,
            },
            _ => self.as_tower().compare(&o.as_tower()),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Exact(d) => write!(f, "{d}"),
            Degree::Tower(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for Degree {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains("E^") {
            Ok(Degree::Tower(s.parse()?))
        } else {
            s.trim()
                .parse::<BigUint>()
                .map(Degree::Exact)
                .map_err(|_| ParamError::Invalid(format!("bad degree {s:?}")))
        }
    }
}

pub fn to_integer(d: &BigUint) -> rug::Integer {
    rug::Integer::from_str_radix(&d.to_str_radix(16), 16).expect("hex digits")
}

pub fn from_integer(d: &rug::Integer) -> BigUint {
    BigUint::parse_bytes(d.to_string_radix(16).as_bytes(), 16).expect("nonnegative")
}

/// 2 * floor(exp(alpha * n)), certified.
pub fn default_degree(alpha: f64, n: u64) -> Degree {
    let mut prec = 96 + (alpha * n as f64 * std::f64::consts::LOG2_E) as u32;
    loop {
        let x = BigInterval::from_f64(prec, alpha).mul(&BigInterval::from_u64(prec, n)).exp();
        if let Some(fl) = x.floor_exact() {
            return Degree::Exact(from_integer(&(fl * 2u32)));
        }
        prec *= 2;
    }
}

/// Default degree at a landing index known only as a tower p:
/// 2 floor(e^{alpha p}) >= e^{alpha p} for alpha p >= 1.
pub fn default_degree_tower(alpha: f64, p: &TowerReal) -> Result<Degree> {
    let a = TowerReal::from_real(alpha)?;
    Ok(Degree::Tower(p.mul(&a)?.exp()?))
}

#[derive(Clone, Debug, PartialEq)]
pub enum WValue {
    Point(Complex64),
    /// Center of the wandering disk U_n; `approx` is its machine value.
    CenterOf { n: u32, approx: Complex64 },
}

impl WValue {
    pub fn value(&self) -> Complex64 {
        match self {
            WValue::Point(w) => *w,
            WValue::CenterOf { approx, .. } => *approx,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet {
    pub lambda_over_pi: u64,
    pub alpha: f64,
    pub d_overrides: BTreeMap<IndexKey, Degree>,
    pub w_overrides: BTreeMap<IndexKey, WValue>,
    pub neighborhood_radius: f64,
    pub correction_budget: f64,
}

pub const DEFAULT_NEIGHBORHOOD_RADIUS: f64 = 0.05;
pub const DEFAULT_CORRECTION_BUDGET: f64 = 1e-6;
pub const MAX_CORRECTION_BUDGET: f64 = 1e-3;

impl ParameterSet {
    pub fn new(lambda_over_pi: u64) -> Self {
        ParameterSet {
            lambda_over_pi,
            alpha: 1.0,
            d_overrides: BTreeMap::new(),
            w_overrides: BTreeMap::new(),
            neighborhood_radius: DEFAULT_NEIGHBORHOOD_RADIUS,
            correction_budget: DEFAULT_CORRECTION_BUDGET,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn lambda(&self) -> Interval {
        Interval::pi().mul(&Interval::point(self.lambda_over_pi as f64))
    }

    pub fn lambda_f64(&self) -> f64 {
        std::f64::consts::PI * self.lambda_over_pi as f64
    }

    /// Distance from the closed neighborhood of 1/2 to the unit circle.
    pub fn delta(&self) -> f64 {
        0.5 - self.neighborhood_radius
    }

    pub fn delta_interval(&self) -> Interval {
        Interval::point(0.5).sub(&Interval::point(self.neighborhood_radius))
    }

    pub fn d(&self, n: u64) -> Degree {
        self.d_overrides.get(&IndexKey::Literal(n)).cloned().unwrap_or_else(|| default_degree(self.alpha, n))
    }

    /// Degree as a machine real, for evaluation (saturates to +inf).
    pub fn d_f64(&self, n: u64) -> f64 {
        match self.d_overrides.get(&IndexKey::Literal(n)) {
            Some(d) => d.to_f64().unwrap_or(f64::INFINITY),
            None => {
                let e = (self.alpha * n as f64).exp();
                if e < 1e15 {
                    2.0 * e.floor()
                } else {
                    2.0 * e
                }
            }
        }
    }

    pub fn w(&self, n: u64) -> Complex64 {
        self.w_overrides.get(&IndexKey::Literal(n)).map(|w| w.value()).unwrap_or(Complex64::new(0.5, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        let inv = |m: String| Err(ParamError::Invalid(m));
        if self.lambda_over_pi == 0 {
            return inv("lambda/pi must be a positive integer".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return inv(format!("alpha must be positive, got {}", self.alpha));
        }
        let r = self.neighborhood_radius;
        if !(r > 0.0 && 0.5 + r < 1.0) {
            return inv(format!("neighborhood radius {r} must satisfy 0 < r < 1/2"));
        }
        let b = self.correction_budget;
        if !(b >= 0.0 && b < MAX_CORRECTION_BUDGET) {
            return inv(format!("correction budget {b} must lie in [0, 1e-3)"));
        }
        for (k, d) in &self.d_overrides {
            if !d.is_even() {
                return inv(format!("degree at {k} must be even"));
            }
            if let (IndexKey::Literal(n), Degree::Exact(v)) = (k, d) {
                let Degree::Exact(def) = default_degree(self.alpha, *n) else { unreachable!() };
                if *v < def {
                    return Err(ParamError::NonMonotone { key: k.to_string(), value: v.to_string(), default: def.to_string() });
                }
            }
        }
        for (k, w) in &self.w_overrides {
            let v = w.value();
            if (v - Complex64::new(0.5, 0.0)).norm() > r {
                return inv(format!("w at {k} = {v} lies outside the neighborhood of 1/2"));
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        let d: serde_json::Map<String, Value> =
            self.d_overrides.iter().map(|(k, d)| (k.to_string(), Value::String(d.to_string()))).collect();
        let w: serde_json::Map<String, Value> = self
            .w_overrides
            .iter()
            .map(|(k, w)| {
                let v = match w {
                    WValue::Point(p) => serde_json::json!([p.re, p.im]),
                    WValue::CenterOf { n, approx } => serde_json::json!({"center_of": n, "approx": [approx.re, approx.im]}),
                };
                (k.to_string(), v)
            })
            .collect();
        serde_json::json!({
            "lambda_over_pi": self.lambda_over_pi,
            "d_rules": {"default_exponential": {"alpha": self.alpha}, "overrides": d},
            "w_overrides": w,
            "neighborhood_radius": self.neighborhood_radius,
            "correction_budget": self.correction_budget,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawParams = serde_json::from_str(s)?;
        let lop = raw.lambda_over_pi;
        if !(lop.is_finite() && lop >= 1.0 && lop.fract() == 0.0 && lop < 1e15) {
            return Err(ParamError::Invalid(format!("lambda/pi = {lop} is not a positive integer")));
        }
        let mut p = ParameterSet::new(lop as u64);
        if let Some(rules) = raw.d_rules {
            if let Some(de) = rules.default_exponential {
                p.alpha = de.alpha;
            }
            for (k, v) in rules.overrides {
                let key: IndexKey = k.parse()?;
                let d = match v {
                    Value::Number(n) => {
                        let u = n.as_u64().ok_or_else(|| ParamError::Invalid(format!("degree at {k} must be a positive integer")))?;
                        Degree::small(u)
                    }
                    Value::String(s) => s.parse()?,
                    _ => return Err(ParamError::Invalid(format!("bad degree at {k}"))),
                };
                p.d_overrides.insert(key, d);
            }
        }
        for (k, v) in raw.w_overrides {
            let key: IndexKey = k.parse()?;
            p.w_overrides.insert(key, parse_w(&k, &v)?);
        }
        if let Some(r) = raw.neighborhood_radius {
            p.neighborhood_radius = r;
        }
        if let Some(b) = raw.correction_budget {
            p.correction_budget = b;
        }
        p.validate()?;
        Ok(p)
    }
}

fn parse_w(k: &str, v: &Value) -> Result<WValue> {
    let bad = || ParamError::Invalid(format!("bad w value at {k}: {v}"));
    let pair = |a: &Value| -> Option<Complex64> {
        let arr = a.as_array()?;
        if arr.len() != 2 {
            return None;
        }
        Some(Complex64::new(arr[0].as_f64()?, arr[1].as_f64()?))
    };
    match v {
        Value::Array(_) => Ok(WValue::Point(pair(v).ok_or_else(bad)?)),
        Value::String(s) => {
            let n = s.strip_prefix("center(U").and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
            let n: u32 = n.parse().map_err(|_| bad())?;
            Ok(WValue::CenterOf { n, approx: Complex64::new(0.5, 0.0) })
        }
        Value::Object(o) => {
            let n = o.get("center_of").and_then(|x| x.as_u64()).ok_or_else(bad)? as u32;
            let approx = o.get("approx").map(|a| pair(a).ok_or_else(bad)).transpose()?.unwrap_or(Complex64::new(0.5, 0.0));
            Ok(WValue::CenterOf { n, approx })
        }
        _ => Err(bad()),
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    lambda_over_pi: f64,
    #[serde(default)]
    d_rules: Option<RawDRules>,
    #[serde(default)]
    w_overrides: BTreeMap<String, Value>,
    #[serde(default)]
    neighborhood_radius: Option<f64>,
    #[serde(default)]
    correction_budget: Option<f64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawDRules {
    #[serde(default)]
    default_exponential: Option<RawAlpha>,
    #[serde(default)]
    overrides: BTreeMap<String, Value>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawAlpha {
    alpha: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        // 2 floor(e) = 4, 2 floor(e^2) = 14, 2 floor(e^3) = 40
        assert_eq!(default_degree(1.0, 1), Degree::small(4));
        assert_eq!(default_degree(1.0, 2), Degree::small(14));
        assert_eq!(default_degree(1.0, 3), Degree::small(40));
        assert_eq!(default_degree(2.0, 1), Degree::small(14));
        let Degree::Exact(d) = default_degree(1.0, 111) else { panic!() };
        // e^111 = 1.609e48
        assert_eq!(d.to_string().len(), 49);
        assert!(d.to_string().starts_with("3218"));
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"lambda_over_pi": 4, "d_rules": {"default_exponential": {"alpha": 1}, "overrides": {"3": 100, "p2": "+1 * E^7(0.5..0.6)"}},
                    "w_overrides": {"2": [0.51, 0.01], "111": "center(U2)"}, "neighborhood_radius": 0.05, "correction_budget": 1e-6}"#;
        let p = ParameterSet::from_json(s).unwrap();
        assert_eq!(p.d(3), Degree::small(100));
        assert_eq!(p.w(2), Complex64::new(0.51, 0.01));
        assert!(matches!(p.w_overrides[&IndexKey::Literal(111)], WValue::CenterOf { n: 2, .. }));
        let back = ParameterSet::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!((p.delta() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid() {
        assert!(ParameterSet::from_json(r#"{"lambda_over_pi": 0.5}"#).is_err());
        assert!(ParameterSet::from_json(r#"{"lambda_over_pi": 4, "correction_budget": 0.01}"#).is_err());
        assert!(ParameterSet::from_json(r#"{"lambda_over_pi": 4, "w_overrides": {"1": [0.9, 0]}}"#).is_err());
        assert!(ParameterSet::from_json(r#"{"lambda_over_pi": 4, "d_rules": {"overrides": {"1": 3}}}"#).is_err());
        let e = ParameterSet::from_json(r#"{"lambda_over_pi": 4, "d_rules": {"overrides": {"3": 20}}}"#).unwrap_err();
        assert!(matches!(e, ParamError::NonMonotone { .. }), "{e}");
        assert!(ParameterSet::from_json(r#"{"lambda_over_pi": 4, "bogus": 1}"#).is_err());
    }

    #[test]
    fn degree_tower_comparisons() {
        let small = Degree::small(1 << 40);
        let t = Degree::Tower(TowerReal::from_parts(1, 5, Interval::point(0.5)).unwrap());
        assert_eq!(small.compare(&t), CertifiedOrdering::Less);
        assert_eq!(Degree::small(8).compare(&Degree::small(8)), CertifiedOrdering::Equal);
    }
}
