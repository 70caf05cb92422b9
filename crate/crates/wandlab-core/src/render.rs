//! Classification rasters of the model dynamics: PPM image, per-pixel CSV
//! and a JSON legend.

use crate::graph::{EdgeKind, Graph};
use crate::model::{DomainTag, ModelError, ModelMap};
use crate::orbit::{build_U, iterate_orbit};
use crate::params::ParameterSet;
use crate::tower::TowerReal;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid job: {0}")]
    Job(String),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, RenderError>;

pub const DEFAULT_ESCAPE_LEVEL: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum PointClass {
    /// Tower level of |Re| first exceeded the threshold at `step`.
    Escaping { level: u32, step: u32 },
    EnteredDisk { n: u64, step: u32 },
    InUChain { n: u64, step: u32 },
    OutsideModel { step: u32 },
    Undetermined,
}

impl PointClass {
    pub fn code(&self) -> &'static str {
        match self {
            PointClass::Escaping { .. } => "escaping",
            PointClass::EnteredDisk { .. } => "entered-disk",
            PointClass::InUChain { .. } => "in-U-chain",
            PointClass::OutsideModel { .. } => "outside-model",
            PointClass::Undetermined => "undetermined",
        }
    }

    pub fn steps(&self) -> u32 {
        match *self {
            PointClass::Escaping { step, .. }
            | PointClass::EnteredDisk { step, .. }
            | PointClass::InUChain { step, .. }
            | PointClass::OutsideModel { step } => step,
            PointClass::Undetermined => 0,
        }
    }

    fn detail(&self) -> String {
        match self {
            PointClass::Escaping { level, .. } => format!("level={level}"),
            PointClass::EnteredDisk { n, .. } => format!("disk={n}"),
            PointClass::InUChain { n, .. } => format!("U={n}"),
            _ => String::new(),
        }
    }
}

pub const CLASS_CODES: [&str; 5] = ["escaping", "entered-disk", "in-U-chain", "outside-model", "undetermined"];

/// Certified disks U_n with machine-representable center and inner radius.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct UChain {
    pub disks: Vec<(u64, Complex64, f64)>,
}

impl UChain {
    /// Only U_1 has representable radius; the chain is empty when the
    /// orbit certifier rejects the parameters.
    pub fn from_params(params: &ParameterSet) -> Self {
        let disks = iterate_orbit(params, 2)
            .ok()
            .and_then(|o| build_U(1, &o, params).ok())
            .filter(|c| c.passed())
            .and_then(|c| Some((1, Complex64::new(0.5, 0.0) + c.center_offset?.mid(), c.radius_inner?)))
            .into_iter()
            .collect();
        UChain { disks }
    }

    /// Membership of z or its conjugate: the chain is mirrored with the map.
    pub fn find(&self, z: Complex64) -> Option<u64> {
        self.disks.iter().find(|(_, c, r)| (z - c).norm() < *r || (z.conj() - c).norm() < *r).map(|d| d.0)
    }
}

fn level_of(x: f64) -> u32 {
    TowerReal::from_real(x.abs()).map_or(u32::MAX, |t| t.level())
}

/// Iterate the model map from z for at most `max_steps` examinations.
pub fn classify_point(z: Complex64, map: &ModelMap, chain: &UChain, max_steps: u32, escape_level: u32) -> PointClass {
    // f(conj z) = conj f(z): classify the upper representative
    let mut z = if z.im < 0.0 { z.conj() } else { z };
    for step in 0..max_steps {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return PointClass::Undetermined;
        }
        if let Some(n) = chain.find(z) {
            return PointClass::InUChain { n, step };
        }
        let e = map.symmetry_extend(z);
        match e.tag {
            DomainTag::Disk(n) => return PointClass::EnteredDisk { n, step },
            DomainTag::Outside => return PointClass::OutsideModel { step },
            DomainTag::StripPlus => {
                let level = level_of(z.re);
                if level > escape_level {
                    return PointClass::Escaping { level, step };
                }
            }
        }
        z = match map.eval(z) {
            Ok(v) => v,
            Err(ModelError::UseTowerRegime) => {
                // |f| ~ e^{|Re(lambda sinh z)|} / 2
                let u = e.rep.sinh() * map.lambda();
                let level = 1 + level_of(u.re.abs() - std::f64::consts::LN_2);
                return PointClass::Escaping { level, step: step + 1 };
            }
            Err(_) => return PointClass::Undetermined,
        };
    }
    PointClass::Undetermined
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterJob {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub width: u32,
    pub height: u32,
    pub max_steps: u32,
    pub escape_level: u32,
    pub palette: BTreeMap<String, [u8; 3]>,
    pub overlay_graph: bool,
}

pub fn default_palette() -> BTreeMap<String, [u8; 3]> {
    [
        ("escaping", [230, 140, 40]),
        ("entered-disk", [40, 110, 200]),
        ("in-U-chain", [220, 30, 60]),
        ("outside-model", [60, 60, 60]),
        ("undetermined", [0, 0, 0]),
        ("graph", [255, 255, 255]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl RasterJob {
    pub fn new(re: (f64, f64), im: (f64, f64), width: u32, height: u32) -> Self {
        RasterJob {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
            width,
            height,
            max_steps: 64,
            escape_level: DEFAULT_ESCAPE_LEVEL,
            palette: default_palette(),
            overlay_graph: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.re_min, self.re_max, self.im_min, self.im_max];
        if w.iter().any(|v| !v.is_finite()) {
            return Err(RenderError::Job("window must be finite".into()));
        }
        if self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(RenderError::Job("window corners are out of order".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::Job("resolution must be positive".into()));
        }
        if let Some(c) = CLASS_CODES.iter().find(|c| !self.palette.contains_key(**c)) {
            return Err(RenderError::Job(format!("palette has no color for {c}")));
        }
        Ok(())
    }

    /// Pixel centers, symmetric about the window center; row 0 is the top.
    pub fn pixel(&self, i: u32, j: u32) -> Complex64 {
        let (cx, cy) = ((self.re_min + self.re_max) / 2.0, (self.im_min + self.im_max) / 2.0);
        let (hx, hy) = ((self.re_max - self.re_min) / 2.0, (self.im_max - self.im_min) / 2.0);
        let (w, h) = (self.width as f64, self.height as f64);
        Complex64::new(cx + hx * ((2 * i + 1) as f64 - w) / w, cy + hy * (h - (2 * j + 1) as f64) / h)
    }

    fn to_pixel(&self, z: Complex64) -> Option<(u32, u32)> {
        let fx = (z.re - self.re_min) / (self.re_max - self.re_min) * self.width as f64;
        let fy = (self.im_max - z.im) / (self.im_max - self.im_min) * self.height as f64;
        (fx >= 0.0 && fy >= 0.0 && fx < self.width as f64 && fy < self.height as f64).then(|| (fx as u32, fy as u32))
    }
}

pub struct RenderOutput {
    pub classes: Vec<PointClass>,
    pub ppm: Vec<u8>,
    pub csv: String,
    pub legend: serde_json::Value,
}

impl RenderOutput {
    pub fn write(&self, dir: &Path, stem: &str) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files = [
            (format!("{stem}.ppm"), self.ppm.clone()),
            (format!("{stem}.csv"), self.csv.clone().into_bytes()),
            (format!("{stem}_legend.json"), serde_json::to_vec_pretty(&self.legend).map_err(io::Error::other)?),
        ];
        let mut out = Vec::new();
        for (name, bytes) in files {
            let p = dir.join(name);
            std::fs::write(&p, bytes)?;
            out.push(p);
        }
        Ok(out)
    }
}

pub fn classify_raster(job: &RasterJob, map: &ModelMap, chain: &UChain) -> Vec<PointClass> {
    (0..job.height)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..job.width).map(move |i| classify_point(job.pixel(i, j), map, chain, job.max_steps, job.escape_level))
        })
        .collect()
}

fn overlay(job: &RasterJob, graph: &Graph) -> Vec<bool> {
    let mut mask = vec![false; (job.width * job.height) as usize];
    let px = ((job.re_max - job.re_min) / job.width as f64).min((job.im_max - job.im_min) / job.height as f64);
    let mut mark = |z: Complex64| {
        if let Some((i, j)) = job.to_pixel(z) {
            mask[(j * job.width + i) as usize] = true;
        }
    };
    for e in &graph.edges {
        let (a, b) = (graph.vertices[e.a].pos, graph.vertices[e.b].pos);
        let samples = ((e.diameter / px.max(1e-300)).ceil() as usize).clamp(2, 1 << 16);
        for s in 0..=samples {
            let t = s as f64 / samples as f64;
            let z = match (e.kind, e.arc) {
                (EdgeKind::CircularArc, Some(arc)) => arc.center + Complex64::from_polar(1.0, arc.theta + t * arc.sweep),
                _ => a + (b - a) * t,
            };
            mark(z);
        }
    }
    mask
}

pub fn render(job: &RasterJob, params: &ParameterSet, graph: Option<&Graph>) -> Result<RenderOutput> {
    job.validate()?;
    let map = ModelMap::new(params.clone(), 64)?;
    let chain = UChain::from_params(params);
    let classes = classify_raster(job, &map, &chain);
    let mask = match (job.overlay_graph, graph) {
        (true, Some(g)) => Some(overlay(job, g)),
        _ => None,
    };
    let graph_color = job.palette.get("graph").copied().unwrap_or([255, 255, 255]);
    let mut ppm = format!("P6\n{} {}\n255\n", job.width, job.height).into_bytes();
    let mut csv = String::from("x,y,class,steps,detail\n");
    let mut counts: BTreeMap<&str, u64> = CLASS_CODES.iter().map(|c| (*c, 0)).collect();
    for (k, c) in classes.iter().enumerate() {
        let rgb = if mask.as_ref().is_some_and(|m| m[k]) { graph_color } else { job.palette[c.code()] };
        ppm.extend_from_slice(&rgb);
        let z = job.pixel(k as u32 % job.width, k as u32 / job.width);
        let _ = writeln!(csv, "{:e},{:e},{},{},{}", z.re, z.im, c.code(), c.steps(), c.detail());
        *counts.get_mut(c.code()).unwrap() += 1;
    }
    let legend = serde_json::json!({
        "job": job,
        "lambda_over_pi": params.lambda_over_pi,
        "classes": CLASS_CODES,
        "colors": job.palette,
        "counts": counts,
        "u_chain": chain.disks.iter().map(|(n, c, r)| serde_json::json!({"n": n, "center": [c.re, c.im], "radius_inner": r})).collect::<Vec<_>>(),
        "escape_rule": format!("tower level of |Re z| above {}", job.escape_level),
        "escape_rule_note": "monotone spacing certifies escape on the real axis only; off the axis the rule is a heuristic",
        "graph_overlay": mask.is_some(),
    });
    Ok(RenderOutput { classes, ppm, csv, legend })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (ModelMap, UChain) {
        let p = ParameterSet::new(4);
        (ModelMap::new(p.clone(), 16).unwrap(), UChain::from_params(&p))
    }

    #[test]
    fn reference_points() {
        let (m, c) = setup();
        let k = |z| classify_point(z, &m, &c, 16, DEFAULT_ESCAPE_LEVEL);
        assert!(matches!(k(Complex64::new(0.5, 0.0)), PointClass::Escaping { step: 1, .. }));
        assert_eq!(k(m.z_n(1)), PointClass::EnteredDisk { n: 1, step: 0 });
        assert_eq!(k(Complex64::new(0.0, 3.0)), PointClass::OutsideModel { step: 0 });
        assert_eq!(c.disks.len(), 1);
        assert_eq!(k(c.disks[0].1), PointClass::InUChain { n: 1, step: 0 });
        assert_eq!(k(c.disks[0].1.conj()), PointClass::InUChain { n: 1, step: 0 });
        assert_eq!(classify_point(m.z_n(1), &m, &c, 0, 2), PointClass::Undetermined);
    }

    #[test]
    fn disk_below_real_axis_mirrors() {
        let (m, c) = setup();
        let z = Complex64::new(-2.0 * PI, -PI);
        assert!(matches!(classify_point(z, &m, &c, 4, 2), PointClass::EnteredDisk { n: 2, step: 0 }));
    }

    #[test]
    fn pixel_centers_are_symmetric() {
        let j = RasterJob::new((-1.0, 3.0), (-2.0, 2.0), 7, 9);
        for r in 0..9 {
            for i in 0..7 {
                assert_eq!(j.pixel(i, r).im, -j.pixel(i, 8 - r).im);
            }
        }
        assert_eq!(j.pixel(3, 4), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn bad_jobs_are_rejected() {
        let mut j = RasterJob::new((0.0, 1.0), (0.0, f64::INFINITY), 2, 2);
        assert!(j.validate().is_err());
        j.im_max = 1.0;
        j.palette.remove("undetermined");
        assert!(j.validate().is_err());
    }
}
