//! The model map: cosh(lambda sinh z) on the half-strip, the disk maps
//! rho_n((z - z_n)^{d_n}) and the symmetry rules gluing them together.

use crate::bigfloat::BigInterval;
use crate::params::ParameterSet;
use num_complex::Complex64;
use rug::Integer;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

pub const MAX_A_INDEX: u64 = 500;
pub const SEAM_INNER: f64 = 0.75;
pub const FD_STEP: f64 = 1e-6;
/// |mu| this close to 1 is reported as degenerate.
pub const DEGENERACY_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("index n = {0} outside 1..=500 supported by the closed form for a_n")]
    Range(u64),
    #[error("point {0} outside the closed half-strip")]
    OutsideStrip(Complex64),
    #[error("point {z} outside the closed disk D_{n}")]
    OutsideDisk { z: Complex64, n: u64 },
    #[error("|zeta| = {0} exceeds 1")]
    OutsideUnitDisk(f64),
    #[error("value overflows machine reals; use the tower regime")]
    UseTowerRegime,
    #[error("point {0} not in the model domain")]
    OutsideModel(Complex64),
    #[error("|zeta| = {0} within the excluded margin of a seam")]
    Seam(f64),
    #[error("degenerate dilatation |mu| = {0}")]
    Degenerate(f64),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Certified evaluation of a_n = acosh(floor(k cosh(n pi)) / k), k = lambda/pi.
#[derive(Clone, Debug)]
pub struct ACertificate {
    pub n: u64,
    pub floor: Integer,
    pub a: BigInterval,
    /// a_n <= n pi certified by interval comparison.
    pub upper_ok: bool,
    /// a_n > n pi - 1/10 certified by interval comparison.
    pub lower_ok: bool,
}

impl ACertificate {
    pub fn a_f64(&self) -> f64 {
        self.a.mid_f64()
    }
}

fn tenth(prec: u32) -> BigInterval {
    BigInterval::from_u64(prec, 1).div_pos(&BigInterval::from_u64(prec, 10))
}

pub fn compute_a_certified(n: u64, lambda_over_pi: u64) -> Result<ACertificate> {
    if n == 0 || n > MAX_A_INDEX {
        return Err(ModelError::Range(n));
    }
    let k = lambda_over_pi;
    // cosh(n pi) has about 4.53 n bits before the point; a_n - n pi ~ e^{-n pi}
    let mut prec = (2.0 * 4.54 * n as f64) as u32 + 64 - k.leading_zeros() + 96;
    for _ in 0..6 {
        let npi = BigInterval::pi(prec).scale_u64(n);
        let kc = npi.cosh_nonneg().scale_u64(k);
        let Some(floor) = kc.floor_exact() else {
            prec *= 2;
            continue;
        };
        let ratio = BigInterval::from_integer(prec, &floor).div_pos(&BigInterval::from_u64(prec, k));
        if ratio.lo < 1 {
            // floor(k cosh(n pi)) >= k since cosh >= 1
            unreachable!("ratio below 1");
        }
        let a = ratio.acosh();
        let upper_ok = a.hi <= npi.lo;
        let lower_ok = ratio.lo > npi.sub(&tenth(prec)).cosh_nonneg().hi;
        if !upper_ok && prec < 1 << 16 {
            prec *= 2;
            continue;
        }
        return Ok(ACertificate { n, floor, a, upper_ok, lower_ok });
    }
    Err(ModelError::Range(n))
}

pub fn compute_a(n: u64, lambda_over_pi: u64) -> Result<f64> {
    Ok(compute_a_certified(n, lambda_over_pi)?.a_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskSpec {
    pub n: u64,
    pub a_n: f64,
    pub z_n: (f64, f64),
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainTag {
    StripPlus,
    Disk(u64),
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extended {
    pub tag: DomainTag,
    pub rep: Complex64,
    /// f(z) = conj(f(rep)) when set, f(rep) otherwise.
    pub conjugated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Beltrami {
    pub mu: Complex64,
    /// |mu(h/2) - mu(h)|, the first-order error estimate.
    pub err: f64,
}

pub fn rho(zeta: Complex64, w: Complex64, delta: f64) -> Result<Complex64> {
    let r = zeta.norm();
    if r > 1.0 + 1e-12 {
        return Err(ModelError::OutsideUnitDisk(r));
    }
    let affine = zeta * delta + w;
    if r <= SEAM_INNER {
        Ok(affine)
    } else {
        Ok(zeta * (4.0 * r - 3.0) + affine * (4.0 - 4.0 * r))
    }
}

fn fd_mu(zeta: Complex64, w: Complex64, delta: f64, h: f64) -> Result<Complex64> {
    let g = |z: Complex64| rho(z, w, delta);
    let fx = (g(zeta + h)? - g(zeta - h)?) / (2.0 * h);
    let ih = Complex64::new(0.0, h);
    let fy = (g(zeta + ih)? - g(zeta - ih)?) / (2.0 * h);
    let i = Complex64::i();
    let fz = (fx - i * fy) * 0.5;
    let fzb = (fx + i * fy) * 0.5;
    Ok(fzb / fz)
}

/// Beltrami coefficient of rho by central differences at h and h/2,
/// Richardson-combined.
pub fn rho_beltrami(zeta: Complex64, w: Complex64, delta: f64) -> Result<Beltrami> {
    let b = rho_beltrami_unchecked(zeta, w, delta)?;
    if b.mu.norm() >= 1.0 - DEGENERACY_MARGIN {
        return Err(ModelError::Degenerate(b.mu.norm()));
    }
    Ok(b)
}

/// Same estimate without the degeneracy verdict, for measuring sups.
pub fn rho_beltrami_unchecked(zeta: Complex64, w: Complex64, delta: f64) -> Result<Beltrami> {
    let r = zeta.norm();
    if r > 1.0 {
        return Err(ModelError::OutsideUnitDisk(r));
    }
    if r <= SEAM_INNER {
        return Ok(Beltrami { mu: Complex64::new(0.0, 0.0), err: 0.0 });
    }
    let margin = 10.0 * FD_STEP;
    if r < SEAM_INNER + margin || r > 1.0 - margin {
        return Err(ModelError::Seam(r));
    }
    let m1 = fd_mu(zeta, w, delta, FD_STEP)?;
    let m2 = fd_mu(zeta, w, delta, FD_STEP / 2.0)?;
    let mu = (m2 * 4.0 - m1) / 3.0;
    Ok(Beltrami { mu, err: (m2 - m1).norm() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatationReport {
    pub n: u64,
    pub sup_mu: f64,
    pub worst_w: Complex64,
    pub worst_zeta: Complex64,
    pub samples: usize,
    /// Largest finite-difference error estimate seen.
    pub max_err: f64,
}

/// Model map for a fixed parameter set, with a_n and d_n cached for the
/// first `n_disks` disks.
#[derive(Clone, Debug)]
pub struct ModelMap {
    pub params: ParameterSet,
    lambda: f64,
    delta: f64,
    a: Vec<f64>,
    d: Vec<f64>,
}

impl ModelMap {
    pub fn new(params: ParameterSet, n_disks: u64) -> Result<Self> {
        let k = params.lambda_over_pi;
        let cached = n_disks.max(64).min(MAX_A_INDEX);
        let a = (1..=cached).map(|n| compute_a(n, k)).collect::<Result<Vec<_>>>()?;
        let d = (1..=cached).map(|n| params.d_f64(n)).collect();
        Ok(ModelMap { lambda: params.lambda_f64(), delta: params.delta(), params, a, d })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_cached(&self) -> u64 {
        self.a.len() as u64
    }

    pub fn a(&self, n: u64) -> f64 {
        match self.a.get((n as usize).wrapping_sub(1)) {
            Some(&v) => v,
            None if n <= MAX_A_INDEX => compute_a(n, self.params.lambda_over_pi).unwrap_or(n as f64 * PI),
            // a_n and n pi agree to far below machine resolution here
            None => n as f64 * PI,
        }
    }

    pub fn d(&self, n: u64) -> f64 {
        match self.d.get((n as usize).wrapping_sub(1)) {
            Some(&v) => v,
            None => self.params.d_f64(n),
        }
    }

    pub fn z_n(&self, n: u64) -> Complex64 {
        Complex64::new(self.a(n), PI)
    }

    pub fn disk_spec(&self, n: u64) -> DiskSpec {
        let a = self.a(n);
        DiskSpec { n, a_n: a, z_n: (a, PI), radius: 1.0 }
    }

    pub fn w(&self, n: u64) -> Complex64 {
        self.params.w(n)
    }

    /// cosh(lambda sinh z) on the closed half-strip.
    pub fn strip_map(&self, z: Complex64) -> Result<Complex64> {
        if z.re < 0.0 || z.im.abs() > FRAC_PI_2 + 1e-12 || !z.re.is_finite() {
            return Err(ModelError::OutsideStrip(z));
        }
        let u = z.sinh() * self.lambda;
        if !u.re.is_finite() || u.re.abs() > 709.0 {
            return Err(ModelError::UseTowerRegime);
        }
        Ok(u.cosh())
    }

    /// rho_n((z - z_n)^{d_n}) on the closed disk D_n.
    pub fn disk_map(&self, z: Complex64, n: u64) -> Result<Complex64> {
        let off = z - self.z_n(n);
        let r = off.norm();
        if r > 1.0 + 1e-12 {
            return Err(ModelError::OutsideDisk { z, n });
        }
        let d = self.d(n);
        let zeta = if d <= 64.0 {
            off.powi(d as i32)
        } else if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.power_polar(r.ln(), off.arg(), d)
        };
        rho(zeta, self.w(n), self.delta)
    }

    fn power_polar(&self, log_r: f64, arg: f64, d: f64) -> Complex64 {
        let lr = d * log_r;
        if lr < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(lr.exp().min(1.0), (d * arg).rem_euclid(2.0 * PI))
    }

    /// Disk map at the point z_n + exp(log_r + i arg): keeps full relative
    /// accuracy of zeta even when d_n is astronomically large.
    pub fn disk_map_local(&self, n: u64, log_r: f64, arg: f64) -> Result<Complex64> {
        let zeta = self.power_polar(log_r, arg, self.d(n));
        rho(zeta, self.w(n), self.delta)
    }

    /// Beltrami coefficient of the disk map at z_n + exp(log_r + i arg):
    /// mu_rho(zeta) times the phase conj(p')/p' of the power map.
    pub fn disk_beltrami_local(&self, n: u64, log_r: f64, arg: f64) -> Result<Beltrami> {
        let b = self.disk_beltrami_with(n, self.w(n), log_r, arg)?;
        if b.mu.norm() >= 1.0 - DEGENERACY_MARGIN {
            return Err(ModelError::Degenerate(b.mu.norm()));
        }
        Ok(b)
    }

    /// Unchecked disk-map Beltrami coefficient with w_n replaced by `w`.
    pub fn disk_beltrami_with(&self, n: u64, w: Complex64, log_r: f64, arg: f64) -> Result<Beltrami> {
        let d = self.d(n);
        let zeta = self.power_polar(log_r, arg, d);
        let b = rho_beltrami_unchecked(zeta, w, self.delta)?;
        let phase = Complex64::from_polar(1.0, (-2.0 * (d - 1.0) * arg).rem_euclid(2.0 * PI));
        Ok(Beltrami { mu: b.mu * phase, err: b.err })
    }

    /// Grid sup of |mu| of the disk map on D_n over the interpolation
    /// annulus, maximized over `n_w` targets w on the boundary of the
    /// neighborhood of 1/2. Grid points are placed in the zeta plane and
    /// pulled back to z_n + zeta^{1/d_n}.
    pub fn dilatation_sup(&self, n: u64, n_w: usize, radial: usize, angular: usize) -> DilatationReport {
        let d = self.d(n);
        let r_n = self.params.neighborhood_radius;
        let mut rep = DilatationReport { n, sup_mu: 0.0, worst_w: Complex64::new(0.5, 0.0), worst_zeta: Complex64::new(0.0, 0.0), samples: 0, max_err: 0.0 };
        for j in 0..n_w {
            let w = Complex64::new(0.5, 0.0) + Complex64::from_polar(r_n, 2.0 * PI * j as f64 / n_w as f64);
            for i in 0..radial {
                let r = SEAM_INNER + (1.0 - SEAM_INNER) * (i as f64 + 0.5) / radial as f64;
                for k in 0..angular {
                    let th = 2.0 * PI * k as f64 / angular as f64;
                    let Ok(b) = self.disk_beltrami_with(n, w, r.ln() / d, th / d) else { continue };
                    rep.samples += 1;
                    rep.max_err = rep.max_err.max(b.err);
                    if b.mu.norm() > rep.sup_mu {
                        rep.sup_mu = b.mu.norm();
                        rep.worst_w = w;
                        rep.worst_zeta = Complex64::from_polar(r, th);
                    }
                }
            }
        }
        rep
    }

    /// Beltrami coefficient of rho_n in its own coordinate.
    pub fn rho_n_beltrami(&self, n: u64, zeta: Complex64) -> Result<Beltrami> {
        rho_beltrami(zeta, self.w(n), self.delta)
    }

    pub fn symmetry_extend(&self, z: Complex64) -> Extended {
        let rep = Complex64::new(z.re.abs(), z.im.abs());
        let conjugated = (z.re < 0.0) != (z.im < 0.0);
        let tag = if rep.im <= FRAC_PI_2 {
            DomainTag::StripPlus
        } else {
            // `as` saturates; far-out points simply find no disk
            let guess = (rep.re / PI).round() as i64;
            (guess.saturating_sub(1)..=guess.saturating_add(1))
                .filter(|&m| m >= 1)
                .map(|m| m as u64)
                .find(|&m| (rep - self.z_n(m)).norm() <= 1.0)
                .map_or(DomainTag::Outside, DomainTag::Disk)
        };
        Extended { tag, rep, conjugated }
    }

    /// Model map anywhere in the symmetric model domain.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let e = self.symmetry_extend(z);
        let v = match e.tag {
            DomainTag::StripPlus => self.strip_map(e.rep)?,
            DomainTag::Disk(n) => self.disk_map(e.rep, n)?,
            DomainTag::Outside => return Err(ModelError::OutsideModel(z)),
        };
        Ok(if e.conjugated { v.conj() } else { v })
    }
}
