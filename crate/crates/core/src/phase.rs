//! Quadratic phases, the rescaled bump psi_tau, the auxiliary function h and
//! the closed-form norm identities checked by radial quadrature.

use crate::error::{LabError, Result};
use crate::grid::{smooth_step, smooth_step_deriv, Field, Grid};
use crate::quad::adaptive_simpson;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

/// (tau, z0) with Phi(z) = (z - z0)^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseParams {
    pub tau: f64,
    pub z0: C64,
}

impl PhaseParams {
    pub fn new(tau: f64, z0: C64) -> Result<PhaseParams> {
        if !(tau > 1.0 && tau.is_finite()) {
            return Err(LabError::TauTooLow(tau));
        }
        Ok(PhaseParams { tau, z0 })
    }

    /// Nyquist guard 8 tau L h <= pi for oscillatory weights on `grid`.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        let value = 8.0 * self.tau * grid.half_width * grid.h;
        if value > PI * (1.0 + 1e-12) {
            return Err(LabError::Nyquist { value });
        }
        Ok(())
    }

    /// Phi + conj(Phi) = 2((x - x0)^2 - (y - y0)^2).
    #[inline]
    pub fn phi_sum(&self, z: C64) -> f64 {
        let w = z - self.z0;
        2.0 * (w.re * w.re - w.im * w.im)
    }
}

/// exp(sign * i tau (Phi + conj Phi)).
pub fn quadratic_phase(grid: Grid, pp: &PhaseParams, sign: f64) -> Result<Field> {
    pp.check_grid(&grid)?;
    Ok(Field::from_fn(grid, |z| C64::from_polar(1.0, sign * pp.tau * pp.phi_sum(z))))
}

/// Base bump: 1 on |x| <= 1, 0 on |x| >= 2.
#[inline]
pub fn psi(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

#[inline]
pub fn psi_deriv(r: f64) -> f64 {
    -smooth_step_deriv(r - 1.0)
}

fn check_resolved(grid: &Grid, tau: f64) -> Result<()> {
    let radius = tau.powf(-0.5);
    if radius < grid.h {
        return Err(LabError::BumpUnderResolved { radius, h: grid.h });
    }
    Ok(())
}

/// psi_tau(z) = psi(sqrt(tau) (z - z0)).
pub fn bump_tau(grid: Grid, pp: &PhaseParams) -> Result<Field> {
    check_resolved(&grid, pp.tau)?;
    let s = pp.tau.sqrt();
    Ok(Field::from_fn(grid, |z| C64::new(psi(s * (z - pp.z0).norm()), 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HVariant {
    /// (1 - psi_tau)/(conj z - conj z0)
    Conj,
    /// (1 - psi_tau)/(z - z0)
    Plain,
}

/// h, d h and dbar h at w = z - z0 (all zero where psi_tau = 1).
pub fn h_pointwise(w: C64, tau: f64, variant: HVariant) -> (C64, C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let r = w.norm();
    let s = tau.sqrt();
    if s * r <= 1.0 {
        return (zero, zero, zero);
    }
    let one_minus = 1.0 - psi(s * r);
    let dp = s * psi_deriv(s * r);
    // d psi_tau = dp * conj(w)/(2r), dbar psi_tau = dp * w/(2r)
    let d_psi = w.conj() * (dp / (2.0 * r));
    let db_psi = w * (dp / (2.0 * r));
    match variant {
        HVariant::Conj => {
            let den = w.conj();
            (one_minus / den, -d_psi / den, -db_psi / den - one_minus / (den * den))
        }
        HVariant::Plain => (one_minus / w, -d_psi / w - one_minus / (w * w), -db_psi / w),
    }
}

/// Sampled h; the node z = z0 (inside the ball where psi_tau = 1) is 0.
pub fn h_function(grid: Grid, pp: &PhaseParams, variant: HVariant) -> Result<Field> {
    check_resolved(&grid, pp.tau)?;
    Ok(Field::from_fn(grid, |z| h_pointwise(z - pp.z0, pp.tau, variant).0))
}

/// Closed-form dbar h sampled on the grid.
pub fn h_dbar(grid: Grid, pp: &PhaseParams, variant: HVariant) -> Result<Field> {
    check_resolved(&grid, pp.tau)?;
    Ok(Field::from_fn(grid, |z| h_pointwise(z - pp.z0, pp.tau, variant).2))
}

/// v . grad g = nu d g + conj(nu) dbar g for real v and nu = v1 + i v2.
#[inline]
pub fn directional(v: [f64; 2], d: C64, dbar: C64) -> C64 {
    let nu = C64::new(v[0], v[1]);
    nu * d + nu.conj() * dbar
}

const QTOL: f64 = 1e-13;

/// ||z^-a||_{L^p(|z| > tau^-1/2)} by radial quadrature to r = 10 plus the
/// analytic tail, against (2 pi/(ap - 2))^{1/p} tau^{a/2 - 1/p}.
pub fn inverse_power_norm_check(a: f64, p: f64, tau: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !(p * a > 2.0) {
        return Err(LabError::Hypothesis(format!("need p > 2/a, got a={a}, p={p}")));
    }
    let r0 = tau.powf(-0.5);
    let rmax = 10.0 * r0.max(1.0);
    let e = 2.0 - a * p;
    // r = e^t: int r^{1-ap} dr = int e^{(2-ap) t} dt
    let body = adaptive_simpson(&|t: f64| (e * t).exp(), r0.ln(), rmax.ln(), QTOL);
    let tail = rmax.powf(e) / (a * p - 2.0);
    let numeric = (2.0 * PI * (body + tail)).powf(1.0 / p);
    let closed = (2.0 * PI / (a * p - 2.0)).powf(1.0 / p) * tau.powf(a / 2.0 - 1.0 / p);
    Ok((numeric, closed))
}

/// int_0^{2 pi} |cos t|^p dt.
fn cos_moment(p: f64) -> f64 {
    4.0 * adaptive_simpson(&|t: f64| t.cos().powf(p), 0.0, PI / 2.0, QTOL)
}

/// ||psi_tau||_p on the plane.
pub fn bump_lp_norm(tau: f64, p: f64) -> f64 {
    let s = tau.sqrt();
    if p.is_infinite() {
        return 1.0;
    }
    let inner = PI / tau;
    let ring = adaptive_simpson(&|r: f64| psi(s * r).powf(p) * r, 1.0 / s, 2.0 / s, QTOL);
    (inner + 2.0 * PI * ring).powf(1.0 / p)
}

/// ||v . grad psi_tau||_p on the plane.
pub fn bump_grad_lp_norm(tau: f64, p: f64, v: [f64; 2]) -> f64 {
    let s = tau.sqrt();
    let vn = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let radial = adaptive_simpson(&|r: f64| (s * psi_deriv(s * r)).abs().powf(p) * r, 1.0 / s, 2.0 / s, QTOL);
    (radial * cos_moment(p)).powf(1.0 / p) * vn
}

/// ||h||_p on the plane, p in (2, inf].
pub fn h_lp_norm(tau: f64, p: f64) -> f64 {
    let s = tau.sqrt();
    let (r0, r1) = (1.0 / s, 2.0 / s);
    if p.is_infinite() {
        // beyond r1 |h| = 1/r decreases; the max sits in the transition band
        let f = |r: f64| (1.0 - psi(s * r)) / r;
        let samples = 4000;
        let mut best = (r1, f(r1));
        for i in 0..=samples {
            let r = r0 + (r1 - r0) * i as f64 / samples as f64;
            if f(r) > best.1 {
                best = (r, f(r));
            }
        }
        let (mut lo, mut hi) = ((best.0 - (r1 - r0) / samples as f64).max(r0), (best.0 + (r1 - r0) / samples as f64).min(r1));
        for _ in 0..100 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        return f(0.5 * (lo + hi)).max(best.1);
    }
    assert!(p > 2.0, "h is in L^p only for p > 2");
    let ring = adaptive_simpson(&|r: f64| (1.0 - psi(s * r)).powf(p) * r.powf(1.0 - p), r0, r1, QTOL);
    let tail = r1.powf(2.0 - p) / (p - 2.0);
    (2.0 * PI * (ring + tail)).powf(1.0 / p)
}

/// ||v . grad h||_p on the plane, p in (1, inf).
pub fn h_grad_lp_norm(tau: f64, p: f64, v: [f64; 2]) -> f64 {
    let s = tau.sqrt();
    let (r0, r1) = (1.0 / s, 2.0 / s);
    let vn = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let ring = adaptive_simpson(
        &|r: f64| {
            let ang = adaptive_simpson(
                &|t: f64| {
                    let (_, d, db) = h_pointwise(C64::from_polar(r, t), tau, HVariant::Conj);
                    directional(v, d, db).norm().powf(p)
                },
                0.0,
                2.0 * PI,
                1e-9 * tau.powf(p),
            );
            ang * r
        },
        r0,
        r1,
        1e-8 * tau.powf(p - 1.0),
    );
    // outside r1: v . grad h = -conj(nu)/conj(w)^2, modulus |v|/r^2
    let tail = 2.0 * PI * vn.powf(p) * r1.powf(2.0 - 2.0 * p) / (2.0 * p - 2.0);
    (ring + tail).powf(1.0 / p)
}

/// Precomputed base-bump norms at tau = 1.
#[derive(Debug, Clone, Serialize)]
pub struct BumpFamily {
    pub lp: Vec<(f64, f64)>,
    pub grad: Vec<(f64, f64)>,
}

impl BumpFamily {
    pub fn new(ps: &[f64], v: [f64; 2]) -> BumpFamily {
        BumpFamily {
            lp: ps.iter().map(|&p| (p, bump_lp_norm(1.0, p))).collect(),
            grad: ps.iter().map(|&p| (p, bump_grad_lp_norm(1.0, p, v))).collect(),
        }
    }
}
