//! Potential presets and seeded random test fields.

use crate::error::{LabError, Result};
use crate::grid::{smooth_step, Field, Grid};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Radial profile equal to 1 up to `inner * radius`, 0 beyond `radius`.
fn plateau(r: f64, radius: f64, inner: f64) -> f64 {
    1.0 - smooth_step((r / radius - inner) / (1.0 - inner))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preset {
    Zero,
    /// amplitude on a plateau of 0.3 * radius, smooth roll-off to zero at radius
    SmoothBump { amplitude: f64, center: [f64; 2], radius: f64 },
    /// amplitude * |z - c|^-exponent, rolled off smoothly between radius/2 and radius
    Singular { amplitude: f64, center: [f64; 2], radius: f64, exponent: f64 },
    DiscIndicator { amplitude: f64, center: [f64; 2], radius: f64 },
    /// Pointwise sum of the parts.
    Sum { parts: Vec<Preset> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub preset: Preset,
    /// Declared Lebesgue exponent.
    pub p: f64,
}

impl PotentialSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.p > 1.0 && self.p < 2.0) {
            return Err(LabError::Config(format!("potential exponent p={} outside (1,2)", self.p)));
        }
        validate_preset(&self.preset, self.p, grid)
    }

    pub fn sample(&self, grid: Grid) -> Field {
        sample_preset(&self.preset, grid)
    }
}

fn validate_preset(preset: &Preset, p: f64, grid: &Grid) -> Result<()> {
    let (c, rad) = match preset {
        Preset::Zero => return Ok(()),
        Preset::Sum { parts } => return parts.iter().try_for_each(|q| validate_preset(q, p, grid)),
        Preset::SmoothBump { center, radius, .. } | Preset::DiscIndicator { center, radius, .. } => (center, radius),
        Preset::Singular { center, radius, exponent, .. } => {
            if exponent * p >= 2.0 {
                return Err(LabError::Config(format!("|z|^-{exponent} is not in L^{p}: need exponent < 2/p")));
            }
            (center, radius)
        }
    };
    if C64::new(c[0], c[1]).norm() + rad > grid.omega_radius + 1e-12 {
        return Err(LabError::Config("potential support leaves Omega".into()));
    }
    Ok(())
}

/// Two potentials in L^p but not L^2 sharing the singular part |z|^-1, so
/// their difference is a smooth bump difference.
pub fn singular_pair() -> (PotentialSpec, PotentialSpec) {
    let sing = Preset::Singular { amplitude: 3.0, center: [0.0, 0.0], radius: 0.25, exponent: 1.0 };
    let q1 = Preset::Sum {
        parts: vec![sing.clone(), Preset::SmoothBump { amplitude: 20.0, center: [0.05, 0.03], radius: 0.25 }],
    };
    let q2 = Preset::Sum { parts: vec![sing, Preset::SmoothBump { amplitude: 12.0, center: [-0.08, -0.02], radius: 0.2 }] };
    (PotentialSpec { preset: q1, p: 1.4 }, PotentialSpec { preset: q2, p: 1.4 })
}

/// Mean of |z|^-s over the square cell of side h centred at 0.
pub fn singular_cell_mean(h: f64, s: f64) -> f64 {
    // (8/h^2) int_0^{pi/4} int_0^{h/(2 cos t)} r^{1-s} dr dt, Simpson in t
    let nq = 400;
    let f = |t: f64| (0.5 / t.cos()).powf(2.0 - s) / (2.0 - s);
    let a = PI / 4.0;
    let dt = a / nq as f64;
    let mut acc = f(0.0) + f(a);
    for i in 1..nq {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * dt);
    }
    8.0 * acc * dt / 3.0 * h.powf(-s)
}

pub fn sample_preset(preset: &Preset, grid: Grid) -> Field {
    match *preset {
        Preset::Zero => Field::zeros(grid),
        Preset::Sum { ref parts } => {
            parts.iter().fold(Field::zeros(grid), |acc, q| &acc + &sample_preset(q, grid))
        }
        Preset::SmoothBump { amplitude, center, radius } => {
            let c = C64::new(center[0], center[1]);
            Field::from_fn(grid, |z| C64::new(amplitude * plateau((z - c).norm(), radius, 0.3), 0.0))
        }
        Preset::Singular { amplitude, center, radius, exponent } => {
            let c = C64::new(center[0], center[1]);
            let cell = singular_cell_mean(grid.h, exponent);
            Field::from_fn(grid, |z| {
                let r = (z - c).norm();
                let v = if r < 1e-9 * grid.h { cell } else { r.powf(-exponent) * plateau(r, radius, 0.5) };
                C64::new(amplitude * v, 0.0)
            })
        }
        Preset::DiscIndicator { amplitude, center, radius } => {
            let c = C64::new(center[0], center[1]);
            Field::from_fn(grid, |z| C64::new(if (z - c).norm() < radius { amplitude } else { 0.0 }, 0.0))
        }
    }
}

/// Smooth compactly supported random field: a few Gaussians of width at least
/// `support/8` under a plateau cutoff of radius `support` around the origin.
pub fn random_smooth_field(grid: Grid, rng: &mut impl Rng, support: f64) -> Field {
    let count = 4;
    let bumps: Vec<(C64, f64, C64)> = (0..count)
        .map(|_| {
            let r = 0.4 * support * rng.gen::<f64>().sqrt();
            let t = 2.0 * PI * rng.gen::<f64>();
            let w = support * (0.12 + 0.1 * rng.gen::<f64>());
            let a = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0;
            (C64::from_polar(r, t), w, a)
        })
        .collect();
    Field::from_fn(grid, |z| {
        let env = plateau(z.norm(), support, 0.5);
        if env == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let s: C64 = bumps.iter().map(|(c, w, a)| a * (-(z - c).norm_sqr() / (2.0 * w * w)).exp()).sum();
        s * env
    })
}

/// Bounded random field: unit-modulus-scale trigonometric polynomial with
/// wavenumbers up to `kmax` (in units of pi/L).
pub fn random_bounded_field(grid: Grid, rng: &mut impl Rng, kmax: usize) -> Field {
    let l = grid.half_width;
    let modes: Vec<(f64, f64, C64)> = (0..6)
        .map(|_| {
            let kx = rng.gen_range(0..=kmax) as f64 * PI / l;
            let ky = rng.gen_range(0..=kmax) as f64 * PI / l;
            (kx, ky, C64::from_polar(1.0 / 6.0, 2.0 * PI * rng.gen::<f64>()))
        })
        .collect();
    Field::from_fn(grid, |z| modes.iter().map(|(kx, ky, a)| a * C64::from_polar(1.0, kx * z.re + ky * z.im)).sum())
}
