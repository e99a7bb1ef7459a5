//! Uniform discretization of the square frame X = [-L, L]^2 with the disc
//! Omega of radius R embedded at the origin, plus sampled complex fields and
//! their discrete norms.

use crate::error::{LabError, Result};
use num_complex::Complex64 as C64;
use std::io::{Read, Write};
use std::ops::{Add, Mul, Sub};

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(t: f64) -> f64 {
    // below ~2e-3 the exponentials underflow long before the polynomial
    // factors blow up, so the derivative is zero to working precision
    if t <= 2e-3 || t >= 1.0 - 2e-3 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / ((a + b) * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub half_width: f64,
    pub omega_radius: f64,
    pub h: f64,
    /// Half the width of the cutoff transition band.
    pub margin: f64,
}

impl Grid {
    pub fn new(n: usize, l: f64, r: f64) -> Result<Grid> {
        if !(l > 0.0 && r > 0.0 && r < l && l.is_finite()) {
            return Err(LabError::BadExtent { l, r });
        }
        if !n.is_power_of_two() {
            return Err(LabError::NotPowerOfTwo(n));
        }
        let h = 2.0 * l / n as f64;
        // margin = (L - R)/2 puts the outer edge of the cutoff exactly on the
        // frame; margin >= 4h is then R + 8h <= L
        if r + 8.0 * h > l {
            return Err(LabError::MarginViolated { r, h, l });
        }
        if n < 16 {
            return Err(LabError::GridTooSmall(n));
        }
        Ok(Grid { n, half_width: l, omega_radius: r, h, margin: 0.5 * (l - r) })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.h
    }

    /// Node z = x_j + i y_k.
    #[inline]
    pub fn node(&self, j: usize, k: usize) -> C64 {
        C64::new(self.coord(j), self.coord(k))
    }

    #[inline]
    pub fn node_at(&self, idx: usize) -> C64 {
        self.node(idx % self.n, idx / self.n)
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Largest tau allowed by the Nyquist guard 8 tau L h <= pi.
    pub fn tau_max(&self) -> f64 {
        std::f64::consts::PI / (8.0 * self.half_width * self.h)
    }

    pub fn in_region(&self, idx: usize, region: Region) -> bool {
        let r = self.node_at(idx).norm();
        match region {
            Region::X => true,
            Region::Omega => r <= self.omega_radius,
            Region::Annulus { inner } => r >= inner,
        }
    }

    pub fn region_mask(&self, region: Region) -> Vec<bool> {
        (0..self.len()).map(|i| self.in_region(i, region)).collect()
    }

    /// Cutoff: 1 on |z| <= R, 0 on |z| >= R + 2 margin.
    pub fn chi(&self) -> Field {
        let w = 2.0 * self.margin;
        Field::from_fn(*self, |z| C64::new(1.0 - smooth_step((z.norm() - self.omega_radius) / w), 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    X,
    Omega,
    /// Points of X with |z| >= inner.
    Annulus { inner: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<C64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Field {
        Field { grid, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: Grid, c: C64) -> Field {
        Field { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(C64) -> C64) -> Field {
        let values = (0..grid.len()).map(|i| f(grid.node_at(i))).collect();
        Field { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<C64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(LabError::Mismatch(format!("{} values for a {}x{} grid", values.len(), grid.n, grid.n)));
        }
        Ok(Field { grid, values })
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> C64 {
        self.values[k * self.grid.n + j]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: C64) -> Field {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Field {
        self.map(|v| v.conj())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Zero outside `region`.
    pub fn restrict(&self, region: Region) -> Field {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            if !self.grid.in_region(i, region) {
                *v = C64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Riemann-sum L^p norm over a region; `p = f64::INFINITY` gives the grid max.
    pub fn lp_norm(&self, p: f64, region: Region) -> f64 {
        let it = self.values.iter().enumerate().filter(|(i, _)| self.grid.in_region(*i, region)).map(|(_, v)| v.norm());
        lp_of(it, p, self.grid.cell_area())
    }

    pub fn l2(&self) -> f64 {
        self.lp_norm(2.0, Region::X)
    }

    pub fn sup(&self) -> f64 {
        self.lp_norm(f64::INFINITY, Region::X)
    }

    /// Riemann sum of the values over a region.
    pub fn integral(&self, region: Region) -> C64 {
        let s: C64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.in_region(*i, region))
            .map(|(_, v)| *v)
            .sum();
        s * self.grid.cell_area()
    }

    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&self.grid.half_width.to_le_bytes())?;
        w.write_all(&self.grid.omega_radius.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Field> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let n = u64::from_le_bytes(b) as usize;
        r.read_exact(&mut b)?;
        let l = f64::from_le_bytes(b);
        r.read_exact(&mut b)?;
        let rad = f64::from_le_bytes(b);
        let grid = Grid::new(n, l, rad)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b)?;
            let re = f64::from_le_bytes(b);
            r.read_exact(&mut b)?;
            values.push(C64::new(re, f64::from_le_bytes(b)));
        }
        Ok(Field { grid, values })
    }

    /// CSV rows `x,y,re,im`, optionally thinned by `stride`.
    pub fn to_csv(&self, stride: usize) -> String {
        let s = stride.max(1);
        let mut out = String::from("x,y,re,im\n");
        for k in (0..self.grid.n).step_by(s) {
            for j in (0..self.grid.n).step_by(s) {
                let z = self.grid.node(j, k);
                let v = self.at(j, k);
                out.push_str(&format!("{:.10e},{:.10e},{:.10e},{:.10e}\n", z.re, z.im, v.re, v.im));
            }
        }
        out
    }
}

/// Riemann-sum L^p norm of magnitudes with cell area `da`.
pub fn lp_of(mags: impl Iterator<Item = f64>, p: f64, da: f64) -> f64 {
    if p.is_infinite() {
        return mags.fold(0.0, f64::max);
    }
    let s: f64 = mags.map(|a| a.powf(p)).sum();
    (s * da).powf(1.0 / p)
}

fn check_same(a: &Field, b: &Field) {
    assert_eq!(a.grid, b.grid, "fields live on different grids");
}

impl<'a> Add<&'a Field> for &'a Field {
    type Output = Field;
    fn add(self, o: &Field) -> Field {
        check_same(self, o);
        Field { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a Field> for &'a Field {
    type Output = Field;
    fn sub(self, o: &Field) -> Field {
        check_same(self, o);
        Field { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect() }
    }
}

/// Pointwise product.
impl<'a> Mul<&'a Field> for &'a Field {
    type Output = Field;
    fn mul(self, o: &Field) -> Field {
        check_same(self, o);
        Field { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a * b).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_matches_extent() {
        let g = Grid::new(256, 2.0, 1.0).unwrap();
        assert_eq!(g.h, 0.015625);
        let g = Grid::new(512, 2.0, 1.0).unwrap();
        assert_eq!(g.h, 0.0078125);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(Grid::new(8, 1.0, 0.9), Err(LabError::MarginViolated { .. })));
        assert!(matches!(Grid::new(100, 1.0, 0.5), Err(LabError::NotPowerOfTwo(100))));
    }

    #[test]
    fn cutoff_values() {
        let g = Grid::new(128, 1.0, 0.5).unwrap();
        let chi = g.chi();
        assert_eq!(chi.at(64, 64).re, 1.0);
        assert_eq!(chi.at(0, 64).re, 0.0);
        let r = g.omega_radius + g.margin;
        let v = 1.0 - smooth_step((r - g.omega_radius) / (2.0 * g.margin));
        assert!(v > 0.0 && v < 1.0);
        assert!(chi.values.iter().all(|v| v.re >= 0.0 && v.re <= 1.0 && v.im == 0.0));
    }

    #[test]
    fn constant_norm() {
        let g = Grid::new(64, 2.0, 1.0).unwrap();
        let one = Field::constant(g, C64::new(1.0, 0.0));
        assert!((one.l2() - 4.0).abs() < 1e-12);
        assert_eq!(Field::zeros(g).lp_norm(3.0, Region::X), 0.0);
    }

    #[test]
    fn conj_z_on_unit_disc() {
        // int_{|z|<1} |z|^2 = pi/2
        let g = Grid::new(512, 2.0, 1.0).unwrap();
        let f = Field::from_fn(g, |z| z.conj());
        let v = f.lp_norm(2.0, Region::Omega);
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 2.0 * g.h);
    }

    #[test]
    fn step_derivative_matches_difference() {
        for &t in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let e = 1e-6;
            let fd = (smooth_step(t + e) - smooth_step(t - e)) / (2.0 * e);
            assert!((fd - smooth_step_deriv(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::new(32, 1.0, 0.4).unwrap();
        let f = Field::from_fn(g, |z| z * z + C64::new(0.5, -1.0));
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16 * g.len());
        let back = Field::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
}
