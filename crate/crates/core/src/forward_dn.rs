//! Forward Dirichlet problem for (Delta + q) u = 0 on the disc Omega, the
//! discrete Dirichlet-to-Neumann map, and the Alessandrini pairing.
//!
//! Unknowns are the grid nodes strictly inside the circle |z| = R. Where a
//! five-point arm leaves the disc it is shortened to the circle (Shortley-Weller),
//! and the circle crossing becomes a boundary node carrying Dirichlet data.

use crate::error::{LabError, Result};
use crate::grid::{Field, Grid, Region};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

/// Complex band matrix with equal lower and upper bandwidth, LU-factored in
/// place without pivoting. The systems here are diagonally dominant up to
/// the h^2 q perturbation, so no pivoting is needed.
struct BandLu {
    n: usize,
    bw: usize,
    a: Vec<C64>,
}

impl BandLu {
    fn new(n: usize, bw: usize) -> BandLu {
        BandLu { n, bw, a: vec![C64::new(0.0, 0.0); n * (2 * bw + 1)] }
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.a[i * (2 * self.bw + 1) + j + self.bw - i]
    }

    /// Factor; returns (min, max) pivot modulus.
    fn factor(&mut self) -> (f64, f64) {
        let (n, bw, w) = (self.n, self.bw, 2 * self.bw + 1);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..n {
            let piv = self.a[k * w + bw];
            lo = lo.min(piv.norm());
            hi = hi.max(piv.norm());
            let inv = 1.0 / piv;
            let end = (k + bw + 1).min(n);
            let (head, tail) = self.a.split_at_mut((k + 1) * w);
            let krow = &head[k * w..];
            for i in k + 1..end {
                let row = &mut tail[(i - k - 1) * w..(i - k) * w];
                let l = row[k + bw - i] * inv;
                row[k + bw - i] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                // row i, columns k+1..end, against row k, columns k+1..end
                let ri = k + 1 + bw - i;
                let rk = bw + 1;
                let len = end - k - 1;
                for (x, y) in row[ri..ri + len].iter_mut().zip(&krow[rk..rk + len]) {
                    *x -= l * y;
                }
            }
        }
        (lo, hi)
    }

    fn solve(&self, b: &mut [C64]) {
        let (n, bw, w) = (self.n, self.bw, 2 * self.bw + 1);
        for i in 0..n {
            let start = i.saturating_sub(bw);
            let row = &self.a[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in start..i {
                s -= row[j + bw - i] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let end = (i + bw + 1).min(n);
            let row = &self.a[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in i + 1..end {
                s -= row[j + bw - i] * b[j];
            }
            b[i] = s / row[bw];
        }
    }
}

/// Which arm of which grid line meets the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum ArmKey {
    RowEast(usize),
    RowWest(usize),
    ColNorth(usize),
    ColSouth(usize),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryNode {
    pub x: f64,
    pub y: f64,
    pub angle: f64,
    /// Arclength quadrature weight.
    pub weight: f64,
}

/// One row of the scaled operator -h^2 (Delta_h + q).
#[derive(Debug, Clone)]
struct Row {
    diag: C64,
    interior: Vec<(usize, f64)>,
    boundary: Vec<(usize, f64)>,
}

/// Factored Dirichlet solver for one potential.
pub struct DirichletSolver {
    pub grid: Grid,
    /// Grid index of each unknown.
    nodes: Vec<usize>,
    /// Unknown number of each grid index.
    unknown: Vec<Option<usize>>,
    pub boundary: Vec<BoundaryNode>,
    rows: Vec<Row>,
    lu: BandLu,
    pub pivot_ratio: f64,
}

/// Pivot spread beyond this is reported as a near-singular system.
const PIVOT_LIMIT: f64 = 1e12;
/// Relative residual accepted after iterative refinement.
const RESIDUAL_LIMIT: f64 = 1e-10;

impl DirichletSolver {
    pub fn new(grid: Grid, q: &Field) -> Result<DirichletSolver> {
        assert_eq!(q.grid, grid);
        let (n, h, r) = (grid.n, grid.h, grid.omega_radius);
        let inside = |j: usize, k: usize| grid.node(j, k).norm() < r;
        let mut nodes = Vec::new();
        let mut unknown = vec![None; n * n];
        for k in 0..n {
            for j in 0..n {
                if inside(j, k) {
                    unknown[k * n + j] = Some(nodes.len());
                    nodes.push(k * n + j);
                }
            }
        }
        if nodes.is_empty() {
            return Err(LabError::Config("Omega contains no grid nodes".into()));
        }
        // boundary crossings, merged when two arms hit the same point
        let mut keys: HashMap<ArmKey, usize> = HashMap::new();
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let mut add_point = |key: ArmKey, x: f64, y: f64| -> usize {
            if let Some(&i) = keys.get(&key) {
                return i;
            }
            let i = pts.iter().position(|&(a, b)| (a - x).abs() + (b - y).abs() < 1e-9 * h).unwrap_or_else(|| {
                pts.push((x, y));
                pts.len() - 1
            });
            keys.insert(key, i);
            i
        };
        let mut rows = Vec::with_capacity(nodes.len());
        for &idx in &nodes {
            let (j, k) = (idx % n, idx / n);
            let z = grid.node(j, k);
            let mut interior = Vec::new();
            let mut boundary = Vec::new();
            let mut diag = C64::new(-h * h, 0.0) * q.values[idx];
            // (neighbour, arm fraction, boundary point) along each axis
            for axis in 0..2 {
                let mut arms = [(None, 1.0, 0usize); 2];
                for (slot, dir) in [1i64, -1].iter().enumerate() {
                    let (jj, kk) = if axis == 0 { (j as i64 + dir, k as i64) } else { (j as i64, k as i64 + dir) };
                    let ok = jj >= 0 && kk >= 0 && (jj as usize) < n && (kk as usize) < n && inside(jj as usize, kk as usize);
                    if ok {
                        arms[slot] = (unknown[kk as usize * n + jj as usize], 1.0, 0);
                    } else if axis == 0 {
                        let xb = dir.signum() as f64 * (r * r - z.im * z.im).max(0.0).sqrt();
                        let key = if *dir > 0 { ArmKey::RowEast(k) } else { ArmKey::RowWest(k) };
                        let b = add_point(key, xb, z.im);
                        arms[slot] = (None, ((xb - z.re).abs() / h).min(1.0), b);
                    } else {
                        let yb = dir.signum() as f64 * (r * r - z.re * z.re).max(0.0).sqrt();
                        let key = if *dir > 0 { ArmKey::ColNorth(j) } else { ArmKey::ColSouth(j) };
                        let b = add_point(key, z.re, yb);
                        arms[slot] = (None, ((yb - z.im).abs() / h).min(1.0), b);
                    }
                }
                let (sp, sm) = (arms[0].1, arms[1].1);
                // -h^2 u'' = -2 [u+/(s+(s++s-)) + u-/(s-(s++s-)) - u/(s+ s-)]
                diag += 2.0 / (sp * sm);
                for (slot, s) in [(0, sp), (1, sm)] {
                    let c = 2.0 / (s * (sp + sm));
                    match arms[slot].0 {
                        Some(u) => interior.push((u, -c)),
                        None => boundary.push((arms[slot].2, c)),
                    }
                }
            }
            rows.push(Row { diag, interior, boundary });
        }
        // order boundary points by angle and renumber
        let mut order: Vec<usize> = (0..pts.len()).collect();
        let ang = |i: usize| pts[i].1.atan2(pts[i].0).rem_euclid(2.0 * PI);
        order.sort_by(|&a, &b| ang(a).total_cmp(&ang(b)));
        let mut renum = vec![0; pts.len()];
        for (new, &old) in order.iter().enumerate() {
            renum[old] = new;
        }
        for row in &mut rows {
            for e in &mut row.boundary {
                e.0 = renum[e.0];
            }
        }
        let nb = order.len();
        let angles: Vec<f64> = order.iter().map(|&i| ang(i)).collect();
        let boundary = (0..nb)
            .map(|b| {
                let prev = angles[(b + nb - 1) % nb];
                let next = angles[(b + 1) % nb];
                let gap = (next - prev).rem_euclid(2.0 * PI);
                let (x, y) = pts[order[b]];
                BoundaryNode { x, y, angle: angles[b], weight: 0.5 * r * gap }
            })
            .collect();
        let bw = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.interior.iter().map(move |&(u, _)| u.abs_diff(i)))
            .max()
            .unwrap_or(0);
        let mut lu = BandLu::new(nodes.len(), bw);
        for (i, row) in rows.iter().enumerate() {
            *lu.at(i, i) += row.diag;
            for &(u, c) in &row.interior {
                *lu.at(i, u) += c;
            }
        }
        let (lo, hi) = lu.factor();
        let pivot_ratio = hi / lo;
        if !(pivot_ratio < PIVOT_LIMIT) {
            return Err(LabError::NearSingular(format!("pivot spread {pivot_ratio:.3e}")));
        }
        Ok(DirichletSolver { grid, nodes, unknown, boundary, rows, lu, pivot_ratio })
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    fn apply(&self, u: &[C64]) -> Vec<C64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.diag * u[i] + row.interior.iter().map(|&(j, c)| u[j] * c).sum::<C64>())
            .collect()
    }

    /// Solve with Dirichlet values `g` at the boundary nodes (in `boundary`
    /// order). Returns the interior values and the relative residual.
    fn solve_unknowns(&self, g: &[C64]) -> Result<(Vec<C64>, f64)> {
        if g.len() != self.boundary.len() {
            return Err(LabError::Mismatch(format!("{} boundary values for {} nodes", g.len(), self.boundary.len())));
        }
        let rhs: Vec<C64> =
            self.rows.iter().map(|row| row.boundary.iter().map(|&(b, c)| g[b] * c).sum::<C64>()).collect();
        let bnorm = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut u = rhs.clone();
        self.lu.solve(&mut u);
        if bnorm == 0.0 {
            return Ok((u, 0.0));
        }
        let mut rel = f64::INFINITY;
        for _ in 0..3 {
            let au = self.apply(&u);
            let mut r: Vec<C64> = rhs.iter().zip(&au).map(|(a, b)| a - b).collect();
            rel = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / bnorm;
            if rel < 1e-13 {
                break;
            }
            self.lu.solve(&mut r);
            u.iter_mut().zip(&r).for_each(|(a, b)| *a += b);
        }
        if !(rel <= RESIDUAL_LIMIT) {
            return Err(LabError::NearSingular(format!("relative residual {rel:.3e} after refinement")));
        }
        Ok((u, rel))
    }

    /// Solution as a grid field (zero off the interior nodes).
    pub fn solve(&self, g: &[C64]) -> Result<Field> {
        let (u, _) = self.solve_unknowns(g)?;
        Ok(self.to_field(&u))
    }

    fn to_field(&self, u: &[C64]) -> Field {
        let mut f = Field::zeros(self.grid);
        for (i, &idx) in self.nodes.iter().enumerate() {
            f.values[idx] = u[i];
        }
        f
    }

    /// Relative residual of the discrete equation for the last solve of `g`.
    pub fn residual(&self, g: &[C64]) -> Result<f64> {
        Ok(self.solve_unknowns(g)?.1)
    }

    /// Bicubic (tensor Lagrange) interpolation of interior values.
    fn interpolate(&self, u: &[C64], x: f64, y: f64) -> C64 {
        let (h, l, n) = (self.grid.h, self.grid.half_width, self.grid.n);
        let fx = (x + l) / h;
        let fy = (y + l) / h;
        let (j0, k0) = (fx.floor() as i64, fy.floor() as i64);
        let (tx, ty) = (fx - j0 as f64, fy - k0 as f64);
        let lag = |t: f64| {
            [
                -t * (t - 1.0) * (t - 2.0) / 6.0,
                (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                -(t + 1.0) * t * (t - 2.0) / 2.0,
                (t + 1.0) * t * (t - 1.0) / 6.0,
            ]
        };
        let (wx, wy) = (lag(tx), lag(ty));
        let mut acc = C64::new(0.0, 0.0);
        for (b, wyb) in wy.iter().enumerate() {
            for (a, wxa) in wx.iter().enumerate() {
                let (j, k) = ((j0 - 1 + a as i64) as usize, (k0 - 1 + b as i64) as usize);
                let ui = self.unknown[k * n + j].expect("interpolation stencil leaves the disc");
                acc += u[ui] * (wxa * wyb);
            }
        }
        acc
    }

    /// Outward normal derivative at each boundary node: second-order one-sided
    /// difference over depth 3h, interior values interpolated bicubically.
    fn normal_derivative(&self, u: &[C64], g: &[C64]) -> Vec<C64> {
        let d = 3.0 * self.grid.h;
        let r = self.grid.omega_radius;
        self.boundary
            .iter()
            .zip(g)
            .map(|(b, gb)| {
                let (nx, ny) = (b.x / r, b.y / r);
                let u1 = self.interpolate(u, b.x - d * nx, b.y - d * ny);
                let u2 = self.interpolate(u, b.x - 2.0 * d * nx, b.y - 2.0 * d * ny);
                (gb * 3.0 - u1 * 4.0 + u2) / (2.0 * d)
            })
            .collect()
    }

    /// Lambda_q g.
    pub fn apply_dn(&self, g: &[C64]) -> Result<Vec<C64>> {
        let (u, _) = self.solve_unknowns(g)?;
        Ok(self.normal_derivative(&u, g))
    }

    /// Boundary values of a function of (x, y).
    pub fn boundary_values(&self, f: impl Fn(f64, f64) -> C64) -> Vec<C64> {
        self.boundary.iter().map(|b| f(b.x, b.y)).collect()
    }

    /// sum_b w_b a_b c_b (bilinear, no conjugation).
    pub fn boundary_form(&self, a: &[C64], c: &[C64]) -> C64 {
        self.boundary.iter().zip(a.iter().zip(c)).map(|(b, (x, y))| x * y * b.weight).sum()
    }
}

pub fn solve_dirichlet(q: &Field, g: &[C64]) -> Result<Field> {
    DirichletSolver::new(q.grid, q)?.solve(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct DnMap {
    pub n: usize,
    pub half_width: f64,
    pub omega_radius: f64,
    pub boundary_nodes: Vec<BoundaryNode>,
    /// Row-major nb x nb; column b is Lambda applied to the unit vector e_b.
    #[serde(skip)]
    pub matrix: Vec<C64>,
}

pub fn assemble_dn(q: &Field) -> Result<DnMap> {
    let solver = DirichletSolver::new(q.grid, q)?;
    assemble_with(&solver)
}

pub fn assemble_with(solver: &DirichletSolver) -> Result<DnMap> {
    let nb = solver.boundary.len();
    let cols: Vec<Vec<C64>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut e = vec![C64::new(0.0, 0.0); nb];
            e[b] = C64::new(1.0, 0.0);
            solver.apply_dn(&e)
        })
        .collect::<Result<_>>()?;
    let mut matrix = vec![C64::new(0.0, 0.0); nb * nb];
    for (b, col) in cols.iter().enumerate() {
        for (a, v) in col.iter().enumerate() {
            matrix[a * nb + b] = *v;
        }
    }
    let g = solver.grid;
    Ok(DnMap { n: g.n, half_width: g.half_width, omega_radius: g.omega_radius, boundary_nodes: solver.boundary.clone(), matrix })
}

impl DnMap {
    pub fn size(&self) -> usize {
        self.boundary_nodes.len()
    }

    pub fn apply(&self, g: &[C64]) -> Vec<C64> {
        let nb = self.size();
        (0..nb).map(|a| (0..nb).map(|b| self.matrix[a * nb + b] * g[b]).sum()).collect()
    }

    /// ||W L - (W L)^T||_F / ||W L||_F with W the arclength weights: the
    /// nodal symmetry defect of the bilinear form.
    pub fn nodal_symmetry_defect(&self) -> f64 {
        let nb = self.size();
        let w: Vec<f64> = self.boundary_nodes.iter().map(|b| b.weight).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for a in 0..nb {
            for b in 0..nb {
                let x = self.matrix[a * nb + b] * w[a];
                let y = self.matrix[b * nb + a] * w[b];
                num += (x - y).norm_sqr();
                den += x.norm_sqr();
            }
        }
        (num / den).sqrt()
    }

    /// Matrix as interleaved little-endian f64 pairs.
    pub fn matrix_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.matrix.len() * 16);
        for v in &self.matrix {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        buf
    }

    /// JSON header: grid and boundary nodes.
    pub fn header_bytes(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("DN header serializes")
    }

    pub fn write(&self, matrix_path: &Path, header_path: &Path) -> Result<()> {
        crate::io::write_atomic(matrix_path, &self.matrix_bytes())?;
        crate::io::write_atomic(header_path, &self.header_bytes())
    }
}

/// Real Fourier basis 1, cos k t, sin k t (k <= modes) at the boundary nodes.
pub fn fourier_basis(boundary: &[BoundaryNode], modes: usize) -> Vec<Vec<C64>> {
    let mut out = vec![boundary.iter().map(|_| C64::new(1.0, 0.0)).collect::<Vec<_>>()];
    for k in 1..=modes {
        out.push(boundary.iter().map(|b| C64::new((k as f64 * b.angle).cos(), 0.0)).collect());
        out.push(boundary.iter().map(|b| C64::new((k as f64 * b.angle).sin(), 0.0)).collect());
    }
    out
}

/// Symmetry defect of the Galerkin matrix G_ab = <Lambda g_a, g_b>_w over the
/// Fourier basis up to `modes`: ||G - G^T||_F / ||G||_F.
pub fn galerkin_symmetry_defect(solver: &DirichletSolver, modes: usize) -> Result<f64> {
    let basis = fourier_basis(&solver.boundary, modes);
    let images: Vec<Vec<C64>> = basis.par_iter().map(|g| solver.apply_dn(g)).collect::<Result<_>>()?;
    let m = basis.len();
    let gm: Vec<C64> = (0..m * m).map(|i| solver.boundary_form(&images[i / m], &basis[i % m])).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            num += (gm[a * m + b] - gm[b * m + a]).norm_sqr();
            den += gm[a * m + b].norm_sqr();
        }
    }
    Ok((num / den).sqrt())
}

/// Riemann sum of (q1 - q2) u1 u2 over Omega.
pub fn alessandrini_pairing(q1: &Field, q2: &Field, u1: &Field, u2: &Field) -> C64 {
    (&(q1 - q2) * &(u1 * u2)).integral(Region::Omega)
}

/// Boundary side of the pairing: -<(Lambda_1 - Lambda_2) g1, g2>_w, which by
/// Green's identity equals the integral of (q1 - q2) u1 u2.
pub fn boundary_pairing(s1: &DirichletSolver, s2: &DirichletSolver, g1: &[C64], g2: &[C64]) -> Result<C64> {
    let l1 = s1.apply_dn(g1)?;
    let l2 = s2.apply_dn(g1)?;
    let diff: Vec<C64> = l1.iter().zip(&l2).map(|(a, b)| a - b).collect();
    Ok(-s1.boundary_form(&diff, g2))
}
