//! Wirtinger derivatives, the Cauchy operators and the Beurling transform.
//!
//! The kernel 1/(pi z) is applied as a zero-padded convolution on the 2n x 2n
//! frame of period P = 2nh. Its table is split into two parts:
//!
//! * the P-periodic kernel, applied exactly as the multiplier 2/(i xi)
//!   (averaged over the two sign choices on the Nyquist lines);
//! * the smooth difference between the free kernel and the periodic one,
//!   (1/pi) sum_k G_2k(P Z[i]) z^(2k-1) + conj(z)/P^2, sampled on the lattice
//!   offsets |dx|, |dy| < n and transformed.
//!
//! Only offsets inside X - X ever reach an output node, so the table is the
//! free kernel truncated to X - X with a spectrally accurate treatment of the
//! singular cell.

use crate::error::Result;
use crate::fft::{freq, offset, table, PaddedFft};
use crate::grid::{Field, Grid, Region};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const MAX_ORDER: usize = 120;

fn zeta(s: f64) -> f64 {
    let nmax = 1000usize;
    let mut acc = 0.0;
    for k in (1..=nmax).rev() {
        acc += (k as f64).powf(-s);
    }
    let nn = nmax as f64;
    acc + nn.powf(1.0 - s) / (s - 1.0) - 0.5 * nn.powf(-s) + s * nn.powf(-s - 1.0) / 12.0
}

/// Eisenstein series G_2k of the Gaussian integers, for 2k = 4, 6, ..., max_order.
/// Entry `i` is G_{2i}; entries below 4 are zero. Only 4 | 2k survives the
/// lattice symmetry under multiplication by i.
pub fn eisenstein_gaussian(max_order: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_order / 2 + 1];
    let q = (-2.0 * PI).exp();
    for k in 2..=max_order / 2 {
        let two_k = 2 * k;
        if two_k % 4 != 0 {
            continue;
        }
        out[k] = if two_k <= 24 {
            // q-expansion at tau = i
            let mut fact = 1.0;
            for i in 2..two_k {
                fact *= i as f64;
            }
            let mut s = 0.0;
            for nq in 1..60u32 {
                let sigma: f64 = (1..=nq).filter(|d| nq % d == 0).map(|d| (d as f64).powi(two_k as i32 - 1)).sum();
                s += sigma * q.powi(nq as i32);
            }
            2.0 * zeta(two_k as f64) + 2.0 * (2.0 * PI).powi(two_k as i32) / fact * s
        } else {
            // direct lattice sum; the tail beyond the box is below 60^-26
            let mut s = 0.0;
            for a in -60i32..=60 {
                for b in -60i32..=60 {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    s += C64::new(a as f64, b as f64).powi(-(two_k as i32)).re;
                }
            }
            s
        };
    }
    out
}

/// Precomputed kernel and derivative tables for one grid.
#[derive(Debug, Clone)]
pub struct CauchyOps {
    pub grid: Grid,
    pub fft: PaddedFft,
    kdb: Vec<C64>,
    kd: Vec<C64>,
    beur: Vec<C64>,
    sym_dbar: Vec<C64>,
    sym_d: Vec<C64>,
}

impl CauchyOps {
    pub fn new(grid: Grid) -> CauchyOps {
        let n = grid.n;
        let fft = PaddedFft::new(n);
        let m = fft.m;
        let h = grid.h;
        let p = m as f64 * h;
        let g = eisenstein_gaussian(MAX_ORDER);

        // smooth correction and its z-derivative, sampled on X - X
        let mut corr = vec![C64::new(0.0, 0.0); m * m];
        let mut dcorr = vec![C64::new(0.0, 0.0); m * m];
        for iy in 0..m {
            for ix in 0..m {
                if ix == n || iy == n {
                    continue;
                }
                let w = C64::new(offset(ix, m) as f64, offset(iy, m) as f64) * h;
                let u = w / p;
                let u2 = u * u;
                // Horner in u^2: sum_k G_2k u^(2k-1) and sum_k (2k-1) G_2k u^(2k-2)
                let mut s = C64::new(0.0, 0.0);
                let mut ds = C64::new(0.0, 0.0);
                for k in (2..g.len()).rev() {
                    s = s * u2 + g[k];
                    ds = ds * u2 + g[k] * (2 * k - 1) as f64;
                }
                // s currently holds sum G_2k u^(2k-4); shift to the right powers
                let s = s * u2 * u;
                let ds = ds * u2;
                corr[iy * m + ix] = (s / (PI * p) + w.conj() / (p * p)) * (h * h);
                dcorr[iy * m + ix] = ds / (PI * p * p) * (h * h);
            }
        }
        let corr_hat = fft.forward_full(corr);
        let dcorr_hat = fft.forward_full(dcorr);

        let nyq = PI / h;
        let xi = |kx: usize, ky: usize| (freq(kx, m, h), freq(ky, m, h));
        let periodic = |kx: usize, ky: usize| -> C64 {
            if kx == 0 && ky == 0 {
                return C64::new(0.0, 0.0);
            }
            let (x1, x2) = xi(kx, ky);
            let sx: &[f64] = if kx == n { &[1.0, -1.0] } else { &[1.0] };
            let sy: &[f64] = if ky == n { &[1.0, -1.0] } else { &[1.0] };
            let mut acc = C64::new(0.0, 0.0);
            for &a in sx {
                for &b in sy {
                    let e1 = if kx == n { a * nyq } else { x1 };
                    let e2 = if ky == n { b * nyq } else { x2 };
                    acc += 2.0 / (C64::i() * C64::new(e1, e2));
                }
            }
            acc / (sx.len() * sy.len()) as f64
        };
        let sym = |kx: usize, ky: usize, sgn: f64| -> C64 {
            let (mut x1, mut x2) = xi(kx, ky);
            if kx == n {
                x1 = 0.0;
            }
            if ky == n {
                x2 = 0.0;
            }
            C64::i() * C64::new(x1, sgn * x2) * 0.5
        };

        let sym_dbar = table(m, |kx, ky| sym(kx, ky, 1.0));
        let sym_d = table(m, |kx, ky| sym(kx, ky, -1.0));
        let per = table(m, periodic);
        let kdb: Vec<C64> = per.iter().zip(&corr_hat).map(|(a, b)| a + b).collect();
        // 1/(pi conj z) = conj of the first kernel, whose transform is conj(K(-xi))
        let neg = |k: usize| (m - k) % m;
        let kd = table(m, |kx, ky| kdb[neg(kx) * m + neg(ky)].conj());
        let beur: Vec<C64> =
            per.iter().zip(&sym_d).zip(&dcorr_hat).map(|((a, s), c)| a * s + c).collect();
        CauchyOps { grid, fft, kdb, kd, beur, sym_dbar, sym_d }
    }

    fn apply(&self, f: &Field, t: &[C64]) -> Field {
        assert_eq!(f.grid, self.grid, "field grid does not match operator grid");
        Field { grid: self.grid, values: self.fft.apply_multiplier(&f.values, t) }
    }

    /// Spectral (d1 + i d2)/2 of the zero-extended field.
    pub fn dbar(&self, f: &Field) -> Field {
        self.apply(f, &self.sym_dbar)
    }

    /// Spectral (d1 - i d2)/2 of the zero-extended field.
    pub fn d(&self, f: &Field) -> Field {
        self.apply(f, &self.sym_d)
    }

    /// Convolution with 1/(pi z).
    pub fn dbar_inv(&self, f: &Field) -> Field {
        self.apply(f, &self.kdb)
    }

    /// Convolution with 1/(pi conj z).
    pub fn d_inv(&self, f: &Field) -> Field {
        self.apply(f, &self.kd)
    }

    /// d o dbar_inv, composed at the level of the kernel table.
    pub fn beurling(&self, f: &Field) -> Field {
        self.apply(f, &self.beur)
    }

    /// ||f||_p + ||d f||_p + ||dbar f||_p over X.
    pub fn w1p_norm(&self, f: &Field, p: f64) -> f64 {
        f.lp_norm(p, Region::X) + self.d(f).lp_norm(p, Region::X) + self.dbar(f).lp_norm(p, Region::X)
    }

    /// W^{1,p}(X) norm of dbar_inv f, using dbar dbar_inv f = f and
    /// d dbar_inv f = Beurling f so no derivative sees the frame edge.
    pub fn cauchy_w1p_norm(&self, f: &Field, p: f64) -> f64 {
        self.dbar_inv(f).lp_norm(p, Region::X) + f.lp_norm(p, Region::X) + self.beurling(f).lp_norm(p, Region::X)
    }
}

/// Outcome of the L^p -> W^{1,p} boundedness probe.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundedMapReport {
    pub p: f64,
    pub n: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Max ratio ||dbar_inv f||_{W^{1,p}} / ||f||_p over the given fields; zero
/// fields are skipped.
pub fn bounded_map_check(ops: &CauchyOps, p: f64, fields: &[Field]) -> Result<BoundedMapReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(crate::error::LabError::Hypothesis(format!("need 1 < p < inf, got {p}")));
    }
    let ratios: Vec<f64> = fields
        .iter()
        .filter_map(|f| {
            let den = f.lp_norm(p, Region::X);
            (den > 0.0).then(|| ops.cauchy_w1p_norm(f, p) / den)
        })
        .collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(BoundedMapReport { p, n: ops.grid.n, ratios, max_ratio })
}
