//! Zero-padded 2-D transforms on the 2n x 2n frame.
//!
//! Spectra are kept in column-major ("transposed") layout: entry
//! `kx * m + ky` holds the coefficient of frequency (xi_1[kx], xi_2[ky]).
//! That saves one transpose per transform, and every multiplier table
//! in the crate uses the same layout.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

const BLOCK: usize = 32;

/// Copies the `rows x cols` block of `src` (row stride `ss`) transposed into
/// `dst` (row stride `ds`).
fn transpose(src: &[C64], rows: usize, cols: usize, ss: usize, dst: &mut [C64], ds: usize) {
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * ds + r] = src[r * ss + c];
                }
            }
        }
    }
}

#[derive(Clone)]
pub struct PaddedFft {
    pub n: usize,
    pub m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PaddedFft {{ n: {}, m: {} }}", self.n, self.m)
    }
}

impl PaddedFft {
    pub fn new(n: usize) -> PaddedFft {
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        PaddedFft { n, m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [C64]) {
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
    }

    /// Transform of the n x n row-major array `f` embedded in the top-left
    /// corner of the zero frame.
    pub fn forward_padded(&self, f: &[C64]) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        debug_assert_eq!(f.len(), n * n);
        let mut rows = vec![C64::new(0.0, 0.0); n * m];
        for k in 0..n {
            rows[k * m..k * m + n].copy_from_slice(&f[k * n..(k + 1) * n]);
        }
        self.run(&self.fwd, &mut rows);
        let mut t = vec![C64::new(0.0, 0.0); m * m];
        transpose(&rows, n, m, m, &mut t, m);
        self.run(&self.fwd, &mut t);
        t
    }

    /// Transform of a full m x m row-major array.
    pub fn forward_full(&self, mut a: Vec<C64>) -> Vec<C64> {
        let m = self.m;
        debug_assert_eq!(a.len(), m * m);
        self.run(&self.fwd, &mut a);
        let mut t = vec![C64::new(0.0, 0.0); m * m];
        transpose(&a, m, m, m, &mut t, m);
        self.run(&self.fwd, &mut t);
        t
    }

    /// Inverse transform, keeping only the top-left n x n block (row-major).
    pub fn inverse_cropped(&self, mut t: Vec<C64>) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        self.run(&self.inv, &mut t);
        // t[kx*m + y]; keep y < n
        let mut rows = vec![C64::new(0.0, 0.0); n * m];
        transpose(&t, m, n, m, &mut rows, m);
        self.run(&self.inv, &mut rows);
        let s = 1.0 / (m * m) as f64;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            for j in 0..n {
                out[k * n + j] = rows[k * m + j] * s;
            }
        }
        out
    }

    /// Inverse transform of the whole frame (row-major m x m).
    pub fn inverse_full(&self, mut t: Vec<C64>) -> Vec<C64> {
        let m = self.m;
        self.run(&self.inv, &mut t);
        let mut rows = vec![C64::new(0.0, 0.0); m * m];
        transpose(&t, m, m, m, &mut rows, m);
        self.run(&self.inv, &mut rows);
        let s = 1.0 / (m * m) as f64;
        rows.iter_mut().for_each(|v| *v *= s);
        rows
    }

    /// `crop(IFFT(mult * FFT(pad f)))`.
    pub fn apply_multiplier(&self, f: &[C64], mult: &[C64]) -> Vec<C64> {
        let mut t = self.forward_padded(f);
        t.iter_mut().zip(mult).for_each(|(a, b)| *a *= b);
        self.inverse_cropped(t)
    }
}

/// Angular frequency of DFT index `idx` on an m-point lattice of spacing h.
/// The Nyquist index m/2 maps to -pi/h.
#[inline]
pub fn freq(idx: usize, m: usize, h: f64) -> f64 {
    let s = if idx < m / 2 { idx as f64 } else { idx as f64 - m as f64 };
    2.0 * PI * s / (m as f64 * h)
}

/// Signed lattice offset (in cells) of frame index `idx`.
#[inline]
pub fn offset(idx: usize, m: usize) -> i64 {
    if idx < m / 2 {
        idx as i64
    } else {
        idx as i64 - m as i64
    }
}

/// Multiplier table in spectral layout from a symbol sigma(kx, ky).
pub fn table(m: usize, sigma: impl Fn(usize, usize) -> C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(m * m);
    for kx in 0..m {
        for ky in 0..m {
            out.push(sigma(kx, ky));
        }
    }
    out
}
