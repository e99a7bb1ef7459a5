//! The stationary phase operator Ef(z0) = (2 tau/pi) int e^{-i tau (Phi + conj Phi)} f dm
//! as the Fourier multiplier exp(i (xi_1^2 - xi_2^2)/(8 tau)).

use crate::conjugated::DecayReport;
use crate::error::{LabError, Result};
use crate::fft::{freq, table, PaddedFft};
use crate::grid::{Field, Grid};
use num_complex::Complex64 as C64;

pub struct ChirpMultiplier {
    pub grid: Grid,
    pub tau: f64,
    pub values: Vec<C64>,
    fft: PaddedFft,
}

impl ChirpMultiplier {
    /// Negative tau gives the inverse (adjoint) operator.
    pub fn new(grid: Grid, tau: f64) -> Result<ChirpMultiplier> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(LabError::Config(format!("stationary phase needs a finite nonzero tau, got {tau}")));
        }
        let fft = PaddedFft::new(grid.n);
        let m = fft.m;
        let values = table(m, |kx, ky| {
            let (x1, x2) = (freq(kx, m, grid.h), freq(ky, m, grid.h));
            C64::from_polar(1.0, (x1 * x1 - x2 * x2) / (8.0 * tau))
        });
        Ok(ChirpMultiplier { grid, tau, values, fft })
    }

    /// E on the zero-extended field, cropped back to X.
    pub fn apply(&self, f: &Field) -> Field {
        assert_eq!(f.grid, self.grid, "field grid does not match multiplier grid");
        Field { grid: self.grid, values: self.fft.apply_multiplier(&f.values, &self.values) }
    }

    /// E on a periodic field given on the whole 2n x 2n frame (row-major).
    pub fn apply_periodic(&self, f: Vec<C64>) -> Vec<C64> {
        let mut t = self.fft.forward_full(f);
        t.iter_mut().zip(&self.values).for_each(|(a, b)| *a *= b);
        self.fft.inverse_full(t)
    }
}

pub fn apply_e(f: &Field, tau: f64) -> Result<Field> {
    Ok(ChirpMultiplier::new(f.grid, tau)?.apply(f))
}

/// ||E f - f||_2 across the ladder; predicted exponent -1 for smooth f.
pub fn convergence_e(f: &Field, taus: &[f64]) -> Result<DecayReport> {
    let norms = taus.iter().map(|&t| Ok((&apply_e(f, t)? - f).l2())).collect::<Result<Vec<f64>>>()?;
    DecayReport::new(taus, norms, -1.0)
}
