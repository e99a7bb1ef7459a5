//! The conjugated Cauchy operator T a = dbar_inv(e^- a), its integration by
//! parts split around z0, and measured decay rates in tau.

use crate::cauchy::CauchyOps;
use crate::error::{LabError, Result};
use crate::grid::{Field, Region};
use crate::phase::{bump_tau, h_dbar, h_function, quadratic_phase, HVariant, PhaseParams};
use num_complex::Complex64 as C64;
use serde::Serialize;

/// Least-squares line through (ln x, ln y): (slope, intercept, rms residual).
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    line_fit(&lx, &ly)
}

/// Least-squares line y = slope x + intercept with rms residual.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub parameter_values: Vec<f64>,
    pub norm_samples: Vec<f64>,
    pub fitted_exponent: f64,
    pub fit_residual: f64,
    pub predicted_exponent: f64,
    /// All samples were zero; no exponent can be fitted.
    pub degenerate: bool,
}

/// Slower-than-predicted decay beyond this is a failure.
pub const EXPONENT_SLACK: f64 = 0.1;

impl DecayReport {
    pub fn new(taus: &[f64], norms: Vec<f64>, predicted: f64) -> Result<DecayReport> {
        if taus.len() < 2 || taus.windows(2).any(|w| w[1] <= w[0]) || taus[0] <= 1.0 {
            return Err(LabError::Config("tau ladder must be strictly increasing, > 1, length >= 2".into()));
        }
        let degenerate = norms.iter().all(|&v| v == 0.0);
        let (fitted, resid) = if degenerate || norms.iter().any(|&v| !(v > 0.0)) {
            (f64::NAN, f64::NAN)
        } else {
            let (s, _, r) = loglog_fit(taus, &norms);
            (s, r)
        };
        Ok(DecayReport {
            parameter_values: taus.to_vec(),
            norm_samples: norms,
            fitted_exponent: fitted,
            fit_residual: resid,
            predicted_exponent: predicted,
            degenerate,
        })
    }

    pub fn passes(&self) -> bool {
        self.passes_with(EXPONENT_SLACK)
    }

    pub fn passes_with(&self, slack: f64) -> bool {
        !self.degenerate && self.fitted_exponent <= self.predicted_exponent + slack
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.norm_samples.windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,norm\n");
        for (t, v) in self.parameter_values.iter().zip(&self.norm_samples) {
            s.push_str(&format!("{t},{v:.12e}\n"));
        }
        s
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "fitted_exponent": self.fitted_exponent,
            "predicted_exponent": self.predicted_exponent,
            "residual": self.fit_residual,
            "degenerate": self.degenerate,
            "pass": self.passes(),
        })
    }
}

/// T a = dbar_inv(e^{-i tau (Phi + conj Phi)} a).
pub fn apply_t(ops: &CauchyOps, a: &Field, pp: &PhaseParams) -> Result<Field> {
    let em = quadratic_phase(ops.grid, pp, -1.0)?;
    Ok(ops.dbar_inv(&(&em * a)))
}

/// Relative L^2(X) gap between T a and the integration by parts form
/// dbar_inv(e^- psi_tau a) - (e^- h a - dbar_inv(e^- dbar(h) a) - dbar_inv(e^- h dbar a))/(2 i tau).
pub fn ibp_residual(ops: &CauchyOps, a: &Field, pp: &PhaseParams) -> Result<f64> {
    let g = ops.grid;
    let em = quadratic_phase(g, pp, -1.0)?;
    let psi = bump_tau(g, pp)?;
    let h = h_function(g, pp, HVariant::Conj)?;
    let dh = h_dbar(g, pp, HVariant::Conj)?;
    let da = ops.dbar(a);
    let ema = &em * a;
    let lhs = ops.dbar_inv(&ema);
    let near = ops.dbar_inv(&(&psi * &ema));
    let boundary = &h * &ema;
    let t1 = ops.dbar_inv(&(&dh * &ema));
    let t2 = ops.dbar_inv(&(&(&em * &h) * &da));
    let far = (&(&boundary - &t1) - &t2).scale(C64::new(0.0, -0.5 / pp.tau));
    let rhs = &near - &far;
    let den = lhs.l2();
    if den == 0.0 {
        return Ok((&rhs - &lhs).l2());
    }
    Ok((&rhs - &lhs).l2() / den)
}

/// ||T a||_{L^inf(X)} across the tau ladder, predicted exponent -1/p*.
pub fn measure_t_decay_inf(ops: &CauchyOps, a: &Field, p_star: f64, z0: C64, taus: &[f64]) -> Result<DecayReport> {
    if !(p_star > 2.0) {
        return Err(LabError::Hypothesis(format!("need p* > 2, got {p_star}")));
    }
    let norms = taus
        .iter()
        .map(|&t| Ok(apply_t(ops, a, &PhaseParams::new(t, z0)?)?.lp_norm(f64::INFINITY, Region::X)))
        .collect::<Result<Vec<f64>>>()?;
    DecayReport::new(taus, norms, -1.0 / p_star)
}

/// ||T a||_{L^p*(X)} across the tau ladder, predicted exponent 1/q - 1 - 1/p*.
pub fn measure_t_decay_lp(ops: &CauchyOps, a: &Field, p_star: f64, q: f64, z0: C64, taus: &[f64]) -> Result<DecayReport> {
    if !(p_star > 2.0 && p_star.is_finite()) || !(1.0 / q > 0.5 && 1.0 / q <= 0.5 + 1.0 / p_star + 1e-12) {
        return Err(LabError::Hypothesis(format!("need 2 < p* < inf and 1/2 < 1/q <= 1/2 + 1/p*, got p*={p_star}, q={q}")));
    }
    let norms = taus
        .iter()
        .map(|&t| Ok(apply_t(ops, a, &PhaseParams::new(t, z0)?)?.lp_norm(p_star, Region::X)))
        .collect::<Result<Vec<f64>>>()?;
    DecayReport::new(taus, norms, 1.0 / q - 1.0 - 1.0 / p_star)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.7)).collect();
        let (s, c, r) = loglog_fit(&xs, &ys);
        assert!((s + 0.7).abs() < 1e-12 && (c - 3f64.ln()).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn report_flags_degenerate_and_bad_ladders() {
        let r = DecayReport::new(&[2.0, 4.0], vec![0.0, 0.0], -0.25).unwrap();
        assert!(r.degenerate && !r.passes());
        assert!(DecayReport::new(&[4.0, 2.0], vec![1.0, 1.0], 0.0).is_err());
        assert!(DecayReport::new(&[1.0, 2.0], vec![1.0, 1.0], 0.0).is_err());
    }
}
