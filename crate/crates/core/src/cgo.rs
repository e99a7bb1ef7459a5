//! Conjugated Schrodinger operators D_j, the contractions S_j, the seeds
//! phi_j and the Neumann series f_j = e^- + sum_m S_j^m phi_j.
//!
//! Side 1 pairs dbar_inv outside with d_inv inside; side 2 swaps them.

use crate::cauchy::CauchyOps;
use crate::conjugated::line_fit;
use crate::error::{LabError, Result};
use crate::grid::{Field, Grid, Region};
use crate::phase::{quadratic_phase, PhaseParams};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 1,
            Side::Two => 2,
        }
    }
}

/// D_1 f = -4 e^- d(e^+ dbar f); D_2 swaps d and dbar. The phases are passed
/// in so the tau = 0 limit (both phases 1) is reachable. Only compactly
/// supported input is differentiated: f is multiplied by chi, so the result
/// equals D_j f on Omega.
pub fn apply_d_with(ops: &CauchyOps, f: &Field, side: Side, em: &Field, ep: &Field) -> Field {
    let chi = ops.grid.chi();
    let cf = &chi * f;
    let (inner, outer): (&dyn Fn(&Field) -> Field, &dyn Fn(&Field) -> Field) = match side {
        Side::One => (&|g| ops.dbar(g), &|g| ops.d(g)),
        Side::Two => (&|g| ops.d(g), &|g| ops.dbar(g)),
    };
    let t = &inner(&cf) * ep;
    (&outer(&t) * em).scale(C64::new(-4.0, 0.0))
}

pub fn apply_d(ops: &CauchyOps, f: &Field, side: Side, pp: &PhaseParams) -> Result<Field> {
    let em = quadratic_phase(ops.grid, pp, -1.0)?;
    let ep = quadratic_phase(ops.grid, pp, 1.0)?;
    Ok(apply_d_with(ops, f, side, &em, &ep))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BetaChoice {
    Zero,
    /// Gaussian average of the inner Cauchy transform of q around z0.
    SmoothedCauchy { width: f64 },
}

/// Fields that do not depend on z0 or tau: q, chi and the inner transforms
/// d_inv q (side 1) and dbar_inv q (side 2).
pub struct CgoSetup<'a> {
    pub ops: &'a CauchyOps,
    pub q: Field,
    pub chi: Field,
    pub inner1: Field,
    pub inner2: Field,
}

impl<'a> CgoSetup<'a> {
    pub fn new(ops: &'a CauchyOps, q: Field) -> CgoSetup<'a> {
        let chi = ops.grid.chi();
        let inner1 = ops.d_inv(&q);
        let inner2 = ops.dbar_inv(&q);
        CgoSetup { ops, q, chi, inner1, inner2 }
    }

    pub fn grid(&self) -> Grid {
        self.ops.grid
    }

    fn inner(&self, side: Side) -> &Field {
        match side {
            Side::One => &self.inner1,
            Side::Two => &self.inner2,
        }
    }

    fn outer_inv(&self, side: Side, f: &Field) -> Field {
        match side {
            Side::One => self.ops.dbar_inv(f),
            Side::Two => self.ops.d_inv(f),
        }
    }

    fn inner_inv(&self, side: Side, f: &Field) -> Field {
        match side {
            Side::One => self.ops.d_inv(f),
            Side::Two => self.ops.dbar_inv(f),
        }
    }

    /// beta_j(z0).
    pub fn beta_value(&self, side: Side, beta: BetaChoice, z0: C64) -> C64 {
        match beta {
            BetaChoice::Zero => C64::new(0.0, 0.0),
            BetaChoice::SmoothedCauchy { width } => {
                let g = self.grid();
                let inner = self.inner(side);
                let cut = (6.0 * width).powi(2);
                let (mut acc, mut wsum) = (C64::new(0.0, 0.0), 0.0);
                for (i, v) in inner.values.iter().enumerate() {
                    let d2 = (g.node_at(i) - z0).norm_sqr();
                    if d2 < cut {
                        let w = (-d2 / (2.0 * width * width)).exp();
                        acc += v * w;
                        wsum += w;
                    }
                }
                if wsum == 0.0 {
                    // width far below h: plain point value at the nearest node
                    let idx = (0..g.len()).min_by(|&a, &b| {
                        (g.node_at(a) - z0).norm_sqr().total_cmp(&(g.node_at(b) - z0).norm_sqr())
                    });
                    return idx.map(|i| inner.values[i]).unwrap_or_default();
                }
                acc / wsum
            }
        }
    }
}

/// Phase pair for one (tau, z0).
pub struct Phases {
    pub em: Field,
    pub ep: Field,
}

impl Phases {
    pub fn new(grid: Grid, pp: &PhaseParams) -> Result<Phases> {
        Ok(Phases { em: quadratic_phase(grid, pp, -1.0)?, ep: quadratic_phase(grid, pp, 1.0)? })
    }
}

/// S_1 f = -(1/4) dbar_inv(e^- chi d_inv(e^+ q f)); S_2 swaps the inverses.
pub fn apply_s_with(setup: &CgoSetup, f: &Field, side: Side, ph: &Phases) -> Field {
    let a = &(&ph.ep * &setup.q) * f;
    let b = setup.inner_inv(side, &a);
    let c = &(&ph.em * &setup.chi) * &b;
    setup.outer_inv(side, &c).scale(C64::new(-0.25, 0.0))
}

pub fn apply_s(setup: &CgoSetup, f: &Field, side: Side, pp: &PhaseParams) -> Result<Field> {
    let ph = Phases::new(setup.grid(), pp)?;
    Ok(apply_s_with(setup, f, side, &ph))
}

/// phi_1 = (1/4) dbar_inv(e^- chi (beta - d_inv q)); phi_2 swaps the inverses.
pub fn make_varphi_with(setup: &CgoSetup, side: Side, beta_value: C64, ph: &Phases) -> Field {
    let inner = setup.inner(side);
    let g = Field {
        grid: setup.grid(),
        values: inner
            .values
            .iter()
            .zip(&setup.chi.values)
            .zip(&ph.em.values)
            .map(|((v, c), e)| e * c * (beta_value - v))
            .collect(),
    };
    setup.outer_inv(side, &g).scale(C64::new(0.25, 0.0))
}

pub fn make_varphi(setup: &CgoSetup, side: Side, pp: &PhaseParams, beta: BetaChoice) -> Result<Field> {
    let ph = Phases::new(setup.grid(), pp)?;
    Ok(make_varphi_with(setup, side, setup.beta_value(side, beta, pp.z0), &ph))
}

#[derive(Debug, Clone, Serialize)]
pub struct CgoSeries {
    pub side: Side,
    pub pp: PhaseParams,
    /// F_0 = e^-, F_1 = phi, F_{m+1} = S F_m.
    #[serde(skip)]
    pub terms: Vec<Field>,
    #[serde(skip)]
    pub f: Field,
    pub term_sup_norms: Vec<f64>,
    pub beta: C64,
    /// Empirical alpha, filled in by `fit_alpha` across a tau ladder.
    pub alpha_fitted: Option<f64>,
    /// tol was reached before m_max.
    pub converged: bool,
}

impl CgoSeries {
    /// Number of correction terms M (terms holds F_0..F_M).
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn term_csv(&self) -> String {
        let mut s = String::from("m,sup_norm\n");
        for (m, v) in self.term_sup_norms.iter().enumerate() {
            s.push_str(&format!("{m},{v:.12e}\n"));
        }
        s
    }
}

/// Iterate F_{m+1} = S F_m from F_1 = phi until ||F_m||_inf < tol or m = m_max.
pub fn build_cgo_series(
    setup: &CgoSetup,
    side: Side,
    pp: &PhaseParams,
    beta: BetaChoice,
    tol: f64,
    m_max: usize,
) -> Result<CgoSeries> {
    let ph = Phases::new(setup.grid(), pp)?;
    let beta_value = setup.beta_value(side, beta, pp.z0);
    let phi = make_varphi_with(setup, side, beta_value, &ph);
    let mut terms = vec![ph.em.clone(), phi];
    let mut norms = vec![terms[0].sup(), terms[1].sup()];
    let mut converged = norms[1] < tol;
    while !converged && terms.len() <= m_max {
        let next = apply_s_with(setup, terms.last().unwrap(), side, &ph);
        let nn = next.sup();
        if terms.len() == 2 && norms[1] > 0.0 && nn >= norms[1] {
            return Err(LabError::TauTooSmall { tau: pp.tau, ratio: nn / norms[1] });
        }
        converged = nn < tol;
        terms.push(next);
        norms.push(nn);
    }
    let mut f = Field::zeros(setup.grid());
    for t in &terms {
        f = &f + t;
    }
    Ok(CgoSeries {
        side,
        pp: *pp,
        terms,
        f,
        term_sup_norms: norms,
        beta: beta_value,
        alpha_fitted: None,
        converged,
    })
}

/// ||D_j f - q f||_{L^1(Omega)} / ||q f||_{L^1(Omega)}; absolute when q f = 0.
pub fn cgo_residual(setup: &CgoSetup, series: &CgoSeries) -> Result<f64> {
    let df = apply_d(setup.ops, &series.f, series.side, &series.pp)?;
    let qf = &setup.q * &series.f;
    let num = (&df - &qf).lp_norm(1.0, Region::Omega);
    let den = qf.lp_norm(1.0, Region::Omega);
    Ok(if den > 0.0 { num / den } else { num })
}

/// Geometric envelope ||F_m|| <= ||F_1|| (C tau^-alpha)^(m-1), fitted jointly
/// over m >= 2 and a tau ladder.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaFit {
    pub c: f64,
    pub alpha: f64,
}

impl AlphaFit {
    /// Envelope bound for term m at tau.
    pub fn bound(&self, f1: f64, m: usize, tau: f64) -> f64 {
        f1 * (self.c * tau.powf(-self.alpha)).powi(m as i32 - 1)
    }

    /// Largest observed ||F_m|| / envelope over all series and m >= 1.
    pub fn worst_slack(&self, ladder: &[CgoSeries]) -> f64 {
        let mut worst: f64 = 0.0;
        for s in ladder {
            let f1 = s.term_sup_norms[1];
            for (m, &v) in s.term_sup_norms.iter().enumerate().skip(1) {
                worst = worst.max(v / self.bound(f1, m, s.pp.tau));
            }
        }
        worst
    }
}

/// Fit ln(||F_m||/||F_1||) = (m-1)(ln C - alpha ln tau) over the ladder.
pub fn fit_alpha(ladder: &mut [CgoSeries]) -> Result<AlphaFit> {
    // normal equations in (ln C, alpha) with features (m-1, -(m-1) ln tau)
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut taus = Vec::new();
    for s in ladder.iter() {
        let f1 = s.term_sup_norms[1];
        let lt = s.pp.tau.ln();
        taus.push(s.pp.tau);
        for (m, &v) in s.term_sup_norms.iter().enumerate().skip(2) {
            if !(v > 0.0 && f1 > 0.0) {
                continue;
            }
            let k = (m - 1) as f64;
            let y = (v / f1).ln();
            let (x1, x2) = (k, -k * lt);
            a11 += x1 * x1;
            a12 += x1 * x2;
            a22 += x2 * x2;
            b1 += x1 * y;
            b2 += x2 * y;
        }
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let det = a11 * a22 - a12 * a12;
    if taus.len() < 2 || !(det.abs() > 1e-12) {
        return Err(LabError::Config("alpha fit needs at least two tau values with m >= 2 terms".into()));
    }
    let lnc = (b1 * a22 - b2 * a12) / det;
    let alpha = (a11 * b2 - a12 * b1) / det;
    for s in ladder.iter_mut() {
        s.alpha_fitted = Some(alpha);
    }
    Ok(AlphaFit { c: lnc.exp(), alpha })
}

/// Slope of ln ||F_m|| against m for one series (diagnostic ratio).
pub fn geometric_ratio(series: &CgoSeries) -> f64 {
    let pts: Vec<(f64, f64)> = series
        .term_sup_norms
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| **v > 0.0)
        .map(|(m, v)| (m as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    line_fit(&x, &y).0.exp()
}
