//! Term-by-term Alessandrini expansion with CGO solutions and stationary
//! phase recovery of q1 - q2.
//!
//! With u1 = e^{i tau Phi} f1 (side 1, q1) and u2 = e^{i tau conj Phi} f2
//! (side 2, q2), (2 tau/pi) int (q1 - q2) u1 u2 splits into the terms
//! (2 tau/pi) int (q1 - q2) e^+ F_{1,k} F_{2,l}. The (0,0) term is E(q1 - q2)(z0).

use crate::cauchy::CauchyOps;
use crate::cgo::{build_cgo_series, BetaChoice, CgoSeries, CgoSetup, Side};
use crate::conjugated::DecayReport;
use crate::error::{LabError, Result};
use crate::grid::{Field, Grid, Region};
use crate::phase::{quadratic_phase, PhaseParams};
use crate::stationary::apply_e;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// (2 tau/pi) int_Omega dq e^+ F_{1,k} F_{2,l}.
pub fn term_integral(k: usize, l: usize, s1: &CgoSeries, s2: &CgoSeries, dq: &Field) -> Result<C64> {
    let max = s1.order().min(s2.order());
    if k > s1.order() || l > s2.order() {
        return Err(LabError::OrderOutOfRange { k, l, max });
    }
    let pp = s1.pp;
    let ep = quadratic_phase(dq.grid, &pp, 1.0)?;
    let w = &(dq * &ep) * &s1.terms[k];
    Ok((&w * &s2.terms[l]).integral(Region::Omega) * (2.0 * pp.tau / PI))
}

/// All terms with k, l <= order, from one pair of series.
fn term_matrix(s1: &CgoSeries, s2: &CgoSeries, dq: &Field) -> Result<Vec<Vec<C64>>> {
    let ep = quadratic_phase(dq.grid, &s1.pp, 1.0)?;
    let scale = 2.0 * s1.pp.tau / PI;
    let base = dq * &ep;
    let mask = dq.grid.region_mask(Region::Omega);
    let da = dq.grid.cell_area();
    Ok(s1
        .terms
        .iter()
        .map(|f1| {
            let w = &base * f1;
            s2.terms
                .iter()
                .map(|f2| {
                    let s: C64 =
                        w.values.iter().zip(&f2.values).zip(&mask).filter(|(_, &m)| m).map(|((a, b), _)| a * b).sum();
                    s * (da * scale)
                })
                .collect()
        })
        .collect())
}

/// The two potentials with their z0-independent caches.
pub struct PotentialPair<'a> {
    pub side1: CgoSetup<'a>,
    pub side2: CgoSetup<'a>,
    pub dq: Field,
    /// ||q1 - q2||_{L^1(Omega)}.
    pub dq_l1: f64,
}

impl<'a> PotentialPair<'a> {
    pub fn new(ops: &'a CauchyOps, q1: Field, q2: Field) -> PotentialPair<'a> {
        let dq = &q1 - &q2;
        let dq_l1 = dq.lp_norm(1.0, Region::Omega);
        PotentialPair { side1: CgoSetup::new(ops, q1), side2: CgoSetup::new(ops, q2), dq, dq_l1 }
    }

    pub fn grid(&self) -> Grid {
        self.side1.grid()
    }

    /// Both series to order `k_max` at (tau, z0).
    pub fn series(&self, pp: &PhaseParams, beta: BetaChoice, k_max: usize) -> Result<(CgoSeries, CgoSeries)> {
        let s1 = build_cgo_series(&self.side1, Side::One, pp, beta, 0.0, k_max)?;
        let s2 = build_cgo_series(&self.side2, Side::Two, pp, beta, 0.0, k_max)?;
        Ok((s1, s2))
    }
}

/// Stride-`stride` subgrid of Omega nodes, aligned so the origin is included.
pub fn z0_samples(grid: Grid, stride: usize) -> Vec<(usize, usize)> {
    let c = grid.n / 2;
    let mut out = Vec::new();
    for k in 0..grid.n {
        for j in 0..grid.n {
            if (j as i64 - c as i64).rem_euclid(stride as i64) == 0
                && (k as i64 - c as i64).rem_euclid(stride as i64) == 0
                && grid.node(j, k).norm() <= grid.omega_radius
            {
                out.push((j, k));
            }
        }
    }
    out
}

/// Per-z0 outcome at one tau.
#[derive(Debug, Clone, Serialize)]
pub struct Z0Terms {
    pub node: (usize, usize),
    pub z0: C64,
    /// terms[k][l], k, l <= K.
    pub terms: Vec<Vec<C64>>,
    pub norms1: Vec<f64>,
    pub norms2: Vec<f64>,
}

impl Z0Terms {
    /// Sum of the terms with k + l = m.
    pub fn order_sum(&self, m: usize) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (k, row) in self.terms.iter().enumerate() {
            if m >= k && m - k < row.len() {
                s += row[m - k];
            }
        }
        s
    }

    /// Geometric envelope bound for order m: (2 tau/pi) ||dq||_1 sum_{k+l=m} E1_k E2_l,
    /// E_j fitted to ||F_{j,m}||, m >= 1, as A r^m.
    pub fn envelope(&self, m: usize, tau: f64, dq_l1: f64) -> f64 {
        let e1 = geometric_envelope(&self.norms1);
        let e2 = geometric_envelope(&self.norms2);
        let mut s = 0.0;
        for k in 0..=m {
            if k < e1.len() && m - k < e2.len() {
                s += e1[k] * e2[m - k];
            }
        }
        2.0 * tau / PI * dq_l1 * s
    }
}

/// A r^m fitted to norms[1..] by least squares in the log; norms[0] is kept.
pub fn geometric_envelope(norms: &[f64]) -> Vec<f64> {
    let pts: Vec<(f64, f64)> =
        norms.iter().enumerate().skip(1).filter(|(_, v)| **v > 0.0).map(|(m, v)| (m as f64, v.ln())).collect();
    if pts.len() < 2 {
        return norms.to_vec();
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, intercept, _) = crate::conjugated::line_fit(&x, &y);
    norms.iter().enumerate().map(|(m, v)| if m == 0 { *v } else { (intercept + slope * m as f64).exp() }).collect()
}

/// Everything computed at one (tau, beta) over the z0 samples.
#[derive(Debug, Clone, Serialize)]
pub struct TauRun {
    pub tau: f64,
    pub beta: BetaChoice,
    pub k_max: usize,
    pub samples: Vec<Z0Terms>,
}

pub fn run_tau(pair: &PotentialPair, nodes: &[(usize, usize)], tau: f64, beta: BetaChoice, k_max: usize) -> Result<TauRun> {
    let g = pair.grid();
    let samples = nodes
        .par_iter()
        .map(|&(j, k)| {
            let z0 = g.node(j, k);
            let pp = PhaseParams::new(tau, z0)?;
            let (s1, s2) = pair.series(&pp, beta, k_max)?;
            let terms = term_matrix(&s1, &s2, &pair.dq)?;
            Ok(Z0Terms { node: (j, k), z0, terms, norms1: s1.term_sup_norms, norms2: s2.term_sup_norms })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TauRun { tau, beta, k_max, samples })
}

impl TauRun {
    /// z0-grid L^2 norm of the order-m sums (cell = stride^2 h^2 is a common
    /// factor and cancels in every ratio; it is kept for units).
    pub fn order_norm(&self, m: usize, cell: f64) -> f64 {
        (self.samples.iter().map(|s| s.order_sum(m).norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    /// Largest |order-m sum| / envelope over z0.
    pub fn envelope_slack(&self, m: usize, dq_l1: f64) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                let e = s.envelope(m, self.tau, dq_l1);
                if e > 0.0 {
                    s.order_sum(m).norm() / e
                } else if s.order_sum(m).norm() == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// Order <= 1 partial sums (the reconstruction) and order >= 2 remainder.
    pub fn recovery(&self, dq: &Field) -> Recovery {
        let values: Vec<(C64, C64, C64)> = self
            .samples
            .iter()
            .map(|s| {
                let rec = s.order_sum(0) + s.order_sum(1);
                let rem: C64 = (2..=self.k_max).map(|m| s.order_sum(m)).sum();
                (rec, rem, dq.at(s.node.0, s.node.1))
            })
            .collect();
        Recovery { tau: self.tau, z0: self.samples.iter().map(|s| s.z0).collect(), values }
    }

    pub fn table_csv(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            for (k, row) in s.terms.iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    if k + l <= self.k_max {
                        out.push_str(&format!(
                            "{k},{l},{},{:.10},{:.10},{:.12e},{:.12e}\n",
                            self.tau, s.z0.re, s.z0.im, v.re, v.im
                        ));
                    }
                }
            }
        }
        out
    }
}

pub const TERM_CSV_HEADER: &str = "k,l,tau,z0_re,z0_im,value_re,value_im\n";

#[derive(Debug, Clone, Serialize)]
pub struct Recovery {
    pub tau: f64,
    pub z0: Vec<C64>,
    /// (order <= 1 reconstruction, order >= 2 remainder, true dq) per z0.
    pub values: Vec<(C64, C64, C64)>,
}

impl Recovery {
    fn rel(&self, f: impl Fn(&(C64, C64, C64)) -> C64) -> f64 {
        let num: f64 = self.values.iter().map(|v| f(v).norm_sqr()).sum();
        let den: f64 = self.values.iter().map(|v| v.2.norm_sqr()).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// ||rec - dq|| / ||dq|| on the z0 grid.
    pub fn error(&self) -> f64 {
        self.rel(|v| v.0 - v.2)
    }

    /// ||remainder|| / ||dq||.
    pub fn remainder(&self) -> f64 {
        self.rel(|v| v.1)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("z0_re,z0_im,rec_re,rec_im,rem_re,rem_im,dq_re,dq_im\n");
        for (z, (a, b, c)) in self.z0.iter().zip(&self.values) {
            s.push_str(&format!(
                "{:.10},{:.10},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                z.re, z.im, a.re, a.im, b.re, b.im, c.re, c.im
            ));
        }
        s
    }
}

/// Decay of the order-m z0-L^2 norms across a tau ladder.
#[derive(Debug, Clone, Serialize)]
pub struct OrderDecay {
    pub order: usize,
    pub report: DecayReport,
    /// Worst |order sum| / envelope over tau and z0 (orders >= 3).
    pub envelope_slack: f64,
}

/// Per-order decay over runs at increasing tau. The order-2 prediction is
/// 1/p - 3/4; higher orders use -(m - 2) alpha when `alpha` is given.
pub fn decay_table(runs: &[TauRun], p: f64, alpha: Option<f64>, dq_l1: f64, cell: f64) -> Result<Vec<OrderDecay>> {
    let taus: Vec<f64> = runs.iter().map(|r| r.tau).collect();
    let k_max = runs.iter().map(|r| r.k_max).min().unwrap_or(0);
    (0..=k_max)
        .map(|m| {
            let norms = runs.iter().map(|r| r.order_norm(m, cell)).collect();
            let predicted = match m {
                0 => 0.0,
                1 => f64::NAN,
                2 => 1.0 / p - 0.75,
                _ => alpha.map(|a| -(m as f64 - 2.0) * a).unwrap_or(f64::NAN),
            };
            let slack = if m >= 3 { runs.iter().map(|r| r.envelope_slack(m, dq_l1)).fold(0.0, f64::max) } else { 0.0 };
            Ok(OrderDecay { order: m, report: DecayReport::new(&taus, norms, predicted)?, envelope_slack: slack })
        })
        .collect()
}

/// Reconstruction of q1 - q2 on the z0 grid at one tau.
pub fn recover_difference(pair: &PotentialPair, stride: usize, tau: f64, beta: BetaChoice, k_max: usize) -> Result<Recovery> {
    let nodes = z0_samples(pair.grid(), stride);
    Ok(run_tau(pair, &nodes, tau, beta, k_max)?.recovery(&pair.dq))
}

/// ||E q - q||_2 / ||q||_2 across the ladder: both series cut at order zero.
pub fn recover_single(q: &Field, taus: &[f64]) -> Result<DecayReport> {
    let nq = q.l2();
    let norms = taus
        .iter()
        .map(|&t| {
            let d = (&apply_e(q, t)? - q).l2();
            Ok(if nq > 0.0 { d / nq } else { d })
        })
        .collect::<Result<Vec<f64>>>()?;
    DecayReport::new(taus, norms, f64::NAN)
}

/// (2 tau/pi) int (q1 - q2) u1 u2 from the assembled CGO solutions.
pub fn pairing_from_series(s1: &CgoSeries, s2: &CgoSeries, dq: &Field) -> Result<C64> {
    let ep = quadratic_phase(dq.grid, &s1.pp, 1.0)?;
    Ok((&(dq * &ep) * &(&s1.f * &s2.f)).integral(Region::Omega) * (2.0 * s1.pp.tau / PI))
}
