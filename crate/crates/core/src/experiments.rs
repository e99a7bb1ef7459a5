//! Verification pipelines. Each check runs under its own time budget and
//! returns a verdict plus the data tables it produced; the CLI writes them out
//! and the acceptance gate reads the verdicts.

use crate::cauchy::CauchyOps;
use crate::cgo::{build_cgo_series, cgo_residual, fit_alpha, AlphaFit, BetaChoice, CgoSeries, CgoSetup, Side};
use crate::config::ExperimentConfig;
use crate::conjugated::{ibp_residual, loglog_fit, measure_t_decay_inf, measure_t_decay_lp, DecayReport};
use crate::error::Result;
use crate::forward_dn::{alessandrini_pairing, assemble_with, boundary_pairing, galerkin_symmetry_defect, DirichletSolver};
use crate::grid::{Field, Grid, Region};
use crate::phase::{bump_grad_lp_norm, bump_lp_norm, h_grad_lp_norm, h_lp_norm, inverse_power_norm_check, PhaseParams};
use crate::presets::{random_bounded_field, random_smooth_field};
use crate::reconstruct::{decay_table, recover_single, run_tau, z0_samples, PotentialPair, TauRun, TERM_CSV_HEADER};
use crate::stationary::{convergence_e, ChirpMultiplier};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub criterion: u32,
    pub name: String,
    /// All numerical checks held.
    pub checks_pass: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub pass: bool,
    pub metrics: Value,
}

/// A named output file.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, s: String) -> Artifact {
        Artifact { name: name.into(), bytes: s.into_bytes() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub verdicts: Vec<Verdict>,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn extend(&mut self, other: Report) {
        self.verdicts.extend(other.verdicts);
        self.artifacts.extend(other.artifacts);
    }

    pub fn verdict_json(&self) -> Value {
        json!({ "pass": self.passed(), "verdicts": self.verdicts })
    }
}

/// Outcome of one pipeline body: pass flag, metrics, files.
type Outcome = (bool, Value, Vec<Artifact>);

fn timed(criterion: u32, name: &str, budget: f64, body: impl FnOnce() -> Result<Outcome>) -> Report {
    let start = Instant::now();
    let (checks_pass, metrics, artifacts) = match body() {
        Ok(o) => o,
        Err(e) => (false, json!({ "error": e.to_string() }), Vec::new()),
    };
    let seconds = start.elapsed().as_secs_f64();
    let pass = checks_pass && seconds < budget;
    Report {
        verdicts: vec![Verdict { criterion, name: name.into(), checks_pass, seconds, budget_seconds: budget, pass, metrics }],
        artifacts,
    }
}

fn c(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

fn rng(cfg: &ExperimentConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(stream);
    r
}

fn report_json(r: &DecayReport) -> Value {
    json!({
        "taus": r.parameter_values,
        "norms": r.norm_samples,
        "fitted": r.fitted_exponent,
        "predicted": r.predicted_exponent,
        "residual": r.fit_residual,
    })
}

/// Closed-form L^p norm of z^-a off the disc of radius tau^-1/2.
pub fn appendix_lattice(cfg: &ExperimentConfig) -> Report {
    let a = &cfg.appendix;
    timed(1, "closed-form inverse-power norms", a.budget_lattice_seconds, || {
        let mut csv = String::from("a,p,tau,numeric,closed,rel_err\n");
        let mut worst: f64 = 0.0;
        for &x in &a.a_values {
            for &p in &a.p_values {
                for &t in &a.taus {
                    let (num, closed) = inverse_power_norm_check(x, p, t)?;
                    let rel = (num - closed).abs() / closed;
                    worst = worst.max(rel);
                    csv.push_str(&format!("{x},{p},{t},{num:.15e},{closed:.15e},{rel:.3e}\n"));
                }
            }
        }
        Ok((worst <= a.rel_tol, json!({ "worst_rel_err": worst, "tol": a.rel_tol }), vec![Artifact::text("appendix_lattice.csv", csv)]))
    })
}

/// Fitted tau exponents of the bump and h norm families.
pub fn appendix_scaling(cfg: &ExperimentConfig) -> Report {
    let a = &cfg.appendix;
    timed(2, "bump and h scaling exponents", a.budget_scaling_seconds, || {
        let taus = &a.scaling_taus;
        let mut csv = String::from("family,p,tau,norm\n");
        let mut fits = Vec::new();
        let mut ok = true;
        let mut fit = |family: &str, p: f64, predicted: f64, f: &dyn Fn(f64) -> f64| {
            let norms: Vec<f64> = taus.iter().map(|&t| f(t)).collect();
            for (t, v) in taus.iter().zip(&norms) {
                csv.push_str(&format!("{family},{p},{t},{v:.15e}\n"));
            }
            let (s, _, _) = loglog_fit(taus, &norms);
            ok &= (s - predicted).abs() <= a.exponent_tol;
            fits.push(json!({ "family": family, "p": p, "fitted": s, "predicted": predicted }));
        };
        for &p in &a.bump_ps {
            fit("bump", p, -1.0 / p, &|t| bump_lp_norm(t, p));
            fit("bump_grad", p, 0.5 - 1.0 / p, &|t| bump_grad_lp_norm(t, p, a.direction));
        }
        for &p in &a.h_ps {
            fit("h", p, 0.5 - 1.0 / p, &|t| h_lp_norm(t, p));
        }
        for &p in &a.h_grad_ps {
            fit("h_grad", p, 1.0 - 1.0 / p, &|t| h_grad_lp_norm(t, p, a.direction));
        }
        Ok((ok, json!({ "fits": fits, "tol": a.exponent_tol }), vec![Artifact::text("appendix_scaling.csv", csv)]))
    })
}

/// Disc closed form and left-inverse identities of the Cauchy operators.
pub fn cauchy_checks(cfg: &ExperimentConfig) -> Report {
    let cc = &cfg.cauchy;
    timed(3, "Cauchy transform", cc.budget_seconds, || {
        let g = cfg.grid.build()?;
        let ops = CauchyOps::new(g);
        let rho = cc.disc_radius;
        let disc = Field::from_fn(g, |z| C64::new(if z.norm() < rho { 1.0 } else { 0.0 }, 0.0));
        let u = ops.dbar_inv(&disc);
        let mut disc_err: f64 = 0.0;
        for i in 0..g.len() {
            let z = g.node_at(i);
            if (z.norm() - rho).abs() > cc.edge_gap {
                let exact = if z.norm() <= rho { z.conj() } else { rho * rho / z };
                disc_err = disc_err.max((u.values[i] - exact).norm());
            }
        }
        let chi = g.chi();
        let mut r = rng(cfg, 3);
        let mut left: f64 = 0.0;
        let mut csv = String::from("field,operator,rel_err\n");
        for i in 0..cc.fields {
            let f = random_smooth_field(g, &mut r, g.omega_radius);
            let nf = f.l2();
            let e1 = (&ops.dbar(&(&chi * &ops.dbar_inv(&f))) - &f).lp_norm(2.0, Region::Omega) / nf;
            let e2 = (&ops.d(&(&chi * &ops.d_inv(&f))) - &f).lp_norm(2.0, Region::Omega) / nf;
            csv.push_str(&format!("{i},dbar,{e1:.6e}\n{i},d,{e2:.6e}\n"));
            left = left.max(e1).max(e2);
        }
        let ok = disc_err <= 5.0 * g.h && left <= cc.left_inverse_tol;
        let m = json!({ "disc_max_err": disc_err, "disc_limit": 5.0 * g.h, "left_inverse": left, "left_inverse_tol": cc.left_inverse_tol });
        Ok((ok, m, vec![Artifact::text("cauchy_left_inverse.csv", csv)]))
    })
}

fn gaussian_bump(g: Grid) -> Field {
    &Field::from_fn(g, |z| C64::new((-z.norm_sqr() / 0.05).exp(), 0.0)) * &g.chi()
}

/// Integration-by-parts split of T around z0 under refinement.
pub fn ibp_check(cfg: &ExperimentConfig) -> Report {
    let d = &cfg.decay;
    timed(4, "integration by parts identity", d.budget_ibp_seconds, || {
        let pp = PhaseParams::new(d.ibp_tau, c(d.ibp_z0))?;
        let mut res = Vec::new();
        for &n in &d.ibp_sizes {
            let g = cfg.grid.with_n(n)?;
            res.push(ibp_residual(&CauchyOps::new(g), &gaussian_bump(g), &pp)?);
        }
        let ok = res[1] <= d.ibp_tol && res[1] <= 0.5 * res[0];
        let csv = format!("n,residual\n{},{:.6e}\n{},{:.6e}\n", d.ibp_sizes[0], res[0], d.ibp_sizes[1], res[1]);
        Ok((ok, json!({ "residuals": res, "tol": d.ibp_tol }), vec![Artifact::text("ibp.csv", csv)]))
    })
}

/// Decay of T chi in L^inf and L^p*.
pub fn t_decay(cfg: &ExperimentConfig) -> Report {
    let d = &cfg.decay;
    timed(5, "conjugated Cauchy operator decay", d.budget_t_seconds, || {
        let g = cfg.grid.build()?;
        let ops = CauchyOps::new(g);
        let chi = g.chi();
        let z0 = c(d.z0);
        let mut reports = vec![("inf".to_string(), measure_t_decay_inf(&ops, &chi, d.p_star_inf, z0, &d.taus)?)];
        for &[ps, q] in &d.pairs {
            reports.push((format!("p*={ps},q={q:.6}"), measure_t_decay_lp(&ops, &chi, ps, q, z0, &d.taus)?));
        }
        let ok = reports.iter().all(|(_, r)| r.passes_with(d.slack));
        let mut csv = String::from("norm,tau,value\n");
        for (name, r) in &reports {
            for (t, v) in r.parameter_values.iter().zip(&r.norm_samples) {
                csv.push_str(&format!("{name},{t},{v:.12e}\n"));
            }
        }
        let m: Vec<Value> = reports.iter().map(|(n, r)| json!({ "norm": n, "report": report_json(r) })).collect();
        Ok((ok, json!({ "ladders": m, "slack": d.slack }), vec![Artifact::text("t_decay.csv", csv)]))
    })
}

/// Series on a tau ladder at one z0, with the joint alpha fit.
pub fn alpha_ladder(cfg: &ExperimentConfig, setup: &CgoSetup, side: Side) -> Result<(AlphaFit, Vec<CgoSeries>)> {
    let k = &cfg.cgo;
    let beta = k.beta(&setup.grid());
    let mut ladder = k
        .alpha_taus
        .iter()
        .map(|&t| build_cgo_series(setup, side, &PhaseParams::new(t, c(k.z0))?, beta, k.alpha_tol, k.alpha_m_max))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_alpha(&mut ladder)?;
    Ok((fit, ladder))
}

/// L^p* decay of S_j f and phi_j, and the alpha fit of the designated potential.
pub fn s_decay(cfg: &ExperimentConfig) -> Report {
    let d = &cfg.decay;
    timed(6, "S and phi decay, alpha fit", d.budget_s_seconds, || {
        let g = cfg.grid.build()?;
        let ops = CauchyOps::new(g);
        let src = cfg.cgo.potential(&d.s_potential)?;
        let setup = CgoSetup::new(&ops, src.load(g)?);
        let p_star = 1.0 / (1.0 / src.p() - 0.5);
        let f = random_bounded_field(g, &mut rng(cfg, 6), d.s_modes);
        let beta = cfg.cgo.beta(&g);
        let mut ok = true;
        let mut csv = String::from("side,tau,s_norm,phi_norm\n");
        let mut fits = Vec::new();
        for side in [Side::One, Side::Two] {
            let (mut sn, mut pn) = (Vec::new(), Vec::new());
            for &t in &d.taus {
                let pp = PhaseParams::new(t, c(d.s_z0))?;
                sn.push(crate::cgo::apply_s(&setup, &f, side, &pp)?.lp_norm(p_star, Region::X));
                pn.push(crate::cgo::make_varphi(&setup, side, &pp, beta)?.lp_norm(p_star, Region::X));
                csv.push_str(&format!("{},{t},{:.12e},{:.12e}\n", side.index(), sn.last().unwrap(), pn.last().unwrap()));
            }
            let s = DecayReport::new(&d.taus, sn, -0.5)?;
            let p = DecayReport::new(&d.taus, pn, -0.5)?;
            ok &= s.passes_with(d.slack) && p.passes_with(d.slack);
            fits.push(json!({ "side": side.index(), "S": report_json(&s), "phi": report_json(&p) }));
        }
        let asrc = cfg.cgo.potential(&cfg.cgo.alpha_potential)?;
        let asetup = CgoSetup::new(&ops, asrc.load(g)?);
        let mut alphas = Vec::new();
        for side in [Side::One, Side::Two] {
            let (fit, _) = alpha_ladder(cfg, &asetup, side)?;
            ok &= fit.alpha > 0.0 && fit.alpha < 1.0 / asrc.p();
            alphas.push(json!({ "side": side.index(), "alpha": fit.alpha, "c": fit.c, "upper": 1.0 / asrc.p() }));
        }
        let m = json!({ "p_star": p_star, "ladders": fits, "alpha": alphas, "slack": d.slack });
        Ok((ok, m, vec![Artifact::text("s_phi_decay.csv", csv)]))
    })
}

/// CGO series for every configured potential: envelope slack and PDE residual.
pub fn cgo_checks(cfg: &ExperimentConfig) -> Report {
    let k = &cfg.cgo;
    timed(7, "CGO existence", k.budget_seconds, || {
        let mut ok = true;
        let mut out = Vec::new();
        let mut terms = String::from("potential,side,tau,m,sup_norm\n");
        let mut residual_csv = String::from("potential,n,residual\n");
        let pp = PhaseParams::new(k.tau, c(k.z0))?;
        for np in &k.potentials {
            let mut residuals = Vec::new();
            let mut slacks = Vec::new();
            for (i, &n) in k.sizes.iter().enumerate() {
                let g = cfg.grid.with_n(n)?;
                let ops = CauchyOps::new(g);
                let setup = CgoSetup::new(&ops, np.source.load(g)?);
                let s = build_cgo_series(&setup, Side::One, &pp, k.beta(&g), k.tol, k.m_max)?;
                let r = cgo_residual(&setup, &s)?;
                residual_csv.push_str(&format!("{},{n},{r:.6e}\n", np.name));
                residuals.push(r);
                if i == 0 {
                    for side in [Side::One, Side::Two] {
                        let (fit, ladder) = alpha_ladder(cfg, &setup, side)?;
                        for s in &ladder {
                            for (m, v) in s.term_sup_norms.iter().enumerate() {
                                terms.push_str(&format!("{},{},{},{m},{v:.12e}\n", np.name, side.index(), s.pp.tau));
                            }
                        }
                        let slack = fit.worst_slack(&ladder);
                        slacks.push(json!({ "side": side.index(), "alpha": fit.alpha, "c": fit.c, "slack": slack }));
                        ok &= slack <= k.envelope_slack;
                    }
                }
            }
            ok &= residuals[1] <= k.residual_tol && residuals[1] < residuals[0];
            out.push(json!({ "potential": np.name, "p": np.source.p(), "residuals": residuals, "envelopes": slacks }));
        }
        let m = json!({ "potentials": out, "residual_tol": k.residual_tol, "envelope_slack": k.envelope_slack });
        Ok((ok, m, vec![Artifact::text("cgo_terms.csv", terms), Artifact::text("cgo_residuals.csv", residual_csv)]))
    })
}

/// Unitarity of the chirp multiplier and convergence of E f to f.
pub fn stationary_checks(cfg: &ExperimentConfig) -> Report {
    let s = &cfg.stationary;
    timed(8, "stationary phase", s.budget_seconds, || {
        let g = cfg.grid.with_n(s.unitarity_n)?;
        let m = 2 * g.n;
        let mut r = rng(cfg, 8);
        let mut unit: f64 = 0.0;
        for &t in &s.taus {
            let e = ChirpMultiplier::new(g, t)?;
            for _ in 0..s.unitarity_samples {
                let f: Vec<C64> = (0..m * m).map(|_| C64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5)).collect();
                let a: f64 = f.iter().map(|v| v.norm_sqr()).sum();
                let b: f64 = e.apply_periodic(f).iter().map(|v| v.norm_sqr()).sum();
                unit = unit.max(((b / a).sqrt() - 1.0).abs());
            }
        }
        let wide = Grid::new(s.wide_n, s.wide_half_width, s.wide_omega_radius)?;
        let band = convergence_e(&Field::from_fn(wide, |z| C64::new((-z.norm_sqr()).exp(), 0.0)), &s.taus)?;
        let g = cfg.grid.build()?;
        let var = s.narrow_variance;
        let narrow = convergence_e(&Field::from_fn(g, |z| C64::new((-z.norm_sqr() / (2.0 * var)).exp(), 0.0)), &s.taus)?;
        let ok = unit <= s.unitarity_tol
            && band.strictly_decreasing()
            && band.passes_with(s.rate_slack)
            && narrow.strictly_decreasing();
        let mut csv = String::from("field,tau,rel_err\n");
        for (name, rep) in [("band_limited", &band), ("narrow", &narrow)] {
            for (t, v) in rep.parameter_values.iter().zip(&rep.norm_samples) {
                csv.push_str(&format!("{name},{t},{v:.12e}\n"));
            }
        }
        let met = json!({
            "unitarity_defect": unit,
            "band_limited": report_json(&band),
            "narrow": report_json(&narrow),
            "rate_slack": s.rate_slack,
        });
        Ok((ok, met, vec![Artifact::text("stationary.csv", csv)]))
    })
}

/// Recovered q1 - q2 on the coarse z0 grid as a Field, when the stride lines
/// up with a valid coarser grid.
fn coarse_field(g: Grid, stride: usize, run: &TauRun) -> Option<Field> {
    if !stride.is_power_of_two() || (g.n / 2) % stride != 0 {
        return None;
    }
    let cg = Grid::new(g.n / stride, g.half_width, g.omega_radius).ok()?;
    let mut f = Field::zeros(cg);
    for s in &run.samples {
        let rec = s.order_sum(0) + s.order_sum(1);
        f.values[(s.node.1 / stride) * cg.n + s.node.0 / stride] = rec;
    }
    Some(f)
}

/// The full Alessandrini pipeline over the tau ladder plus one beta refinement.
pub fn reconstruct_checks(cfg: &ExperimentConfig) -> Report {
    let rc = &cfg.reconstruct;
    timed(9, "Alessandrini reconstruction", rc.budget_seconds, || {
        let g = cfg.grid.build()?;
        let ops = CauchyOps::new(g);
        let pair = PotentialPair::new(&ops, rc.q1.load(g)?, rc.q2.load(g)?);
        let nodes = z0_samples(g, rc.stride);
        let cell = (rc.stride as f64 * g.h).powi(2);
        let beta = BetaChoice::SmoothedCauchy { width: rc.beta_width };
        let runs = rc.taus.iter().map(|&t| run_tau(&pair, &nodes, t, beta, rc.k_max)).collect::<Result<Vec<_>>>()?;
        let last = rc.taus[rc.taus.len() - 1];
        let refined_beta = BetaChoice::SmoothedCauchy { width: rc.beta_width * rc.beta_refine };
        let refined = run_tau(&pair, &nodes, last, refined_beta, rc.k_max)?;

        // alpha for the order >= 3 slopes: the slower of the two series
        let (a1, _) = alpha_ladder(cfg, &pair.side1, Side::One)?;
        let (a2, _) = alpha_ladder(cfg, &pair.side2, Side::Two)?;
        let alpha = a1.alpha.min(a2.alpha);
        let p = rc.q1.p().max(rc.q2.p());
        let table = decay_table(&runs, p, Some(alpha), pair.dq_l1, cell)?;
        let mut ok = true;
        let mut orders = Vec::new();
        for d in &table {
            let mut row = json!({ "order": d.order, "report": report_json(&d.report) });
            if d.order == 2 {
                let pass = d.report.passes_with(rc.order_slack);
                row["pass"] = json!(pass);
                ok &= pass;
            }
            if d.order >= 3 {
                let pass = d.envelope_slack <= rc.envelope_slack && d.report.passes_with(rc.order_slack);
                row["envelope_slack"] = json!(d.envelope_slack);
                row["pass"] = json!(pass);
                ok &= pass;
            }
            orders.push(row);
        }
        let recs: Vec<_> = runs.iter().map(|r| r.recovery(&pair.dq)).collect();
        let errors: Vec<f64> = recs.iter().map(|r| r.error()).collect();
        let remainders: Vec<f64> = recs.iter().map(|r| r.remainder()).collect();
        let refined_rec = refined.recovery(&pair.dq);
        let refined_error = refined_rec.error();
        let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
        let refine_helps = refined_error < errors[errors.len() - 1];
        ok &= decreasing && refine_helps;

        let single = recover_single(&pair.side1.q, &rc.single_taus)?;

        let mut arts = Vec::new();
        let mut terms = String::from(TERM_CSV_HEADER);
        let mut summary = String::from("tau,beta_width,error,remainder\n");
        for (run, rec) in runs.iter().zip(&recs).chain(std::iter::once((&refined, &refined_rec))) {
            terms.push_str(&run.table_csv());
            let w = match run.beta {
                BetaChoice::SmoothedCauchy { width } => width,
                BetaChoice::Zero => 0.0,
            };
            summary.push_str(&format!("{},{w},{:.12e},{:.12e}\n", run.tau, rec.error(), rec.remainder()));
        }
        for (run, rec) in runs.iter().zip(&recs) {
            arts.push(Artifact::text(&format!("recovery_tau{}.csv", run.tau), rec.csv()));
            if let Some(f) = coarse_field(g, rc.stride, run) {
                let mut buf = Vec::new();
                f.write_binary(&mut buf)?;
                arts.push(Artifact { name: format!("recovery_tau{}.bin", run.tau), bytes: buf });
            }
        }
        let mut order_csv = String::from("order,tau,norm\n");
        for d in &table {
            for (t, v) in d.report.parameter_values.iter().zip(&d.report.norm_samples) {
                order_csv.push_str(&format!("{},{t},{v:.12e}\n", d.order));
            }
        }
        arts.push(Artifact::text("terms.csv", terms));
        arts.push(Artifact::text("recovery_summary.csv", summary));
        arts.push(Artifact::text("order_decay.csv", order_csv));
        arts.push(Artifact::text("single_recovery.csv", single.to_csv()));
        let m = json!({
            "z0_samples": nodes.len(),
            "alpha_fit": alpha,
            "orders": orders,
            "errors": errors,
            "remainders": remainders,
            "refined_beta_width": rc.beta_width * rc.beta_refine,
            "refined_error": refined_error,
            "single_potential": report_json(&single),
            "single_monotone": single.strictly_decreasing(),
        });
        Ok((ok, m, arts))
    })
}

/// DN map symmetry, pairing identities and the volume/boundary bridge.
pub fn dn_checks(cfg: &ExperimentConfig) -> Report {
    let dc = &cfg.dn;
    timed(10, "DN map plumbing", dc.budget_seconds, || {
        let g1 = |x: f64, y: f64| C64::new(x, 0.5 * y).exp();
        let g2 = |x: f64, y: f64| C64::new(0.3 * y, -x).exp();
        let mut defects = Vec::new();
        let mut gaps = Vec::new();
        let mut hs = Vec::new();
        let mut vanish = true;
        let mut arts = Vec::new();
        let mut nodal = 0.0;
        for (i, &n) in dc.sizes.iter().enumerate() {
            let g = cfg.grid.with_n(n)?;
            let (q1, q2) = (dc.q1.load(g)?, dc.q2.load(g)?);
            let (s1, s2) = (DirichletSolver::new(g, &q1)?, DirichletSolver::new(g, &q2)?);
            defects.push(galerkin_symmetry_defect(&s1, dc.modes)?);
            let u1 = s1.solve(&s1.boundary_values(g1))?;
            let u2 = s2.solve(&s2.boundary_values(g2))?;
            let vol = alessandrini_pairing(&q1, &q2, &u1, &u2);
            let bdry = boundary_pairing(&s1, &s2, &s1.boundary_values(g1), &s1.boundary_values(g2))?;
            gaps.push((vol - bdry).norm() / vol.norm());
            hs.push(g.h);
            vanish &= alessandrini_pairing(&q1, &q1, &u1, &u2) == C64::new(0.0, 0.0);
            if i == 0 {
                let dn = assemble_with(&s1)?;
                nodal = dn.nodal_symmetry_defect();
                arts.push(Artifact { name: "dn_q1.bin".into(), bytes: dn.matrix_bytes() });
                arts.push(Artifact { name: "dn_q1.json".into(), bytes: dn.header_bytes() });
            }
        }
        let ok = defects[0] <= dc.symmetry_tol
            && defects[1] <= 0.5 * defects[0]
            && vanish
            && gaps.iter().zip(&hs).all(|(e, h)| e <= h)
            && gaps[1] < gaps[0];
        let mut csv = String::from("n,h,galerkin_defect,pairing_gap\n");
        for i in 0..2 {
            csv.push_str(&format!("{},{},{:.6e},{:.6e}\n", dc.sizes[i], hs[i], defects[i], gaps[i]));
        }
        arts.push(Artifact::text("dn_checks.csv", csv));
        let m = json!({
            "galerkin_defects": defects,
            "symmetry_tol": dc.symmetry_tol,
            "nodal_defect": nodal,
            "pairing_vanishes": vanish,
            "pairing_gaps": gaps,
            "h": hs,
        });
        Ok((ok, m, arts))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Appendix,
    Cauchy,
    Decay,
    Cgo,
    Reconstruct,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Appendix => "appendix-checks",
            Suite::Cauchy => "cauchy-checks",
            Suite::Decay => "decay",
            Suite::Cgo => "cgo",
            Suite::Reconstruct => "reconstruct",
            Suite::All => "all",
        }
    }

    /// The checks behind each subcommand, in criterion order.
    pub fn checks(self) -> Vec<fn(&ExperimentConfig) -> Report> {
        match self {
            Suite::Appendix => vec![appendix_lattice, appendix_scaling],
            Suite::Cauchy => vec![cauchy_checks],
            Suite::Decay => vec![ibp_check, t_decay, s_decay, stationary_checks],
            Suite::Cgo => vec![cgo_checks],
            Suite::Reconstruct => vec![reconstruct_checks, dn_checks],
            Suite::All => [Suite::Appendix, Suite::Cauchy, Suite::Decay, Suite::Cgo, Suite::Reconstruct]
                .iter()
                .flat_map(|s| s.checks())
                .collect(),
        }
    }
}

pub fn run_suite(cfg: &ExperimentConfig, suite: Suite) -> Report {
    let mut r = Report::default();
    for check in suite.checks() {
        r.extend(check(cfg));
    }
    r.verdicts.sort_by_key(|v| v.criterion);
    r
}

/// Python plotting script over the CSVs a suite writes.
pub fn plot_script(suite: Suite) -> String {
    let mut s = String::from(
        "#!/usr/bin/env python3\n# Generated by cgo-lab. Reads the CSVs next to this script.\nimport csv, os, sys\nimport matplotlib.pyplot as plt\n\nhere = os.path.dirname(os.path.abspath(__file__))\n\ndef rows(name):\n    with open(os.path.join(here, name)) as f:\n        return list(csv.DictReader(f))\n\ndef loglog(name, key, x, y, title):\n    path = os.path.join(here, name)\n    if not os.path.exists(path):\n        return\n    groups = {}\n    for r in rows(name):\n        groups.setdefault(r[key], []).append((float(r[x]), float(r[y])))\n    plt.figure()\n    for k, pts in sorted(groups.items()):\n        pts.sort()\n        plt.loglog([p[0] for p in pts], [p[1] for p in pts], 'o-', label=k)\n    plt.xlabel(x); plt.ylabel(y); plt.title(title); plt.legend()\n    plt.savefig(os.path.join(here, name.replace('.csv', '.png')), dpi=120)\n\n",
    );
    let plots: &[&str] = match suite {
        Suite::Appendix => &["loglog('appendix_scaling.csv', 'family', 'tau', 'norm', 'norm scaling')"],
        Suite::Cauchy => &[],
        Suite::Decay => &[
            "loglog('t_decay.csv', 'norm', 'tau', 'value', 'T decay')",
            "loglog('stationary.csv', 'field', 'tau', 'rel_err', '||Ef - f|| / ||f||')",
        ],
        Suite::Cgo => &["loglog('cgo_terms.csv', 'potential', 'm', 'sup_norm', 'CGO term norms')"],
        Suite::Reconstruct => &[
            "loglog('order_decay.csv', 'order', 'tau', 'norm', 'order-grouped terms')",
            "loglog('recovery_summary.csv', 'beta_width', 'tau', 'error', 'reconstruction error')",
        ],
        Suite::All => &[
            "loglog('appendix_scaling.csv', 'family', 'tau', 'norm', 'norm scaling')",
            "loglog('t_decay.csv', 'norm', 'tau', 'value', 'T decay')",
            "loglog('stationary.csv', 'field', 'tau', 'rel_err', '||Ef - f|| / ||f||')",
            "loglog('cgo_terms.csv', 'potential', 'm', 'sup_norm', 'CGO term norms')",
            "loglog('order_decay.csv', 'order', 'tau', 'norm', 'order-grouped terms')",
            "loglog('recovery_summary.csv', 'beta_width', 'tau', 'error', 'reconstruction error')",
        ],
    };
    for p in plots {
        s.push_str(p);
        s.push('\n');
    }
    s.push_str("if '--show' in sys.argv:\n    plt.show()\n");
    s
}
