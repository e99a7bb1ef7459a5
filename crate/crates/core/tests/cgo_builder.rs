use cgo_lab::cauchy::CauchyOps;
use cgo_lab::cgo::*;
use cgo_lab::conjugated::loglog_fit;
use cgo_lab::grid::{Field, Grid, Region};
use cgo_lab::phase::PhaseParams;
use cgo_lab::presets::{random_bounded_field, Preset, PotentialSpec};
use cgo_lab::{LabError, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn smooth_q() -> PotentialSpec {
    PotentialSpec { preset: Preset::SmoothBump { amplitude: 20.0, center: [0.05, 0.03], radius: 0.25 }, p: 1.5 }
}

fn singular_q() -> PotentialSpec {
    PotentialSpec {
        preset: Preset::Singular { amplitude: 3.0, center: [0.0, 0.0], radius: 0.25, exponent: 1.0 },
        p: 1.4,
    }
}

fn rel_omega(a: &Field, b: &Field) -> f64 {
    (a - b).lp_norm(2.0, Region::Omega) / b.lp_norm(2.0, Region::Omega)
}

const Z0: C64 = C64 { re: 0.02, im: -0.03 };

#[test]
fn d_annihilates_phase_and_constants() {
    let g = Grid::new(512, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let pp = PhaseParams::new(64.0, Z0).unwrap();
    let ph = Phases::new(g, &pp).unwrap();
    for side in [Side::One, Side::Two] {
        let d0 = apply_d(&ops, &ph.em, side, &pp).unwrap();
        let rel = d0.lp_norm(2.0, Region::Omega) / ph.em.lp_norm(2.0, Region::Omega);
        assert!(rel <= 1e-6, "{side:?}: {rel}");
        let one = Field::constant(g, C64::new(1.0, 0.0));
        let d1 = apply_d(&ops, &one, side, &pp).unwrap().lp_norm(f64::INFINITY, Region::Omega);
        assert!(d1 < 1e-6);
    }
}

#[test]
fn d_at_tau_zero_is_minus_laplacian() {
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let s = 0.02;
    let f = Field::from_fn(g, |z| C64::new((-z.norm_sqr() / s).exp(), 0.0));
    let lap = Field::from_fn(g, |z| {
        let r2 = z.norm_sqr();
        C64::new((4.0 * r2 / (s * s) - 4.0 / s) * (-r2 / s).exp(), 0.0)
    });
    let one = Field::constant(g, C64::new(1.0, 0.0));
    for side in [Side::One, Side::Two] {
        let d = apply_d_with(&ops, &f, side, &one, &one);
        assert!(rel_omega(&d.scale(C64::new(-1.0, 0.0)), &lap) < 1e-8);
    }
}

#[test]
fn s_and_phi_invert_d_on_omega() {
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let q = smooth_q().sample(g);
    let setup = CgoSetup::new(&ops, q.clone());
    let pp = PhaseParams::new(32.0, Z0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = random_bounded_field(g, &mut rng, 3);
    let beta = BetaChoice::SmoothedCauchy { width: 4.0 * g.h };
    for side in [Side::One, Side::Two] {
        let sf = apply_s(&setup, &f, side, &pp).unwrap();
        let dsf = apply_d(&ops, &sf, side, &pp).unwrap();
        let err = rel_omega(&dsf, &(&q * &f));
        assert!(err < 1e-6, "{side:?}: D S f vs q f {err}");
        let phi = make_varphi(&setup, side, &pp, beta).unwrap();
        let dphi = apply_d(&ops, &phi, side, &pp).unwrap();
        let em = Phases::new(g, &pp).unwrap().em;
        let err = rel_omega(&dphi, &(&q * &em));
        assert!(err < 1e-6, "{side:?}: D phi vs q e^- {err}");
    }
    let zero = CgoSetup::new(&ops, Field::zeros(g));
    assert_eq!(apply_s(&zero, &f, Side::One, &pp).unwrap().sup(), 0.0);
    assert_eq!(make_varphi(&zero, Side::Two, &pp, BetaChoice::Zero).unwrap().sup(), 0.0);
}

#[test]
fn s_and_phi_decay_in_tau() {
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let spec = smooth_q();
    let setup = CgoSetup::new(&ops, spec.sample(g));
    let p_star = 1.0 / (1.0 / spec.p - 0.5);
    let taus = [8.0, 16.0, 32.0, 64.0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_bounded_field(g, &mut rng, 2);
    let beta = BetaChoice::SmoothedCauchy { width: 4.0 * g.h };
    for side in [Side::One, Side::Two] {
        let (mut sn, mut pn) = (Vec::new(), Vec::new());
        for &t in &taus {
            let pp = PhaseParams::new(t, Z0).unwrap();
            sn.push(apply_s(&setup, &f, side, &pp).unwrap().lp_norm(p_star, Region::X));
            pn.push(make_varphi(&setup, side, &pp, beta).unwrap().lp_norm(p_star, Region::X));
        }
        let (s1, _, _) = loglog_fit(&taus, &sn);
        let (s2, _, _) = loglog_fit(&taus, &pn);
        eprintln!("{side:?}: S slope {s1}, phi slope {s2}");
        assert!(s1 <= -0.4 && s2 <= -0.4);
    }
}

#[test]
fn zero_potential_series_is_phase_plus_seed() {
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let setup = CgoSetup::new(&ops, Field::zeros(g));
    let pp = PhaseParams::new(16.0, Z0).unwrap();
    let beta = BetaChoice::SmoothedCauchy { width: 0.05 };
    let s = build_cgo_series(&setup, Side::One, &pp, beta, 1e-6, 20).unwrap();
    assert_eq!(s.beta, C64::new(0.0, 0.0));
    assert!(s.term_sup_norms[1] == 0.0 && s.converged);
    let s = build_cgo_series(&setup, Side::One, &pp, BetaChoice::Zero, 1e-6, 20).unwrap();
    let r = cgo_residual(&setup, &s).unwrap();
    eprintln!("zero-q residual {r}");
    // absolute: only the spectral error of D on chi e^- remains
    assert!(r < 1e-4);
}

#[test]
fn smooth_series_contracts_and_solves() {
    let spec = smooth_q();
    let pp = PhaseParams::new(64.0, Z0).unwrap();
    let mut res = Vec::new();
    for n in [256, 512] {
        let g = Grid::new(n, 0.75, 0.35).unwrap();
        let ops = CauchyOps::new(g);
        let setup = CgoSetup::new(&ops, spec.sample(g));
        let beta = BetaChoice::SmoothedCauchy { width: 4.0 * g.h };
        let s = build_cgo_series(&setup, Side::One, &pp, beta, 1e-4, 20).unwrap();
        let ratio = s.term_sup_norms[2] / s.term_sup_norms[1];
        assert!(ratio <= 0.5, "ratio {ratio}");
        res.push(cgo_residual(&setup, &s).unwrap());
        if n == 256 {
            // f - e^- - phi - S(f - e^-) = -S F_M
            let ph = Phases::new(g, &pp).unwrap();
            let tail = &s.f - &ph.em;
            let lhs = &(&tail - &s.terms[1]) - &apply_s_with(&setup, &tail, Side::One, &ph);
            let r = geometric_ratio(&s);
            assert!(lhs.sup() <= 1e-4 * r / (1.0 - r) + 1e-12, "{} vs {r}", lhs.sup());
            let short = build_cgo_series(&setup, Side::One, &pp, beta, 0.0, 1).unwrap();
            assert!(cgo_residual(&setup, &short).unwrap() > res[0]);
        }
    }
    eprintln!("residuals {res:?}");
    assert!(res[1] <= 1e-2 && res[1] < res[0]);
}

#[test]
fn singular_series_alpha_and_envelope() {
    let spec = singular_q();
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    spec.validate(&g).unwrap();
    let ops = CauchyOps::new(g);
    let setup = CgoSetup::new(&ops, spec.sample(g));
    let beta = BetaChoice::SmoothedCauchy { width: 4.0 * g.h };
    let mut ladder: Vec<CgoSeries> = [16.0, 32.0, 64.0]
        .iter()
        .map(|&t| build_cgo_series(&setup, Side::Two, &PhaseParams::new(t, Z0).unwrap(), beta, 1e-8, 8).unwrap())
        .collect();
    let fit = fit_alpha(&mut ladder).unwrap();
    eprintln!("alpha {} C {} slack {}", fit.alpha, fit.c, fit.worst_slack(&ladder));
    assert!(fit.alpha > 0.0 && fit.alpha < 1.0 / spec.p);
    assert!(fit.worst_slack(&ladder) <= 2.0);
    assert_eq!(ladder[0].alpha_fitted, Some(fit.alpha));
}

#[test]
fn weak_tau_is_rejected() {
    let g = Grid::new(128, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let strong = PotentialSpec { preset: Preset::SmoothBump { amplitude: 3000.0, center: [0.0, 0.0], radius: 0.3 }, p: 1.5 };
    let setup = CgoSetup::new(&ops, strong.sample(g));
    let r = build_cgo_series(&setup, Side::One, &PhaseParams::new(2.0, Z0).unwrap(), BetaChoice::Zero, 1e-6, 20);
    assert!(matches!(r, Err(LabError::TauTooSmall { .. })), "{r:?}");
}
