use cgo_lab::cauchy::CauchyOps;
use cgo_lab::conjugated::*;
use cgo_lab::grid::{Field, Grid};
use cgo_lab::phase::PhaseParams;
use cgo_lab::C64;

fn gaussian_bump(g: Grid) -> Field {
    let chi = g.chi();
    &Field::from_fn(g, |z| C64::new((-z.norm_sqr() / 0.05).exp(), 0.0)) * &chi
}

#[test]
fn ibp_identity_converges() {
    let pp = PhaseParams::new(32.0, C64::new(0.03, -0.02)).unwrap();
    let mut res = Vec::new();
    for n in [256, 512] {
        let g = Grid::new(n, 0.75, 0.35).unwrap();
        let ops = CauchyOps::new(g);
        res.push(ibp_residual(&ops, &gaussian_bump(g), &pp).unwrap());
        assert_eq!(ibp_residual(&ops, &Field::zeros(g), &pp).unwrap(), 0.0);
    }
    eprintln!("ibp residuals {res:?}");
    assert!(res[1] <= 1e-3 && res[1] <= 0.5 * res[0], "{res:?}");
}

#[test]
fn t_is_linear_and_decays() {
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let chi = g.chi();
    let z0 = C64::new(0.0, 0.0);
    let pp = PhaseParams::new(16.0, z0).unwrap();
    assert_eq!(apply_t(&ops, &Field::zeros(g), &pp).unwrap().sup(), 0.0);
    let b = gaussian_bump(g);
    let c = C64::new(0.3, -1.2);
    let lhs = apply_t(&ops, &(&chi + &b.scale(c)), &pp).unwrap();
    let rhs = &apply_t(&ops, &chi, &pp).unwrap() + &apply_t(&ops, &b, &pp).unwrap().scale(c);
    assert!((&lhs - &rhs).sup() < 1e-12 * lhs.sup());

    let taus = [8.0, 16.0, 32.0, 64.0];
    let inf = measure_t_decay_inf(&ops, &chi, 4.0, z0, &taus).unwrap();
    eprintln!("inf slope {}", inf.fitted_exponent);
    assert!(inf.passes());
    assert!(inf.norm_samples[3] < inf.norm_samples[1]);
    let doubled = measure_t_decay_inf(&ops, &chi.scale(C64::new(2.0, 0.0)), 4.0, z0, &taus).unwrap();
    assert!((doubled.fitted_exponent - inf.fitted_exponent).abs() < 1e-12);
    for (ps, q) in [(4.0, 4.0 / 3.0), (4.0, 10.0 / 7.0), (6.0, 1.5)] {
        let r = measure_t_decay_lp(&ops, &chi, ps, q, z0, &taus).unwrap();
        eprintln!("p*={ps} q={q} slope {} predicted {}", r.fitted_exponent, r.predicted_exponent);
        assert!(r.passes());
    }
    assert!(measure_t_decay_lp(&ops, &chi, 4.0, 1.0, z0, &taus).is_err());
    let zero = measure_t_decay_inf(&ops, &Field::zeros(g), 4.0, z0, &taus).unwrap();
    assert!(zero.degenerate);
}
