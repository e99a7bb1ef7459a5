use cgo_lab::cauchy::CauchyOps;
use cgo_lab::conjugated::loglog_fit;
use cgo_lab::grid::{Grid, Region};
use cgo_lab::phase::*;
use cgo_lab::C64;

const LADDER: [f64; 4] = [4.0, 16.0, 64.0, 256.0];

#[test]
fn inverse_power_lattice_matches_closed_form() {
    for a in [1.0, 2.0] {
        for p in [3.0, 4.0] {
            for tau in [1.0, 4.0, 16.0, 64.0] {
                let (num, closed) = inverse_power_norm_check(a, p, tau).unwrap();
                assert!((num - closed).abs() <= 1e-3 * closed, "a={a} p={p} tau={tau}: {num} vs {closed}");
            }
        }
    }
}

#[test]
fn bump_scaling_exponents() {
    let v = [0.6, -0.8];
    for p in [1.5, 2.0, 4.0] {
        let n: Vec<f64> = LADDER.iter().map(|&t| bump_lp_norm(t, p)).collect();
        let (s, _, _) = loglog_fit(&LADDER, &n);
        assert!((s + 1.0 / p).abs() < 0.03, "p={p}: slope {s}");
        let g: Vec<f64> = LADDER.iter().map(|&t| bump_grad_lp_norm(t, p, v)).collect();
        let (s, _, _) = loglog_fit(&LADDER, &g);
        assert!((s - (0.5 - 1.0 / p)).abs() < 0.03, "p={p}: grad slope {s}");
    }
}

#[test]
fn h_scaling_exponents() {
    for p in [3.0, 4.0, f64::INFINITY] {
        let n: Vec<f64> = LADDER.iter().map(|&t| h_lp_norm(t, p)).collect();
        let (s, _, _) = loglog_fit(&LADDER, &n);
        assert!((s - (0.5 - 1.0 / p)).abs() < 0.05, "p={p}: slope {s}");
    }
    for p in [2.0, 4.0] {
        let n: Vec<f64> = LADDER.iter().map(|&t| h_grad_lp_norm(t, p, [1.0, 0.0])).collect();
        let (s, _, _) = loglog_fit(&LADDER, &n);
        assert!((s - (1.0 - 1.0 / p)).abs() < 0.05, "p={p}: grad slope {s}");
    }
}

#[test]
fn sampled_bump_matches_quadrature() {
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    let ops = CauchyOps::new(g);
    let pp = PhaseParams::new(16.0, C64::new(0.0, 0.0)).unwrap();
    let b = bump_tau(g, &pp).unwrap();
    assert!((b.at(128, 128).re - 1.0).abs() < 1e-15);
    let grid_norm = b.lp_norm(2.0, Region::X);
    let closed = bump_lp_norm(1.0, 2.0) * 16f64.powf(-0.5);
    assert!((grid_norm / closed - 1.0).abs() < 0.02, "{grid_norm} vs {closed}");
    // v = (1, 0): v . grad = d + dbar
    let grad = &ops.d(&b) + &ops.dbar(&b);
    let closed = bump_grad_lp_norm(1.0, 2.0, [1.0, 0.0]) * 16f64.powf(0.0);
    let grid_norm = grad.lp_norm(2.0, Region::X);
    assert!((grid_norm / closed - 1.0).abs() < 0.02, "{grid_norm} vs {closed}");
}

#[test]
fn sampled_h_bound_and_l4_exponent() {
    let g = Grid::new(512, 2.0, 1.0).unwrap();
    let mut norms = Vec::new();
    for &t in &LADDER {
        let pp = PhaseParams::new(t, C64::new(0.0, 0.0)).unwrap();
        let h = h_function(g, &pp, HVariant::Conj).unwrap();
        assert!(h.sup() <= t.sqrt() + 1e-12);
        norms.push(h.lp_norm(4.0, Region::X));
    }
    let (s, _, _) = loglog_fit(&LADDER, &norms);
    assert!((s - 0.25).abs() < 0.05, "slope {s}");
}
