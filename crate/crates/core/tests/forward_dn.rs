use cgo_lab::forward_dn::*;
use cgo_lab::grid::{Field, Grid};
use cgo_lab::presets::{random_smooth_field, Preset, PotentialSpec};
use cgo_lab::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_err(solver: &DirichletSolver, u: &Field, exact: impl Fn(C64) -> C64) -> f64 {
    let g = solver.grid;
    (0..g.len())
        .filter(|&i| g.node_at(i).norm() < g.omega_radius)
        .map(|i| (u.values[i] - exact(g.node_at(i))).norm())
        .fold(0.0, f64::max)
}

fn bump(amplitude: f64, c: [f64; 2]) -> PotentialSpec {
    PotentialSpec { preset: Preset::SmoothBump { amplitude, center: c, radius: 0.25 }, p: 1.5 }
}

#[test]
fn harmonic_polynomials_are_reproduced() {
    let g = Grid::new(128, 0.75, 0.35).unwrap();
    let solver = DirichletSolver::new(g, &Field::zeros(g)).unwrap();
    for f in [|z: C64| C64::new(z.re, 0.0), |z: C64| C64::new((z * z).re, 0.0), |z: C64| z * z * z] {
        let gv = solver.boundary_values(|x, y| f(C64::new(x, y)));
        let u = solver.solve(&gv).unwrap();
        let e = max_err(&solver, &u, f);
        assert!(e <= 10.0 * g.h * g.h, "{e}");
        assert!(solver.residual(&gv).unwrap() <= 1e-10);
    }
}

#[test]
fn helmholtz_plane_wave_converges() {
    let k = 3.0;
    let wave = |z: C64| C64::from_polar(1.0, k * (0.6 * z.re + 0.8 * z.im));
    let mut errs = Vec::new();
    for n in [64, 128, 256] {
        let g = Grid::new(n, 0.75, 0.35).unwrap();
        let q = Field::from_fn(g, |z| C64::new(if z.norm() < g.omega_radius { k * k } else { 0.0 }, 0.0));
        let solver = DirichletSolver::new(g, &q).unwrap();
        let u = solver.solve(&solver.boundary_values(|x, y| wave(C64::new(x, y)))).unwrap();
        errs.push(max_err(&solver, &u, wave) / (g.h * g.h));
    }
    eprintln!("error / h^2: {errs:?}");
    assert!(errs.iter().all(|&e| e < 1.0));
}

#[test]
fn dn_of_zero_potential() {
    let g = Grid::new(128, 0.75, 0.35).unwrap();
    let solver = DirichletSolver::new(g, &Field::zeros(g)).unwrap();
    let ones = vec![C64::new(1.0, 0.0); solver.boundary.len()];
    assert!(solver.apply_dn(&ones).unwrap().iter().all(|v| v.norm() < 1e-8));
    // Lambda cos(k t) = (k/R) cos(k t)
    let r = g.omega_radius;
    for k in 1..=4 {
        let gv: Vec<C64> = solver.boundary.iter().map(|b| C64::new((k as f64 * b.angle).cos(), 0.0)).collect();
        let l = solver.apply_dn(&gv).unwrap();
        let err = l.iter().zip(&gv).map(|(a, b)| (a - b * (k as f64 / r)).norm()).fold(0.0, f64::max);
        assert!(err < 0.05 * k as f64 / r, "k={k}: {err}");
    }
}

#[test]
fn dn_symmetry_defect_refines() {
    let spec = bump(20.0, [0.05, 0.03]);
    let g = Grid::new(256, 0.75, 0.35).unwrap();
    let q = spec.sample(g);
    let dn = assemble_dn(&q).unwrap();
    let again = assemble_dn(&q).unwrap();
    assert!(dn.matrix.iter().zip(&again.matrix).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    let s256 = DirichletSolver::new(g, &q).unwrap();
    let d256 = galerkin_symmetry_defect(&s256, 8).unwrap();
    let g5 = Grid::new(512, 0.75, 0.35).unwrap();
    let s512 = DirichletSolver::new(g5, &spec.sample(g5)).unwrap();
    let d512 = galerkin_symmetry_defect(&s512, 8).unwrap();
    eprintln!("nodal {} galerkin {d256} -> {d512}", dn.nodal_symmetry_defect());
    assert!(d256 <= 1e-3 && d512 <= 0.5 * d256);
}

#[test]
fn pairing_volume_and_boundary_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let g = Grid::new(128, 0.75, 0.35).unwrap();
    let g1 = |x: f64, y: f64| C64::new(x, 0.5 * y).exp();
    let g2 = |x: f64, y: f64| C64::new(0.3 * y, -x).exp();
    for _ in 0..5 {
        let q1 = random_smooth_field(g, &mut rng, 0.25).scale(C64::new(8.0, 0.0));
        let q2 = random_smooth_field(g, &mut rng, 0.25).scale(C64::new(8.0, 0.0));
        let (s1, s2) = (DirichletSolver::new(g, &q1).unwrap(), DirichletSolver::new(g, &q2).unwrap());
        let u1 = s1.solve(&s1.boundary_values(g1)).unwrap();
        let u2 = s2.solve(&s2.boundary_values(g2)).unwrap();
        let vol = alessandrini_pairing(&q1, &q2, &u1, &u2);
        let bdry = boundary_pairing(&s1, &s2, &s1.boundary_values(g1), &s1.boundary_values(g2)).unwrap();
        assert!((vol - bdry).norm() <= 0.05 * vol.norm(), "{vol} vs {bdry}");
        assert_eq!(alessandrini_pairing(&q1, &q1, &u1, &u2), C64::new(0.0, 0.0));
    }
    let spec1 = bump(15.0, [0.05, 0.0]);
    let spec2 = bump(-10.0, [-0.04, 0.02]);
    let mut gaps = Vec::new();
    for n in [256, 512] {
        let g = Grid::new(n, 0.75, 0.35).unwrap();
        let (q1, q2) = (spec1.sample(g), spec2.sample(g));
        let (s1, s2) = (DirichletSolver::new(g, &q1).unwrap(), DirichletSolver::new(g, &q2).unwrap());
        let u1 = s1.solve(&s1.boundary_values(g1)).unwrap();
        let u2 = s2.solve(&s2.boundary_values(g2)).unwrap();
        let vol = alessandrini_pairing(&q1, &q2, &u1, &u2);
        let bdry = boundary_pairing(&s1, &s2, &s1.boundary_values(g1), &s1.boundary_values(g2)).unwrap();
        gaps.push((vol - bdry).norm() / vol.norm());
    }
    eprintln!("volume vs boundary gaps {gaps:?}");
    assert!(gaps[1] < gaps[0]);
}
