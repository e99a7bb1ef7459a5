use cgo_lab::cauchy::CauchyOps;
use cgo_lab::conjugated::DecayReport;
use cgo_lab::grid::{Field, Grid};
use cgo_lab::phase::{quadratic_phase, PhaseParams};
use cgo_lab::quad::adaptive_simpson;
use cgo_lab::reconstruct::{geometric_envelope, z0_samples};
use cgo_lab::stationary::ChirpMultiplier;
use cgo_lab::C64;
use proptest::prelude::*;

fn small() -> Grid {
    Grid::new(32, 0.75, 0.35).unwrap()
}

fn field(vals: &[(f64, f64)]) -> Field {
    let g = small();
    let values = (0..g.len()).map(|i| {
        let (a, b) = vals[i % vals.len()];
        // keep it supported in Omega so the Cauchy outputs are meaningful
        if g.node_at(i).norm() <= g.omega_radius { C64::new(a, b) } else { C64::new(0.0, 0.0) }
    });
    Field::from_values(g, values.collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simpson_is_exact_on_cubics(c in prop::array::uniform4(-3.0f64..3.0), a in -2.0f64..0.0, w in 0.1f64..3.0) {
        let b = a + w;
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
        let exact = anti(b) - anti(a);
        prop_assert!((adaptive_simpson(&f, a, b, 1e-12) - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn phase_is_unimodular(tau in 1.5f64..40.0, x in -0.3f64..0.3, y in -0.3f64..0.3, sign in prop::sample::select(vec![-1.0, 1.0])) {
        let g = Grid::new(128, 0.75, 0.35).unwrap();
        let pp = PhaseParams::new(tau, C64::new(x, y)).unwrap();
        let e = quadratic_phase(g, &pp, sign).unwrap();
        prop_assert!(e.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn cauchy_operators_are_linear(
        u in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8),
        v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8),
        a in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let ops = CauchyOps::new(small());
        let (f, h) = (field(&u), field(&v));
        let a = C64::new(a.0, a.1);
        for op in [CauchyOps::dbar_inv, CauchyOps::d_inv] {
            let lhs = op(&ops, &(&f.scale(a) + &h));
            let rhs = &op(&ops, &f).scale(a) + &op(&ops, &h);
            prop_assert!((&lhs - &rhs).sup() <= 1e-12 * (1.0 + lhs.sup()));
        }
    }

    #[test]
    fn chirp_preserves_energy(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64), tau in prop::sample::select(vec![-20.0, 2.0, 8.0, 50.0])) {
        let g = small();
        let m = 2 * g.n;
        let f: Vec<C64> = (0..m * m).map(|i| { let (a, b) = vals[(i * 7) % vals.len()]; C64::new(a + (i as f64 * 0.37).sin(), b) }).collect();
        let a: f64 = f.iter().map(|v| v.norm_sqr()).sum();
        let b: f64 = ChirpMultiplier::new(g, tau).unwrap().apply_periodic(f).iter().map(|v| v.norm_sqr()).sum();
        prop_assert!(((b / a).sqrt() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn decay_fit_recovers_power_laws(s in -2.0f64..0.5, c in 0.01f64..100.0) {
        let taus = [4.0, 8.0, 16.0, 32.0, 64.0];
        let r = DecayReport::new(&taus, taus.iter().map(|t| c * t.powf(s)).collect(), s).unwrap();
        prop_assert!((r.fitted_exponent - s).abs() < 1e-10);
        prop_assert!(r.passes_with(1e-9));
        prop_assert_eq!(r.strictly_decreasing(), s < 0.0);
    }

    #[test]
    fn geometric_envelope_is_exact_on_geometric_norms(a in 0.1f64..10.0, ratio in 0.01f64..0.9, f0 in 0.5f64..2.0) {
        let norms: Vec<f64> = (0..6).map(|m| if m == 0 { f0 } else { a * ratio.powi(m) }).collect();
        let env = geometric_envelope(&norms);
        prop_assert_eq!(env[0], f0);
        for (x, y) in env.iter().zip(&norms).skip(1) {
            prop_assert!((x / y - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn z0_samples_stay_on_the_stride_lattice(stride in prop::sample::select(vec![4usize, 8, 16])) {
        let g = Grid::new(128, 0.75, 0.35).unwrap();
        let nodes = z0_samples(g, stride);
        prop_assert!(nodes.contains(&(64, 64)));
        for (j, k) in nodes {
            prop_assert!(g.node(j, k).norm() <= g.omega_radius);
            prop_assert!(j % stride == 0 && k % stride == 0);
        }
    }

    #[test]
    fn field_binary_round_trips(vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..16)) {
        let f = field(&vals);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        prop_assert_eq!(Field::read_binary(&mut buf.as_slice()).unwrap(), f);
    }
}
