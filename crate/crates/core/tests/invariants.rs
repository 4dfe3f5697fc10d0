use std::sync::Arc;

use proptest::prelude::*;
use swlab::diagnostics::symmetry_residual;
use swlab::discretization::{sample, Field, FuncSpec, GridSpec, HalfSpaceGrid};
use swlab::exponents::{solve_r, validate_primal};
use swlab::operators::{inner, KernelOperator};
use swlab::ExponentConfig;

fn baseline() -> ExponentConfig {
    ExponentConfig::try_new(1, 1.0, 0.1, 0.1, 10.0 / 7.0, 10.0 / 7.0).unwrap()
}

fn grid(cells: usize) -> Arc<HalfSpaceGrid> {
    let spec = GridSpec {
        n: 1,
        x_extent: 4.0,
        t_max: 4.0,
        nx: cells,
        nt: cells,
        grading: 2.0,
    };
    Arc::new(spec.build().unwrap())
}

fn small_grid() -> Arc<HalfSpaceGrid> {
    thread_local! {
        static GRID: Arc<HalfSpaceGrid> = grid(12);
    }
    GRID.with(Arc::clone)
}

fn field(values: Vec<f64>) -> Field {
    Field::new(small_grid(), values).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// `||K f||_q / ||f||_p` for `f = exp(-|X - (0, 1)|^2)` on `[-4, 4] x (0, 4]`
/// at the baseline exponents, from a polar-coordinate Gauss-Legendre
/// quadrature of the potential about each target point.
const GAUSSIAN_RAYLEIGH_BOX4: f64 = 4.186188;

#[test]
fn gaussian_rayleigh_matches_polar_quadrature() {
    let op_at = |cells| KernelOperator::new(baseline(), grid(cells)).unwrap();
    let spec = FuncSpec::gaussian(&[0.0, 1.0], 1.0);
    let coarse = op_at(64);
    let q64 = coarse.rayleigh(&sample(&spec, coarse.grid())).unwrap();
    let fine = op_at(128);
    let q128 = fine.rayleigh(&sample(&spec, fine.grid())).unwrap();
    assert!(rel(q64, GAUSSIAN_RAYLEIGH_BOX4) < 2e-3, "{q64}");
    assert!(rel(q128, GAUSSIAN_RAYLEIGH_BOX4) < rel(q64, GAUSSIAN_RAYLEIGH_BOX4), "{q64} {q128}");
}

fn node_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], small_grid().len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_identity(f in node_values(), g in node_values()) {
        let op = KernelOperator::new(baseline(), small_grid()).unwrap();
        let (f, g) = (field(f), field(g));
        let lhs = inner(&op.apply(&f).unwrap(), &g);
        let rhs = inner(&f, &op.apply_adjoint(&g).unwrap());
        prop_assume!(lhs > 0.0);
        prop_assert!(rel(lhs, rhs) < 1e-12, "{} {}", lhs, rhs);
    }

    #[test]
    fn hoelder_partner_closes_the_gap(f in node_values(), g in node_values(), scale in 0.01f64..100.0) {
        let op = KernelOperator::new(baseline(), small_grid()).unwrap();
        let f = field(f);
        prop_assume!(f.values.iter().any(|&v| v > 0.0));
        let gap = op.duality_gap(&f).unwrap();
        prop_assert!(gap.abs() < 1e-12, "{}", gap);
        prop_assert!((op.duality_gap(&f.scaled(scale)).unwrap()).abs() < 1e-12);
        let g = field(g);
        prop_assume!(g.values.iter().any(|&v| v > 0.0));
        prop_assert!(op.duality_gap_with(&f, &g).unwrap() >= -1e-12);
    }

    #[test]
    fn rayleigh_is_homogeneous(f in node_values(), scale in 1e-3f64..1e3) {
        let op = KernelOperator::new(baseline(), small_grid()).unwrap();
        let f = field(f);
        prop_assume!(f.values.iter().any(|&v| v > 0.0));
        let a = op.rayleigh(&f).unwrap();
        let b = op.rayleigh(&f.scaled(scale)).unwrap();
        prop_assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn mirror_pairs_are_symmetric(x in 0.2f64..1.2, t in 0.6f64..2.0, w in 0.4f64..1.0) {
        let g = grid(48);
        let spec = FuncSpec::Sum {
            terms: vec![FuncSpec::gaussian(&[x, t], w), FuncSpec::gaussian(&[-x, t], w)],
        };
        let rep = symmetry_residual(&sample(&spec, &g), 10.0 / 7.0).unwrap();
        prop_assert!(rep.residual < 1e-6 && rep.center[0].abs() < 1e-6, "{:?}", rep);
    }

    #[test]
    fn solved_r_is_admissible_or_rejected(
        n in 1u32..3,
        lambda in 0.2f64..2.5,
        alpha in -0.3f64..0.5,
        beta in -0.3f64..0.5,
        p in 1.05f64..3.0,
    ) {
        prop_assume!(lambda < n as f64 + 1.0);
        if let Ok(r) = solve_r(n, lambda, alpha, beta, p) {
            let balance = 1.0 / p + 1.0 / r + (alpha + beta + lambda) / (n as f64 + 1.0);
            prop_assert!((balance - 2.0).abs() < 1e-12);
            let report = validate_primal(n as i64, lambda, alpha, beta, p, r);
            prop_assert_eq!(report.valid, ExponentConfig::try_new(n, lambda, alpha, beta, p, r).is_ok());
        }
    }
}
