use std::sync::Arc;

use swlab::closed_forms::bounds_report;
use swlab::diagnostics::{boundary_trace, fit_boundary_bubble};
use swlab::discretization::{sample, FuncSpec, GridSpec};
use swlab::exponents::conformal_exponents;
use swlab::extremal::{power_iterate_with, ExtremalOptions};
use swlab::operators::KernelOperator;
use swlab::ExponentConfig;

fn baseline_setup() -> (ExponentConfig, KernelOperator) {
    let cfg = ExponentConfig::try_new(1, 1.0, 0.1, 0.1, 10.0 / 7.0, 10.0 / 7.0).unwrap();
    let spec = GridSpec {
        n: 1,
        x_extent: 4.0,
        t_max: 4.0,
        nx: 64,
        nt: 64,
        grading: 2.0,
    };
    let op = KernelOperator::new(cfg, Arc::new(spec.build().unwrap())).unwrap();
    (cfg, op)
}

#[test]
#[ignore = "does not hold: a single Gaussian already has Rayleigh quotient 4.20 > 1.05 * 3.21 by independent quadrature"]
fn estimate_below_closed_form_upper_bound() {
    let (cfg, op) = baseline_setup();
    let init = sample(&FuncSpec::gaussian(&[0.5, 1.0], 1.0), op.grid());
    let res = power_iterate_with(&op, init, ExtremalOptions::default()).unwrap();
    let upper = bounds_report(&cfg).unwrap().upper;
    assert!(res.n_est <= 1.05 * upper, "n_est = {}, upper = {upper}", res.n_est);
}

#[test]
#[ignore = "does not hold at alpha = beta = 0.1: the boundary trace decays with a different power than the bubble"]
fn boundary_trace_fits_conformal_bubble() {
    let (_, op) = baseline_setup();
    let init = sample(&FuncSpec::gaussian(&[0.0, 1.0], 1.0), op.grid());
    let res = power_iterate_with(&op, init, ExtremalOptions::default()).unwrap();
    let exponent = conformal_exponents(1, 1.0, 0.1, 0.1).unwrap().f_boundary_exponent();
    let fit = fit_boundary_bubble(&boundary_trace(&res.f_star), exponent).unwrap();
    assert!(fit.converged && fit.residual < 0.02, "{fit:?}");
}
