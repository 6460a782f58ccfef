//! In one dimension the sparse space equals the full piecewise polynomial
//! space, so the solver must match a plain cell-local RKDG implementation
//! step for step.

mod common;

use std::sync::Arc;

use common::FullGridDg;
use sparse_dg::quadrature::GaussRule;
use sparse_dg::sparse_space::{Domain, SparseSpace};
use sparse_dg::time_stepper::{cfl_dt, StepControl};
use sparse_dg::transport::{BoundarySpec, FluxSpec, TransportOperator, VelocityField};

#[test]
fn sparse_solver_matches_fullgrid_rkdg_per_step() {
    let n = 4;
    let f0 = |x: f64| (std::f64::consts::TAU * x).sin() + 0.4 * (2.0 * std::f64::consts::TAU * x).cos();
    for k in 1..=3usize {
        let space = SparseSpace::new(n, k, Domain::unit(1)).unwrap();
        let mut sparse =
            sparse_dg::projection::project_separable(&[&f0], &space);
        let op = TransportOperator::new(
            Arc::clone(&space),
            VelocityField::constant(&[1.0], &[1.0]),
            FluxSpec::Upwind,
            BoundarySpec::periodic(1),
        )
        .unwrap();
        let mut full = FullGridDg::project(n, k, 1.0, f0);
        let control = StepControl::new(0.1, 1.0, k, vec![1.0], vec![1.0 / 16.0]);
        let dt = cfl_dt(&control).unwrap();
        let rule = GaussRule::new(k + 3);
        let cells = 1usize << n;
        for step in 0..10 {
            sparse = sparse_dg::time_stepper::rk3_step(&sparse, step as f64 * dt, dt, |s, t| {
                op.apply(s, t)
            })
            .unwrap();
            full.rk3_step(dt);
            let mut err2 = 0.0;
            for c in 0..cells {
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let xg = (c as f64 + x) / cells as f64;
                    let d = sparse.eval_reference(&[xg]) - full.eval_local(c, x);
                    err2 += w / cells as f64 * d * d;
                }
            }
            let err = err2.sqrt();
            assert!(
                err <= 1e-12,
                "k={k} step {step}: solvers diverged by {err}"
            );
        }
    }
}
