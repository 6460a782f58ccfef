//! The transport operator must agree with a dense full-tensor Galerkin
//! assembly on the finest grid, restricted to the sparse basis. The oracle
//! below evaluates basis functions pointwise and assembles volume and face
//! integrals by straight quadrature; it shares no code with the operator's
//! factored 1D machinery.

mod common;

use common::dense_rhs_matrix;
use std::sync::Arc;

use sparse_dg::basis1d::Side;
use sparse_dg::quadrature::GaussRule;
use sparse_dg::sparse_space::{Domain, SparseGridFunction, SparseSpace};
use sparse_dg::transport::{
    Bc1d, BoundarySpec, FluxSpec, TransportOperator, VelocityField,
};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn check_case(
    n: usize,
    k: usize,
    field: VelocityField,
    flux: FluxSpec,
    bc: BoundarySpec,
    t: f64,
    seed: u64,
) {
    let space = SparseSpace::new(n, k, Domain::unit(2)).unwrap();
    let dense = dense_rhs_matrix(&space, &field, flux, &bc, t);
    let op = TransportOperator::new(Arc::clone(&space), field, flux, bc).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..3 {
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        for c in u.coeffs_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
        let fast = op.apply(&u, t);
        let scale = 1.0 + fast.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for (ci, row) in dense.iter().enumerate() {
            let mut acc = 0.0;
            for (bi, &aij) in row.iter().enumerate() {
                acc += aij * u.coeffs()[bi];
            }
            let diff = (acc - fast.coeffs()[ci]).abs();
            assert!(
                diff <= 1e-10 * scale,
                "coefficient {ci}: dense {acc} vs operator {}",
                fast.coeffs()[ci]
            );
        }
    }
}

#[test]
fn constant_field_upwind_matches_dense_assembly() {
    check_case(
        3,
        1,
        VelocityField::constant(&[1.0, 1.0], &[1.0, 1.0]),
        FluxSpec::Upwind,
        BoundarySpec::periodic(2),
        0.0,
        1,
    );
}

#[test]
fn constant_field_lf_matches_dense_assembly() {
    check_case(
        2,
        2,
        VelocityField::constant(&[0.8, -1.3], &[1.0, 1.0]),
        FluxSpec::GlobalLaxFriedrichs,
        BoundarySpec::periodic(2),
        0.0,
        2,
    );
}

#[test]
fn constant_field_zero_exterior_matches_dense_assembly() {
    check_case(
        3,
        1,
        VelocityField::constant(&[1.0, -0.6], &[1.0, 1.0]),
        FluxSpec::GlobalLaxFriedrichs,
        BoundarySpec(vec![Bc1d::ZeroExterior, Bc1d::ZeroExterior]),
        0.0,
        3,
    );
}

#[test]
fn solid_rotation_lf_matches_dense_assembly() {
    check_case(
        3,
        2,
        VelocityField::solid_rotation_2d(),
        FluxSpec::GlobalLaxFriedrichs,
        BoundarySpec::periodic(2),
        0.0,
        4,
    );
}

#[test]
fn solid_rotation_upwind_matches_dense_assembly() {
    check_case(
        3,
        1,
        VelocityField::solid_rotation_2d(),
        FluxSpec::Upwind,
        BoundarySpec::periodic(2),
        0.0,
        5,
    );
}

#[test]
fn projected_deformational_lf_matches_dense_assembly() {
    let space = SparseSpace::new(2, 2, Domain::unit(2)).unwrap();
    let field = sparse_dg::transport::project_field(&VelocityField::deformational_2d(1.5), &space);
    check_case(
        2,
        2,
        field,
        FluxSpec::GlobalLaxFriedrichs,
        BoundarySpec::periodic(2),
        0.4,
        6,
    );
}

#[test]
fn stability_identity_for_upwind_constant_field() {
    // <R(u), u> = -sum_faces int (|a.n|/2) [u]^2 ds, and never positive.
    let space = SparseSpace::new(3, 2, Domain::unit(2)).unwrap();
    let a_phys = [1.0, 1.0];
    let op = TransportOperator::new(
        Arc::clone(&space),
        VelocityField::constant(&a_phys, &[1.0, 1.0]),
        FluxSpec::Upwind,
        BoundarySpec::periodic(2),
    )
    .unwrap();
    let n = space.max_level();
    let cells = 1usize << n;
    let h = 1.0 / cells as f64;
    let rule = GaussRule::new(space.degree() + 3);
    let mut rng = StdRng::seed_from_u64(77);
    for _ in 0..50 {
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        for c in u.coeffs_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
        let r = op.apply(&u, 0.0);
        let lhs = r.inner_l2(&u);
        // Independent jump quadrature.
        let mut rhs = 0.0;
        for m in 0..2 {
            for f in 0..cells {
                let xf = f as f64 * h;
                for tc in 0..cells {
                    for (xq, wq) in rule.nodes.iter().zip(&rule.weights) {
                        let xt = (tc as f64 + xq) * h;
                        let (mut xm, mut xp) = (vec![0.0; 2], vec![0.0; 2]);
                        xm[m] = if f == 0 { 1.0 } else { xf };
                        xp[m] = xf;
                        xm[1 - m] = xt;
                        xp[1 - m] = xt;
                        let mut sides = [Side::Right; 2];
                        sides[m] = Side::Left;
                        let um = u.eval_reference_sides(&xm, &sides);
                        let up = u.eval_reference_sides(&xp, &[Side::Right; 2]);
                        rhs -= 0.5 * a_phys[m].abs() * (um - up).powi(2) * wq * h;
                    }
                }
            }
        }
        assert!(lhs <= 1e-12, "energy rate {lhs} must be non-positive");
        assert!(
            (lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()),
            "identity violated: {lhs} vs {rhs}"
        );
    }
}
