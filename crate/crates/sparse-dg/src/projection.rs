//! L2 projection onto the sparse space and projection-error measurement.
//!
//! With an orthonormal basis the L2 projection is a plain inner-product
//! computation. General functions go through composite Gauss quadrature on
//! the finest grid; separable functions use per-dimension 1D projections and
//! tensorize, which is both faster and exact for products.

use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function1d::Function1d;
use crate::quadrature::GaussRule;
use crate::sparse_space::{block1d_index, SparseGridFunction, SparseSpace};
use crate::transform::{
    gauss_values_to_local, local_to_gauss_values, local_to_sparse, sparse_to_local, MixedTensor,
};

/// Composite quadrature description: `points`-point Gauss per cell of the
/// dyadic grid at `resolution`. Exact for polynomial degree <= 2*points-1
/// per cell.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureRule {
    pub resolution: usize,
    pub points: usize,
}

impl QuadratureRule {
    /// Default rule for a space: resolution N, k+2 points per cell.
    pub fn for_space(space: &SparseSpace) -> Self {
        QuadratureRule {
            resolution: space.max_level(),
            points: space.degree() + 2,
        }
    }
}

/// Evaluate `f` (physical coordinates) on the tensor Gauss grid.
fn sample_on_grid<F>(space: &SparseSpace, rule: &QuadratureRule, f: &F) -> Result<MixedTensor>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = space.dim();
    let cells = 1usize << rule.resolution;
    let gauss = GaussRule::new(rule.points);
    let nq = gauss.len();
    let axis = cells * nq;
    // Physical coordinates along each axis.
    let mut coords = vec![vec![0.0f64; axis]; d];
    for m in 0..d {
        for c in 0..cells {
            for (q, &x) in gauss.nodes.iter().enumerate() {
                let xref = (c as f64 + x) / cells as f64;
                coords[m][c * nq + q] = space.domain().lo[m] + space.domain().width[m] * xref;
            }
        }
    }
    let total = axis.pow(d as u32);
    let mut data = vec![0.0f64; total];
    let bad = std::sync::Mutex::new(None::<Vec<f64>>);
    data.par_chunks_mut(axis)
        .enumerate()
        .for_each(|(outer, chunk)| {
            let mut x = vec![0.0f64; d];
            let mut rem = outer;
            for m in (0..d.saturating_sub(1)).rev() {
                x[m] = coords[m][rem % axis];
                rem /= axis;
            }
            for (last, slot) in chunk.iter_mut().enumerate() {
                x[d - 1] = coords[d - 1][last];
                let v = f(&x);
                if !v.is_finite() {
                    *bad.lock().unwrap() = Some(x.clone());
                }
                *slot = v;
            }
        });
    if let Some(x) = bad.into_inner().unwrap() {
        return Err(Error::NonFiniteSample(x));
    }
    Ok(MixedTensor {
        lens: vec![axis; d],
        data,
    })
}

/// L2 projection of a general function onto the sparse space.
pub fn project<F>(f: F, space: &Arc<SparseSpace>) -> Result<SparseGridFunction>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    project_with_rule(f, space, &QuadratureRule::for_space(space))
}

/// Projection with an explicit quadrature rule (resolution must be the
/// space's level; finer rules are only for error measurement).
pub fn project_with_rule<F>(
    f: F,
    space: &Arc<SparseSpace>,
    rule: &QuadratureRule,
) -> Result<SparseGridFunction>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    debug_assert_eq!(rule.resolution, space.max_level());
    let vals = sample_on_grid(space, rule, &f)?;
    let gauss = GaussRule::new(rule.points);
    let local = gauss_values_to_local(&vals, space.basis(), rule.resolution, &gauss);
    Ok(local_to_sparse(&local, space))
}

/// Projection of a separable product f(x) = prod_m f_m(x_m): 1D projections
/// per dimension, tensorized onto the sparse index set.
pub fn project_separable(
    factors: &[&(dyn Fn(f64) -> f64 + Sync)],
    space: &Arc<SparseSpace>,
) -> SparseGridFunction {
    let d = space.dim();
    debug_assert_eq!(factors.len(), d);
    let kp = space.degree() + 1;
    let n = space.max_level();
    let one_d: Vec<Vec<f64>> = (0..d)
        .map(|m| {
            Function1d::project(
                n,
                Arc::clone(space.basis()),
                space.domain().lo[m],
                space.domain().width[m],
                space.degree() + 2,
                &factors[m],
            )
            .coeffs()
            .to_vec()
        })
        .collect();
    let mut u = SparseGridFunction::zeros(Arc::clone(space));
    let blen = space.block_len();
    for (bi, blk) in space.blocks().iter().enumerate() {
        let base: Vec<usize> = (0..d)
            .map(|m| block1d_index(blk.level[m] as usize, blk.cell[m] as usize) * kp)
            .collect();
        let dst = &mut u.coeffs_mut()[bi * blen..(bi + 1) * blen];
        for (flat, slot) in dst.iter_mut().enumerate() {
            let mut rem = flat;
            let mut prod = 1.0;
            for m in (0..d).rev() {
                let p = rem % kp;
                rem /= kp;
                prod *= one_d[m][base[m] + p];
            }
            *slot = prod;
        }
    }
    u
}

/// Physical L2 norm of (u - f) by composite quadrature at the rule's
/// resolution (>= the space level).
pub fn l2_error<F>(u: &SparseGridFunction, f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let space = u.space();
    debug_assert!(rule.resolution >= space.max_level());
    let gauss = GaussRule::new(rule.points);
    // Synthesize u at the rule's resolution: its hierarchical content above
    // the space level is zero, so synthesis on the bigger grid is exact.
    let local = sparse_to_local_at(u, rule.resolution);
    let uvals = local_to_gauss_values(&local, space.basis(), rule.resolution, &gauss);
    let fvals = sample_on_grid(space, rule, &f)?;
    let d = space.dim();
    let cells = 1usize << rule.resolution;
    let nq = gauss.len();
    let axis = cells * nq;
    // Quadrature weight along one axis (reference measure).
    let wline: Vec<f64> = (0..axis)
        .map(|idx| gauss.weights[idx % nq] / cells as f64)
        .collect();
    let total = axis.pow(d as u32);
    let err2: f64 = (0..total)
        .into_par_iter()
        .chunks(axis.max(1024))
        .map(|chunk| {
            let mut acc = 0.0;
            for flat in chunk {
                let diff = uvals.data[flat] - fvals.data[flat];
                let mut w = 1.0;
                let mut rem = flat;
                for _ in 0..d {
                    w *= wline[rem % axis];
                    rem /= axis;
                }
                acc += w * diff * diff;
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok((err2 * space.domain().volume()).sqrt())
}

/// Quadrature approximation of the physical inner product <u, f>.
pub fn quad_inner_product<F>(u: &SparseGridFunction, f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let space = u.space();
    let gauss = GaussRule::new(rule.points);
    let local = sparse_to_local_at(u, rule.resolution);
    let uvals = local_to_gauss_values(&local, space.basis(), rule.resolution, &gauss);
    let fvals = sample_on_grid(space, rule, &f)?;
    let d = space.dim();
    let cells = 1usize << rule.resolution;
    let nq = gauss.len();
    let axis = cells * nq;
    let wline: Vec<f64> = (0..axis)
        .map(|idx| gauss.weights[idx % nq] / cells as f64)
        .collect();
    let mut acc = 0.0;
    for flat in 0..uvals.data.len() {
        let mut w = 1.0;
        let mut rem = flat;
        for _ in 0..d {
            w *= wline[rem % axis];
            rem /= axis;
        }
        acc += w * uvals.data[flat] * fvals.data[flat];
    }
    Ok(acc * space.domain().volume())
}

/// Physical L2 norm of u - v for two sparse functions on the same space.
pub fn l2_distance(u: &SparseGridFunction, v: &SparseGridFunction) -> f64 {
    let mut diff = u.clone();
    diff.axpy(-1.0, v);
    diff.norm_l2()
}

/// Like [`crate::transform::sparse_to_local`] but synthesized on a finer
/// dyadic grid of the given level.
pub fn sparse_to_local_at(u: &SparseGridFunction, level: usize) -> crate::transform::TensorGrid {
    let space = u.space();
    let n = space.max_level();
    if level == n {
        return sparse_to_local(u);
    }
    assert!(level > n);
    let kp = space.degree() + 1;
    let axis = (1usize << level) * kp;
    let small = crate::transform::sparse_to_full_hier(u);
    let small_axis = small.axis_len;
    let d = space.dim();
    let mut big = crate::transform::TensorGrid::zeros(axis, d);
    // Hierarchical layouts nest: the level-n prefix is shared.
    let mut idx = vec![0usize; d];
    for flat in 0..small.data.len() {
        let v = small.data[flat];
        if v != 0.0 {
            let mut rem = flat;
            for m in (0..d).rev() {
                idx[m] = rem % small_axis;
                rem /= small_axis;
            }
            let mut pos = 0usize;
            for m in 0..d {
                pos = pos * axis + idx[m];
            }
            big.data[pos] = v;
        }
    }
    let basis = space.basis();
    let mut t = big;
    for axis_m in 0..d {
        t = map_axis_full(&t, axis_m, |hier, local| {
            crate::transform::synthesize_1d(basis, level, hier, local)
        });
    }
    t
}

fn map_axis_full<F>(
    t: &crate::transform::TensorGrid,
    axis: usize,
    mut f: F,
) -> crate::transform::TensorGrid
where
    F: FnMut(&[f64], &mut [f64]),
{
    let d = t.d;
    let len = t.axis_len;
    let outer: usize = len.pow(axis as u32);
    let inner: usize = len.pow((d - 1 - axis) as u32);
    let mut out = vec![0.0; t.data.len()];
    let mut fiber_in = vec![0.0; len];
    let mut fiber_out = vec![0.0; len];
    for o in 0..outer {
        for i in 0..inner {
            for (t_idx, slot) in fiber_in.iter_mut().enumerate() {
                *slot = t.data[(o * len + t_idx) * inner + i];
            }
            f(&fiber_in, &mut fiber_out);
            for (t_idx, &v) in fiber_out.iter().enumerate() {
                out[(o * len + t_idx) * inner + i] = v;
            }
        }
    }
    crate::transform::TensorGrid {
        axis_len: len,
        d,
        data: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse_space::{BasisId, Domain};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn constant_projects_to_single_coefficient() {
        let space = SparseSpace::new(3, 1, Domain::unit(2)).unwrap();
        let u = project(|_x: &[f64]| 1.0, &space).unwrap();
        for (id, &c) in space.basis_ids().iter().zip(u.coeffs()) {
            let expect = if id.level.iter().all(|&l| l == 0) && id.poly.iter().all(|&p| p == 0) {
                1.0
            } else {
                0.0
            };
            assert_abs_diff_eq!(c, expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn linear_function_coefficients_d1() {
        let space = SparseSpace::new(0, 1, Domain::unit(1)).unwrap();
        let u = project(|x: &[f64]| x[0], &space).unwrap();
        let c0 = u
            .get(&BasisId {
                level: vec![0],
                cell: vec![0],
                poly: vec![0],
            })
            .unwrap();
        let c1 = u
            .get(&BasisId {
                level: vec![0],
                cell: vec![0],
                poly: vec![1],
            })
            .unwrap();
        assert_relative_eq!(c0, 0.5, epsilon = 1e-14);
        assert_relative_eq!(c1, 1.0 / (2.0 * 3f64.sqrt()), epsilon = 1e-14);
    }

    #[test]
    fn separable_path_matches_general_projection() {
        let space = SparseSpace::new(5, 2, Domain::unit(2)).unwrap();
        let fs = project_separable(
            &[&|x: f64| (TAU * x).sin(), &|y: f64| (TAU * y).sin()],
            &space,
        );
        let fg = project(|x: &[f64]| (TAU * x[0]).sin() * (TAU * x[1]).sin(), &space).unwrap();
        for (a, b) in fs.coeffs().iter().zip(fg.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn separable_equals_general_in_one_dimension() {
        let space = SparseSpace::new(4, 2, Domain::unit(1)).unwrap();
        let fs = project_separable(&[&|x: f64| (1.5 * x).exp()], &space);
        let fg = project(|x: &[f64]| (1.5 * x[0]).exp(), &space).unwrap();
        for (a, b) in fs.coeffs().iter().zip(fg.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let space = SparseSpace::new(4, 1, Domain::unit(2)).unwrap();
        let u = project(|x: &[f64]| (TAU * (x[0] + x[1])).sin(), &space).unwrap();
        let again = project(|x: &[f64]| u.eval_point(x).unwrap(), &space).unwrap();
        for (a, b) in u.coeffs().iter().zip(again.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn galerkin_orthogonality_and_best_approximation() {
        let space = SparseSpace::new(3, 2, Domain::unit(2)).unwrap();
        let f = |x: &[f64]| (TAU * x[0]).sin() * (0.5 + x[1] * x[1]);
        let pf = project(f, &space).unwrap();
        // Same rule as the projection: orthogonality holds to roundoff.
        let rule = QuadratureRule::for_space(&space);
        let fine = QuadratureRule {
            resolution: 5,
            points: 6,
        };
        let err_pf = l2_error(&pf, f, &fine).unwrap();
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..20 {
            let mut w = SparseGridFunction::zeros(Arc::clone(&space));
            for c in w.coeffs_mut() {
                *c = rng.random_range(-1.0..1.0);
            }
            // Orthogonality: <Pf - f, w> = 0 up to quadrature error.
            let ip_pf = quad_inner_product(&w, |x: &[f64]| pf.eval_point(x).unwrap(), &rule)
                .unwrap();
            let ip_f = quad_inner_product(&w, f, &rule).unwrap();
            assert_abs_diff_eq!(ip_pf - ip_f, 0.0, epsilon = 1e-10);
            // Best approximation against random competitors.
            let err_w = l2_error(&w, f, &fine).unwrap();
            assert!(err_pf <= err_w + 1e-10);
        }
    }

    #[test]
    fn reproduction_and_zero_errors() {
        let space = SparseSpace::new(3, 2, Domain::unit(2)).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        for c in u.coeffs_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
        let rule = QuadratureRule {
            resolution: 3,
            points: 4,
        };
        let e = l2_error(&u, |x: &[f64]| u.eval_point(x).unwrap(), &rule).unwrap();
        assert!(e <= 1e-12, "reproduction error {e}");
        let z = SparseGridFunction::zeros(Arc::clone(&space));
        assert_eq!(l2_error(&z, |_: &[f64]| 0.0, &rule).unwrap(), 0.0);
    }

    #[test]
    fn parseval_matches_quadrature_for_random_functions() {
        let space = SparseSpace::new(3, 1, Domain::new(&[(0.0, 2.0), (-1.0, 1.0)])).unwrap();
        let mut rng = StdRng::seed_from_u64(12);
        let rule = QuadratureRule {
            resolution: 3,
            points: 4,
        };
        for _ in 0..100 {
            let mut u = SparseGridFunction::zeros(Arc::clone(&space));
            for c in u.coeffs_mut() {
                *c = rng.random_range(-1.0..1.0);
            }
            let quad = l2_error(&u, |_: &[f64]| 0.0, &rule).unwrap();
            assert_relative_eq!(u.norm_l2(), quad, epsilon = 1e-10);
        }
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let space = SparseSpace::new(2, 1, Domain::unit(2)).unwrap();
        let res = project(|x: &[f64]| 1.0 / (x[0] - x[0]), &space);
        assert!(matches!(res, Err(Error::NonFiniteSample(_))));
    }

    #[test]
    fn projection_error_decays_at_expected_rate() {
        // f = sin(2 pi (x+y)), k=1: slope of log2(err) vs N over N=4..7
        // approaches -(k+1), with slack for the N^d logarithmic factor.
        let mut errs = Vec::new();
        for n in 4..=7 {
            let space = SparseSpace::new(n, 1, Domain::unit(2)).unwrap();
            let f = |x: &[f64]| (TAU * (x[0] + x[1])).sin();
            let pf = project(f, &space).unwrap();
            let rule = QuadratureRule {
                resolution: n,
                points: 5,
            };
            errs.push(l2_error(&pf, f, &rule).unwrap());
        }
        let slope = (errs.last().unwrap() / errs[0]).log2() / (errs.len() as f64 - 1.0);
        assert!(
            (-2.1..=-1.65).contains(&slope),
            "slope {slope}, errors {errs:?}"
        );
    }
}
