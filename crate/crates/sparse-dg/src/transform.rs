//! Multiwavelet transforms between the hierarchical representation and
//! per-cell local Legendre coefficients on the finest grid, plus tensor
//! sampling helpers built on them.
//!
//! These bridges power projection of general (non-separable) functions,
//! quadrature-based diagnostics and snapshot evaluation. Hot solver paths
//! never leave the hierarchical representation.

use std::sync::Arc;

use crate::basis1d::Basis1dTable;
use crate::quadrature::GaussRule;
use crate::sparse_space::{block1d_index, SparseGridFunction, SparseSpace};

/// Forward (analysis) 1D pyramid: local orthonormal Legendre coefficients on
/// 2^n cells -> hierarchical coefficients, in place via scratch.
pub fn analyze_1d(basis: &Basis1dTable, n: usize, local: &[f64], hier: &mut [f64]) {
    let kp = basis.modes();
    debug_assert_eq!(local.len(), (1 << n) * kp);
    debug_assert_eq!(hier.len(), local.len());
    let (rl, rr) = basis.refine_filters();
    let (wl, wr) = basis.wavelet_filters();
    let mut work = local.to_vec();
    for lev in (1..=n).rev() {
        let parents = 1usize << (lev - 1);
        let mut next = vec![0.0; parents * kp];
        for pcell in 0..parents {
            let cl = &work[2 * pcell * kp..(2 * pcell + 1) * kp];
            let cr = &work[(2 * pcell + 1) * kp..(2 * pcell + 2) * kp];
            for p in 0..kp {
                let mut s = 0.0;
                let mut wv = 0.0;
                for q in 0..kp {
                    s += rl[p][q] * cl[q] + rr[p][q] * cr[q];
                    wv += wl[p][q] * cl[q] + wr[p][q] * cr[q];
                }
                next[pcell * kp + p] = s;
                hier[(block1d_index(lev, pcell)) * kp + p] = wv;
            }
        }
        work = next;
    }
    hier[..kp].copy_from_slice(&work[..kp]);
}

/// Inverse (synthesis) 1D pyramid: hierarchical -> local coefficients.
pub fn synthesize_1d(basis: &Basis1dTable, n: usize, hier: &[f64], local: &mut [f64]) {
    let kp = basis.modes();
    debug_assert_eq!(local.len(), (1 << n) * kp);
    let (rl, rr) = basis.refine_filters();
    let (wl, wr) = basis.wavelet_filters();
    let mut work = hier[..kp].to_vec();
    for lev in 1..=n {
        let parents = 1usize << (lev - 1);
        let mut next = vec![0.0; 2 * parents * kp];
        for pcell in 0..parents {
            let base = block1d_index(lev, pcell) * kp;
            for q in 0..kp {
                let mut l = 0.0;
                let mut r = 0.0;
                for p in 0..kp {
                    let s = work[pcell * kp + p];
                    let wv = hier[base + p];
                    l += rl[p][q] * s + wl[p][q] * wv;
                    r += rr[p][q] * s + wr[p][q] * wv;
                }
                next[2 * pcell * kp + q] = l;
                next[(2 * pcell + 1) * kp + q] = r;
            }
        }
        work = next;
    }
    local.copy_from_slice(&work);
}

/// Dense tensor data with one axis per dimension, each of length
/// `cells * modes`; used for both hierarchical and local layouts.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    pub axis_len: usize,
    pub d: usize,
    pub data: Vec<f64>,
}

impl TensorGrid {
    pub fn zeros(axis_len: usize, d: usize) -> Self {
        TensorGrid {
            axis_len,
            d,
            data: vec![0.0; axis_len.pow(d as u32)],
        }
    }
}

/// Apply a per-fiber 1D map along axis `axis` (lengths may change).
fn map_axis<F>(t: &TensorGrid, axis: usize, new_len: usize, mut f: F) -> TensorGrid
where
    F: FnMut(&[f64], &mut [f64]),
{
    let d = t.d;
    let len = t.axis_len;
    let outer: usize = len.pow(axis as u32);
    let inner: usize = len.pow((d - 1 - axis) as u32);
    let mut out = vec![0.0; outer * new_len * inner];
    let mut fiber_in = vec![0.0; len];
    let mut fiber_out = vec![0.0; new_len];
    for o in 0..outer {
        for i in 0..inner {
            for (t_idx, slot) in fiber_in.iter_mut().enumerate() {
                *slot = t.data[(o * len + t_idx) * inner + i];
            }
            f(&fiber_in, &mut fiber_out);
            for (t_idx, &v) in fiber_out.iter().enumerate() {
                out[(o * new_len + t_idx) * inner + i] = v;
            }
        }
    }
    TensorGrid {
        axis_len: new_len,
        d,
        data: out,
    }
}

/// Axis maps with differing in/out lengths need the intermediate mixed shape
/// handled; this version tracks per-axis lengths.
pub struct MixedTensor {
    pub lens: Vec<usize>,
    pub data: Vec<f64>,
}

impl MixedTensor {
    fn map_axis<F>(&self, axis: usize, new_len: usize, mut f: F) -> MixedTensor
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let inner: usize = self.lens[axis + 1..].iter().product();
        let outer: usize = self.lens[..axis].iter().product();
        let len = self.lens[axis];
        let mut out = vec![0.0; outer * new_len * inner];
        let mut fiber_in = vec![0.0; len];
        let mut fiber_out = vec![0.0; new_len];
        for o in 0..outer {
            for i in 0..inner {
                for (t, slot) in fiber_in.iter_mut().enumerate() {
                    *slot = self.data[(o * len + t) * inner + i];
                }
                f(&fiber_in, &mut fiber_out);
                for (t, &v) in fiber_out.iter().enumerate() {
                    out[(o * new_len + t) * inner + i] = v;
                }
            }
        }
        let mut lens = self.lens.clone();
        lens[axis] = new_len;
        MixedTensor { lens, data: out }
    }
}

/// Scatter sparse hierarchical coefficients into a full hierarchical tensor
/// (axes ordered as the per-dimension hierarchical layout).
pub fn sparse_to_full_hier(u: &SparseGridFunction) -> TensorGrid {
    let sp = u.space();
    let n = sp.max_level();
    let kp = sp.degree() + 1;
    let axis = (1usize << n) * kp;
    let mut t = TensorGrid::zeros(axis, sp.dim());
    let blen = sp.block_len();
    for (bi, blk) in sp.blocks().iter().enumerate() {
        let base: Vec<usize> = (0..sp.dim())
            .map(|m| block1d_index(blk.level[m] as usize, blk.cell[m] as usize) * kp)
            .collect();
        let src = &u.coeffs()[bi * blen..(bi + 1) * blen];
        for (flat, &c) in src.iter().enumerate() {
            if c != 0.0 {
                let mut rem = flat;
                let mut pos = 0usize;
                for m in (0..sp.dim()).rev() {
                    let p = rem % kp;
                    rem /= kp;
                    pos += (base[m] + p) * axis.pow((sp.dim() - 1 - m) as u32);
                }
                t.data[pos] = c;
            }
        }
    }
    t
}

/// Gather a full hierarchical tensor back onto the sparse index set.
pub fn full_hier_to_sparse(t: &TensorGrid, space: &Arc<SparseSpace>) -> SparseGridFunction {
    let n = space.max_level();
    let kp = space.degree() + 1;
    let axis = (1usize << n) * kp;
    debug_assert_eq!(t.axis_len, axis);
    let mut u = SparseGridFunction::zeros(Arc::clone(space));
    let blen = space.block_len();
    let d = space.dim();
    for (bi, blk) in space.blocks().iter().enumerate() {
        let base: Vec<usize> = (0..d)
            .map(|m| block1d_index(blk.level[m] as usize, blk.cell[m] as usize) * kp)
            .collect();
        let dst = &mut u.coeffs_mut()[bi * blen..(bi + 1) * blen];
        for (flat, slot) in dst.iter_mut().enumerate() {
            let mut rem = flat;
            let mut pos = 0usize;
            for m in (0..d).rev() {
                let p = rem % kp;
                rem /= kp;
                pos += (base[m] + p) * axis.pow((d - 1 - m) as u32);
            }
            *slot = t.data[pos];
        }
    }
    u
}

/// Sparse coefficients -> per-cell local Legendre coefficients on the full
/// finest grid (axes: cell*modes per dimension).
pub fn sparse_to_local(u: &SparseGridFunction) -> TensorGrid {
    let sp = u.space();
    let basis = sp.basis();
    let n = sp.max_level();
    let mut t = sparse_to_full_hier(u);
    for axis in 0..sp.dim() {
        t = map_axis(&t, axis, t.axis_len, |hier, local| {
            synthesize_1d(basis, n, hier, local)
        });
    }
    t
}

/// Per-cell local coefficients -> sparse hierarchical coefficients
/// (L2 projection onto the sparse set: higher levels are simply dropped).
pub fn local_to_sparse(t: &TensorGrid, space: &Arc<SparseSpace>) -> SparseGridFunction {
    let basis = space.basis();
    let n = space.max_level();
    let mut t2 = t.clone();
    for axis in 0..space.dim() {
        t2 = map_axis(&t2, axis, t2.axis_len, |local, hier| {
            analyze_1d(basis, n, local, hier)
        });
    }
    full_hier_to_sparse(&t2, space)
}

/// Values of the local representation at the tensor Gauss grid
/// (per axis: cell * rule.len() + node).
pub fn local_to_gauss_values(
    t: &TensorGrid,
    basis: &Basis1dTable,
    n: usize,
    rule: &GaussRule,
) -> MixedTensor {
    let kp = basis.modes();
    let nq = rule.len();
    let cells = 1usize << n;
    let scale = (cells as f64).sqrt();
    // b[q][p] = value of local mode p at node q (same in every cell).
    let mut bmat = vec![vec![0.0; kp]; nq];
    for (q, &x) in rule.nodes.iter().enumerate() {
        for (p, b_qp) in bmat[q].iter_mut().enumerate() {
            *b_qp = scale * crate::basis1d::legendre01(p, x);
        }
    }
    let mut m = MixedTensor {
        lens: vec![t.axis_len; t.d],
        data: t.data.clone(),
    };
    for axis in 0..t.d {
        m = m.map_axis(axis, cells * nq, |coef, vals| {
            for c in 0..cells {
                for q in 0..nq {
                    let mut acc = 0.0;
                    for p in 0..kp {
                        acc += bmat[q][p] * coef[c * kp + p];
                    }
                    vals[c * nq + q] = acc;
                }
            }
        });
    }
    m
}

/// Adjoint of [`local_to_gauss_values`]: quadrature samples -> local
/// coefficients (exact local L2 projection when the rule is exact).
pub fn gauss_values_to_local(
    vals: &MixedTensor,
    basis: &Basis1dTable,
    n: usize,
    rule: &GaussRule,
) -> TensorGrid {
    let kp = basis.modes();
    let nq = rule.len();
    let cells = 1usize << n;
    let scale = 1.0 / (cells as f64).sqrt();
    // bt[p][q] = w_q * value of local mode p at node q * cell width.
    let mut bt = vec![vec![0.0; nq]; kp];
    for (q, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        for (p, row) in bt.iter_mut().enumerate() {
            row[q] = w * scale * crate::basis1d::legendre01(p, x);
        }
    }
    let mut m = MixedTensor {
        lens: vec![vals.lens[0]; vals.lens.len()],
        data: vals.data.clone(),
    };
    for axis in 0..vals.lens.len() {
        m = m.map_axis(axis, cells * kp, |v, coef| {
            for c in 0..cells {
                for p in 0..kp {
                    let mut acc = 0.0;
                    for q in 0..nq {
                        acc += bt[p][q] * v[c * nq + q];
                    }
                    coef[c * kp + p] = acc;
                }
            }
        });
    }
    TensorGrid {
        axis_len: cells * kp,
        d: vals.lens.len(),
        data: m.data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse_space::{Domain, SparseGridFunction, SparseSpace};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    #[test]
    fn pyramid_round_trip_is_identity() {
        let basis = crate::basis1d::build_basis_table(3).unwrap();
        let n = 5;
        let len = (1 << n) * 4;
        let mut rng = StdRng::seed_from_u64(11);
        let local: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut hier = vec![0.0; len];
        analyze_1d(&basis, n, &local, &mut hier);
        let mut back = vec![0.0; len];
        synthesize_1d(&basis, n, &hier, &mut back);
        for (a, b) in local.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        // Orthogonal transform preserves the Euclidean norm.
        let n0: f64 = local.iter().map(|v| v * v).sum();
        let n1: f64 = hier.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(n0, n1, epsilon = 1e-10 * n0.max(1.0));
    }

    #[test]
    fn sparse_local_round_trip_preserves_sparse_part() {
        let space = SparseSpace::new(4, 2, Domain::unit(2)).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        for c in u.coeffs_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
        let local = sparse_to_local(&u);
        let back = local_to_sparse(&local, &space);
        for (a, b) in u.coeffs().iter().zip(back.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn local_values_match_point_evaluation() {
        let space = SparseSpace::new(3, 2, Domain::unit(2)).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        for c in u.coeffs_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
        let local = sparse_to_local(&u);
        let rule = crate::quadrature::GaussRule::new(3);
        let vals = local_to_gauss_values(&local, space.basis(), 3, &rule);
        let cells = 1usize << 3;
        let nq = rule.len();
        for c1 in 0..cells {
            for q1 in 0..nq {
                for c2 in 0..cells {
                    for q2 in 0..nq {
                        let x = [
                            (c1 as f64 + rule.nodes[q1]) / cells as f64,
                            (c2 as f64 + rule.nodes[q2]) / cells as f64,
                        ];
                        let direct = u.eval_point(&x).unwrap();
                        let via = vals.data[(c1 * nq + q1) * cells * nq + c2 * nq + q2];
                        assert_abs_diff_eq!(direct, via, epsilon = 1e-11);
                    }
                }
            }
        }
    }
}
