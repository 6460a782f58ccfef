//! Shared oracles for integration tests: a dense full-tensor Galerkin
//! assembly of the transport weak form, and a minimal cell-local RKDG
//! reference solver for one dimension. Neither shares code with the
//! operator's factored 1D machinery.
#![allow(dead_code)]

use std::sync::Arc;

use sparse_dg::basis1d::{legendre01, legendre01_deriv, Side};
use sparse_dg::quadrature::GaussRule;
use sparse_dg::sparse_space::{BasisId, SparseSpace};
use sparse_dg::transport::{compute_alpha, Bc1d, BoundarySpec, FluxSpec, VelocityField};

/// Evaluate one basis function at a point with per-dimension sides.
pub fn eval_basis(space: &SparseSpace, id: &BasisId, x: &[f64], sides: &[Side]) -> f64 {
    let mut v = 1.0;
    for m in 0..space.dim() {
        v *= space
            .basis()
            .eval_1d_side(
                id.level[m] as usize,
                id.cell[m] as usize,
                id.poly[m] as usize,
                x[m],
                sides[m],
            )
            .unwrap();
    }
    v
}

pub fn eval_basis_grad(space: &SparseSpace, id: &BasisId, x: &[f64], dim: usize) -> f64 {
    let mut v = 1.0;
    for m in 0..space.dim() {
        let f = if m == dim {
            space
                .basis()
                .eval_1d_deriv_side(
                    id.level[m] as usize,
                    id.cell[m] as usize,
                    id.poly[m] as usize,
                    x[m],
                    Side::Right,
                )
                .unwrap()
        } else {
            space
                .basis()
                .eval_1d_side(
                    id.level[m] as usize,
                    id.cell[m] as usize,
                    id.poly[m] as usize,
                    x[m],
                    Side::Right,
                )
                .unwrap()
        };
        v *= f;
    }
    v
}

/// One-sided velocity component value at a face point.
pub fn component_sided(field: &VelocityField, m: usize, t: f64, x: &[f64], side: Side) -> f64 {
    field.components[m]
        .iter()
        .map(|term| {
            let mut v = term.coef * term.time.eval(t);
            for (dim, f) in term.factors.iter().enumerate() {
                if !f.is_one() {
                    v *= if dim == m {
                        f.trace(x[m], side)
                    } else {
                        f.eval(x[dim])
                    };
                }
            }
            v
        })
        .sum()
}

/// |a_m| at a face point, matching the operator's convention for
/// discontinuous projected factors (max of one-sided magnitudes in the
/// flux dimension, plain magnitudes tangentially).
pub fn component_abs(field: &VelocityField, m: usize, t: f64, x: &[f64]) -> f64 {
    field.components[m]
        .iter()
        .map(|term| {
            let mut v = (term.coef * term.time.eval(t)).abs();
            for (dim, f) in term.factors.iter().enumerate() {
                if !f.is_one() {
                    v *= if dim == m {
                        f.trace(x[m], Side::Left)
                            .abs()
                            .max(f.trace(x[m], Side::Right).abs())
                    } else {
                        f.eval(x[dim]).abs()
                    };
                }
            }
            v
        })
        .sum()
}

/// Dense Galerkin matrix A[test][trial] of the semi-discrete right side.
pub fn dense_rhs_matrix(
    space: &Arc<SparseSpace>,
    field: &VelocityField,
    flux: FluxSpec,
    bc: &BoundarySpec,
    t: f64,
) -> Vec<Vec<f64>> {
    let d = space.dim();
    let n = space.max_level();
    let k = space.degree();
    let ids = space.basis_ids();
    let dof = ids.len();
    let cells = 1usize << n;
    let h = 1.0 / cells as f64;
    let rule = GaussRule::new(k + 4);
    let nq = rule.len();
    let alpha = compute_alpha(field, t, n, k);
    let mut a = vec![vec![0.0f64; dof]; dof];
    let sides_r = vec![Side::Right; d];

    // Volume term: sum_m int u a_m d_m v.
    let mut cell = vec![0usize; d];
    loop {
        // Tensor quadrature over this cell.
        let mut q = vec![0usize; d];
        loop {
            let mut x = vec![0.0; d];
            let mut w = 1.0;
            for m in 0..d {
                x[m] = (cell[m] as f64 + rule.nodes[q[m]]) * h;
                w *= rule.weights[q[m]] * h;
            }
            let vals: Vec<f64> = ids.iter().map(|id| eval_basis(space, id, &x, &sides_r)).collect();
            for m in 0..d {
                let am = field.eval_component(m, t, &x);
                if am == 0.0 {
                    continue;
                }
                let grads: Vec<f64> = ids.iter().map(|id| eval_basis_grad(space, id, &x, m)).collect();
                for (ci, gc) in grads.iter().enumerate() {
                    if *gc == 0.0 {
                        continue;
                    }
                    let f = w * am * gc;
                    for (bi, vb) in vals.iter().enumerate() {
                        a[ci][bi] += f * vb;
                    }
                }
            }
            // Advance quadrature odometer.
            let mut m = d;
            loop {
                if m == 0 {
                    break;
                }
                m -= 1;
                q[m] += 1;
                if q[m] < nq {
                    break;
                }
                q[m] = 0;
                if m == 0 {
                    break;
                }
            }
            if q.iter().all(|&v| v == 0) {
                break;
            }
        }
        let mut m = d;
        loop {
            if m == 0 {
                break;
            }
            m -= 1;
            cell[m] += 1;
            if cell[m] < cells {
                break;
            }
            cell[m] = 0;
            if m == 0 {
                break;
            }
        }
        if cell.iter().all(|&v| v == 0) {
            break;
        }
    }

    // Face terms per dimension family.
    for m in 0..d {
        let positions: Vec<usize> = match bc.0[m] {
            Bc1d::Periodic => (0..cells).collect(),
            Bc1d::ZeroExterior => (0..=cells).collect(),
        };
        for &fpos in &positions {
            let xf = fpos as f64 * h;
            let has_minus = fpos > 0 || bc.0[m] == Bc1d::Periodic;
            let has_plus = fpos < cells || bc.0[m] == Bc1d::Periodic;
            // Tangential tensor quadrature.
            let tdims: Vec<usize> = (0..d).filter(|&dd| dd != m).collect();
            let mut tcell = vec![0usize; tdims.len()];
            loop {
                let mut q = vec![0usize; tdims.len()];
                loop {
                    let mut x = vec![0.0; d];
                    let mut w = 1.0;
                    x[m] = xf;
                    for (ti, &dd) in tdims.iter().enumerate() {
                        x[dd] = (tcell[ti] as f64 + rule.nodes[q[ti]]) * h;
                        w *= rule.weights[q[ti]] * h;
                    }
                    // One-sided traces of every basis function.
                    let mut sides = vec![Side::Right; d];
                    let tr_plus: Vec<f64> = if has_plus {
                        let mut xp = x.clone();
                        if fpos == cells {
                            xp[m] = 0.0; // periodic wrap
                        }
                        ids.iter().map(|id| eval_basis(space, id, &xp, &sides)).collect()
                    } else {
                        vec![0.0; dof]
                    };
                    sides[m] = Side::Left;
                    let tr_minus: Vec<f64> = if has_minus {
                        let mut xm = x.clone();
                        if fpos == 0 {
                            xm[m] = 1.0; // periodic wrap
                        }
                        ids.iter().map(|id| eval_basis(space, id, &xm, &sides)).collect()
                    } else {
                        vec![0.0; dof]
                    };
                    let a_minus = if has_minus {
                        let mut xm = x.clone();
                        if fpos == 0 {
                            xm[m] = 1.0;
                        }
                        component_sided(field, m, t, &xm, Side::Left)
                    } else {
                        0.0
                    };
                    let a_plus = if has_plus {
                        let mut xp = x.clone();
                        if fpos == cells {
                            xp[m] = 0.0;
                        }
                        component_sided(field, m, t, &xp, Side::Right)
                    } else {
                        0.0
                    };
                    let diss = match flux {
                        FluxSpec::Upwind => component_abs(field, m, t, &x),
                        FluxSpec::GlobalLaxFriedrichs => alpha[m],
                    };
                    // F = a-/2 u- + a+/2 u+ + diss/2 (u- - u+), tested
                    // against the jump v- - v+.
                    for ci in 0..dof {
                        let jump_c = tr_minus[ci] - tr_plus[ci];
                        if jump_c == 0.0 {
                            continue;
                        }
                        for bi in 0..dof {
                            let fhat = 0.5 * a_minus * tr_minus[bi]
                                + 0.5 * a_plus * tr_plus[bi]
                                + 0.5 * diss * (tr_minus[bi] - tr_plus[bi]);
                            a[ci][bi] -= w * fhat * jump_c;
                        }
                    }
                    let mut mm = tdims.len();
                    loop {
                        if mm == 0 {
                            break;
                        }
                        mm -= 1;
                        q[mm] += 1;
                        if q[mm] < nq {
                            break;
                        }
                        q[mm] = 0;
                        if mm == 0 {
                            break;
                        }
                    }
                    if q.iter().all(|&v| v == 0) {
                        break;
                    }
                }
                let mut mm = tdims.len();
                loop {
                    if mm == 0 {
                        break;
                    }
                    mm -= 1;
                    tcell[mm] += 1;
                    if tcell[mm] < cells {
                        break;
                    }
                    tcell[mm] = 0;
                    if mm == 0 {
                        break;
                    }
                }
                if tcell.iter().all(|&v| v == 0) {
                    break;
                }
            }
        }
    }
    a
}


/// Minimal full-grid RKDG state for d=1: coeffs[cell*(k+1)+p] against the
/// orthonormal local basis sqrt(2^n) * leg_p(2^n x - cell).
pub struct FullGridDg {
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub coeffs: Vec<f64>,
}

impl FullGridDg {
    pub fn project(n: usize, k: usize, a: f64, f: impl Fn(f64) -> f64) -> Self {
        let cells = 1usize << n;
        let rule = GaussRule::new(k + 2);
        let scale = (cells as f64).sqrt();
        let mut coeffs = vec![0.0; cells * (k + 1)];
        for c in 0..cells {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let xg = (c as f64 + x) / cells as f64;
                for p in 0..=k {
                    coeffs[c * (k + 1) + p] +=
                        w / cells as f64 * f(xg) * scale * legendre01(p, x);
                }
            }
        }
        FullGridDg { n, k, a, coeffs }
    }

    pub fn eval_local(&self, cell: usize, xloc: f64) -> f64 {
        let cells = 1usize << self.n;
        let scale = (cells as f64).sqrt();
        (0..=self.k)
            .map(|p| self.coeffs[cell * (self.k + 1) + p] * scale * legendre01(p, xloc))
            .sum()
    }

    /// Upwind RKDG right side for constant positive speed, periodic bc.
    pub fn rhs(&self) -> Vec<f64> {
        assert!(self.a > 0.0);
        let cells = 1usize << self.n;
        let kp = self.k + 1;
        let rule = GaussRule::new(self.k + 2);
        let scale = (cells as f64).sqrt();
        let mut out = vec![0.0; self.coeffs.len()];
        let mut face_flux = vec![0.0; cells + 1];
        for f in 0..=cells {
            let left = (f + cells - 1) % cells;
            face_flux[f] = self.a * self.eval_local(left, 1.0);
        }
        for c in 0..cells {
            for p in 0..kp {
                let mut vol = 0.0;
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    vol += w / cells as f64
                        * self.eval_local(c, x)
                        * self.a
                        * scale
                        * legendre01_deriv(p, x)
                        * cells as f64;
                }
                let phi_left = scale * legendre01(p, 0.0);
                let phi_right = scale * legendre01(p, 1.0);
                out[c * kp + p] = vol + face_flux[c] * phi_left - face_flux[c + 1] * phi_right;
            }
        }
        out
    }

    pub fn rk3_step(&mut self, dt: f64) {
        let r0 = self.rhs();
        let u0 = self.coeffs.clone();
        for (c, r) in self.coeffs.iter_mut().zip(&r0) {
            *c += dt * r;
        }
        let r1 = self.rhs();
        for i in 0..self.coeffs.len() {
            self.coeffs[i] = 0.75 * u0[i] + 0.25 * (self.coeffs[i] + dt * r1[i]);
        }
        let r2 = self.rhs();
        for i in 0..self.coeffs.len() {
            self.coeffs[i] = u0[i] / 3.0 + 2.0 / 3.0 * (self.coeffs[i] + dt * r2[i]);
        }
    }
}

/// Smooth cosine-bell profile used by the rotation benchmarks.
pub fn cosine_bell(d: usize, b: f64, center: Vec<f64>) -> impl Fn(&[f64]) -> f64 + Sync {
    move |x: &[f64]| {
        let r: f64 = x
            .iter()
            .zip(&center)
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum::<f64>()
            .sqrt();
        if r <= b {
            b.powi(d as i32 - 1) * (std::f64::consts::PI * r / (2.0 * b)).cos().powi(6)
        } else {
            0.0
        }
    }
}
