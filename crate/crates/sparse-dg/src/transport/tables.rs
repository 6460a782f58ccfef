//! Per-finest-cell evaluation tables for the 1D hierarchical basis, and the
//! block-sparse 1D operator matrices assembled from them.

use std::sync::Arc;

use super::pattern::Pattern1d;
use super::{Bc1d, Factor1d};
use crate::basis1d::{Basis1dTable, Side};
use crate::quadrature::GaussRule;
use crate::sparse_space::block1d_index;

/// Values, derivatives and one-sided traces of every basis function with
/// level <= n on every cell of the finest grid. A "slot" is (level, mode):
/// slot = level*(k+1)+i; the owning 1D block follows from the cell.
pub struct CellTables {
    pub n: usize,
    pub kp: usize,
    pub rule: GaussRule,
    /// vals[cell][slot][q]
    vals: Vec<f64>,
    dvals: Vec<f64>,
    /// Trace at the cell's left endpoint from inside (right limit).
    left_tr: Vec<f64>,
    /// Trace at the cell's right endpoint from inside (left limit).
    right_tr: Vec<f64>,
}

impl CellTables {
    pub fn build(basis: &Basis1dTable, n: usize) -> Self {
        let kp = basis.modes();
        let k = basis.degree();
        // Enough points for triple products of degree-k polynomials.
        let rule = GaussRule::new(k + 3);
        let nq = rule.len();
        let cells = 1usize << n;
        let slots = (n + 1) * kp;
        let mut vals = vec![0.0; cells * slots * nq];
        let mut dvals = vec![0.0; cells * slots * nq];
        let mut left_tr = vec![0.0; cells * slots];
        let mut right_tr = vec![0.0; cells * slots];
        for c in 0..cells {
            let x0 = c as f64 / cells as f64;
            let x1 = (c as f64 + 1.0) / cells as f64;
            for l in 0..=n {
                let j = ancestor_cell(c, l, n);
                for i in 0..kp {
                    let slot = l * kp + i;
                    for (q, &xq) in rule.nodes.iter().enumerate() {
                        let x = x0 + (x1 - x0) * xq;
                        vals[(c * slots + slot) * nq + q] =
                            basis.eval_1d_side(l, j, i, x, Side::Right).unwrap();
                        dvals[(c * slots + slot) * nq + q] =
                            basis.eval_1d_deriv_side(l, j, i, x, Side::Right).unwrap();
                    }
                    left_tr[c * slots + slot] =
                        basis.eval_1d_side(l, j, i, x0, Side::Right).unwrap();
                    right_tr[c * slots + slot] =
                        basis.eval_1d_side(l, j, i, x1, Side::Left).unwrap();
                }
            }
        }
        CellTables {
            n,
            kp,
            rule,
            vals,
            dvals,
            left_tr,
            right_tr,
        }
    }

    pub fn slots(&self) -> usize {
        (self.n + 1) * self.kp
    }

    pub fn val(&self, cell: usize, slot: usize, q: usize) -> f64 {
        self.vals[(cell * self.slots() + slot) * self.rule.len() + q]
    }

    pub fn dval(&self, cell: usize, slot: usize, q: usize) -> f64 {
        self.dvals[(cell * self.slots() + slot) * self.rule.len() + q]
    }

    pub fn trace_left(&self, cell: usize, slot: usize) -> f64 {
        self.left_tr[cell * self.slots() + slot]
    }

    pub fn trace_right(&self, cell: usize, slot: usize) -> f64 {
        self.right_tr[cell * self.slots() + slot]
    }
}

/// 1D block of the function living at `(level, cell)` covering finest cell c.
pub fn ancestor_cell(c: usize, level: usize, n: usize) -> usize {
    let support_level = level.saturating_sub(1);
    c >> (n - support_level)
}

/// Evaluation of a 1D factor on the quadrature grid and at faces.
pub struct FactorSamples {
    /// values[cell][q]
    pub values: Vec<f64>,
    /// One-sided values at faces 0..=cells (index = face position).
    pub face_left: Vec<f64>,
    pub face_right: Vec<f64>,
}

impl FactorSamples {
    pub fn sample(factor: &Factor1d, tables: &CellTables, abs: bool) -> Self {
        let cells = 1usize << tables.n;
        let nq = tables.rule.len();
        let mut values = vec![0.0; cells * nq];
        for c in 0..cells {
            for (q, &xq) in tables.rule.nodes.iter().enumerate() {
                let x = (c as f64 + xq) / cells as f64;
                let v = factor.eval(x);
                values[c * nq + q] = if abs { v.abs() } else { v };
            }
        }
        let mut face_left = vec![0.0; cells + 1];
        let mut face_right = vec![0.0; cells + 1];
        for f in 0..=cells {
            let x = f as f64 / cells as f64;
            let l = factor.trace(x, Side::Left);
            let r = factor.trace(x, Side::Right);
            face_left[f] = if abs { l.abs() } else { l };
            face_right[f] = if abs { r.abs() } else { r };
        }
        FactorSamples {
            values,
            face_left,
            face_right,
        }
    }
}

/// Block-sparse 1D operator: one (k+1)x(k+1) matrix per pattern pair,
/// entry layout data[pair][row=test][col=trial].
pub struct Mat1d {
    pub pattern: Arc<Pattern1d>,
    pub kp: usize,
    pub data: Vec<f64>,
}

impl Mat1d {
    fn zeros(pattern: Arc<Pattern1d>, kp: usize) -> Self {
        let len = pattern.pairs.len() * kp * kp;
        Mat1d {
            pattern,
            kp,
            data: vec![0.0; len],
        }
    }

    pub fn block(&self, pair: usize) -> &[f64] {
        &self.data[pair * self.kp * self.kp..(pair + 1) * self.kp * self.kp]
    }
}

/// Accumulate outer products over cells shared by two hierarchy levels.
fn scatter_cell(
    mat: &mut Mat1d,
    tables: &CellTables,
    cell: usize,
    mut weight_at: impl FnMut(usize) -> f64,
    use_deriv_on_test: bool,
) {
    let kp = tables.kp;
    let nq = tables.rule.len();
    let n = tables.n;
    let cells = 1usize << n;
    let h = 1.0 / cells as f64;
    // wv[q] = quadrature weight * factor value
    let mut wv = vec![0.0; nq];
    for (q, slot) in wv.iter_mut().enumerate() {
        *slot = tables.rule.weights[q] * h * weight_at(q);
    }
    for l_c in 0..=n {
        let blk_c = block1d_index(l_c, ancestor_cell(cell, l_c, n)) as u16;
        for l_b in 0..=n {
            let blk_b = block1d_index(l_b, ancestor_cell(cell, l_b, n)) as u16;
            let Some(pair) = mat.pattern.pair_index(blk_c, blk_b) else {
                continue;
            };
            let base = pair * kp * kp;
            for ic in 0..kp {
                let slot_c = l_c * kp + ic;
                for ib in 0..kp {
                    let slot_b = l_b * kp + ib;
                    let mut acc = 0.0;
                    for q in 0..nq {
                        let tv = if use_deriv_on_test {
                            tables.dval(cell, slot_c, q)
                        } else {
                            tables.val(cell, slot_c, q)
                        };
                        acc += wv[q] * tables.val(cell, slot_b, q) * tv;
                    }
                    mat.data[base + ic * kp + ib] += acc;
                }
            }
        }
    }
}

/// Weighted mass matrix M(f)[c,b] = int f phi_b phi_c dx on the nested
/// pattern.
pub fn assemble_mass(
    tables: &CellTables,
    pattern: &Arc<Pattern1d>,
    samples: &FactorSamples,
) -> Mat1d {
    let mut mat = Mat1d::zeros(Arc::clone(pattern), tables.kp);
    let cells = 1usize << tables.n;
    let nq = tables.rule.len();
    for c in 0..cells {
        scatter_cell(&mut mat, tables, c, |q| samples.values[c * nq + q], false);
    }
    mat
}

/// Face list for a boundary condition: (minus-side position index,
/// plus-side position index, left cell, right cell); None marks the
/// exterior side. The periodic wrap face has minus position 2^n (x = 1)
/// and plus position 0.
fn faces(n: usize, bc: Bc1d) -> Vec<(usize, usize, Option<usize>, Option<usize>)> {
    let cells = 1usize << n;
    let mut out = Vec::new();
    match bc {
        Bc1d::Periodic => {
            out.push((cells, 0, Some(cells - 1), Some(0)));
            for f in 1..cells {
                out.push((f, f, Some(f - 1), Some(f)));
            }
        }
        Bc1d::ZeroExterior => {
            out.push((0, 0, None, Some(0)));
            for f in 1..cells {
                out.push((f, f, Some(f - 1), Some(f)));
            }
            out.push((cells, cells, Some(cells - 1), None));
        }
    }
    out
}

/// Slots with a trace on a given face side, with their block ids and values.
fn face_traces(
    tables: &CellTables,
    cell: Option<usize>,
    from_left_cell: bool,
) -> Vec<(u16, usize, f64)> {
    let Some(c) = cell else {
        return Vec::new();
    };
    let kp = tables.kp;
    let n = tables.n;
    let mut out = Vec::with_capacity((n + 1) * kp);
    for l in 0..=n {
        let blk = block1d_index(l, ancestor_cell(c, l, n)) as u16;
        for i in 0..kp {
            let slot = l * kp + i;
            let v = if from_left_cell {
                tables.trace_right(c, slot)
            } else {
                tables.trace_left(c, slot)
            };
            out.push((blk, i, v));
        }
    }
    out
}

/// Combined flux-direction operator on the touch pattern:
/// K = S(f) - C(f), the broken weighted stiffness minus the central flux
/// term over all faces of the finest grid.
pub fn assemble_flux_dir(
    tables: &CellTables,
    pattern: &Arc<Pattern1d>,
    samples: &FactorSamples,
    bc: Bc1d,
) -> Mat1d {
    let mut mat = Mat1d::zeros(Arc::clone(pattern), tables.kp);
    let cells = 1usize << tables.n;
    let nq = tables.rule.len();
    // Volume part: + int f phi_b dphi_c.
    for c in 0..cells {
        scatter_cell(&mut mat, tables, c, |q| samples.values[c * nq + q], true);
    }
    // Central face part: - sum_f (f-/2 b- + f+/2 b+) (c- - c+).
    let kp = tables.kp;
    for (pos_minus, pos_plus, lcell, rcell) in faces(tables.n, bc) {
        let minus = face_traces(tables, lcell, true);
        let plus = face_traces(tables, rcell, false);
        let wl = 0.5 * samples.face_left[pos_minus];
        let wr = 0.5 * samples.face_right[pos_plus];
        // b-side contributions with flux weights; c-side jump with signs.
        for (sign_c, c_list) in [(1.0, &minus), (-1.0, &plus)] {
            for &(blk_c, ic, tv_c) in c_list.iter() {
                for (wgt, b_list) in [(wl, &minus), (wr, &plus)] {
                    for &(blk_b, ib, tv_b) in b_list.iter() {
                        if let Some(pair) = mat.pattern.pair_index(blk_c, blk_b) {
                            mat.data[(pair * kp + ic) * kp + ib] -=
                                sign_c * wgt * tv_b * tv_c;
                        }
                    }
                }
            }
        }
    }
    mat
}

/// Jump-jump dissipation D(w)[c,b] = sum_f w_f (b- - b+)(c- - c+) on the
/// touch pattern; `samples` should hold |f| (or ones for Lax-Friedrichs).
pub fn assemble_dissipation(
    tables: &CellTables,
    pattern: &Arc<Pattern1d>,
    samples: &FactorSamples,
    bc: Bc1d,
) -> Mat1d {
    let mut mat = Mat1d::zeros(Arc::clone(pattern), tables.kp);
    let kp = tables.kp;
    for (pos_minus, pos_plus, lcell, rcell) in faces(tables.n, bc) {
        let minus = face_traces(tables, lcell, true);
        let plus = face_traces(tables, rcell, false);
        // Face weight: one-sided |f| values agree for continuous factors;
        // take the max for safety with discontinuous projected factors.
        let w = samples.face_left[pos_minus].max(samples.face_right[pos_plus]);
        for (sign_c, c_list) in [(1.0, &minus), (-1.0, &plus)] {
            for &(blk_c, ic, tv_c) in c_list.iter() {
                for (sign_b, b_list) in [(1.0, &minus), (-1.0, &plus)] {
                    for &(blk_b, ib, tv_b) in b_list.iter() {
                        if let Some(pair) = mat.pattern.pair_index(blk_c, blk_b) {
                            mat.data[(pair * kp + ic) * kp + ib] +=
                                w * sign_b * sign_c * tv_b * tv_c;
                        }
                    }
                }
            }
        }
    }
    mat
}
