//! One-dimensional DG functions at a fixed mesh level, stored against the
//! hierarchical multiwavelet basis. Used for electric fields, densities,
//! currents and projected velocity factors.

use std::sync::Arc;

use crate::basis1d::{Basis1dTable, Side};
use crate::quadrature::GaussRule;
use crate::sparse_space::{block1d_index, cells_at_level};
use crate::transform::{analyze_1d, synthesize_1d};

#[derive(Debug, Clone)]
pub struct Function1d {
    n: usize,
    basis: Arc<Basis1dTable>,
    lo: f64,
    width: f64,
    /// Hierarchical coefficients, laid out block1d_index(l,j)*(k+1)+i.
    coeffs: Vec<f64>,
}

impl Function1d {
    pub fn zeros(n: usize, basis: Arc<Basis1dTable>, lo: f64, width: f64) -> Self {
        let len = (1usize << n) * basis.modes();
        Function1d {
            n,
            basis,
            lo,
            width,
            coeffs: vec![0.0; len],
        }
    }

    /// L2 projection of a physical-coordinate function onto the level-n
    /// space, via per-cell Gauss quadrature and the analysis pyramid.
    pub fn project<F: FnMut(f64) -> f64>(
        n: usize,
        basis: Arc<Basis1dTable>,
        lo: f64,
        width: f64,
        points: usize,
        mut f: F,
    ) -> Self {
        let kp = basis.modes();
        let cells = 1usize << n;
        let rule = GaussRule::new(points);
        let scale = (cells as f64).sqrt();
        let mut local = vec![0.0; cells * kp];
        for c in 0..cells {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let xref = (c as f64 + x) / cells as f64;
                let val = f(lo + width * xref);
                for p in 0..kp {
                    // Local orthonormal mode p on the cell.
                    local[c * kp + p] += w / cells as f64 * val * scale * crate::basis1d::legendre01(p, x);
                }
            }
        }
        // The local coefficients above are <f, phi_p>; with orthonormal modes
        // in reference measure that's already the projection.
        let mut coeffs = vec![0.0; cells * kp];
        analyze_1d(&basis, n, &local, &mut coeffs);
        Function1d {
            n,
            basis,
            lo,
            width,
            coeffs,
        }
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &Arc<Basis1dTable> {
        &self.basis
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.lo + self.width)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Physical L2 norm via Parseval.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c * c).sum();
        (s * self.width).sqrt()
    }

    /// Value at reference coordinate with an explicit one-sided limit.
    pub fn eval_ref_side(&self, xref: f64, side: Side) -> f64 {
        let kp = self.basis.modes();
        let mut acc = 0.0;
        for l in 0..=self.n {
            let cells = cells_at_level(l);
            // Pick the cell matching the requested one-sided limit.
            let scaled = xref * cells as f64;
            let mut j = (scaled as usize).min(cells - 1);
            if side == Side::Left && scaled.fract() == 0.0 && scaled > 0.0 {
                j = (scaled as usize - 1).min(cells - 1);
            }
            let base = block1d_index(l, j) * kp;
            for i in 0..kp {
                let c = self.coeffs[base + i];
                if c != 0.0 {
                    acc += c * self.basis.eval_1d_side(l, j, i, xref, side).unwrap();
                }
            }
        }
        acc
    }

    /// Value at a physical coordinate (right limits at breakpoints).
    pub fn eval(&self, x: f64) -> f64 {
        let xref = ((x - self.lo) / self.width).clamp(0.0, 1.0);
        let side = if xref >= 1.0 { Side::Left } else { Side::Right };
        self.eval_ref_side(xref, side)
    }

    /// Per-cell local orthonormal Legendre coefficients.
    pub fn to_local(&self) -> Vec<f64> {
        let mut local = vec![0.0; self.coeffs.len()];
        synthesize_1d(&self.basis, self.n, &self.coeffs, &mut local);
        local
    }

    pub fn from_local(
        n: usize,
        basis: Arc<Basis1dTable>,
        lo: f64,
        width: f64,
        local: &[f64],
    ) -> Self {
        let mut coeffs = vec![0.0; local.len()];
        analyze_1d(&basis, n, local, &mut coeffs);
        Function1d {
            n,
            basis,
            lo,
            width,
            coeffs,
        }
    }

    /// Maximum of |f| over a dense sample: `per_cell` interior points plus
    /// both one-sided traces at every finest-grid breakpoint.
    pub fn max_abs_sampled(&self, per_cell: usize) -> f64 {
        let cells = 1usize << self.n;
        let mut best = 0.0f64;
        for c in 0..cells {
            let x0 = c as f64 / cells as f64;
            let x1 = (c as f64 + 1.0) / cells as f64;
            best = best.max(self.eval_ref_side(x0, Side::Right).abs());
            best = best.max(self.eval_ref_side(x1, Side::Left).abs());
            for s in 0..per_cell {
                let x = x0 + (x1 - x0) * (s as f64 + 0.5) / per_cell as f64;
                best = best.max(self.eval_ref_side(x, Side::Right).abs());
            }
        }
        best
    }

    /// Mean value over the domain (the constant-mode coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }
}
