//! Orthonormal multiwavelet bases on [0,1].
//!
//! The hierarchy starts from orthonormal shifted Legendre polynomials of
//! degree <= k on the whole interval (level 0). Level l >= 1 adds "mother
//! wavelets": piecewise polynomials on {[0,1/2], [1/2,1]} orthogonal to all
//! polynomials of degree <= k, dyadically dilated and translated. All
//! functions together form an orthonormal basis of the piecewise polynomial
//! space on any dyadic grid.

use crate::error::{Error, Result};
use crate::quadrature::{legendre_poly_deriv, GaussRule};

/// Which one-sided limit to take at a discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One-sided traces at the two endpoints of a basis function's support.
/// Traces taken from outside the support are identically zero and omitted.
#[derive(Debug, Clone, Copy)]
pub struct EdgeTraces {
    /// Location of the left support endpoint.
    pub left_point: f64,
    /// Location of the right support endpoint.
    pub right_point: f64,
    /// Limit at the left endpoint from inside the support.
    pub left_inner: f64,
    /// Limit at the right endpoint from inside the support.
    pub right_inner: f64,
}

/// Table of 1D multiwavelet basis data for a fixed polynomial degree k.
///
/// Mother wavelets are stored as coefficient vectors in the orthonormal
/// Legendre bases of the two half-intervals, so L2 inner products of
/// piecewise polynomials reduce to dot products.
#[derive(Debug, Clone)]
pub struct Basis1dTable {
    k: usize,
    /// mother_left[i][q]: coefficient of sqrt(2)*leg_q(2x) on [0,1/2].
    mother_left: Vec<Vec<f64>>,
    /// mother_right[i][q]: coefficient of sqrt(2)*leg_q(2x-1) on (1/2,1].
    mother_right: Vec<Vec<f64>>,
    /// refine_left[p][q] = <leg_p, sqrt(2) leg_q(2x)> on [0,1/2];
    /// expresses a parent-cell Legendre mode in the left child's basis.
    refine_left: Vec<Vec<f64>>,
    /// Same for the right child.
    refine_right: Vec<Vec<f64>>,
}

pub const MIN_DEGREE: usize = 1;
pub const MAX_DEGREE: usize = 4;

/// Orthonormal shifted Legendre polynomial of degree q at x in [0,1].
pub fn legendre01(q: usize, x: f64) -> f64 {
    let (p, _) = legendre_poly_deriv(q, 2.0 * x - 1.0);
    ((2 * q + 1) as f64).sqrt() * p
}

/// Derivative of [`legendre01`] with respect to x.
pub fn legendre01_deriv(q: usize, x: f64) -> f64 {
    let (_, dp) = legendre_poly_deriv(q, 2.0 * x - 1.0);
    2.0 * ((2 * q + 1) as f64).sqrt() * dp
}

/// Piecewise function on {[0,1/2],[1/2,1]} as coefficient vectors in the
/// orthonormal half-interval Legendre bases.
#[derive(Clone)]
struct PiecewiseVec {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl PiecewiseVec {
    fn dot(&self, other: &PiecewiseVec) -> f64 {
        let mut s = 0.0;
        for (a, b) in self.left.iter().zip(&other.left) {
            s += a * b;
        }
        for (a, b) in self.right.iter().zip(&other.right) {
            s += a * b;
        }
        s
    }

    fn axpy(&mut self, a: f64, other: &PiecewiseVec) {
        for (x, y) in self.left.iter_mut().zip(&other.left) {
            *x += a * y;
        }
        for (x, y) in self.right.iter_mut().zip(&other.right) {
            *x += a * y;
        }
    }

    fn scale(&mut self, a: f64) {
        for x in self.left.iter_mut().chain(self.right.iter_mut()) {
            *x *= a;
        }
    }
}

/// Build the basis table for degree `k` (see [`Basis1dTable`]).
///
/// Mother wavelets are produced by two-pass Gram-Schmidt of the left-half
/// Legendre modes against all global polynomials of degree <= k and the
/// wavelets built so far. The sign of each wavelet is fixed so that its
/// leading right-piece coefficient is positive.
pub fn build_basis_table(k: usize) -> Result<Basis1dTable> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&k) {
        return Err(Error::DegreeOutOfRange(k, MIN_DEGREE, MAX_DEGREE));
    }
    let kp = k + 1;
    let rule = GaussRule::new(k + 2);

    // Refinement matrices: global Legendre modes expanded in child bases.
    let mut refine_left = vec![vec![0.0; kp]; kp];
    let mut refine_right = vec![vec![0.0; kp]; kp];
    for p in 0..kp {
        for q in 0..kp {
            refine_left[p][q] = rule.integrate(0.0, 0.5, |x| {
                legendre01(p, x) * std::f64::consts::SQRT_2 * legendre01(q, 2.0 * x)
            });
            refine_right[p][q] = rule.integrate(0.5, 1.0, |x| {
                legendre01(p, x) * std::f64::consts::SQRT_2 * legendre01(q, 2.0 * x - 1.0)
            });
        }
    }

    // Global polynomials as piecewise vectors.
    let globals: Vec<PiecewiseVec> = (0..kp)
        .map(|p| PiecewiseVec {
            left: refine_left[p].clone(),
            right: refine_right[p].clone(),
        })
        .collect();

    let mut wavelets: Vec<PiecewiseVec> = Vec::with_capacity(kp);
    for seed in 0..kp {
        let mut w = PiecewiseVec {
            left: {
                let mut v = vec![0.0; kp];
                v[seed] = 1.0;
                v
            },
            right: vec![0.0; kp],
        };
        for _pass in 0..2 {
            for g in &globals {
                let c = w.dot(g);
                w.axpy(-c, g);
            }
            for prev in &wavelets {
                let c = w.dot(prev);
                w.axpy(-c, prev);
            }
        }
        let norm = w.dot(&w).sqrt();
        if norm < 1e-8 {
            return Err(Error::IndexOutOfRange(format!(
                "degenerate wavelet seed {seed} for k={k}"
            )));
        }
        w.scale(1.0 / norm);

        // Deterministic sign: leading right-piece coefficient positive,
        // falling back through lower right then left coefficients.
        let mut sign = 0.0;
        for &c in w.right.iter().rev().chain(w.left.iter().rev()) {
            if c.abs() > 1e-10 {
                sign = c.signum();
                break;
            }
        }
        if sign < 0.0 {
            w.scale(-1.0);
        }
        wavelets.push(w);
    }

    Ok(Basis1dTable {
        k,
        mother_left: wavelets.iter().map(|w| w.left.clone()).collect(),
        mother_right: wavelets.iter().map(|w| w.right.clone()).collect(),
        refine_left,
        refine_right,
    })
}

impl Basis1dTable {
    pub fn degree(&self) -> usize {
        self.k
    }

    /// Number of modes per level block, k+1.
    pub fn modes(&self) -> usize {
        self.k + 1
    }

    /// Mother wavelet `i` (0-based) at local coordinate y in [0,1].
    fn mother(&self, i: usize, y: f64, side: Side) -> f64 {
        let use_left = y < 0.5 || (y == 0.5 && side == Side::Left);
        let mut acc = 0.0;
        if use_left {
            let z = 2.0 * y;
            for (q, &c) in self.mother_left[i].iter().enumerate() {
                if c != 0.0 {
                    acc += c * legendre01(q, z);
                }
            }
        } else {
            let z = 2.0 * y - 1.0;
            for (q, &c) in self.mother_right[i].iter().enumerate() {
                if c != 0.0 {
                    acc += c * legendre01(q, z);
                }
            }
        }
        std::f64::consts::SQRT_2 * acc
    }

    fn mother_deriv(&self, i: usize, y: f64, side: Side) -> f64 {
        let use_left = y < 0.5 || (y == 0.5 && side == Side::Left);
        let mut acc = 0.0;
        if use_left {
            let z = 2.0 * y;
            for (q, &c) in self.mother_left[i].iter().enumerate() {
                if c != 0.0 {
                    acc += c * legendre01_deriv(q, z);
                }
            }
        } else {
            let z = 2.0 * y - 1.0;
            for (q, &c) in self.mother_right[i].iter().enumerate() {
                if c != 0.0 {
                    acc += c * legendre01_deriv(q, z);
                }
            }
        }
        2.0 * std::f64::consts::SQRT_2 * acc
    }

    fn check_index(&self, l: usize, j: usize, i: usize) -> Result<()> {
        if i > self.k {
            return Err(Error::IndexOutOfRange(format!(
                "poly index {i} exceeds degree {}",
                self.k
            )));
        }
        let max_j = if l <= 1 { 0 } else { (1usize << (l - 1)) - 1 };
        if j > max_j {
            return Err(Error::IndexOutOfRange(format!(
                "translation {j} exceeds {max_j} at level {l}"
            )));
        }
        Ok(())
    }

    /// Support interval of basis function (l, j).
    pub fn support(&self, l: usize, j: usize) -> (f64, f64) {
        if l == 0 {
            return (0.0, 1.0);
        }
        let scale = 1.0 / (1u64 << (l - 1)) as f64;
        (j as f64 * scale, (j as f64 + 1.0) * scale)
    }

    /// Evaluate v^j_{i,l}(x) with an explicit one-sided limit at breakpoints.
    /// `i` is 0-based (0..=k).
    pub fn eval_1d_side(&self, l: usize, j: usize, i: usize, x: f64, side: Side) -> Result<f64> {
        self.check_index(l, j, i)?;
        if l == 0 {
            return Ok(legendre01(i, x));
        }
        let (a, b) = self.support(l, j);
        if x < a || x > b || (x == a && side == Side::Left) || (x == b && side == Side::Right) {
            return Ok(0.0);
        }
        let y = (x - a) / (b - a);
        // v_{l,j,i}(x) = 2^{(l-1)/2} w_i(2^{l-1} x - j), and 2^{l-1} = 1/(b-a).
        Ok((1.0 / (b - a)).sqrt() * self.mother(i, y, side))
    }

    /// Evaluate v^j_{i,l}(x); at dyadic breakpoints the right limit is taken
    /// (left limit at x = 1, where no right limit exists).
    pub fn eval_1d(&self, l: usize, j: usize, i: usize, x: f64) -> Result<f64> {
        let side = if x >= 1.0 { Side::Left } else { Side::Right };
        self.eval_1d_side(l, j, i, x, side)
    }

    /// Broken derivative of v^j_{i,l} at x (same side conventions as eval).
    pub fn eval_1d_deriv_side(
        &self,
        l: usize,
        j: usize,
        i: usize,
        x: f64,
        side: Side,
    ) -> Result<f64> {
        self.check_index(l, j, i)?;
        if l == 0 {
            return Ok(legendre01_deriv(i, x));
        }
        let (a, b) = self.support(l, j);
        if x < a || x > b || (x == a && side == Side::Left) || (x == b && side == Side::Right) {
            return Ok(0.0);
        }
        let y = (x - a) / (b - a);
        let h = b - a;
        Ok((1.0 / h).sqrt() * self.mother_deriv(i, y, side) / h)
    }

    /// One-sided traces at the support endpoints of v^j_{i,l}.
    pub fn eval_1d_edges(&self, l: usize, j: usize, i: usize) -> Result<EdgeTraces> {
        self.check_index(l, j, i)?;
        let (a, b) = self.support(l, j);
        Ok(EdgeTraces {
            left_point: a,
            right_point: b,
            left_inner: self.eval_1d_side(l, j, i, a, Side::Right)?,
            right_inner: self.eval_1d_side(l, j, i, b, Side::Left)?,
        })
    }

    /// Integral of v^j_{i,l}(x) * x^degree over its support, exact quadrature.
    pub fn moment(&self, l: usize, j: usize, i: usize, degree: usize) -> Result<f64> {
        self.check_index(l, j, i)?;
        let npts = (self.k + degree) / 2 + 2;
        let rule = GaussRule::new(npts);
        if l == 0 {
            return Ok(rule.integrate(0.0, 1.0, |x| legendre01(i, x) * x.powi(degree as i32)));
        }
        let (a, b) = self.support(l, j);
        let mid = 0.5 * (a + b);
        let f = |x: f64| {
            let side = if x < mid { Side::Right } else { Side::Left };
            self.eval_1d_side(l, j, i, x, side).unwrap() * x.powi(degree as i32)
        };
        Ok(rule.integrate(a, mid, f) + rule.integrate(mid, b, f))
    }

    /// Two-scale refinement filters: row p of (left, right) expands the
    /// parent-cell Legendre mode p in the children's orthonormal bases.
    pub fn refine_filters(&self) -> (&[Vec<f64>], &[Vec<f64>]) {
        (&self.refine_left, &self.refine_right)
    }

    /// Wavelet filters: row i expands mother wavelet i in the children's
    /// orthonormal bases.
    pub fn wavelet_filters(&self) -> (&[Vec<f64>], &[Vec<f64>]) {
        (&self.mother_left, &self.mother_right)
    }
}
