//! Semi-discrete DG transport operator R(u) on the sparse space: volume term
//! plus interface fluxes over every face of the finest grid, evaluated with
//! the unidirectional principle for separable velocity fields.
//!
//! All geometry lives on the reference cube; velocity components are given
//! in reference units (physical speed divided by the domain width of their
//! dimension).

mod engine;
mod pattern;
mod tables;

pub use engine::TransportOperator;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function1d::Function1d;
use crate::sparse_space::SparseSpace;

/// One-dimensional factor of a separable velocity term (reference coords).
#[derive(Clone)]
pub enum Factor1d {
    /// Constant one (the dimension does not enter the product).
    One,
    /// Polynomial in the reference coordinate, low-degree exact.
    Poly(Vec<f64>),
    /// Analytic factor, integrated by per-cell Gauss quadrature.
    Analytic(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Projected DG factor at the space's mesh level.
    Dg(Function1d),
}

impl fmt::Debug for Factor1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor1d::One => write!(f, "One"),
            Factor1d::Poly(c) => write!(f, "Poly({c:?})"),
            Factor1d::Analytic(_) => write!(f, "Analytic"),
            Factor1d::Dg(_) => write!(f, "Dg"),
        }
    }
}

impl Factor1d {
    pub fn is_one(&self) -> bool {
        matches!(self, Factor1d::One)
    }

    /// Point value (right limit for DG factors).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Factor1d::One => 1.0,
            Factor1d::Poly(c) => {
                let mut acc = 0.0;
                for &ci in c.iter().rev() {
                    acc = acc * x + ci;
                }
                acc
            }
            Factor1d::Analytic(f) => f(x),
            Factor1d::Dg(g) => g.eval_ref_side(
                x,
                if x >= 1.0 {
                    crate::basis1d::Side::Left
                } else {
                    crate::basis1d::Side::Right
                },
            ),
        }
    }

    /// One-sided value at a face position.
    pub fn trace(&self, x: f64, side: crate::basis1d::Side) -> f64 {
        match self {
            Factor1d::Dg(g) => g.eval_ref_side(x.clamp(0.0, 1.0), side),
            _ => self.eval(x),
        }
    }

    /// Max of |f| over a dense sample (4(k+1) points per finest cell plus
    /// cell-boundary traces for DG factors).
    pub fn max_abs(&self, n: usize, k: usize) -> f64 {
        match self {
            Factor1d::One => 1.0,
            Factor1d::Dg(g) => g.max_abs_sampled(4 * (k + 1)),
            _ => {
                let cells = 1usize << n;
                let per = 4 * (k + 1);
                let mut best = self.eval(0.0).abs().max(self.eval(1.0).abs());
                for c in 0..cells {
                    for s in 0..per {
                        let x = (c as f64 + (s as f64 + 0.5) / per as f64) / cells as f64;
                        best = best.max(self.eval(x).abs());
                    }
                }
                best
            }
        }
    }
}

/// Optional time modulation of a velocity term.
#[derive(Clone)]
pub enum TimeFactor {
    One,
    Fn(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl TimeFactor {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFactor::One => 1.0,
            TimeFactor::Fn(g) => g(t),
        }
    }
}

impl fmt::Debug for TimeFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFactor::One => write!(f, "One"),
            TimeFactor::Fn(_) => write!(f, "Fn(t)"),
        }
    }
}

/// One separable product contributing to a velocity component:
/// coef * g(t) * prod_m factor_m(x_m).
#[derive(Debug, Clone)]
pub struct VelocityTerm {
    pub coef: f64,
    pub time: TimeFactor,
    pub factors: Vec<Factor1d>,
}

/// Velocity field as sums of separable terms per component, with an optional
/// exact per-dimension speed bound (reference units).
#[derive(Clone)]
pub struct VelocityField {
    pub components: Vec<Vec<VelocityTerm>>,
    pub exact_alpha: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
}

impl fmt::Debug for VelocityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityField")
            .field("components", &self.components)
            .field("exact_alpha", &self.exact_alpha.is_some())
            .finish()
    }
}

impl VelocityField {
    /// Constant physical velocity on the given domain widths.
    pub fn constant(a_phys: &[f64], widths: &[f64]) -> Self {
        let d = a_phys.len();
        let comps = (0..d)
            .map(|m| {
                vec![VelocityTerm {
                    coef: a_phys[m] / widths[m],
                    time: TimeFactor::One,
                    factors: vec![Factor1d::One; d],
                }]
            })
            .collect();
        let alpha: Vec<f64> = (0..d).map(|m| (a_phys[m] / widths[m]).abs()).collect();
        VelocityField {
            components: comps,
            exact_alpha: Some(Arc::new(move |_t| alpha.clone())),
        }
    }

    /// Rigid rotation about the center of the unit square:
    /// a = (-x2 + 1/2, x1 - 1/2).
    pub fn solid_rotation_2d() -> Self {
        VelocityField {
            components: vec![
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![Factor1d::One, Factor1d::Poly(vec![0.5, -1.0])],
                }],
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![Factor1d::Poly(vec![-0.5, 1.0]), Factor1d::One],
                }],
            ],
            exact_alpha: Some(Arc::new(|_t| vec![0.5, 0.5])),
        }
    }

    /// Rigid rotation in the unit cube about the axis (1,0,-1) through the
    /// center, unit angular speed (returns to the initial state at t = 2pi).
    pub fn solid_rotation_3d() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        VelocityField {
            components: vec![
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![
                        Factor1d::One,
                        Factor1d::Poly(vec![0.5 * s, -s]),
                        Factor1d::One,
                    ],
                }],
                vec![
                    VelocityTerm {
                        coef: 1.0,
                        time: TimeFactor::One,
                        factors: vec![
                            Factor1d::Poly(vec![-0.5 * s, s]),
                            Factor1d::One,
                            Factor1d::One,
                        ],
                    },
                    VelocityTerm {
                        coef: 1.0,
                        time: TimeFactor::One,
                        factors: vec![
                            Factor1d::One,
                            Factor1d::One,
                            Factor1d::Poly(vec![-0.5 * s, s]),
                        ],
                    },
                ],
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![
                        Factor1d::One,
                        Factor1d::Poly(vec![0.5 * s, -s]),
                        Factor1d::One,
                    ],
                }],
            ],
            exact_alpha: Some(Arc::new(move |_t| vec![0.5 * s, s, 0.5 * s])),
        }
    }

    /// Swirling deformational flow on the unit square with time reversal
    /// g(t) = cos(pi t / T): the profile returns to its initial state at T.
    pub fn deformational_2d(t_final: f64) -> Self {
        use std::f64::consts::PI;
        let g: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
            Arc::new(move |t: f64| (PI * t / t_final).cos());
        let sin2: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
            Arc::new(|x: f64| (PI * x).sin().powi(2));
        let sin2pi: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
            Arc::new(|x: f64| (2.0 * PI * x).sin());
        let g2 = Arc::clone(&g);
        VelocityField {
            components: vec![
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::Fn(Arc::clone(&g)),
                    factors: vec![
                        Factor1d::Analytic(Arc::clone(&sin2)),
                        Factor1d::Analytic(Arc::clone(&sin2pi)),
                    ],
                }],
                vec![VelocityTerm {
                    coef: -1.0,
                    time: TimeFactor::Fn(Arc::clone(&g)),
                    factors: vec![
                        Factor1d::Analytic(sin2pi),
                        Factor1d::Analytic(sin2),
                    ],
                }],
            ],
            exact_alpha: Some(Arc::new(move |t| {
                let a = g2(t).abs();
                vec![a, a]
            })),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Pointwise component value (reference units, reference coordinates).
    pub fn eval_component(&self, m: usize, t: f64, xref: &[f64]) -> f64 {
        self.components[m]
            .iter()
            .map(|term| {
                let mut v = term.coef * term.time.eval(t);
                for (dim, f) in term.factors.iter().enumerate() {
                    if !f.is_one() {
                        v *= f.eval(xref[dim]);
                    }
                }
                v
            })
            .sum()
    }
}

/// Numerical interface flux selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxSpec {
    /// a{u} + |a.n|/2 [u]; requires single-term components so |a| factors.
    Upwind,
    /// {a u} + alpha/2 [u] with the global per-dimension bound alpha.
    GlobalLaxFriedrichs,
}

/// Per-dimension boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc1d {
    Periodic,
    /// Ghost state u+ = 0 outside the domain faces.
    ZeroExterior,
}

#[derive(Debug, Clone)]
pub struct BoundarySpec(pub Vec<Bc1d>);

impl BoundarySpec {
    pub fn periodic(d: usize) -> Self {
        BoundarySpec(vec![Bc1d::Periodic; d])
    }
}

/// Pointwise numerical flux through a face with normal speed `a_dot_n`
/// (normal fixed from the minus to the plus side).
pub fn scalar_flux(
    a_dot_n: f64,
    u_minus: f64,
    u_plus: f64,
    spec: FluxSpec,
    alpha_n: f64,
) -> Result<f64> {
    match spec {
        FluxSpec::Upwind => {
            Ok(a_dot_n * 0.5 * (u_minus + u_plus) + 0.5 * a_dot_n.abs() * (u_minus - u_plus))
        }
        FluxSpec::GlobalLaxFriedrichs => {
            if alpha_n < 0.0 {
                return Err(Error::NegativeAlpha(alpha_n));
            }
            Ok(a_dot_n * 0.5 * (u_minus + u_plus) + 0.5 * alpha_n * (u_minus - u_plus))
        }
    }
}

/// Per-dimension speed bounds alpha_m(t) >= sup |a_m| in reference units.
///
/// Uses the field's exact bound when present and always cross-checks against
/// a dense sample of the actual factors (4(k+1) points per finest cell), so
/// projected fields with small overshoots remain covered.
pub fn compute_alpha(field: &VelocityField, t: f64, n: usize, k: usize) -> Vec<f64> {
    let d = field.dim();
    let mut alpha = vec![0.0f64; d];
    for m in 0..d {
        let mut bound = 0.0;
        for term in &field.components[m] {
            let mut prod = (term.coef * term.time.eval(t)).abs();
            for f in &term.factors {
                if !f.is_one() {
                    prod *= f.max_abs(n, k);
                }
            }
            bound += prod;
        }
        alpha[m] = bound;
    }
    if let Some(exact) = &field.exact_alpha {
        let ex = exact(t);
        for m in 0..d {
            alpha[m] = alpha[m].max(ex[m]);
        }
    }
    alpha
}

/// Replace analytic factors by their level-N 1D L2 projections.
///
/// Exact-alpha closures are kept; [`compute_alpha`] re-samples the projected
/// factors so the bound also covers projection overshoot.
pub fn project_field(field: &VelocityField, space: &SparseSpace) -> VelocityField {
    let n = space.max_level();
    let k = space.degree();
    let mut out = field.clone();
    for comp in &mut out.components {
        for term in comp.iter_mut() {
            for f in term.factors.iter_mut() {
                if let Factor1d::Analytic(g) = f {
                    let g = Arc::clone(g);
                    let proj = Function1d::project(
                        n,
                        Arc::clone(space.basis()),
                        0.0,
                        1.0,
                        k + 2,
                        |x| g(x),
                    );
                    *f = Factor1d::Dg(proj);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn upwind_selects_upwind_trace() {
        let f = scalar_flux(2.0, 3.0, 1.0, FluxSpec::Upwind, 0.0).unwrap();
        assert_relative_eq!(f, 6.0);
        let f = scalar_flux(-2.0, 3.0, 1.0, FluxSpec::Upwind, 0.0).unwrap();
        assert_relative_eq!(f, -2.0);
    }

    #[test]
    fn both_fluxes_are_consistent_for_continuous_data() {
        for &a in &[1.5, -0.3, 0.0] {
            let c = 0.77;
            let up = scalar_flux(a, c, c, FluxSpec::Upwind, 0.0).unwrap();
            let lf = scalar_flux(a, c, c, FluxSpec::GlobalLaxFriedrichs, a.abs() + 1.0).unwrap();
            assert_relative_eq!(up, a * c, epsilon = 1e-14);
            assert_relative_eq!(lf, a * c, epsilon = 1e-14);
        }
    }

    #[test]
    fn negative_alpha_is_rejected() {
        assert!(scalar_flux(1.0, 0.0, 0.0, FluxSpec::GlobalLaxFriedrichs, -1.0).is_err());
    }

    #[test]
    fn constant_field_alpha() {
        let f = VelocityField::constant(&[1.0, 1.0], &[1.0, 1.0]);
        let a = compute_alpha(&f, 0.3, 4, 1);
        assert_eq!(a, vec![1.0, 1.0]);
    }

    #[test]
    fn solid_body_alpha_is_half() {
        // a1 = -x2 + 1/2 on the unit square.
        let field = VelocityField {
            components: vec![
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![Factor1d::One, Factor1d::Poly(vec![0.5, -1.0])],
                }],
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![Factor1d::Poly(vec![-0.5, 1.0]), Factor1d::One],
                }],
            ],
            exact_alpha: None,
        };
        let a = compute_alpha(&field, 0.0, 5, 2);
        assert_relative_eq!(a[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(a[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn time_factor_zero_makes_alpha_vanish() {
        let t_final = 1.5;
        let field = VelocityField {
            components: vec![vec![VelocityTerm {
                coef: 1.0,
                time: TimeFactor::Fn(Arc::new(move |t| {
                    (std::f64::consts::PI * t / t_final).cos()
                })),
                factors: vec![Factor1d::Analytic(Arc::new(|x: f64| {
                    (std::f64::consts::PI * x).sin().powi(2)
                }))],
            }]],
            exact_alpha: None,
        };
        let a = compute_alpha(&field, t_final / 2.0, 4, 2);
        assert_abs_diff_eq!(a[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn projecting_a_linear_field_changes_nothing() {
        let space = crate::sparse_space::SparseSpace::new(
            4,
            2,
            crate::sparse_space::Domain::unit(2),
        )
        .unwrap();
        let field = VelocityField {
            components: vec![
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![
                        Factor1d::One,
                        Factor1d::Analytic(Arc::new(|x| 0.5 - x)),
                    ],
                }],
                vec![],
            ],
            exact_alpha: None,
        };
        let proj = project_field(&field, &space);
        if let Factor1d::Dg(g) = &proj.components[0][0].factors[1] {
            for &x in &[0.1, 0.33, 0.775] {
                assert_abs_diff_eq!(g.eval(x), 0.5 - x, epsilon = 1e-13);
            }
        } else {
            panic!("expected projected factor");
        }
    }
}
