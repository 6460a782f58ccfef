//! Kinetic systems on sparse phase space: the nonlinear Vlasov-Ampere
//! coupling and the linear relaxation (Vlasov-Boltzmann) model, both built
//! on the transport operator with phase-space velocity a = (v, E).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function1d::Function1d;
use crate::projection::project_separable;
use crate::quadrature::GaussRule;
use crate::sparse_space::{
    block1d_count, block1d_index, Domain, SparseGridFunction, SparseSpace,
};
use crate::time_stepper::{rk3_step, RkVector};
use crate::transport::{
    Bc1d, BoundarySpec, Factor1d, FluxSpec, TimeFactor, TransportOperator, VelocityField,
    VelocityTerm,
};

/// Phase-space geometry: dx spatial dimensions (first) and dv velocity
/// dimensions, with velocity truncated to [-v_cut, v_cut]^dv.
#[derive(Debug, Clone)]
pub struct PhaseSpaceLayout {
    pub dx: usize,
    pub dv: usize,
    pub x_bounds: Vec<(f64, f64)>,
    pub v_cut: f64,
    /// Periodic in x (Vlasov benchmarks) or zero-exterior (relaxation).
    pub x_periodic: bool,
}

impl PhaseSpaceLayout {
    pub fn vlasov_1d1v(x_len: f64, v_cut: f64) -> Self {
        PhaseSpaceLayout {
            dx: 1,
            dv: 1,
            x_bounds: vec![(0.0, x_len)],
            v_cut,
            x_periodic: true,
        }
    }

    pub fn relaxation(dx: usize, x_half_len: f64, v_cut: f64) -> Self {
        PhaseSpaceLayout {
            dx,
            dv: dx,
            x_bounds: vec![(-x_half_len, x_half_len); dx],
            v_cut,
            x_periodic: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dx + self.dv
    }

    pub fn domain(&self) -> Domain {
        let mut bounds = self.x_bounds.clone();
        for _ in 0..self.dv {
            bounds.push((-self.v_cut, self.v_cut));
        }
        Domain::new(&bounds)
    }

    pub fn bc(&self) -> BoundarySpec {
        let mut bc = Vec::new();
        for _ in 0..self.dx {
            bc.push(if self.x_periodic {
                Bc1d::Periodic
            } else {
                Bc1d::ZeroExterior
            });
        }
        for _ in 0..self.dv {
            bc.push(Bc1d::ZeroExterior);
        }
        BoundarySpec(bc)
    }

    pub fn x_width(&self, m: usize) -> f64 {
        self.x_bounds[m].1 - self.x_bounds[m].0
    }

    pub fn v_width(&self) -> f64 {
        2.0 * self.v_cut
    }

    /// Physical velocity from the reference coordinate of a v-dimension.
    pub fn v_of_ref(&self, xref: f64) -> f64 {
        -self.v_cut + self.v_width() * xref
    }
}

/// Integrals of each 1D basis function against 1, v and v^2 where
/// v = -v_cut + 2 v_cut * x on [0,1]; exact from raw moments.
#[derive(Debug, Clone)]
pub struct MomentTables {
    pub mom0: Vec<f64>,
    pub mom1_v: Vec<f64>,
    pub mom2_v: Vec<f64>,
}

pub fn build_moment_tables(space: &SparseSpace, v_cut: f64) -> MomentTables {
    let basis = space.basis();
    let n = space.max_level();
    let kp = space.degree() + 1;
    let nb = block1d_count(n) * kp;
    let mut mom0 = vec![0.0; nb];
    let mut mom1_v = vec![0.0; nb];
    let mut mom2_v = vec![0.0; nb];
    let (a, w) = (-v_cut, 2.0 * v_cut);
    for l in 0..=n {
        let cells = crate::sparse_space::cells_at_level(l);
        for j in 0..cells {
            for i in 0..kp {
                let idx = block1d_index(l, j) * kp + i;
                let m0 = basis.moment(l, j, i, 0).unwrap();
                let m1 = basis.moment(l, j, i, 1).unwrap();
                let m2 = basis.moment(l, j, i, 2).unwrap();
                mom0[idx] = m0;
                mom1_v[idx] = a * m0 + w * m1;
                mom2_v[idx] = a * a * m0 + 2.0 * a * w * m1 + w * w * m2;
            }
        }
    }
    MomentTables {
        mom0,
        mom1_v,
        mom2_v,
    }
}

/// Flat 1D index (block * modes + poly) of one dimension of a block entry.
fn part_index(space: &SparseSpace, level: u8, cell: u32, poly: usize) -> usize {
    block1d_index(level as usize, cell as usize) * (space.degree() + 1) + poly
}

/// Iterate the coefficients of `f` and hand (per-dimension 1D indices,
/// value) to the callback.
fn for_each_coeff(f: &SparseGridFunction, mut cb: impl FnMut(&[usize], f64)) {
    let space = f.space();
    let d = space.dim();
    let kp = space.degree() + 1;
    let blen = space.block_len();
    let mut idx = vec![0usize; d];
    for (bi, blk) in space.blocks().iter().enumerate() {
        let coeffs = &f.coeffs()[bi * blen..(bi + 1) * blen];
        for (flat, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut rem = flat;
            for m in (0..d).rev() {
                let p = rem % kp;
                rem /= kp;
                idx[m] = part_index(space, blk.level[m], blk.cell[m], p);
            }
            cb(&idx, c);
        }
    }
}

/// Macroscopic density rho(x) = int f dv for 1D-in-x layouts.
///
/// Velocity integration is exact: only v-parts with a nonzero mean
/// contribute, via the precomputed moment tables.
pub fn density(f: &SparseGridFunction, layout: &PhaseSpaceLayout, mom: &MomentTables) -> Function1d {
    assert_eq!(layout.dx, 1, "density as Function1d needs dx = 1");
    let space = f.space();
    let mut rho = Function1d::zeros(
        space.max_level(),
        Arc::clone(space.basis()),
        layout.x_bounds[0].0,
        layout.x_width(0),
    );
    let vol_v = layout.v_width().powi(layout.dv as i32);
    for_each_coeff(f, |idx, c| {
        let mut w = vol_v * c;
        for vd in 0..layout.dv {
            w *= mom.mom0[idx[1 + vd]];
        }
        if w != 0.0 {
            rho.coeffs_mut()[idx[0]] += w;
        }
    });
    rho
}

/// Current density J(x) = int f v dv (1D1V), exact from moment tables.
pub fn current_density(
    f: &SparseGridFunction,
    layout: &PhaseSpaceLayout,
    mom: &MomentTables,
) -> Function1d {
    assert_eq!((layout.dx, layout.dv), (1, 1));
    let space = f.space();
    let mut j = Function1d::zeros(
        space.max_level(),
        Arc::clone(space.basis()),
        layout.x_bounds[0].0,
        layout.x_width(0),
    );
    let w_v = layout.v_width();
    for_each_coeff(f, |idx, c| {
        let w = w_v * c * mom.mom1_v[idx[1]];
        if w != 0.0 {
            j.coeffs_mut()[idx[0]] += w;
        }
    });
    j
}

/// The spatial marginal of f on a matching dx-dimensional sparse space.
pub fn density_xspace(
    f: &SparseGridFunction,
    layout: &PhaseSpaceLayout,
    x_space: &Arc<SparseSpace>,
) -> SparseGridFunction {
    let space = f.space();
    let kp = space.degree() + 1;
    let mut rho = SparseGridFunction::zeros(Arc::clone(x_space));
    let vol_v = layout.v_width().powi(layout.dv as i32);
    let blen = space.block_len();
    let xb = x_space.block_len();
    for (bi, blk) in space.blocks().iter().enumerate() {
        // Only blocks whose v-parts sit at level 0 have nonzero v-mean.
        if blk.level[layout.dx..].iter().any(|&l| l != 0) {
            continue;
        }
        let Some(xbi) = x_space.block_index(&blk.level[..layout.dx], &blk.cell[..layout.dx])
        else {
            continue;
        };
        let coeffs = &f.coeffs()[bi * blen..(bi + 1) * blen];
        let dst = xbi * xb;
        for (flat, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            // Split flat index into x-part and v-part.
            let mut rem = flat;
            let mut vpoly_ok = true;
            for _ in 0..layout.dv {
                if rem % kp != 0 {
                    vpoly_ok = false;
                }
                rem /= kp;
            }
            if vpoly_ok {
                rho.coeffs_mut()[dst + rem] += vol_v * c;
            }
        }
    }
    rho
}

/// Global phase-space moments used by the conservation diagnostics.
pub struct PhaseMoments {
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub kinetic_energy: f64,
    pub enstrophy: f64,
}

pub fn phase_moments(
    f: &SparseGridFunction,
    layout: &PhaseSpaceLayout,
    mom: &MomentTables,
) -> PhaseMoments {
    let space = f.space();
    let vol = space.domain().volume();
    let d = space.dim();
    let mut momentum = vec![0.0; layout.dv];
    let mut kinetic = 0.0;
    for_each_coeff(f, |idx, c| {
        // Base weight: product of plain means over all dimensions.
        for vd in 0..layout.dv {
            let vdim = layout.dx + vd;
            let mut w = c;
            for m in 0..d {
                if m == vdim {
                    continue;
                }
                w *= mom.mom0[idx[m]];
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 {
                momentum[vd] += w * mom.mom1_v[idx[vdim]];
                kinetic += w * mom.mom2_v[idx[vdim]];
            }
        }
    });
    // The moment tables integrate in reference measure with the physical
    // v-coordinate mapped in, so the uniform volume factor converts all
    // reference integrals to physical ones.
    PhaseMoments {
        mass: f.coeffs()[0] * vol,
        momentum: momentum.iter().map(|&p| p * vol).collect(),
        kinetic_energy: 0.5 * kinetic * vol,
        enstrophy: f.dot(f) * vol,
    }
}

/// Initial electric field from the Gauss law dE/dx = rho - mean(rho), with
/// zero spatial mean, projected onto the level-N space.
pub fn ampere_initial_field(rho: &Function1d) -> Function1d {
    let n = rho.level();
    let cells = 1usize << n;
    let (lo, _) = rho.bounds();
    let width = rho.width();
    let h = width / cells as f64;
    let mean = rho.mean();
    let rule = GaussRule::new(rho.basis().degree() + 3);
    // Cumulative integral of (rho - mean) up to each cell boundary.
    let mut cum = vec![0.0; cells + 1];
    for c in 0..cells {
        let x0 = lo + c as f64 * h;
        let integral = rule.integrate(x0, x0 + h, |x| rho.eval(x) - mean);
        cum[c + 1] = cum[c] + integral;
    }
    let anti = |x: f64| {
        let mut c = (((x - lo) / h) as usize).min(cells - 1);
        if x < lo + c as f64 * h {
            c = c.saturating_sub(1);
        }
        let x0 = lo + c as f64 * h;
        cum[c] + rule.integrate(x0, x, |s| rho.eval(s) - mean)
    };
    let mut e = Function1d::project(
        n,
        Arc::clone(rho.basis()),
        lo,
        width,
        rho.basis().degree() + 3,
        anti,
    );
    // Zero-mean gauge.
    e.coeffs_mut()[0] = 0.0;
    e
}

/// State of the Vlasov-Ampere system: phase-space distribution plus the
/// 1D-in-x electric field.
#[derive(Debug, Clone)]
pub struct VlasovAmpereState {
    pub f: SparseGridFunction,
    pub e: Function1d,
}

impl RkVector for VlasovAmpereState {
    fn scale(&mut self, a: f64) {
        self.f.scale(a);
        self.e.scale(a);
    }
    fn axpy(&mut self, a: f64, other: &Self) {
        self.f.axpy(a, &other.f);
        self.e.axpy(a, &other.e);
    }
    fn is_finite(&self) -> bool {
        self.f.is_finite() && self.e.is_finite()
    }
}

/// Semi-discrete Vlasov-Ampere solver (1D1V).
pub struct VlasovAmpere {
    pub layout: PhaseSpaceLayout,
    pub moments: MomentTables,
    op: TransportOperator,
    space: Arc<SparseSpace>,
}

impl VlasovAmpere {
    pub fn new(space: Arc<SparseSpace>, layout: PhaseSpaceLayout, flux: FluxSpec) -> Result<Self> {
        if (layout.dx, layout.dv) != (1, 1) {
            return Err(Error::DimensionMismatch(
                "Vlasov-Ampere driver is 1D1V".into(),
            ));
        }
        let l = layout.x_width(0);
        let vc = layout.v_cut;
        // a = (v, E): x-transport with the linear v profile; the E factor is
        // installed per stage via set_dg_factor.
        let field = VelocityField {
            components: vec![
                vec![VelocityTerm {
                    coef: 1.0 / l,
                    time: TimeFactor::One,
                    factors: vec![Factor1d::One, Factor1d::Poly(vec![-vc, 2.0 * vc])],
                }],
                // The E factor (already divided by the v-width) is installed
                // per stage via set_dg_factor.
                vec![VelocityTerm {
                    coef: 1.0,
                    time: TimeFactor::One,
                    factors: vec![Factor1d::Poly(vec![0.0]), Factor1d::One],
                }],
            ],
            exact_alpha: None,
        };
        let moments = build_moment_tables(&space, vc);
        let op = TransportOperator::new(Arc::clone(&space), field, flux, layout.bc())?;
        Ok(VlasovAmpere {
            layout,
            moments,
            op,
            space,
        })
    }

    pub fn space(&self) -> &Arc<SparseSpace> {
        &self.space
    }

    /// df/dt and dE/dt at stage time t for the given stage state.
    pub fn rhs(&mut self, s: &VlasovAmpereState, t: f64) -> Result<VlasovAmpereState> {
        let mut e_ref = s.e.clone();
        e_ref.scale(1.0 / self.layout.v_width());
        self.op.set_dg_factor(1, 0, &e_ref)?;
        let df = self.op.apply(&s.f, t);
        let mut de = current_density(&s.f, &self.layout, &self.moments);
        de.scale(-1.0);
        Ok(VlasovAmpereState { f: df, e: de })
    }

    pub fn step(&mut self, s: &VlasovAmpereState, t: f64, dt: f64) -> Result<VlasovAmpereState> {
        // Stage errors surface through the non-finite check in rk3_step;
        // rhs errors abort the closure via poisoned output instead.
        let mut failed = None;
        let out = rk3_step(s, t, dt, |state, ts| match self.rhs(state, ts) {
            Ok(d) => d,
            Err(e) => {
                failed = Some(e);
                let mut z = state.clone();
                z.scale(f64::NAN);
                z
            }
        });
        match failed {
            Some(e) => Err(e),
            None => out,
        }
    }

    /// Velocity reversal f(x,v) -> f(x,-v); the field is kept.
    pub fn reverse_velocity(&self, s: &VlasovAmpereState) -> VlasovAmpereState {
        VlasovAmpereState {
            f: s.f.reflect_dim(1),
            e: s.e.clone(),
        }
    }
}

/// Parameters of the linear relaxation operator L(f) = (mu rho - f)/tau with
/// the confining potential Phi = |x|^2/2 (E = -x).
#[derive(Debug, Clone, Copy)]
pub struct RelaxationSpec {
    pub tau: f64,
    pub theta: f64,
}

impl Default for RelaxationSpec {
    fn default() -> Self {
        RelaxationSpec {
            tau: 1.0,
            theta: 1.0,
        }
    }
}

/// Semi-discrete relaxation-model solver (1D1V or 2D2V).
pub struct Relaxation {
    pub layout: PhaseSpaceLayout,
    pub spec: RelaxationSpec,
    pub moments: MomentTables,
    op: TransportOperator,
    space: Arc<SparseSpace>,
    /// Per-velocity-dimension 1D projection of the Maxwellian factor.
    mu_proj: Vec<Function1d>,
}

impl Relaxation {
    pub fn new(
        space: Arc<SparseSpace>,
        layout: PhaseSpaceLayout,
        spec: RelaxationSpec,
        flux: FluxSpec,
    ) -> Result<Self> {
        if layout.dx != layout.dv || layout.x_periodic {
            return Err(Error::DimensionMismatch(
                "relaxation model uses dx = dv with zero-exterior x".into(),
            ));
        }
        let d = layout.dim();
        let vc = layout.v_cut;
        let mut components: Vec<Vec<VelocityTerm>> = Vec::new();
        for m in 0..layout.dx {
            // dx_m/dt = v_m.
            let mut factors = vec![Factor1d::One; d];
            factors[layout.dx + m] = Factor1d::Poly(vec![-vc, 2.0 * vc]);
            components.push(vec![VelocityTerm {
                coef: 1.0 / layout.x_width(m),
                time: TimeFactor::One,
                factors,
            }]);
        }
        for m in 0..layout.dv {
            // dv_m/dt = E_m(x) = -x_m.
            let (lo, _) = layout.x_bounds[m];
            let w = layout.x_width(m);
            let mut factors = vec![Factor1d::One; d];
            factors[m] = Factor1d::Poly(vec![-lo, -w]);
            components.push(vec![VelocityTerm {
                coef: 1.0 / layout.v_width(),
                time: TimeFactor::One,
                factors,
            }]);
        }
        let field = VelocityField {
            components,
            exact_alpha: None,
        };
        let moments = build_moment_tables(&space, vc);
        let theta = spec.theta;
        let mu_proj: Vec<Function1d> = (0..layout.dv)
            .map(|_| {
                Function1d::project(
                    space.max_level(),
                    Arc::clone(space.basis()),
                    -vc,
                    2.0 * vc,
                    space.degree() + 4,
                    |v| (-v * v / (2.0 * theta)).exp() / (2.0 * std::f64::consts::PI * theta).sqrt(),
                )
            })
            .collect();
        let op = TransportOperator::new(Arc::clone(&space), field, flux, layout.bc())?;
        Ok(Relaxation {
            layout,
            spec,
            moments,
            op,
            space,
            mu_proj,
        })
    }

    pub fn space(&self) -> &Arc<SparseSpace> {
        &self.space
    }

    /// Re-tensorize the source term mu(v) rho(t,x) onto the sparse set.
    fn tensorize_source(&self, f: &SparseGridFunction) -> SparseGridFunction {
        let space = &self.space;
        let kp = space.degree() + 1;
        let dx = self.layout.dx;
        let d = space.dim();
        let blen = space.block_len();
        let vol_v = self.layout.v_width().powi(self.layout.dv as i32);
        let mut out = SparseGridFunction::zeros(Arc::clone(space));
        // rho coefficients indexed by the x-part flat position.
        // Gather: v-parts at level 0, poly 0.
        let mut rho: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
        for (bi, blk) in space.blocks().iter().enumerate() {
            if blk.level[dx..].iter().any(|&l| l != 0) {
                continue;
            }
            let coeffs = &f.coeffs()[bi * blen..(bi + 1) * blen];
            for (flat, &c) in coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let mut rem = flat;
                let mut vzero = true;
                for _ in dx..d {
                    if rem % kp != 0 {
                        vzero = false;
                        break;
                    }
                    rem /= kp;
                }
                if !vzero {
                    continue;
                }
                // Key: x block parts + x poly (rem).
                let mut key = rem as u64;
                for m in 0..dx {
                    key = key << 16
                        | part_index(space, blk.level[m], blk.cell[m], 0) as u64;
                }
                *rho.entry(key).or_insert(0.0) += vol_v * c;
            }
        }
        for (bi, blk) in space.blocks().iter().enumerate() {
            let dst = &mut out.coeffs_mut()[bi * blen..(bi + 1) * blen];
            for (flat, slot) in dst.iter_mut().enumerate() {
                // Split into x-poly part (key) and v 1D indices.
                let mut rem = flat;
                let mut mu = 1.0;
                for vd in (0..self.layout.dv).rev() {
                    let p = rem % kp;
                    rem /= kp;
                    let vi = part_index(space, blk.level[dx + vd], blk.cell[dx + vd], p);
                    mu *= self.mu_proj[vd].coeffs()[vi];
                }
                if mu == 0.0 {
                    continue;
                }
                let mut key = rem as u64;
                for m in 0..dx {
                    key = key << 16 | part_index(space, blk.level[m], blk.cell[m], 0) as u64;
                }
                if let Some(&r) = rho.get(&key) {
                    *slot = mu * r;
                }
            }
        }
        out
    }

    /// Transport plus relaxation source.
    pub fn rhs(&self, f: &SparseGridFunction, t: f64) -> SparseGridFunction {
        let mut out = self.op.apply(f, t);
        let source = self.tensorize_source(f);
        let inv_tau = 1.0 / self.spec.tau;
        out.axpy(inv_tau, &source);
        out.axpy(-inv_tau, f);
        out
    }

    pub fn step(
        &self,
        f: &SparseGridFunction,
        t: f64,
        dt: f64,
    ) -> Result<SparseGridFunction> {
        rk3_step(f, t, dt, |s, ts| self.rhs(s, ts))
    }

    /// Stationary density rho_inf(x) = exp(-Phi/theta)/Z per dimension
    /// (normalized over the whole axis, not the cut-off box).
    pub fn stationary_density_factor(&self, x: f64) -> f64 {
        (-x * x / (2.0 * self.spec.theta)).exp()
            / (2.0 * std::f64::consts::PI * self.spec.theta).sqrt()
    }

    /// Maxwellian velocity factor of the equilibrium.
    pub fn maxwellian_factor(&self, v: f64) -> f64 {
        (-v * v / (2.0 * self.spec.theta)).exp()
            / (2.0 * std::f64::consts::PI * self.spec.theta).sqrt()
    }

    /// The global equilibrium M(x,v), analytic.
    pub fn equilibrium_value(&self, xv: &[f64]) -> f64 {
        let mut m = 1.0;
        for i in 0..self.layout.dx {
            m *= self.stationary_density_factor(xv[i]);
        }
        for i in 0..self.layout.dv {
            m *= self.maxwellian_factor(xv[self.layout.dx + i]);
        }
        m
    }

    /// Projection of the equilibrium onto the sparse space.
    pub fn equilibrium_projected(&self) -> SparseGridFunction {
        let factors: Vec<Box<dyn Fn(f64) -> f64 + Sync>> = (0..self.space.dim())
            .map(|m| {
                let theta = self.spec.theta;
                let b: Box<dyn Fn(f64) -> f64 + Sync> = Box::new(move |c: f64| {
                    (-c * c / (2.0 * theta)).exp()
                        / (2.0 * std::f64::consts::PI * theta).sqrt()
                });
                let _ = m;
                b
            })
            .collect();
        let refs: Vec<&(dyn Fn(f64) -> f64 + Sync)> =
            factors.iter().map(|b| b.as_ref()).collect();
        project_separable(&refs, &self.space)
    }
}

/// Benchmark initial data, projected onto the sparse space.
#[derive(Debug, Clone)]
pub struct InitParams {
    /// Perturbation amplitude A (Landau / two-stream).
    pub amplitude: f64,
    /// Spatial wave number of the perturbation.
    pub k_wave: f64,
    /// Cosine-bell radius b and center (solid rotation / deformational).
    pub bell_radius: f64,
    pub bell_center: Vec<f64>,
}

impl Default for InitParams {
    fn default() -> Self {
        InitParams {
            amplitude: 0.5,
            k_wave: 0.5,
            bell_radius: 0.23,
            bell_center: vec![0.75, 0.5],
        }
    }
}

fn maxwellian(v: f64) -> f64 {
    (-v * v / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn two_stream_profile(v: f64) -> f64 {
    v * v * maxwellian(v)
}

/// Named benchmark initial conditions; returns the L2 projection of the
/// analytic datum. Normalization constants for the relaxation cases are
/// computed by dense composite quadrature.
pub fn initial_condition(
    name: &str,
    space: &Arc<SparseSpace>,
    params: &InitParams,
) -> Result<SparseGridFunction> {
    let d = space.dim();
    let dom = space.domain().clone();
    match name {
        "landau" | "two-stream" => {
            if d != 2 {
                return Err(Error::DimensionMismatch("1D1V benchmark".into()));
            }
            let profile: fn(f64) -> f64 = if name == "landau" {
                maxwellian
            } else {
                two_stream_profile
            };
            let (a, kw) = (params.amplitude, params.k_wave);
            // f = prof(v) * (1 + A cos(k x)): two separable terms; the
            // factors receive physical coordinates.
            let base = project_separable(&[&|_x: f64| 1.0, &|v: f64| profile(v)], space);
            let mut pert = project_separable(
                &[&move |x: f64| (kw * x).cos(), &|v: f64| profile(v)],
                space,
            );
            pert.scale(a);
            let mut f = base;
            f.axpy(1.0, &pert);
            Ok(f)
        }
        "relax-1d" | "relax-2d" => {
            let dx = d / 2;
            if d % 2 != 0 || (name == "relax-1d" && dx != 1) || (name == "relax-2d" && dx != 2) {
                return Err(Error::DimensionMismatch("dx = dv layout".into()));
            }
            // Factor profiles in physical coordinates.
            let xfac = |m: usize| {
                move |x: f64| {
                    let s = (x * x / 2.0).sin();
                    let c = (x * x / 2.0).cos();
                    let trig2 = if m == 0 { s * s } else { c * c };
                    trig2 * (-x * x / 2.0).exp()
                }
            };
            let vfac = |v: f64| (-v * v / 2.0).exp();
            // Normalization over the cut-off box by composite quadrature.
            let rule = GaussRule::new(10);
            let mut norm = 1.0;
            for m in 0..dx {
                let (lo, hi) = (dom.lo[m], dom.lo[m] + dom.width[m]);
                let f = xfac(m);
                let cells = 256;
                let h = (hi - lo) / cells as f64;
                let mut acc = 0.0;
                for c in 0..cells {
                    acc += rule.integrate(lo + c as f64 * h, lo + (c + 1) as f64 * h, f);
                }
                norm *= acc;
            }
            for m in dx..d {
                let (lo, hi) = (dom.lo[m], dom.lo[m] + dom.width[m]);
                let cells = 256;
                let h = (hi - lo) / cells as f64;
                let mut acc = 0.0;
                for c in 0..cells {
                    acc += rule.integrate(lo + c as f64 * h, lo + (c + 1) as f64 * h, vfac);
                }
                norm *= acc;
            }
            let factors: Vec<Box<dyn Fn(f64) -> f64 + Sync>> = (0..d)
                .map(|m| {
                    if m < dx {
                        let f = xfac(m);
                        let b: Box<dyn Fn(f64) -> f64 + Sync> = Box::new(f);
                        b
                    } else {
                        Box::new(vfac)
                    }
                })
                .collect();
            let refs: Vec<&(dyn Fn(f64) -> f64 + Sync)> =
                factors.iter().map(|b| b.as_ref()).collect();
            let mut f = project_separable(&refs, space);
            f.scale(1.0 / norm);
            Ok(f)
        }
        "cosine-bell" => {
            let b = params.bell_radius;
            let center = params.bell_center.clone();
            let dd = d as i32;
            crate::projection::project(
                move |x: &[f64]| {
                    let r: f64 = x
                        .iter()
                        .zip(&center)
                        .map(|(xi, ci)| (xi - ci) * (xi - ci))
                        .sum::<f64>()
                        .sqrt();
                    if r <= b {
                        b.powi(dd - 1) * (std::f64::consts::PI * r / (2.0 * b)).cos().powi(6)
                    } else {
                        0.0
                    }
                },
                space,
            )
        }
        "sine-sum" => crate::projection::project(
            |x: &[f64]| (std::f64::consts::TAU * x.iter().sum::<f64>()).sin(),
            space,
        ),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn erf(x: f64) -> f64 {
        // Abramowitz-Stegun 7.1.26, enough accuracy for test constants.
        let t = 1.0 / (1.0 + 0.3275911 * x.abs());
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        let v = 1.0 - poly * (-x * x).exp();
        if x >= 0.0 {
            v
        } else {
            -v
        }
    }

    #[test]
    fn density_of_constant_is_box_height() {
        let layout = PhaseSpaceLayout::vlasov_1d1v(4.0 * std::f64::consts::PI, 2.0);
        let space = SparseSpace::new(3, 1, layout.domain()).unwrap();
        let mom = build_moment_tables(&space, layout.v_cut);
        let mut f = SparseGridFunction::zeros(Arc::clone(&space));
        f.coeffs_mut()[0] = 2.5;
        let rho = density(&f, &layout, &mom);
        for &x in &[0.3, 5.1, 11.9] {
            assert_relative_eq!(rho.eval(x), 2.5 * 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn odd_velocity_data_has_zero_density() {
        // f = v * g(x) integrates to zero over the symmetric box.
        let layout = PhaseSpaceLayout::vlasov_1d1v(1.0, 2.0);
        let space = SparseSpace::new(4, 2, layout.domain()).unwrap();
        let mom = build_moment_tables(&space, layout.v_cut);
        let f = project_separable(&[&|x: f64| 1.0 + 0.5 * x, &|v: f64| v], &space);
        let rho = density(&f, &layout, &mom);
        for c in rho.coeffs() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn current_of_uniform_f_vanishes_and_linear_v_gives_cube() {
        let vc = 2.0;
        let layout = PhaseSpaceLayout::vlasov_1d1v(1.0, vc);
        let space = SparseSpace::new(3, 1, layout.domain()).unwrap();
        let mom = build_moment_tables(&space, vc);
        let mut f = SparseGridFunction::zeros(Arc::clone(&space));
        f.coeffs_mut()[0] = 1.0;
        let j = current_density(&f, &layout, &mom);
        for c in j.coeffs() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-13);
        }
        // f = v: J = int v^2 dv = 2 Vc^3 / 3.
        let f = project_separable(&[&|_x: f64| 1.0, &|v: f64| v], &space);
        let j = current_density(&f, &layout, &mom);
        let expect = 2.0 * vc.powi(3) / 3.0;
        for &x in &[0.12, 0.5, 0.93] {
            assert_relative_eq!(j.eval(x), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn momentum_diagnostic_consistent_with_current_integral() {
        let layout = PhaseSpaceLayout::vlasov_1d1v(2.0, 3.0);
        let space = SparseSpace::new(4, 2, layout.domain()).unwrap();
        let mom = build_moment_tables(&space, layout.v_cut);
        let f = project_separable(
            &[
                &|x: f64| 1.0 + 0.3 * (std::f64::consts::TAU * x).sin(),
                &|v: f64| v * (-(v / 1.3f64).powi(2)).exp(),
            ],
            &space,
        );
        let j = current_density(&f, &layout, &mom);
        // total momentum = int J dx = mean(J) * width.
        let total_from_j = j.mean() * 2.0;
        let pm = phase_moments(&f, &layout, &mom);
        assert_relative_eq!(pm.momentum[0], total_from_j, epsilon = 1e-12);
    }

    #[test]
    fn landau_initial_mass_matches_truncated_maxwellian() {
        let l = 4.0 * std::f64::consts::PI;
        let vc = 2.0 * std::f64::consts::PI;
        let layout = PhaseSpaceLayout::vlasov_1d1v(l, vc);
        let space = SparseSpace::new(5, 2, layout.domain()).unwrap();
        let f = initial_condition("landau", &space, &InitParams::default()).unwrap();
        let mom = build_moment_tables(&space, vc);
        let pm = phase_moments(&f, &layout, &mom);
        let m0 = erf(vc / std::f64::consts::SQRT_2);
        assert_relative_eq!(pm.mass, l * m0, max_relative = 1e-6);
    }

    #[test]
    fn uniform_even_state_is_stationary_with_zero_field() {
        let layout = PhaseSpaceLayout::vlasov_1d1v(4.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI);
        let space = SparseSpace::new(4, 2, layout.domain()).unwrap();
        let mut va = VlasovAmpere::new(Arc::clone(&space), layout.clone(), FluxSpec::Upwind).unwrap();
        let f = project_separable(&[&|_x: f64| 1.0, &|v: f64| maxwellian(v)], &space);
        let e = Function1d::zeros(4, Arc::clone(space.basis()), 0.0, layout.x_width(0));
        let state = VlasovAmpereState { f, e };
        let d = va.rhs(&state, 0.0).unwrap();
        // Even-in-v data: J = 0; x-uniform data: no transport.
        for c in d.e.coeffs() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
        }
        for c in d.f.coeffs() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn relaxation_source_is_mass_neutral_up_to_cutoff() {
        let layout = PhaseSpaceLayout::relaxation(1, 5.0, 5.0);
        let space = SparseSpace::new(4, 2, layout.domain()).unwrap();
        let relax = Relaxation::new(
            Arc::clone(&space),
            layout.clone(),
            RelaxationSpec::default(),
            FluxSpec::Upwind,
        )
        .unwrap();
        let f = initial_condition("relax-1d", &space, &InitParams::default()).unwrap();
        let src = relax.tensorize_source(&f);
        // <mu rho - f, 1>: the Maxwellian mass defect over [-5,5] is
        // ~ erfc(5/sqrt(2)) ~ 6e-7 relative.
        let mass_src = src.coeffs()[0] * space.domain().volume();
        let mass_f = f.coeffs()[0] * space.domain().volume();
        assert_relative_eq!(mass_src, mass_f, max_relative = 2e-6);
    }

    #[test]
    fn projected_equilibrium_is_near_stationary() {
        let layout = PhaseSpaceLayout::relaxation(1, 5.0, 5.0);
        let space = SparseSpace::new(5, 3, layout.domain()).unwrap();
        let relax = Relaxation::new(
            Arc::clone(&space),
            layout.clone(),
            RelaxationSpec::default(),
            FluxSpec::Upwind,
        )
        .unwrap();
        let m = relax.equilibrium_projected();
        let r = relax.rhs(&m, 0.0);
        // The residual is bounded by the projection error scale of M.
        let resid = r.norm_l2();
        assert!(
            resid < 5e-3 * m.norm_l2().max(1.0),
            "equilibrium residual too large: {resid}"
        );
    }

    #[test]
    fn large_tau_limit_reduces_to_pure_transport() {
        let layout = PhaseSpaceLayout::relaxation(1, 5.0, 5.0);
        let space = SparseSpace::new(3, 1, layout.domain()).unwrap();
        let spec = RelaxationSpec {
            tau: 1e12,
            theta: 1.0,
        };
        let relax = Relaxation::new(Arc::clone(&space), layout.clone(), spec, FluxSpec::Upwind)
            .unwrap();
        let f = initial_condition("relax-1d", &space, &InitParams::default()).unwrap();
        let with_source = relax.rhs(&f, 0.0);
        let pure = relax.op.apply(&f, 0.0);
        let mut diff = with_source.clone();
        diff.axpy(-1.0, &pure);
        assert!(diff.norm_l2() <= 1e-10 * pure.norm_l2().max(1.0));
    }

    #[test]
    fn unknown_initial_condition_is_an_error() {
        let space = SparseSpace::new(2, 1, Domain::unit(2)).unwrap();
        assert!(matches!(
            initial_condition("bogus", &space, &InitParams::default()),
            Err(Error::UnknownProblem(_))
        ));
    }
}
