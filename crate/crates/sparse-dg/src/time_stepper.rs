//! TVD-RK3 (Shu-Osher) time integration with the CFL rules used for the
//! accuracy studies.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sparse_space::SparseGridFunction;
use crate::transport::{BoundarySpec, FluxSpec, TransportOperator, VelocityField};

/// Time-step control: CFL number, final time, and per-dimension maximum
/// physical wave speeds with the matching finest physical mesh widths.
#[derive(Debug, Clone)]
pub struct StepControl {
    pub cfl: f64,
    pub final_time: f64,
    pub degree: usize,
    /// Per-dimension maximum wave speed c_m.
    pub speeds: Vec<f64>,
    /// Per-dimension finest physical cell width, width_m * 2^-N.
    pub h: Vec<f64>,
}

impl StepControl {
    pub fn new(cfl: f64, final_time: f64, degree: usize, speeds: Vec<f64>, h: Vec<f64>) -> Self {
        StepControl {
            cfl,
            final_time,
            degree,
            speeds,
            h,
        }
    }
}

/// dt = CFL / sum_m c_m / h for k = 1, 2 and CFL / sum_m c_m / h^{4/3}
/// for k = 3.
pub fn cfl_dt(control: &StepControl) -> Result<f64> {
    if !(1..=3).contains(&control.degree) {
        return Err(Error::DegreeOutOfRange(control.degree, 1, 3));
    }
    let expo = if control.degree == 3 { 4.0 / 3.0 } else { 1.0 };
    let mut denom = 0.0;
    for (c, h) in control.speeds.iter().zip(&control.h) {
        denom += c / h.powf(expo);
    }
    if denom <= 0.0 {
        return Err(Error::ZeroSpeed);
    }
    Ok(control.cfl / denom)
}

/// Linear-combination state vector for Runge-Kutta stages.
pub trait RkVector: Clone {
    fn scale(&mut self, a: f64);
    fn axpy(&mut self, a: f64, other: &Self);
    fn is_finite(&self) -> bool;
}

impl RkVector for SparseGridFunction {
    fn scale(&mut self, a: f64) {
        SparseGridFunction::scale(self, a)
    }
    fn axpy(&mut self, a: f64, other: &Self) {
        SparseGridFunction::axpy(self, a, other)
    }
    fn is_finite(&self) -> bool {
        SparseGridFunction::is_finite(self)
    }
}

impl RkVector for crate::function1d::Function1d {
    fn scale(&mut self, a: f64) {
        crate::function1d::Function1d::scale(self, a)
    }
    fn axpy(&mut self, a: f64, other: &Self) {
        crate::function1d::Function1d::axpy(self, a, other)
    }
    fn is_finite(&self) -> bool {
        crate::function1d::Function1d::is_finite(self)
    }
}

/// One TVD-RK3 step of u_t = R(u, t):
///   u1    = u + dt R(u, t)
///   u2    = 3/4 u + 1/4 u1 + 1/4 dt R(u1, t + dt)
///   u_new = 1/3 u + 2/3 u2 + 2/3 dt R(u2, t + dt/2)
pub fn rk3_step<S, F>(u: &S, t: f64, dt: f64, mut rhs: F) -> Result<S>
where
    S: RkVector,
    F: FnMut(&S, f64) -> S,
{
    let r0 = rhs(u, t);
    let mut u1 = u.clone();
    u1.axpy(dt, &r0);
    if !u1.is_finite() {
        return Err(Error::NonFiniteState { stage: 1, time: t });
    }

    let r1 = rhs(&u1, t + dt);
    let mut u2 = u.clone();
    u2.scale(0.75);
    u2.axpy(0.25, &u1);
    u2.axpy(0.25 * dt, &r1);
    if !u2.is_finite() {
        return Err(Error::NonFiniteState { stage: 2, time: t });
    }

    let r2 = rhs(&u2, t + 0.5 * dt);
    let mut out = u.clone();
    out.scale(1.0 / 3.0);
    out.axpy(2.0 / 3.0, &u2);
    out.axpy(2.0 / 3.0 * dt, &r2);
    if !out.is_finite() {
        return Err(Error::NonFiniteState { stage: 3, time: t });
    }
    Ok(out)
}

/// Observation callback invoked at the configured step stride (always at
/// t = 0 and at the final time).
pub struct Recorder<'a> {
    pub stride: usize,
    pub callback: Box<dyn FnMut(usize, f64, &SparseGridFunction) + 'a>,
}

/// Integrate the transport problem from u0 to the control's final time with
/// the fixed CFL step (last step truncated to land exactly on T).
pub fn integrate(
    u0: &SparseGridFunction,
    field: VelocityField,
    flux: FluxSpec,
    bc: BoundarySpec,
    control: &StepControl,
    mut recorder: Option<Recorder<'_>>,
) -> Result<(SparseGridFunction, usize)> {
    let op = TransportOperator::new(Arc::clone(u0.space()), field, flux, bc)?;
    let dt = cfl_dt(control)?;
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut step = 0usize;
    if let Some(rec) = recorder.as_mut() {
        (rec.callback)(0, 0.0, &u);
    }
    while t < control.final_time - 1e-14 * control.final_time.max(1.0) {
        let dt_step = dt.min(control.final_time - t);
        u = rk3_step(&u, t, dt_step, |s, ts| op.apply(s, ts))?;
        t += dt_step;
        step += 1;
        if let Some(rec) = recorder.as_mut() {
            if rec.stride > 0 && (step % rec.stride == 0 || t >= control.final_time) {
                (rec.callback)(step, t, &u);
            }
        }
    }
    Ok((u, step))
}
