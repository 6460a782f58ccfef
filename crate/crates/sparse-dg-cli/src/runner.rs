//! Benchmark orchestration: problem setup, integration with diagnostics
//! recording, and file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use sparse_dg::diagnostics::{
    conserved_quantities, convergence_orders, entropy_functionals, log_fourier_mode,
    ConservationReport, ConservationSample,
};
use sparse_dg::kinetic::{
    ampere_initial_field, build_moment_tables, density, density_xspace, initial_condition,
    InitParams, PhaseSpaceLayout, Relaxation, RelaxationSpec, VlasovAmpere, VlasovAmpereState,
};
use sparse_dg::projection::{l2_error, project, QuadratureRule};
use sparse_dg::sparse_space::{dof_count, Domain, SparseGridFunction, SparseSpace};
use sparse_dg::time_stepper::{cfl_dt, rk3_step, StepControl};
use sparse_dg::transport::{
    project_field, BoundarySpec, FluxSpec, TransportOperator, VelocityField,
};

use crate::config::{FluxChoice, Problem, RunConfig};

/// Errors mapped to process exit codes: config -> 2, numerical -> 3.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Numerical(String),
    Other(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "config error: {m}"),
            AppError::Numerical(m) => write!(f, "numerical failure: {m}"),
            AppError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<sparse_dg::Error> for AppError {
    fn from(e: sparse_dg::Error) -> Self {
        match e {
            sparse_dg::Error::NonFiniteState { .. } => AppError::Numerical(e.to_string()),
            other => AppError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Other(e.to_string())
    }
}

fn flux_spec(f: FluxChoice) -> FluxSpec {
    match f {
        FluxChoice::Upwind => FluxSpec::Upwind,
        FluxChoice::Lf => FluxSpec::GlobalLaxFriedrichs,
    }
}

/// Analytic cosine-bell initial profile.
fn bell(d: usize, b: f64, center: Vec<f64>) -> impl Fn(&[f64]) -> f64 + Sync {
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

/// Transport benchmark pieces shared by run and converge.
struct TransportSetup {
    field: VelocityField,
    flux: FluxSpec,
    bc: BoundarySpec,
    speeds: Vec<f64>,
    /// Exact reference at the final time (None: compare to the initial
    /// analytic profile, the return-to-state protocol).
    reference: Arc<dyn Fn(&[f64]) -> f64 + Sync + Send>,
}

fn transport_setup(cfg: &RunConfig, space: &Arc<SparseSpace>) -> Result<TransportSetup, AppError> {
    let d = cfg.d;
    match cfg.problem {
        Problem::AdvectConst => {
            let t = cfg.t_final;
            let reference = Arc::new(move |x: &[f64]| {
                (std::f64::consts::TAU * (x.iter().sum::<f64>() - d as f64 * t)).sin()
            });
            Ok(TransportSetup {
                field: VelocityField::constant(&vec![1.0; d], &vec![1.0; d]),
                flux: flux_spec(cfg.flux),
                bc: BoundarySpec::periodic(d),
                speeds: vec![1.0; d],
                reference,
            })
        }
        Problem::SolidRotation => {
            let field = if d == 2 {
                VelocityField::solid_rotation_2d()
            } else {
                VelocityField::solid_rotation_3d()
            };
            let field = project_field(&field, space);
            let speeds = if d == 2 {
                vec![0.5, 0.5]
            } else {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![0.5 * s, s, 0.5 * s]
            };
            let b = bell(d, cfg.bell_radius, cfg.bell_center.clone());
            Ok(TransportSetup {
                field,
                flux: flux_spec(cfg.flux),
                bc: BoundarySpec::periodic(d),
                speeds,
                reference: Arc::new(b),
            })
        }
        Problem::Deformational => {
            let field = project_field(&VelocityField::deformational_2d(cfg.t_final), space);
            let b = bell(d, cfg.bell_radius, cfg.bell_center.clone());
            Ok(TransportSetup {
                field,
                flux: flux_spec(cfg.flux),
                bc: BoundarySpec::periodic(2),
                speeds: vec![1.0, 1.0],
                reference: Arc::new(b),
            })
        }
        _ => Err(AppError::Config(format!(
            "{} is not a pure transport problem",
            cfg.problem.name()
        ))),
    }
}

fn initial_profile(cfg: &RunConfig, space: &Arc<SparseSpace>) -> Result<SparseGridFunction, AppError> {
    let params = InitParams {
        amplitude: cfg.amplitude,
        k_wave: cfg.k_wave,
        bell_radius: cfg.bell_radius,
        bell_center: cfg.bell_center.clone(),
    };
    let name = match cfg.problem {
        Problem::AdvectConst | Problem::ProjectionStudy => "sine-sum",
        Problem::SolidRotation | Problem::Deformational => "cosine-bell",
        Problem::VlasovLandau => "landau",
        Problem::VlasovTwoStream => "two-stream",
        Problem::Relax1d1v => "relax-1d",
        Problem::Relax2d2v => "relax-2d",
    };
    Ok(initial_condition(name, space, &params)?)
}

fn ensure_dir(dir: &str) -> Result<PathBuf, AppError> {
    let path = PathBuf::from(dir);
    fs::create_dir_all(&path)?;
    Ok(path)
}

struct Meta {
    lines: Vec<(String, String)>,
}

impl Meta {
    fn new(cfg: &RunConfig) -> Self {
        let mut m = Meta { lines: Vec::new() };
        m.push("problem", cfg.problem.name());
        m.push("d", cfg.d);
        m.push("N", cfg.n);
        m.push("k", cfg.k);
        m.push("cfl", format!("{:.16e}", cfg.cfl));
        m.push("t_final", format!("{:.16e}", cfg.t_final));
        m.push(
            "flux",
            match cfg.flux {
                FluxChoice::Upwind => "upwind",
                FluxChoice::Lf => "lf",
            },
        );
        m.push("field_mode", "projected");
        m.push("dof", dof_count(cfg.n, cfg.k, cfg.d));
        m
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    fn write(&self, path: &Path) -> Result<(), AppError> {
        let mut f = fs::File::create(path)?;
        for (k, v) in &self.lines {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn step_control(cfg: &RunConfig, speeds: Vec<f64>, widths: &[f64], t_final: f64) -> StepControl {
    let h: Vec<f64> = widths
        .iter()
        .map(|w| w / (1u64 << cfg.n) as f64)
        .collect();
    StepControl::new(cfg.cfl, t_final, cfg.k, speeds, h)
}

/// Execute `run <config>`: setup, integrate, diagnostics, artifacts.
pub fn execute_run(cfg: &RunConfig) -> Result<(), AppError> {
    match cfg.problem {
        Problem::ProjectionStudy => execute_projection_study(cfg),
        Problem::VlasovLandau | Problem::VlasovTwoStream => run_vlasov(cfg),
        Problem::Relax1d1v | Problem::Relax2d2v => run_relaxation(cfg),
        _ => run_transport(cfg),
    }
}

fn run_transport(cfg: &RunConfig) -> Result<(), AppError> {
    let start = Instant::now();
    let out = ensure_dir(&cfg.out_dir)?;
    let space = SparseSpace::new(cfg.n, cfg.k, Domain::unit(cfg.d))?;
    let setup = transport_setup(cfg, &space)?;
    let u0 = initial_profile(cfg, &space)?;
    let control = step_control(cfg, setup.speeds.clone(), &vec![1.0; cfg.d], cfg.t_final);
    let dt = cfl_dt(&control)?;
    let op = TransportOperator::new(
        Arc::clone(&space),
        setup.field.clone(),
        setup.flux,
        setup.bc.clone(),
    )?;

    let total_steps = (cfg.t_final / dt).ceil() as usize;
    let stride = effective_stride(cfg.series_stride, total_steps);
    let mut report = ConservationReport::default();
    let mut snapshots = cfg.snapshot_times.clone();
    snapshots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut snap_iter = snapshots.into_iter().peekable();

    let mut u = u0.clone();
    let mut t = 0.0;
    let mut step = 0usize;
    record_transport(&mut report, t, &u);
    maybe_snapshot(cfg, &out, &mut snap_iter, t, &u)?;
    while t < cfg.t_final - 1e-14 * cfg.t_final.max(1.0) {
        let d_step = dt.min(cfg.t_final - t);
        u = rk3_step(&u, t, d_step, |s, ts| op.apply(s, ts))?;
        t += d_step;
        step += 1;
        if step % stride == 0 || t >= cfg.t_final {
            record_transport(&mut report, t, &u);
        }
        maybe_snapshot(cfg, &out, &mut snap_iter, t, &u)?;
    }

    let rule = QuadratureRule {
        resolution: cfg.n,
        points: cfg.k + 3,
    };
    let reference = Arc::clone(&setup.reference);
    let err = l2_error(&u, move |x: &[f64]| reference(x), &rule)?;

    let mut meta = Meta::new(cfg);
    meta.push("dt", format!("{:.16e}", dt));
    meta.push("steps", step);
    meta.push("l2_error", format!("{:.16e}", err));
    meta.push("wall_seconds", format!("{:.3}", start.elapsed().as_secs_f64()));
    meta.write(&out.join("run_meta.txt"))?;
    let mut csv = fs::File::create(out.join("series.csv"))?;
    report.write_csv(&mut csv)?;
    let mut ef = fs::File::create(out.join("error.txt"))?;
    writeln!(ef, "{:.16e}", err)?;
    println!("{} N={} k={} dof={} error={:.6e}", cfg.problem.name(), cfg.n, cfg.k, space.dof(), err);
    Ok(())
}

fn record_transport(report: &mut ConservationReport, t: f64, u: &SparseGridFunction) {
    let vol = u.space().domain().volume();
    report.push(ConservationSample {
        t,
        mass: u.coeffs()[0] * vol,
        momentum: vec![f64::NAN],
        energy: f64::NAN,
        enstrophy: u.dot(u) * vol,
        log_fm: [f64::NAN; 4],
        h_log: f64::NAN,
        h2: f64::NAN,
    });
}

fn effective_stride(configured: usize, total_steps: usize) -> usize {
    if configured > 0 {
        configured
    } else {
        (total_steps / 200).max(1)
    }
}

fn maybe_snapshot(
    cfg: &RunConfig,
    out: &Path,
    pending: &mut std::iter::Peekable<std::vec::IntoIter<f64>>,
    t: f64,
    u: &SparseGridFunction,
) -> Result<(), AppError> {
    while let Some(&next) = pending.peek() {
        if t + 1e-12 < next {
            break;
        }
        pending.next();
        let d = u.space().dim();
        let dom = u.space().domain().clone();
        let mid: Vec<f64> = (0..d).map(|m| dom.lo[m] + 0.5 * dom.width[m]).collect();
        let dims = if d <= 2 { (0, d - 1) } else { (0, d / 2) };
        let name = format!("snap_t{:.4}.txt", t);
        let mut f = fs::File::create(out.join(name))?;
        u.write_snapshot(&mut f, cfg.snapshot_points, t, dims, &mid)?;
        if d == 4 {
            let name = format!("snap_x1x2_t{:.4}.txt", t);
            let mut f = fs::File::create(out.join(name))?;
            u.write_snapshot(&mut f, cfg.snapshot_points, t, (0, 1), &mid)?;
        }
    }
    Ok(())
}

fn vlasov_layout(cfg: &RunConfig) -> PhaseSpaceLayout {
    PhaseSpaceLayout::vlasov_1d1v(cfg.x_len, cfg.v_cut)
}

fn run_vlasov(cfg: &RunConfig) -> Result<(), AppError> {
    let start = Instant::now();
    let out = ensure_dir(&cfg.out_dir)?;
    let layout = vlasov_layout(cfg);
    let space = SparseSpace::new(cfg.n, cfg.k, layout.domain())?;
    let f0 = initial_profile(cfg, &space)?;
    let mom = build_moment_tables(&space, layout.v_cut);
    let e0 = ampere_initial_field(&density(&f0, &layout, &mom));
    let mut va = VlasovAmpere::new(Arc::clone(&space), layout.clone(), flux_spec(cfg.flux))?;
    let speeds = vec![layout.v_cut, e0.max_abs_sampled(4 * (cfg.k + 1))];
    let control = step_control(cfg, speeds, &[cfg.x_len, 2.0 * cfg.v_cut], cfg.t_final);
    let dt = cfl_dt(&control)?;
    let total_steps = (cfg.t_final / dt).ceil() as usize;
    let stride = effective_stride(cfg.series_stride, total_steps);

    let mut report = ConservationReport::default();
    let mut snaps: Vec<f64> = cfg.snapshot_times.clone();
    snaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut snap_iter = snaps.into_iter().peekable();

    let mut state = VlasovAmpereState { f: f0, e: e0 };
    let record = |report: &mut ConservationReport, t: f64, s: &VlasovAmpereState| {
        let mut sample = conserved_quantities(&s.f, Some(&s.e), &layout, &mom, t);
        for (i, slot) in sample.log_fm.iter_mut().enumerate() {
            *slot = log_fourier_mode(&s.e, i + 1, cfg.x_len, cfg.k_wave);
        }
        report.push(sample);
    };
    record(&mut report, 0.0, &state);
    maybe_snapshot(cfg, &out, &mut snap_iter, 0.0, &state.f)?;
    let mut t = 0.0;
    let mut step = 0usize;
    while t < cfg.t_final - 1e-14 * cfg.t_final.max(1.0) {
        let d_step = dt.min(cfg.t_final - t);
        state = va.step(&state, t, d_step)?;
        t += d_step;
        step += 1;
        if step % stride == 0 || t >= cfg.t_final {
            record(&mut report, t, &state);
        }
        maybe_snapshot(cfg, &out, &mut snap_iter, t, &state.f)?;
    }

    let mut meta = Meta::new(cfg);
    meta.push("domain_l", format!("{:.16e}", cfg.x_len));
    meta.push("v_cut", format!("{:.16e}", cfg.v_cut));
    meta.push("dt", format!("{:.16e}", dt));
    meta.push("steps", step);
    meta.push("wall_seconds", format!("{:.3}", start.elapsed().as_secs_f64()));
    meta.write(&out.join("run_meta.txt"))?;
    let mut csv = fs::File::create(out.join("series.csv"))?;
    report.write_csv(&mut csv)?;
    println!(
        "{} N={} k={} dof={} steps={} mass_drift={:.2e}",
        cfg.problem.name(),
        cfg.n,
        cfg.k,
        space.dof(),
        step,
        report.max_drift(|s| s.mass)
    );
    Ok(())
}

fn run_relaxation(cfg: &RunConfig) -> Result<(), AppError> {
    let start = Instant::now();
    let out = ensure_dir(&cfg.out_dir)?;
    let dx = cfg.d / 2;
    let layout = PhaseSpaceLayout::relaxation(dx, cfg.x_len, cfg.v_cut);
    let space = SparseSpace::new(cfg.n, cfg.k, layout.domain())?;
    let f0 = initial_profile(cfg, &space)?;
    let mom = build_moment_tables(&space, layout.v_cut);
    let spec = RelaxationSpec {
        tau: cfg.tau,
        theta: cfg.theta,
    };
    let relax = Relaxation::new(Arc::clone(&space), layout.clone(), spec, flux_spec(cfg.flux))?;
    let speeds: Vec<f64> = (0..cfg.d)
        .map(|m| {
            if m < dx {
                cfg.v_cut
            } else {
                cfg.x_len // max |E| = max |x|
            }
        })
        .collect();
    let widths: Vec<f64> = (0..cfg.d)
        .map(|m| {
            if m < dx {
                2.0 * cfg.x_len
            } else {
                2.0 * cfg.v_cut
            }
        })
        .collect();
    let control = step_control(cfg, speeds, &widths, cfg.t_final);
    let dt = cfl_dt(&control)?;
    let total_steps = (cfg.t_final / dt).ceil() as usize;
    let stride = effective_stride(cfg.series_stride, total_steps);

    // x-marginal space for the density-convergence diagnostic (2D2V).
    let x_space = if dx == 2 {
        Some(SparseSpace::new(
            cfg.n,
            cfg.k,
            Domain::new(&[(-cfg.x_len, cfg.x_len); 2]),
        )?)
    } else {
        None
    };
    let rho_inf_norm = {
        let theta = cfg.theta;
        move |x: &[f64]| -> f64 {
            x.iter()
                .map(|&xi| {
                    (-xi * xi / (2.0 * theta)).exp()
                        / (2.0 * std::f64::consts::PI * theta).sqrt()
                })
                .product()
        }
    };

    let mut report = ConservationReport::default();
    let mut density_track: Vec<(f64, f64)> = Vec::new();
    let record = |report: &mut ConservationReport,
                  density_track: &mut Vec<(f64, f64)>,
                  t: f64,
                  f: &SparseGridFunction|
     -> Result<(), AppError> {
        let mut sample = conserved_quantities(f, None, &layout, &mom, t);
        if dx == 1 {
            let (h_log, h2) = entropy_functionals(f, &relax);
            sample.h_log = h_log;
            sample.h2 = h2;
            let rho = density(f, &layout, &mom);
            let cells = 1usize << cfg.n;
            let rule = sparse_dg::quadrature::GaussRule::new(cfg.k + 3);
            let mut err2 = 0.0;
            for c in 0..cells {
                let x0 = -cfg.x_len + 2.0 * cfg.x_len * c as f64 / cells as f64;
                let x1 = -cfg.x_len + 2.0 * cfg.x_len * (c as f64 + 1.0) / cells as f64;
                err2 += rule.integrate(x0, x1, |x| {
                    let d = rho.eval(x) - rho_inf_norm(&[x]);
                    d * d
                });
            }
            density_track.push((t, err2.sqrt()));
        } else if let Some(xs) = &x_space {
            let rho = density_xspace(f, &layout, xs);
            let rule = QuadratureRule {
                resolution: cfg.n,
                points: cfg.k + 3,
            };
            let err = l2_error(&rho, rho_inf_norm, &rule)?;
            density_track.push((t, err));
        }
        report.push(sample);
        Ok(())
    };

    let mut snaps: Vec<f64> = cfg.snapshot_times.clone();
    snaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut snap_iter = snaps.into_iter().peekable();
    let mut f = f0;
    record(&mut report, &mut density_track, 0.0, &f)?;
    maybe_snapshot(cfg, &out, &mut snap_iter, 0.0, &f)?;
    let mut t = 0.0;
    let mut step = 0usize;
    while t < cfg.t_final - 1e-14 * cfg.t_final.max(1.0) {
        let d_step = dt.min(cfg.t_final - t);
        f = relax.step(&f, t, d_step)?;
        t += d_step;
        step += 1;
        if step % stride == 0 || t >= cfg.t_final {
            record(&mut report, &mut density_track, t, &f)?;
        }
        maybe_snapshot(cfg, &out, &mut snap_iter, t, &f)?;
    }

    let mut meta = Meta::new(cfg);
    meta.push("dt", format!("{:.16e}", dt));
    meta.push("steps", step);
    meta.push("tau", format!("{:.16e}", cfg.tau));
    meta.push("theta", format!("{:.16e}", cfg.theta));
    meta.push("wall_seconds", format!("{:.3}", start.elapsed().as_secs_f64()));
    meta.write(&out.join("run_meta.txt"))?;
    let mut csv = fs::File::create(out.join("series.csv"))?;
    report.write_csv(&mut csv)?;
    let mut dfile = fs::File::create(out.join("density_error.csv"))?;
    writeln!(dfile, "t,density_l2_error")?;
    for (t, e) in &density_track {
        writeln!(dfile, "{:.16e},{:.16e}", t, e)?;
    }
    println!(
        "{} N={} k={} dof={} steps={} final_Hlog={:.4e}",
        cfg.problem.name(),
        cfg.n,
        cfg.k,
        space.dof(),
        step,
        report.samples.last().unwrap().h_log
    );
    Ok(())
}

/// One row of a convergence table.
pub struct TableRow {
    pub n: usize,
    pub h: f64,
    pub dof: u64,
    pub error: f64,
    pub order: Option<f64>,
}

pub fn write_table(rows: &[TableRow], w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "{:>3} {:>12} {:>10} {:>14} {:>8}", "N", "h_N", "DOF", "L2_error", "order")?;
    for r in rows {
        match r.order {
            Some(o) => writeln!(
                w,
                "{:>3} {:>12.6e} {:>10} {:>14.6e} {:>8.2}",
                r.n, r.h, r.dof, r.error, o
            )?,
            None => writeln!(
                w,
                "{:>3} {:>12.6e} {:>10} {:>14.6e} {:>8}",
                r.n, r.h, r.dof, r.error, "--"
            )?,
        }
    }
    Ok(())
}

/// Convergence study over N = n_min..=n_max for problems with a reference.
pub fn execute_converge(cfg: &RunConfig) -> Result<(), AppError> {
    let out = ensure_dir(&cfg.out_dir)?;
    let mut errors = Vec::new();
    let mut hs = Vec::new();
    let mut dofs = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let mut one = cfg.clone();
        one.n = n;
        let err = match cfg.problem {
            Problem::AdvectConst | Problem::SolidRotation | Problem::Deformational => {
                converge_transport_once(&one)?
            }
            Problem::VlasovLandau | Problem::VlasovTwoStream => {
                let turn = if cfg.t_final_explicit { cfg.t_final } else { 1.0 };
                vlasov_reversibility_error(&one, turn)?
            }
            _ => {
                return Err(AppError::Config(format!(
                    "{}: no exact or reversibility reference available",
                    cfg.problem.name()
                )))
            }
        };
        let width = if cfg.problem.is_kinetic() { cfg.x_len } else { 1.0 };
        errors.push(err);
        hs.push(width / (1u64 << n) as f64);
        dofs.push(dof_count(n, cfg.k, cfg.d));
        println!("N={n} error={err:.6e}");
    }
    let orders = convergence_orders(&errors, &hs).map_err(AppError::from)?;
    let rows: Vec<TableRow> = (0..errors.len())
        .map(|i| TableRow {
            n: cfg.n_min + i,
            h: hs[i],
            dof: dofs[i],
            error: errors[i],
            order: orders[i],
        })
        .collect();
    let mut f = fs::File::create(out.join("table.txt"))?;
    write_table(&rows, &mut f)?;
    let mut stdout = std::io::stdout();
    write_table(&rows, &mut stdout)?;
    Ok(())
}

fn converge_transport_once(cfg: &RunConfig) -> Result<f64, AppError> {
    let space = SparseSpace::new(cfg.n, cfg.k, Domain::unit(cfg.d))?;
    let setup = transport_setup(cfg, &space)?;
    let u0 = initial_profile(cfg, &space)?;
    let control = step_control(cfg, setup.speeds.clone(), &vec![1.0; cfg.d], cfg.t_final);
    let (u, _steps) = sparse_dg::time_stepper::integrate(
        &u0,
        setup.field.clone(),
        setup.flux,
        setup.bc.clone(),
        &control,
        None,
    )?;
    let rule = QuadratureRule {
        resolution: cfg.n,
        points: cfg.k + 3,
    };
    let reference = Arc::clone(&setup.reference);
    Ok(l2_error(&u, move |x: &[f64]| reference(x), &rule)?)
}

/// Forward-reverse protocol: run to the turn time, reverse v, run back, and
/// compare with the initial condition (which is even in v).
pub fn vlasov_reversibility_error(cfg: &RunConfig, turn: f64) -> Result<f64, AppError> {
    let layout = vlasov_layout(cfg);
    let space = SparseSpace::new(cfg.n, cfg.k, layout.domain())?;
    let f0 = initial_profile(cfg, &space)?;
    let mom = build_moment_tables(&space, layout.v_cut);
    let e0 = ampere_initial_field(&density(&f0, &layout, &mom));
    let mut va = VlasovAmpere::new(Arc::clone(&space), layout.clone(), flux_spec(cfg.flux))?;
    let speeds = vec![layout.v_cut, e0.max_abs_sampled(4 * (cfg.k + 1))];
    let control = step_control(cfg, speeds, &[cfg.x_len, 2.0 * cfg.v_cut], turn);
    let dt = cfl_dt(&control)?;
    let mut state = VlasovAmpereState { f: f0, e: e0 };
    let mut t = 0.0;
    while t < turn - 1e-13 {
        let d = dt.min(turn - t);
        state = va.step(&state, t, d)?;
        t += d;
    }
    state = va.reverse_velocity(&state);
    let t_end = 2.0 * turn;
    while t < t_end - 1e-13 {
        let d = dt.min(t_end - t);
        state = va.step(&state, t, d)?;
        t += d;
    }
    let a = cfg.amplitude;
    let kw = cfg.k_wave;
    let two_stream = cfg.problem == Problem::VlasovTwoStream;
    let exact = move |x: &[f64]| {
        let v = x[1];
        let prof = if two_stream {
            v * v * (-v * v / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
        } else {
            (-v * v / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        prof * (1.0 + a * (kw * x[0]).cos())
    };
    let rule = QuadratureRule {
        resolution: cfg.n,
        points: cfg.k + 3,
    };
    Ok(l2_error(&state.f, exact, &rule)?)
}

/// Projection-error study (no time stepping).
pub fn execute_projection_study(cfg: &RunConfig) -> Result<(), AppError> {
    let out = ensure_dir(&cfg.out_dir)?;
    let mut errors = Vec::new();
    let mut hs = Vec::new();
    let mut dofs = Vec::new();
    let f = |x: &[f64]| (std::f64::consts::TAU * x.iter().sum::<f64>()).sin();
    for n in cfg.n_min..=cfg.n_max {
        let space = SparseSpace::new(n, cfg.k, Domain::unit(cfg.d))?;
        let pf = project(f, &space)?;
        let rule = QuadratureRule {
            resolution: n,
            points: cfg.k + 3,
        };
        let err = l2_error(&pf, f, &rule)?;
        errors.push(err);
        hs.push(1.0 / (1u64 << n) as f64);
        dofs.push(dof_count(n, cfg.k, cfg.d));
        println!("N={n} projection_error={err:.6e}");
    }
    let orders = convergence_orders(&errors, &hs).map_err(AppError::from)?;
    // Least-squares slope of log2(error) against N.
    let slope = {
        let pts: Vec<(f64, f64)> = errors
            .iter()
            .enumerate()
            .map(|(i, e)| ((cfg.n_min + i) as f64, e.log2()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let rows: Vec<TableRow> = (0..errors.len())
        .map(|i| TableRow {
            n: cfg.n_min + i,
            h: hs[i],
            dof: dofs[i],
            error: errors[i],
            order: orders[i],
        })
        .collect();
    let mut file = fs::File::create(out.join("projection_table.txt"))?;
    write_table(&rows, &mut file)?;
    writeln!(file, "fitted log2 slope = {slope:.4}")?;
    let mut stdout = std::io::stdout();
    write_table(&rows, &mut stdout)?;
    println!("fitted log2 slope = {slope:.4}");
    Ok(())
}
