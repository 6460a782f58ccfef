//! Observables reported by the benchmark runs: conserved quantities, log
//! Fourier modes of the electric field, entropy functionals, and
//! convergence orders.

use std::io::Write;

use crate::error::{Error, Result};
use crate::function1d::Function1d;
use crate::kinetic::{phase_moments, MomentTables, PhaseSpaceLayout, Relaxation};
use crate::quadrature::GaussRule;
use crate::sparse_space::SparseGridFunction;
use crate::transform::{local_to_gauss_values, sparse_to_local};

/// Floor for log Fourier modes when the integral underflows.
pub const LOG_FM_FLOOR: f64 = -20.0;

/// One diagnostic sample along a kinetic run. Fields that do not apply to a
/// given model are NaN.
#[derive(Debug, Clone)]
pub struct ConservationSample {
    pub t: f64,
    pub mass: f64,
    pub momentum: Vec<f64>,
    /// Kinetic plus field energy.
    pub energy: f64,
    pub enstrophy: f64,
    pub log_fm: [f64; 4],
    pub h_log: f64,
    pub h2: f64,
}

/// Time series of conserved quantities with relative drifts vs t = 0.
#[derive(Debug, Default)]
pub struct ConservationReport {
    pub samples: Vec<ConservationSample>,
}

/// Relative error (Q - Q0)/|Q0|; absolute when Q0 vanishes.
pub fn relative_error(q: f64, q0: f64) -> f64 {
    if q0.abs() < 1e-12 {
        q - q0
    } else {
        (q - q0) / q0.abs()
    }
}

impl ConservationReport {
    pub fn push(&mut self, s: ConservationSample) {
        self.samples.push(s);
    }

    /// Max |relative drift| of a quantity over the run.
    pub fn max_drift<F: Fn(&ConservationSample) -> f64>(&self, get: F) -> f64 {
        let q0 = get(&self.samples[0]);
        self.samples
            .iter()
            .map(|s| relative_error(get(s), q0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV columns: t, mass_rel_err, momentum_err, energy_rel_err,
    /// enstrophy_rel_err, logFM1..logFM4, H_log, H2 (17 significant digits).
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(
            w,
            "t,mass_rel_err,momentum_err,energy_rel_err,enstrophy_rel_err,\
             logFM1,logFM2,logFM3,logFM4,H_log,H2"
        )?;
        let first = &self.samples[0];
        for s in &self.samples {
            let mom_err = s
                .momentum
                .iter()
                .zip(&first.momentum)
                .map(|(p, p0)| relative_error(*p, *p0).abs())
                .fold(0.0, f64::max);
            write!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t,
                relative_error(s.mass, first.mass),
                mom_err,
                relative_error(s.energy, first.energy),
                relative_error(s.enstrophy, first.enstrophy),
            )?;
            for v in s.log_fm {
                write!(w, ",{:.16e}", v)?;
            }
            writeln!(w, ",{:.16e},{:.16e}", s.h_log, s.h2)?;
        }
        Ok(())
    }
}

/// Particle number, momentum, total energy and enstrophy of a kinetic state.
pub fn conserved_quantities(
    f: &SparseGridFunction,
    e: Option<&Function1d>,
    layout: &PhaseSpaceLayout,
    mom: &MomentTables,
    t: f64,
) -> ConservationSample {
    let pm = phase_moments(f, layout, mom);
    let field_energy = e.map(|e| 0.5 * e.norm_l2().powi(2)).unwrap_or(0.0);
    ConservationSample {
        t,
        mass: pm.mass,
        momentum: pm.momentum,
        energy: pm.kinetic_energy + field_energy,
        enstrophy: pm.enstrophy,
        log_fm: [f64::NAN; 4],
        h_log: f64::NAN,
        h2: f64::NAN,
    }
}

/// log10 of the n-th Fourier mode magnitude of the electric field:
/// log10( (1/L) sqrt(|int E sin(k n x) dx|^2 + |int E cos(k n x) dx|^2) ),
/// floored at [`LOG_FM_FLOOR`].
pub fn log_fourier_mode(e: &Function1d, n: usize, length: f64, k_wave: f64) -> f64 {
    debug_assert!(n >= 1);
    let k = e.basis().degree();
    let rule = GaussRule::new(2 * (k + 3));
    let cells = 1usize << e.level();
    let (lo, _) = e.bounds();
    let h = e.width() / cells as f64;
    let kn = k_wave * n as f64;
    let mut s = 0.0;
    let mut c = 0.0;
    for cell in 0..cells {
        let x0 = lo + cell as f64 * h;
        s += rule.integrate(x0, x0 + h, |x| e.eval(x) * (kn * x).sin());
        c += rule.integrate(x0, x0 + h, |x| e.eval(x) * (kn * x).cos());
    }
    let mag = (s * s + c * c).sqrt() / length;
    if mag <= 10f64.powf(LOG_FM_FLOOR) {
        LOG_FM_FLOOR
    } else {
        mag.log10()
    }
}

/// Entropy functionals H_log = int H ln(H) M and H_2 = int H^2 M with
/// H = f_h / M, by phase-space quadrature (1D1V layouts).
///
/// H is clamped below at 1e-14 inside the logarithm since DG solutions may
/// undershoot slightly.
pub fn entropy_functionals(f: &SparseGridFunction, relax: &Relaxation) -> (f64, f64) {
    let space = f.space();
    assert_eq!(space.dim(), 2, "entropy quadrature is for 1D1V layouts");
    let n = space.max_level();
    let k = space.degree();
    let rule = GaussRule::new(k + 3);
    let local = sparse_to_local(f);
    let vals = local_to_gauss_values(&local, space.basis(), n, &rule);
    let cells = 1usize << n;
    let nq = rule.len();
    let axis = cells * nq;
    let dom = space.domain();
    let mut coords = vec![vec![0.0; axis]; 2];
    let mut wline = vec![0.0; axis];
    for cell in 0..cells {
        for (q, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let r = (cell as f64 + x) / cells as f64;
            for m in 0..2 {
                coords[m][cell * nq + q] = dom.lo[m] + dom.width[m] * r;
            }
            wline[cell * nq + q] = w / cells as f64;
        }
    }
    let mut h_log = 0.0;
    let mut h2 = 0.0;
    for i in 0..axis {
        for j in 0..axis {
            let m = relax.equilibrium_value(&[coords[0][i], coords[1][j]]);
            let h = (vals.data[i * axis + j] / m).max(1e-14);
            let w = wline[i] * wline[j] * m;
            h_log += w * h * h.ln();
            h2 += w * h * h;
        }
    }
    let vol = dom.volume();
    (h_log * vol, h2 * vol)
}

/// Convergence orders log(e_{i-1}/e_i) / log(h_{i-1}/h_i); the first entry
/// has no predecessor.
pub fn convergence_orders(errors: &[f64], h: &[f64]) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; errors.len()];
    for (i, &e) in errors.iter().enumerate() {
        if e <= 0.0 {
            return Err(Error::NonPositiveError(e));
        }
        if i > 0 {
            out[i] = Some((errors[i - 1] / e).ln() / (h[i - 1] / h[i]).ln());
        }
    }
    Ok(out)
}
