//! Flat key=value configuration files with optional [section] grouping.
//! Keys inside a section are addressed as "section.key"; unknown keys are
//! rejected with field-level messages.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Benchmark problem selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    AdvectConst,
    SolidRotation,
    Deformational,
    VlasovLandau,
    VlasovTwoStream,
    Relax1d1v,
    Relax2d2v,
    ProjectionStudy,
}

impl Problem {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "advect-const" => Problem::AdvectConst,
            "solid-rotation" => Problem::SolidRotation,
            "deformational" => Problem::Deformational,
            "vlasov-landau" => Problem::VlasovLandau,
            "vlasov-twostream" => Problem::VlasovTwoStream,
            "relax-1d1v" => Problem::Relax1d1v,
            "relax-2d2v" => Problem::Relax2d2v,
            "projection-study" => Problem::ProjectionStudy,
            other => {
                return Err(ConfigError(format!(
                    "problem: unknown value `{other}` (expected advect-const, solid-rotation, \
                     deformational, vlasov-landau, vlasov-twostream, relax-1d1v, relax-2d2v, \
                     projection-study)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::AdvectConst => "advect-const",
            Problem::SolidRotation => "solid-rotation",
            Problem::Deformational => "deformational",
            Problem::VlasovLandau => "vlasov-landau",
            Problem::VlasovTwoStream => "vlasov-twostream",
            Problem::Relax1d1v => "relax-1d1v",
            Problem::Relax2d2v => "relax-2d2v",
            Problem::ProjectionStudy => "projection-study",
        }
    }

    pub fn is_kinetic(&self) -> bool {
        matches!(
            self,
            Problem::VlasovLandau | Problem::VlasovTwoStream | Problem::Relax1d1v | Problem::Relax2d2v
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxChoice {
    Upwind,
    Lf,
}

/// Fully resolved run configuration with problem-specific defaults applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub cfl: f64,
    pub t_final: f64,
    /// Whether t_final was given explicitly (converge uses its own default).
    pub t_final_explicit: bool,
    pub flux: FluxChoice,
    pub workers: usize,
    // domain
    pub x_len: f64,
    pub v_cut: f64,
    // init
    pub amplitude: f64,
    pub k_wave: f64,
    pub bell_radius: f64,
    pub bell_center: Vec<f64>,
    pub tau: f64,
    pub theta: f64,
    // output
    pub out_dir: String,
    pub series_stride: usize,
    pub snapshot_times: Vec<f64>,
    pub snapshot_points: usize,
    // converge / projection-study
    pub n_min: usize,
    pub n_max: usize,
}

const KNOWN_KEYS: &[&str] = &[
    "problem",
    "d",
    "n",
    "k",
    "cfl",
    "t_final",
    "flux",
    "workers",
    "domain.l",
    "domain.v_cut",
    "init.amplitude",
    "init.k_wave",
    "init.bell_radius",
    "init.bell_center",
    "init.tau",
    "init.theta",
    "output.dir",
    "output.series_stride",
    "output.snapshot_times",
    "output.snapshot_points",
    "converge.n_min",
    "converge.n_max",
];

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let mut key = key.trim().to_string();
        if !section.is_empty() {
            key = format!("{section}.{key}");
        }
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

struct Getter {
    map: BTreeMap<String, String>,
}

impl Getter {
    fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("{key}: expected a number, got `{v}`"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("{key}: expected an integer, got `{v}`"))),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| ConfigError(format!("{key}: bad number `{p}`")))
                })
                .collect(),
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    from_str(&text)
}

pub fn from_str(text: &str) -> Result<RunConfig, ConfigError> {
    let g = Getter {
        map: parse_pairs(text)?,
    };
    let problem = Problem::parse(
        g.str("problem")
            .ok_or_else(|| ConfigError("missing required key `problem`".into()))?,
    )?;
    use Problem::*;
    let d_default = match problem {
        AdvectConst | ProjectionStudy => 2,
        SolidRotation | Deformational => 2,
        VlasovLandau | VlasovTwoStream | Relax1d1v => 2,
        Relax2d2v => 4,
    };
    let d = g.usize("d", d_default)?;
    match problem {
        AdvectConst | ProjectionStudy => {
            if !(2..=4).contains(&d) {
                return Err(ConfigError(format!("{}: d must be 2..=4", problem.name())));
            }
        }
        SolidRotation => {
            if !(2..=3).contains(&d) {
                return Err(ConfigError("solid-rotation: d must be 2 or 3".into()));
            }
        }
        Deformational | VlasovLandau | VlasovTwoStream | Relax1d1v => {
            if d != 2 {
                return Err(ConfigError(format!("{}: d is fixed at 2", problem.name())));
            }
        }
        Relax2d2v => {
            if d != 4 {
                return Err(ConfigError("relax-2d2v: d is fixed at 4".into()));
            }
        }
    }
    let n = g.usize("n", 5)?;
    let k = g.usize("k", 2)?;
    if !(1..=3).contains(&k) {
        return Err(ConfigError("k: degree must be 1, 2 or 3".into()));
    }
    if n > 10 {
        return Err(ConfigError("n: mesh level must be <= 10".into()));
    }
    let t_default = match problem {
        AdvectConst => match d {
            2 => 1.0,
            3 => 2.0 / 3.0,
            _ => 0.5,
        },
        SolidRotation => 2.0 * std::f64::consts::PI,
        Deformational => 1.5,
        VlasovLandau | VlasovTwoStream => 10.0,
        Relax1d1v | Relax2d2v => 6.0,
        ProjectionStudy => 0.0,
    };
    let flux_default = match problem {
        AdvectConst | VlasovLandau | VlasovTwoStream | Relax1d1v | Relax2d2v => FluxChoice::Upwind,
        _ => FluxChoice::Lf,
    };
    let flux = match g.str("flux") {
        None => flux_default,
        Some("upwind") => FluxChoice::Upwind,
        Some("lf") => FluxChoice::Lf,
        Some(other) => {
            return Err(ConfigError(format!(
                "flux: expected `upwind` or `lf`, got `{other}`"
            )))
        }
    };
    let (bell_r_default, bell_c_default): (f64, Vec<f64>) = match (problem, d) {
        (SolidRotation, 2) => (0.23, vec![0.75, 0.5]),
        (SolidRotation, 3) => (0.45, vec![0.5, 0.55, 0.5]),
        (Deformational, _) => (0.35, vec![0.65, 0.5]),
        _ => (0.23, vec![0.75, 0.5]),
    };
    let x_len_default = match problem {
        VlasovLandau | VlasovTwoStream => 4.0 * std::f64::consts::PI,
        Relax1d1v | Relax2d2v => 5.0,
        _ => 1.0,
    };
    let v_cut_default = match problem {
        VlasovLandau | VlasovTwoStream => 2.0 * std::f64::consts::PI,
        _ => 5.0,
    };
    let amp_default = if problem == VlasovTwoStream { 0.05 } else { 0.5 };
    let cfg = RunConfig {
        problem,
        d,
        n,
        k,
        cfl: g.f64("cfl", 0.1)?,
        t_final: g.f64("t_final", t_default)?,
        t_final_explicit: g.str("t_final").is_some(),
        flux,
        workers: g.usize("workers", 0)?,
        x_len: g.f64("domain.l", x_len_default)?,
        v_cut: g.f64("domain.v_cut", v_cut_default)?,
        amplitude: g.f64("init.amplitude", amp_default)?,
        k_wave: g.f64("init.k_wave", 0.5)?,
        bell_radius: g.f64("init.bell_radius", bell_r_default)?,
        bell_center: g.f64_list("init.bell_center", &bell_c_default)?,
        tau: g.f64("init.tau", 1.0)?,
        theta: g.f64("init.theta", 1.0)?,
        out_dir: std::env::var("SPARSE_DG_OUT")
            .ok()
            .or_else(|| g.str("output.dir").map(|s| s.to_string()))
            .unwrap_or_else(|| "out".to_string()),
        series_stride: g.usize("output.series_stride", 0)?,
        snapshot_times: g.f64_list("output.snapshot_times", &[])?,
        snapshot_points: g.usize("output.snapshot_points", 65)?,
        n_min: g.usize("converge.n_min", 3)?,
        n_max: g.usize("converge.n_max", 6)?,
    };
    if cfg.bell_center.len() != cfg.d && matches!(problem, SolidRotation | Deformational) {
        return Err(ConfigError(format!(
            "init.bell_center: expected {} coordinates, got {}",
            cfg.d,
            cfg.bell_center.len()
        )));
    }
    if cfg.n_min > cfg.n_max {
        return Err(ConfigError("converge: n_min must be <= n_max".into()));
    }
    if cfg.cfl <= 0.0 || cfg.t_final < 0.0 {
        return Err(ConfigError("cfl must be positive and t_final non-negative".into()));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_problem_defaults() {
        let cfg = from_str("problem = vlasov-landau\n").unwrap();
        assert_eq!(cfg.d, 2);
        assert!((cfg.x_len - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((cfg.amplitude - 0.5).abs() < 1e-14);
        assert_eq!(cfg.flux, FluxChoice::Upwind);
        assert!((cfg.t_final - 10.0).abs() < 1e-14);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = from_str("problem = advect-const\nbogus = 1\n").unwrap_err();
        assert!(err.0.contains("unknown key"), "{err}");
        let err = from_str("problem = advect-const\n[output]\nbogus = 1\n").unwrap_err();
        assert!(err.0.contains("output.bogus"), "{err}");
    }

    #[test]
    fn sections_namespace_keys() {
        let cfg = from_str(
            "problem = solid-rotation\nn = 6\n[init]\nbell_radius = 0.3\n[output]\ndir = results\n",
        )
        .unwrap();
        assert!((cfg.bell_radius - 0.3).abs() < 1e-14);
        assert_eq!(cfg.out_dir, "results");
    }

    #[test]
    fn dimension_constraints_are_validated() {
        assert!(from_str("problem = advect-const\nd = 5\n").is_err());
        assert!(from_str("problem = relax-2d2v\nd = 2\n").is_err());
        assert!(from_str("problem = vlasov-landau\nd = 3\n").is_err());
    }

    #[test]
    fn bad_values_are_field_level_errors() {
        let err = from_str("problem = advect-const\nn = seven\n").unwrap_err();
        assert!(err.0.contains("n:"), "{err}");
        let err = from_str("problem = advect-const\nflux = central\n").unwrap_err();
        assert!(err.0.contains("flux"), "{err}");
    }
}
