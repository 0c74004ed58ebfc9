//! Run configuration: `key = value` lines grouped under `[section]` headers.
//!
//! ```text
//! [radial]
//! model = gaussian        # gaussian | exp-cutoff | reciprocal-square | table
//! cutoff = 1.0
//! [angular]
//! model = kneaded         # sphere | bagel | dumbbell | cardioid | kneaded | table
//! a = 0.3
//! [state]
//! theta0 = pi/4           # or: bloch = 0, 0, 1
//! [grid]
//! t_max = 10              # units of 1/ω_c
//! n_points = 1001
//! [mc]
//! seed = 7
//! samples = 100000
//! [output]
//! method = map            # map | integrate | mc
//! path = out.csv
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use hamens::{AngularModel, DensityMatrix, RadialModel, SeparableEnsemble, UnitVector};
use nalgebra::Vector3;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self {
                line: Some(n),
                message,
            } => write!(f, "line {n}: {message}"),
            Self {
                line: None,
                message,
            } => f.write_str(message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub enum RadialSpec {
    Builtin { name: String, cutoff: f64 },
    Table(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AngularSpec {
    Builtin { name: String, a: f64 },
    Table(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateSpec {
    Polar(f64),
    Bloch([f64; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Map,
    Integrate,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub radial: RadialSpec,
    pub angular: AngularSpec,
    pub state: StateSpec,
    pub t_max: f64,
    pub n_points: usize,
    pub seed: u64,
    pub samples: usize,
    pub method: Method,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            radial: RadialSpec::Builtin {
                name: "gaussian".into(),
                cutoff: 1.0,
            },
            angular: AngularSpec::Builtin {
                name: "sphere".into(),
                a: 0.0,
            },
            state: StateSpec::Polar(0.0),
            t_max: 10.0,
            n_points: 1001,
            seed: 1,
            samples: 100_000,
            method: Method::Map,
            out: None,
        }
    }
}

const RADIAL_NAMES: [&str; 4] = ["gaussian", "exp-cutoff", "reciprocal-square", "table"];
const ANGULAR_NAMES: [&str; 6] = [
    "sphere", "bagel", "dumbbell", "cardioid", "kneaded", "table",
];

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError::at(line, format!("{key}: '{v}' is not a finite number")))
}

/// Angle in radians; accepts plain numbers and multiples of `pi` such as
/// `pi/4`, `3*pi/4` or `0.5pi`.
pub fn parse_angle(v: &str) -> Option<f64> {
    let v = v.replace(' ', "");
    let Some(idx) = v.find("pi") else {
        return v.parse().ok().filter(|x: &f64| x.is_finite());
    };
    let (pre, post) = (&v[..idx], &v[idx + 2..]);
    let factor = match pre.trim_end_matches('*') {
        "" => 1.0,
        "-" => -1.0,
        p => p.parse::<f64>().ok()?,
    };
    let divisor = match post {
        "" => 1.0,
        p => p.strip_prefix('/')?.parse::<f64>().ok()?,
    };
    let x = factor * std::f64::consts::PI / divisor;
    x.is_finite().then_some(x)
}

#[derive(Default)]
struct Raw {
    radial_model: Option<(usize, String)>,
    cutoff: Option<f64>,
    radial_table: Option<(usize, String)>,
    angular_model: Option<(usize, String)>,
    a: Option<(usize, f64)>,
    angular_table: Option<(usize, String)>,
    theta0: Option<(usize, f64)>,
    bloch: Option<(usize, [f64; 3])>,
}

impl RunConfig {
    /// Parses config text. Relative table paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut raw = Raw::default();
        let mut section: Option<String> = None;
        let mut seen: Vec<(String, String)> = Vec::new();

        for (i, full) in text.lines().enumerate() {
            let n = i + 1;
            let line = full.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(n, "unterminated section header"))?
                    .trim();
                if !["radial", "angular", "state", "grid", "mc", "output"].contains(&name) {
                    return Err(ConfigError::at(n, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    ConfigError::at(n, format!("expected 'key = value', found '{line}'"))
                })?;
            let Some(sec) = section.as_deref() else {
                return Err(ConfigError::at(
                    n,
                    format!("key '{key}' outside any section"),
                ));
            };
            if value.is_empty() {
                return Err(ConfigError::at(n, format!("{key}: missing value")));
            }
            let id = (sec.to_string(), key.to_string());
            if seen.contains(&id) {
                return Err(ConfigError::at(n, format!("duplicate key [{sec}] {key}")));
            }
            seen.push(id);

            match (sec, key) {
                ("radial", "model") => raw.radial_model = Some((n, value.to_string())),
                ("radial", "cutoff") => {
                    let w = parse_f64(n, key, value)?;
                    if w <= 0.0 {
                        return Err(ConfigError::at(n, "cutoff must be positive"));
                    }
                    raw.cutoff = Some(w);
                }
                ("radial", "table") => raw.radial_table = Some((n, value.to_string())),
                ("angular", "model") => raw.angular_model = Some((n, value.to_string())),
                ("angular", "a") => raw.a = Some((n, parse_f64(n, key, value)?)),
                ("angular", "table") => raw.angular_table = Some((n, value.to_string())),
                ("state", "theta0") => {
                    let th = parse_angle(value).ok_or_else(|| {
                        ConfigError::at(n, format!("theta0: cannot parse '{value}'"))
                    })?;
                    raw.theta0 = Some((n, th));
                }
                ("state", "bloch") => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(ConfigError::at(
                            n,
                            "bloch: expected three comma-separated components",
                        ));
                    }
                    let mut r = [0.0; 3];
                    for (slot, p) in r.iter_mut().zip(parts) {
                        *slot = parse_f64(n, key, p)?;
                    }
                    raw.bloch = Some((n, r));
                }
                ("grid", "t_max") => {
                    cfg.t_max = parse_f64(n, key, value)?;
                    if cfg.t_max <= 0.0 {
                        return Err(ConfigError::at(n, "t_max must be positive"));
                    }
                }
                ("grid", "n_points") => {
                    cfg.n_points = value
                        .parse()
                        .ok()
                        .filter(|&k: &usize| k >= 2)
                        .ok_or_else(|| ConfigError::at(n, "n_points must be an integer ≥ 2"))?;
                }
                ("mc", "seed") => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| ConfigError::at(n, format!("seed: '{value}' is not a u64")))?;
                }
                ("mc", "samples") => {
                    cfg.samples = value
                        .parse()
                        .ok()
                        .filter(|&k: &usize| k >= 2)
                        .ok_or_else(|| ConfigError::at(n, "samples must be an integer ≥ 2"))?;
                }
                ("output", "method") => {
                    cfg.method = match value {
                        "map" => Method::Map,
                        "integrate" => Method::Integrate,
                        "mc" => Method::MonteCarlo,
                        _ => {
                            return Err(ConfigError::at(
                                n,
                                format!("method: '{value}' is not one of map, integrate, mc"),
                            ))
                        }
                    }
                }
                ("output", "path") => cfg.out = Some(base.join(value)),
                _ => {
                    return Err(ConfigError::at(
                        n,
                        format!("unknown key '{key}' in [{sec}]"),
                    ))
                }
            }
        }
        cfg.resolve(raw, base)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::general(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| ConfigError {
            message: format!("{}: {}", path.display(), e.message),
            ..e
        })
    }

    fn resolve(&mut self, raw: Raw, base: &Path) -> Result<(), ConfigError> {
        let (rline, rname) = raw.radial_model.unwrap_or((0, "gaussian".into()));
        if !RADIAL_NAMES.contains(&rname.as_str()) {
            return Err(ConfigError::at(
                rline,
                format!(
                    "radial model '{rname}' is not one of {}",
                    RADIAL_NAMES.join(", ")
                ),
            ));
        }
        self.radial = if rname == "table" {
            let (_, p) = raw.radial_table.ok_or_else(|| {
                ConfigError::at(rline, "radial model 'table' needs a 'table' path")
            })?;
            RadialSpec::Table(base.join(p))
        } else {
            if let Some((n, _)) = raw.radial_table {
                return Err(ConfigError::at(n, "'table' only applies to model = table"));
            }
            RadialSpec::Builtin {
                name: rname,
                cutoff: raw.cutoff.unwrap_or(1.0),
            }
        };

        let (aline, aname) = raw.angular_model.unwrap_or((0, "sphere".into()));
        if !ANGULAR_NAMES.contains(&aname.as_str()) {
            return Err(ConfigError::at(
                aline,
                format!(
                    "angular model '{aname}' is not one of {}",
                    ANGULAR_NAMES.join(", ")
                ),
            ));
        }
        if let Some((n, a)) = raw.a {
            if aname != "kneaded" {
                return Err(ConfigError::at(n, "'a' only applies to model = kneaded"));
            }
            if !(0.0..=1.0).contains(&a) {
                return Err(ConfigError::at(n, format!("a = {a} is outside [0, 1]")));
            }
        }
        self.angular = if aname == "table" {
            let (_, p) = raw.angular_table.ok_or_else(|| {
                ConfigError::at(aline, "angular model 'table' needs a 'table' path")
            })?;
            AngularSpec::Table(base.join(p))
        } else {
            if let Some((n, _)) = raw.angular_table {
                return Err(ConfigError::at(n, "'table' only applies to model = table"));
            }
            AngularSpec::Builtin {
                name: aname,
                a: raw.a.map_or(0.0, |(_, a)| a),
            }
        };

        self.state = match (raw.theta0, raw.bloch) {
            (Some(_), Some((n, _))) => {
                return Err(ConfigError::at(n, "give either theta0 or bloch, not both"))
            }
            (Some((_, th)), None) => StateSpec::Polar(th),
            (None, Some((n, r))) => {
                if Vector3::from(r).norm() > 1.0 + 1e-12 {
                    return Err(ConfigError::at(
                        n,
                        "bloch vector lies outside the unit ball",
                    ));
                }
                StateSpec::Bloch(r)
            }
            (None, None) => StateSpec::Polar(0.0),
        };
        Ok(())
    }

    pub fn radial_model(&self) -> Result<RadialModel, ConfigError> {
        match &self.radial {
            RadialSpec::Builtin { name, cutoff } => match name.as_str() {
                "gaussian" => RadialModel::gaussian(*cutoff),
                "exp-cutoff" => RadialModel::exp_cutoff(*cutoff),
                _ => RadialModel::reciprocal_square(*cutoff),
            },
            RadialSpec::Table(p) => hamens::table::load_radial(p).map(RadialModel::Tabulated),
        }
        .map_err(|e| ConfigError::general(format!("[radial] {e}")))
    }

    pub fn angular_model(&self) -> Result<AngularModel, ConfigError> {
        match &self.angular {
            AngularSpec::Builtin { name, a } => match name.as_str() {
                "sphere" => Ok(AngularModel::Sphere),
                "bagel" => Ok(AngularModel::Bagel),
                "dumbbell" => Ok(AngularModel::Dumbbell),
                "cardioid" => Ok(AngularModel::Cardioid),
                _ => AngularModel::kneaded_cardioid(*a),
            },
            AngularSpec::Table(p) => hamens::table::load_angular(p).map(AngularModel::Tabulated),
        }
        .map_err(|e| ConfigError::general(format!("[angular] {e}")))
    }

    pub fn ensemble(&self) -> Result<SeparableEnsemble, ConfigError> {
        SeparableEnsemble::new(self.radial_model()?, self.angular_model()?)
            .map_err(|e| ConfigError::general(e.to_string()))
    }

    pub fn initial_state(&self) -> DensityMatrix {
        match self.state {
            StateSpec::Polar(th) => DensityMatrix::new(UnitVector::new(th, 0.0).cartesian()),
            StateSpec::Bloch(r) => DensityMatrix::new(Vector3::from(r)),
        }
        .expect("state checked during parsing")
    }

    /// `n_points` evenly spaced times on `[0, t_max/ω_c]`.
    pub fn grid(&self, cutoff: f64) -> Vec<f64> {
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| self.t_max * i as f64 / last / cutoff)
            .collect()
    }
}
