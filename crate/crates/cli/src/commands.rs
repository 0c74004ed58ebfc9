use std::fmt;
use std::path::{Path, PathBuf};

use hamens::generator::{pole_scan, Pole, RateTrajectory};
use hamens::montecarlo::{mc_average, SamplerConfig};
use hamens::propagation::{propagate, Tolerances, POLE_MARGIN};
use hamens::validation::{builtin_pairs, run_all, Check};
use hamens::{AngularModel, MapFamily, SeparableEnsemble};
use nalgebra::Vector3;

use crate::config::{AngularSpec, ConfigError, Method, RadialSpec, RunConfig};
use crate::output::{num, Csv};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; exit status 2.
    Config(ConfigError),
    /// Failure while computing or writing; exit status 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "config error: {e}"),
            Self::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<hamens::Error> for CliError {
    fn from(e: hamens::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn describe(cfg: &RunConfig) -> String {
    let radial = match &cfg.radial {
        RadialSpec::Builtin { name, cutoff } => format!("radial = {name}, omega_c = {cutoff}"),
        RadialSpec::Table(_) => "radial = table".into(),
    };
    let angular = match &cfg.angular {
        AngularSpec::Builtin { name, a } if name == "kneaded" => {
            format!("angular = kneaded, a = {a}")
        }
        AngularSpec::Builtin { name, .. } => format!("angular = {name}"),
        AngularSpec::Table(_) => "angular = table".into(),
    };
    format!("{radial}\n{angular}")
}

fn family(cfg: &RunConfig) -> CliResult<(SeparableEnsemble, MapFamily)> {
    let e = cfg.ensemble()?;
    let fam = MapFamily::new(&e).map_err(|err| ConfigError::general(err.to_string()))?;
    Ok((e, fam))
}

const MOMENT_LABELS: [&str; 9] = [
    "first_x",
    "first_y",
    "first_z",
    "second_xx",
    "second_xy",
    "second_xz",
    "second_yy",
    "second_yz",
    "second_zz",
];

fn moment_vector(m: &hamens::DirectionalMoments) -> [f64; 9] {
    let (f, s) = (&m.first, &m.second);
    [
        f.x,
        f.y,
        f.z,
        s[(0, 0)],
        s[(0, 1)],
        s[(0, 2)],
        s[(1, 1)],
        s[(1, 2)],
        s[(2, 2)],
    ]
}

/// Analytic and quadrature moments side by side. The table always goes to
/// standard output; the CSV only when an output path is set.
pub fn moments(cfg: &RunConfig, out: Option<&Path>) -> CliResult<String> {
    let a = cfg.angular_model()?;
    let quad = moment_vector(&a.quadrature_moments()?);
    let exact = a.analytic_moments().map(|m| moment_vector(&m));

    let mut table = format!(
        "{:<10} {:>24} {:>24} {:>10}\n",
        "moment", "analytic", "quadrature", "|diff|"
    );
    let mut csv = Csv::default();
    csv.comment(format!("hamens moments\n{}", describe(cfg)));
    csv.header(&["moment", "analytic", "quadrature", "abs_diff"]);
    for (k, label) in MOMENT_LABELS.iter().enumerate() {
        let an = exact.map_or(f64::NAN, |m| m[k]);
        let diff = (an - quad[k]).abs();
        table += &format!("{label:<10} {an:>24.16} {:>24.16} {diff:>10.1e}\n", quad[k]);
        csv.row(&[label.to_string(), num(an), num(quad[k]), num(diff)]);
    }
    if let Some(p) = out {
        csv.emit(Some(p))?;
    }
    Ok(table)
}

pub fn simulate(cfg: &RunConfig) -> CliResult<Csv> {
    let (e, fam) = family(cfg)?;
    let wc = e.radial().cutoff();
    let grid = cfg.grid(wc);
    let rho = cfg.initial_state();
    let r0 = rho.bloch();

    let mut csv = Csv::default();
    csv.comment(format!("hamens simulate\n{}", describe(cfg)));
    csv.comment(format!(
        "initial bloch = ({}, {}, {})",
        num(r0.x),
        num(r0.y),
        num(r0.z)
    ));
    let purity = |r: &Vector3<f64>| 0.5 * (1.0 + r.norm_squared());
    match cfg.method {
        Method::Map => {
            csv.comment("method = map");
            csv.header(&["t", "omega_c_t", "r_x", "r_y", "r_z", "purity"]);
            for &t in &grid {
                let r = fam.map_at_lab(t).matrix() * r0;
                csv.numbers(&[t, wc * t, r.x, r.y, r.z, purity(&r)]);
            }
        }
        Method::Integrate => {
            let tol = Tolerances::default();
            csv.comment(format!(
                "method = integrate, rtol = {}, atol = {}",
                tol.rtol, tol.atol
            ));
            csv.header(&["t", "omega_c_t", "r_x", "r_y", "r_z", "purity", "direct"]);
            for s in propagate(&fam, &rho, &grid, tol)? {
                let direct = matches!(s.method, hamens::propagation::StepMethod::Direct);
                let r = s.bloch;
                let mut row: Vec<String> = [s.t, wc * s.t, r.x, r.y, r.z, purity(&r)]
                    .iter()
                    .map(|&v| num(v))
                    .collect();
                row.push(u8::from(direct).to_string());
                csv.row(&row);
            }
        }
        Method::MonteCarlo => {
            let sc = SamplerConfig::new(cfg.seed, cfg.samples);
            csv.comment(format!(
                "method = mc, seed = {}, samples = {}",
                cfg.seed, cfg.samples
            ));
            csv.header(&[
                "t",
                "omega_c_t",
                "r_x",
                "r_y",
                "r_z",
                "purity",
                "stderr_x",
                "stderr_y",
                "stderr_z",
            ]);
            for &t in &grid {
                let est = mc_average(&e, &rho, t, &sc)?;
                let (r, s) = (est.bloch_mean, est.bloch_stderr);
                csv.numbers(&[t, wc * t, r.x, r.y, r.z, purity(&r), s.x, s.y, s.z]);
            }
        }
    }
    Ok(csv)
}

fn pole_footer(csv: &mut Csv, poles: &[Pole], wc: f64) {
    for p in poles {
        csv.comment(format!(
            "pole t = {}, omega_c_t = {}, denominator = {}",
            num(p.t),
            num(wc * p.t),
            p.source.label()
        ));
    }
}

fn in_pole_window(t: f64, poles: &[Pole], wc: f64) -> bool {
    poles.iter().any(|p| (t - p.t).abs() < POLE_MARGIN / wc)
}

/// Rates on the config grid plus the poles found on `[0, t_max]`.
pub fn rate_table(fam: &MapFamily, cfg: &RunConfig) -> CliResult<(Csv, RateTrajectory)> {
    let wc = fam.radial().cutoff();
    let grid = cfg.grid(wc);
    let traj = RateTrajectory::compute(fam, &grid)?;

    let mut csv = Csv::default();
    csv.comment(format!("hamens rates\n{}", describe(cfg)));
    csv.comment("rates in the principal frame of the second-moment matrix");
    csv.header(&[
        "t",
        "omega_c_t",
        "gamma_x",
        "gamma_y",
        "gamma_z",
        "gamma_xy",
        "omega_bar",
        "kossakowski_min",
        "pole",
    ]);
    for (&t, g) in traj.grid.iter().zip(&traj.generators) {
        let flagged = in_pole_window(t, &traj.poles, wc);
        let values = match g {
            Some(g) if !flagged => {
                let r = g.rates();
                [r[0], r[1], r[2], g.gamma_xy(), g.hz(), g.min_eigenvalue()]
            }
            _ => [f64::NAN; 6],
        };
        let mut row = vec![num(t), num(wc * t)];
        row.extend(values.iter().map(|&v| num(v)));
        row.push(u8::from(flagged || g.is_none()).to_string());
        csv.row(&row);
    }
    pole_footer(&mut csv, &traj.poles, wc);
    Ok((csv, traj))
}

pub fn rates(cfg: &RunConfig) -> CliResult<Csv> {
    let (_, fam) = family(cfg)?;
    Ok(rate_table(&fam, cfg)?.0)
}

/// Validation report and whether every check passed.
pub fn validate(cfg: Option<&RunConfig>, seed: u64, samples: usize) -> CliResult<(Csv, bool)> {
    let pairs = match cfg {
        Some(c) => vec![c.ensemble()?],
        None => builtin_pairs(),
    };
    let checks: Vec<Check> = run_all(&pairs, &SamplerConfig::new(seed, samples))?;
    let mut csv = Csv::default();
    csv.comment(format!(
        "hamens validate, {} ensembles, seed = {seed}, samples = {samples}",
        pairs.len()
    ));
    csv.header(&["check", "metric", "threshold", "pass"]);
    for c in &checks {
        csv.row(&[
            c.name.clone(),
            num(c.metric),
            num(c.threshold),
            u8::from(c.pass).to_string(),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    csv.comment(format!("{} checks, {failed} failed", checks.len()));
    Ok((csv, failed == 0))
}

pub struct ScanRow {
    pub value: f64,
    pub max_abs_gamma_xy: f64,
    pub poles: usize,
    pub table: Csv,
}

/// Kneaded-cardioid asymmetry scan. The config supplies the radial part and
/// grid; its angular section, if any, must name the kneaded model.
pub fn scan(cfg: &RunConfig, param: &str, values: &[f64]) -> CliResult<Vec<ScanRow>> {
    if param != "a" {
        return Err(ConfigError::general(format!(
            "unsupported scan parameter '{param}' (only 'a' is available)"
        ))
        .into());
    }
    if values.is_empty() {
        return Err(ConfigError::general("--values is empty").into());
    }
    match &cfg.angular {
        AngularSpec::Builtin { name, .. } if name == "kneaded" || name == "sphere" => {}
        _ => {
            return Err(ConfigError::general(
                "scan over 'a' needs angular model = kneaded (or no [angular] section)",
            )
            .into())
        }
    }
    let radial = cfg.radial_model()?;
    let mut rows = Vec::new();
    for &a in values {
        if !(0.0..=1.0).contains(&a) {
            return Err(ConfigError::general(format!("a = {a} is outside [0, 1]")).into());
        }
        let angular = AngularModel::kneaded_cardioid(a)?;
        let e = SeparableEnsemble::new(radial.clone(), angular)?;
        let fam = MapFamily::new(&e)?;
        let mut sub = cfg.clone();
        sub.angular = AngularSpec::Builtin {
            name: "kneaded".into(),
            a,
        };
        let (table, traj) = rate_table(&fam, &sub)?;
        let max_abs = traj
            .rate_series(|g| g.gamma_xy().abs())
            .into_iter()
            .zip(&traj.grid)
            .filter(|(_, &t)| !in_pole_window(t, &traj.poles, radial.cutoff()))
            .map(|(v, _)| v)
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        let window = (0.0, cfg.t_max / radial.cutoff());
        rows.push(ScanRow {
            value: a,
            max_abs_gamma_xy: max_abs,
            poles: pole_scan(&fam, window).len(),
            table,
        });
    }
    Ok(rows)
}

pub fn scan_summary(cfg: &RunConfig, rows: &[ScanRow]) -> Csv {
    let mut csv = Csv::default();
    let radial = describe(cfg).lines().next().unwrap_or_default().to_string();
    csv.comment(format!("hamens scan over a\n{radial}\nangular = kneaded"));
    csv.header(&["a", "max_abs_gamma_xy", "pole_count"]);
    for r in rows {
        csv.row(&[num(r.value), num(r.max_abs_gamma_xy), r.poles.to_string()]);
    }
    csv
}

/// `out/stem.csv` → `out/stem_a0.3.csv`.
pub fn per_value_path(summary: &Path, value: f64) -> PathBuf {
    let stem = summary
        .file_stem()
        .map_or_else(|| "scan".into(), |s| s.to_string_lossy().into_owned());
    let ext = summary
        .extension()
        .map_or_else(|| "csv".into(), |s| s.to_string_lossy().into_owned());
    summary.with_file_name(format!("{stem}_a{value}.{ext}"))
}
