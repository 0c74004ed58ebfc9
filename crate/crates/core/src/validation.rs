//! Cross-checks between independent routes to the same quantity, packaged
//! as named pass/fail records for reporting.

use nalgebra::Matrix3;

use crate::angular::AngularModel;
use crate::ensemble::SeparableEnsemble;
use crate::error::Result;
use crate::generator::{
    anisotropic_rates, azimuthal_generator, bagel_rates, dumbbell_rates, extract_generator,
    isotropic_rate, level_spacing, nearest_pole_denominator, offdiagonal_rate,
};
use crate::map::MapFamily;
use crate::montecarlo::{mc_average, SamplerConfig};
use crate::propagation::{propagate, Tolerances};
use crate::radial::RadialModel;
use crate::su2::{DensityMatrix, UnitVector};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub metric: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `metric ≤ threshold`.
    pub fn at_most(name: impl Into<String>, metric: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            metric,
            threshold,
            pass: metric <= threshold,
        }
    }

    /// Passes when `metric ≥ threshold`.
    pub fn at_least(name: impl Into<String>, metric: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            metric,
            threshold,
            pass: metric >= threshold,
        }
    }
}

pub const MC_TIMES: [f64; 4] = [0.2, 1.0, 3.0, 8.0];
pub const MC_SIGMAS: f64 = 4.0;

pub fn builtin_radials() -> Vec<RadialModel> {
    vec![
        RadialModel::gaussian(1.0).expect("valid cutoff"),
        RadialModel::exp_cutoff(1.0).expect("valid cutoff"),
        RadialModel::reciprocal_square(1.0).expect("valid cutoff"),
    ]
}

pub fn builtin_angulars() -> Vec<AngularModel> {
    vec![
        AngularModel::Sphere,
        AngularModel::Bagel,
        AngularModel::Dumbbell,
        AngularModel::Cardioid,
        AngularModel::kneaded_cardioid(0.3).expect("valid asymmetry"),
    ]
}

pub fn builtin_pairs() -> Vec<SeparableEnsemble> {
    let mut out = Vec::new();
    for r in builtin_radials() {
        for a in builtin_angulars() {
            out.push(SeparableEnsemble::new(r.clone(), a).expect("built-ins are normalized"));
        }
    }
    out
}

pub fn pair_label(e: &SeparableEnsemble) -> String {
    format!("{}+{}", e.radial().name(), e.angular().name())
}

/// Generic initial state with no component fixed by any built-in symmetry.
pub fn probe_state() -> DensityMatrix {
    DensityMatrix::new(UnitVector::new(1.0, 0.5).cartesian()).expect("unit vector")
}

pub fn moment_checks(models: &[AngularModel]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for a in models {
        if let Some(exact) = a.analytic_moments() {
            let q = a.quadrature_moments()?;
            out.push(Check::at_most(
                format!("moments/{}", a.name()),
                q.max_abs_diff(&exact),
                1e-10,
            ));
        }
    }
    Ok(out)
}

/// Closed-form radial expectations against adaptive quadrature.
pub fn expectation_checks(radials: &[RadialModel]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for r in radials.iter().filter(|r| r.is_builtin()) {
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let t = 0.25 * i as f64 / r.cutoff();
            let qc = r.expectation_quadrature(f64::cos, t)?;
            let qs = r.expectation_quadrature(f64::sin, t)?;
            worst = worst
                .max((qc - r.cos_expectation(t)).abs())
                .max((qs - r.sin_expectation(t)).abs());
        }
        out.push(Check::at_most(
            format!("expectations/{}", r.name()),
            worst,
            1e-9,
        ));
    }
    Ok(out)
}

/// Isotropic closed forms against `−ẇ/2w` by central differences, and the
/// bagel/dumbbell closed forms against the general Pauli-channel rates.
pub fn rate_checks(radials: &[RadialModel]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for r in radials.iter().filter(|r| r.is_builtin()) {
        let wc = r.cutoff();
        let h = 1e-6 / wc;
        let w = |t: f64| (2.0 * r.cos_expectation(t) + 1.0) / 3.0;
        let mut worst: f64 = 0.0;
        for i in 1..=150 {
            let t = 0.01 * i as f64 / wc;
            let Ok(closed) = isotropic_rate(r, t) else {
                continue;
            };
            let fd = -(w(t + h) - w(t - h)) / (2.0 * h) / (2.0 * w(t));
            worst = worst.max((fd - closed).abs() / closed.abs().max(1e-3 * wc));
        }
        out.push(Check::at_most(
            format!("isotropic-rate/{}", r.name()),
            worst,
            1e-6,
        ));

        for (a, closed) in [
            (
                AngularModel::Bagel,
                bagel_rates as fn(&RadialModel, f64) -> Result<[f64; 2]>,
            ),
            (AngularModel::Dumbbell, dumbbell_rates),
        ] {
            let name = a.name();
            let fam = MapFamily::new(&SeparableEnsemble::new(r.clone(), a)?)?;
            let mut worst: f64 = 0.0;
            for i in 1..=400 {
                let t = 0.025 * i as f64 / wc;
                if let (Ok(g), Ok([gx, gz])) = (anisotropic_rates(&fam, t), closed(r, t)) {
                    let scale = 1.0 + gx.abs() + gz.abs();
                    worst = worst.max((g[0] - gx).abs().max((g[2] - gz).abs()) / scale);
                }
            }
            out.push(Check::at_most(
                format!("{name}-rates/{}", r.name()),
                worst,
                1e-10,
            ));
        }
    }
    Ok(out)
}

/// Largest `|mc − map·r₀| / stderr` over components and [`MC_TIMES`].
///
/// `map` gives the lab-frame Bloch matrix at a time; passing something other
/// than the exact map is how the check itself is tested.
pub fn mc_agreement<F>(e: &SeparableEnsemble, cfg: &SamplerConfig, map: F) -> Result<f64>
where
    F: Fn(f64) -> Matrix3<f64>,
{
    let rho = probe_state();
    let mut worst: f64 = 0.0;
    for &x in &MC_TIMES {
        let t = x / e.radial().cutoff();
        let est = mc_average(e, &rho, t, cfg)?;
        let exact = map(t) * rho.bloch();
        for i in 0..3 {
            let diff = (est.bloch_mean[i] - exact[i]).abs();
            let z = if est.bloch_stderr[i] > 0.0 {
                diff / est.bloch_stderr[i]
            } else if diff < 1e-14 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    Ok(worst)
}

pub fn mc_check(e: &SeparableEnsemble, cfg: &SamplerConfig) -> Result<Check> {
    let fam = MapFamily::new(e)?;
    let z = mc_agreement(e, cfg, |t| *fam.map_at_lab(t).matrix())?;
    Ok(Check::at_most(
        format!("mc-vs-map/{}", pair_label(e)),
        z,
        MC_SIGMAS,
    ))
}

/// Denominator magnitude below which grid points are skipped when comparing
/// formulas whose conditioning degrades near poles.
const AWAY_FROM_POLE: f64 = 1e-3;

fn extraction_grid(fam: &MapFamily) -> Vec<f64> {
    (1..=200)
        .map(|i| 0.05 * i as f64 * fam.time_scale())
        .filter(|&t| nearest_pole_denominator(fam, t).1.abs() > AWAY_FROM_POLE)
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Extracted generator against whichever closed forms apply to the pair.
pub fn extraction_check(e: &SeparableEnsemble) -> Result<Check> {
    let fam = MapFamily::new(e)?;
    let mut worst: f64 = 0.0;
    for t in extraction_grid(&fam) {
        let g = extract_generator(&fam, t)?;
        let k = g.kossakowski();
        let scale = 1.0 / fam.time_scale();
        match e.angular() {
            AngularModel::Sphere => {
                let iso = isotropic_rate(e.radial(), t)? / scale;
                for gj in g.rates() {
                    worst = worst.max(rel(gj / scale, iso));
                }
            }
            AngularModel::Bagel | AngularModel::Dumbbell => {
                let [gx, gz] = if matches!(e.angular(), AngularModel::Bagel) {
                    bagel_rates(e.radial(), t)?
                } else {
                    dumbbell_rates(e.radial(), t)?
                };
                let r = g.rates();
                worst = worst
                    .max(rel(r[0] / scale, gx / scale))
                    .max(rel(r[1] / scale, gx / scale))
                    .max(rel(r[2] / scale, gz / scale));
            }
            AngularModel::Cardioid => {
                let z = azimuthal_generator(&fam, t)?;
                worst = worst.max(rel(g.hz() / scale, z.hz() / scale));
                for (a, b) in g.rates().iter().zip(z.rates()) {
                    worst = worst.max(rel(a / scale, b / scale));
                }
            }
            AngularModel::KneadedCardioid { .. } => {
                worst = worst
                    .max(rel(k[(0, 1)] / scale, offdiagonal_rate(&fam, t)? / scale))
                    .max(rel(g.hz() / scale, level_spacing(&fam, t)? / scale));
            }
            AngularModel::Tabulated(_) => {}
        }
        worst = worst.max((k - k.transpose()).amax());
    }
    Ok(Check::at_most(
        format!("extraction/{}", pair_label(e)),
        worst,
        1e-8,
    ))
}

/// Master-equation integration against the exact map, trace distance.
pub fn roundtrip_check(e: &SeparableEnsemble, t_max: f64) -> Result<Check> {
    let fam = MapFamily::new(e)?;
    let rho = probe_state();
    let n = (t_max / 0.05).ceil() as usize;
    let grid: Vec<f64> = (1..=n)
        .map(|i| t_max * i as f64 / n as f64 * fam.time_scale())
        .collect();
    let states = propagate(&fam, &rho, &grid, Tolerances::default())?;
    let worst = states
        .iter()
        .map(|s| 0.5 * (s.bloch - fam.map_at_lab(s.t).matrix() * rho.bloch()).norm())
        .fold(0.0, f64::max);
    Ok(Check::at_most(
        format!("roundtrip/{}", pair_label(e)),
        worst,
        1e-6,
    ))
}

/// Smallest Choi eigenvalue over 50 times.
pub fn positivity_check(e: &SeparableEnsemble) -> Result<Check> {
    let fam = MapFamily::new(e)?;
    let min_eig = (1..=50)
        .map(|i| {
            fam.map_at_lab(0.4 * i as f64 * fam.time_scale())
                .choi_min_eigenvalue()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(Check::at_least(
        format!("choi/{}", pair_label(e)),
        min_eig,
        -1e-10,
    ))
}

/// Every suite for the given ensembles.
pub fn run_all(pairs: &[SeparableEnsemble], cfg: &SamplerConfig) -> Result<Vec<Check>> {
    let mut angulars: Vec<AngularModel> = Vec::new();
    let mut radials: Vec<RadialModel> = Vec::new();
    for e in pairs {
        if !angulars.contains(e.angular()) {
            angulars.push(e.angular().clone());
        }
        if !radials.contains(e.radial()) {
            radials.push(e.radial().clone());
        }
    }
    let mut out = moment_checks(&angulars)?;
    out.extend(expectation_checks(&radials)?);
    out.extend(rate_checks(&radials)?);
    for e in pairs {
        out.push(mc_check(e, cfg)?);
        if e.angular().is_builtin() {
            out.push(extraction_check(e)?);
        }
        out.push(roundtrip_check(e, 8.0)?);
        out.push(positivity_check(e)?);
    }
    Ok(out)
}

/// Lab-frame map with the sign of the `⟨sin ωt⟩ [n×]` term reversed.
pub fn flip_sine_term(fam: &MapFamily, t: f64) -> Matrix3<f64> {
    let n = fam.moments().first;
    let s = fam.radial().sin_expectation(t);
    let wrong = fam.map_at(t).matrix() - crate::map::cross_matrix(&n) * (2.0 * s);
    fam.frame() * wrong * fam.frame().transpose()
}
