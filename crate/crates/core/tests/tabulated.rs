use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use hamens::generator::{extract_generator, nearest_pole_denominator};
use hamens::montecarlo::{mc_average, SamplerConfig};
use hamens::table::{load_angular, load_radial};
use hamens::{AngularModel, DensityMatrix, MapFamily, RadialModel, SeparableEnsemble, UnitVector};

/// Writes `P(ω)` of a built-in model on `[w_min, w_max]`, rescaled so the
/// trapezoid mass of `P ω²` is exactly one.
fn radial_csv(model: &RadialModel, (w_min, w_max): (f64, f64), n: usize) -> String {
    let w: Vec<f64> = (0..n)
        .map(|i| w_min + (w_max - w_min) * i as f64 / (n - 1) as f64)
        .collect();
    let p: Vec<f64> = w.iter().map(|&x| model.density(x)).collect();
    let h = w[1] - w[0];
    let mass: f64 = (0..n - 1)
        .map(|i| 0.5 * h * (p[i] * w[i] * w[i] + p[i + 1] * w[i + 1] * w[i + 1]))
        .sum();
    let mut s = String::from("# sampled from a built-in model\nomega,P\n");
    for (x, v) in w.iter().zip(&p) {
        writeln!(s, "{x:.17e},{:.17e}", v / mass).unwrap();
    }
    s
}

fn angular_csv(model: &AngularModel, nt: usize, np: usize) -> String {
    let mut s = String::from("theta,phi,Theta\n");
    for i in 0..nt {
        let th = PI * i as f64 / (nt - 1) as f64;
        for k in 0..np {
            let ph = TAU * k as f64 / np as f64;
            writeln!(s, "{th:.17e},{ph:.17e},{:.17e}", model.density(th, ph)).unwrap();
        }
    }
    s
}

fn tabulated(radial: &RadialModel, angular: &AngularModel) -> SeparableEnsemble {
    let dir = tempfile::tempdir().unwrap();
    let (rp, ap) = (dir.path().join("p.csv"), dir.path().join("theta.csv"));
    // cover the tails: ω³e^{−ω} still matters at ω = 10, and the reciprocal
    // square density diverges at ω = 0 while P ω² stays flat
    let span = match radial {
        RadialModel::ExpCutoff { .. } => (0.0, 60.0),
        RadialModel::ReciprocalSquare { .. } => (1e-4, 1.0),
        _ => (0.0, 10.0),
    };
    std::fs::write(&rp, radial_csv(radial, span, 12001)).unwrap();
    std::fs::write(&ap, angular_csv(angular, 401, 256)).unwrap();
    let r = RadialModel::Tabulated(load_radial(&rp).unwrap());
    let a = AngularModel::Tabulated(load_angular(&ap).unwrap());
    // the angular table's bilinear mass differs from 1 at the 1e-5 level;
    // the ensemble carries it as ξ
    let xi = a.normalization().unwrap();
    let r = match r {
        RadialModel::Tabulated(t) => {
            let w = t.omega().to_vec();
            let p = t.density().iter().map(|v| v / xi).collect();
            RadialModel::Tabulated(hamens::RadialTable::new(w, p).unwrap())
        }
        other => other,
    };
    SeparableEnsemble::new(r, a).unwrap()
}

#[test]
fn tabulated_kneaded_gaussian_tracks_closed_form_map() {
    let builtin = AngularModel::kneaded_cardioid(0.3).unwrap();
    let gauss = RadialModel::gaussian(1.0).unwrap();
    let exact =
        MapFamily::new(&SeparableEnsemble::new(gauss.clone(), builtin.clone()).unwrap()).unwrap();
    let tab = MapFamily::new(&tabulated(&gauss, &builtin)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=50 {
        let t = 0.2 * i as f64;
        worst = worst.max((exact.map_at_lab(t).matrix() - tab.map_at_lab(t).matrix()).amax());
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn tabulated_rates_follow_builtin_away_from_poles() {
    let builtin = AngularModel::Dumbbell;
    let radial = RadialModel::exp_cutoff(1.0).unwrap();
    let exact =
        MapFamily::new(&SeparableEnsemble::new(radial.clone(), builtin.clone()).unwrap()).unwrap();
    let tab = MapFamily::new(&tabulated(&radial, &builtin)).unwrap();
    for i in 1..=40 {
        let t = 0.05 * i as f64;
        if nearest_pole_denominator(&exact, t).1.abs() < 0.05 {
            continue;
        }
        let a = extract_generator(&exact, t).unwrap();
        let b = extract_generator(&tab, t).unwrap();
        for (x, y) in a.rates().iter().zip(b.rates()) {
            assert!(
                (x - y).abs() < 1e-3 * (1.0 + x.abs()),
                "t = {t}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn tabulated_monte_carlo_agrees_with_tabulated_map() {
    let e = tabulated(
        &RadialModel::reciprocal_square(1.0).unwrap(),
        &AngularModel::Cardioid,
    );
    let fam = MapFamily::new(&e).unwrap();
    let rho = DensityMatrix::new(UnitVector::new(1.0, 0.5).cartesian()).unwrap();
    let cfg = SamplerConfig::new(11, 200_000);
    for t in [0.5, 2.0, 6.0] {
        let est = mc_average(&e, &rho, t, &cfg).unwrap();
        let exact = fam.map_at_lab(t).matrix() * rho.bloch();
        for i in 0..3 {
            let z = (est.bloch_mean[i] - exact[i]).abs() / est.bloch_stderr[i];
            assert!(z < 4.0, "t = {t}, component {i}: {z}");
        }
    }
}
