//! Integration of the time-local master equation in Bloch form,
//! `dr/dt = A(t) r`, with an embedded Dormand–Prince 5(4) pair.
//!
//! Poles of the generator are never stepped across: the integrator stops a
//! short distance before each pole and restarts after it from the exact
//! channel, which stays regular there.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::generator::{extract_generator, pole_scan, LindbladGenerator};
use crate::map::{check_grid, MapFamily};
use crate::su2::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

/// Half-width of the window around a pole handled by direct map
/// application, in units of `1/ω_c`.
pub const POLE_MARGIN: f64 = 0.02;

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates from `(t0, r0)` and reports the state at each of `outputs`
/// (nondecreasing, all `≥ t0`). Steps are clipped to land on output times.
pub fn integrate_bloch<G>(
    genfn: G,
    t0: f64,
    r0: Vector3<f64>,
    outputs: &[f64],
    tol: Tolerances,
) -> Result<Vec<Vector3<f64>>>
where
    G: Fn(f64) -> Result<LindbladGenerator>,
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::Model(
            "output times must be nondecreasing and after the start".into(),
        ));
    }
    let rhs =
        |t: f64, r: &Vector3<f64>| -> Result<Vector3<f64>> { Ok(genfn(t)?.bloch_generator() * r) };
    let mut out = Vec::with_capacity(outputs.len());
    let (mut t, mut r) = (t0, r0);
    let span = outputs.last().map_or(0.0, |&e| e - t0);
    let mut h = (1e-3 * span).max(1e-6);
    let mut k1 = rhs(t, &r)?;
    for &target in outputs {
        while t < target {
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            if step <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Integration { t });
            }
            let mut k = [Vector3::zeros(); 7];
            k[0] = k1;
            for s in 1..7 {
                let mut y = r;
                for (j, kj) in k.iter().enumerate().take(s) {
                    y += kj * (step * A[s][j]);
                }
                k[s] = rhs(t + C[s] * step, &y)?;
            }
            let mut y5 = r;
            let mut err = Vector3::zeros();
            for s in 0..7 {
                y5 += k[s] * (step * B5[s]);
                err += k[s] * (step * (B5[s] - B4[s]));
            }
            let norm = (0..3)
                .map(|i| err[i].abs() / (tol.atol + tol.rtol * r[i].abs().max(y5[i].abs())))
                .fold(0.0, f64::max);
            if !norm.is_finite() {
                h = 0.25 * step;
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration { t });
                }
                continue;
            }
            let factor = if norm == 0.0 {
                5.0
            } else {
                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if norm <= 1.0 {
                t = if last { target } else { t + step };
                r = y5;
                // first-same-as-last: stage 7 is the derivative at the new point
                k1 = k[6];
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration { t });
                }
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// State trajectory of the master equation on a pole-free span.
pub fn integrate_master<G>(
    genfn: G,
    rho0: &DensityMatrix,
    span: (f64, f64),
    outputs: &[f64],
    tol: Tolerances,
) -> Result<Vec<DensityMatrix>>
where
    G: Fn(f64) -> Result<LindbladGenerator>,
{
    if outputs.iter().any(|&t| t < span.0 || t > span.1) {
        return Err(Error::Model(
            "output time outside the integration span".into(),
        ));
    }
    integrate_bloch(genfn, span.0, rho0.bloch(), outputs, tol)?
        .into_iter()
        .map(|r| DensityMatrix::new(clip_to_ball(r)))
        .collect()
}

// integration error may push a pure state a hair outside the ball
fn clip_to_ball(r: Vector3<f64>) -> Vector3<f64> {
    let n = r.norm();
    if n > 1.0 {
        r / n
    } else {
        r
    }
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    0.5 * (a.bloch() - b.bloch()).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMethod {
    Integrated,
    /// Evaluated from the exact channel inside a pole window.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatedState {
    pub t: f64,
    /// Lab-frame Bloch vector.
    pub bloch: Vector3<f64>,
    pub method: StepMethod,
}

/// Integrates the extracted generator from `t = 0`, state `rho0` (lab
/// frame), over `grid`, stopping `POLE_MARGIN/ω_c` short of each pole and
/// restarting after it from the exact channel.
pub fn propagate(
    fam: &MapFamily,
    rho0: &DensityMatrix,
    grid: &[f64],
    tol: Tolerances,
) -> Result<Vec<PropagatedState>> {
    check_grid(grid)?;
    if grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Model("propagation grid starts before t = 0".into()));
    }
    let Some(&t_end) = grid.last() else {
        return Ok(Vec::new());
    };
    let margin = POLE_MARGIN * fam.time_scale();
    let r0 = fam.to_principal(&rho0.bloch());
    let exact = |t: f64| fam.map_at(t).matrix() * r0;
    let poles: Vec<f64> = pole_scan(fam, (0.0, t_end + margin))
        .iter()
        .map(|p| p.t)
        .collect();
    let near_pole = |t: f64| poles.iter().any(|&p| (t - p).abs() < margin);

    // pole-free segments [start, stop)
    let mut segments = Vec::new();
    let mut start = 0.0;
    for &p in &poles {
        if p - margin > start {
            segments.push((start, p - margin));
        }
        start = start.max(p + margin);
    }
    segments.push((start, f64::INFINITY));

    let genfn = |t: f64| extract_generator(fam, t);
    let mut out = Vec::with_capacity(grid.len());
    let mut cursor = 0;
    for &(a, b) in &segments {
        while cursor < grid.len() && grid[cursor] < a {
            let t = grid[cursor];
            out.push(PropagatedState {
                t,
                bloch: fam.to_lab(&exact(t)),
                method: StepMethod::Direct,
            });
            cursor += 1;
        }
        let begin = cursor;
        while cursor < grid.len() && grid[cursor] <= b && !near_pole(grid[cursor]) {
            cursor += 1;
        }
        if cursor > begin {
            let r_start = if a == 0.0 { r0 } else { exact(a) };
            let states = integrate_bloch(genfn, a, r_start, &grid[begin..cursor], tol)?;
            for (t, r) in grid[begin..cursor].iter().zip(states) {
                out.push(PropagatedState {
                    t: *t,
                    bloch: fam.to_lab(&r),
                    method: StepMethod::Integrated,
                });
            }
        }
    }
    for &t in &grid[cursor..] {
        out.push(PropagatedState {
            t,
            bloch: fam.to_lab(&exact(t)),
            method: StepMethod::Direct,
        });
    }
    Ok(out)
}
