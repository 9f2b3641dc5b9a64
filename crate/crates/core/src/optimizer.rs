//! Grid-then-simplex minimization over the measurement half sphere
//! `θ ∈ [0, π/2]`, `φ ∈ [0, 2π)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::MeasurementDirection;

/// Objective values closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const MAX_RESTARTS: usize = 3;
const MIN_SIMPLEX_SIZE: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizerOptions {
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub refine_starts: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            grid_theta: 24,
            grid_phi: 48,
            refine_starts: 3,
            tol: 1e-9,
            max_iters: 400,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid_theta < 8 {
            return Err(Error::Config(format!("grid_theta must be >= 8, got {}", self.grid_theta)));
        }
        if self.grid_phi < 16 {
            return Err(Error::Config(format!("grid_phi must be >= 16, got {}", self.grid_phi)));
        }
        if self.refine_starts == 0 || self.max_iters == 0 {
            return Err(Error::Config("refine_starts and max_iters must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn theta_step(&self) -> f64 {
        FRAC_PI_2 / (self.grid_theta - 1) as f64
    }

    fn phi_step(&self) -> f64 {
        2.0 * PI / self.grid_phi as f64
    }
}

/// Outcome of one minimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Minimum {
    pub value: f64,
    pub direction: MeasurementDirection,
    /// Best value seen on the grid before refinement.
    pub grid_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `objective(θ, φ)`.
///
/// The whole grid is evaluated first (possibly in parallel; the reduction runs
/// in index order), then Nelder-Mead refines from the `refine_starts` best
/// grid points. Results are bit-identical for identical inputs.
pub fn minimize<F>(objective: F, opts: &OptimizerOptions) -> Result<Minimum>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    opts.validate()?;
    let eval = |theta: f64, phi: f64| -> Result<f64> {
        let v = objective(theta, phi)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { theta, phi, value: v });
        }
        Ok(v)
    };

    let (nt, np) = (opts.grid_theta, opts.grid_phi);
    let (dt, dp) = (opts.theta_step(), opts.phi_step());
    let grid: Vec<f64> = (0..nt * np)
        .into_par_iter()
        .map(|k| eval((k / np) as f64 * dt, (k % np) as f64 * dp))
        .collect::<Result<Vec<f64>>>()?;

    let grid_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let best_idx = grid
        .iter()
        .position(|&v| v <= grid_min + TIE_TOL)
        .expect("grid is nonempty");

    // The θ = 0 row is a single point on the sphere; only its φ = 0 entry seeds a start.
    let mut order: Vec<usize> = (0..nt * np).filter(|&k| k / np > 0 || k == 0).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]).then(a.cmp(&b)));
    let mut starts = vec![best_idx];
    starts.extend(order.into_iter().filter(|&k| k != best_idx).take(opts.refine_starts - 1));

    let runs: Vec<Refined> = starts
        .par_iter()
        .map(|&k| {
            let start = [(k / np) as f64 * dt, (k % np) as f64 * dp];
            refine(&eval, start, grid[k], [dt / 2.0, dp / 2.0], opts)
        })
        .collect::<Result<Vec<Refined>>>()?;

    let evaluations = grid.len() + runs.iter().map(|r| r.evaluations).sum::<usize>();
    let mut best: Option<&Refined> = None;
    for run in &runs {
        if best.map_or(true, |b| run.value < b.value - TIE_TOL) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one refinement run");

    let grid_value = grid[best_idx];
    let (value, point, converged) = if best.value < grid_value - TIE_TOL {
        (best.value, best.point, best.converged)
    } else {
        let p = [(best_idx / np) as f64 * dt, (best_idx % np) as f64 * dp];
        (grid_value, p, runs[0].converged)
    };
    let direction = MeasurementDirection::normalized(point[0], point[1]);
    Ok(Minimum {
        value,
        direction,
        grid_value,
        evaluations,
        converged,
    })
}

struct Refined {
    value: f64,
    point: [f64; 2],
    evaluations: usize,
    converged: bool,
}

fn clamp_point(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(0.0, FRAC_PI_2), p[1].rem_euclid(2.0 * PI)]
}

/// Nelder-Mead with restarts from the incumbent until a restart stops improving.
fn refine<E>(
    eval: &E,
    start: [f64; 2],
    start_value: f64,
    steps: [f64; 2],
    opts: &OptimizerOptions,
) -> Result<Refined>
where
    E: Fn(f64, f64) -> Result<f64>,
{
    let mut point = start;
    let mut value = start_value;
    let mut evaluations = 0;
    let mut converged = false;
    let mut iters_left = opts.max_iters;
    for _ in 0..=MAX_RESTARTS {
        let run = nelder_mead(eval, point, value, steps, opts.tol, iters_left)?;
        evaluations += run.evaluations;
        iters_left = iters_left.saturating_sub(run.iterations);
        converged = run.converged;
        let improved = value - run.value;
        if run.value < value {
            value = run.value;
            point = run.point;
        }
        if !run.converged || improved <= opts.tol || iters_left == 0 {
            break;
        }
    }
    Ok(Refined {
        value,
        point,
        evaluations,
        converged,
    })
}

struct SimplexRun {
    value: f64,
    point: [f64; 2],
    evaluations: usize,
    iterations: usize,
    converged: bool,
}

fn nelder_mead<E>(
    eval: &E,
    start: [f64; 2],
    start_value: f64,
    steps: [f64; 2],
    tol: f64,
    max_iters: usize,
) -> Result<SimplexRun>
where
    E: Fn(f64, f64) -> Result<f64>,
{
    let mut evaluations = 0;
    let mut f = |p: [f64; 2]| -> Result<f64> {
        evaluations += 1;
        eval(p[0], p[1])
    };

    let theta_step = if start[0] + steps[0] <= FRAC_PI_2 { steps[0] } else { -steps[0] };
    let v1 = clamp_point([start[0] + theta_step, start[1]]);
    let v2 = clamp_point([start[0], start[1] + steps[1]]);
    let mut simplex = vec![(start, start_value), (v1, f(v1)?), (v2, f(v2)?)];

    let mut iterations = 0;
    let mut converged = false;
    // Points keep an unwrapped φ inside the simplex; only θ is clamped.
    let project = |p: [f64; 2]| [p[0].clamp(0.0, FRAC_PI_2), p[1]];
    while iterations < max_iters {
        // Stable sort keeps earlier vertices first on ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[2].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(p, _)| (p[0] - simplex[0].0[0]).abs().max((p[1] - simplex[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if spread <= tol || size <= MIN_SIMPLEX_SIZE {
            converged = true;
            break;
        }
        iterations += 1;

        let (best, worst) = (simplex[0].clone(), simplex[2].clone());
        let second = simplex[1].1;
        let centroid = [
            (simplex[0].0[0] + simplex[1].0[0]) / 2.0,
            (simplex[0].0[1] + simplex[1].0[1]) / 2.0,
        ];
        let toward = |coef: f64| {
            project([
                centroid[0] + coef * (centroid[0] - worst.0[0]),
                centroid[1] + coef * (centroid[1] - worst.0[1]),
            ])
        };

        let reflected = toward(REFLECT);
        let fr = f(reflected)?;
        if fr < best.1 {
            let expanded = toward(REFLECT * EXPAND);
            let fe = f(expanded)?;
            simplex[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < second {
            simplex[2] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let p = toward(REFLECT * CONTRACT);
            (p, f(p)?)
        } else {
            let p = toward(-CONTRACT);
            (p, f(p)?)
        };
        if fc < worst.1.min(fr) {
            simplex[2] = (contracted, fc);
            continue;
        }
        for v in simplex.iter_mut().skip(1) {
            let p = project([
                best.0[0] + SHRINK * (v.0[0] - best.0[0]),
                best.0[1] + SHRINK * (v.0[1] - best.0[1]),
            ]);
            *v = (p, f(p)?);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(SimplexRun {
        value: simplex[0].1,
        point: clamp_point(simplex[0].0),
        evaluations,
        iterations,
        converged,
    })
}
