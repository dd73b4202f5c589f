//! Least-squares fits of step counts to the two runtime models
//!
//! * sqrt: `t = c1·√(x^c2) + c3`
//! * log:  `t = c1·ln(x + c2) + c3`
//!
//! where `x = (n+m)·N`. Both models are linear in `(c1, c3)` once `c2` is
//! fixed, so the search runs over `c2` alone: a coarse grid picks the seed,
//! Nelder–Mead refines it, and `(c1, c3)` come from the closed-form linear
//! least-squares solution at every trial `c2`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 4;
const MAX_ITERATIONS: usize = 5_000;
const X_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Sqrt,
    Log,
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Sqrt => "sqrt",
            FitModel::Log => "log",
        })
    }
}

impl FromStr for FitModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(FitModel::Sqrt),
            "log" => Ok(FitModel::Log),
            other => Err(Error::Parse(format!("unknown fit model `{other}`"))),
        }
    }
}

impl FitModel {
    pub fn eval(&self, x: f64, c1: f64, c2: f64, c3: f64) -> f64 {
        c1 * self.basis(x, c2) + c3
    }

    fn basis(&self, x: f64, c2: f64) -> f64 {
        match self {
            FitModel::Sqrt => x.powf(0.5 * c2),
            FitModel::Log => (x + c2).ln(),
        }
    }
}

/// One observation: `x = (n+m)·N`, `t` = steps to the success peak.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub x: f64,
    pub t: f64,
}

impl From<(f64, f64)> for FitPoint {
    fn from((x, t): (f64, f64)) -> Self {
        FitPoint { x, t }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `1 − SS_res/SS_tot`; set to 1 for constant data fitted exactly.
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub points: Vec<FitPoint>,
    pub converged: bool,
    /// The data cannot identify the model (constant `t` or constant basis).
    pub degenerate: bool,
    pub iterations: usize,
    pub notes: Vec<String>,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.model.eval(x, self.c1, self.c2, self.c3)
    }
}

pub fn fit_sqrt_model(points: &[FitPoint]) -> Result<FitResult> {
    fit(FitModel::Sqrt, points)
}

pub fn fit_log_model(points: &[FitPoint]) -> Result<FitResult> {
    fit(FitModel::Log, points)
}

/// Closed-form `(c1, c3, SS_res)` for a fixed `c2`, or `None` when the basis
/// is constant over the data or leaves its domain.
fn profile(model: FitModel, points: &[FitPoint], c2: f64) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    let phi: Vec<f64> = points.iter().map(|p| model.basis(p.x, c2)).collect();
    if phi.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let phi_mean = phi.iter().sum::<f64>() / n;
    let t_mean = points.iter().map(|p| p.t).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (f, p) in phi.iter().zip(points) {
        let d = f - phi_mean;
        sxx += d * d;
        sxy += d * (p.t - t_mean);
    }
    // also rejects NaN
    if sxx.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let c1 = sxy / sxx;
    let c3 = t_mean - c1 * phi_mean;
    let ss = phi
        .iter()
        .zip(points)
        .map(|(f, p)| {
            let r = p.t - (c1 * f + c3);
            r * r
        })
        .sum();
    Some((c1, c3, ss))
}

/// Search coordinate `u` ↦ `c2`. The log model maps `u` onto
/// `c2 = x_min·(10^u − 1)`, which keeps `x + c2 > 0` on every point.
struct Coordinate {
    model: FitModel,
    x_min: f64,
}

impl Coordinate {
    fn c2(&self, u: f64) -> f64 {
        match self.model {
            FitModel::Sqrt => u,
            FitModel::Log => self.x_min * (10f64.powf(u) - 1.0),
        }
    }

    fn grid(&self) -> Vec<f64> {
        let (lo, hi, steps) = match self.model {
            FitModel::Sqrt => (0.5, 1.5, 100),
            FitModel::Log => (-8.0, 3.0, 220),
        };
        (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
    }

    fn initial_step(&self) -> f64 {
        match self.model {
            FitModel::Sqrt => 0.01,
            FitModel::Log => 0.05,
        }
    }
}

fn fit(model: FitModel, points: &[FitPoint]) -> Result<FitResult> {
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_POINTS,
            got: points.len(),
        });
    }
    if points
        .iter()
        .any(|p| !(p.x.is_finite() && p.x > 0.0 && p.t.is_finite()))
    {
        return Err(Error::config("fit points need finite x > 0 and finite t"));
    }
    let coord = Coordinate {
        model,
        x_min: points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
    };
    let mut notes = Vec::new();

    let t_mean = points.iter().map(|p| p.t).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|p| (p.t - t_mean).powi(2)).sum();

    let objective = |u: &[f64]| match profile(model, points, coord.c2(u[0])) {
        Some((_, _, ss)) => ss,
        None => f64::INFINITY,
    };

    let grid = coord.grid();
    let seed = grid
        .iter()
        .copied()
        .map(|u| (u, objective(&[u])))
        .filter(|(_, f)| f.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1));

    let Some((u0, _)) = seed.filter(|_| ss_tot > 0.0) else {
        // Constant t (or a basis that is constant on every grid point):
        // any c2 fits equally well, so report the flat line.
        notes.push("degenerate input: step counts carry no scaling information".into());
        let c2 = match model {
            FitModel::Sqrt => 1.0,
            FitModel::Log => 0.0,
        };
        return Ok(finish(model, points, 0.0, c2, t_mean, true, 0, true, notes));
    };

    let nm = nelder_mead(objective, &[u0], &[coord.initial_step()], MAX_ITERATIONS, X_TOL);
    let u = nm.x[0];
    if u <= grid[0] || u >= grid[grid.len() - 1] {
        notes.push(format!(
            "optimum at u = {u:.6} lies outside the seeding range [{}, {}]",
            grid[0],
            grid[grid.len() - 1]
        ));
    }
    if model == FitModel::Log {
        notes.push("c2 searched as x_min·(10^u − 1) so that x + c2 > 0 on all points".into());
    }
    let c2 = coord.c2(u);
    let (c1, c3, _) = profile(model, points, c2).expect("optimum lies inside the domain");
    let result = finish(model, points, c1, c2, c3, nm.converged, nm.iterations, false, notes);
    if !nm.converged {
        return Err(Error::FitNotConverged {
            iterations: nm.iterations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    model: FitModel,
    points: &[FitPoint],
    c1: f64,
    c2: f64,
    c3: f64,
    converged: bool,
    iterations: usize,
    degenerate: bool,
    notes: Vec<String>,
) -> FitResult {
    let residuals: Vec<f64> = points.iter().map(|p| p.t - model.eval(p.x, c1, c2, c3)).collect();
    FitResult {
        model,
        c1,
        c2,
        c3,
        r_squared: r_squared(points, &residuals),
        residuals,
        points: points.to_vec(),
        converged,
        degenerate,
        iterations,
        notes,
    }
}

/// `1 − SS_res/SS_tot`.
pub fn r_squared(points: &[FitPoint], residuals: &[f64]) -> f64 {
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.t).sum::<f64>() / n;
    let ss_tot: f64 = points.iter().map(|p| (p.t - mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

#[derive(Clone, Debug)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Derivative-free simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
///
/// Stops once the simplex diameter drops below `x_tol·(1 + |x_best|)`.
/// Non-finite objective values are treated as +∞.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], max_iter: usize, x_tol: f64) -> NelderMeadOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    let combine =
        |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(&ai, &bi)| ai + t * (bi - ai)).collect() };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let scale = 1.0 + best.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .fold(0.0, f64::max);
        if diameter <= x_tol * scale {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflected = combine(&centroid, &worst.0, -1.0);
        let f_reflected = eval(&reflected);

        if f_reflected < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -2.0);
            let f_expanded = eval(&expanded);
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_reflected);
            continue;
        }
        let (contracted, f_contracted) = if f_reflected < worst.1 {
            let c = combine(&centroid, &reflected, 0.5);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = combine(&centroid, &worst.0, 0.5);
            let fc = eval(&c);
            (c, fc)
        };
        if f_contracted < worst.1.min(f_reflected) {
            simplex[dim] = (contracted, f_contracted);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x = combine(&anchor, &entry.0, 0.5);
            let fx = eval(&x);
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadOutcome {
        x,
        f,
        iterations,
        converged,
    }
}
