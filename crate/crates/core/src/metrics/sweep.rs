//! Grid sweep with golden-section refinement of every strict local maximum.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Optima more than this far below the global maximum are not reported.
pub const REPORT_MARGIN: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(name: impl Into<String>, start: f64, stop: f64, step: f64) -> Result<Self> {
        let name = name.into();
        if !(start.is_finite() && stop.is_finite() && stop >= start) {
            return Err(Error::InvalidConfig(format!(
                "axis {name}: need finite start <= stop, got [{start}, {stop}]"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidConfig(format!("axis {name}: step must be positive, got {step}")));
        }
        Ok(Axis { name, start, stop, step })
    }

    /// `points` evenly spaced values including both ends.
    pub fn with_points(name: impl Into<String>, start: f64, stop: f64, points: usize) -> Result<Self> {
        let name = name.into();
        if points < 2 {
            return Err(Error::InvalidConfig(format!("axis {name}: need at least 2 points, got {points}")));
        }
        Axis::new(name, start, stop, (stop - start) / (points - 1) as f64)
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.len();
        let span = self.stop - self.start;
        let exact_ends = n > 1 && ((n - 1) as f64 * self.step - span).abs() <= 1e-9 * span.abs().max(1.0);
        (0..n)
            .map(|k| {
                if exact_ends && k == n - 1 {
                    self.stop
                } else if exact_ends {
                    self.start + span * k as f64 / (n - 1) as f64
                } else {
                    self.start + k as f64 * self.step
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Grid point the refinement started from.
    pub grid_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    /// Row-major over the axes (last axis fastest).
    pub grid: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub optima: Vec<Optimum>,
}

impl SweepResult {
    pub fn global_max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn unravel(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for d in (0..dims.len()).rev() {
        idx[d] = flat % dims[d];
        flat /= dims[d];
    }
    idx
}

fn ravel(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Flat indices of all grid neighbours (Moore neighbourhood).
fn neighbours(flat: usize, dims: &[usize]) -> Vec<usize> {
    let centre = unravel(flat, dims);
    let mut out = Vec::new();
    let total = 3usize.pow(dims.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut idx = centre.clone();
        let mut moved = false;
        let mut inside = true;
        for d in 0..dims.len() {
            let off = (c % 3) as isize - 1;
            c /= 3;
            let v = centre[d] as isize + off;
            if v < 0 || v >= dims[d] as isize {
                inside = false;
                break;
            }
            moved |= off != 0;
            idx[d] = v as usize;
        }
        if inside && moved {
            out.push(ravel(&idx, dims));
        }
    }
    out
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation of `f` on [a, b] down to width `tol`.
fn golden_max(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

fn evaluate<F>(objective: &F, point: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let v = objective(point).map_err(|e| Error::InvalidConfig(format!("objective failed at {point:?}: {e}")))?;
    if !v.is_finite() {
        return Err(Error::InvalidConfig(format!("objective is not finite at {point:?}")));
    }
    Ok(v)
}

fn refine<F>(objective: &F, axes: &[Axis], start: &[f64], value: f64, tol: f64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut best = start.to_vec();
    let mut best_value = value;
    for (d, axis) in axes.iter().enumerate() {
        if axis.len() < 2 {
            continue;
        }
        let lo = (best[d] - axis.step).max(axis.start);
        let hi = (best[d] + axis.step).min(axis.stop);
        let line = |x: f64| {
            let mut p = best.clone();
            p[d] = x;
            evaluate(objective, &p)
        };
        let (x, v) = golden_max(&line, lo, hi, tol)?;
        // Boundary optima are checked directly since golden section never
        // lands exactly on an endpoint.
        for (cand, cv) in [(x, v), (lo, line(lo)?), (hi, line(hi)?)] {
            if cv > best_value {
                best[d] = cand;
                best_value = cv;
            }
        }
    }
    Ok((best, best_value))
}

/// Evaluates `objective` on the full grid, then refines every strict local
/// maximum within `REPORT_MARGIN` of the best grid value.
pub fn sweep<F>(objective: F, axes: &[Axis], refine_tol: f64) -> Result<SweepResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if axes.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one axis".into()));
    }
    if !(refine_tol.is_finite() && refine_tol > 0.0) {
        return Err(Error::OutOfRange { name: "refine_tol", value: refine_tol, range: "(0, inf)" });
    }
    let dims: Vec<usize> = axes.iter().map(Axis::len).collect();
    let columns: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let total: usize = dims.iter().product();
    let grid: Vec<Vec<f64>> = (0..total)
        .map(|flat| unravel(flat, &dims).iter().enumerate().map(|(d, &i)| columns[d][i]).collect())
        .collect();
    let values = grid
        .par_iter()
        .map(|p| evaluate(&objective, p))
        .collect::<Result<Vec<f64>>>()?;
    let global = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<usize> = (0..total)
        .filter(|&i| {
            let nb = neighbours(i, &dims);
            !nb.is_empty() && values[i] >= global - REPORT_MARGIN && nb.iter().all(|&j| values[i] > values[j])
        })
        .collect();
    let optima = candidates
        .par_iter()
        .map(|&i| {
            let (point, value) = refine(&objective, axes, &grid[i], values[i], refine_tol)?;
            Ok(Optimum { point, value, grid_index: i })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { axes: axes.to_vec(), grid, values, optima })
}
