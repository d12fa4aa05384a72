//! Deterministic maximization over a box: full-factorial grid scan, then
//! rounds of coordinate-wise golden-section refinement.
//!
//! Every probed point goes through one tracker, so the reported optimum is at
//! least as good as anything evaluated. Ties between equal values resolve to
//! the lexicographically smallest point, which keeps the parallel grid
//! reduction independent of evaluation order.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// One free coordinate with its closed bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Dimension {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    dims: Vec<Dimension>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        for d in &dims {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower <= d.upper) {
                return Err(Error::Config(format!(
                    "search interval for {} is empty or unbounded: [{}, {}]",
                    d.name, d.lower, d.upper
                )));
            }
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    fn clamp(&self, x: &[f64]) -> Vec<f64> {
        self.dims.iter().zip(x).map(|(d, &v)| d.clamp(v)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub grid_points: usize,
    pub refinement_rounds: usize,
    /// Relative tolerance on the rate and on golden-section bracket widths.
    pub tolerance: f64,
    /// Evaluate the grid on the rayon pool.
    pub parallel: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_points: 12,
            refinement_rounds: 3,
            tolerance: 1e-6,
            parallel: true,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points == 0 {
            return Err(Error::Config("grid_points must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Config(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Vec<f64>,
    pub rate: f64,
    pub evaluations: usize,
    /// The last refinement round improved the rate by less than the tolerance.
    pub converged: bool,
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// `true` when `(va, a)` beats `(vb, b)`.
fn better(va: f64, a: &[f64], vb: f64, b: &[f64]) -> bool {
    match va.total_cmp(&vb) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => lexicographic(a, b) == Ordering::Less,
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

struct Tracker<'a, F> {
    evaluate: &'a F,
    best: Vec<f64>,
    value: f64,
    evaluations: usize,
}

impl<F: Fn(&[f64]) -> f64> Tracker<'_, F> {
    fn offer(&mut self, x: &[f64], v: f64) {
        if better(v, x, self.value, &self.best) {
            self.best = x.to_vec();
            self.value = v;
        }
    }

    fn probe(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = sanitize((self.evaluate)(x));
        self.offer(x, v);
        v
    }
}

fn grid_coordinate(d: &Dimension, k: usize, points: usize) -> f64 {
    if points == 1 {
        0.5 * (d.lower + d.upper)
    } else {
        d.lower + d.width() * k as f64 / (points - 1) as f64
    }
}

fn grid_point(space: &SearchSpace, mut index: usize, points: usize) -> Vec<f64> {
    let mut x = vec![0.0; space.len()];
    for (i, d) in space.dims().iter().enumerate().rev() {
        x[i] = grid_coordinate(d, index % points, points);
        index /= points;
    }
    x
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `evaluate` over `space`. `evaluate` must be total: infeasible
/// points should map to zero (NaN is treated as the worst possible value).
pub fn maximize_rate<F>(
    evaluate: F,
    space: &SearchSpace,
    settings: &OptimizerSettings,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    maximize_rate_seeded(evaluate, space, settings, &[])
}

/// [`maximize_rate`] with extra starting candidates (e.g. the optimum of a
/// neighbouring sweep cell) competing with the grid points.
pub fn maximize_rate_seeded<F>(
    evaluate: F,
    space: &SearchSpace,
    settings: &OptimizerSettings,
    seeds: &[Vec<f64>],
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    settings.validate()?;
    if space.is_empty() {
        return Err(Error::Config("search space has no free dimensions".into()));
    }
    let points = settings.grid_points;
    let total = points
        .checked_pow(space.len() as u32)
        .filter(|&t| t <= 50_000_000)
        .ok_or_else(|| {
            Error::Config(format!(
                "grid of {points}^{} points is too large",
                space.len()
            ))
        })?;

    let scan = |i: usize| {
        let x = grid_point(space, i, points);
        let v = sanitize(evaluate(&x));
        (v, x)
    };
    let pick =
        |a: (f64, Vec<f64>), b: (f64, Vec<f64>)| if better(b.0, &b.1, a.0, &a.1) { b } else { a };
    let start = (f64::NEG_INFINITY, vec![f64::INFINITY; space.len()]);
    let (grid_value, grid_best) = if settings.parallel {
        (0..total)
            .into_par_iter()
            .map(scan)
            .reduce(|| start.clone(), pick)
    } else {
        (0..total).map(scan).fold(start.clone(), pick)
    };

    let mut tracker = Tracker {
        evaluate: &evaluate,
        best: grid_best,
        value: grid_value,
        evaluations: total,
    };
    for seed in seeds {
        if seed.len() != space.len() {
            return Err(Error::Config(format!(
                "seed point has {} coordinates, search space has {}",
                seed.len(),
                space.len()
            )));
        }
        tracker.probe(&space.clamp(seed));
    }

    let spacing: Vec<f64> = space
        .dims()
        .iter()
        .map(|d| {
            if points > 1 {
                d.width() / (points - 1) as f64
            } else {
                0.5 * d.width()
            }
        })
        .collect();
    let mut converged = settings.refinement_rounds == 0;
    for round in 0..settings.refinement_rounds {
        let before = tracker.value;
        let scale = 0.5f64.powi(round as i32);
        for (i, d) in space.dims().iter().enumerate() {
            let half = spacing[i] * scale;
            if !(half > 0.0) {
                continue;
            }
            let centre = tracker.best[i];
            let lo = d.clamp(centre - half);
            let hi = d.clamp(centre + half);
            golden_section(
                &mut tracker,
                i,
                lo,
                hi,
                settings.tolerance * d.width().max(f64::MIN_POSITIVE),
            );
        }
        let gain = tracker.value - before;
        converged = gain <= settings.tolerance * tracker.value.abs().max(f64::MIN_POSITIVE);
    }

    Ok(OptimizationResult {
        best: tracker.best,
        rate: tracker.value,
        evaluations: tracker.evaluations,
        converged,
    })
}

/// Golden-section search along coordinate `axis` of the tracked best point.
fn golden_section<F: Fn(&[f64]) -> f64>(
    tracker: &mut Tracker<'_, F>,
    axis: usize,
    mut a: f64,
    mut b: f64,
    xtol: f64,
) {
    let mut x = tracker.best.clone();
    let mut at = |t: f64, tracker: &mut Tracker<'_, F>| {
        x[axis] = t;
        tracker.probe(&x)
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = at(c, tracker);
    let mut fd = at(d, tracker);
    while b - a > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = at(c, tracker);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = at(d, tracker);
        }
    }
    at(0.5 * (a + b), tracker);
}
