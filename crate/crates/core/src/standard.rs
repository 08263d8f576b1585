//! Standard n-bubbles: contiguous blocks of components in equilibrium.
//!
//! In volume coordinates the boundary points of a standard bubble with
//! volumes `V_1..V_n` are `w_j = L + S_j`, where `L` is the leftmost point
//! and `S_j` the prefix sums. Equilibrium means `sum_j f'(w_j) = 0`. For a
//! strictly convex density the left-hand side is strictly increasing in `L`,
//! negative at `L = -sum V` and positive at `L = 0`, so bisection on that
//! bracket finds the unique root.

use crate::density::DensityProfile;
use crate::error::{Error, Result};

/// Default relative tolerance of the bisection.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Iteration cap of the bisection.
pub const MAX_ITERATIONS: usize = 200;

/// A solved standard bubble.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardBubble {
    pub volumes: Vec<f64>,
    pub left_boundary: f64,
    pub boundary_points: Vec<f64>,
    pub perimeter: f64,
    pub residual: f64,
}

impl StandardBubble {
    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn right_boundary(&self) -> f64 {
        *self.boundary_points.last().expect("a standard bubble has boundary points")
    }

    /// Largest `|f'(w_j)|` over the boundary points, the scale of the residual.
    pub fn derivative_scale(&self, d: &DensityProfile) -> f64 {
        self.boundary_points
            .iter()
            .map(|&w| d.derivative(w).abs())
            .fold(0.0, f64::max)
    }
}

/// Boundary points `left + S_j` for `j = 0..=n`.
pub fn boundary_points(left: f64, volumes: &[f64]) -> Vec<f64> {
    let mut points = Vec::with_capacity(volumes.len() + 1);
    let mut offset = 0.0;
    points.push(left);
    for &v in volumes {
        offset += v;
        points.push(left + offset);
    }
    points
}

/// `f'(left) + f'(left + S_1) + ... + f'(left + S_n)`.
pub fn equilibrium_residual(d: &DensityProfile, left: f64, volumes: &[f64]) -> f64 {
    let mut offset = 0.0;
    let mut sum = d.derivative(left);
    for &v in volumes {
        offset += v;
        sum += d.derivative(left + offset);
    }
    sum
}

pub(crate) fn check_volumes(volumes: &[f64]) -> Result<()> {
    if volumes.is_empty() {
        return Err(Error::InvalidVolumes("at least one volume is required".into()));
    }
    if let Some(v) = volumes.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidVolumes(format!(
            "volumes must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// Solves for the unique standard bubble enclosing `volumes` left to right.
///
/// A single bubble is centred exactly at the origin by symmetry.
pub fn solve_standard(d: &DensityProfile, volumes: &[f64], tol: f64) -> Result<StandardBubble> {
    d.require_solver_admissible()?;
    check_volumes(volumes)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let total: f64 = volumes.iter().sum();

    if volumes.len() == 1 {
        let half = 0.5 * total;
        return Ok(finish(d, volumes, -half));
    }

    let scale = |left: f64| {
        boundary_points(left, volumes)
            .into_iter()
            .map(|w| d.derivative(w).abs())
            .fold(0.0, f64::max)
    };

    let mut lo = -total;
    let mut hi = 0.0;
    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    for _ in 0..MAX_ITERATIONS {
        let mid = lo + 0.5 * (hi - lo);
        let r = equilibrium_residual(d, mid, volumes);
        if !r.is_finite() {
            return Err(Error::NoConvergence {
                what: format!("non-finite equilibrium residual at {mid}"),
                iterations: 0,
            });
        }
        if r.abs() < best.0 {
            best = (r.abs(), mid);
        }
        let narrow = hi - lo <= tol * total;
        if (narrow && r.abs() <= tol * scale(mid)) || r == 0.0 {
            return Ok(finish(d, volumes, mid));
        }
        if mid <= lo || mid >= hi {
            // bracket exhausted at machine precision
            return Ok(finish(d, volumes, best.1));
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        what: format!("standard bubble with volumes {volumes:?}"),
        iterations: MAX_ITERATIONS,
    })
}

fn finish(d: &DensityProfile, volumes: &[f64], left: f64) -> StandardBubble {
    let boundary_points = boundary_points(left, volumes);
    let perimeter = boundary_points.iter().map(|&w| d.value(w)).sum();
    let residual = boundary_points.iter().map(|&w| d.derivative(w)).sum();
    StandardBubble {
        volumes: volumes.to_vec(),
        left_boundary: left,
        boundary_points,
        perimeter,
        residual,
    }
}
