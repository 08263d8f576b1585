//! Positional densities and their transformation to volume coordinates.
//!
//! The volume coordinate of a position `x` is `V(x) = int_0^x p`. Since `p`
//! is positive, `V` is strictly increasing and the map is inverted by
//! bisection on an expanding bracket. The transformed density is
//! `f(V) = p(x(V))`, and `f'(V) = (log p)'(x(V))`.

use std::sync::Arc;

use crate::density::{DensityProfile, HalfLineFn};
use crate::error::{Error, Result};

const MAX_SIMPSON_DEPTH: u32 = 48;
const MAX_BRACKET_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 400;

/// A symmetric positive density in positional coordinates.
#[derive(Clone)]
pub struct PositionalDensity {
    name: String,
    value: HalfLineFn,
    log_derivative: Option<HalfLineFn>,
}

impl std::fmt::Debug for PositionalDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PositionalDensity")
            .field("name", &self.name)
            .field("has_log_derivative", &self.log_derivative.is_some())
            .finish_non_exhaustive()
    }
}

impl PositionalDensity {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PositionalDensity {
            name: name.into(),
            value: Arc::new(value),
            log_derivative: None,
        }
    }

    /// Attaches `(log p)'` on the half line.
    pub fn with_log_derivative<G>(mut self, log_derivative: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.log_derivative = Some(Arc::new(log_derivative));
        self
    }

    /// `p(x) = 1`.
    pub fn constant() -> Self {
        Self::new("constant", |_| 1.0).with_log_derivative(|_| 0.0)
    }

    /// `p(x) = e^|x|`.
    pub fn exp_abs() -> Self {
        Self::new("exp-abs", f64::exp)
            .with_log_derivative(|x| if x == 0.0 { 0.0 } else { 1.0 })
    }

    /// The Borell density `p(x) = e^(x^2)`.
    pub fn borell() -> Self {
        Self::new("borell", |x| (x * x).exp()).with_log_derivative(|x| 2.0 * x)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(Self::constant()),
            "exp-abs" => Ok(Self::exp_abs()),
            "borell" => Ok(Self::borell()),
            _ => Err(Error::InvalidDensity(format!(
                "unknown positional density `{name}` (expected constant, exp-abs or borell)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x.abs())
    }

    pub fn log_derivative(&self, x: f64) -> Option<f64> {
        self.log_derivative.as_ref().map(|g| {
            let d = g(x.abs());
            if x.is_sign_negative() {
                -d
            } else {
                d
            }
        })
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_SIMPSON_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // below the rounding floor further bisection cannot improve the estimate
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= noise {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || m <= a || m >= b {
        return Err(Error::NoConvergence {
            what: format!("adaptive quadrature on [{a}, {b}] to tolerance {tol}"),
            iterations: MAX_SIMPSON_DEPTH as usize,
        });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// The map between positional and volume coordinates for one density.
#[derive(Clone, Debug)]
pub struct VolumeTransform {
    density: PositionalDensity,
    tol: f64,
}

impl VolumeTransform {
    pub fn new(density: PositionalDensity, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "transform tolerance must be positive, got {tol}"
            )));
        }
        let p0 = density.value(0.0);
        if !(p0 > 0.0) || !p0.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "positional density `{}` is not positive at the origin",
                density.name()
            )));
        }
        Ok(VolumeTransform { density, tol })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `V(x) = int_0^x p`, to absolute accuracy `tol / 10`.
    pub fn volume_of(&self, x: f64) -> Result<f64> {
        let p = |t: f64| self.density.value(t);
        let v = adaptive_simpson(&p, 0.0, x.abs(), self.tol / 10.0)?;
        Ok(if x.is_sign_negative() { -v } else { v })
    }

    /// Inverts `V(x)`, returning `x` with `|V(x) - V| <= tol`.
    pub fn position_of(&self, v: f64) -> Result<f64> {
        let target = v.abs();
        if target == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut doublings = 0;
        loop {
            let p_hi = self.density.value(hi);
            if !(p_hi > 0.0) {
                return Err(Error::InvalidDensity(format!(
                    "non-positive density sample p({hi}) = {p_hi}"
                )));
            }
            if self.volume_of(hi)? >= target {
                break;
            }
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
                return Err(Error::NoConvergence {
                    what: format!("bracketing the position of volume {v}"),
                    iterations: doublings,
                });
            }
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = lo + 0.5 * (hi - lo);
            let vm = self.volume_of(mid)?;
            if (vm - target).abs() <= self.tol || mid <= lo || mid >= hi {
                return Ok(if v < 0.0 { -mid } else { mid });
            }
            if vm < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NoConvergence {
            what: format!("inverting the volume coordinate at {v}"),
            iterations: MAX_BISECTIONS,
        })
    }

    /// `f(V) = p(x(V))`.
    pub fn value_at(&self, v: f64) -> Result<f64> {
        let x = self.position_of(v)?;
        let p = self.density.value(x);
        if !(p > 0.0) {
            return Err(Error::InvalidDensity(format!("non-positive density sample p({x}) = {p}")));
        }
        Ok(p)
    }

    /// `f'(V)`, from `(log p)'` when available, else a central difference of `f`.
    pub fn derivative_at(&self, v: f64) -> Result<f64> {
        let x = self.position_of(v)?;
        if let Some(g) = self.density.log_derivative(x) {
            return Ok(g);
        }
        let h = 1e-4 * v.abs().max(1.0);
        Ok((self.value_at(v + h)? - self.value_at(v - h)?) / (2.0 * h))
    }

    /// Packages the transform as a [`DensityProfile`].
    ///
    /// Evaluation failures inside the profile surface as NaN. The profile is
    /// flagged as not strictly convex; callers that know better can override
    /// with [`DensityProfile::with_strictly_convex`].
    pub fn into_profile(self) -> DensityProfile {
        let name = format!("volume:{}", self.density.name());
        let value_map = self.clone();
        let derivative_map = self;
        DensityProfile::new(
            name,
            move |v| value_map.value_at(v).unwrap_or(f64::NAN),
            move |v| derivative_map.derivative_at(v).unwrap_or(f64::NAN),
            false,
            true,
        )
    }
}

/// Converts a positional density into a volume-coordinate profile.
pub fn to_volume_coords(p: PositionalDensity, tol: f64) -> Result<DensityProfile> {
    Ok(VolumeTransform::new(p, tol)?.into_profile())
}
