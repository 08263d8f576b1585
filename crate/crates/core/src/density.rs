//! Densities expressed in volume coordinates.
//!
//! A density on the line is symmetric, so a [`DensityProfile`] stores the
//! value and derivative on the half line `V >= 0` only. Evaluation at a
//! negative coordinate folds to `|V|` and flips the sign of the derivative,
//! which makes `f(-V) == f(V)` and `f'(-V) == -f'(V)` hold bit for bit.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A scalar function on the half line `[0, inf)`.
pub type HalfLineFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Symmetric density in volume coordinates together with its derivative.
#[derive(Clone)]
pub struct DensityProfile {
    name: String,
    value: HalfLineFn,
    derivative: HalfLineFn,
    strictly_convex: bool,
    min_at_origin: bool,
}

impl fmt::Debug for DensityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityProfile")
            .field("name", &self.name)
            .field("strictly_convex", &self.strictly_convex)
            .field("min_at_origin", &self.min_at_origin)
            .finish_non_exhaustive()
    }
}

impl DensityProfile {
    /// Registers a user density from its half-line value and derivative.
    ///
    /// The flags are taken on trust; run [`validate_density`] to check them.
    pub fn new<F, G>(
        name: impl Into<String>,
        value: F,
        derivative: G,
        strictly_convex: bool,
        min_at_origin: bool,
    ) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DensityProfile {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            strictly_convex,
            min_at_origin,
        }
    }

    /// The built-in family `f_c(V) = |V| sqrt(log(|V| + 1)) + c`.
    pub fn family(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "family parameter must be positive and finite, got {c}"
            )));
        }
        Ok(Self::family_named(format!("fam:{c}"), c))
    }

    /// `f1`, the family member with constant term 1.
    pub fn f1() -> Self {
        Self::family_named("f1".into(), 1.0)
    }

    /// `f2`, the family member with constant term 0.01.
    pub fn f2() -> Self {
        Self::family_named("f2".into(), 0.01)
    }

    fn family_named(name: String, c: f64) -> Self {
        DensityProfile {
            name,
            value: Arc::new(move |a: f64| a * a.ln_1p().sqrt() + c),
            derivative: Arc::new(family_derivative),
            strictly_convex: true,
            min_at_origin: true,
        }
    }

    /// Resolves a CLI density name: `f1`, `f2` or `fam:<c>`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "f1" => Ok(Self::f1()),
            "f2" => Ok(Self::f2()),
            _ => {
                let Some(param) = name.strip_prefix("fam:") else {
                    return Err(Error::InvalidDensity(format!(
                        "unknown density `{name}` (expected f1, f2 or fam:<c>)"
                    )));
                };
                let c: f64 = param.trim().parse().map_err(|_| {
                    Error::InvalidDensity(format!("cannot parse family parameter `{param}`"))
                })?;
                Self::family(c)
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn strictly_convex(&self) -> bool {
        self.strictly_convex
    }

    pub fn min_at_origin(&self) -> bool {
        self.min_at_origin
    }

    /// Returns a copy with the convexity flag overridden.
    pub fn with_strictly_convex(mut self, flag: bool) -> Self {
        self.strictly_convex = flag;
        self
    }

    /// Density value `f(V)`.
    #[inline]
    pub fn value(&self, v: f64) -> f64 {
        (self.value)(v.abs())
    }

    /// Density derivative `f'(V)`.
    #[inline]
    pub fn derivative(&self, v: f64) -> f64 {
        let d = (self.derivative)(v.abs());
        if v.is_sign_negative() {
            -d
        } else {
            d
        }
    }

    /// Whether the equilibrium solver may be used with this density.
    pub fn is_solver_admissible(&self) -> bool {
        self.strictly_convex && self.min_at_origin
    }

    pub(crate) fn require_solver_admissible(&self) -> Result<()> {
        if self.is_solver_admissible() {
            Ok(())
        } else {
            Err(Error::UnsupportedDensity(self.name.clone()))
        }
    }
}

fn family_derivative(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let log = a.ln_1p();
    let root = log.sqrt();
    root + a / (2.0 * (a + 1.0) * root)
}

/// Outcome of the numeric checks run by [`validate_density`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub positive: bool,
    pub odd_derivative: bool,
    pub monotone_derivative: bool,
    pub strictly_monotone_derivative: bool,
    pub derivative_consistent: bool,
    pub min_at_origin: bool,
    /// Largest relative mismatch between `f'` and its central difference.
    pub max_derivative_error: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|(_, ok)| *ok)
    }

    /// Named pass/fail list in a stable order.
    pub fn checks(&self) -> [(&'static str, bool); 6] {
        [
            ("positive", self.positive),
            ("odd_derivative", self.odd_derivative),
            ("monotone_derivative", self.monotone_derivative),
            ("strictly_convex", self.strictly_monotone_derivative),
            ("derivative_consistent", self.derivative_consistent),
            ("min_at_origin", self.min_at_origin),
        ]
    }
}

const VALIDATION_LO: f64 = 1e-3;
const VALIDATION_HI: f64 = 1e4;
const FD_STEP: f64 = 1e-6;
const FD_RTOL: f64 = 1e-5;

/// Log-spaced positive sample points on `[1e-3, 1e4]`.
pub fn validation_grid(samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let (lo, hi) = (VALIDATION_LO.ln(), VALIDATION_HI.ln());
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Numerically checks the structural assumptions the solver relies on.
///
/// Failures are reported in the returned record, never raised.
pub fn validate_density(d: &DensityProfile, samples: usize) -> Result<ValidationReport> {
    if samples < 3 {
        return Err(Error::InvalidArgument(format!(
            "validation needs at least 3 samples, got {samples}"
        )));
    }
    let positive_grid = validation_grid(samples);
    let mut grid: Vec<f64> = positive_grid.iter().rev().map(|v| -v).collect();
    grid.push(0.0);
    grid.extend_from_slice(&positive_grid);

    let positive = grid.iter().all(|&v| d.value(v) > 0.0 && d.value(v).is_finite());
    let odd_derivative = positive_grid.iter().all(|&v| {
        d.derivative(-v).to_bits() == (-d.derivative(v)).to_bits()
            && d.value(-v).to_bits() == d.value(v).to_bits()
    });

    let derivs: Vec<f64> = grid.iter().map(|&v| d.derivative(v)).collect();
    let monotone_derivative = derivs.windows(2).all(|w| w[0] <= w[1]);
    let strictly_monotone_derivative = derivs.windows(2).all(|w| w[0] < w[1]);

    let mut max_derivative_error: f64 = 0.0;
    for &v in &positive_grid {
        let h = FD_STEP * v;
        let fd = (d.value(v + h) - d.value(v - h)) / (2.0 * h);
        let exact = d.derivative(v);
        let err = (fd - exact).abs() / exact.abs().max(1e-9);
        max_derivative_error = max_derivative_error.max(err);
    }
    let derivative_consistent = max_derivative_error <= FD_RTOL;

    let min_at_origin =
        d.derivative(0.0) == 0.0 && positive_grid.iter().all(|&v| d.derivative(v) > 0.0);

    Ok(ValidationReport {
        samples,
        positive,
        odd_derivative,
        monotone_derivative,
        strictly_monotone_derivative,
        derivative_consistent,
        min_at_origin,
        max_derivative_error,
    })
}
