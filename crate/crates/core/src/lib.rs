//! Perimeter-minimizing triple bubbles on the real line with a symmetric,
//! strictly log-convex density.
//!
//! All geometry is done in volume coordinates, where log-convexity of the
//! density becomes plain convexity. Standard bubbles are solved by bisection
//! on their equilibrium condition, nested shapes are composed from them, and
//! the four admissible triple shapes are ranked by perimeter. An independent
//! brute-force minimizer over component orderings cross-checks the results.

pub mod classify;
pub mod cli;
pub mod density;
pub mod error;
pub mod nested;
pub mod oracle;
pub mod standard;
pub mod sweep;
pub mod transform;

pub use classify::{classify_double, classify_triple, Classification, DEFAULT_TIE_THRESHOLD};
pub use density::{validate_density, DensityProfile, ValidationReport};
pub use error::{Error, Result};
pub use nested::{
    build_2313, build_213, build_3123, build_32123, build_double, exists_2313, ComponentLabel,
    NestedBubble, NestingPlan, Pair, Side, Triple, TypeLabel,
};
pub use oracle::{global_bruteforce, minimize_ordering, ten_orderings, Ordering, OracleMinimum};
pub use standard::{equilibrium_residual, solve_standard, StandardBubble, DEFAULT_TOL};
pub use sweep::{render_frame, sweep, sweep_frame, AxisSpec, Pixmap, SweepFrame};
pub use transform::{to_volume_coords, PositionalDensity, VolumeTransform};
