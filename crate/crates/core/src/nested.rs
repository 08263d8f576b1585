//! Standard nested bubbles built from standard bubbles.
//!
//! A nesting plan lists standard bubbles from outermost to innermost. Every
//! inner bubble sits strictly inside one component of the previous bubble;
//! the bubble owning that host component is then split into a left and a
//! right piece. The four triple shapes and the two double shapes are presets
//! of this composition.

use std::fmt;

use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::standard::{solve_standard, StandardBubble};

/// Relative gap below which the 2313 existence inequality is reported as borderline.
pub const BORDERLINE_RTOL: f64 = 1e-12;

/// Shape label of a nested bubble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeLabel {
    T213,
    T3123,
    T2313,
    T32123,
    D12,
    D212,
    Generic,
}

impl TypeLabel {
    /// The four triple types in canonical order.
    pub const TRIPLES: [TypeLabel; 4] =
        [TypeLabel::T213, TypeLabel::T3123, TypeLabel::T2313, TypeLabel::T32123];
    pub const DOUBLES: [TypeLabel; 2] = [TypeLabel::D12, TypeLabel::D212];

    pub fn as_str(self) -> &'static str {
        match self {
            TypeLabel::T213 => "213",
            TypeLabel::T3123 => "3123",
            TypeLabel::T2313 => "2313",
            TypeLabel::T32123 => "32123",
            TypeLabel::D12 => "12",
            TypeLabel::D212 => "212",
            TypeLabel::Generic => "generic",
        }
    }

    pub fn parse_triple(s: &str) -> Result<TypeLabel> {
        TypeLabel::TRIPLES
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown triple type `{s}` (expected 213, 3123, 2313 or 32123)"
                ))
            })
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which piece of a bubble a component is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Whole,
    Left,
    Right,
}

/// A component of a multi-bubble: bubble index (1-based) and side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentLabel {
    pub bubble: usize,
    pub side: Side,
}

impl ComponentLabel {
    pub const fn whole(bubble: usize) -> Self {
        ComponentLabel { bubble, side: Side::Whole }
    }

    pub const fn left(bubble: usize) -> Self {
        ComponentLabel { bubble, side: Side::Left }
    }

    pub const fn right(bubble: usize) -> Self {
        ComponentLabel { bubble, side: Side::Right }
    }

    /// Mirror image: left and right pieces swap.
    pub fn reflect(self) -> Self {
        let side = match self.side {
            Side::Whole => Side::Whole,
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        ComponentLabel { side, ..self }
    }

    /// Parses `3`, `3l`/`3ℓ` or `3r`/`3ʳ`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (digits, side) = if let Some(d) = s.strip_suffix('l').or_else(|| s.strip_suffix('ℓ')) {
            (d, Side::Left)
        } else if let Some(d) = s.strip_suffix('r').or_else(|| s.strip_suffix('ʳ')) {
            (d, Side::Right)
        } else {
            (s, Side::Whole)
        };
        let bubble: usize = digits
            .parse()
            .map_err(|_| Error::InvalidOrdering(format!("cannot parse component `{s}`")))?;
        if bubble == 0 {
            return Err(Error::InvalidOrdering("bubble indices start at 1".into()));
        }
        Ok(ComponentLabel { bubble, side })
    }
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Whole => write!(f, "{}", self.bubble),
            Side::Left => write!(f, "{}ℓ", self.bubble),
            Side::Right => write!(f, "{}ʳ", self.bubble),
        }
    }
}

/// Prescribed volumes `0 < V1 <= V2 <= V3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    v1: f64,
    v2: f64,
    v3: f64,
}

impl Triple {
    pub fn new(v1: f64, v2: f64, v3: f64) -> Result<Self> {
        for v in [v1, v2, v3] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidVolumes(format!(
                    "volumes must be positive and finite, got {v}"
                )));
            }
        }
        if !(v1 <= v2 && v2 <= v3) {
            return Err(Error::VolumeOrder(v1, v2, v3));
        }
        Ok(Triple { v1, v2, v3 })
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }

    pub fn v3(&self) -> f64 {
        self.v3
    }

    pub fn total(&self) -> f64 {
        self.v1 + self.v2 + self.v3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.v1, self.v2, self.v3)
    }
}

/// Prescribed volumes `0 < V1 <= V2` of a double bubble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    v1: f64,
    v2: f64,
}

impl Pair {
    pub fn new(v1: f64, v2: f64) -> Result<Self> {
        for v in [v1, v2] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidVolumes(format!(
                    "volumes must be positive and finite, got {v}"
                )));
            }
        }
        if !(v1 <= v2) {
            return Err(Error::InvalidVolumes(format!("volumes must satisfy V1 <= V2, got ({v1}, {v2})")));
        }
        Ok(Pair { v1, v2 })
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }
}

/// One level of a nesting plan.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPart {
    /// Bubble index of each component, left to right.
    pub bubbles: Vec<usize>,
    /// Volume of each component including anything nested inside it.
    pub volumes: Vec<f64>,
    /// Component of the previous part that contains this one; `None` for the outermost part.
    pub host: Option<usize>,
}

/// Standard bubbles from outermost to innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct NestingPlan {
    pub parts: Vec<PlanPart>,
}

impl NestingPlan {
    fn validate(&self) -> Result<()> {
        let Some(first) = self.parts.first() else {
            return Err(Error::InvalidArgument("empty nesting plan".into()));
        };
        if first.host.is_some() {
            return Err(Error::InvalidArgument("outermost part cannot have a host".into()));
        }
        let mut seen = Vec::new();
        for (i, part) in self.parts.iter().enumerate() {
            if part.bubbles.is_empty() || part.bubbles.len() != part.volumes.len() {
                return Err(Error::InvalidArgument(format!(
                    "part {i} needs one volume per bubble"
                )));
            }
            for &b in &part.bubbles {
                if seen.contains(&b) {
                    return Err(Error::InvalidArgument(format!("bubble {b} appears twice")));
                }
                seen.push(b);
            }
            if i > 0 {
                let outer = &self.parts[i - 1];
                let host = part.host.ok_or_else(|| {
                    Error::InvalidArgument(format!("inner part {i} has no host component"))
                })?;
                let Some(&host_volume) = outer.volumes.get(host) else {
                    return Err(Error::InvalidArgument(format!("part {i} has no component {host}")));
                };
                let inner: f64 = part.volumes.iter().sum();
                if !(inner < host_volume) {
                    return Err(Error::InvalidArgument(format!(
                        "part {i} (volume {inner}) does not fit in its host (volume {host_volume})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A standard nested bubble in volume coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedBubble {
    pub type_label: TypeLabel,
    pub constituents: Vec<StandardBubble>,
    pub boundary_points: Vec<f64>,
    /// Owner of each interval between consecutive boundary points.
    pub assignment: Vec<ComponentLabel>,
    pub perimeter: f64,
}

impl NestedBubble {
    pub fn component_widths(&self) -> Vec<f64> {
        self.boundary_points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Total width of all components of `bubble`.
    pub fn bubble_volume(&self, bubble: usize) -> f64 {
        self.assignment
            .iter()
            .zip(self.component_widths())
            .filter(|(c, _)| c.bubble == bubble)
            .map(|(_, w)| w)
            .sum()
    }

    /// Assignment rendered as `3ℓ,2ℓ,1,2ʳ,3ʳ`.
    pub fn assignment_string(&self) -> String {
        self.assignment
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Solves every part of `plan` and merges the parts into one nested bubble.
///
/// Fails with [`Error::NotNested`] when an inner bubble does not lie strictly
/// inside its host component.
pub fn compose(
    d: &DensityProfile,
    plan: &NestingPlan,
    label: TypeLabel,
    tol: f64,
) -> Result<NestedBubble> {
    plan.validate()?;
    let constituents = plan
        .parts
        .iter()
        .map(|part| solve_standard(d, &part.volumes, tol))
        .collect::<Result<Vec<_>>>()?;

    for (i, part) in plan.parts.iter().enumerate().skip(1) {
        let host = part.host.expect("validated");
        let outer = &constituents[i - 1];
        let (lo, hi) = (outer.boundary_points[host], outer.boundary_points[host + 1]);
        let inner = &constituents[i];
        if !(lo < inner.left_boundary && inner.right_boundary() < hi) {
            return Err(Error::NotNested(format!(
                "part {i} spans [{}, {}] but its host component is [{lo}, {hi}]",
                inner.left_boundary,
                inner.right_boundary()
            )));
        }
    }

    let mut boundary_points: Vec<f64> = constituents
        .iter()
        .flat_map(|c| c.boundary_points.iter().copied())
        .collect();
    boundary_points.sort_by(f64::total_cmp);

    let assignment = boundary_points
        .windows(2)
        .map(|w| owner_of(plan, &constituents, 0.5 * (w[0] + w[1])))
        .collect();

    let perimeter = boundary_points.iter().map(|&w| d.value(w)).sum();
    Ok(NestedBubble {
        type_label: label,
        constituents,
        boundary_points,
        assignment,
        perimeter,
    })
}

fn owner_of(plan: &NestingPlan, constituents: &[StandardBubble], x: f64) -> ComponentLabel {
    // deepest part whose span contains x
    let depth = constituents
        .iter()
        .rposition(|c| c.left_boundary < x && x < c.right_boundary())
        .unwrap_or(0);
    let part = &plan.parts[depth];
    let points = &constituents[depth].boundary_points;
    let component = points
        .windows(2)
        .position(|w| w[0] < x && x < w[1])
        .unwrap_or(0);
    let bubble = part.bubbles[component];
    let side = match plan.parts.get(depth + 1) {
        Some(next) if next.host == Some(component) => {
            if x < constituents[depth + 1].left_boundary {
                Side::Left
            } else {
                Side::Right
            }
        }
        _ => Side::Whole,
    };
    ComponentLabel { bubble, side }
}

fn part(bubbles: &[usize], volumes: &[f64], host: Option<usize>) -> PlanPart {
    PlanPart { bubbles: bubbles.to_vec(), volumes: volumes.to_vec(), host }
}

/// `| R2 | R1 | R3 |`: one standard 3-bubble with volumes `(V2, V1, V3)`.
pub fn build_213(d: &DensityProfile, t: Triple, tol: f64) -> Result<NestedBubble> {
    let plan = NestingPlan { parts: vec![part(&[2, 1, 3], &[t.v2, t.v1, t.v3], None)] };
    compose(d, &plan, TypeLabel::T213, tol)
}

/// `| R3ℓ | R1 | R2 | R3ʳ |`: a 2-bubble `(V1, V2)` inside a centred 1-bubble.
pub fn build_3123(d: &DensityProfile, t: Triple, tol: f64) -> Result<NestedBubble> {
    let plan = NestingPlan {
        parts: vec![
            part(&[3], &[t.total()], None),
            part(&[1, 2], &[t.v1, t.v2], Some(0)),
        ],
    };
    compose(d, &plan, TypeLabel::T3123, tol).map_err(|e| match e {
        Error::NotNested(msg) => Error::Internal(format!("3123 equilibrium not nested: {msg}")),
        other => other,
    })
}

/// Closed-form existence test for the 2313 equilibrium:
/// `f'(V3 + V1/2) > f'(V2 + V1/2) + f'(V1/2)`.
pub fn exists_2313(d: &DensityProfile, t: Triple) -> bool {
    let (lhs, rhs) = existence_sides_2313(d, t);
    lhs > rhs
}

/// True when the two sides of the 2313 inequality agree to [`BORDERLINE_RTOL`].
pub fn is_borderline_2313(d: &DensityProfile, t: Triple) -> bool {
    let (lhs, rhs) = existence_sides_2313(d, t);
    (lhs - rhs).abs() <= BORDERLINE_RTOL * lhs.abs().max(rhs.abs())
}

fn existence_sides_2313(d: &DensityProfile, t: Triple) -> (f64, f64) {
    let half = 0.5 * t.v1;
    let lhs = d.derivative(t.v3 + half);
    let rhs = d.derivative(t.v2 + half) + d.derivative(half);
    (lhs, rhs)
}

/// Outer standard 2-bubble `(V2, V1 + V3)` of the 2313 shape.
pub fn outer_2313(d: &DensityProfile, t: Triple, tol: f64) -> Result<StandardBubble> {
    solve_standard(d, &[t.v2, t.v1 + t.v3], tol)
}

/// Direct geometric nesting check for 2313: the outer bubble's middle point
/// `u + V2` lies left of the inner bubble's left end `-V1/2`.
pub fn nested_2313_geometric(d: &DensityProfile, t: Triple, tol: f64) -> Result<bool> {
    let outer = outer_2313(d, t, tol)?;
    Ok(outer.boundary_points[1] < -0.5 * t.v1)
}

/// `| R2 | R3ℓ | R1 | R3ʳ |`, or `None` when that equilibrium does not exist.
pub fn build_2313(d: &DensityProfile, t: Triple, tol: f64) -> Result<Option<NestedBubble>> {
    d.require_solver_admissible()?;
    if !exists_2313(d, t) {
        return Ok(None);
    }
    let plan = NestingPlan {
        parts: vec![
            part(&[2, 3], &[t.v2, t.v1 + t.v3], None),
            part(&[1], &[t.v1], Some(1)),
        ],
    };
    match compose(d, &plan, TypeLabel::T2313, tol) {
        Ok(b) => Ok(Some(b)),
        Err(Error::NotNested(_)) if is_borderline_2313(d, t) => Ok(None),
        Err(Error::NotNested(msg)) => Err(Error::Internal(format!(
            "2313 existence inequality holds but the equilibrium is not nested: {msg}"
        ))),
        Err(e) => Err(e),
    }
}

/// `| R3ℓ | R2ℓ | R1 | R2ʳ | R3ʳ |`: three concentric centred intervals.
pub fn build_32123(d: &DensityProfile, t: Triple, tol: f64) -> Result<NestedBubble> {
    let plan = NestingPlan {
        parts: vec![
            part(&[3], &[t.total()], None),
            part(&[2], &[t.v1 + t.v2], Some(0)),
            part(&[1], &[t.v1], Some(0)),
        ],
    };
    compose(d, &plan, TypeLabel::T32123, tol)
}

/// Builds the triple type named by `label`; `None` only for a nonexistent 2313.
pub fn build_triple(
    d: &DensityProfile,
    label: TypeLabel,
    t: Triple,
    tol: f64,
) -> Result<Option<NestedBubble>> {
    match label {
        TypeLabel::T213 => build_213(d, t, tol).map(Some),
        TypeLabel::T3123 => build_3123(d, t, tol).map(Some),
        TypeLabel::T2313 => build_2313(d, t, tol),
        TypeLabel::T32123 => build_32123(d, t, tol).map(Some),
        other => Err(Error::InvalidArgument(format!("{other} is not a triple type"))),
    }
}

/// `| R1 | R2 |` (D12) or `| R2ℓ | R1 | R2ʳ |` (D212).
pub fn build_double(d: &DensityProfile, p: Pair, kind: TypeLabel, tol: f64) -> Result<NestedBubble> {
    let plan = match kind {
        TypeLabel::D12 => NestingPlan { parts: vec![part(&[1, 2], &[p.v1, p.v2], None)] },
        TypeLabel::D212 => NestingPlan {
            parts: vec![part(&[2], &[p.v1 + p.v2], None), part(&[1], &[p.v1], Some(0))],
        },
        other => {
            return Err(Error::InvalidArgument(format!("{other} is not a double type")));
        }
    };
    compose(d, &plan, kind, tol)
}
