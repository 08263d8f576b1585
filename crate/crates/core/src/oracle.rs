//! Direct perimeter minimization over component orderings.
//!
//! This module never touches the equilibrium condition. For a fixed
//! left-to-right ordering of components, the free parameters are the split
//! fraction of every two-piece bubble and the translation of the whole
//! cluster. Split fractions are scanned exhaustively on a grid and then
//! refined locally; for each candidate the translation is found by golden
//! section search, which relies only on the perimeter being unimodal in the
//! translation (true for densities convex in volume coordinates).

use std::fmt;

use rayon::prelude::*;

use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::nested::{ComponentLabel, Side, TypeLabel};

/// Smallest accepted grid resolution.
pub const MIN_GRID: usize = 16;
/// Default grid resolution per split fraction.
pub const DEFAULT_GRID: usize = 512;
/// Number of local refinement rounds after the coarse scan.
pub const REFINEMENT_ROUNDS: usize = 3;

const REFINE_HALF_WIDTH: i32 = 10;
const COARSE_GOLDEN_STEPS: usize = 40;
const FINE_GOLDEN_STEPS: usize = 72;

/// A left-to-right sequence of bubble components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    components: Vec<ComponentLabel>,
}

impl Ordering {
    /// Validates that the components form a standard nested shape: every
    /// bubble is whole or a left/right pair with something in between, and
    /// two split bubbles are either nested or disjoint.
    pub fn new(components: Vec<ComponentLabel>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidOrdering("empty ordering".into()));
        }
        let n = components.iter().map(|c| c.bubble).max().unwrap_or(0);
        let mut spans = Vec::new();
        for bubble in 1..=n {
            let pos = |side: Side| {
                components
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.bubble == bubble && c.side == side)
                    .map(|(i, _)| i)
                    .collect::<Vec<_>>()
            };
            let (whole, left, right) = (pos(Side::Whole), pos(Side::Left), pos(Side::Right));
            match (whole.len(), left.len(), right.len()) {
                (1, 0, 0) => {}
                (0, 1, 1) => {
                    let (l, r) = (left[0], right[0]);
                    if r < l {
                        return Err(Error::InvalidOrdering(format!(
                            "right piece of bubble {bubble} precedes its left piece"
                        )));
                    }
                    if r == l + 1 {
                        return Err(Error::InvalidOrdering(format!(
                            "pieces of bubble {bubble} are adjacent"
                        )));
                    }
                    spans.push((l, r));
                }
                _ => {
                    return Err(Error::InvalidOrdering(format!(
                        "bubble {bubble} must appear once or as one left/right pair"
                    )));
                }
            }
        }
        for (i, &(a0, a1)) in spans.iter().enumerate() {
            for &(b0, b1) in &spans[i + 1..] {
                let nested = (a0 < b0 && b1 < a1) || (b0 < a0 && a1 < b1);
                let disjoint = a1 < b0 || b1 < a0;
                if !(nested || disjoint) {
                    return Err(Error::InvalidOrdering("split bubbles interleave".into()));
                }
            }
        }
        Ok(Ordering { components })
    }

    /// Parses a comma-separated list such as `2,3l,1,3r`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let components = s
            .split(',')
            .map(ComponentLabel::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn components(&self) -> &[ComponentLabel] {
        &self.components
    }

    pub fn bubble_count(&self) -> usize {
        self.components.iter().map(|c| c.bubble).max().unwrap_or(0)
    }

    /// Split bubbles in order of their left piece.
    pub fn split_bubbles(&self) -> Vec<usize> {
        self.components
            .iter()
            .filter(|c| c.side == Side::Left)
            .map(|c| c.bubble)
            .collect()
    }

    /// Translation plus one split fraction per two-piece bubble.
    pub fn degrees_of_freedom(&self) -> usize {
        1 + self.split_bubbles().len()
    }

    pub fn reflect(&self) -> Self {
        Ordering {
            components: self.components.iter().rev().map(|c| c.reflect()).collect(),
        }
    }

    /// The admissible triple type this ordering realises, up to reflection.
    pub fn shape(&self) -> Option<TypeLabel> {
        let reflected = self.reflect();
        admissible_orderings()
            .into_iter()
            .find(|(_, o)| o == self || *o == reflected)
            .map(|(label, _)| label)
    }

    /// Component widths for the given split fractions (one per split bubble).
    fn widths_into(&self, volumes: &[f64], fractions: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let splits = self.split_bubbles();
        for c in &self.components {
            let v = volumes[c.bubble - 1];
            let width = match c.side {
                Side::Whole => v,
                Side::Left | Side::Right => {
                    let k = splits.iter().position(|&b| b == c.bubble).expect("split bubble");
                    if c.side == Side::Left {
                        fractions[k] * v
                    } else {
                        (1.0 - fractions[k]) * v
                    }
                }
            };
            out.push(width);
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn ordering(labels: &[ComponentLabel]) -> Ordering {
    Ordering::new(labels.to_vec()).expect("built-in ordering is valid")
}

const fn w(b: usize) -> ComponentLabel {
    ComponentLabel::whole(b)
}
const fn l(b: usize) -> ComponentLabel {
    ComponentLabel::left(b)
}
const fn r(b: usize) -> ComponentLabel {
    ComponentLabel::right(b)
}

/// The ten candidate triple-bubble orderings for monotone densities,
/// canonicalised up to reflection.
pub fn ten_orderings() -> Vec<Ordering> {
    [
        // one component each
        &[w(2), w(1), w(3)][..],
        &[w(1), w(2), w(3)],
        &[w(1), w(3), w(2)],
        // one split bubble around two whole ones
        &[l(3), w(1), w(2), r(3)],
        &[l(2), w(1), w(3), r(2)],
        // one whole bubble beside a split one
        &[w(2), l(3), w(1), r(3)],
        &[w(1), l(3), w(2), r(3)],
        &[w(3), l(2), w(1), r(2)],
        // two split bubbles
        &[l(3), l(2), w(1), r(2), r(3)],
        &[l(2), l(3), w(1), r(3), r(2)],
    ]
    .into_iter()
    .map(ordering)
    .collect()
}

/// The four shapes that survive for symmetric strictly log-convex densities.
pub fn admissible_orderings() -> Vec<(TypeLabel, Ordering)> {
    vec![
        (TypeLabel::T213, ordering(&[w(2), w(1), w(3)])),
        (TypeLabel::T3123, ordering(&[l(3), w(1), w(2), r(3)])),
        (TypeLabel::T2313, ordering(&[w(2), l(3), w(1), r(3)])),
        (TypeLabel::T32123, ordering(&[l(3), l(2), w(1), r(2), r(3)])),
    ]
}

/// Best configuration found for one ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMinimum {
    pub perimeter: f64,
    pub left_boundary: f64,
    pub split_fractions: Vec<f64>,
    pub boundary_points: Vec<f64>,
    /// Minimum after the coarse scan and after each refinement round.
    pub round_minima: Vec<f64>,
}

struct Objective<'a> {
    d: &'a DensityProfile,
    ordering: &'a Ordering,
    volumes: &'a [f64],
    total: f64,
}

impl Objective<'_> {
    fn offsets_into(&self, fractions: &[f64], buf: &mut Vec<f64>) {
        self.ordering.widths_into(self.volumes, fractions, buf);
        let mut acc = 0.0;
        for x in buf.iter_mut() {
            acc += *x;
            *x = acc;
        }
    }

    fn perimeter_at(&self, left: f64, offsets: &[f64]) -> f64 {
        self.d.value(left) + offsets.iter().map(|&o| self.d.value(left + o)).sum::<f64>()
    }

    /// Golden section over the translation bracket `[-2T, T]`; returns the
    /// best point evaluated, so more steps never give a worse answer.
    fn best_translation(&self, offsets: &[f64], steps: usize) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let (mut a, mut b) = (-2.0 * self.total, self.total);
        let mut c = b - INV_PHI * (b - a);
        let mut e = a + INV_PHI * (b - a);
        let mut fc = self.perimeter_at(c, offsets);
        let mut fe = self.perimeter_at(e, offsets);
        let mut best = if fe < fc { (fe, e) } else { (fc, c) };
        for _ in 0..steps {
            if fc <= fe {
                b = e;
                e = c;
                fe = fc;
                c = b - INV_PHI * (b - a);
                fc = self.perimeter_at(c, offsets);
                if fc < best.0 {
                    best = (fc, c);
                }
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + INV_PHI * (b - a);
                fe = self.perimeter_at(e, offsets);
                if fe < best.0 {
                    best = (fe, e);
                }
            }
        }
        (best.0, best.1)
    }

    fn evaluate(&self, fractions: &[f64], steps: usize, buf: &mut Vec<f64>) -> (f64, f64) {
        self.offsets_into(fractions, buf);
        self.best_translation(buf, steps)
    }
}

fn coarse_fractions(index: usize, splits: usize, grid: usize, out: &mut Vec<f64>) {
    out.clear();
    let mut rest = index;
    for _ in 0..splits {
        out.push(((rest % grid) as f64 + 0.5) / grid as f64);
        rest /= grid;
    }
}

/// Minimizes the perimeter over all configurations with the given ordering.
///
/// `volumes[a - 1]` is the volume of bubble `a`.
pub fn minimize_ordering(
    d: &DensityProfile,
    ordering: &Ordering,
    volumes: &[f64],
    grid: usize,
) -> Result<OracleMinimum> {
    if grid < MIN_GRID {
        return Err(Error::InvalidArgument(format!("grid must be at least {MIN_GRID}, got {grid}")));
    }
    if volumes.len() != ordering.bubble_count() {
        return Err(Error::InvalidOrdering(format!(
            "ordering {ordering} has {} bubbles but {} volumes were given",
            ordering.bubble_count(),
            volumes.len()
        )));
    }
    if let Some(v) = volumes.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidVolumes(format!("volumes must be positive and finite, got {v}")));
    }
    let objective = Objective { d, ordering, volumes, total: volumes.iter().sum() };
    let splits = ordering.split_bubbles().len();
    let cells = grid
        .checked_pow(splits as u32)
        .ok_or_else(|| Error::InvalidArgument("search grid too large".into()))?;

    // Coarse exhaustive scan. Ties resolve to the lowest index, so the
    // result does not depend on how rayon splits the work.
    let (coarse_p, coarse_idx) = (0..cells)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(fractions, buf), idx| {
                coarse_fractions(idx, splits, grid, fractions);
                (objective.evaluate(fractions, COARSE_GOLDEN_STEPS, buf).0, idx)
            },
        )
        .reduce_with(|a, b| match a.0.total_cmp(&b.0) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => if a.1 <= b.1 { a } else { b },
        })
        .expect("at least one cell");

    let mut buf = Vec::new();
    let mut best_fractions = Vec::new();
    coarse_fractions(coarse_idx, splits, grid, &mut best_fractions);
    let mut round_minima = vec![coarse_p];
    // the fine search evaluates a superset of the coarse points, so this is <= coarse_p
    let (mut best_p, mut best_left) = objective.evaluate(&best_fractions, FINE_GOLDEN_STEPS, &mut buf);

    let mut step = 1.0 / grid as f64;
    let mut candidate = Vec::with_capacity(splits);
    let offsets_per_dim = (2 * REFINE_HALF_WIDTH + 1) as usize;
    for _ in 0..REFINEMENT_ROUNDS {
        step /= 10.0;
        let center = best_fractions.clone();
        for idx in 0..offsets_per_dim.pow(splits as u32) {
            candidate.clear();
            let mut rest = idx;
            for &c in &center {
                let k = (rest % offsets_per_dim) as i32 - REFINE_HALF_WIDTH;
                rest /= offsets_per_dim;
                candidate.push(c + k as f64 * step);
            }
            if candidate.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
                continue;
            }
            let (p, left) = objective.evaluate(&candidate, FINE_GOLDEN_STEPS, &mut buf);
            if p < best_p {
                best_p = p;
                best_left = left;
                best_fractions.clone_from(&candidate);
            }
        }
        round_minima.push(best_p);
    }

    objective.offsets_into(&best_fractions, &mut buf);
    let mut boundary_points = vec![best_left];
    boundary_points.extend(buf.iter().map(|&o| best_left + o));
    Ok(OracleMinimum {
        perimeter: best_p,
        left_boundary: best_left,
        split_fractions: best_fractions,
        boundary_points,
        round_minima,
    })
}

/// Oracle results over a set of orderings.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub results: Vec<(Ordering, OracleMinimum)>,
    pub winner: usize,
}

impl BruteForce {
    pub fn winning_ordering(&self) -> &Ordering {
        &self.results[self.winner].0
    }

    pub fn perimeter(&self) -> f64 {
        self.results[self.winner].1.perimeter
    }

    /// Best admissible perimeter minus best non-admissible perimeter
    /// (positive when a non-admissible ordering does better).
    pub fn non_admissible_advantage(&self) -> Option<f64> {
        let best = |admissible: bool| {
            self.results
                .iter()
                .filter(|(o, _)| o.shape().is_some() == admissible)
                .map(|(_, m)| m.perimeter)
                .min_by(f64::total_cmp)
        };
        Some(best(true)? - best(false)?)
    }
}

/// Minimizes over every ordering in `orderings` and reports the overall best.
pub fn global_bruteforce(
    d: &DensityProfile,
    volumes: &[f64],
    grid: usize,
    orderings: &[Ordering],
) -> Result<BruteForce> {
    if orderings.is_empty() {
        return Err(Error::InvalidArgument("no orderings to search".into()));
    }
    let results = orderings
        .iter()
        .map(|o| Ok((o.clone(), minimize_ordering(d, o, volumes, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let winner = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.perimeter.total_cmp(&b.1 .1.perimeter))
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok(BruteForce { results, winner })
}
