//! Picks the perimeter-minimizing shape among the admissible equilibria.

use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::nested::{build_double, build_triple, is_borderline_2313, Pair, Triple, TypeLabel};

/// Default tie threshold: a winner must beat every other type by more than this.
pub const DEFAULT_TIE_THRESHOLD: f64 = 1e-4;

/// Per-type perimeters and the resulting winner.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Perimeter of each candidate type, `None` when the equilibrium does not exist.
    pub perimeters: Vec<(TypeLabel, Option<f64>)>,
    pub winner: TypeLabel,
    pub runner_up: Option<TypeLabel>,
    /// Winner's advantage over the runner-up (infinite when nothing else exists).
    pub margin: f64,
    pub decisive: bool,
    /// The 2313 existence test was within rounding of equality.
    pub borderline: bool,
}

impl Classification {
    pub fn perimeter(&self, label: TypeLabel) -> Option<f64> {
        self.perimeters
            .iter()
            .find(|(l, _)| *l == label)
            .and_then(|(_, p)| *p)
    }

    fn from_perimeters(
        perimeters: Vec<(TypeLabel, Option<f64>)>,
        tie_threshold: f64,
        borderline: bool,
    ) -> Result<Self> {
        let mut finite: Vec<(TypeLabel, f64)> =
            perimeters.iter().filter_map(|(l, p)| p.map(|p| (*l, p))).collect();
        // stable: equal perimeters keep canonical order
        finite.sort_by(|a, b| a.1.total_cmp(&b.1));
        let Some(&(winner, best)) = finite.first() else {
            return Err(Error::Internal("no candidate type exists".into()));
        };
        let (runner_up, margin) = match finite.get(1) {
            Some(&(label, p)) => (Some(label), p - best),
            None => (None, f64::INFINITY),
        };
        Ok(Classification {
            perimeters,
            winner,
            runner_up,
            margin,
            decisive: margin > tie_threshold,
            borderline,
        })
    }
}

fn check_threshold(tie_threshold: f64) -> Result<()> {
    if tie_threshold >= 0.0 && tie_threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tie threshold must be non-negative, got {tie_threshold}")))
    }
}

/// Builds all four triple types and ranks their perimeters.
pub fn classify_triple(
    d: &DensityProfile,
    t: Triple,
    tol: f64,
    tie_threshold: f64,
) -> Result<Classification> {
    check_threshold(tie_threshold)?;
    let perimeters = TypeLabel::TRIPLES
        .into_iter()
        .map(|label| Ok((label, build_triple(d, label, t, tol)?.map(|b| b.perimeter))))
        .collect::<Result<Vec<_>>>()?;
    Classification::from_perimeters(perimeters, tie_threshold, is_borderline_2313(d, t))
}

/// Ranks the two double-bubble shapes `12` and `212`.
pub fn classify_double(
    d: &DensityProfile,
    p: Pair,
    tol: f64,
    tie_threshold: f64,
) -> Result<Classification> {
    check_threshold(tie_threshold)?;
    let perimeters = TypeLabel::DOUBLES
        .into_iter()
        .map(|label| Ok((label, Some(build_double(d, p, label, tol)?.perimeter))))
        .collect::<Result<Vec<_>>>()?;
    Classification::from_perimeters(perimeters, tie_threshold, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nested::{build_3123, build_32123};
    use crate::standard::DEFAULT_TOL;

    fn classify(v1: f64, v2: f64, v3: f64) -> Classification {
        let t = Triple::new(v1, v2, v3).unwrap();
        classify_triple(&DensityProfile::f2(), t, DEFAULT_TOL, DEFAULT_TIE_THRESHOLD).unwrap()
    }

    #[test]
    fn table_winners() {
        let c = classify(5.0, 100.0, 500.0);
        assert_eq!(c.winner, TypeLabel::T213);
        assert!(c.decisive);
        assert_eq!(c.perimeter(TypeLabel::T2313), None);

        let c = classify(0.01, 100.0, 1500.0);
        assert_eq!(c.winner, TypeLabel::T2313);
        assert_eq!(c.runner_up, Some(TypeLabel::T213));
        assert!((c.margin - 0.002747).abs() < 5e-6, "{}", c.margin);

        assert_eq!(classify(2.0, 80.0, 2500.0).winner, TypeLabel::T32123);
        assert_eq!(classify(5.0, 40.0, 2000.0).winner, TypeLabel::T3123);
    }

    #[test]
    fn equal_upper_volumes_exclude_2313() {
        let c = classify(1.0, 30.0, 30.0);
        assert_eq!(c.perimeter(TypeLabel::T2313), None);
        assert_eq!(c.perimeters.len(), 4);
    }

    #[test]
    fn huge_threshold_makes_nothing_decisive() {
        let t = Triple::new(5.0, 100.0, 500.0).unwrap();
        let c = classify_triple(&DensityProfile::f2(), t, DEFAULT_TOL, 1e6).unwrap();
        assert_eq!(c.winner, TypeLabel::T213);
        assert!(!c.decisive);
        assert!(classify_triple(&DensityProfile::f2(), t, DEFAULT_TOL, -1.0).is_err());
    }

    #[test]
    fn rejects_wrong_order() {
        assert!(Triple::new(5.0, 100.0, 1.0).is_err());
    }

    #[test]
    fn double_winner_follows_perimeter_sign() {
        let d = DensityProfile::f2();
        for v in [0.5, 5.0, 50.0] {
            let p = Pair::new(v, v).unwrap();
            let c = classify_double(&d, p, DEFAULT_TOL, 0.0).unwrap();
            let diff = c.perimeter(TypeLabel::D12).unwrap() - c.perimeter(TypeLabel::D212).unwrap();
            let expected = if diff <= 0.0 { TypeLabel::D12 } else { TypeLabel::D212 };
            assert_eq!(c.winner, expected);
            assert!(c.perimeters.iter().all(|(_, p)| p.is_some()));
        }
    }

    #[test]
    fn double_winner_matches_tie_function() {
        let d = DensityProfile::f2();
        let c = classify_double(&d, Pair::new(5.0, 40.0).unwrap(), DEFAULT_TOL, 0.0).unwrap();
        for v3 in [40.0, 400.0, 4000.0] {
            let t = Triple::new(5.0, 40.0, v3).unwrap();
            let tie = build_3123(&d, t, DEFAULT_TOL).unwrap().perimeter
                - build_32123(&d, t, DEFAULT_TOL).unwrap().perimeter;
            let expected = if tie < 0.0 { TypeLabel::D12 } else { TypeLabel::D212 };
            assert_eq!(c.winner, expected);
        }
    }

    #[test]
    fn decisive_winner_is_stable_under_refinement() {
        let d = DensityProfile::f1();
        for &(a, b, c) in &[(0.5, 3.0, 90.0), (2.0, 40.0, 41.0), (6.0, 100.0, 2000.0), (0.02, 0.5, 700.0)] {
            let t = Triple::new(a, b, c).unwrap();
            let coarse = classify_triple(&d, t, 1e-8, DEFAULT_TIE_THRESHOLD).unwrap();
            let fine = classify_triple(&d, t, 0.5e-8, DEFAULT_TIE_THRESHOLD).unwrap();
            if coarse.decisive {
                assert_eq!(coarse.winner, fine.winner);
            }
        }
    }
}
