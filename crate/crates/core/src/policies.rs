//! Combining two disjoint paths run side by side.
//!
//! Paths draw from independent streams, so stopping the loser when the
//! winner completes has the same time distribution as taking the minimum
//! after the fact. Both policies are therefore computed post hoc from one
//! paired run.

use crate::engine::TrialResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    PathA,
    PathB,
    Tie,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiversityOutcome {
    pub first_completion: TrialResult,
    pub all_completion: TrialResult,
    pub winner: Winner,
    pub path_a: TrialResult,
    pub path_b: TrialResult,
}

impl DiversityOutcome {
    pub fn combine(ra: TrialResult, rb: TrialResult) -> Self {
        let winner = match (ra.completion_step, rb.completion_step) {
            (None, None) => Winner::None,
            (Some(_), None) => Winner::PathA,
            (None, Some(_)) => Winner::PathB,
            (Some(a), Some(b)) if a < b => Winner::PathA,
            (Some(a), Some(b)) if b < a => Winner::PathB,
            _ => Winner::Tie,
        };
        DiversityOutcome {
            first_completion: first_completion(ra, rb),
            all_completion: all_completion(ra, rb),
            winner,
            path_a: ra,
            path_b: rb,
        }
    }
}

/// Accept whichever path completes first. Ties take path A's result.
pub fn first_completion(ra: TrialResult, rb: TrialResult) -> TrialResult {
    match (ra.completion_step, rb.completion_step) {
        (_, None) => ra,
        (None, Some(_)) => rb,
        (Some(a), Some(b)) if b < a => rb,
        _ => ra,
    }
}

/// Wait for both paths. The fidelity reported is the later path's.
pub fn all_completion(ra: TrialResult, rb: TrialResult) -> TrialResult {
    match (ra.completion_step, rb.completion_step) {
        (Some(a), Some(b)) if b > a => rb,
        (Some(_), Some(_)) => ra,
        _ => TrialResult::CENSORED,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::Fidelity;
    use proptest::prelude::*;

    fn done(step: u32, f: f64) -> TrialResult {
        TrialResult::completed(step, Fidelity::new(f).unwrap())
    }

    const C: TrialResult = TrialResult::CENSORED;

    #[test]
    fn first_completion_examples() {
        assert_eq!(
            first_completion(done(5, 0.9), done(3, 0.8)).completion_step,
            Some(3)
        );
        assert_eq!(first_completion(C, done(7, 0.8)).completion_step, Some(7));
        assert!(first_completion(C, C).censored());
    }

    #[test]
    fn all_completion_examples() {
        let r = all_completion(done(5, 0.9), done(3, 0.8));
        assert_eq!(r.completion_step, Some(5));
        assert_eq!(r.e2e_fidelity.unwrap().value(), 0.9);
        assert!(all_completion(C, done(7, 0.8)).censored());
        assert_eq!(
            all_completion(done(4, 0.9), done(4, 0.8)).completion_step,
            Some(4)
        );
    }

    #[test]
    fn tie_reports_path_a() {
        let o = DiversityOutcome::combine(done(4, 0.9), done(4, 0.8));
        assert_eq!(o.winner, Winner::Tie);
        assert_eq!(o.first_completion.e2e_fidelity.unwrap().value(), 0.9);
        assert_eq!(DiversityOutcome::combine(C, C).winner, Winner::None);
        assert_eq!(
            DiversityOutcome::combine(C, done(2, 0.9)).winner,
            Winner::PathB
        );
    }

    fn arb_result() -> impl Strategy<Value = TrialResult> {
        prop_oneof![
            Just(C),
            (1u32..50, 0.3f64..1.0).prop_map(|(s, f)| done(s, f)),
        ]
    }

    proptest! {
        #[test]
        fn min_max_semantics(a in arb_result(), b in arb_result()) {
            let o = DiversityOutcome::combine(a, b);
            let steps: Vec<u32> = [a, b].iter().filter_map(|r| r.completion_step).collect();
            prop_assert_eq!(o.first_completion.completion_step, steps.iter().copied().min());
            prop_assert_eq!(o.all_completion.censored(), a.censored() || b.censored());
            if !o.all_completion.censored() {
                prop_assert_eq!(o.all_completion.completion_step, steps.iter().copied().max());
            }
        }
    }
}
