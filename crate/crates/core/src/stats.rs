//! Aggregation of trial results: CDFs, quantiles, convergence, rates.
//!
//! Censored trials stay in every CDF denominator, so a CDF can plateau
//! below one. Means and rates use completed trials only, and the censored
//! fraction is always reported next to them.

use crate::engine::{PairedRun, TrialResult};
use crate::error::{Error, Result};
use crate::policies::{all_completion, first_completion};

/// Quantile levels reported in summaries.
pub const SUMMARY_QUANTILES: [f64; 4] = [0.25, 0.5, 0.75, 0.9];

/// Quantile levels compared by [`convergence_check`].
pub const CONVERGENCE_QUANTILES: [f64; 2] = [0.5, 0.9];

pub const DEFAULT_CONVERGENCE_TOLERANCE: f64 = 0.02;

pub const DEFAULT_CROSSOVER_NOISE: f64 = 0.01;

/// Series stop being emitted once all of them reach this level.
pub const CDF_SATURATION: f64 = 0.999;

/// `cdf[n-1] = P(completion step <= n)` for `n` in `1..=horizon`.
pub fn empirical_cdf(results: &[TrialResult], horizon: u32) -> Result<Vec<f64>> {
    if results.is_empty() {
        return Err(Error::Domain("empirical CDF of an empty sample".into()));
    }
    if horizon < 1 {
        return Err(Error::Domain("CDF horizon must be at least 1".into()));
    }
    let mut counts = vec![0u64; horizon as usize + 1];
    for r in results {
        if let Some(s) = r.completion_step {
            if s <= horizon {
                counts[s as usize] += 1;
            }
        }
    }
    let total = results.len() as f64;
    let mut acc = 0u64;
    Ok(counts[1..]
        .iter()
        .map(|c| {
            acc += c;
            acc as f64 / total
        })
        .collect())
}

/// Smallest completion step `n` with `CDF(n) >= q`, counting censored
/// trials in the denominator. `None` if the CDF never reaches `q`.
pub fn quantile(results: &[TrialResult], q: f64) -> Option<u32> {
    if results.is_empty() {
        return None;
    }
    let mut steps: Vec<u32> = results.iter().filter_map(|r| r.completion_step).collect();
    steps.sort_unstable();
    // Rank of the first sample at which the count reaches q * total.
    let needed = (q * results.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    steps.get(needed - 1).copied()
}

pub fn mean_steps(results: &[TrialResult]) -> Option<f64> {
    let steps: Vec<f64> = results
        .iter()
        .filter_map(|r| r.completion_step.map(f64::from))
        .collect();
    if steps.is_empty() {
        None
    } else {
        Some(steps.iter().sum::<f64>() / steps.len() as f64)
    }
}

/// `1 / (mean_steps * delta_t)` in Hz.
pub fn entanglement_rate(mean_steps: f64, delta_t_us: f64) -> Result<f64> {
    if mean_steps.is_nan() || mean_steps <= 0.0 || delta_t_us.is_nan() || delta_t_us <= 0.0 {
        return Err(Error::Domain(format!(
            "rate needs positive mean steps and step duration, got {mean_steps} and {delta_t_us}"
        )));
    }
    Ok(1.0 / (mean_steps * delta_t_us * 1e-6))
}

/// Half-width of the two-sided DKW confidence band at level `1 - alpha`.
pub fn dkw_half_width(trials: u64, alpha: f64) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    ((2.0 / alpha).ln() / (2.0 * trials as f64)).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub trials: usize,
    pub mean_steps: Option<f64>,
    /// Paired with [`SUMMARY_QUANTILES`].
    pub quantiles: [Option<u32>; 4],
    pub censored_fraction: f64,
    pub mean_e2e_fidelity: Option<f64>,
    pub rate_hz: Option<f64>,
}

impl SummaryStats {
    pub fn from_results(results: &[TrialResult], delta_t_us: f64) -> Self {
        let censored = results.iter().filter(|r| r.censored()).count();
        let fids: Vec<f64> = results
            .iter()
            .filter_map(|r| r.e2e_fidelity.map(|f| f.value()))
            .collect();
        let mean = mean_steps(results);
        SummaryStats {
            trials: results.len(),
            mean_steps: mean,
            quantiles: SUMMARY_QUANTILES.map(|q| quantile(results, q)),
            censored_fraction: if results.is_empty() {
                0.0
            } else {
                censored as f64 / results.len() as f64
            },
            mean_e2e_fidelity: if fids.is_empty() {
                None
            } else {
                Some(fids.iter().sum::<f64>() / fids.len() as f64)
            },
            rate_hz: mean.and_then(|m| entanglement_rate(m, delta_t_us).ok()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvergenceVerdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub verdict: ConvergenceVerdict,
    pub tolerance: f64,
    /// Relative change of the mean, then of each compared quantile.
    pub relative_differences: Vec<f64>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.verdict == ConvergenceVerdict::Pass
    }

    pub fn max_relative_difference(&self) -> f64 {
        self.relative_differences
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

fn relative_difference(half: f64, full: f64) -> f64 {
    if half == full {
        0.0
    } else {
        (half - full).abs() / full.abs()
    }
}

/// Compares the mean and the median/0.9 quantiles of the first half of
/// `results` against the full sample.
pub fn convergence_check(results: &[TrialResult], tolerance: f64) -> ConvergenceReport {
    let completed = results.iter().filter(|r| !r.censored()).count();
    let half = &results[..results.len() / 2];
    let inconclusive = ConvergenceReport {
        verdict: ConvergenceVerdict::Inconclusive,
        tolerance,
        relative_differences: Vec::new(),
    };
    if completed < 4 {
        return inconclusive;
    }
    let (Some(m_half), Some(m_full)) = (mean_steps(half), mean_steps(results)) else {
        return inconclusive;
    };
    let mut diffs = vec![relative_difference(m_half, m_full)];
    for q in CONVERGENCE_QUANTILES {
        match (quantile(half, q), quantile(results, q)) {
            (Some(a), Some(b)) => diffs.push(relative_difference(a as f64, b as f64)),
            (None, None) => diffs.push(0.0),
            _ => diffs.push(f64::INFINITY),
        }
    }
    let verdict = if diffs.iter().all(|d| *d <= tolerance) {
        ConvergenceVerdict::Pass
    } else {
        ConvergenceVerdict::Fail
    };
    ConvergenceReport {
        verdict,
        tolerance,
        relative_differences: diffs,
    }
}

/// First step at which `a` overtakes `b` by more than `noise`, provided
/// `b` led by more than `noise` at some earlier step. Steps are 1-based.
pub fn crossover_step(cdf_a: &[f64], cdf_b: &[f64], noise: f64) -> Option<u32> {
    let mut b_led = false;
    for (i, (a, b)) in cdf_a.iter().zip(cdf_b).enumerate() {
        if b_led && *a > b + noise {
            return Some(i as u32 + 1);
        }
        if *b > a + noise {
            b_led = true;
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Series {
    PathA,
    PathB,
    First,
    All,
}

impl Series {
    pub const ALL: [Series; 4] = [Series::PathA, Series::PathB, Series::First, Series::All];

    pub fn name(self) -> &'static str {
        match self {
            Series::PathA => "path_a",
            Series::PathB => "path_b",
            Series::First => "first",
            Series::All => "all",
        }
    }
}

/// The four per-trial outcome sequences of a paired run.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesResults {
    pub path_a: Vec<TrialResult>,
    pub path_b: Vec<TrialResult>,
    pub first: Vec<TrialResult>,
    pub all: Vec<TrialResult>,
}

impl SeriesResults {
    pub fn from_paired(run: &PairedRun) -> Self {
        let zipped = run.path_a.iter().zip(&run.path_b);
        SeriesResults {
            path_a: run.path_a.clone(),
            path_b: run.path_b.clone(),
            first: zipped
                .clone()
                .map(|(a, b)| first_completion(*a, *b))
                .collect(),
            all: zipped.map(|(a, b)| all_completion(*a, *b)).collect(),
        }
    }

    pub fn get(&self, s: Series) -> &[TrialResult] {
        match s {
            Series::PathA => &self.path_a,
            Series::PathB => &self.path_b,
            Series::First => &self.first,
            Series::All => &self.all,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CdfTable {
    pub horizon: u32,
    pub trials: usize,
    /// Indexed like [`Series::ALL`].
    pub series: [Vec<f64>; 4],
    pub censored: [usize; 4],
}

impl CdfTable {
    /// Builds the table, truncated at the first step where every series
    /// reaches [`CDF_SATURATION`] or at `max_steps`.
    pub fn build(results: &SeriesResults, max_steps: u32) -> Result<Self> {
        let full = Series::ALL.map(|s| empirical_cdf(results.get(s), max_steps));
        let mut series: [Vec<f64>; 4] = Default::default();
        for (slot, cdf) in series.iter_mut().zip(full) {
            *slot = cdf?;
        }
        let horizon = (0..max_steps as usize)
            .find(|&i| series.iter().all(|s| s[i] >= CDF_SATURATION))
            .map_or(max_steps, |i| i as u32 + 1);
        for s in series.iter_mut() {
            s.truncate(horizon as usize);
        }
        Ok(CdfTable {
            horizon,
            trials: results.path_a.len(),
            series,
            censored: Series::ALL.map(|s| results.get(s).iter().filter(|r| r.censored()).count()),
        })
    }

    pub fn get(&self, s: Series) -> &[f64] {
        let i = Series::ALL.iter().position(|x| *x == s).unwrap();
        &self.series[i]
    }

    /// Value at 1-based step `n`, holding the last value past the horizon.
    pub fn at(&self, s: Series, n: u32) -> f64 {
        let cdf = self.get(s);
        if n == 0 {
            0.0
        } else {
            cdf[(n as usize).min(cdf.len()) - 1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::Fidelity;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn done(step: u32) -> TrialResult {
        TrialResult::completed(step, Fidelity::new(0.9).unwrap())
    }

    const C: TrialResult = TrialResult::CENSORED;

    #[test]
    fn cdf_direct_count() {
        let r = [done(2), done(2), done(3), C];
        assert_eq!(empirical_cdf(&r, 3).unwrap(), vec![0.0, 0.5, 0.75]);
        assert_eq!(empirical_cdf(&[C, C], 4).unwrap(), vec![0.0; 4]);
        assert!(empirical_cdf(&[], 3).is_err());
        assert!(empirical_cdf(&r, 0).is_err());
    }

    #[test]
    fn quantile_definition() {
        let r = [done(2), done(2), done(3), C];
        assert_eq!(quantile(&r, 0.5), Some(2));
        assert_eq!(quantile(&r, 0.51), Some(3));
        assert_eq!(quantile(&r, 0.75), Some(3));
        assert_eq!(quantile(&r, 0.9), None);
        let ten: Vec<_> = (1..=10).map(done).collect();
        assert_eq!(quantile(&ten, 0.9), Some(9));
        assert_eq!(quantile(&ten, 0.25), Some(3));
    }

    #[test]
    fn rate_examples() {
        assert_abs_diff_eq!(
            entanglement_rate(10.0, 106.0).unwrap(),
            943.396,
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(entanglement_rate(1.0, 1e6).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            entanglement_rate(2.0, 106.0).unwrap(),
            4716.98,
            epsilon = 1e-2
        );
        assert!(entanglement_rate(0.0, 106.0).is_err());
        assert!(entanglement_rate(3.0, -1.0).is_err());
    }

    #[test]
    fn dkw_width() {
        assert_abs_diff_eq!(dkw_half_width(100_000, 0.01), 0.00515, epsilon = 1e-5);
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(
            crossover_step(&[0.1, 0.3, 0.5], &[0.2, 0.35, 0.45], 0.01),
            Some(3)
        );
        assert_eq!(crossover_step(&[0.1, 0.2], &[0.3, 0.4], 0.01), None);
        assert_eq!(crossover_step(&[0.1, 0.2], &[0.1, 0.2], 0.01), None);
        // a never led b first, so no crossover
        assert_eq!(crossover_step(&[0.5, 0.6], &[0.1, 0.2], 0.01), None);
    }

    #[test]
    fn convergence_examples() {
        let constant = vec![done(7); 100];
        let rep = convergence_check(&constant, 0.02);
        assert!(rep.passed());
        assert_eq!(rep.max_relative_difference(), 0.0);

        let few = [done(1), done(2), C, C, C];
        assert_eq!(
            convergence_check(&few, 0.02).verdict,
            ConvergenceVerdict::Inconclusive
        );

        let skewed: Vec<_> = (0..10).map(|i| done(if i < 5 { 1 } else { 10 })).collect();
        assert_eq!(
            convergence_check(&skewed, 0.02).verdict,
            ConvergenceVerdict::Fail
        );
    }

    #[test]
    fn summary_fields() {
        let r = [done(2), done(4), C, C];
        let s = SummaryStats::from_results(&r, 106.0);
        assert_eq!(s.mean_steps, Some(3.0));
        assert_eq!(s.censored_fraction, 0.5);
        assert_eq!(s.quantiles, [Some(2), Some(4), None, None]);
        assert_abs_diff_eq!(s.rate_hz.unwrap(), 1.0 / (3.0 * 106e-6), epsilon = 1e-9);
        assert_abs_diff_eq!(s.mean_e2e_fidelity.unwrap(), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn table_truncates_at_saturation() {
        let run = PairedRun {
            path_a: vec![done(2), done(3)],
            path_b: vec![done(1), done(5)],
            audit: Default::default(),
        };
        let t = CdfTable::build(&SeriesResults::from_paired(&run), 100).unwrap();
        assert_eq!(t.horizon, 5);
        assert_eq!(t.get(Series::First), &[0.5, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(t.get(Series::All), &[0.0, 0.5, 0.5, 0.5, 1.0]);
        assert_eq!(t.at(Series::PathA, 50), 1.0);

        let stuck = PairedRun {
            path_a: vec![C],
            path_b: vec![done(1)],
            audit: Default::default(),
        };
        let t = CdfTable::build(&SeriesResults::from_paired(&stuck), 7).unwrap();
        assert_eq!(t.horizon, 7);
        assert_eq!(t.censored, [1, 0, 0, 1]);
    }

    fn arb_results() -> impl Strategy<Value = Vec<TrialResult>> {
        prop::collection::vec(
            prop_oneof![1 => Just(C), 4 => (1u32..40).prop_map(done)],
            1..200,
        )
    }

    proptest! {
        #[test]
        fn cdf_monotone_bounded(r in arb_results(), h in 1u32..60) {
            let cdf = empirical_cdf(&r, h).unwrap();
            prop_assert_eq!(cdf.len(), h as usize);
            for w in cdf.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let censored = r.iter().filter(|x| x.censored()).count() as f64 / r.len() as f64;
            prop_assert!(*cdf.last().unwrap() <= 1.0 - censored + 1e-12);
        }

        #[test]
        fn quantiles_nondecreasing(r in arb_results()) {
            let qs: Vec<_> = SUMMARY_QUANTILES.iter().map(|q| quantile(&r, *q)).collect();
            for w in qs.windows(2) {
                match (w[0], w[1]) {
                    (Some(a), Some(b)) => prop_assert!(a <= b),
                    (None, Some(_)) => prop_assert!(false),
                    _ => {}
                }
            }
        }

        #[test]
        fn quantile_agrees_with_cdf(r in arb_results(), q in 0.01f64..1.0) {
            let cdf = empirical_cdf(&r, 40).unwrap();
            let from_cdf = cdf.iter().position(|c| *c >= q - 1e-12).map(|i| i as u32 + 1);
            prop_assert_eq!(quantile(&r, q), from_cdf);
        }
    }
}
