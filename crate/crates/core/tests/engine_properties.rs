use entroute::chain::PathSpec;
use entroute::engine::{run_trial_pairs, run_trials};
use entroute::oracle::{exact_cdf, DEFAULT_STATE_BUDGET};
use entroute::stats::{
    crossover_step, dkw_half_width, empirical_cdf, mean_steps, CdfTable, Series, SeriesResults,
    DEFAULT_CROSSOVER_NOISE,
};
use entroute::sweep::{ModelSettings, DEFAULT_PRIORS_B};

fn four_hop() -> PathSpec {
    PathSpec::parse(4, DEFAULT_PRIORS_B).unwrap()
}

#[test]
fn one_hop_matches_geometric_within_dkw_band() {
    let params = ModelSettings::default().params(0.3, 1.0, 5).unwrap();
    let run = run_trials(&PathSpec::clean(1).unwrap(), &params, 11, 0, 100_000);
    let cdf = empirical_cdf(&run.results, 60).unwrap();
    let sup = cdf
        .iter()
        .enumerate()
        .map(|(i, c)| (c - (1.0 - 0.7f64.powi(i as i32 + 1))).abs())
        .fold(0.0, f64::max);
    assert!(sup <= dkw_half_width(100_000, 0.01), "sup {sup}");
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let params = ModelSettings::default().params(0.2, 0.85, 10).unwrap();
    let a = PathSpec::clean(2).unwrap();
    let runs: Vec<_> = [1, 3, 8]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| run_trial_pairs(&a, &four_hop(), &params, 99, 3_000))
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn higher_probabilities_do_not_slow_completion() {
    // Common random numbers: the same seed drives both settings.
    let settings = ModelSettings::default();
    let spec = four_hop();
    let mean = |pe, ps| {
        let p = settings.params(pe, ps, 10).unwrap();
        mean_steps(&run_trials(&spec, &p, 5, 1, 10_000).results).unwrap()
    };
    let base = mean(0.2, 0.8);
    for (pe, ps) in [(0.3, 0.8), (0.2, 0.9), (0.4, 1.0)] {
        let m = mean(pe, ps);
        assert!(m <= base * 1.02, "({pe},{ps}) mean {m} vs base {base}");
    }
}

#[test]
fn completions_respect_threshold_and_age() {
    let settings = ModelSettings::default();
    for cutoff in [5, 10, 20] {
        let p = settings.params(0.3, 0.9, cutoff).unwrap();
        let run = run_trial_pairs(&PathSpec::clean(2).unwrap(), &four_hop(), &p, 1, 5_000);
        assert_eq!(run.audit.violations(), 0, "{:?}", run.audit);
        assert!(run.audit.max_age_seen <= cutoff as i64);
        for r in run.path_a.iter().chain(&run.path_b) {
            if let Some(f) = r.e2e_fidelity {
                assert!(f.value() >= p.f_th.value() - 1e-12);
            }
        }
    }
}

#[test]
fn paired_cdfs_follow_independence_identities() {
    let p = ModelSettings::default().params(0.25, 0.8, 10).unwrap();
    let run = run_trial_pairs(&PathSpec::clean(2).unwrap(), &four_hop(), &p, 3, 10_000);
    let t = CdfTable::build(&SeriesResults::from_paired(&run), p.max_steps).unwrap();
    for n in 1..=t.horizon {
        let (a, b) = (t.at(Series::PathA, n), t.at(Series::PathB, n));
        let (f, l) = (t.at(Series::First, n), t.at(Series::All, n));
        assert!(f >= a.max(b) && l <= a.min(b));
        assert!((f - (1.0 - (1.0 - a) * (1.0 - b))).abs() <= 0.02);
        assert!((l - a * b).abs() <= 0.02);
    }
}

#[test]
fn four_hop_with_priors_matches_oracle() {
    let p = ModelSettings::default().params(0.35, 0.85, 3).unwrap();
    let exact = exact_cdf(&four_hop(), &p, 40, DEFAULT_STATE_BUDGET).unwrap();
    let run = run_trials(&four_hop(), &p, 21, 1, 50_000);
    let emp = empirical_cdf(&run.results, 40).unwrap();
    let sup = exact
        .values
        .iter()
        .zip(&emp)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(sup <= dkw_half_width(50_000, 0.01), "sup {sup}");
}

#[test]
fn crossover_is_stable_under_reseeding() {
    let p = ModelSettings::default().params(0.15, 0.9, 20).unwrap();
    let steps: Vec<u32> = [1u64, 2, 3]
        .iter()
        .map(|&seed| {
            let run = run_trial_pairs(&PathSpec::clean(2).unwrap(), &four_hop(), &p, seed, 10_000);
            let a = empirical_cdf(&run.path_a, 60).unwrap();
            let b = empirical_cdf(&run.path_b, 60).unwrap();
            crossover_step(&a, &b, DEFAULT_CROSSOVER_NOISE).expect("lead change")
        })
        .collect();
    let spread = steps.iter().max().unwrap() - steps.iter().min().unwrap();
    assert!(spread <= 6, "{steps:?}");
}
