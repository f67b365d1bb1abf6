//! Exact completion-time distributions for small chains.
//!
//! The oracle pushes a probability distribution over symbolic chain states
//! through the step rules, enumerating every Bernoulli branch. A link is
//! tracked as its interval, its age, and its accumulated noise units `k`
//! (its Werner parameter is `exp(-k/tau)`), so identical states merge
//! exactly and the state space stays finite.
//!
//! This is written separately from the engine on purpose: agreement
//! between the two is evidence that both follow the same rules.

use std::collections::BTreeMap;

use crate::chain::PathSpec;
use crate::engine::{run_trials, SimParams};
use crate::error::{Error, Result};
use crate::fidelity::{meets_threshold, WernerParameter};
use crate::stats::{dkw_half_width, empirical_cdf};

pub const DEFAULT_STATE_BUDGET: usize = 10_000;

/// Significance level of the DKW band used for verdicts.
pub const DKW_ALPHA: f64 = 0.01;

const MASS_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct SymLink {
    left: usize,
    right: usize,
    age: u32,
    units: u32,
    /// Formed during the step being evaluated.
    fresh: bool,
}

type SymState = Vec<SymLink>;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactCdf {
    /// `values[n-1] = P(completion step <= n)`.
    pub values: Vec<f64>,
    /// Largest number of distinct in-flight states seen at any step.
    pub peak_states: usize,
}

impl ExactCdf {
    pub fn at(&self, n: u32) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.values[(n as usize).min(self.values.len()) - 1]
        }
    }

    pub fn horizon(&self) -> u32 {
        self.values.len() as u32
    }
}

fn has_left_end(state: &SymState, node: usize) -> bool {
    state.iter().any(|l| l.right == node)
}

fn has_right_end(state: &SymState, node: usize) -> bool {
    state.iter().any(|l| l.left == node)
}

fn initial_state(spec: &PathSpec) -> SymState {
    let mut s: SymState = spec
        .priors()
        .iter()
        .map(|p| SymLink {
            left: p.left,
            right: p.right,
            age: p.initial_age,
            units: (p.right - p.left) as u32 + p.initial_age,
            fresh: false,
        })
        .collect();
    s.sort();
    s
}

fn push(out: &mut Vec<(SymState, f64)>, state: SymState, p: f64) {
    if p > 0.0 {
        out.push((state, p));
    }
}

/// One step of the symbolic dynamics for a single state.
fn successors(state: &SymState, n: usize, params: &SimParams, out: &mut Vec<(SymState, f64)>) {
    let fresh_units = u32::from(params.apply_creation_noise);
    let mut branches: Vec<(SymState, f64)> = vec![(
        state
            .iter()
            .map(|l| SymLink {
                age: l.age + 1,
                ..*l
            })
            .collect(),
        1.0,
    )];

    // Generation on pairs whose facing slots are free at step start.
    for i in 0..n {
        if has_right_end(state, i) || has_left_end(state, i + 1) {
            continue;
        }
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (s, p) in branches {
            let mut made = s.clone();
            made.push(SymLink {
                left: i,
                right: i + 1,
                age: 0,
                units: fresh_units,
                fresh: true,
            });
            push(&mut next, made, p * params.p_e);
            push(&mut next, s, p * (1.0 - params.p_e));
        }
        branches = next;
    }

    // Swaps, scanning nodes left to right.
    for node in 1..n {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (s, p) in branches {
            let l = s.iter().position(|x| x.right == node && !x.fresh);
            let r = s.iter().position(|x| x.left == node && !x.fresh);
            let (Some(li), Some(ri)) = (l, r) else {
                next.push((s, p));
                continue;
            };
            let (a, b) = (s[li], s[ri]);
            let rest: SymState = s
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != li && *j != ri)
                .map(|(_, x)| *x)
                .collect();
            let mut merged = rest.clone();
            merged.push(SymLink {
                left: a.left,
                right: b.right,
                age: a.age.max(b.age),
                units: a.units + b.units,
                fresh: true,
            });
            push(&mut next, merged, p * params.p_s);
            let failed = if params.discard_on_swap_failure {
                rest
            } else {
                s
            };
            push(&mut next, failed, p * (1.0 - params.p_s));
        }
        branches = next;
    }

    // Decay links that existed before this step, then discard.
    for (s, p) in branches {
        let mut kept: SymState = s
            .into_iter()
            .map(|mut l| {
                if !l.fresh {
                    l.units += 1;
                }
                l.fresh = false;
                l
            })
            .filter(|l| {
                let w = WernerParameter::from_noise_units(l.units, &params.model);
                l.age <= params.cutoff && meets_threshold(w, params.f_th)
            })
            .collect();
        kept.sort();
        out.push((kept, p));
    }
}

/// Exact `P(completion <= n)` for `n` in `1..=horizon`.
pub fn exact_cdf(
    spec: &PathSpec,
    params: &SimParams,
    horizon: u32,
    budget: usize,
) -> Result<ExactCdf> {
    params.validate()?;
    let n = spec.n_hops();
    let mut dist: BTreeMap<SymState, f64> = BTreeMap::new();
    dist.insert(initial_state(spec), 1.0);
    let mut completed = 0.0;
    let mut values = Vec::with_capacity(horizon as usize);
    let mut peak = 1;
    let mut scratch = Vec::new();

    for _ in 0..horizon {
        let mut next: BTreeMap<SymState, f64> = BTreeMap::new();
        for (state, p) in &dist {
            scratch.clear();
            successors(state, n, params, &mut scratch);
            for (s, q) in scratch.drain(..) {
                let mass = p * q;
                if s.iter().any(|l| l.left == 0 && l.right == n) {
                    completed += mass;
                } else {
                    *next.entry(s).or_insert(0.0) += mass;
                }
            }
            if next.len() > budget {
                return Err(Error::BudgetExceeded {
                    states: next.len(),
                    budget,
                });
            }
        }
        let in_flight: f64 = next.values().sum();
        if (in_flight + completed - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::State(format!(
                "oracle lost probability mass: {}",
                in_flight + completed
            )));
        }
        peak = peak.max(next.len());
        values.push(completed.min(1.0));
        dist = next;
    }
    Ok(ExactCdf {
        values,
        peak_states: peak,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub trials: u64,
    pub horizon: u32,
    pub exact: Vec<f64>,
    pub empirical: Vec<f64>,
    pub sup_distance: f64,
    pub band_half_width: f64,
    pub pass: bool,
}

/// Runs the engine and compares its empirical CDF against [`exact_cdf`].
pub fn mc_vs_oracle(
    spec: &PathSpec,
    params: &SimParams,
    trials: u64,
    horizon: u32,
    seed: u64,
    budget: usize,
) -> Result<OracleReport> {
    let exact = exact_cdf(spec, params, horizon, budget)?;
    let empirical = if trials == 0 {
        vec![0.0; horizon as usize]
    } else {
        let run = run_trials(spec, params, seed, 0, trials);
        empirical_cdf(&run.results, horizon)?
    };
    let sup_distance = exact
        .values
        .iter()
        .zip(&empirical)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let band_half_width = dkw_half_width(trials, DKW_ALPHA);
    Ok(OracleReport {
        trials,
        horizon,
        exact: exact.values,
        empirical,
        sup_distance,
        band_half_width,
        pass: trials > 0 && sup_distance <= band_half_width,
    })
}
