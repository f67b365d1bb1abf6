//! Discrete-time trial loop.
//!
//! Every step runs three phases in a fixed order:
//!
//! 1. **Generation.** Each adjacent pair with free facing slots gains an
//!    elementary link with probability `p_e`.
//! 2. **Swapping.** Intermediate nodes are scanned left to right. A node
//!    holding two links that were both heralded in an earlier step swaps
//!    with success probability `p_s`. Links formed during the current step
//!    (by generation or by an earlier swap in the same scan) wait.
//! 3. **Decay and discard.** Links heralded before this step decohere by
//!    one step; links below the fidelity threshold or older than the cutoff
//!    are dropped.
//!
//! A trial completes at the first step whose end state holds the
//! end-to-end link.
//!
//! Randomness is drawn from a ChaCha8 stream keyed by
//! `(master_seed, path_index)` with the trial index selecting the stream,
//! so results never depend on how trials are spread over worker threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{init_chain, ChainState, PathSpec, WernerLink};
use crate::error::{Error, Result};
use crate::fidelity::{meets_threshold, DecayModel, Fidelity, WernerParameter, MIXED_FIDELITY};

/// Default cap on steps per trial.
pub const DEFAULT_MAX_STEPS: u32 = 10_000;

/// Default step duration in microseconds.
pub const DEFAULT_DELTA_T_US: f64 = 106.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub p_e: f64,
    pub p_s: f64,
    pub model: DecayModel,
    pub f_th: Fidelity,
    /// Maximum link age in steps.
    pub cutoff: u32,
    pub max_steps: u32,
    pub delta_t_us: f64,
    /// When false, both links survive a failed swap.
    pub discard_on_swap_failure: bool,
    /// When false, newly generated links start at unit fidelity.
    pub apply_creation_noise: bool,
}

impl SimParams {
    pub fn new(p_e: f64, p_s: f64, model: DecayModel, f_th: Fidelity, cutoff: u32) -> Result<Self> {
        let params = SimParams {
            p_e,
            p_s,
            model,
            f_th,
            cutoff,
            max_steps: DEFAULT_MAX_STEPS.max(cutoff),
            delta_t_us: DEFAULT_DELTA_T_US,
            discard_on_swap_failure: true,
            apply_creation_noise: true,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_e", self.p_e), ("p_s", self.p_s)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} is not a probability")));
            }
        }
        if self.cutoff < 1 {
            return Err(Error::Domain("cutoff must be at least one step".into()));
        }
        if self.max_steps < self.cutoff {
            return Err(Error::Domain(format!(
                "max_steps {} is below the cutoff {}",
                self.max_steps, self.cutoff
            )));
        }
        if self.f_th.value() <= MIXED_FIDELITY {
            return Err(Error::Domain("fidelity threshold must exceed 1/4".into()));
        }
        if self.delta_t_us <= 0.0 || !self.delta_t_us.is_finite() {
            return Err(Error::Domain("step duration must be positive".into()));
        }
        Ok(())
    }

    pub fn with_probabilities(&self, p_e: f64, p_s: f64) -> Result<Self> {
        let next = SimParams {
            p_e,
            p_s,
            ..self.clone()
        };
        next.validate()?;
        Ok(next)
    }

    /// Werner parameter of a freshly generated elementary link.
    pub fn fresh_werner(&self) -> WernerParameter {
        if self.apply_creation_noise {
            WernerParameter::from_noise_units(1, &self.model)
        } else {
            WernerParameter::ONE
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds a sequence of integers into one well-mixed seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5eed_u64, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Deterministic random stream for one path of one trial.
#[derive(Clone, Debug)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        RngStream(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Child stream for `(trial_index, path_index)` under `master_seed`.
    pub fn for_trial(master_seed: u64, trial_index: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[master_seed, path_index]));
        rng.set_stream(trial_index);
        RngStream(rng)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.0.random::<f64>() < p
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Outcome of one trial on one path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    pub completion_step: Option<u32>,
    pub e2e_fidelity: Option<Fidelity>,
}

impl TrialResult {
    pub const CENSORED: TrialResult = TrialResult {
        completion_step: None,
        e2e_fidelity: None,
    };

    pub fn completed(step: u32, fidelity: Fidelity) -> Self {
        TrialResult {
            completion_step: Some(step),
            e2e_fidelity: Some(fidelity),
        }
    }

    pub fn censored(&self) -> bool {
        self.completion_step.is_none()
    }
}

/// Hooks for instrumenting the step loop.
pub trait StepObserver {
    fn on_swap(&mut self, _t: i64, _left: &WernerLink, _right: &WernerLink, _success: bool) {}
    fn after_step(&mut self, _t: i64, _chain: &ChainState) {}
}

impl StepObserver for () {}

/// Counts violations of the engine's end-of-step guarantees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Audit {
    pub steps: u64,
    pub swaps: u64,
    pub max_age_seen: i64,
    pub age_violations: u64,
    pub fidelity_violations: u64,
    pub deferral_violations: u64,
    pub slot_violations: u64,
    pub completions_below_threshold: u64,
}

impl Audit {
    pub fn merge(self, other: Audit) -> Audit {
        Audit {
            steps: self.steps + other.steps,
            swaps: self.swaps + other.swaps,
            max_age_seen: self.max_age_seen.max(other.max_age_seen),
            age_violations: self.age_violations + other.age_violations,
            fidelity_violations: self.fidelity_violations + other.fidelity_violations,
            deferral_violations: self.deferral_violations + other.deferral_violations,
            slot_violations: self.slot_violations + other.slot_violations,
            completions_below_threshold: self.completions_below_threshold
                + other.completions_below_threshold,
        }
    }

    pub fn violations(&self) -> u64 {
        self.age_violations
            + self.fidelity_violations
            + self.deferral_violations
            + self.slot_violations
            + self.completions_below_threshold
    }
}

/// [`StepObserver`] that checks every end-of-step state against the params.
#[derive(Debug)]
pub struct Auditor {
    f_th: Fidelity,
    cutoff: u32,
    pub audit: Audit,
}

impl Auditor {
    pub fn new(params: &SimParams) -> Self {
        Auditor {
            f_th: params.f_th,
            cutoff: params.cutoff,
            audit: Audit::default(),
        }
    }

    fn record_result(&mut self, result: &TrialResult) {
        if let Some(f) = result.e2e_fidelity {
            if f.value() < self.f_th.value() - crate::fidelity::THRESHOLD_SLACK {
                self.audit.completions_below_threshold += 1;
            }
        }
    }
}

impl StepObserver for Auditor {
    fn on_swap(&mut self, t: i64, left: &WernerLink, right: &WernerLink, _success: bool) {
        self.audit.swaps += 1;
        if left.formed_step >= t || right.formed_step >= t {
            self.audit.deferral_violations += 1;
        }
    }

    fn after_step(&mut self, t: i64, chain: &ChainState) {
        self.audit.steps += 1;
        if chain.check_slots().is_err() {
            self.audit.slot_violations += 1;
        }
        for link in chain.links() {
            let age = link.age(t);
            self.audit.max_age_seen = self.audit.max_age_seen.max(age);
            if age > self.cutoff as i64 {
                self.audit.age_violations += 1;
            }
            if !meets_threshold(link.w, self.f_th) {
                self.audit.fidelity_violations += 1;
            }
        }
    }
}

/// Advances `chain` through step `t`.
pub fn step<R: Rng + ?Sized, O: StepObserver + ?Sized>(
    chain: &mut ChainState,
    params: &SimParams,
    rng: &mut R,
    t: i64,
    observer: &mut O,
) {
    let fresh = params.fresh_werner();
    for (left, _) in chain.eligible_generation_pairs() {
        if rng.random::<f64>() < params.p_e {
            chain
                .create_link(left, t, fresh)
                .expect("eligible pair has free slots");
        }
    }

    for node in 1..chain.n_hops() {
        let (l, r) = match (chain.link_ending_at(node), chain.link_starting_at(node)) {
            (Some(l), Some(r)) if l.formed_step < t && r.formed_step < t => (*l, *r),
            _ => continue,
        };
        let success = rng.random::<f64>() < params.p_s;
        observer.on_swap(t, &l, &r, success);
        if success || params.discard_on_swap_failure {
            chain
                .apply_swap(node, success, t)
                .expect("node holds two links");
        }
    }

    chain.decay(&params.model, t);
    chain.discard_stale(params.f_th, params.cutoff, t);
    observer.after_step(t, chain);
}

pub fn run_trial<R: Rng + ?Sized>(spec: &PathSpec, params: &SimParams, rng: &mut R) -> TrialResult {
    run_trial_observed(spec, params, rng, &mut ())
}

pub fn run_trial_observed<R: Rng + ?Sized, O: StepObserver + ?Sized>(
    spec: &PathSpec,
    params: &SimParams,
    rng: &mut R,
    observer: &mut O,
) -> TrialResult {
    let mut chain = init_chain(spec, &params.model);
    for t in 1..=params.max_steps {
        step(&mut chain, params, rng, t as i64, observer);
        if let Some(link) = chain.e2e_link() {
            return TrialResult::completed(t, link.fidelity());
        }
    }
    TrialResult::CENSORED
}

/// Runs both paths of trial `trial_index` on independent child streams.
pub fn run_trial_pair(
    spec_a: &PathSpec,
    spec_b: &PathSpec,
    params: &SimParams,
    master_seed: u64,
    trial_index: u64,
) -> (TrialResult, TrialResult) {
    let (a, b, _) = audited_pair(spec_a, spec_b, params, master_seed, trial_index);
    (a, b)
}

fn audited_trial(
    spec: &PathSpec,
    params: &SimParams,
    master_seed: u64,
    trial_index: u64,
    path_index: u64,
) -> (TrialResult, Audit) {
    let mut rng = RngStream::for_trial(master_seed, trial_index, path_index);
    let mut auditor = Auditor::new(params);
    let result = run_trial_observed(spec, params, &mut rng, &mut auditor);
    auditor.record_result(&result);
    (result, auditor.audit)
}

fn audited_pair(
    spec_a: &PathSpec,
    spec_b: &PathSpec,
    params: &SimParams,
    master_seed: u64,
    trial_index: u64,
) -> (TrialResult, TrialResult, Audit) {
    let (a, audit_a) = audited_trial(spec_a, params, master_seed, trial_index, 0);
    let (b, audit_b) = audited_trial(spec_b, params, master_seed, trial_index, 1);
    (a, b, audit_a.merge(audit_b))
}

/// Results of many trials on one path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRun {
    pub results: Vec<TrialResult>,
    pub audit: Audit,
}

/// Results of many paired trials.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedRun {
    pub path_a: Vec<TrialResult>,
    pub path_b: Vec<TrialResult>,
    pub audit: Audit,
}

/// Runs `trials` independent trials of one path in parallel. Output is
/// ordered by trial index and independent of the worker count.
pub fn run_trials(
    spec: &PathSpec,
    params: &SimParams,
    master_seed: u64,
    path_index: u64,
    trials: u64,
) -> PathRun {
    let runs: Vec<(TrialResult, Audit)> = (0..trials)
        .into_par_iter()
        .map(|i| audited_trial(spec, params, master_seed, i, path_index))
        .collect();
    let audit = runs
        .iter()
        .fold(Audit::default(), |acc, (_, a)| acc.merge(*a));
    PathRun {
        results: runs.into_iter().map(|(r, _)| r).collect(),
        audit,
    }
}

/// Runs `trials` paired trials in parallel.
pub fn run_trial_pairs(
    spec_a: &PathSpec,
    spec_b: &PathSpec,
    params: &SimParams,
    master_seed: u64,
    trials: u64,
) -> PairedRun {
    let runs: Vec<(TrialResult, TrialResult, Audit)> = (0..trials)
        .into_par_iter()
        .map(|i| audited_pair(spec_a, spec_b, params, master_seed, i))
        .collect();
    let audit = runs.iter().fold(Audit::default(), |acc, r| acc.merge(r.2));
    let (path_a, path_b) = runs.into_iter().map(|(a, b, _)| (a, b)).unzip();
    PairedRun {
        path_a,
        path_b,
        audit,
    }
}
