//! Experiment orchestration: figure presets, regime maps and the
//! realistic-versus-fair rate comparison.
//!
//! Every panel or grid cell gets its own seed derived from the master seed
//! and the cell coordinates, so outputs do not depend on scheduling.

use crate::chain::PathSpec;
use crate::engine::{derive_seed, run_trial_pairs, run_trials, Audit, SimParams};
use crate::error::{Error, Result};
use crate::fidelity::{
    cutoff_steps, fidelity_at_age, DecayModel, Fidelity, DEFAULT_MEMORY_TAU_STEPS,
    DEFAULT_TAU_STEPS,
};
use crate::stats::{
    convergence_check, CdfTable, ConvergenceReport, Series, SeriesResults, SummaryStats,
    DEFAULT_CONVERGENCE_TOLERANCE,
};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PRIORS_B: &str = "1-2,3-5";

/// Step window over which an early lead is judged.
pub const DEFAULT_REGIME_WINDOW: u32 = 6;
/// Minimum CDF gap that counts as a lead.
pub const DEFAULT_REGIME_EPSILON: f64 = 0.03;

pub const PRESET_NAMES: [&str; 5] = ["figure4", "figure5", "figure6", "figure7_t50", "regime_map"];

const FIGURE_PANELS: [(f64, f64); 4] = [(0.25, 0.8), (0.15, 0.9), (0.4, 0.95), (0.1, 0.5)];
const T50_PANELS: [(f64, f64); 4] = [(0.25, 0.75), (0.15, 0.9), (0.4, 0.95), (0.1, 0.5)];

pub const REGIME_PE_GRID: [f64; 7] = [0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5];
pub const REGIME_PS_GRID: [f64; 8] = [0.5, 0.6, 0.7, 0.75, 0.8, 0.9, 0.95, 1.0];
pub const REGIME_CUTOFFS: [u32; 4] = [5, 10, 20, 50];

/// Model settings shared by all cells of an experiment. The fidelity
/// threshold follows from the cutoff through `tau_steps`, while links in
/// memory decay with `memory_tau_steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSettings {
    pub tau_steps: f64,
    pub memory_tau_steps: f64,
    pub max_steps: u32,
    pub delta_t_us: f64,
    pub discard_on_swap_failure: bool,
    pub apply_creation_noise: bool,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            tau_steps: DEFAULT_TAU_STEPS,
            memory_tau_steps: DEFAULT_MEMORY_TAU_STEPS,
            max_steps: crate::engine::DEFAULT_MAX_STEPS,
            delta_t_us: crate::engine::DEFAULT_DELTA_T_US,
            discard_on_swap_failure: true,
            apply_creation_noise: true,
        }
    }
}

impl ModelSettings {
    pub fn threshold_for_cutoff(&self, cutoff: u32) -> Result<Fidelity> {
        Ok(fidelity_at_age(cutoff, &DecayModel::new(self.tau_steps)?))
    }

    pub fn cutoff_for_threshold(&self, f_th: Fidelity) -> Result<u32> {
        cutoff_steps(f_th, &DecayModel::new(self.tau_steps)?)
    }

    /// Params with the threshold derived from `cutoff`.
    pub fn params(&self, p_e: f64, p_s: f64, cutoff: u32) -> Result<SimParams> {
        self.params_with(p_e, p_s, self.threshold_for_cutoff(cutoff)?, cutoff)
    }

    pub fn params_with(
        &self,
        p_e: f64,
        p_s: f64,
        f_th: Fidelity,
        cutoff: u32,
    ) -> Result<SimParams> {
        let mut p = SimParams::new(
            p_e,
            p_s,
            DecayModel::new(self.memory_tau_steps)?,
            f_th,
            cutoff,
        )?;
        p.max_steps = self.max_steps;
        p.delta_t_us = self.delta_t_us;
        p.discard_on_swap_failure = self.discard_on_swap_failure;
        p.apply_creation_noise = self.apply_creation_noise;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    pub cutoff: u32,
    pub panels: Vec<(f64, f64)>,
    pub trials: u64,
    pub seed: u64,
    pub path_a: PathSpec,
    pub path_b: PathSpec,
}

impl ExperimentPreset {
    pub fn new(name: &str, cutoff: u32, panels: &[(f64, f64)]) -> Result<Self> {
        for &(pe, ps) in panels {
            if !(0.0..=1.0).contains(&pe) || !(0.0..=1.0).contains(&ps) {
                return Err(Error::Config(format!(
                    "panel ({pe}, {ps}) is not a probability pair"
                )));
            }
        }
        Ok(ExperimentPreset {
            name: name.to_string(),
            cutoff,
            panels: panels.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            path_a: PathSpec::clean(2)?,
            path_b: PathSpec::parse(4, DEFAULT_PRIORS_B)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimePreset {
    pub pe_grid: Vec<f64>,
    pub ps_grid: Vec<f64>,
    pub cutoffs: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    Figure(ExperimentPreset),
    Regime(RegimePreset),
}

pub fn preset(name: &str) -> Result<Preset> {
    let fig = |cutoff, panels: &[(f64, f64)]| {
        ExperimentPreset::new(name, cutoff, panels).map(Preset::Figure)
    };
    match name {
        "figure4" => fig(5, &FIGURE_PANELS),
        "figure5" => fig(10, &FIGURE_PANELS),
        "figure6" => fig(20, &FIGURE_PANELS),
        "figure7_t50" => fig(50, &T50_PANELS),
        "regime_map" => Ok(Preset::Regime(RegimePreset {
            pe_grid: REGIME_PE_GRID.to_vec(),
            ps_grid: REGIME_PS_GRID.to_vec(),
            cutoffs: REGIME_CUTOFFS.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        })),
        other => Err(Error::Config(format!(
            "unknown preset '{other}' (expected one of {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Seed for one `(p_e, p_s, cutoff)` cell.
pub fn cell_seed(master: u64, p_e: f64, p_s: f64, cutoff: u32) -> u64 {
    derive_seed(&[master, p_e.to_bits(), p_s.to_bits(), u64::from(cutoff)])
}

#[derive(Clone, Debug, PartialEq)]
pub struct PanelResult {
    pub params: SimParams,
    pub seed: u64,
    pub results: SeriesResults,
    pub table: CdfTable,
    /// Indexed like [`Series::ALL`].
    pub summaries: [SummaryStats; 4],
    pub convergence: [ConvergenceReport; 4],
    pub audit: Audit,
}

impl PanelResult {
    pub fn summary(&self, s: Series) -> &SummaryStats {
        &self.summaries[series_index(s)]
    }

    pub fn converged(&self, s: Series) -> &ConvergenceReport {
        &self.convergence[series_index(s)]
    }
}

fn series_index(s: Series) -> usize {
    Series::ALL.iter().position(|x| *x == s).unwrap()
}

/// Runs one `(p_e, p_s)` point for two paths.
pub fn run_panel(
    path_a: &PathSpec,
    path_b: &PathSpec,
    params: &SimParams,
    trials: u64,
    seed: u64,
) -> Result<PanelResult> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    params.validate()?;
    let run = run_trial_pairs(path_a, path_b, params, seed, trials);
    let results = SeriesResults::from_paired(&run);
    let table = CdfTable::build(&results, params.max_steps)?;
    let summaries =
        Series::ALL.map(|s| SummaryStats::from_results(results.get(s), params.delta_t_us));
    let convergence =
        Series::ALL.map(|s| convergence_check(results.get(s), DEFAULT_CONVERGENCE_TOLERANCE));
    Ok(PanelResult {
        params: params.clone(),
        seed,
        results,
        table,
        summaries,
        convergence,
        audit: run.audit,
    })
}

/// Runs every panel of `preset`, taking everything except `p_e`/`p_s`
/// from `base`.
pub fn run_experiment(preset: &ExperimentPreset, base: &SimParams) -> Result<Vec<PanelResult>> {
    preset
        .panels
        .iter()
        .map(|&(pe, ps)| {
            let params = base.with_probabilities(pe, ps)?;
            let seed = cell_seed(preset.seed, pe, ps, params.cutoff);
            run_panel(&preset.path_a, &preset.path_b, &params, preset.trials, seed)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    FourHopFavorable,
    TwoHopFavorable,
    Indistinct,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::FourHopFavorable => "four_hop_favorable",
            Verdict::TwoHopFavorable => "two_hop_favorable",
            Verdict::Indistinct => "indistinct",
        }
    }
}

/// Judges which path leads early on. `stat` is the largest-magnitude
/// value of `cdf_b - cdf_a` over the window, sign included.
pub fn classify_cdfs(cdf_a: &[f64], cdf_b: &[f64], window: u32, epsilon: f64) -> (Verdict, f64) {
    let diffs: Vec<f64> = cdf_a
        .iter()
        .zip(cdf_b)
        .take(window as usize)
        .map(|(a, b)| b - a)
        .collect();
    let stat = diffs
        .iter()
        .copied()
        .fold(0.0, |acc: f64, d| if d.abs() > acc.abs() { d } else { acc });
    let b_leads = diffs.iter().any(|d| *d >= epsilon);
    let a_leads = diffs.iter().any(|d| -d >= epsilon);
    let b_trails = diffs.iter().any(|d| -d > epsilon);
    let a_trails = diffs.iter().any(|d| *d > epsilon);
    let verdict = if b_leads && !b_trails {
        Verdict::FourHopFavorable
    } else if a_leads && !a_trails {
        Verdict::TwoHopFavorable
    } else {
        Verdict::Indistinct
    };
    (verdict, stat)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeCell {
    pub p_e: f64,
    pub p_s: f64,
    pub cutoff: u32,
    pub verdict: Verdict,
    pub stat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeMap {
    pub cutoff: u32,
    pub cells: Vec<RegimeCell>,
    pub audit: Audit,
}

impl RegimeMap {
    pub fn cell(&self, p_e: f64, p_s: f64) -> Option<&RegimeCell> {
        self.cells.iter().find(|c| c.p_e == p_e && c.p_s == p_s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeOptions {
    pub trials: u64,
    pub seed: u64,
    pub window: u32,
    pub epsilon: f64,
}

impl Default for RegimeOptions {
    fn default() -> Self {
        RegimeOptions {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            window: DEFAULT_REGIME_WINDOW,
            epsilon: DEFAULT_REGIME_EPSILON,
        }
    }
}

/// Classifies every grid cell at the cutoff carried by `base`.
pub fn classify_regime(
    pe_grid: &[f64],
    ps_grid: &[f64],
    path_a: &PathSpec,
    path_b: &PathSpec,
    base: &SimParams,
    opts: &RegimeOptions,
) -> Result<RegimeMap> {
    if pe_grid.is_empty() || ps_grid.is_empty() {
        return Err(Error::Config("regime grids must be non-empty".into()));
    }
    let horizon = opts.window.max(1);
    let mut cells = Vec::with_capacity(pe_grid.len() * ps_grid.len());
    let mut audit = Audit::default();
    for &pe in pe_grid {
        for &ps in ps_grid {
            let params = base.with_probabilities(pe, ps)?;
            let seed = cell_seed(opts.seed, pe, ps, params.cutoff);
            let run = run_trial_pairs(path_a, path_b, &params, seed, opts.trials);
            let a = crate::stats::empirical_cdf(&run.path_a, horizon)?;
            let b = crate::stats::empirical_cdf(&run.path_b, horizon)?;
            let (verdict, stat) = classify_cdfs(&a, &b, opts.window, opts.epsilon);
            audit = audit.merge(run.audit);
            cells.push(RegimeCell {
                p_e: pe,
                p_s: ps,
                cutoff: params.cutoff,
                verdict,
                stat,
            });
        }
    }
    Ok(RegimeMap {
        cutoff: base.cutoff,
        cells,
        audit,
    })
}

/// Fair-mode threshold.
pub const FAIR_THRESHOLD: f64 = 0.8;

/// Defaults for the rate comparison: the four-hop path at `p_e = 0.15`
/// with memories of `tau = 100` steps. Realistic mode uses
/// `p_s = 0.9, F_th = 0.95`; fair mode uses `p_s = 1`, keeps links after
/// failed swaps, creates perfect links and accepts `F_th = 0.8`.
pub fn default_rate_params() -> Result<(SimParams, SimParams)> {
    let realistic_settings = ModelSettings {
        memory_tau_steps: DEFAULT_TAU_STEPS,
        ..ModelSettings::default()
    };
    let fair_settings = ModelSettings {
        discard_on_swap_failure: false,
        apply_creation_noise: false,
        ..realistic_settings.clone()
    };
    let f_real = Fidelity::new(0.95)?;
    let f_fair = Fidelity::new(FAIR_THRESHOLD)?;
    let realistic = realistic_settings.params_with(
        0.15,
        0.9,
        f_real,
        realistic_settings.cutoff_for_threshold(f_real)?,
    )?;
    let fair = fair_settings.params_with(
        0.15,
        1.0,
        f_fair,
        fair_settings.cutoff_for_threshold(f_fair)?,
    )?;
    Ok((realistic, fair))
}

/// Rejects fair-mode params that do not match the fair comparison.
pub fn check_fair_mode(params: &SimParams) -> Result<()> {
    if params.p_s != 1.0 {
        return Err(Error::Config(format!(
            "fair mode needs ps = 1, got {}",
            params.p_s
        )));
    }
    if params.discard_on_swap_failure {
        return Err(Error::Config(
            "fair mode needs discard_on_swap_failure = false".into(),
        ));
    }
    if (params.f_th.value() - FAIR_THRESHOLD).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "fair mode needs fidelity_threshold = {FAIR_THRESHOLD}, got {}",
            params.f_th.value()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub realistic: SummaryStats,
    pub fair: SummaryStats,
    /// Fair rate over realistic rate.
    pub ratio: Option<f64>,
    pub audit: Audit,
}

/// Rates of both modes on `path`, sharing random streams.
pub fn rate_comparison(
    path: &PathSpec,
    realistic: &SimParams,
    fair: &SimParams,
    trials: u64,
    seed: u64,
) -> Result<RateReport> {
    realistic.validate()?;
    fair.validate()?;
    check_fair_mode(fair)?;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let r = run_trials(path, realistic, seed, 1, trials);
    let f = run_trials(path, fair, seed, 1, trials);
    let realistic_stats = SummaryStats::from_results(&r.results, realistic.delta_t_us);
    let fair_stats = SummaryStats::from_results(&f.results, fair.delta_t_us);
    let ratio = match (fair_stats.rate_hz, realistic_stats.rate_hz) {
        (Some(a), Some(b)) => Some(a / b),
        _ => None,
    };
    Ok(RateReport {
        realistic: realistic_stats,
        fair: fair_stats,
        ratio,
        audit: r.audit.merge(f.audit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in PRESET_NAMES {
            preset(name).unwrap();
        }
        assert!(matches!(preset("nosuch"), Err(Error::Config(_))));
        let Preset::Figure(p) = preset("figure7_t50").unwrap() else {
            panic!("figure preset expected");
        };
        assert_eq!(p.cutoff, 50);
        assert_eq!(p.panels[0], (0.25, 0.75));
        assert!(ExperimentPreset::new("bad", 5, &[(1.5, 0.5)]).is_err());
    }

    #[test]
    fn threshold_follows_cutoff() {
        let s = ModelSettings::default();
        assert!((s.threshold_for_cutoff(10).unwrap().value() - 0.921876).abs() < 1e-6);
        assert_eq!(
            s.cutoff_for_threshold(Fidelity::new(0.95).unwrap())
                .unwrap(),
            5
        );
        assert_eq!(
            s.cutoff_for_threshold(Fidelity::new(0.8).unwrap()).unwrap(),
            30
        );
    }

    #[test]
    fn classification_rules() {
        let a = [0.0, 0.02, 0.05, 0.1];
        assert_eq!(
            classify_cdfs(&a, &[0.0, 0.0, 0.1, 0.2], 6, 0.03).0,
            Verdict::FourHopFavorable
        );
        assert_eq!(
            classify_cdfs(&a, &[0.0, 0.0, 0.0, 0.0], 6, 0.03).0,
            Verdict::TwoHopFavorable
        );
        assert_eq!(classify_cdfs(&a, &a, 6, 0.03), (Verdict::Indistinct, 0.0));
        // leads both ways within the window
        let (v, stat) = classify_cdfs(&[0.1, 0.1, 0.1], &[0.0, 0.2, 0.25], 6, 0.03);
        assert_eq!(v, Verdict::Indistinct);
        assert!((stat - 0.15).abs() < 1e-12);
        // a late lead outside the window is ignored
        assert_eq!(
            classify_cdfs(&[0.0, 0.0], &[0.0, 0.5], 1, 0.03).0,
            Verdict::Indistinct
        );
    }

    #[test]
    fn single_trial_panel() {
        let Preset::Figure(mut p) = preset("figure4").unwrap() else {
            unreachable!()
        };
        p.trials = 1;
        let base = ModelSettings::default().params(0.5, 0.5, p.cutoff).unwrap();
        let out = run_experiment(&p, &base).unwrap();
        assert_eq!(out.len(), 4);
        for panel in &out {
            assert_eq!(panel.table.trials, 1);
            assert!(panel.table.horizon >= 1);
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let Preset::Figure(mut p) = preset("figure5").unwrap() else {
            unreachable!()
        };
        p.trials = 300;
        let base = ModelSettings::default().params(0.5, 0.5, p.cutoff).unwrap();
        let x = run_experiment(&p, &base).unwrap();
        let y = run_experiment(&p, &base).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn fair_mode_checks() {
        let (real, fair) = default_rate_params().unwrap();
        assert_eq!(real.cutoff, 5);
        assert_eq!(fair.cutoff, 30);
        check_fair_mode(&fair).unwrap();
        assert!(check_fair_mode(&real).is_err());
        let mut bad = fair.clone();
        bad.p_s = 0.9;
        assert!(check_fair_mode(&bad).is_err());
        bad = fair.clone();
        bad.discard_on_swap_failure = true;
        assert!(check_fair_mode(&bad).is_err());
    }

    #[test]
    fn fair_mode_beats_realistic() {
        let (real, fair) = default_rate_params().unwrap();
        let path = PathSpec::parse(4, DEFAULT_PRIORS_B).unwrap();
        let rep = rate_comparison(&path, &real, &fair, 2_000, 5).unwrap();
        assert!(rep.ratio.unwrap() > 1.0);

        let mut fast = fair.clone();
        fast.p_e = 1.0;
        let rep = rate_comparison(&path, &real, &fast, 50, 5).unwrap();
        assert_eq!(rep.fair.mean_steps, Some(3.0));
    }
}
