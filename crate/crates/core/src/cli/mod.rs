//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible fidelity
//! threshold, 4 oracle state budget exceeded, 5 runtime failure.

pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::oracle::{mc_vs_oracle, DEFAULT_STATE_BUDGET};
use crate::stats::Series;
use crate::sweep::{
    classify_cdfs, classify_regime, preset, rate_comparison, run_experiment, ExperimentPreset,
    Preset, RegimeCell, RegimeOptions, RegimePreset, DEFAULT_REGIME_EPSILON, DEFAULT_REGIME_WINDOW,
};
use config::{RawConfig, RunConfig};

pub const THREADS_ENV: &str = "ENTROUTE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "entroute",
    version,
    about = "Entanglement routing simulator for repeater chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file of `key = value` lines.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub pe: Option<f64>,
    #[arg(long)]
    pub ps: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<u32>,
    #[arg(long)]
    pub fidelity_threshold: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one (pe, ps) point on both paths.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Run a named preset: figure4, figure5, figure6, figure7_t50, regime_map.
    Sweep {
        preset: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare path A's simulated CDF with the exact distribution.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 50)]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: usize,
    },
    /// Entanglement rate of realistic versus fair operation on path B.
    Rate {
        #[arg(long)]
        realistic: Option<PathBuf>,
        #[arg(long)]
        fair: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Spec(_) => 2,
        Error::InfeasibleThreshold { .. } => 3,
        Error::BudgetExceeded { .. } => 4,
        Error::State(_) | Error::Io(_) => 5,
    }
}

fn load(common: &CommonArgs, defaults: RawConfig) -> Result<RawConfig> {
    let mut raw = defaults;
    if let Some(path) = &common.config {
        raw.merge(&RawConfig::from_file(path)?);
    }
    for s in &common.set {
        raw.set_assignment(s)?;
    }
    if let Some(t) = common.trials {
        raw.set("trials", &t.to_string())?;
    }
    if let Some(s) = common.seed {
        raw.set("seed", &s.to_string())?;
    }
    if let Some(o) = &common.output_dir {
        raw.set("output_dir", &o.display().to_string())?;
    }
    Ok(raw)
}

fn apply_point(raw: &mut RawConfig, point: &PointArgs) -> Result<()> {
    if let Some(v) = point.pe {
        raw.set("pe", &v.to_string())?;
    }
    if let Some(v) = point.ps {
        raw.set("ps", &v.to_string())?;
    }
    if let Some(v) = point.cutoff {
        raw.set("cutoff", &v.to_string())?;
    }
    if let Some(v) = point.fidelity_threshold {
        raw.set("fidelity_threshold", &v.to_string())?;
    }
    Ok(())
}

/// Runs a parsed command, honouring `ENTROUTE_THREADS`.
pub fn execute(cli: &Cli) -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
                Error::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got '{v}'"
                ))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::State(e.to_string()))?;
            pool.install(|| dispatch(&cli.command))
        }
        Err(_) => dispatch(&cli.command),
    }
}

fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Run { common, point } => {
            let mut raw = load(common, RawConfig::default())?;
            apply_point(&mut raw, point)?;
            cmd_run(&RunConfig::resolve(&raw)?).map(|_| ())
        }
        Command::Sweep { preset, common } => {
            cmd_sweep(preset, &load(common, RawConfig::default())?).map(|_| ())
        }
        Command::Oracle {
            common,
            point,
            horizon,
            budget,
        } => {
            let mut raw = load(common, RawConfig::default())?;
            apply_point(&mut raw, point)?;
            cmd_oracle(&RunConfig::resolve(&raw)?, *horizon, *budget).map(|_| ())
        }
        Command::Rate {
            realistic,
            fair,
            common,
        } => {
            let mut r = realistic_defaults();
            if let Some(p) = realistic {
                r.merge(&RawConfig::from_file(p)?);
            }
            let mut f = fair_defaults();
            if let Some(p) = fair {
                f.merge(&RawConfig::from_file(p)?);
            }
            let r = load(common, r)?;
            let f = load(common, f)?;
            cmd_rate(&RunConfig::resolve(&r)?, &RunConfig::resolve(&f)?).map(|_| ())
        }
    }
}

/// Writes `cdf.csv` and `summary.txt` for one point. Returns the output
/// directory.
pub fn cmd_run(cfg: &RunConfig) -> Result<PathBuf> {
    let params = cfg.sim_params()?;
    let single = ExperimentPreset {
        name: "run".into(),
        cutoff: cfg.cutoff,
        panels: vec![(cfg.pe, cfg.ps)],
        trials: cfg.trials,
        seed: cfg.seed,
        path_a: cfg.path_a()?,
        path_b: cfg.path_b()?,
    };
    let panels = run_experiment(&single, &params)?;
    output::write_panel(&cfg.output_dir, cfg, &panels[0])?;
    Ok(cfg.output_dir.clone())
}

fn panel_dir(root: &Path, pe: f64, ps: f64) -> PathBuf {
    root.join(format!("pe{pe}_ps{ps}"))
}

/// Runs a named preset. Figure presets write one directory per panel and
/// classify their panels; `regime_map` classifies its whole grid.
pub fn cmd_sweep(name: &str, raw: &RawConfig) -> Result<PathBuf> {
    let preset = preset(name)?;
    let mut raw = raw.clone();
    raw.remove("fidelity_threshold");
    match preset {
        Preset::Figure(p) => sweep_figure(p, raw),
        Preset::Regime(p) => sweep_regime(p, raw),
    }
}

fn with_point(raw: &RawConfig, pe: f64, ps: f64, cutoff: u32) -> Result<RunConfig> {
    let mut raw = raw.clone();
    raw.set("pe", &pe.to_string())?;
    raw.set("ps", &ps.to_string())?;
    raw.set("cutoff", &cutoff.to_string())?;
    RunConfig::resolve(&raw)
}

fn defaulted(raw: &mut RawConfig, key: &str, value: u64) -> Result<()> {
    if raw.get(key).is_none() {
        raw.set(key, &value.to_string())?;
    }
    Ok(())
}

fn sweep_figure(mut preset: ExperimentPreset, mut raw: RawConfig) -> Result<PathBuf> {
    defaulted(&mut raw, "trials", preset.trials)?;
    defaulted(&mut raw, "seed", preset.seed)?;
    let (pe0, ps0) = preset.panels[0];
    let base_cfg = with_point(&raw, pe0, ps0, preset.cutoff)?;
    preset.trials = base_cfg.trials;
    preset.seed = base_cfg.seed;
    preset.path_a = base_cfg.path_a()?;
    preset.path_b = base_cfg.path_b()?;
    let panels = run_experiment(&preset, &base_cfg.sim_params()?)?;
    let root = base_cfg.output_dir.clone();
    let mut cells = Vec::new();
    for panel in &panels {
        let (pe, ps) = (panel.params.p_e, panel.params.p_s);
        let cfg = with_point(&raw, pe, ps, preset.cutoff)?;
        output::write_panel(&panel_dir(&root, pe, ps), &cfg, panel)?;
        let (verdict, stat) = classify_cdfs(
            panel.table.get(Series::PathA),
            panel.table.get(Series::PathB),
            DEFAULT_REGIME_WINDOW,
            DEFAULT_REGIME_EPSILON,
        );
        cells.push(RegimeCell {
            p_e: pe,
            p_s: ps,
            cutoff: preset.cutoff,
            verdict,
            stat,
        });
    }
    fs::write(root.join("regime_map.csv"), output::regime_csv(&cells))?;
    Ok(root)
}

fn sweep_regime(preset: RegimePreset, mut raw: RawConfig) -> Result<PathBuf> {
    defaulted(&mut raw, "trials", preset.trials)?;
    defaulted(&mut raw, "seed", preset.seed)?;
    let mut cells = Vec::new();
    let mut root = None;
    for &cutoff in &preset.cutoffs {
        let cfg = with_point(&raw, preset.pe_grid[0], preset.ps_grid[0], cutoff)?;
        let opts = RegimeOptions {
            trials: cfg.trials,
            seed: cfg.seed,
            ..RegimeOptions::default()
        };
        let map = classify_regime(
            &preset.pe_grid,
            &preset.ps_grid,
            &cfg.path_a()?,
            &cfg.path_b()?,
            &cfg.sim_params()?,
            &opts,
        )?;
        cells.extend(map.cells);
        root.get_or_insert(cfg.output_dir);
    }
    let root = root.expect("regime preset has cutoffs");
    fs::create_dir_all(&root)?;
    fs::write(root.join("regime_map.csv"), output::regime_csv(&cells))?;
    Ok(root)
}

/// Writes `oracle.csv` and `oracle.txt` comparing path A against the
/// exact distribution.
pub fn cmd_oracle(cfg: &RunConfig, horizon: u32, budget: usize) -> Result<PathBuf> {
    if horizon < 1 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let report = mc_vs_oracle(
        &cfg.path_a()?,
        &cfg.sim_params()?,
        cfg.trials,
        horizon,
        cfg.seed,
        budget,
    )?;
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(
        cfg.output_dir.join("oracle.csv"),
        output::oracle_csv(&report),
    )?;
    fs::write(
        cfg.output_dir.join("oracle.txt"),
        output::oracle_summary(cfg, &report),
    )?;
    Ok(cfg.output_dir.clone())
}

/// Defaults of the realistic mode of the `rate` command.
pub fn realistic_defaults() -> RawConfig {
    RawConfig::parse(
        "pe = 0.15\nps = 0.9\nfidelity_threshold = 0.95\nmemory_tau_steps = 100\ntau_steps = 100\n",
    )
    .expect("valid defaults")
}

/// Defaults of the fair mode of the `rate` command.
pub fn fair_defaults() -> RawConfig {
    RawConfig::parse(
        "pe = 0.15\nps = 1\nfidelity_threshold = 0.8\nmemory_tau_steps = 100\ntau_steps = 100\n\
         discard_on_swap_failure = false\napply_creation_noise = false\n",
    )
    .expect("valid defaults")
}

/// Writes `rate.txt` with both rates on path B and their ratio.
pub fn cmd_rate(realistic: &RunConfig, fair: &RunConfig) -> Result<PathBuf> {
    let report = rate_comparison(
        &realistic.path_b()?,
        &realistic.sim_params()?,
        &fair.sim_params()?,
        realistic.trials,
        realistic.seed,
    )?;
    let dir = &realistic.output_dir;
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("rate.txt"),
        output::rate_summary(realistic, fair, &report),
    )?;
    Ok(dir.clone())
}
