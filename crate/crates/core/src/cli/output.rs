//! Output files. CSV values use six decimals and LF line endings so that
//! identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::RunConfig;
use crate::error::Result;
use crate::oracle::OracleReport;
use crate::stats::{CdfTable, Series, SummaryStats, SUMMARY_QUANTILES};
use crate::sweep::{PanelResult, RateReport, RegimeCell};

pub const CDF_HEADER: &str = "step,cdf_path_a,cdf_path_b,cdf_first,cdf_all";
pub const REGIME_HEADER: &str = "pe,ps,T,verdict,stat";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

pub fn cdf_csv(table: &CdfTable) -> String {
    let mut out = String::with_capacity(64 * table.horizon as usize);
    out.push_str(CDF_HEADER);
    out.push('\n');
    for n in 1..=table.horizon {
        let _ = write!(out, "{n}");
        for s in Series::ALL {
            let _ = write!(out, ",{:.6}", table.at(s, n));
        }
        out.push('\n');
    }
    out
}

fn summary_lines(out: &mut String, prefix: &str, s: &SummaryStats) {
    let _ = writeln!(out, "{prefix}.trials={}", s.trials);
    let _ = writeln!(out, "{prefix}.mean_steps={}", opt(s.mean_steps));
    for (q, v) in SUMMARY_QUANTILES.iter().zip(s.quantiles) {
        let _ = writeln!(out, "{prefix}.q{}={}", (q * 100.0).round(), opt(v));
    }
    let _ = writeln!(out, "{prefix}.censored_fraction={}", s.censored_fraction);
    let _ = writeln!(
        out,
        "{prefix}.mean_e2e_fidelity={}",
        opt(s.mean_e2e_fidelity)
    );
    let _ = writeln!(out, "{prefix}.rate_hz={}", opt(s.rate_hz));
}

fn config_lines(out: &mut String, cfg: &RunConfig) {
    for (k, v) in cfg.entries() {
        let _ = writeln!(out, "config.{k}={v}");
    }
}

pub fn panel_summary(cfg: &RunConfig, panel: &PanelResult) -> String {
    let mut out = String::new();
    config_lines(&mut out, cfg);
    let _ = writeln!(out, "horizon={}", panel.table.horizon);
    for s in Series::ALL {
        summary_lines(&mut out, s.name(), panel.summary(s));
        let conv = panel.converged(s);
        let _ = writeln!(out, "{}.convergence_pass={}", s.name(), conv.passed());
        let _ = writeln!(
            out,
            "{}.convergence_max_relative_difference={}",
            s.name(),
            conv.max_relative_difference()
        );
    }
    let _ = writeln!(out, "audit.steps={}", panel.audit.steps);
    let _ = writeln!(out, "audit.max_link_age={}", panel.audit.max_age_seen);
    let _ = writeln!(out, "audit.violations={}", panel.audit.violations());
    out
}

pub fn write_panel(dir: &Path, cfg: &RunConfig, panel: &PanelResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("cdf.csv"), cdf_csv(&panel.table))?;
    fs::write(dir.join("summary.txt"), panel_summary(cfg, panel))?;
    Ok(())
}

pub fn regime_csv(cells: &[RegimeCell]) -> String {
    let mut out = String::from(REGIME_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6}",
            c.p_e,
            c.p_s,
            c.cutoff,
            c.verdict.name(),
            c.stat
        );
    }
    out
}

pub fn oracle_csv(report: &OracleReport) -> String {
    let mut out = String::from("step,exact,empirical,abs_diff\n");
    for (i, (e, m)) in report.exact.iter().zip(&report.empirical).enumerate() {
        let _ = writeln!(out, "{},{:.6},{:.6},{:.6}", i + 1, e, m, (e - m).abs());
    }
    out
}

pub fn oracle_summary(cfg: &RunConfig, report: &OracleReport) -> String {
    let mut out = String::new();
    config_lines(&mut out, cfg);
    let _ = writeln!(out, "horizon={}", report.horizon);
    let _ = writeln!(out, "trials={}", report.trials);
    let _ = writeln!(out, "sup_distance={}", report.sup_distance);
    let _ = writeln!(out, "dkw_half_width={}", report.band_half_width);
    let _ = writeln!(out, "verdict={}", if report.pass { "pass" } else { "fail" });
    out
}

pub fn rate_summary(realistic: &RunConfig, fair: &RunConfig, report: &RateReport) -> String {
    let mut out = String::new();
    for (prefix, cfg) in [("realistic", realistic), ("fair", fair)] {
        for (k, v) in cfg.entries() {
            let _ = writeln!(out, "{prefix}.config.{k}={v}");
        }
    }
    summary_lines(&mut out, "realistic", &report.realistic);
    summary_lines(&mut out, "fair", &report.fair);
    let _ = writeln!(out, "ratio={}", opt(report.ratio));
    out
}
