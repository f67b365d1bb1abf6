//! Driving a run from a config file the way the command-line tool does,
//! writing `cdf.csv` and `summary.txt`.
//!
//!     cargo run --release --example config_run -- [output_dir]

use entroute::cli::cmd_run;
use entroute::cli::config::{RawConfig, RunConfig};

fn main() -> entroute::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "entroute-out/config_run".into());
    let mut raw = RawConfig::parse(
        "# operating point\n\
         pe = 0.15\n\
         ps = 0.9\n\
         cutoff = 10          # threshold is derived\n\
         trials = 5000\n",
    )?;
    raw.set("output_dir", &out)?;
    let cfg = RunConfig::resolve(&raw)?;
    println!("resolved config:\n{}", cfg.to_config_text());
    let dir = cmd_run(&cfg)?;
    let csv = std::fs::read_to_string(dir.join("cdf.csv"))?;
    for line in csv.lines().take(12) {
        println!("{line}");
    }
    println!("... written to {}", dir.display());
    Ok(())
}
