//! Exact completion-time distributions against the Monte Carlo engine.
//!
//!     cargo run --release --example oracle_check

use entroute::chain::PathSpec;
use entroute::oracle::{exact_cdf, mc_vs_oracle, DEFAULT_STATE_BUDGET};
use entroute::sweep::ModelSettings;
use entroute::Error;

fn main() -> entroute::Result<()> {
    let settings = ModelSettings::default();
    let cases = [
        ("1-hop", PathSpec::clean(1)?, 0.3, 1.0, 5),
        ("2-hop", PathSpec::clean(2)?, 0.5, 0.8, 5),
        (
            "4-hop with priors",
            PathSpec::parse(4, "1-2,3-5")?,
            0.4,
            0.9,
            3,
        ),
    ];
    for (name, spec, pe, ps, cutoff) in cases {
        let params = settings.params(pe, ps, cutoff)?;
        let r = mc_vs_oracle(&spec, &params, 100_000, 40, 42, DEFAULT_STATE_BUDGET)?;
        println!(
            "{name:<18} pe={pe} ps={ps} T={cutoff}: sup distance {:.5}, band {:.5} -> {}",
            r.sup_distance,
            r.band_half_width,
            if r.pass { "pass" } else { "FAIL" }
        );
    }

    let big = settings.params(0.3, 0.9, 20)?;
    match exact_cdf(&PathSpec::clean(4)?, &big, 100, DEFAULT_STATE_BUDGET) {
        Err(Error::BudgetExceeded { states, budget }) => {
            println!("4-hop T=20: {states} states exceed the budget of {budget}")
        }
        other => println!("4-hop T=20: {other:?}"),
    }
    Ok(())
}
