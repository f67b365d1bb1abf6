//! Entanglement rate of the four-hop path under realistic operation and
//! under the idealised "fair" assumptions (no swap failures, no discard,
//! perfect fresh links, relaxed threshold).
//!
//!     cargo run --release --example rate_comparison

use entroute::chain::PathSpec;
use entroute::sweep::{default_rate_params, rate_comparison};

fn main() -> entroute::Result<()> {
    let (realistic, fair) = default_rate_params()?;
    let path = PathSpec::parse(4, "1-2,3-5")?;
    for pe in [0.15, 0.3, 0.6] {
        let r = realistic.with_probabilities(pe, realistic.p_s)?;
        let f = fair.with_probabilities(pe, 1.0)?;
        let rep = rate_comparison(&path, &r, &f, 10_000, 42)?;
        println!(
            "pe={pe}: realistic {:.1} Hz (T={}), fair {:.1} Hz (T={}), ratio {:.1}",
            rep.realistic.rate_hz.unwrap_or(0.0),
            r.cutoff,
            rep.fair.rate_hz.unwrap_or(0.0),
            f.cutoff,
            rep.ratio.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
