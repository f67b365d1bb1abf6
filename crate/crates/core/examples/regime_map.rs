//! Which (pe, ps) cells favour the four-hop path with prior links.
//!
//!     cargo run --release --example regime_map -- [cutoff] [trials]

use entroute::chain::PathSpec;
use entroute::sweep::{
    classify_regime, ModelSettings, RegimeOptions, Verdict, REGIME_PE_GRID, REGIME_PS_GRID,
};

fn main() -> entroute::Result<()> {
    let mut args = std::env::args().skip(1);
    let cutoff = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(2_000);
    let base = ModelSettings::default().params(0.5, 0.5, cutoff)?;
    let opts = RegimeOptions {
        trials,
        ..RegimeOptions::default()
    };
    let map = classify_regime(
        &REGIME_PE_GRID,
        &REGIME_PS_GRID,
        &PathSpec::clean(2)?,
        &PathSpec::parse(4, "1-2,3-5")?,
        &base,
        &opts,
    )?;

    println!(
        "T={cutoff}, {trials} trials per cell (4 = four-hop favourable, 2 = two-hop, . = neither)"
    );
    print!("pe\\ps");
    for ps in REGIME_PS_GRID {
        print!("{ps:>6}");
    }
    println!();
    for pe in REGIME_PE_GRID {
        print!("{pe:<5}");
        for ps in REGIME_PS_GRID {
            let mark = match map.cell(pe, ps).map(|c| c.verdict) {
                Some(Verdict::FourHopFavorable) => "4",
                Some(Verdict::TwoHopFavorable) => "2",
                _ => ".",
            };
            print!("{mark:>6}");
        }
        println!();
    }
    Ok(())
}
