//! One figure preset end to end: four panels, four CDF series each,
//! summaries, convergence and crossover detection.
//!
//!     cargo run --release --example figure_sweep -- [figure4|figure5|figure6|figure7_t50]

use entroute::stats::{crossover_step, Series, DEFAULT_CROSSOVER_NOISE};
use entroute::sweep::{preset, run_experiment, ModelSettings, Preset};

fn main() -> entroute::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "figure5".into());
    let Preset::Figure(p) = preset(&name)? else {
        return Err(entroute::Error::Config(format!(
            "{name} is not a figure preset"
        )));
    };
    let (pe, ps) = p.panels[0];
    let base = ModelSettings::default().params(pe, ps, p.cutoff)?;
    println!(
        "{name}: T={}, threshold {:.4}, {} trials",
        p.cutoff,
        base.f_th.value(),
        p.trials
    );

    for panel in run_experiment(&p, &base)? {
        let t = &panel.table;
        let a = panel.summary(Series::PathA);
        let b = panel.summary(Series::PathB);
        println!(
            "\n(pe={}, ps={}): mean steps 2-hop {:.2}, 4-hop {:.2}, first {:.2}, all {:.2}",
            panel.params.p_e,
            panel.params.p_s,
            a.mean_steps.unwrap_or(f64::NAN),
            b.mean_steps.unwrap_or(f64::NAN),
            panel.summary(Series::First).mean_steps.unwrap_or(f64::NAN),
            panel.summary(Series::All).mean_steps.unwrap_or(f64::NAN),
        );
        let row = |s: Series| {
            [3, 6, 10, 15, 20]
                .map(|n| format!("{:.3}", t.at(s, n)))
                .join(" ")
        };
        println!("  CDF at 3/6/10/15/20  2-hop {}", row(Series::PathA));
        println!("                       4-hop {}", row(Series::PathB));
        let cross = crossover_step(
            t.get(Series::PathA),
            t.get(Series::PathB),
            DEFAULT_CROSSOVER_NOISE,
        );
        println!("  crossover step {cross:?}");
        let converged = Series::ALL
            .iter()
            .filter(|s| panel.converged(**s).passed())
            .count();
        println!(
            "  converged series {converged}/4, audit violations {}",
            panel.audit.violations()
        );
    }
    Ok(())
}
