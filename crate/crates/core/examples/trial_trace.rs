//! Step-by-step trace of one trial on the four-hop path with two prior
//! links, using a `StepObserver` to print every swap and the end state.
//!
//!     cargo run --example trial_trace -- [seed]

use entroute::chain::{init_chain, ChainState, PathSpec, WernerLink};
use entroute::engine::{step, RngStream, StepObserver};
use entroute::sweep::ModelSettings;

struct Printer;

impl StepObserver for Printer {
    fn on_swap(&mut self, t: i64, l: &WernerLink, r: &WernerLink, success: bool) {
        println!(
            "  t={t}: swap ({},{}) + ({},{}) -> {}",
            l.left,
            l.right,
            r.left,
            r.right,
            if success { "ok" } else { "failed" }
        );
    }

    fn after_step(&mut self, t: i64, chain: &ChainState) {
        let links: Vec<String> = chain
            .links()
            .iter()
            .map(|l| {
                format!(
                    "({},{}) age {} F={:.4}",
                    l.left,
                    l.right,
                    l.age(t),
                    l.fidelity().value()
                )
            })
            .collect();
        println!("  t={t}: [{}]", links.join(", "));
    }
}

fn main() -> entroute::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let params = ModelSettings::default().params(0.3, 0.9, 10)?;
    let spec = PathSpec::parse(4, "1-2,3-5")?;
    println!(
        "path {spec}, threshold {:.6}, cutoff {}",
        params.f_th.value(),
        params.cutoff
    );

    let mut rng = RngStream::for_trial(seed, 0, 1);
    let mut chain = init_chain(&spec, &params.model);
    for t in 1..=params.max_steps as i64 {
        step(&mut chain, &params, &mut rng, t, &mut Printer);
        if let Some(link) = chain.e2e_link() {
            println!(
                "end-to-end link at step {t} with fidelity {:.6}",
                link.fidelity().value()
            );
            return Ok(());
        }
    }
    println!("no end-to-end link within {} steps", params.max_steps);
    Ok(())
}
