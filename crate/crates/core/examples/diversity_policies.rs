//! Running two disjoint paths side by side and combining them with the
//! first-completion and all-completion policies.
//!
//!     cargo run --release --example diversity_policies

use entroute::chain::PathSpec;
use entroute::engine::run_trial_pairs;
use entroute::policies::{DiversityOutcome, Winner};
use entroute::stats::{CdfTable, Series, SeriesResults};
use entroute::sweep::ModelSettings;

fn main() -> entroute::Result<()> {
    let params = ModelSettings::default().params(0.15, 0.9, 10)?;
    let a = PathSpec::clean(2)?;
    let b = PathSpec::parse(4, "1-2,3-5")?;
    let run = run_trial_pairs(&a, &b, &params, 42, 10_000);

    let mut wins = [0usize; 4];
    for (ra, rb) in run.path_a.iter().zip(&run.path_b) {
        let i = match DiversityOutcome::combine(*ra, *rb).winner {
            Winner::PathA => 0,
            Winner::PathB => 1,
            Winner::Tie => 2,
            Winner::None => 3,
        };
        wins[i] += 1;
    }
    println!(
        "first to finish: 2-hop {}, 4-hop {}, tie {}, neither {}",
        wins[0], wins[1], wins[2], wins[3]
    );

    let table = CdfTable::build(&SeriesResults::from_paired(&run), 40)?;
    println!("\nstep  2-hop  4-hop  first  all    1-(1-a)(1-b)  a*b");
    for n in [2, 4, 6, 8, 10, 15, 20, 30] {
        let (ca, cb) = (table.at(Series::PathA, n), table.at(Series::PathB, n));
        println!(
            "{n:>4}  {ca:.3}  {cb:.3}  {:.3}  {:.3}  {:.3}         {:.3}",
            table.at(Series::First, n),
            table.at(Series::All, n),
            1.0 - (1.0 - ca) * (1.0 - cb),
            ca * cb
        );
    }
    Ok(())
}
