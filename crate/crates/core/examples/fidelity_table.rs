//! Cutoff/threshold conversion and the cost of waiting before a swap.
//!
//!     cargo run --example fidelity_table

use entroute::fidelity::{
    cutoff_steps, fidelity_at_age, swap_then_wait, wait_then_swap, DecayModel, Fidelity,
};

fn main() -> entroute::Result<()> {
    let model = DecayModel::new(100.0)?;

    println!("cutoff T  threshold F(T)");
    for t in [0, 5, 10, 20, 30, 50] {
        println!("{t:>8}  {:.6}", fidelity_at_age(t, &model).value());
    }

    println!("\nthreshold  cutoff");
    for f in [0.99, 0.95, 0.9, 0.8, 0.7] {
        println!("{f:>9}  {}", cutoff_steps(Fidelity::new(f)?, &model)?);
    }

    // Two links made at the same moment, swapped after t_w idle steps, or
    // swapped at once and then stored for t_w steps.
    let fresh = fidelity_at_age(0, &model);
    println!("\nt_w  wait-then-swap  swap-then-wait");
    for t_w in [0, 1, 5, 10, 50] {
        println!(
            "{t_w:>3}  {:.6}        {:.6}",
            wait_then_swap(fresh, fresh, t_w, &model).value(),
            swap_then_wait(fresh, fresh, t_w, &model).value()
        );
    }
    Ok(())
}
