//! Limiting error and limiting delta in each of the nine `(p, q)` regions.
//!
//! Usage: `cargo run --example phase_tables -- [pi]`

use majvote::analytic::{limiting_delta, limiting_error};
use majvote::{Prior, RatePair};

fn main() -> majvote::Result<()> {
    let pi: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(0.5), |s| s.parse())
        .expect("pi must be a number");
    let prior = Prior::new(pi)?;
    let ps = [("p<1/2", 0.3), ("p=1/2", 0.5), ("p>1/2", 0.8)];
    let qs = [("q>1/2", 0.7), ("q=1/2", 0.5), ("q<1/2", 0.2)];

    println!("limiting ensemble error, pi = {pi}");
    println!("{:8}{:>10}{:>10}{:>10}", "", ps[0].0, ps[1].0, ps[2].0);
    for (label, q) in qs {
        print!("{label:8}");
        for (_, p) in ps {
            print!("{:>10.4}", limiting_error(RatePair::new(p, q)?, prior));
        }
        println!();
    }

    println!("\nlimiting delta at representative points (sign: - helps, + hurts)");
    for (label, q) in qs {
        print!("{label:8}");
        for (_, p) in ps {
            let v = limiting_delta(RatePair::new(p, q)?, prior);
            print!("{:>9.4}{}", v.delta_inf, v.sign.symbol());
        }
        println!();
    }
    Ok(())
}
