//! Seeded Monte Carlo error estimates checked against the exact value.
//!
//! Usage: `cargo run --release --example monte_carlo -- [seed] [reps]`

use majvote::montecarlo::mc_error;
use majvote::oracle::exact_error;
use majvote::{CorrelationModel, EnsembleConfig, RngSeed};

fn main() -> majvote::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let reps: u64 = args.next().map_or(200_000, |s| s.parse().expect("reps"));
    for model in [
        CorrelationModel::independent(),
        CorrelationModel::geometric(0.5)?,
        CorrelationModel::equicorrelated(0.3)?,
    ] {
        let cfg = EnsembleConfig::from_raw(101, 0.6, 0.4, 0.5, model)?;
        let est = mc_error(&cfg, reps, RngSeed::new(seed, 0))?;
        let exact = exact_error(&cfg)?;
        println!(
            "{:<15} mc {:.6} +- {:.6}   exact {:.6}   z = {:+.2}",
            model.kind().as_str(),
            est.value,
            est.std_error,
            exact,
            (est.value - exact) / est.std_error
        );
    }
    Ok(())
}
