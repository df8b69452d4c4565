//! Normal approximation against the exact majority-vote error as the ensemble grows.

use majvote::analytic::{estimated_error, mean_individual_error};
use majvote::oracle::exact_error;
use majvote::{CorrelationModel, EnsembleConfig, Prior, RatePair};

fn main() -> majvote::Result<()> {
    let rates = RatePair::new(0.6, 0.4)?;
    let prior = Prior::new(0.5)?;
    let models = [
        ("independent", CorrelationModel::independent()),
        ("geometric 0.5", CorrelationModel::geometric(0.5)?),
        ("equicorrelated 0.3", CorrelationModel::equicorrelated(0.3)?),
    ];
    println!(
        "p = 0.6, q = 0.4, pi = 0.5, individual error {}",
        mean_individual_error(rates, prior)
    );
    for (name, model) in models {
        println!("\n{name}");
        println!(
            "{:>6} {:>14} {:>14} {:>10}",
            "n", "exact", "normal", "abusive"
        );
        for n in [1, 5, 11, 51, 101, 501, 1001, 5001] {
            let cfg = EnsembleConfig::new(n, rates, prior, model)?;
            let est = estimated_error(&cfg);
            println!(
                "{n:>6} {:>14.6e} {:>14.6e} {:>10}",
                exact_error(&cfg)?,
                est.value,
                est.abusive
            );
        }
    }
    Ok(())
}
