//! Simulate a prediction matrix, round-trip it through CSV, and diagnose it.

use majvote::diagnose::{diagnose, DiagnoseOptions, PredictionMatrix};
use majvote::{CorrelationModel, Prior, RatePair, RngSeed};

fn main() -> majvote::Result<()> {
    let truth = RatePair::new(0.7, 0.55)?;
    let matrix = PredictionMatrix::simulate(
        truth,
        Prior::new(0.5)?,
        CorrelationModel::geometric(0.3)?,
        5_000,
        25,
        RngSeed::new(3, 0),
    )?;
    let mut csv = Vec::new();
    matrix.write_csv(&mut csv)?;
    let reloaded = PredictionMatrix::from_csv(csv.as_slice())?;

    let report = diagnose(
        &reloaded,
        DiagnoseOptions {
            ordered: true,
            ..DiagnoseOptions::default()
        },
    )?;
    println!("true p = {}, q = {}\n", truth.p(), truth.q());
    print!("{report}");
    Ok(())
}
