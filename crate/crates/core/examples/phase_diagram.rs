//! Text phase diagram of the limiting delta sign, plus the finite-n best point.
//!
//! Usage: `cargo run --example phase_diagram -- [pi] [out.csv]`

use majvote::cli::grid_csv;
use majvote::grid::{max_improvement, sweep};
use majvote::{CorrelationModel, GridSpec, Horizon, Prior};

fn main() -> majvote::Result<()> {
    let mut args = std::env::args().skip(1);
    let pi: f64 = args.next().map_or(0.5, |s| s.parse().expect("pi"));
    let prior = Prior::new(pi)?;
    let spec = GridSpec::with_step(
        0.05,
        Horizon::Asymptotic,
        prior,
        CorrelationModel::independent(),
    )?;
    let rows = sweep(&spec)?;
    let side = spec.q_axis().resolution();

    println!(
        "sign of limiting delta, pi = {pi} (rows: q from high to low, columns: p from low to high)"
    );
    for qi in (0..side).rev() {
        let line: String = (0..spec.p_axis().resolution())
            .map(|pi_| rows[pi_ * side + qi].phase.symbol())
            .collect();
        println!("q={:.2} {line}", spec.q_axis().point(qi));
    }

    let finite = GridSpec::with_step(
        0.01,
        Horizon::Finite(100),
        prior,
        CorrelationModel::independent(),
    )?;
    let best = max_improvement(&finite)?;
    println!(
        "\nn = 100: largest improvement {:.4} at p = {}, q = {}",
        best.value, best.p, best.q
    );

    if let Some(path) = args.next() {
        std::fs::write(&path, grid_csv(&rows))?;
        println!("wrote {path}");
    }
    Ok(())
}
