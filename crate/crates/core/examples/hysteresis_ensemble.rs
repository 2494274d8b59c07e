//! Monte Carlo ensemble at the baseline settings and its hysteresis summary.
//!
//! Usage: `cargo run --release --example hysteresis_ensemble -- [samples] [scenario] [penetration] [seed]`

use std::time::Instant;

use stochastic_fd::stoch_fd::{self, EnsembleConfig};

fn main() -> stochastic_fd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = EnsembleConfig {
        n_samples: 200,
        ..EnsembleConfig::default()
    };
    if let Some(n) = args.first() {
        config.n_samples = n.parse().expect("samples must be an integer");
    }
    if let Some(s) = args.get(1) {
        config.scenario = s.parse()?;
    }
    if let Some(p) = args.get(2) {
        config.penetration = p.parse().expect("penetration must be a number");
    }
    if let Some(s) = args.get(3) {
        config.seed = s.parse().expect("seed must be an integer");
    }

    let start = Instant::now();
    let ensemble = stoch_fd::run_ensemble(&config)?;
    let report = stoch_fd::hysteresis_metrics(&ensemble)?;
    println!(
        "{} samples ({} rejected: {:?}) in {:.1} s",
        config.n_samples,
        ensemble.rejected.len(),
        ensemble.rejection_counts(),
        start.elapsed().as_secs_f64()
    );
    println!("scenario {}, penetration {}", config.scenario, config.penetration);
    println!("pct   k_range   Q_range   width   length");
    for r in &report.percentiles {
        println!(
            "{:>3}  {:>8.3}  {:>8.2}  {:>6.3}  {:>7.4}",
            r.percentile, r.k_range, r.q_range, r.width, r.length
        );
    }
    println!("hull area      {:.2} veh²/(km·h)", report.hull_area);
    println!("std density    {:.3} veh/km", report.std_density);
    println!("std flow       {:.2} veh/h", report.std_flow);
    println!("mean distance  {:.2}", report.mean_distance);
    println!("rms distance   {:.2}", report.rms_distance);
    println!(
        "orientation    {:?} ({} cw / {} ccw / {} degenerate)",
        report.verdict,
        report.orientation.clockwise,
        report.orientation.counter_clockwise,
        report.orientation.degenerate
    );
    Ok(())
}
