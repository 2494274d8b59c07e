//! Hull area and flow spread across sequence scenarios and penetration
//! rates, each at two master seeds.
//!
//! Usage: `cargo run --release --example scenario_sweep -- [samples]`

use stochastic_fd::stoch_fd::{self, EnsembleConfig};
use stochastic_fd::platoon::SequenceScenario;

fn main() -> stochastic_fd::Result<()> {
    let samples: usize = std::env::args()
        .nth(1)
        .map_or(200, |s| s.parse().expect("samples must be an integer"));
    let base = EnsembleConfig {
        n_samples: samples,
        ..EnsembleConfig::default()
    };

    println!("{:>14} {:>5} {:>10} {:>10} {:>8}", "scenario", "seed", "hull", "std q", "cw frac");
    for scenario in [
        SequenceScenario::AvFirst,
        SequenceScenario::HdvFirst,
        SequenceScenario::Alternating,
        SequenceScenario::RandomOrder,
    ] {
        for seed in [1, 2] {
            let c = EnsembleConfig { scenario: scenario.clone(), seed, ..base.clone() };
            let r = stoch_fd::hysteresis_metrics(&stoch_fd::run_ensemble(&c)?)?;
            println!(
                "{:>14} {seed:>5} {:>10.1} {:>10.2} {:>8.3}",
                scenario.name(),
                r.hull_area,
                r.std_flow,
                r.orientation.clockwise_fraction()
            );
        }
    }

    println!("\n{:>14} {:>5} {:>10} {:>10}", "penetration", "seed", "hull", "std q");
    for p in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
        for seed in [1, 2] {
            let c = EnsembleConfig { penetration: p, seed, ..base.clone() };
            let r = stoch_fd::hysteresis_metrics(&stoch_fd::run_ensemble(&c)?)?;
            println!("{p:>14.3} {seed:>5} {:>10.1} {:>10.2}", r.hull_area, r.std_flow);
        }
    }
    Ok(())
}
