//! Gain scatter of sampled human-driver laws over a frequency grid, summarised
//! as median and interquartile range per law and frequency.
//!
//! Usage: `cargo run --release --example frequency_response -- [particles] [seed]`

use stochastic_fd::dfa::frequency_response_sweep;
use stochastic_fd::stoch_fd::percentile;
use stochastic_fd::LawKind;

fn main() -> stochastic_fd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let particles: usize = args.first().map_or(100, |s| s.parse().expect("particles must be an integer"));
    let seed: u64 = args.get(1).map_or(0, |s| s.parse().expect("seed must be an integer"));
    let omegas = [0.01, 0.1, 0.2, 0.3, 0.4];

    println!("{:>5} {:>7} {:>9} {:>9} {:>7}", "law", "omega", "median", "IQR", "failed");
    for kind in LawKind::HDV {
        let points = frequency_response_sweep(kind, particles, &omegas, 10.0, 15.0, seed)?;
        for &w in &omegas {
            let mut g: Vec<f64> = points
                .iter()
                .filter(|p| p.omega_rad_s == w && p.converged)
                .map(|p| p.gain_mag)
                .collect();
            let failed = particles - g.len();
            g.sort_by(f64::total_cmp);
            let (q1, med, q3) = (percentile(&g, 25.0), percentile(&g, 50.0), percentile(&g, 75.0));
            println!("{:>5} {w:>7.2} {med:>9.4} {:>9.4} {failed:>7}", kind.name(), q3 - q1);
        }
    }
    Ok(())
}
