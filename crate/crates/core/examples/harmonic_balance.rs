//! Amplitude-dependent gain of one law: harmonic balance against direct
//! simulation, with the small-signal gain for reference.
//!
//! Usage: `cargo run --release --example harmonic_balance -- [law] [omega]`

use stochastic_fd::cf_models::CarFollowingLaw;
use stochastic_fd::dfa::{harmonic_balance_solve, simulate_fundamental};
use stochastic_fd::linear_tf::linearized_gain;
use stochastic_fd::LawKind;

fn main() -> stochastic_fd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: LawKind = args.first().map(|s| s.parse()).transpose()?.unwrap_or(LawKind::Ovm);
    let omega: f64 = args.get(1).map_or(0.1, |s| s.parse().expect("omega must be a number"));
    let v_e = 15.0;
    let law = CarFollowingLaw::prior_midpoint(kind);

    let lin = linearized_gain(&law, omega, v_e)?;
    println!("{kind} at omega = {omega} rad/s, v_e = {v_e} m/s");
    println!("small-signal |G| = {:.5}, phase = {:.5} rad\n", lin.magnitude, lin.phase);
    println!("{:>6} {:>10} {:>10} {:>6} {:>10} {:>10}", "A (m)", "HB |G|", "HB phase", "iters", "sim |G|", "sim phase");
    for a in [0.1, 1.0, 5.0, 10.0, 20.0] {
        let hb = harmonic_balance_solve(&law, a, omega, v_e)?;
        let sim = simulate_fundamental(&law, a, omega, v_e)?;
        println!(
            "{a:>6.1} {:>10.5} {:>10.5} {:>6} {:>10.5} {:>10.5}",
            hb.gain.magnitude, hb.gain.phase, hb.iterations, sim.magnitude, sim.phase
        );
    }
    Ok(())
}
