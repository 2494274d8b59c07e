//! One random platoon: per-vehicle gains, amplitudes and the cascade that
//! shapes its density-flow loop.
//!
//! Usage: `cargo run --release --example platoon_propagation -- [scenario] [penetration] [seed]`

use stochastic_fd::macro_fd::{fd_trace, loop_closure};
use stochastic_fd::platoon::{cascade, realize, LawMix, LeaderSpec, PlatoonSpec, SequenceScenario};
use stochastic_fd::seed::sample_seed;

fn main() -> stochastic_fd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario: SequenceScenario = args.first().map(|s| s.parse()).transpose()?.unwrap_or(SequenceScenario::AvFirst);
    let penetration: f64 = args.get(1).map_or(0.5, |s| s.parse().expect("penetration must be a number"));
    let seed: u64 = args.get(2).map_or(1, |s| s.parse().expect("seed must be an integer"));

    let spec = PlatoonSpec {
        n_followers: 20,
        penetration,
        scenario,
        mix: LawMix::i24(),
        leader: LeaderSpec::new(10.0, 0.1, 15.0),
    };
    let r = realize(&spec, sample_seed(seed, 0))?;
    let states = cascade(&r);

    println!("{:>3} {:>4} {:>5} {:>8} {:>9} {:>9} {:>9}", "l", "cls", "law", "dx_e", "|G|", "phase", "A (m)");
    for (l, (v, s)) in r.vehicles.iter().zip(&states).enumerate() {
        println!(
            "{:>3} {:>4} {:>5} {:>8.3} {:>9.5} {:>9.5} {:>9.4}   P = {:.4}",
            l + 1,
            v.class,
            v.law.kind().name(),
            v.dx_e,
            v.gain,
            v.phase,
            v.amplitude,
            s.p
        );
    }
    let last = states.last().expect("platoon is not empty");
    let c = loop_closure(last.p, last.phi);
    println!("\nloop closure R = {:.4}, phase = {:.4} rad", c.r, c.phi);

    let traces = fd_trace(&r, 200.0, 0.04)?;
    let tr = &traces.final_period;
    let (kmin, kmax) = tr.k.iter().fold((f64::MAX, f64::MIN), |(a, b), &k| (a.min(k), b.max(k)));
    let (qmin, qmax) = tr.q.iter().fold((f64::MAX, f64::MIN), |(a, b), &q| (a.min(q), b.max(q)));
    println!("final period: k in [{kmin:.3}, {kmax:.3}] veh/km, q in [{qmin:.1}, {qmax:.1}] veh/h");
    Ok(())
}
