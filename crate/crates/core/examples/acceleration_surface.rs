//! Acceleration of each law around its equilibrium, at the prior midpoint.
//!
//! Usage: `cargo run --release --example acceleration_surface -- [v_e]`

use stochastic_fd::cf_models::{acceleration_surface, CarFollowingLaw};
use stochastic_fd::LawKind;

fn main() -> stochastic_fd::Result<()> {
    let v_e: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("v_e must be a number"))
        .unwrap_or(15.0);
    let rel_speed = [-4.0, -2.0, 0.0, 2.0, 4.0];
    let spacing_dev = [-10.0, -5.0, 0.0, 5.0, 10.0];

    for kind in LawKind::ALL {
        let law = CarFollowingLaw::prior_midpoint(kind);
        let s = acceleration_surface(&law, v_e, &rel_speed, &spacing_dev)?;
        println!("{kind}: equilibrium spacing {:.3} m at {v_e} m/s", s.equilibrium_spacing);
        print!("{:>10}", "ds \\ dv");
        for dv in &s.rel_speed {
            print!("{dv:>9.1}");
        }
        println!();
        for (ds, row) in s.spacing_dev.iter().zip(&s.values) {
            print!("{ds:>10.1}");
            for a in row {
                print!("{a:>9.3}");
            }
            println!();
        }
        println!();
    }
    Ok(())
}
