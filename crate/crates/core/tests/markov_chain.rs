use stochastic_fd::cf_models::{CarFollowingLaw, LawKind, LlParams};
use stochastic_fd::linear_tf;
use stochastic_fd::platoon::{self, LawMix, LeaderSpec, PlatoonSpec, SequenceScenario};
use stochastic_fd::seed;

fn spec(scenario: SequenceScenario, penetration: f64) -> PlatoonSpec {
    PlatoonSpec {
        n_followers: 20,
        penetration,
        scenario,
        mix: LawMix::i24(),
        leader: LeaderSpec::new(10.0, 0.1, 15.0),
    }
}

#[test]
fn each_vehicle_regenerates_from_its_input_and_seed() {
    for (scenario, p) in [
        (SequenceScenario::AvFirst, 0.5),
        (SequenceScenario::RandomOrder, 0.3),
        (SequenceScenario::HdvFirst, 0.0),
    ] {
        let spec = spec(scenario, p);
        for sample in 0..5 {
            let s = seed::sample_seed(7, sample);
            let r = platoon::realize(&spec, s).unwrap();
            let classes = platoon::build_sequence(&spec.scenario, spec.n_followers, p, s).unwrap();
            let mut a_prev = spec.leader.a0;
            for (l, v) in r.vehicles.iter().enumerate() {
                let law = platoon::draw_vehicle(classes[l], &spec.mix, 15.0, seed::vehicle_seed(s, l as u64)).unwrap();
                let again = platoon::step(&law, a_prev, &spec.leader).unwrap();
                assert_eq!(again.amplitude.to_bits(), v.amplitude.to_bits());
                assert_eq!(again.phase.to_bits(), v.phase.to_bits());
                assert_eq!(&again, v);
                a_prev = v.amplitude;
            }
        }
    }
}

#[test]
fn identical_linear_vehicles_scale_geometrically() {
    let law = CarFollowingLaw::Ll(LlParams {
        tau_gap: 1.0,
        k_s: 0.2,
        k_v: 0.5,
        s0: 5.0,
    });
    for omega in [0.1, 0.25, 0.4] {
        let g = linear_tf::linear_gain(&law, omega).unwrap().magnitude;
        for n in [1, 10, 40] {
            let r = platoon::propagate_amplitudes(&vec![law; n], &LeaderSpec::new(10.0, omega, 15.0)).unwrap();
            let expected = g.powi(n as i32) * 10.0;
            assert!((r.vehicles[n - 1].amplitude / expected - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn realizations_do_not_depend_on_sample_order() {
    let spec = spec(SequenceScenario::Alternating, 0.5);
    let forward: Vec<_> = (0..6).map(|i| platoon::realize(&spec, seed::sample_seed(3, i)).unwrap()).collect();
    for i in (0..6).rev() {
        assert_eq!(platoon::realize(&spec, seed::sample_seed(3, i)).unwrap(), forward[i as usize]);
    }
}

#[test]
fn single_law_platoons_only_contain_that_law() {
    let mut spec = spec(SequenceScenario::HdvFirst, 0.0);
    spec.mix = LawMix::single(LawKind::Gfm);
    let r = platoon::realize(&spec, 11).unwrap();
    assert!(r.vehicles.iter().all(|v| v.law.kind() == LawKind::Gfm));
}
