//! Mixed platoons: vehicle ordering, law assignment and amplitude propagation.
//!
//! A platoon is a leader followed by `n` vehicles. Each follower turns the
//! oscillation amplitude of its predecessor into its own through its
//! amplitude-dependent gain, so the amplitudes form a Markov chain along the
//! platoon: vehicle `l` depends only on `A_{l-1}` and its own seeded draw.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf_models::{self, CarFollowingLaw, LawKind};
use crate::dfa;
use crate::error::{Error, Result};
use crate::seed::{self, STREAM_LAW, STREAM_PARAMS, STREAM_SEQUENCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VehicleClass {
    #[serde(rename = "AV")]
    Av,
    #[serde(rename = "HDV")]
    Hdv,
}

impl VehicleClass {
    pub fn of(kind: LawKind) -> Self {
        if kind.is_hdv() {
            VehicleClass::Hdv
        } else {
            VehicleClass::Av
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VehicleClass::Av => "AV",
            VehicleClass::Hdv => "HDV",
        })
    }
}

impl FromStr for VehicleClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AV" => Ok(VehicleClass::Av),
            "HDV" => Ok(VehicleClass::Hdv),
            other => Err(Error::validation("sequence", format!("unknown class tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceScenario {
    AvFirst,
    HdvFirst,
    /// AV, HDV, AV, ... until the minority class runs out, then a block.
    Alternating,
    /// A seeded shuffle of the `AvFirst` list.
    RandomOrder,
    Explicit(Vec<VehicleClass>),
}

impl SequenceScenario {
    pub fn name(&self) -> &'static str {
        match self {
            SequenceScenario::AvFirst => "av_first",
            SequenceScenario::HdvFirst => "hdv_first",
            SequenceScenario::Alternating => "alternating",
            SequenceScenario::RandomOrder => "random_order",
            SequenceScenario::Explicit(_) => "explicit",
        }
    }
}

impl fmt::Display for SequenceScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceScenario::Explicit(tags) => {
                let tags: Vec<String> = tags.iter().map(ToString::to_string).collect();
                write!(f, "explicit:{}", tags.join(","))
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for SequenceScenario {
    type Err = Error;

    /// Accepts `av_first`, `hdv_first`, `alternating`, `random_order`
    /// (dashes allowed) or `explicit:AV,HDV,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(tags) = s.strip_prefix("explicit:") {
            let tags = tags
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<VehicleClass>>>()?;
            return Ok(SequenceScenario::Explicit(tags));
        }
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "av_first" | "avfirst" => Ok(SequenceScenario::AvFirst),
            "hdv_first" | "hdvfirst" => Ok(SequenceScenario::HdvFirst),
            "alternating" => Ok(SequenceScenario::Alternating),
            "random_order" | "random" | "randomorder" => Ok(SequenceScenario::RandomOrder),
            other => Err(Error::validation(
                "scenario",
                format!("unknown scenario `{other}`"),
            )),
        }
    }
}

/// Number of AVs in a platoon of `n` at penetration `p`.
pub fn av_count(n: usize, penetration: f64) -> usize {
    (penetration * n as f64).round() as usize
}

/// Class tags front to back, excluding the leader.
pub fn build_sequence(
    scenario: &SequenceScenario,
    n: usize,
    penetration: f64,
    seed: u64,
) -> Result<Vec<VehicleClass>> {
    if let SequenceScenario::Explicit(tags) = scenario {
        if tags.len() != n {
            return Err(Error::validation(
                "sequence",
                format!("explicit sequence has {} vehicles, expected {n}", tags.len()),
            ));
        }
        return Ok(tags.clone());
    }
    if n == 0 {
        return Err(Error::validation("n_followers", "platoon needs at least one follower"));
    }
    if !(0.0..=1.0).contains(&penetration) {
        return Err(Error::validation(
            "penetration",
            format!("must lie in [0, 1], got {penetration}"),
        ));
    }
    let n_av = av_count(n, penetration);
    let n_hdv = n - n_av;
    let av_first = || {
        let mut v = vec![VehicleClass::Av; n_av];
        v.extend(std::iter::repeat_n(VehicleClass::Hdv, n_hdv));
        v
    };
    Ok(match scenario {
        SequenceScenario::AvFirst => av_first(),
        SequenceScenario::HdvFirst => {
            let mut v = vec![VehicleClass::Hdv; n_hdv];
            v.extend(std::iter::repeat_n(VehicleClass::Av, n_av));
            v
        }
        SequenceScenario::Alternating => {
            let pairs = n_av.min(n_hdv);
            let mut v = Vec::with_capacity(n);
            for _ in 0..pairs {
                v.push(VehicleClass::Av);
                v.push(VehicleClass::Hdv);
            }
            v.extend(std::iter::repeat_n(VehicleClass::Av, n_av - pairs));
            v.extend(std::iter::repeat_n(VehicleClass::Hdv, n_hdv - pairs));
            v
        }
        SequenceScenario::RandomOrder => {
            let mut v = av_first();
            v.shuffle(&mut seed::rng_from(seed::derive(seed, STREAM_SEQUENCE)));
            v
        }
        SequenceScenario::Explicit(_) => unreachable!(),
    })
}

/// Selection probabilities over the HDV laws `[FVDM, GFM, IDM, OVM]` and
/// the AV laws `[LL, HL]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawMix {
    pub name: String,
    /// HDV weights as given, before normalization.
    pub hdv_raw: [f64; 4],
    pub hdv_probs: [f64; 4],
    pub av_raw: [f64; 2],
    pub av_probs: [f64; 2],
}

impl LawMix {
    pub fn new(name: &str, hdv: [f64; 4], av: [f64; 2]) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            hdv_raw: hdv,
            hdv_probs: normalize(&hdv, "hdv_probs")?,
            av_raw: av,
            av_probs: normalize(&av, "av_probs")?,
        })
    }

    /// Probabilities measured on I-24 traffic; the default.
    pub fn i24() -> Self {
        Self::new("i24", [0.2553, 0.4833, 0.2334, 0.0300], [0.6617, 0.3383])
            .expect("valid preset")
    }

    /// Probabilities calibrated on NGSIM trajectories.
    pub fn ngsim() -> Self {
        Self::new("ngsim", [0.311, 0.352, 0.292, 0.044], [0.6617, 0.3383])
            .expect("valid preset")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "i24" | "i-24" => Ok(Self::i24()),
            "ngsim" => Ok(Self::ngsim()),
            other => Err(Error::validation("mix", format!("unknown law-mix preset `{other}`"))),
        }
    }

    /// Every vehicle of the law's class uses `kind`; the other class keeps
    /// the default probabilities.
    pub fn single(kind: LawKind) -> Self {
        let mut mix = Self::i24();
        mix.name = format!("only_{}", kind.name());
        if kind.is_hdv() {
            let i = LawKind::HDV.iter().position(|&k| k == kind).unwrap();
            mix.hdv_raw = [0.0; 4];
            mix.hdv_raw[i] = 1.0;
            mix.hdv_probs = mix.hdv_raw;
        } else {
            let i = LawKind::AV.iter().position(|&k| k == kind).unwrap();
            mix.av_raw = [0.0; 2];
            mix.av_raw[i] = 1.0;
            mix.av_probs = mix.av_raw;
        }
        mix
    }

    pub fn probs(&self, class: VehicleClass) -> Vec<(LawKind, f64)> {
        match class {
            VehicleClass::Hdv => LawKind::HDV.into_iter().zip(self.hdv_probs).collect(),
            VehicleClass::Av => LawKind::AV.into_iter().zip(self.av_probs).collect(),
        }
    }

    /// Inverse-CDF draw of a law for a vehicle of `class`.
    pub fn draw<R: Rng>(&self, class: VehicleClass, rng: &mut R) -> LawKind {
        let u: f64 = rng.random();
        let table = self.probs(class);
        let mut acc = 0.0;
        for &(kind, p) in &table {
            acc += p;
            if u < acc {
                return kind;
            }
        }
        // Rounding can leave the cumulative sum a hair below one.
        table.iter().rev().find(|(_, p)| *p > 0.0).unwrap().0
    }
}

impl Default for LawMix {
    fn default() -> Self {
        Self::i24()
    }
}

fn normalize<const N: usize>(w: &[f64; N], key: &str) -> Result<[f64; N]> {
    if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::validation(key, "weights must be finite and nonnegative"));
    }
    let sum: f64 = w.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::validation(key, "weights must not all be zero"));
    }
    Ok(w.map(|x| x / sum))
}

/// Law of the vehicle with seed `vehicle_seed`.
pub fn draw_law_kind(class: VehicleClass, mix: &LawMix, vehicle_seed: u64) -> LawKind {
    mix.draw(class, &mut seed::rng_from(seed::derive(vehicle_seed, STREAM_LAW)))
}

/// Law kinds for a class sequence; vehicle `l` draws from its own seed under
/// `sample_seed`.
pub fn assign_laws(classes: &[VehicleClass], mix: &LawMix, sample_seed: u64) -> Vec<LawKind> {
    classes
        .iter()
        .enumerate()
        .map(|(l, &c)| draw_law_kind(c, mix, seed::vehicle_seed(sample_seed, l as u64)))
        .collect()
}

/// Law and parameters of one vehicle, reproducible from its seed alone.
pub fn draw_vehicle(
    class: VehicleClass,
    mix: &LawMix,
    v_e: f64,
    vehicle_seed: u64,
) -> Result<CarFollowingLaw> {
    let kind = draw_law_kind(class, mix, vehicle_seed);
    cf_models::sample_parameters(kind, v_e, seed::derive(vehicle_seed, STREAM_PARAMS))
}

/// Harmonic forcing applied by the platoon leader.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderSpec {
    /// Position amplitude (m).
    pub a0: f64,
    /// Principal frequency (rad/s).
    pub omega: f64,
    /// Phase (rad).
    pub phi: f64,
    /// Equilibrium speed (m/s).
    pub v_e: f64,
}

impl LeaderSpec {
    pub fn new(a0: f64, omega: f64, v_e: f64) -> Self {
        Self {
            a0,
            omega,
            phi: 0.0,
            v_e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub class: VehicleClass,
    pub law: CarFollowingLaw,
    /// Equilibrium spacing (m).
    pub dx_e: f64,
    pub gain: f64,
    /// Phase of the vehicle's own gain (rad).
    pub phase: f64,
    /// Position amplitude after this vehicle (m).
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonRealization {
    pub leader: LeaderSpec,
    pub vehicles: Vec<VehicleRecord>,
}

impl PlatoonRealization {
    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn total_spacing(&self) -> f64 {
        self.vehicles.iter().map(|v| v.dx_e).sum()
    }
}

/// One step of the amplitude chain: the record of `law` driven at input
/// amplitude `a_prev`.
pub fn step(law: &CarFollowingLaw, a_prev: f64, leader: &LeaderSpec) -> Result<VehicleRecord> {
    let dx_e = law.equilibrium_spacing(leader.v_e)?;
    let (gain, phase) = if a_prev > 0.0 {
        let g = dfa::vehicle_gain(law, a_prev, leader.omega, leader.v_e)?;
        (g.magnitude, g.phase)
    } else {
        (1.0, 0.0)
    };
    Ok(VehicleRecord {
        class: VehicleClass::of(law.kind()),
        law: *law,
        dx_e,
        gain,
        phase,
        amplitude: gain * a_prev,
    })
}

/// Walk the platoon front to back, feeding each vehicle its predecessor's
/// amplitude.
pub fn propagate_amplitudes(
    laws: &[CarFollowingLaw],
    leader: &LeaderSpec,
) -> Result<PlatoonRealization> {
    if !(leader.a0 >= 0.0) {
        return Err(Error::domain(format!("A0 must be nonnegative, got {}", leader.a0)));
    }
    if !(leader.omega > 0.0) {
        return Err(Error::domain(format!("omega must be positive, got {}", leader.omega)));
    }
    let mut a_prev = leader.a0;
    let mut vehicles = Vec::with_capacity(laws.len());
    for (index, law) in laws.iter().enumerate() {
        let rec = step(law, a_prev, leader).map_err(|e| Error::Vehicle {
            index,
            source: Box::new(e),
        })?;
        a_prev = rec.amplitude;
        vehicles.push(rec);
    }
    Ok(PlatoonRealization {
        leader: *leader,
        vehicles,
    })
}

/// Everything that defines one random platoon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonSpec {
    pub n_followers: usize,
    pub penetration: f64,
    pub scenario: SequenceScenario,
    pub mix: LawMix,
    pub leader: LeaderSpec,
}

/// Draw and propagate the platoon of one Monte Carlo sample.
pub fn realize(spec: &PlatoonSpec, sample_seed: u64) -> Result<PlatoonRealization> {
    let classes = build_sequence(&spec.scenario, spec.n_followers, spec.penetration, sample_seed)?;
    let laws = classes
        .iter()
        .enumerate()
        .map(|(l, &c)| {
            draw_vehicle(c, &spec.mix, spec.leader.v_e, seed::vehicle_seed(sample_seed, l as u64))
                .map_err(|e| Error::Vehicle {
                    index: l,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    propagate_amplitudes(&laws, &spec.leader)
}

/// Running gain product and phase sum after vehicle `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeState {
    pub p: f64,
    /// Unwrapped running sum (rad).
    pub phi: f64,
}

pub fn cascade(realization: &PlatoonRealization) -> Vec<CascadeState> {
    let mut p = 1.0;
    let mut phi = 0.0;
    realization
        .vehicles
        .iter()
        .map(|v| {
            p *= v.gain;
            phi += v.phase;
            CascadeState { p, phi }
        })
        .collect()
}

/// Something that can draw a car-following law from a seed.
pub trait LawSampler: Sync {
    fn sample(&self, seed: u64) -> Result<CarFollowingLaw>;
}

/// Draws from a [`LawMix`] for one vehicle class.
#[derive(Debug, Clone)]
pub struct MixSampler {
    pub mix: LawMix,
    pub class: VehicleClass,
    pub v_e: f64,
}

impl LawSampler for MixSampler {
    fn sample(&self, seed: u64) -> Result<CarFollowingLaw> {
        draw_vehicle(self.class, &self.mix, self.v_e, seed)
    }
}

/// Draws one of a fixed set of laws with the given weights.
#[derive(Debug, Clone)]
pub struct FixedLaws(pub Vec<(CarFollowingLaw, f64)>);

impl LawSampler for FixedLaws {
    fn sample(&self, seed: u64) -> Result<CarFollowingLaw> {
        let total: f64 = self.0.iter().map(|(_, w)| w).sum();
        let u = seed::rng_from(seed).random::<f64>() * total;
        let mut acc = 0.0;
        for (law, w) in &self.0 {
            acc += w;
            if u < acc {
                return Ok(*law);
            }
        }
        self.0
            .last()
            .map(|(l, _)| *l)
            .ok_or_else(|| Error::domain("empty law set"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Probability mass per bin; sums to one.
    pub mass: Vec<f64>,
    /// Draws that failed (collision, no convergence, ...) and were left out.
    pub failed: usize,
}

impl Histogram {
    pub fn bin_of(&self, x: f64) -> usize {
        let n = self.mass.len();
        let w = (self.edges[n] - self.edges[0]) / n as f64;
        (((x - self.edges[0]) / w).floor().max(0.0) as usize).min(n - 1)
    }
}

/// Monte Carlo estimate of the one-step density of `A_l` given
/// `A_{l-1} = a_prev`. Values outside the bin range land in the edge bins.
pub fn amplitude_transition_density(
    sampler: &impl LawSampler,
    a_prev: f64,
    omega: f64,
    v_e: f64,
    n_draws: usize,
    bins: BinSpec,
    seed: u64,
) -> Result<Histogram> {
    if !(a_prev > 0.0) {
        return Err(Error::domain(format!("a_prev must be positive, got {a_prev}")));
    }
    if n_draws < 1000 {
        return Err(Error::InsufficientSamples {
            got: n_draws,
            needed: 1000,
        });
    }
    if bins.count == 0 || !(bins.hi > bins.lo) {
        return Err(Error::validation("bins", "need a nonempty increasing range"));
    }
    let leader = LeaderSpec::new(a_prev, omega, v_e);
    let outcomes: Vec<Option<f64>> = (0..n_draws as u64)
        .into_par_iter()
        .map(|i| {
            let law = sampler.sample(seed::derive(seed, i)).ok()?;
            step(&law, a_prev, &leader).ok().map(|r| r.amplitude)
        })
        .collect();

    let w = (bins.hi - bins.lo) / bins.count as f64;
    let mut hist = Histogram {
        edges: (0..=bins.count).map(|i| bins.lo + w * i as f64).collect(),
        mass: vec![0.0; bins.count],
        failed: 0,
    };
    let mut counts = vec![0usize; bins.count];
    let mut ok = 0usize;
    for a in outcomes {
        match a {
            Some(a) => {
                counts[hist.bin_of(a)] += 1;
                ok += 1;
            }
            None => hist.failed += 1,
        }
    }
    if ok == 0 {
        return Err(Error::InsufficientSamples {
            got: 0,
            needed: 1,
        });
    }
    hist.mass = counts.iter().map(|&c| c as f64 / ok as f64).collect();
    Ok(hist)
}
