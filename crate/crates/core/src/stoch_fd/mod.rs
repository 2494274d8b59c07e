//! Monte Carlo estimation of the stochastic dynamic fundamental diagram.
//!
//! Each sample draws a platoon (sequence, laws, parameters), propagates the
//! leader's oscillation through it and records the closed final-period
//! (k, q) loop. The pooled loops are summarized by a kernel density, its
//! high-density convex hull and per-loop hysteresis measures.

mod hull;
mod kde;
mod metrics;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::macro_fd::{self, FdTrace, FdTraces, MacroModel};
use crate::platoon::{self, LawMix, LeaderSpec, PlatoonRealization, PlatoonSpec, SequenceScenario};
use crate::seed;

pub use hull::{convex_hull, polygon_area, signed_area, HullResult};
pub use kde::Kde;
pub use metrics::{
    hysteresis_metrics, hysteresis_metrics_with_hull, loop_measures, loop_orientation, percentile,
    representative_loop, representative_index, HysteresisReport, LoopMeasures, Orientation,
    OrientationCounts, PercentileRow, HULL_QUANTILE, PERCENTILES,
};

/// Everything that defines one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Followers behind the leader.
    pub n_vehicles: usize,
    pub penetration: f64,
    pub scenario: SequenceScenario,
    pub mix: LawMix,
    /// Leader position amplitude (m).
    pub a0: f64,
    /// rad/s.
    pub omega_p: f64,
    /// rad.
    pub phi_p: f64,
    /// m/s.
    pub v_e: f64,
    /// s.
    pub duration: f64,
    /// s.
    pub dt: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_vehicles: 20,
            penetration: 0.5,
            scenario: SequenceScenario::AvFirst,
            mix: LawMix::i24(),
            a0: 10.0,
            omega_p: 0.1,
            phi_p: 0.0,
            v_e: 15.0,
            duration: 200.0,
            dt: macro_fd::DEFAULT_DT,
            n_samples: 1000,
            seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(key, format!("must be positive, got {x}")))
            }
        };
        if self.n_vehicles == 0 {
            return Err(Error::validation("n_vehicles", "need at least one follower"));
        }
        if !(0.0..=1.0).contains(&self.penetration) {
            return Err(Error::validation(
                "penetration",
                format!("must lie in [0, 1], got {}", self.penetration),
            ));
        }
        if let SequenceScenario::Explicit(tags) = &self.scenario {
            if tags.len() != self.n_vehicles {
                return Err(Error::validation(
                    "scenario",
                    format!("explicit sequence has {} vehicles, n_vehicles is {}", tags.len(), self.n_vehicles),
                ));
            }
        }
        if !(self.a0 >= 0.0) || !self.a0.is_finite() {
            return Err(Error::validation("a0", format!("must be nonnegative, got {}", self.a0)));
        }
        positive("omega_p", self.omega_p)?;
        positive("v_e", self.v_e)?;
        positive("dt", self.dt)?;
        positive("duration", self.duration)?;
        if !self.phi_p.is_finite() {
            return Err(Error::validation("phi_p", "must be finite"));
        }
        let period = 2.0 * std::f64::consts::PI / self.omega_p;
        if self.duration < period {
            return Err(Error::validation(
                "duration",
                format!("must cover one period of {period:.3} s, got {}", self.duration),
            ));
        }
        if self.n_samples == 0 {
            return Err(Error::validation("n_samples", "need at least one sample"));
        }
        Ok(())
    }

    pub fn leader(&self) -> LeaderSpec {
        LeaderSpec {
            a0: self.a0,
            omega: self.omega_p,
            phi: self.phi_p,
            v_e: self.v_e,
        }
    }

    pub fn platoon_spec(&self) -> PlatoonSpec {
        PlatoonSpec {
            n_followers: self.n_vehicles,
            penetration: self.penetration,
            scenario: self.scenario.clone(),
            mix: self.mix.clone(),
            leader: self.leader(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: u64,
    pub realization: PlatoonRealization,
    /// Closed final-period loop.
    pub loop_trace: FdTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub sample_id: u64,
    pub reason: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub config: EnsembleConfig,
    /// Accepted samples in sample order.
    pub samples: Vec<SampleRecord>,
    pub rejected: Vec<Rejection>,
}

impl Ensemble {
    pub fn rejection_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rejected {
            *m.entry(r.reason.clone()).or_insert(0) += 1;
        }
        m
    }

    /// Final-period points of every accepted loop, in sample order.
    pub fn pooled_points(&self) -> Vec<[f64; 2]> {
        self.samples
            .iter()
            .flat_map(|s| s.loop_trace.loop_points())
            .collect()
    }

    /// Full trace of accepted sample `index`, regenerated from its realization.
    pub fn full_trace(&self, index: usize) -> Result<FdTraces> {
        let s = &self.samples[index];
        macro_fd::fd_trace_for(&s.realization, s.sample_id, self.config.duration, self.config.dt)
    }
}

/// Realization and final-period loop of sample `sample_id`.
pub fn run_sample(config: &EnsembleConfig, sample_id: u64) -> Result<SampleRecord> {
    let spec = config.platoon_spec();
    let realization = platoon::realize(&spec, seed::sample_seed(config.seed, sample_id))?;
    let model = MacroModel::new(&realization)?;
    let loop_trace = macro_fd::final_period_trace(&model, sample_id, config.duration, config.dt)?;
    Ok(SampleRecord {
        sample_id,
        realization,
        loop_trace,
    })
}

/// Run `n_samples` independent samples. Samples that fail (collision in a
/// simulated vehicle, degenerate spacing, ...) are recorded as rejected; the
/// run aborts when more than half are rejected.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<Ensemble> {
    config.validate()?;
    let outcomes: Vec<Result<SampleRecord>> = (0..config.n_samples as u64)
        .into_par_iter()
        .map(|i| run_sample(config, i))
        .collect();
    let mut samples = Vec::with_capacity(outcomes.len());
    let mut rejected = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(s) => samples.push(s),
            Err(e) => rejected.push(Rejection {
                sample_id: i as u64,
                reason: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
    if 2 * rejected.len() > config.n_samples {
        return Err(Error::TooManyRejected {
            rejected: rejected.len(),
            total: config.n_samples,
        });
    }
    Ok(Ensemble {
        config: config.clone(),
        samples,
        rejected,
    })
}

/// Kernel density of the pooled final-period points at `points`.
pub fn joint_pdf(ensemble: &Ensemble, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    if ensemble.samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            got: ensemble.samples.len(),
            needed: 2,
        });
    }
    let kde = Kde::new(&ensemble.pooled_points())?;
    Ok(points.iter().map(|p| kde.eval(*p)).collect())
}

/// Convex hull of the pooled points whose density is at least the
/// `quantile` of the density over all pooled points.
pub fn high_density_region(ensemble: &Ensemble, quantile: f64) -> Result<HullResult> {
    hull::high_density_hull(&ensemble.pooled_points(), quantile)
}

pub use hull::high_density_hull;

/// Density on a regular `nk × nq` grid spanning the pooled points, row-major
/// in `k` then `q`.
pub fn pdf_grid(ensemble: &Ensemble, nk: usize, nq: usize) -> Result<Vec<[f64; 3]>> {
    let pts = ensemble.pooled_points();
    if pts.is_empty() {
        return Err(Error::InsufficientSamples { got: 0, needed: 1 });
    }
    let kde = Kde::new(&pts)?;
    let ([k0, q0], [k1, q1]) = kde.padded_bounds();
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n < 2 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let (ks, qs) = (axis(k0, k1, nk), axis(q0, q1, nq));
    let mut out = Vec::with_capacity(ks.len() * qs.len());
    for &k in &ks {
        for &q in &qs {
            out.push([k, q, kde.eval([k, q])]);
        }
    }
    Ok(out)
}
