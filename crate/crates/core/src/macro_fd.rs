//! Density and flow of one platoon realization over time.
//!
//! The platoon of `N` followers occupies the road between the leader and the
//! last follower. With leader motion `A0 sin(ωt + φp)` and follower `l`
//! responding with `A0 P_l sin(ωt + φp + Φ_l)`, the occupied length is
//! `ΣΔx_e + R A0 sin(ωt + φp − Φ̃)` where `R e^{−jΦ̃} = 1 − P_N e^{jΦ_N}`.
//! Density is `N` over that length; flow is the summed follower speed over
//! the same length.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platoon::{self, CascadeState, PlatoonRealization};

pub const M_PER_KM: f64 = 1000.0;
pub const S_PER_H: f64 = 3600.0;
/// Largest swing of the occupied length, as a fraction of its mean.
pub const MAX_SWING_FRACTION: f64 = 0.95;
/// Sampling step of emitted traces (25 Hz).
pub const DEFAULT_DT: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopClosure {
    pub r: f64,
    pub phi: f64,
}

/// `R = |1 − P e^{jΦ}|`, `Φ̃ = −arg(1 − P e^{jΦ})`, with `Φ̃ = 0` when `R = 0`.
pub fn loop_closure(p_n: f64, phi_n: f64) -> LoopClosure {
    let (s, c) = phi_n.sin_cos();
    let r = (1.0 - 2.0 * p_n * c + p_n * p_n).max(0.0).sqrt();
    let (y, x) = (p_n * s, 1.0 - p_n * c);
    let phi = if y == 0.0 && x == 0.0 { 0.0 } else { y.atan2(x) };
    LoopClosure { r, phi }
}

/// The time-invariant pieces of the density and flow formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroModel {
    pub n: f64,
    /// `ΣΔx_e` (m).
    pub total_spacing: f64,
    pub closure: LoopClosure,
    /// `Σ P_l e^{jΦ_l}`.
    pub speed_phasor: Complex64,
    pub a0: f64,
    pub omega: f64,
    pub phi_p: f64,
    pub v_e: f64,
}

impl MacroModel {
    pub fn new(realization: &PlatoonRealization) -> Result<Self> {
        let states = platoon::cascade(realization);
        let last = states.last().copied().unwrap_or(CascadeState { p: 1.0, phi: 0.0 });
        Self::with_parts(realization, loop_closure(last.p, last.phi), &states)
    }

    fn with_parts(
        realization: &PlatoonRealization,
        closure: LoopClosure,
        cascade: &[CascadeState],
    ) -> Result<Self> {
        if realization.is_empty() {
            return Err(Error::domain("platoon has no followers"));
        }
        if cascade.len() != realization.len() {
            return Err(Error::domain("cascade length differs from platoon length"));
        }
        let leader = realization.leader;
        let total_spacing = realization.total_spacing();
        let swing = closure.r * leader.a0;
        if swing >= MAX_SWING_FRACTION * total_spacing {
            return Err(Error::DegenerateSpacing {
                amplitude: swing,
                length: total_spacing,
            });
        }
        Ok(Self {
            n: realization.len() as f64,
            total_spacing,
            closure,
            speed_phasor: cascade.iter().map(|c| Complex64::from_polar(c.p, c.phi)).sum(),
            a0: leader.a0,
            omega: leader.omega,
            phi_p: leader.phi,
            v_e: leader.v_e,
        })
    }

    /// Occupied length (m).
    pub fn length(&self, t: f64) -> f64 {
        let arg = self.omega * t + self.phi_p - self.closure.phi;
        self.total_spacing + self.closure.r * self.a0 * arg.sin()
    }

    /// Summed follower speed (m/s).
    pub fn speed_sum(&self, t: f64) -> f64 {
        let rot = Complex64::from_polar(1.0, self.omega * t + self.phi_p);
        self.n * self.v_e + self.a0 * self.omega * (rot * self.speed_phasor).re
    }

    /// veh/km.
    pub fn density(&self, t: f64) -> f64 {
        self.n / self.length(t) * M_PER_KM
    }

    /// veh/h.
    pub fn flow(&self, t: f64) -> f64 {
        self.speed_sum(t) / self.length(t) * S_PER_H
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Density (veh/km) at time `t`.
pub fn density_at(t: f64, realization: &PlatoonRealization, closure: LoopClosure) -> Result<f64> {
    let cascade = platoon::cascade(realization);
    Ok(MacroModel::with_parts(realization, closure, &cascade)?.density(t))
}

/// Flow (veh/h) at time `t`.
pub fn flow_at(
    t: f64,
    realization: &PlatoonRealization,
    closure: LoopClosure,
    cascade: &[CascadeState],
) -> Result<f64> {
    Ok(MacroModel::with_parts(realization, closure, cascade)?.flow(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdTrace {
    pub sample_id: u64,
    pub t: Vec<f64>,
    /// veh/km.
    pub k: Vec<f64>,
    /// veh/h.
    pub q: Vec<f64>,
}

impl FdTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn sample(model: &MacroModel, sample_id: u64, times: Vec<f64>) -> Self {
        Self {
            sample_id,
            k: times.iter().map(|&t| model.density(t)).collect(),
            q: times.iter().map(|&t| model.flow(t)).collect(),
            t: times,
        }
    }

    /// Points of a closed loop without the repeated endpoint.
    pub fn loop_points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        let n = self.len().saturating_sub(1);
        self.k.iter().zip(&self.q).take(n).map(|(&k, &q)| [k, q])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdTraces {
    /// Uniform grid `0, dt, ..., duration`.
    pub full: FdTrace,
    /// Exactly the last period `[duration − T, duration]` on a grid of
    /// `ceil(T/dt)` equal steps; the first and last points coincide.
    pub final_period: FdTrace,
}

pub fn fd_trace(realization: &PlatoonRealization, duration: f64, dt: f64) -> Result<FdTraces> {
    fd_trace_for(realization, 0, duration, dt)
}

pub fn fd_trace_for(
    realization: &PlatoonRealization,
    sample_id: u64,
    duration: f64,
    dt: f64,
) -> Result<FdTraces> {
    let model = MacroModel::new(realization)?;
    Ok(FdTraces {
        full: FdTrace::sample(&model, sample_id, full_grid(duration, dt, model.period())?),
        final_period: final_period_trace(&model, sample_id, duration, dt)?,
    })
}

/// Only the closed final-period loop, skipping the full grid.
pub fn final_period_trace(
    model: &MacroModel,
    sample_id: u64,
    duration: f64,
    dt: f64,
) -> Result<FdTrace> {
    let period = model.period();
    check_grid(duration, dt, period)?;
    let steps = (period / dt).ceil() as usize;
    let h = period / steps as f64;
    let start = duration - period;
    let times = (0..=steps).map(|i| start + h * i as f64).collect();
    Ok(FdTrace::sample(model, sample_id, times))
}

fn check_grid(duration: f64, dt: f64, period: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::validation("dt", format!("must be positive, got {dt}")));
    }
    if !(duration >= period) || !duration.is_finite() {
        return Err(Error::validation(
            "duration",
            format!("must cover one period of {period:.3} s, got {duration}"),
        ));
    }
    Ok(())
}

fn full_grid(duration: f64, dt: f64, period: f64) -> Result<Vec<f64>> {
    check_grid(duration, dt, period)?;
    // Tolerate representation error in duration/dt (200/0.04 is 4999.999...).
    let steps = (duration / dt * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=steps).map(|i| dt * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf_models::{CarFollowingLaw, LawKind, LlParams};
    use crate::platoon::{LeaderSpec, VehicleClass, VehicleRecord};

    /// A platoon with prescribed gains and phases.
    fn synthetic(gains: &[(f64, f64)], dx_e: f64, a0: f64, omega: f64) -> PlatoonRealization {
        let law = CarFollowingLaw::Ll(LlParams {
            tau_gap: 1.0,
            k_s: 0.2,
            k_v: 0.5,
            s0: dx_e - 15.0,
        });
        let mut a = a0;
        let vehicles = gains
            .iter()
            .map(|&(g, p)| {
                a *= g;
                VehicleRecord {
                    class: VehicleClass::Av,
                    law,
                    dx_e,
                    gain: g,
                    phase: p,
                    amplitude: a,
                }
            })
            .collect();
        PlatoonRealization {
            leader: LeaderSpec::new(a0, omega, 15.0),
            vehicles,
        }
    }

    fn lagging(n: usize) -> Vec<(f64, f64)> {
        (0..n).map(|i| (0.97 + 0.004 * i as f64, -0.05 - 0.01 * i as f64)).collect()
    }

    #[test]
    fn closure_examples() {
        let c = loop_closure(0.0, 1.3);
        assert_eq!((c.r, c.phi), (1.0, 0.0));
        let c = loop_closure(1.0, PI);
        assert!((c.r - 2.0).abs() < 1e-15 && c.phi.abs() < 1e-15);
        let c = loop_closure(1.0, 0.0);
        assert_eq!((c.r, c.phi), (0.0, 0.0));
        for p in [0.3, 0.9, 1.7] {
            assert!((loop_closure(p, 0.0).r - (1.0 - p).abs()).abs() < 1e-15);
            assert!((loop_closure(p, PI).r - (1.0 + p)).abs() < 1e-14);
        }
    }

    #[test]
    fn closure_matches_complex_form() {
        for (p, phi) in [(0.8, -0.7), (1.2, 2.5), (0.4, -3.0)] {
            let z = Complex64::new(1.0, 0.0) - Complex64::from_polar(p, phi);
            let c = loop_closure(p, phi);
            assert!((c.r - z.norm()).abs() < 1e-14);
            assert!((c.phi + z.arg()).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_case() {
        let r = synthetic(&vec![(1.0, 0.0); 20], 20.0, 0.0, 0.1);
        let cl = loop_closure(1.0, 0.0);
        let cascade = platoon::cascade(&r);
        for t in [0.0, 3.7, 150.0] {
            let k = density_at(t, &r, cl).unwrap();
            let q = flow_at(t, &r, cl, &cascade).unwrap();
            assert!((k - 50.0).abs() < 1e-12);
            assert!((q - 2700.0).abs() < 1e-9);
            assert!((q / k / 3.6 - 15.0).abs() < 1e-9 * 15.0);
        }
    }

    #[test]
    fn density_extremes_at_half_length_swing() {
        // One follower at antiphase with unit gain gives R = 2, so A0 = L/4
        // puts the swing at L/2.
        let r = synthetic(&[(1.0, PI)], 40.0, 10.0, 0.1);
        let m = MacroModel::new(&r).unwrap();
        assert!((m.closure.r * m.a0 - 20.0).abs() < 1e-12);
        let tr = fd_trace(&r, 200.0, 0.001).unwrap();
        let kmax = tr.full.k.iter().cloned().fold(f64::MIN, f64::max);
        let kmin = tr.full.k.iter().cloned().fold(f64::MAX, f64::min);
        assert!((kmax / (1.0 / 20.0 * 1000.0) - 1.0).abs() < 1e-6);
        assert!((kmin / (1.0 / 60.0 * 1000.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn oversized_swing_is_degenerate() {
        let r = synthetic(&[(1.0, PI)], 20.0, 9.6, 0.1);
        assert!(matches!(MacroModel::new(&r), Err(Error::DegenerateSpacing { .. })));
    }

    #[test]
    fn speed_phasor_matches_literal_sum() {
        let r = synthetic(&lagging(20), 20.0, 10.0, 0.1);
        let m = MacroModel::new(&r).unwrap();
        let cascade = platoon::cascade(&r);
        for t in [0.0, 1.3, 77.7] {
            let literal: f64 = cascade
                .iter()
                .map(|c| c.p * (m.omega * t + m.phi_p + c.phi).cos())
                .sum();
            let lhs = m.speed_sum(t);
            let rhs = m.n * m.v_e + m.a0 * m.omega * literal;
            assert!((lhs - rhs).abs() < 1e-12 * rhs);
        }
    }

    #[test]
    fn oscillatory_numerator_averages_to_zero() {
        let r = synthetic(&lagging(20), 20.0, 10.0, 0.1);
        let m = MacroModel::new(&r).unwrap();
        let n = 1000;
        let mean: f64 = (0..n)
            .map(|i| m.speed_sum(m.period() * i as f64 / n as f64) - m.n * m.v_e)
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 1e-9);
    }

    #[test]
    fn grid_sizes() {
        let r = synthetic(&lagging(20), 20.0, 10.0, 0.1);
        let tr = fd_trace(&r, 200.0, 0.04).unwrap();
        assert_eq!(tr.full.len(), 5001);
        let fp = &tr.final_period;
        assert!((fp.t[fp.len() - 1] - fp.t[0] - 2.0 * PI / 0.1).abs() < 1e-9);
        assert!((fp.t[fp.len() - 1] - 200.0).abs() < 1e-9);
        assert!((fp.k[0] - fp.k[fp.len() - 1]).abs() < 1e-9 * fp.k[0]);
        assert!(tr.full.k.iter().all(|&k| k > 0.0));
        assert!(fd_trace(&r, 50.0, 0.04).is_err());
        assert!(fd_trace(&r, 200.0, 0.0).is_err());
    }

    #[test]
    fn traces_are_periodic() {
        let r = synthetic(&lagging(20), 20.0, 10.0, 0.1);
        let m = MacroModel::new(&r).unwrap();
        for t in [0.0, 5.5, 33.0] {
            let t2 = t + m.period();
            assert!((m.density(t) / m.density(t2) - 1.0).abs() < 1e-9);
            assert!((m.flow(t) / m.flow(t2) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_amplitude_loop_is_a_point() {
        let law = CarFollowingLaw::prior_midpoint(LawKind::Ovm);
        let r = platoon::propagate_amplitudes(&[law; 5], &LeaderSpec::new(0.0, 0.1, 15.0)).unwrap();
        let tr = fd_trace(&r, 200.0, 0.04).unwrap();
        let k0 = tr.final_period.k[0];
        assert!(tr.final_period.k.iter().all(|&k| k == k0));
    }
}
