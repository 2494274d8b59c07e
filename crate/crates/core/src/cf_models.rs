//! Car-following laws: four nonlinear human-driver models (OVM, GFM, FVDM,
//! IDM) and two linear automated-vehicle controllers (LL, HL).
//!
//! Spacing is always the positive gap `leader position - follower position`,
//! and relative speed is `leader speed - follower speed`, so a closing
//! follower sees a negative relative speed.

use std::fmt;
use std::str::FromStr;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Maximum parameter draws before giving up on a reachable equilibrium.
pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Ovm,
    Gfm,
    Fvdm,
    Idm,
    Ll,
    Hl,
}

impl LawKind {
    pub const ALL: [LawKind; 6] = [
        LawKind::Fvdm,
        LawKind::Gfm,
        LawKind::Idm,
        LawKind::Ovm,
        LawKind::Ll,
        LawKind::Hl,
    ];
    /// Human-driver laws, in the order used by [`crate::platoon::LawMix::hdv_probs`].
    pub const HDV: [LawKind; 4] = [LawKind::Fvdm, LawKind::Gfm, LawKind::Idm, LawKind::Ovm];
    /// Automated-vehicle controllers, in the order used by [`crate::platoon::LawMix::av_probs`].
    pub const AV: [LawKind; 2] = [LawKind::Ll, LawKind::Hl];

    pub fn is_hdv(self) -> bool {
        !matches!(self, LawKind::Ll | LawKind::Hl)
    }

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Ovm => "ovm",
            LawKind::Gfm => "gfm",
            LawKind::Fvdm => "fvdm",
            LawKind::Idm => "idm",
            LawKind::Ll => "ll",
            LawKind::Hl => "hl",
        }
    }

    /// Uniform prior ranges `(field, lo, hi)` in the field order of the
    /// corresponding parameter struct.
    pub fn prior_ranges(self) -> &'static [(&'static str, f64, f64)] {
        match self {
            LawKind::Ovm => &[
                ("kappa", 1.0, 3.0),
                ("v1", 10.0, 20.0),
                ("v2", 15.0, 20.0),
                ("c1", 0.1, 0.3),
                ("c2", 15.0, 23.0),
            ],
            LawKind::Gfm => &[
                ("kappa", 1.0, 3.0),
                ("lambda", 2.0, 6.0),
                ("v1", 10.0, 20.0),
                ("v2", 15.0, 20.0),
                ("c1", 0.1, 0.3),
                ("c2", 15.0, 23.0),
            ],
            LawKind::Fvdm => &[
                ("tau", 0.5, 2.0),
                ("lambda", 1.0, 3.0),
                ("v1", 10.0, 20.0),
                ("v2", 15.0, 20.0),
                ("l_int", 1.5, 1.7),
                ("beta", 10.0, 15.0),
            ],
            LawKind::Idm => &[
                ("a_max", 0.5, 2.0),
                ("b", 1.0, 4.0),
                ("v_max", 30.0, 50.0),
                ("t_gap", 0.8, 1.5),
                ("s0", 1.0, 3.0),
                ("delta", 3.0, 4.5),
            ],
            // s0 reuses the vehicle-length range "l".
            LawKind::Ll => &[
                ("tau_gap", 0.8, 1.2),
                ("k_s", 0.1, 2.3),
                ("k_v", 0.1, 2.3),
                ("s0", 3.0, 8.0),
            ],
            LawKind::Hl => &[
                ("tau_gap", 0.8, 1.2),
                ("tt", 0.1, 0.5),
                ("k_s", 0.1, 2.3),
                ("k_v", 0.1, 2.3),
                ("k_a", -3.0, 0.0),
                ("s0", 3.0, 8.0),
            ],
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ovm" => Ok(LawKind::Ovm),
            "gfm" => Ok(LawKind::Gfm),
            "fvdm" => Ok(LawKind::Fvdm),
            "idm" => Ok(LawKind::Idm),
            "ll" => Ok(LawKind::Ll),
            "hl" => Ok(LawKind::Hl),
            other => Err(Error::validation("law", format!("unknown law `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvmParams {
    /// Sensitivity (1/s).
    pub kappa: f64,
    pub v1: f64,
    pub v2: f64,
    /// Steepness (1/m).
    pub c1: f64,
    /// Jam spacing (m).
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GfmParams {
    pub kappa: f64,
    /// Braking gain on closing speed (1/s).
    pub lambda: f64,
    pub v1: f64,
    pub v2: f64,
    pub c1: f64,
    pub c2: f64,
}

/// FVDM with optimal velocity `V1 + V2 tanh(dx / l_int - beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvdmParams {
    /// Relaxation time (s).
    pub tau: f64,
    pub lambda: f64,
    pub v1: f64,
    pub v2: f64,
    pub l_int: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    pub a_max: f64,
    pub b: f64,
    pub v_max: f64,
    /// Desired time headway (s).
    pub t_gap: f64,
    pub s0: f64,
    pub delta: f64,
}

/// Lower-order linear controller with constant time-gap spacing policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlParams {
    pub tau_gap: f64,
    pub k_s: f64,
    pub k_v: f64,
    pub s0: f64,
}

/// Higher-order linear controller with actuation lag `tt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlParams {
    pub tau_gap: f64,
    pub tt: f64,
    pub k_s: f64,
    pub k_v: f64,
    pub k_a: f64,
    pub s0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", content = "params", rename_all = "lowercase")]
pub enum CarFollowingLaw {
    Ovm(OvmParams),
    Gfm(GfmParams),
    Fvdm(FvdmParams),
    Idm(IdmParams),
    Ll(LlParams),
    Hl(HlParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub speed: f64,
    pub spacing: f64,
    /// Leader speed minus follower speed.
    pub rel_speed: f64,
}

impl VehicleState {
    pub fn new(speed: f64, spacing: f64, rel_speed: f64) -> Self {
        Self {
            speed,
            spacing,
            rel_speed,
        }
    }
}

/// `V(dx) = v1 + v2 tanh(c1 (dx - c2))`.
///
/// The FVDM curve `V1 + V2 tanh(dx / l_int - beta)` is the same family with
/// `c1 = 1 / l_int` and `c2 = beta * l_int`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvCurve {
    pub v1: f64,
    pub v2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl OvCurve {
    pub fn value(&self, spacing: f64) -> f64 {
        self.v1 + self.v2 * (self.c1 * (spacing - self.c2)).tanh()
    }

    pub fn slope(&self, spacing: f64) -> f64 {
        let c = (self.c1 * (spacing - self.c2)).cosh();
        self.v2 * self.c1 / (c * c)
    }

    /// Spacing where the curve equals `speed` (an `artanh`, so that
    /// `value(inverse(v)) == v`).
    pub fn inverse(&self, speed: f64) -> Result<f64> {
        let arg = (speed - self.v1) / self.v2;
        if !(arg.abs() < 1.0) {
            return Err(Error::domain(format!(
                "speed {speed} m/s outside optimal-velocity range ({}, {})",
                self.v1 - self.v2,
                self.v1 + self.v2
            )));
        }
        Ok(self.c2 + arg.atanh() / self.c1)
    }
}

impl CarFollowingLaw {
    pub fn kind(&self) -> LawKind {
        match self {
            CarFollowingLaw::Ovm(_) => LawKind::Ovm,
            CarFollowingLaw::Gfm(_) => LawKind::Gfm,
            CarFollowingLaw::Fvdm(_) => LawKind::Fvdm,
            CarFollowingLaw::Idm(_) => LawKind::Idm,
            CarFollowingLaw::Ll(_) => LawKind::Ll,
            CarFollowingLaw::Hl(_) => LawKind::Hl,
        }
    }

    /// The optimal-velocity curve, for the three tanh-based laws.
    pub fn ov_curve(&self) -> Option<OvCurve> {
        match *self {
            CarFollowingLaw::Ovm(p) => Some(OvCurve {
                v1: p.v1,
                v2: p.v2,
                c1: p.c1,
                c2: p.c2,
            }),
            CarFollowingLaw::Gfm(p) => Some(OvCurve {
                v1: p.v1,
                v2: p.v2,
                c1: p.c1,
                c2: p.c2,
            }),
            CarFollowingLaw::Fvdm(p) => Some(OvCurve {
                v1: p.v1,
                v2: p.v2,
                c1: 1.0 / p.l_int,
                c2: p.beta * p.l_int,
            }),
            _ => None,
        }
    }

    /// Parameter values in [`LawKind::prior_ranges`] order.
    pub fn param_values(&self) -> Vec<f64> {
        match *self {
            CarFollowingLaw::Ovm(p) => vec![p.kappa, p.v1, p.v2, p.c1, p.c2],
            CarFollowingLaw::Gfm(p) => vec![p.kappa, p.lambda, p.v1, p.v2, p.c1, p.c2],
            CarFollowingLaw::Fvdm(p) => vec![p.tau, p.lambda, p.v1, p.v2, p.l_int, p.beta],
            CarFollowingLaw::Idm(p) => vec![p.a_max, p.b, p.v_max, p.t_gap, p.s0, p.delta],
            CarFollowingLaw::Ll(p) => vec![p.tau_gap, p.k_s, p.k_v, p.s0],
            CarFollowingLaw::Hl(p) => vec![p.tau_gap, p.tt, p.k_s, p.k_v, p.k_a, p.s0],
        }
    }

    /// Build a law from values in [`LawKind::prior_ranges`] order.
    pub fn from_values(kind: LawKind, v: &[f64]) -> Result<Self> {
        let n = kind.prior_ranges().len();
        if v.len() != n {
            return Err(Error::domain(format!(
                "{kind} takes {n} parameters, got {}",
                v.len()
            )));
        }
        Ok(match kind {
            LawKind::Ovm => CarFollowingLaw::Ovm(OvmParams {
                kappa: v[0],
                v1: v[1],
                v2: v[2],
                c1: v[3],
                c2: v[4],
            }),
            LawKind::Gfm => CarFollowingLaw::Gfm(GfmParams {
                kappa: v[0],
                lambda: v[1],
                v1: v[2],
                v2: v[3],
                c1: v[4],
                c2: v[5],
            }),
            LawKind::Fvdm => CarFollowingLaw::Fvdm(FvdmParams {
                tau: v[0],
                lambda: v[1],
                v1: v[2],
                v2: v[3],
                l_int: v[4],
                beta: v[5],
            }),
            LawKind::Idm => CarFollowingLaw::Idm(IdmParams {
                a_max: v[0],
                b: v[1],
                v_max: v[2],
                t_gap: v[3],
                s0: v[4],
                delta: v[5],
            }),
            LawKind::Ll => CarFollowingLaw::Ll(LlParams {
                tau_gap: v[0],
                k_s: v[1],
                k_v: v[2],
                s0: v[3],
            }),
            LawKind::Hl => CarFollowingLaw::Hl(HlParams {
                tau_gap: v[0],
                tt: v[1],
                k_s: v[2],
                k_v: v[3],
                k_a: v[4],
                s0: v[5],
            }),
        })
    }

    /// Law with every parameter at the midpoint of its prior range.
    pub fn prior_midpoint(kind: LawKind) -> Self {
        let mids: Vec<f64> = kind
            .prior_ranges()
            .iter()
            .map(|&(_, lo, hi)| 0.5 * (lo + hi))
            .collect();
        Self::from_values(kind, &mids).expect("midpoint vector has the right length")
    }

    /// Parameter invariants (positivity and friends).
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CarFollowingLaw::Ovm(p) => p.kappa > 0.0 && p.v2 > 0.0 && p.c1 > 0.0 && p.c2 > 0.0,
            CarFollowingLaw::Gfm(p) => {
                p.kappa > 0.0 && p.lambda > 0.0 && p.v2 > 0.0 && p.c1 > 0.0 && p.c2 > 0.0
            }
            CarFollowingLaw::Fvdm(p) => p.tau > 0.0 && p.v2 > 0.0 && p.l_int > 0.0,
            CarFollowingLaw::Idm(p) => {
                p.a_max > 0.0
                    && p.b > 0.0
                    && p.v_max > 0.0
                    && p.t_gap > 0.0
                    && p.s0 > 0.0
                    && p.delta >= 1.0
            }
            CarFollowingLaw::Ll(p) => p.tau_gap > 0.0 && p.k_s > 0.0 && p.k_v > 0.0 && p.s0 > 0.0,
            CarFollowingLaw::Hl(p) => {
                p.tau_gap > 0.0
                    && p.tt > 0.0
                    && p.k_s > 0.0
                    && p.k_v > 0.0
                    && p.s0 > 0.0
                    && (-3.0..=0.0).contains(&p.k_a)
            }
        };
        let finite = self.param_values().iter().all(|x| x.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid {} parameters: {:?}", self.kind(), self)))
        }
    }

    /// Instantaneous acceleration (m/s²).
    ///
    /// HL is a third-order controller; its surface here is the commanded
    /// acceleration with its own acceleration state at zero.
    pub fn acceleration(&self, state: &VehicleState) -> Result<f64> {
        let VehicleState {
            speed: v,
            spacing: s,
            rel_speed: dv,
        } = *state;
        match *self {
            CarFollowingLaw::Ovm(p) => {
                let curve = self.ov_curve().expect("ovm has a curve");
                Ok(p.kappa * (curve.value(s) - v))
            }
            CarFollowingLaw::Gfm(p) => {
                let curve = self.ov_curve().expect("gfm has a curve");
                Ok(p.kappa * (curve.value(s) - v) + p.lambda * dv.min(0.0))
            }
            CarFollowingLaw::Fvdm(p) => {
                let curve = self.ov_curve().expect("fvdm has a curve");
                Ok((curve.value(s) - v) / p.tau + p.lambda * dv)
            }
            CarFollowingLaw::Idm(p) => {
                if !(s > 0.0) {
                    return Err(Error::domain(format!("IDM spacing must be positive, got {s}")));
                }
                Ok(idm_accel(&p, v, s, dv))
            }
            CarFollowingLaw::Ll(p) => Ok(p.k_s * (s - p.s0 - p.tau_gap * v) + p.k_v * dv),
            CarFollowingLaw::Hl(p) => Ok(p.k_s * (s - p.s0 - p.tau_gap * v) + p.k_v * dv),
        }
    }

    /// Spacing at which the law holds speed `v_e` with zero acceleration.
    pub fn equilibrium_spacing(&self, v_e: f64) -> Result<f64> {
        if !v_e.is_finite() || v_e < 0.0 {
            return Err(Error::domain(format!("equilibrium speed {v_e} m/s")));
        }
        let dx = match *self {
            CarFollowingLaw::Ovm(_) | CarFollowingLaw::Gfm(_) | CarFollowingLaw::Fvdm(_) => {
                self.ov_curve().expect("tanh law").inverse(v_e)?
            }
            CarFollowingLaw::Idm(p) => {
                if v_e >= p.v_max {
                    return Err(Error::domain(format!(
                        "v_e = {v_e} m/s is not below v_max = {} m/s",
                        p.v_max
                    )));
                }
                (p.s0 + v_e * p.t_gap) / (1.0 - (v_e / p.v_max).powf(p.delta)).sqrt()
            }
            CarFollowingLaw::Ll(p) => p.s0 + p.tau_gap * v_e,
            CarFollowingLaw::Hl(p) => p.s0 + p.tau_gap * v_e,
        };
        if dx > 0.0 && dx.is_finite() {
            Ok(dx)
        } else {
            Err(Error::domain(format!(
                "non-positive equilibrium spacing {dx} m at v_e = {v_e} m/s"
            )))
        }
    }
}

#[inline]
pub(crate) fn idm_accel(p: &IdmParams, v: f64, s: f64, dv: f64) -> f64 {
    let closing = -dv;
    let s_star = p.s0 + v * p.t_gap + v * closing / (2.0 * (p.a_max * p.b).sqrt());
    let free = (v.max(0.0) / p.v_max).powf(p.delta);
    let r = s_star / s;
    p.a_max * (1.0 - free - r * r)
}

/// Optimal velocity of a tanh-based law at `spacing`.
pub fn optimal_velocity(law: &CarFollowingLaw, spacing: f64) -> Result<f64> {
    law.ov_curve()
        .map(|c| c.value(spacing))
        .ok_or_else(|| Error::domain(format!("{} has no optimal-velocity curve", law.kind())))
}

pub fn acceleration(law: &CarFollowingLaw, state: &VehicleState) -> Result<f64> {
    law.acceleration(state)
}

pub fn equilibrium_spacing(law: &CarFollowingLaw, v_e: f64) -> Result<f64> {
    law.equilibrium_spacing(v_e)
}

/// Draw a parameter vector uniformly from the law's prior, rejecting draws
/// that cannot hold `v_e`.
pub fn sample_parameters(kind: LawKind, v_e: f64, seed: u64) -> Result<CarFollowingLaw> {
    let mut rng = seed::rng_from(seed);
    sample_parameters_with(kind, v_e, &mut rng)
}

pub(crate) fn sample_parameters_with<R: rand::Rng>(
    kind: LawKind,
    v_e: f64,
    rng: &mut R,
) -> Result<CarFollowingLaw> {
    let ranges = kind.prior_ranges();
    let mut values = vec![0.0; ranges.len()];
    for _ in 0..MAX_REJECTIONS {
        for (slot, &(_, lo, hi)) in values.iter_mut().zip(ranges) {
            *slot = lo + (hi - lo) * rng.random::<f64>();
        }
        let law = CarFollowingLaw::from_values(kind, &values)?;
        if law.equilibrium_spacing(v_e).is_ok() {
            return Ok(law);
        }
    }
    Err(Error::RejectionExhausted {
        law: kind,
        v_e,
        attempts: MAX_REJECTIONS,
    })
}

/// Acceleration on a grid around the equilibrium at `v_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelerationSurface {
    pub law: LawKind,
    pub v_e: f64,
    pub equilibrium_spacing: f64,
    /// Column axis: relative speed (m/s).
    pub rel_speed: Vec<f64>,
    /// Row axis: deviation from equilibrium spacing (m).
    pub spacing_dev: Vec<f64>,
    /// `values[row][col]` in m/s².
    pub values: Vec<Vec<f64>>,
}

pub fn acceleration_surface(
    law: &CarFollowingLaw,
    v_e: f64,
    rel_speed: &[f64],
    spacing_dev: &[f64],
) -> Result<AccelerationSurface> {
    let dx_e = law.equilibrium_spacing(v_e)?;
    let values = spacing_dev
        .iter()
        .map(|&ds| {
            rel_speed
                .iter()
                .map(|&dv| law.acceleration(&VehicleState::new(v_e, dx_e + ds, dv)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccelerationSurface {
        law: law.kind(),
        v_e,
        equilibrium_spacing: dx_e,
        rel_speed: rel_speed.to_vec(),
        spacing_dev: spacing_dev.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ovm_example() -> CarFollowingLaw {
        CarFollowingLaw::Ovm(OvmParams {
            kappa: 2.0,
            v1: 15.0,
            v2: 16.0,
            c1: 0.2,
            c2: 20.0,
        })
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn optimal_velocity_examples() {
        let law = ovm_example();
        assert_eq!(optimal_velocity(&law, 20.0).unwrap(), 15.0);
        assert!((optimal_velocity(&law, 1e6).unwrap() - 31.0).abs() < 1e-12);
        assert!((optimal_velocity(&law, 25.0).unwrap() - 27.185_507).abs() < 1e-5);
        assert!(optimal_velocity(&CarFollowingLaw::prior_midpoint(LawKind::Idm), 20.0).is_err());
    }

    #[test]
    fn gfm_braking_term_is_gated() {
        let ovm = ovm_example();
        let gfm = CarFollowingLaw::Gfm(GfmParams {
            kappa: 2.0,
            lambda: 4.0,
            v1: 15.0,
            v2: 16.0,
            c1: 0.2,
            c2: 20.0,
        });
        let opening = VehicleState::new(14.0, 22.0, 1.5);
        assert_eq!(
            gfm.acceleration(&opening).unwrap(),
            ovm.acceleration(&opening).unwrap()
        );
        let closing = VehicleState::new(14.0, 22.0, -1.5);
        let diff = gfm.acceleration(&closing).unwrap() - ovm.acceleration(&closing).unwrap();
        assert!((diff + 6.0).abs() < 1e-12);
    }

    #[test]
    fn idm_free_road_limit_and_bad_spacing() {
        let law = CarFollowingLaw::Idm(IdmParams {
            a_max: 1.5,
            b: 2.0,
            v_max: 30.0,
            t_gap: 1.0,
            s0: 2.0,
            delta: 4.0,
        });
        let a = law.acceleration(&VehicleState::new(0.0, 1e6, 0.0)).unwrap();
        assert!((a - 1.5).abs() < 1e-6);
        assert!(law.acceleration(&VehicleState::new(10.0, 0.0, 0.0)).is_err());
        assert!(law.acceleration(&VehicleState::new(10.0, -3.0, 0.0)).is_err());
    }

    #[test]
    fn equilibrium_spacing_examples() {
        assert!((ovm_example().equilibrium_spacing(15.0).unwrap() - 20.0).abs() < 1e-12);

        let idm = CarFollowingLaw::Idm(IdmParams {
            a_max: 1.0,
            b: 2.0,
            v_max: 30.0,
            t_gap: 1.0,
            s0: 2.0,
            delta: 4.0,
        });
        // 17 / sqrt(1 - 0.5^4)
        let dx = idm.equilibrium_spacing(15.0).unwrap();
        assert!((dx - 17.557_519).abs() < 1e-5, "{dx}");
        let a = idm.acceleration(&VehicleState::new(15.0, dx, 0.0)).unwrap();
        assert!(a.abs() < 1e-12);

        let ll = CarFollowingLaw::Ll(LlParams {
            tau_gap: 1.0,
            k_s: 0.5,
            k_v: 0.5,
            s0: 5.0,
        });
        assert_eq!(ll.equilibrium_spacing(15.0).unwrap(), 20.0);
    }

    #[test]
    fn equilibrium_spacing_rejects_unreachable_speed() {
        // v1 + v2 = 31 is the free-flow ceiling.
        assert!(matches!(
            ovm_example().equilibrium_spacing(31.0),
            Err(Error::Domain(_))
        ));
        let idm = CarFollowingLaw::prior_midpoint(LawKind::Idm);
        assert!(idm.equilibrium_spacing(45.0).is_err());
    }

    #[test]
    fn ovm_and_gfm_share_equilibrium() {
        let ovm = ovm_example();
        let gfm = CarFollowingLaw::Gfm(GfmParams {
            kappa: 1.3,
            lambda: 5.0,
            v1: 15.0,
            v2: 16.0,
            c1: 0.2,
            c2: 20.0,
        });
        for v_e in [5.0, 12.0, 15.0, 22.0, 29.0] {
            assert_eq!(
                ovm.equilibrium_spacing(v_e).unwrap(),
                gfm.equilibrium_spacing(v_e).unwrap()
            );
        }
    }

    #[test]
    fn sampled_draws_are_in_range_and_at_equilibrium() {
        for kind in LawKind::ALL {
            for s in 0..200u64 {
                let law = sample_parameters(kind, 15.0, s).unwrap();
                law.validate().unwrap();
                for (x, &(name, lo, hi)) in law.param_values().iter().zip(kind.prior_ranges()) {
                    assert!(*x >= lo && *x <= hi, "{kind} {name} = {x}");
                }
                let dx = law.equilibrium_spacing(15.0).unwrap();
                let a = law.acceleration(&VehicleState::new(15.0, dx, 0.0)).unwrap();
                assert!(a.abs() < 1e-6, "{kind}: {a}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        for kind in LawKind::ALL {
            let a = sample_parameters(kind, 15.0, 42).unwrap();
            let b = sample_parameters(kind, 15.0, 42).unwrap();
            let bits = |l: &CarFollowingLaw| {
                l.param_values().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            };
            assert_eq!(bits(&a), bits(&b));
        }
    }

    #[test]
    fn unreachable_speed_exhausts_rejection() {
        // The OVM prior tops out at v1 + v2 = 40 m/s.
        let err = sample_parameters(LawKind::Ovm, 45.0, 1).unwrap_err();
        assert!(matches!(err, Error::RejectionExhausted { attempts: MAX_REJECTIONS, .. }));
    }

    #[test]
    fn equilibrium_spacing_is_increasing() {
        for kind in LawKind::ALL {
            let law = CarFollowingLaw::prior_midpoint(kind);
            let speeds = linspace(0.5, 24.5, 97);
            let spacings: Vec<f64> = speeds
                .iter()
                .map(|&v| law.equilibrium_spacing(v).unwrap())
                .collect();
            assert!(spacings.windows(2).all(|w| w[1] > w[0]), "{kind}");
        }
    }

    #[test]
    fn ov_curve_is_bounded() {
        let c = ovm_example().ov_curve().unwrap();
        for x in linspace(-1e3, 1e3, 2001) {
            let v = c.value(x);
            assert!(v >= c.v1 - c.v2 && v <= c.v1 + c.v2);
        }
    }

    #[test]
    fn surfaces_vanish_at_equilibrium() {
        let dv = linspace(-2.0, 2.0, 9);
        let ds = linspace(-4.0, 4.0, 9);
        for kind in LawKind::ALL {
            let law = CarFollowingLaw::prior_midpoint(kind);
            let surf = acceleration_surface(&law, 15.0, &dv, &ds).unwrap();
            assert!(surf.values[4][4].abs() < 1e-9, "{kind}");
        }
    }

    fn second_differences(values: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 1..values.len() - 1 {
            for c in 1..values[0].len() - 1 {
                let d_row = values[r + 1][c] - 2.0 * values[r][c] + values[r - 1][c];
                let d_col = values[r][c + 1] - 2.0 * values[r][c] + values[r][c - 1];
                worst = worst.max(d_row.abs()).max(d_col.abs());
            }
        }
        worst
    }

    #[test]
    fn ll_surface_is_affine_ovm_is_not() {
        let dv = linspace(-2.0, 2.0, 11);
        let ds = linspace(-8.0, 8.0, 11);
        let ll = CarFollowingLaw::prior_midpoint(LawKind::Ll);
        let surf = acceleration_surface(&ll, 15.0, &dv, &ds).unwrap();
        assert!(second_differences(&surf.values) < 1e-12);

        let ovm = CarFollowingLaw::prior_midpoint(LawKind::Ovm);
        let surf = acceleration_surface(&ovm, 15.0, &dv, &ds).unwrap();
        assert!(second_differences(&surf.values) > 1e-3);
    }
}
