//! Closed-form frequency responses.
//!
//! [`linear_gain`] evaluates the transfer-function skeletons: for the
//! human-driver laws these map an optimal-velocity perturbation to the
//! follower's speed and serve as the linear block of the harmonic-balance
//! loop; for LL and HL they are the full predecessor-to-follower gains.
//! [`linearized_gain`] is the exact small-signal predecessor-to-follower gain
//! of each law about its equilibrium, which is what amplitude-dependent gains
//! collapse to as the oscillation amplitude goes to zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cf_models::{CarFollowingLaw, LawKind};
use crate::error::{Error, Result};

const POLE_TOL: f64 = 1e-12;

/// Wrap an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Magnitude and phase of a fundamental-harmonic response. Lags are negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexGain {
    pub magnitude: f64,
    pub phase: f64,
}

impl ComplexGain {
    pub const UNITY: ComplexGain = ComplexGain {
        magnitude: 1.0,
        phase: 0.0,
    };

    pub fn new(magnitude: f64, phase: f64) -> Self {
        Self {
            magnitude,
            phase: wrap_phase(phase),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let (magnitude, phase) = z.to_polar();
        Self::new(magnitude, phase)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Options for the skeleton evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonOptions {
    /// Time constant in the GFM skeleton's `λ/τ` pole shift (s).
    pub gfm_tau: f64,
}

impl Default for SkeletonOptions {
    fn default() -> Self {
        Self { gfm_tau: 1.0 }
    }
}

pub fn linear_gain(law: &CarFollowingLaw, omega: f64) -> Result<ComplexGain> {
    linear_gain_with(law, omega, SkeletonOptions::default())
}

pub fn linear_gain_with(
    law: &CarFollowingLaw,
    omega: f64,
    opts: SkeletonOptions,
) -> Result<ComplexGain> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("omega must be finite and >= 0, got {omega}")));
    }
    let jw = Complex64::new(0.0, omega);
    let (num, den) = match *law {
        CarFollowingLaw::Ovm(p) => (Complex64::from(p.kappa), jw + p.kappa),
        CarFollowingLaw::Gfm(p) => (
            Complex64::from(p.kappa),
            jw + p.kappa - p.lambda / opts.gfm_tau,
        ),
        CarFollowingLaw::Fvdm(p) => (
            Complex64::from(1.0 / p.tau),
            jw + (1.0 / p.tau - p.lambda),
        ),
        CarFollowingLaw::Idm(p) => {
            if omega == 0.0 {
                return Err(Error::domain("IDM skeleton a_max/(jω) is undefined at ω = 0"));
            }
            (Complex64::from(p.a_max), jw)
        }
        CarFollowingLaw::Ll(p) => {
            // Unit input delay on the control action.
            let delay = Complex64::from_polar(1.0, -omega);
            let num = (p.k_s + jw * p.k_v) * delay;
            let den = -omega * omega + (p.k_s + jw * (p.k_v + p.k_s * p.tau_gap)) * delay;
            (num, den)
        }
        CarFollowingLaw::Hl(p) => {
            let num = p.k_s + jw * p.k_v - p.k_a * omega * omega;
            let den = -p.tt * jw.powi(3)
                + (p.k_a - 1.0) * jw.powi(2)
                + (p.tt * p.k_s + p.k_v) * jw
                + p.k_s;
            (num, den)
        }
    };
    if den.norm() < POLE_TOL {
        return Err(Error::PoleAtFrequency { omega });
    }
    Ok(ComplexGain::from_complex(num / den))
}

/// Partial derivatives `(∂a/∂spacing, ∂a/∂speed, ∂a/∂rel_speed)` at the
/// equilibrium for `v_e`. For GFM the one-sided braking term contributes its
/// zero-bias describing function `λ/2` instead of a derivative.
pub fn equilibrium_partials(law: &CarFollowingLaw, v_e: f64) -> Result<(f64, f64, f64)> {
    let dx_e = law.equilibrium_spacing(v_e)?;
    Ok(match *law {
        CarFollowingLaw::Ovm(p) => {
            let slope = law.ov_curve().expect("tanh law").slope(dx_e);
            (p.kappa * slope, -p.kappa, 0.0)
        }
        CarFollowingLaw::Gfm(p) => {
            let slope = law.ov_curve().expect("tanh law").slope(dx_e);
            (p.kappa * slope, -p.kappa, 0.5 * p.lambda)
        }
        CarFollowingLaw::Fvdm(p) => {
            let slope = law.ov_curve().expect("tanh law").slope(dx_e);
            (slope / p.tau, -1.0 / p.tau, p.lambda)
        }
        CarFollowingLaw::Idm(p) => {
            let sqrt_ab = (p.a_max * p.b).sqrt();
            let s_star = p.s0 + v_e * p.t_gap;
            let f_s = 2.0 * p.a_max * s_star * s_star / dx_e.powi(3);
            let f_v = -p.a_max * p.delta * v_e.powf(p.delta - 1.0) / p.v_max.powf(p.delta)
                - 2.0 * p.a_max * s_star * p.t_gap / (dx_e * dx_e);
            let f_dv = p.a_max * s_star * v_e / (dx_e * dx_e * sqrt_ab);
            (f_s, f_v, f_dv)
        }
        CarFollowingLaw::Ll(p) => (p.k_s, -p.k_s * p.tau_gap, p.k_v),
        CarFollowingLaw::Hl(p) => (p.k_s, -p.k_s * p.tau_gap, p.k_v),
    })
}

/// Exact small-signal predecessor-to-follower gain about the equilibrium
/// at `v_e`. LL and HL return their closed forms.
pub fn linearized_gain(law: &CarFollowingLaw, omega: f64, v_e: f64) -> Result<ComplexGain> {
    match law.kind() {
        LawKind::Ll | LawKind::Hl => linear_gain(law, omega),
        _ => {
            if !(omega >= 0.0) {
                return Err(Error::domain(format!("omega must be >= 0, got {omega}")));
            }
            let (f_s, f_v, f_dv) = equilibrium_partials(law, v_e)?;
            let s = Complex64::new(0.0, omega);
            let num = f_s + f_dv * s;
            let den = s * s + (f_dv - f_v) * s + f_s;
            if den.norm() < POLE_TOL {
                return Err(Error::PoleAtFrequency { omega });
            }
            Ok(ComplexGain::from_complex(num / den))
        }
    }
}

/// Gain of a chain of followers: magnitudes multiply, phases add.
/// An empty chain is the identity.
pub fn cascade_gain(gains: &[ComplexGain]) -> ComplexGain {
    let magnitude = gains.iter().map(|g| g.magnitude).product();
    let phase: f64 = gains.iter().map(|g| g.phase).sum();
    ComplexGain::new(magnitude, phase)
}
