//! Amplitude-dependent gains of nonlinear car-following laws.
//!
//! Two independent routes are provided:
//!
//! * [`harmonic_balance_solve`] for laws whose nonlinearity is a static
//!   function of spacing plus a relative-speed term (OVM, GFM, FVDM). The
//!   follower is assumed to respond to a leader oscillation `A sin(ωt)` with
//!   `A|G| sin(ωt + ∠G)`; the static elements are replaced by their
//!   describing functions evaluated at the implied spacing amplitude, and the
//!   fundamental of the resulting acceleration is balanced against the
//!   assumed one.
//! * [`simulate_fundamental`], which integrates the follower behind a
//!   sinusoidal leader and projects the steady-state speed onto the leader's
//!   fundamental. It is the reference for IDM and the cross-check for the
//!   balance solver.
//!
//! Phasors use the sine reference: `B sin(ωt + φ)` is `B e^{jφ}`, and
//! `Y11 + jY12` from [`first_harmonic`] is the phasor of the projected
//! signal.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf_models::{self, CarFollowingLaw, LawKind, OvCurve};
use crate::error::{Error, Result};
use crate::linear_tf::{self, ComplexGain};
use crate::seed;

pub const MIN_HARMONIC_SAMPLES: usize = 64;
/// Quadrature nodes per period for describing functions.
pub const QUAD_NODES: usize = 512;
/// Relative balance defect accepted as converged.
pub const HB_TOLERANCE: f64 = 1e-8;
pub const HB_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPair {
    /// In-phase (sine) coefficient.
    pub y11: f64,
    /// Quadrature (cosine) coefficient.
    pub y12: f64,
}

impl HarmonicPair {
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.y11, self.y12)
    }
}

/// First Fourier harmonic of one period of a uniformly sampled signal.
///
/// `samples[i]` is the signal at phase `2πi/n`; the endpoint is not
/// repeated. On a periodic grid the rectangle and trapezoid rules coincide
/// and are exact for every harmonic below `n/2`.
pub fn first_harmonic(samples: &[f64]) -> Result<HarmonicPair> {
    let n = samples.len();
    if n < MIN_HARMONIC_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n,
            min: MIN_HARMONIC_SAMPLES,
        });
    }
    let step = 2.0 * PI / n as f64;
    let (mut s, mut c) = (0.0, 0.0);
    for (i, &y) in samples.iter().enumerate() {
        let (sin, cos) = (step * i as f64).sin_cos();
        s += y * sin;
        c += y * cos;
    }
    let scale = 2.0 / n as f64;
    Ok(HarmonicPair {
        y11: scale * s,
        y12: scale * c,
    })
}

/// Describing function of the static element `f` about `x0` for input
/// amplitude `b`: the fundamental of `f(x0 + b sin θ) - f(x0)` divided by `b`.
pub fn describing_function_of(f: impl Fn(f64) -> f64, x0: f64, b: f64) -> Result<Complex64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!("input amplitude must be positive, got {b}")));
    }
    let f0 = f(x0);
    let step = 2.0 * PI / QUAD_NODES as f64;
    let samples: Vec<f64> = (0..QUAD_NODES)
        .map(|i| f(x0 + b * (step * i as f64).sin()) - f0)
        .collect();
    Ok(first_harmonic(&samples)?.to_complex() / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescribingFunctionValue {
    pub re: f64,
    pub im: f64,
    /// Input amplitude (m).
    pub amplitude: f64,
}

impl DescribingFunctionValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Describing function of a law's optimal-velocity curve about `dx_e` for a
/// spacing amplitude `b`. The element is static, so `omega` does not enter;
/// it is accepted to keep the call shape of a frequency-dependent element.
pub fn describing_function(
    law: &CarFollowingLaw,
    dx_e: f64,
    b: f64,
    _omega: f64,
) -> Result<DescribingFunctionValue> {
    let curve = law
        .ov_curve()
        .ok_or_else(|| Error::domain(format!("{} has no static spacing nonlinearity", law.kind())))?;
    let n = describing_function_of(|x| curve.value(x), dx_e, b)?;
    Ok(DescribingFunctionValue {
        re: n.re,
        im: n.im,
        amplitude: b,
    })
}

/// Spacing oscillation amplitude when the leader moves with amplitude `a`
/// and the follower responds with `gain`.
pub fn spacing_amplitude(a: f64, gain: ComplexGain) -> f64 {
    let m = gain.magnitude;
    let inner = 1.0 + m * m - 2.0 * m * gain.phase.cos();
    a * inner.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbSolution {
    pub gain: ComplexGain,
    /// Relative magnitude of the complex balance defect.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
enum RelativeSpeedTerm {
    None,
    Linear(f64),
    /// `λ min(Δv, 0)`.
    Braking(f64),
}

/// `a = α (V(Δx) − v) + r(Δv)`.
#[derive(Debug, Clone, Copy)]
struct StaticLoop {
    alpha: f64,
    curve: OvCurve,
    dx_e: f64,
    rel: RelativeSpeedTerm,
}

impl StaticLoop {
    fn new(law: &CarFollowingLaw, v_e: f64) -> Result<Self> {
        let dx_e = law.equilibrium_spacing(v_e)?;
        let curve = law.ov_curve();
        let (alpha, rel) = match *law {
            CarFollowingLaw::Ovm(p) => (p.kappa, RelativeSpeedTerm::None),
            CarFollowingLaw::Gfm(p) => (p.kappa, RelativeSpeedTerm::Braking(p.lambda)),
            CarFollowingLaw::Fvdm(p) => (1.0 / p.tau, RelativeSpeedTerm::Linear(p.lambda)),
            _ => {
                return Err(Error::domain(format!(
                    "harmonic balance needs a static-nonlinearity law, got {}",
                    law.kind()
                )))
            }
        };
        Ok(Self {
            alpha,
            curve: curve.expect("static laws carry a curve"),
            dx_e,
            rel,
        })
    }

    fn spacing_df(&self, b: f64) -> Complex64 {
        if b < 1e-9 {
            Complex64::from(self.curve.slope(self.dx_e))
        } else {
            let c = self.curve;
            describing_function_of(|x| c.value(x), self.dx_e, b)
                .expect("positive finite amplitude")
        }
    }

    fn rel_df(&self, b: f64) -> Complex64 {
        match self.rel {
            RelativeSpeedTerm::None => Complex64::from(0.0),
            RelativeSpeedTerm::Linear(l) => Complex64::from(l),
            RelativeSpeedTerm::Braking(l) => {
                if b < 1e-12 {
                    // Zero-bias describing function of a half-slope rectifier.
                    Complex64::from(0.5 * l)
                } else {
                    describing_function_of(|x| l * x.min(0.0), 0.0, b)
                        .expect("positive finite amplitude")
                }
            }
        }
    }

    /// Gain implied by the loop when the spacing oscillates with amplitude
    /// `spacing_amp`:
    /// `G = (αN + jωN_r) / (−ω² + jω(α + N_r) + αN)`.
    fn implied_gain(&self, spacing_amp: f64, omega: f64) -> Complex64 {
        let n = self.spacing_df(spacing_amp);
        let n_r = self.rel_df(omega * spacing_amp);
        let jw = Complex64::new(0.0, omega);
        let num = self.alpha * n + jw * n_r;
        let den = -omega * omega + jw * (self.alpha + n_r) + self.alpha * n;
        num / den
    }

    /// Balance defect for an assumed gain, relative to its magnitude.
    fn defect(&self, g: Complex64, a: f64, omega: f64) -> Complex64 {
        let spacing_amp = a * (Complex64::from(1.0) - g).norm();
        (g - self.implied_gain(spacing_amp, omega)) / g.norm().max(1e-300)
    }
}

/// Solve for the amplitude-dependent gain `(|G|, ∠G)` of OVM, GFM or FVDM.
///
/// Damped Newton on magnitude and phase with a central-difference Jacobian,
/// seeded at the small-signal gain. The describing function is re-evaluated
/// at the spacing amplitude `A|1 − G|` on every defect evaluation.
pub fn harmonic_balance_solve(
    law: &CarFollowingLaw,
    a: f64,
    omega: f64,
    v_e: f64,
) -> Result<HbSolution> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("leader amplitude must be positive, got {a}")));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("omega must be positive, got {omega}")));
    }
    let lp = StaticLoop::new(law, v_e)?;
    let seed_gain = lp.implied_gain(0.0, omega);

    let eval = |x: [f64; 2]| -> Complex64 { lp.defect(Complex64::from_polar(x[0], x[1]), a, omega) };
    let mut x = [seed_gain.norm(), seed_gain.arg()];
    let mut f = eval(x);
    let mut res = f.norm();
    let mut iterations = 0;

    while res >= 1e-13 && iterations < HB_MAX_ITERATIONS {
        iterations += 1;
        let hm = 1e-7 * x[0].max(1e-3);
        let hp = 1e-7;
        let dm = (eval([x[0] + hm, x[1]]) - eval([x[0] - hm, x[1]])) / (2.0 * hm);
        let dp = (eval([x[0], x[1] + hp]) - eval([x[0], x[1] - hp])) / (2.0 * hp);
        // Solve [dm dp] [δm δp]^T = -f over the reals.
        let det = dm.re * dp.im - dp.re * dm.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_m = (-f.re * dp.im + dp.re * f.im) / det;
        let step_p = (-dm.re * f.im + f.re * dm.im) / det;

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = [(x[0] + t * step_m).abs(), x[1] + t * step_p];
            let fc = eval(cand);
            if fc.norm() < res {
                x = cand;
                f = fc;
                res = fc.norm();
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let gain = ComplexGain::new(x[0], x[1]);
    if res < HB_TOLERANCE {
        Ok(HbSolution {
            gain,
            residual: res,
            iterations,
        })
    } else {
        Err(Error::NoConvergence {
            iterations,
            residual: res,
            magnitude: gain.magnitude,
            phase: gain.phase,
        })
    }
}

/// Integrator settings for [`simulate_fundamental_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Upper bound on the step; the actual step divides the period evenly.
    pub dt: f64,
    pub warmup_periods: usize,
    pub measure_periods: usize,
    /// Successive-period gains must agree to this relative tolerance.
    pub periodicity_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            warmup_periods: 5,
            measure_periods: 3,
            periodicity_tol: 0.01,
        }
    }
}

/// Input delay of the LL controller (s).
pub const LL_INPUT_DELAY: f64 = 1.0;

pub fn simulate_fundamental(
    law: &CarFollowingLaw,
    a: f64,
    omega: f64,
    v_e: f64,
) -> Result<ComplexGain> {
    simulate_fundamental_with(law, a, omega, v_e, SimOptions::default())
}

/// Integrate the follower behind a leader at `v_e t + a sin(ωt)` with RK4 and
/// return the steady-state speed gain relative to the leader's speed.
pub fn simulate_fundamental_with(
    law: &CarFollowingLaw,
    a: f64,
    omega: f64,
    v_e: f64,
    opts: SimOptions,
) -> Result<ComplexGain> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("leader amplitude must be positive, got {a}")));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("omega must be positive, got {omega}")));
    }
    if opts.measure_periods == 0 {
        return Err(Error::domain("at least one measurement period is required"));
    }
    if law.kind() == LawKind::Hl {
        return Err(Error::UnsupportedLaw { law: LawKind::Hl });
    }
    let dx_e = law.equilibrium_spacing(v_e)?;
    let period = 2.0 * PI / omega;
    let per_period = ((period / opts.dt).ceil() as usize).max(MIN_HARMONIC_SAMPLES);
    let h = period / per_period as f64;
    let total_periods = opts.warmup_periods + opts.measure_periods;
    let total_steps = per_period * total_periods;
    let measure_start = per_period * opts.warmup_periods;

    let leader = |t: f64| -> (f64, f64) {
        let (s, c) = (omega * t).sin_cos();
        (v_e * t + a * s, v_e + a * omega * c)
    };

    // Commanded acceleration for the delayed LL controller, or the
    // instantaneous acceleration for everything else.
    let command = |t: f64, x: f64, v: f64| -> Result<f64> {
        let (xl, vl) = leader(t);
        let spacing = xl - x;
        if !(spacing > 0.0) {
            return Err(Error::CollisionDuringSim { time: t, spacing });
        }
        law.acceleration(&cf_models::VehicleState::new(v, spacing, vl - v))
    };

    let delayed = law.kind() == LawKind::Ll;
    let mut history: Vec<f64> = if delayed {
        Vec::with_capacity(total_steps + 1)
    } else {
        Vec::new()
    };
    let delayed_command = |history: &[f64], t: f64| -> f64 {
        let tau = t - LL_INPUT_DELAY;
        if tau <= 0.0 {
            return 0.0;
        }
        let pos = tau / h;
        let k = pos.floor() as usize;
        let frac = pos - k as f64;
        let u0 = history.get(k).copied().unwrap_or(0.0);
        let u1 = history.get(k + 1).copied().unwrap_or(u0);
        u0 + frac * (u1 - u0)
    };

    let mut x = -dx_e;
    let mut v = v_e;
    let mut speeds = Vec::with_capacity(per_period * opts.measure_periods);

    for k in 0..total_steps {
        let t = k as f64 * h;
        if k >= measure_start {
            speeds.push(v);
        }
        if delayed {
            history.push(command(t, x, v)?);
        }
        let acc = |t: f64, x: f64, v: f64, history: &[f64]| -> Result<f64> {
            if delayed {
                let (xl, _) = leader(t);
                if !(xl - x > 0.0) {
                    return Err(Error::CollisionDuringSim {
                        time: t,
                        spacing: xl - x,
                    });
                }
                Ok(delayed_command(history, t))
            } else {
                command(t, x, v)
            }
        };
        let k1v = acc(t, x, v, &history)?;
        let k1x = v;
        let k2v = acc(t + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v, &history)?;
        let k2x = v + 0.5 * h * k1v;
        let k3v = acc(t + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v, &history)?;
        let k3x = v + 0.5 * h * k2v;
        let k4v = acc(t + h, x + h * k3x, v + h * k3v, &history)?;
        let k4x = v + h * k3v;
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !x.is_finite() || !v.is_finite() {
            return Err(Error::NonPeriodicResponse {
                relative_change: f64::INFINITY,
            });
        }
    }

    let leader_speed = Complex64::new(0.0, a * omega);
    let mut gains = Vec::with_capacity(opts.measure_periods);
    for chunk in speeds.chunks_exact(per_period) {
        gains.push(first_harmonic(chunk)?.to_complex() / leader_speed);
    }
    for w in gains.windows(2) {
        let change = (w[1] - w[0]).norm() / w[1].norm().max(1e-300);
        if !(change <= opts.periodicity_tol) {
            return Err(Error::NonPeriodicResponse {
                relative_change: change,
            });
        }
    }
    let mean = gains.iter().sum::<Complex64>() / gains.len() as f64;
    Ok(ComplexGain::from_complex(mean))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMethod {
    HarmonicBalance,
    Simulation,
    ClosedForm,
}

impl GainMethod {
    pub fn for_law(kind: LawKind) -> Self {
        match kind {
            LawKind::Ovm | LawKind::Gfm | LawKind::Fvdm => GainMethod::HarmonicBalance,
            LawKind::Idm => GainMethod::Simulation,
            LawKind::Ll | LawKind::Hl => GainMethod::ClosedForm,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GainMethod::HarmonicBalance => "harmonic_balance",
            GainMethod::Simulation => "simulation",
            GainMethod::ClosedForm => "closed_form",
        }
    }
}

/// Amplitude-dependent gain of one follower, by the method suited to its law.
pub fn vehicle_gain(law: &CarFollowingLaw, a: f64, omega: f64, v_e: f64) -> Result<ComplexGain> {
    match GainMethod::for_law(law.kind()) {
        GainMethod::HarmonicBalance => Ok(harmonic_balance_solve(law, a, omega, v_e)?.gain),
        GainMethod::Simulation => simulate_fundamental(law, a, omega, v_e),
        GainMethod::ClosedForm => linear_tf::linear_gain(law, omega),
    }
}

/// One scatter point of a frequency-response sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub law: LawKind,
    pub particle_id: usize,
    pub omega_rad_s: f64,
    pub gain_mag: f64,
    pub gain_phase_rad: f64,
    pub method: GainMethod,
    pub converged: bool,
}

/// Gains of `n_particles` prior draws of `kind` over `omegas`.
///
/// Particle `i` uses seed `derive(seed, i)`. A failed point is kept with
/// `converged = false` (best iterate for harmonic balance, NaN otherwise).
pub fn frequency_response_sweep(
    kind: LawKind,
    n_particles: usize,
    omegas: &[f64],
    a: f64,
    v_e: f64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if n_particles == 0 {
        return Err(Error::validation("particles", "need at least one particle"));
    }
    if let Some(&w) = omegas.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::domain(format!(
            "frequency grid must lie in (0, ∞); got {w} rad/s"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::domain(format!("amplitude must be positive, got {a}")));
    }
    let particles = (0..n_particles)
        .map(|i| cf_models::sample_parameters(kind, v_e, seed::derive(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let method = GainMethod::for_law(kind);
    let jobs: Vec<(usize, f64)> = (0..n_particles)
        .flat_map(|p| omegas.iter().map(move |&w| (p, w)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(p, w)| {
            let (gain, converged) = match vehicle_gain(&particles[p], a, w, v_e) {
                Ok(g) => (g, true),
                Err(Error::NoConvergence {
                    magnitude, phase, ..
                }) => (ComplexGain::new(magnitude, phase), false),
                Err(_) => (
                    ComplexGain {
                        magnitude: f64::NAN,
                        phase: f64::NAN,
                    },
                    false,
                ),
            };
            SweepPoint {
                law: kind,
                particle_id: p,
                omega_rad_s: w,
                gain_mag: gain.magnitude,
                gain_phase_rad: gain.phase,
                method,
                converged,
            }
        })
        .collect())
}
