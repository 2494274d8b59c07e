//! Two-dimensional Gaussian kernel density estimate.
//!
//! Axes are standardized by the pooled standard deviations and share
//! Silverman's bandwidth `h = n^{-1/6}`. Small samples are evaluated exactly;
//! larger ones are linearly binned onto a grid, convolved with the separable
//! kernel and read back by bilinear interpolation.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest pooled sample evaluated by direct summation.
pub const EXACT_LIMIT: usize = 4096;
/// Grid nodes per axis for the binned estimate.
const GRID: usize = 512;
/// Kernel truncation radius in bandwidths.
const CUTOFF: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct Kde {
    mean: [f64; 2],
    scale: [f64; 2],
    h: f64,
    lo: [f64; 2],
    hi: [f64; 2],
    backend: Backend,
}

#[derive(Debug, Clone)]
enum Backend {
    Exact(Vec<[f64; 2]>),
    Binned {
        origin: [f64; 2],
        step: [f64; 2],
        /// `values[i * GRID + j]` at `origin + (i, j) * step`.
        values: Vec<f64>,
    },
}

impl Kde {
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        Self::build(points, points.len() <= EXACT_LIMIT)
    }

    fn build(points: &[[f64; 2]], exact: bool) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InsufficientSamples { got: 0, needed: 1 });
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::domain("kernel density input contains non-finite points"));
        }
        let mut mean = [0.0; 2];
        for p in points {
            mean[0] += p[0];
            mean[1] += p[1];
        }
        mean = mean.map(|m| m / n as f64);
        let mut var = [0.0; 2];
        for p in points {
            var[0] += (p[0] - mean[0]).powi(2);
            var[1] += (p[1] - mean[1]).powi(2);
        }
        let scale = var.map(|v| {
            let s = (v / n as f64).sqrt();
            if s > 0.0 && s.is_finite() {
                s
            } else {
                1.0
            }
        });
        let h = (n as f64).powf(-1.0 / 6.0);
        let z: Vec<[f64; 2]> = points
            .iter()
            .map(|p| [(p[0] - mean[0]) / scale[0], (p[1] - mean[1]) / scale[1]])
            .collect();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &z {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d] - CUTOFF * h);
                hi[d] = hi[d].max(p[d] + CUTOFF * h);
            }
        }
        let backend = if exact {
            Backend::Exact(z)
        } else {
            binned(&z, h, lo, hi)
        };
        Ok(Self {
            mean,
            scale,
            h,
            lo,
            hi,
            backend,
        })
    }

    /// Bandwidth in standardized units.
    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    /// Box holding all kernel mass above the truncation, in data units.
    pub fn padded_bounds(&self) -> ([f64; 2], [f64; 2]) {
        let un = |z: [f64; 2]| {
            [
                self.mean[0] + z[0] * self.scale[0],
                self.mean[1] + z[1] * self.scale[1],
            ]
        };
        (un(self.lo), un(self.hi))
    }

    /// Density in data units (per unit of `x` per unit of `y`).
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let z = [
            (p[0] - self.mean[0]) / self.scale[0],
            (p[1] - self.mean[1]) / self.scale[1],
        ];
        let jac = self.scale[0] * self.scale[1];
        match &self.backend {
            Backend::Exact(pts) => {
                let inv = 1.0 / (2.0 * self.h * self.h);
                let s: f64 = pts
                    .iter()
                    .map(|q| (-((z[0] - q[0]).powi(2) + (z[1] - q[1]).powi(2)) * inv).exp())
                    .sum();
                s / (pts.len() as f64 * 2.0 * PI * self.h * self.h) / jac
            }
            Backend::Binned {
                origin,
                step,
                values,
            } => {
                let u = (z[0] - origin[0]) / step[0];
                let v = (z[1] - origin[1]) / step[1];
                let last = (GRID - 1) as f64;
                if !(u >= 0.0 && v >= 0.0 && u <= last && v <= last) {
                    return 0.0;
                }
                let (i, j) = ((u.floor() as usize).min(GRID - 2), (v.floor() as usize).min(GRID - 2));
                let (fu, fv) = (u - i as f64, v - j as f64);
                let at = |a: usize, b: usize| values[a * GRID + b];
                let d = (1.0 - fu) * (1.0 - fv) * at(i, j)
                    + fu * (1.0 - fv) * at(i + 1, j)
                    + (1.0 - fu) * fv * at(i, j + 1)
                    + fu * fv * at(i + 1, j + 1);
                d.max(0.0) / jac
            }
        }
    }
}

fn binned(z: &[[f64; 2]], h: f64, lo: [f64; 2], hi: [f64; 2]) -> Backend {
    let step = [0, 1].map(|d| (hi[d] - lo[d]) / (GRID - 1) as f64);
    let mut counts = vec![0.0; GRID * GRID];
    for p in z {
        let u = (p[0] - lo[0]) / step[0];
        let v = (p[1] - lo[1]) / step[1];
        let (i, j) = ((u.floor() as usize).min(GRID - 2), (v.floor() as usize).min(GRID - 2));
        let (fu, fv) = (u - i as f64, v - j as f64);
        counts[i * GRID + j] += (1.0 - fu) * (1.0 - fv);
        counts[(i + 1) * GRID + j] += fu * (1.0 - fv);
        counts[i * GRID + j + 1] += (1.0 - fu) * fv;
        counts[(i + 1) * GRID + j + 1] += fu * fv;
    }
    let kernel = |dx: f64| -> Vec<f64> {
        let r = ((CUTOFF * h / dx).ceil() as usize).min(GRID - 1);
        (0..=r)
            .map(|i| {
                let x = i as f64 * dx;
                (-x * x / (2.0 * h * h)).exp() / ((2.0 * PI).sqrt() * h)
            })
            .collect()
    };
    let (k0, k1) = (kernel(step[0]), kernel(step[1]));
    // Convolve along the second axis, then the first.
    let mut tmp = vec![0.0; GRID * GRID];
    for i in 0..GRID {
        for j in 0..GRID {
            let c = counts[i * GRID + j];
            if c == 0.0 {
                continue;
            }
            let r = k1.len() - 1;
            for b in j.saturating_sub(r)..(j + r + 1).min(GRID) {
                tmp[i * GRID + b] += c * k1[b.abs_diff(j)];
            }
        }
    }
    let mut values = vec![0.0; GRID * GRID];
    let r = k0.len() - 1;
    for i in 0..GRID {
        for a in i.saturating_sub(r)..(i + r + 1).min(GRID) {
            let w = k0[a.abs_diff(i)];
            let (src, dst) = (&tmp[i * GRID..(i + 1) * GRID], a * GRID);
            for (b, &t) in src.iter().enumerate() {
                values[dst + b] += w * t;
            }
        }
    }
    let n = z.len() as f64;
    for v in &mut values {
        *v /= n;
    }
    Backend::Binned {
        origin: lo,
        step,
        values,
    }
}
