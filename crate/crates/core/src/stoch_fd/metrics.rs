//! Per-loop hysteresis measures and their ensemble summary.

use serde::{Deserialize, Serialize};

use super::hull::{self, signed_area, HullResult};
use super::Ensemble;
use crate::error::{Error, Result};
use crate::macro_fd::FdTrace;

pub const PERCENTILES: [f64; 5] = [10.0, 30.0, 50.0, 70.0, 90.0];
/// Density quantile above which pooled points enter the hull.
pub const HULL_QUANTILE: f64 = 0.70;

/// Percentile `p` (0..=100) of ascending `sorted`, interpolating linearly
/// between order statistics.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = (p / 100.0).clamp(0.0, 1.0) * (n - 1) as f64;
            let i = (pos.floor() as usize).min(n - 2);
            let f = pos - i as f64;
            sorted[i] + f * (sorted[i + 1] - sorted[i])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
    Degenerate,
}

/// Direction of travel of a closed (k, q) loop.
pub fn loop_orientation(trace: &FdTrace) -> Orientation {
    let pts: Vec<[f64; 2]> = trace.loop_points().collect();
    if pts.len() < 3 {
        return Orientation::Degenerate;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let bbox = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let a = signed_area(&pts);
    if !(a.abs() >= 1e-9 * bbox) || bbox == 0.0 {
        Orientation::Degenerate
    } else if a < 0.0 {
        Orientation::Clockwise
    } else {
        Orientation::CounterClockwise
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopMeasures {
    /// veh/km.
    pub k_range: f64,
    /// veh/h.
    pub q_range: f64,
    /// Extent along the major principal axis of the standardized loop.
    pub width: f64,
    /// Extent along the minor principal axis.
    pub length: f64,
}

impl LoopMeasures {
    fn as_array(&self) -> [f64; 4] {
        [self.k_range, self.q_range, self.width, self.length]
    }
}

/// Measures of one loop; `scale` holds the ensemble standard deviations of
/// k and q used to standardize the principal-axis extents.
pub fn loop_measures(trace: &FdTrace, scale: [f64; 2]) -> LoopMeasures {
    let pts: Vec<[f64; 2]> = trace.loop_points().collect();
    if pts.is_empty() {
        return LoopMeasures {
            k_range: 0.0,
            q_range: 0.0,
            width: 0.0,
            length: 0.0,
        };
    }
    let range = |d: usize| {
        let (lo, hi) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[d]), h.max(p[d])));
        hi - lo
    };
    let z: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] / scale[0], p[1] / scale[1]]).collect();
    let n = z.len() as f64;
    let m = z.iter().fold([0.0; 2], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in &z {
        let (dx, dy) = (p[0] - m[0], p[1] - m[1]);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Major-axis angle of the 2x2 scatter matrix.
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = theta.sin_cos();
    let extent = |u: [f64; 2]| {
        let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| {
            let x = p[0] * u[0] + p[1] * u[1];
            (l.min(x), h.max(x))
        });
        hi - lo
    };
    LoopMeasures {
        k_range: range(0),
        q_range: range(1),
        width: extent([c, s]),
        length: extent([-s, c]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileRow {
    pub percentile: f64,
    pub k_range: f64,
    pub q_range: f64,
    pub width: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationCounts {
    pub clockwise: usize,
    pub counter_clockwise: usize,
    pub degenerate: usize,
}

impl OrientationCounts {
    pub fn clockwise_fraction(&self) -> f64 {
        let n = self.clockwise + self.counter_clockwise + self.degenerate;
        if n == 0 {
            0.0
        } else {
            self.clockwise as f64 / n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisReport {
    pub n_loops: usize,
    pub percentiles: Vec<PercentileRow>,
    /// veh/km × veh/h.
    pub hull_area: f64,
    pub hull_degenerate: bool,
    /// veh/km.
    pub std_density: f64,
    /// veh/h.
    pub std_flow: f64,
    /// Pooled mean (k, q).
    pub center: [f64; 2],
    pub mean_distance: f64,
    pub rms_distance: f64,
    pub orientation: OrientationCounts,
    /// Majority orientation across loops.
    pub verdict: Orientation,
    pub representative_sample: Option<u64>,
    pub representative_orientation: Option<Orientation>,
}

impl HysteresisReport {
    /// Broken report invariants, empty when all hold.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for w in self.percentiles.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (name, x, y) in [
                ("k_range", a.k_range, b.k_range),
                ("q_range", a.q_range, b.q_range),
                ("width", a.width, b.width),
                ("length", a.length, b.length),
            ] {
                if !(x <= y) {
                    v.push(format!("{name}: p{} = {x} > p{} = {y}", a.percentile, b.percentile));
                }
            }
        }
        // Both are square roots of sums of the same terms; allow for rounding.
        if !(self.rms_distance >= self.mean_distance * (1.0 - 1e-12)) {
            v.push(format!("rms {} < mean {}", self.rms_distance, self.mean_distance));
        }
        if !(self.hull_area >= 0.0) {
            v.push(format!("hull area {}", self.hull_area));
        }
        v
    }
}

fn pooled_stats(pts: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let n = pts.len() as f64;
    let mean = pts.iter().fold([0.0; 2], |a, p| [a[0] + p[0], a[1] + p[1]]).map(|s| s / n);
    let var = pts
        .iter()
        .fold([0.0; 2], |a, p| [a[0] + (p[0] - mean[0]).powi(2), a[1] + (p[1] - mean[1]).powi(2)])
        .map(|s| s / n);
    (mean, var.map(f64::sqrt))
}

fn standardizer(std: [f64; 2]) -> [f64; 2] {
    std.map(|s| if s > 0.0 && s.is_finite() { s } else { 1.0 })
}

pub fn hysteresis_metrics(ensemble: &Ensemble) -> Result<HysteresisReport> {
    let pts = ensemble.pooled_points();
    let hull = if pts.len() >= 3 {
        hull::high_density_hull(&pts, HULL_QUANTILE)?
    } else {
        HullResult {
            vertices: pts.clone(),
            area: 0.0,
            degenerate: true,
            retained: pts.len(),
            threshold: f64::NAN,
        }
    };
    hysteresis_metrics_with_hull(ensemble, &hull)
}

/// Report using an already computed high-density hull.
pub fn hysteresis_metrics_with_hull(ensemble: &Ensemble, hull: &HullResult) -> Result<HysteresisReport> {
    if ensemble.samples.is_empty() {
        return Err(Error::InsufficientSamples { got: 0, needed: 1 });
    }
    let pts = ensemble.pooled_points();
    let (center, std) = pooled_stats(&pts);
    let scale = standardizer(std);
    let measures: Vec<LoopMeasures> = ensemble
        .samples
        .iter()
        .map(|s| loop_measures(&s.loop_trace, scale))
        .collect();
    let column = |f: fn(&LoopMeasures) -> f64| {
        let mut c: Vec<f64> = measures.iter().map(f).collect();
        c.sort_by(f64::total_cmp);
        c
    };
    let cols = [
        column(|m| m.k_range),
        column(|m| m.q_range),
        column(|m| m.width),
        column(|m| m.length),
    ];
    let percentiles = PERCENTILES
        .iter()
        .map(|&p| PercentileRow {
            percentile: p,
            k_range: percentile(&cols[0], p),
            q_range: percentile(&cols[1], p),
            width: percentile(&cols[2], p),
            length: percentile(&cols[3], p),
        })
        .collect();

    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for p in &pts {
        let d2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
        sum += d2.sqrt();
        sum_sq += d2;
    }
    let n = pts.len() as f64;

    let mut orientation = OrientationCounts {
        clockwise: 0,
        counter_clockwise: 0,
        degenerate: 0,
    };
    for s in &ensemble.samples {
        match loop_orientation(&s.loop_trace) {
            Orientation::Clockwise => orientation.clockwise += 1,
            Orientation::CounterClockwise => orientation.counter_clockwise += 1,
            Orientation::Degenerate => orientation.degenerate += 1,
        }
    }
    let verdict = [
        (orientation.clockwise, Orientation::Clockwise),
        (orientation.counter_clockwise, Orientation::CounterClockwise),
        (orientation.degenerate, Orientation::Degenerate),
    ]
    .into_iter()
    .max_by_key(|(c, _)| *c)
    .map(|(_, o)| o)
    .unwrap();

    let rep = representative_index(&measures);
    Ok(HysteresisReport {
        n_loops: measures.len(),
        percentiles,
        hull_area: hull.area,
        hull_degenerate: hull.degenerate,
        std_density: std[0],
        std_flow: std[1],
        center,
        mean_distance: sum / n,
        rms_distance: (sum_sq / n).sqrt(),
        orientation,
        verdict,
        representative_sample: rep.map(|i| ensemble.samples[i].sample_id),
        representative_orientation: rep.map(|i| loop_orientation(&ensemble.samples[i].loop_trace)),
    })
}

/// Index of the loop whose standardized measure vector lies nearest the
/// per-measure median; the first one wins ties.
pub fn representative_index(measures: &[LoopMeasures]) -> Option<usize> {
    if measures.is_empty() {
        return None;
    }
    let rows: Vec<[f64; 4]> = measures.iter().map(LoopMeasures::as_array).collect();
    let n = rows.len() as f64;
    let mut median = [0.0; 4];
    let mut scale = [1.0; 4];
    for d in 0..4 {
        let mut c: Vec<f64> = rows.iter().map(|r| r[d]).collect();
        c.sort_by(f64::total_cmp);
        median[d] = percentile(&c, 50.0);
        let mean = c.iter().sum::<f64>() / n;
        let sd = (c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        if sd > 0.0 && sd.is_finite() {
            scale[d] = sd;
        }
    }
    let dist = |r: &[f64; 4]| -> f64 { (0..4).map(|d| ((r[d] - median[d]) / scale[d]).powi(2)).sum() };
    let mut best = 0;
    let mut best_d = dist(&rows[0]);
    for (i, r) in rows.iter().enumerate().skip(1) {
        let d = dist(r);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Some(best)
}

/// The loop nearest the ensemble's median measures.
pub fn representative_loop(ensemble: &Ensemble) -> Result<FdTrace> {
    if ensemble.samples.is_empty() {
        return Err(Error::InsufficientSamples { got: 0, needed: 1 });
    }
    let pts = ensemble.pooled_points();
    let scale = standardizer(pooled_stats(&pts).1);
    let measures: Vec<LoopMeasures> = ensemble
        .samples
        .iter()
        .map(|s| loop_measures(&s.loop_trace, scale))
        .collect();
    let i = representative_index(&measures).expect("nonempty");
    Ok(ensemble.samples[i].loop_trace.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn circle(r: f64, n: usize, clockwise: bool) -> FdTrace {
        let sign = if clockwise { -1.0 } else { 1.0 };
        let t: Vec<f64> = (0..=n).map(|i| i as f64).collect();
        let th = |i: f64| sign * 2.0 * PI * i / n as f64;
        FdTrace {
            sample_id: 0,
            k: t.iter().map(|&i| 40.0 + r * th(i).cos()).collect(),
            q: t.iter().map(|&i| 2000.0 + r * th(i).sin()).collect(),
            t,
        }
    }

    fn reversed(tr: &FdTrace) -> FdTrace {
        let mut r = tr.clone();
        r.k.reverse();
        r.q.reverse();
        r
    }

    #[test]
    fn percentile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&s, 50.0), 3.0);
        assert_eq!(percentile(&s, 10.0), 1.4);
        assert_eq!(percentile(&s, 0.0), 1.0);
        assert_eq!(percentile(&s, 100.0), 5.0);
        assert_eq!(percentile(&[7.0], 90.0), 7.0);
    }

    #[test]
    fn circle_orientation_and_reversal() {
        let cw = circle(3.0, 400, true);
        assert_eq!(loop_orientation(&cw), Orientation::Clockwise);
        assert_eq!(loop_orientation(&reversed(&cw)), Orientation::CounterClockwise);
        let flat = FdTrace {
            sample_id: 0,
            t: vec![0.0; 5],
            k: vec![1.0, 2.0, 3.0, 2.0, 1.0],
            q: vec![2.0, 4.0, 6.0, 4.0, 2.0],
        };
        assert_eq!(loop_orientation(&flat), Orientation::Degenerate);
    }

    #[test]
    fn circle_extents_are_diameters() {
        let m = loop_measures(&circle(2.0, 2000, false), [1.0, 1.0]);
        for x in [m.k_range, m.q_range, m.width, m.length] {
            assert!((x - 4.0).abs() < 1e-4, "{m:?}");
        }
    }

    #[test]
    fn inclined_ellipse_major_axis_is_width() {
        let n = 1000;
        let tr = FdTrace {
            sample_id: 0,
            t: vec![0.0; n + 1],
            k: (0..=n).map(|i| (2.0 * PI * i as f64 / n as f64).cos() * 5.0 - (2.0 * PI * i as f64 / n as f64).sin() * 0.5).collect(),
            q: (0..=n).map(|i| (2.0 * PI * i as f64 / n as f64).cos() * 5.0 + (2.0 * PI * i as f64 / n as f64).sin() * 0.5).collect(),
        };
        let m = loop_measures(&tr, [1.0, 1.0]);
        assert!((m.width - 2.0 * 5.0 * 2f64.sqrt()).abs() < 1e-3, "{m:?}");
        assert!((m.length - 2.0 * 0.5 * 2f64.sqrt()).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn representative_avoids_the_outlier() {
        let base = LoopMeasures {
            k_range: 5.0,
            q_range: 200.0,
            width: 3.0,
            length: 0.2,
        };
        let mut ms: Vec<LoopMeasures> = (0..9)
            .map(|i| LoopMeasures {
                k_range: base.k_range + 0.1 * i as f64,
                ..base
            })
            .collect();
        ms.insert(
            0,
            LoopMeasures {
                k_range: 50.0,
                q_range: 2000.0,
                width: 30.0,
                length: 2.0,
            },
        );
        assert_ne!(representative_index(&ms), Some(0));
        assert_eq!(representative_index(&[base; 4]), Some(0));
        assert_eq!(representative_index(&[base]), Some(0));
    }

    proptest! {
        #[test]
        fn flow_scaling_is_homogeneous(c in 0.1f64..20.0, r in 0.5f64..5.0) {
            // A thin inclined loop, so the principal axes are well defined.
            let mut tr = circle(r, 300, true);
            for (k, q) in tr.k.iter_mut().zip(&mut tr.q) {
                *q = 2000.0 + 3.0 * (*k - 40.0) + 0.2 * (*q - 2000.0);
            }
            let mut scaled = tr.clone();
            for q in &mut scaled.q {
                *q *= c;
            }
            let a = loop_measures(&tr, [1.0, 1.0]);
            let b = loop_measures(&scaled, [1.0, c]);
            prop_assert!((b.q_range / a.q_range - c).abs() < 1e-9 * c);
            prop_assert!((b.width - a.width).abs() < 1e-9 * a.width);
            prop_assert!((b.length - a.length).abs() < 1e-9 * a.length);
        }

        #[test]
        fn reversal_flips_orientation(r in 0.1f64..10.0, n in 8usize..200) {
            let tr = circle(r, n, true);
            prop_assert_eq!(loop_orientation(&tr), Orientation::Clockwise);
            prop_assert_eq!(loop_orientation(&reversed(&tr)), Orientation::CounterClockwise);
        }
    }
}
