//! Convex hulls and polygon areas.

use serde::{Deserialize, Serialize};

use super::kde::Kde;
use super::metrics::percentile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullResult {
    /// Counter-clockwise vertices, no repeated endpoint.
    pub vertices: Vec<[f64; 2]>,
    pub area: f64,
    /// Fewer than three non-collinear retained points.
    pub degenerate: bool,
    pub retained: usize,
    pub threshold: f64,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear boundary points are dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Shoelace signed area; positive for counter-clockwise traversal.
pub fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    signed_area(poly).abs()
}

/// Hull of the points whose kernel density reaches the `quantile` of the
/// density over all points.
pub fn high_density_hull(points: &[[f64; 2]], quantile: f64) -> Result<HullResult> {
    if !(0.0..=1.0).contains(&quantile) {
        return Err(Error::validation("quantile", format!("must lie in [0, 1], got {quantile}")));
    }
    if points.len() < 3 {
        return Err(Error::InsufficientSamples {
            got: points.len(),
            needed: 3,
        });
    }
    let kde = Kde::new(points)?;
    let dens: Vec<f64> = points.iter().map(|p| kde.eval(*p)).collect();
    let mut sorted = dens.clone();
    sorted.sort_by(f64::total_cmp);
    let threshold = percentile(&sorted, 100.0 * quantile);
    let kept: Vec<[f64; 2]> = points
        .iter()
        .zip(&dens)
        .filter(|(_, &d)| d >= threshold)
        .map(|(p, _)| *p)
        .collect();
    let vertices = convex_hull(&kept);
    let area = polygon_area(&vertices);
    Ok(HullResult {
        degenerate: vertices.len() < 3 || area == 0.0,
        vertices,
        area,
        retained: kept.len(),
        threshold,
    })
}
