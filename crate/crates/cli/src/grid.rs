//! Log-density grids around a bivariate data set and the shape of their
//! superlevel sets.

use predrisk::mvnpredict::{mvn_predict_logdensity_with_stats, MvnPredictorKind};
use predrisk::numcore::{sample_stats, ObservationSet, SampleStats};
use serde::{Deserialize, Serialize};

use crate::config::{GridCenter, GridSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxes {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x1: f64,
    pub x2: f64,
    pub log_density: Option<f64>,
}

/// Evenly spaced axes over `center ± half_width · sd` per coordinate, with
/// `sd` the sample standard deviation.
pub fn grid_axes(stats: &SampleStats, n: usize, spec: &GridSpec) -> GridAxes {
    let center = match spec.center {
        GridCenter::Mean => [stats.mean[0], stats.mean[1]],
        GridCenter::Point(a, b) => [a, b],
    };
    let axis = |i: usize| -> Vec<f64> {
        let sd = (stats.scatter[(i, i)] / (n as f64 - 1.0).max(1.0)).sqrt();
        let (lo, hi) = (center[i] - spec.half_width * sd, center[i] + spec.half_width * sd);
        let steps = (spec.resolution - 1) as f64;
        (0..spec.resolution).map(|k| lo + (hi - lo) * k as f64 / steps).collect()
    };
    GridAxes { x1: axis(0), x2: axis(1) }
}

/// Log densities with `x1` varying slowest. Points where the predictor is
/// undefined or the data are degenerate are `None`.
pub fn evaluate_grid(kind: MvnPredictorKind, obs: &ObservationSet, axes: &GridAxes) -> Vec<GridPoint> {
    let stats = sample_stats(obs).expect("non-empty observations");
    let mut out = Vec::with_capacity(axes.x1.len() * axes.x2.len());
    for &x1 in &axes.x1 {
        for &x2 in &axes.x2 {
            let log_density = mvn_predict_logdensity_with_stats(kind, obs, &stats, &[x1, x2])
                .ok()
                .filter(|e| e.well_defined && e.log_density.is_finite())
                .map(|e| e.log_density);
            out.push(GridPoint { x1, x2, log_density });
        }
    }
    out
}

/// Second-moment shape of `{x : log q(x) ≥ max − drop}` on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetShape {
    pub drop: f64,
    pub points: usize,
    /// `√(1 − λ_min/λ_max)` of the region's covariance.
    pub eccentricity: f64,
    /// Direction of the major axis in degrees, in `(−90, 90]`.
    pub orientation_deg: f64,
    pub touches_boundary: bool,
}

pub fn level_set_shape(grid: &[GridPoint], axes: &GridAxes, drop: f64) -> Option<LevelSetShape> {
    let max = grid.iter().filter_map(|p| p.log_density).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let cols = axes.x2.len();
    let inside: Vec<(usize, &GridPoint)> =
        grid.iter().enumerate().filter(|(_, p)| p.log_density.is_some_and(|v| v >= max - drop)).collect();
    let count = inside.len() as f64;
    let (m1, m2) = inside.iter().fold((0.0, 0.0), |(a, b), (_, p)| (a + p.x1 / count, b + p.x2 / count));
    let (mut c11, mut c12, mut c22) = (0.0, 0.0, 0.0);
    for (_, p) in &inside {
        c11 += (p.x1 - m1) * (p.x1 - m1) / count;
        c12 += (p.x1 - m1) * (p.x2 - m2) / count;
        c22 += (p.x2 - m2) * (p.x2 - m2) / count;
    }
    let half_trace = 0.5 * (c11 + c22);
    let radius = (0.25 * (c11 - c22) * (c11 - c22) + c12 * c12).sqrt();
    let (major, minor) = (half_trace + radius, half_trace - radius);
    let touches_boundary = inside.iter().any(|(k, _)| {
        let (i, j) = (k / cols, k % cols);
        i == 0 || j == 0 || i == axes.x1.len() - 1 || j == cols - 1
    });
    Some(LevelSetShape {
        drop,
        points: inside.len(),
        eccentricity: (1.0 - minor / major).max(0.0).sqrt(),
        orientation_deg: 0.5 * (2.0 * c12).atan2(c11 - c22).to_degrees(),
        touches_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(axes: &GridAxes, f: impl Fn(f64, f64) -> f64) -> Vec<GridPoint> {
        axes.x1
            .iter()
            .flat_map(|&x1| axes.x2.iter().map(move |&x2| (x1, x2)))
            .map(|(x1, x2)| GridPoint { x1, x2, log_density: Some(f(x1, x2)) })
            .collect()
    }

    fn axes(res: usize) -> GridAxes {
        let a: Vec<f64> = (0..res).map(|k| -5.0 + 10.0 * k as f64 / (res - 1) as f64).collect();
        GridAxes { x1: a.clone(), x2: a }
    }

    #[test]
    fn circle_has_zero_eccentricity() {
        let ax = axes(201);
        let s = level_set_shape(&synthetic(&ax, |a, b| -(a * a + b * b)), &ax, 4.0).unwrap();
        assert!(s.eccentricity < 0.05, "{s:?}");
        assert!(!s.touches_boundary);
    }

    #[test]
    fn ellipse_shape_recovered() {
        // axes ratio 2:1 rotated by 30°
        let ax = axes(301);
        let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
        let f = |a: f64, b: f64| {
            let (u, v) = (c * a + s * b, -s * a + c * b);
            -(u * u / 4.0 + v * v)
        };
        let shape = level_set_shape(&synthetic(&ax, f), &ax, 2.0).unwrap();
        assert!((shape.eccentricity - 0.75f64.sqrt()).abs() < 0.01, "{shape:?}");
        assert!((shape.orientation_deg - 30.0).abs() < 1.0);
        // monotone transforms of the same quadratic form share the shape
        let t = level_set_shape(&synthetic(&ax, |a, b| -1.5 * (1.0 - f(a, b)).ln()), &ax, 1.0).unwrap();
        assert!((t.eccentricity - shape.eccentricity).abs() < 0.01);
    }

    #[test]
    fn axes_cover_requested_box() {
        let obs = ObservationSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let stats = sample_stats(&obs).unwrap();
        let ax = grid_axes(&stats, 3, &GridSpec { center: GridCenter::Mean, half_width: 1.0, resolution: 3 });
        let sd1 = (stats.scatter[(0, 0)] / 2.0).sqrt();
        assert!((ax.x1[0] - (stats.mean[0] - sd1)).abs() < 1e-12);
        assert!((ax.x1[1] - stats.mean[0]).abs() < 1e-12);
        assert_eq!(ax.x2.len(), 3);
    }
}
