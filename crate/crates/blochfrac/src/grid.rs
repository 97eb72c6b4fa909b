//! Geometric radial grids accumulating at the boundary of the disc.
//!
//! Every grid point keeps its boundary distance delta = 1 - r as the primary
//! datum: class tests and norm sweeps all operate on ratios of boundary
//! distances, and storing r alone would throw away precision exactly where the
//! weights live.

use serde::Serialize;

/// One radius with its exact boundary distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialPoint {
    pub r: f64,
    pub delta: f64,
}

/// Radii 1 - 2^{-j/step_div}, j = 0..=max_j. j = 0 is the origin.
#[derive(Clone, Debug, Serialize)]
pub struct RadialGrid {
    pub points: Vec<RadialPoint>,
    pub max_j: u32,
    pub step_div: u32,
}

impl RadialGrid {
    pub fn geometric(max_j: u32, step_div: u32) -> Self {
        let points = (0..=max_j)
            .map(|j| {
                let delta = 2f64.powf(-(j as f64) / step_div as f64);
                RadialPoint {
                    r: 1.0 - delta,
                    delta,
                }
            })
            .collect();
        RadialGrid {
            points,
            max_j,
            step_div,
        }
    }

    /// Default sweep grid: quarter-octave steps down to 1 - r ≈ 1e-8.
    pub fn default_depth() -> Self {
        Self::geometric(106, 4)
    }

    /// Shallow variant of the default grid (1 - r down to ≈ 6.7e-7); the
    /// deepening-stability probe compares statistics here against the default.
    pub fn shallow() -> Self {
        Self::geometric(82, 4)
    }

    /// Same depth as the default grid with doubled point density.
    pub fn refined() -> Self {
        Self::geometric(212, 8)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spans_origin_to_deep_boundary() {
        let g = RadialGrid::default_depth();
        assert_eq!(g.len(), 107);
        assert_eq!(g.points[0].r, 0.0);
        assert_eq!(g.points[0].delta, 1.0);
        let last = g.points.last().unwrap();
        assert!(last.delta < 1.1e-8 && last.delta > 0.9e-8);
        // Strictly increasing radii, strictly decreasing boundary distance.
        for w in g.points.windows(2) {
            assert!(w[1].r > w[0].r);
            assert!(w[1].delta < w[0].delta);
        }
    }

    #[test]
    fn refined_grid_keeps_depth_and_doubles_density() {
        let g = RadialGrid::refined();
        let d = RadialGrid::default_depth();
        assert_eq!(g.len(), 2 * d.len() - 1);
        let a = g.points.last().unwrap().delta;
        let b = d.points.last().unwrap().delta;
        assert!((a / b - 1.0).abs() < 1e-12);
    }
}
