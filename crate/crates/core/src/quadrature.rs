//! Quadrature rules: composite Simpson grids for the homodyne plane and
//! Gauss-Hermite nodes for Gaussian averages.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Default number of nodes per axis of the homodyne grid.
pub const DEFAULT_POINTS: usize = 1601;

/// Extra half-width beyond the classical turning point `sqrt(2N+1)`.
pub const TURNING_POINT_MARGIN: f64 = 4.0;

/// Symmetric composite-Simpson rule on `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    half_width: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadGrid {
    /// `points` must be odd and at least 3.
    pub fn simpson(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid_halfwidth",
                value: half_width,
                reason: "must be positive and finite",
            });
        }
        if points < 3 || points % 2 == 0 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                value: points as f64,
                reason: "composite Simpson needs an odd count >= 3",
            });
        }
        let intervals = points - 1;
        let h = 2.0 * half_width / intervals as f64;
        let nodes = (0..points)
            .map(|i| {
                // mirror the upper half so the node set is exactly symmetric
                let k = i as i64 - (intervals / 2) as i64;
                k as f64 * h
            })
            .collect();
        let weights = (0..points)
            .map(|i| {
                let c = if i == 0 || i == intervals {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        Ok(Self {
            half_width,
            nodes,
            weights,
        })
    }

    /// Default grid for an `N`-photon problem: `L = sqrt(2N+1) + 4`, 1601 points.
    pub fn for_photons(photons: usize) -> Self {
        Self::simpson(default_half_width(photons), DEFAULT_POINTS)
            .expect("default grid parameters are valid")
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ f over the grid (one axis).
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

pub fn default_half_width(photons: usize) -> f64 {
    (2.0 * photons as f64 + 1.0).sqrt() + TURNING_POINT_MARGIN
}

/// Grid settings carried by scenario configs; unset fields use the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: Option<usize>,
    pub half_width: Option<f64>,
}

impl GridSpec {
    pub fn build(&self, photons: usize) -> Result<QuadGrid> {
        QuadGrid::simpson(
            self.half_width.unwrap_or_else(|| default_half_width(photons)),
            self.points_per_axis.unwrap_or(DEFAULT_POINTS),
        )
    }
}

/// Gauss-Hermite rule for `∫ e^{-t²} f(t) dt` (Golub-Welsch).
///
/// Returns `(nodes, weights)`, nodes ascending.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::zeros(order, order);
    for k in 1..order {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let (nodes, vectors) = symmetric_eigen(&jacobi);
    let mu0 = std::f64::consts::PI.sqrt();
    let weights = (0..order).map(|k| mu0 * vectors[(0, k)].powi(2)).collect();
    (nodes, weights)
}
