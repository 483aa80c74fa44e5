//! Numerical tolerances with their defaults.
//!
//! Every tolerance is stored as `f64` and converted to the working scalar at
//! the point of use. The struct is serializable so drivers can embed the exact
//! set used by a run in their output metadata.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Tolerance table used by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Scaled residual accepted for a polished dispersion root.
    pub root_residual: f64,
    /// Imaginary parts below this (relative) are snapped to the real axis.
    pub conjugate_pairing: f64,
    /// Modes whose energy magnitude falls below this are `Marginal`.
    pub marginal_energy: f64,
    /// Roots closer than this to a pole are flagged `near_pole`.
    pub near_pole: f64,
    /// Frequencies closer than this to a pole refuse evaluation.
    pub pole_guard: f64,
    /// Accepted Hilbert-transform tail contribution.
    pub hilbert_tail: f64,
    /// Distance below which the Penrose contour counts as touching the origin.
    pub grazing: f64,
    /// Base number of real-line samples for the Penrose contour.
    pub contour_points: usize,
    /// Largest accepted argument step between contour samples (radians).
    pub max_angle_step: f64,
    /// Width of the final parameter bracket in bisections.
    pub bisection: f64,
    /// Frequencies closer than this are considered colliding.
    pub collision: f64,
    /// Growth rate above which a mode has left the real axis.
    pub departure: f64,
    /// Eigenvalues closer than this are grouped into one cluster.
    pub degenerate: f64,
    /// Relative singular-value threshold for numerical rank.
    pub rank: f64,
    /// Accepted symplecticity and energy reconstruction error.
    pub reconstruction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_residual: 1e-9,
            conjugate_pairing: 1e-8,
            marginal_energy: 1e-9,
            near_pole: 1e-10,
            pole_guard: 1e-14,
            hilbert_tail: 1e-8,
            grazing: 1e-4,
            contour_points: 2001,
            max_angle_step: std::f64::consts::PI / 8.0,
            bisection: 1e-6,
            collision: 1e-6,
            departure: 1e-8,
            degenerate: 1e-7,
            rank: 1e-8,
            reconstruction: 1e-9,
        }
    }
}

impl Tolerances {
    /// Returns a tolerance converted to the working scalar.
    #[inline]
    pub fn get<T: Real>(&self, pick: fn(&Tolerances) -> f64) -> T {
        T::lit(pick(self))
    }

    /// Tolerances relaxed for single precision.
    pub fn single_precision() -> Self {
        Self {
            root_residual: 1e-4,
            conjugate_pairing: 1e-3,
            marginal_energy: 1e-5,
            near_pole: 1e-5,
            pole_guard: 1e-6,
            hilbert_tail: 1e-4,
            grazing: 1e-3,
            departure: 1e-3,
            degenerate: 1e-3,
            rank: 1e-4,
            reconstruction: 1e-3,
            collision: 1e-3,
            bisection: 1e-4,
            ..Self::default()
        }
    }
}
