//! The Rayleigh cubic `R_alpha(w) = w^3 - 8 w^2 + 8 (3 - 2 alpha) w + 16 (alpha - 1)`.

use serde::Serialize;

use super::roots::bracket_roots;
use crate::error::{Error, Result};

/// Scan resolution used to certify that `(0, 1)` holds exactly one sign change.
pub const UNIQUENESS_GRID: usize = 64;

/// The root of `R_alpha` in `(0, 1)` and the derived Rayleigh speed ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighRoot {
    pub alpha: f64,
    pub w1: f64,
    /// `sqrt(w1)`.
    pub gamma_r: f64,
    /// `|R_alpha(w1)|`.
    pub residual: f64,
}

pub fn rayleigh_cubic(alpha: f64, w: f64) -> f64 {
    ((w - 8.0) * w + 8.0 * (3.0 - 2.0 * alpha)) * w + 16.0 * (alpha - 1.0)
}

/// The unique root of `R_alpha` in the open interval `(0, 1)`.
///
/// Fails with a domain error outside `0 < alpha < 1`, and with
/// [`Error::RootUniqueness`] if the scan sees more than one sign change.
pub fn rayleigh_root(alpha: f64) -> Result<RayleighRoot> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "Rayleigh root needs 0 < alpha < 1, got {alpha}"
        )));
    }
    let roots = bracket_roots(|w| rayleigh_cubic(alpha, w), 0.0, 1.0, UNIQUENESS_GRID)?;
    let interior: Vec<f64> = roots
        .roots
        .iter()
        .copied()
        .filter(|&w| w > 0.0 && w < 1.0)
        .collect();
    if interior.len() != 1 {
        return Err(Error::RootUniqueness {
            interval: (0.0, 1.0),
            found: interior.len(),
        });
    }
    let w1 = interior[0];
    Ok(RayleighRoot {
        alpha,
        w1,
        gamma_r: w1.sqrt(),
        residual: rayleigh_cubic(alpha, w1).abs(),
    })
}
