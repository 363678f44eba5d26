//! Bessel functions, root bracketing, the Rayleigh cubic and quadrature.

mod bessel;
mod gamma;
mod quadrature;
mod rayleigh;
mod roots;

pub use bessel::{bessel_j, bessel_j_deriv, MAX_ARGUMENT, MAX_ORDER};
pub(crate) use bessel::{bessel_j_orders_scaled, scaled_neighbours};
pub use gamma::{gamma, upper_incomplete_gamma};
pub use quadrature::{arctan_integral, arctan_integrand, integrate, ArctanKind};
pub use rayleigh::{rayleigh_cubic, rayleigh_root, RayleighRoot, UNIQUENESS_GRID};
pub use roots::{bisection_width, bracket_roots, try_bracket_roots, RootList};
