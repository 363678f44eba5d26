//! Gamma function wrappers over `statrs`.

/// `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ t^(a-1) e^(-t) dt`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_ur(a, x) * gamma(a)
}
