//! Weyl and heat-trace coefficient formulas.
//!
//! Two families of second coefficients are kept side by side:
//! [`CoefficientFamily::NonIntegral`], a closed form in the two wave speeds, and
//! [`CoefficientFamily::IntegralSaVa`], which adds a Rayleigh-root term and an
//! arctan integral. Neither is preferred here.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lame::{BoundaryCondition, LameParameters};
use crate::special::{arctan_integral, gamma, rayleigh_root, ArctanKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientFamily {
    NonIntegral,
    IntegralSaVa,
}

impl fmt::Display for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefficientFamily::NonIntegral => "NonIntegral",
            CoefficientFamily::IntegralSaVa => "IntegralSaVa",
        })
    }
}

/// Two-term counting-function coefficients
/// `N(Λ) ≈ a0 |M| Λ^(d/2) + a1 |∂M| Λ^((d-1)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub bc: BoundaryCondition,
    pub family: CoefficientFamily,
    pub d: usize,
}

impl WeylCoefficients {
    /// Evaluates both coefficients for the requested family.
    pub fn evaluate(
        bc: BoundaryCondition,
        family: CoefficientFamily,
        d: usize,
        params: &LameParameters,
    ) -> Result<Self> {
        let a1 = match family {
            CoefficientFamily::NonIntegral => second_coefficient(bc, d, params)?,
            CoefficientFamily::IntegralSaVa => second_coefficient_sava(bc, d, params)?,
        };
        Ok(Self {
            a0: leading_coefficient(d, params),
            a1,
            bc,
            family,
            d,
        })
    }

    /// Every family defined for `bc`.
    pub fn all_families(bc: BoundaryCondition, d: usize, params: &LameParameters) -> Vec<Result<Self>> {
        let mut out = vec![Self::evaluate(bc, CoefficientFamily::NonIntegral, d, params)];
        if matches!(bc, BoundaryCondition::Dirichlet | BoundaryCondition::Free) {
            out.push(Self::evaluate(bc, CoefficientFamily::IntegralSaVa, d, params));
        }
        out
    }
}

/// Short-time heat-trace coefficients
/// `Z(t) ≈ b0 |M| t^(-d/2) + b1 |∂M| t^(-(d-1)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatCoefficients {
    pub b0: f64,
    pub b1: f64,
    pub bc: BoundaryCondition,
    pub d: usize,
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn require_elastic(bc: BoundaryCondition) -> Result<()> {
    if bc.is_scalar() {
        return Err(Error::Unsupported(format!(
            "no elastic coefficient formula for {bc}"
        )));
    }
    Ok(())
}

/// `C_d = 1 / (2^(d+1) π^((d-1)/2) Γ((d+1)/2))`.
pub fn boundary_constant(d: usize) -> f64 {
    let d = d as f64;
    1.0 / (2f64.powf(d + 1.0) * std::f64::consts::PI.powf(0.5 * (d - 1.0)) * gamma(0.5 * (d + 1.0)))
}

/// The leading Weyl coefficient `a0`.
///
/// ```
/// use elastospec::lame::LameParameters;
/// use elastospec::weyl::leading_coefficient;
///
/// let p = LameParameters::new(1.0, 1.0).unwrap();
/// let a0 = leading_coefficient(2, &p);
/// assert!((a0 - 1.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-15);
/// ```
pub fn leading_coefficient(d: usize, params: &LameParameters) -> f64 {
    let h = 0.5 * d as f64;
    let prefactor = 1.0 / ((4.0 * std::f64::consts::PI).powf(h) * gamma(1.0 + h));
    prefactor * ((d as f64 - 1.0) / params.mu().powf(h) + 1.0 / params.pressure_modulus().powf(h))
}

/// The second Weyl coefficient `a1` of the non-integral family.
pub fn second_coefficient(bc: BoundaryCondition, d: usize, params: &LameParameters) -> Result<f64> {
    require_elastic(bc)?;
    check_dimension(d)?;
    let h = 0.5 * (d as f64 - 1.0);
    let shear = params.mu().powf(-h);
    let pressure = params.pressure_modulus().powf(-h);
    let c = boundary_constant(d);
    let full = (d as f64 - 1.0) * shear + pressure;
    let mixed = (d as f64 - 3.0) * shear + pressure;
    Ok(match bc {
        BoundaryCondition::Dirichlet => -c * full,
        BoundaryCondition::Free => c * full,
        BoundaryCondition::DirichletFree => -c * mixed,
        BoundaryCondition::FreeDirichlet => c * mixed,
        _ => unreachable!(),
    })
}

/// The second Weyl coefficient `a1` of the integral family, defined for
/// Dirichlet and free boundaries only.
///
/// Requires `alpha <= 1`. The free formula additionally requires `alpha < 1`:
/// the Rayleigh root tends to zero as `alpha -> 1` and its `γ_R^(1-d)` term
/// diverges.
pub fn second_coefficient_sava(bc: BoundaryCondition, d: usize, params: &LameParameters) -> Result<f64> {
    check_dimension(d)?;
    let alpha = params.alpha();
    if alpha > 1.0 {
        return Err(Error::Domain(format!(
            "integral-family coefficients need alpha <= 1, got {alpha}"
        )));
    }
    let dm1 = d as f64 - 1.0;
    let prefactor = params.mu().powf(-0.5 * dm1) * boundary_constant(d);
    let alpha_term = alpha.powf(0.5 * dm1);
    let weight = 4.0 * dm1 / std::f64::consts::PI;
    match bc {
        BoundaryCondition::Dirichlet => {
            let integral = arctan_integral(d as u32, alpha, ArctanKind::Dirichlet)?;
            Ok(-prefactor * (alpha_term + dm1 + weight * integral))
        }
        BoundaryCondition::Free => {
            let root = rayleigh_root(alpha)?;
            let integral = arctan_integral(d as u32, alpha, ArctanKind::Free)?;
            Ok(prefactor * (alpha_term + d as f64 - 5.0 + 4.0 * root.gamma_r.powf(-dm1) + weight * integral))
        }
        other => Err(Error::Unsupported(format!(
            "the integral family is not defined for {other}"
        ))),
    }
}

/// Heat-trace coefficients for the mixed problems.
pub fn heat_coefficients(bc: BoundaryCondition, d: usize, params: &LameParameters) -> Result<HeatCoefficients> {
    check_dimension(d)?;
    let sign = bc.mixed_sign().ok_or_else(|| {
        Error::Unsupported(format!("heat coefficients are implemented for DF and FD only, got {bc}"))
    })?;
    let four_pi = 4.0 * std::f64::consts::PI;
    let df = d as f64;
    let shear = four_pi * params.mu();
    let pressure = four_pi * params.pressure_modulus();
    let b0 = (df - 1.0) / shear.powf(0.5 * df) + 1.0 / pressure.powf(0.5 * df);
    let h = 0.5 * (df - 1.0);
    let b1 = sign * 0.25 * ((df - 3.0) / shear.powf(h) + 1.0 / pressure.powf(h));
    Ok(HeatCoefficients { b0, b1, bc, d })
}

/// Converts counting-function coefficients to heat-trace coefficients:
/// `b0 = Γ(1 + d/2) a0`, `b1 = Γ(1 + (d-1)/2) a1`.
pub fn counting_to_heat(a0: f64, a1: f64, d: usize) -> (f64, f64) {
    let df = d as f64;
    (gamma(1.0 + 0.5 * df) * a0, gamma(1.0 + 0.5 * (df - 1.0)) * a1)
}
