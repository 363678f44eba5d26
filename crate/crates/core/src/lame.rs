//! Material parameters, flat geometries and the pointwise Lamé/traction
//! operators.
//!
//! Every geometry handled by this crate is Euclidean, so the Ricci term of the
//! elasticity operator vanishes identically and covariant derivatives reduce to
//! partial derivatives. Nothing here accepts a curved metric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest spatial dimension for which vector-field samples are supported.
pub const MAX_DIM: usize = 3;

/// Tolerance on `| |n| - 1 |` for boundary normals.
pub const NORMAL_TOLERANCE: f64 = 1e-12;

/// Isotropic Lamé parameters `(lambda, mu)`.
///
/// Construction enforces strong ellipticity: `mu > 0` and `lambda + 2 mu > 0`.
/// Negative `lambda + mu` (so `alpha > 1`) is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameParameters {
    lambda: f64,
    mu: f64,
}

impl LameParameters {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let invalid = |reason| Error::InvalidParameters { lambda, mu, reason };
        if !lambda.is_finite() || !mu.is_finite() {
            return Err(invalid("parameters must be finite"));
        }
        if mu <= 0.0 {
            return Err(invalid("shear modulus mu must be positive"));
        }
        if lambda + 2.0 * mu <= 0.0 {
            return Err(invalid("lambda + 2 mu must be positive"));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// P-wave modulus `lambda + 2 mu`.
    pub fn pressure_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// `alpha = mu / (lambda + 2 mu)`, the squared ratio of shear to pressure
    /// wave speeds.
    pub fn alpha(&self) -> f64 {
        self.mu / self.pressure_modulus()
    }

    /// The smaller of the two wave moduli.
    pub fn min_modulus(&self) -> f64 {
        self.mu.min(self.pressure_modulus())
    }

    /// Jointly rescaled parameters `(c lambda, c mu)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.lambda, c * self.mu)
    }
}

/// Boundary conditions for the elastic problems plus the two scalar Laplacian
/// auxiliaries used as building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Clamped boundary, `u = 0`.
    Dirichlet,
    /// Traction-free boundary, `T u = 0`.
    Free,
    /// Tangential displacement and normal traction vanish.
    #[serde(rename = "DF")]
    DirichletFree,
    /// Normal displacement and tangential traction vanish.
    #[serde(rename = "FD")]
    FreeDirichlet,
    ScalarDirichlet,
    ScalarNeumann,
}

impl BoundaryCondition {
    pub const ELASTIC: [BoundaryCondition; 4] = [
        BoundaryCondition::Dirichlet,
        BoundaryCondition::Free,
        BoundaryCondition::DirichletFree,
        BoundaryCondition::FreeDirichlet,
    ];

    /// The sign `@` of the mixed problems: `-1` for DF, `+1` for FD.
    pub fn mixed_sign(&self) -> Option<f64> {
        match self {
            BoundaryCondition::DirichletFree => Some(-1.0),
            BoundaryCondition::FreeDirichlet => Some(1.0),
            _ => None,
        }
    }

    pub fn is_elastic(&self) -> bool {
        !self.is_scalar()
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            BoundaryCondition::ScalarDirichlet | BoundaryCondition::ScalarNeumann
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "Dirichlet",
            BoundaryCondition::Free => "Free",
            BoundaryCondition::DirichletFree => "DF",
            BoundaryCondition::FreeDirichlet => "FD",
            BoundaryCondition::ScalarDirichlet => "ScalarDirichlet",
            BoundaryCondition::ScalarNeumann => "ScalarNeumann",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match normalized.as_str() {
            "dirichlet" | "dir" | "clamped" => Ok(BoundaryCondition::Dirichlet),
            "free" | "neumann" | "tractionfree" => Ok(BoundaryCondition::Free),
            "df" | "dirichletfree" | "relative" => Ok(BoundaryCondition::DirichletFree),
            "fd" | "freedirichlet" | "absolute" => Ok(BoundaryCondition::FreeDirichlet),
            "scalardirichlet" => Ok(BoundaryCondition::ScalarDirichlet),
            "scalarneumann" => Ok(BoundaryCondition::ScalarNeumann),
            _ => Err(Error::ContractViolation(format!(
                "unknown boundary condition `{s}`"
            ))),
        }
    }
}

/// Shape of a flat domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `[0, L_1] x ... x [0, L_d]`, with each axis optionally periodic.
    Box { lengths: Vec<f64>, periodic: Vec<bool> },
    /// Planar disk of the given radius centred at the origin.
    Disk { radius: f64 },
}

/// A Euclidean domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatDomain {
    shape: Shape,
}

impl FlatDomain {
    /// Box with the given edge lengths and per-axis periodicity.
    pub fn boxed(lengths: Vec<f64>, periodic: Vec<bool>) -> Result<Self> {
        if lengths.len() < 2 {
            return Err(Error::InvalidDomain(format!(
                "a box needs dimension >= 2, got {}",
                lengths.len()
            )));
        }
        if periodic.len() != lengths.len() {
            return Err(Error::InvalidDomain(format!(
                "{} periodic flags for {} axes",
                periodic.len(),
                lengths.len()
            )));
        }
        if let Some(bad) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidDomain(format!(
                "edge lengths must be positive and finite, got {bad}"
            )));
        }
        Ok(Self {
            shape: Shape::Box { lengths, periodic },
        })
    }

    /// The cube `[0, pi]^d` without periodic axes.
    pub fn pi_cube(d: usize) -> Result<Self> {
        Self::boxed(vec![std::f64::consts::PI; d], vec![false; d])
    }

    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "disk radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self {
            shape: Shape::Disk { radius },
        })
    }

    pub fn unit_disk() -> Self {
        Self {
            shape: Shape::Disk { radius: 1.0 },
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dimension(&self) -> usize {
        match &self.shape {
            Shape::Box { lengths, .. } => lengths.len(),
            Shape::Disk { .. } => 2,
        }
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.shape, Shape::Disk { .. })
    }

    /// d-dimensional volume.
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Box { lengths, .. } => lengths.iter().product(),
            Shape::Disk { radius } => std::f64::consts::PI * radius * radius,
        }
    }

    /// (d-1)-dimensional measure of the boundary; periodic axes contribute no faces.
    pub fn boundary_measure(&self) -> f64 {
        match &self.shape {
            Shape::Box { lengths, periodic } => {
                let volume: f64 = lengths.iter().product();
                lengths
                    .iter()
                    .zip(periodic)
                    .filter(|(_, &p)| !p)
                    .map(|(l, _)| 2.0 * volume / l)
                    .sum()
            }
            Shape::Disk { radius } => 2.0 * std::f64::consts::PI * radius,
        }
    }

    /// Short human-readable description, e.g. `box 3.14159x3.14159` or `disk R=1`.
    pub fn describe(&self) -> String {
        match &self.shape {
            Shape::Box { lengths, periodic } => {
                let dims: Vec<String> = lengths
                    .iter()
                    .zip(periodic)
                    .map(|(l, p)| if *p { format!("{l}(periodic)") } else { format!("{l}") })
                    .collect();
                format!("box {}", dims.join("x"))
            }
            Shape::Disk { radius } => format!("disk R={radius}"),
        }
    }
}

pub type Vector = [f64; MAX_DIM];
pub type Jacobian = [[f64; MAX_DIM]; MAX_DIM];
pub type Hessians = [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM];

/// Point value of a vector field with analytically supplied derivatives.
///
/// `first[a][b] = d_b u^a` and `second[a][b][c] = d_b d_c u^a`. Entries at
/// indices `>= dim` are ignored and should be zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorFieldSample {
    dim: usize,
    pub point: Vector,
    pub value: Vector,
    pub first: Option<Jacobian>,
    pub second: Option<Hessians>,
}

impl VectorFieldSample {
    pub fn new(dim: usize, point: Vector, value: Vector) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::Unsupported(format!(
                "vector field samples support dimension 2..={MAX_DIM}, got {dim}"
            )));
        }
        Ok(Self {
            dim,
            point,
            value,
            first: None,
            second: None,
        })
    }

    pub fn with_first(mut self, first: Jacobian) -> Self {
        self.first = Some(first);
        self
    }

    pub fn with_second(mut self, second: Hessians) -> Self {
        self.second = Some(second);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest deviation from symmetry of the second-derivative array in its
    /// differentiation indices (zero when absent).
    pub fn hessian_asymmetry(&self) -> f64 {
        let Some(h) = &self.second else { return 0.0 };
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for hess in h.iter().take(d) {
            for b in 0..d {
                for c in 0..b {
                    worst = worst.max((hess[b][c] - hess[c][b]).abs());
                }
            }
        }
        worst
    }

    pub fn divergence(&self) -> Result<f64> {
        let first = self.require_first()?;
        Ok((0..self.dim).map(|a| first[a][a]).sum())
    }

    fn require_first(&self) -> Result<&Jacobian> {
        self.first.as_ref().ok_or_else(|| {
            Error::ContractViolation("sample carries no first derivatives".into())
        })
    }

    fn require_second(&self) -> Result<&Hessians> {
        self.second.as_ref().ok_or_else(|| {
            Error::ContractViolation("sample carries no second derivatives".into())
        })
    }

    fn value_norm(&self) -> f64 {
        sup_norm(&self.value[..self.dim])
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `(L u)(p) = -mu Lap u - (lambda + mu) grad div u` at the sample point.
/// Components at indices `>= dim` are zero.
pub fn navier_apply(sample: &VectorFieldSample, params: &LameParameters) -> Result<Vector> {
    let h = sample.require_second()?;
    let d = sample.dim;
    let mut out = [0.0; MAX_DIM];
    for (a, slot) in out.iter_mut().enumerate().take(d) {
        let laplacian: f64 = (0..d).map(|b| h[a][b][b]).sum();
        let grad_div: f64 = (0..d).map(|b| h[b][a][b]).sum();
        *slot = -params.mu * laplacian - (params.lambda + params.mu) * grad_div;
    }
    Ok(out)
}

fn check_normal(normal: &[f64], dim: usize) -> Result<()> {
    if normal.len() != dim {
        return Err(Error::ContractViolation(format!(
            "normal has {} components, sample has dimension {dim}",
            normal.len()
        )));
    }
    let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORMAL_TOLERANCE {
        return Err(Error::NonUnitNormal { norm });
    }
    Ok(())
}

/// Boundary traction `(T u)^a = lambda n^a div u + mu (n^b d_b u^a + n_b d_a u^b)`.
pub fn traction_apply(
    sample: &VectorFieldSample,
    normal: &[f64],
    params: &LameParameters,
) -> Result<Vector> {
    let first = sample.require_first()?;
    let d = sample.dim;
    check_normal(normal, d)?;
    let div: f64 = (0..d).map(|a| first[a][a]).sum();
    let mut out = [0.0; MAX_DIM];
    for (a, slot) in out.iter_mut().enumerate().take(d) {
        let directional: f64 = (0..d).map(|b| normal[b] * first[a][b]).sum();
        let transposed: f64 = (0..d).map(|b| normal[b] * first[b][a]).sum();
        *slot = params.lambda * normal[a] * div + params.mu * (directional + transposed);
    }
    Ok(out)
}

/// Boundary-condition residual in a fixed `2d`-slot layout.
///
/// Slots `0..d` hold displacement-type equations and slots `d..2d` hold
/// traction-type equations; unused slots are zero.
///
/// | bc        | slots `0..d`          | slots `d..2d`          |
/// |-----------|-----------------------|------------------------|
/// | Dirichlet | `u`                   | 0                      |
/// | Free      | 0                     | `T u`                  |
/// | DF        | `u - <n,u> n`         | `<n, T u>` in slot `d` |
/// | FD        | `<n,u>` in slot 0     | `T u - <n,T u> n`      |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResidual {
    dim: usize,
    slots: [f64; 2 * MAX_DIM],
}

impl BoundaryResidual {
    pub fn as_slice(&self) -> &[f64] {
        &self.slots[..2 * self.dim]
    }

    pub fn displacement_part(&self) -> &[f64] {
        &self.slots[..self.dim]
    }

    pub fn traction_part(&self) -> &[f64] {
        &self.slots[self.dim..2 * self.dim]
    }

    pub fn max_abs(&self) -> f64 {
        sup_norm(self.as_slice())
    }
}

pub fn bc_residual(
    bc: BoundaryCondition,
    sample: &VectorFieldSample,
    normal: &[f64],
    params: &LameParameters,
) -> Result<BoundaryResidual> {
    if bc.is_scalar() {
        return Err(Error::ContractViolation(format!(
            "{bc} is a scalar boundary condition and has no vector residual"
        )));
    }
    let d = sample.dim;
    let mut slots = [0.0; 2 * MAX_DIM];
    let u = &sample.value;
    match bc {
        BoundaryCondition::Dirichlet => {
            check_normal(normal, d)?;
            slots[..d].copy_from_slice(&u[..d]);
        }
        BoundaryCondition::Free => {
            let t = traction_apply(sample, normal, params)?;
            slots[d..2 * d].copy_from_slice(&t[..d]);
        }
        BoundaryCondition::DirichletFree => {
            let t = traction_apply(sample, normal, params)?;
            let un = dot(normal, &u[..d]);
            for a in 0..d {
                slots[a] = u[a] - un * normal[a];
            }
            slots[d] = dot(normal, &t[..d]);
        }
        BoundaryCondition::FreeDirichlet => {
            let t = traction_apply(sample, normal, params)?;
            let tn = dot(normal, &t[..d]);
            slots[0] = dot(normal, &u[..d]);
            for a in 0..d {
                slots[d + a] = t[a] - tn * normal[a];
            }
        }
        BoundaryCondition::ScalarDirichlet | BoundaryCondition::ScalarNeumann => unreachable!(),
    }
    Ok(BoundaryResidual { dim: d, slots })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mixed absolute/relative acceptance test for residuals.
///
/// A residual `r` is accepted when `|r| <= tol * max(1, scale)`, where `scale`
/// is the magnitude of the terms that cancel to produce it. For unit-amplitude
/// fields with `Lambda <= 1` this is the plain absolute test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTolerance {
    pub tol: f64,
}

impl Default for ResidualTolerance {
    fn default() -> Self {
        Self { tol: 1e-9 }
    }
}

impl ResidualTolerance {
    pub fn new(tol: f64) -> Self {
        Self { tol }
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual.is_finite() && residual <= self.tol * scale.max(1.0)
    }

    /// Scale-normalized residual `|r| / max(1, scale)`.
    pub fn normalized(residual: f64, scale: f64) -> f64 {
        residual / scale.max(1.0)
    }
}

/// `max |L u - Lambda u|` and the cancellation scale `max(Lambda |u|, |L u|)`.
pub fn pde_residual(
    sample: &VectorFieldSample,
    eigenvalue: f64,
    params: &LameParameters,
) -> Result<(f64, f64)> {
    let lu = navier_apply(sample, params)?;
    let d = sample.dim;
    let residual = (0..d).fold(0.0_f64, |m, a| {
        m.max((lu[a] - eigenvalue * sample.value[a]).abs())
    });
    let scale = (eigenvalue.abs() * sample.value_norm()).max(sup_norm(&lu[..d]));
    Ok((residual, scale))
}

/// Boundary residual together with its scale.
///
/// The displacement slots are measured against `|u|` and the traction slots
/// against `(|lambda| + 2 mu) |grad u|`; the returned pair is the worse of the
/// two normalized residuals (already divided by `max(1, scale)`) and `1.0`.
pub fn normalized_bc_residual(
    bc: BoundaryCondition,
    sample: &VectorFieldSample,
    normal: &[f64],
    params: &LameParameters,
) -> Result<f64> {
    let r = bc_residual(bc, sample, normal, params)?;
    let d = sample.dim;
    let grad = sample
        .first
        .map(|f| (0..d).fold(0.0_f64, |m, a| m.max(sup_norm(&f[a][..d]))))
        .unwrap_or(0.0);
    let disp_scale = sample.value_norm();
    let trac_scale = (params.lambda.abs() + 2.0 * params.mu) * grad;
    let disp = ResidualTolerance::normalized(sup_norm(r.displacement_part()), disp_scale);
    let trac = ResidualTolerance::normalized(sup_norm(r.traction_part()), trac_scale);
    Ok(disp.max(trac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(lambda: f64, mu: f64) -> LameParameters {
        LameParameters::new(lambda, mu).unwrap()
    }

    /// u = (f(x1), 0) style samples for plane waves along x1.
    fn plane_wave(component: usize, x1: f64) -> VectorFieldSample {
        let mut value = [0.0; 3];
        let mut first = [[0.0; 3]; 3];
        let mut second = [[[0.0; 3]; 3]; 3];
        value[component] = x1.sin();
        first[component][0] = x1.cos();
        second[component][0][0] = -x1.sin();
        VectorFieldSample::new(2, [x1, 0.3, 0.0], value)
            .unwrap()
            .with_first(first)
            .with_second(second)
    }

    fn linear(matrix: [[f64; 2]; 2], point: [f64; 2]) -> VectorFieldSample {
        let mut value = [0.0; 3];
        let mut first = [[0.0; 3]; 3];
        for a in 0..2 {
            value[a] = matrix[a][0] * point[0] + matrix[a][1] * point[1];
            first[a][0] = matrix[a][0];
            first[a][1] = matrix[a][1];
        }
        VectorFieldSample::new(2, [point[0], point[1], 0.0], value)
            .unwrap()
            .with_first(first)
            .with_second([[[0.0; 3]; 3]; 3])
    }

    #[test]
    fn parameter_validation() {
        assert!(LameParameters::new(1.0, 0.0).is_err());
        assert!(LameParameters::new(-2.0, 1.0).is_err());
        assert!(LameParameters::new(f64::NAN, 1.0).is_err());
        let p = params(-1.5, 1.0);
        assert!(p.alpha() > 1.0);
        assert_abs_diff_eq!(params(1.0, 1.0).alpha(), 1.0 / 3.0);
    }

    #[test]
    fn mixed_sign_table() {
        assert_eq!(BoundaryCondition::DirichletFree.mixed_sign(), Some(-1.0));
        assert_eq!(BoundaryCondition::FreeDirichlet.mixed_sign(), Some(1.0));
        assert_eq!(BoundaryCondition::Dirichlet.mixed_sign(), None);
        assert_eq!(
            "df".parse::<BoundaryCondition>().unwrap(),
            BoundaryCondition::DirichletFree
        );
        assert!("robin".parse::<BoundaryCondition>().is_err());
    }

    #[test]
    fn domain_measures() {
        let square = FlatDomain::pi_cube(2).unwrap();
        assert_abs_diff_eq!(square.volume(), std::f64::consts::PI.powi(2));
        assert_abs_diff_eq!(square.boundary_measure(), 4.0 * std::f64::consts::PI);
        let cylinder = FlatDomain::boxed(vec![2.0, 3.0], vec![true, false]).unwrap();
        assert_abs_diff_eq!(cylinder.boundary_measure(), 4.0);
        let disk = FlatDomain::disk(1.0).unwrap();
        assert_abs_diff_eq!(disk.boundary_measure(), 2.0 * std::f64::consts::PI);
        assert!(FlatDomain::boxed(vec![1.0, -1.0], vec![false, false]).is_err());
        assert!(FlatDomain::boxed(vec![1.0], vec![false]).is_err());
    }

    #[test]
    fn pressure_plane_wave_is_eigenfield() {
        let s = plane_wave(0, 0.7);
        let lu = navier_apply(&s, &params(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(lu[0], 3.0 * s.value[0], epsilon = 1e-15);
        assert_abs_diff_eq!(lu[1], 0.0);
    }

    #[test]
    fn shear_plane_wave_is_eigenfield() {
        let s = plane_wave(1, 1.3);
        let p = params(4.0, 0.6);
        let lu = navier_apply(&s, &p).unwrap();
        assert_abs_diff_eq!(lu[0], 0.0);
        assert_abs_diff_eq!(lu[1], 0.6 * s.value[1], epsilon = 1e-15);
    }

    #[test]
    fn constant_field_is_annihilated() {
        let s = linear([[0.0; 2]; 2], [0.2, 0.4]);
        let mut s = s;
        s.value = [1.5, -2.0, 0.0];
        assert_eq!(navier_apply(&s, &params(1.0, 1.0)).unwrap(), [0.0; 3]);
        let t = traction_apply(&s, &[0.0, 1.0], &params(1.0, 1.0)).unwrap();
        assert_eq!(t, [0.0; 3]);
    }

    #[test]
    fn traction_hand_evaluations() {
        // u = (x2, x1): div u = 0, T u = mu (d_2 u + grad u2) = (2, 0)
        let s = linear([[0.0, 1.0], [1.0, 0.0]], [0.3, 0.0]);
        let t = traction_apply(&s, &[0.0, 1.0], &params(5.0, 1.0)).unwrap();
        assert_abs_diff_eq!(t[0], 2.0);
        assert_abs_diff_eq!(t[1], 0.0);
        // u = (x1, x2): div u = 2, T u = (0, lambda*2 + 2 mu) = (0, 4)
        let s = linear([[1.0, 0.0], [0.0, 1.0]], [0.3, 0.0]);
        let t = traction_apply(&s, &[0.0, 1.0], &params(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(t[0], 0.0);
        assert_abs_diff_eq!(t[1], 4.0);
    }

    #[test]
    fn non_unit_normal_rejected() {
        let s = linear([[1.0, 0.0], [0.0, 1.0]], [0.3, 0.0]);
        let err = traction_apply(&s, &[0.0, 1.0 + 1e-9], &params(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NonUnitNormal { .. }));
    }

    #[test]
    fn missing_derivatives_are_contract_violations() {
        let s = VectorFieldSample::new(2, [0.0; 3], [1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            navier_apply(&s, &params(1.0, 1.0)),
            Err(Error::ContractViolation(_))
        ));
        assert!(matches!(
            traction_apply(&s, &[1.0, 0.0], &params(1.0, 1.0)),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn rigid_motion_has_zero_traction() {
        // translation plus infinitesimal rotation
        let mut s = linear([[0.0, -0.8], [0.8, 0.0]], [0.4, 0.9]);
        s.value[0] += 2.0;
        s.value[1] -= 1.0;
        let n = [0.6, 0.8];
        let t = traction_apply(&s, &n, &params(2.5, 0.7)).unwrap();
        assert!(sup_norm(&t) < 1e-15);
        let r = bc_residual(BoundaryCondition::Free, &s, &n, &params(2.5, 0.7)).unwrap();
        assert!(r.max_abs() < 1e-15);
    }

    #[test]
    fn residual_layout() {
        let s = linear([[1.0, 2.0], [3.0, 4.0]], [0.5, 0.0]);
        let n = [0.0, -1.0];
        let p = params(1.0, 1.0);
        let dir = bc_residual(BoundaryCondition::Dirichlet, &s, &n, &p).unwrap();
        assert_eq!(dir.as_slice().len(), 4);
        assert_eq!(dir.traction_part(), &[0.0, 0.0]);
        let free = bc_residual(BoundaryCondition::Free, &s, &n, &p).unwrap();
        assert_eq!(free.displacement_part(), &[0.0, 0.0]);
        let df = bc_residual(BoundaryCondition::DirichletFree, &s, &n, &p).unwrap();
        assert_eq!(df.traction_part()[1], 0.0);
        let fd = bc_residual(BoundaryCondition::FreeDirichlet, &s, &n, &p).unwrap();
        assert_eq!(fd.displacement_part()[1], 0.0);
        assert!(bc_residual(BoundaryCondition::ScalarNeumann, &s, &n, &p).is_err());
    }

    #[test]
    fn zero_field_satisfies_dirichlet() {
        let s = linear([[0.0; 2]; 2], [0.0, 0.0]);
        let r = bc_residual(BoundaryCondition::Dirichlet, &s, &[0.0, -1.0], &params(1.0, 1.0))
            .unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn df_face_residual_for_gradient_eigenfield() {
        // u = grad(sin(m1 x1) sin(m2 x2)) on the face x2 = 0, outward normal -e2
        let (m1, m2) = (2.0_f64, 3.0_f64);
        for x1 in [0.1, 0.9, 2.3] {
            let x2 = 0.0_f64;
            let value = [
                m1 * (m1 * x1).cos() * (m2 * x2).sin(),
                m2 * (m1 * x1).sin() * (m2 * x2).cos(),
                0.0,
            ];
            let first = [
                [
                    -m1 * m1 * (m1 * x1).sin() * (m2 * x2).sin(),
                    m1 * m2 * (m1 * x1).cos() * (m2 * x2).cos(),
                    0.0,
                ],
                [
                    m1 * m2 * (m1 * x1).cos() * (m2 * x2).cos(),
                    -m2 * m2 * (m1 * x1).sin() * (m2 * x2).sin(),
                    0.0,
                ],
                [0.0; 3],
            ];
            let s = VectorFieldSample::new(2, [x1, x2, 0.0], value)
                .unwrap()
                .with_first(first);
            let r = bc_residual(
                BoundaryCondition::DirichletFree,
                &s,
                &[0.0, -1.0],
                &params(1.0, 1.0),
            )
            .unwrap();
            assert!(r.max_abs() < 1e-14, "{r:?}");
        }
    }
}
