//! Elastic eigenvalues of the unit disk from Bessel potentials.
//!
//! Displacements are built as `u = c1 grad psi1 + c2 curl(psi2 z)` with
//! `psi_j = J_k(s_j r) e^{ik theta}`, where `s_1 = sqrt(Lambda/(lambda+2mu))`
//! and `s_2 = sqrt(Lambda/mu)`. Imposing a boundary condition at `r = 1` gives a
//! 2x2 dispersion matrix in `(c1, c2)` for `k >= 1` and two decoupled scalar
//! conditions for `k = 0`. Roots are bracketed on a uniform grid in `s_2`,
//! refined by bisection, and each root is kept only after its eigenfield passes
//! the pointwise Navier and boundary checks.
//!
//! Whether this ansatz captures every eigenvalue is not assumed;
//! [`completeness_audit`] compares the resulting counting function with the
//! leading Weyl term.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lame::{
    bc_residual, navier_apply, sup_norm, traction_apply, BoundaryCondition, FlatDomain, Hessians, Jacobian,
    LameParameters, VectorFieldSample, MAX_DIM,
};
use crate::special::{
    bessel_j_orders_scaled, scaled_neighbours, try_bracket_roots, RootList, MAX_ARGUMENT,
    MAX_ORDER,
};
use crate::spectrum::{CertificationSummary, Family, ModeRow, Spectrum};
use crate::weyl::{leading_coefficient, CoefficientFamily, WeylCoefficients};

/// Lower end of the eigenvalue scan.
pub const SCAN_EPSILON: f64 = 1e-6;
/// Sample points per certification grid (interior and boundary).
pub const CERTIFICATION_POINTS: usize = 64;

/// The two angular partners of a potential pair of order `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Partner {
    /// `psi1 = J cos(k theta)`, `psi2 = J sin(k theta)`.
    Cosine,
    /// `psi1 = J sin(k theta)`, `psi2 = -J cos(k theta)`.
    Sine,
}

impl Partner {
    fn phase(self) -> Complex64 {
        match self {
            Partner::Cosine => Complex64::new(1.0, 0.0),
            Partner::Sine => Complex64::new(0.0, -1.0),
        }
    }
}

/// Which potentials a dispersion condition involves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Coupled,
    Pressure,
    Shear,
}

impl Branch {
    fn family(self) -> Family {
        match self {
            Branch::Coupled => Family::Coupled,
            Branch::Pressure => Family::Pressure,
            Branch::Shear => Family::Shear,
        }
    }
}

/// Boundary conditions at `r = 1` in the potential coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dispersion {
    /// `k >= 1`: rows are the two active boundary equations, each scaled to
    /// unit sup-norm.
    Coupled([[f64; 2]; 2]),
    /// `k = 0`: pressure and shear potentials decouple.
    Decoupled { pressure: f64, shear: f64 },
}

impl Dispersion {
    pub fn determinant(&self) -> f64 {
        match self {
            Dispersion::Coupled(m) => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            Dispersion::Decoupled { pressure, shear } => pressure * shear,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Wavenumbers {
    pressure: f64,
    shear: f64,
}

impl Wavenumbers {
    fn new(lambda: f64, params: &LameParameters) -> Self {
        Self {
            pressure: (lambda / params.pressure_modulus()).sqrt(),
            shear: (lambda / params.mu()).sqrt(),
        }
    }

    fn from_shear(y: f64, params: &LameParameters) -> Self {
        Self {
            pressure: y * params.alpha().sqrt(),
            shear: y,
        }
    }
}

/// Unnormalized matrix entries with magnitude scales, in column-scaled
/// Bessel values. Column scales are positive, so zero sets are unchanged.
struct RawMatrix {
    m: [[f64; 2]; 2],
    terms: [[f64; 2]; 2],
    log_scales: [f64; 2],
}

fn raw_matrix(bc: BoundaryCondition, k: u32, w: Wavenumbers) -> Result<RawMatrix> {
    let (x, y) = (w.pressure, w.shear);
    let bx = scaled_neighbours(k, x)?;
    let by = scaled_neighbours(k, y)?;
    let kf = f64::from(k);
    let (jx, dx) = (bx.at, 0.5 * (bx.below - bx.above));
    let (jy, dy) = (by.at, 0.5 * (by.below - by.above));

    // Bessel envelopes, positive for z > 0
    let ex = jx.hypot(dx);
    let ey = jy.hypot(dy);

    // (value, magnitude scale that does not vanish at roots)
    let ur = [(x * dx, x * ex), (kf * jy, kf * ey)];
    let ut = [(kf * jx, kf * ex), (y * dy, y * ey)];
    let tr = [
        (
            (2.0 * kf * kf - y * y) * jx - 2.0 * x * dx,
            (2.0 * kf * kf + y * y + 2.0 * x) * ex,
        ),
        (2.0 * kf * (y * dy - jy), 2.0 * kf * (y + 1.0) * ey),
    ];
    let tt = [
        (2.0 * kf * (jx - x * dx), 2.0 * kf * (1.0 + x) * ex),
        (
            2.0 * y * dy + (y * y - 2.0 * kf * kf) * jy,
            (2.0 * y + y * y + 2.0 * kf * kf) * ey,
        ),
    ];
    let rows = match bc {
        BoundaryCondition::Dirichlet => [ur, ut],
        BoundaryCondition::Free => [tr, tt],
        BoundaryCondition::DirichletFree => [ut, tr],
        BoundaryCondition::FreeDirichlet => [ur, tt],
        other => {
            return Err(Error::Unsupported(format!(
                "{other} is scalar; disk spectra are elastic"
            )))
        }
    };
    Ok(RawMatrix {
        m: rows.map(|r| r.map(|e| e.0)),
        terms: rows.map(|r| r.map(|e| e.1)),
        log_scales: [bx.log_scale, by.log_scale],
    })
}

// Position of the pressure and shear conditions within the k = 0 matrix.
fn decoupled_slots(bc: BoundaryCondition) -> [(usize, usize); 2] {
    match bc {
        BoundaryCondition::DirichletFree => [(1, 0), (0, 1)],
        _ => [(0, 0), (1, 1)],
    }
}

fn normalize(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

fn normalized_dispersion(bc: BoundaryCondition, k: u32, w: Wavenumbers) -> Result<(Dispersion, [f64; 2])> {
    let raw = raw_matrix(bc, k, w)?;
    if k == 0 {
        let [(pr, pc), (sr, sc)] = decoupled_slots(bc);
        return Ok((
            Dispersion::Decoupled {
                pressure: normalize(raw.m[pr][pc], raw.terms[pr][pc]),
                shear: normalize(raw.m[sr][sc], raw.terms[sr][sc]),
            },
            raw.log_scales,
        ));
    }
    let m = raw.m.map(|row| {
        let s = sup_norm(&row);
        row.map(|e| normalize(e, s))
    });
    Ok((Dispersion::Coupled(m), raw.log_scales))
}

/// Boundary rows for the sine partner, assembled from sampled fields at one
/// boundary point rather than from the closed form. The sine partner is the
/// cosine partner rotated by `pi/(2k)`, so the zero set must coincide.
fn sampled_dispersion(
    bc: BoundaryCondition,
    k: u32,
    w: Wavenumbers,
    params: &LameParameters,
) -> Result<[[f64; 2]; 2]> {
    const THETA: f64 = 0.37;
    let log_scales = [
        scaled_neighbours(k, w.pressure)?.log_scale,
        scaled_neighbours(k, w.shear)?.log_scale,
    ];
    let n = [THETA.cos(), THETA.sin()];
    let t = [-THETA.sin(), THETA.cos()];
    let dot = |v: &[f64], d: &[f64; 2]| v[0] * d[0] + v[1] * d[1];
    let mut m = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut c = [0.0; 2];
        c[col] = 1.0;
        let s = potential_field(k, w, c, Partner::Sine, 1.0, THETA, log_scales)?;
        let tr = traction_apply(&s, &n, params)?;
        let (ur, ut) = (dot(&s.value, &n), dot(&s.value, &t));
        let (tn, tt) = (dot(&tr, &n), dot(&tr, &t));
        let rows = match bc {
            BoundaryCondition::Dirichlet => (ur, ut),
            BoundaryCondition::Free => (tn, tt),
            BoundaryCondition::DirichletFree => (ut, tn),
            _ => (ur, tt),
        };
        m[0][col] = rows.0;
        m[1][col] = rows.1;
    }
    Ok(m.map(|row| {
        let s = sup_norm(&row);
        row.map(|e| normalize(e, s))
    }))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::ContractViolation(format!(
            "eigenvalue parameter must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// Dispersion conditions of angular order `k` at eigenvalue parameter `lambda`.
///
/// ```
/// use elastospec::disk::{dispersion_matrix, Dispersion};
/// use elastospec::lame::{BoundaryCondition, LameParameters};
///
/// let p = LameParameters::new(1.0, 1.0).unwrap();
/// // clamped torsional mode: J_0'(sqrt(Lambda / mu)) = 0 at the first zero of J_1
/// let j11 = 3.831_705_970_207_512_f64;
/// match dispersion_matrix(BoundaryCondition::Dirichlet, 0, j11 * j11, &p).unwrap() {
///     Dispersion::Decoupled { shear, .. } => assert!(shear.abs() < 1e-14),
///     _ => unreachable!(),
/// }
/// ```
pub fn dispersion_matrix(
    bc: BoundaryCondition,
    k: u32,
    lambda: f64,
    params: &LameParameters,
) -> Result<Dispersion> {
    check_lambda(lambda)?;
    Ok(normalized_dispersion(bc, k, Wavenumbers::new(lambda, params))?.0)
}

/// `d^a/dx^a d^b/dy^b` of `J_k(s r) e^{ik theta}` for `a + b <= 3`, from the
/// ladder identities `(dx + i dy) Phi_m = -s Phi_{m+1}` and
/// `(dx - i dy) Phi_m = s Phi_{m-1}`.
fn potential_jet(k: u32, s: f64, r: f64, theta: f64, log_scale: f64) -> Result<[[Complex64; 4]; 4]> {
    let lo = k.saturating_sub(3);
    let orders = bessel_j_orders_scaled(lo, k + 3, s * r, log_scale)?;
    let j = |m: i64| -> f64 {
        let abs = m.unsigned_abs() as u32;
        let v = orders[(abs - lo) as usize];
        if m < 0 && abs % 2 == 1 {
            -v
        } else {
            v
        }
    };
    // operator polynomials in (del, delbar): coefficient of del^p delbar^q
    let half = Complex64::new(0.5, 0.0);
    let dx = [(1usize, 0usize, half), (0, 1, half)];
    let dy = [(1, 0, Complex64::new(0.0, -0.5)), (0, 1, Complex64::new(0.0, 0.5))];
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for a in 0..4 {
        for b in 0..(4 - a) {
            let mut poly = vec![(0usize, 0usize, Complex64::new(1.0, 0.0))];
            for factor in std::iter::repeat(&dx).take(a).chain(std::iter::repeat(&dy).take(b)) {
                let mut next = Vec::with_capacity(poly.len() * 2);
                for &(p, q, c) in &poly {
                    for &(dp, dq, f) in factor.iter() {
                        next.push((p + dp, q + dq, c * f));
                    }
                }
                poly = next;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, q, c) in poly {
                let m = i64::from(k) + p as i64 - q as i64;
                let weight = (-s).powi(p as i32) * s.powi(q as i32);
                acc += c * weight * j(m) * Complex64::from_polar(1.0, m as f64 * theta);
            }
            out[a][b] = acc;
        }
    }
    Ok(out)
}

fn potential_field(
    k: u32,
    w: Wavenumbers,
    c: [f64; 2],
    partner: Partner,
    r: f64,
    theta: f64,
    log_scales: [f64; 2],
) -> Result<VectorFieldSample> {
    let eps = partner.phase();
    let minus_i = Complex64::new(0.0, -1.0);
    let p = potential_jet(k, w.pressure, r, theta, log_scales[0])?;
    let s = potential_jet(k, w.shear, r, theta, log_scales[1])?;
    // u_0 = c1 psi1_x + c2 psi2_y, u_1 = c1 psi1_y - c2 psi2_x
    let deriv = |comp: usize, a: usize, b: usize| -> f64 {
        let psi1 = |aa: usize, bb: usize| (eps * p[aa][bb]).re;
        let psi2 = |aa: usize, bb: usize| (minus_i * eps * s[aa][bb]).re;
        if comp == 0 {
            c[0] * psi1(a + 1, b) + c[1] * psi2(a, b + 1)
        } else {
            c[0] * psi1(a, b + 1) - c[1] * psi2(a + 1, b)
        }
    };
    let mut value = [0.0; MAX_DIM];
    let mut first: Jacobian = [[0.0; MAX_DIM]; MAX_DIM];
    let mut second: Hessians = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for comp in 0..2 {
        value[comp] = deriv(comp, 0, 0);
        first[comp][0] = deriv(comp, 1, 0);
        first[comp][1] = deriv(comp, 0, 1);
        second[comp][0][0] = deriv(comp, 2, 0);
        second[comp][1][1] = deriv(comp, 0, 2);
        let mixed = deriv(comp, 1, 1);
        second[comp][0][1] = mixed;
        second[comp][1][0] = mixed;
    }
    let point = [r * theta.cos(), r * theta.sin(), 0.0];
    Ok(VectorFieldSample::new(2, point, value)?
        .with_first(first)
        .with_second(second))
}

/// Displacement `c1 grad psi1 + c2 curl(psi2 z)` with analytic first and
/// second Cartesian derivatives at polar point `(r, theta)`.
pub fn displacement_from_potentials(
    k: u32,
    lambda: f64,
    params: &LameParameters,
    c: [f64; 2],
    partner: Partner,
    r: f64,
    theta: f64,
) -> Result<VectorFieldSample> {
    check_lambda(lambda)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::ContractViolation(format!(
            "radius must lie in (0, 1], got {r}"
        )));
    }
    potential_field(k, Wavenumbers::new(lambda, params), c, partner, r, theta, [0.0, 0.0])
}

/// Roots of one dispersion condition with the potential weights found at
/// each root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionMode {
    pub k: u32,
    pub bc: BoundaryCondition,
    pub branch: Branch,
    /// Certified roots in `Lambda`.
    pub roots: RootList,
    /// Unit null vectors `(c1, c2)` of the column-scaled matrix, or a single
    /// weight for decoupled branches.
    pub coefficients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRoot {
    pub k: u32,
    pub branch: Branch,
    pub eigenvalue: f64,
    pub residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskOptions {
    /// Grid spacing of the scan in the shear wavenumber `sqrt(Lambda/mu)`.
    pub grid_step: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    /// Largest tolerated fraction of rejected candidate roots.
    pub max_rejection_rate: f64,
    /// Partner whose dispersion matrix is scanned.
    pub partner: Partner,
}

impl Default for DiskOptions {
    fn default() -> Self {
        Self {
            grid_step: PI / 128.0,
            epsilon: SCAN_EPSILON,
            tolerance: 1e-8,
            max_rejection_rate: 1e-3,
            partner: Partner::Cosine,
        }
    }
}

/// A disk spectrum with its per-branch root data and rejected candidates.
#[derive(Debug, Clone, Serialize)]
pub struct DiskSpectrum {
    pub spectrum: Spectrum,
    pub modes: Vec<DispersionMode>,
    pub rejected: Vec<RejectedRoot>,
    /// Roots found by the scan, before certification.
    pub candidates: usize,
}

impl DiskSpectrum {
    pub fn rejection_rate(&self) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            self.rejected.len() as f64 / self.candidates as f64
        }
    }

    /// [`completeness_audit`] with the rejection count filled in.
    pub fn audit(&self, params: &LameParameters) -> Result<AuditReport> {
        let mut report = completeness_audit(&self.spectrum, params)?;
        report.rejected_roots = self.rejected.len();
        Ok(report)
    }
}

/// Largest angular order scanned for `lambda_max`.
pub fn max_angular_order(lambda_max: f64, params: &LameParameters) -> u32 {
    (lambda_max / params.min_modulus()).sqrt().ceil() as u32 + 8
}

/// Number of analytic zero modes: rigid motions admitted by the condition.
pub fn rigid_zero_modes(bc: BoundaryCondition) -> u64 {
    match bc {
        // two translations and one rotation
        BoundaryCondition::Free => 3,
        // rotation is tangential with zero traction
        BoundaryCondition::FreeDirichlet => 1,
        _ => 0,
    }
}

// Null vector of a 2x2 matrix, unit length.
fn null_vector(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let a = [m[0][1], -m[0][0]];
    let b = [m[1][1], -m[1][0]];
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    if n == 0.0 {
        [1.0, 0.0]
    } else {
        [v[0] / n, v[1] / n]
    }
}

struct FieldCheck {
    pde: f64,
    bc: f64,
    points: u64,
}

/// Scale-relative residuals of one candidate eigenfield: the PDE residual
/// against `max(Lambda |u|, |L u|)` over the interior grid, displacement slots
/// against `max |u|` and traction slots against `(|lambda| + 2 mu) max |grad u|`.
#[allow(clippy::too_many_arguments)]
fn check_field(
    bc: BoundaryCondition,
    k: u32,
    w: Wavenumbers,
    lambda: f64,
    c: [f64; 2],
    partner: Partner,
    log_scales: [f64; 2],
    params: &LameParameters,
) -> Result<FieldCheck> {
    let side = (CERTIFICATION_POINTS as f64).sqrt() as usize;
    let mut pde: f64 = 0.0;
    let mut pde_scale: f64 = 0.0;
    let mut u_scale: f64 = 0.0;
    let mut grad_scale: f64 = 0.0;
    let grad_norm = |s: &VectorFieldSample| {
        s.first
            .map(|f| (0..2).fold(0.0_f64, |m, a| m.max(sup_norm(&f[a][..2]))))
            .unwrap_or(0.0)
    };
    for i in 0..side {
        let r = (i as f64 + 0.5) / side as f64;
        for j in 0..side {
            let theta = 2.0 * PI * (j as f64 + 0.3) / side as f64;
            let s = potential_field(k, w, c, partner, r, theta, log_scales)?;
            let lu = navier_apply(&s, params)?;
            for a in 0..2 {
                pde = pde.max((lu[a] - lambda * s.value[a]).abs());
            }
            let u = sup_norm(&s.value[..2]);
            pde_scale = pde_scale.max(lambda * u).max(sup_norm(&lu[..2]));
            u_scale = u_scale.max(u);
            grad_scale = grad_scale.max(grad_norm(&s));
        }
    }
    let mut disp: f64 = 0.0;
    let mut trac: f64 = 0.0;
    for j in 0..CERTIFICATION_POINTS {
        let theta = 2.0 * PI * (j as f64 + 0.5) / CERTIFICATION_POINTS as f64;
        let s = potential_field(k, w, c, partner, 1.0, theta, log_scales)?;
        let normal = [theta.cos(), theta.sin()];
        let res = bc_residual(bc, &s, &normal, params)?;
        disp = disp.max(sup_norm(res.displacement_part()));
        trac = trac.max(sup_norm(res.traction_part()));
        u_scale = u_scale.max(sup_norm(&s.value[..2]));
        grad_scale = grad_scale.max(grad_norm(&s));
    }
    let relative = |r: f64, scale: f64| if scale > 0.0 { r / scale } else { f64::INFINITY };
    let trac_scale = (params.lambda().abs() + 2.0 * params.mu()) * grad_scale;
    Ok(FieldCheck {
        pde: relative(pde, pde_scale),
        bc: relative(disp, u_scale).max(if trac > 0.0 { relative(trac, trac_scale) } else { 0.0 }),
        points: (side * side + CERTIFICATION_POINTS) as u64,
    })
}

struct BranchScan {
    mode: DispersionMode,
    rows: Vec<ModeRow>,
    rejected: Vec<RejectedRoot>,
    candidates: usize,
    summary: CertificationSummary,
}

#[allow(clippy::too_many_arguments)]
fn scan_branch(
    bc: BoundaryCondition,
    k: u32,
    branch: Branch,
    params: &LameParameters,
    lambda_max: f64,
    options: &DiskOptions,
    scan_partner: Partner,
) -> Result<BranchScan> {
    let y_min = (options.epsilon / params.mu()).sqrt();
    let y_max = (lambda_max / params.mu()).sqrt();
    let grid = (((y_max - y_min) / options.grid_step).ceil() as usize).max(2);
    let condition = |y: f64| -> Result<f64> {
        let w = Wavenumbers::from_shear(y, params);
        let (d, _) = normalized_dispersion(bc, k, w)?;
        Ok(match (d, branch) {
            (Dispersion::Decoupled { pressure, .. }, Branch::Pressure) => pressure,
            (Dispersion::Decoupled { shear, .. }, Branch::Shear) => shear,
            (Dispersion::Coupled(_), Branch::Coupled) => match scan_partner {
                Partner::Cosine => d.determinant(),
                Partner::Sine => Dispersion::Coupled(sampled_dispersion(bc, k, w, params)?).determinant(),
            },
            _ => unreachable!("branch matches angular order"),
        })
    };
    let roots = try_bracket_roots(condition, y_min, y_max, grid)?;

    let multiplicity = if k == 0 { 1 } else { 2 };
    // at k = 0 the cosine partner carries only the pressure potential and
    // the sine partner only the shear potential
    let partners: &[Partner] = match branch {
        Branch::Pressure => &[Partner::Cosine],
        Branch::Shear => &[Partner::Sine],
        Branch::Coupled => &[Partner::Cosine, Partner::Sine],
    };
    let mut kept = Vec::new();
    let mut coefficients = Vec::new();
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    let mut summary = CertificationSummary::default();
    let mut residual_bound: f64 = 0.0;
    for &y in &roots.roots {
        let lambda = params.mu() * y * y;
        let w = Wavenumbers::from_shear(y, params);
        let (d, log_scales) = normalized_dispersion(bc, k, w)?;
        let (c, stored) = match (d, branch) {
            (Dispersion::Coupled(m), _) => {
                let v = null_vector(&m);
                (v, vec![v[0], v[1]])
            }
            (_, Branch::Pressure) => ([1.0, 0.0], vec![1.0]),
            _ => ([0.0, 1.0], vec![1.0]),
        };
        let mut worst = FieldCheck {
            pde: 0.0,
            bc: 0.0,
            points: 0,
        };
        for &partner in partners {
            let check = check_field(bc, k, w, lambda, c, partner, log_scales, params)?;
            worst.pde = worst.pde.max(check.pde);
            worst.bc = worst.bc.max(check.bc);
            worst.points += check.points;
        }
        let residual = worst.pde.max(worst.bc);
        if residual <= options.tolerance {
            summary.fields_checked += partners.len() as u64;
            summary.sample_points += worst.points;
            summary.max_pde_residual = summary.max_pde_residual.max(worst.pde);
            summary.max_bc_residual = summary.max_bc_residual.max(worst.bc);
            residual_bound = residual_bound.max(condition(y)?.abs());
            kept.push(lambda);
            coefficients.push(stored);
            rows.push(ModeRow::new(lambda, multiplicity, branch.family()).with_angular_index(k));
        } else {
            log::warn!("rejected {bc} k={k} {branch:?} root at Lambda={lambda:.12e}: residual {residual:.3e}");
            rejected.push(RejectedRoot {
                k,
                branch,
                eigenvalue: lambda,
                residual,
                reason: if worst.pde > worst.bc {
                    "PDE residual".into()
                } else {
                    "boundary residual".into()
                },
            });
        }
    }
    let candidates = roots.roots.len();
    Ok(BranchScan {
        mode: DispersionMode {
            k,
            bc,
            branch,
            roots: RootList {
                label: format!("{bc} k={k} {branch:?}"),
                interval: (options.epsilon, lambda_max),
                roots: kept,
                residual_bound,
            },
            coefficients,
        },
        rows,
        rejected,
        candidates,
        summary,
    })
}

fn check_envelope(lambda_max: f64, params: &LameParameters) -> Result<()> {
    let k_max = max_angular_order(lambda_max, params);
    let y_max = (lambda_max / params.mu()).sqrt();
    if k_max > MAX_ORDER || y_max > MAX_ARGUMENT {
        return Err(Error::Range(format!(
            "lambda_max = {lambda_max} needs Bessel order {k_max} and argument {y_max:.1}, beyond J_k(x) with k <= {MAX_ORDER}, x <= {MAX_ARGUMENT}"
        )));
    }
    Ok(())
}

/// Dispersion roots for a single angular order.
pub fn angular_modes(
    bc: BoundaryCondition,
    k: u32,
    params: &LameParameters,
    lambda_max: f64,
    options: &DiskOptions,
) -> Result<Vec<DispersionMode>> {
    check_lambda(lambda_max)?;
    check_envelope(lambda_max, params)?;
    let branches: &[Branch] = if k == 0 {
        &[Branch::Pressure, Branch::Shear]
    } else {
        &[Branch::Coupled]
    };
    branches
        .iter()
        .map(|&b| scan_branch(bc, k, b, params, lambda_max, options, options.partner).map(|s| s.mode))
        .collect()
}

/// Unit-disk spectrum with default options.
pub fn disk_spectrum(bc: BoundaryCondition, params: &LameParameters, lambda_max: f64) -> Result<DiskSpectrum> {
    disk_spectrum_with(bc, params, lambda_max, &DiskOptions::default())
}

pub fn disk_spectrum_with(
    bc: BoundaryCondition,
    params: &LameParameters,
    lambda_max: f64,
    options: &DiskOptions,
) -> Result<DiskSpectrum> {
    if !bc.is_elastic() {
        return Err(Error::Unsupported(format!("{bc} is scalar; disk spectra are elastic")));
    }
    check_lambda(lambda_max)?;
    check_envelope(lambda_max, params)?;
    let k_max = max_angular_order(lambda_max, params);
    let mut tasks: Vec<(u32, Branch)> = vec![(0, Branch::Pressure), (0, Branch::Shear)];
    tasks.extend((1..=k_max).map(|k| (k, Branch::Coupled)));
    let scans: Vec<Result<BranchScan>> = tasks
        .par_iter()
        .map(|&(k, branch)| scan_branch(bc, k, branch, params, lambda_max, options, options.partner))
        .collect();

    let mut rows = Vec::new();
    let mut modes = Vec::new();
    let mut rejected = Vec::new();
    let mut candidates = 0;
    let mut summary = CertificationSummary::default();
    for scan in scans {
        let scan = scan?;
        rows.extend(scan.rows);
        rejected.extend(scan.rejected);
        candidates += scan.candidates;
        summary.absorb(&scan.summary);
        modes.push(scan.mode);
    }
    let zero = rigid_zero_modes(bc);
    if zero > 0 {
        rows.push(ModeRow::new(0.0, zero, Family::Rigid));
    }
    let rate = if candidates == 0 {
        0.0
    } else {
        rejected.len() as f64 / candidates as f64
    };
    if rate > options.max_rejection_rate {
        return Err(Error::Integrity(format!(
            "{} of {candidates} disk roots failed certification ({:.3}% > {:.3}%)",
            rejected.len(),
            100.0 * rate,
            100.0 * options.max_rejection_rate
        )));
    }
    let spectrum = Spectrum::from_rows(rows, lambda_max, FlatDomain::unit_disk(), bc, Some(*params))?
        .with_certification(summary);
    Ok(DiskSpectrum {
        spectrum,
        modes,
        rejected,
        candidates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Deficit,
    Surplus,
}

/// Ratios `N(Lambda) / (a0 |M| Lambda + a1 |dM| sqrt(Lambda))` for one
/// candidate second coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoTermRatios {
    pub family: CoefficientFamily,
    pub a1: f64,
    pub ratios: Vec<f64>,
}

/// Comparison of a disk counting function with the leading Weyl term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub bc: BoundaryCondition,
    pub lambda_max: f64,
    pub verdict: Verdict,
    pub grid: Vec<f64>,
    /// `N(Lambda) / (a0 pi Lambda)` on `grid`.
    pub ratios: Vec<f64>,
    /// `1 - mean ratio` over the upper half of the grid.
    pub deficit_estimate: f64,
    pub rejected_roots: usize,
    /// Supplementary two-term comparisons; they do not enter the verdict.
    pub two_term: Vec<TwoTermRatios>,
}

impl AuditReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Points in the audit grid.
pub const AUDIT_GRID: usize = 32;

/// Compares `N(Lambda)` with `a0 pi Lambda` on a log grid over
/// `[lambda_max/10, lambda_max]`. The verdict is `consistent` iff every ratio
/// on the upper half of the grid lies in `[0.98, 1.02]`; otherwise the sign of
/// the mean deviation there picks `deficit` or `surplus`.
pub fn completeness_audit(spectrum: &Spectrum, params: &LameParameters) -> Result<AuditReport> {
    if !spectrum.domain().is_disk() {
        return Err(Error::DomainMismatch(format!(
            "completeness audit needs a disk spectrum, got {}",
            spectrum.domain().describe()
        )));
    }
    let lambda_max = spectrum.lambda_max();
    let a0 = leading_coefficient(2, params);
    let area = spectrum.domain().volume();
    let perimeter = spectrum.domain().boundary_measure();
    let grid: Vec<f64> = (0..AUDIT_GRID)
        .map(|i| lambda_max * 10f64.powf(-1.0 + i as f64 / (AUDIT_GRID - 1) as f64))
        .map(|l| l.min(lambda_max))
        .collect();
    let counts: Vec<f64> = grid
        .iter()
        .map(|&l| spectrum.counting(l).map(|n| n as f64))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = grid.iter().zip(&counts).map(|(&l, &n)| n / (a0 * area * l)).collect();
    let upper = &ratios[AUDIT_GRID / 2..];
    let mean = upper.iter().sum::<f64>() / upper.len() as f64;
    let verdict = if upper.iter().all(|r| (0.98..=1.02).contains(r)) {
        Verdict::Consistent
    } else if mean < 1.0 {
        Verdict::Deficit
    } else {
        Verdict::Surplus
    };
    let two_term = WeylCoefficients::all_families(spectrum.bc(), 2, params)
        .into_iter()
        .filter_map(|c| c.ok())
        .map(|c| TwoTermRatios {
            family: c.family,
            a1: c.a1,
            ratios: grid
                .iter()
                .zip(&counts)
                .map(|(&l, &n)| n / (c.a0 * area * l + c.a1 * perimeter * l.sqrt()))
                .collect(),
        })
        .collect();
    Ok(AuditReport {
        bc: spectrum.bc(),
        lambda_max,
        verdict,
        grid,
        ratios,
        deficit_estimate: 1.0 - mean,
        rejected_roots: 0,
        two_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{bessel_j, bracket_roots};
    use proptest::prelude::*;

    fn params() -> LameParameters {
        LameParameters::new(1.0, 1.0).unwrap()
    }

    /// Boundary conditions at r = 1 assembled from sampled fields: the two
    /// active polar components of the residual, divided by the angular factor.
    fn sampled_matrix(bc: BoundaryCondition, k: u32, lambda: f64, p: &LameParameters, partner: Partner) -> [[f64; 2]; 2] {
        let theta: f64 = 0.37;
        let n = [theta.cos(), theta.sin()];
        let t = [-theta.sin(), theta.cos()];
        let (fr, ft) = match partner {
            Partner::Cosine => ((k as f64 * theta).cos(), -(k as f64 * theta).sin()),
            Partner::Sine => ((k as f64 * theta).sin(), (k as f64 * theta).cos()),
        };
        let mut m = [[0.0; 2]; 2];
        for col in 0..2 {
            let mut c = [0.0; 2];
            c[col] = 1.0;
            let s = displacement_from_potentials(k, lambda, p, c, partner, 1.0, theta).unwrap();
            let tr = traction_apply(&s, &n, p).unwrap();
            let dot = |v: &[f64], w: &[f64; 2]| v[0] * w[0] + v[1] * w[1];
            let ur = dot(&s.value, &n) / fr;
            let ut = dot(&s.value, &t) / ft;
            let trn = dot(&tr, &n) / (p.mu() * fr);
            // tangential traction carries the opposite angular sign to u_theta
            let trt = -dot(&tr, &t) / (p.mu() * ft);
            let (r0, r1) = match bc {
                BoundaryCondition::Dirichlet => (ur, ut),
                BoundaryCondition::Free => (trn, trt),
                BoundaryCondition::DirichletFree => (ut, trn),
                _ => (ur, trt),
            };
            m[0][col] = r0;
            m[1][col] = r1;
        }
        m
    }

    fn unscaled(bc: BoundaryCondition, k: u32, lambda: f64, p: &LameParameters) -> [[f64; 2]; 2] {
        let raw = raw_matrix(bc, k, Wavenumbers::new(lambda, p)).unwrap();
        let s = raw.log_scales.map(f64::exp);
        raw.m.map(|row| [row[0] * s[0], row[1] * s[1]])
    }

    #[test]
    fn closed_form_matches_sampled_traction() {
        let p = LameParameters::new(0.7, 1.3).unwrap();
        for bc in BoundaryCondition::ELASTIC {
            for k in [1, 2, 5] {
                for lambda in [3.0, 40.0, 150.0] {
                    for partner in [Partner::Cosine, Partner::Sine] {
                        let a = unscaled(bc, k, lambda, &p);
                        let b = sampled_matrix(bc, k, lambda, &p, partner);
                        for i in 0..2 {
                            let s = sup_norm(&a[i]);
                            for j in 0..2 {
                                assert!(
                                    (a[i][j] - b[i][j]).abs() <= 1e-9 * s,
                                    "{bc} k={k} L={lambda} {partner:?}: {a:?} vs {b:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn potentials_are_curl_free_and_divergence_free() {
        let p = params();
        for (k, r, th) in [(0, 0.4, 0.1), (3, 0.9, 2.0), (7, 0.55, 4.4)] {
            let s = displacement_from_potentials(k, 60.0, &p, [1.0, 0.0], Partner::Cosine, r, th).unwrap();
            let f = s.first.unwrap();
            let scale = sup_norm(&f[0][..2]).max(sup_norm(&f[1][..2]));
            assert!((f[1][0] - f[0][1]).abs() <= 1e-12 * scale);
            let s = displacement_from_potentials(k, 60.0, &p, [0.0, 1.0], Partner::Sine, r, th).unwrap();
            assert!(s.divergence().unwrap().abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn torsional_dirichlet_family() {
        let p = params();
        let j1_zeros = bracket_roots(|x| bessel_j(1, x).unwrap(), 1.0, 20.0, 400).unwrap();
        let modes = angular_modes(BoundaryCondition::Dirichlet, 0, &p, 400.0, &DiskOptions::default()).unwrap();
        let shear = modes.iter().find(|m| m.branch == Branch::Shear).unwrap();
        let expected: Vec<f64> = j1_zeros.roots.iter().map(|z| z * z).filter(|&l| l <= 400.0).collect();
        assert_eq!(shear.roots.len(), expected.len());
        for (a, b) in shear.roots.roots.iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-9 * b);
        }
    }

    #[test]
    fn no_spurious_root_near_zero() {
        let p = params();
        for bc in BoundaryCondition::ELASTIC {
            for k in 1..6 {
                let det = |l: f64| dispersion_matrix(bc, k, l, &p).unwrap().determinant();
                assert!(det(SCAN_EPSILON).is_finite());
                let roots = bracket_roots(det, SCAN_EPSILON, 1.0, 200).unwrap();
                assert!(roots.is_empty(), "{bc} k={k}: {:?}", roots.roots);
            }
        }
    }

    #[test]
    fn df_pressure_branch_is_normal_traction() {
        let p = params();
        let lambda = 20.0;
        match dispersion_matrix(BoundaryCondition::DirichletFree, 0, lambda, &p).unwrap() {
            Dispersion::Decoupled { pressure, .. } => {
                let x = (lambda / 3.0).sqrt();
                let y2 = lambda;
                let raw = -y2 * bessel_j(0, x).unwrap() + 2.0 * x * bessel_j(1, x).unwrap();
                assert_eq!(pressure.signum(), raw.signum());
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn low_spectrum_is_certified() {
        let p = params();
        for bc in BoundaryCondition::ELASTIC {
            let s = disk_spectrum(bc, &p, 200.0).unwrap();
            assert!(s.rejected.is_empty(), "{bc}: {:?}", s.rejected);
            let first = s.spectrum.entries()[0];
            match bc {
                BoundaryCondition::Free => assert_eq!((first.eigenvalue, first.multiplicity), (0.0, 3)),
                BoundaryCondition::FreeDirichlet => assert_eq!((first.eigenvalue, first.multiplicity), (0.0, 1)),
                _ => assert!(first.eigenvalue > 0.0),
            }
        }
    }

    #[test]
    fn partners_share_roots() {
        let p = LameParameters::new(2.0, 0.8).unwrap();
        for bc in BoundaryCondition::ELASTIC {
            for k in [1, 4] {
                let a = angular_modes(bc, k, &p, 300.0, &DiskOptions::default()).unwrap();
                let opts = DiskOptions {
                    partner: Partner::Sine,
                    ..DiskOptions::default()
                };
                let b = angular_modes(bc, k, &p, 300.0, &opts).unwrap();
                assert_eq!(a[0].roots.len(), b[0].roots.len());
                for (x, y) in a[0].roots.roots.iter().zip(&b[0].roots.roots) {
                    assert!((x - y).abs() <= 1e-12 * x.max(1.0));
                }
            }
        }
    }

    #[test]
    fn grid_refinement_is_stable() {
        let p = params();
        for bc in BoundaryCondition::ELASTIC {
            for k in [0, 2, 9] {
                let coarse = angular_modes(bc, k, &p, 600.0, &DiskOptions::default()).unwrap();
                let opts = DiskOptions {
                    grid_step: PI / 256.0,
                    ..DiskOptions::default()
                };
                let fine = angular_modes(bc, k, &p, 600.0, &opts).unwrap();
                for (c, f) in coarse.iter().zip(&fine) {
                    assert_eq!(c.roots.len(), f.roots.len(), "{bc} k={k}");
                    for (x, y) in c.roots.roots.iter().zip(&f.roots.roots) {
                        assert!((x - y).abs() <= 1e-10 * x.max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn audit_flags_constructed_errors() {
        let p = params();
        let s = disk_spectrum(BoundaryCondition::Free, &p, 800.0).unwrap();
        let thin: Vec<ModeRow> = s.spectrum.rows().iter().filter(|r| r.angular_index != Some(0) && r.angular_index.map_or(true, |k| k % 2 == 0)).copied().collect();
        let thin = Spectrum::from_rows(thin, 800.0, FlatDomain::unit_disk(), BoundaryCondition::Free, Some(p)).unwrap();
        assert_eq!(completeness_audit(&thin, &p).unwrap().verdict, Verdict::Deficit);
        let doubled: Vec<ModeRow> = s
            .spectrum
            .rows()
            .iter()
            .map(|r| ModeRow { multiplicity: 2 * r.multiplicity, ..*r })
            .collect();
        let doubled = Spectrum::from_rows(doubled, 800.0, FlatDomain::unit_disk(), BoundaryCondition::Free, Some(p)).unwrap();
        assert_eq!(completeness_audit(&doubled, &p).unwrap().verdict, Verdict::Surplus);
        let report = s.audit(&p).unwrap();
        assert_eq!(report.ratios.len(), AUDIT_GRID);
        assert_eq!(report.two_term.len(), 2);
        let json = report.to_json();
        for key in ["verdict", "grid", "ratios", "rejected_roots"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn audit_rejects_boxes() {
        let p = params();
        let b = crate::boxes::elastic_box_spectrum(&FlatDomain::pi_cube(2).unwrap(), &p, BoundaryCondition::DirichletFree, 10.0).unwrap();
        assert!(matches!(completeness_audit(&b, &p), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn envelope_is_enforced() {
        let p = LameParameters::new(1.0, 0.01).unwrap();
        assert!(matches!(disk_spectrum(BoundaryCondition::Dirichlet, &p, 3000.0), Err(Error::Range(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn potential_fields_solve_navier(k in 0u32..12, lambda in 1.0f64..800.0, c in (-1.0f64..1.0, -1.0f64..1.0), r in 0.05f64..1.0, th in 0.0f64..6.3, sine in any::<bool>()) {
            let p = LameParameters::new(1.7, 0.9).unwrap();
            let partner = if sine { Partner::Sine } else { Partner::Cosine };
            let s = displacement_from_potentials(k, lambda, &p, [c.0, c.1], partner, r, th).unwrap();
            let lu = navier_apply(&s, &p).unwrap();
            let scale = sup_norm(&lu[..2]).max(lambda * sup_norm(&s.value[..2])).max(1e-300);
            for a in 0..2 {
                prop_assert!((lu[a] - lambda * s.value[a]).abs() <= 1e-10 * scale.max(1.0));
            }
        }

        #[test]
        fn roots_scale_with_moduli(c in 0.3f64..3.0, k in 0u32..5) {
            let p = LameParameters::new(1.0, 1.0).unwrap();
            let q = p.scaled(c).unwrap();
            let a = angular_modes(BoundaryCondition::FreeDirichlet, k, &p, 150.0, &DiskOptions::default()).unwrap();
            let b = angular_modes(BoundaryCondition::FreeDirichlet, k, &q, 150.0 * c, &DiskOptions::default()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.roots.len(), y.roots.len());
                for (u, v) in x.roots.roots.iter().zip(&y.roots.roots) {
                    prop_assert!((u * c - v).abs() <= 1e-9 * v);
                }
            }
        }
    }
}
