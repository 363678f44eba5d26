//! Exact spectra on boxes with optional periodic axes.
//!
//! Scalar Laplacian spectra are lattice sums. The mixed elastic problems DF
//! and FD separate: every eigenfield has the form
//! `u_j = c_j own_j(x_j) prod_{i != j} other_i(x_i)` with one trigonometric
//! factor pair per axis, and the polarization `c` diagonalizes the Navier
//! symbol `mu |k|^2 + (lambda + mu) k k^T` on the components that survive the
//! boundary factors. Every emitted field is checked pointwise against the
//! Navier operator and the boundary residual before its eigenvalue is kept.

use std::f64::consts::PI;
use std::sync::LazyLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lame::{
    normalized_bc_residual, pde_residual, BoundaryCondition, FlatDomain, Hessians, Jacobian,
    LameParameters, ResidualTolerance, Shape, VectorFieldSample, MAX_DIM,
};
use crate::spectrum::{CertificationSummary, Family, ModeRow, Spectrum};

/// Default cap on the number of lattice points an enumeration may visit.
pub const DEFAULT_MODE_BUDGET: u64 = 50_000_000;

/// Interior sample positions per axis; faces add two more.
pub const SAMPLES_PER_AXIS: usize = 8;

const FACE_LOW: usize = SAMPLES_PER_AXIS;
const FACE_HIGH: usize = SAMPLES_PER_AXIS + 1;
const POSITIONS: usize = SAMPLES_PER_AXIS + 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxOptions {
    pub budget: u64,
    pub tolerance: f64,
}

impl Default for BoxOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_MODE_BUDGET,
            tolerance: ResidualTolerance::default().tol,
        }
    }
}

/// One-dimensional factor of a separated field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trig {
    Sin,
    Cos,
    NegSin,
    One,
}

impl Trig {
    fn vanishes_for_zero_wavenumber(self) -> bool {
        matches!(self, Trig::Sin | Trig::NegSin)
    }

    /// Value, first and second derivative given `sin(kx)`, `cos(kx)` and `k`.
    fn jet(self, s: f64, c: f64, k: f64) -> [f64; 3] {
        match self {
            Trig::Sin => [s, k * c, -k * k * s],
            Trig::Cos => [c, -k * s, -k * k * c],
            Trig::NegSin => [-s, -k * c, k * k * s],
            Trig::One => [1.0, 0.0, 0.0],
        }
    }
}

/// Factor pair on one axis: `other` multiplies the components transverse to
/// the axis and `own` multiplies the component along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisFactor {
    pub other: Trig,
    pub own: Trig,
    /// Lattice index along the axis.
    pub index: u32,
    pub wavenumber: f64,
    pub periodic: bool,
}

/// A separated eigenfield of a mixed problem on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedField {
    pub axes: Vec<AxisFactor>,
    /// Unit polarization vector; entries beyond the dimension are zero.
    pub polarization: [f64; MAX_DIM],
    pub eigenvalue: f64,
    pub family: Family,
}

impl SeparatedField {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn describe(&self) -> String {
        let idx: Vec<String> = self
            .axes
            .iter()
            .map(|a| match (a.periodic, a.other) {
                (true, Trig::Sin) => format!("{}s", a.index),
                (true, Trig::Cos) => format!("{}c", a.index),
                _ => a.index.to_string(),
            })
            .collect();
        format!(
            "{} mode m=({}) c={:?} eigenvalue={:.6e}",
            self.family,
            idx.join(","),
            &self.polarization[..self.dim()],
            self.eigenvalue
        )
    }

    /// Evaluates the field and its derivatives at an arbitrary point.
    pub fn sample(&self, point: &[f64]) -> Result<VectorFieldSample> {
        let d = self.dim();
        if point.len() != d {
            return Err(Error::ContractViolation(format!(
                "point has {} coordinates, field has dimension {d}",
                point.len()
            )));
        }
        let mut jets = [[[0.0; 3]; 2]; MAX_DIM];
        for (i, axis) in self.axes.iter().enumerate() {
            let (s, c) = (axis.wavenumber * point[i]).sin_cos();
            jets[i] = [
                axis.other.jet(s, c, axis.wavenumber),
                axis.own.jet(s, c, axis.wavenumber),
            ];
        }
        let mut p = [0.0; MAX_DIM];
        p[..d].copy_from_slice(point);
        Ok(assemble(d, &jets, &self.polarization, p))
    }
}

// Builds the sample from per-axis jets: jets[i][0] is `other`, jets[i][1] is `own`.
fn assemble(d: usize, jets: &[[[f64; 3]; 2]; MAX_DIM], c: &[f64; MAX_DIM], point: [f64; MAX_DIM]) -> VectorFieldSample {
    let mut value = [0.0; MAX_DIM];
    let mut first: Jacobian = [[0.0; MAX_DIM]; MAX_DIM];
    let mut second: Hessians = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for j in 0..d {
        if c[j] == 0.0 {
            continue;
        }
        let factor = |orders: [usize; MAX_DIM]| -> f64 {
            let mut prod = c[j];
            for i in 0..d {
                prod *= jets[i][usize::from(i == j)][orders[i]];
            }
            prod
        };
        value[j] = factor([0; MAX_DIM]);
        for a in 0..d {
            let mut o = [0; MAX_DIM];
            o[a] += 1;
            first[j][a] = factor(o);
            for b in 0..=a {
                let mut o2 = o;
                o2[b] += 1;
                let v = factor(o2);
                second[j][a][b] = v;
                second[j][b][a] = v;
            }
        }
    }
    VectorFieldSample::new(d, point, value)
        .expect("dimension checked by caller")
        .with_first(first)
        .with_second(second)
}

// sin(pi n / 16) for n in 0..32 with exact zeros and units.
static SIN_PI_16: LazyLock<[f64; 32]> = LazyLock::new(|| {
    std::array::from_fn(|n| match n {
        0 | 16 => 0.0,
        8 => 1.0,
        24 => -1.0,
        _ => (PI * n as f64 / 16.0).sin(),
    })
});

fn sin_cos_pi_16(n: u64) -> (f64, f64) {
    let t = &*SIN_PI_16;
    (t[(n % 32) as usize], t[((n + 8) % 32) as usize])
}

/// Multiple of `pi/16` for `k x` at sample position `p` of an axis.
fn phase_index(axis: &AxisFactor, p: usize) -> u64 {
    let m = u64::from(axis.index) * if axis.periodic { 2 } else { 1 };
    match p {
        FACE_LOW => 0,
        FACE_HIGH => 16 * m,
        s => m * (2 * s as u64 + 1),
    }
}

fn position_coordinate(length: f64, p: usize) -> f64 {
    match p {
        FACE_LOW => 0.0,
        FACE_HIGH => length,
        s => length * (2 * s + 1) as f64 / (2 * SAMPLES_PER_AXIS) as f64,
    }
}

struct BoxGeometry {
    lengths: Vec<f64>,
    periodic: Vec<bool>,
}

impl BoxGeometry {
    fn from_domain(domain: &FlatDomain) -> Result<Self> {
        match domain.shape() {
            Shape::Box { lengths, periodic } => Ok(Self {
                lengths: lengths.clone(),
                periodic: periodic.clone(),
            }),
            Shape::Disk { .. } => Err(Error::DomainMismatch(
                "box spectra need a box domain, got a disk".into(),
            )),
        }
    }

    fn dim(&self) -> usize {
        self.lengths.len()
    }

    /// Wavenumber per unit lattice index.
    fn unit(&self, i: usize) -> f64 {
        let base = PI / self.lengths[i];
        if self.periodic[i] {
            2.0 * base
        } else {
            base
        }
    }

    /// Largest lattice index with `(unit m)^2 <= bound`, plus one.
    fn max_index(&self, i: usize, k2_bound: f64) -> u32 {
        (k2_bound.sqrt() / self.unit(i)).ceil() as u32 + 1
    }

    fn lattice_size(&self, k2_bound: f64) -> u64 {
        (0..self.dim())
            .map(|i| {
                let n = u64::from(self.max_index(i, k2_bound)) + 1;
                if self.periodic[i] {
                    2 * n
                } else {
                    n
                }
            })
            .fold(1u64, |acc, n| acc.saturating_mul(n))
    }

    /// Visits every lattice point `m` (non-negative) with `|k|^2 <= k2_bound`
    /// whose first index equals `m0`.
    fn for_each_with_first(&self, m0: u32, k2_bound: f64, mut f: impl FnMut(&[u32], f64)) {
        let d = self.dim();
        let mut m = vec![0u32; d];
        m[0] = m0;
        let k0 = self.unit(0) * f64::from(m0);
        self.recurse(1, k0 * k0, k2_bound, &mut m, &mut f);
    }

    fn recurse(&self, axis: usize, partial: f64, bound: f64, m: &mut Vec<u32>, f: &mut impl FnMut(&[u32], f64)) {
        if partial > bound {
            return;
        }
        if axis == self.dim() {
            f(m, partial);
            return;
        }
        let unit = self.unit(axis);
        let mut n = 0u32;
        loop {
            let k = unit * f64::from(n);
            let total = partial + k * k;
            if total > bound {
                break;
            }
            m[axis] = n;
            self.recurse(axis + 1, total, bound, m, f);
            n += 1;
        }
        m[axis] = 0;
    }

    fn check_budget(&self, k2_bound: f64, budget: u64) -> Result<()> {
        let required = self.lattice_size(k2_bound);
        if required > budget {
            return Err(Error::Resource { required, budget });
        }
        Ok(())
    }
}

fn check_lambda_max(lambda_max: f64) -> Result<()> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::ContractViolation(format!(
            "lambda_max must be positive and finite, got {lambda_max}"
        )));
    }
    Ok(())
}

/// Scalar Laplacian spectrum on a box.
///
/// Non-periodic axes contribute `(pi m / L)^2` with `m >= 1` (Dirichlet) or
/// `m >= 0` (Neumann); periodic axes contribute `(2 pi m / L)^2` for `m` in `Z`.
pub fn scalar_box_spectrum(
    domain: &FlatDomain,
    bc: BoundaryCondition,
    lambda_max: f64,
    budget: u64,
) -> Result<Spectrum> {
    if !bc.is_scalar() {
        return Err(Error::Unsupported(format!(
            "scalar_box_spectrum needs a scalar boundary condition, got {bc}"
        )));
    }
    check_lambda_max(lambda_max)?;
    let geo = BoxGeometry::from_domain(domain)?;
    geo.check_budget(lambda_max, budget)?;
    let dirichlet = bc == BoundaryCondition::ScalarDirichlet;
    let m0_max = geo.max_index(0, lambda_max);
    let chunks: Vec<Vec<ModeRow>> = (0..=m0_max)
        .into_par_iter()
        .map(|m0| {
            let mut rows = Vec::new();
            geo.for_each_with_first(m0, lambda_max, |m, k2| {
                let mut mult = 1u64;
                for (i, &mi) in m.iter().enumerate() {
                    if geo.periodic[i] {
                        if mi > 0 {
                            mult *= 2;
                        }
                    } else if dirichlet && mi == 0 {
                        return;
                    }
                }
                rows.push(ModeRow::new(k2, mult, Family::Scalar));
            });
            rows
        })
        .collect();
    Spectrum::from_rows(chunks.concat(), lambda_max, domain.clone(), bc, None)
}

fn axis_choices(bc: BoundaryCondition, periodic: bool, index: u32, wavenumber: f64) -> Vec<AxisFactor> {
    let make = |other, own| AxisFactor {
        other,
        own,
        index,
        wavenumber,
        periodic,
    };
    if periodic {
        if index == 0 {
            vec![make(Trig::One, Trig::One)]
        } else {
            vec![make(Trig::Sin, Trig::Cos), make(Trig::Cos, Trig::NegSin)]
        }
    } else if bc == BoundaryCondition::DirichletFree {
        vec![make(Trig::Sin, Trig::Cos)]
    } else {
        vec![make(Trig::Cos, Trig::NegSin)]
    }
}

/// Polarizations of the separated fields sharing one set of axis factors.
fn polarizations(axes: &[AxisFactor]) -> Result<(Option<[f64; MAX_DIM]>, Vec<[f64; MAX_DIM]>)> {
    let d = axes.len();
    let alive: Vec<bool> = (0..d)
        .map(|j| {
            let own_zero = axes[j].index == 0 && axes[j].own.vanishes_for_zero_wavenumber();
            let other_zero = (0..d)
                .any(|i| i != j && axes[i].index == 0 && axes[i].other.vanishes_for_zero_wavenumber());
            !own_zero && !other_zero
        })
        .collect();
    let mut k = [0.0; MAX_DIM];
    for (i, a) in axes.iter().enumerate() {
        k[i] = a.wavenumber;
    }
    let k_norm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    let projected_norm = (0..d).filter(|&j| alive[j]).map(|j| k[j] * k[j]).sum::<f64>().sqrt();

    let pressure = if k_norm == 0.0 || projected_norm == 0.0 {
        None
    } else if (projected_norm - k_norm).abs() <= 1e-14 * k_norm {
        Some(k.map(|x| x / k_norm))
    } else {
        return Err(Error::Integrity(format!(
            "wave vector {k:?} is neither inside nor orthogonal to the surviving components {alive:?}"
        )));
    };

    let mut shear: Vec<[f64; MAX_DIM]> = Vec::new();
    for j in (0..d).filter(|&j| alive[j]) {
        let mut v = [0.0; MAX_DIM];
        v[j] = 1.0;
        let basis = pressure.iter().chain(shear.iter()).copied().collect::<Vec<_>>();
        for b in basis {
            let dot: f64 = (0..d).map(|i| v[i] * b[i]).sum();
            for i in 0..d {
                v[i] -= dot * b[i];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            shear.push(v.map(|x| x / norm));
        }
    }
    let expected = alive.iter().filter(|&&a| a).count() - usize::from(pressure.is_some());
    if shear.len() != expected {
        return Err(Error::Integrity(format!(
            "shear basis has {} vectors, expected {expected}",
            shear.len()
        )));
    }
    Ok((pressure, shear))
}

/// Every separated eigenfield of a mixed problem with eigenvalue at most
/// `lambda_max`, in lattice order. Intended for small `lambda_max`.
pub fn box_eigenfields(
    domain: &FlatDomain,
    params: &LameParameters,
    bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Vec<SeparatedField>> {
    let geo = elastic_geometry(domain, bc)?;
    check_lambda_max(lambda_max)?;
    let k2_bound = lambda_max / params.min_modulus();
    geo.check_budget(k2_bound, DEFAULT_MODE_BUDGET)?;
    let mut out = Vec::new();
    for m0 in 0..=geo.max_index(0, k2_bound) {
        let mut err = None;
        geo.for_each_with_first(m0, k2_bound, |m, k2| {
            if err.is_some() {
                return;
            }
            if let Err(e) = fields_at(&geo, bc, params, m, k2, lambda_max, |f| out.push(f)) {
                err = Some(e);
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(out)
}

fn elastic_geometry(domain: &FlatDomain, bc: BoundaryCondition) -> Result<BoxGeometry> {
    match bc {
        BoundaryCondition::DirichletFree | BoundaryCondition::FreeDirichlet => {}
        BoundaryCondition::Dirichlet | BoundaryCondition::Free => {
            return Err(Error::Unsupported(format!(
                "{bc} elastic problems do not separate on boxes; only DF and FD are provided"
            )))
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "{bc} is scalar; use scalar_box_spectrum"
            )))
        }
    }
    let geo = BoxGeometry::from_domain(domain)?;
    if !(2..=3).contains(&geo.dim()) {
        return Err(Error::Unsupported(format!(
            "elastic box spectra support d = 2 or 3, got {}",
            geo.dim()
        )));
    }
    Ok(geo)
}

// Calls `emit` for every field at lattice point `m` with eigenvalue <= lambda_max.
fn fields_at(
    geo: &BoxGeometry,
    bc: BoundaryCondition,
    params: &LameParameters,
    m: &[u32],
    k2: f64,
    lambda_max: f64,
    mut emit: impl FnMut(SeparatedField),
) -> Result<()> {
    let d = geo.dim();
    let choices: Vec<Vec<AxisFactor>> = (0..d)
        .map(|i| axis_choices(bc, geo.periodic[i], m[i], geo.unit(i) * f64::from(m[i])))
        .collect();
    let mut combo = vec![0usize; d];
    loop {
        let axes: Vec<AxisFactor> = (0..d).map(|i| choices[i][combo[i]]).collect();
        let (pressure, shear) = polarizations(&axes)?;
        let p_value = params.pressure_modulus() * k2;
        let s_value = params.mu() * k2;
        if let Some(c) = pressure {
            if p_value <= lambda_max {
                emit(SeparatedField {
                    axes: axes.clone(),
                    polarization: c,
                    eigenvalue: p_value,
                    family: Family::Pressure,
                });
            }
        }
        if s_value <= lambda_max {
            for c in shear {
                emit(SeparatedField {
                    axes: axes.clone(),
                    polarization: c,
                    eigenvalue: s_value,
                    family: Family::Shear,
                });
            }
        }
        // advance the mixed-radix counter over periodic partner choices
        let mut i = 0;
        loop {
            if i == d {
                return Ok(());
            }
            combo[i] += 1;
            if combo[i] < choices[i].len() {
                break;
            }
            combo[i] = 0;
            i += 1;
        }
    }
}

/// Checks one field on the deterministic sample grid: `8^d` interior points
/// for the Navier residual and `8^(d-1)` points on each face of every
/// non-periodic axis for the boundary residual.
pub fn certify_field(
    field: &SeparatedField,
    domain: &FlatDomain,
    bc: BoundaryCondition,
    params: &LameParameters,
    tolerance: f64,
) -> Result<CertificationSummary> {
    let geo = BoxGeometry::from_domain(domain)?;
    certify_with(field, &geo, bc, params, tolerance)
}

fn certify_with(
    field: &SeparatedField,
    geo: &BoxGeometry,
    bc: BoundaryCondition,
    params: &LameParameters,
    tolerance: f64,
) -> Result<CertificationSummary> {
    let d = field.dim();
    let mut jets = [[[[0.0; 3]; 2]; POSITIONS]; MAX_DIM];
    for (i, axis) in field.axes.iter().enumerate() {
        for (p, jet) in jets[i].iter_mut().enumerate() {
            let (s, c) = sin_cos_pi_16(phase_index(axis, p));
            *jet = [
                axis.other.jet(s, c, axis.wavenumber),
                axis.own.jet(s, c, axis.wavenumber),
            ];
        }
    }
    let sample_at = |pos: &[usize; MAX_DIM]| {
        let mut local = [[[0.0; 3]; 2]; MAX_DIM];
        let mut point = [0.0; MAX_DIM];
        for i in 0..d {
            local[i] = jets[i][pos[i]];
            point[i] = position_coordinate(geo.lengths[i], pos[i]);
        }
        assemble(d, &local, &field.polarization, point)
    };
    let fail = |residual: f64| Error::Certification {
        mode: format!("{bc} {}", field.describe()),
        residual,
    };

    let mut summary = CertificationSummary {
        fields_checked: 1,
        ..Default::default()
    };
    let interior = SAMPLES_PER_AXIS.pow(d as u32);
    for flat in 0..interior {
        let mut pos = [0usize; MAX_DIM];
        let mut rest = flat;
        for p in pos.iter_mut().take(d) {
            *p = rest % SAMPLES_PER_AXIS;
            rest /= SAMPLES_PER_AXIS;
        }
        let (r, scale) = pde_residual(&sample_at(&pos), field.eigenvalue, params)?;
        let normalized = ResidualTolerance::normalized(r, scale);
        if !(normalized <= tolerance) {
            return Err(fail(normalized));
        }
        summary.max_pde_residual = summary.max_pde_residual.max(normalized);
    }
    summary.sample_points += interior as u64;

    let face_points = SAMPLES_PER_AXIS.pow(d as u32 - 1);
    for a in (0..d).filter(|&a| !geo.periodic[a]) {
        for (face, sign) in [(FACE_LOW, -1.0), (FACE_HIGH, 1.0)] {
            let mut normal = vec![0.0; d];
            normal[a] = sign;
            for flat in 0..face_points {
                let mut pos = [0usize; MAX_DIM];
                let mut rest = flat;
                for (i, p) in pos.iter_mut().enumerate().take(d) {
                    if i == a {
                        *p = face;
                    } else {
                        *p = rest % SAMPLES_PER_AXIS;
                        rest /= SAMPLES_PER_AXIS;
                    }
                }
                let normalized = normalized_bc_residual(bc, &sample_at(&pos), &normal, params)?;
                if !(normalized <= tolerance) {
                    return Err(fail(normalized));
                }
                summary.max_bc_residual = summary.max_bc_residual.max(normalized);
            }
            summary.sample_points += face_points as u64;
        }
    }
    Ok(summary)
}

/// Certified spectrum of the DF or FD problem on a box of dimension 2 or 3.
///
/// ```
/// use elastospec::boxes::elastic_box_spectrum;
/// use elastospec::lame::{BoundaryCondition, FlatDomain, LameParameters};
///
/// let square = FlatDomain::pi_cube(2).unwrap();
/// let params = LameParameters::new(1.0, 1.0).unwrap();
/// let s = elastic_box_spectrum(&square, &params, BoundaryCondition::DirichletFree, 10.0).unwrap();
/// assert_eq!(s.entries()[0].eigenvalue, 1.0);
/// assert_eq!(s.counting(1.0 + 1e-12).unwrap(), 2);
/// ```
pub fn elastic_box_spectrum(
    domain: &FlatDomain,
    params: &LameParameters,
    bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Spectrum> {
    elastic_box_spectrum_with(domain, params, bc, lambda_max, &BoxOptions::default())
}

pub fn elastic_box_spectrum_with(
    domain: &FlatDomain,
    params: &LameParameters,
    bc: BoundaryCondition,
    lambda_max: f64,
    options: &BoxOptions,
) -> Result<Spectrum> {
    let geo = elastic_geometry(domain, bc)?;
    check_lambda_max(lambda_max)?;
    let k2_bound = lambda_max / params.min_modulus();
    geo.check_budget(k2_bound, options.budget)?;
    let m0_max = geo.max_index(0, k2_bound);
    let chunks: Vec<Result<(Vec<ModeRow>, CertificationSummary)>> = (0..=m0_max)
        .into_par_iter()
        .map(|m0| {
            let mut rows = Vec::new();
            let mut summary = CertificationSummary::default();
            let mut err = None;
            geo.for_each_with_first(m0, k2_bound, |m, k2| {
                if err.is_some() {
                    return;
                }
                let res = fields_at(&geo, bc, params, m, k2, lambda_max, |field| {
                    if err.is_some() {
                        return;
                    }
                    match certify_with(&field, &geo, bc, params, options.tolerance) {
                        Ok(s) => {
                            summary.absorb(&s);
                            rows.push(ModeRow::new(field.eigenvalue, 1, field.family));
                        }
                        Err(e) => err = Some(e),
                    }
                });
                if let Err(e) = res {
                    err = Some(e);
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok((rows, summary)),
            }
        })
        .collect();
    let mut rows = Vec::new();
    let mut summary = CertificationSummary::default();
    for chunk in chunks {
        let (r, s) = chunk?;
        rows.extend(r);
        summary.absorb(&s);
    }
    log::debug!(
        "{bc} box spectrum: {} fields certified at {} points",
        summary.fields_checked,
        summary.sample_points
    );
    Ok(Spectrum::from_rows(rows, lambda_max, domain.clone(), bc, Some(*params))?.with_certification(summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> FlatDomain {
        FlatDomain::pi_cube(2).unwrap()
    }

    fn values(s: &Spectrum) -> Vec<(f64, u64)> {
        s.entries().iter().map(|e| (e.eigenvalue, e.multiplicity)).collect()
    }

    #[test]
    fn scalar_examples() {
        let s = scalar_box_spectrum(&square(), BoundaryCondition::ScalarDirichlet, 5.5, DEFAULT_MODE_BUDGET).unwrap();
        assert_eq!(values(&s), vec![(2.0, 1), (5.0, 2)]);
        let s = scalar_box_spectrum(&square(), BoundaryCondition::ScalarNeumann, 1.5, DEFAULT_MODE_BUDGET).unwrap();
        assert_eq!(values(&s), vec![(0.0, 1), (1.0, 2)]);
    }

    #[test]
    fn scalar_periodic_axis() {
        // [0, 2pi) periodic x [0, pi] Dirichlet: (m^2 + n^2), m in Z, n >= 1
        let d = FlatDomain::boxed(vec![2.0 * PI, PI], vec![true, false]).unwrap();
        let s = scalar_box_spectrum(&d, BoundaryCondition::ScalarDirichlet, 4.5, DEFAULT_MODE_BUDGET).unwrap();
        assert_eq!(values(&s), vec![(1.0, 1), (2.0, 2), (4.0, 1)]);
    }

    #[test]
    fn budget_is_enforced_before_enumeration() {
        let err = scalar_box_spectrum(&square(), BoundaryCondition::ScalarDirichlet, 1e8, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn direct_count_oracle() {
        let s = scalar_box_spectrum(&square(), BoundaryCondition::ScalarDirichlet, 1e4, DEFAULT_MODE_BUDGET).unwrap();
        let mut brute = 0u64;
        for m in 1..=100u64 {
            for n in 1..=100u64 {
                if m * m + n * n < 10_000 {
                    brute += 1;
                }
            }
        }
        assert_eq!(s.counting(1e4).unwrap(), brute);
    }

    #[test]
    fn mixed_examples() {
        let p = LameParameters::new(1.0, 1.0).unwrap();
        let df = elastic_box_spectrum(&square(), &p, BoundaryCondition::DirichletFree, 20.0).unwrap();
        assert_eq!(df.entries()[0].eigenvalue, 1.0);
        assert_eq!(df.counting(1.0).unwrap(), 0);
        assert_eq!(df.counting(1.0 + 1e-12).unwrap(), 2);
        let fd = elastic_box_spectrum(&square(), &p, BoundaryCondition::FreeDirichlet, 20.0).unwrap();
        assert_eq!(fd.entries()[0].eigenvalue, 2.0);
        assert!(df.certification().unwrap().fields_checked > 0);
    }

    #[test]
    fn two_dimensional_family_rules() {
        // DF = (lambda+2mu) ScalarDirichlet + mu ScalarNeumann\{0}, FD mirrored
        let p = LameParameters::new(2.0, 1.5).unwrap();
        let lmax = 400.0;
        let scalar = |bc, modulus: f64| {
            scalar_box_spectrum(&square(), bc, lmax / modulus, DEFAULT_MODE_BUDGET).unwrap()
        };
        let dir_p = scalar(BoundaryCondition::ScalarDirichlet, p.pressure_modulus());
        let neu_s = scalar(BoundaryCondition::ScalarNeumann, p.mu());
        let df = elastic_box_spectrum(&square(), &p, BoundaryCondition::DirichletFree, lmax).unwrap();
        for i in 0..=40 {
            let lambda = lmax * f64::from(i) / 40.0;
            let expected = dir_p.counting(lambda / p.pressure_modulus()).unwrap()
                + neu_s.counting(lambda / p.mu()).unwrap()
                - u64::from(lambda > 0.0);
            assert_eq!(df.counting(lambda).unwrap(), expected, "DF at {lambda}");
        }
        let neu_p = scalar(BoundaryCondition::ScalarNeumann, p.pressure_modulus());
        let dir_s = scalar(BoundaryCondition::ScalarDirichlet, p.mu());
        let fd = elastic_box_spectrum(&square(), &p, BoundaryCondition::FreeDirichlet, lmax).unwrap();
        for i in 0..=40 {
            let lambda = lmax * f64::from(i) / 40.0;
            let expected = neu_p.counting(lambda / p.pressure_modulus()).unwrap()
                - u64::from(lambda > 0.0)
                + dir_s.counting(lambda / p.mu()).unwrap();
            assert_eq!(fd.counting(lambda).unwrap(), expected, "FD at {lambda}");
        }
    }

    #[test]
    fn no_zero_modes_on_closed_box() {
        let p = LameParameters::new(1.0, 1.0).unwrap();
        for d in [2, 3] {
            let cube = FlatDomain::pi_cube(d).unwrap();
            for bc in [BoundaryCondition::DirichletFree, BoundaryCondition::FreeDirichlet] {
                let s = elastic_box_spectrum(&cube, &p, bc, 5.0).unwrap();
                assert!(s.entries()[0].eigenvalue > 0.0);
            }
        }
    }

    #[test]
    fn periodic_axes_carry_translations() {
        let p = LameParameters::new(1.0, 1.0).unwrap();
        let torus = FlatDomain::boxed(vec![PI, 2.0], vec![true, true]).unwrap();
        let s = elastic_box_spectrum(&torus, &p, BoundaryCondition::FreeDirichlet, 10.0).unwrap();
        assert_eq!(values(&s)[0], (0.0, 2));
        let cylinder = FlatDomain::boxed(vec![PI, 2.0], vec![false, true]).unwrap();
        let s = elastic_box_spectrum(&cylinder, &p, BoundaryCondition::DirichletFree, 10.0).unwrap();
        // constant field normal to the two boundary lines
        assert_eq!(values(&s)[0], (0.0, 1));
    }

    #[test]
    fn three_dimensional_shear_rule() {
        let p = LameParameters::new(1.0, 1.0).unwrap();
        let cube = FlatDomain::pi_cube(3).unwrap();
        let fields = box_eigenfields(&cube, &p, BoundaryCondition::DirichletFree, 50.0).unwrap();
        let shear_at = |m: [u32; 3]| {
            fields
                .iter()
                .filter(|f| f.family == Family::Shear && f.axes.iter().map(|a| a.index).eq(m))
                .count()
        };
        assert_eq!(shear_at([1, 1, 1]), 2);
        assert_eq!(shear_at([1, 2, 0]), 1);
        assert_eq!(shear_at([0, 0, 3]), 0);
    }

    #[test]
    fn unsupported_combinations() {
        let p = LameParameters::new(1.0, 1.0).unwrap();
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Free, BoundaryCondition::ScalarDirichlet] {
            assert!(matches!(elastic_box_spectrum(&square(), &p, bc, 10.0), Err(Error::Unsupported(_))));
        }
        let four = FlatDomain::pi_cube(4).unwrap();
        assert!(matches!(
            elastic_box_spectrum(&four, &p, BoundaryCondition::DirichletFree, 10.0),
            Err(Error::Unsupported(_))
        ));
        assert!(elastic_box_spectrum(&FlatDomain::unit_disk(), &p, BoundaryCondition::DirichletFree, 10.0).is_err());
    }

    #[test]
    fn exact_phases_match_trig() {
        let axis = AxisFactor {
            other: Trig::Sin,
            own: Trig::Cos,
            index: 7,
            wavenumber: 7.0,
            periodic: false,
        };
        for p in 0..SAMPLES_PER_AXIS {
            let x = position_coordinate(PI, p);
            let (s, c) = sin_cos_pi_16(phase_index(&axis, p));
            assert!((s - (7.0 * x).sin()).abs() < 1e-14);
            assert!((c - (7.0 * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn certification_catches_wrong_eigenvalue() {
        let p = LameParameters::new(1.0, 1.0).unwrap();
        let mut fields = box_eigenfields(&square(), &p, BoundaryCondition::DirichletFree, 10.0).unwrap();
        let mut f = fields.pop().unwrap();
        assert!(certify_field(&f, &square(), BoundaryCondition::DirichletFree, &p, 1e-9).is_ok());
        f.eigenvalue *= 1.01;
        let err = certify_field(&f, &square(), BoundaryCondition::DirichletFree, &p, 1e-9).unwrap_err();
        assert!(err.is_integrity());
        // a DF field does not satisfy FD
        let f = fields.pop().unwrap();
        assert!(certify_field(&f, &square(), BoundaryCondition::FreeDirichlet, &p, 1e-9).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn family_counts_add_up(lambda in -0.9f64..4.0, mu in 0.2f64..3.0, bc_df in any::<bool>(), frac in 0.0f64..1.0) {
            let p = LameParameters::new(lambda * mu, mu).unwrap();
            let bc = if bc_df { BoundaryCondition::DirichletFree } else { BoundaryCondition::FreeDirichlet };
            let s = elastic_box_spectrum(&square(), &p, bc, 300.0).unwrap();
            let t = 300.0 * frac;
            let total = s.counting(t).unwrap();
            let by_family = s.family_counting(Family::Pressure, t).unwrap() + s.family_counting(Family::Shear, t).unwrap();
            prop_assert_eq!(total, by_family);
        }

        #[test]
        fn sampled_fields_are_eigenfields_off_grid(x in 0.0f64..PI, y in 0.0f64..PI) {
            let p = LameParameters::new(0.5, 1.3).unwrap();
            for f in box_eigenfields(&square(), &p, BoundaryCondition::FreeDirichlet, 60.0).unwrap() {
                let sample = f.sample(&[x, y]).unwrap();
                let (r, scale) = pde_residual(&sample, f.eigenvalue, &p).unwrap();
                prop_assert!(r <= 1e-12 * scale.max(1.0));
            }
        }
    }
}
