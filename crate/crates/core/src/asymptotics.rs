//! Remainder profiles, second-coefficient fits, heat traces and comparison
//! reports built from certified spectra.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lame::{BoundaryCondition, FlatDomain, LameParameters};
use crate::special::upper_incomplete_gamma;
use crate::spectrum::{Spectrum, FORMAT_VERSION};
use crate::weyl::{CoefficientFamily, WeylCoefficients};

/// Smallest accepted profile grid.
pub const MIN_GRID_SIZE: usize = 16;
/// Sub-samples in each Cesàro window `[L/2, L]`.
pub const CESARO_POINTS: usize = 64;
/// Profiles span `[lambda_max / PROFILE_SPAN, lambda_max]`.
pub const PROFILE_SPAN: f64 = 100.0;
/// Relative offset that moves grid points off exact eigenvalues.
pub const GRID_OFFSET: f64 = 1e-12;
/// Smallest `t * lambda_max` for which the heat-trace tail bound is trusted.
pub const MIN_TAIL_PRODUCT: f64 = 20.0;
/// Inflation applied to the first-term tail bound.
pub const TAIL_MARGIN: f64 = 0.1;
/// Relative dispersion below which an estimate counts as converged.
pub const CONVERGED_RELATIVE: f64 = 0.05;
/// Absolute dispersion below which an estimate counts as converged.
pub const CONVERGED_ABSOLUTE: f64 = 1e-4;

const CAVEAT: &str = "estimate is a Cesaro-averaged trailing-window mean; a pointwise two-term \
remainder is not claimed, and the box billiard is completely periodic";

/// Normalized counting remainder on a log grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderProfile {
    pub grid: Vec<f64>,
    pub raw: Vec<f64>,
    pub averaged: Vec<f64>,
    pub a0: f64,
    pub lambda_max: f64,
    pub domain: FlatDomain,
    pub bc: BoundaryCondition,
    pub params: Option<LameParameters>,
}

impl RemainderProfile {
    /// Plot data with columns `Lambda,R_raw,R_averaged` after two `#` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let config = serde_json::json!({
            "domain": self.domain,
            "bc": self.bc,
            "params": self.params,
            "lambda_max": self.lambda_max,
            "a0": self.a0,
        });
        writeln!(out, "# elastospec format_version={FORMAT_VERSION}")?;
        writeln!(out, "# config={config}")?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["Lambda", "R_raw", "R_averaged"]).map_err(csv_err)?;
        for i in 0..self.grid.len() {
            w.write_record([
                format!("{:.16e}", self.grid[i]),
                format!("{:.16e}", self.raw[i]),
                format!("{:.16e}", self.averaged[i]),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trailing-window estimate of the second coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientEstimate {
    pub value: f64,
    /// Half of the max-min spread of averaged values in the window.
    pub dispersion: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub converged: bool,
}

fn remainder_at(spectrum: &Spectrum, a0: f64, vol: f64, area: f64, half_d: f64, lambda: f64) -> Result<f64> {
    let at = (lambda * (1.0 + GRID_OFFSET)).min(spectrum.lambda_max());
    let n = spectrum.counting(at)? as f64;
    Ok((n - a0 * vol * lambda.powf(half_d)) / (area * lambda.powf(half_d - 0.5)))
}

/// Raw and Cesàro-averaged remainder
/// `R(L) = (N(L) - a0 |M| L^(d/2)) / (|dM| L^((d-1)/2))`
/// on a log grid over `[lambda_max/100, lambda_max]`.
pub fn remainder_profile(
    spectrum: &Spectrum,
    a0: f64,
    domain: &FlatDomain,
    grid_size: usize,
) -> Result<RemainderProfile> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::ContractViolation(format!(
            "profile grid needs at least {MIN_GRID_SIZE} points, got {grid_size}"
        )));
    }
    if domain != spectrum.domain() {
        return Err(Error::DomainMismatch(format!(
            "profile requested on {} for a spectrum of {}",
            domain.describe(),
            spectrum.domain().describe()
        )));
    }
    let hi = spectrum.lambda_max();
    if !(hi > 0.0 && hi.is_finite()) {
        return Err(Error::InsufficientRange(format!("lambda_max = {hi}")));
    }
    let lo = hi / PROFILE_SPAN;
    let vol = domain.volume();
    let area = domain.boundary_measure();
    let half_d = domain.dimension() as f64 / 2.0;
    let ratio = (hi / lo).ln() / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| if i + 1 == grid_size { hi } else { lo * (ratio * i as f64).exp() })
        .collect();
    let values: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&lambda| {
            let raw = remainder_at(spectrum, a0, vol, area, half_d, lambda)?;
            let mut sum = 0.0;
            for j in 0..CESARO_POINTS {
                let s = 0.5 * lambda * (1.0 + (j as f64 + 0.5) / CESARO_POINTS as f64);
                sum += remainder_at(spectrum, a0, vol, area, half_d, s)?;
            }
            Ok((raw, sum / CESARO_POINTS as f64))
        })
        .collect::<Result<_>>()?;
    Ok(RemainderProfile {
        grid,
        raw: values.iter().map(|v| v.0).collect(),
        averaged: values.iter().map(|v| v.1).collect(),
        a0,
        lambda_max: hi,
        domain: domain.clone(),
        bc: spectrum.bc(),
        params: spectrum.params().copied(),
    })
}

/// Mean and half-spread of the averaged profile over the trailing
/// quarter decade `[L_max / 10^(1/4), L_max]`.
///
/// ```
/// use elastospec::asymptotics::fit_second_coefficient;
/// # use elastospec::asymptotics::RemainderProfile;
/// # use elastospec::lame::{BoundaryCondition, FlatDomain};
/// # let grid: Vec<f64> = (0..20).map(|i| 10f64.powf(i as f64 / 9.5)).collect();
/// # let profile = RemainderProfile {
/// #     raw: vec![0.25; 20], averaged: vec![0.25; 20], lambda_max: 100.0, a0: 1.0,
/// #     grid, domain: FlatDomain::pi_cube(2).unwrap(),
/// #     bc: BoundaryCondition::FreeDirichlet, params: None,
/// # };
/// let estimate = fit_second_coefficient(&profile).unwrap();
/// assert_eq!(estimate.value, 0.25);
/// assert_eq!(estimate.dispersion, 0.0);
/// assert!(estimate.converged);
/// ```
pub fn fit_second_coefficient(profile: &RemainderProfile) -> Result<CoefficientEstimate> {
    let (Some(&first), Some(&last)) = (profile.grid.first(), profile.grid.last()) else {
        return Err(Error::InsufficientRange("empty profile".into()));
    };
    if last < 10.0 * first * (1.0 - 1e-12) {
        return Err(Error::InsufficientRange(format!(
            "profile spans [{first}, {last}], less than one decade"
        )));
    }
    let cut = last / 10f64.powf(0.25);
    let window: Vec<(f64, f64)> = profile
        .grid
        .iter()
        .zip(&profile.averaged)
        .filter(|(l, _)| **l >= cut)
        .map(|(l, r)| (*l, *r))
        .collect();
    let n = window.len() as f64;
    let value = window.iter().map(|w| w.1).sum::<f64>() / n;
    let (min, max) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), w| (a.min(w.1), b.max(w.1)));
    let dispersion = 0.5 * (max - min);
    Ok(CoefficientEstimate {
        value,
        dispersion,
        window: (window[0].0, last),
        samples: window.len(),
        converged: dispersion <= CONVERGED_RELATIVE * value.abs() || dispersion <= CONVERGED_ABSOLUTE,
    })
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Truncated heat trace and a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatTrace {
    pub t: f64,
    pub value: f64,
    pub tail_bound: f64,
}

fn check_tail(spectrum: &Spectrum, t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("heat trace needs t > 0, got {t}")));
    }
    let product = t * spectrum.lambda_max();
    if product < MIN_TAIL_PRODUCT {
        return Err(Error::TailDominated { t, product });
    }
    Ok(())
}

/// `Z(t) = sum m_k exp(-t L_k)` over the certified entries, with the tail
/// bound `1.1 a0 |M| Gamma(1 + d/2, t L_max) / t^(d/2)`.
///
/// ```
/// use elastospec::asymptotics::heat_trace;
/// use elastospec::lame::{BoundaryCondition, FlatDomain};
/// use elastospec::spectrum::{Family, ModeRow, Spectrum};
///
/// let disk = FlatDomain::unit_disk();
/// let rows = vec![ModeRow::new(1.0, 2, Family::Coupled)];
/// let s = Spectrum::from_rows(rows, 40.0, disk, BoundaryCondition::Dirichlet, None).unwrap();
/// let z = heat_trace(&s, 1.0, 0.0, 1.0).unwrap();
/// assert!((z.value - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
/// ```
pub fn heat_trace(spectrum: &Spectrum, t: f64, a0_for_tail: f64, vol: f64) -> Result<HeatTrace> {
    check_tail(spectrum, t)?;
    let mut sum = Compensated::default();
    for e in spectrum.entries().iter().rev() {
        sum.add(e.multiplicity as f64 * (-t * e.eigenvalue).exp());
    }
    let half_d = spectrum.domain().dimension() as f64 / 2.0;
    let tail = upper_incomplete_gamma(1.0 + half_d, t * spectrum.lambda_max());
    Ok(HeatTrace {
        t,
        value: sum.total(),
        tail_bound: (1.0 + TAIL_MARGIN) * a0_for_tail * vol * tail / t.powf(half_d),
    })
}

/// Intercept and slope of `[Z(t) - b0 |M| / t] sqrt(t)` fitted linearly in
/// `sqrt(t)`; the intercept estimates `b1 |dM|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatExtrapolation {
    pub intercept: f64,
    pub slope: f64,
    pub samples: Vec<(f64, f64)>,
}

pub fn extrapolate_heat_boundary_term(
    spectrum: &Spectrum,
    b0: f64,
    a0_for_tail: f64,
    t_grid: &[f64],
) -> Result<HeatExtrapolation> {
    if t_grid.len() < 2 {
        return Err(Error::InsufficientRange("need at least two t values".into()));
    }
    let vol = spectrum.domain().volume();
    let samples: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let z = heat_trace(spectrum, t, a0_for_tail, vol)?;
            Ok((t, (z.value - b0 * vol / t) * t.sqrt()))
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0.sqrt()).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let (sxy, sxx) = samples.iter().fold((0.0, 0.0), |(a, b), s| {
        let dx = s.0.sqrt() - mx;
        (a + dx * (s.1 - my), b + dx * dx)
    });
    let slope = sxy / sxx;
    Ok(HeatExtrapolation {
        intercept: my - slope * mx,
        slope,
        samples,
    })
}

/// Largest relative gap between direct summation of `Z(t)` and the
/// Stieltjes form `N(L_max) e^(-t L_max) + t * integral N(L) e^(-t L) dL`
/// integrated exactly over the staircase.
pub fn stieltjes_consistency(spectrum: &Spectrum, t_grid: &[f64]) -> Result<f64> {
    let entries = spectrum.entries();
    let top = spectrum.lambda_max();
    t_grid
        .par_iter()
        .map(|&t| {
            check_tail(spectrum, t)?;
            let direct = heat_trace(spectrum, t, 0.0, 0.0)?.value;
            let mut integral = Compensated::default();
            let mut count = 0.0;
            let mut steps = Vec::with_capacity(entries.len());
            for (i, e) in entries.iter().enumerate() {
                count += e.multiplicity as f64;
                let next = entries.get(i + 1).map_or(top, |n| n.eigenvalue);
                // exp(-t a) - exp(-t b) without cancellation
                steps.push(count * (-t * e.eigenvalue).exp() * -(-t * (next - e.eigenvalue)).exp_m1());
            }
            for s in steps.iter().rev() {
                integral.add(*s);
            }
            integral.add(count * (-t * top).exp());
            let stieltjes = integral.total();
            let scale = direct.abs().max(stieltjes.abs());
            Ok(if scale == 0.0 { 0.0 } else { (direct - stieltjes).abs() / scale })
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportParams {
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateRow {
    pub family: CoefficientFamily,
    pub value: f64,
    pub distance: f64,
    /// `distance / dispersion`; `None` when the dispersion is zero and the
    /// distance is not.
    pub normalized_distance: Option<f64>,
}

/// Empirical second coefficient against the predicted families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub format_version: u32,
    pub geometry: String,
    pub params: ReportParams,
    pub bc: BoundaryCondition,
    pub dimension: usize,
    pub estimate: CoefficientEstimate,
    pub candidates: Vec<CandidateRow>,
    pub closest: CoefficientFamily,
    pub caveat: &'static str,
}

impl ComparisonReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn row(&self, family: CoefficientFamily) -> Option<&CandidateRow> {
        self.candidates.iter().find(|c| c.family == family)
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} bc={} lambda={} mu={}",
            self.geometry, self.bc, self.params.lambda, self.params.mu
        )?;
        writeln!(
            f,
            "estimate {:.6} +/- {:.6} on [{:.6e}, {:.6e}] ({} samples{})",
            self.estimate.value,
            self.estimate.dispersion,
            self.estimate.window.0,
            self.estimate.window.1,
            self.estimate.samples,
            if self.estimate.converged { ", converged" } else { ", not converged" }
        )?;
        writeln!(f, "{:<14} {:>12} {:>12} {:>12}", "family", "a1", "distance", "normalized")?;
        for c in &self.candidates {
            let normalized = c
                .normalized_distance
                .map_or_else(|| "inf".to_string(), |v| format!("{v:.6}"));
            let marker = if c.family == self.closest { " *" } else { "" };
            writeln!(
                f,
                "{:<14} {:>12.6} {:>12.6} {:>12}{marker}",
                c.family.to_string(),
                c.value,
                c.distance,
                normalized
            )?;
        }
        write!(f, "note: {}", self.caveat)
    }
}

/// Tabulates the distance from `estimate` to each candidate coefficient.
///
/// All candidates must share one boundary condition and dimension.
pub fn comparison_report(
    estimate: &CoefficientEstimate,
    candidates: &[WeylCoefficients],
    domain: &FlatDomain,
    params: &LameParameters,
) -> Result<ComparisonReport> {
    let Some(first) = candidates.first() else {
        return Err(Error::ContractViolation("no candidate coefficients".into()));
    };
    if candidates.iter().any(|c| c.bc != first.bc || c.d != first.d) {
        return Err(Error::ContractViolation(
            "candidates mix boundary conditions or dimensions".into(),
        ));
    }
    if first.d != domain.dimension() {
        return Err(Error::DomainMismatch(format!(
            "candidates are for d = {}, geometry {} has d = {}",
            first.d,
            domain.describe(),
            domain.dimension()
        )));
    }
    let rows: Vec<CandidateRow> = candidates
        .iter()
        .map(|c| {
            let distance = (estimate.value - c.a1).abs();
            let normalized_distance = if estimate.dispersion > 0.0 {
                Some(distance / estimate.dispersion)
            } else if distance == 0.0 {
                Some(0.0)
            } else {
                None
            };
            CandidateRow {
                family: c.family,
                value: c.a1,
                distance,
                normalized_distance,
            }
        })
        .collect();
    let closest = rows
        .iter()
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
        .map(|r| r.family)
        .expect("non-empty");
    Ok(ComparisonReport {
        format_version: FORMAT_VERSION,
        geometry: domain.describe(),
        params: ReportParams {
            lambda: params.lambda(),
            mu: params.mu(),
        },
        bc: first.bc,
        dimension: first.d,
        estimate: *estimate,
        candidates: rows,
        closest,
        caveat: CAVEAT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{elastic_box_spectrum, scalar_box_spectrum, DEFAULT_MODE_BUDGET};
    use crate::spectrum::{Family, ModeRow};
    use crate::weyl::{leading_coefficient, second_coefficient};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn square() -> FlatDomain {
        FlatDomain::pi_cube(2).unwrap()
    }

    fn p(lambda: f64, mu: f64) -> LameParameters {
        LameParameters::new(lambda, mu).unwrap()
    }

    fn synthetic(a0: f64, domain: &FlatDomain, lambda_max: f64) -> Spectrum {
        let scale = a0 * domain.volume();
        let d = domain.dimension() as f64;
        let rows = (1..)
            .map(|k| (k as f64 / scale).powf(2.0 / d))
            .take_while(|&l| l <= lambda_max)
            .map(|l| ModeRow::new(l, 1, Family::Shear))
            .collect();
        Spectrum::from_rows(rows, lambda_max, domain.clone(), BoundaryCondition::FreeDirichlet, None).unwrap()
    }

    #[test]
    fn synthetic_staircase_has_no_remainder() {
        let domain = square();
        let a0 = 0.3;
        let s = synthetic(a0, &domain, 1e4);
        let profile = remainder_profile(&s, a0, &domain, 32).unwrap();
        for (l, r) in profile.grid.iter().zip(&profile.raw) {
            let quantum = 1.0 / (domain.boundary_measure() * l.sqrt());
            assert!(r.abs() <= quantum * (1.0 + 1e-9), "R({l}) = {r}");
        }
        assert_eq!(profile.grid.len(), 32);
        assert_relative_eq!(profile.grid[0], 100.0, max_relative = 1e-12);
        assert_eq!(*profile.grid.last().unwrap(), 1e4);
    }

    #[test]
    fn raw_profile_reconstructs_counts() {
        let domain = square();
        let s = scalar_box_spectrum(&domain, BoundaryCondition::ScalarDirichlet, 2e4, DEFAULT_MODE_BUDGET).unwrap();
        let a0 = 1.0 / (4.0 * PI);
        let profile = remainder_profile(&s, a0, &domain, 40).unwrap();
        for (l, r) in profile.grid.iter().zip(&profile.raw) {
            let rebuilt = a0 * domain.volume() * l + r * domain.boundary_measure() * l.sqrt();
            let at = (l * (1.0 + GRID_OFFSET)).min(2e4);
            assert!((rebuilt - s.counting(at).unwrap() as f64).abs() < 1e-6);
            assert!(profile.averaged.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn scalar_dirichlet_square_tends_to_boundary_term() {
        // Dirichlet Laplacian on a square: N ~ A L / 4pi - P sqrt(L) / 4pi
        let domain = square();
        let s = scalar_box_spectrum(&domain, BoundaryCondition::ScalarDirichlet, 1e6, DEFAULT_MODE_BUDGET).unwrap();
        let profile = remainder_profile(&s, 1.0 / (4.0 * PI), &domain, 64).unwrap();
        let last = *profile.averaged.last().unwrap();
        assert_relative_eq!(last, -1.0 / (4.0 * PI), max_relative = 0.03);
    }

    #[test]
    fn profile_checks_inputs() {
        let domain = square();
        let s = synthetic(0.3, &domain, 100.0);
        assert!(matches!(remainder_profile(&s, 0.3, &domain, 8), Err(Error::ContractViolation(_))));
        let other = FlatDomain::boxed(vec![1.0, 2.0], vec![false, false]).unwrap();
        assert!(matches!(remainder_profile(&s, 0.3, &other, 16), Err(Error::DomainMismatch(_))));
    }

    fn constant_profile(values: Vec<f64>, lo: f64, hi: f64) -> RemainderProfile {
        let n = values.len();
        let grid = (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect();
        RemainderProfile {
            grid,
            raw: values.clone(),
            averaged: values,
            a0: 1.0,
            lambda_max: hi,
            domain: square(),
            bc: BoundaryCondition::FreeDirichlet,
            params: None,
        }
    }

    #[test]
    fn fit_uses_trailing_quarter_decade() {
        let mut values = vec![5.0; 40];
        let n = values.len();
        values[n - 1] = 1.1;
        values[n - 2] = 0.9;
        let profile = constant_profile(values, 1.0, 100.0);
        let est = fit_second_coefficient(&profile).unwrap();
        assert!(est.window.0 >= 100.0 / 10f64.powf(0.25));
        assert!(est.window.0 >= est.window.1 / 4.0);
        assert_eq!(est.window.1, 100.0);
        assert_eq!(est.dispersion, 2.05);
        assert!(!est.converged);
    }

    #[test]
    fn fit_needs_a_decade() {
        let profile = constant_profile(vec![1.0; 20], 10.0, 50.0);
        assert!(matches!(fit_second_coefficient(&profile), Err(Error::InsufficientRange(_))));
    }

    #[test]
    fn near_zero_estimate_converges_absolutely() {
        let values = (0..30).map(|i| if i % 2 == 0 { 5e-5 } else { -5e-5 }).collect();
        let est = fit_second_coefficient(&constant_profile(values, 1.0, 100.0)).unwrap();
        assert!(est.converged);
    }

    #[test]
    fn fit_ignores_entries_above_grid() {
        let domain = square();
        let s = scalar_box_spectrum(&domain, BoundaryCondition::ScalarNeumann, 5e3, DEFAULT_MODE_BUDGET).unwrap();
        let mut rows = s.rows().to_vec();
        let a = fit_second_coefficient(&remainder_profile(&s, 0.1, &domain, 32).unwrap()).unwrap();
        rows.push(ModeRow::new(5e3, 7, Family::Scalar));
        let extended = Spectrum::from_rows(rows, 5e3, domain.clone(), s.bc(), None).unwrap();
        let b = fit_second_coefficient(&remainder_profile(&extended, 0.1, &domain, 32).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn heat_trace_of_empty_spectrum_is_tail() {
        let s = Spectrum::from_rows(vec![], 100.0, square(), BoundaryCondition::FreeDirichlet, None).unwrap();
        let z = heat_trace(&s, 1.0, 0.2, PI * PI).unwrap();
        assert_eq!(z.value, 0.0);
        let expected = 1.1 * 0.2 * PI * PI * upper_incomplete_gamma(2.0, 100.0);
        assert_relative_eq!(z.tail_bound, expected, max_relative = 1e-14);
    }

    #[test]
    fn heat_trace_refuses_tail_dominated_times() {
        let s = synthetic(0.3, &square(), 100.0);
        assert!(matches!(heat_trace(&s, 0.1, 0.3, PI * PI), Err(Error::TailDominated { .. })));
        assert!(heat_trace(&s, 0.2, 0.3, PI * PI).is_ok());
    }

    #[test]
    fn truncated_trace_brackets_full_trace() {
        let domain = square();
        let params = p(1.0, 1.0);
        let a0 = leading_coefficient(2, &params);
        let full = elastic_box_spectrum(&domain, &params, BoundaryCondition::DirichletFree, 2000.0).unwrap();
        let half = elastic_box_spectrum(&domain, &params, BoundaryCondition::DirichletFree, 1000.0).unwrap();
        for t in [0.02, 0.05, 0.1] {
            let z = heat_trace(&full, t, a0, domain.volume()).unwrap();
            let h = heat_trace(&half, t, a0, domain.volume()).unwrap();
            assert!(h.value <= z.value);
            assert!(z.value <= h.value + h.tail_bound, "t = {t}");
        }
    }

    #[test]
    fn heat_extrapolation_recovers_line() {
        let domain = square();
        let params = p(1.0, 1.0);
        let a0 = leading_coefficient(2, &params);
        let heat = crate::weyl::heat_coefficients(BoundaryCondition::DirichletFree, 2, &params).unwrap();
        let s = elastic_box_spectrum(&domain, &params, BoundaryCondition::DirichletFree, 2e4).unwrap();
        let t_grid: Vec<f64> = (0..8).map(|i| 2e-3 * 1.3f64.powi(i)).collect();
        let fit = extrapolate_heat_boundary_term(&s, heat.b0, a0, &t_grid).unwrap();
        let expected = heat.b1 * domain.boundary_measure();
        assert_relative_eq!(fit.intercept, expected, max_relative = 0.05);
    }

    #[test]
    fn stieltjes_single_entry() {
        let rows = vec![ModeRow::new(1.0, 2, Family::Shear)];
        let s = Spectrum::from_rows(rows, 40.0, square(), BoundaryCondition::FreeDirichlet, None).unwrap();
        assert!(stieltjes_consistency(&s, &[1.0, 2.0]).unwrap() <= 1e-15);
    }

    #[test]
    fn stieltjes_box_spectrum() {
        let s = elastic_box_spectrum(&square(), &p(1.0, 1.0), BoundaryCondition::DirichletFree, 1e5).unwrap();
        assert!(stieltjes_consistency(&s, &[1e-3, 1e-2]).unwrap() <= 1e-10);
    }

    #[test]
    fn report_single_candidate() {
        let params = p(1.0, 1.0);
        let c = WeylCoefficients::evaluate(BoundaryCondition::DirichletFree, CoefficientFamily::NonIntegral, 2, &params).unwrap();
        let est = CoefficientEstimate {
            value: c.a1,
            dispersion: 0.0,
            window: (1.0, 2.0),
            samples: 3,
            converged: true,
        };
        let report = comparison_report(&est, &[c], &square(), &params).unwrap();
        assert_eq!(report.closest, CoefficientFamily::NonIntegral);
        assert_eq!(report.candidates[0].distance, 0.0);
        assert_eq!(report.candidates[0].normalized_distance, Some(0.0));
        let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        for key in ["geometry", "params", "bc", "estimate", "candidates", "closest", "caveat"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(report.to_string().contains("NonIntegral"));
    }

    #[test]
    fn report_rejects_mixed_candidates() {
        let params = p(1.0, 1.0);
        let a = WeylCoefficients::evaluate(BoundaryCondition::DirichletFree, CoefficientFamily::NonIntegral, 2, &params).unwrap();
        let b = WeylCoefficients::evaluate(BoundaryCondition::FreeDirichlet, CoefficientFamily::NonIntegral, 2, &params).unwrap();
        let est = CoefficientEstimate {
            value: 0.0,
            dispersion: 1.0,
            window: (1.0, 2.0),
            samples: 3,
            converged: true,
        };
        assert!(matches!(comparison_report(&est, &[a, b], &square(), &params), Err(Error::ContractViolation(_))));
        assert!(matches!(comparison_report(&est, &[], &square(), &params), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn report_lists_both_disk_families() {
        let params = p(1.0, 1.0);
        let all: Vec<_> = WeylCoefficients::all_families(BoundaryCondition::Dirichlet, 2, &params)
            .into_iter()
            .map(|c| c.unwrap())
            .collect();
        let est = CoefficientEstimate {
            value: -0.1,
            dispersion: 0.01,
            window: (1.0, 2.0),
            samples: 3,
            converged: true,
        };
        let report = comparison_report(&est, &all, &FlatDomain::unit_disk(), &params).unwrap();
        assert_eq!(report.candidates.len(), 2);
        assert!(report.candidates.iter().all(|c| c.normalized_distance.unwrap().is_finite()));
        let expected = second_coefficient(BoundaryCondition::Dirichlet, 2, &params).unwrap();
        assert_eq!(report.row(CoefficientFamily::NonIntegral).unwrap().value, expected);
    }

    #[test]
    fn plot_csv_header() {
        let domain = square();
        let s = synthetic(0.3, &domain, 1e3);
        let profile = remainder_profile(&s, 0.3, &domain, 16).unwrap();
        let mut buf = Vec::new();
        profile.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].contains("format_version=1"));
        assert!(lines[1].starts_with("# config="));
        assert_eq!(lines[2], "Lambda,R_raw,R_averaged");
        assert_eq!(lines.len(), 3 + 16);
    }

    proptest! {
        #[test]
        fn heat_trace_strictly_decreasing(
            values in proptest::collection::vec(0.1f64..50.0, 1..40),
            t in 0.5f64..2.0,
        ) {
            let rows = values.iter().map(|&v| ModeRow::new(v, 1, Family::Shear)).collect();
            let s = Spectrum::from_rows(rows, 50.0, square(), BoundaryCondition::FreeDirichlet, None).unwrap();
            let a = heat_trace(&s, t, 0.0, 1.0).unwrap().value;
            let b = heat_trace(&s, t * 1.01, 0.0, 1.0).unwrap().value;
            prop_assert!(b < a);
        }

        #[test]
        fn stieltjes_identity(
            values in proptest::collection::vec(0.0f64..50.0, 1..60),
            t in 0.4f64..3.0,
        ) {
            let rows = values.iter().map(|&v| ModeRow::new(v, 2, Family::Coupled)).collect();
            let s = Spectrum::from_rows(rows, 50.0, square(), BoundaryCondition::FreeDirichlet, None).unwrap();
            prop_assert!(stieltjes_consistency(&s, &[t]).unwrap() <= 1e-12);
        }
    }
}
