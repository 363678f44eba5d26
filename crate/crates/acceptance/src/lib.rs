//! The eight acceptance criteria of elastospec.
//!
//! Each criterion returns an [`Outcome`] made of named checks. Expensive
//! spectra are built once per [`Suite`] and shared between criteria.

pub mod oracles;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{rngs::StdRng, Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use elastospec::asymptotics::{
    comparison_report, extrapolate_heat_boundary_term, fit_second_coefficient, remainder_profile,
    stieltjes_consistency,
};
use elastospec::boxes::{box_eigenfields, certify_field, elastic_box_spectrum};
use elastospec::disk::{disk_spectrum, DiskSpectrum};
use elastospec::lame::{BoundaryCondition, FlatDomain, LameParameters};
use elastospec::special::{arctan_integral, rayleigh_root, ArctanKind};
use elastospec::spectrum::{Family, Spectrum};
use elastospec::weyl::{
    counting_to_heat, heat_coefficients, leading_coefficient, second_coefficient, second_coefficient_sava,
    WeylCoefficients,
};

/// Checks that fail for documented reasons: the two-term expansions put the
/// disk first-term ratio outside the band, and the free integral coefficient
/// has no finite limit as alpha tends to one.
pub const KNOWN_DEVIATIONS: &[(u8, &str)] = &[
    (5, "free alpha->1 limit"),
    (6, "Dirichlet first-term ratio"),
    (6, "Free first-term ratio"),
];

pub const BOX_LAMBDA_MAX: f64 = 1e6;
pub const DISK_LAMBDA_MAX: f64 = 3000.0;
/// `(lambda, mu)` pairs of the box criteria.
pub const BOX_PARAMS: [(f64, f64); 3] = [(1.0, 1.0), (-1.0, 1.0), (2.0, 1.0)];
pub const MIXED: [BoundaryCondition; 2] = [BoundaryCondition::DirichletFree, BoundaryCondition::FreeDirichlet];
/// Counts `N(3000)` for `lambda = mu = 1` from an independent SciPy
/// implementation of the same dispersion relations.
pub const DISK_REFERENCE_COUNTS: [(BoundaryCondition, u64); 2] =
    [(BoundaryCondition::Dirichlet, 948), (BoundaryCondition::Free, 1057)];
/// First zeros of `J_1`.
pub const J1_ZEROS: [f64; 5] = [
    3.831_705_970_207_512,
    7.015_586_669_815_619,
    10.173_468_135_062_722,
    13.323_691_936_314_223,
    16.470_630_050_877_633,
];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Outcome {
    fn new(id: u8, title: &'static str) -> Self {
        Outcome {
            id,
            title,
            checks: Vec::new(),
            seconds: 0.0,
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn error(&mut self, name: impl Into<String>, err: impl fmt::Display) {
        self.check(name, false, format!("error: {err}"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Whether every failing check is listed in [`KNOWN_DEVIATIONS`].
    pub fn only_known_failures(&self) -> bool {
        self.failures()
            .all(|c| KNOWN_DEVIATIONS.iter().any(|(id, name)| *id == self.id && c.name == *name))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {} {status}: {} ({} checks, {:.1} s)",
            self.id,
            self.title,
            self.checks.len(),
            self.seconds
        )?;
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "\n    [{mark}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Shared spectra; each is built on first use.
#[derive(Default)]
pub struct Suite {
    boxes: [[OnceLock<(Spectrum, f64)>; 2]; 3],
    disks: [OnceLock<(DiskSpectrum, f64)>; 2],
}

fn params(lambda: f64, mu: f64) -> LameParameters {
    LameParameters::new(lambda, mu).expect("valid parameters")
}

fn square() -> FlatDomain {
    FlatDomain::pi_cube(2).expect("valid square")
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    /// Exact DF/FD spectrum of `[0, pi]^2` to `BOX_LAMBDA_MAX` and its build time.
    pub fn box_spectrum(&self, case: usize, bc_index: usize) -> &(Spectrum, f64) {
        self.boxes[case][bc_index].get_or_init(|| {
            let (l, m) = BOX_PARAMS[case];
            let start = Instant::now();
            let s = elastic_box_spectrum(&square(), &params(l, m), MIXED[bc_index], BOX_LAMBDA_MAX)
                .expect("box spectrum");
            (s, start.elapsed().as_secs_f64())
        })
    }

    pub fn disk_spectrum(&self, bc_index: usize) -> &(DiskSpectrum, f64) {
        self.disks[bc_index].get_or_init(|| {
            let start = Instant::now();
            let s = disk_spectrum(DISK_REFERENCE_COUNTS[bc_index].0, &params(1.0, 1.0), DISK_LAMBDA_MAX)
                .expect("disk spectrum");
            (s, start.elapsed().as_secs_f64())
        })
    }

    pub fn run(&self, id: u8) -> Outcome {
        let start = Instant::now();
        let mut outcome = match id {
            1 => self.criterion_1(),
            2 => self.criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => self.criterion_6(),
            7 => self.criterion_7(),
            8 => criterion_8(),
            _ => panic!("no criterion {id}"),
        };
        outcome.seconds = start.elapsed().as_secs_f64();
        outcome
    }

    pub fn run_all(&self) -> Vec<Outcome> {
        (1..=8).map(|id| self.run(id)).collect()
    }

    fn criterion_1(&self) -> Outcome {
        let mut out = Outcome::new(1, "mixed-BC second coefficient from box spectra");
        let domain = square();
        for (case, &(l, m)) in BOX_PARAMS.iter().enumerate() {
            let p = params(l, m);
            for (bi, &bc) in MIXED.iter().enumerate() {
                let label = format!("{bc} lambda={l} mu={m}");
                let (s, build) = self.box_spectrum(case, bi);
                let start = Instant::now();
                let a0 = leading_coefficient(2, &p);
                let a1 = match second_coefficient(bc, 2, &p) {
                    Ok(v) => v,
                    Err(e) => {
                        out.error(&label, e);
                        continue;
                    }
                };
                let est = match remainder_profile(s, a0, &domain, 64).and_then(|pr| fit_second_coefficient(&pr)) {
                    Ok(e) => e,
                    Err(e) => {
                        out.error(&label, e);
                        continue;
                    }
                };
                let elapsed = build + start.elapsed().as_secs_f64();
                let (ok, measure) = if a1.abs() < 1e-12 {
                    ((est.value - a1).abs() <= 2e-4, format!("|diff| {:.2e} (<= 2e-4)", (est.value - a1).abs()))
                } else {
                    let r = relative(est.value, a1);
                    (r <= 0.02, format!("rel {r:.2e} (<= 2e-2)"))
                };
                out.check(
                    format!("{label} fit"),
                    ok,
                    format!("estimate {:.6} +/- {:.6}, a1 {a1:.6}, {measure}", est.value, est.dispersion),
                );
                out.check(format!("{label} runtime"), elapsed < 60.0, format!("{elapsed:.1} s (< 60 s)"));
                // the spectrum itself against closed-form lattice counts
                let df = bc == BoundaryCondition::DirichletFree;
                let mismatches = (1..=200)
                    .into_par_iter()
                    .filter(|i| {
                        let lambda = BOX_LAMBDA_MAX * (*i as f64 / 200.0).powi(2) * (1.0 - 1e-9);
                        s.counting(lambda).ok() != Some(oracles::mixed_square_count(df, lambda, p.mu(), p.pressure_modulus()))
                    })
                    .count();
                out.check(
                    format!("{label} lattice oracle"),
                    mismatches == 0,
                    format!("{mismatches} of 200 counts differ from the lattice oracle"),
                );
            }
        }
        out
    }

    fn criterion_2(&self) -> Outcome {
        let mut out = Outcome::new(2, "heat-trace boundary coefficient from box spectra");
        let domain = square();
        let t_grid: Vec<f64> = (0..16).map(|i| 3e-5 * 10f64.powf(i as f64 / 15.0)).collect();
        let start = Instant::now();
        for (case, &(l, m)) in BOX_PARAMS.iter().enumerate() {
            let p = params(l, m);
            for (bi, &bc) in MIXED.iter().enumerate() {
                let label = format!("{bc} lambda={l} mu={m}");
                let (s, _) = self.box_spectrum(case, bi);
                let heat = match heat_coefficients(bc, 2, &p) {
                    Ok(h) => h,
                    Err(e) => {
                        out.error(&label, e);
                        continue;
                    }
                };
                let fit = match extrapolate_heat_boundary_term(s, heat.b0, leading_coefficient(2, &p), &t_grid) {
                    Ok(f) => f,
                    Err(e) => {
                        out.error(&label, e);
                        continue;
                    }
                };
                let target = heat.b1 * domain.boundary_measure();
                // magnitude of the two bracket terms
                let scale = 0.25
                    * (1.0 / (4.0 * std::f64::consts::PI * p.mu()).sqrt()
                        + 1.0 / (4.0 * std::f64::consts::PI * p.pressure_modulus()).sqrt())
                    * domain.boundary_measure();
                let err = (fit.intercept - target).abs();
                let (ok, measure) = if target.abs() < 1e-12 * scale {
                    (err <= 0.03 * scale, format!("|diff| {err:.2e} (<= {:.2e})", 0.03 * scale))
                } else {
                    let r = err / target.abs();
                    (r <= 0.03, format!("rel {r:.2e} (<= 3e-2)"))
                };
                out.check(
                    label,
                    ok,
                    format!("intercept {:.6}, b1 |dM| {target:.6}, {measure}", fit.intercept),
                );
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        out.check("runtime", elapsed < 120.0, format!("{elapsed:.1} s (< 120 s, spectra shared with criterion 1)"));
        out
    }

    fn criterion_6(&self) -> Outcome {
        let mut out = Outcome::new(6, "disk pipeline integrity");
        let start = Instant::now();
        let p = params(1.0, 1.0);
        let a0 = leading_coefficient(2, &p);
        for (bi, &(bc, reference)) in DISK_REFERENCE_COUNTS.iter().enumerate() {
            let (ds, _) = self.disk_spectrum(bi);
            let s = &ds.spectrum;
            let cert = s.certification().cloned().unwrap_or_default();
            out.check(
                format!("{bc} certified"),
                cert.fields_checked > 0 && cert.max_pde_residual <= 1e-8 && cert.max_bc_residual <= 1e-8,
                format!(
                    "{} fields, max PDE {:.2e}, max BC {:.2e} (<= 1e-8)",
                    cert.fields_checked, cert.max_pde_residual, cert.max_bc_residual
                ),
            );
            let rate = ds.rejection_rate();
            out.check(
                format!("{bc} rejection rate"),
                rate < 1e-3,
                format!("{} of {} candidates rejected", ds.rejected.len(), ds.candidates),
            );
            let n = s.counting(DISK_LAMBDA_MAX).unwrap_or(0);
            out.check(
                format!("{bc} reference count"),
                n == reference,
                format!("N(3000) = {n}, independent count {reference}"),
            );
            let ratio = n as f64 / (a0 * std::f64::consts::PI * DISK_LAMBDA_MAX);
            out.check(
                format!("{bc} first-term ratio"),
                (0.95..=1.05).contains(&ratio),
                format!("{bc}: N/(a0 pi 3000) = {ratio:.4} (band [0.95, 1.05])"),
            );
            match ds.audit(&p) {
                Ok(report) => out.check(
                    format!("{bc} audit recorded"),
                    true,
                    format!("verdict {:?}, deficit estimate {:.4}", report.verdict, report.deficit_estimate),
                ),
                Err(e) => out.error(format!("{bc} audit recorded"), e),
            }
            let candidates: Vec<WeylCoefficients> = WeylCoefficients::all_families(bc, 2, &p)
                .into_iter()
                .filter_map(|c| c.ok())
                .collect();
            let report = remainder_profile(s, a0, s.domain(), 64)
                .and_then(|pr| fit_second_coefficient(&pr))
                .and_then(|est| comparison_report(&est, &candidates, s.domain(), &p));
            match report {
                Ok(r) => out.check(
                    format!("{bc} comparison report"),
                    r.candidates.len() == 2 && r.candidates.iter().all(|c| c.distance.is_finite()),
                    format!(
                        "estimate {:.4}; {}",
                        r.estimate.value,
                        r.candidates
                            .iter()
                            .map(|c| format!("{} {:.4} (distance {:.4})", c.family, c.value, c.distance))
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                ),
                Err(e) => out.error(format!("{bc} comparison report"), e),
            }
            if bc == BoundaryCondition::Dirichlet {
                let torsional: Vec<f64> = J1_ZEROS.iter().map(|j| j * j).collect();
                let missing = torsional
                    .iter()
                    .filter(|&&t| !s.rows().iter().any(|r| r.angular_index == Some(0) && relative(r.eigenvalue, t) < 1e-9))
                    .count();
                out.check(
                    "Dirichlet torsional family",
                    missing == 0,
                    format!("{missing} of the first five squared J1 zeros missing"),
                );
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        out.check("runtime", elapsed < 600.0, format!("{elapsed:.1} s (< 600 s)"));
        out
    }

    fn criterion_7(&self) -> Outcome {
        let mut out = Outcome::new(7, "Stieltjes consistency on every produced spectrum");
        let mut spectra: Vec<(String, &Spectrum)> = Vec::new();
        for (case, &(l, m)) in BOX_PARAMS.iter().enumerate() {
            for (bi, &bc) in MIXED.iter().enumerate() {
                spectra.push((format!("box {bc} lambda={l} mu={m}"), &self.box_spectrum(case, bi).0));
            }
        }
        for (bi, &(bc, _)) in DISK_REFERENCE_COUNTS.iter().enumerate() {
            spectra.push((format!("disk {bc}"), &self.disk_spectrum(bi).0.spectrum));
        }
        for (label, s) in spectra {
            let top = s.lambda_max();
            let t_grid = [20.0 / top, 100.0 / top, 1e3 / top, 1e4 / top];
            match stieltjes_consistency(s, &t_grid) {
                Ok(gap) => out.check(label, gap <= 1e-10, format!("max relative gap {gap:.2e} (<= 1e-10)")),
                Err(e) => out.error(label, e),
            }
        }
        out
    }
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new(3, "Gamma conversion between counting and heat coefficients");
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..50 {
        let d = rng.gen_range(2..=4usize);
        let mu = rng.gen_range(0.1..10.0);
        let lambda = mu * rng.gen_range(-1.9..10.0);
        let p = params(lambda, mu);
        for bc in MIXED {
            let a0 = leading_coefficient(d, &p);
            let (b0, b1) = match second_coefficient(bc, d, &p) {
                Ok(a1) => counting_to_heat(a0, a1, d),
                Err(e) => {
                    out.error(format!("{bc} d={d}"), e);
                    continue;
                }
            };
            let heat = match heat_coefficients(bc, d, &p) {
                Ok(h) => h,
                Err(e) => {
                    out.error(format!("{bc} d={d}"), e);
                    continue;
                }
            };
            // b1 error relative to the size of its two terms
            let pi4 = 4.0 * std::f64::consts::PI;
            let terms = 0.25
                * ((d as f64 - 3.0).abs() / (pi4 * mu).powf(0.5 * (d as f64 - 1.0))
                    + 1.0 / (pi4 * p.pressure_modulus()).powf(0.5 * (d as f64 - 1.0)));
            let e0 = relative(b0, heat.b0);
            let e1 = (b1 - heat.b1).abs() / terms;
            let e = e0.max(e1);
            worst = worst.max(e);
            if e > 1e-12 {
                failures += 1;
            }
        }
    }
    out.check(
        "50-point grid",
        failures == 0,
        format!("{failures} of 100 evaluations off; worst relative error {worst:.2e} (<= 1e-12)"),
    );
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new(4, "Rayleigh cubic root");
    let mut bad = Vec::new();
    let mut worst_residual: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..200 {
        let alpha = 0.005 + 0.99 * i as f64 / 199.0;
        match rayleigh_root(alpha) {
            Ok(root) => {
                let changes = oracles::sign_changes(|w| oracles::rayleigh_cubic(alpha, w), 0.0, 1.0, 10_000);
                let reference = oracles::bisect(|w| oracles::rayleigh_cubic(alpha, w), 0.0, 1.0);
                worst_residual = worst_residual.max(root.residual);
                worst_gap = worst_gap.max((root.w1 - reference).abs());
                if changes != 1 || root.residual > 1e-12 || (root.w1 - reference).abs() > 1e-10 {
                    bad.push(alpha);
                }
            }
            Err(_) => bad.push(alpha),
        }
    }
    out.check(
        "200-point alpha grid",
        bad.is_empty(),
        format!(
            "{} failures; max residual {worst_residual:.2e} (<= 1e-12), max gap to bisection {worst_gap:.2e}",
            bad.len()
        ),
    );
    let reference = oracles::bisect(|w| oracles::rayleigh_cubic(1.0 / 3.0, w), 0.0, 1.0);
    match rayleigh_root(1.0 / 3.0) {
        Ok(root) => out.check(
            "alpha = 1/3",
            (root.w1 - reference).abs() <= 1e-4 && (root.w1 - 0.845_299).abs() <= 1e-4,
            format!("w1 = {:.8}, bisection {reference:.8}", root.w1),
        ),
        Err(e) => out.error("alpha = 1/3", e),
    }
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new(5, "integral-family coefficients");
    let cases: Vec<(bool, usize, f64)> = [false, true]
        .iter()
        .flat_map(|&free| {
            [2usize, 3]
                .into_iter()
                .flat_map(move |d| [0.1, 0.25, 0.5, 0.9].into_iter().map(move |a| (free, d, a)))
        })
        .collect();
    let results: Vec<(String, Result<(f64, f64), String>)> = cases
        .par_iter()
        .map(|&(free, d, alpha)| {
            // mu = 1, lambda chosen so that mu / (lambda + 2 mu) = alpha
            let lambda = 1.0 / alpha - 2.0;
            let bc = if free { BoundaryCondition::Free } else { BoundaryCondition::Dirichlet };
            let label = format!("{bc} d={d} alpha={alpha}");
            let value = second_coefficient_sava(bc, d, &params(lambda, 1.0)).map_err(|e| e.to_string());
            let oracle = oracles::integral_family_coefficient(free, d, lambda, 1.0, 1_000_000);
            (label, value.map(|v| (v, oracle)))
        })
        .collect();
    for (label, r) in results {
        match r {
            Ok((v, o)) => out.check(&label, (v - o).abs() <= 1e-8, format!("{v:.12} vs oracle {o:.12}")),
            Err(e) => out.error(&label, e),
        }
    }
    for d in [2usize, 3] {
        let at_one = second_coefficient_sava(BoundaryCondition::Dirichlet, d, &params(-1.0, 1.0));
        let near = second_coefficient_sava(BoundaryCondition::Dirichlet, d, &params(1.0 / (1.0 - 1e-10) - 2.0, 1.0));
        match (at_one, near) {
            (Ok(a), Ok(b)) => out.check(
                format!("Dirichlet d={d} alpha->1 limit"),
                (a - b).abs() <= 1e-6,
                format!("{b:.10} at 1 - 1e-10 vs {a:.10} at 1"),
            ),
            (Err(e), _) | (_, Err(e)) => out.error(format!("Dirichlet d={d} alpha->1 limit"), e),
        }
        let integral = arctan_integral(d as u32, 1.0 - 1e-10, ArctanKind::Free);
        match integral {
            Ok(v) => out.check(
                format!("free integral d={d} alpha->1"),
                v.abs() <= 1e-6,
                format!("integral {v:.2e} at alpha = 1 - 1e-10"),
            ),
            Err(e) => out.error(format!("free integral d={d} alpha->1"), e),
        }
    }
    let values: Vec<String> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|&delta| {
            let lambda = 1.0 / (1.0 - delta) - 2.0;
            match second_coefficient_sava(BoundaryCondition::Free, 2, &params(lambda, 1.0)) {
                Ok(v) => format!("{v:.4} at 1-{delta:e}"),
                Err(e) => format!("error at 1-{delta:e}: {e}"),
            }
        })
        .collect();
    out.check(
        "free alpha->1 limit",
        false,
        format!(
            "no finite limit: the Rayleigh root w1 tends to 0, so 4 gamma_R^(1-d) diverges ({})",
            values.join(", ")
        ),
    );
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new(8, "box eigenfield certification and 3-D shear multiplicities");
    let boxes = [
        (FlatDomain::pi_cube(2).expect("square"), 4000.0),
        (FlatDomain::boxed(vec![1.0, 2.5], vec![false, true]).expect("strip"), 2000.0),
        (FlatDomain::pi_cube(3).expect("cube"), 300.0),
        (FlatDomain::boxed(vec![1.0, 1.7, 2.3], vec![false, false, true]).expect("slab"), 600.0),
    ];
    for (domain, lambda_max) in &boxes {
        for &(l, m) in &BOX_PARAMS {
            let p = params(l, m);
            for bc in MIXED {
                let label = format!("{} {bc} lambda={l}", domain.describe());
                let fields = match box_eigenfields(domain, &p, bc, *lambda_max) {
                    Ok(f) => f,
                    Err(e) => {
                        out.error(&label, e);
                        continue;
                    }
                };
                let failed = fields
                    .par_iter()
                    .filter(|f| certify_field(f, domain, bc, &p, 1e-9).is_err())
                    .count();
                // finite-difference Navier operator on the lowest fields
                let fd_worst = fields
                    .iter()
                    .take(300)
                    .map(|f| finite_difference_residual(f, domain, &p))
                    .fold(0.0, f64::max);
                out.check(
                    &label,
                    failed == 0 && !fields.is_empty() && fd_worst <= 1e-5,
                    format!(
                        "{} fields, {failed} failed certification; finite-difference residual {fd_worst:.1e}",
                        fields.len()
                    ),
                );
            }
        }
    }
    let p = params(2.0, 1.5);
    let cube = FlatDomain::pi_cube(3).expect("cube");
    for bc in MIXED {
        let df = bc == BoundaryCondition::DirichletFree;
        let label = format!("null-space oracle {bc}");
        let fields = match box_eigenfields(&cube, &p, bc, p.pressure_modulus() * 50.5) {
            Ok(f) => f,
            Err(e) => {
                out.error(&label, e);
                continue;
            }
        };
        let mut counts: BTreeMap<([u32; 3], Family), usize> = BTreeMap::new();
        for f in &fields {
            let m = [f.axes[0].index, f.axes[1].index, f.axes[2].index];
            *counts.entry((m, f.family)).or_default() += 1;
        }
        let mut checked = 0;
        let mut mismatches = Vec::new();
        for a in 0..=7u32 {
            for b in 0..=7u32 {
                for c in 0..=7u32 {
                    let m = [a, b, c];
                    if a * a + b * b + c * c > 50 {
                        continue;
                    }
                    let alive = [0, 1, 2].map(|j| oracles::component_alive(df, m, j));
                    let k = m.map(f64::from);
                    let expected = oracles::shear_null_space(k, alive, p.lambda(), p.mu());
                    let got = counts.get(&(m, Family::Shear)).copied().unwrap_or(0);
                    checked += 1;
                    if got != expected {
                        mismatches.push(format!("{m:?}: {got} vs {expected}"));
                    }
                }
            }
        }
        out.check(
            label,
            mismatches.is_empty(),
            format!("{checked} lattice points with |m|^2 <= 50; mismatches: {mismatches:?}"),
        );
    }
    out
}

/// Relative residual `|L u - Lambda u| / (Lambda max|u|)` at a few interior
/// points, with `L u` from fourth-order central differences of values only.
fn finite_difference_residual(
    field: &elastospec::boxes::SeparatedField,
    domain: &FlatDomain,
    p: &LameParameters,
) -> f64 {
    let d = field.dim();
    let lengths: Vec<f64> = match domain.shape() {
        elastospec::lame::Shape::Box { lengths, .. } => lengths.clone(),
        _ => return f64::INFINITY,
    };
    let h = 2e-3;
    let value = |x: &[f64]| field.sample(x).expect("sample").value;
    let mut worst: f64 = 0.0;
    for s in 0..4 {
        let x: Vec<f64> = lengths.iter().enumerate().map(|(i, l)| l * (0.21 + 0.17 * s as f64 + 0.05 * i as f64)).collect();
        let shifted = |offsets: &[(usize, f64)]| {
            let mut y = x.clone();
            for &(i, o) in offsets {
                y[i] += o;
            }
            value(&y)
        };
        // second-order stencils, Richardson extrapolated to fourth order
        let stencil = |i: usize, j: usize, c: usize, h: f64| {
            if i == j {
                (shifted(&[(i, h)])[c] - 2.0 * shifted(&[])[c] + shifted(&[(i, -h)])[c]) / (h * h)
            } else {
                (shifted(&[(i, h), (j, h)])[c] - shifted(&[(i, h), (j, -h)])[c] - shifted(&[(i, -h), (j, h)])[c]
                    + shifted(&[(i, -h), (j, -h)])[c])
                    / (4.0 * h * h)
            }
        };
        let second = |i: usize, j: usize, c: usize| (4.0 * stencil(i, j, c, 0.5 * h) - stencil(i, j, c, h)) / 3.0;
        let u = value(&x);
        let umax = field.polarization.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for c in 0..d {
            let laplace: f64 = (0..d).map(|i| second(i, i, c)).sum();
            let grad_div: f64 = (0..d).map(|i| second(i, c, i)).sum();
            let lu = -(p.mu() * laplace + (p.lambda() + p.mu()) * grad_div);
            worst = worst.max((lu - field.eigenvalue * u[c]).abs() / (field.eigenvalue * umax).max(1e-300));
        }
    }
    worst
}
