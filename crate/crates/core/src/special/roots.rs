//! Sign-change root bracketing with bisection refinement.

use serde::Serialize;

use crate::error::{Error, Result};

/// Roots of a real function found on an interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootList {
    /// Identifies the scanned function.
    pub label: String,
    pub interval: (f64, f64),
    /// Strictly increasing.
    pub roots: Vec<f64>,
    /// Largest `|f(r)|` over the returned roots.
    pub residual_bound: f64,
}

impl RootList {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Bisection stopping width for roots in `[a, b]`.
pub fn bisection_width(b: f64) -> f64 {
    1e-13 * b.abs().max(1.0)
}

/// Scans `grid + 1` equispaced samples of `f` on `[a, b]` and refines every
/// sign change by bisection. Roots where `f` touches zero without changing
/// sign are not detected.
pub fn bracket_roots<F>(f: F, a: f64, b: f64, grid: usize) -> Result<RootList>
where
    F: Fn(f64) -> f64,
{
    try_bracket_roots(|x| Ok(f(x)), a, b, grid)
}

/// Fallible variant of [`bracket_roots`]; errors from `f` propagate.
pub fn try_bracket_roots<F>(f: F, a: f64, b: f64, grid: usize) -> Result<RootList>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a < b) || grid < 2 {
        return Err(Error::ContractViolation(format!(
            "bracket_roots needs a < b and grid >= 2, got [{a}, {b}] with grid {grid}"
        )));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { abscissa: x })
        }
    };
    let width = bisection_width(b);
    let step = (b - a) / grid as f64;
    let abscissa = |i: usize| if i == grid { b } else { a + step * i as f64 };

    let mut roots = Vec::new();
    let mut residual_bound: f64 = 0.0;
    let mut x_prev = a;
    let mut f_prev = eval(a)?;
    if f_prev == 0.0 {
        roots.push(a);
    }
    for i in 1..=grid {
        let x = abscissa(i);
        let fx = eval(x)?;
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev != 0.0 && (f_prev < 0.0) != (fx < 0.0) {
            let (root, value) = bisect(&eval, x_prev, x, f_prev, width)?;
            residual_bound = residual_bound.max(value.abs());
            roots.push(root);
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(RootList {
        label: String::new(),
        interval: (a, b),
        roots,
        residual_bound,
    })
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign. Returns
/// the endpoint with the smaller `|f|` once the bracket is narrower than `width`.
fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, width: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut f_hi = f(hi)?;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    })
}
