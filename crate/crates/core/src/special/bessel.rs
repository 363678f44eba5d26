//! Bessel functions of the first kind, integer order, real non-negative argument.
//!
//! Three regimes:
//! - ascending power series while `x^2/4 <= 4 (k + 1)` (no serious cancellation),
//! - Hankel's large-argument expansion once `x >= 40` and `k^2 <= x / 4`,
//! - Miller's backward recurrence normalized by `J_0 + 2 sum J_2m = 1` otherwise.

use crate::error::{Error, Result};

/// Largest order accepted by the public functions.
pub const MAX_ORDER: u32 = 250;
/// Largest argument accepted by the public functions.
pub const MAX_ARGUMENT: f64 = 2000.0;

// Internal callers (ladder identities, neighbour orders) may reach a few
// orders past the public envelope.
const INTERNAL_MAX_ORDER: u32 = MAX_ORDER + 8;

fn check_envelope(k: u32, x: f64, max_order: u32) -> Result<()> {
    if k > max_order || !x.is_finite() || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::Range(format!(
            "J_k(x) supported for k <= {MAX_ORDER}, 0 <= x <= {MAX_ARGUMENT}; got k = {k}, x = {x}"
        )));
    }
    Ok(())
}

/// `J_k(x)`.
///
/// Relative accuracy is about `1e-13` away from zeros; values below the
/// smallest normal `f64` flush to zero.
pub fn bessel_j(k: u32, x: f64) -> Result<f64> {
    check_envelope(k, x, MAX_ORDER)?;
    Ok(j_unchecked(k, x))
}

/// `J_k'(x)`, from `J_k' = (J_{k-1} - J_{k+1}) / 2` and `J_0' = -J_1`.
pub fn bessel_j_deriv(k: u32, x: f64) -> Result<f64> {
    check_envelope(k, x, MAX_ORDER)?;
    if k == 0 {
        return Ok(-j_unchecked(1, x));
    }
    let [below, _, above] = neighbours_unchecked(k, x);
    Ok(0.5 * (below - above))
}

/// `J_m(x)` for every `m` in `lo..=hi`, sharing one recurrence where possible.
pub(crate) fn bessel_j_orders(lo: u32, hi: u32, x: f64) -> Result<Vec<f64>> {
    check_envelope(hi, x, INTERNAL_MAX_ORDER)?;
    if x == 0.0 {
        return Ok((lo..=hi).map(|m| if m == 0 { 1.0 } else { 0.0 }).collect());
    }
    match regime(hi, x) {
        Regime::Miller if regime(lo, x) == Regime::Miller => Ok(miller(lo, hi, x)),
        _ => Ok((lo..=hi).map(|m| j_unchecked(m, x)).collect()),
    }
}

/// `J_{k-1}, J_k, J_{k+1}` at `x` (with `J_{-1} = -J_1`).
fn neighbours_unchecked(k: u32, x: f64) -> [f64; 3] {
    if k == 0 {
        let v = orders_unchecked(0, 1, x);
        return [-v[1], v[0], v[1]];
    }
    let v = orders_unchecked(k - 1, k + 1, x);
    [v[0], v[1], v[2]]
}

fn orders_unchecked(lo: u32, hi: u32, x: f64) -> Vec<f64> {
    bessel_j_orders(lo, hi, x).expect("envelope checked by caller")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    Series,
    Hankel,
    Miller,
}

fn regime(k: u32, x: f64) -> Regime {
    let kf = f64::from(k);
    if 0.25 * x * x <= 4.0 * (kf + 1.0) {
        Regime::Series
    } else if x >= 40.0 && kf * kf <= 0.25 * x {
        Regime::Hankel
    } else {
        Regime::Miller
    }
}

fn j_unchecked(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    match regime(k, x) {
        Regime::Series => series(k, x),
        Regime::Hankel => hankel(k, x),
        Regime::Miller => miller(k, k, x)[0],
    }
}

/// `(x/2)^k / k!` by running product, which underflows gracefully.
fn series_prefactor(k: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    (1..=k).fold(1.0, |acc, j| acc * half / f64::from(j))
}

/// `J_k(x) / ((x/2)^k / k!)`, the ascending series without its prefactor.
pub(crate) fn series_scaled(k: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let kf = f64::from(k);
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..400 {
        let mf = f64::from(m);
        term *= q / (mf * (kf + mf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn series(k: u32, x: f64) -> f64 {
    series_prefactor(k, x) * series_scaled(k, x)
}

/// Hankel asymptotic expansion; the phase `(2k+1) pi / 4` is reduced exactly.
fn hankel(k: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(k) * f64::from(k);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for j in 1..200 {
        let odd = f64::from(2 * j - 1);
        term *= (mu - odd * odd) / (f64::from(j) * 8.0 * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // terms alternate in pairs: +t0, +t1, -t2, -t3, +t4, ...
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if j % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    // chi = x - (2k+1) pi/4; cos(chi) = cos x cos phi + sin x sin phi
    let (sp, cp) = exact_quarter_pi(((2 * u64::from(k) + 1) % 8) as u32);
    let (sx, cx) = x.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// `(sin, cos)` of `n pi / 4` with exact zeros and `+-1/sqrt 2`.
fn exact_quarter_pi(n: u32) -> (f64, f64) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match n % 8 {
        0 => (0.0, 1.0),
        1 => (h, h),
        2 => (1.0, 0.0),
        3 => (h, -h),
        4 => (0.0, -1.0),
        5 => (-h, -h),
        6 => (-1.0, 0.0),
        _ => (-h, h),
    }
}

/// Miller's algorithm: `J_m(x)` for `m` in `lo..=hi`.
fn miller(lo: u32, hi: u32, x: f64) -> Vec<f64> {
    let top = f64::from(hi).max(x);
    let start = (top + 20.0 + 15.0 * x.cbrt()).ceil() as u32;
    let start = start + (start % 2);
    let mut out = vec![0.0; (hi - lo + 1) as usize];
    let mut above = 0.0_f64;
    let mut current = 1e-250_f64;
    let mut norm = 0.0_f64;
    let two_over_x = 2.0 / x;
    let mut m = start;
    loop {
        if (lo..=hi).contains(&m) {
            out[(m - lo) as usize] = current;
        }
        if m % 2 == 0 {
            norm += if m == 0 { current } else { 2.0 * current };
        }
        if m == 0 {
            break;
        }
        let below = f64::from(m) * two_over_x * current - above;
        above = current;
        current = below;
        m -= 1;
        if current.abs() > 1e250 {
            let s = 1e-250;
            current *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Column-scaled Bessel data for a potential of order `k` at argument `x`.
///
/// Holds `J_{k-1}, J_k, J_{k+1}` divided by a positive factor `scale`, chosen as
/// `(x/2)^k / k!` in the series regime so tiny values stay representable, and
/// `1` elsewhere.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledNeighbours {
    pub below: f64,
    pub at: f64,
    pub above: f64,
    /// `ln(scale)`.
    pub log_scale: f64,
}

pub(crate) fn scaled_neighbours(k: u32, x: f64) -> Result<ScaledNeighbours> {
    check_envelope(k + 1, x, INTERNAL_MAX_ORDER)?;
    if x > 0.0 && k >= 1 && regime(k + 1, x) == Regime::Series && regime(k - 1, x) == Regime::Series {
        // J_m = P_m S_m with P_{k-1}/P_k = k/(x/2), P_{k+1}/P_k = (x/2)/(k+1)
        let half = 0.5 * x;
        let kf = f64::from(k);
        let log_scale = kf * half.ln() - ln_factorial(k);
        return Ok(ScaledNeighbours {
            below: kf / half * series_scaled(k - 1, x),
            at: series_scaled(k, x),
            above: half / (kf + 1.0) * series_scaled(k + 1, x),
            log_scale,
        });
    }
    let [below, at, above] = neighbours_unchecked(k, x);
    Ok(ScaledNeighbours {
        below,
        at,
        above,
        log_scale: 0.0,
    })
}

/// `J_m(z) / exp(log_scale)` for `m` in `lo..=hi`, evaluated so that a tiny
/// Bessel value and a huge inverse scale do not meet as `0 * inf`.
pub(crate) fn bessel_j_orders_scaled(lo: u32, hi: u32, z: f64, log_scale: f64) -> Result<Vec<f64>> {
    if log_scale == 0.0 {
        return bessel_j_orders(lo, hi, z);
    }
    check_envelope(hi, z, INTERNAL_MAX_ORDER)?;
    Ok((lo..=hi)
        .map(|m| {
            if z == 0.0 {
                if m == 0 {
                    (-log_scale).exp()
                } else {
                    0.0
                }
            } else if regime(m, z) == Regime::Series {
                let log_p = f64::from(m) * (0.5 * z).ln() - ln_factorial(m);
                series_scaled(m, z) * (log_p - log_scale).exp()
            } else {
                j_unchecked(m, z) * (-log_scale).exp()
            }
        })
        .collect())
}

fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|j| f64::from(j).ln()).sum()
}
