//! Reference computations that share no code path with the library.

use nalgebra::{DMatrix, Matrix3, Vector3};
use std::f64::consts::PI;

/// `#{(m1, m2) in S^2 : m1^2 + m2^2 < x}` with `S = {1, 2, ...}` when
/// `positive`, else `S = {0, 1, ...}`.
pub fn lattice_count(x: f64, positive: bool) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    let start: u64 = if positive { 1 } else { 0 };
    let mut total = 0;
    let mut m1 = start;
    while ((m1 * m1) as f64) < x {
        let rest = x - (m1 * m1) as f64;
        let mut top = rest.sqrt().floor() as u64 + 1;
        while top > 0 && ((top * top) as f64) >= rest {
            top -= 1;
        }
        // m2 in [start, top] with m2^2 < rest
        if top + 1 > start {
            total += top + 1 - start;
        }
        m1 += 1;
    }
    total
}

/// Mixed-problem counting function on `[0, pi]^2`: one family is a
/// Dirichlet lattice and the other a Neumann lattice without the origin.
pub fn mixed_square_count(df: bool, lambda: f64, mu: f64, pressure_modulus: f64) -> u64 {
    let (pressure_positive, shear_positive) = if df { (true, false) } else { (false, true) };
    let strip_origin = |positive: bool, x: f64| {
        let n = lattice_count(x, positive);
        if positive || x <= 0.0 {
            n
        } else {
            n - 1
        }
    };
    strip_origin(pressure_positive, lambda / pressure_modulus) + strip_origin(shear_positive, lambda / mu)
}

/// Plain bisection to full double precision.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "bisection needs a sign change");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on a uniform grid of `n` cells strictly inside `(a, b)`.
pub fn sign_changes(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> usize {
    let h = (b - a) / n as f64;
    let values: Vec<f64> = (1..n).map(|i| f(a + h * i as f64)).collect();
    values.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
}

pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        s += f(a + h * i as f64);
    }
    s * h
}

/// Gamma at positive integers and half-integers by recurrence.
pub fn gamma_half(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    assert!(twice >= 1 && (2.0 * x - twice as f64).abs() < 1e-12);
    let (mut g, mut y) = if twice % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while y < x - 0.25 {
        g *= y;
        y += 1.0;
    }
    g
}

pub fn rayleigh_cubic(alpha: f64, w: f64) -> f64 {
    w * w * w - 8.0 * w * w + 8.0 * (3.0 - 2.0 * alpha) * w + 16.0 * (alpha - 1.0)
}

/// Integral-family second coefficient from the closed expression with a
/// `panels`-panel trapezoid rule on `[sqrt(alpha), 1]`.
pub fn integral_family_coefficient(free: bool, d: usize, lambda: f64, mu: f64, panels: usize) -> f64 {
    let alpha = mu / (lambda + 2.0 * mu);
    let df = d as f64;
    let cd = 1.0 / (2f64.powi(d as i32 + 1) * PI.powf(0.5 * (df - 1.0)) * gamma_half(0.5 * (df + 1.0)));
    let integrand = |tau: f64| {
        let s = 1.0 / (tau * tau);
        let q = ((1.0 - alpha * s) * (s - 1.0)).max(0.0).sqrt();
        let angle = if free {
            if q == 0.0 {
                PI / 2.0
            } else {
                ((s - 2.0) * (s - 2.0) / (4.0 * q)).atan()
            }
        } else {
            q.atan()
        };
        tau.powf(df - 2.0) * angle
    };
    let integral = trapezoid(integrand, alpha.sqrt(), 1.0, panels);
    let weight = 4.0 * (df - 1.0) / PI;
    let scale = mu.powf(0.5 * (1.0 - df)) * cd;
    if free {
        let w1 = bisect(|w| rayleigh_cubic(alpha, w), 0.0, 1.0);
        scale * (alpha.powf(0.5 * (df - 1.0)) + df - 5.0 + 4.0 * w1.sqrt().powf(1.0 - df) + weight * integral)
    } else {
        -scale * (alpha.powf(0.5 * (df - 1.0)) + df - 1.0 + weight * integral)
    }
}

/// Whether displacement component `j` of a separated box field with lattice
/// index `m` survives the mixed boundary conditions on a closed box.
///
/// DF keeps `cos` along the own axis and `sin` along the others; FD swaps them.
pub fn component_alive(df: bool, m: [u32; 3], j: usize) -> bool {
    if df {
        (0..3).all(|i| i == j || m[i] > 0)
    } else {
        m[j] > 0
    }
}

/// Dimension of the eigenspace of the Navier symbol
/// `mu |k|^2 I + (lambda + mu) k k^T` for eigenvalue `mu |k|^2`, restricted to
/// the coordinate subspace of surviving components, via SVD.
pub fn shear_null_space(k: [f64; 3], alive: [bool; 3], lambda: f64, mu: f64) -> usize {
    let kv = Vector3::from(k);
    let symbol: Matrix3<f64> = Matrix3::identity() * (mu * kv.norm_squared()) + kv * kv.transpose() * (lambda + mu);
    let idx: Vec<usize> = (0..3).filter(|&j| alive[j]).collect();
    if idx.is_empty() {
        return 0;
    }
    let n = idx.len();
    let shift = mu * kv.norm_squared();
    let block = DMatrix::from_fn(n, n, |r, c| {
        symbol[(idx[r], idx[c])] - if r == c { shift } else { 0.0 }
    });
    let scale = symbol.norm().max(1.0);
    let svd = block.svd(false, false);
    svd.singular_values.iter().filter(|&&s| s <= 1e-10 * scale).count()
}
