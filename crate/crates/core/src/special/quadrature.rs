//! Adaptive Gauss-Kronrod quadrature and the arctan integrals of the
//! integral coefficient family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which integrand of the integral coefficient family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArctanKind {
    Dirichlet,
    Free,
}

const QUADRATURE_TOLERANCE: f64 = 1e-13;
const MAX_DEPTH: u32 = 40;

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = KRONROD_WEIGHTS[7] * fc;
    let mut g = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * KRONROD_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        k += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            g += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = kronrod(f, a, b);
    if err <= tol || depth >= MAX_DEPTH {
        return value;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth + 1) + adaptive(f, m, b, 0.5 * tol, depth + 1)
}

/// Integrates `f` over `[a, b]` with adaptive 7/15-point Gauss-Kronrod.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adaptive(&f, a, b, tol, 0)
}

/// The integrand of [`arctan_integral`] at `tau`.
pub fn arctan_integrand(d: u32, alpha: f64, kind: ArctanKind, tau: f64) -> f64 {
    let inv2 = 1.0 / (tau * tau);
    let root = ((1.0 - alpha * inv2) * (inv2 - 1.0)).max(0.0).sqrt();
    let angle = match kind {
        ArctanKind::Dirichlet => root.atan(),
        ArctanKind::Free => {
            let num = (inv2 - 2.0) * (inv2 - 2.0);
            num.atan2(4.0 * root)
        }
    };
    tau.powi(d as i32 - 2) * angle
}

/// `∫_{√alpha}^1 tau^(d-2) arctan(...) dtau` for the named integrand.
///
/// The substitution `tau = a + (b - a)(1 - cos phi)/2` clusters nodes at both
/// square-root endpoints.
pub fn arctan_integral(d: u32, alpha: f64, kind: ArctanKind) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("arctan_integral needs d >= 2, got {d}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!(
            "arctan_integral needs 0 < alpha <= 1, got {alpha}"
        )));
    }
    let a = alpha.sqrt();
    let b = 1.0;
    if a >= b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    let g = |phi: f64| {
        let tau = a + half * (1.0 - phi.cos());
        arctan_integrand(d, alpha, kind, tau) * half * phi.sin()
    };
    Ok(integrate(g, 0.0, std::f64::consts::PI, QUADRATURE_TOLERANCE))
}
