use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::{erf, CrossoverParam};
use crate::{Error, Result};

/// Default matrix-element scale `v` for the 3×3 densities.
pub const DEFAULT_SCALE: f64 = 1.0;

fn check_interior(param: CrossoverParam, v: f64) -> Result<()> {
    let alpha = param.alpha();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(alloc::format!(
            "crossover density needs 0 < alpha < 1 (got {alpha}); use the GOE/GUE modes"
        )));
    }
    if !(v > 0.0) || v.is_infinite() {
        return Err(Error::domain(alloc::format!(
            "scale v = {v} must be positive"
        )));
    }
    Ok(())
}

/// `f(u) = erf(√((1-α²)/(8α²v²)) u)`.
fn erf_factor(param: CrossoverParam, v: f64) -> impl Fn(f64) -> f64 {
    let kappa = param.orthogonal_weight() / (8.0f64.sqrt() * param.alpha() * v);
    move |u| erf(kappa * u)
}

/// Joint eigenvalue density of the 3×3 crossover matrix with scale `v`.
///
/// Nonnegative for ordered arguments `x1 ≤ x2 ≤ x3`; invariant under
/// permutations of the arguments.
pub fn joint_eigen_pdf3(x1: f64, x2: f64, x3: f64, param: CrossoverParam, v: f64) -> Result<f64> {
    check_interior(param, v)?;
    let f = erf_factor(param, v);
    let c = param.orthogonal_weight();
    let norm = 1.0 / (48.0 * 2.0f64.sqrt() * PI * v.powi(6) * c * c * c);
    let bracket = f(x1 - x2) - f(x1 - x3) + f(x2 - x3);
    let vandermonde = (x1 - x2) * (x2 - x3) * (x1 - x3);
    let gauss = (-(x1 * x1 + x2 * x2 + x3 * x3) / (4.0 * v * v)).exp();
    Ok(norm * bracket * vandermonde * gauss)
}

/// The `α → 0` limit: `|Δ(x)| e^{-Σx²/4v²} / (48√2 π v⁶)`.
pub fn joint_eigen_pdf3_goe(x1: f64, x2: f64, x3: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::domain("scale v must be positive"));
    }
    let vandermonde = ((x1 - x2) * (x1 - x3) * (x2 - x3)).abs();
    let gauss = (-(x1 * x1 + x2 * x2 + x3 * x3) / (4.0 * v * v)).exp();
    Ok(vandermonde * gauss / (48.0 * 2.0f64.sqrt() * PI * v.powi(6)))
}

/// The `α → 1` limit: `Δ(x)² e^{-Σx²/4v²} / (768 π^{3/2} v⁹)`.
pub fn joint_eigen_pdf3_gue(x1: f64, x2: f64, x3: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::domain("scale v must be positive"));
    }
    let vandermonde = (x1 - x2) * (x1 - x3) * (x2 - x3);
    let gauss = (-(x1 * x1 + x2 * x2 + x3 * x3) / (4.0 * v * v)).exp();
    Ok(vandermonde * vandermonde * gauss / (768.0 * PI.powf(1.5) * v.powi(9)))
}

/// Joint density of the two consecutive spacings `x = x2 - x1`, `y = x3 - x2`
/// of the ordered 3×3 spectrum. Symmetric in `x` and `y`.
pub fn joint_spacing_pdf(x: f64, y: f64, param: CrossoverParam, v: f64) -> Result<f64> {
    check_interior(param, v)?;
    if x.is_nan() || y.is_nan() || x < 0.0 || y < 0.0 {
        return Err(Error::domain("spacings must be >= 0"));
    }
    let f = erf_factor(param, v);
    let c = param.orthogonal_weight();
    let norm = 1.0 / (4.0 * (6.0 * PI).sqrt() * v.powi(5) * c * c * c);
    let bracket = f(x) + f(y) - f(x + y);
    let gauss = (-(x * x + x * y + y * y) / (6.0 * v * v)).exp();
    Ok(norm * x * y * (x + y) * bracket * gauss)
}
