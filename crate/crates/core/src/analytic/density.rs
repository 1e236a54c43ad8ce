use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Semicircle level density `(1/π)√(2N − x²)` on `|x| ≤ √(2N)`, normalized to
/// `N` levels. Matches the crossover matrix with `v² = 1/[2(1+α²)]`.
pub fn semicircle_density(x: f64, n: usize) -> f64 {
    let r2 = 2.0 * n as f64;
    let d = r2 - x * x;
    if d > 0.0 {
        d.sqrt() / PI
    } else {
        0.0
    }
}

/// Marchenko-Pastur level density for square Wishart matrices,
/// `(1/π)√((2N − x)/x)` on `0 < x ≤ 2N`, normalized to `N` levels.
///
/// This is the density of `AA†/2` when the entries of `A` have unit mean
/// square modulus.
pub fn mp_density(x: f64, n: usize) -> f64 {
    let edge = 2.0 * n as f64;
    if x <= 0.0 || x >= edge {
        return 0.0;
    }
    ((edge - x) / x).sqrt() / PI
}
