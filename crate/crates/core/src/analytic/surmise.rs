use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::{CrossoverParam, SurmiseConstants};
use super::{MEAN_RTILDE_GOE, MEAN_RTILDE_GUE, MEAN_R_GOE, MEAN_R_GUE};
use crate::{Error, Result};

/// Below this `α` the ratio density is evaluated with the GOE formula.
pub const GOE_SWITCH: f64 = 1e-6;
/// Above this `α` the ratio density and the averages use the GUE formulas.
pub const GUE_SWITCH: f64 = 1.0 - 1e-6;
/// Below this `α` the averages use their GOE values. The averages move
/// linearly away from the GOE end (slope ≈ −1.65 for `⟨r⟩`), so the window is
/// much narrower than [`GOE_SWITCH`].
pub const MEAN_GOE_SWITCH: f64 = 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn check_r(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        Err(Error::domain(alloc::format!("ratio r = {r} must be >= 0")))
    } else {
        Ok(())
    }
}

/// `g(η, ζ) = (4√π/v⁵) ∫_0^∞ x⁴ e^{-η²x²/v²} erf(ζx/v) dx`
/// `= ζ(5η²+3ζ²)/[η⁴(η²+ζ²)²] + (3/η⁵) arctan(ζ/η)`.
pub fn g_integral(eta: f64, zeta: f64) -> Result<f64> {
    if !(eta > 0.0) || eta.is_infinite() {
        return Err(Error::domain(alloc::format!(
            "eta = {eta} must be positive and finite"
        )));
    }
    if zeta.is_nan() || zeta < 0.0 {
        return Err(Error::domain(alloc::format!("zeta = {zeta} must be >= 0")));
    }
    let rational = if zeta.is_infinite() {
        0.0
    } else {
        let e2 = eta * eta;
        let s = e2 + zeta * zeta;
        zeta * (5.0 * e2 + 3.0 * zeta * zeta) / (e2 * e2 * s * s)
    };
    Ok(rational + 3.0 / eta.powi(5) * (zeta / eta).atan())
}

/// GOE surmise `27 r(r+1) / [8 (r²+r+1)^{5/2}]`.
pub fn ratio_pdf_goe(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(goe_unchecked(r))
}

/// GUE surmise `(81√3/4π) r²(r+1)² / (r²+r+1)⁴`.
pub fn ratio_pdf_gue(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(gue_unchecked(r))
}

fn goe_unchecked(r: f64) -> f64 {
    if r.is_infinite() {
        return 0.0;
    }
    let q = r * r + r + 1.0;
    27.0 / 8.0 * r * (r + 1.0) / (q * q * q.sqrt())
}

fn gue_unchecked(r: f64) -> f64 {
    if r.is_infinite() {
        return 0.0;
    }
    let q = r * r + r + 1.0;
    let q2 = q * q;
    81.0 * SQRT3 / (4.0 * PI) * (r * (r + 1.0)).powi(2) / (q2 * q2)
}

/// Density of the consecutive spacing ratio `r` for the 3×3 crossover
/// ensemble, in the single-arctan form.
///
/// The closed form is `0/0` at both ends; below [`GOE_SWITCH`] the GOE surmise
/// is returned and above [`GUE_SWITCH`] the GUE surmise.
pub fn ratio_pdf(r: f64, param: CrossoverParam) -> Result<f64> {
    check_r(r)?;
    Ok(ratio_pdf_unchecked(r, param))
}

pub(crate) fn ratio_pdf_unchecked(r: f64, param: CrossoverParam) -> f64 {
    let alpha = param.alpha();
    if alpha < GOE_SWITCH {
        return goe_unchecked(r);
    }
    if alpha > GUE_SWITCH {
        return gue_unchecked(r);
    }
    if r == 0.0 || r.is_infinite() {
        return 0.0;
    }
    if r > 1e20 {
        // r^10 overflows further out; p(r) = p(1/r)/r² for this ensemble.
        return ratio_pdf_unchecked(1.0 / r, param) / (r * r);
    }
    let SurmiseConstants { a, b } = SurmiseConstants::new(r, param);
    let a2 = a * a;
    let a4 = a2 * a2;
    let rational = |z: f64| {
        let s = a2 + z * z;
        z * (5.0 * a2 + 3.0 * z * z) / (a4 * s * s)
    };
    let q = r * r + r + 1.0;
    let arctan = (b * b * b * r * (r + 1.0) / (a2 * a + a * b * b * q)).atan();
    let bracket = rational(b) + rational(b * r) - rational(b * (r + 1.0)) + 3.0 / (a4 * a) * arctan;
    let c = param.orthogonal_weight();
    r * (r + 1.0) / (16.0 * 6.0f64.sqrt() * PI * c * c * c) * bracket
}

/// The same density through three separate `g` evaluations (the form before
/// the arctan terms are combined). Kept as an independent evaluation path; it
/// loses accuracy as `α → 1`.
pub fn ratio_pdf_three_arctan(r: f64, param: CrossoverParam) -> Result<f64> {
    check_r(r)?;
    let alpha = param.alpha();
    if alpha == 0.0 || alpha == 1.0 {
        return Err(Error::domain(
            "three-arctan form is undefined at alpha = 0 and alpha = 1",
        ));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let SurmiseConstants { a, b } = SurmiseConstants::new(r, param);
    let bracket = g_integral(a, b)? + g_integral(a, b * r)? - g_integral(a, b * r + b)?;
    let c = param.orthogonal_weight();
    Ok(r * (r + 1.0) / (16.0 * 6.0f64.sqrt() * PI * c * c * c) * bracket)
}

/// `p̃(r̃) = [p(r̃) + p(1/r̃)/r̃²] Θ(1-r̃)` for an arbitrary ratio density `p`.
///
/// Returns 0 above 1 and the limit value 0 at `r̃ = 0` (every density here
/// vanishes at the origin and decays faster than `r^{-2}`).
pub fn rtilde_from_pdf<F>(rt: f64, mut pdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if rt.is_nan() || rt < 0.0 {
        return Err(Error::domain(alloc::format!("r̃ = {rt} must lie in [0, 1]")));
    }
    if rt > 1.0 || rt == 0.0 {
        return Ok(0.0);
    }
    Ok(pdf(rt)? + pdf(1.0 / rt)? / (rt * rt))
}

/// Density of `r̃ = min(r, 1/r)` for the crossover ensemble.
pub fn rtilde_pdf(rt: f64, param: CrossoverParam) -> Result<f64> {
    rtilde_from_pdf(rt, |r| ratio_pdf(r, param))
}

/// `2 p(r̃)` on `[0, 1]`, valid because the 3×3 Gaussian spacing density is
/// symmetric under exchange of the two spacings.
pub fn rtilde_pdf_symmetric(rt: f64, param: CrossoverParam) -> Result<f64> {
    if rt.is_nan() || rt < 0.0 {
        return Err(Error::domain(alloc::format!("r̃ = {rt} must lie in [0, 1]")));
    }
    if rt > 1.0 {
        return Ok(0.0);
    }
    Ok(2.0 * ratio_pdf_unchecked(rt, param))
}

/// Closed-form `⟨r⟩` as a function of `α`.
pub fn mean_r(param: CrossoverParam) -> f64 {
    let alpha = param.alpha();
    if alpha < MEAN_GOE_SWITCH {
        return MEAN_R_GOE;
    }
    if alpha > GUE_SWITCH {
        return MEAN_R_GUE;
    }
    let a2 = alpha * alpha;
    let c2 = param.one_minus_alpha_sq();
    9.0 * SQRT3 * alpha / (2.0 * PI * (3.0 + a2)) - 0.75
        + (5.0 + a2) / (PI * c2) * ((3.0 - a2) / (2.0 * SQRT3 * alpha)).atan()
        - (7.0 + 5.0 * a2) / (2.0 * PI * c2) * (alpha / SQRT3).atan()
}

/// Closed-form `⟨r̃⟩` as a function of `α`.
pub fn mean_rtilde(param: CrossoverParam) -> f64 {
    let alpha = param.alpha();
    if alpha < MEAN_GOE_SWITCH {
        return MEAN_RTILDE_GOE;
    }
    if alpha > GUE_SWITCH {
        return MEAN_RTILDE_GUE;
    }
    let a2 = alpha * alpha;
    let c = param.orthogonal_weight();
    let c2 = c * c;
    let c3 = c2 * c;
    4.0 * (2.0 + a2) / (PI * c2) * (SQRT3 * (1.0 + a2) / (2.0 * alpha)).atan()
        - 4.0 * SQRT3 / (PI * c3) * (c3 / (alpha * (3.0 + a2))).atan()
        - (17.0 + 7.0 * a2) / (PI * c2) * (alpha / SQRT3).atan()
        - (SQRT3 * alpha).atan() / PI
}

/// 3×3 Laguerre surmise: `32(r²+r)/(r+2)⁵` for `β = 1` (LOE) and
/// `420(r²+r)²/(r+2)⁸` for `β = 2` (LUE).
pub fn laguerre3_pdf(r: f64, beta: u8) -> Result<f64> {
    check_r(r)?;
    if r.is_infinite() {
        return match beta {
            1 | 2 => Ok(0.0),
            _ => Err(Error::domain(alloc::format!(
                "beta = {beta} must be 1 or 2"
            ))),
        };
    }
    let s = r * r + r;
    let d = r + 2.0;
    match beta {
        1 => Ok(32.0 * s / d.powi(5)),
        2 => Ok(420.0 * s * s / d.powi(8)),
        _ => Err(Error::domain(alloc::format!(
            "beta = {beta} must be 1 or 2"
        ))),
    }
}

/// `r̃` density for the 3×3 Laguerre surmise. The Laguerre spacing density is
/// not exchange symmetric, so this is not `2 p(r̃)`.
pub fn laguerre3_rtilde_pdf(rt: f64, beta: u8) -> Result<f64> {
    rtilde_from_pdf(rt, |r| laguerre3_pdf(r, beta))
}
