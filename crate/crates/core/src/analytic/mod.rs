//! Closed-form ratio statistics for the orthogonal to unitary crossover.
//!
//! The crossover matrix is `H = √(1-α²) H₁ + α H₂` with `H₁` from the GOE and
//! `H₂` from the GUE, or equivalently `H = (H₁ + λ H₂)/√(1+λ²)`. All results
//! here come from the exact 3×3 joint eigenvalue density and are free of the
//! global scale `v`.

mod density;
mod erf;
mod joint;
mod surmise;

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::trapezoid;
use crate::{Error, Result};

pub use density::{mp_density, semicircle_density};
pub use erf::erf;
pub use joint::{
    joint_eigen_pdf3, joint_eigen_pdf3_goe, joint_eigen_pdf3_gue, joint_spacing_pdf, DEFAULT_SCALE,
};
pub(crate) use surmise::ratio_pdf_unchecked;
pub use surmise::{
    g_integral, laguerre3_pdf, laguerre3_rtilde_pdf, mean_r, mean_rtilde, ratio_pdf, ratio_pdf_goe,
    ratio_pdf_gue, ratio_pdf_three_arctan, rtilde_from_pdf, rtilde_pdf, rtilde_pdf_symmetric,
    GOE_SWITCH, GUE_SWITCH, MEAN_GOE_SWITCH,
};

/// `⟨r⟩` for the GOE surmise, `7/4`.
pub const MEAN_R_GOE: f64 = 1.75;
/// `⟨r⟩` for the GUE surmise, `27√3/(8π) − 1/2`.
pub const MEAN_R_GUE: f64 = 27.0 * 1.732_050_807_568_877_2 / (8.0 * core::f64::consts::PI) - 0.5;
/// `⟨r̃⟩` for the GOE surmise, `4 − 2√3`.
pub const MEAN_RTILDE_GOE: f64 = 4.0 - 2.0 * 1.732_050_807_568_877_2;
/// `⟨r̃⟩` for the GUE surmise, `2√3/π − 1/2`.
pub const MEAN_RTILDE_GUE: f64 = 2.0 * 1.732_050_807_568_877_2 / core::f64::consts::PI - 0.5;

/// Symmetry-breaking parameter of the crossover.
///
/// Stored as the pair `(α, √(1-α²))`, i.e. the sine and cosine of the mixing
/// angle, so that both `α` and `λ = α/√(1-α²)` are available without
/// cancellation. `λ` is infinite at the unitary end `α = 1`.
///
/// With the `serde` feature it serializes as `{"alpha": α, "lambda": λ}` (`λ`
/// is `null` at the unitary end) and deserializes from either key.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "ParamRepr", into = "ParamRepr")
)]
pub struct CrossoverParam {
    alpha: f64,
    cos: f64,
}

impl CrossoverParam {
    pub const GOE: CrossoverParam = CrossoverParam {
        alpha: 0.0,
        cos: 1.0,
    };
    pub const GUE: CrossoverParam = CrossoverParam {
        alpha: 1.0,
        cos: 0.0,
    };

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(alloc::format!(
                "alpha = {alpha} outside [0, 1]"
            )));
        }
        let cos = ((1.0 - alpha) * (1.0 + alpha)).sqrt();
        Ok(CrossoverParam { alpha, cos })
    }

    /// `λ = +∞` maps to the GUE end.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::domain(alloc::format!(
                "lambda = {lambda} must be >= 0"
            )));
        }
        if lambda.is_infinite() {
            return Ok(Self::GUE);
        }
        let norm = lambda.hypot(1.0);
        Ok(CrossoverParam {
            alpha: (lambda / norm).min(1.0),
            cos: 1.0 / norm,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `λ = α/√(1-α²)`; `+∞` at `α = 1`.
    pub fn lambda(&self) -> f64 {
        if self.cos == 0.0 {
            f64::INFINITY
        } else {
            self.alpha / self.cos
        }
    }

    /// `√(1-α²) = 1/√(1+λ²)`, the weight of the orthogonal component.
    pub fn orthogonal_weight(&self) -> f64 {
        self.cos
    }

    /// `1 - α²` without cancellation.
    pub fn one_minus_alpha_sq(&self) -> f64 {
        self.cos * self.cos
    }
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default)]
    lambda: Option<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<ParamRepr> for CrossoverParam {
    type Error = Error;
    fn try_from(p: ParamRepr) -> Result<Self> {
        match (p.alpha, p.lambda) {
            (Some(a), None) => Self::from_alpha(a),
            (None, Some(l)) => Self::from_lambda(l),
            (Some(a), Some(l)) => {
                let param = Self::from_alpha(a)?;
                let expected = param.lambda();
                if l == expected || (l - expected).abs() <= 1e-12 * expected.abs().max(1.0) {
                    Ok(param)
                } else {
                    Err(Error::config(alloc::format!(
                        "alpha = {a} and lambda = {l} disagree"
                    )))
                }
            }
            (None, None) => Err(Error::config("crossover parameter needs alpha or lambda")),
        }
    }
}

#[cfg(feature = "serde")]
impl From<CrossoverParam> for ParamRepr {
    fn from(p: CrossoverParam) -> Self {
        let lambda = p.lambda();
        ParamRepr {
            alpha: Some(p.alpha),
            lambda: lambda.is_finite().then_some(lambda),
        }
    }
}

/// The auxiliary quantities `a(r)` and `b(α)` of the closed-form ratio density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurmiseConstants {
    /// `a = √((r²+r+1)/6)`.
    pub a: f64,
    /// `b = √((1-α²)/(8α²))`; infinite at `α = 0`.
    pub b: f64,
}

impl SurmiseConstants {
    pub fn new(r: f64, param: CrossoverParam) -> Self {
        let a = ((r * r + r + 1.0) / 6.0).sqrt();
        let b = if param.alpha == 0.0 {
            f64::INFINITY
        } else {
            param.cos / (8.0f64.sqrt() * param.alpha)
        };
        SurmiseConstants { a, b }
    }
}

/// A density tabulated on an ordered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityCurve {
    /// Tabulates a fallible density on `grid`.
    pub fn tabulate<F>(grid: Vec<f64>, mut pdf: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::config("density grid must be ordered"));
        }
        let values = grid.iter().map(|&x| pdf(x)).collect::<Result<Vec<_>>>()?;
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::domain(alloc::format!(
                "negative or NaN density value {bad}"
            )));
        }
        Ok(DensityCurve { grid, values })
    }

    /// Uniform grid `lo, lo+step, ..., ≤ hi`.
    pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !(hi >= lo) {
            return Err(Error::config("grid needs step > 0 and hi >= lo"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| lo + step * i as f64).collect())
    }

    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }
}
