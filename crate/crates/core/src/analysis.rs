//! Fitting the effective crossover parameter, symmetrized KL divergences and
//! scaling-point bookkeeping.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::analytic::{
    laguerre3_pdf, laguerre3_rtilde_pdf, ratio_pdf_goe, ratio_pdf_gue, ratio_pdf_unchecked,
    rtilde_pdf_symmetric,
};
use crate::ensembles::Ensemble;
use crate::quad::{integrate, QuadOptions};
use crate::spectra::{
    default_histogram, histogram, rtilde_of, sliced_ratios, CircleBoundary, HistogramDensity,
    RatioKind, RatioSample, SliceMode, RTILDE_BIN_WIDTH, RTILDE_DOMAIN, R_BIN_WIDTH, R_DOMAIN,
};
use crate::{CrossoverParam, Error, Result};

/// Added to both densities before taking logarithms.
pub const KLD_EPSILON: f64 = 1e-12;

/// `Σ p₁ ln(p₁/p₂) Δx + Σ p₂ ln(p₂/p₁) Δx` with `ε` added to both densities.
pub fn kld_symmetric(p1: &[f64], p2: &[f64], dx: f64) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::config(format!(
            "density grids differ in length ({} vs {})",
            p1.len(),
            p2.len()
        )));
    }
    if !(dx > 0.0) {
        return Err(Error::config(format!("bin width {dx} must be positive")));
    }
    let mut sum = 0.0;
    for (&a, &b) in p1.iter().zip(p2) {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::domain(format!("negative or NaN density ({a}, {b})")));
        }
        // p₁ ln(p₁/p₂) + p₂ ln(p₂/p₁) = (p₁ − p₂) ln(p₁/p₂), ordered so the
        // result is bitwise symmetric
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        let (hi, lo) = (hi + KLD_EPSILON, lo + KLD_EPSILON);
        sum += (hi - lo) * (hi / lo).ln();
    }
    Ok(sum * dx)
}

/// A uniform binning on which densities are compared.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KldGrid {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
}

impl KldGrid {
    /// `r ∈ [0, 30]`, `Δr = 0.06`.
    pub const R: KldGrid = KldGrid {
        lo: R_DOMAIN.0,
        hi: R_DOMAIN.1,
        bin_width: R_BIN_WIDTH,
    };
    /// `r̃ ∈ [0, 1]`, `Δr̃ = 0.002`.
    pub const RTILDE: KldGrid = KldGrid {
        lo: RTILDE_DOMAIN.0,
        hi: RTILDE_DOMAIN.1,
        bin_width: RTILDE_BIN_WIDTH,
    };

    pub fn bins(&self) -> Result<usize> {
        crate::spectra::bin_count(self.lo, self.hi, self.bin_width)
    }

    pub fn centers(&self) -> Result<Vec<f64>> {
        let n = self.bins()?;
        Ok((0..n)
            .map(|i| self.lo + (i as f64 + 0.5) * self.bin_width)
            .collect())
    }

    /// `pdf` evaluated at the bin centers.
    pub fn tabulate<F: FnMut(f64) -> Result<f64>>(&self, mut pdf: F) -> Result<Vec<f64>> {
        self.centers()?.into_iter().map(&mut pdf).collect()
    }

    pub fn histogram(&self, values: &[f64]) -> Result<HistogramDensity> {
        histogram(values, self.lo, self.hi, self.bin_width)
    }

    /// KLD between a sample's histogram on this grid and an analytic density.
    pub fn kld_sample<F: FnMut(f64) -> Result<f64>>(&self, values: &[f64], pdf: F) -> Result<f64> {
        let h = self.histogram(values)?;
        kld_symmetric(&h.densities, &self.tabulate(pdf)?, self.bin_width)
    }

    /// KLD between two analytic densities on this grid.
    pub fn kld_curves<F, G>(&self, p: F, q: G) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
        G: FnMut(f64) -> Result<f64>,
    {
        kld_symmetric(&self.tabulate(p)?, &self.tabulate(q)?, self.bin_width)
    }
}

/// `r̃` density of the GOE surmise.
pub fn rtilde_pdf_goe(rt: f64) -> Result<f64> {
    rtilde_pdf_symmetric(rt, CrossoverParam::GOE)
}

/// `r̃` density of the GUE surmise.
pub fn rtilde_pdf_gue(rt: f64) -> Result<f64> {
    rtilde_pdf_symmetric(rt, CrossoverParam::GUE)
}

/// Reference family a sample is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Reference {
    /// 3×3 Gaussian surmises.
    Gaussian,
    /// 3×3 Laguerre surmises.
    Laguerre,
}

impl Reference {
    fn r_pdf(self, unitary: bool, r: f64) -> Result<f64> {
        match (self, unitary) {
            (Reference::Gaussian, false) => ratio_pdf_goe(r),
            (Reference::Gaussian, true) => ratio_pdf_gue(r),
            (Reference::Laguerre, false) => laguerre3_pdf(r, 1),
            (Reference::Laguerre, true) => laguerre3_pdf(r, 2),
        }
    }

    fn rtilde_pdf(self, unitary: bool, rt: f64) -> Result<f64> {
        match (self, unitary) {
            (Reference::Gaussian, false) => rtilde_pdf_goe(rt),
            (Reference::Gaussian, true) => rtilde_pdf_gue(rt),
            (Reference::Laguerre, false) => laguerre3_rtilde_pdf(rt, 1),
            (Reference::Laguerre, true) => laguerre3_rtilde_pdf(rt, 2),
        }
    }
}

/// Divergences of a sample from the orthogonal and unitary reference curves.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KldResult {
    pub d_goe: f64,
    pub d_gue: f64,
    pub d_goe_tilde: f64,
    pub d_gue_tilde: f64,
    pub r_grid: KldGrid,
    pub rtilde_grid: KldGrid,
}

/// [`KldResult`] for an `r` sample on the given grids.
pub fn kld_against(
    rs: &RatioSample,
    reference: Reference,
    r_grid: KldGrid,
    rtilde_grid: KldGrid,
) -> Result<KldResult> {
    if rs.kind() != RatioKind::R {
        return Err(Error::config("divergences need an r sample"));
    }
    let rt = rtilde_of(rs);
    Ok(KldResult {
        d_goe: r_grid.kld_sample(rs.values(), |r| reference.r_pdf(false, r))?,
        d_gue: r_grid.kld_sample(rs.values(), |r| reference.r_pdf(true, r))?,
        d_goe_tilde: rtilde_grid.kld_sample(rt.values(), |x| reference.rtilde_pdf(false, x))?,
        d_gue_tilde: rtilde_grid.kld_sample(rt.values(), |x| reference.rtilde_pdf(true, x))?,
        r_grid,
        rtilde_grid,
    })
}

/// [`kld_against`] with the Gaussian references on the default grids.
pub fn kld_report(rs: &RatioSample) -> Result<KldResult> {
    kld_against(rs, Reference::Gaussian, KldGrid::R, KldGrid::RTILDE)
}

/// Sample mean and its standard error `s/√n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean_of_sample(values: &[f64]) -> Result<MeanEstimate> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Insufficient("mean of an empty sample".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(MeanEstimate { mean, se, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FitMethod {
    /// Maximum likelihood over the raw ratios.
    #[default]
    Mle,
    /// Least squares between the default-grid histogram and the density.
    HistogramLsq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub lambda_max: f64,
    /// Offset in the search variable `ln(λ + offset)`.
    pub log_offset: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Points of the coarse scan that brackets the minimum.
    pub scan_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            lambda_max: 10.0,
            log_offset: 1e-3,
            tol: 1e-4,
            max_iter: 200,
            scan_points: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub lambda_eff: f64,
    /// Mean negative log-likelihood per sample (MLE) or the sum of squared
    /// residuals (histogram).
    pub objective_value: f64,
    pub method: FitMethod,
    pub n_samples: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Below this many ratios the fit still runs but logs a warning.
pub const FIT_MIN_SAMPLES: usize = 1000;

/// Fits `λ_eff` of the crossover density to an `r` sample.
pub fn fit_lambda_eff(rs: &RatioSample, method: FitMethod) -> Result<FitResult> {
    fit_lambda_eff_with(rs, method, &FitOptions::default())
}

pub fn fit_lambda_eff_with(
    rs: &RatioSample,
    method: FitMethod,
    opts: &FitOptions,
) -> Result<FitResult> {
    if rs.kind() != RatioKind::R {
        return Err(Error::config("lambda_eff is fitted to r samples"));
    }
    if rs.is_empty() {
        return Err(Error::Insufficient("cannot fit an empty sample".into()));
    }
    if rs.len() < FIT_MIN_SAMPLES {
        log::warn!("fitting lambda_eff to only {} ratios", rs.len());
    }
    if !(opts.lambda_max > 0.0 && opts.log_offset > 0.0 && opts.tol > 0.0 && opts.scan_points >= 3)
    {
        return Err(Error::config("invalid fit options"));
    }
    let param = |t: f64| {
        let lambda = (t.exp() - opts.log_offset).clamp(0.0, opts.lambda_max);
        (
            lambda,
            CrossoverParam::from_lambda(lambda).unwrap_or(CrossoverParam::GOE),
        )
    };
    let objective: &dyn Fn(f64) -> f64 = match method {
        FitMethod::Mle => {
            let values = rs.values();
            &move |t: f64| {
                let p = param(t).1;
                let nll: f64 = values
                    .iter()
                    .map(|&r| -ratio_pdf_unchecked(r, p).max(f64::MIN_POSITIVE).ln())
                    .sum();
                nll / values.len() as f64
            }
        }
        FitMethod::HistogramLsq => {
            let h = default_histogram(rs)?;
            let centers = h.centers();
            let densities = h.densities;
            &move |t: f64| {
                let p = param(t).1;
                centers
                    .iter()
                    .zip(&densities)
                    .map(|(&c, &d)| (d - ratio_pdf_unchecked(c, p)).powi(2))
                    .sum()
            }
        }
    };
    let t_lo = opts.log_offset.ln();
    let t_hi = (opts.lambda_max + opts.log_offset).ln();
    let step = (t_hi - t_lo) / (opts.scan_points - 1) as f64;
    let (mut best, mut best_f) = (0, f64::INFINITY);
    for i in 0..opts.scan_points {
        let f = objective(t_lo + step * i as f64);
        if f < best_f {
            best = i;
            best_f = f;
        }
    }
    let a = t_lo + step * best.saturating_sub(1) as f64;
    let b = t_lo + step * (best + 1).min(opts.scan_points - 1) as f64;
    // tolerance in t that resolves `tol` in λ near the scanned optimum
    let lambda_guess = param(t_lo + step * best as f64).0;
    let t_tol = opts.tol / (lambda_guess + opts.log_offset);
    let m = brent_minimize(
        objective,
        a,
        b,
        t_lo + step * best as f64,
        t_tol,
        opts.max_iter,
    );
    let (lambda, _) = param(m.x);
    if !m.fx.is_finite() {
        return Err(Error::Convergence("fit objective is not finite".into()));
    }
    Ok(FitResult {
        lambda_eff: lambda,
        objective_value: m.fx,
        method,
        n_samples: rs.len(),
        converged: m.converged,
        iterations: m.iterations,
    })
}

/// Outcome of [`brent_minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Brent's parabolic/golden-section minimization on `[a, b]` starting at `x0`.
pub fn brent_minimize<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Minimum {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = x0.clamp(a, b);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for iter in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol + 1e-10 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return Minimum {
                x,
                fx,
                iterations: iter,
                converged: true,
            };
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum {
        x,
        fx,
        iterations: max_iter,
        converged: false,
    }
}

/// Draws ratios from the crossover density by inverting its tabulated CDF.
///
/// `r̃ = min(r, 1/r)` has density `2p(r̃)` on `[0, 1]`; a draw of `r̃` is
/// returned as is or inverted with probability ½, which reproduces `p(r)`
/// because `p(r) = p(1/r)/r²`.
#[derive(Debug, Clone)]
pub struct InverseCdfSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdfSampler {
    pub fn new(param: CrossoverParam, cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::config("sampler needs at least two cells"));
        }
        let opts = QuadOptions::with_abs_tol(1e-14);
        let grid: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        let mut cdf = Vec::with_capacity(grid.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in grid.windows(2) {
            acc += integrate(|x| 2.0 * ratio_pdf_unchecked(x, param), w[0], w[1], &opts).value;
            cdf.push(acc);
        }
        if !((acc - 1.0).abs() < 1e-8) {
            return Err(Error::Convergence(format!("tabulated CDF ends at {acc}")));
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(InverseCdfSampler { grid, cdf })
    }

    /// `r̃` for a uniform variate `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self
            .cdf
            .partition_point(|&c| c <= u)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.grid[i - 1] + t * (self.grid[i] - self.grid[i - 1])
    }

    pub fn sample_r<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let rt = self.quantile(rng.random::<f64>());
        if rng.random::<bool>() && rt > 0.0 {
            1.0 / rt
        } else {
            rt
        }
    }

    /// `n` independent draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> RatioSample {
        let values = (0..n).map(|_| self.sample_r(rng)).collect();
        RatioSample::new(values, RatioKind::R).expect("sampled ratios are nonnegative")
    }

    /// `n` stratified draws: one uniform variate in each of `n` equal
    /// quantile cells, every second draw inverted, then shuffled.
    pub fn sample_stratified<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> RatioSample {
        use rand::seq::SliceRandom;
        let mut values: Vec<f64> = (0..n)
            .map(|i| {
                let rt = self.quantile((i as f64 + rng.random::<f64>()) / n as f64);
                if i % 2 == 1 && rt > 0.0 {
                    1.0 / rt
                } else {
                    rt
                }
            })
            .collect();
        values.shuffle(rng);
        RatioSample::new(values, RatioKind::R).expect("sampled ratios are nonnegative")
    }
}

/// How the raw parameter of a sweep is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ScalingLaw {
    /// `√N λ`, Gaussian and Laguerre bulk.
    SqrtN,
    /// `N^{3/2} γ`, kicked rotor.
    NThreeHalves,
}

impl ScalingLaw {
    pub fn apply(self, n: usize, raw: f64) -> f64 {
        let nf = n as f64;
        match self {
            ScalingLaw::SqrtN => nf.sqrt() * raw,
            ScalingLaw::NThreeHalves => nf * nf.sqrt() * raw,
        }
    }

    pub fn invert(self, n: usize, scaled: f64) -> f64 {
        let nf = n as f64;
        match self {
            ScalingLaw::SqrtN => scaled / nf.sqrt(),
            ScalingLaw::NThreeHalves => scaled / (nf * nf.sqrt()),
        }
    }
}

/// Everything computed from one pooled `r` sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleAnalysis {
    pub mean_r: MeanEstimate,
    pub mean_rtilde: MeanEstimate,
    pub fit: FitResult,
    pub kld: KldResult,
}

pub fn analyze_sample(rs: &RatioSample, method: FitMethod) -> Result<SampleAnalysis> {
    Ok(SampleAnalysis {
        mean_r: mean_of_sample(rs.values())?,
        mean_rtilde: mean_of_sample(rtilde_of(rs).values())?,
        fit: fit_lambda_eff(rs, method)?,
        kld: kld_report(rs)?,
    })
}

/// One point of a crossover sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingPoint {
    pub n: usize,
    pub raw_param: f64,
    pub scaled_param: f64,
    pub law: ScalingLaw,
    pub lambda_eff: f64,
    pub mean_r: f64,
    pub mean_rtilde: f64,
}

impl ScalingPoint {
    pub fn new(n: usize, raw_param: f64, law: ScalingLaw, analysis: &SampleAnalysis) -> Self {
        ScalingPoint {
            n,
            raw_param,
            scaled_param: law.apply(n, raw_param),
            law,
            lambda_eff: analysis.fit.lambda_eff,
            mean_r: analysis.mean_r.mean,
            mean_rtilde: analysis.mean_rtilde.mean,
        }
    }
}

/// Ratios of realizations `indices` pooled in index order.
pub fn pool_ratios(
    ensemble: &Ensemble,
    indices: core::ops::Range<u64>,
    mode: SliceMode,
    boundary: CircleBoundary,
) -> Result<RatioSample> {
    ensemble.validate()?;
    let mut out = RatioSample::empty(RatioKind::R);
    for k in indices {
        out.extend(sliced_ratios(&ensemble.spectrum(k)?, mode, boundary)?)?;
    }
    Ok(out)
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Insufficient(
            "linear fit needs two or more (x, y) pairs".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("linear fit needs distinct x values"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
