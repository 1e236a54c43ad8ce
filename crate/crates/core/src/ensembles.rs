//! Seeded random-matrix samplers and spectrum extraction.
//!
//! Every realization draws from its own ChaCha8 stream, selected by the
//! realization index on a generator seeded from the master seed, so a matrix
//! depends only on `(seed, index)` and never on evaluation order.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{complex_eigenvalues, hermitian_eigenvalues, Complex64, Matrix, Scalar};
use crate::{CrossoverParam, Error, Result};

/// Largest accepted `‖U†U − I‖_max` for [`eigenangles_unitary`].
pub const UNITARITY_TOL: f64 = 1e-8;

/// The generator for realization `index` under master seed `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SpectrumKind {
    /// Real eigenvalues.
    Line,
    /// Eigenangles in `[−π, π)`.
    Circle,
}

/// Ordered levels of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    levels: Vec<f64>,
    kind: SpectrumKind,
}

impl Spectrum {
    /// Checks ordering and, for circle spectra, the range `[−π, π)`.
    pub fn new(levels: Vec<f64>, kind: SpectrumKind) -> Result<Self> {
        if levels.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("spectrum contains non-finite levels"));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("spectrum levels are not sorted"));
        }
        if kind == SpectrumKind::Circle && levels.iter().any(|&x| !(-PI..PI).contains(&x)) {
            return Err(Error::domain("eigenangles must lie in [-pi, pi)"));
        }
        Ok(Spectrum { levels, kind })
    }

    /// Sorts the levels first.
    pub fn from_unsorted(mut levels: Vec<f64>, kind: SpectrumKind) -> Result<Self> {
        levels.sort_by(|a, b| a.total_cmp(b));
        Self::new(levels, kind)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn into_levels(self) -> Vec<f64> {
        self.levels
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// GOE matrix: diagonal `N(0, 2v²)`, off-diagonal `N(0, v²)`.
pub fn sample_goe<R: Rng + ?Sized>(n: usize, v: f64, rng: &mut R) -> Matrix<f64> {
    let mut h = Matrix::zeros(n, n);
    let diag = v * 2.0f64.sqrt();
    for i in 0..n {
        h[(i, i)] = diag * normal(rng);
        for j in 0..i {
            let x = v * normal(rng);
            h[(i, j)] = x;
            h[(j, i)] = x;
        }
    }
    h
}

/// GUE matrix: diagonal `N(0, 2v²)`, off-diagonal real and imaginary parts
/// each `N(0, v²)`.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, v: f64, rng: &mut R) -> Matrix<Complex64> {
    let mut h = Matrix::zeros(n, n);
    let diag = v * 2.0f64.sqrt();
    for i in 0..n {
        h[(i, i)] = Complex64::new(diag * normal(rng), 0.0);
        for j in 0..i {
            let re = v * normal(rng);
            let im = v * normal(rng);
            h[(i, j)] = Complex64::new(re, im);
            h[(j, i)] = Complex64::new(re, -im);
        }
    }
    h
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::config("count must be >= 1"));
    }
    Ok(())
}

/// `H = √(1−α²) H₁ + α H₂` with `H₁` from the GOE and `H₂` from the GUE.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianCrossoverConfig {
    pub n: usize,
    pub param: CrossoverParam,
    /// Entry scale; `None` selects `v² = 1/[2(1+α²)]`, which puts the level
    /// density on the semicircle of radius `√(2N)`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub v: Option<f64>,
    pub seed: u64,
    pub count: usize,
}

impl GaussianCrossoverConfig {
    pub fn new(n: usize, param: CrossoverParam, seed: u64, count: usize) -> Self {
        GaussianCrossoverConfig {
            n,
            param,
            v: None,
            seed,
            count,
        }
    }

    pub fn scale(&self) -> f64 {
        self.v.unwrap_or_else(|| {
            let a = self.param.alpha();
            (0.5 / (1.0 + a * a)).sqrt()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config(format!("matrix dimension {} < 2", self.n)));
        }
        check_count(self.count)?;
        let v = self.scale();
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::config(format!("scale v = {v} must be positive")));
        }
        Ok(())
    }
}

/// Real-valued realization (α = 0), bitwise equal to the complex one.
fn gaussian_real(cfg: &GaussianCrossoverConfig, index: u64) -> Matrix<f64> {
    let mut rng = realization_rng(cfg.seed, index);
    sample_goe(cfg.n, cfg.scale(), &mut rng)
}

/// Draws realization `index`. The orthogonal part is skipped at `α = 1` and
/// the unitary part at `α = 0`, so the endpoints coincide draw for draw with
/// [`sample_gue`] and [`sample_goe`] on the same stream.
pub fn sample_crossover_gaussian(
    cfg: &GaussianCrossoverConfig,
    index: u64,
) -> Result<Matrix<Complex64>> {
    cfg.validate()?;
    let n = cfg.n;
    let v = cfg.scale();
    let c = cfg.param.orthogonal_weight();
    let a = cfg.param.alpha();
    let mut rng = realization_rng(cfg.seed, index);
    let mut h = Matrix::<Complex64>::zeros(n, n);
    if c > 0.0 {
        let h1 = sample_goe(n, v, &mut rng);
        h = Matrix::from_fn(n, n, |i, j| Complex64::new(c * h1[(i, j)], 0.0));
    }
    if a > 0.0 {
        let h2 = sample_gue(n, v, &mut rng);
        if c > 0.0 {
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] += h2[(i, j)] * a;
                }
            }
        } else {
            h = h2;
            h.scale(a);
        }
    }
    Ok(h)
}

/// `W = AA†` with `A = (A₁ + λA₂)/√(1+λ²)`, `A₁` real Ginibre with `N(0,1)`
/// entries and `A₂` complex Ginibre with `N(0,½)` real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WishartCrossoverConfig {
    pub n: usize,
    pub m: usize,
    pub param: CrossoverParam,
    pub seed: u64,
    pub count: usize,
}

impl WishartCrossoverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.m < self.n {
            return Err(Error::config(format!(
                "Wishart dimensions need 2 <= N <= M, got N = {}, M = {}",
                self.n, self.m
            )));
        }
        check_count(self.count)
    }
}

fn wishart_factor_real<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Matrix<f64> {
    Matrix::from_fn(n, m, |_, _| normal(rng))
}

fn wishart_factor_complex<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Matrix<Complex64> {
    let s = 0.5f64.sqrt();
    Matrix::from_fn(n, m, |_, _| {
        let re = normal(rng);
        let im = normal(rng);
        Complex64::new(s * re, s * im)
    })
}

/// Draws realization `index`; the same endpoint convention as
/// [`sample_crossover_gaussian`] applies to `A₁` and `A₂`.
pub fn sample_crossover_wishart(
    cfg: &WishartCrossoverConfig,
    index: u64,
) -> Result<Matrix<Complex64>> {
    cfg.validate()?;
    let (n, m) = (cfg.n, cfg.m);
    let c = cfg.param.orthogonal_weight();
    let a = cfg.param.alpha();
    let mut rng = realization_rng(cfg.seed, index);
    let mut f = Matrix::<Complex64>::zeros(n, m);
    if c > 0.0 {
        let a1 = wishart_factor_real(n, m, &mut rng);
        f = Matrix::from_fn(n, m, |i, j| Complex64::new(c * a1[(i, j)], 0.0));
    }
    if a > 0.0 {
        let a2 = wishart_factor_complex(n, m, &mut rng);
        for i in 0..n {
            for j in 0..m {
                f[(i, j)] += a2[(i, j)] * a;
            }
        }
    }
    Ok(f.gram())
}

fn wishart_real(cfg: &WishartCrossoverConfig, index: u64) -> Matrix<f64> {
    let mut rng = realization_rng(cfg.seed, index);
    wishart_factor_real(cfg.n, cfg.m, &mut rng).gram()
}

/// Kicked-rotor Floquet operator in the position basis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QkrConfig {
    /// Odd dimension `N = 2N′ + 1`.
    pub n: usize,
    /// Kick (stochasticity) strength.
    pub kick: f64,
    /// Time-reversal breaking shift of the momentum.
    pub gamma: f64,
    /// Parity-breaking angle; `None` selects `π/(2N)`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub theta0: Option<f64>,
    /// Each realization draws its kick uniformly from
    /// `[kick − kick_jitter, kick + kick_jitter]`.
    #[cfg_attr(feature = "serde", serde(default = "default_jitter"))]
    pub kick_jitter: f64,
    pub seed: u64,
    pub count: usize,
}

pub const QKR_DEFAULT_KICK: f64 = 20000.0;
pub const QKR_DEFAULT_JITTER: f64 = 50.0;

#[cfg(feature = "serde")]
fn default_jitter() -> f64 {
    QKR_DEFAULT_JITTER
}

impl QkrConfig {
    pub fn new(n: usize, gamma: f64, seed: u64, count: usize) -> Self {
        QkrConfig {
            n,
            kick: QKR_DEFAULT_KICK,
            gamma,
            theta0: None,
            kick_jitter: QKR_DEFAULT_JITTER,
            seed,
            count,
        }
    }

    pub fn theta0(&self) -> f64 {
        self.theta0.unwrap_or(PI / (2.0 * self.n as f64))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.n % 2 == 0 {
            return Err(Error::config(format!(
                "QKR dimension must be odd and >= 3, got {}",
                self.n
            )));
        }
        if !(self.kick > 0.0) || !self.kick.is_finite() {
            return Err(Error::config(format!(
                "kick = {} must be positive",
                self.kick
            )));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config(format!(
                "gamma = {} must be >= 0",
                self.gamma
            )));
        }
        if !(self.kick_jitter >= 0.0) || self.kick_jitter >= self.kick {
            return Err(Error::config("kick_jitter must lie in [0, kick)"));
        }
        if !self.theta0().is_finite() {
            return Err(Error::config("theta0 must be finite"));
        }
        check_count(self.count)
    }

    /// The kick strength of realization `index`.
    pub fn realization_kick(&self, index: u64) -> f64 {
        let mut rng = realization_rng(self.seed, index);
        if self.kick_jitter == 0.0 {
            self.kick
        } else {
            self.kick + self.kick_jitter * rng.random_range(-1.0..=1.0)
        }
    }
}

/// `U_mn = (1/N) e^{−iK cos(2πm/N + θ₀)} Σ_l e^{−i(l²/2 − γl + 2πl(m−n)/N)}`,
/// with `l, m, n ∈ {−N′, …, N′}`.
pub fn qkr_floquet(cfg: &QkrConfig, index: u64) -> Result<Matrix<Complex64>> {
    cfg.validate()?;
    let n = cfg.n;
    let half = (n as i64 - 1) / 2;
    let nf = n as f64;
    let kick = cfg.realization_kick(index);
    let theta0 = cfg.theta0();
    // The sum depends on m − n only; tabulate it for d ∈ [−2N′, 2N′].
    let sums: Vec<Complex64> = (-2 * half..=2 * half)
        .map(|d| {
            (-half..=half)
                .map(|l| {
                    let lf = l as f64;
                    let phase = 0.5 * lf * lf - cfg.gamma * lf
                        + 2.0 * PI * ((l * d).rem_euclid(n as i64)) as f64 / nf;
                    Complex64::from_polar(1.0, -phase)
                })
                .sum()
        })
        .collect();
    let mut u = Matrix::zeros(n, n);
    for (i, m) in (-half..=half).enumerate() {
        let kick_phase =
            Complex64::from_polar(1.0 / nf, -kick * (2.0 * PI * m as f64 / nf + theta0).cos());
        for (j, k) in (-half..=half).enumerate() {
            u[(i, j)] = kick_phase * sums[(m - k + 2 * half) as usize];
        }
    }
    Ok(u)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues_hermitian<T: Scalar>(h: &Matrix<T>) -> Result<Spectrum> {
    let levels = hermitian_eigenvalues(h)?;
    Spectrum::new(levels, SpectrumKind::Line)
}

/// Ascending eigenangles in `[−π, π)` of a unitary matrix.
pub fn eigenangles_unitary(u: &Matrix<Complex64>) -> Result<Spectrum> {
    let defect = u.unitarity_defect();
    if !(defect <= UNITARITY_TOL) {
        return Err(Error::Matrix(format!("unitarity defect {defect:e}")));
    }
    let eig = complex_eigenvalues(u)?;
    let mut angles = Vec::with_capacity(eig.len());
    for z in eig {
        let modulus = z.norm();
        if !((modulus - 1.0).abs() <= UNITARITY_TOL) {
            return Err(Error::Matrix(format!(
                "eigenvalue modulus {modulus} is not 1"
            )));
        }
        let phi = z.im.atan2(z.re);
        angles.push(if phi >= PI { -PI } else { phi });
    }
    Spectrum::from_unsorted(angles, SpectrumKind::Circle)
}

/// One of the three model families together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "ensemble", rename_all = "kebab-case"))]
pub enum Ensemble {
    GaussCrossover(GaussianCrossoverConfig),
    WishartCrossover(WishartCrossoverConfig),
    Qkr(QkrConfig),
}

impl Ensemble {
    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::GaussCrossover(_) => "gauss-crossover",
            Ensemble::WishartCrossover(_) => "wishart-crossover",
            Ensemble::Qkr(_) => "qkr",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Ensemble::GaussCrossover(c) => c.validate(),
            Ensemble::WishartCrossover(c) => c.validate(),
            Ensemble::Qkr(c) => c.validate(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Ensemble::GaussCrossover(c) => c.n,
            Ensemble::WishartCrossover(c) => c.n,
            Ensemble::Qkr(c) => c.n,
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Ensemble::GaussCrossover(c) => c.count,
            Ensemble::WishartCrossover(c) => c.count,
            Ensemble::Qkr(c) => c.count,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Ensemble::GaussCrossover(c) => c.seed,
            Ensemble::WishartCrossover(c) => c.seed,
            Ensemble::Qkr(c) => c.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            Ensemble::GaussCrossover(c) => c.seed = seed,
            Ensemble::WishartCrossover(c) => c.seed = seed,
            Ensemble::Qkr(c) => c.seed = seed,
        }
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        match &mut self {
            Ensemble::GaussCrossover(c) => c.count = count,
            Ensemble::WishartCrossover(c) => c.count = count,
            Ensemble::Qkr(c) => c.count = count,
        }
        self
    }

    /// Spectrum of realization `index`. Purely real realizations are
    /// diagonalized on the real path.
    pub fn spectrum(&self, index: u64) -> Result<Spectrum> {
        match self {
            Ensemble::GaussCrossover(c) if c.param.alpha() == 0.0 => {
                c.validate()?;
                eigenvalues_hermitian(&gaussian_real(c, index))
            }
            Ensemble::GaussCrossover(c) => {
                eigenvalues_hermitian(&sample_crossover_gaussian(c, index)?)
            }
            Ensemble::WishartCrossover(c) if c.param.alpha() == 0.0 => {
                c.validate()?;
                eigenvalues_hermitian(&wishart_real(c, index))
            }
            Ensemble::WishartCrossover(c) => {
                eigenvalues_hermitian(&sample_crossover_wishart(c, index)?)
            }
            Ensemble::Qkr(c) => eigenangles_unitary(&qkr_floquet(c, index)?),
        }
    }
}
