//! Crossover sweeps: one pooled sample per `(N, parameter)` point, reduced to
//! a flat report row.

use rand::Rng;
use serde::{Deserialize, Serialize};

use ratiocross_core::analysis::{
    fit_lambda_eff, kld_against, mean_of_sample, FitMethod, KldGrid, Reference, ScalingLaw,
};
use ratiocross_core::ensembles::{
    realization_rng, Ensemble, GaussianCrossoverConfig, QkrConfig, WishartCrossoverConfig,
    QKR_DEFAULT_JITTER, QKR_DEFAULT_KICK,
};
use ratiocross_core::spectra::{rtilde_of, CircleBoundary, SliceMode};
use ratiocross_core::CrossoverParam;

use crate::error::{CliError, Result};
use crate::runner::{pooled_ratios, ratios_per_realization};

pub const DEFAULT_TARGET_SAMPLES: usize = 150_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GaussCrossover,
    WishartCrossover,
    Qkr,
}

impl Family {
    pub fn default_law(self) -> ScalingLaw {
        match self {
            Family::Qkr => ScalingLaw::NThreeHalves,
            _ => ScalingLaw::SqrtN,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::GaussCrossover => "gauss-crossover",
            Family::WishartCrossover => "wishart-crossover",
            Family::Qkr => "qkr",
        }
    }
}

/// A point given either by its raw parameter (λ, or γ for the rotor) or by
/// the scaled one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled_param: Option<f64>,
}

/// Cartesian product of dimensions and parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_param: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled_param: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub ensemble: Family,
    #[serde(default)]
    pub law: Option<ScalingLaw>,
    #[serde(default)]
    pub points: Vec<SweepPoint>,
    #[serde(default)]
    pub grid: Option<SweepGrid>,
    #[serde(default = "default_target")]
    pub target_samples: usize,
    #[serde(default = "default_slice")]
    pub slice: SliceMode,
    #[serde(default = "yes")]
    pub wrap: bool,
    #[serde(default)]
    pub method: FitMethod,
    #[serde(default = "default_reference")]
    pub reference: Reference,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Wishart `M/N`.
    #[serde(default = "one")]
    pub aspect: f64,
    #[serde(default)]
    pub v: Option<f64>,
    #[serde(default = "default_kick")]
    pub kick: f64,
    #[serde(default = "default_jitter")]
    pub kick_jitter: f64,
    #[serde(default)]
    pub theta0: Option<f64>,
}

fn default_target() -> usize {
    DEFAULT_TARGET_SAMPLES
}
fn default_slice() -> SliceMode {
    SliceMode::Full
}
fn yes() -> bool {
    true
}
fn default_reference() -> Reference {
    Reference::Gaussian
}
fn one() -> f64 {
    1.0
}
fn default_kick() -> f64 {
    QKR_DEFAULT_KICK
}
fn default_jitter() -> f64 {
    QKR_DEFAULT_JITTER
}

/// A fully resolved point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedPoint {
    pub n: usize,
    pub raw_param: f64,
    pub scaled_param: f64,
    pub seed: u64,
    pub ensemble: Ensemble,
}

/// One report line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub ensemble: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub raw_param: f64,
    pub scaled_param: f64,
    pub lambda_eff: f64,
    pub mean_r: f64,
    pub se_r: f64,
    pub mean_rtilde: f64,
    pub se_rtilde: f64,
    pub d_goe: f64,
    pub d_gue: f64,
    pub d_goe_tilde: f64,
    pub d_gue_tilde: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Seed of point `i`, drawn from a stream far above the realization indices.
pub fn point_seed(master: u64, i: usize) -> u64 {
    realization_rng(master, (1u64 << 63) | i as u64).random()
}

impl SweepSpec {
    pub fn law(&self) -> ScalingLaw {
        self.law.unwrap_or_else(|| self.ensemble.default_law())
    }

    pub fn boundary(&self) -> CircleBoundary {
        if self.wrap {
            CircleBoundary::Wrap
        } else {
            CircleBoundary::NoWrap
        }
    }

    fn resolve(&self, p: &SweepPoint) -> Result<(f64, f64)> {
        let law = self.law();
        match (p.raw_param, p.scaled_param) {
            (Some(raw), None) => Ok((raw, law.apply(p.n, raw))),
            (None, Some(scaled)) => Ok((law.invert(p.n, scaled), scaled)),
            _ => Err(CliError::config(format!(
                "point N = {} needs exactly one of raw_param and scaled_param",
                p.n
            ))),
        }
    }

    fn all_points(&self) -> Result<Vec<SweepPoint>> {
        let mut pts = self.points.clone();
        if let Some(g) = &self.grid {
            let (raw, scaled) = match (&g.raw_param, &g.scaled_param) {
                (Some(v), None) => (Some(v), None),
                (None, Some(v)) => (None, Some(v)),
                _ => {
                    return Err(CliError::config(
                        "grid needs exactly one of raw_param and scaled_param",
                    ))
                }
            };
            for &n in &g.n {
                for &x in raw.or(scaled).expect("one list is set") {
                    pts.push(SweepPoint {
                        n,
                        raw_param: raw.map(|_| x),
                        scaled_param: scaled.map(|_| x),
                    });
                }
            }
        }
        if pts.is_empty() {
            return Err(CliError::config("sweep has no points"));
        }
        Ok(pts)
    }

    fn ensemble_at(&self, n: usize, raw: f64, seed: u64, count: usize) -> Result<Ensemble> {
        let ens = match self.ensemble {
            Family::GaussCrossover => Ensemble::GaussCrossover(GaussianCrossoverConfig {
                n,
                param: CrossoverParam::from_lambda(raw)?,
                v: self.v,
                seed,
                count,
            }),
            Family::WishartCrossover => {
                if !(self.aspect >= 1.0) || !self.aspect.is_finite() {
                    return Err(CliError::config(format!(
                        "aspect {} must be >= 1",
                        self.aspect
                    )));
                }
                Ensemble::WishartCrossover(WishartCrossoverConfig {
                    n,
                    m: (n as f64 * self.aspect).round() as usize,
                    param: CrossoverParam::from_lambda(raw)?,
                    seed,
                    count,
                })
            }
            Family::Qkr => Ensemble::Qkr(QkrConfig {
                n,
                kick: self.kick,
                gamma: raw,
                theta0: self.theta0,
                kick_jitter: self.kick_jitter,
                seed,
                count,
            }),
        };
        ens.validate()?;
        Ok(ens)
    }

    /// Validates the whole sweep before any sampling starts.
    pub fn plan(&self, master_seed: u64) -> Result<Vec<PlannedPoint>> {
        if self.target_samples == 0 {
            return Err(CliError::config("target_samples must be positive"));
        }
        let circle = self.ensemble == Family::Qkr;
        self.all_points()?
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (raw, scaled) = self.resolve(p)?;
                let per = ratios_per_realization(p.n, circle, self.slice, self.boundary());
                if per == 0 {
                    return Err(CliError::config(format!(
                        "slice {:?} yields no ratios at N = {}",
                        self.slice, p.n
                    )));
                }
                let count = self.target_samples.div_ceil(per);
                let seed = point_seed(master_seed, i);
                Ok(PlannedPoint {
                    n: p.n,
                    raw_param: raw,
                    scaled_param: scaled,
                    seed,
                    ensemble: self.ensemble_at(p.n, raw, seed, count)?,
                })
            })
            .collect()
    }
}

/// Pools, fits and compares one planned point.
pub fn evaluate_point(spec: &SweepSpec, p: &PlannedPoint) -> Result<ReportRow> {
    let rs = pooled_ratios(&p.ensemble, spec.slice, spec.boundary())?;
    if rs.degenerate_pairs > 0 {
        log::warn!(
            "N = {}: {} degenerate spacing pairs dropped",
            p.n,
            rs.degenerate_pairs
        );
    }
    let mr = mean_of_sample(rs.values())?;
    let mt = mean_of_sample(rtilde_of(&rs).values())?;
    let fit = fit_lambda_eff(&rs, spec.method)?;
    if !fit.converged {
        log::warn!("N = {}: fit did not converge", p.n);
    }
    let kld = kld_against(&rs, spec.reference, KldGrid::R, KldGrid::RTILDE)?;
    Ok(ReportRow {
        ensemble: spec.ensemble.name().to_string(),
        n: p.n,
        raw_param: p.raw_param,
        scaled_param: p.scaled_param,
        lambda_eff: fit.lambda_eff,
        mean_r: mr.mean,
        se_r: mr.se,
        mean_rtilde: mt.mean,
        se_rtilde: mt.se,
        d_goe: kld.d_goe,
        d_gue: kld.d_gue,
        d_goe_tilde: kld.d_goe_tilde,
        d_gue_tilde: kld.d_gue_tilde,
        n_samples: rs.len(),
        seed: p.seed,
    })
}

/// Rows in the order of the sweep points.
pub fn crossover_report(spec: &SweepSpec, master_seed: u64) -> Result<Vec<ReportRow>> {
    let plan = spec.plan(master_seed)?;
    plan.iter()
        .map(|p| {
            log::info!(
                "{} N = {} raw = {} ({} realizations)",
                spec.ensemble.name(),
                p.n,
                p.raw_param,
                p.ensemble.count()
            );
            evaluate_point(spec, p)
        })
        .collect()
}
