//! Command-line surface. Every subcommand resolves its options as
//! flags > `--config` JSON file > defaults and echoes the result in its output.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use ratiocross_core::analysis::{
    fit_lambda_eff, kld_against, mean_of_sample, FitMethod, KldGrid, Reference,
};
use ratiocross_core::analytic::{
    laguerre3_pdf, laguerre3_rtilde_pdf, mean_r, mean_rtilde, ratio_pdf, rtilde_pdf, DensityCurve,
};
use ratiocross_core::ensembles::{
    Ensemble, GaussianCrossoverConfig, QkrConfig, Spectrum, WishartCrossoverConfig,
    QKR_DEFAULT_JITTER, QKR_DEFAULT_KICK,
};
use ratiocross_core::spectra::{
    default_histogram, rtilde_of, sliced_ratios, CircleBoundary, RatioKind, RatioSample, SliceMode,
};
use ratiocross_core::CrossoverParam;

use crate::error::{CliError, Result};
use crate::io::{
    csv_bytes, emit, histogram_rows, json_bytes, level_rows, read_levels, read_ratio_csv,
    Provenance, ValueRow,
};
use crate::report::{crossover_report, Family, SweepSpec};
use crate::runner::{pooled_ratios, spectra, with_threads};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_COUNT: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "ratiocross",
    version,
    about = "Spacing-ratio statistics across the GOE-GUE crossover"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate closed-form densities and averages.
    AnalyticTable(AnalyticTableArgs),
    /// Sample an ensemble and write ratios and histograms.
    Simulate(SimulateArgs),
    /// Fit the effective crossover parameter to a ratio sample.
    Fit(FitArgs),
    /// Run a crossover sweep from a JSON spec.
    Scan(ScanArgs),
    /// Symmetrized KL divergences of a sample or between two densities.
    Kld(KldArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::AnalyticTable(_) => "analytic-table",
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Scan(_) => "scan",
            Command::Kld(_) => "kld",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Table {
    PdfR,
    PdfRtilde,
    Means,
    Laguerre3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Mle,
    HistogramLsq,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mle => FitMethod::Mle,
            MethodArg::HistogramLsq => FitMethod::HistogramLsq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceArg {
    Gaussian,
    Laguerre,
}

impl From<ReferenceArg> for Reference {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::Gaussian => Reference::Gaussian,
            ReferenceArg::Laguerre => Reference::Laguerre,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CommonArgs {
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (directory for `simulate`); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file with option values, keyed by option name with underscores.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleArgs {
    #[arg(long, value_enum)]
    pub ensemble: Option<Family>,
    /// Matrix dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Wishart column count (defaults to N).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, conflicts_with = "lambda")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Kicked-rotor time-reversal breaking parameter.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kick: Option<f64>,
    #[arg(long)]
    pub kick_jitter: Option<f64>,
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Gaussian entry scale.
    #[arg(long)]
    pub v: Option<f64>,
    /// Number of realizations.
    #[arg(long)]
    pub count: Option<usize>,
    /// `full`, `bulk:K` or `edges:K`.
    #[arg(long)]
    pub slice: Option<String>,
    /// Drop the wraparound spacing of eigenangle spectra.
    #[arg(long)]
    pub no_wrap: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyticTableArgs {
    #[arg(long, value_enum)]
    pub which: Option<Table>,
    #[arg(long, conflicts_with = "lambda")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `lo:hi:step` grid in r, r̃ or α.
    #[arg(long)]
    pub grid: Option<String>,
    /// Explicit α values for the means table.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Laguerre table: 1 (orthogonal) or 2 (unitary).
    #[arg(long)]
    pub beta: Option<u8>,
    /// Laguerre table in r̃ instead of r.
    #[arg(long)]
    pub tilde: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Also write every spectrum.
    #[arg(long)]
    pub dump_spectra: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FitArgs {
    /// Ratio CSV with a `value` column.
    #[arg(long, conflicts_with = "levels")]
    pub input: Option<PathBuf>,
    /// Plain-text level list.
    #[arg(long)]
    pub levels: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanArgs {
    /// JSON sweep specification.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the pooled sample target of the spec.
    #[arg(long)]
    pub target_samples: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct KldArgs {
    #[arg(long, conflicts_with_all = ["levels", "between"])]
    pub input: Option<PathBuf>,
    #[arg(long, conflicts_with = "between")]
    pub levels: Option<PathBuf>,
    /// Compare the analytic densities at two values of α.
    #[arg(long, num_args = 2, value_names = ["ALPHA1", "ALPHA2"])]
    pub between: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceArg>,
    /// `lo:hi:width` grid for r.
    #[arg(long)]
    pub r_grid: Option<String>,
    /// `lo:hi:width` grid for r̃.
    #[arg(long)]
    pub rtilde_grid: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

/// Parses `lo:hi:step`.
pub fn parse_grid(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::config(format!("grid {s:?} is not lo:hi:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    Ok((v[0], v[1], v[2]))
}

pub fn parse_slice(s: &str) -> Result<SliceMode> {
    let bad = || CliError::config(format!("slice {s:?} is not full, bulk:K or edges:K"));
    if s == "full" {
        return Ok(SliceMode::Full);
    }
    let (kind, k) = s.split_once(':').ok_or_else(bad)?;
    let k: usize = k.parse().map_err(|_| bad())?;
    match kind {
        "bulk" => Ok(SliceMode::Bulk(k)),
        "edges" => Ok(SliceMode::Edges(k)),
        _ => Err(bad()),
    }
}

fn param_of(alpha: Option<f64>, lambda: Option<f64>) -> Result<CrossoverParam> {
    Ok(match (alpha, lambda) {
        (Some(_), Some(_)) => return Err(CliError::config("give alpha or lambda, not both")),
        (Some(a), None) => CrossoverParam::from_alpha(a)?,
        (None, Some(l)) => CrossoverParam::from_lambda(l)?,
        (None, None) => CrossoverParam::GOE,
    })
}

/// Ensemble settings after defaults, echoed in outputs.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedEnsemble {
    #[serde(flatten)]
    pub ensemble: Ensemble,
    pub slice: SliceMode,
    pub wrap: bool,
}

impl ResolvedEnsemble {
    pub fn boundary(&self) -> CircleBoundary {
        if self.wrap {
            CircleBoundary::Wrap
        } else {
            CircleBoundary::NoWrap
        }
    }
}

impl EnsembleArgs {
    /// Whether any option other than slicing is set.
    fn has_model_options(&self) -> bool {
        let a = self;
        a.ensemble.is_some()
            || a.n.is_some()
            || a.m.is_some()
            || a.alpha.is_some()
            || a.lambda.is_some()
            || a.gamma.is_some()
            || a.kick.is_some()
            || a.kick_jitter.is_some()
            || a.theta0.is_some()
            || a.v.is_some()
            || a.count.is_some()
    }

    fn slicing(&self) -> Result<(SliceMode, bool)> {
        let slice = match &self.slice {
            Some(s) => parse_slice(s)?,
            None => SliceMode::Full,
        };
        Ok((slice, !self.no_wrap))
    }

    pub fn resolve(&self, seed: u64) -> Result<ResolvedEnsemble> {
        let family = self.ensemble.unwrap_or(Family::GaussCrossover);
        let count = self.count.unwrap_or(DEFAULT_COUNT);
        let unused = |name: &str, set: bool| {
            if set {
                Err(CliError::config(format!(
                    "{name} does not apply to {}",
                    family.name()
                )))
            } else {
                Ok(())
            }
        };
        if family != Family::Qkr {
            unused("gamma", self.gamma.is_some())?;
            unused("kick", self.kick.is_some())?;
            unused("kick_jitter", self.kick_jitter.is_some())?;
            unused("theta0", self.theta0.is_some())?;
        }
        if family != Family::WishartCrossover {
            unused("m", self.m.is_some())?;
        }
        if family != Family::GaussCrossover {
            unused("v", self.v.is_some())?;
        }
        let ensemble = match family {
            Family::GaussCrossover => Ensemble::GaussCrossover(GaussianCrossoverConfig {
                n: self.n.unwrap_or(3),
                param: param_of(self.alpha, self.lambda)?,
                v: self.v,
                seed,
                count,
            }),
            Family::WishartCrossover => {
                let n = self.n.unwrap_or(3);
                Ensemble::WishartCrossover(WishartCrossoverConfig {
                    n,
                    m: self.m.unwrap_or(n),
                    param: param_of(self.alpha, self.lambda)?,
                    seed,
                    count,
                })
            }
            Family::Qkr => {
                unused("alpha", self.alpha.is_some())?;
                unused("lambda", self.lambda.is_some())?;
                Ensemble::Qkr(QkrConfig {
                    n: self.n.unwrap_or(51),
                    kick: self.kick.unwrap_or(QKR_DEFAULT_KICK),
                    gamma: self.gamma.unwrap_or(0.0),
                    theta0: self.theta0,
                    kick_jitter: self.kick_jitter.unwrap_or(QKR_DEFAULT_JITTER),
                    seed,
                    count,
                })
            }
        };
        ensemble.validate()?;
        let (slice, wrap) = self.slicing()?;
        Ok(ResolvedEnsemble {
            ensemble,
            slice,
            wrap,
        })
    }
}

fn read_config(path: &Path, command: &str) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::config(format!(
            "{}: expected a JSON object",
            path.display()
        )));
    };
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(command).expect("known subcommand");
    let known: BTreeSet<&str> = sub
        .get_arguments()
        .map(|a| a.get_id().as_str())
        .filter(|id| *id != "config")
        .collect();
    if let Some(k) = map.keys().find(|k| !known.contains(k.as_str())) {
        return Err(CliError::config(format!(
            "{}: unknown option {k:?} for {command}",
            path.display()
        )));
    }
    Ok(map)
}

/// Flags that were given override the file; unset flags fall through.
pub fn merge_config<T: Serialize + DeserializeOwned>(
    flags: &T,
    file: Map<String, Value>,
) -> Result<T> {
    let mut merged = file;
    if let Value::Object(f) = serde_json::to_value(flags)? {
        for (k, v) in f {
            if !(v.is_null() || v == Value::Bool(false)) {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(e.to_string()))
}

fn resolve_args<T>(flags: &T, config: Option<&Path>, command: &str) -> Result<T>
where
    T: Serialize + DeserializeOwned + Clone,
{
    match config {
        Some(p) => merge_config(flags, read_config(p, command)?),
        None => Ok(flags.clone()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let name = cli.command.name();
    match &cli.command {
        Command::AnalyticTable(a) => {
            let a = resolve_args(a, a.common.config.as_deref(), name)?;
            with_threads(a.common.threads, || analytic_table(&a))?
        }
        Command::Simulate(a) => {
            let a = resolve_args(a, a.common.config.as_deref(), name)?;
            with_threads(a.common.threads, || simulate(&a))?
        }
        Command::Fit(a) => {
            let a = resolve_args(a, a.common.config.as_deref(), name)?;
            with_threads(a.common.threads, || fit(&a))?
        }
        Command::Scan(a) => {
            let a = resolve_args(a, a.common.config.as_deref(), name)?;
            with_threads(a.common.threads, || scan(&a))?
        }
        Command::Kld(a) => {
            let a = resolve_args(a, a.common.config.as_deref(), name)?;
            with_threads(a.common.threads, || kld(&a))?
        }
    }
}

fn write_payload<T: Serialize>(
    out: Option<&Path>,
    format: Format,
    prov: &Provenance,
    rows: &[T],
) -> Result<()> {
    let bytes = match format {
        Format::Csv => csv_bytes(prov, rows)?,
        Format::Json => json_bytes(prov, &rows)?,
    };
    emit(out, &bytes)
}

#[derive(Serialize)]
struct CurveRow {
    r: f64,
    pdf: f64,
}

#[derive(Serialize)]
struct TildeRow {
    rtilde: f64,
    pdf: f64,
}

#[derive(Serialize)]
struct MeansRow {
    alpha: f64,
    lambda: f64,
    mean_r: f64,
    mean_rtilde: f64,
}

fn analytic_table(a: &AnalyticTableArgs) -> Result<()> {
    let which = a.which.unwrap_or(Table::PdfR);
    let format = a.common.format.unwrap_or(Format::Csv);
    let grid = |default: &str| -> Result<Vec<f64>> {
        let (lo, hi, step) = parse_grid(a.grid.as_deref().unwrap_or(default))?;
        Ok(DensityCurve::uniform_grid(lo, hi, step)?)
    };
    let out = a.common.out.as_deref();
    let mut config = json!({ "which": which, "format": format });
    match which {
        Table::PdfR | Table::PdfRtilde => {
            if a.alphas.is_some() || a.beta.is_some() || a.tilde {
                return Err(CliError::config(
                    "alphas, beta and tilde apply to other tables",
                ));
            }
            let param = param_of(a.alpha, a.lambda)?;
            config["param"] = serde_json::to_value(param)?;
            if which == Table::PdfR {
                let g = grid("0:5:0.01")?;
                config["grid"] = json!(g_desc(&g));
                let prov = Provenance::new("analytic-table", None, config);
                let rows = g
                    .iter()
                    .map(|&r| {
                        Ok(CurveRow {
                            r,
                            pdf: ratio_pdf(r, param)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                write_payload(out, format, &prov, &rows)
            } else {
                let g = grid("0:1:0.002")?;
                config["grid"] = json!(g_desc(&g));
                let prov = Provenance::new("analytic-table", None, config);
                let rows = g
                    .iter()
                    .map(|&x| {
                        Ok(TildeRow {
                            rtilde: x,
                            pdf: rtilde_pdf(x, param)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                write_payload(out, format, &prov, &rows)
            }
        }
        Table::Means => {
            if a.alpha.is_some() || a.lambda.is_some() || a.beta.is_some() || a.tilde {
                return Err(CliError::config("the means table takes --alphas or --grid"));
            }
            let alphas = match &a.alphas {
                Some(v) if a.grid.is_some() => {
                    let _ = v;
                    return Err(CliError::config("give alphas or grid, not both"));
                }
                Some(v) => v.clone(),
                None => grid("0:1:0.01")?,
            };
            config["alphas"] = json!(alphas);
            let prov = Provenance::new("analytic-table", None, config);
            let rows = alphas
                .iter()
                .map(|&al| {
                    let p = CrossoverParam::from_alpha(al)?;
                    Ok(MeansRow {
                        alpha: p.alpha(),
                        lambda: p.lambda(),
                        mean_r: mean_r(p),
                        mean_rtilde: mean_rtilde(p),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_payload(out, format, &prov, &rows)
        }
        Table::Laguerre3 => {
            if a.alpha.is_some() || a.lambda.is_some() || a.alphas.is_some() {
                return Err(CliError::config("the Laguerre table takes --beta"));
            }
            let beta = a.beta.unwrap_or(1);
            config["beta"] = json!(beta);
            config["tilde"] = json!(a.tilde);
            if a.tilde {
                let g = grid("0:1:0.002")?;
                config["grid"] = json!(g_desc(&g));
                let prov = Provenance::new("analytic-table", None, config);
                let rows = g
                    .iter()
                    .map(|&x| {
                        Ok(TildeRow {
                            rtilde: x,
                            pdf: laguerre3_rtilde_pdf(x, beta)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                write_payload(out, format, &prov, &rows)
            } else {
                let g = grid("0:5:0.01")?;
                config["grid"] = json!(g_desc(&g));
                let prov = Provenance::new("analytic-table", None, config);
                let rows = g
                    .iter()
                    .map(|&r| {
                        Ok(CurveRow {
                            r,
                            pdf: laguerre3_pdf(r, beta)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                write_payload(out, format, &prov, &rows)
            }
        }
    }
}

fn g_desc(g: &[f64]) -> Value {
    json!({
        "first": g.first(),
        "last": g.last(),
        "points": g.len(),
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    n_realizations: usize,
    n_ratios: usize,
    degenerate_pairs: u64,
    r_out_of_domain: u64,
    mean_r: ratiocross_core::analysis::MeanEstimate,
    mean_rtilde: ratiocross_core::analysis::MeanEstimate,
    kld: ratiocross_core::analysis::KldResult,
}

fn ratios_of(
    spectra: &[Spectrum],
    slice: SliceMode,
    boundary: CircleBoundary,
) -> Result<RatioSample> {
    let mut out = RatioSample::empty(RatioKind::R);
    for s in spectra {
        out.extend(sliced_ratios(s, slice, boundary)?)?;
    }
    Ok(out)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let seed = a.common.seed.unwrap_or(DEFAULT_SEED);
    let format = a.common.format.unwrap_or(Format::Csv);
    let ens = a.ensemble.resolve(seed)?;
    let mut config = serde_json::to_value(&ens)?;
    config["format"] = json!(format);
    config["dump_spectra"] = json!(a.dump_spectra);
    let prov = Provenance::new("simulate", Some(seed), config);

    let (rs, levels) = if a.dump_spectra {
        let sp = spectra(&ens.ensemble)?;
        (ratios_of(&sp, ens.slice, ens.boundary())?, Some(sp))
    } else {
        (
            pooled_ratios(&ens.ensemble, ens.slice, ens.boundary())?,
            None,
        )
    };
    if rs.is_empty() {
        return Err(CliError::config("the configuration produced no ratios"));
    }
    let rt = rtilde_of(&rs);
    let h_r = default_histogram(&rs)?;
    let h_t = default_histogram(&rt)?;
    let summary = SimulateSummary {
        n_realizations: ens.ensemble.count(),
        n_ratios: rs.len(),
        degenerate_pairs: rs.degenerate_pairs as u64,
        r_out_of_domain: h_r.out_of_domain,
        mean_r: mean_of_sample(rs.values())?,
        mean_rtilde: mean_of_sample(rt.values())?,
        kld: kld_against(&rs, Reference::Gaussian, KldGrid::R, KldGrid::RTILDE)?,
    };

    let dir = a.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let file = |stem: &str| dir.join(format!("{stem}.{ext}"));
    let values: Vec<ValueRow> = rs
        .values()
        .iter()
        .map(|&value| ValueRow { value })
        .collect();
    write_payload(Some(&file("ratios")), format, &prov, &values)?;
    write_payload(
        Some(&file("histogram_r")),
        format,
        &prov,
        &histogram_rows(&h_r),
    )?;
    write_payload(
        Some(&file("histogram_rtilde")),
        format,
        &prov,
        &histogram_rows(&h_t),
    )?;
    if let Some(sp) = levels {
        write_payload(Some(&file("spectra")), format, &prov, &level_rows(&sp))?;
    }
    emit(
        Some(&dir.join("summary.json")),
        &json_bytes(&prov, &summary)?,
    )
}

/// Where a fitted or compared sample comes from.
enum Source {
    Ratios(PathBuf),
    Levels(PathBuf),
    Simulated(ResolvedEnsemble),
}

fn sample_source(
    input: &Option<PathBuf>,
    levels: &Option<PathBuf>,
    ens: &EnsembleArgs,
    seed: Option<u64>,
) -> Result<Source> {
    match (input, levels) {
        (Some(p), _) => {
            if ens.has_model_options() || ens.slice.is_some() || ens.no_wrap || seed.is_some() {
                return Err(CliError::config(
                    "ensemble and seed options do not apply to --input",
                ));
            }
            Ok(Source::Ratios(p.clone()))
        }
        (None, Some(p)) => {
            if ens.has_model_options() || seed.is_some() {
                return Err(CliError::config("only slice and no_wrap apply to --levels"));
            }
            Ok(Source::Levels(p.clone()))
        }
        (None, None) => Ok(Source::Simulated(
            ens.resolve(seed.unwrap_or(DEFAULT_SEED))?,
        )),
    }
}

fn load_sample(src: &Source, ens: &EnsembleArgs) -> Result<(RatioSample, Value, Option<u64>)> {
    match src {
        Source::Ratios(p) => Ok((read_ratio_csv(p)?, json!({ "input": p }), None)),
        Source::Levels(p) => {
            let (slice, wrap) = ens.slicing()?;
            let boundary = if wrap {
                CircleBoundary::Wrap
            } else {
                CircleBoundary::NoWrap
            };
            let sp = read_levels(p)?;
            let rs = ratios_of(&sp, slice, boundary)?;
            Ok((
                rs,
                json!({ "levels": p, "slice": slice, "wrap": wrap }),
                None,
            ))
        }
        Source::Simulated(e) => {
            let rs = pooled_ratios(&e.ensemble, e.slice, e.boundary())?;
            Ok((rs, serde_json::to_value(e)?, Some(e.ensemble.seed())))
        }
    }
}

#[derive(Serialize)]
struct FitRow {
    lambda_eff: f64,
    alpha_eff: f64,
    objective_value: f64,
    method: FitMethod,
    converged: bool,
    iterations: usize,
    n_samples: usize,
    degenerate_pairs: usize,
    mean_r: f64,
    se_r: f64,
    mean_rtilde: f64,
    se_rtilde: f64,
}

fn fit(a: &FitArgs) -> Result<()> {
    let format = a.common.format.unwrap_or(Format::Json);
    let method: FitMethod = a.method.unwrap_or(MethodArg::Mle).into();
    let src = sample_source(&a.input, &a.levels, &a.ensemble, a.common.seed)?;
    let (rs, mut config, seed) = load_sample(&src, &a.ensemble)?;
    config["method"] = serde_json::to_value(method)?;
    config["format"] = json!(format);
    let prov = Provenance::new("fit", seed, config);
    let f = fit_lambda_eff(&rs, method)?;
    let mr = mean_of_sample(rs.values())?;
    let mt = mean_of_sample(rtilde_of(&rs).values())?;
    let row = FitRow {
        lambda_eff: f.lambda_eff,
        alpha_eff: CrossoverParam::from_lambda(f.lambda_eff)?.alpha(),
        objective_value: f.objective_value,
        method: f.method,
        converged: f.converged,
        iterations: f.iterations,
        n_samples: f.n_samples,
        degenerate_pairs: rs.degenerate_pairs,
        mean_r: mr.mean,
        se_r: mr.se,
        mean_rtilde: mt.mean,
        se_rtilde: mt.se,
    };
    if !f.converged {
        return Err(CliError::Core(ratiocross_core::Error::Convergence(
            format!("fit stopped after {} iterations", f.iterations),
        )));
    }
    write_payload(a.common.out.as_deref(), format, &prov, &[row])
}

fn scan(a: &ScanArgs) -> Result<()> {
    let path = a
        .spec
        .as_deref()
        .ok_or_else(|| CliError::config("scan needs --spec"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut spec: SweepSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    if let Some(t) = a.target_samples {
        spec.target_samples = t;
    }
    let seed = a.common.seed.or(spec.seed).unwrap_or(DEFAULT_SEED);
    spec.seed = Some(seed);
    let format = a.common.format.unwrap_or(Format::Json);
    spec.plan(seed)?;
    let rows = crossover_report(&spec, seed)?;
    let mut config = serde_json::to_value(&spec)?;
    config["format"] = json!(format);
    let prov = Provenance::new("scan", Some(seed), config);
    write_payload(a.common.out.as_deref(), format, &prov, &rows)
}

fn kld_grid(s: &Option<String>, default: KldGrid) -> Result<KldGrid> {
    Ok(match s {
        Some(g) => {
            let (lo, hi, bin_width) = parse_grid(g)?;
            let grid = KldGrid { lo, hi, bin_width };
            grid.bins()?;
            grid
        }
        None => default,
    })
}

#[derive(Serialize)]
struct AnalyticKld {
    alpha1: f64,
    alpha2: f64,
    d_r: f64,
    d_rtilde: f64,
}

#[derive(Serialize)]
struct SampleKld {
    n_samples: usize,
    d_goe: f64,
    d_gue: f64,
    d_goe_tilde: f64,
    d_gue_tilde: f64,
}

fn kld(a: &KldArgs) -> Result<()> {
    let format = a.common.format.unwrap_or(Format::Json);
    let r_grid = kld_grid(&a.r_grid, KldGrid::R)?;
    let t_grid = kld_grid(&a.rtilde_grid, KldGrid::RTILDE)?;
    let grids = json!({ "r_grid": r_grid, "rtilde_grid": t_grid, "format": format });
    if let Some(pair) = &a.between {
        if a.input.is_some()
            || a.levels.is_some()
            || a.ensemble.has_model_options()
            || a.reference.is_some()
        {
            return Err(CliError::config("--between compares analytic curves only"));
        }
        let p1 = CrossoverParam::from_alpha(pair[0])?;
        let p2 = CrossoverParam::from_alpha(pair[1])?;
        let d_r = r_grid.kld_curves(|r| ratio_pdf(r, p1), |r| ratio_pdf(r, p2))?;
        let d_rtilde = t_grid.kld_curves(|x| rtilde_pdf(x, p1), |x| rtilde_pdf(x, p2))?;
        let mut config = grids;
        config["between"] = json!(pair);
        let prov = Provenance::new("kld", None, config);
        let row = AnalyticKld {
            alpha1: pair[0],
            alpha2: pair[1],
            d_r,
            d_rtilde,
        };
        return write_payload(a.common.out.as_deref(), format, &prov, &[row]);
    }
    let reference: Reference = a.reference.unwrap_or(ReferenceArg::Gaussian).into();
    let src = sample_source(&a.input, &a.levels, &a.ensemble, a.common.seed)?;
    let (rs, mut config, seed) = load_sample(&src, &a.ensemble)?;
    config["reference"] = serde_json::to_value(reference)?;
    config["r_grid"] = grids["r_grid"].clone();
    config["rtilde_grid"] = grids["rtilde_grid"].clone();
    config["format"] = json!(format);
    let prov = Provenance::new("kld", seed, config);
    let k = kld_against(&rs, reference, r_grid, t_grid)?;
    let row = SampleKld {
        n_samples: rs.len(),
        d_goe: k.d_goe,
        d_gue: k.d_gue,
        d_goe_tilde: k.d_goe_tilde,
        d_gue_tilde: k.d_gue_tilde,
    };
    write_payload(a.common.out.as_deref(), format, &prov, &[row])
}
