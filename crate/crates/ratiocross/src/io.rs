//! CSV and JSON payloads with an embedded provenance block, and readers for
//! ratio samples and plain-text level lists.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use ratiocross_core::ensembles::{Spectrum, SpectrumKind};
use ratiocross_core::spectra::{HistogramDensity, RatioKind, RatioSample};

use crate::error::{CliError, Result};

pub const TOOL_NAME: &str = "ratiocross";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tool version, command, seed and the fully resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Provenance {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            command: command.to_string(),
            seed,
            config,
        }
    }

    /// `# key: value` lines placed above a CSV header.
    pub fn csv_preamble(&self) -> Result<String> {
        let mut s = format!(
            "# {} {}\n# command: {}\n",
            self.tool, self.version, self.command
        );
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s.push_str(&format!(
            "# config: {}\n",
            serde_json::to_string(&self.config)?
        ));
        Ok(s)
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    results: &'a T,
}

pub fn json_bytes<T: Serialize>(prov: &Provenance, results: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&Document {
        provenance: prov,
        results,
    })?;
    out.push(b'\n');
    Ok(out)
}

pub fn csv_bytes<T, I>(prov: &Provenance, rows: I) -> Result<Vec<u8>>
where
    T: Serialize,
    I: IntoIterator<Item = T>,
{
    let mut buf = prov.csv_preamble()?.into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| CliError::Write(e.to_string()))?;
    }
    Ok(buf)
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            fs::write(p, bytes).map_err(|e| CliError::io(p, e))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub density: f64,
    pub count: u64,
}

pub fn histogram_rows(h: &HistogramDensity) -> Vec<HistogramRow> {
    (0..h.bins())
        .map(|i| HistogramRow {
            bin_lo: h.bin_lo(i),
            bin_hi: h.bin_lo(i + 1),
            density: h.densities[i],
            count: h.counts[i],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueRow {
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelRow {
    pub realization: usize,
    pub index: usize,
    pub level: f64,
}

pub fn level_rows(spectra: &[Spectrum]) -> Vec<LevelRow> {
    spectra
        .iter()
        .enumerate()
        .flat_map(|(k, s)| {
            s.levels()
                .iter()
                .enumerate()
                .map(move |(i, &level)| LevelRow {
                    realization: k,
                    index: i,
                    level,
                })
        })
        .collect()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Ratio sample from a CSV file with a single `value` column; `#` lines are
/// comments.
pub fn read_ratio_csv(path: &Path) -> Result<RatioSample> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|source| CliError::Parse {
            path: path.into(),
            source,
        })?
        .clone();
    let col = headers
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| CliError::config(format!("{}: no `value` column", path.display())))?;
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|source| CliError::Parse {
            path: path.into(),
            source,
        })?;
        let field = rec.get(col).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| {
            CliError::config(format!(
                "{}: record {}: bad value {field:?}",
                path.display(),
                line + 1
            ))
        })?;
        values.push(v);
    }
    Ok(RatioSample::new(values, RatioKind::R)?)
}

/// Plain-text levels, one per line. `#` starts a comment, `# kind: circle`
/// (or `line`) sets the spectrum kind, and blank lines separate spectra.
pub fn parse_levels(text: &str) -> Result<Vec<Spectrum>> {
    let mut kind = SpectrumKind::Line;
    let mut blocks: Vec<Vec<f64>> = vec![Vec::new()];
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(k) = comment.trim().strip_prefix("kind:") {
                kind = match k.trim() {
                    "line" => SpectrumKind::Line,
                    "circle" => SpectrumKind::Circle,
                    other => {
                        return Err(CliError::config(format!(
                            "line {}: unknown spectrum kind {other:?}",
                            no + 1
                        )))
                    }
                };
            }
            continue;
        }
        if line.is_empty() {
            if !blocks.last().is_some_and(Vec::is_empty) {
                blocks.push(Vec::new());
            }
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| CliError::config(format!("line {}: bad level {line:?}", no + 1)))?;
        blocks.last_mut().expect("at least one block").push(v);
    }
    let spectra = blocks
        .into_iter()
        .filter(|b| !b.is_empty())
        .map(|b| Spectrum::from_unsorted(b, kind))
        .collect::<ratiocross_core::Result<Vec<_>>>()?;
    if spectra.is_empty() {
        return Err(CliError::config("level file contains no levels"));
    }
    Ok(spectra)
}

pub fn read_levels(path: &Path) -> Result<Vec<Spectrum>> {
    parse_levels(&read_text(path)?)
}
