//! Realization-parallel generation. Every realization owns its RNG stream,
//! so results do not depend on the number of worker threads.

use rayon::prelude::*;

use ratiocross_core::ensembles::{Ensemble, Spectrum};
use ratiocross_core::spectra::{sliced_ratios, CircleBoundary, RatioKind, RatioSample, SliceMode};

use crate::error::{CliError, Result};

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::config("--threads must be at least 1")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Spectra of realizations `0..count`, in index order.
pub fn spectra(ensemble: &Ensemble) -> Result<Vec<Spectrum>> {
    ensemble.validate()?;
    let out = (0..ensemble.count() as u64)
        .into_par_iter()
        .map(|k| ensemble.spectrum(k))
        .collect::<ratiocross_core::Result<Vec<_>>>()?;
    Ok(out)
}

/// Ratios of realizations `0..count` pooled in index order.
pub fn pooled_ratios(
    ensemble: &Ensemble,
    mode: SliceMode,
    boundary: CircleBoundary,
) -> Result<RatioSample> {
    ensemble.validate()?;
    let parts = (0..ensemble.count() as u64)
        .into_par_iter()
        .map(|k| sliced_ratios(&ensemble.spectrum(k)?, mode, boundary))
        .collect::<ratiocross_core::Result<Vec<_>>>()?;
    let mut out = RatioSample::empty(RatioKind::R);
    for p in parts {
        out.extend(p)?;
    }
    Ok(out)
}

/// Ratios obtained from one spectrum of `n` levels, ignoring degeneracies.
pub fn ratios_per_realization(
    n: usize,
    circle: bool,
    mode: SliceMode,
    boundary: CircleBoundary,
) -> usize {
    let line = |k: usize| k.saturating_sub(2);
    match mode {
        SliceMode::Full if circle && boundary == CircleBoundary::Wrap => n,
        SliceMode::Full => line(n),
        SliceMode::Bulk(k) => line(k.min(n)),
        SliceMode::Edges(k) => 2 * line(k / 2),
    }
}
