//! Spacings, spacing ratios, spectrum slicing and histograms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::ensembles::{Spectrum, SpectrumKind};
use crate::{Error, Result};

/// Default histogram domain and bin width for `r`.
pub const R_DOMAIN: (f64, f64) = (0.0, 30.0);
pub const R_BIN_WIDTH: f64 = 0.06;
/// Default histogram domain and bin width for `r̃`.
pub const RTILDE_DOMAIN: (f64, f64) = (0.0, 1.0);
pub const RTILDE_BIN_WIDTH: f64 = 0.002;

/// Treatment of the gap between the last and first eigenangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CircleBoundary {
    /// Include the wraparound gap `2π + φ₁ − φ_N`.
    #[default]
    Wrap,
    /// Treat the eigenangles like a line spectrum.
    NoWrap,
}

/// Consecutive spacings; circle spectra include the wraparound gap.
pub fn spacings(s: &Spectrum) -> Result<Vec<f64>> {
    spacings_with(s, CircleBoundary::Wrap)
}

pub fn spacings_with(s: &Spectrum, boundary: CircleBoundary) -> Result<Vec<f64>> {
    let x = s.levels();
    if x.len() < 2 {
        return Err(Error::Insufficient(format!(
            "{} levels give no spacing",
            x.len()
        )));
    }
    let mut out: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    if s.kind() == SpectrumKind::Circle && boundary == CircleBoundary::Wrap {
        out.push(2.0 * PI + x[0] - x[x.len() - 1]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RatioKind {
    /// `r = s_n / s_{n−1}`.
    R,
    /// `r̃ = min(r, 1/r)`.
    RTilde,
}

/// Pooled spacing ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSample {
    values: Vec<f64>,
    kind: RatioKind,
    /// Ratios dropped because one of their spacings was exactly zero.
    pub degenerate_pairs: usize,
}

impl RatioSample {
    pub fn new(values: Vec<f64>, kind: RatioKind) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::domain(format!("ratio {bad} is not >= 0")));
        }
        if kind == RatioKind::RTilde {
            if let Some(bad) = values.iter().find(|v| **v > 1.0) {
                return Err(Error::domain(format!("r-tilde value {bad} exceeds 1")));
            }
        }
        Ok(RatioSample {
            values,
            kind,
            degenerate_pairs: 0,
        })
    }

    pub fn empty(kind: RatioKind) -> Self {
        RatioSample {
            values: Vec::new(),
            kind,
            degenerate_pairs: 0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> RatioKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends another sample of the same kind.
    pub fn extend(&mut self, other: RatioSample) -> Result<()> {
        if other.kind != self.kind {
            return Err(Error::config("cannot pool r and r-tilde samples"));
        }
        self.values.extend(other.values);
        self.degenerate_pairs += other.degenerate_pairs;
        Ok(())
    }
}

/// Spacing ratios of one spectrum; circle spectra give cyclic ratios.
pub fn ratios(s: &Spectrum) -> Result<RatioSample> {
    ratios_with(s, CircleBoundary::Wrap)
}

pub fn ratios_with(s: &Spectrum, boundary: CircleBoundary) -> Result<RatioSample> {
    if s.len() < 3 {
        return Err(Error::Insufficient(format!(
            "{} levels give no ratio",
            s.len()
        )));
    }
    let sp = spacings_with(s, boundary)?;
    let cyclic = s.kind() == SpectrumKind::Circle && boundary == CircleBoundary::Wrap;
    let pairs: Vec<(f64, f64)> = if cyclic {
        let n = sp.len();
        (0..n).map(|k| (sp[(k + n - 1) % n], sp[k])).collect()
    } else {
        sp.windows(2).map(|w| (w[0], w[1])).collect()
    };
    let mut values = Vec::with_capacity(pairs.len());
    let mut degenerate = 0;
    for (prev, next) in pairs {
        if prev == 0.0 || next == 0.0 {
            degenerate += 1;
        } else {
            values.push(next / prev);
        }
    }
    Ok(RatioSample {
        values,
        kind: RatioKind::R,
        degenerate_pairs: degenerate,
    })
}

/// `min(r, 1/r)` elementwise; a sample that already holds `r̃` is returned
/// unchanged.
pub fn rtilde_of(rs: &RatioSample) -> RatioSample {
    let values = match rs.kind {
        RatioKind::RTilde => rs.values.clone(),
        RatioKind::R => rs.values.iter().map(|&r| rtilde_value(r)).collect(),
    };
    RatioSample {
        values,
        kind: RatioKind::RTilde,
        degenerate_pairs: rs.degenerate_pairs,
    }
}

fn rtilde_value(r: f64) -> f64 {
    if r <= 1.0 {
        r
    } else {
        1.0 / r
    }
}

/// Portion of a spectrum used for ratio statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SliceMode {
    Full,
    /// `k` consecutive levels in the center.
    Bulk(usize),
    /// `k/2` levels from each end, as two separate slices.
    Edges(usize),
}

/// Contiguous sub-spectra; ratios must be taken per slice. Partial slices of
/// a circle spectrum are returned as line spectra so that no wraparound gap
/// is formed inside them.
pub fn slice_spectrum(s: &Spectrum, mode: SliceMode) -> Result<Vec<Spectrum>> {
    let n = s.len();
    let x = s.levels();
    let part = |a: usize, b: usize| Spectrum::new(x[a..b].to_vec(), SpectrumKind::Line);
    match mode {
        SliceMode::Full => Ok(vec![s.clone()]),
        SliceMode::Bulk(k) => {
            if k == 0 || k > n {
                return Err(Error::config(format!("bulk({k}) needs 1 <= k <= {n}")));
            }
            let start = (n - k) / 2;
            Ok(vec![part(start, start + k)?])
        }
        SliceMode::Edges(k) => {
            if k == 0 || k % 2 == 1 {
                return Err(Error::config(format!("edges({k}) needs an even k > 0")));
            }
            if k > n {
                return Err(Error::config(format!("edges({k}) exceeds {n} levels")));
            }
            let h = k / 2;
            Ok(vec![part(0, h)?, part(n - h, n)?])
        }
    }
}

/// Ratios pooled over the slices of one spectrum. Slices with fewer than
/// three levels contribute nothing.
pub fn sliced_ratios(
    s: &Spectrum,
    mode: SliceMode,
    boundary: CircleBoundary,
) -> Result<RatioSample> {
    let mut out = RatioSample::empty(RatioKind::R);
    for slice in slice_spectrum(s, mode)? {
        if slice.len() >= 3 {
            out.extend(ratios_with(&slice, boundary)?)?;
        }
    }
    Ok(out)
}

/// Normalized histogram with out-of-domain tally.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDensity {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// `counts / (total · bin_width)`.
    pub densities: Vec<f64>,
    /// All samples, inside and outside the domain.
    pub total: u64,
    pub out_of_domain: u64,
}

impl HistogramDensity {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_lo(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.bin_width
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins())
            .map(|i| self.lo + (i as f64 + 0.5) * self.bin_width)
            .collect()
    }

    pub fn in_domain(&self) -> u64 {
        self.total - self.out_of_domain
    }
}

/// Number of bins of width `bin_width` covering `[lo, hi]`; the width must
/// divide the domain.
pub fn bin_count(lo: f64, hi: f64, bin_width: f64) -> Result<usize> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::config(format!(
            "invalid histogram domain [{lo}, {hi}]"
        )));
    }
    if !(bin_width > 0.0) {
        return Err(Error::config(format!(
            "bin width {bin_width} must be positive"
        )));
    }
    let exact = (hi - lo) / bin_width;
    let bins = exact.round();
    if bins < 1.0 || (exact - bins).abs() > 1e-6 * bins.max(1.0) {
        return Err(Error::config(format!(
            "bin width {bin_width} does not divide [{lo}, {hi}]"
        )));
    }
    Ok(bins as usize)
}

/// Bins `values` on `[lo, hi]` (right edge included in the last bin).
pub fn histogram(values: &[f64], lo: f64, hi: f64, bin_width: f64) -> Result<HistogramDensity> {
    let bins = bin_count(lo, hi, bin_width)?;
    if values.is_empty() {
        return Err(Error::Insufficient(
            "cannot histogram an empty sample".into(),
        ));
    }
    let mut counts = vec![0u64; bins];
    let mut out = 0u64;
    for &x in values {
        if !(x >= lo && x <= hi) {
            out += 1;
            continue;
        }
        let i = (((x - lo) / bin_width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = values.len() as u64;
    let norm = 1.0 / (total as f64 * bin_width);
    let densities = counts.iter().map(|&c| c as f64 * norm).collect();
    Ok(HistogramDensity {
        lo,
        hi,
        bin_width,
        counts,
        densities,
        total,
        out_of_domain: out,
    })
}

/// Histogram on the default domain for the sample's kind.
pub fn default_histogram(rs: &RatioSample) -> Result<HistogramDensity> {
    match rs.kind {
        RatioKind::R => histogram(&rs.values, R_DOMAIN.0, R_DOMAIN.1, R_BIN_WIDTH),
        RatioKind::RTilde => histogram(
            &rs.values,
            RTILDE_DOMAIN.0,
            RTILDE_DOMAIN.1,
            RTILDE_BIN_WIDTH,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ratio_pdf_goe;
    use crate::ensembles::{Ensemble, GaussianCrossoverConfig};
    use crate::CrossoverParam;
    use proptest::prelude::*;

    fn line(x: &[f64]) -> Spectrum {
        Spectrum::new(x.to_vec(), SpectrumKind::Line).unwrap()
    }

    #[test]
    fn spacing_examples() {
        assert_eq!(spacings(&line(&[1.0, 2.0, 4.0])).unwrap(), vec![1.0, 2.0]);
        let c = Spectrum::new(vec![-PI / 2.0, 0.0, PI / 2.0], SpectrumKind::Circle).unwrap();
        let s = spacings(&c).unwrap();
        assert_eq!(s, vec![PI / 2.0, PI / 2.0, PI]);
        assert!((s.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-10);
        assert_eq!(spacings_with(&c, CircleBoundary::NoWrap).unwrap().len(), 2);
        let grid: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
        assert!(spacings(&line(&grid)).unwrap().iter().all(|&d| d == 0.5));
        assert!(spacings(&line(&[1.0])).is_err());
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(ratios(&line(&[0.0, 1.0, 3.0])).unwrap().values(), &[2.0]);
        assert_eq!(
            ratios(&line(&[0.0, 1.0, 2.0, 4.0])).unwrap().values(),
            &[1.0, 2.0]
        );
        let c = Spectrum::new(vec![-PI / 2.0, 0.0, PI / 2.0], SpectrumKind::Circle).unwrap();
        assert_eq!(ratios(&c).unwrap().values(), &[0.5, 1.0, 2.0]);
        assert_eq!(
            ratios_with(&c, CircleBoundary::NoWrap).unwrap().values(),
            &[1.0]
        );
        assert!(ratios(&line(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn degenerate_levels_are_counted() {
        let rs = ratios(&line(&[0.0, 1.0, 1.0, 2.0, 4.0])).unwrap();
        // spacings 1, 0, 1, 2: only the last pair survives
        assert_eq!(rs.values(), &[2.0]);
        assert_eq!(rs.degenerate_pairs, 2);
    }

    #[test]
    fn rtilde_examples() {
        let rs = RatioSample::new(vec![2.0, 1.0, 0.0, 0.25], RatioKind::R).unwrap();
        assert_eq!(rtilde_of(&rs).values(), &[0.5, 1.0, 0.0, 0.25]);
        assert!(RatioSample::new(vec![1.5], RatioKind::RTilde).is_err());
        assert!(RatioSample::new(vec![-0.1], RatioKind::R).is_err());
    }

    #[test]
    fn slicing() {
        let s = line(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            slice_spectrum(&s, SliceMode::Bulk(2)).unwrap(),
            vec![line(&[2.0, 3.0])]
        );
        assert_eq!(
            slice_spectrum(&s, SliceMode::Edges(2)).unwrap(),
            vec![line(&[1.0]), line(&[4.0])]
        );
        assert_eq!(
            slice_spectrum(&s, SliceMode::Full).unwrap(),
            vec![s.clone()]
        );
        assert!(slice_spectrum(&s, SliceMode::Bulk(5)).is_err());
        assert!(slice_spectrum(&s, SliceMode::Edges(3)).is_err());
        assert!(slice_spectrum(&s, SliceMode::Edges(6)).is_err());
    }

    #[test]
    fn edge_slices_do_not_straddle() {
        let x: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let rs = sliced_ratios(&line(&x), SliceMode::Edges(6), CircleBoundary::Wrap).unwrap();
        // three levels per side: one ratio each
        assert_eq!(rs.values(), &[3.0, 17.0 / 15.0]);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.5], 0.0, 1.0, 0.25).unwrap();
        assert_eq!(h.counts, vec![0, 0, 1, 0]);
        assert_eq!(h.densities[2], 4.0);
        let h = histogram(&[1.0, 2.0, -1.0], 0.0, 1.0, 0.5).unwrap();
        assert_eq!(h.counts, vec![0, 1]);
        assert_eq!(h.out_of_domain, 2);
        assert!(histogram(&[], 0.0, 1.0, 0.1).is_err());
        assert!(histogram(&[0.1], 0.0, 1.0, 0.3).is_err());
        assert_eq!(bin_count(R_DOMAIN.0, R_DOMAIN.1, R_BIN_WIDTH).unwrap(), 500);
        assert_eq!(
            bin_count(RTILDE_DOMAIN.0, RTILDE_DOMAIN.1, RTILDE_BIN_WIDTH).unwrap(),
            500
        );
    }

    #[test]
    fn uniform_sample_gives_flat_histogram() {
        // Equidistant points stand in for a uniform sample without noise.
        let n = 100_000;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let h = histogram(&v, 0.0, 1.0, 0.01).unwrap();
        assert!(h.densities.iter().all(|d| (d - 1.0).abs() < 1e-9));
    }

    #[test]
    fn goe_3x3_ratios_follow_surmise() {
        let cfg = GaussianCrossoverConfig::new(3, CrossoverParam::GOE, 21, 40_000);
        let ens = Ensemble::GaussCrossover(cfg);
        let mut pooled = RatioSample::empty(RatioKind::R);
        for k in 0..40_000 {
            pooled
                .extend(ratios(&ens.spectrum(k).unwrap()).unwrap())
                .unwrap();
        }
        let h = histogram(pooled.values(), 0.0, 4.0, 0.2).unwrap();
        for (c, d) in h.centers().iter().zip(&h.densities) {
            // binned mass vs pdf at the bin center, loose enough for curvature
            let want = ratio_pdf_goe(*c).unwrap();
            assert!((d - want).abs() < 0.03, "r={c}: {d} vs {want}");
        }
        // exchange symmetry: P(r<1) = P(r>1)
        let n = pooled.len() as f64;
        let below = pooled.values().iter().filter(|&&r| r < 1.0).count() as f64;
        assert!((below / n - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    }

    proptest! {
        #[test]
        fn reversed_spectrum_gives_reciprocal_ratios(mut x in prop::collection::vec(-100.0f64..100.0, 3..40)) {
            x.sort_by(|a, b| a.total_cmp(b));
            x.dedup();
            prop_assume!(x.len() >= 3);
            let fwd = ratios(&line(&x)).unwrap();
            let rev: Vec<f64> = x.iter().rev().map(|v| -v).collect();
            let back = ratios(&line(&rev)).unwrap();
            prop_assert_eq!(fwd.len(), back.len());
            for (a, b) in fwd.values().iter().rev().zip(back.values()) {
                prop_assert!((a * b - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn rtilde_is_min_of_r_and_inverse(v in prop::collection::vec(0.0f64..1e6, 1..200)) {
            let rs = RatioSample::new(v.clone(), RatioKind::R).unwrap();
            let rt = rtilde_of(&rs);
            for (r, t) in v.iter().zip(rt.values()) {
                prop_assert_eq!(*t, if *r == 0.0 { 0.0 } else { r.min(1.0 / r) });
                prop_assert!((0.0..=1.0).contains(t));
            }
        }

        #[test]
        fn histogram_conserves_mass(v in prop::collection::vec(-1.0f64..5.0, 1..500)) {
            let h = histogram(&v, 0.0, 3.0, 0.06).unwrap();
            prop_assert_eq!(h.counts.iter().sum::<u64>() + h.out_of_domain, v.len() as u64);
            let mass: f64 = h.densities.iter().sum::<f64>() * h.bin_width;
            prop_assert!((mass - h.in_domain() as f64 / v.len() as f64).abs() < 1e-12);
        }
    }
}
