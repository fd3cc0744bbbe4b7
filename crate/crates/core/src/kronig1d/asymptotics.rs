//! Large-index behaviour of bands and gaps.

use serde::{Deserialize, Serialize};

use super::bands::band_structure;
use crate::error::{Result, SpectralError};
use crate::interaction::{classify, InteractionClass, InteractionParams, InteractionTag, LatticeGeometry};
use crate::scalar::{linear_fit, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRow<T> {
    pub index: usize,
    pub lower: T,
    pub upper: T,
    pub width: T,
    /// Width of the gap below this band (`None` for band 0).
    pub gap_before: Option<T>,
    /// `gap_before / width`.
    pub ratio: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport<T> {
    pub class: InteractionClass<T>,
    /// Tail average of gap width (δ), band/gap ratio (intermediate) or band width (δ′).
    pub measured_constant: Option<T>,
    /// Least-squares slope of `log(gap/band)` against `log k` over the tail window.
    pub fitted_mu: Option<T>,
    /// Log-log slope of `|q_k − predicted|` over the tail window.
    pub tail_error_slope: Option<T>,
    /// Band/gap ratio measured in momentum `√E` instead of energy (tail average).
    pub momentum_ratio: Option<T>,
    /// Inclusive band indices entering the tail averages.
    pub tail: (usize, usize),
    pub single_band: bool,
    pub per_band: Vec<BandRow<T>>,
}

/// Bands `0..=n_bands` and their asymptotic summary.
///
/// The tail window is the last third of the bands, `[⌈2n/3⌉, n]`.
pub fn asymptotics_report<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    n_bands: usize,
) -> Result<AsymptoticsReport<T>> {
    if n_bands < 10 {
        return Err(SpectralError::InvalidInput(format!("n_bands = {n_bands} < 10")));
    }
    let class = classify(p, geom)?;
    let wanted = n_bands + 1;
    let zone = T::PI() / geom.spacing;
    let mut e_max = (T::from_count(n_bands + 2) * zone).powi(2);
    let mut bs = band_structure(p, geom, None, e_max, wanted)?;
    for _ in 0..20 {
        let complete = bs.bands.len() >= wanted && !(bs.truncated && bs.bands.len() == wanted);
        if complete || (bs.open_gaps().is_empty() && p.is_free()) {
            break;
        }
        e_max = e_max * T::lit(1.5);
        bs = band_structure(p, geom, None, e_max, wanted)?;
    }
    let tail = ((2 * n_bands).div_ceil(3), n_bands);

    if bs.open_gaps().is_empty() {
        let per_band = bs
            .spectrum_intervals()
            .iter()
            .enumerate()
            .map(|(i, b)| BandRow {
                index: i,
                lower: b[0],
                upper: b[1],
                width: b[1] - b[0],
                gap_before: None,
                ratio: None,
            })
            .collect();
        return Ok(AsymptoticsReport {
            class,
            measured_constant: None,
            fitted_mu: None,
            tail_error_slope: None,
            momentum_ratio: None,
            tail,
            single_band: true,
            per_band,
        });
    }

    let per_band: Vec<BandRow<T>> = bs
        .bands
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let width = b[1] - b[0];
            let gap_before = (i > 0).then(|| b[0] - bs.bands[i - 1][1]);
            BandRow {
                index: i,
                lower: b[0],
                upper: b[1],
                width,
                gap_before,
                ratio: gap_before.map(|g| g / width),
            }
        })
        .collect();
    if per_band.len() <= tail.1 {
        return Err(SpectralError::BracketingFailure {
            lo: bs.diagnostics.e_floor.as_f64(),
            hi: e_max.as_f64(),
        });
    }

    let window = &per_band[tail.0..=tail.1];
    let quantity = |row: &BandRow<T>| -> T {
        match class.tag {
            InteractionTag::DeltaType => row.gap_before.unwrap_or(T::zero()),
            InteractionTag::IntermediateType => row.width / row.gap_before.unwrap_or(T::nan()),
            InteractionTag::DeltaPrimeType => row.width,
        }
    };
    let count = T::from_count(window.len());
    let measured = window.iter().map(quantity).fold(T::zero(), |a, q| a + q) / count;

    let (lx, ly): (Vec<T>, Vec<T>) = window
        .iter()
        .filter_map(|r| r.ratio.filter(|q| *q > T::zero()).map(|q| (T::from_count(r.index).ln(), q.ln())))
        .unzip();
    let fitted_mu = linear_fit(&lx, &ly).map(|(s, _)| s);

    let (ex, ey): (Vec<T>, Vec<T>) = window
        .iter()
        .filter_map(|r| {
            let err = (quantity(r) - class.predicted_asymptote).abs();
            (err > T::zero()).then(|| (T::from_count(r.index).ln(), err.ln()))
        })
        .unzip();
    let tail_error_slope = linear_fit(&ex, &ey).map(|(s, _)| s);

    let momentum_ratio = {
        let k = |e: T| e.max(T::zero()).sqrt();
        let total = window.iter().fold(T::zero(), |acc, r| {
            let band = k(r.upper) - k(r.lower);
            let gap = k(r.lower) - k(r.lower - r.gap_before.unwrap_or(T::zero()));
            acc + band / gap
        });
        Some(total / count).filter(|v| v.is_finite())
    };

    Ok(AsymptoticsReport {
        class,
        measured_constant: Some(measured),
        fitted_mu,
        tail_error_slope,
        momentum_ratio,
        tail,
        single_band: false,
        per_band,
    })
}
