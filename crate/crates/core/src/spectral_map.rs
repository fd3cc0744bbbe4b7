//! Spectral picture of the full operator: essential spectrum from the 1D
//! comparison operator, bands tagged absolutely continuous, gaps tagged as
//! candidates for dense point spectrum, with numerical evidence from
//! transfer-matrix growth, channel eigenvalues and the Weyl m-function.

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectralError};
use crate::interaction::{InteractionParams, LatticeGeometry};
use crate::kronig1d::{band_structure, monodromy, spectrum_bottom};
use crate::linalg::Mat2;
use crate::ode::{integrate, OdeOptions};
use crate::radial::{locate_eigenvalues, transfer, ChannelSpec};
use crate::scalar::{linear_fit, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialSpectrum<T> {
    pub e0: T,
    pub statement: String,
}

/// `σ_ess = [E₀, ∞)` with `E₀` the bottom of the 1D comparison spectrum.
pub fn essential_spectrum<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>) -> Result<EssentialSpectrum<T>> {
    let e0 = spectrum_bottom(p, geom)?;
    Ok(EssentialSpectrum {
        e0,
        statement: format!("essential spectrum is the half-line [{e0}, inf) in every dimension nu >= 2"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferNormProfile<T> {
    pub energy: T,
    /// `x0 + j·d`, `j = 0..=n_periods`.
    pub radii: Vec<T>,
    /// `log ‖T(E, x_j, x0)‖` (spectral norm).
    pub log_norms: Vec<T>,
    /// `sup_j ‖T‖`; infinite when it overflows, see `log_sup_norm`.
    pub sup_norm: T,
    pub log_sup_norm: T,
    /// Fitted exponential rate of `‖T‖` per period.
    pub growth_rate: T,
    /// The same rate per unit length.
    pub growth_rate_per_length: T,
}

/// Norm of the transfer matrix sampled at whole periods from `x0`.
///
/// The running product is renormalized every period and its scale kept in
/// log form, so gap energies never overflow.
pub fn transfer_norm_profile<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    energy: T,
    x0: T,
    n_periods: usize,
) -> Result<TransferNormProfile<T>> {
    if !(x0 > T::zero()) || n_periods == 0 {
        return Err(SpectralError::InvalidInput("transfer_norm_profile needs x0 > 0 and n_periods >= 1".into()));
    }
    let d = geom.spacing;
    let mut radii = vec![x0];
    let mut log_norms = vec![T::zero()];
    let mut m = Mat2::identity();
    let mut log_scale = T::zero();
    let mut x = x0;
    // Away from the origin every period has the same shell layout; for
    // c = 0 the period map is literally the same matrix.
    let cached = (ch.c == T::zero()).then(|| transfer(ch, p, geom, energy, x0, x0 + d)).transpose()?;
    for _ in 0..n_periods {
        let step = match &cached {
            Some(t) => t.entries,
            None => transfer(ch, p, geom, energy, x, x + d)?.entries,
        };
        x = x + d;
        m = step * m;
        let s = m.frobenius();
        m = m.scale(T::one() / s);
        log_scale += s.ln();
        radii.push(x);
        log_norms.push(log_scale + m.spectral_norm().ln());
    }
    let js: Vec<T> = (0..=n_periods).map(T::from_count).collect();
    let growth_rate = linear_fit(&js, &log_norms).map(|(s, _)| s).unwrap_or(T::zero());
    let log_sup = log_norms.iter().copied().fold(T::zero(), T::max);
    Ok(TransferNormProfile {
        energy,
        radii,
        log_norms,
        sup_norm: log_sup.exp(),
        log_sup_norm: log_sup,
        growth_rate,
        growth_rate_per_length: growth_rate / d,
    })
}

/// Largest eigenvalue-free subinterval of `(lo, hi)`.
pub fn largest_empty_subinterval<T: Real>(lo: T, hi: T, eigenvalues: &[T]) -> T {
    let mut pts: Vec<T> = eigenvalues.iter().copied().filter(|&e| e > lo && e < hi).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prev = lo;
    let mut best = T::zero();
    for e in pts.into_iter().chain(std::iter::once(hi)) {
        best = best.max(e - prev);
        prev = e;
    }
    best
}

/// Eigenvalues of the truncated channel operators `H_{Λ,l}` inside gap
/// number `gap_index` (1-based: the gap between bands `gap_index − 1` and
/// `gap_index`), for every `l` in the inclusive `l_range`.
pub fn gap_eigenvalues<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    nu: u32,
    gap_index: usize,
    l_range: (u32, u32),
    r_max: T,
) -> Result<BTreeMap<u32, Vec<T>>> {
    let gap = nth_gap(p, geom, gap_index)?;
    channel_eigenvalues_in(p, geom, nu, gap, l_range, r_max)
}

fn nth_gap<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>, gap_index: usize) -> Result<[T; 2]> {
    if gap_index == 0 {
        return Err(SpectralError::InvalidInput("gap_index is 1-based".into()));
    }
    let zone = T::PI() / geom.spacing;
    let e_max = (T::from_count(gap_index + 2) * zone).powi(2);
    let bs = band_structure(p, geom, None, e_max, gap_index + 1)?;
    match bs.gaps.get(gap_index - 1) {
        Some(g) if g[1] > g[0] => Ok(*g),
        _ => Err(SpectralError::InvalidInput(format!("gap {gap_index} is closed or beyond the scanned range"))),
    }
}

fn channel_eigenvalues_in<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    nu: u32,
    window: [T; 2],
    l_range: (u32, u32),
    r_max: T,
) -> Result<BTreeMap<u32, Vec<T>>> {
    if l_range.0 > l_range.1 {
        return Err(SpectralError::InvalidInput("empty l range".into()));
    }
    let rel_tol = T::tol(1e-10);
    (l_range.0..=l_range.1)
        .into_par_iter()
        .map(|l| {
            let ch = ChannelSpec::new(nu, l)?;
            let eig = locate_eigenvalues(&ch, p, geom, window[0], window[1], (T::zero(), r_max), ch.origin_condition(), rel_tol)?;
            // Keep only eigenvalues strictly inside the window.
            let eig = eig.into_iter().filter(|&e| e > window[0] && e < window[1]).collect();
            Ok((l, eig))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MFunctionEstimate<T> {
    pub energy: T,
    pub epsilon: T,
    pub re_m: T,
    pub im_m: T,
    pub abs_m: T,
}

fn complex_propagator<T: Real>(z: Complex<T>, length: T) -> [[Complex<T>; 2]; 2] {
    let k = z.sqrt();
    let kl = k * length;
    let (s, c) = (kl.sin(), kl.cos());
    let sk = if k.norm() > T::lit(1e-8) {
        s / k
    } else {
        Complex::new(length, T::zero())
    };
    [[c, sk], [-k * s, c]]
}

fn capply<T: Real>(m: &[[Complex<T>; 2]; 2], v: [Complex<T>; 2]) -> [Complex<T>; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn rapply<T: Real>(m: &Mat2<T>, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
    [v[0] * m.m[0][0] + v[1] * m.m[0][1], v[0] * m.m[1][0] + v[1] * m.m[1][1]]
}

fn propagate_complex<T: Real>(ch: &ChannelSpec<T>, z: Complex<T>, from: T, to: T, v: [Complex<T>; 2]) -> Result<[Complex<T>; 2]> {
    if ch.c == T::zero() {
        return Ok(capply(&complex_propagator(z, to - from), v));
    }
    let (c, e, eps) = (ch.c, z.re, z.im);
    let y = integrate(
        |r, y: &[T; 4]| {
            let a = c / (r * r) - e;
            [y[2], y[3], a * y[0] + eps * y[1], a * y[1] - eps * y[0]]
        },
        from,
        [v[0].re, v[0].im, v[1].re, v[1].im],
        to,
        &OdeOptions::default(),
    )?;
    Ok([Complex::new(y[0], y[1]), Complex::new(y[2], y[3])])
}

/// Weyl m-function `u₊'(x₀)/u₊(x₀)` at `E + iε` for the channel `ch` on the
/// truncated domain `(x₀, r_max)`.
///
/// `u₊` starts at the last shell below `r_max` in the contracting Floquet
/// direction of the one-period map `Λ·P(E + iε, d)` and is propagated back to
/// the anchor `x₀`. [`default_anchor`] puts `x₀` inside the first cell.
pub fn m_function_estimate<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    energy: T,
    epsilon: T,
    domain: (T, T),
) -> Result<MFunctionEstimate<T>> {
    if !(epsilon >= T::zero()) {
        return Err(SpectralError::InvalidInput("epsilon must be non-negative".into()));
    }
    let (x0, r_max) = domain;
    if !(x0 > T::zero() && r_max > x0 + geom.spacing) {
        return Err(SpectralError::InvalidInput(format!("bad m-function domain ({x0}, {r_max})")));
    }
    let z = Complex::new(energy, epsilon);
    let d = geom.spacing;
    let n_last = ((r_max - geom.offset) / d).floor().to_usize().unwrap_or(0).max(1);

    // Contracting eigenvector of the complex one-period map.
    let lam = p.matrix();
    let pm = complex_propagator(z, d);
    let m = [
        [pm[0][0] * lam.m[0][0] + pm[1][0] * lam.m[0][1], pm[0][1] * lam.m[0][0] + pm[1][1] * lam.m[0][1]],
        [pm[0][0] * lam.m[1][0] + pm[1][0] * lam.m[1][1], pm[0][1] * lam.m[1][0] + pm[1][1] * lam.m[1][1]],
    ];
    let half_tr = (m[0][0] + m[1][1]) / T::lit(2.0);
    let root = (half_tr * half_tr - T::one()).sqrt();
    let (mu1, mu2) = (half_tr + root, half_tr - root);
    let mu = if mu1.norm() < mu2.norm() { mu1 } else { mu2 };
    if mu.norm() >= T::one() - T::epsilon().sqrt() {
        return Err(SpectralError::NonDecayingStart { energy: energy.as_f64() });
    }
    let r0 = [m[0][0] - mu, m[0][1]];
    let r1 = [m[1][0], m[1][1] - mu];
    let row = if r0[0].norm() + r0[1].norm() >= r1[0].norm() + r1[1].norm() { r0 } else { r1 };
    let mut v = [-row[1], row[0]];

    let lam_inv = lam.symplectic_inverse();
    let mut x = geom.site(n_last);
    for n in (0..=n_last).rev() {
        let site = geom.site(n);
        if site <= x0 {
            break;
        }
        if site < x {
            v = propagate_complex(ch, z, x, site, v)?;
            x = site;
        }
        v = rapply(&lam_inv, v);
        let s = v[0].norm().max(v[1].norm());
        if !(s.is_finite() && s > T::zero()) {
            return Err(SpectralError::StepFailure { position: x.as_f64() });
        }
        v = [v[0] / s, v[1] / s];
    }
    v = propagate_complex(ch, z, x, x0, v)?;
    let mval = v[1] / v[0];
    Ok(MFunctionEstimate {
        energy,
        epsilon,
        re_m: mval.re,
        im_m: mval.im,
        abs_m: mval.norm(),
    })
}

/// Anchor inside the first cell, halfway to the first shell.
pub fn default_anchor<T: Real>(geom: &LatticeGeometry<T>) -> T {
    geom.offset / T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MFunctionLadder<T> {
    pub estimates: Vec<MFunctionEstimate<T>>,
    /// Linear extrapolation of `Im m` to `ε = 0` from the two smallest ε.
    pub im_m_limit: T,
    /// `Im m / ε` at the smallest ε.
    pub im_m_slope: T,
}

/// m-function over a decreasing ε ladder with a Richardson step to ε = 0.
pub fn m_function_ladder<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    energy: T,
    epsilons: &[T],
    domain: (T, T),
) -> Result<MFunctionLadder<T>> {
    if epsilons.len() < 2 {
        return Err(SpectralError::InvalidInput("need at least two epsilon values".into()));
    }
    let estimates = epsilons
        .iter()
        .map(|&e| m_function_estimate(ch, p, geom, energy, e, domain))
        .collect::<Result<Vec<_>>>()?;
    let n = estimates.len();
    let (a, b) = (estimates[n - 2], estimates[n - 1]);
    let im_m_limit = (a.epsilon * b.im_m - b.epsilon * a.im_m) / (a.epsilon - b.epsilon);
    Ok(MFunctionLadder {
        im_m_limit,
        im_m_slope: b.im_m / b.epsilon,
        estimates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalKind {
    AbsolutelyContinuous,
    DensePointCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval<T> {
    pub lo: T,
    pub hi: T,
    pub kind: IntervalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDiagnostics<T> {
    pub lo: T,
    pub hi: T,
    pub probe_energy: T,
    /// Fitted growth of `‖T‖` per period at the probe.
    pub growth_rate: T,
    /// `acosh |D|` of the 1D comparison operator at the probe.
    pub floquet_exponent: T,
    /// Gaps only: largest eigenvalue-free subinterval over all channels.
    pub largest_empty: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMap<T> {
    pub e0: T,
    pub e_cutoff: T,
    pub intervals: Vec<SpectralInterval<T>>,
    #[serde(rename = "channels")]
    pub channel_eigenvalues: BTreeMap<u32, Vec<T>>,
    pub diagnostics: Vec<IntervalDiagnostics<T>>,
}

/// Periods used for the transfer-norm evidence in a spectrum map.
const MAP_PROBE_PERIODS: usize = 200;

pub fn build_spectrum_map<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    nu: u32,
    e_cutoff: T,
    l_range: (u32, u32),
    r_max: T,
) -> Result<SpectrumMap<T>> {
    let probe_channel = ChannelSpec::new(nu, l_range.0)?;
    let bs = band_structure(p, geom, None, e_cutoff, usize::MAX)?;
    let e0 = bs.e0;
    if !(e_cutoff > e0) {
        return Err(SpectralError::InvalidInput(format!("cutoff {e_cutoff} lies below E0 = {e0}")));
    }
    let bands = bs.spectrum_intervals();
    let mut intervals = Vec::new();
    for (i, b) in bands.iter().enumerate() {
        intervals.push(SpectralInterval {
            lo: b[0],
            hi: b[1],
            kind: IntervalKind::AbsolutelyContinuous,
        });
        if let Some(next) = bands.get(i + 1) {
            intervals.push(SpectralInterval {
                lo: b[1],
                hi: next[0],
                kind: IntervalKind::DensePointCandidate,
            });
        }
    }
    if let Some(last) = bands.last() {
        if last[1] < e_cutoff {
            intervals.push(SpectralInterval {
                lo: last[1],
                hi: e_cutoff,
                kind: IntervalKind::DensePointCandidate,
            });
        }
    }

    let mut channel_eigenvalues: BTreeMap<u32, Vec<T>> = (l_range.0..=l_range.1).map(|l| (l, Vec::new())).collect();
    for iv in intervals.iter().filter(|iv| iv.kind == IntervalKind::DensePointCandidate) {
        for (l, eig) in channel_eigenvalues_in(p, geom, nu, [iv.lo, iv.hi], l_range, r_max)? {
            channel_eigenvalues.entry(l).or_default().extend(eig);
        }
    }
    for v in channel_eigenvalues.values_mut() {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    let x0 = geom.spacing * T::lit(10.0);
    let diagnostics = intervals
        .par_iter()
        .map(|iv| {
            let probe = iv.lo + (iv.hi - iv.lo) / T::lit(2.0);
            let prof = transfer_norm_profile(&probe_channel, p, geom, probe, x0, MAP_PROBE_PERIODS)?;
            let largest_empty = (iv.kind == IntervalKind::DensePointCandidate).then(|| {
                let all: Vec<T> = channel_eigenvalues.values().flatten().copied().collect();
                largest_empty_subinterval(iv.lo, iv.hi, &all)
            });
            Ok(IntervalDiagnostics {
                lo: iv.lo,
                hi: iv.hi,
                probe_energy: probe,
                growth_rate: prof.growth_rate,
                floquet_exponent: monodromy(p, geom, probe).floquet_exponent(),
                largest_empty,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SpectrumMap {
        e0,
        e_cutoff,
        intervals,
        channel_eigenvalues,
        diagnostics,
    })
}
