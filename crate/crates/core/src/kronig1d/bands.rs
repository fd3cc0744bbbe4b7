//! Band-edge location for the periodic comparison operator.
//!
//! Energies are sampled uniformly in `κ = √(−E)` below zero and in `k = √E`
//! above zero (edges cluster like `n²` in energy), sign changes of `D ∓ 1`
//! are bisected to full precision, and every discrete extremum of `D` is
//! refined so that a pair of crossings hidden between two samples, or a
//! closed gap where `|D|` only touches one, is still resolved.

use serde::{Deserialize, Serialize};

use super::discriminant;
use crate::error::{Result, SpectralError};
use crate::interaction::{InteractionParams, LatticeGeometry};
use crate::scalar::Real;

/// Samples per `π/d` of momentum.
const SAMPLES_PER_ZONE: usize = 512;
/// Minimum number of samples below zero energy.
const NEGATIVE_SAMPLES: usize = 2048;
/// `||D| − 1|` below which an extremum counts as touching the band condition.
const TANGENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDiagnostics<T> {
    pub e_floor: T,
    pub samples: usize,
    /// Largest `||D(E_k)| − 1|` over the located edges.
    pub max_edge_defect: T,
    pub closed_gaps: usize,
}

/// Bands `[E_{2k}, E_{2k+1}]` and gaps `(E_{2k−1}, E_{2k})` of the periodic operator.
///
/// Closed gaps are kept as zero-length entries. When the scan stops at
/// `e_max` inside a band, the last band ends at `e_max`, `truncated` is set,
/// and `e_max` is not listed among the edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure<T> {
    pub e0: T,
    pub edges: Vec<T>,
    pub bands: Vec<[T; 2]>,
    pub gaps: Vec<[T; 2]>,
    pub truncated: bool,
    pub e_max: T,
    pub diagnostics: BandDiagnostics<T>,
}

impl<T: Real> BandStructure<T> {
    /// Gaps of positive width.
    pub fn open_gaps(&self) -> Vec<[T; 2]> {
        self.gaps.iter().copied().filter(|g| g[1] > g[0]).collect()
    }

    /// Spectrum as maximal intervals: bands separated by closed gaps are merged.
    pub fn spectrum_intervals(&self) -> Vec<[T; 2]> {
        let mut out: Vec<[T; 2]> = Vec::new();
        for b in &self.bands {
            match out.last_mut() {
                Some(last) if last[1] >= b[0] => last[1] = b[1],
                _ => out.push(*b),
            }
        }
        out
    }

    /// Whether `E` lies in the closure of a band.
    pub fn in_band(&self, e: T) -> bool {
        self.bands.iter().any(|b| e >= b[0] && e <= b[1])
    }
}

/// Energy below which `|D(E)| > 1` is guaranteed.
///
/// Combines the coupling heuristic `−(max|param| + 1)²·4/d²` with a bound
/// derived from the large-κ behaviour of `D(−κ²)`, then widens until the
/// discriminant is outside `[−1, 1]` at the floor.
pub fn default_energy_floor<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>) -> T {
    let d = geom.spacing;
    let m = p
        .alpha()
        .abs()
        .max(p.beta().abs())
        .max(p.gamma().abs())
        .max(p.delta().abs());
    let heuristic = -(m + T::one()).powi(2) * T::lit(4.0) / (d * d);

    // For κd ≥ 1, coth κd ≤ 1.32, so |D| ≥ (sinh κd / 2)(|β|κ − 1.32|γ+δ| − |α|/κ).
    let trace = (p.gamma() + p.delta()).abs();
    let kappa = if p.beta() != T::zero() {
        let b = p.beta().abs();
        (T::lit(1.5) / d)
            .max(T::lit(4.0) * trace / b)
            .max((T::lit(3.0) * p.alpha().abs() / b).sqrt())
            .max(T::lit(6.0) / b)
    } else {
        (T::lit(1.5) / d).max(T::lit(2.0) * p.alpha().abs())
    };
    let mut floor = heuristic.min(-kappa * kappa);
    for _ in 0..60 {
        if discriminant(p, geom, floor).abs() > T::one() {
            break;
        }
        floor = floor * T::lit(2.0);
    }
    floor
}

/// Lowest point of the spectrum, `E₀ = inf σ`.
pub fn spectrum_bottom<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>) -> Result<T> {
    let zone = T::PI() / geom.spacing;
    let mut e_max = T::lit(4.0) * zone * zone;
    for _ in 0..8 {
        let bs = band_structure(p, geom, None, e_max, 1)?;
        if !bs.bands.is_empty() {
            return Ok(bs.e0);
        }
        e_max = e_max * T::lit(4.0);
    }
    Err(SpectralError::BracketingFailure {
        lo: default_energy_floor(p, geom).as_f64(),
        hi: e_max.as_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event<T> {
    /// `|D|` crosses one.
    Crossing(T),
    /// `|D|` touches one from inside a band (closed gap).
    Touch(T),
}

impl<T: Real> Event<T> {
    fn energy(&self) -> T {
        match *self {
            Event::Crossing(e) | Event::Touch(e) => e,
        }
    }
}

/// Locates band edges in `[e_min, e_max]`, keeping at most `max_bands` bands.
///
/// `e_min = None` uses [`default_energy_floor`].
pub fn band_structure<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    e_min: Option<T>,
    e_max: T,
    max_bands: usize,
) -> Result<BandStructure<T>> {
    let mut floor = e_min.unwrap_or_else(|| default_energy_floor(p, geom));
    if !(floor < e_max) {
        return Err(SpectralError::InvalidInput(format!(
            "empty energy window [{}, {}]",
            floor, e_max
        )));
    }
    let disc = |e: T| discriminant(p, geom, e);
    let mut widen = 0;
    while disc(floor).abs() <= T::one() && e_min.is_none() && widen < 60 {
        floor = floor * T::lit(2.0) - T::one();
        widen += 1;
    }

    let grid = sample_grid(geom.spacing, floor, e_max);
    let values: Vec<T> = grid.iter().map(|&e| disc(e)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(SpectralError::BracketingFailure {
            lo: grid[i.saturating_sub(1)].as_f64(),
            hi: grid[i].as_f64(),
        });
    }

    let mut events: Vec<Event<T>> = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (values[i], values[i + 1]);
        for level in [T::one(), -T::one()] {
            if (fa - level) * (fb - level) < T::zero() || (fb - level == T::zero() && i + 2 == grid.len()) {
                if fb == level && fa == level {
                    continue;
                }
                events.push(Event::Crossing(bisect(&disc, level, a, b)));
            } else if fa == level && i > 0 {
                // Exact hit on a sample: counts as a crossing when the
                // neighbours straddle the level.
                let fp = values[i - 1];
                if (fp - level) * (fb - level) < T::zero() {
                    events.push(Event::Crossing(a));
                }
            }
        }
    }

    // Refine discrete extrema of D for hidden crossings and tangencies.
    for i in 1..grid.len() - 1 {
        let (fp, f, fnx) = (values[i - 1], values[i], values[i + 1]);
        let is_max = f >= fp && f >= fnx;
        let is_min = f <= fp && f <= fnx;
        if !(is_max || is_min) {
            continue;
        }
        let sign = if is_max { T::one() } else { -T::one() };
        let (lo, hi) = (grid[i - 1], grid[i + 1]);
        let (e_ext, f_ext) = golden_extremum(&disc, lo, hi, sign);
        let level = sign; // a maximum can only reach +1 from below, a minimum −1 from above
        let sampled_inside = (fp - level) * sign < T::zero() && (fnx - level) * sign < T::zero() && (f - level) * sign < T::zero();
        if !sampled_inside {
            continue;
        }
        let excess = (f_ext - level) * sign;
        if excess > T::tol(TANGENCY_TOL) {
            events.push(Event::Crossing(bisect(&disc, level, lo, e_ext)));
            events.push(Event::Crossing(bisect(&disc, level, e_ext, hi)));
        } else if excess > -T::tol(TANGENCY_TOL) {
            events.push(Event::Touch(e_ext));
        }
    }
    events.sort_by(|a, b| a.energy().partial_cmp(&b.energy()).unwrap());
    events.dedup_by(|a, b| (a.energy() - b.energy()).abs() <= T::epsilon() * a.energy().abs().max(T::one()) * T::lit(8.0) && matches!((a, b), (Event::Crossing(_), Event::Crossing(_))));

    let mut bands: Vec<[T; 2]> = Vec::new();
    let mut in_band = disc(floor).abs() <= T::one();
    let mut start = floor;
    let mut closed = 0usize;
    for ev in &events {
        if bands.len() >= max_bands {
            break;
        }
        match *ev {
            Event::Crossing(e) => {
                if in_band {
                    bands.push([start, e]);
                } else {
                    start = e;
                }
                in_band = !in_band;
            }
            Event::Touch(e) => {
                if in_band {
                    bands.push([start, e]);
                    start = e;
                    closed += 1;
                }
            }
        }
    }
    let mut truncated = false;
    if in_band && bands.len() < max_bands {
        bands.push([start, e_max]);
        truncated = true;
    }
    if in_band && start == floor {
        return Err(SpectralError::BracketingFailure {
            lo: floor.as_f64(),
            hi: grid[1].as_f64(),
        });
    }

    // Check the pairing against the band condition at interior points.
    let probe = |lo: T, hi: T, inside: bool| -> Result<()> {
        if hi <= lo {
            return Ok(());
        }
        let mid = lo + (hi - lo) / T::lit(2.0);
        let v = disc(mid).abs();
        let ok = if inside { v < T::one() } else { v > T::one() };
        if ok {
            Ok(())
        } else {
            Err(SpectralError::BracketingFailure {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            })
        }
    };
    let mut gaps = Vec::new();
    for (k, b) in bands.iter().enumerate() {
        probe(b[0], b[1], true)?;
        if k > 0 {
            let g = [bands[k - 1][1], b[0]];
            probe(g[0], g[1], false)?;
            gaps.push(g);
        }
    }

    let mut edges = Vec::with_capacity(2 * bands.len());
    for (k, b) in bands.iter().enumerate() {
        edges.push(b[0]);
        if !(truncated && k + 1 == bands.len()) {
            edges.push(b[1]);
        }
    }
    let max_edge_defect = edges
        .iter()
        .map(|&e| (disc(e).abs() - T::one()).abs())
        .fold(T::zero(), T::max);
    let e0 = bands.first().map(|b| b[0]).unwrap_or(e_max);
    Ok(BandStructure {
        e0,
        edges,
        bands,
        gaps,
        truncated,
        e_max,
        diagnostics: BandDiagnostics {
            e_floor: floor,
            samples: grid.len(),
            max_edge_defect,
            closed_gaps: closed,
        },
    })
}

fn sample_grid<T: Real>(d: T, e_min: T, e_max: T) -> Vec<T> {
    let mut grid = Vec::new();
    let zone = T::PI() / d;
    if e_min < T::zero() {
        let kmax = (-e_min).sqrt();
        let top = if e_max < T::zero() { (-e_max).sqrt() } else { T::zero() };
        let n = NEGATIVE_SAMPLES.max((T::from_count(SAMPLES_PER_ZONE) * (kmax - top) / zone).ceil().to_usize().unwrap_or(0));
        for i in 0..=n {
            let kappa = kmax - (kmax - top) * T::from_count(i) / T::from_count(n);
            grid.push(-kappa * kappa);
        }
    }
    if e_max > T::zero() {
        let k0 = if e_min > T::zero() { e_min.sqrt() } else { T::zero() };
        let k1 = e_max.sqrt();
        let n = ((k1 - k0) / zone * T::from_count(SAMPLES_PER_ZONE))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(16);
        let skip_first = !grid.is_empty();
        for i in 0..=n {
            if i == 0 && skip_first {
                continue;
            }
            let k = k0 + (k1 - k0) * T::from_count(i) / T::from_count(n);
            grid.push(k * k);
        }
    }
    if let Some(first) = grid.first_mut() {
        *first = e_min;
    }
    grid
}

/// Bisection of `f(E) = level` to full precision; `a < b` must bracket.
fn bisect<T: Real, F: Fn(T) -> T>(f: &F, level: T, mut a: T, mut b: T) -> T {
    let mut fa = f(a) - level;
    let fb = f(b) - level;
    if fa == T::zero() {
        return a;
    }
    if fb == T::zero() {
        return b;
    }
    for _ in 0..200 {
        let m = a + (b - a) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m) - level;
        if fm == T::zero() {
            return m;
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if (f(a) - level).abs() <= (f(b) - level).abs() {
        a
    } else {
        b
    }
}

/// Golden-section search for the extremum of `sign·f` on `[lo, hi]`.
fn golden_extremum<T: Real, F: Fn(T) -> T>(f: &F, mut lo: T, mut hi: T, sign: T) -> (T, T) {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = sign * f(x1);
    let mut f2 = sign * f(x2);
    for _ in 0..120 {
        if hi - lo <= T::epsilon() * T::lit(4.0) * hi.abs().max(T::one()) {
            break;
        }
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sign * f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sign * f(x2);
        }
    }
    let x = if f1 > f2 { x1 } else { x2 };
    (x, f(x))
}
