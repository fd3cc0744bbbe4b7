//! Discrete eigenvalues below `E₀` in dimension two, channel `l = 0`.
//!
//! The radial equation there is `−y'' − y/(4r²) + shells = E y`. Writing its
//! solutions at `E₀` in the Floquet basis `(u₀, v₀)` of the 1D comparison
//! operator and applying the Kepler substitution
//! `tan φ = (tan γ − v₀/u₀)/r` gives the slow flow
//!
//! ```text
//! φ' = −(1/r)·(u₀ sin φ / 2 + cos φ / u₀)²
//! ```
//!
//! between shells, with `tan φ` dropping by `β/(r_n u₀(r_n+) u₀(r_n−))` at each
//! shell. Unbounded decrease of `φ` means infinitely many eigenvalues below
//! `E₀`; the eigenvalues themselves come from Wronskian-zero counting.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectralError};
use crate::interaction::{InteractionParams, LatticeGeometry};
use crate::kronig1d::{
    floquet_eigenvector, free_propagator, ground_state_symmetry, monodromy, GroundSymmetry,
};
use crate::linalg::{cross, Mat2, StateVector};
use crate::ode::{integrate, OdeOptions};
use crate::radial::{
    count_wronskian_zeros, locate_eigenvalues, propagate_cell, regular_solution, ChannelSpec, OriginCondition,
};
use crate::scalar::Real;

/// Smallest `|u₀|` at a shell before the jump formula is declared singular.
const BASIS_ZERO_TOL: f64 = 1e-10;
/// Verdict threshold on the phase drop per decade of the last window.
pub const DROP_PER_DECADE_THRESHOLD: f64 = 0.1;
/// Offset shift, in units of `d`, used when the Floquet solution vanishes at a shell.
pub const OFFSET_PERTURBATION: f64 = 1e-6;

/// Floquet solutions of the 1D comparison operator at `E₀`.
///
/// `u₀` is the (anti)periodic one, `v₀` its companion with `W[u₀, v₀] = 1`.
/// Both are stored as their data just right of shell 0 together with the
/// nilpotent part `N = M − sI` of the monodromy, so that the data right of
/// shell `n` is `sⁿ (I + n s N) w` for any integer `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetBasis<T> {
    pub e0: T,
    pub symmetry: GroundSymmetry,
    pub spacing: T,
    pub offset: T,
    u_ref: [T; 2],
    v_ref: [T; 2],
    nilpotent: Mat2<T>,
}

impl<T: Real> FloquetBasis<T> {
    fn sign(&self) -> T {
        self.symmetry.multiplier()
    }

    fn at_site(&self, n: i64, w: [T; 2]) -> [T; 2] {
        let s = self.sign();
        let sn = if n.rem_euclid(2) == 0 { T::one() } else { s };
        let nw = self.nilpotent.apply(w);
        let k = T::from_i64(n).expect("representable") * s;
        [sn * (w[0] + k * nw[0]), sn * (w[1] + k * nw[1])]
    }

    /// Cell index `n` and distance past shell `n`, right-continuous.
    fn locate(&self, r: T) -> (i64, T) {
        let n = ((r - self.offset) / self.spacing).floor();
        let s = r - (self.offset + n * self.spacing);
        (n.to_i64().expect("representable"), s.max(T::zero()))
    }

    fn in_cell(&self, n: i64, s: T) -> ([T; 2], [T; 2]) {
        let p = free_propagator(self.e0, s);
        (p.apply(self.at_site(n, self.u_ref)), p.apply(self.at_site(n, self.v_ref)))
    }

    /// `(u₀, u₀')` at `r`; right limit at shells.
    pub fn u(&self, r: T) -> StateVector<T> {
        let (n, s) = self.locate(r);
        StateVector::from_pair(self.in_cell(n, s).0, r)
    }

    /// `(v₀, v₀')` at `r`; right limit at shells.
    pub fn v(&self, r: T) -> StateVector<T> {
        let (n, s) = self.locate(r);
        StateVector::from_pair(self.in_cell(n, s).1, r)
    }

    /// Both solutions just left of shell `n`.
    fn left_of_site(&self, n: i64) -> ([T; 2], [T; 2]) {
        self.in_cell(n - 1, self.spacing)
    }
}

/// Builds `(u₀, v₀)`; `u₀` has unit norm just right of the first shell.
pub fn floquet_basis_at_e0<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>) -> Result<FloquetBasis<T>> {
    let g = ground_state_symmetry(p, geom)?;
    let m = monodromy(p, geom, g.e0).entries;
    let s = g.symmetry.multiplier::<T>();
    let mut u = floquet_eigenvector(&m, s);
    if u[0] < T::zero() || (u[0] == T::zero() && u[1] < T::zero()) {
        u = [-u[0], -u[1]];
    }
    // W[u, v] = u v' − u' v = 1 for v = (−u', u)/|u|².
    let n2 = u[0] * u[0] + u[1] * u[1];
    let v = [-u[1] / n2, u[0] / n2];
    let nilpotent = Mat2::new(m.m[0][0] - s, m.m[0][1], m.m[1][0], m.m[1][1] - s);
    Ok(FloquetBasis {
        e0: g.e0,
        symmetry: g.symmetry,
        spacing: geom.spacing,
        offset: geom.offset,
        u_ref: u,
        v_ref: v,
        nilpotent,
    })
}

/// Kepler phase `φ` and Prüfer-type phase `γ` along `[r0, r1]`, sampled at
/// `r0`, right of every shell, and `r1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeplerTrace<T> {
    pub radii: Vec<T>,
    pub phi: Vec<T>,
    pub gamma_phase: Vec<T>,
    /// `Δ tan φ` applied at each sample (zero away from shells).
    pub jumps: Vec<T>,
    /// `Σ |Δ tan φ|`.
    pub jump_sum: T,
    /// Set when the lattice offset had to be shifted to avoid a zero of `u₀`.
    pub perturbed_offset: bool,
}

impl<T: Real> KeplerTrace<T> {
    /// `φ(r1) − φ(r0)`, never positive.
    pub fn total_drop(&self) -> T {
        *self.phi.last().unwrap() - self.phi[0]
    }

    /// `φ` at `r` by linear interpolation between samples.
    pub fn phi_at(&self, r: T) -> T {
        let i = self.radii.partition_point(|&x| x <= r);
        if i == 0 {
            return self.phi[0];
        }
        if i == self.radii.len() {
            return *self.phi.last().unwrap();
        }
        let (a, b) = (self.radii[i - 1], self.radii[i]);
        let t = (r - a) / (b - a);
        self.phi[i - 1] + t * (self.phi[i] - self.phi[i - 1])
    }
}

fn kepler_rhs<T: Real>(u: T, phi: T) -> T {
    let (s, c) = phi.sin_cos();
    let w = u * s / T::lit(2.0) + c / u;
    -w * w
}

/// `γ` from the coefficients of `y` in the basis, unwrapped near `prev`.
fn gamma_of<T: Real>(u: [T; 2], v: [T; 2], y: [T; 2], prev: Option<T>) -> T {
    let g = (v[1] * y[0] - v[0] * y[1]).atan2(u[1] * y[0] - u[0] * y[1]);
    unwrap_near(g, prev)
}

fn unwrap_near<T: Real>(x: T, prev: Option<T>) -> T {
    match prev {
        None => x,
        Some(p) => {
            let tau = T::PI() + T::PI();
            x + tau * ((p - x) / tau).round()
        }
    }
}

/// Integrates the Kepler flow from `r0` to `r1`, tracking `γ` alongside from
/// the regular solution at `E₀`.
pub fn kepler_trace<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>, r0: T, r1: T) -> Result<KeplerTrace<T>> {
    let basis = floquet_basis_at_e0(p, geom)?;
    trace_with(&basis, p, geom, r0, r1)
}

fn trace_with<T: Real>(
    basis: &FloquetBasis<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    r0: T,
    r1: T,
) -> Result<KeplerTrace<T>> {
    if !(r0 > T::zero() && r1 > r0) {
        return Err(SpectralError::InvalidInput(format!("kepler_trace needs 0 < r0 < r1, got ({r0}, {r1})")));
    }
    let ch = ChannelSpec::<T>::new(2, 0)?;
    let e0 = basis.e0;
    let lam = p.matrix();
    let beta = p.beta();
    let opts = OdeOptions::default();

    // Regular solution up to r0.
    let first = geom.site(0);
    let mut r_a = r0.min(first) / T::lit(2.0);
    if e0 != T::zero() {
        r_a = r_a.min(T::lit(0.5) / e0.abs().sqrt());
    }
    let mut y = regular_solution(&ch, e0, r_a);
    let mut x = r_a;
    for site in geom.sites_in(r_a, r0) {
        y = propagate_cell(&ch, e0, x, site, &y)?;
        y = StateVector::from_pair(lam.apply(y.pair()), site);
        y = y.normalized();
        x = site;
    }
    if x < r0 {
        y = propagate_cell(&ch, e0, x, r0, &y)?.normalized();
    }

    let (n0, s0) = basis.locate(r0);
    let (u0, v0) = basis.in_cell(n0, s0);
    let gamma0 = gamma_of(u0, v0, y.pair(), None);
    // tan φ = −y / (r u W[u, y]).
    let t = -y.value / (r0 * u0[0] * cross(u0, y.pair()));
    let phi0 = {
        let a = t.atan();
        a + T::PI() * ((gamma0 - a) / T::PI()).round()
    };

    let mut out = KeplerTrace {
        radii: vec![r0],
        phi: vec![phi0],
        gamma_phase: vec![gamma0],
        jumps: vec![T::zero()],
        jump_sum: T::zero(),
        perturbed_offset: false,
    };
    let mut phi = phi0;
    let mut gamma = gamma0;
    let mut x = r0;
    let mut cell = n0;
    let mut stops: Vec<T> = geom.sites_in(r0, r1).collect();
    if stops.last().map_or(true, |&s| s < r1) {
        stops.push(r1);
    }
    let pi = T::PI();
    for stop in stops {
        let is_shell = geom.sites_in(x, stop).next().is_some();
        let base = basis.offset + T::from_i64(cell).expect("representable") * basis.spacing;
        let yphi = integrate(
            |r, z: &[T; 1]| {
                let (u, _) = basis.in_cell(cell, (r - base).max(T::zero()));
                [kepler_rhs(u[0], z[0]) / r]
            },
            x,
            [phi],
            stop,
            &opts,
        )?;
        phi = yphi[0];
        y = propagate_cell(&ch, e0, x, stop, &y)?;
        let mut jump = T::zero();
        if is_shell {
            cell += 1;
            let (ul, _) = basis.left_of_site(cell);
            let (ur, _) = basis.in_cell(cell, T::zero());
            if ul[0].abs() < T::tol(BASIS_ZERO_TOL) || ur[0].abs() < T::tol(BASIS_ZERO_TOL) {
                return Err(SpectralError::BasisZero { radius: stop.as_f64() });
            }
            jump = -beta / (stop * ur[0] * ul[0]);
            if jump != T::zero() {
                let t_new = phi.tan() + jump;
                // Preimage in (φ − π, φ].
                let diff = phi - t_new.atan();
                let back = diff - pi * (diff / pi).floor();
                phi = phi - back;
            }
            y = StateVector::from_pair(lam.apply(y.pair()), stop);
        }
        y = y.normalized();
        let (uc, vc) = basis.in_cell(cell, (stop - (basis.offset + T::from_i64(cell).expect("representable") * basis.spacing)).max(T::zero()));
        gamma = gamma_of(uc, vc, y.pair(), Some(gamma));
        out.radii.push(stop);
        out.phi.push(phi);
        out.gamma_phase.push(gamma);
        out.jumps.push(jump);
        out.jump_sum += jump.abs();
        x = stop;
    }
    Ok(out)
}

/// Kepler trace with the documented fallback: when `u₀` vanishes at a shell
/// the lattice offset is shifted by `10⁻⁶·d` and the trace flagged.
pub fn kepler_trace_with_fallback<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    r0: T,
    r1: T,
) -> Result<KeplerTrace<T>> {
    match kepler_trace(p, geom, r0, r1) {
        Err(SpectralError::BasisZero { .. }) => {
            let shifted = LatticeGeometry::with_offset(
                geom.spacing,
                geom.offset + T::lit(OFFSET_PERTURBATION) * geom.spacing,
                geom.count_hint,
            )?;
            let mut t = kepler_trace(p, &shifted, r0, r1)?;
            t.perturbed_offset = true;
            Ok(t)
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseVerdict {
    Unbounded,
    PlateauSuspected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDrop<T> {
    pub window: (T, T),
    /// `(φ(a) − φ(b)) / log₁₀(b/a)`, non-negative.
    pub drop_per_decade: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTest<T> {
    pub windows: Vec<WindowDrop<T>>,
    /// Drop per decade of the last window, which decides the verdict.
    pub drop_per_decade: T,
    pub verdict: PhaseVerdict,
    pub perturbed_offset: bool,
}

/// Decrease of `φ` per decade of `r` over each window.
///
/// The verdict is `Unbounded` when the last window still loses more than
/// [`DROP_PER_DECADE_THRESHOLD`] per decade. This is a finite-range heuristic.
pub fn phase_unbounded_test<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    windows: &[(T, T)],
) -> Result<PhaseTest<T>> {
    let bad = || SpectralError::InvalidInput("windows must be increasing, positive and span at least three decades".into());
    let (first, last) = match (windows.first(), windows.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(bad()),
    };
    if !(first.0 > T::zero()) || windows.iter().any(|w| !(w.1 > w.0)) || windows.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(bad());
    }
    if last.1 / first.0 < T::lit(1e3) * (T::one() - T::tol(1e-12)) {
        return Err(bad());
    }
    let trace = kepler_trace_with_fallback(p, geom, first.0, last.1)?;
    let drops: Vec<WindowDrop<T>> = windows
        .iter()
        .map(|&(a, b)| WindowDrop {
            window: (a, b),
            drop_per_decade: (trace.phi_at(a) - trace.phi_at(b)) / (b / a).log10(),
        })
        .collect();
    let last_drop = drops.last().unwrap().drop_per_decade;
    Ok(PhaseTest {
        windows: drops,
        drop_per_decade: last_drop,
        verdict: if last_drop > T::lit(DROP_PER_DECADE_THRESHOLD) {
            PhaseVerdict::Unbounded
        } else {
            PhaseVerdict::PlateauSuspected
        },
        perturbed_offset: trace.perturbed_offset,
    })
}

/// Decade windows `[a·10^k, a·10^{k+1}]` from `a` up to `b`.
pub fn decade_windows<T: Real>(a: T, b: T) -> Vec<(T, T)> {
    let mut out = Vec::new();
    let mut x = a;
    while x * T::lit(10.0) <= b * (T::one() + T::tol(1e-12)) {
        out.push((x, x * T::lit(10.0)));
        x = x * T::lit(10.0);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnboundedEvidence<T> {
    pub window: (T, T),
    pub drop_per_decade: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelshReport<T> {
    pub e0: T,
    pub r_max: T,
    pub eigenvalues_found: Vec<T>,
    /// Normalized matching Wronskian of each eigenvalue.
    pub matching_defects: Vec<T>,
    /// `φ(r_max) − φ(d/2)`.
    pub phase_drop: T,
    pub unbounded_evidence: UnboundedEvidence<T>,
}

/// Target relative accuracy of each Welsh eigenvalue.
const WELSH_REL_TOL: f64 = 1e-13;
/// Gap left below `E₀` for the upper end of the search window.
const WELSH_MARGIN: f64 = 1e-9;

/// The `n_wanted` lowest eigenvalues of `H_{Λ,0}` (ν = 2) on `(0, r_max)`
/// below `E₀`, ascending. The lowest ones are the best resolved by the
/// truncation.
///
/// Fewer than `n_wanted` yields `FewerThanRequested` carrying what was found.
pub fn find_welsh_eigenvalues<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    n_wanted: usize,
    r_max: T,
) -> Result<WelshReport<T>> {
    let report = welsh_scan(p, geom, n_wanted, r_max)?;
    if report.eigenvalues_found.len() < n_wanted {
        return Err(SpectralError::FewerThanRequested {
            found: report.eigenvalues_found.len(),
            wanted: n_wanted,
            r_max: r_max.as_f64(),
            eigenvalues: report.eigenvalues_found.iter().map(|e| e.as_f64()).collect(),
        });
    }
    Ok(report)
}

/// Like [`find_welsh_eigenvalues`] but a shortfall is not an error.
pub fn welsh_scan<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    n_wanted: usize,
    r_max: T,
) -> Result<WelshReport<T>> {
    if n_wanted == 0 {
        return Err(SpectralError::InvalidInput("n_wanted must be at least 1".into()));
    }
    let basis = floquet_basis_at_e0(p, geom)?;
    let e0 = basis.e0;
    let ch = ChannelSpec::<T>::new(2, 0)?;
    let bc = OriginCondition::Regular2D;
    let domain = (T::zero(), r_max);
    let top = e0 - T::tol(WELSH_MARGIN) * e0.abs().max(T::one());
    let mut w = e0.abs().max(T::one());
    for _ in 0..60 {
        let below = count_wronskian_zeros(&ch, p, geom, e0 - w - w, e0 - w, domain, bc)?;
        if below == 0 {
            break;
        }
        w = w + w;
    }
    let mut eig = locate_eigenvalues(&ch, p, geom, e0 - w, top, domain, bc, T::tol(WELSH_REL_TOL))?;
    eig.dedup_by(|a, b| (*a - *b).abs() <= T::tol(WELSH_REL_TOL) * a.abs().max(T::one()));
    eig.truncate(n_wanted);
    let matching_defects = eig
        .iter()
        .map(|&e| matching_defect(&ch, p, geom, e, r_max))
        .collect::<Result<Vec<_>>>()?;

    let start = geom.offset;
    let trace = trace_with(&basis, p, geom, start, r_max)?;
    let window = ((r_max / T::lit(10.0)).max(start), r_max);
    let drop = (trace.phi_at(window.0) - trace.phi_at(window.1)) / (window.1 / window.0).log10();
    Ok(WelshReport {
        e0,
        r_max,
        matching_defects,
        phase_drop: trace.total_drop(),
        unbounded_evidence: UnboundedEvidence {
            window,
            drop_per_decade: drop,
        },
        eigenvalues_found: eig,
    })
}

/// `|W[f, g]|` of the unit-normalized regular solution `f` and the solution
/// `g` vanishing at `r_max`, taken at the cell midpoint where
/// `log|f| + log|g|` peaks, i.e. where the eigenfunction has its weight.
fn matching_defect<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    energy: T,
    r_max: T,
) -> Result<T> {
    let lam = p.matrix();
    let lam_inv = lam.symplectic_inverse();
    let half = geom.spacing / T::lit(2.0);
    let mids: Vec<T> = (0..)
        .map(|n| geom.site(n) + half)
        .take_while(|&x| x < r_max)
        .collect();
    if mids.is_empty() {
        return Err(SpectralError::InvalidInput("r_max must exceed the first shell".into()));
    }

    // Forward: regular solution, sampled at each midpoint with its log scale.
    let r_a = (geom.site(0) / T::lit(2.0)).min(T::lit(0.5) / energy.abs().sqrt().max(T::tol(1e-12)));
    let mut f = regular_solution(ch, energy, r_a);
    let mut log_f = f.norm().ln();
    f = f.normalized();
    let mut x = r_a;
    let mut fwd = Vec::with_capacity(mids.len());
    for &m in &mids {
        for site in geom.sites_in(x, m) {
            f = propagate_cell(ch, energy, x, site, &f)?;
            f = StateVector::from_pair(lam.apply(f.pair()), site);
            x = site;
        }
        f = propagate_cell(ch, energy, x, m, &f)?;
        x = m;
        log_f += f.norm().ln();
        f = f.normalized();
        fwd.push((f, log_f));
    }

    // Backward from the wall.
    let mut g = StateVector::new(T::zero(), T::one(), r_max);
    let mut log_g = T::zero();
    let mut x = r_max;
    let mut best: Option<(T, T)> = None;
    for (i, &m) in mids.iter().enumerate().rev() {
        let mut sites: Vec<T> = geom.sites_in(m, x).filter(|&s| s < r_max).collect();
        sites.reverse();
        for site in sites {
            g = propagate_cell(ch, energy, x, site, &g)?;
            g = StateVector::from_pair(lam_inv.apply(g.pair()), site);
            x = site;
        }
        g = propagate_cell(ch, energy, x, m, &g)?;
        x = m;
        log_g += g.norm().ln();
        g = g.normalized();
        let (fi, lf) = fwd[i];
        let weight = lf + log_g;
        if best.map_or(true, |(w, _)| weight > w) {
            best = Some((weight, cross(fi.pair(), g.pair()).abs()));
        }
    }
    Ok(best.expect("at least one midpoint").1)
}

/// Eigenvalues below `E₀` of the truncated channels `ν ≥ 3`, `l` in the
/// inclusive range. There are none: the centrifugal term is non-negative
/// and Dirichlet truncation only raises the form.
pub fn count_below_e0_higher_dim<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    nu: u32,
    l_range: (u32, u32),
    r_max: T,
) -> Result<usize> {
    if nu < 3 {
        return Err(SpectralError::InvalidInput("the negative check is for nu >= 3".into()));
    }
    let g = ground_state_symmetry(p, geom)?;
    let floor = crate::kronig1d::default_energy_floor(p, geom) - T::one();
    let top = g.e0 - T::tol(WELSH_MARGIN) * g.e0.abs().max(T::one());
    let mut total = 0;
    for l in l_range.0..=l_range.1 {
        let ch = ChannelSpec::<T>::new(nu, l)?;
        total += count_wronskian_zeros(&ch, p, geom, floor.min(top - T::one()), top, (T::zero(), r_max), ch.origin_condition())?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn g1() -> LatticeGeometry<f64> {
        LatticeGeometry::<f64>::new(1.0).unwrap()
    }

    #[test]
    fn free_basis_is_constant_and_linear() {
        let b = floquet_basis_at_e0(&InteractionParams::<f64>::free(), &g1()).unwrap();
        for r in [0.1, 0.7, 3.3, 40.2] {
            let u = b.u(r);
            let v = b.v(r);
            assert!((u.value - 1.0).abs() < 1e-12 && u.derivative.abs() < 1e-12);
            assert!((v.value - (r - 0.5)).abs() < 1e-10 && (v.derivative - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_basis_wronskian() {
        let p = InteractionParams::delta_type(1.0);
        let b = floquet_basis_at_e0(&p, &g1()).unwrap();
        assert_eq!(b.symmetry, GroundSymmetry::Periodic);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r: f64 = rng.gen_range(0.01..200.0);
            let w = cross(b.u(r).pair(), b.v(r).pair());
            assert!((w - 1.0).abs() < 1e-8, "W = {w} at {r}");
        }
    }

    #[test]
    fn antiperiodic_basis() {
        let p = InteractionParams::delta_prime_type(-1.0);
        let b = floquet_basis_at_e0(&p, &g1()).unwrap();
        assert_eq!(b.symmetry, GroundSymmetry::Antiperiodic);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let r: f64 = rng.gen_range(0.01..100.0);
            let (a, c) = (b.u(r), b.u(r + 1.0));
            assert!((a.value + c.value).abs() < 1e-8 * a.norm().max(1.0));
        }
    }

    #[test]
    fn free_trace_plateaus_without_jumps() {
        let t = kepler_trace(&InteractionParams::<f64>::free(), &g1(), 0.5, 1000.0).unwrap();
        assert_eq!(t.jump_sum, 0.0);
        for w in t.phi.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        let late = t.phi_at(100.0) - t.phi_at(1000.0);
        assert!(late < 0.1);
    }

    #[test]
    fn delta_trace_is_monotone_and_tracks_gamma() {
        let p = InteractionParams::delta_type(-1.0);
        let t = kepler_trace(&p, &g1(), 0.5, 500.0).unwrap();
        assert_eq!(t.jump_sum, 0.0);
        for w in t.phi.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        let diff = |t: &KeplerTrace<f64>| {
            t.phi
                .iter()
                .zip(&t.gamma_phase)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        let longer = kepler_trace(&p, &g1(), 0.5, 2000.0).unwrap();
        assert!(diff(&longer) < diff(&t) + 1.0);
    }

    #[test]
    fn delta_prime_jumps_are_negative() {
        let p = InteractionParams::delta_prime_type(0.5);
        let t = kepler_trace(&p, &g1(), 0.5, 50.0).unwrap();
        assert!(t.jump_sum > 0.0);
        assert!(t.jumps.iter().all(|&j| j <= 0.0));
        for w in t.phi.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn verdicts() {
        let w = decade_windows(1.0, 1e4);
        assert_eq!(w.len(), 4);
        let free = phase_unbounded_test(&InteractionParams::<f64>::free(), &g1(), &w).unwrap();
        assert_eq!(free.verdict, PhaseVerdict::PlateauSuspected);
        let strong = phase_unbounded_test(&InteractionParams::delta_type(-10.0), &g1(), &w).unwrap();
        assert_eq!(strong.verdict, PhaseVerdict::Unbounded);
        let repulsive_prime = phase_unbounded_test(&InteractionParams::delta_prime_type(0.5), &g1(), &w).unwrap();
        assert_eq!(repulsive_prime.verdict, PhaseVerdict::Unbounded);
        assert!(phase_unbounded_test(&InteractionParams::<f64>::free(), &g1(), &w[..2]).is_err());
    }

    #[test]
    fn free_has_no_welsh_eigenvalues() {
        match find_welsh_eigenvalues(&InteractionParams::<f64>::free(), &g1(), 1, 200.0) {
            Err(SpectralError::FewerThanRequested { found, eigenvalues, .. }) => {
                assert_eq!(found, 0);
                assert!(eigenvalues.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn attractive_delta_has_welsh_eigenvalues() {
        let p = InteractionParams::delta_type(-10.0);
        let r = find_welsh_eigenvalues(&p, &g1(), 2, 200.0).unwrap();
        assert_eq!(r.eigenvalues_found.len(), 2);
        for w in r.eigenvalues_found.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(r.eigenvalues_found.iter().all(|&e| e < r.e0));
        assert!(r.matching_defects.iter().all(|&d| d < 1e-6), "{:?}", r.matching_defects);
        assert!(r.phase_drop <= 0.0);
    }

    #[test]
    fn no_eigenvalues_below_e0_in_three_dimensions() {
        let p = InteractionParams::delta_type(-3.0);
        assert_eq!(count_below_e0_higher_dim(&p, &g1(), 3, (0, 2), 60.0).unwrap(), 0);
    }
}
