//! Partial-wave propagation: `−u'' + (c/r²)u = Eu` between shells with the
//! interaction applied at every shell radius.
//!
//! Boundary data is always ordered `(u, u')`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectralError};
use crate::interaction::{InteractionParams, LatticeGeometry};
use crate::kronig1d::free_propagator;
use crate::linalg::{Mat2, StateVector};
use crate::ode::{integrate, OdeOptions};
use crate::scalar::Real;

pub use crate::linalg::wronskian;

/// Behaviour imposed at `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginCondition {
    /// `ν = 2, l = 0`: the `√r` branch, excluding `√r·ln r`.
    Regular2D,
    /// `ν = 3, l = 0`: `u(0+) = 0`.
    Dirichlet3D,
    /// Positive centrifugal term; the recessive solution is the only choice.
    None,
}

/// Angular-momentum channel of the radial operator in dimension `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec<T> {
    pub nu: u32,
    pub l: u32,
    /// `(ν−1)(ν−3)/4 + l(l+ν−2)`.
    pub c: T,
}

impl<T: Real> ChannelSpec<T> {
    pub fn new(nu: u32, l: u32) -> Result<Self> {
        if nu < 2 {
            return Err(SpectralError::InvalidInput(format!("dimension nu = {nu} must be at least 2")));
        }
        let (n, l_) = (i64::from(nu), i64::from(l));
        // 4c is an integer; divide once at the end.
        let four_c = (n - 1) * (n - 3) + 4 * l_ * (l_ + n - 2);
        let c = T::from_i64(four_c).expect("representable") / T::lit(4.0);
        Ok(Self { nu, l, c })
    }

    pub fn origin_condition(&self) -> OriginCondition {
        match (self.nu, self.l) {
            (2, 0) => OriginCondition::Regular2D,
            (3, 0) => OriginCondition::Dirichlet3D,
            _ => OriginCondition::None,
        }
    }

    /// `√(c + ¼) = l + (ν−2)/2`.
    pub fn bessel_order(&self) -> T {
        T::from_u32(self.l).expect("representable") + (T::from_u32(self.nu).expect("representable") - T::lit(2.0)) / T::lit(2.0)
    }

    pub fn potential(&self, r: T) -> T {
        self.c / (r * r)
    }
}

/// Regular solution near the origin, `u = r^{½+ν_b} Σ (−Er²/4)^m / (m! (ν_b+1)_m)`.
///
/// The series is entire in `r` but cancels for large `Er²`; callers evaluate
/// it only inside the first shell and where `|E| r² ≲ 4(ν_b+1)`.
pub fn regular_solution<T: Real>(ch: &ChannelSpec<T>, energy: T, r: T) -> StateVector<T> {
    let nb = ch.bessel_order();
    let s = T::lit(0.5) + nb;
    let z = -energy * r * r / T::lit(4.0);
    let mut term = T::one();
    let mut u = T::zero();
    let mut du = T::zero();
    for m in 0..400usize {
        let mf = T::from_count(m);
        u += term;
        du += term * (s + T::lit(2.0) * mf);
        let next = term * z / ((mf + T::one()) * (nb + mf + T::one()));
        if next.abs() <= T::epsilon() * u.abs() && m > 2 {
            break;
        }
        term = next;
    }
    let rs = r.powf(s);
    StateVector::new(rs * u, rs * du / r, r)
}

/// Transfer of `(u, u')` over a stretch without shells.
///
/// Exact for `c = 0`; otherwise an adaptive Dormand–Prince integration.
/// Either direction is allowed.
pub fn propagate_cell<T: Real>(
    ch: &ChannelSpec<T>,
    energy: T,
    from: T,
    to: T,
    f: &StateVector<T>,
) -> Result<StateVector<T>> {
    if !(from > T::zero() && to > T::zero()) {
        return Err(SpectralError::InvalidInput("radii must be positive".into()));
    }
    if ch.c == T::zero() {
        let v = free_propagator(energy, to - from).apply(f.pair());
        return Ok(StateVector::from_pair(v, to));
    }
    let c = ch.c;
    let y = integrate(
        |r, y: &[T; 2]| [y[1], (c / (r * r) - energy) * y[0]],
        from,
        f.pair(),
        to,
        &OdeOptions::default(),
    )?;
    Ok(StateVector::from_pair(y, to))
}

fn propagate_matrix<T: Real>(ch: &ChannelSpec<T>, energy: T, from: T, to: T) -> Result<Mat2<T>> {
    if ch.c == T::zero() {
        return Ok(free_propagator(energy, to - from));
    }
    let c = ch.c;
    let z = T::zero();
    let o = T::one();
    let y = integrate(
        |r, y: &[T; 4]| {
            let w = c / (r * r) - energy;
            [y[1], w * y[0], y[3], w * y[2]]
        },
        from,
        [o, z, z, o],
        to,
        &OdeOptions::default(),
    )?;
    Ok(Mat2::from_columns([y[0], y[1]], [y[2], y[3]]))
}

/// Transfer matrix `T(E, x1, x0)` acting on `(u(x0), u'(x0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix<T> {
    pub entries: Mat2<T>,
    pub energy: T,
    pub from: T,
    pub to: T,
}

/// Composes free flow and the interaction at every shell in `(x0, x1]`.
pub fn transfer<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    energy: T,
    x0: T,
    x1: T,
) -> Result<TransferMatrix<T>> {
    if !(x0 > T::zero() && x1 > x0) {
        return Err(SpectralError::InvalidInput(format!("transfer needs 0 < x0 < x1, got ({x0}, {x1})")));
    }
    let lam = p.matrix();
    let mut m = Mat2::identity();
    let mut x = x0;
    for site in geom.sites_in(x0, x1) {
        m = lam * propagate_matrix(ch, energy, x, site)? * m;
        x = site;
    }
    if x < x1 {
        m = propagate_matrix(ch, energy, x, x1)? * m;
    }
    Ok(TransferMatrix {
        entries: m,
        energy,
        from: x0,
        to: x1,
    })
}

/// Prüfer variables `(u, u') = e^{log_rho} (cos θ, sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruferState<T> {
    pub theta: T,
    pub log_rho: T,
    pub position: T,
}

impl<T: Real> PruferState<T> {
    pub fn from_state(f: &StateVector<T>) -> Self {
        Self {
            theta: f.derivative.atan2(f.value),
            log_rho: f.norm().ln(),
            position: f.position,
        }
    }

    pub fn to_state(&self) -> StateVector<T> {
        let rho = self.log_rho.exp();
        let (s, c) = self.theta.sin_cos();
        StateVector::new(rho * c, rho * s, self.position)
    }
}

/// Representative of `angle (mod period)` closest to `reference`.
pub(crate) fn nearest_branch<T: Real>(angle: T, reference: T, period: T) -> T {
    angle + period * ((reference - angle) / period).round()
}

/// Advances Prüfer variables to `to`, crossing every shell in `(position, to]`.
///
/// Between shells `θ' = (c/r² − E) cos²θ − sin²θ` and
/// `(log ρ)' = (1 + c/r² − E) sin θ cos θ`, so θ decreases through the zeros
/// of `u`. At a shell the interaction is applied to the unit vector and the
/// new angle is the representative nearest to the incoming one.
pub fn prufer_advance<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    energy: T,
    state: PruferState<T>,
    to: T,
) -> Result<PruferState<T>> {
    if !(state.position < to && state.position > T::zero()) {
        return Err(SpectralError::InvalidInput(format!(
            "prufer_advance needs 0 < position < to, got ({}, {})",
            state.position, to
        )));
    }
    let c = ch.c;
    let rhs = |r: T, y: &[T; 2]| {
        let (s, co) = y[0].sin_cos();
        let w = c / (r * r) - energy;
        [w * co * co - s * s, (T::one() + w) * s * co]
    };
    let opts = OdeOptions::default();
    let mut y = [state.theta, state.log_rho];
    let mut x = state.position;
    for site in geom.sites_in(x, to) {
        y = integrate(rhs, x, y, site, &opts)?;
        y = prufer_jump(p, y);
        x = site;
    }
    if x < to {
        y = integrate(rhs, x, y, to, &opts)?;
    }
    Ok(PruferState {
        theta: y[0],
        log_rho: y[1],
        position: to,
    })
}

fn prufer_jump<T: Real>(p: &InteractionParams<T>, y: [T; 2]) -> [T; 2] {
    if p.is_free() {
        return y;
    }
    let (s, c) = y[0].sin_cos();
    let w = p.matrix().apply([c, s]);
    let theta = nearest_branch(w[1].atan2(w[0]), y[0], T::TAU());
    [theta, y[1] + w[0].hypot(w[1]).ln()]
}

/// Phase of `(u, u'/s)` for a fixed scale `s`; zeros of a Wronskian are the
/// points where two such phases differ by a multiple of π.
struct ScaledPhase<'a, T> {
    ch: &'a ChannelSpec<T>,
    energy: T,
    scale: T,
}

impl<T: Real> ScaledPhase<'_, T> {
    fn angle(&self, v: [T; 2]) -> T {
        (v[1] / self.scale).atan2(v[0])
    }

    fn unit(&self, psi: T) -> [T; 2] {
        let (s, c) = psi.sin_cos();
        [c, self.scale * s]
    }

    /// Continuous change of the phase from `a` to `b` (either order) with no
    /// shell in between. The flow is π-periodic in ψ.
    fn change(&self, psi: T, a: T, b: T) -> Result<T> {
        let base = nearest_branch(psi, T::zero(), T::PI());
        if self.ch.c == T::zero() {
            // Exact flow in pieces short enough to unwrap unambiguously.
            let rate = self.scale + self.energy.abs() / self.scale;
            let n = ((b - a).abs() * rate / T::lit(0.5)).ceil().to_usize().unwrap_or(1).max(1);
            let h = (b - a) / T::from_count(n);
            let step = free_propagator(self.energy, h);
            let mut v = self.unit(base);
            let mut ang = base;
            for _ in 0..n {
                v = step.apply(v);
                let nv = v[0].hypot(v[1]);
                v = [v[0] / nv, v[1] / nv];
                ang = nearest_branch(self.angle(v), ang, T::TAU());
            }
            return Ok(ang - base);
        }
        let (c, e, s) = (self.ch.c, self.energy, self.scale);
        let y = integrate(
            |r, y: &[T; 1]| {
                let (sn, cs) = y[0].sin_cos();
                [(c / (r * r) - e) / s * cs * cs - s * sn * sn]
            },
            a,
            [base],
            b,
            &OdeOptions::default(),
        )?;
        Ok(y[0] - base)
    }
}

/// Phase near the origin in the plane `(u, (r u' − u/2)/κ)`, integrated in
/// `t = ln r`. The regular and singular branches approach distinct fixed
/// angles `±atan(ν_b/κ)` as `r → 0`, so the relative phase has a limit there.
struct OriginPhase<T> {
    order: T,
    kappa: T,
    energy: T,
}

impl<T: Real> OriginPhase<T> {
    fn new(ch: &ChannelSpec<T>, energy: T) -> Self {
        let order = ch.bessel_order();
        Self {
            order,
            kappa: order.max(T::lit(0.5)),
            energy,
        }
    }

    fn angle(&self, f: &StateVector<T>) -> T {
        let r = f.position;
        ((r * f.derivative - f.value / T::lit(2.0)) / self.kappa).atan2(f.value)
    }

    /// `(u, u')` at `r` of the unit vector with phase `psi`.
    fn state(&self, psi: T, r: T) -> [T; 2] {
        let (s, c) = psi.sin_cos();
        [c, (self.kappa * s + c / T::lit(2.0)) / r]
    }

    fn change(&self, psi: T, r0: T, r1: T) -> Result<T> {
        let base = nearest_branch(psi, T::zero(), T::PI());
        let (nb2, k, e) = (self.order * self.order, self.kappa, self.energy);
        let y = integrate(
            |t, y: &[T; 1]| {
                let (sn, cs) = y[0].sin_cos();
                let r2 = (t + t).exp();
                [(nb2 - e * r2) / k * cs * cs - k * sn * sn]
            },
            r0.ln(),
            [base],
            r1.ln(),
            &OdeOptions::default(),
        )?;
        Ok(y[0] - base)
    }
}

/// Moves `delta` to the representative of `rel (mod π)` inside the same
/// open interval `(kπ, (k+1)π)`; the sign of the Wronskian is unchanged by
/// any orientation-preserving change of the phase plane.
fn reanchor<T: Real>(delta: T, rel: T) -> T {
    let pi = T::PI();
    (delta / pi).floor() * pi + (rel - (rel / pi).floor() * pi)
}

/// Number of Wronskian zeros of the left solution at `e1` and the right
/// solution at `e2` on the truncated domain; equals the number of
/// eigenvalues of the truncated operator in `(e1, e2)`.
///
/// `domain.0 = 0` imposes the origin condition `bc`, which must be the one
/// belonging to `ch`; a positive left end is a Dirichlet wall instead. The
/// right end `domain.1` is always a Dirichlet wall. Shells exactly at either
/// end are not applied.
///
/// The relative phase `Δ = ψ₂ − ψ₁` of the two solutions crosses multiples
/// of π only downwards, so the count is read off from its values at the two
/// ends.
#[allow(clippy::too_many_arguments)]
pub fn count_wronskian_zeros<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    e1: T,
    e2: T,
    domain: (T, T),
    bc: OriginCondition,
) -> Result<usize> {
    if !(e1 < e2) {
        return Err(SpectralError::InvalidInput(format!("energies must satisfy E1 < E2, got ({e1}, {e2})")));
    }
    let (lo, hi) = domain;
    if !(lo >= T::zero() && hi > lo) {
        return Err(SpectralError::InvalidInput(format!("bad domain ({lo}, {hi})")));
    }
    let from_origin = lo == T::zero();
    if from_origin && bc != ch.origin_condition() {
        return Err(SpectralError::InvalidInput(format!(
            "origin condition {bc:?} does not belong to channel nu = {}, l = {}",
            ch.nu, ch.l
        )));
    }
    let scale = e1.abs().max(e2.abs()).max(T::one()).sqrt();
    let left = ScaledPhase { ch, energy: e1, scale };
    let right = ScaledPhase { ch, energy: e2, scale };
    let lam = p.matrix();
    let lam_inv = lam.symplectic_inverse();

    // Breakpoints: the start, every shell strictly inside, the wall.
    let start = if from_origin { geom.site(0).min(hi) } else { lo };
    let shell_at_start = from_origin && start < hi;
    let mut xs = vec![start];
    xs.extend(geom.sites_in(start, hi).filter(|&s| s < hi));
    xs.push(hi);
    let m = xs.len() - 1;

    // Right solution, backward from the Dirichlet wall.
    let mut psi2_right = vec![T::zero(); m + 1];
    let mut change2 = vec![T::zero(); m];
    let mut psi = T::FRAC_PI_2();
    for i in (0..m).rev() {
        let dpsi = right.change(psi, xs[i + 1], xs[i])?;
        change2[i] = -dpsi;
        psi = psi + dpsi;
        psi2_right[i] = psi;
        if i > 0 {
            psi = right.angle(lam_inv.apply(right.unit(psi)));
        }
    }
    if m == 0 {
        psi2_right[0] = psi;
    }

    let (mut psi1, mut delta, delta_a);
    if from_origin {
        // Origin segment (0, start) in the near-origin phase plane.
        let o1 = OriginPhase::new(ch, e1);
        let o2 = OriginPhase::new(ch, e2);
        let v2 = if shell_at_start {
            lam_inv.apply(right.unit(psi2_right[0]))
        } else {
            [T::zero(), T::one()]
        };
        let st2 = StateVector::from_pair(v2, start);
        let r_min = start * T::lit(1e-8);
        let u1 = regular_solution(ch, e1, r_min);
        if !u1.is_finite() || u1.norm() == T::zero() {
            return Err(SpectralError::DegenerateEndpoint { position: r_min.as_f64() });
        }
        let t2_end = o2.angle(&st2);
        let d2 = o2.change(t2_end, start, r_min)?;
        let t1_min = o1.angle(&u1);
        let d1 = o1.change(t1_min, r_min, start)?;
        delta_a = (t2_end + d2) - t1_min;
        let t1_end = t1_min + d1;
        delta = delta_a - d2 - d1;
        // Switch to the scaled phase plane just left of `start`.
        let w1 = o1.state(t1_end, start);
        psi1 = left.angle(w1);
        delta = reanchor(delta, right.angle(v2) - psi1);
        if shell_at_start {
            psi1 = left.angle(lam.apply(w1));
            delta = reanchor(delta, psi2_right[0] - psi1);
        }
    } else {
        psi1 = T::FRAC_PI_2();
        delta = psi2_right[0] - psi1;
        delta_a = delta;
    }

    // Left solution forward, re-anchored at every shell.
    for i in 0..m {
        let c1 = left.change(psi1, xs[i], xs[i + 1])?;
        psi1 = psi1 + c1;
        delta = delta + change2[i] - c1;
        if i + 1 < m {
            psi1 = left.angle(lam.apply(left.unit(psi1)));
            delta = reanchor(delta, psi2_right[i + 1] - psi1);
        }
    }
    if !(delta.is_finite() && delta_a.is_finite()) {
        return Err(SpectralError::StepFailure { position: hi.as_f64() });
    }
    let pi = T::PI();
    let count = (delta_a / pi).ceil() - (delta / pi).floor() - T::one();
    Ok(count.max(T::zero()).to_usize().unwrap_or(0))
}

/// Eigenvalues of the truncated operator in `(e_lo, e_hi)` by bisection on
/// the Wronskian count, each refined to `rel_tol · max(1, |E|)`.
#[allow(clippy::too_many_arguments)]
pub fn locate_eigenvalues<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    e_lo: T,
    e_hi: T,
    domain: (T, T),
    bc: OriginCondition,
    rel_tol: T,
) -> Result<Vec<T>> {
    let count = |a: T, b: T| count_wronskian_zeros(ch, p, geom, a, b, domain, bc);
    let mut out = Vec::new();
    let mut stack = vec![(e_lo, e_hi, count(e_lo, e_hi)?)];
    while let Some((a, b, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        let mid = a + (b - a) / T::lit(2.0);
        let width_ok = b - a <= rel_tol * mid.abs().max(T::one());
        if width_ok || mid <= a || mid >= b {
            out.extend(std::iter::repeat(mid).take(n));
            continue;
        }
        let nl = count(a, mid)?;
        let nr = n.saturating_sub(nl);
        // An eigenvalue sitting exactly at `mid` is missed by both halves.
        let nr = if nr > 0 { count(mid, b)? } else { 0 };
        if nl + nr < n {
            out.extend(std::iter::repeat(mid).take(n - nl - nr));
        }
        stack.push((mid, b, nr));
        stack.push((a, mid, nl));
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::make_interaction;
    use crate::kronig1d::monodromy;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ch(nu: u32, l: u32) -> ChannelSpec<f64> {
        ChannelSpec::new(nu, l).unwrap()
    }

    #[test]
    fn centrifugal_coefficients() {
        assert_eq!(ch(2, 0).c, -0.25);
        assert_eq!(ch(3, 0).c, 0.0);
        assert_eq!(ch(3, 1).c, 2.0);
        assert_eq!(ch(2, 3).c, 8.75);
        assert_eq!(ch(4, 0).c, 0.75);
        assert_eq!(ch(2, 0).origin_condition(), OriginCondition::Regular2D);
        assert_eq!(ch(3, 0).origin_condition(), OriginCondition::Dirichlet3D);
        assert_eq!(ch(3, 2).origin_condition(), OriginCondition::None);
        assert!(ChannelSpec::<f64>::new(1, 0).is_err());
        for nu in 2..6 {
            for l in 0..5 {
                let c = ch(nu, l);
                assert!((c.c + 0.25 - c.bessel_order().powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn propagate_free_examples() {
        let c = ch(3, 0);
        let f = StateVector::new(1.0, 0.0, 1.0);
        let g = propagate_cell(&c, 0.0, 1.0, 2.0, &f).unwrap();
        assert_eq!((g.value, g.derivative, g.position), (1.0, 0.0, 2.0));
        let h = propagate_cell(&c, PI * PI, 1.0, 2.0, &f).unwrap();
        assert!((h.value + 1.0).abs() < 1e-14 && h.derivative.abs() < 1e-14);
    }

    #[test]
    fn propagate_matches_spherical_bessel() {
        // r·j₁(r) = sin r / r − cos r.
        let u = |r: f64| r.sin() / r - r.cos();
        let du = |r: f64| r.cos() / r - r.sin() / (r * r) + r.sin();
        let f = StateVector::new(u(1.0), du(1.0), 1.0);
        let g = propagate_cell(&ch(3, 1), 1.0, 1.0, 5.0, &f).unwrap();
        assert!((g.value - u(5.0)).abs() < 1e-8);
        assert!((g.derivative - du(5.0)).abs() < 1e-8);
    }

    #[test]
    fn series_matches_closed_forms() {
        let u = |r: f64| r.sin() / r - r.cos();
        let s = regular_solution(&ch(3, 1), 1.0, 0.7);
        // u ~ r²/3 near 0, so the series is 3·r j₁(r).
        assert!((s.value / 3.0 - u(0.7)).abs() < 1e-14);
        let d = regular_solution(&ch(3, 0), 4.0, 0.3);
        assert!((d.value - (2.0 * 0.3f64).sin() / 2.0).abs() < 1e-15);
        assert!((d.derivative - (0.6f64).cos()).abs() < 1e-15);
    }

    #[test]
    fn transfer_without_sites_is_free() {
        let g = LatticeGeometry::<f64>::new(1.0).unwrap();
        let t = transfer(&ch(3, 0), &InteractionParams::delta_type(2.0), &g, 3.0, 0.6, 1.4).unwrap();
        assert!(t.entries.max_abs_diff(&free_propagator(3.0, 0.8)) < 1e-15);
        let t = transfer(&ch(3, 0), &InteractionParams::free(), &g, 3.0, 0.2, 1.9).unwrap();
        assert!(t.entries.max_abs_diff(&free_propagator(3.0, 1.7)) < 1e-13);
        assert!((t.entries.det() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn prufer_free_unit_energy_rotates_uniformly() {
        let g = LatticeGeometry::<f64>::new(1.0).unwrap();
        let s0 = PruferState {
            theta: 0.3,
            log_rho: 0.0,
            position: 1.0,
        };
        let s1 = prufer_advance(&ch(3, 0), &InteractionParams::free(), &g, 1.0, s0, 4.2).unwrap();
        assert!((s1.theta - (0.3 - 3.2)).abs() < 1e-9);
        assert!(s1.log_rho.abs() < 1e-9);
    }

    #[test]
    fn prufer_full_period_in_gap_follows_floquet_sign() {
        let g = LatticeGeometry::<f64>::new(PI).unwrap();
        let p = InteractionParams::delta_type(1.0);
        let e = 1.1; // first gap
        let m = monodromy(&p, &g, e);
        assert!(m.discriminant().abs() > 1.0);
        let tr = m.entries.trace();
        let mu = 0.5 * (tr + tr.signum() * (tr * tr - 4.0).sqrt());
        let w = crate::kronig1d::floquet_eigenvector(&m.entries, mu);
        let x0 = g.site(0);
        let st = PruferState::from_state(&StateVector::new(w[0], w[1], x0));
        let out = prufer_advance(&ch(3, 0), &p, &g, e, st, g.site(1)).unwrap();
        let turns = (out.theta - st.theta) / PI;
        assert!((turns - turns.round()).abs() < 1e-8, "{turns}");
        let odd = (turns.round() as i64).rem_euclid(2) == 1;
        assert_eq!(odd, mu < 0.0);
        assert!((out.log_rho - st.log_rho - mu.abs().ln()).abs() < 1e-8);
    }

    #[test]
    fn identity_jump_is_exact() {
        let y = prufer_jump(&InteractionParams::<f64>::free(), [1.234, 0.5]);
        assert_eq!(y, [1.234, 0.5]);
    }

    #[test]
    fn dirichlet_segment_count() {
        let l = 3.0;
        let g = LatticeGeometry::<f64>::with_offset(1.0, 1.0, 1).unwrap();
        let e = (PI / l).powi(2);
        let n = count_wronskian_zeros(
            &ch(3, 0),
            &InteractionParams::free(),
            &g,
            0.5 * e,
            4.5 * e,
            (0.0, l),
            OriginCondition::Dirichlet3D,
        )
        .unwrap();
        assert_eq!(n, 2);
        let n = count_wronskian_zeros(&ch(3, 0), &InteractionParams::free(), &g, 0.5 * e, 30.5 * e, (0.0, l), OriginCondition::Dirichlet3D).unwrap();
        assert_eq!(n, 5);
    }

    #[test]
    fn eigenvalues_of_dirichlet_segment() {
        let g = LatticeGeometry::<f64>::with_offset(1.0, 1.0, 1).unwrap();
        let eig = locate_eigenvalues(
            &ch(3, 0),
            &InteractionParams::free(),
            &g,
            0.1,
            40.0,
            (0.0, PI),
            OriginCondition::Dirichlet3D,
            1e-12,
        )
        .unwrap();
        assert_eq!(eig.len(), 6);
        for (i, e) in eig.iter().enumerate() {
            let want = ((i + 1) * (i + 1)) as f64;
            assert!((e - want).abs() < 1e-9 * want, "{e} vs {want}");
        }
    }

    #[test]
    fn count_rejects_foreign_origin_condition() {
        let g = LatticeGeometry::<f64>::new(1.0).unwrap();
        let r = count_wronskian_zeros(&ch(3, 0), &InteractionParams::free(), &g, 0.0, 1.0, (0.0, 5.0), OriginCondition::Regular2D);
        assert!(r.is_err());
    }

    #[test]
    fn empty_window_in_gap_counts_zero() {
        let g = LatticeGeometry::<f64>::new(PI).unwrap();
        let p = InteractionParams::delta_type(1.0);
        let n = count_wronskian_zeros(&ch(3, 0), &p, &g, 1.1, 1.1 + 1e-9, (0.0, g.r_max()), OriginCondition::Dirichlet3D).unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn wronskian_is_continuous_across_many_shells() {
        let g = LatticeGeometry::<f64>::new(1.0).unwrap();
        let p = make_interaction(0.3, 0.4, 1.1, (1.0 + 0.12) / 1.1, 0.0).unwrap();
        let c = ch(3, 2);
        let mut u = StateVector::new(1.0, 0.0, 2.0);
        let mut v = StateVector::new(0.0, 1.0, 2.0);
        let w0 = wronskian(&u, &v).unwrap();
        let mut x = 2.0;
        for _ in 0..200 {
            let t = transfer(&c, &p, &g, 3.0, x, x + 1.0).unwrap().entries;
            u = StateVector::from_pair(t.apply(u.pair()), x + 1.0);
            v = StateVector::from_pair(t.apply(v.pair()), x + 1.0);
            x += 1.0;
        }
        let w = wronskian(&u, &v).unwrap();
        assert!((w - w0).abs() < 1e-8 * u.norm() * v.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn transfer_composes(x0 in 0.1f64..3.0, a in 0.1f64..3.0, b in 0.1f64..3.0, e in -2.0f64..20.0, l in 0u32..4) {
            let g = LatticeGeometry::<f64>::new(1.0).unwrap();
            let p = make_interaction(0.5, -0.3, 1.2, (1.0 - 0.15) / 1.2, 0.0).unwrap();
            let c = ch(3, l);
            let (x1, x2) = (x0 + a, x0 + a + b);
            let t01 = transfer(&c, &p, &g, e, x0, x1).unwrap().entries;
            let t12 = transfer(&c, &p, &g, e, x1, x2).unwrap().entries;
            let t02 = transfer(&c, &p, &g, e, x0, x2).unwrap().entries;
            let scale = t02.frobenius().max(1.0);
            prop_assert!((t12 * t01).max_abs_diff(&t02) < 1e-8 * scale);
            prop_assert!((t02.det() - 1.0).abs() < 1e-9 * scale * scale);
        }

        #[test]
        fn count_is_monotone(e1 in -1.0f64..3.0, w1 in 0.01f64..3.0, w2 in 0.01f64..3.0) {
            let g = LatticeGeometry::<f64>::new(1.0).unwrap().with_count_hint(12);
            let p = InteractionParams::delta_type(2.0);
            let c = ch(3, 1);
            let dom = (0.0, g.r_max());
            let n1 = count_wronskian_zeros(&c, &p, &g, e1, e1 + w1, dom, OriginCondition::None).unwrap();
            let n2 = count_wronskian_zeros(&c, &p, &g, e1, e1 + w1 + w2, dom, OriginCondition::None).unwrap();
            let n3 = count_wronskian_zeros(&c, &p, &g, e1 - w2, e1 + w1, dom, OriginCondition::None).unwrap();
            prop_assert!(n2 >= n1);
            prop_assert!(n3 >= n1);
        }
    }
}
