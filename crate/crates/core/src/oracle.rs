//! Finite-difference cross-check.
//!
//! The radial function `f = u / r^{(ν−1)/2}` is discretized in flux form on
//! cell-centred nodes `r_j = lo + (j − ½)h`, so every shell sits on a cell
//! face, midway between two nodes. The interface condition is eliminated
//! through the one-sided values `f(R±) ≈ f_j ± (h/2) f'(R±)` together with
//! `(f, f')(R+) = Λ_f (f, f')(R−)`, `Λ_f = S⁻¹ΛS`. Because `det Λ_f = 1` the
//! eliminated coupling is symmetric for every interaction, and the operator
//! is a symmetric tridiagonal matrix (plus one corner pair for periodic
//! boxes). Eigenvalues are located by Sylvester inertia counts.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectralError};
use crate::interaction::{InteractionParams, LatticeGeometry};
use crate::linalg::Mat2;
use crate::radial::{locate_eigenvalues, ChannelSpec};
use crate::scalar::Real;

/// Region and boundary conditions of the discretized operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OracleDomain<T> {
    /// Radial operator of `ch` on `(0, r_max)`, Dirichlet at `r_max`.
    Radial { channel: ChannelSpec<T>, r_max: T },
    /// Line operator on `(lo, hi)` with Dirichlet walls.
    Box { lo: T, hi: T },
    /// Line operator on `cells` periods with periodic closure.
    Periodic { cells: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedOperator<T> {
    pub grid_step: T,
    pub r_min: T,
    pub r_max: T,
    pub domain: OracleDomain<T>,
    /// Symmetric tridiagonal part.
    pub diag: Vec<T>,
    pub off: Vec<T>,
    /// Coupling between the last and the first node (periodic closure).
    pub corner: T,
}

pub fn discretize<T: Real>(
    domain: OracleDomain<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    grid_step: T,
) -> Result<DiscretizedOperator<T>> {
    let h = grid_step;
    let d = geom.spacing;
    let (lo, hi, nu) = match domain {
        OracleDomain::Radial { channel, r_max } => (T::zero(), r_max, Some(channel)),
        OracleDomain::Box { lo, hi } => (lo, hi, None),
        OracleDomain::Periodic { cells } => (T::zero(), d * T::from_count(cells), None),
    };
    if !(h > T::zero() && hi > lo) {
        return Err(SpectralError::InvalidInput("empty oracle domain".into()));
    }
    let aligned = |x: T| {
        let q = x / h;
        (q - q.round()).abs() <= T::lit(1e-9) * q.abs().max(T::one())
    };
    for ratio in [d / h, (geom.offset - lo) / h, (hi - lo) / h] {
        if !aligned(ratio * h) {
            return Err(SpectralError::GridMisaligned { ratio: ratio.as_f64() });
        }
    }
    let n = ((hi - lo) / h).round().to_usize().unwrap_or(0);
    if n < 2 {
        return Err(SpectralError::InvalidInput("oracle grid needs at least two nodes".into()));
    }

    // Face weights r^{ν−1}, cell volumes ∫ r^{ν−1}, centrifugal term.
    let (pw, ang) = match nu {
        Some(ch) => {
            let nu_t = T::from_u32(ch.nu).expect("representable");
            let l = T::from_u32(ch.l).expect("representable");
            (nu_t - T::one(), l * (l + nu_t - T::lit(2.0)))
        }
        None => (T::zero(), T::zero()),
    };
    let face = |j: usize| lo + T::from_count(j) * h;
    let weight = |r: T| if pw == T::zero() { T::one() } else { r.powf(pw) };
    let volume = |j: usize| {
        if pw == T::zero() {
            h
        } else {
            let e = pw + T::one();
            (face(j + 1).powf(e) - face(j).powf(e)) / e
        }
    };
    let vols: Vec<T> = (0..n).map(volume).collect();

    // Symmetric form K = V·H, scaled to V^{-1/2} K V^{-1/2} at the end.
    let mut kd = vec![T::zero(); n];
    let mut ko = vec![T::zero(); n - 1];
    let mut corner = T::zero();
    for j in 0..n {
        let r = lo + (T::from_count(j) + T::lit(0.5)) * h;
        if ang != T::zero() {
            kd[j] += vols[j] * ang / (r * r);
        }
    }

    let lam = p.matrix();
    let half = pw / T::lit(2.0);
    let is_site = |x: T| {
        let q = (x - geom.offset) / d;
        q >= -T::lit(1e-9) && (q - q.round()).abs() <= T::lit(1e-9)
    };
    // Interior faces j = 1..n−1 sit between nodes j−1 and j.
    for j in 1..n {
        let x = face(j);
        let w = weight(x);
        if is_site(x) && !p.is_free() {
            let [g1, g2, g4] = interface_coupling(&lam, x, half, h)?;
            kd[j - 1] += -w * g1;
            kd[j] += w * g4;
            ko[j - 1] += -w * g2;
        } else {
            kd[j - 1] += w / h;
            kd[j] += w / h;
            ko[j - 1] += -w / h;
        }
    }
    match domain {
        OracleDomain::Radial { .. } => {
            // Zero weight at the origin: no flux through r = 0.
            kd[n - 1] += T::lit(2.0) * weight(hi) / h;
        }
        OracleDomain::Box { .. } => {
            kd[0] += T::lit(2.0) / h;
            kd[n - 1] += T::lit(2.0) / h;
        }
        OracleDomain::Periodic { .. } => {
            // The closing face at 0 ≡ L is never a shell since 0 < offset ≤ d
            // places shells at interior faces or at L itself.
            if is_site(hi) && !p.is_free() {
                return Err(SpectralError::GridMisaligned {
                    ratio: (geom.offset / h).as_f64(),
                });
            }
            kd[0] += T::one() / h;
            kd[n - 1] += T::one() / h;
            corner = -T::one() / h;
        }
    }

    let diag: Vec<T> = kd.iter().zip(&vols).map(|(&k, &v)| k / v).collect();
    let off: Vec<T> = (0..n - 1).map(|j| ko[j] / (vols[j] * vols[j + 1]).sqrt()).collect();
    let corner = corner / (vols[0] * vols[n - 1]).sqrt();
    Ok(DiscretizedOperator {
        grid_step: h,
        r_min: lo,
        r_max: hi,
        domain,
        diag,
        off,
        corner,
    })
}

/// Flux couplings at a shell face: the left flux is `w(g1 f_j + g2 f_{j+1})`
/// and the right flux `w(−g2 f_j + g4 f_{j+1})`.
fn interface_coupling<T: Real>(lam: &Mat2<T>, r: T, p: T, h: T) -> Result<[T; 3]> {
    let rp = r.powf(p);
    let s = Mat2::new(rp, T::zero(), p * rp / r, rp);
    let s_inv = Mat2::new(T::one() / rp, T::zero(), -p / (r * rp), T::one() / rp);
    let lf = s_inv * *lam * s;
    let [[a, b], [c, d]] = lf.m;
    let half = h / T::lit(2.0);
    let det = b + half * (a + d) + half * half * c;
    if det.abs() <= T::lit(1e-12) * (b.abs() + h) {
        return Err(SpectralError::ConvergenceFailure(format!(
            "interface elimination is singular at r = {r} for step {h}"
        )));
    }
    Ok([-(a + half * c) / det, T::one() / det, (half * c + d) / det])
}

impl<T: Real> DiscretizedOperator<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `e` (Sylvester inertia of `A − e`).
    pub fn count_below(&self, e: T) -> usize {
        let n = self.diag.len();
        let tiny = T::min_positive_value().sqrt();
        let fix = |x: T| if x == T::zero() { -tiny } else { x };
        if n == 1 {
            return usize::from(self.diag[0] - e < T::zero());
        }
        let mut neg = 0;
        if self.corner == T::zero() {
            let mut piv = fix(self.diag[0] - e);
            neg += usize::from(piv < T::zero());
            for j in 1..n {
                piv = fix(self.diag[j] - e - self.off[j - 1] * self.off[j - 1] / piv);
                neg += usize::from(piv < T::zero());
            }
            return neg;
        }
        // Elimination with fill-in confined to the last column.
        let last = n - 1;
        let mut d: Vec<T> = self.diag.iter().map(|&x| x - e).collect();
        let mut col = vec![T::zero(); n];
        col[0] = self.corner;
        col[last - 1] += self.off[last - 1];
        for i in 0..last {
            let piv = fix(d[i]);
            neg += usize::from(piv < T::zero());
            if i + 1 < last {
                let f = self.off[i] / piv;
                d[i + 1] -= f * self.off[i];
                let ci = col[i];
                col[i + 1] -= f * ci;
            }
            d[last] -= col[i] * col[i] / piv;
        }
        neg + usize::from(fix(d[last]) < T::zero())
    }

    /// Interval containing the whole spectrum (Gershgorin).
    pub fn spectral_bounds(&self) -> (T, T) {
        let n = self.diag.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for j in 0..n {
            let mut rad = T::zero();
            if j > 0 {
                rad += self.off[j - 1].abs();
            }
            if j + 1 < n {
                rad += self.off[j].abs();
            }
            if j == 0 || j == n - 1 {
                rad += self.corner.abs();
            }
            lo = lo.min(self.diag[j] - rad);
            hi = hi.max(self.diag[j] + rad);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on the count.
    pub fn eigenvalue(&self, k: usize) -> Result<T> {
        if k >= self.len() {
            return Err(SpectralError::InvalidInput(format!("index {k} exceeds matrix size {}", self.len())));
        }
        let (mut a, mut b) = self.spectral_bounds();
        for _ in 0..200 {
            let mid = a + (b - a) / T::lit(2.0);
            if mid <= a || mid >= b {
                return Ok(mid);
            }
            if self.count_below(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        Err(SpectralError::ConvergenceFailure(format!("bisection for eigenvalue {k} did not settle")))
    }
}

/// The `k` smallest eigenvalues.
pub fn lowest_eigenvalues<T: Real>(opr: &DiscretizedOperator<T>, k: usize) -> Result<Vec<T>> {
    if k == 0 {
        return Err(SpectralError::InvalidInput("k must be at least 1".into()));
    }
    (0..k).map(|i| opr.eigenvalue(i)).collect()
}

/// Eigenvalues in `(e1, e2)` of the discretized operator.
pub fn eigenvalues_between<T: Real>(opr: &DiscretizedOperator<T>, e1: T, e2: T) -> Result<Vec<T>> {
    let first = opr.count_below(e1);
    let last = opr.count_below(e2);
    (first..last).map(|k| opr.eigenvalue(k)).collect()
}

/// Extrapolates eigenvalues from steps `h` and `h/2`: `(4E(h/2) − E(h))/3`.
pub fn richardson<T: Real>(coarse: &[T], fine: &[T]) -> Vec<T> {
    coarse
        .iter()
        .zip(fine)
        .map(|(&c, &f)| (T::lit(4.0) * f - c) / T::lit(3.0))
        .collect()
}

/// Eigenvalues in `(e1, e2)` from steps `h` and `h/2`, extrapolated.
///
/// The two grids must agree on the number of eigenvalues in the window;
/// windows with an eigenvalue close to either end are reported as
/// [`SpectralError::ConvergenceFailure`].
pub fn extrapolated_eigenvalues<T: Real>(
    domain: OracleDomain<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    grid_step: T,
    e1: T,
    e2: T,
) -> Result<Vec<T>> {
    let coarse = discretize(domain, p, geom, grid_step)?;
    let fine = discretize(domain, p, geom, grid_step / T::lit(2.0))?;
    let ec = eigenvalues_between(&coarse, e1, e2)?;
    let ef = eigenvalues_between(&fine, e1, e2)?;
    if ec.len() != ef.len() {
        return Err(SpectralError::ConvergenceFailure(format!(
            "grids disagree on the count in ({e1}, {e2}): {} vs {}",
            ec.len(),
            ef.len()
        )));
    }
    Ok(richardson(&ec, &ef))
}

/// Transfer-matrix and finite-difference eigenvalues of one channel inside
/// a gap of the 1D operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapComparison<T> {
    /// Counting window; both ends sit midway between neighbouring
    /// transfer-matrix eigenvalues.
    pub window: (T, T),
    pub transfer: Vec<T>,
    pub fd_coarse_count: usize,
    pub fd_fine_count: usize,
    /// Richardson values, present when all three counts agree.
    pub extrapolated: Option<Vec<T>>,
    pub max_position_error: Option<T>,
}

impl<T: Real> GapComparison<T> {
    pub fn counts_agree(&self) -> bool {
        self.fd_coarse_count == self.transfer.len() && self.fd_fine_count == self.transfer.len()
    }
}

/// Compares the Wronskian count of the truncated channel on `(0, r_max)`
/// with the oracle at steps `h` and `h/2` inside `gap`.
///
/// The window starts a tenth of the gap in from each edge and is then moved
/// to the middle of the eigenvalue-free stretch it falls in, so the O(h²)
/// shift of the discrete eigenvalues cannot carry one across an end.
pub fn compare_in_gap<T: Real>(
    ch: &ChannelSpec<T>,
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
    gap: [T; 2],
    r_max: T,
    h: T,
) -> Result<GapComparison<T>> {
    let [a, b] = gap;
    if !(b > a) {
        return Err(SpectralError::InvalidInput(format!("empty gap ({a}, {b})")));
    }
    let eps = T::tol(1e-9) * a.abs().max(b.abs()).max(T::one());
    let inner = locate_eigenvalues(ch, p, geom, a + eps, b - eps, (T::zero(), r_max), ch.origin_condition(), T::tol(1e-12))?;
    let w = b - a;
    let place = |x: T| {
        let below = inner.iter().copied().filter(|&e| e < x).fold(a, T::max);
        let above = inner.iter().copied().filter(|&e| e >= x).fold(b, T::min);
        (below + above) / T::lit(2.0)
    };
    let (lo, hi) = (a + w / T::lit(10.0), b - w / T::lit(10.0));
    let mut window = (place(lo), place(hi));
    // Both ends in one eigenvalue-free stretch: keep the plain inset window.
    if !(window.1 > window.0) {
        window = (lo, hi);
    }
    let transfer: Vec<T> = inner.into_iter().filter(|&e| e > window.0 && e < window.1).collect();
    let dom = OracleDomain::Radial { channel: *ch, r_max };
    let coarse = eigenvalues_between(&discretize(dom, p, geom, h)?, window.0, window.1)?;
    let fine = eigenvalues_between(&discretize(dom, p, geom, h / T::lit(2.0))?, window.0, window.1)?;
    let mut out = GapComparison {
        window,
        fd_coarse_count: coarse.len(),
        fd_fine_count: fine.len(),
        transfer,
        extrapolated: None,
        max_position_error: None,
    };
    if out.counts_agree() {
        let ex = richardson(&coarse, &fine);
        out.max_position_error = Some(
            ex.iter()
                .zip(&out.transfer)
                .map(|(x, y)| (*x - *y).abs())
                .fold(T::zero(), T::max),
        );
        out.extrapolated = Some(ex);
    }
    Ok(out)
}
