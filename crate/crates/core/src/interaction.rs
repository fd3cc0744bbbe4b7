//! Generalized point interaction on a shell and the shell lattice.
//!
//! The interaction is the transfer matrix `Λ = e^{iχ} [[γ, β], [α, δ]]`
//! acting on `(f, f')` columns across every shell. The global phase χ is
//! kept for fidelity but never enters the dynamics: operators differing only
//! in χ are isospectral, so all propagation uses the real matrix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectralError};
use crate::linalg::{Mat2, StateVector};
use crate::scalar::Real;

/// Validated parameters of the generalized point interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams<T>", into = "RawParams<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct InteractionParams<T> {
    alpha: T,
    beta: T,
    gamma: T,
    delta: T,
    chi: T,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams<T> {
    alpha: T,
    beta: T,
    gamma: T,
    delta: T,
    #[serde(default)]
    chi: T,
}

impl<T: Real> TryFrom<RawParams<T>> for InteractionParams<T> {
    type Error = SpectralError;

    fn try_from(r: RawParams<T>) -> Result<Self> {
        make_interaction(r.alpha, r.beta, r.gamma, r.delta, r.chi)
    }
}

impl<T: Real> From<InteractionParams<T>> for RawParams<T> {
    fn from(p: InteractionParams<T>) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            delta: p.delta,
            chi: p.chi,
        }
    }
}

/// Builds validated interaction parameters.
///
/// Fails with [`SpectralError::ConstraintViolation`] unless
/// `|αβ − γδ + 1| ≤ 1e-12`.
pub fn make_interaction<T: Real>(alpha: T, beta: T, gamma: T, delta: T, chi: T) -> Result<InteractionParams<T>> {
    for (name, v) in [
        ("alpha", alpha),
        ("beta", beta),
        ("gamma", gamma),
        ("delta", delta),
        ("chi", chi),
    ] {
        if !v.is_finite() {
            return Err(SpectralError::InvalidInput(format!("{name} is not finite")));
        }
    }
    let defect = alpha * beta - gamma * delta + T::one();
    if defect.abs() > T::tol(1e-12) {
        return Err(SpectralError::ConstraintViolation {
            defect: defect.as_f64(),
        });
    }
    Ok(InteractionParams {
        alpha,
        beta,
        gamma,
        delta,
        chi,
    })
}

impl<T: Real> InteractionParams<T> {
    /// Λ = identity.
    pub fn free() -> Self {
        Self {
            alpha: T::zero(),
            beta: T::zero(),
            gamma: T::one(),
            delta: T::one(),
            chi: T::zero(),
        }
    }

    /// δ interaction of strength α.
    pub fn delta_type(alpha: T) -> Self {
        Self {
            alpha,
            ..Self::free()
        }
    }

    /// δ′ interaction of strength β (α = 0, γ = δ = 1).
    pub fn delta_prime_type(beta: T) -> Self {
        Self {
            beta,
            ..Self::free()
        }
    }

    /// Parses the keys `alpha`, `beta`, `gamma`, `delta` and optional `chi`
    /// from decimal strings; any other key is rejected.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut vals = [None; 5];
        let names = ["alpha", "beta", "gamma", "delta", "chi"];
        for (k, v) in map {
            let idx = names
                .iter()
                .position(|n| n == k)
                .ok_or_else(|| SpectralError::InvalidInput(format!("unknown key `{k}`")))?;
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| SpectralError::InvalidInput(format!("`{k}` = `{v}` is not a number")))?;
            vals[idx] = Some(T::lit(x));
        }
        let get = |i: usize| {
            vals[i].ok_or_else(|| SpectralError::InvalidInput(format!("missing key `{}`", names[i])))
        };
        make_interaction(get(0)?, get(1)?, get(2)?, get(3)?, vals[4].unwrap_or_else(T::zero))
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn beta(&self) -> T {
        self.beta
    }
    pub fn gamma(&self) -> T {
        self.gamma
    }
    pub fn delta(&self) -> T {
        self.delta
    }
    pub fn chi(&self) -> T {
        self.chi
    }

    /// Copy with a different global phase.
    pub fn with_chi(mut self, chi: T) -> Self {
        self.chi = chi;
        self
    }

    /// Real part of Λ at χ = 0: rows `(γ, β)` and `(α, δ)`.
    pub fn matrix(&self) -> Mat2<T> {
        Mat2::new(self.gamma, self.beta, self.alpha, self.delta)
    }

    /// Largest entry of `Λ* σ₂ Λ − σ₂`, including the phase.
    ///
    /// For a real matrix times `e^{iχ}` the phase cancels and
    /// `Λᵀ J Λ = det(Λ) J` with `J = [[0, 1], [−1, 0]] = iσ₂`.
    pub fn symplectic_defect(&self) -> T {
        let l = self.matrix();
        // Λᵀ J Λ
        let j = Mat2::new(T::zero(), T::one(), -T::one(), T::zero());
        let lt = Mat2::new(l.m[0][0], l.m[1][0], l.m[0][1], l.m[1][1]);
        let p = lt * j * l;
        // |e^{iχ}|² = 1 exactly in exact arithmetic; include the rounding.
        let phase = self.chi.cos().powi(2) + self.chi.sin().powi(2);
        p.scale(phase).max_abs_diff(&j)
    }

    pub fn is_free(&self) -> bool {
        self.alpha == T::zero() && self.beta == T::zero() && self.gamma == T::one() && self.delta == T::one()
    }
}

/// Maps `(f, f')` across a shell: `(γf + βf′, αf + δf′)`.
pub fn apply_interaction<T: Real>(p: &InteractionParams<T>, f: &StateVector<T>) -> StateVector<T> {
    StateVector::from_pair(p.matrix().apply(f.pair()), f.position)
}

/// Equidistant shells at radii `offset + n·spacing`, `n = 0, 1, …`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeGeometry<T> {
    pub spacing: T,
    pub offset: T,
    /// Number of cells kept when the half-line is truncated.
    pub count_hint: usize,
}

impl<T: Real> LatticeGeometry<T> {
    /// Shells at `nd + d/2` with the default truncation of 64 cells.
    pub fn new(spacing: T) -> Result<Self> {
        Self::with_offset(spacing, spacing / T::lit(2.0), 64)
    }

    pub fn with_offset(spacing: T, offset: T, count_hint: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > T::zero()) {
            return Err(SpectralError::InvalidInput("shell spacing must be positive".into()));
        }
        if !(offset > T::zero() && offset <= spacing) {
            return Err(SpectralError::InvalidInput("first shell must lie in (0, d]".into()));
        }
        if count_hint == 0 {
            return Err(SpectralError::InvalidInput("count_hint must be at least 1".into()));
        }
        Ok(Self {
            spacing,
            offset,
            count_hint,
        })
    }

    pub fn with_count_hint(mut self, count_hint: usize) -> Self {
        self.count_hint = count_hint.max(1);
        self
    }

    pub fn site(&self, n: usize) -> T {
        self.offset + T::from_count(n) * self.spacing
    }

    /// Index of the first shell strictly to the right of `x`.
    pub fn first_site_after(&self, x: T) -> usize {
        if x < self.offset {
            return 0;
        }
        let n = ((x - self.offset) / self.spacing).floor();
        let mut i = n.to_usize().unwrap_or(0);
        while self.site(i) <= x {
            i += 1;
        }
        while i > 0 && self.site(i - 1) > x {
            i -= 1;
        }
        i
    }

    /// Shell radii in the half-open interval `(x0, x1]`.
    pub fn sites_in(&self, x0: T, x1: T) -> impl Iterator<Item = T> + '_ {
        let start = self.first_site_after(x0);
        (start..)
            .map(move |n| self.site(n))
            .take_while(move |&r| r <= x1)
    }

    /// Truncation radius `(count_hint + ½)·d`.
    pub fn r_max(&self) -> T {
        (T::from_count(self.count_hint) + T::lit(0.5)) * self.spacing
    }
}

/// The three asymptotic classes of a generalized point interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionTag {
    DeltaType,
    IntermediateType,
    DeltaPrimeType,
}

/// Classification together with the predicted high-energy constant.
///
/// `predicted_asymptote` is the limiting gap width (δ-type), the limiting
/// band/gap ratio (intermediate) or the limiting band width (δ′-type);
/// `mu_exponent` is the exponent of the gap/band ratio `O(k^μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionClass<T> {
    pub tag: InteractionTag,
    pub predicted_asymptote: T,
    pub mu_exponent: i32,
}

/// Classifies `p` on a lattice of spacing `geom.spacing`.
pub fn classify<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>) -> Result<InteractionClass<T>> {
    let tol = T::tol(1e-12);
    let two = T::lit(2.0);
    let d = geom.spacing;
    let beta_zero = p.beta.abs() <= tol;
    if !beta_zero {
        return Ok(InteractionClass {
            tag: InteractionTag::DeltaPrimeType,
            predicted_asymptote: T::lit(8.0) / (p.beta.abs() * d),
            mu_exponent: 1,
        });
    }
    if (p.gamma - T::one()).abs() <= tol && (p.delta - T::one()).abs() <= tol {
        return Ok(InteractionClass {
            tag: InteractionTag::DeltaType,
            predicted_asymptote: two * p.alpha.abs() / d,
            mu_exponent: -1,
        });
    }
    let s = (p.gamma + p.delta).abs();
    if s > two + tol {
        let x = two / s;
        return Ok(InteractionClass {
            tag: InteractionTag::IntermediateType,
            predicted_asymptote: x.asin() / x.acos(),
            mu_exponent: 0,
        });
    }
    Err(SpectralError::UnclassifiableInteraction {
        gamma: p.gamma.as_f64(),
        delta: p.delta.as_f64(),
    })
}
