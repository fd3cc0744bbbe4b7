//! Symmetry of the ground state at the spectrum bottom.

use serde::{Deserialize, Serialize};

use super::{bands::spectrum_bottom, monodromy};
use crate::error::{Result, SpectralError};
use crate::interaction::{InteractionParams, LatticeGeometry};
use crate::linalg::Mat2;
use crate::scalar::Real;

/// Tolerance on `||D(E₀)| − 1|` for accepting `E₀` as a band edge.
const EDGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroundSymmetry {
    Periodic,
    Antiperiodic,
}

impl GroundSymmetry {
    /// The Floquet multiplier `±1`.
    pub fn multiplier<T: Real>(self) -> T {
        match self {
            GroundSymmetry::Periodic => T::one(),
            GroundSymmetry::Antiperiodic => -T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport<T> {
    pub e0: T,
    pub symmetry: GroundSymmetry,
    /// `|M(E₀)w − s·w|` for the unit eigenvector `w`.
    pub residual: T,
}

/// Unit vector spanning the kernel of `M − s·I`.
///
/// At a band edge `M − s·I` has rank at most one, so the kernel is orthogonal
/// to its larger row. When both rows vanish the whole plane is invariant and
/// `(1, 0)` is returned.
pub fn floquet_eigenvector<T: Real>(m: &Mat2<T>, s: T) -> [T; 2] {
    let r0 = [m.m[0][0] - s, m.m[0][1]];
    let r1 = [m.m[1][0], m.m[1][1] - s];
    let n0 = r0[0].hypot(r0[1]);
    let n1 = r1[0].hypot(r1[1]);
    let (row, n) = if n0 >= n1 { (r0, n0) } else { (r1, n1) };
    if n <= T::epsilon() * m.frobenius().max(T::one()) {
        return [T::one(), T::zero()];
    }
    [-row[1] / n, row[0] / n]
}

pub fn ground_state_symmetry<T: Real>(
    p: &InteractionParams<T>,
    geom: &LatticeGeometry<T>,
) -> Result<GroundStateReport<T>> {
    let e0 = spectrum_bottom(p, geom)?;
    let m = monodromy(p, geom, e0);
    let d = m.discriminant();
    let defect = (d.abs() - T::one()).abs();
    if defect > T::tol(EDGE_TOL) {
        return Err(SpectralError::DegenerateEdge { defect: defect.as_f64() });
    }
    let symmetry = if d > T::zero() {
        GroundSymmetry::Periodic
    } else {
        GroundSymmetry::Antiperiodic
    };
    let s = symmetry.multiplier::<T>();
    let w = floquet_eigenvector(&m.entries, s);
    let mw = m.entries.apply(w);
    let residual = (mw[0] - s * w[0]).hypot(mw[1] - s * w[1]);
    Ok(GroundStateReport { e0, symmetry, residual })
}
