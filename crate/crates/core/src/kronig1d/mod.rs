//! One-dimensional periodic comparison operator: point interactions at
//! `x_n = nd + d/2` on the whole line with free motion in between.
//!
//! The period cell carries exactly one shell at its right boundary, so the
//! monodromy is `M(E) = Λ · P(E, d)`. Any cyclic choice of cell gives the same
//! trace.

mod asymptotics;
mod bands;
mod ground;

pub use asymptotics::{asymptotics_report, AsymptoticsReport, BandRow};
pub use bands::{band_structure, default_energy_floor, spectrum_bottom, BandDiagnostics, BandStructure};
pub use ground::{ground_state_symmetry, floquet_eigenvector, GroundStateReport, GroundSymmetry};

use serde::{Deserialize, Serialize};

use crate::interaction::{InteractionParams, LatticeGeometry};
use crate::linalg::Mat2;
use crate::scalar::{sinc, sinhc, Real};

/// Exact transfer of `(f, f')` over a length `length` of free motion at energy `E`.
pub fn free_propagator<T: Real>(energy: T, length: T) -> Mat2<T> {
    if energy > T::zero() {
        let k = energy.sqrt();
        let kl = k * length;
        let (s, c) = kl.sin_cos();
        Mat2::new(c, length * sinc(kl), -k * s, c)
    } else if energy < T::zero() {
        let kappa = (-energy).sqrt();
        let kl = kappa * length;
        let sh = kl.sinh();
        let ch = kl.cosh();
        Mat2::new(ch, length * sinhc(kl), kappa * sh, ch)
    } else {
        Mat2::new(T::one(), length, T::zero(), T::one())
    }
}

/// One-period transfer matrix at a fixed energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy<T> {
    pub entries: Mat2<T>,
    pub energy: T,
}

impl<T: Real> Monodromy<T> {
    /// Floquet discriminant `½ tr M`.
    pub fn discriminant(&self) -> T {
        self.entries.trace() / T::lit(2.0)
    }

    /// `log |μ|` of the larger Floquet multiplier; zero inside bands.
    pub fn floquet_exponent(&self) -> T {
        let d = self.discriminant().abs();
        if d <= T::one() {
            T::zero()
        } else {
            d.acosh()
        }
    }
}

pub fn monodromy<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>, energy: T) -> Monodromy<T> {
    Monodromy {
        entries: p.matrix() * free_propagator(energy, geom.spacing),
        energy,
    }
}

/// Floquet discriminant `D(E) = ½ tr M(E)`; the bands are `|D| ≤ 1`.
pub fn discriminant<T: Real>(p: &InteractionParams<T>, geom: &LatticeGeometry<T>, energy: T) -> T {
    monodromy(p, geom, energy).discriminant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::make_interaction;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn propagator_examples() {
        assert_eq!(free_propagator(0.0, 1.0), Mat2::<f64>::new(1.0, 1.0, 0.0, 1.0));
        let half = free_propagator(PI * PI, 1.0);
        assert!(half.max_abs_diff(&Mat2::<f64>::new(-1.0, 0.0, 0.0, -1.0)) < 1e-14);
        let neg = free_propagator(-1.0, 1.0);
        let c = 1f64.cosh();
        let s = 1f64.sinh();
        assert!(neg.max_abs_diff(&Mat2::<f64>::new(c, s, s, c)) < 1e-15);
    }

    #[test]
    fn propagator_is_continuous_through_zero_energy() {
        let a = free_propagator(1e-14, 2.0);
        let b = free_propagator(-1e-14, 2.0);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    // Closed forms obtained by multiplying Λ and P(E, d) symbolically:
    //   D = ((γ+δ)/2) cos kd + (α/(2k) − βk/2) sin kd.
    fn closed_form(p: &InteractionParams<f64>, d: f64, e: f64) -> f64 {
        let k = e.sqrt();
        0.5 * (p.gamma() + p.delta()) * (k * d).cos() + (p.alpha() / (2.0 * k) - p.beta() * k / 2.0) * (k * d).sin()
    }

    #[test]
    fn discriminant_examples() {
        let g = LatticeGeometry::<f64>::new(1.0).unwrap();
        let free = InteractionParams::<f64>::free();
        assert!((discriminant(&free, &g, PI * PI) + 1.0).abs() < 1e-14);
        let d1 = InteractionParams::<f64>::delta_type(1.0);
        let v = discriminant(&d1, &g, 1.0);
        assert!((v - (1f64.cos() + 0.5 * 1f64.sin())).abs() < 1e-15);
        assert!((v - 0.961_1).abs() < 1e-4);
        let dp = InteractionParams::<f64>::delta_prime_type(0.7);
        for &e in &[0.3, 2.0, 17.0] {
            assert!((discriminant(&dp, &g, e) - closed_form(&dp, 1.0, e)).abs() < 1e-13);
            assert!((discriminant(&d1, &g, e) - closed_form(&d1, 1.0, e)).abs() < 1e-13);
        }
        let m = monodromy(&dp, &g, 3.3);
        assert_eq!(m.discriminant(), discriminant(&dp, &g, 3.3));
    }

    #[test]
    fn delta_type_pinned_edges() {
        let g = LatticeGeometry::<f64>::new(PI).unwrap();
        let p = InteractionParams::<f64>::delta_type(1.0);
        for n in 1..40 {
            let e = ((n as f64) * PI / PI).powi(2);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((discriminant(&p, &g, e) - sign).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn chi_never_enters() {
        let g = LatticeGeometry::<f64>::new(1.3).unwrap();
        let p = make_interaction(0.4, -0.7, 1.5, (1.0 + 0.4 * -0.7) / 1.5, 0.0).unwrap();
        let q = p.with_chi(2.1);
        for &e in &[-3.0, 0.5, 11.0] {
            assert_eq!(discriminant(&p, &g, e), discriminant(&q, &g, e));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn monodromy_is_unimodular(beta in -3.0f64..3.0, g in 0.3f64..2.5, dl in 0.3f64..2.5, e in -30.0f64..400.0, d in 0.5f64..3.0) {
            prop_assume!(beta.abs() > 1e-3);
            let p = make_interaction((g * dl - 1.0) / beta, beta, g, dl, 0.0).unwrap();
            let geom = LatticeGeometry::<f64>::new(d).unwrap();
            let m = monodromy(&p, &geom, e).entries;
            let scale = m.frobenius().powi(2).max(1.0);
            prop_assert!((m.det() - 1.0).abs() < 1e-10 * scale);
        }
    }
}
