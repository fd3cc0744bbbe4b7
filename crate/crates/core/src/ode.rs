//! Embedded Dormand–Prince 5(4) integrator with adaptive step control.
//!
//! Works in either direction of the independent variable and exposes every
//! accepted step to an observer, which the phase trackers use to unwrap
//! angles.

use crate::error::{Result, SpectralError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Largest allowed step magnitude; `None` means the whole interval.
    pub max_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::tol(1e-10),
            atol: T::tol(1e-12),
            max_step: None,
            max_steps: 2_000_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_max_step(mut self, h: T) -> Self {
        self.max_step = Some(h);
        self
    }
}

struct Tableau<T> {
    c: [T; 7],
    a: [[T; 6]; 7],
    e: [T; 7],
}

fn tableau<T: Real>() -> Tableau<T> {
    let r = |p: f64, q: f64| T::lit(p / q);
    let z = T::zero();
    Tableau {
        c: [z, r(1., 5.), r(3., 10.), r(4., 5.), r(8., 9.), T::one(), T::one()],
        a: [
            [z; 6],
            [r(1., 5.), z, z, z, z, z],
            [r(3., 40.), r(9., 40.), z, z, z, z],
            [r(44., 45.), r(-56., 15.), r(32., 9.), z, z, z],
            [
                r(19372., 6561.),
                r(-25360., 2187.),
                r(64448., 6561.),
                r(-212., 729.),
                z,
                z,
            ],
            [
                r(9017., 3168.),
                r(-355., 33.),
                r(46732., 5247.),
                r(49., 176.),
                r(-5103., 18656.),
                z,
            ],
            [
                r(35., 384.),
                z,
                r(500., 1113.),
                r(125., 192.),
                r(-2187., 6784.),
                r(11., 84.),
            ],
        ],
        e: [
            r(71., 57600.),
            z,
            r(-71., 16695.),
            r(71., 1920.),
            r(-17253., 339200.),
            r(22., 525.),
            r(-1., 40.),
        ],
    }
}

/// Integrates `y' = f(x, y)` from `x0` to `x1`, returning `y(x1)`.
pub fn integrate<T, const N: usize, F>(
    f: F,
    x0: T,
    y0: [T; N],
    x1: T,
    opts: &OdeOptions<T>,
) -> Result<[T; N]>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    integrate_observed(f, x0, y0, x1, opts, |_, _| {})
}

/// Like [`integrate`], calling `observe(x, y)` after every accepted step.
pub fn integrate_observed<T, const N: usize, F, O>(
    mut f: F,
    x0: T,
    y0: [T; N],
    x1: T,
    opts: &OdeOptions<T>,
    mut observe: O,
) -> Result<[T; N]>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
    O: FnMut(T, &[T; N]),
{
    let span = x1 - x0;
    if span == T::zero() {
        return Ok(y0);
    }
    let dir = span.signum();
    let tab = tableau::<T>();
    let hmax = opts.max_step.unwrap_or(span.abs()).min(span.abs());
    let hmin = T::epsilon() * T::lit(16.0) * x0.abs().max(x1.abs()).max(T::one());

    let mut x = x0;
    let mut y = y0;
    let mut k = [[T::zero(); N]; 7];
    k[0] = f(x, &y);

    // Initial step from the scale of y and y'.
    let mut h = {
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y[i].abs();
            d0 = d0.max(y[i].abs() / sc);
            d1 = d1.max(k[0][i].abs() / sc);
        }
        let guess = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        guess.min(hmax).max(hmin)
    };

    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(5.0);
    let fifth = T::lit(0.2);

    for _ in 0..opts.max_steps {
        let remaining = (x1 - x) * dir;
        if remaining <= T::zero() {
            return Ok(y);
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let hs = step * dir;

        let mut stage = [T::zero(); N];
        for s in 1..7 {
            for i in 0..N {
                let mut acc = T::zero();
                for j in 0..s {
                    acc += tab.a[s][j] * k[j][i];
                }
                stage[i] = y[i] + hs * acc;
            }
            k[s] = f(x + tab.c[s] * hs, &stage);
        }
        // stage now holds the 5th-order solution (a[6] == b).
        let mut err = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for s in 0..7 {
                e += tab.e[s] * k[s][i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(stage[i].abs());
            err = err.max((hs * e).abs() / sc);
        }
        if !err.is_finite() {
            return Err(SpectralError::StepFailure {
                position: x.as_f64(),
            });
        }
        if err <= T::one() {
            x = if last { x1 } else { x + hs };
            y = stage;
            k[0] = k[6];
            observe(x, &y);
            if last {
                return Ok(y);
            }
            let fac = if err == T::zero() {
                fac_max
            } else {
                (safety * err.powf(-fifth)).min(fac_max).max(fac_min)
            };
            h = (step * fac).min(hmax);
        } else {
            let fac = (safety * err.powf(-fifth)).max(fac_min);
            h = step * fac;
            if h < hmin {
                return Err(SpectralError::StepFailure {
                    position: x.as_f64(),
                });
            }
        }
    }
    Err(SpectralError::StepFailure {
        position: x.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_over_many_periods() {
        let opts = OdeOptions::default();
        let y = integrate(
            |_x, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            20.0 * std::f64::consts::PI,
            &opts,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8, "{:?}", y);
        assert!(y[1].abs() < 1e-8);
    }

    #[test]
    fn exponential_backward() {
        let opts = OdeOptions::default();
        let y = integrate(|_x, y: &[f64; 1]| [y[0]], 2.0, [2f64.exp()], 0.0, &opts).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn observer_sees_monotone_positions() {
        let opts = OdeOptions::default().with_max_step(0.1);
        let mut xs = Vec::new();
        integrate_observed(
            |_x, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            1.0,
            &opts,
            |x, _| xs.push(x),
        )
        .unwrap();
        assert!(xs.len() >= 10);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*xs.last().unwrap(), 1.0);
    }

    #[test]
    fn single_precision_runs() {
        let opts = OdeOptions::<f32>::default();
        let y = integrate(|_x, y: &[f32; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 3.0, &opts).unwrap();
        assert!((y[0] - 3f32.cos()).abs() < 1e-4);
    }
}
