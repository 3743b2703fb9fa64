//! Adaptive Dormand–Prince 5(4) integrator for small complex systems.
//!
//! The state is a fixed-size array of complex numbers. The integrator
//! stops exactly on every requested output point and never steps across a
//! declared breakpoint (where the right-hand side may be discontinuous).

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

fn axpy<const N: usize>(y: &[C; N], terms: &[(f64, &[C; N])], h: f64) -> [C; N] {
    let mut out = *y;
    for (coef, k) in terms {
        let s = coef * h;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

impl Dopri5 {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-3,
            ..Self::default()
        }
    }

    /// Integrate `y' = f(x, y)` from `x0` and return the state at every
    /// point of `targets`, which must be monotone in the direction of
    /// integration. `breaks` lists points the step must land on.
    pub fn integrate<const N: usize, F>(
        &self,
        mut f: F,
        x0: f64,
        y0: [C; N],
        targets: &[f64],
        breaks: &[f64],
    ) -> Result<Vec<[C; N]>>
    where
        F: FnMut(f64, &[C; N]) -> [C; N],
    {
        if targets.is_empty() {
            return Ok(Vec::new());
        }
        let dir = if targets[targets.len() - 1] >= x0 { 1.0 } else { -1.0 };
        if targets.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) {
            return Err(Error::Contract("ODE targets must be monotone".into()));
        }
        let x_end = targets[targets.len() - 1];
        let mut stops: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&b| (b - x0) * dir > 0.0 && (x_end - b) * dir > 0.0)
            .collect();
        stops.extend_from_slice(targets);
        stops.sort_by(|a, b| (a * dir).partial_cmp(&(b * dir)).unwrap());
        stops.dedup();

        let mut out = Vec::with_capacity(targets.len());
        let mut ti = 0;
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut h = 1e-2 * dir;
        let mut steps = 0usize;

        for &stop in &stops {
            while (stop - x) * dir > 0.0 {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::Integration {
                        x,
                        reason: "maximum step count exceeded".into(),
                    });
                }
                let remaining = stop - x;
                let last = h.abs() >= remaining.abs();
                let hs = if last { remaining } else { h };

                let k2 = f(x + 0.2 * hs, &axpy(&y, &[(A21, &k1)], hs));
                let k3 = f(x + 0.3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
                let k4 = f(
                    x + 0.8 * hs,
                    &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs),
                );
                let k5 = f(
                    x + 8.0 / 9.0 * hs,
                    &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
                );
                let k6 = f(
                    x + hs,
                    &axpy(
                        &y,
                        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                        hs,
                    ),
                );
                let y_new = axpy(
                    &y,
                    &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                    hs,
                );
                let k7 = f(x + hs, &y_new);

                let mut err = 0.0;
                for i in 0..N {
                    let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6
                        + k7[i] * E7)
                        * hs;
                    let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                    err += (e.norm() / sc).powi(2);
                }
                let err = (err / N as f64).sqrt();
                if !err.is_finite() {
                    return Err(Error::Integration {
                        x,
                        reason: "non-finite state".into(),
                    });
                }

                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if err <= 1.0 {
                    x = if last { stop } else { x + hs };
                    y = y_new;
                    k1 = k7;
                    if !last {
                        h = hs * fac;
                    }
                } else {
                    h = hs * fac.min(1.0);
                    if h.abs() < 1e-14 * (1.0 + x.abs()) {
                        return Err(Error::Integration {
                            x,
                            reason: "step size underflow".into(),
                        });
                    }
                }
            }
            // A breakpoint may change the right-hand side.
            k1 = f(x, &y);
            while ti < targets.len() && targets[ti] == stop {
                out.push(y);
                ti += 1;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_matches_cosine() {
        let ode = Dopri5::default();
        let targets: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys = ode
            .integrate(
                |_, y: &[C; 2]| [y[1], -y[0]],
                0.0,
                [C::new(1.0, 0.0), C::new(0.0, 0.0)],
                &targets,
                &[],
            )
            .unwrap();
        for (x, y) in targets.iter().zip(&ys) {
            assert!((y[0].re - x.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn backward_integration_with_breakpoint() {
        // y' = sign(x) y, integrated from 2 down to -2.
        let ode = Dopri5::default();
        let ys = ode
            .integrate(
                |x, y: &[C; 1]| [y[0] * if x > 0.0 { 1.0 } else { -1.0 }],
                2.0,
                [C::new(1.0, 0.0)],
                &[0.0, -2.0],
                &[0.0],
            )
            .unwrap();
        assert!((ys[0][0].re - (-2.0f64).exp()).abs() < 1e-10);
        assert!((ys[1][0].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_monotone_targets() {
        let ode = Dopri5::default();
        let r = ode.integrate(|_, y: &[C; 1]| *y, 0.0, [C::new(1.0, 0.0)], &[1.0, 0.5], &[]);
        assert!(r.is_err());
    }
}
