//! Jost solutions of `-y'' + q y = k² y` on both backgrounds.
//!
//! The solutions are integrated in normalized form: `φ = e^{ikx} u` from
//! the right and `φ₁ = e^{-ik₁x} w` from the left, so that the integrated
//! quantities stay `O(1)` and the unwanted homogeneous mode is always the
//! decaying one in the direction of integration.

use num_complex::Complex64;

use super::branch::SpectralParameter;
use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::potentials::PotentialSpec;

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };

/// Length of the analytic tail used for the first-order (Born) start values.
const TAIL_SPAN: f64 = 40.0;
const TAIL_INTERVALS: usize = 800;

/// Values of a Jost solution and its derivative on a grid.
#[derive(Debug, Clone)]
pub struct JostValues {
    pub k: C,
    pub x: Vec<f64>,
    pub phi: Vec<C>,
    pub dphi: Vec<C>,
    /// `|e^{∓i·x}φ - 1|` at the starting boundary (the tail correction size).
    pub boundary_residual: f64,
}

/// Normalized Jost state `(u, u')` or `(w, w')` at one point.
#[derive(Debug, Clone, Copy)]
pub struct Normalized {
    pub x: f64,
    pub v: C,
    pub dv: C,
}

/// Integrator for Jost solutions of one potential.
#[derive(Debug, Clone)]
pub struct JostSolver<'a> {
    pub spec: &'a PotentialSpec,
    pub ode: Dopri5,
}

/// `(e^{2iks} - 1)/(2ik)`, continuous at `k = 0`.
fn green(k: C, s: f64) -> C {
    let z = 2.0 * I * k * s;
    if z.norm() < 1e-6 {
        s * (1.0 + z / 2.0 + z * z / 6.0)
    } else {
        (z.exp() - 1.0) / (2.0 * I * k)
    }
}

impl<'a> JostSolver<'a> {
    pub fn new(spec: &'a PotentialSpec) -> Self {
        Self {
            spec,
            ode: Dopri5::default(),
        }
    }

    pub fn with_rtol(spec: &'a PotentialSpec, rtol: f64) -> Self {
        Self {
            spec,
            ode: Dopri5::with_rtol(rtol),
        }
    }

    fn simpson<F: Fn(f64) -> C>(a: f64, f: F) -> C {
        let h = TAIL_SPAN / TAIL_INTERVALS as f64;
        let mut acc = f(a) + f(a + TAIL_SPAN);
        for i in 1..TAIL_INTERVALS {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(a + h * i as f64) * w;
        }
        acc * h / 3.0
    }

    /// First-order start values `(u, u')` at the right radius.
    fn right_start(&self, k: C, xr: f64) -> (C, C) {
        if self.spec.tail_residual(xr) == 0.0 {
            return (C::new(1.0, 0.0), C::new(0.0, 0.0));
        }
        let q = |y: f64| self.spec.q(y);
        let u = 1.0 + Self::simpson(xr, |y| green(k, y - xr) * q(y));
        let du = -Self::simpson(xr, |y| (2.0 * I * k * (y - xr)).exp() * q(y));
        (u, du)
    }

    /// First-order start values `(w, w')` at the left radius.
    fn left_start(&self, k1: C, xl: f64) -> (C, C) {
        if self.spec.tail_residual(xl) == 0.0 {
            return (C::new(1.0, 0.0), C::new(0.0, 0.0));
        }
        let c2 = self.spec.c * self.spec.c;
        let big_q = |y: f64| self.spec.q(y) + c2;
        let a = xl - TAIL_SPAN;
        let w = 1.0 + Self::simpson(a, |y| green(k1, xl - y) * big_q(y));
        let dw = Self::simpson(a, |y| (2.0 * I * k1 * (xl - y)).exp() * big_q(y));
        (w, dw)
    }

    /// `(u, u')` at the points `xs` (any order) for `φ = e^{ikx}u`.
    pub fn right(&self, k: C, xs: &[f64]) -> Result<Vec<Normalized>> {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).unwrap());
        let targets: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
        let xr = self.spec.radii.1.max(targets.first().copied().unwrap_or(0.0));
        let (u0, du0) = self.right_start(k, xr);
        let two_ik = 2.0 * I * k;
        let spec = self.spec;
        let ys = self.ode.integrate(
            |x, y: &[C; 2]| [y[1], y[0] * spec.q(x) - two_ik * y[1]],
            xr,
            [u0, du0],
            &targets,
            &spec.breakpoints(),
        )?;
        let mut out = vec![
            Normalized {
                x: 0.0,
                v: C::default(),
                dv: C::default()
            };
            xs.len()
        ];
        for (slot, y) in order.iter().zip(ys) {
            out[*slot] = Normalized {
                x: xs[*slot],
                v: y[0],
                dv: y[1],
            };
        }
        Ok(out)
    }

    /// `(w, w')` at the points `xs` (any order) for `φ₁ = e^{-ik₁x}w`.
    pub fn left(&self, k1: C, xs: &[f64]) -> Result<Vec<Normalized>> {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
        let targets: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
        let xl = self.spec.radii.0.min(targets.first().copied().unwrap_or(0.0));
        let (w0, dw0) = self.left_start(k1, xl);
        let two_ik1 = 2.0 * I * k1;
        let spec = self.spec;
        let c2 = spec.c * spec.c;
        let ys = self.ode.integrate(
            |x, y: &[C; 2]| [y[1], y[0] * (spec.q(x) + c2) + two_ik1 * y[1]],
            xl,
            [w0, dw0],
            &targets,
            &spec.breakpoints(),
        )?;
        let mut out = vec![
            Normalized {
                x: 0.0,
                v: C::default(),
                dv: C::default()
            };
            xs.len()
        ];
        for (slot, y) in order.iter().zip(ys) {
            out[*slot] = Normalized {
                x: xs[*slot],
                v: y[0],
                dv: y[1],
            };
        }
        Ok(out)
    }
}

/// `W(φ₁, φ)` from normalized states of `φ` (parameter `k`) and `φ₁`
/// (parameter `k1`) at the same point.
pub fn wronskian_normalized(k: C, k1: C, u: &Normalized, w: &Normalized) -> C {
    let x = u.x;
    (I * (k - k1) * x).exp() * (w.v * u.dv - w.dv * u.v + I * (k + k1) * w.v * u.v)
}

fn wronskian_scale(k: C, k1: C, u: &Normalized, w: &Normalized) -> f64 {
    let x = u.x;
    (I * (k - k1) * x).exp().norm()
        * ((w.v * u.dv).norm() + (w.dv * u.v).norm() + ((k + k1) * w.v * u.v).norm())
}

/// Right Jost solution on a grid.
pub fn jost_right(spec: &PotentialSpec, k: C, xs: &[f64]) -> Result<JostValues> {
    if k.im < 0.0 {
        return Err(Error::Domain(format!("jost_right needs Im k ≥ 0, got {k}")));
    }
    let solver = JostSolver::new(spec);
    let vals = solver.right(k, xs)?;
    let xr = spec.radii.1.max(xs.iter().copied().fold(f64::MIN, f64::max));
    let (u0, _) = solver.right_start(k, xr);
    let (phi, dphi) = vals
        .iter()
        .map(|n| {
            let e = (I * k * n.x).exp();
            (e * n.v, e * (n.dv + I * k * n.v))
        })
        .unzip();
    Ok(JostValues {
        k,
        x: xs.to_vec(),
        phi,
        dphi,
        boundary_residual: (u0 - 1.0).norm(),
    })
}

/// Left Jost solution on a grid.
pub fn jost_left(spec: &PotentialSpec, p: SpectralParameter, xs: &[f64]) -> Result<JostValues> {
    if p.k.im < 0.0 {
        return Err(Error::Domain(format!("jost_left needs Im k ≥ 0, got {}", p.k)));
    }
    let solver = JostSolver::new(spec);
    let vals = solver.left(p.k1, xs)?;
    let xl = spec.radii.0.min(xs.iter().copied().fold(f64::MAX, f64::min));
    let (w0, _) = solver.left_start(p.k1, xl);
    let (phi, dphi) = vals
        .iter()
        .map(|n| {
            let e = (-I * p.k1 * n.x).exp();
            (e * n.v, e * (n.dv - I * p.k1 * n.v))
        })
        .unzip();
    Ok(JostValues {
        k: p.k,
        x: xs.to_vec(),
        phi,
        dphi,
        boundary_residual: (w0 - 1.0).norm(),
    })
}

/// Matching points for the Wronskian and the scattering relation.
pub const MATCH_POINTS: [f64; 3] = [-1.0, 0.0, 1.0];
/// Allowed relative spread of the Wronskian across [`MATCH_POINTS`].
pub const WRONSKIAN_SPREAD_TOL: f64 = 1e-8;

/// Wronskian `W(φ₁, φ)` at `x = 0`, checked for `x`-independence on `x = ±1`.
pub fn wronskian_with(solver: &JostSolver, p: SpectralParameter) -> Result<C> {
    let u = solver.right(p.k, &MATCH_POINTS)?;
    let w = solver.left(p.k1, &MATCH_POINTS)?;
    let ws: Vec<C> = u
        .iter()
        .zip(&w)
        .map(|(u, w)| wronskian_normalized(p.k, p.k1, u, w))
        .collect();
    let scale = u
        .iter()
        .zip(&w)
        .map(|(u, w)| wronskian_scale(p.k, p.k1, u, w))
        .fold(0.0, crate::fit::nan_max)
        .max(ws[1].norm());
    let spread = ws.iter().map(|v| (v - ws[1]).norm()).fold(0.0, crate::fit::nan_max) / scale;
    if spread > WRONSKIAN_SPREAD_TOL {
        return Err(Error::InconsistentWronskian {
            spread,
            tol: WRONSKIAN_SPREAD_TOL,
        });
    }
    Ok(ws[1])
}

pub fn wronskian(spec: &PotentialSpec, p: SpectralParameter) -> Result<C> {
    wronskian_with(&JostSolver::new(spec), p)
}

/// Reflection and transmission coefficients at one point.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionTransmission {
    pub r: C,
    pub t: C,
    pub w: C,
    /// Condition number of the 2×2 system `T φ₁ - R φ = φ(-k)` at `x = 0`.
    pub cond: f64,
}

/// `R = -W(φ₁, φ(-k))/W(φ₁, φ(k))` and `T = 2ik/W`, equivalent to solving
/// the scattering relation at `x = 0` but without losing accuracy as the
/// relation degenerates near `k = 0`. For non-real `k` the solution at `-k`
/// is integrated separately (analytic continuation).
pub fn reflection_with(solver: &JostSolver, p: SpectralParameter) -> Result<ReflectionTransmission> {
    let u = solver.right(p.k, &[0.0])?[0];
    let w = solver.left(p.k1, &[0.0])?[0];
    let um = if p.k.im == 0.0 {
        Normalized {
            x: 0.0,
            v: u.v.conj(),
            dv: u.dv.conj(),
        }
    } else {
        solver.right(-p.k, &[0.0])?[0]
    };
    let w_plus = wronskian_normalized(p.k, p.k1, &u, &w);
    let w_minus = wronskian_normalized(-p.k, p.k1, &um, &w);
    if w_plus.norm() == 0.0 {
        return Err(Error::Domain(format!("W vanishes at k = {}", p.k)));
    }
    let r = -w_minus / w_plus;
    let t = 2.0 * I * p.k / w_plus;
    // [[φ₁, -φ], [φ₁', -φ']] at x = 0
    let a = [w.v, -u.v, w.dv - I * p.k1 * w.v, -(u.dv + I * p.k * u.v)];
    let det = (a[0] * a[3] - a[1] * a[2]).norm();
    let fro = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let cond = if det > 0.0 { fro / det } else { f64::INFINITY };
    Ok(ReflectionTransmission {
        r,
        t,
        w: w_plus,
        cond,
    })
}

/// `(R(k), T(k))` for real `k ≠ 0`.
pub fn reflection_transmission(spec: &PotentialSpec, k: f64) -> Result<ReflectionTransmission> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain(format!("reflection needs real k ≠ 0, got {k}")));
    }
    let p = SpectralParameter::new(C::new(k, 0.0), spec.c);
    reflection_with(&JostSolver::new(spec), p)
}

/// Cut function `χ(ih) = 4k[k₁]_r/|W(k)|²` at `k = ih`, `0 < h < c`.
pub fn chi_with(solver: &JostSolver, h: f64) -> Result<C> {
    let c = solver.spec.c;
    if !(h > 0.0 && h < c) {
        return Err(Error::Domain(format!("χ needs 0 < h < c = {c}, got {h}")));
    }
    let p = SpectralParameter::new(C::new(0.0, h), c);
    let w = wronskian_with(solver, p)?;
    Ok(C::new(0.0, 4.0 * h * (c * c - h * h).sqrt() / w.norm_sqr()))
}

pub fn chi(spec: &PotentialSpec, h: f64) -> Result<C> {
    chi_with(&JostSolver::new(spec), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;

    #[test]
    fn free_solution_on_zero_background() {
        let spec = PotentialSpec::sech2_well(0.0, 0.0);
        let xs = [-3.0, 0.0, 2.5];
        let k = C::new(0.7, 0.2);
        let j = jost_right(&spec, k, &xs).unwrap();
        for (x, phi) in xs.iter().zip(&j.phi) {
            assert!((phi - (I * k * x).exp()).norm() < 1e-12);
        }
    }

    #[test]
    fn free_solution_on_shifted_background() {
        // q ≡ -c²: sharp step seen entirely from the left half-line
        let spec = PotentialSpec::sharp_step(1.0);
        let p = SpectralParameter::new(C::new(0.8, 0.0), 1.0);
        let j = jost_left(&spec, p, &[-4.0, -1.0]).unwrap();
        for (x, phi) in j.x.iter().zip(&j.phi) {
            assert!((phi - (-I * p.k1 * x).exp()).norm() < 1e-12);
        }
    }

    #[test]
    fn sharp_step_matching_values() {
        let spec = PotentialSpec::sharp_step(1.0);
        let r = jost_right(&spec, C::new(1.0, 0.0), &[0.0]).unwrap();
        assert!((r.phi[0] - 1.0).norm() < 1e-12);
        assert!((r.dphi[0] - I).norm() < 1e-12);
        let p = SpectralParameter::new(C::new(1.0, 0.0), 1.0);
        let l = jost_left(&spec, p, &[0.0]).unwrap();
        assert!((l.phi[0] - 1.0).norm() < 1e-12);
        assert!((l.dphi[0] + I * 2f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn sharp_step_wronskian() {
        let spec = PotentialSpec::sharp_step(1.0);
        let w = wronskian(&spec, SpectralParameter::new(C::new(1.0, 0.0), 1.0)).unwrap();
        assert!((w - I * (1.0 + 2f64.sqrt())).norm() < 1e-10);
        let w_ic = wronskian(&spec, SpectralParameter::new(C::new(0.0, 1.0), 1.0)).unwrap();
        assert!((w_ic + 1.0).norm() < 1e-10);
    }

    #[test]
    fn free_wronskian_is_2ik() {
        let spec = PotentialSpec::sech2_well(0.0, 0.0);
        let k = C::new(0.4, 0.3);
        let w = wronskian(&spec, SpectralParameter::new(k, 0.0)).unwrap();
        assert!((w - 2.0 * I * k).norm() < 1e-12);
    }

    #[test]
    fn sharp_step_reflection() {
        let spec = PotentialSpec::sharp_step(1.0);
        let rt = reflection_transmission(&spec, 1.0).unwrap();
        let s2 = 2f64.sqrt();
        assert!((rt.r - (1.0 - s2) / (1.0 + s2)).norm() < 1e-10);
        assert!((rt.t - 2.0 / (1.0 + s2)).norm() < 1e-10);
    }

    #[test]
    fn free_reflection_vanishes() {
        let spec = PotentialSpec::sech2_well(0.0, 0.0);
        let rt = reflection_transmission(&spec, 0.9).unwrap();
        assert!(rt.r.norm() < 1e-12);
        assert!((rt.t - 1.0).norm() < 1e-12);
    }

    #[test]
    fn sharp_step_chi() {
        let spec = PotentialSpec::sharp_step(1.0);
        let x = chi(&spec, 0.5).unwrap();
        assert!(x.re.abs() < 1e-15);
        assert!((x.im - 3f64.sqrt()).abs() < 1e-9);
        assert!(chi(&spec, 1.0).is_err());
        assert!(chi(&spec, 0.0).is_err());
    }

    #[test]
    fn chi_vanishes_at_both_ends() {
        let spec = PotentialSpec::tanh_step(1.0, 1.0);
        assert!(chi(&spec, 1e-6).unwrap().norm() < 1e-4);
        assert!(chi(&spec, 1.0 - 1e-8).unwrap().norm() < 1e-3);
    }

    #[test]
    fn left_values_conjugate_across_cut() {
        use super::super::branch::CutSide;
        let spec = PotentialSpec::tanh_step(1.0, 1.0);
        let k = C::new(0.0, 0.4);
        let r = SpectralParameter::with_side(k, 1.0, CutSide::Right);
        let l = SpectralParameter::with_side(k, 1.0, CutSide::Left);
        let a = jost_left(&spec, r, &[0.3]).unwrap();
        let b = jost_left(&spec, l, &[0.3]).unwrap();
        assert!(a.phi[0].im.abs() > 1e-3);
        assert!((a.phi[0] - b.phi[0].conj()).norm() < 1e-9);
    }

    #[test]
    fn real_potential_gives_real_jost_on_imaginary_axis() {
        let spec = PotentialSpec::tanh_step(1.0, 1.0);
        let p = SpectralParameter::new(C::new(0.0, 1.7), 1.0);
        let r = jost_right(&spec, p.k, &[-2.0, 1.0]).unwrap();
        let l = jost_left(&spec, p, &[-2.0, 1.0]).unwrap();
        for z in r.phi.iter().chain(&l.phi) {
            assert!(z.im.abs() < 1e-12 * z.norm().max(1.0));
        }
    }
}
