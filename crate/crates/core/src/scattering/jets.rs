//! One-sided derivatives `R^{(l)}(+0)` from the analytic continuation of the
//! right-half-line branch of `R` into a disc around the origin.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::branch::SpectralParameter;
use super::jost::{reflection_with, JostSolver};
use crate::error::Result;
use crate::potentials::PotentialSpec;

type C = Complex64;

pub const CONTOUR_POINTS: usize = 32;
const JET_RTOL: f64 = 1e-12;

/// Radius of the Cauchy circle: well inside the branch points `±ic`.
pub fn contour_radius(c: f64) -> f64 {
    if c > 0.0 {
        0.1 * c.min(1.0)
    } else {
        0.1
    }
}

fn parameter(z: C, c: f64) -> SpectralParameter {
    if c > 0.0 {
        SpectralParameter::near_zero(z, c)
    } else {
        SpectralParameter { k: z, k1: z }
    }
}

/// The branch of `R` that coincides with the reflection coefficient on
/// `k > 0`, continued to `|z| < c`.
pub fn reflection_continued(spec: &PotentialSpec, z: C) -> Result<C> {
    let solver = JostSolver::with_rtol(spec, JET_RTOL);
    Ok(reflection_with(&solver, parameter(z, spec.c))?.r)
}

/// `R^{(l)}(+0)` for `l = 0..count` by trapezoidal Cauchy integrals.
pub fn reflection_jets(spec: &PotentialSpec, count: usize) -> Result<Vec<C>> {
    let r = contour_radius(spec.c);
    let solver = JostSolver::with_rtol(spec, JET_RTOL);
    let zs: Vec<C> = (0..CONTOUR_POINTS)
        .map(|j| C::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64))
        .collect();
    let values = zs
        .par_iter()
        .map(|&z| Ok(reflection_with(&solver, parameter(z, spec.c))?.r))
        .collect::<Result<Vec<C>>>()?;
    let mut jets = Vec::with_capacity(count);
    let mut factorial = 1.0;
    for l in 0..count {
        if l > 0 {
            factorial *= l as f64;
        }
        let sum: C = zs
            .iter()
            .zip(&values)
            .map(|(z, v)| v * z.powi(-(l as i32)))
            .sum();
        jets.push(sum * factorial / CONTOUR_POINTS as f64);
    }
    Ok(jets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_step_jets_match_series() {
        // R = (k - k1)/(k + k1) = -1 + 2k - 2k² + k³ + ...
        let spec = PotentialSpec::sharp_step(1.0);
        let jets = reflection_jets(&spec, 4).unwrap();
        let expect = [-1.0, 2.0, -4.0, 6.0];
        for (j, e) in jets.iter().zip(expect) {
            assert!((j - e).norm() < 1e-7, "{j} vs {e}");
        }
    }

    #[test]
    fn continuation_agrees_on_the_real_line() {
        let spec = PotentialSpec::tanh_step(1.0, 1.0);
        let a = reflection_continued(&spec, C::new(0.05, 0.0)).unwrap();
        let b = super::super::jost::reflection_transmission(&spec, 0.05).unwrap().r;
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn jets_match_the_cut_function() {
        // χ = R₊ - R₋ on the cut with R₋(z) = conj R₊(-z̄): R(+0) is real and
        // 2 Re R'(+0) = dχ/dk(0) = 4c/|W(0)|²
        let spec = PotentialSpec::tanh_step(1.0, 1.0);
        let jets = reflection_jets(&spec, 5).unwrap();
        assert!(jets[0].im.abs() < 1e-9);
        for h in [0.01, 0.05] {
            let rp = reflection_continued(&spec, C::new(0.0, h)).unwrap();
            let x = super::super::jost::chi(&spec, h).unwrap();
            assert!((x - C::new(0.0, 2.0 * rp.im)).norm() < 1e-9);
        }
        let w0 = super::super::jost::wronskian(&spec, SpectralParameter::new(C::new(0.0, 0.0), 1.0)).unwrap();
        assert!((2.0 * jets[1].re - 4.0 / w0.norm_sqr()).abs() < 1e-7);
    }
}
