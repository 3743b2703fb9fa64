//! Eigenvalues `-κ²` and norming constants of the discrete spectrum.

use num_complex::Complex64;

use super::branch::SpectralParameter;
use super::jost::{wronskian_with, JostSolver};
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;

type C = Complex64;

pub const SCAN_POINTS: usize = 400;
/// Lower end of the scan when `c = 0`.
pub const ZERO_BACKGROUND_START: f64 = 1e-4;
/// Relative distance to `c` below which a zero is flagged as near-resonant.
pub const NEAR_RESONANCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    /// Sorted increasing.
    pub kappas: Vec<f64>,
    pub kappa_max: f64,
    pub warnings: Vec<String>,
}

/// Upper end of the scan window, `c + √max|q + c²·1_{x<0}| + 1`.
pub fn kappa_max(spec: &PotentialSpec) -> f64 {
    spec.c + spec.max_deviation().sqrt() + 1.0
}

/// `W(iκ)`, real for `κ > c`.
pub fn wronskian_on_axis(solver: &JostSolver, kappa: f64) -> Result<f64> {
    let p = SpectralParameter::new(C::new(0.0, kappa), solver.spec.c);
    Ok(wronskian_with(solver, p)?.re)
}

fn refine(solver: &JostSolver, mut a: f64, mut fa: f64, mut b: f64) -> Result<f64> {
    // bisection to a narrow bracket, then secant steps inside it
    for _ in 0..30 {
        let m = 0.5 * (a + b);
        let fm = wronskian_on_axis(solver, m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let fb = wronskian_on_axis(solver, b)?;
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    for _ in 0..20 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        let x2 = x2.clamp(a.min(b), a.max(b));
        if (x2 - x1).abs() < 1e-15 * x1.abs() {
            x1 = x2;
            break;
        }
        let f2 = wronskian_on_axis(solver, x2)?;
        (x0, f0, x1, f1) = (x1, f1, x2, f2);
    }
    Ok(x1)
}

/// All `κ ∈ (c, κ_max]` with `W(iκ) = 0`.
pub fn discrete_spectrum(spec: &PotentialSpec) -> Result<DiscreteSpectrum> {
    discrete_spectrum_with(&JostSolver::new(spec))
}

pub fn discrete_spectrum_with(solver: &JostSolver) -> Result<DiscreteSpectrum> {
    let c = solver.spec.c;
    let lo = if c > 0.0 {
        c * (1.0 + 1e-6)
    } else {
        ZERO_BACKGROUND_START
    };
    let hi = kappa_max(solver.spec);
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values = {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|&kappa| wronskian_on_axis(solver, kappa))
            .collect::<Result<Vec<f64>>>()?
    };
    if *values.last().unwrap() > 0.0 {
        return Err(Error::EnlargeWindow { kappa_max: hi });
    }
    let mut kappas = Vec::new();
    for i in 0..SCAN_POINTS - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            kappas.push(grid[i]);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            kappas.push(refine(solver, grid[i], fa, grid[i + 1])?);
        }
    }
    let mut warnings = Vec::new();
    for &k in &kappas {
        if c > 0.0 && k - c < NEAR_RESONANCE_TOL * c {
            warnings.push(format!("eigenvalue κ = {k} lies within {NEAR_RESONANCE_TOL:e}·c of the cut edge"));
        }
    }
    Ok(DiscreteSpectrum {
        kappas,
        kappa_max: hi,
        warnings,
    })
}

/// Relative mismatch allowed between `φ` and `b·φ₁` at the matching point.
const MATCH_TOL: f64 = 1e-6;
/// Spacing of candidate matching points.
const MATCH_SPACING: f64 = 0.25;

/// `γ² = 1/∫φ(iκ, x)² dx` for one eigenvalue.
///
/// Both Jost solutions are carried across the whole window together with
/// their accumulated `L²` mass; they are matched at the candidate point where
/// they agree best, which sits near the bulk of the eigenfunction.
pub fn norming_constant(solver: &JostSolver, kappa: f64) -> Result<f64> {
    let spec = solver.spec;
    let c = spec.c;
    if kappa <= c {
        return Err(Error::Domain(format!("κ = {kappa} must exceed c = {c}")));
    }
    let kappa1 = (kappa * kappa - c * c).sqrt();
    let c2 = c * c;
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);

    let xl = spec.radii.0.min(-1.0);
    let xr = spec.radii.1.max(1.0);
    let n = ((xr - xl) / MATCH_SPACING).floor() as usize;
    let mut xs: Vec<f64> = (1..n).map(|i| xl + i as f64 * MATCH_SPACING).collect();
    xs.push(0.0);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let desc: Vec<f64> = xs.iter().rev().copied().collect();

    // right part: φ = e^{-κx}u with u'' - 2κu' = q u
    let right = solver.ode.integrate(
        |x, y: &[C; 3]| {
            let e = (-2.0 * kappa * x).exp();
            [y[1], y[0] * spec.q(x) + 2.0 * kappa * y[1], -(y[0] * y[0]) * e]
        },
        xr,
        [one, zero, zero],
        &desc,
        &spec.breakpoints(),
    )?;
    let tail_r = (-2.0 * kappa * xr).exp() / (2.0 * kappa);

    // left part: φ₁ = e^{κ₁'x}w with w'' + 2κ₁'w' = (q + c²)w
    let left = solver.ode.integrate(
        |x, y: &[C; 3]| {
            let e = (2.0 * kappa1 * x).exp();
            [y[1], y[0] * (spec.q(x) + c2) - 2.0 * kappa1 * y[1], y[0] * y[0] * e]
        },
        xl,
        [one, zero, zero],
        &xs,
        &spec.breakpoints(),
    )?;
    let tail_l = (2.0 * kappa1 * xl).exp() / (2.0 * kappa1);

    let mut best: Option<(f64, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        let r = &right[xs.len() - 1 - i];
        let l = &left[i];
        let er = (-kappa * x).exp();
        let phi = er * r[0].re;
        let dphi = er * (r[1].re - kappa * r[0].re);
        let el = (kappa1 * x).exp();
        let phi1 = el * l[0].re;
        let dphi1 = el * (l[1].re + kappa1 * l[0].re);
        let denom = phi1 * phi1 + dphi1 * dphi1;
        let b = (phi * phi1 + dphi * dphi1) / denom;
        let mismatch =
            ((phi - b * phi1).abs() + (dphi - b * dphi1).abs()) / (phi.abs() + dphi.abs());
        if !mismatch.is_finite() {
            continue;
        }
        let norm = r[2].re + tail_r + b * b * (l[2].re + tail_l);
        if best.is_none_or(|(m, _)| mismatch < m) {
            best = Some((mismatch, norm));
        }
    }
    let (mismatch, norm) = best.ok_or_else(|| Error::DivergingTail {
        kappa,
        reason: "no finite matching point".into(),
    })?;
    if mismatch > MATCH_TOL {
        return Err(Error::DivergingTail {
            kappa,
            reason: format!("left and right solutions disagree (relative {mismatch:e})"),
        });
    }
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DivergingTail {
            kappa,
            reason: format!("non-positive norm {norm}"),
        });
    }
    Ok(1.0 / norm)
}

pub fn norming_constants(spec: &PotentialSpec, kappas: &[f64]) -> Result<Vec<f64>> {
    let solver = JostSolver::new(spec);
    kappas.iter().map(|&k| norming_constant(&solver, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{PotentialSpec, Well};

    #[test]
    fn sharp_step_has_no_eigenvalues() {
        let s = discrete_spectrum(&PotentialSpec::sharp_step(1.0)).unwrap();
        assert!(s.kappas.is_empty());
        let s = discrete_spectrum(&PotentialSpec::sharp_step(0.5)).unwrap();
        assert!(s.kappas.is_empty());
    }

    #[test]
    fn sharp_step_wronskian_on_axis() {
        let spec = PotentialSpec::sharp_step(1.0);
        let solver = JostSolver::new(&spec);
        let w = wronskian_on_axis(&solver, 2.0).unwrap();
        assert!((w + 2.0 + 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn one_soliton_eigenvalue_and_norming() {
        let spec = PotentialSpec::sech2_well(1.0, 0.0);
        let s = discrete_spectrum(&spec).unwrap();
        assert_eq!(s.kappas.len(), 1);
        assert!((s.kappas[0] - 1.0).abs() < 1e-8);
        let g = norming_constants(&spec, &s.kappas).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn shifted_well_norming_follows_translation() {
        // φ(x; x0) = e^{-κx0}·φ(x - x0) so γ² scales with e^{2κx0}
        let x0 = 1.5;
        let spec = PotentialSpec::sech2_well(1.0, x0);
        let g = norming_constants(&spec, &[1.0]).unwrap();
        assert!((g[0] - 2.0 * (2.0 * x0).exp()).abs() < 1e-6 * g[0]);
    }

    #[test]
    fn two_soliton_levels() {
        // depth ν(ν+1) with ν = 2 carries κ = 1, 2
        let spec = PotentialSpec::sech2_well(2.0, 0.0);
        let s = discrete_spectrum(&spec).unwrap();
        assert_eq!(s.kappas.len(), 2);
        assert!((s.kappas[0] - 1.0).abs() < 1e-8);
        assert!((s.kappas[1] - 2.0).abs() < 1e-8);
        // γ_j² for the reflectionless ν = 2 well: 6 and 12
        let g = norming_constants(&spec, &s.kappas).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-5);
        assert!((g[1] - 12.0).abs() < 1e-5);
    }

    #[test]
    fn non_eigenvalue_is_rejected() {
        let spec = PotentialSpec::sech2_well(1.0, 0.0);
        let err = norming_constants(&spec, &[1.3]).unwrap_err();
        assert!(matches!(err, Error::DivergingTail { .. }));
    }

    #[test]
    fn step_with_well_has_levels_above_c() {
        let spec = PotentialSpec::tanh_step_plus_wells(
            1.0,
            1.0,
            vec![Well {
                depth: 6.0,
                center: 6.0,
                width: 1.0,
            }],
        );
        let s = discrete_spectrum(&spec).unwrap();
        assert!(!s.kappas.is_empty());
        assert!(s.kappas.iter().all(|&k| k > 1.0));
        assert!(s.kappas.windows(2).all(|w| w[0] < w[1]));
        let g = norming_constants(&spec, &s.kappas).unwrap();
        assert!(g.iter().all(|&v| v > 0.0));
    }
}
