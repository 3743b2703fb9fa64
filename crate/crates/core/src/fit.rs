//! Least-squares exponent fits on log–log data.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Points actually used (positive, finite ordinates).
    pub used: usize,
}

/// Fit `log y = slope·log x + intercept`. Non-positive or non-finite `y`
/// values are skipped; fewer than two usable points give a NaN slope.
pub fn loglog(xs: &[f64], ys: &[f64]) -> PowerFit {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return PowerFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            used: n,
        };
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    PowerFit {
        slope,
        intercept: my - slope * mx,
        used: n,
    }
}

/// `n` points geometrically spaced on `[a, b]`.
/// `max` that propagates NaN, for folding residuals.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn recovers_exact_power() {
        let xs = geomspace(1e-3, 1e-1, 10);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(2.5)).collect();
        let f = loglog(&xs, &ys);
        assert!((f.slope - 2.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn skips_zeros() {
        let f = loglog(&[1.0, 2.0, 4.0], &[0.0, 2.0, 4.0]);
        assert_eq!(f.used, 2);
        assert!((f.slope - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn slope_is_scale_invariant(p in -4.0f64..4.0, a in 0.1f64..10.0) {
            let xs = geomspace(1.0, 40.0, 6);
            let ys: Vec<f64> = xs.iter().map(|x| a * x.powf(p)).collect();
            prop_assert!((loglog(&xs, &ys).slope - p).abs() < 1e-9);
        }
    }
}
