use num_complex::Complex64;

type C = Complex64;

/// Side of the cut `[0, ic]` (or `[-ic, 0]`) a point on `Re k = 0` belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutSide {
    #[default]
    Right,
    Left,
}

/// Spectral parameter `k` together with `k1 = √(k² + c²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    pub k: C,
    pub k1: C,
}

impl SpectralParameter {
    /// `k1` on the sheet cut along `[-ic, ic]`, asymptotic to `k` at
    /// infinity and positive on the right side of `[0, ic)`.
    pub fn new(k: C, c: f64) -> Self {
        Self::with_side(k, c, CutSide::Right)
    }

    pub fn with_side(k: C, c: f64, side: CutSide) -> Self {
        Self {
            k,
            k1: k1_branch(k, c, side),
        }
    }

    /// `k1` continued analytically from the right half-line through a
    /// neighbourhood of `k = 0` (principal root, `k1(0) = c`). Valid for
    /// `|k| < c`.
    pub fn near_zero(k: C, c: f64) -> Self {
        Self {
            k,
            k1: (k * k + c * c).sqrt(),
        }
    }
}

/// `k·√(1 + c²/k²)` with principal root: the cut sits exactly on
/// `[-ic, ic]`. On `Re k = 0`, `|Im k| < c` the side flag picks the sign.
pub fn k1_branch(k: C, c: f64, side: CutSide) -> C {
    if c == 0.0 {
        return k;
    }
    if k.re == 0.0 && k.im.abs() <= c {
        let v = (c * c - k.im * k.im).max(0.0).sqrt();
        let sign = match side {
            CutSide::Right => 1.0,
            CutSide::Left => -1.0,
        };
        return C::new(sign * v, 0.0);
    }
    let ratio = C::new(c * c, 0.0) / (k * k);
    k * (C::new(1.0, 0.0) + ratio).sqrt()
}
