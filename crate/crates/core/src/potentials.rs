//! Step-like initial data: closed-form families, tabulated data, sampling
//! and moment diagnostics.
//!
//! Every potential tends to `0` as `x → +∞` and to `-c²` as `x → -∞`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail residual below which a potential counts as sitting on its background.
pub const TAIL_TOL: f64 = 1e-14;

/// A single `-depth·sech²((x-center)/width)` well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub depth: f64,
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `-c²` for `x < 0`, `0` for `x ≥ 0`. Fixture only: not smooth.
    SharpStep,
    /// `-c²(1 - tanh(s·x))/2`.
    TanhStep { steepness: f64 },
    /// Tanh step plus a sum of `sech²` wells.
    TanhStepPlusWells { steepness: f64, wells: Vec<Well> },
    /// Values on a uniform table, backgrounds outside it.
    Tabulated { x: Vec<f64>, q: Vec<f64> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SharpStep => "sharp-step",
            Family::TanhStep { .. } => "tanh-step",
            Family::TanhStepPlusWells { .. } => "tanh-step-plus-wells",
            Family::Tabulated { .. } => "tabulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub family: Family,
    pub c: f64,
    pub m0: u32,
    pub n0: u32,
    /// `c = 0` is only accepted when this flag is set.
    pub decaying: bool,
    /// Left and right truncation radii (`left < 0 < right`).
    pub radii: (f64, f64),
}

/// Polynomial in `T = tanh(u)` with ascending coefficients.
#[derive(Debug, Clone)]
struct TanhPoly(Vec<f64>);

impl TanhPoly {
    fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }

    /// d/du P(tanh u) = P'(T)(1 - T²)
    fn d_du(&self) -> TanhPoly {
        let n = self.0.len();
        if n <= 1 {
            return TanhPoly(vec![0.0]);
        }
        let dp: Vec<f64> = (1..n).map(|i| i as f64 * self.0[i]).collect();
        let mut out = vec![0.0; dp.len() + 2];
        for (i, &a) in dp.iter().enumerate() {
            out[i] += a;
            out[i + 2] -= a;
        }
        TanhPoly(out)
    }

    fn derivative(&self, order: u32) -> TanhPoly {
        (0..order).fold(self.clone(), |p, _| p.d_du())
    }

    fn d_dt(&self) -> TanhPoly {
        TanhPoly((1..self.0.len().max(2)).map(|i| i as f64 * self.0.get(i).copied().unwrap_or(0.0)).collect())
    }

    /// `d^order/du^order P(tanh u)` written as `sech²u · Q(tanh u)` for
    /// `order ≥ 1`, which keeps the decay of the tails instead of
    /// cancelling to rounding noise near `T = ±1`.
    fn eval_derivative(&self, order: u32, u: f64) -> f64 {
        let t = u.tanh();
        if order == 0 {
            return self.eval(t);
        }
        let q = self.derivative(order - 1).d_dt();
        q.eval(t) / u.cosh().powi(2)
    }
}

impl PotentialSpec {
    pub fn new(family: Family, c: f64, m0: u32, n0: u32) -> Result<Self> {
        let mut spec = PotentialSpec {
            family,
            c,
            m0,
            n0,
            decaying: c == 0.0,
            radii: (-1.0, 1.0),
        };
        spec.validate()?;
        spec.radii = spec.default_radii();
        Ok(spec)
    }

    pub fn sharp_step(c: f64) -> Self {
        Self::new(Family::SharpStep, c, 4, 7).expect("valid sharp step")
    }

    pub fn tanh_step(c: f64, steepness: f64) -> Self {
        Self::new(Family::TanhStep { steepness }, c, 4, 7).expect("valid tanh step")
    }

    pub fn tanh_step_plus_wells(c: f64, steepness: f64, wells: Vec<Well>) -> Self {
        Self::new(Family::TanhStepPlusWells { steepness, wells }, c, 4, 7)
            .expect("valid tanh step with wells")
    }

    /// `c = 0` reflectionless well `-ν(ν+1)·sech²(x - center)`.
    pub fn sech2_well(nu: f64, center: f64) -> Self {
        Self::tanh_step_plus_wells(
            0.0,
            1.0,
            vec![Well {
                depth: nu * (nu + 1.0),
                center,
                width: 1.0,
            }],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(Error::Config(format!("c must be non-negative, got {}", self.c)));
        }
        if self.c == 0.0 && !self.decaying {
            return Err(Error::Config("c = 0 requires decaying test mode".into()));
        }
        if self.m0 < 1 {
            return Err(Error::Config("m0 must be positive".into()));
        }
        match &self.family {
            Family::TanhStep { steepness } if *steepness <= 0.0 => {
                Err(Error::Config("steepness must be positive".into()))
            }
            Family::TanhStepPlusWells { steepness, wells } => {
                if *steepness <= 0.0 {
                    return Err(Error::Config("steepness must be positive".into()));
                }
                if wells.iter().any(|w| w.width <= 0.0) {
                    return Err(Error::Config("well widths must be positive".into()));
                }
                Ok(())
            }
            Family::Tabulated { x, q } => {
                if x.len() != q.len() || x.len() < 5 {
                    return Err(Error::Config("tabulated data needs ≥ 5 (x, q) rows".into()));
                }
                let h = x[1] - x[0];
                if h <= 0.0 || x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
                    return Err(Error::Config("tabulated x must be uniform and increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// True for the fixture-only discontinuous family.
    pub fn fixture_only(&self) -> bool {
        matches!(self.family, Family::SharpStep)
    }

    /// Points where `q` (or a derivative) is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            Family::SharpStep => vec![0.0],
            _ => Vec::new(),
        }
    }

    pub fn q(&self, x: f64) -> f64 {
        let c2 = self.c * self.c;
        match &self.family {
            Family::SharpStep => {
                if x < 0.0 {
                    -c2
                } else {
                    0.0
                }
            }
            Family::TanhStep { steepness } => -0.5 * c2 * (1.0 - (steepness * x).tanh()),
            Family::TanhStepPlusWells { steepness, wells } => {
                -0.5 * c2 * (1.0 - (steepness * x).tanh())
                    + wells.iter().map(|w| well_value(w, x)).sum::<f64>()
            }
            Family::Tabulated { x: xs, q } => tabulated_eval(xs, q, c2, x),
        }
    }

    /// Derivative of order `order` (0 returns `q`). Closed form for the
    /// analytic families, fourth-order differences for tabulated data.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        if order == 0 {
            return self.q(x);
        }
        let c2 = self.c * self.c;
        match &self.family {
            Family::SharpStep => 0.0,
            Family::TanhStep { steepness } => tanh_step_derivative(c2, *steepness, x, order),
            Family::TanhStepPlusWells { steepness, wells } => {
                tanh_step_derivative(c2, *steepness, x, order)
                    + wells
                        .iter()
                        .map(|w| well_derivative(w, x, order))
                        .sum::<f64>()
            }
            Family::Tabulated { x: xs, .. } => {
                let h = xs[1] - xs[0];
                fd4_derivative(|y| self.q(y), x, h, order)
            }
        }
    }

    /// `|q(x)|` on the right, `|q(x) + c²|` on the left.
    pub fn tail_residual(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.q(x).abs()
        } else {
            (self.q(x) + self.c * self.c).abs()
        }
    }

    /// Smallest radii beyond which the tail residual stays below
    /// [`TAIL_TOL`] (checked on a 40-unit stretch).
    pub fn default_radii(&self) -> (f64, f64) {
        match &self.family {
            Family::SharpStep => (-1.0, 1.0),
            Family::Tabulated { x, .. } => (x[0].min(-1.0), x[x.len() - 1].max(1.0)),
            _ => {
                let find = |sign: f64| {
                    let mut r = 1.0;
                    'outer: while r < 1e4 {
                        for i in 0..400 {
                            let x = sign * (r + 0.1 * i as f64);
                            if self.tail_residual(x) >= TAIL_TOL {
                                r = (x.abs() + 0.5).ceil();
                                continue 'outer;
                            }
                        }
                        return r;
                    }
                    r
                };
                (-find(-1.0), find(1.0))
            }
        }
    }

    /// Largest `|q(x) + c²·1_{x<0}|`, sampled on the truncation window.
    pub fn max_deviation(&self) -> f64 {
        let (a, b) = self.radii;
        let n = 4000;
        (0..=n)
            .map(|i| {
                let x = a + (b - a) * i as f64 / n as f64;
                let bg = if x < 0.0 { self.c * self.c } else { 0.0 };
                (self.q(x) + bg).abs()
            })
            .fold(0.0, crate::fit::nan_max)
    }

    /// Load a tabulated potential from a two-column `x,q` CSV file.
    pub fn tabulated_from_csv(path: &Path, c: f64, m0: u32, n0: u32) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut xs = Vec::new();
        let mut qs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Option<f64> { rec.get(i)?.parse().ok() };
            match (parse(0), parse(1)) {
                (Some(x), Some(q)) => {
                    xs.push(x);
                    qs.push(q);
                }
                // header line
                _ if xs.is_empty() => continue,
                _ => return Err(Error::Config(format!("bad CSV row {:?}", rec))),
            }
        }
        Self::new(Family::Tabulated { x: xs, q: qs }, c, m0, n0)
    }
}

fn well_value(w: &Well, x: f64) -> f64 {
    let s = 1.0 / ((x - w.center) / w.width).cosh();
    -w.depth * s * s
}

fn tanh_step_derivative(c2: f64, s: f64, x: f64, order: u32) -> f64 {
    // -c²/2 + (c²/2) tanh(s x)
    TanhPoly(vec![0.0, 0.5 * c2]).eval_derivative(order, s * x) * s.powi(order as i32)
}

fn well_derivative(w: &Well, x: f64, order: u32) -> f64 {
    // -d (1 - T²), T = tanh((x - x0)/w)
    TanhPoly(vec![-w.depth, 0.0, w.depth]).eval_derivative(order, (x - w.center) / w.width)
        * w.width.powi(-(order as i32))
}

fn tabulated_eval(xs: &[f64], q: &[f64], c2: f64, x: f64) -> f64 {
    let n = xs.len();
    let h = xs[1] - xs[0];
    if x < xs[0] {
        return if x < 0.0 { -c2 } else { q[0] };
    }
    if x > xs[n - 1] {
        return if x >= 0.0 { 0.0 } else { q[n - 1] };
    }
    // four-point Lagrange interpolation
    let s = (x - xs[0]) / h;
    let i = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for a in 0..4 {
        let mut l = 1.0;
        for b in 0..4 {
            if a != b {
                l *= (s - (i + b) as f64) / (a as f64 - b as f64);
            }
        }
        acc += l * q[i + a];
    }
    acc
}

/// Fourth-order central differences, applied recursively above order 2.
fn fd4_derivative<F: Fn(f64) -> f64 + Copy>(f: F, x: f64, h: f64, order: u32) -> f64 {
    match order {
        0 => f(x),
        1 => (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h),
        2 => {
            (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
                / (12.0 * h * h)
        }
        n => {
            let g = move |y: f64| fd4_derivative(f, y, h, 2);
            // nested closure types differ per order; fall back to a boxed step
            fd4_boxed(&g, x, h, n - 2)
        }
    }
}

fn fd4_boxed(f: &dyn Fn(f64) -> f64, x: f64, h: f64, order: u32) -> f64 {
    match order {
        0 => f(x),
        1 => (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h),
        _ => {
            let g = |y: f64| {
                (-f(y - 2.0 * h) + 16.0 * f(y - h) - 30.0 * f(y) + 16.0 * f(y + h)
                    - f(y + 2.0 * h))
                    / (12.0 * h * h)
            };
            fd4_boxed(&g, x, h, order - 2)
        }
    }
}

/// Uniform sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.x_max - self.x_min) / self.h).round() as usize;
        (0..=n).map(|i| self.x_min + i as f64 * self.h).collect()
    }

    /// Grid covering the spec's truncation radii plus a margin.
    pub fn covering(spec: &PotentialSpec, margin: f64, h: f64) -> Self {
        GridSpec {
            x_min: (spec.radii.0 - margin).floor(),
            x_max: (spec.radii.1 + margin).ceil(),
            h,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialSamples {
    pub c: f64,
    pub n0: u32,
    pub radii: (f64, f64),
    pub fixture_only: bool,
    pub h: f64,
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    /// `derivatives[i-1]` holds `q^{(i)}` for `i = 1..=n0`.
    pub derivatives: Vec<Vec<f64>>,
    /// `(x, residual)` for grid points beyond the truncation radii.
    pub tail: Vec<(f64, f64)>,
}

/// Sample a potential and its derivatives on a uniform grid.
pub fn sample_potential(spec: &PotentialSpec, grid: &GridSpec) -> Result<PotentialSamples> {
    spec.validate()?;
    if grid.h <= 0.0 || grid.x_max <= grid.x_min {
        return Err(Error::Config("grid must have positive spacing and extent".into()));
    }
    if grid.x_min > spec.radii.0 || grid.x_max < spec.radii.1 {
        return Err(Error::Config(format!(
            "grid [{}, {}] does not cover the truncation radii {:?}",
            grid.x_min, grid.x_max, spec.radii
        )));
    }
    if let Family::Tabulated { x, .. } = &spec.family {
        let th = x[1] - x[0];
        let ratio = grid.h / th;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::Resample(format!(
                "grid spacing {} is not a multiple of table spacing {}",
                grid.h, th
            )));
        }
    }
    let xs = grid.points();
    let q: Vec<f64> = xs.iter().map(|&x| spec.q(x)).collect();
    let derivatives = (1..=spec.n0)
        .map(|o| xs.iter().map(|&x| spec.derivative(x, o)).collect())
        .collect();
    let tail = xs
        .iter()
        .filter(|&&x| x <= spec.radii.0 || x >= spec.radii.1)
        .map(|&x| (x, spec.tail_residual(x)))
        .collect();
    Ok(PotentialSamples {
        c: spec.c,
        n0: spec.n0,
        radii: spec.radii,
        fixture_only: spec.fixture_only(),
        h: grid.h,
        x: xs,
        q,
        derivatives,
        tail,
    })
}

impl PotentialSamples {
    /// Tail residuals stay below `tol` beyond the radii, and their running
    /// envelope (max over the remaining tail) never increases outward.
    pub fn tails_decay(&self, tol: f64) -> bool {
        let (left, right): (Vec<_>, Vec<_>) = self.tail.iter().partition(|(x, _)| *x < 0.0);
        let check = |mut pts: Vec<&(f64, f64)>| {
            pts.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
            let mut envelope = f64::INFINITY;
            for i in 0..pts.len() {
                let rest = pts[i..].iter().map(|p| p.1).fold(0.0, crate::fit::nan_max);
                if rest > envelope + tol || pts[i].1 > tol {
                    return false;
                }
                envelope = rest;
            }
            true
        };
        check(left) && check(right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Finite,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentEntry {
    /// 0 for the potential itself, `i` for `q^{(i)}`.
    pub order: u32,
    pub window_integral: f64,
    pub tail_estimate: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub m0: u32,
    pub entries: Vec<MomentEntry>,
    /// True when every moment is finite.
    pub satisfies_class: bool,
}

/// Minimum number of grid points past each truncation radius needed to
/// extrapolate a tail.
const MIN_TAIL_POINTS: usize = 8;

/// Weighted moment integrals of the decay/smoothness class with
/// exponential tail extrapolation.
pub fn moment_diagnostics(samples: &PotentialSamples, m0: u32) -> MomentReport {
    let c2 = samples.c * samples.c;
    let h = samples.h;
    let n_left = samples.x.iter().filter(|&&x| x <= samples.radii.0).count();
    let n_right = samples.x.iter().filter(|&&x| x >= samples.radii.1).count();
    let coverage_ok = n_left >= MIN_TAIL_POINTS && n_right >= MIN_TAIL_POINTS;

    let mut entries = Vec::new();
    for order in 0..=samples.n0 {
        if order > 0 && samples.fixture_only {
            // distributional derivative of a jump
            entries.push(MomentEntry {
                order,
                window_integral: f64::INFINITY,
                tail_estimate: f64::INFINITY,
                verdict: Verdict::Divergent,
            });
            continue;
        }
        let integrand: Vec<f64> = if order == 0 {
            // ∫_{R+} x^m0 (|q(x)| + |q(-x)+c²|) = ∫_R |x|^m0 · residual(x)
            samples
                .x
                .iter()
                .zip(&samples.q)
                .map(|(&x, &q)| {
                    let r = if x >= 0.0 { q.abs() } else { (q + c2).abs() };
                    x.abs().powi(m0 as i32) * r
                })
                .collect()
        } else {
            samples
                .x
                .iter()
                .zip(&samples.derivatives[order as usize - 1])
                .map(|(&x, &d)| x.abs().powi(m0 as i32 - 1) * d.abs())
                .collect()
        };
        let window_integral = trapezoid(&integrand, h);
        if !coverage_ok {
            entries.push(MomentEntry {
                order,
                window_integral,
                tail_estimate: f64::NAN,
                verdict: Verdict::Inconclusive,
            });
            continue;
        }
        let tail_estimate = exp_tail(&integrand, h, false) + exp_tail(&integrand, h, true);
        let tol = 1e-6 * window_integral.abs().max(1e-12);
        let verdict = if !tail_estimate.is_finite() {
            Verdict::Divergent
        } else if tail_estimate <= tol || tail_estimate < 1e-12 {
            Verdict::Finite
        } else {
            Verdict::Inconclusive
        };
        entries.push(MomentEntry {
            order,
            window_integral,
            tail_estimate,
            verdict,
        });
    }
    let satisfies_class = entries.iter().all(|e| e.verdict == Verdict::Finite);
    MomentReport {
        m0,
        entries,
        satisfies_class,
    }
}

fn trapezoid(y: &[f64], h: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    h * (y.iter().sum::<f64>() - 0.5 * (y[0] + y[y.len() - 1]))
}

/// Exponential-tail estimate `g(X)/a` past one end of the window, with the
/// decay rate `a` fitted from the last samples. Returns infinity when the
/// integrand is not decaying there.
fn exp_tail(g: &[f64], h: f64, right: bool) -> f64 {
    let n = g.len();
    let (edge, inner) = if right {
        (g[n - 1], g[n - 1 - MIN_TAIL_POINTS / 2])
    } else {
        (g[0], g[MIN_TAIL_POINTS / 2])
    };
    if edge <= 1e-300 {
        return 0.0;
    }
    if inner <= edge {
        return if edge < 1e-14 { edge * 1e3 } else { f64::INFINITY };
    }
    let rate = (inner / edge).ln() / (h * (MIN_TAIL_POINTS / 2) as f64);
    edge / rate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_step_values() {
        let s = PotentialSpec::sharp_step(1.0);
        assert_eq!(s.q(-3.0), -1.0);
        assert_eq!(s.q(3.0), 0.0);
    }

    #[test]
    fn tanh_step_midpoint() {
        let s = PotentialSpec::tanh_step(1.0, 1.0);
        assert!((s.q(0.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn well_on_tanh_step() {
        let s = PotentialSpec::tanh_step_plus_wells(
            1.0,
            1.0,
            vec![Well {
                depth: 2.0,
                center: 10.0,
                width: 1.0,
            }],
        );
        // -2 + (-(1 - tanh 10)/2)
        let expected = -2.0 - 0.5 * (1.0 - 10f64.tanh());
        assert!((s.q(10.0) - expected).abs() < 1e-15);
        assert!((s.q(10.0) + 2.000_000_002_1).abs() < 1e-10);
    }

    #[test]
    fn zero_c_requires_decaying_mode() {
        let mut s = PotentialSpec::sech2_well(1.0, 0.0);
        assert!(s.validate().is_ok());
        s.decaying = false;
        assert!(s.validate().is_err());
    }

    #[test]
    fn tanh_poly_derivatives_match_closed_forms() {
        // d/dx tanh = sech², d²/dx² tanh = -2 tanh sech²
        let s = PotentialSpec::tanh_step(2.0, 1.0);
        let x: f64 = 0.37;
        let sech2 = 1.0 / x.cosh().powi(2);
        assert!((s.derivative(x, 1) - 2.0 * sech2).abs() < 1e-14);
        assert!((s.derivative(x, 2) - 2.0 * (-2.0 * x.tanh() * sech2)).abs() < 1e-14);
    }

    #[test]
    fn radii_bound_tail_residual() {
        let s = PotentialSpec::tanh_step(1.0, 1.0);
        let (l, r) = s.radii;
        assert!(s.tail_residual(l) < TAIL_TOL && s.tail_residual(r) < TAIL_TOL);
        assert!(s.tail_residual(l + 2.0) > TAIL_TOL);
    }

    #[test]
    fn sampling_requires_coverage() {
        let s = PotentialSpec::tanh_step(1.0, 1.0);
        let g = GridSpec {
            x_min: -5.0,
            x_max: 5.0,
            h: 0.1,
        };
        assert!(sample_potential(&s, &g).is_err());
    }

    #[test]
    fn tabulated_grid_mismatch_is_resampling_error() {
        let xs: Vec<f64> = (0..=400).map(|i| -20.0 + 0.1 * i as f64).collect();
        let base = PotentialSpec::tanh_step(1.0, 1.0);
        let qs = xs.iter().map(|&x| base.q(x)).collect();
        let s = PotentialSpec::new(Family::Tabulated { x: xs, q: qs }, 1.0, 4, 7).unwrap();
        let g = GridSpec {
            x_min: -20.0,
            x_max: 20.0,
            h: 0.15,
        };
        assert!(matches!(sample_potential(&s, &g), Err(Error::Resample(_))));
    }

    #[test]
    fn moments_of_tanh_step_are_finite() {
        let s = PotentialSpec::tanh_step(1.0, 1.0);
        let samples = sample_potential(&s, &GridSpec::covering(&s, 5.0, 0.05)).unwrap();
        assert!(samples.tails_decay(TAIL_TOL));
        let rep = moment_diagnostics(&samples, 4);
        assert!(rep.satisfies_class, "{:?}", rep);
    }

    #[test]
    fn narrow_well_moments_are_finite() {
        let s = PotentialSpec::tanh_step_plus_wells(
            1.0,
            1.0,
            vec![Well {
                depth: 4.76,
                center: 10.0,
                width: 0.5,
            }],
        );
        let samples = sample_potential(&s, &GridSpec::covering(&s, 10.0, 0.01)).unwrap();
        let rep = moment_diagnostics(&samples, 4);
        assert!(rep.satisfies_class, "{:?}", rep);
        // seventh derivative far out still decays like e^{-2|x|}
        let ratio = s.derivative(-30.0, 7) / s.derivative(-29.0, 7);
        assert!((ratio - (-2.0f64).exp()).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn sharp_step_derivative_moment_diverges() {
        let s = PotentialSpec::sharp_step(1.0);
        let samples = sample_potential(&s, &GridSpec::covering(&s, 5.0, 0.05)).unwrap();
        let rep = moment_diagnostics(&samples, 4);
        assert_eq!(rep.entries[0].verdict, Verdict::Finite);
        assert_eq!(rep.entries[1].verdict, Verdict::Divergent);
    }

    #[test]
    fn moments_inconclusive_without_tail_coverage() {
        let s = PotentialSpec::tanh_step(1.0, 1.0);
        let g = GridSpec {
            x_min: s.radii.0,
            x_max: s.radii.1,
            h: 0.05,
        };
        let samples = sample_potential(&s, &g).unwrap();
        let rep = moment_diagnostics(&samples, 4);
        assert!(rep.entries.iter().all(|e| e.verdict == Verdict::Inconclusive));
    }

    #[test]
    fn tabulated_compact_perturbation_is_finite() {
        let base = PotentialSpec::tanh_step(1.0, 1.0);
        let xs: Vec<f64> = (0..=800).map(|i| -40.0 + 0.1 * i as f64).collect();
        let qs = xs
            .iter()
            .map(|&x| {
                let bump = if x.abs() < 1.0 {
                    -0.3 * (1.0 - x * x).powi(8)
                } else {
                    0.0
                };
                base.q(x) + bump
            })
            .collect();
        let s = PotentialSpec::new(Family::Tabulated { x: xs, q: qs }, 1.0, 6, 7).unwrap();
        let g = GridSpec {
            x_min: -45.0,
            x_max: 45.0,
            h: 0.1,
        };
        let samples = sample_potential(&s, &g).unwrap();
        let rep = moment_diagnostics(&samples, 6);
        assert!(rep.satisfies_class, "{:?}", rep.entries);
    }
}
