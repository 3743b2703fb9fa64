//! Splitting of the reflection coefficient into rational, analytic and
//! small remainder parts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{geomspace, loglog, PowerFit};
use crate::scattering::ScatteringData;

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };

pub const COND_LIMIT: f64 = 1e12;
pub const SLOPE_MARGIN: f64 = 0.3;

/// `τ = (c + κ₁)/2`.
pub fn default_tau(data: &ScatteringData) -> Result<f64> {
    match data.kappas.first() {
        Some(&k1) => Ok(0.5 * (data.c + k1)),
        None => Err(Error::Config(
            "τ needs at least one eigenvalue; set it explicitly".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaylorReport {
    pub jets: Vec<[f64; 2]>,
    /// Difference between the two finest Richardson levels, per order.
    pub error_estimate: Vec<f64>,
    /// `|Im R(+0)|`; must vanish because `χ(0) = 0`.
    pub im_r0: f64,
}

/// `R^{(l)}(+0)`, `l < m0`, from forward differences at steps
/// `h0, h0/2, h0/4, h0/8` combined by Richardson extrapolation.
pub fn taylor_at_zero<F>(r: F, h0: f64, m0: usize) -> Result<TaylorReport>
where
    F: Fn(f64) -> Result<C> + Sync,
{
    const LEVELS: usize = 4;
    let finest = h0 / (1 << (LEVELS - 1)) as f64;
    let last = (m0.max(1) - 1) << (LEVELS - 1);
    let ks: Vec<f64> = (0..=last).map(|i| i as f64 * finest).collect();
    let vals = ks.par_iter().map(|&k| r(k)).collect::<Result<Vec<C>>>()?;

    let mut jets = Vec::with_capacity(m0);
    let mut error_estimate = Vec::with_capacity(m0);
    for l in 0..m0 {
        // table[level] = Δ^l R(0)/h^l with h = h0/2^level
        let mut table: Vec<C> = (0..LEVELS)
            .map(|level| {
                let stride = 1usize << (LEVELS - 1 - level);
                let h = finest * stride as f64;
                let mut acc = C::new(0.0, 0.0);
                let mut binom = 1.0;
                for j in 0..=l {
                    let sign = if (l - j) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += vals[j * stride] * (sign * binom);
                    binom = binom * (l - j) as f64 / (j + 1) as f64;
                }
                acc / h.powi(l as i32)
            })
            .collect();
        let mut prev_best = table[LEVELS - 1];
        for order in 1..LEVELS {
            let f = (1u64 << order) as f64;
            for level in (order..LEVELS).rev() {
                table[level] = (table[level] * f - table[level - 1]) / (f - 1.0);
            }
            if order == LEVELS - 2 {
                prev_best = table[LEVELS - 1];
            }
        }
        jets.push(table[LEVELS - 1]);
        error_estimate.push((table[LEVELS - 1] - prev_best).norm());
    }
    let im_r0 = jets.first().map_or(0.0, |j| j.im.abs());
    if im_r0 > 1e-6 * jets[0].norm().max(1.0) {
        return Err(Error::DataQuality(format!(
            "Im R(+0) = {im_r0:e} but χ(0) = 0 forces a real value"
        )));
    }
    Ok(TaylorReport {
        jets: jets.iter().map(|z| [z.re, z.im]).collect(),
        error_estimate,
        im_r0,
    })
}

/// `q(k) = Σ a_s/(k - iτ)^s`, `s = n0+1..n0+m0`, and its mirror partner
/// `p(k) = conj q(-k̄)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalPair {
    pub tau: f64,
    pub n0: u32,
    pub m0: u32,
    /// `a_s` for `s = n0+1, …, n0+m0`.
    #[serde(serialize_with = "ser_complex_vec")]
    pub a: Vec<C>,
    pub cond: f64,
    /// Largest relative mismatch between the re-evaluated jets and the input.
    pub roundtrip_error: f64,
    /// Largest part of `a_s` violating `a_s = (-1)^s conj(a_s)` (relative to
    /// `max |a_s|`); diagnostic only.
    pub parity_deviation: f64,
}

fn ser_complex_vec<S: serde::Serializer>(v: &[C], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[crate::io::F17(z.re), crate::io::F17(z.im)])?;
    }
    seq.end()
}

/// `s(s+1)⋯(s+l-1)`.
fn rising(s: u32, l: usize) -> f64 {
    (0..l).map(|i| (s as usize + i) as f64).product()
}

impl RationalPair {
    pub fn zero(tau: f64, n0: u32, m0: u32) -> Self {
        Self {
            tau,
            n0,
            m0,
            a: vec![C::new(0.0, 0.0); m0 as usize],
            cond: 1.0,
            roundtrip_error: 0.0,
            parity_deviation: 0.0,
        }
    }

    fn powers(&self) -> impl Iterator<Item = (u32, C)> + '_ {
        self.a
            .iter()
            .enumerate()
            .map(move |(i, &a)| (self.n0 + 1 + i as u32, a))
    }

    /// `q^{(l)}(k)`.
    pub fn q_deriv(&self, k: C, l: usize) -> C {
        let z = k - I * self.tau;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        self.powers()
            .map(|(s, a)| a * (sign * rising(s, l)) * z.powi(-(s as i32) - l as i32))
            .sum()
    }

    pub fn q(&self, k: C) -> C {
        self.q_deriv(k, 0)
    }

    /// `p^{(l)}(k)`; `p` has coefficients `(-1)^s conj(a_s)` at the same pole.
    pub fn p_deriv(&self, k: C, l: usize) -> C {
        let z = k - I * self.tau;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        self.powers()
            .map(|(s, a)| {
                let b = if s % 2 == 0 { a.conj() } else { -a.conj() };
                b * (sign * rising(s, l)) * z.powi(-(s as i32) - l as i32)
            })
            .sum()
    }

    pub fn p(&self, k: C) -> C {
        self.p_deriv(k, 0)
    }
}

/// Solve for `a_s` so that `q^{(l)}(0) = R^{(l)}(+0)`, `l < m0`.
pub fn rational_approximants(jets: &[C], tau: f64, n0: u32, m0: u32) -> Result<RationalPair> {
    let m = m0 as usize;
    if jets.len() < m {
        return Err(Error::Contract(format!(
            "{} jets supplied, {m} needed",
            jets.len()
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("τ must be positive, got {tau}")));
    }
    if jets[..m].iter().all(|j| j.norm() == 0.0) {
        return Ok(RationalPair::zero(tau, n0, m0));
    }
    // columns scaled by τ^s so that entries are O(1)
    let z0 = -I * tau;
    let mat = DMatrix::from_fn(m, m, |l, i| {
        let s = n0 + 1 + i as u32;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        (sign * rising(s, l)) * z0.powi(-(s as i32) - l as i32) * tau.powi(s as i32)
    });
    let sv = mat.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < COND_LIMIT) {
        return Err(Error::IllConditioned { cond });
    }
    let rhs = DVector::from_iterator(m, jets[..m].iter().copied());
    let sol = mat
        .lu()
        .solve(&rhs)
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let a: Vec<C> = (0..m)
        .map(|i| sol[i] * tau.powi((n0 + 1 + i as u32) as i32))
        .collect();

    let mut pair = RationalPair {
        tau,
        n0,
        m0,
        a,
        cond,
        roundtrip_error: 0.0,
        parity_deviation: 0.0,
    };
    let zero = C::new(0.0, 0.0);
    pair.roundtrip_error = (0..m)
        .map(|l| (pair.q_deriv(zero, l) - jets[l]).norm() / jets[l].norm().max(1e-300))
        .filter(|e| e.is_finite())
        .fold(0.0, crate::fit::nan_max);
    let scale = pair.a.iter().map(|z| z.norm()).fold(0.0, crate::fit::nan_max);
    pair.parity_deviation = pair
        .powers()
        .map(|(s, a)| if s % 2 == 0 { a.im.abs() } else { a.re.abs() })
        .fold(0.0, crate::fit::nan_max)
        / scale.max(1e-300);
    Ok(pair)
}

#[derive(Debug, Clone, Serialize)]
pub struct FReport {
    pub h: Vec<f64>,
    /// `Im f(ih)` and `Re f(ih)`.
    pub f: Vec<[f64; 2]>,
    pub fit: PowerFit,
    pub required: f64,
    pub pass: bool,
}

impl FReport {
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::SplittingQuality {
                slope: self.fit.slope,
                required: self.required,
            })
        }
    }
}

/// `f(ih) = χ(ih) + p(ih) - q(ih)` on the `χ` table restricted to
/// `(0, c/2]`, with the exponent fitted on `[1e-3c, 1e-1c]`.
pub fn residual_f(chi: &[(f64, f64)], pair: &RationalPair, c: f64) -> FReport {
    let mut h = Vec::new();
    let mut f = Vec::new();
    for &(hh, im) in chi {
        if hh > 0.0 && hh <= 0.5 * c {
            let k = C::new(0.0, hh);
            let v = C::new(0.0, im) + pair.p(k) - pair.q(k);
            h.push(hh);
            f.push(v);
        }
    }
    let (fh, fv): (Vec<f64>, Vec<f64>) = h
        .iter()
        .zip(&f)
        .filter(|(hh, _)| **hh >= 1e-3 * c * (1.0 - 1e-12) && **hh <= 1e-1 * c * (1.0 + 1e-12))
        .map(|(hh, v)| (*hh, v.norm()))
        .unzip();
    let fit = loglog(&fh, &fv);
    let required = pair.m0 as f64 - 1.0 - SLOPE_MARGIN;
    FReport {
        h,
        f: f.iter().map(|z| [z.re, z.im]).collect(),
        fit,
        required,
        pass: fit.slope >= required,
    }
}

/// Settings for `𝒢` and its Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub tau: f64,
    /// `|𝒢|` threshold at the edges of the `k` window.
    pub edge_tol: f64,
    /// Largest admissible FFT length.
    pub max_points: usize,
    /// Spacing of the resampled `Ĝ` used for complex `k`.
    pub dx_quad: f64,
}

impl SplitConfig {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            edge_tol: 1e-12,
            max_points: 1 << 23,
            dx_quad: 0.005,
        }
    }
}

/// `𝒢` on the FFT grid and its transform `Ĝ`.
#[derive(Debug, Clone)]
pub struct GHat {
    pub c: f64,
    pub tau: f64,
    pub pair: RationalPair,
    pub dk: f64,
    /// FFT length; `k_n = n·dk`, `x_m = m·dx` for `n, m ∈ [-N/2, N/2)`.
    pub n: usize,
    pub dx: f64,
    /// `𝒢(k_n)` in natural order `n = -N/2..N/2`.
    pub g: Vec<C>,
    /// `Ĝ(x_m)` in natural order (real part; see `im_residue`).
    pub ghat: Vec<f64>,
    pub im_residue: f64,
    pub edge: f64,
    /// Largest `|𝒢(k) - conj 𝒢(-k)|` on mirrored grid points.
    pub mirror_residue: f64,
    /// `Ĝ` resampled at spacing about `dx_quad` on `[-x_quad, x_quad]`.
    quad: Arc<Vec<f64>>,
    quad_dx: f64,
    quad_x0: f64,
}

/// `𝓡(k)` from tabulated `R` (zero past the table) and the rational pair.
pub fn remainder(data: &ScatteringData, pair: &RationalPair, k: f64, table: Option<C>) -> C {
    let r = table.unwrap_or_else(|| data.reflection(k));
    if k >= 0.0 {
        r - pair.q(C::new(k, 0.0))
    } else {
        r - pair.p(C::new(k, 0.0))
    }
}

fn weight(k: f64, tau: f64) -> C {
    let z = C::new(k, -tau);
    z.powi(6) / (k * k)
}

/// Build `𝒢 = (k - iτ)⁶/k² 𝓡` on a grid with the table spacing and take its
/// transform `Ĝ(x) = (1/2π)∫𝒢(k)e^{-ikx}dk`.
pub fn calg_and_fourier(data: &ScatteringData, pair: &RationalPair, cfg: &SplitConfig) -> Result<GHat> {
    let dk = data.dk();
    if !(dk > 0.0) {
        return Err(Error::Contract("reflection table needs at least two points".into()));
    }
    let tau = cfg.tau;
    let tail = |k: f64| -> C {
        let z = C::new(k, 0.0);
        -(if k >= 0.0 { pair.q(z) } else { pair.p(z) }) * weight(k, tau)
    };
    // k window: past the table 𝒢 is the rational tail; grow until it is small
    let table_max = data.r.last().map_or(0.0, |s| s.k);
    let mut half = ((table_max / dk).ceil() as usize + 1).next_power_of_two();
    loop {
        let k_edge = half as f64 * dk;
        let edge = tail(k_edge).norm().max(tail(-k_edge).norm());
        if edge < cfg.edge_tol && k_edge > table_max {
            break;
        }
        if 2 * half * 2 > cfg.max_points {
            return Err(Error::WindowTooSmall { edge });
        }
        half *= 2;
    }
    let n = 2 * half;
    let ks: Vec<f64> = (0..n).map(|i| (i as f64 - half as f64) * dk).collect();
    let g: Vec<C> = ks
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let idx = i as i64 - half as i64;
            if idx == 0 {
                return C::new(0.0, 0.0);
            }
            let j = idx.unsigned_abs() as usize;
            if j < data.r.len() {
                let r = if idx > 0 { data.r[j].r } else { data.r[j].r.conj() };
                remainder(data, pair, k, Some(r)) * weight(k, tau)
            } else {
                tail(k)
            }
        })
        .collect();
    let edge = g[0].norm().max(g[n - 1].norm());
    let mirror_residue = (1..half)
        .map(|j| (g[half + j] - g[half - j].conj()).norm())
        .fold(0.0, crate::fit::nan_max);

    // Ĝ_m = dk/2π Σ_n 𝒢_n e^{-2πi nm/N}: shift to FFT order, transform, shift back
    let mut buf: Vec<C> = (0..n).map(|i| g[(i + half) % n]).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = dk / (2.0 * std::f64::consts::PI);
    let natural: Vec<C> = (0..n).map(|i| buf[(i + half) % n] * scale).collect();
    let gmax = natural.iter().map(|z| z.re.abs()).fold(0.0, crate::fit::nan_max);
    let im_residue = natural.iter().map(|z| z.im.abs()).fold(0.0, crate::fit::nan_max) / gmax.max(1e-300);
    let ghat: Vec<f64> = natural.iter().map(|z| z.re).collect();
    let dx = 2.0 * std::f64::consts::PI / (n as f64 * dk);

    // resampled copy for complex k, up to a quarter period
    let stride = ((cfg.dx_quad / dx).floor() as usize).max(1);
    let quad_dx = stride as f64 * dx;
    let reach = half / 2 / stride * stride;
    let quad: Vec<f64> = (half - reach..=half + reach)
        .step_by(stride)
        .map(|m| ghat[m])
        .collect();
    Ok(GHat {
        c: data.c,
        tau,
        pair: pair.clone(),
        dk,
        n,
        dx,
        g,
        ghat,
        im_residue,
        edge,
        mirror_residue,
        quad: Arc::new(quad),
        quad_dx,
        quad_x0: -(reach as f64) * dx,
    })
}

/// `∫_0^1 e^{iθs} ds` and `∫_0^1 s e^{iθs} ds`.
fn filon(theta: C) -> (C, C) {
    if theta.norm() < 1e-3 {
        let t = theta;
        let a = 1.0 + I * t / 2.0 - t * t / 6.0 - I * t * t * t / 24.0;
        let b = 0.5 + I * t / 3.0 - t * t / 8.0 - I * t * t * t / 30.0;
        (a, b)
    } else {
        let e = (I * theta).exp();
        let a = (e - 1.0) / (I * theta);
        let b = e / (I * theta) + (e - 1.0) / (theta * theta);
        (a, b)
    }
}

fn cubic_at(v: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let s = (x - x0) / dx;
    let n = v.len();
    let i = (s.floor() as isize).clamp(1, n as isize - 3) as usize;
    let u = s - i as f64;
    let w = [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ];
    v[i - 1] * w[0] + v[i] * w[1] + v[i + 1] * w[2] + v[i + 2] * w[3]
}

/// Sum of Ĝ-derived values and `R_a`/`R_r` on the real FFT grid at one `t`.
#[derive(Debug, Clone)]
pub struct RealSplit {
    pub t: f64,
    /// `k_n ≥ 0` up to the reflection table end.
    pub k: Vec<f64>,
    pub ra: Vec<C>,
    pub rr: Vec<C>,
    /// `R_r` at `-k_n` (for the conjugation check).
    pub rr_neg: Vec<C>,
    pub ra_neg: Vec<C>,
    /// `max |𝓡 - R_a - R_r|`.
    pub identity_residual: f64,
}

impl GHat {
    /// Half-width of the `x` range covered by `Ĝ`.
    pub fn x_extent(&self) -> f64 {
        self.dx * (self.n / 2) as f64
    }

    fn check_window(&self, t: f64) -> Result<f64> {
        let l = self.c * self.c * t;
        let available = -self.quad_x0;
        if l > available {
            return Err(Error::Regrid {
                needed: l,
                available,
            });
        }
        Ok(l)
    }

    /// `∫_{-L}^{L} Ĝ(x) e^{ikx} dx` for complex `k`, Filon rule on a uniform
    /// grid resampled from `Ĝ`.
    pub fn window_integral(&self, k: C, l: f64) -> C {
        if l <= 0.0 {
            return C::new(0.0, 0.0);
        }
        let m = ((2.0 * l / self.quad_dx).ceil() as usize).max(2);
        let h = 2.0 * l / m as f64;
        let theta = k * h;
        let (a, b) = filon(theta);
        let step = (I * theta).exp();
        let mut e = (-I * k * l).exp();
        let mut acc = C::new(0.0, 0.0);
        let mut g_prev = cubic_at(&self.quad, self.quad_x0, self.quad_dx, -l);
        for j in 1..=m {
            let x = -l + j as f64 * h;
            let g = cubic_at(&self.quad, self.quad_x0, self.quad_dx, x);
            acc += e * (g_prev * (a - b) + g * b);
            e *= step;
            g_prev = g;
        }
        acc * h
    }

    /// `𝒢(k)` for real `k` by cubic interpolation on the transform grid.
    pub fn calg_at(&self, k: f64) -> C {
        let half = (self.n / 2) as f64;
        let s = k / self.dk + half;
        let i = (s.floor() as isize).clamp(1, self.n as isize - 3) as usize;
        let u = s - i as f64;
        let w = [
            -u * (u - 1.0) * (u - 2.0) / 6.0,
            (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
            -(u + 1.0) * u * (u - 2.0) / 2.0,
            (u + 1.0) * u * (u - 1.0) / 6.0,
        ];
        self.g[i - 1] * w[0] + self.g[i] * w[1] + self.g[i + 1] * w[2] + self.g[i + 2] * w[3]
    }

    /// `R_r(k, t)` at a real `k`, as `k²/(k-iτ)⁶` times the part of the
    /// Fourier integral outside `[-c²t, c²t]`.
    pub fn rr_at(&self, k: f64, t: f64) -> Result<C> {
        let l = self.check_window(t)?;
        let outside = self.calg_at(k) - self.window_integral(C::new(k, 0.0), l);
        Ok(k * k / C::new(k, -self.tau).powi(6) * outside)
    }

    /// `R_a(k, t)` for `0 ≤ |Im k| ≤ c/2`.
    pub fn ra(&self, k: C, t: f64) -> Result<C> {
        let l = self.check_window(t)?;
        let z = k - I * self.tau;
        Ok(k * k / z.powi(6) * self.window_integral(k, l))
    }

    /// `R_a` and `R_r` on the real grid `k_n`, `|k_n| ≤ k_max`, via one
    /// inverse transform of the masked `Ĝ`. The window edge gets a
    /// fractional weight so the two parts add up to `𝓡` exactly.
    pub fn real_split(&self, t: f64, k_max: f64) -> Result<RealSplit> {
        let l = self.check_window(t)?;
        let n = self.n;
        let half = n / 2;
        let mut inner = vec![C::new(0.0, 0.0); n];
        let mut outer = vec![C::new(0.0, 0.0); n];
        for (i, &g) in self.ghat.iter().enumerate() {
            let x = (i as f64 - half as f64) * self.dx;
            let w = ((l - x.abs()) / self.dx + 0.5).clamp(0.0, 1.0);
            let pos = (i + half) % n;
            inner[pos] = C::new(g * w * self.dx, 0.0);
            outer[pos] = C::new(g * (1.0 - w) * self.dx, 0.0);
        }
        let plan = FftPlanner::new().plan_fft_inverse(n);
        plan.process(&mut inner);
        plan.process(&mut outer);
        let count = ((k_max / self.dk).floor() as usize).min(half - 1);
        let mut out = RealSplit {
            t,
            k: Vec::with_capacity(count),
            ra: Vec::with_capacity(count),
            rr: Vec::with_capacity(count),
            rr_neg: Vec::with_capacity(count),
            ra_neg: Vec::with_capacity(count),
            identity_residual: 0.0,
        };
        for j in 1..=count {
            let k = j as f64 * self.dk;
            let f = |kk: f64| kk * kk / C::new(kk, -self.tau).powi(6);
            out.k.push(k);
            out.ra.push(inner[j] * f(k));
            out.rr.push(outer[j] * f(k));
            out.ra_neg.push(inner[n - j] * f(-k));
            out.rr_neg.push(outer[n - j] * f(-k));
            let calr = self.g[half + j] / weight(k, self.tau);
            let res = (calr - out.ra[j - 1] - out.rr[j - 1]).norm();
            out.identity_residual = out.identity_residual.max(res);
        }
        Ok(out)
    }

    /// `∫|x|^{p}|Ĝ|` on the available window and a power-law tail estimate
    /// from the outer quarter.
    pub fn weighted_l1(&self, p: f64) -> (f64, f64) {
        let half = self.n / 2;
        let reach = half / 2;
        let mut total = 0.0;
        for i in half - reach..=half + reach {
            let x = (i as f64 - half as f64) * self.dx;
            total += x.abs().powf(p) * self.ghat[i].abs() * self.dx;
        }
        // fit |Ĝ| ~ |x|^{-a} on the outer part of the kept window
        let xs: Vec<f64> = (reach / 2..reach).step_by((reach / 64).max(1)).map(|m| m as f64 * self.dx).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let m = (x / self.dx).round() as usize;
                self.ghat[half + m].abs().max(self.ghat[half - m].abs())
            })
            .collect();
        let fit = loglog(&xs, &ys);
        let x_end = reach as f64 * self.dx;
        let decay = -fit.slope - p;
        let tail = if decay > 1.0 {
            2.0 * fit.intercept.exp() * x_end.powf(1.0 - decay) / (decay - 1.0)
        } else {
            f64::INFINITY
        };
        (total, tail)
    }
}

/// Decay and symmetry of the split over a sweep of times.
#[derive(Debug, Clone, Serialize)]
pub struct SplitSweepReport {
    pub times: Vec<f64>,
    /// `max_k |R_r(k,t)|(k⁶+1)/k²`.
    pub rr_weighted_sup: Vec<f64>,
    pub rr_fit: PowerFit,
    pub expected_exponent: f64,
    pub rr_pass: bool,
    /// `max |R_a(k,t)|(|k|⁶+1)/|k|² e^{-c²|Im k|t}` on strip probes.
    pub ra_constant: Vec<f64>,
    /// Largest relative Cauchy–Riemann residual of `R_a` in the strip.
    pub cauchy_riemann: f64,
    /// Largest `|R_a(-k) - conj R_a(k)|` and the same for `R_r`.
    pub conjugation: f64,
    pub identity_residual: f64,
    pub symmetry_pass: bool,
}

/// Strip probe points used for the analyticity and growth checks.
pub fn strip_probes(c: f64) -> Vec<C> {
    let mut out = Vec::new();
    for &re in &[-3.0, -1.2, -0.4, 0.3, 0.9, 2.5] {
        for &fr in &[0.1, 0.25, 0.4] {
            out.push(C::new(re, fr * c));
        }
    }
    out
}

pub fn split_sweep(ghat: &GHat, times: &[f64], k_max: f64, m0: u32) -> Result<SplitSweepReport> {
    let c = ghat.c;
    let probes = strip_probes(c);
    let rows = times
        .par_iter()
        .map(|&t| {
            let rs = ghat.real_split(t, k_max)?;
            let sup = rs
                .k
                .iter()
                .zip(&rs.rr)
                .map(|(k, r)| r.norm() * (k.powi(6) + 1.0) / (k * k))
                .fold(0.0, crate::fit::nan_max);
            let mut conj = 0.0f64;
            for i in 0..rs.k.len() {
                conj = conj
                    .max((rs.ra_neg[i] - rs.ra[i].conj()).norm())
                    .max((rs.rr_neg[i] - rs.rr[i].conj()).norm());
            }
            let mut cmax = 0.0f64;
            let mut cr = 0.0f64;
            let eta = 1e-5;
            for &k in &probes {
                let v = ghat.ra(k, t)?;
                let kn = k.norm();
                cmax = cmax.max(v.norm() * (kn.powi(6) + 1.0) / (kn * kn) * (-c * c * k.im.abs() * t).exp());
                let dxp = ghat.ra(k + eta, t)?;
                let dxm = ghat.ra(k - eta, t)?;
                let dyp = ghat.ra(k + I * eta, t)?;
                let dym = ghat.ra(k - I * eta, t)?;
                let ddx = (dxp - dxm) / (2.0 * eta);
                let ddy = (dyp - dym) / (2.0 * eta);
                let res = (ddx + I * ddy).norm() / ddx.norm().max(1e-300);
                cr = cr.max(res);
            }
            Ok((sup, cmax, cr, conj, rs.identity_residual))
        })
        .collect::<Result<Vec<_>>>()?;
    let rr_weighted_sup: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rr_fit = loglog(times, &rr_weighted_sup);
    let expected_exponent = -(m0 as f64 - 3.0);
    let cauchy_riemann = rows.iter().map(|r| r.2).fold(0.0, crate::fit::nan_max);
    let conjugation = rows.iter().map(|r| r.3).fold(0.0, crate::fit::nan_max);
    Ok(SplitSweepReport {
        times: times.to_vec(),
        rr_pass: (rr_fit.slope - expected_exponent).abs() <= 0.5,
        rr_weighted_sup,
        rr_fit,
        expected_exponent,
        ra_constant: rows.iter().map(|r| r.1).collect(),
        cauchy_riemann,
        conjugation,
        identity_residual: rows.iter().map(|r| r.4).fold(0.0, crate::fit::nan_max),
        symmetry_pass: cauchy_riemann < 1e-6 && conjugation < 1e-6,
    })
}

/// Everything the jump matrices need from the splitting.
#[derive(Debug, Clone)]
pub struct SplitReflection {
    pub pair: RationalPair,
    pub f: FReport,
    pub ghat: GHat,
}

pub fn build_split(data: &ScatteringData, tau: f64) -> Result<SplitReflection> {
    let pair = rational_approximants(&data.jets, tau, data.n0, data.m0)?;
    let f = residual_f(&data.chi, &pair, data.c);
    let ghat = calg_and_fourier(data, &pair, &SplitConfig::new(tau))?;
    Ok(SplitReflection { pair, f, ghat })
}

/// Sample points for the `f` fit.
pub fn f_fit_points(c: f64, n: usize) -> Vec<f64> {
    geomspace(1e-3 * c, 1e-1 * c, n)
}
