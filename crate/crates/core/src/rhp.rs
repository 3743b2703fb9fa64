//! Vector Riemann–Hilbert problem: phase, Blaschke factors, pole matrices,
//! the vector `m` built from Jost solutions, the jump matrices `v` and `v̂`
//! and their decay in time.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{geomspace, loglog, PowerFit};
use crate::reflsplit::SplitReflection;
use crate::scattering::jost::{chi_with, wronskian_normalized, JostSolver};
use crate::scattering::{ScatteringData, SpectralParameter};

type C = Complex64;
pub type Mat = Matrix2<C>;

const I: C = C { re: 0.0, im: 1.0 };
const ONE: C = C { re: 1.0, im: 0.0 };
const ZERO: C = C { re: 0.0, im: 0.0 };

pub const JUMP_TOL: f64 = 1e-5;
pub const SLOPE_MARGIN: f64 = 0.3;

/// `Φ(k) = 4ik³ + ikx/t`.
pub fn phase(k: C, x: f64, t: f64) -> C {
    debug_assert!(t > 0.0);
    I * 4.0 * k * k * k + I * k * (x / t)
}

/// `tΦ(k) = 4ik³t + ikx`, also meaningful at `t = 0`.
pub fn t_phase(k: C, x: f64, t: f64) -> C {
    I * 4.0 * k * k * k * t + I * k * x
}

/// A complex number stored as `mantissa·e^{log_mag}` with `|mantissa| = 1`
/// (or `0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaled {
    #[serde(serialize_with = "ser_c")]
    pub mantissa: C,
    pub log_mag: f64,
}

fn ser_c<S: serde::Serializer>(z: &C, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl Scaled {
    pub fn exp(z: C) -> Self {
        Self {
            mantissa: C::from_polar(1.0, z.im),
            log_mag: z.re,
        }
    }

    pub fn from_c(z: C) -> Self {
        if z.norm() == 0.0 {
            return Self {
                mantissa: ZERO,
                log_mag: 0.0,
            };
        }
        Self {
            mantissa: z / z.norm(),
            log_mag: z.norm().ln(),
        }
    }

    pub fn mul(self, o: Scaled) -> Self {
        Self {
            mantissa: self.mantissa * o.mantissa,
            log_mag: self.log_mag + o.log_mag,
        }
    }

    pub fn inv(self) -> Self {
        Self {
            mantissa: self.mantissa.inv(),
            log_mag: -self.log_mag,
        }
    }

    pub fn value(self) -> C {
        if self.mantissa == ZERO {
            return ZERO;
        }
        self.mantissa * self.log_mag.exp()
    }
}

fn pole_hit(k: C, kappa: f64) -> bool {
    (k - I * kappa).norm() <= 1e-14 * kappa.max(1.0)
}

/// `P_j(k) = Π_{l=j}^{N} (k + iκ_l)/(k - iκ_l)` with 1-based `j`;
/// `P_{N+1} = 1`.
pub fn blaschke(kappas: &[f64], j: usize, k: C) -> Result<C> {
    if j == 0 || j > kappas.len() + 1 {
        return Err(Error::Contract(format!(
            "Blaschke index {j} outside 1..={}",
            kappas.len() + 1
        )));
    }
    let mut p = ONE;
    for &kappa in &kappas[j - 1..] {
        if pole_hit(k, kappa) {
            return Err(Error::Pole(format!("P_{j} has a pole at k = i{kappa}")));
        }
        p *= (k + I * kappa) / (k - I * kappa);
    }
    Ok(p)
}

/// Off-diagonal entries of `A_l` (lower) and `B_l` (upper).
#[derive(Debug, Clone, Copy)]
pub struct PoleMatrices {
    pub a21: Scaled,
    pub b12: Scaled,
}

impl PoleMatrices {
    pub fn a(&self) -> Mat {
        Mat::new(ONE, ZERO, self.a21.value(), ONE)
    }

    pub fn b(&self) -> Mat {
        Mat::new(ONE, self.b12.value(), ZERO, ONE)
    }
}

/// `A = [[1, 0], [-iγ²e^{2tΦ(iκ)}/(k - iκ), 1]]`,
/// `B = [[1, -(k - iκ)/(iγ²e^{2tΦ(iκ)})], [0, 1]]`.
pub fn pole_matrices(k: C, x: f64, t: f64, kappa: f64, gamma2: f64) -> Result<PoleMatrices> {
    if !(gamma2 > 0.0) {
        return Err(Error::Domain(format!("norming constant must be positive, got {gamma2}")));
    }
    if pole_hit(k, kappa) {
        return Err(Error::Pole(format!("A has a pole at k = i{kappa}")));
    }
    let tphi = 4.0 * kappa.powi(3) * t - kappa * x;
    let weight = Scaled {
        mantissa: I,
        log_mag: gamma2.ln() + 2.0 * tphi,
    };
    let d = Scaled::from_c(k - I * kappa);
    let a21 = Scaled {
        mantissa: -weight.mantissa,
        log_mag: weight.log_mag,
    }
    .mul(d.inv());
    Ok(PoleMatrices {
        a21,
        b12: b_entry(k, x, t, kappa, gamma2),
    })
}

/// Upper entry of `B`, regular at `k = iκ` where it vanishes.
pub fn b_entry(k: C, x: f64, t: f64, kappa: f64, gamma2: f64) -> Scaled {
    let tphi = 4.0 * kappa.powi(3) * t - kappa * x;
    let d = Scaled::from_c(k - I * kappa);
    Scaled {
        mantissa: I * d.mantissa,
        log_mag: d.log_mag - gamma2.ln() - 2.0 * tphi,
    }
}

pub fn sigma1_conj(m: &Mat) -> Mat {
    Mat::new(m[(1, 1)], m[(1, 0)], m[(0, 1)], m[(0, 0)])
}

/// Circle radius: a third of the smallest gap between `c` and the `κ_l`.
pub fn circle_radius(c: f64, kappas: &[f64]) -> f64 {
    let mut gap = kappas.first().map_or(f64::INFINITY, |k| k - c);
    for w in kappas.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    gap / 3.0
}

/// Pieces of `Σ̂` in the closed upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Piece {
    /// `ℝ₊`.
    Real,
    /// `[ic, ic/2]`.
    CutUpper,
    /// `[ic/2, 0]`.
    CutLower,
    /// `𝕋_l`, 1-based.
    Circle(usize),
    /// `𝒞 = {Im k = c/2}`.
    Strip,
}

/// A point on a contour piece; `mirrored` selects the reflected piece
/// `Σ*`, in which case `k` is the actual point (in the lower half plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpPoint {
    pub piece: Piece,
    pub k: C,
    pub mirrored: bool,
}

impl JumpPoint {
    pub fn new(piece: Piece, k: C) -> Self {
        Self {
            piece,
            k,
            mirrored: false,
        }
    }

    pub fn mirror(self) -> Self {
        Self {
            piece: self.piece,
            k: -self.k,
            mirrored: !self.mirrored,
        }
    }
}

/// Discretization of the upper pieces of `Σ̂`.
#[derive(Debug, Clone, Serialize)]
pub struct ContourSet {
    pub c: f64,
    pub kappas: Vec<f64>,
    pub delta: f64,
    pub real: Vec<f64>,
    /// `h` values on `[ic, ic/2]` (clustered at `c`).
    pub cut_upper: Vec<f64>,
    /// `h` values on `[ic/2, 0]` (clustered at `0`).
    pub cut_lower: Vec<f64>,
    /// `Re k` values on `𝒞`.
    pub strip: Vec<f64>,
    pub circle_points: usize,
}

impl ContourSet {
    pub fn new(c: f64, kappas: &[f64], k_max: f64) -> Self {
        // 512 per unit on (0, 1], geometric beyond
        let mut real: Vec<f64> = (1..=512).map(|i| i as f64 / 512.0).collect();
        if k_max > 1.0 {
            let n = ((k_max.ln() / 0.02).ceil() as usize).max(2);
            real.extend(geomspace(1.0, k_max, n).into_iter().skip(1));
        }
        let (cut_upper, cut_lower) = if c > 0.0 {
            let mut up: Vec<f64> = geomspace(1e-6 * c, 0.5 * c, 240)
                .into_iter()
                .map(|d| c - d)
                .collect();
            up.reverse();
            (up, geomspace(1e-5 * c, 0.5 * c, 240))
        } else {
            (Vec::new(), Vec::new())
        };
        let side = geomspace(1e-3, 6.0, 200);
        let mut strip: Vec<f64> = side.iter().rev().map(|y| -y).collect();
        strip.push(0.0);
        strip.extend(side);
        Self {
            c,
            kappas: kappas.to_vec(),
            delta: circle_radius(c, kappas),
            real,
            cut_upper,
            cut_lower,
            strip: if c > 0.0 { strip } else { Vec::new() },
            circle_points: 256,
        }
    }

    pub fn circle(&self, l: usize) -> Vec<C> {
        let centre = I * self.kappas[l - 1];
        (0..self.circle_points)
            .map(|i| {
                centre
                    + C::from_polar(
                        self.delta,
                        2.0 * std::f64::consts::PI * i as f64 / self.circle_points as f64,
                    )
            })
            .collect()
    }

    /// Points of one upper piece.
    pub fn points(&self, piece: Piece) -> Vec<JumpPoint> {
        let pts: Vec<C> = match piece {
            Piece::Real => self.real.iter().map(|&k| C::new(k, 0.0)).collect(),
            Piece::CutUpper => self.cut_upper.iter().map(|&h| C::new(0.0, h)).collect(),
            Piece::CutLower => self.cut_lower.iter().map(|&h| C::new(0.0, h)).collect(),
            Piece::Strip => self
                .strip
                .iter()
                .map(|&y| C::new(y, 0.5 * self.c))
                .collect(),
            Piece::Circle(l) => self.circle(l),
        };
        pts.into_iter().map(|k| JumpPoint::new(piece, k)).collect()
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let mut out = vec![Piece::Real];
        if self.c > 0.0 {
            out.extend([Piece::CutUpper, Piece::CutLower, Piece::Strip]);
        }
        out.extend((1..=self.kappas.len()).map(Piece::Circle));
        out
    }
}

/// Inputs shared by all jump evaluations.
pub struct JumpContext<'a> {
    pub data: &'a ScatteringData,
    pub solver: JostSolver<'a>,
    pub split: Option<&'a SplitReflection>,
    pub delta: f64,
}

impl<'a> JumpContext<'a> {
    pub fn new(data: &'a ScatteringData, solver: JostSolver<'a>) -> Self {
        let delta = circle_radius(data.c, &data.kappas);
        Self {
            data,
            solver,
            split: None,
            delta,
        }
    }

    pub fn with_split(mut self, split: &'a SplitReflection) -> Self {
        self.split = Some(split);
        self
    }

    fn chi(&self, h: f64) -> Result<C> {
        chi_with(&self.solver, h)
    }

    fn twist(&self, j: usize, k: C) -> Result<C> {
        blaschke(&self.data.kappas, j + 1, k)
    }
}

fn lower(e21: C) -> Mat {
    Mat::new(ONE, ZERO, e21, ONE)
}

fn upper(e12: C) -> Mat {
    Mat::new(ONE, e12, ZERO, ONE)
}

fn circle_jump(ctx: &JumpContext, j: usize, l: usize, k: C, x: f64, t: f64) -> Result<Mat> {
    let n = ctx.data.kappas.len();
    if l == 0 || l > n {
        return Err(Error::Contract(format!("circle index {l} outside 1..={n}")));
    }
    let p = ctx.twist(j, k)?;
    let pm = pole_matrices(k, x, t, ctx.data.kappas[l - 1], ctx.data.gammas2[l - 1])?;
    // the jump across 𝕋_l of m·X·P^{-σ₃} (inside) against m·P^{-σ₃} (outside)
    Ok(if l <= j {
        lower(pm.a21.value() / (p * p))
    } else {
        upper(pm.b12.value() * p * p)
    })
}

/// `v(k, j)` on `Σ` at `(x, t)`.
pub fn jump_v(ctx: &JumpContext, j: usize, pt: JumpPoint, x: f64, t: f64) -> Result<Mat> {
    if pt.mirrored {
        let up = jump_v(ctx, j, pt.mirror(), x, t)?;
        return Ok(sigma1_conj(&up));
    }
    let k = pt.k;
    match pt.piece {
        Piece::Real => {
            let p = ctx.twist(j, k)?;
            let r = ctx.data.reflection(k.re);
            let e = (2.0 * t_phase(k, x, t)).exp();
            Ok(Mat::new(
                C::new(1.0 - r.norm_sqr(), 0.0),
                -r.conj() * p * p / e,
                r * e / (p * p),
                ONE,
            ))
        }
        Piece::CutUpper | Piece::CutLower => {
            let p = ctx.twist(j, k)?;
            let e = (2.0 * t_phase(k, x, t)).exp();
            Ok(lower(ctx.chi(k.im)? * e / (p * p)))
        }
        Piece::Circle(l) => circle_jump(ctx, j, l, k, x, t),
        Piece::Strip => Err(Error::Contract("𝒞 is not part of Σ".into())),
    }
}

/// `Y(k, j)` on `ℝ₊` from `R_r(±k)`.
pub fn y_matrix(rr: C, rr_neg: C, p: C, e: C) -> Mat {
    Mat::new(
        C::new(1.0 - rr.norm_sqr(), 0.0),
        -rr_neg * p * p / e,
        rr * e / (p * p),
        ONE,
    )
}

/// `f(ih) = χ(ih) + p(ih) - q(ih)`.
pub fn residual_at(ctx: &JumpContext, split: &SplitReflection, h: f64) -> Result<C> {
    let k = C::new(0.0, h);
    Ok(ctx.chi(h)? + split.pair.p(k) - split.pair.q(k))
}

/// `v̂(k, j)` on `Σ̂` at `(x, t)`.
pub fn conjugated_jump_vhat(ctx: &JumpContext, j: usize, pt: JumpPoint, x: f64, t: f64) -> Result<Mat> {
    let split = ctx
        .split
        .ok_or_else(|| Error::Contract("v̂ needs the reflection split".into()))?;
    if pt.mirrored {
        let up = conjugated_jump_vhat(ctx, j, pt.mirror(), x, t)?;
        return Ok(sigma1_conj(&up));
    }
    let k = pt.k;
    match pt.piece {
        Piece::Real => {
            let p = ctx.twist(j, k)?;
            let e = (2.0 * t_phase(k, x, t)).exp();
            let rr = split.ghat.rr_at(k.re, t)?;
            let rr_neg = split.ghat.rr_at(-k.re, t)?;
            Ok(y_matrix(rr, rr_neg, p, e))
        }
        Piece::Strip => {
            let p = ctx.twist(j, k)?;
            let e = (2.0 * t_phase(k, x, t)).exp();
            let rational = if k.re >= 0.0 {
                split.pair.q(k)
            } else {
                split.pair.p(k)
            };
            let ra = split.ghat.ra(k, t)?;
            Ok(lower(-(ra + rational) * e / (p * p)))
        }
        Piece::CutLower => {
            let p = ctx.twist(j, k)?;
            let e = (2.0 * t_phase(k, x, t)).exp();
            Ok(lower(residual_at(ctx, split, k.im)? * e / (p * p)))
        }
        Piece::CutUpper | Piece::Circle(_) => jump_v(ctx, j, pt, x, t),
    }
}

pub fn det(m: &Mat) -> C {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

fn frob(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn minus_identity(m: &Mat) -> Mat {
    m - Mat::identity()
}

/// `m(k) = (Tφ₁e^{ikx}, φe^{-ikx})` at `t = 0` for `Im k ≥ 0`, off the cut
/// (points on `(0, ic]` take the right side); `m(-k)σ₁` below.
pub fn build_m_from_jost(solver: &JostSolver, k: C, x: f64) -> Result<[C; 2]> {
    if k.im < 0.0 {
        let m = build_m_from_jost(solver, -k, x)?;
        return Ok([m[1], m[0]]);
    }
    if k == ZERO {
        return Err(Error::Domain("m is not defined at k = 0".into()));
    }
    let c = solver.spec.c;
    let p = SpectralParameter::new(k, c);
    let u = solver.right(k, &[x])?[0];
    let w = solver.left(p.k1, &[x])?[0];
    let wr = wronskian_normalized(k, p.k1, &u, &w);
    let t = 2.0 * I * k / wr;
    Ok([t * w.v * (I * (k - p.k1) * x).exp(), u.v])
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpVerification {
    pub x: f64,
    pub max_residual: f64,
    pub worst_k: f64,
    pub points: usize,
}

impl JumpVerification {
    pub fn into_result(self) -> Result<Self> {
        if self.max_residual < JUMP_TOL {
            Ok(self)
        } else {
            Err(Error::JumpVerification {
                residual: self.max_residual,
                k: self.worst_k,
            })
        }
    }
}

/// Relative residual of `m₊ = m₋v` on `ℝ₊` at `t = 0`, using `R` from the
/// scattering table at its own nodes in `[k_min, k_max]`.
pub fn verify_jump_real_axis(ctx: &JumpContext, x: f64, k_min: f64, k_max: f64) -> Result<JumpVerification> {
    let n = ctx.data.kappas.len();
    let nodes: Vec<f64> = ctx
        .data
        .r
        .iter()
        .map(|s| s.k)
        .filter(|&k| k >= k_min && k <= k_max && k > 0.0)
        .collect();
    let res = nodes
        .par_iter()
        .map(|&k| {
            let kc = C::new(k, 0.0);
            let plus = build_m_from_jost(&ctx.solver, kc, x)?;
            let up = build_m_from_jost(&ctx.solver, -kc, x)?;
            let minus = [up[1], up[0]];
            let v = jump_v(ctx, n, JumpPoint::new(Piece::Real, kc), x, 0.0)?;
            let mv = [
                minus[0] * v[(0, 0)] + minus[1] * v[(1, 0)],
                minus[0] * v[(0, 1)] + minus[1] * v[(1, 1)],
            ];
            let num = ((plus[0] - mv[0]).norm_sqr() + (plus[1] - mv[1]).norm_sqr()).sqrt();
            let den = (plus[0].norm_sqr() + plus[1].norm_sqr()).sqrt();
            Ok((num / den, k))
        })
        .collect::<Result<Vec<_>>>()?;
    let (max_residual, worst_k) = res
        .iter()
        .copied()
        .fold((0.0, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    Ok(JumpVerification {
        x,
        max_residual,
        worst_k,
        points: res.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    pub x: f64,
    pub value: f64,
    pub kappas: Vec<f64>,
    pub sequence: Vec<f64>,
    /// Difference of the two best extrapolants.
    pub error_estimate: f64,
}

/// `q(x, 0)` as the limit of `2k²(m₁m₂ - 1)` along `k = iκ`, with
/// Richardson extrapolation in `1/κ` over a doubling ladder.
pub fn reconstruct_q(solver: &JostSolver, x: f64, kappa0: f64, levels: usize) -> Result<Reconstruction> {
    let kappas: Vec<f64> = (0..levels).map(|i| kappa0 * (1u64 << i) as f64).collect();
    let seq = kappas
        .par_iter()
        .map(|&kappa| {
            let k = C::new(0.0, kappa);
            let m = build_m_from_jost(solver, k, x)?;
            Ok((2.0 * k * k * (m[0] * m[1] - 1.0)).re)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut table = seq.clone();
    let mut prev = f64::NAN;
    for order in 1..levels {
        let f = (1u64 << order) as f64;
        prev = table[levels - 1];
        for i in (order..levels).rev() {
            table[i] = (f * table[i] - table[i - 1]) / (f - 1.0);
        }
    }
    let value = table[levels - 1];
    let error_estimate = (value - prev).abs();
    if !value.is_finite() || error_estimate > 1e-4 * (1.0 + value.abs()) {
        return Err(Error::Divergence(seq));
    }
    Ok(Reconstruction {
        x,
        value,
        kappas,
        sequence: seq,
        error_estimate,
    })
}

/// Norms of `k^s(v̂ - I)` on one piece over a time sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PieceDecay {
    pub piece: Piece,
    /// `sup[s][time]`.
    pub sup: [Vec<f64>; 3],
    pub l1: [Vec<f64>; 3],
    pub sup_fit: [PowerFit; 3],
    pub l1_fit: [PowerFit; 3],
    /// All norms below `1e-250`: decay beyond double range.
    pub vanishing: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpDecayReport {
    pub j: usize,
    pub beta: f64,
    pub nu: f64,
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub pieces: Vec<PieceDecay>,
    /// Largest `|det v̂ - 1| / max(1, ‖v̂‖²)` seen, with the entrywise max norm.
    pub det_residual: f64,
    pub pass: bool,
}

impl JumpDecayReport {
    pub fn piece(&self, piece: Piece) -> Option<&PieceDecay> {
        self.pieces.iter().find(|p| p.piece == piece)
    }
}

/// `ν = min{m0 - 3, β + 1}`.
pub fn decay_order(m0: u32, beta: f64) -> f64 {
    (m0 as f64 - 3.0).min(beta + 1.0)
}

/// `x = 4c²t + (β/c) log t`.
pub fn lower_boundary(c: f64, beta: f64, t: f64) -> f64 {
    let shift = if c > 0.0 { beta / c * t.ln() } else { 0.0 };
    4.0 * c * c * t + shift
}

fn arc_weights(pts: &[C]) -> Vec<f64> {
    let n = pts.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let d = (pts[i + 1] - pts[i]).norm();
        w[i] += 0.5 * d;
        w[i + 1] += 0.5 * d;
    }
    w
}

fn closed_weights(pts: &[C]) -> Vec<f64> {
    let n = pts.len();
    (0..n)
        .map(|i| 0.5 * ((pts[(i + 1) % n] - pts[i]).norm() + (pts[i] - pts[(i + n - 1) % n]).norm()))
        .collect()
}

/// Sup and `L¹` norms of `k^s(v̂ - I)` on every upper piece of `Σ̂`, fitted
/// against `t` along `x = 4c²t + (β/c) log t`. The mirrored pieces carry
/// identical norms.
pub fn jump_decay_report(
    ctx: &JumpContext,
    contours: &ContourSet,
    j: usize,
    beta: f64,
    times: &[f64],
) -> Result<JumpDecayReport> {
    let split = ctx
        .split
        .ok_or_else(|| Error::Contract("decay report needs the reflection split".into()))?;
    let c = ctx.data.c;
    let nu = decay_order(ctx.data.m0, beta);
    let xs: Vec<f64> = times.iter().map(|&t| lower_boundary(c, beta, t)).collect();

    // t-independent factors on the cut
    let chi_up: Vec<C> = contours
        .cut_upper
        .par_iter()
        .map(|&h| ctx.chi(h))
        .collect::<Result<_>>()?;
    let f_low: Vec<C> = contours
        .cut_lower
        .par_iter()
        .map(|&h| residual_at(ctx, split, h))
        .collect::<Result<_>>()?;

    let mut pieces = Vec::new();
    let mut det_residual = 0.0f64;
    for piece in contours.pieces() {
        let pts = contours.points(piece);
        let ks: Vec<C> = pts.iter().map(|p| p.k).collect();
        let weights = match piece {
            Piece::Circle(_) => closed_weights(&ks),
            _ => arc_weights(&ks),
        };
        let mut sup: [Vec<f64>; 3] = Default::default();
        let mut l1: [Vec<f64>; 3] = Default::default();
        for (&t, &x) in times.iter().zip(&xs) {
            let mats = pts
                .par_iter()
                .enumerate()
                .map(|(i, pt)| {
                    let k = pt.k;
                    match piece {
                        Piece::CutUpper | Piece::CutLower => {
                            let p = ctx.twist(j, k)?;
                            let e = (2.0 * t_phase(k, x, t)).exp();
                            let g = if piece == Piece::CutUpper { chi_up[i] } else { f_low[i] };
                            Ok(lower(g * e / (p * p)))
                        }
                        _ => conjugated_jump_vhat(ctx, j, *pt, x, t),
                    }
                })
                .collect::<Result<Vec<Mat>>>()?;
            for m in &mats {
                let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
                det_residual = det_residual.max((det(m) - 1.0).norm() / (scale * scale));
            }
            for s in 0..3 {
                let vals: Vec<f64> = mats
                    .iter()
                    .zip(&ks)
                    .map(|(m, k)| k.norm().powi(s as i32) * frob(&minus_identity(m)))
                    .collect();
                sup[s].push(vals.iter().copied().fold(0.0, crate::fit::nan_max));
                l1[s].push(vals.iter().zip(&weights).map(|(v, w)| v * w).sum());
            }
        }
        let sup_fit = [0, 1, 2].map(|s| loglog(times, &sup[s]));
        let l1_fit = [0, 1, 2].map(|s| loglog(times, &l1[s]));
        let vanishing = sup.iter().flatten().all(|&v| v < 1e-250);
        let pass = vanishing
            || sup_fit
                .iter()
                .chain(&l1_fit)
                .all(|f| f.slope <= -nu + SLOPE_MARGIN);
        pieces.push(PieceDecay {
            piece,
            sup,
            l1,
            sup_fit,
            l1_fit,
            vanishing,
            pass,
        });
    }
    let pass = pieces.iter().all(|p| p.pass) && det_residual < 1e-12;
    Ok(JumpDecayReport {
        j,
        beta,
        nu,
        times: times.to_vec(),
        xs,
        pieces,
        det_residual,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallKReport {
    pub k: Vec<f64>,
    pub norm: Vec<f64>,
    pub fit: PowerFit,
    pub pass: bool,
}

/// `‖𝒲(k, j)‖ = ‖v̂ - I‖` on `ℝ₊` and `[ic/2, 0]` at `|k| ∈ [1e-3, 1e-1]`;
/// the slope must be at least `1.7`.
pub fn small_k_report(ctx: &JumpContext, j: usize, x: f64, t: f64) -> Result<SmallKReport> {
    let ks = geomspace(1e-3, 1e-1, 13);
    let c = ctx.data.c;
    let norm = ks
        .par_iter()
        .map(|&a| {
            let real = conjugated_jump_vhat(ctx, j, JumpPoint::new(Piece::Real, C::new(a, 0.0)), x, t)?;
            let mut n = frob(&minus_identity(&real));
            if c > 0.0 && a <= 0.5 * c {
                let cut = conjugated_jump_vhat(ctx, j, JumpPoint::new(Piece::CutLower, C::new(0.0, a)), x, t)?;
                n = n.max(frob(&minus_identity(&cut)));
            }
            Ok(n)
        })
        .collect::<Result<Vec<f64>>>()?;
    let fit = loglog(&ks, &norm);
    Ok(SmallKReport {
        pass: fit.slope >= 1.7,
        k: ks,
        norm,
        fit,
    })
}
