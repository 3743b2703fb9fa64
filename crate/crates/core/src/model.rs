//! Soliton model problem: region classification, dressed norming constants,
//! the vectors `𝒮`, `𝒱`, the matrix `M` and the assembled profile `q^sol`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldGrid, Provenance, RegionKind, RegionTag};
use crate::rhp::{circle_radius, lower_boundary, sigma1_conj, Scaled};
use crate::scattering::ScatteringData;

type C = Complex64;
pub type Mat = Matrix2<C>;

const I: C = C { re: 0.0, im: 1.0 };
const ONE: C = C { re: 1.0, im: 0.0 };

pub const ALGEBRA_TOL: f64 = 1e-12;
pub const REMOVABILITY_TOL: f64 = 1e-8;

/// Discrete scattering data, the only input of the model problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonData {
    pub c: f64,
    /// Sorted increasing.
    pub kappas: Vec<f64>,
    pub gammas2: Vec<f64>,
}

impl SolitonData {
    pub fn new(c: f64, kappas: Vec<f64>, gammas2: Vec<f64>) -> Result<Self> {
        if kappas.len() != gammas2.len() {
            return Err(Error::Config("κ and γ² lists differ in length".into()));
        }
        if kappas.windows(2).any(|w| w[0] >= w[1]) || kappas.iter().any(|&k| k <= c) {
            return Err(Error::Config("κ must increase strictly and exceed c".into()));
        }
        if gammas2.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::Config("γ² must be positive".into()));
        }
        Ok(Self { c, kappas, gammas2 })
    }

    pub fn n(&self) -> usize {
        self.kappas.len()
    }

    /// `c = 0`: pure soliton classification, no cut.
    pub fn decaying(&self) -> bool {
        self.c == 0.0
    }
}

impl From<&ScatteringData> for SolitonData {
    fn from(d: &ScatteringData) -> Self {
        Self {
            c: d.c,
            kappas: d.kappas.clone(),
            gammas2: d.gammas2.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionConfig {
    pub eps: f64,
    pub beta: f64,
    pub delta: f64,
    pub t0: f64,
}

impl RegionConfig {
    /// `ε` is a quarter of the smallest gap among `4c², 4κ_1², ..., 4κ_N²`.
    pub fn default_for(data: &SolitonData) -> Self {
        let mut v: Vec<f64> = Vec::with_capacity(data.n() + 1);
        if data.c > 0.0 {
            v.push(4.0 * data.c * data.c);
        }
        v.extend(data.kappas.iter().map(|k| 4.0 * k * k));
        let gap = v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let eps = if gap.is_finite() { gap / 4.0 } else { 1.0 };
        let delta = if data.n() > 0 {
            circle_radius(data.c, &data.kappas)
        } else {
            f64::INFINITY
        };
        Self {
            eps,
            beta: 0.0,
            delta,
            t0: 5.0,
        }
    }

    pub fn validate(&self, data: &SolitonData) -> Result<()> {
        if !(self.eps > 0.0) || !(self.beta >= 0.0) || !(self.t0 > 0.0) {
            return Err(Error::Config(format!("invalid region config {self:?}")));
        }
        let gaps = data.kappas.windows(2).map(|w| 4.0 * (w[1] * w[1] - w[0] * w[0]));
        if gaps.into_iter().any(|g| self.eps >= g / 2.0) {
            return Err(Error::Config(format!("ε = {} overlaps neighbouring soliton bands", self.eps)));
        }
        Ok(())
    }
}

/// Tag of `(x, t)` by the velocity `ξ = x/t`. Bands `|ξ - 4κ_j²| ≤ ε` are
/// soliton regions; the gaps between them are `D_j` (`D_N` above the last),
/// the gap below the first band is `D_0`.
pub fn classify_region(x: f64, t: f64, c: f64, kappas: &[f64], cfg: &RegionConfig) -> Result<RegionTag> {
    if t < cfg.t0 {
        return Err(Error::Domain(format!("t = {t} below T0 = {}", cfg.t0)));
    }
    if x < lower_boundary(c, cfg.beta, t) {
        return Ok(RegionTag {
            kind: RegionKind::Outside,
            index: 0,
        });
    }
    let xi = x / t;
    if let Some(j) = kappas.iter().position(|k| (xi - 4.0 * k * k).abs() <= cfg.eps) {
        return Ok(RegionTag {
            kind: RegionKind::Soliton,
            index: j + 1,
        });
    }
    let below = kappas.iter().filter(|k| xi > 4.0 * *k * *k).count();
    Ok(RegionTag {
        kind: if below == 0 { RegionKind::D0 } else { RegionKind::Between },
        index: below,
    })
}

fn check_index(data: &SolitonData, j: usize) -> Result<()> {
    if j == 0 || j > data.n() {
        return Err(Error::Contract(format!("soliton index {j} outside 1..={}", data.n())));
    }
    Ok(())
}

/// `log Π_{l>j} ((κ_l - κ_j)/(κ_l + κ_j))²`, 1-based `j`.
fn log_product(kappas: &[f64], j: usize) -> f64 {
    let kj = kappas[j - 1];
    kappas[j..]
        .iter()
        .map(|&kl| 2.0 * ((kl - kj) / (kl + kj)).ln())
        .sum()
}

/// `γ_j²(x, t) = γ_j² e^{8κ_j³t - 2κ_jx} Π_{l>j} ((κ_l - κ_j)/(κ_l + κ_j))²`.
pub fn gamma_xt(j: usize, x: f64, t: f64, data: &SolitonData) -> Result<Scaled> {
    check_index(data, j)?;
    let k = data.kappas[j - 1];
    Ok(Scaled {
        mantissa: ONE,
        log_mag: data.gammas2[j - 1].ln() + 8.0 * k.powi(3) * t - 2.0 * k * x + log_product(&data.kappas, j),
    })
}

/// `Δ_j = -½ log(γ_j²/2κ_j) - Σ_{i>j} log|(κ_j - κ_i)/(κ_i + κ_j)|`.
pub fn phase_shift(j: usize, data: &SolitonData) -> Result<f64> {
    check_index(data, j)?;
    let k = data.kappas[j - 1];
    Ok(-0.5 * (data.gammas2[j - 1] / (2.0 * k)).ln() - 0.5 * log_product(&data.kappas, j))
}

/// Peak line of the `j`-th soliton, `κ_jx - 4κ_j³t + Δ_j = 0`.
pub fn peak_position(j: usize, t: f64, data: &SolitonData) -> Result<f64> {
    let k = data.kappas[j - 1];
    Ok(4.0 * k * k * t - phase_shift(j, data)? / k)
}

/// `μ_j = iγ̃/(1 + γ̃/2κ_j)` computed as `2iκ_j/(1 + 2κ_j/γ̃)`.
pub fn mu(j: usize, x: f64, t: f64, data: &SolitonData) -> Result<C> {
    let g = gamma_xt(j, x, t, data)?;
    let k = data.kappas[j - 1];
    let r = ((2.0 * k).ln() - g.log_mag).exp();
    Ok(I * (2.0 * k / (1.0 + r)))
}

/// Model quantities frozen at one `(j, x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSolution {
    pub j: usize,
    pub x: f64,
    pub t: f64,
    pub kappa: f64,
    pub gamma2_xt: Scaled,
    #[serde(serialize_with = "ser_c")]
    pub mu: C,
    #[serde(serialize_with = "ser_c")]
    pub rho: C,
    pub delta: f64,
}

fn ser_c<S: serde::Serializer>(z: &C, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl ModelSolution {
    pub fn new(j: usize, x: f64, t: f64, data: &SolitonData) -> Result<Self> {
        let mu = mu(j, x, t, data)?;
        Ok(Self {
            j,
            x,
            t,
            kappa: data.kappas[j - 1],
            gamma2_xt: gamma_xt(j, x, t, data)?,
            mu,
            rho: -mu,
            delta: phase_shift(j, data)?,
        })
    }

    /// Any `μ`, used for algebra probes.
    pub fn with_mu(kappa: f64, mu: C) -> Self {
        Self {
            j: 1,
            x: 0.0,
            t: 0.0,
            kappa,
            gamma2_xt: Scaled::from_c(C::new(0.0, 0.0)),
            mu,
            rho: -mu,
            delta: 0.0,
        }
    }

    fn check_pole(&self, k: C, origin: bool) -> Result<()> {
        let tol = 1e-14 * self.kappa.max(1.0);
        if (origin && k.norm() <= tol) || (k - I * self.kappa).norm() <= tol || (k + I * self.kappa).norm() <= tol {
            return Err(Error::Pole(format!("{k}")));
        }
        Ok(())
    }

    /// `𝒮(k) = (1 + μ/(k - iκ), 1 - μ/(k + iκ))`.
    pub fn s(&self, k: C) -> Result<[C; 2]> {
        self.check_pole(k, false)?;
        let ik = I * self.kappa;
        Ok([ONE + self.mu / (k - ik), ONE - self.mu / (k + ik)])
    }

    /// `𝒱(k) = (-1 + iκμ/(k(k - iκ)), 1 - iκμ/(k(k + iκ)))`.
    pub fn v(&self, k: C) -> Result<[C; 2]> {
        self.check_pole(k, true)?;
        let ik = I * self.kappa;
        Ok([-ONE + ik * self.mu / (k * (k - ik)), ONE - ik * self.mu / (k * (k + ik))])
    }

    pub fn m(&self, k: C) -> Result<Mat> {
        self.check_pole(k, true)?;
        let ik = I * self.kappa;
        let h = self.mu / (2.0 * k);
        Ok(Mat::new(
            ONE + h,
            -h * (k - ik) / (k + ik),
            h * (k + ik) / (k - ik),
            ONE - h,
        ))
    }

    /// Closed-form inverse; `det M = 1`.
    pub fn m_inv(&self, k: C) -> Result<Mat> {
        let m = self.m(k)?;
        Ok(Mat::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]))
    }

    /// `-8κ²u/(1 + u)²` with `u = e^{-|s|}`, `e^s = γ̃/2κ`.
    pub fn q_mobius(&self) -> f64 {
        let s = self.gamma2_xt.log_mag - (2.0 * self.kappa).ln();
        let u = (-s.abs()).exp();
        -8.0 * self.kappa * self.kappa * u / ((1.0 + u) * (1.0 + u))
    }

    /// `-2κ²/cosh²(κx - 4κ³t + Δ)`.
    pub fn q_cosh(&self) -> f64 {
        let k = self.kappa;
        let arg = k * self.x - 4.0 * k.powi(3) * self.t + self.delta;
        -2.0 * k * k / arg.cosh().powi(2)
    }
}

pub fn model_vectors(j: usize, k: C, x: f64, t: f64, data: &SolitonData) -> Result<([C; 2], [C; 2])> {
    let m = ModelSolution::new(j, x, t, data)?;
    Ok((m.s(k)?, m.v(k)?))
}

pub fn model_matrix(j: usize, k: C, x: f64, t: f64, data: &SolitonData) -> Result<(Mat, Mat)> {
    let m = ModelSolution::new(j, x, t, data)?;
    Ok((m.m(k)?, m.m_inv(k)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct RemovabilityProbe {
    pub target: String,
    pub distance: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RemovabilityReport {
    pub j: usize,
    pub x: f64,
    pub t: f64,
    pub probes: Vec<RemovabilityProbe>,
    pub max_deviation: f64,
    pub pass: bool,
}

impl RemovabilityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::Contract(format!(
                "algebra regression: ‖𝒮M⁻¹ - (1,1)‖ reached {:e}",
                self.max_deviation
            )))
        }
    }
}

/// `𝒮M⁻¹ = (1, 1)` probed at distances `10⁻ⁿ`, `n = 2..6`, from `0` and `±iκ_j`.
pub fn removability_check(j: usize, x: f64, t: f64, data: &SolitonData) -> Result<RemovabilityReport> {
    removability_of(&ModelSolution::new(j, x, t, data)?)
}

pub fn removability_of(m: &ModelSolution) -> Result<RemovabilityReport> {
    let ik = I * m.kappa;
    let mut probes = Vec::new();
    for n in 2..=6 {
        let d = 10f64.powi(-n);
        for (target, k) in [
            ("0", C::new(d, 0.0)),
            ("0", C::new(0.0, d)),
            ("i kappa", ik + d),
            ("i kappa", ik + I * d),
            ("-i kappa", -ik + d),
        ] {
            let s = m.s(k)?;
            let inv = m.m_inv(k)?;
            let r0 = s[0] * inv[(0, 0)] + s[1] * inv[(1, 0)] - 1.0;
            let r1 = s[0] * inv[(0, 1)] + s[1] * inv[(1, 1)] - 1.0;
            probes.push(RemovabilityProbe {
                target: target.into(),
                distance: d,
                deviation: r0.norm().max(r1.norm()),
            });
        }
    }
    let max_deviation = probes.iter().map(|p| p.deviation).fold(0.0, crate::fit::nan_max);
    Ok(RemovabilityReport {
        j: m.j,
        x: m.x,
        t: m.t,
        pass: max_deviation < REMOVABILITY_TOL,
        probes,
        max_deviation,
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AlgebraReport {
    pub points: usize,
    pub probes: usize,
    pub det: f64,
    pub symmetry: f64,
    pub infinity: f64,
    pub s_identity: f64,
    pub removability: f64,
    pub pass: bool,
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, crate::fit::nan_max)
}

/// Algebra of `M` at `probes_per_point` seeded `k` for each of `points`
/// positions on the soliton lines inside `D_j^sol`.
pub fn algebra_check(
    data: &SolitonData,
    cfg: &RegionConfig,
    points: usize,
    probes_per_point: usize,
    seed: u64,
) -> Result<AlgebraReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = AlgebraReport::default();
    if data.n() == 0 {
        rep.pass = true;
        return Ok(rep);
    }
    for p in 0..points {
        let j = 1 + p % data.n();
        let k = data.kappas[j - 1];
        let t = cfg.t0 * (1.0 + 3.0 * rng.random::<f64>());
        let x = 4.0 * k * k * t + cfg.eps * t * (2.0 * rng.random::<f64>() - 1.0);
        let tag = classify_region(x, t, data.c, &data.kappas, cfg)?;
        if tag.kind != RegionKind::Soliton || tag.index != j {
            return Err(Error::Contract(format!("probe ({x}, {t}) tagged {tag:?}")));
        }
        let m = ModelSolution::new(j, x, t, data)?;
        for _ in 0..probes_per_point {
            let z = loop {
                let z = C::new(6.0 * rng.random::<f64>() - 3.0, 6.0 * rng.random::<f64>() - 3.0);
                if z.norm() > 0.1 && (z - I * k).norm() > 0.1 && (z + I * k).norm() > 0.1 {
                    break z;
                }
            };
            let mz = m.m(z)?;
            rep.det = rep.det.max(((mz[(0, 0)] * mz[(1, 1)] - mz[(0, 1)] * mz[(1, 0)]) - 1.0).norm());
            rep.symmetry = rep.symmetry.max(max_abs(&(m.m(-z)? - sigma1_conj(&mz))));
            let s = m.s(z)?;
            rep.s_identity = rep
                .s_identity
                .max((mz[(0, 0)] + mz[(1, 0)] - s[0]).norm())
                .max((mz[(0, 1)] + mz[(1, 1)] - s[1]).norm());
            rep.probes += 1;
        }
        rep.infinity = rep.infinity.max(max_abs(&(m.m(C::new(0.0, 1e14))? - Mat::identity())));
        rep.removability = rep.removability.max(removability_of(&m)?.max_deviation);
        rep.points += 1;
    }
    rep.pass = rep.det < ALGEBRA_TOL
        && rep.symmetry < ALGEBRA_TOL
        && rep.infinity < ALGEBRA_TOL
        && rep.s_identity < ALGEBRA_TOL
        && rep.removability < REMOVABILITY_TOL;
    Ok(rep)
}

/// `q^sol(x, t) = Σ_j -2κ_j²/cosh²(κ_jx - 4κ_j³t + Δ_j)`; zero when `N = 0`.
pub fn q_sol(x: f64, t: f64, data: &SolitonData) -> Result<f64> {
    (1..=data.n())
        .map(|j| Ok(ModelSolution::new(j, x, t, data)?.q_cosh()))
        .sum()
}

/// Per-term Möbius form of [`q_sol`].
pub fn q_sol_mobius(x: f64, t: f64, data: &SolitonData) -> Result<f64> {
    (1..=data.n())
        .map(|j| Ok(ModelSolution::new(j, x, t, data)?.q_mobius()))
        .sum()
}

/// `q^sol` with region tags on an `x` grid at each of `ts`.
pub fn asymptotic_field(data: &SolitonData, xs: &[f64], ts: &[f64], cfg: &RegionConfig) -> Result<FieldGrid> {
    let rows = ts
        .par_iter()
        .map(|&t| {
            xs.iter()
                .map(|&x| {
                    let tag = classify_region(x, t, data.c, &data.kappas, cfg)?;
                    Ok((q_sol(x, t, data)?, tag))
                })
                .collect::<Result<Vec<(f64, RegionTag)>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let (q, tags) = rows.into_iter().map(|r| r.into_iter().unzip()).unzip();
    Ok(FieldGrid {
        provenance: Provenance::Asymptotic,
        x: xs.to_vec(),
        t: ts.to_vec(),
        q,
        tags: Some(tags),
    })
}
