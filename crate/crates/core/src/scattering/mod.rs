//! Forward scattering transform of a step-like potential.

pub mod branch;
pub mod jets;
pub mod jost;
pub mod spectrum;

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use branch::{k1_branch, CutSide, SpectralParameter};
pub use jets::{reflection_continued, reflection_jets};
pub use jost::{
    chi, jost_left, jost_right, reflection_transmission, wronskian, JostSolver, JostValues,
    ReflectionTransmission,
};
pub use spectrum::{discrete_spectrum, norming_constants, DiscreteSpectrum};

use crate::error::{Error, Result};
use crate::io::F17;
use crate::potentials::PotentialSpec;

type C = Complex64;

pub const SCHEMA_VERSION: u32 = 1;
/// `|W(ic)|` below this is treated as a resonance.
pub const RESONANCE_TOL: f64 = 1e-8;
/// Allowed excess of `|R|` over one.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Grids on which `R` and `χ` are tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterGrids {
    /// `R` is tabulated at `k = i·dk`, `i = 0..=k_max/dk`.
    pub dk: f64,
    pub k_max: f64,
    /// Uniform interior points of `(0, c)` for `χ`.
    pub chi_points: usize,
    /// Extra logarithmically spaced `χ` points on `[1e-3c, 1e-1c]`.
    pub chi_log_points: usize,
}

impl Default for ScatterGrids {
    fn default() -> Self {
        Self {
            dk: 0.01,
            k_max: 15.0,
            chi_points: 199,
            chi_log_points: 25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSample {
    pub k: f64,
    pub r: C,
    pub t: C,
}

/// The minimal scattering data set plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub c: f64,
    pub m0: u32,
    pub n0: u32,
    pub decaying: bool,
    /// Sorted increasing.
    pub kappas: Vec<f64>,
    pub gammas2: Vec<f64>,
    pub w_ic: C,
    /// `k ≥ 0` on a uniform grid starting at 0; negative `k` by conjugation.
    pub r: Vec<RSample>,
    /// `(h, Im χ(ih))`, `h` increasing.
    pub chi: Vec<(f64, f64)>,
    /// `R^{(l)}(+0)`, `l = 0..m0`.
    pub jets: Vec<C>,
    pub warnings: Vec<String>,
}

impl ScatteringData {
    pub fn n(&self) -> usize {
        self.kappas.len()
    }

    pub fn dk(&self) -> f64 {
        if self.r.len() > 1 {
            self.r[1].k - self.r[0].k
        } else {
            0.0
        }
    }

    /// `R(k)` for real `k` by cubic interpolation of the table (zero past it).
    pub fn reflection(&self, k: f64) -> C {
        let v = self.reflection_abs(k.abs());
        if k < 0.0 {
            v.conj()
        } else {
            v
        }
    }

    fn reflection_abs(&self, k: f64) -> C {
        let n = self.r.len();
        let dk = self.dk();
        if n < 4 || k > self.r[n - 1].k {
            return C::new(0.0, 0.0);
        }
        let s = k / dk;
        let i = (s.floor() as usize).clamp(1, n - 3);
        let u = s - i as f64;
        let p = [self.r[i - 1].r, self.r[i].r, self.r[i + 1].r, self.r[i + 2].r];
        // Lagrange on nodes -1, 0, 1, 2
        let w = [
            -u * (u - 1.0) * (u - 2.0) / 6.0,
            (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
            -(u + 1.0) * u * (u - 2.0) / 2.0,
            (u + 1.0) * u * (u - 1.0) / 6.0,
        ];
        p[0] * w[0] + p[1] * w[1] + p[2] * w[2] + p[3] * w[3]
    }

    pub fn max_abs_r(&self) -> f64 {
        self.r.iter().map(|s| s.r.norm()).fold(0.0, crate::fit::nan_max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ScatteringJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScatteringJson = serde_json::from_str(text)?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema {
                expected: SCHEMA_VERSION,
                found: raw.schema_version,
            });
        }
        Ok(raw.into())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// `R` and `χ` tables as CSV: `kind,arg,re,im`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["kind", "arg", "re", "im"])?;
        for s in &self.r {
            w.write_record(["R", &fmt17(s.k), &fmt17(s.r.re), &fmt17(s.r.im)])?;
        }
        for &(h, im) in &self.chi {
            w.write_record(["chi", &fmt17(h), &fmt17(0.0), &fmt17(im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize, Deserialize)]
struct RJson {
    k: F17,
    re: F17,
    im: F17,
    t_re: F17,
    t_im: F17,
}

#[derive(Serialize, Deserialize)]
struct ChiJson {
    h: F17,
    im: F17,
}

#[derive(Serialize, Deserialize)]
struct ScatteringJson {
    schema_version: u32,
    c: F17,
    m0: u32,
    n0: u32,
    decaying: bool,
    kappas: Vec<F17>,
    gammas2: Vec<F17>,
    #[serde(rename = "W_ic")]
    w_ic: [F17; 2],
    #[serde(rename = "R")]
    r: Vec<RJson>,
    chi: Vec<ChiJson>,
    jets: Vec<[F17; 2]>,
    warnings: Vec<String>,
}

impl From<&ScatteringData> for ScatteringJson {
    fn from(d: &ScatteringData) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            c: F17(d.c),
            m0: d.m0,
            n0: d.n0,
            decaying: d.decaying,
            kappas: d.kappas.iter().map(|&v| F17(v)).collect(),
            gammas2: d.gammas2.iter().map(|&v| F17(v)).collect(),
            w_ic: [F17(d.w_ic.re), F17(d.w_ic.im)],
            r: d
                .r
                .iter()
                .map(|s| RJson {
                    k: F17(s.k),
                    re: F17(s.r.re),
                    im: F17(s.r.im),
                    t_re: F17(s.t.re),
                    t_im: F17(s.t.im),
                })
                .collect(),
            chi: d
                .chi
                .iter()
                .map(|&(h, im)| ChiJson {
                    h: F17(h),
                    im: F17(im),
                })
                .collect(),
            jets: d.jets.iter().map(|z| [F17(z.re), F17(z.im)]).collect(),
            warnings: d.warnings.clone(),
        }
    }
}

impl From<ScatteringJson> for ScatteringData {
    fn from(j: ScatteringJson) -> Self {
        Self {
            c: j.c.0,
            m0: j.m0,
            n0: j.n0,
            decaying: j.decaying,
            kappas: j.kappas.iter().map(|v| v.0).collect(),
            gammas2: j.gammas2.iter().map(|v| v.0).collect(),
            w_ic: C::new(j.w_ic[0].0, j.w_ic[1].0),
            r: j
                .r
                .iter()
                .map(|s| RSample {
                    k: s.k.0,
                    r: C::new(s.re.0, s.im.0),
                    t: C::new(s.t_re.0, s.t_im.0),
                })
                .collect(),
            chi: j.chi.iter().map(|c| (c.h.0, c.im.0)).collect(),
            jets: j.jets.iter().map(|z| C::new(z[0].0, z[1].0)).collect(),
            warnings: j.warnings,
        }
    }
}

/// `h` values of the `χ` table.
pub fn chi_grid(c: f64, grids: &ScatterGrids) -> Vec<f64> {
    if c == 0.0 {
        return Vec::new();
    }
    let n = grids.chi_points;
    let mut hs: Vec<f64> = (1..=n).map(|i| c * i as f64 / (n + 1) as f64).collect();
    let m = grids.chi_log_points;
    for i in 0..m {
        let e = -3.0 + 2.0 * i as f64 / (m.max(2) - 1) as f64;
        hs.push(c * 10f64.powf(e));
    }
    hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    hs.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * c);
    hs
}

/// Assemble the scattering data set with all invariant checks.
pub fn scattering_data(spec: &PotentialSpec, grids: &ScatterGrids) -> Result<ScatteringData> {
    spec.validate()?;
    let c = spec.c;
    let solver = JostSolver::with_rtol(spec, 1e-12);
    let mut warnings = Vec::new();

    let w_ic = if c > 0.0 {
        let w = jost::wronskian_with(&solver, SpectralParameter::new(C::new(0.0, c), c))?;
        if w.norm() < RESONANCE_TOL {
            return Err(Error::Resonance {
                magnitude: w.norm(),
            });
        }
        w
    } else {
        // reflectionless decaying data have W(0) = 0; no cut, nothing to check
        C::new(0.0, 0.0)
    };

    let count = (grids.k_max / grids.dk).round() as usize;
    let ks: Vec<f64> = (0..=count).map(|i| i as f64 * grids.dk).collect();
    let decaying_origin = c == 0.0;
    let mut r = ks
        .par_iter()
        .map(|&k| {
            if k == 0.0 && decaying_origin {
                // filled in below
                return Ok(RSample { k, r: C::new(0.0, 0.0), t: C::new(0.0, 0.0) });
            }
            let rt = jost::reflection_with(&solver, SpectralParameter::new(C::new(k, 0.0), c))?;
            Ok(RSample { k, r: rt.r, t: rt.t })
        })
        .collect::<Result<Vec<_>>>()?;
    if decaying_origin && r.len() >= 5 {
        // W(0) vanishes for decaying data; extrapolate from the first nodes
        let w = [4.0, -6.0, 4.0, -1.0];
        r[0].r = (1..5).map(|i| r[i].r * w[i - 1]).sum();
        r[0].t = (1..5).map(|i| r[i].t * w[i - 1]).sum();
    }
    for s in &r {
        if s.r.norm() > 1.0 + UNITARITY_TOL {
            return Err(Error::DataQuality(format!(
                "|R({})| = {} exceeds 1",
                s.k,
                s.r.norm()
            )));
        }
    }

    let hs = chi_grid(c, grids);
    let chi = hs
        .par_iter()
        .map(|&h| Ok((h, jost::chi_with(&solver, h)?.im)))
        .collect::<Result<Vec<_>>>()?;

    let spectrum = spectrum::discrete_spectrum_with(&solver)?;
    warnings.extend(spectrum.warnings.iter().cloned());
    let gammas2 = spectrum
        .kappas
        .iter()
        .map(|&k| spectrum::norming_constant(&solver, k))
        .collect::<Result<Vec<_>>>()?;

    let jets = reflection_jets(spec, spec.m0 as usize)?;

    Ok(ScatteringData {
        c,
        m0: spec.m0,
        n0: spec.n0,
        decaying: spec.decaying,
        kappas: spectrum.kappas,
        gammas2,
        w_ic,
        r,
        chi,
        jets,
        warnings,
    })
}
