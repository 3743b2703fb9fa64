//! Command implementations behind the `kdvlab` binary.
//!
//! Exit codes: 0 when every check passes, 2 when a check ran and failed
//! (reports are still written), 1 on operational errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::{FieldGrid, Provenance, FIELD_SCHEMA_VERSION};
use crate::fit::{loglog, PowerFit};
use crate::kdv_oracle::{conservation_report, evolve_spec, DriftRow};
use crate::model::{algebra_check, asymptotic_field, peak_position, phase_shift, AlgebraReport, RegionConfig, SolitonData};
use crate::potentials::{moment_diagnostics, sample_potential, GridSpec};
use crate::reflsplit::{build_split, default_tau, FReport};
use crate::rhp::{
    decay_order, jump_decay_report, lower_boundary, small_k_report, verify_jump_real_axis, ContourSet,
    JumpContext, JumpDecayReport, JumpVerification, SmallKReport,
};
use crate::scattering::jost::JostSolver;
use crate::scattering::{scattering_data, ScatteringData, SCHEMA_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Relative tolerance for peak heights and positions.
pub const PEAK_TOL: f64 = 0.01;
pub const EXPONENT_MARGIN: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => EXIT_PASS,
            Outcome::Fail => EXIT_FAIL,
        }
    }
}

/// One line of `manifest.jsonl` in the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_clock_s: f64,
    pub outcome: Outcome,
}

impl RunManifest {
    fn new(command: &str, config: Option<&Path>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config: config.map(Path::to_path_buf),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").into(),
            wall_clock_s: 0.0,
            outcome: Outcome::Pass,
        }
    }

    fn append(&self, out: &Path) -> Result<()> {
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(out.join("manifest.jsonl"))?;
        writeln!(f, "{}", serde_json::to_string(self)?)?;
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn finish(mut m: RunManifest, out: &Path, start: Instant, outcome: Outcome) -> Result<Outcome> {
    m.wall_clock_s = start.elapsed().as_secs_f64();
    m.outcome = outcome;
    m.append(out)?;
    Ok(outcome)
}

pub fn cmd_scatter(config: &Path, out: &Path) -> Result<Outcome> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let cfg = RunConfig::load(config)?;
    let spec = cfg.potential()?;
    let data = scattering_data(&spec, &cfg.scatter.grids())?;
    let samples = sample_potential(&spec, &GridSpec::covering(&spec, 10.0, 0.01))?;
    let moments = moment_diagnostics(&samples, spec.m0);

    let mut m = RunManifest::new("scatter", Some(config));
    let files = [out.join("scatter.json"), out.join("reflection.csv"), out.join("moments.json")];
    data.write_json(&files[0])?;
    data.write_csv(&files[1])?;
    write_json(&files[2], &moments)?;
    m.outputs.extend(files);

    println!("family        {}", spec.family.name());
    println!("c             {}", data.c);
    println!("N             {}", data.n());
    println!("kappa         {:?}", data.kappas);
    println!("gamma^2       {:?}", data.gammas2);
    println!("|W(ic)|       {:.6e}", data.w_ic.norm());
    println!("moments ok    {}", moments.satisfies_class);
    for w in &data.warnings {
        println!("warning: {w}");
    }
    finish(m, out, start, Outcome::Pass)
}

/// Evaluation grid and times for `q^sol`: the oracle window when an oracle
/// is configured, the `[asymptote]` section otherwise.
fn asymptote_grid(cfg: &RunConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(o) = &cfg.oracle {
        let x = o.x()[o.window()].to_vec();
        return Ok((x, o.output_times.clone()));
    }
    let a = cfg
        .asymptote
        .as_ref()
        .ok_or_else(|| Error::Config("need an [oracle] or [asymptote] section for the x grid".into()))?;
    let n = ((a.x_max - a.x_min) / a.dx).round() as usize;
    Ok(((0..=n).map(|i| a.x_min + i as f64 * a.dx).collect(), a.times.clone()))
}

pub fn region_config(data: &SolitonData, cfg: &RunConfig, beta: Option<f64>, eps: Option<f64>) -> Result<RegionConfig> {
    let mut r = RegionConfig::default_for(data);
    r.beta = beta.unwrap_or(cfg.region.beta);
    if let Some(e) = eps.or(cfg.region.eps) {
        r.eps = e;
    }
    r.t0 = cfg.region.t0;
    r.validate(data)?;
    Ok(r)
}

pub struct AsymptoteArgs<'a> {
    pub scatter: &'a Path,
    pub config: &'a Path,
    pub out: &'a Path,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub times: Option<Vec<f64>>,
}

pub fn cmd_asymptote(a: AsymptoteArgs) -> Result<Outcome> {
    let start = Instant::now();
    std::fs::create_dir_all(a.out)?;
    let cfg = RunConfig::load(a.config)?;
    let data = ScatteringData::read_json(a.scatter)?;
    let sol = SolitonData::from(&data);
    let region = region_config(&sol, &cfg, a.beta, a.eps)?;
    let (xs, times) = asymptote_grid(&cfg)?;
    let times = a.times.unwrap_or(times);
    let field = asymptotic_field(&sol, &xs, &times, &region)?;

    let mut m = RunManifest::new("asymptote", Some(a.config));
    m.inputs.push(a.scatter.to_path_buf());
    let path = a.out.join("asymptote.csv");
    field.write_csv(&path)?;
    m.outputs.push(path);

    println!("N = {}, eps = {}, beta = {}", sol.n(), region.eps, region.beta);
    for j in 1..=sol.n() {
        let k = sol.kappas[j - 1];
        println!(
            "soliton {j}: x = {:.6}·t + {:.6}   (Δ = {:.6})",
            4.0 * k * k,
            peak_position(j, 0.0, &sol)?,
            phase_shift(j, &sol)?
        );
    }
    finish(m, a.out, start, Outcome::Pass)
}

pub fn cmd_evolve(config: &Path, out: &Path, times: Option<Vec<f64>>) -> Result<Outcome> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let cfg = RunConfig::load(config)?;
    let spec = cfg.potential()?;
    let mut solver = cfg
        .oracle
        .clone()
        .ok_or_else(|| Error::Config("evolve needs an [oracle] section".into()))?;
    if let Some(t) = times {
        solver.output_times = t;
    }
    let run = evolve_spec(&spec, &solver)?;
    let drift: Vec<DriftRow> = if run.conservation.len() >= 2 {
        conservation_report(&run)?
    } else {
        Vec::new()
    };

    let mut m = RunManifest::new("evolve", Some(config));
    let files = [out.join("oracle.csv"), out.join("conservation.json")];
    run.field.write_csv(&files[0])?;
    write_json(&files[1], &serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "snapshots": run.conservation,
        "drift": drift,
        "steps": run.steps,
    }))?;
    m.outputs.extend(files);
    println!("steps {}, window [{}, {}]", run.steps, run.field.x[0], run.field.x[run.field.x.len() - 1]);
    for d in &drift {
        println!("t = {:>6}: mass drift {:.2e}, energy drift {:.2e}", d.t, d.mass_drift, d.energy_drift);
    }
    finish(m, out, start, Outcome::Pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakCheck {
    pub predicted_x: f64,
    pub predicted_q: f64,
    pub observed_x: f64,
    pub observed_q: f64,
    pub position_error: f64,
    pub height_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub c: f64,
    pub beta: f64,
    pub m0: u32,
    pub nu: f64,
    pub times: Vec<f64>,
    pub sup_error: Vec<f64>,
    pub fit: PowerFit,
    pub threshold: f64,
    pub exponent_pass: bool,
    pub peak_time: f64,
    pub peaks: Vec<PeakCheck>,
    pub pass: bool,
}

/// Local minima with parabolic refinement, `(x, q)`.
fn minima(x: &[f64], q: &[f64]) -> Vec<(f64, f64)> {
    let h = x[1] - x[0];
    (1..q.len() - 1)
        .filter(|&i| q[i] < q[i - 1] && q[i] <= q[i + 1])
        .map(|i| {
            let (a, b, c) = (q[i - 1], q[i], q[i + 1]);
            let den = a - 2.0 * b + c;
            let s = if den > 0.0 { 0.5 * (a - c) / den } else { 0.0 };
            (x[i] + s * h, b - 0.25 * (a - c) * s)
        })
        .collect()
}

/// Sup error over `x ≥ 4c²t + (β/c) log t` at each common time, its
/// fitted exponent, and peak agreement at the last time.
pub fn validate_fields(oracle: &FieldGrid, asym: &FieldGrid, c: f64, beta: f64, m0: u32) -> Result<ValidationReport> {
    if oracle.provenance != Provenance::Oracle || asym.provenance != Provenance::Asymptotic {
        return Err(Error::GridMismatch("expected an oracle field and an asymptotic field".into()));
    }
    if oracle.x.len() != asym.x.len()
        || oracle.x.iter().zip(&asym.x).any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::GridMismatch("x grids differ".into()));
    }
    let times: Vec<f64> = oracle.t.iter().copied().filter(|&t| asym.snapshot(t).is_some()).collect();
    if times.len() < 3 {
        return Err(Error::GridMismatch(format!("need at least 3 common times, found {}", times.len())));
    }
    let mut sup_error = Vec::new();
    for &t in &times {
        let (qo, qa) = (oracle.snapshot(t).unwrap(), asym.snapshot(t).unwrap());
        let lo = lower_boundary(c, beta, t);
        let e = oracle
            .x
            .iter()
            .enumerate()
            .filter(|(_, &x)| x >= lo)
            .map(|(i, _)| (qo[i] - qa[i]).abs())
            .fold(0.0, crate::fit::nan_max);
        sup_error.push(e);
    }
    let nu = decay_order(m0, beta);
    let threshold = -nu + EXPONENT_MARGIN;
    let fit = loglog(&times, &sup_error);
    let exponent_pass = sup_error.iter().all(|&e| e <= 1e-14) || fit.slope <= threshold;

    let peak_time = *times.last().unwrap();
    let (qo, qa) = (oracle.snapshot(peak_time).unwrap(), asym.snapshot(peak_time).unwrap());
    let lo = lower_boundary(c, beta, peak_time);
    let depth = qa.iter().map(|v| -v).fold(0.0, crate::fit::nan_max);
    let observed = minima(&oracle.x, qo);
    let peaks: Vec<PeakCheck> = minima(&asym.x, qa)
        .into_iter()
        .filter(|&(x, q)| x >= lo && -q > 0.1 * depth)
        .map(|(px, pq)| {
            let (ox, oq) = observed
                .iter()
                .copied()
                .filter(|(x, _)| (x - px).abs() < 3.0)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap_or((f64::NAN, f64::NAN));
            let position_error = (ox - px).abs() / px.abs().max(1.0);
            let height_error = (oq - pq).abs() / pq.abs();
            PeakCheck {
                predicted_x: px,
                predicted_q: pq,
                observed_x: ox,
                observed_q: oq,
                position_error,
                height_error,
                pass: position_error <= PEAK_TOL && height_error <= PEAK_TOL,
            }
        })
        .collect();
    let pass = exponent_pass && peaks.iter().all(|p| p.pass);
    Ok(ValidationReport {
        schema_version: FIELD_SCHEMA_VERSION,
        c,
        beta,
        m0,
        nu,
        times,
        sup_error,
        fit,
        threshold,
        exponent_pass,
        peak_time,
        peaks,
        pass,
    })
}

pub struct ValidateArgs<'a> {
    pub oracle: &'a Path,
    pub asymptotic: &'a Path,
    pub out: &'a Path,
    pub c: f64,
    pub beta: f64,
    pub m0: u32,
    pub schema_check: bool,
}

pub fn cmd_validate(a: ValidateArgs) -> Result<Outcome> {
    let start = Instant::now();
    let oracle = FieldGrid::read_csv(a.oracle)?;
    let asym = FieldGrid::read_csv(a.asymptotic)?;
    if a.schema_check {
        println!("schema ok: {} and {}", a.oracle.display(), a.asymptotic.display());
        return Ok(Outcome::Pass);
    }
    std::fs::create_dir_all(a.out)?;
    let rep = validate_fields(&oracle, &asym, a.c, a.beta, a.m0)?;
    let mut m = RunManifest::new("validate", None);
    m.inputs = vec![a.oracle.to_path_buf(), a.asymptotic.to_path_buf()];
    let path = a.out.join("validate.json");
    write_json(&path, &rep)?;
    m.outputs.push(path);
    for (t, e) in rep.times.iter().zip(&rep.sup_error) {
        println!("t = {t:>6}: sup error {e:.3e}");
    }
    println!(
        "fitted exponent {:.3} (threshold {:.3}): {}",
        rep.fit.slope,
        rep.threshold,
        if rep.exponent_pass { "PASS" } else { "FAIL" }
    );
    for p in &rep.peaks {
        println!(
            "peak at x = {:.3}: height {:.3e}, position {:.3e}: {}",
            p.predicted_x,
            p.height_error,
            p.position_error,
            if p.pass { "PASS" } else { "FAIL" }
        );
    }
    finish(m, a.out, start, Outcome::from_pass(rep.pass))
}

#[derive(Debug, Clone, Serialize)]
pub struct RhpReport {
    pub schema_version: u32,
    pub seed: u64,
    pub j: usize,
    pub beta: f64,
    pub nu: f64,
    pub tau: f64,
    pub split_f: FReport,
    pub decay: JumpDecayReport,
    pub algebra: AlgebraReport,
    pub small_k: SmallKReport,
    pub jump_t0: Vec<JumpVerification>,
    pub jump_t0_pass: bool,
    pub pass: bool,
}

pub struct RhpArgs<'a> {
    pub config: &'a Path,
    pub scatter: &'a Path,
    pub out: &'a Path,
    pub j: Option<usize>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub schema_check: bool,
}

pub fn cmd_rhpcheck(a: RhpArgs) -> Result<Outcome> {
    let start = Instant::now();
    let data = ScatteringData::read_json(a.scatter)?;
    if a.schema_check {
        println!("schema ok: {}", a.scatter.display());
        return Ok(Outcome::Pass);
    }
    std::fs::create_dir_all(a.out)?;
    let cfg = RunConfig::load(a.config)?;
    let spec = cfg.potential()?;
    if spec.c != data.c {
        return Err(Error::Config("scatter artifact does not belong to this config".into()));
    }
    let j = a.j.unwrap_or(cfg.rhp.j);
    let beta = a.beta.unwrap_or(cfg.region.beta);
    let times = a.times.unwrap_or_else(|| cfg.rhp.times.clone());
    let tau = match cfg.rhp.tau {
        Some(t) => t,
        None => default_tau(&data)?,
    };
    let split = build_split(&data, tau)?;
    let ctx = JumpContext::new(&data, JostSolver::with_rtol(&spec, 1e-12)).with_split(&split);
    let contours = ContourSet::new(data.c, &data.kappas, cfg.scatter.k_max);
    let decay = jump_decay_report(&ctx, &contours, j, beta, &times)?;

    let sol = SolitonData::from(&data);
    let region = region_config(&sol, &cfg, Some(beta), a.eps)?;
    let algebra = algebra_check(&sol, &region, 20, 5, cfg.rhp.seed)?;
    let t_small = times.get(1).copied().unwrap_or(times[0]);
    let small_k = small_k_report(&ctx, j, lower_boundary(data.c, beta, t_small), t_small)?;

    let plain = JumpContext::new(&data, JostSolver::with_rtol(&spec, 1e-12));
    let jump_t0 = cfg
        .rhp
        .probe_x
        .iter()
        .map(|&x| verify_jump_real_axis(&plain, x, 0.01, 5.0))
        .collect::<Result<Vec<_>>>()?;
    let jump_t0_pass = jump_t0.iter().all(|v| v.max_residual < crate::rhp::JUMP_TOL);

    let pass = decay.pass && algebra.pass && small_k.pass && jump_t0_pass && split.f.pass;
    let rep = RhpReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.rhp.seed,
        j,
        beta,
        nu: decay_order(data.m0, beta),
        tau,
        split_f: split.f.clone(),
        decay,
        algebra,
        small_k,
        jump_t0,
        jump_t0_pass,
        pass,
    };
    let mut m = RunManifest::new("rhpcheck", Some(a.config));
    m.inputs.push(a.scatter.to_path_buf());
    m.seed = Some(cfg.rhp.seed);
    let path = a.out.join("rhpcheck.json");
    write_json(&path, &rep)?;
    m.outputs.push(path);

    let flag = |p: bool| if p { "PASS" } else { "FAIL" };
    println!("nu = {}", rep.nu);
    for p in &rep.decay.pieces {
        println!("{:<12} sup exponent {:>8.3}  {}", format!("{:?}", p.piece), p.sup_fit[0].slope, flag(p.pass));
    }
    println!("det residual {:.2e}", rep.decay.det_residual);
    println!("model algebra {}", flag(rep.algebra.pass));
    println!("small-k slope {:.3} {}", rep.small_k.fit.slope, flag(rep.small_k.pass));
    println!("t = 0 jump {}", flag(rep.jump_t0_pass));
    println!("f = O(k^m0) {}", flag(rep.split_f.pass));
    finish(m, a.out, start, Outcome::from_pass(rep.pass))
}
