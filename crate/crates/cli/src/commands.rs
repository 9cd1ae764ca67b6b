use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num::rational::Rational64;
use radial_nlw::analysis::{
    decay_ladder, g_shape, recurrence_decay_check, regularity_constants, spacetime_norms, NormKind, Recurrence,
    RecurrenceVerdict,
};
use radial_nlw::linear_wave::{bump, channel_check, channel_suite, ChannelError, SUITE_TIMES};
use radial_nlw::nonlinear_wave::{
    blowup_time_study, classify, evolve, EvolutionConfig, Scheme, Sign, Trajectory, Verdict,
};
use radial_nlw::soliton::{
    construct, contraction_bound, default_tail_radius, soliton_diagnostics, truncated_soliton,
};
use radial_nlw::{critical_index, FieldPair, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value as Json};
use toml::{Table, Value};

use crate::config::{ExperimentConfig, Params, RunError};

/// What a command produced: artifact paths relative to its output
/// directory, headline numbers, and failed checks (exit status 2).
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<String>,
    pub summary: BTreeMap<String, Json>,
    pub failures: Vec<String>,
}

impl Outcome {
    fn put(&mut self, key: &str, v: impl Into<Json>) {
        self.summary.insert(key.to_string(), v.into());
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn write(&mut self, dir: &Path, name: &str, text: &str) -> Result<(), RunError> {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| RunError::failed(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, text).map_err(|e| RunError::failed(format!("{}: {e}", path.display())))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, dir: &Path, name: &str, v: &impl serde::Serialize) -> Result<(), RunError> {
        let text = serde_json::to_string_pretty(v).map_err(RunError::failed)? + "\n";
        self.write(dir, name, &text)
    }
}

/// Shortest round-trip form with an exponent for very large or small
/// magnitudes.
fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).unwrap_or_default()
    } else {
        format!("{x}")
    }
}

/// A validated operation, ready to run.
#[derive(Debug, Clone)]
pub enum Job {
    Simulate(SimSpec),
    Soliton(SolitonSpec),
    Norms(NormsSpec),
    Verify(VerifySpec),
    Ladder { p: f64, beta0: f64, lattice: usize },
    Channel(ChannelSpec),
    Sweep(SweepSpec),
}

/// Validate the configuration of `command` against the operation's
/// preconditions. Nothing is computed here beyond cheap constants.
pub fn plan(cfg: &ExperimentConfig) -> Result<Job, RunError> {
    plan_command(&cfg.command, cfg.section(&cfg.command), cfg, true)
}

fn plan_command(command: &str, table: Table, cfg: &ExperimentConfig, top: bool) -> Result<Job, RunError> {
    let p = Params::new(command, table);
    let job = match command {
        "simulate" => Job::Simulate(sim_spec(&p)?),
        "soliton" => Job::Soliton(soliton_spec(&p, cfg.tol)?),
        "norms" => Job::Norms(norms_spec(&p, cfg)?),
        "verify" => Job::Verify(verify_spec(&p, cfg)?),
        "ladder" => {
            let pp = p.f64("p", 4.0)?;
            if !(pp > 3.0 && pp <= 5.0) {
                return Err(p.err("p", format!("must satisfy 3 < p <= 5, got {pp}")));
            }
            let lo = 2.0 / (pp - 1.0);
            let beta0 = p.f64("beta0", lo)?;
            if !(beta0 >= lo - 1e-15 && beta0 < 1.0) {
                return Err(p.err("beta0", format!("must lie in [2/(p-1), 1) = [{lo}, 1), got {beta0}")));
            }
            let lattice = p.usize("lattice", 10_000)?;
            if lattice < 1 {
                return Err(p.err("lattice", "must be at least 1"));
            }
            Job::Ladder { p: pp, beta0, lattice }
        }
        "channel" => Job::Channel(channel_spec(&p)?),
        "sweep" if top => Job::Sweep(sweep_spec(&p, cfg)?),
        "sweep" => return Err(p.err("base", "a sweep cannot sweep another sweep")),
        other => return Err(RunError::invalid("command", format!("unknown command `{other}`"))),
    };
    p.finish()?;
    Ok(job)
}

pub fn execute(job: &Job, cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    match job {
        Job::Simulate(s) => run_simulate(s, dir, &mut out)?,
        Job::Soliton(s) => run_soliton(s, dir, &mut out)?,
        Job::Norms(s) => run_norms(s, dir, &mut out)?,
        Job::Verify(s) => run_verify(s, cfg, dir, &mut out)?,
        Job::Ladder { p, beta0, lattice } => run_ladder(*p, *beta0, *lattice, dir, &mut out)?,
        Job::Channel(s) => run_channel(s, dir, &mut out)?,
        Job::Sweep(s) => run_sweep(s, cfg, dir, &mut out)?,
    }
    Ok(out)
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone)]
pub struct SimSpec {
    pub cfg: EvolutionConfig,
    pub amplitude: f64,
    pub velocity: f64,
    pub width: f64,
    pub r_max: f64,
    pub h: f64,
    pub norm_cap: f64,
    pub halvings: usize,
    pub save: bool,
}

impl SimSpec {
    fn data(&self) -> Result<FieldPair, RunError> {
        let grid = Arc::new(RadialGrid::uniform_from_origin(self.r_max, self.h).map_err(RunError::failed)?);
        let (a, v, w) = (self.amplitude, self.velocity, self.width);
        Ok(FieldPair::from_fn(grid, |r| a * (-(r / w).powi(2)).exp(), |r| v * (-(r / w).powi(2)).exp()))
    }
}

fn sim_spec(p: &Params) -> Result<SimSpec, RunError> {
    let pp = p.f64("p", 4.0)?;
    let sign = match p.choice("sign", "focusing", &["focusing", "defocusing"])?.as_str() {
        "focusing" => Sign::Focusing,
        _ => Sign::Defocusing,
    };
    let t_final = p.f64("t_final", 5.0)?;
    let mut cfg = EvolutionConfig::new(pp, sign, t_final);
    cfg.cfl = p.f64("cfl", cfg.cfl)?;
    cfg.scheme = match p.choice("scheme", "leapfrog_u", &["leapfrog_u", "characteristics_w"])?.as_str() {
        "leapfrog_u" => Scheme::LeapfrogU,
        _ => Scheme::CharacteristicsW,
    };
    cfg.blowup_threshold = p.f64("blowup_threshold", cfg.blowup_threshold)?;
    cfg.snapshot_interval = p.opt_f64("snapshot_interval")?;
    cfg.validate().map_err(|(field, msg)| p.err(&field, msg))?;
    let amplitude = p.f64("amplitude", 1.0)?;
    let velocity = p.f64("velocity", 0.0)?;
    let width = p.f64("width", 1.0)?;
    if !(width > 0.0) {
        return Err(p.err("width", "must be positive"));
    }
    // the Gaussian is below 1e-15 beyond 6 widths
    let reach = 6.0 * width + t_final;
    let r_max = p.f64("r_max", reach + 2.0)?;
    if !(r_max >= reach) {
        return Err(p.err("r_max", format!("must be at least 6·width + t_final = {reach} so the boundary stays causally inactive")));
    }
    let h = p.f64("h", 0.02)?;
    if !(h > 0.0 && h < r_max / 4.0) {
        return Err(p.err("h", format!("must lie in (0, r_max/4), got {h}")));
    }
    let norm_cap = p.f64("norm_cap", 1e3)?;
    if !(norm_cap > 0.0) {
        return Err(p.err("norm_cap", "must be positive"));
    }
    let halvings = p.usize("halvings", 0)?;
    if halvings > 6 {
        return Err(p.err("halvings", "at most 6"));
    }
    let save = p.bool("save_trajectory", true)?;
    Ok(SimSpec { cfg, amplitude, velocity, width, r_max, h, norm_cap, halvings, save })
}

fn run_simulate(s: &SimSpec, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    let f0 = s.data()?;
    let traj = evolve(&f0, &s.cfg).map_err(RunError::failed)?;
    let mut csv = String::from("t,energy,relative_drift\n");
    let e0 = traj.energies[0];
    for (t, e) in traj.times.iter().zip(&traj.energies) {
        let _ = writeln!(csv, "{},{},{}", num(*t), num(*e), num((e - e0).abs() / e0.abs().max(1.0)));
    }
    out.write(dir, "energy.csv", &csv)?;
    let verdict = classify(&traj, s.norm_cap);
    out.put("energy", e0);
    out.put("energy_drift", traj.energy_drift());
    out.put("final_time", traj.final_time());
    record_verdict(out, &verdict);
    let mut report = json!({ "energy": e0, "energy_drift": traj.energy_drift(), "status": traj.status, "verdict": verdict });
    if s.halvings > 0 {
        let study = blowup_time_study(&f0, &s.cfg, s.halvings + 1, s.norm_cap).map_err(RunError::failed)?;
        out.put("t_est_cauchy", study.cauchy);
        report["blowup_study"] = serde_json::to_value(&study).map_err(RunError::failed)?;
    }
    out.write_json(dir, "verdict.json", &report)?;
    if s.save {
        traj.save(&dir.join("trajectory")).map_err(RunError::failed)?;
        out.artifacts.extend(["trajectory/config.json", "trajectory/snapshots.csv", "trajectory/status.json"].map(String::from));
    }
    Ok(())
}

fn record_verdict(out: &mut Outcome, v: &Verdict) {
    match v {
        Verdict::GlobalBounded { max_norm } => {
            out.put("verdict", "global_bounded");
            out.put("max_critical_norm", *max_norm);
        }
        Verdict::Blowup { t_est } => {
            out.put("verdict", "blowup");
            out.put("t_est", *t_est);
        }
        Verdict::Undecided { .. } => out.put("verdict", "undecided"),
    }
}

// ----------------------------------------------------------------- soliton

#[derive(Debug, Clone)]
pub struct SolitonSpec {
    pub p: f64,
    pub big_r: f64,
    pub r_min: f64,
    pub tol: f64,
    pub truncation_radius: Option<f64>,
    pub window: Option<f64>,
    pub diagnostics: bool,
}

fn soliton_spec(p: &Params, tol: Option<f64>) -> Result<SolitonSpec, RunError> {
    let pp = p.f64("p", 4.0)?;
    if !(pp > 3.0 && pp <= 5.0) {
        return Err(p.err("p", format!("must satisfy 3 < p <= 5, got {pp}")));
    }
    let big_r = p.f64("R", default_tail_radius(pp))?;
    let bound = contraction_bound(pp, big_r);
    if !(big_r > 0.0 && bound < 0.5) {
        return Err(p.err("R", format!("contraction bound {bound:.3} at R = {big_r} is not below 1/2; try R >= {}", default_tail_radius(pp))));
    }
    let r_min = p.f64("r_min", 1e-4 * big_r)?;
    if !(r_min > 0.0 && r_min < big_r) {
        return Err(p.err("r_min", format!("must lie in (0, R), got {r_min}")));
    }
    let tol = p.f64("tol", tol.unwrap_or(1e-13))?;
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(p.err("tol", "must lie in (0, 1e-2)"));
    }
    let truncation_radius = p.opt_f64("truncation_radius")?;
    if let Some(r) = truncation_radius {
        if !(r >= r_min) {
            return Err(p.err("truncation_radius", format!("must be at least r_min = {r_min}")));
        }
    }
    let window = p.opt_f64("window")?;
    if let Some(w) = window {
        if !(w > 0.0) {
            return Err(p.err("window", "must be positive"));
        }
    }
    let diagnostics = p.bool("diagnostics", true)?;
    Ok(SolitonSpec { p: pp, big_r, r_min, tol, truncation_radius, window, diagnostics })
}

/// The explicit `p = 5` ground state normalized like the constructed tail.
pub fn ground_state_p5(r: f64) -> f64 {
    3f64.sqrt() / (1.0 + 3.0 * r * r).sqrt()
}

fn run_soliton(s: &SolitonSpec, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    let prof = construct(s.p, s.big_r, s.r_min, s.tol).map_err(RunError::failed)?;
    let residual = prof.residual();
    let explicit = s.p == 5.0;
    let mut csv = String::from(if explicit { "r,y,yp,residual,exact,rel_error\n" } else { "r,y,yp,residual\n" });
    let mut worst: f64 = 0.0;
    for i in 0..prof.y.len() {
        let r = prof.radii()[i];
        let _ = write!(csv, "{},{},{},{}", num(r), num(prof.y[i]), num(prof.yp[i]), num(residual[i]));
        if explicit {
            let w = ground_state_p5(r);
            let rel = (prof.y[i] - w).abs() / w;
            if (1e-2 * (1.0 - 1e-12)..=1e2).contains(&r) {
                worst = worst.max(rel);
            }
            let _ = write!(csv, ",{},{}", num(w), num(rel));
        }
        csv.push('\n');
    }
    out.write(dir, "profile.csv", &csv)?;
    out.put("p", s.p);
    out.put("R", s.big_r);
    out.put("max_interior_residual", prof.max_interior_residual());
    if explicit {
        out.put("max_relative_error", worst);
        out.check(worst < 1e-6, format!("p = 5 profile deviates from the explicit ground state by {worst:e} (limit 1e-6)"));
    }
    if s.diagnostics {
        match soliton_diagnostics(&prof) {
            Ok(d) => {
                out.put("singular", d.singular);
                out.put("divergent", d.divergent);
                out.write_json(dir, "diagnostics.json", &d)?;
            }
            Err(e) => out.put("diagnostics_skipped", e.to_string()),
        }
    }
    if let Some(r) = s.truncation_radius {
        let v = truncated_soliton(Arc::new(prof), r).map_err(RunError::failed)?;
        let n = v.norms(s.window).map_err(RunError::failed)?;
        out.put("y_norm", n.y_norm);
        out.put("companion_norm", n.companion_norm);
        out.write_json(dir, "vr_norms.json", &n)?;
    }
    Ok(())
}

// ------------------------------------------------------------------- norms

#[derive(Debug, Clone)]
pub enum NormSource {
    Trajectory(PathBuf),
    Simulate(Box<SimSpec>),
}

#[derive(Debug, Clone)]
pub struct NormsSpec {
    pub source: NormSource,
    pub kinds: Vec<String>,
    pub s: Option<f64>,
    pub q: f64,
    pub r: f64,
    pub interval: Option<(f64, f64)>,
}

fn norms_spec(p: &Params, _cfg: &ExperimentConfig) -> Result<NormsSpec, RunError> {
    let source = match p.choice("source", "simulate", &["simulate", "trajectory"])?.as_str() {
        "trajectory" => {
            let path = p.opt_string("trajectory")?.ok_or_else(|| p.err("trajectory", "required when source = \"trajectory\""))?;
            NormSource::Trajectory(PathBuf::from(path))
        }
        _ => {
            let table = match p.raw("simulate") {
                Some(Value::Table(t)) => t,
                Some(_) => return Err(p.err("simulate", "must be a table")),
                None => Table::new(),
            };
            let inner = Params::new(&p.path("simulate"), table);
            let mut spec = sim_spec(&inner)?;
            inner.finish()?;
            spec.save = false;
            NormSource::Simulate(Box::new(spec))
        }
    };
    let kinds = p.string_list("kinds", &["S", "W", "Y"])?;
    for (i, k) in kinds.iter().enumerate() {
        if !["S", "W", "Y", "Z", "lqlr"].contains(&k.as_str()) {
            return Err(RunError::invalid(format!("{}[{i}]", p.path("kinds")), format!("unknown norm `{k}`, expected S, W, Y, Z or lqlr")));
        }
    }
    let s = p.opt_f64("s")?;
    let q = p.f64("q", 4.0)?;
    let r = p.f64("r", 4.0)?;
    if !(q >= 1.0 && r >= 1.0) {
        return Err(p.err("q", "q and r must be at least 1"));
    }
    let interval = match p.opt_f64_list("interval")? {
        None => None,
        Some(v) if v.len() == 2 && v[1] > v[0] => Some((v[0], v[1])),
        Some(_) => return Err(p.err("interval", "must be [a, b] with a < b")),
    };
    Ok(NormsSpec { source, kinds, s, q, r, interval })
}

fn run_norms(s: &NormsSpec, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    let traj = match &s.source {
        NormSource::Trajectory(path) => Trajectory::load(path).map_err(|e| RunError::invalid("norms.trajectory", format!("{}: {e}", path.display())))?,
        NormSource::Simulate(spec) => evolve(&spec.data()?, &spec.cfg).map_err(RunError::failed)?,
    };
    let sp = s.s.unwrap_or_else(|| critical_index(traj.config.p));
    let kinds: Vec<NormKind> = s
        .kinds
        .iter()
        .map(|k| match k.as_str() {
            "S" => NormKind::S,
            "W" => NormKind::W,
            "Y" => NormKind::Y { s: sp },
            "Z" => NormKind::Z { s: sp },
            _ => NormKind::LqLr { q: s.q, r: s.r },
        })
        .collect();
    let values = spacetime_norms(&traj, &kinds, s.interval).map_err(RunError::failed)?;
    let mut csv = String::from("kind,q,r,t0,t1,samples,value,time_error\n");
    for (name, v) in s.kinds.iter().zip(&values) {
        let _ = writeln!(csv, "{name},{},{},{},{},{},{},{}", num(v.q), num(v.r), num(v.interval.0), num(v.interval.1), v.samples, num(v.value), num(v.time_error));
        out.put(&format!("norm_{name}"), v.value);
    }
    out.write(dir, "norms.csv", &csv)?;
    out.write_json(dir, "norms.json", &values)?;
    Ok(())
}

// ------------------------------------------------------------------ ladder

fn run_ladder(p: f64, beta0: f64, lattice: usize, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    let st = decay_ladder(p, beta0).map_err(RunError::failed)?;
    let shape = g_shape(lattice);
    out.write(dir, "ladder.csv", &st.to_csv())?;
    out.write_json(dir, "ladder.json", &json!({ "p": p, "beta0": beta0, "steps": st.steps(), "reached": st.reached, "final_beta": st.beta.last(), "g_shape": shape, "g_shape_holds": shape.holds() }))?;
    out.put("steps", st.steps() as u64);
    out.put("final_beta", *st.beta.last().unwrap_or(&beta0));
    out.check(st.reached, "ladder did not reach 1 - 1e-6");
    out.check(st.increments.iter().take(st.steps()).all(|d| *d > 0.0), "nonpositive ladder increment");
    out.check(shape.holds(), "g fails the convexity/range lattice test");
    Ok(())
}

// ----------------------------------------------------------------- channel

#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub u_bumps: Vec<[f64; 3]>,
    pub ut_bumps: Vec<[f64; 3]>,
    pub big_r: f64,
    pub times: Vec<f64>,
    pub r_max: f64,
    pub h: f64,
}

fn bumps(p: &Params, key: &str, default: &[f64]) -> Result<Vec<[f64; 3]>, RunError> {
    let v = p.f64_list(key, default)?;
    if v.len() % 3 != 0 {
        return Err(p.err(key, "must list (a, b, amplitude) triples"));
    }
    let out: Vec<[f64; 3]> = v.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    if let Some(i) = out.iter().position(|c| !(c[0] >= 0.0 && c[1] > c[0])) {
        return Err(RunError::invalid(format!("{}[{}]", p.path(key), 3 * i), "each bump needs 0 <= a < b"));
    }
    Ok(out)
}

fn channel_spec(p: &Params) -> Result<ChannelSpec, RunError> {
    let u_bumps = bumps(p, "u", &[0.5, 3.0, 1.0])?;
    let ut_bumps = bumps(p, "ut", &[])?;
    let big_r = p.f64("R", 1.0)?;
    if !(big_r > 0.0) {
        return Err(p.err("R", "must be positive"));
    }
    let times = p.f64_list("times", &SUITE_TIMES)?;
    if let Some(i) = times.iter().position(|t| !(*t > 0.0)) {
        return Err(RunError::invalid(format!("{}[{i}]", p.path("times")), "times must be positive"));
    }
    let support = u_bumps.iter().chain(&ut_bumps).map(|c| c[1]).fold(0.0, f64::max);
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let need = (support + t_max).max(big_r + t_max) + 1.0;
    let r_max = p.f64("r_max", need)?;
    if !(r_max >= need - 1.0 + 1e-9) {
        return Err(p.err("r_max", format!("must exceed the support plus the largest time, {}", need - 1.0)));
    }
    let h = p.f64("h", 1.0 / 256.0)?;
    if !(h > 0.0 && h < r_max / 8.0) {
        return Err(p.err("h", "must lie in (0, r_max/8)"));
    }
    Ok(ChannelSpec { u_bumps, ut_bumps, big_r, times, r_max, h })
}

fn run_channel(s: &ChannelSpec, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    let grid = Arc::new(RadialGrid::uniform_from_origin(s.r_max, s.h).map_err(RunError::failed)?);
    let eval = |b: &[[f64; 3]], r: f64| b.iter().map(|c| c[2] * bump(r, c[0], c[1])).sum::<f64>();
    let data = FieldPair::from_fn(grid, |r| eval(&s.u_bumps, r), |r| eval(&s.ut_bumps, r));
    match channel_check(&data, s.big_r, &s.times) {
        Ok(rep) => {
            out.put("direction", serde_json::to_value(rep.direction).map_err(RunError::failed)?);
            out.put("worst_margin", rep.worst_margin);
            out.write_json(dir, "channel.json", &rep)?;
        }
        Err(ChannelError::Failed { forward, backward, report }) => {
            out.write_json(dir, "channel.json", &report)?;
            out.check(false, format!("channel bound fails in both directions (worst margins {forward:e} / {backward:e})"));
        }
        Err(e) => return Err(RunError::failed(e)),
    }
    Ok(())
}

// ------------------------------------------------------------------ verify

pub const VERIFY_TARGETS: [&str; 7] = ["channel", "reduction", "constants", "ladder", "recurrence", "soliton", "energy"];

#[derive(Debug, Clone)]
pub struct VerifySpec {
    pub target: String,
    pub n: usize,
    pub p: f64,
    pub h: f64,
}

fn verify_spec(p: &Params, cfg: &ExperimentConfig) -> Result<VerifySpec, RunError> {
    let target = match (cfg.target.clone(), p.opt_string("target")?) {
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(RunError::invalid("target", format!("missing; expected one of {}", VERIFY_TARGETS.join(", ")))),
    };
    if !VERIFY_TARGETS.contains(&target.as_str()) {
        return Err(RunError::invalid("target", format!("unknown target `{target}`, expected one of {}", VERIFY_TARGETS.join(", "))));
    }
    let default_n = match target.as_str() {
        "channel" => 100,
        "reduction" => 20,
        _ => 0,
    };
    let n = p.usize("n", default_n)?;
    let pp = p.f64("p", if target == "soliton" { 5.0 } else { 4.0 })?;
    if !(pp > 3.0 && pp <= 5.0) {
        return Err(p.err("p", format!("must satisfy 3 < p <= 5, got {pp}")));
    }
    if target == "soliton" && pp != 5.0 {
        return Err(p.err("p", "the explicit comparison exists only for p = 5"));
    }
    if target == "constants" && pp == 5.0 {
        return Err(p.err("p", "regularity constants need p < 5"));
    }
    let h = p.f64("h", 0.01)?;
    if !(h > 0.0 && h <= 0.1) {
        return Err(p.err("h", "must lie in (0, 0.1]"));
    }
    Ok(VerifySpec { target, n, p: pp, h })
}

fn run_verify(s: &VerifySpec, cfg: &ExperimentConfig, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    match s.target.as_str() {
        "channel" => {
            let cases = channel_suite(cfg.seed, s.n);
            let passed = cases.iter().filter(|c| c.report.is_some()).count();
            out.put("cases", s.n as u64);
            out.put("passed", passed as u64);
            out.write_json(dir, "channel_report.json", &json!({ "seed": cfg.seed, "n": s.n, "passed": passed, "entries": cases }))?;
            out.check(passed == s.n, format!("{} of {} channel cases failed", s.n - passed, s.n));
        }
        "reduction" => verify_reduction(s, cfg.seed, dir, out)?,
        "constants" => {
            let p = radial_nlw::analysis::rational(s.p).map_err(|e| RunError::invalid("verify.p", e.to_string()))?;
            let c = regularity_constants(p).map_err(RunError::failed)?;
            out.write_json(dir, "constants.json", &c.to_json())?;
            out.put("s_p", c.s_p.to_string());
            out.put("kappa", c.kappa.to_string());
            out.put("sigma", c.sigma.to_string());
            out.put("sigma1", c.sigma1.to_string());
            out.put("sigma2", c.sigma2.to_string());
            out.check(c.sigma2 <= c.sigma1, "sigma2 exceeds sigma1");
            out.check(c.kappa > Rational64::from_integer(0) && c.kappa < Rational64::new(2, 5), "kappa outside (0, 2/5)");
            out.check(c.s_pair.admissible, "the interpolation pair is not admissible");
        }
        "ladder" => {
            let ps = if s.p == 4.0 { vec![3.5, 4.0, 4.5] } else { vec![s.p] };
            let mut rows = vec![];
            for p in ps {
                let st = decay_ladder(p, 2.0 / (p - 1.0)).map_err(RunError::failed)?;
                out.check(st.reached && st.increments.iter().take(st.steps()).all(|d| *d > 0.0), format!("ladder at p = {p} failed"));
                rows.push(json!({ "p": p, "steps": st.steps(), "reached": st.reached, "final_beta": st.beta.last() }));
            }
            let shape = g_shape(10_000);
            out.check(shape.holds(), "g fails the convexity/range lattice test");
            out.write_json(dir, "ladder_report.json", &json!({ "runs": rows, "g_shape": shape }))?;
        }
        "recurrence" => {
            let params = |omega| Recurrence { alpha: 1.0 / 3.0, beta: 2.0 / 3.0, l: 3.0, omega, c: 2.0, ln_a_min: 1.0, ln_a_max: 400.0 };
            let power = recurrence_decay_check(&|x: f64| (-0.5 * x).exp(), params(0.5)).map_err(RunError::failed)?;
            let slow = recurrence_decay_check(&|x: f64| 1.0 / x, params(0.04)).map_err(RunError::failed)?;
            out.check(matches!(power.verdict, RecurrenceVerdict::Decays { .. }), "power law not verified");
            out.check(matches!(slow.verdict, RecurrenceVerdict::PremiseViolated { .. }), "1/ln A not rejected");
            out.write_json(dir, "recurrence_report.json", &json!({ "power_law": power, "inverse_log": slow }))?;
        }
        "soliton" => {
            let spec = SolitonSpec { p: 5.0, big_r: 10.0, r_min: 1e-2, tol: cfg.tol.unwrap_or(1e-14), truncation_radius: None, window: None, diagnostics: false };
            run_soliton(&spec, dir, out)?;
        }
        "energy" => {
            let mut cfg5 = EvolutionConfig::new(s.p, Sign::Defocusing, 5.0);
            cfg5.snapshot_interval = Some(0.05);
            let spec = SimSpec { cfg: cfg5, amplitude: 1.0, velocity: 0.0, width: 1.0, r_max: 12.0, h: s.h, norm_cap: 1e3, halvings: 0, save: false };
            let traj = evolve(&spec.data()?, &spec.cfg).map_err(RunError::failed)?;
            let drift = traj.energy_drift();
            out.put("energy", traj.energies[0]);
            out.put("energy_drift", drift);
            out.write_json(dir, "energy_report.json", &json!({ "h": s.h, "energy": traj.energies[0], "drift": drift }))?;
            out.check(drift < 1e-4, format!("energy drift {drift:e} exceeds 1e-4"));
        }
        _ => unreachable!("target validated in plan"),
    }
    Ok(())
}

fn verify_reduction(s: &VerifySpec, seed: u64, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    let grid = Arc::new(RadialGrid::uniform_from_origin(8.0, 8.0 / 4096.0).map_err(RunError::failed)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![];
    for k in 0..s.n {
        let (a, b, c) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.2..2.0), rng.gen_range(-2.0..2.0));
        let (lo, hi) = (rng.gen_range(0.1..1.0), rng.gen_range(1.5..6.0));
        let f = FieldPair::from_fn(grid.clone(), |r| a * (-b * r * r).exp() + c * bump(r, 0.5, 4.0), |r| c * (-b * r * r).exp());
        let res = f.reduction_identity_residual(lo, hi).map_err(RunError::failed)?;
        out.check(res < 1e-6, format!("case {k}: residual {res:e}"));
        rows.push(json!({ "case": k, "a": lo, "b": hi, "residual": res }));
    }
    // u = 1/r on [1, 2]: both sides equal 1/2
    let shifted = Arc::new(RadialGrid::new(0.5, 4.0, 4097, radial_nlw::Spacing::Uniform).map_err(RunError::failed)?);
    let f = FieldPair::from_fn(shifted, |r| 1.0 / r, |_| 0.0);
    let res = f.reduction_identity_residual(1.0, 2.0).map_err(RunError::failed)?;
    out.check(res < 1e-6, format!("u = 1/r: residual {res:e}"));
    rows.push(json!({ "case": "inverse_r", "a": 1.0, "b": 2.0, "residual": res }));
    let worst = rows.iter().filter_map(|r| r["residual"].as_f64()).fold(0.0, f64::max);
    out.put("max_residual", worst);
    out.write_json(dir, "reduction_report.json", &rows)?;
    Ok(())
}

// ------------------------------------------------------------------- sweep

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: String,
    pub axis: String,
    pub values: Vec<Value>,
    pub jobs: Vec<Job>,
    pub fit: bool,
}

fn sweep_spec(p: &Params, cfg: &ExperimentConfig) -> Result<SweepSpec, RunError> {
    let base = p.opt_string("base")?.ok_or_else(|| p.err("base", "missing"))?;
    if !crate::config::COMMANDS.contains(&base.as_str()) || base == "sweep" {
        return Err(p.err("base", format!("unknown or unsweepable command `{base}`")));
    }
    let axis = p.opt_string("axis")?.ok_or_else(|| p.err("axis", "missing"))?;
    let values = match p.raw("values") {
        Some(Value::Array(a)) => a,
        Some(_) => return Err(p.err("values", "must be a list")),
        None => return Err(p.err("values", "missing")),
    };
    for (i, v) in values.iter().enumerate() {
        if !matches!(v, Value::Integer(_) | Value::Float(_) | Value::String(_) | Value::Boolean(_)) {
            return Err(RunError::invalid(format!("{}[{i}]", p.path("values")), "sweep values must be scalars"));
        }
    }
    let fit = p.bool("fit", false)?;
    let base_table = cfg.section(&base);
    let mut jobs = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let mut t = base_table.clone();
        t.insert(axis.clone(), v.clone());
        let job = plan_command(&base, t, cfg, false).map_err(|e| match e {
            RunError::Invalid { path, msg } if path == format!("{base}.{axis}") && msg == "unknown parameter" => {
                p.err("axis", format!("`{axis}` is not a parameter of {base}"))
            }
            RunError::Invalid { path, msg } => RunError::invalid(format!("{}[{i}] -> {path}", p.path("values")), msg),
            other => other,
        })?;
        jobs.push(job);
    }
    Ok(SweepSpec { base, axis, values, jobs, fit })
}

fn label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Float(x) => num(*x),
        other => other.to_string(),
    }
}

fn cell(v: &Json) -> String {
    match v {
        Json::String(s) => s.clone(),
        Json::Null => String::new(),
        other => other.to_string(),
    }
}

fn run_sweep(s: &SweepSpec, cfg: &ExperimentConfig, dir: &Path, out: &mut Outcome) -> Result<(), RunError> {
    // each job owns its subdirectory; the merge below is the single writer
    let results: Vec<(String, Result<Outcome, RunError>)> = s
        .values
        .par_iter()
        .zip(&s.jobs)
        .map(|(v, job)| {
            let name = format!("{}={}", s.axis, label(v));
            let sub = dir.join(&name);
            let res = fs::create_dir_all(&sub).map_err(RunError::failed).and_then(|_| execute(job, cfg, &sub));
            (name, res)
        })
        .collect();
    let mut columns: Vec<String> = vec![];
    for (_, r) in &results {
        if let Ok(o) = r {
            for k in o.summary.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
    }
    columns.sort();
    let mut header = vec![s.axis.clone(), "status".to_string()];
    header.extend(columns.iter().cloned());
    let mut csv = header.join(",") + "\n";
    let mut numeric: Vec<Vec<Option<f64>>> = vec![vec![]; columns.len()];
    let mut xs = vec![];
    for ((v, (name, r)), _) in s.values.iter().zip(&results).zip(&s.jobs) {
        let (status, summary) = match r {
            Ok(o) if o.failures.is_empty() => ("ok".to_string(), Some(&o.summary)),
            Ok(o) => {
                out.failures.extend(o.failures.iter().map(|f| format!("{name}: {f}")));
                ("verification_failed".to_string(), Some(&o.summary))
            }
            Err(e) => {
                out.failures.push(format!("{name}: {e}"));
                ("error".to_string(), None)
            }
        };
        let cells: Vec<String> = columns.iter().map(|c| summary.and_then(|m| m.get(c)).map(cell).unwrap_or_default()).collect();
        let mut row = vec![label(v), status];
        row.extend(cells);
        let _ = writeln!(csv, "{}", row.join(","));
        if let Ok(o) = r {
            out.artifacts.extend(o.artifacts.iter().map(|a| format!("{name}/{a}")));
        }
        xs.push(crate::config::number(v));
        for (j, c) in columns.iter().enumerate() {
            numeric[j].push(summary.and_then(|m| m.get(c)).and_then(Json::as_f64));
        }
    }
    if s.fit && s.values.len() >= 2 {
        let slopes: Vec<String> = numeric.iter().map(|col| loglog_slope(&xs, col).map(num).unwrap_or_default()).collect();
        let mut row = vec!["fit".to_string(), "loglog_slope".to_string()];
        row.extend(slopes);
        let _ = writeln!(csv, "{}", row.join(","));
        for (c, col) in columns.iter().zip(&numeric) {
            if let Some(v) = loglog_slope(&xs, col) {
                out.put(&format!("slope_{c}"), v);
            }
        }
    }
    out.put("runs", s.values.len() as u64);
    out.put("base", s.base.clone());
    out.write(dir, "summary.csv", &csv)?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`, when every pair is
/// positive and finite and `y` is not constant.
fn loglog_slope(xs: &[Option<f64>], ys: &[Option<f64>]) -> Option<f64> {
    if ys.windows(2).all(|w| w[0] == w[1]) {
        return None;
    }
    let mut a = vec![];
    let mut b = vec![];
    for (x, y) in xs.iter().zip(ys) {
        match (x, y) {
            (Some(x), Some(y)) if *x > 0.0 && *y > 0.0 && y.is_finite() => {
                a.push(x.ln());
                b.push(y.ln());
            }
            _ => return None,
        }
    }
    if a.len() < 2 || a.iter().all(|v| (*v - a[0]).abs() < 1e-300) {
        return None;
    }
    Some(radial_nlw::numerics::fit_slope(&a, &b))
}
