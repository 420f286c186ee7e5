//! Run configuration and the end-to-end construction: profile, cylinder, the two
//! stable states, the mountain-pass path and its minimax, then free-boundary
//! extraction, asymptotic fits and the blow-up on a refined copy of the pass state.

use crate::error::{Error, Result};
use crate::flow::{flow_for, relax, FlowConfig, FlowReport, Scheme};
use crate::freeboundary::{
    blowup, boundary_mean_curvature, extract, fit_asymptote, residual_decay, theorem_shape_checks, vertical_gap,
    AsymptoticFit, DecayCheck, FitModel, FitParams, GapReport, ShapeReport, Side,
};
use crate::grid::{build_domain_with, write_binary, Field, GridInfo};
use crate::mountainpass::{build_path, coarea_bound, minimax, vertical_initial, MinimaxConfig, PathConfig};
use crate::potential::Model;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// One flat JSON document; every key is optional and defaults to the smoke run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: usize,
    pub k: f64,
    pub eps: f64,
    pub a: f64,
    pub nr: usize,
    pub nz: usize,
    pub scheme: Scheme,
    pub dt: Option<f64>,
    pub steady_tol: Option<f64>,
    pub max_steps: usize,
    pub check_every: usize,
    pub members: usize,
    pub neck_split: f64,
    pub cutoff: f64,
    pub first_block: f64,
    pub block: f64,
    pub rounds: usize,
    pub refine: usize,
    pub plateau: f64,
    pub window: usize,
    /// Refined grid for the free-boundary stages; defaults give `hr <= ε/2`, `hz <= ε/4`.
    pub polish_nr: Option<usize>,
    pub polish_nz: Option<usize>,
    pub polish_time: f64,
    /// Extraction level `1 - θ`; defaults to `θ = ε/2`.
    pub theta: Option<f64>,
    /// Defaults to `[0.3a, 0.8a]`.
    pub fit_window: Option<[f64; 2]>,
    /// Residual decay is compared on `[R, 2R]` and `[2R, 4R]`; defaults to `R = 0.2a`.
    pub decay_r0: Option<f64>,
    pub blowup_scale: f64,
    pub output_dir: PathBuf,
    pub write_fields: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let flow = FlowConfig::default();
        let path = PathConfig::default();
        let mm = MinimaxConfig::default();
        RunConfig {
            n: 3,
            k: 1.0,
            eps: 0.1,
            a: 8.0,
            nr: 128,
            nz: 96,
            scheme: flow.scheme,
            dt: None,
            steady_tol: None,
            max_steps: flow.max_steps,
            check_every: 2000,
            members: path.members,
            neck_split: path.neck_split,
            cutoff: path.cutoff,
            first_block: mm.first_block,
            block: mm.block,
            rounds: mm.rounds,
            refine: mm.refine,
            plateau: mm.plateau,
            window: mm.window,
            polish_nr: None,
            polish_nz: None,
            polish_time: 0.3,
            theta: None,
            fit_window: None,
            decay_r0: None,
            blowup_scale: 2.0,
            output_dir: PathBuf::from("out"),
            write_fields: true,
        }
    }
}

impl RunConfig {
    pub fn flow(&self) -> FlowConfig {
        FlowConfig {
            scheme: self.scheme,
            dt: self.dt,
            steady_tol: self.steady_tol,
            max_steps: self.max_steps,
            check_every: self.check_every,
            ..FlowConfig::default()
        }
    }

    pub fn path(&self) -> PathConfig {
        PathConfig { members: self.members, neck_split: self.neck_split, cutoff: self.cutoff, ..PathConfig::default() }
    }

    pub fn minimax(&self) -> MinimaxConfig {
        MinimaxConfig {
            first_block: self.first_block,
            block: self.block,
            rounds: self.rounds,
            refine: self.refine,
            plateau: self.plateau,
            window: self.window,
            ..MinimaxConfig::default()
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(0.5 * self.eps)
    }

    pub fn fit_window(&self) -> (f64, f64) {
        self.fit_window.map(|[lo, hi]| (lo, hi)).unwrap_or((0.3 * self.a, 0.8 * self.a))
    }

    pub fn decay_r0(&self) -> f64 {
        self.decay_r0.unwrap_or(0.2 * self.a)
    }

    /// Checks every field and reports all offending keys at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        let mut check = |ok: bool, key: &str, why: &str| {
            if !ok {
                bad.push(format!("{key} ({why})"));
            }
        };
        check(self.n >= 3, "n", "dimension must be at least 3");
        check(self.k > 0.0 && self.k.is_finite(), "k", "must be positive");
        check(self.eps > 0.0 && self.eps <= 0.25, "eps", "must lie in (0, 0.25]");
        check(self.a > 2.0 * self.k && self.a.is_finite(), "a", "must exceed 2k");
        check(self.nr >= 16, "nr", "need at least 16 cells");
        check(self.nz >= 16, "nz", "need at least 16 cells");
        check(self.dt.is_none_or(|v| v > 0.0), "dt", "must be positive");
        check(self.steady_tol.is_none_or(|v| v > 0.0), "steady_tol", "must be positive");
        check(self.max_steps > 0, "max_steps", "must be positive");
        check(self.check_every > 0, "check_every", "must be positive");
        check(self.members >= 2, "members", "need at least 2 intervals");
        check(self.neck_split > 0.0 && self.neck_split < 1.0, "neck_split", "must lie in (0, 1)");
        check(self.cutoff > 0.0, "cutoff", "must be positive");
        check(self.first_block > 0.0, "first_block", "must be positive");
        check(self.block > 0.0, "block", "must be positive");
        check(self.plateau > 0.0, "plateau", "must be positive");
        check(self.polish_nr.is_none_or(|v| v >= 16), "polish_nr", "need at least 16 cells");
        check(self.polish_nz.is_none_or(|v| v >= 16), "polish_nz", "need at least 16 cells");
        check(self.polish_time >= 0.0, "polish_time", "must be non-negative");
        check(self.theta.is_none_or(|t| t > 0.0 && t < 1.0), "theta", "must lie in (0, 1)");
        check(
            self.fit_window.is_none_or(|[lo, hi]| lo > 0.0 && hi > lo && hi <= self.a),
            "fit_window",
            "need 0 < lo < hi <= a",
        );
        check(self.decay_r0.is_none_or(|r| r > 0.0 && 4.0 * r <= self.a), "decay_r0", "need 0 < 4R <= a");
        check(self.blowup_scale > 0.0, "blowup_scale", "must be positive");
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid keys: {}", bad.join(", "))))
        }
    }
}

/// Parses and validates a config file; unknown keys are all listed in the error.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("not valid JSON: {e}")))?;
    let obj = value.as_object().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
    let known = serde_json::to_value(RunConfig::default())?;
    let known = known.as_object().expect("struct serializes to an object");
    let unknown: Vec<&str> = obj.keys().filter(|k| !known.contains_key(*k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn emit_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(cfg)? + "\n")?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileSummary {
    pub eps: f64,
    pub t_eps: f64,
    pub e_eps: f64,
    pub delta_eps: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateSummary {
    pub energy: f64,
    pub steps: usize,
    pub residual: f64,
    pub steady: bool,
}

impl StateSummary {
    fn from_report(rep: &FlowReport) -> Self {
        StateSummary { energy: rep.final_energy(), steps: rep.steps, residual: rep.final_residual(), steady: rep.steady() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathSummary {
    pub initial_energy_u2: f64,
    pub members: usize,
    pub max_energy: f64,
    /// `max E - a²e/2 - (e/2)k² ln a` over the unflowed path.
    pub c_measured: f64,
    pub max_gradient: f64,
    pub min_order_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimaxSummary {
    pub c_star: f64,
    /// `c* - a²e/2`.
    pub excess: f64,
    pub argmax_s: f64,
    pub history: Vec<(usize, f64)>,
    pub pass_residual: f64,
    pub endpoint_energies: (f64, f64),
    pub coarea_energy: f64,
    /// `2 ∫_0^1 A(s) √F(s) ds`.
    pub coarea_half: f64,
    /// `2 ∫_{-1}^1 A(s) √F(s) ds`.
    pub coarea_full: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeBoundarySummary {
    pub polish_grid: GridInfo,
    pub polish_energy: f64,
    pub theta: f64,
    pub samples_minus: usize,
    pub samples_plus: usize,
    pub fit_minus: AsymptoticFit,
    pub fit_plus: AsymptoticFit,
    pub decay: DecayCheck,
    pub gap: GapReport,
    pub min_curvature: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupSummary {
    pub rho_k: f64,
    pub h: f64,
    pub gradient_mean: f64,
    pub gradient_min: f64,
    pub gradient_max: f64,
    pub interior_max_gradient: f64,
    pub shape: ShapeReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub config: RunConfig,
    pub grid: GridInfo,
    pub profile: ProfileSummary,
    pub u1: StateSummary,
    pub u2: StateSummary,
    pub path: PathSummary,
    pub minimax: MinimaxSummary,
    pub free_boundary: FreeBoundarySummary,
    pub blowup: BlowupSummary,
    pub checks: Vec<CheckRecord>,
    pub timings: Vec<StageTiming>,
    pub wall_clock: f64,
}

impl PipelineReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn emit_report(report: &PipelineReport, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

struct Clock {
    start: Instant,
    last: Instant,
    timings: Vec<StageTiming>,
}

impl Clock {
    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.timings.push(StageTiming { stage, seconds: (now - self.last).as_secs_f64() });
        log::info!("stage {stage} done in {:.1} s", (now - self.last).as_secs_f64());
        self.last = now;
    }
}

fn check(out: &mut Vec<CheckRecord>, name: &str, value: f64, bound: String, pass: bool) {
    out.push(CheckRecord { name: name.into(), value, bound, pass });
}

/// Runs every stage and writes the artifacts into `cfg.output_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut clock = Clock { start, last: start, timings: Vec::new() };
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out)?;
    emit_config(cfg, &out.join("config.json"))?;
    let save = |u: &Field, name: &str| -> Result<()> {
        if cfg.write_fields {
            write_binary(u, &out.join(name))?;
        }
        Ok(())
    };

    let model = Arc::new(Model::new(cfg.eps).map_err(|e| e.at("profile"))?);
    let grid = build_domain_with(model.clone(), cfg.n, cfg.a, cfg.k, cfg.nr, cfg.nz).map_err(|e| e.at("domain"))?;
    if grid.hz > 0.25 {
        return Err(Error::Config(format!("nz ({} gives hz = {:.3} > 0.25)", cfg.nz, grid.hz)));
    }
    if grid.hz > 0.25 * cfg.eps {
        log::warn!(
            "hz = {:.4} exceeds eps/4 = {:.4}; the free-boundary stages use the refined grid",
            grid.hz,
            0.25 * cfg.eps
        );
    }
    let profile =
        ProfileSummary { eps: cfg.eps, t_eps: model.profile.t_eps, e_eps: model.e_eps, delta_eps: grid.delta_eps };
    clock.lap("profile");

    let flow = cfg.flow();
    let (u1, r1) = relax(&Field::omega_extension(&grid), &flow).map_err(|e| e.at("relax_u1"))?;
    save(&u1, "u1.bin")?;
    clock.lap("relax_u1");

    let path_cfg = cfg.path();
    let big = vertical_initial(&u1, &path_cfg).map_err(|e| e.at("build_u2"))?;
    let big_energy = big.energy();
    let (u2, r2) = relax(&big, &flow).map_err(|e| e.at("relax_u2"))?;
    save(&u2, "u2.bin")?;
    clock.lap("relax_u2");

    let e = model.e_eps;
    let base = 0.5 * cfg.a.powi(cfg.n as i32 - 1) * e;
    let log_term = 0.5 * e * cfg.k * cfg.k * cfg.a.ln();
    let path = build_path(&u1, &u2, &path_cfg).map_err(|e| e.at("path"))?;
    let path_max = path.energies().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let path_summary = PathSummary {
        initial_energy_u2: big_energy,
        members: path.len(),
        max_energy: path_max,
        c_measured: path_max - base - log_term,
        max_gradient: path.max_gradient(),
        min_order_gap: path.min_order_gap(),
    };
    clock.lap("path");

    let mm = minimax(&path, &flow, &cfg.minimax()).map_err(|e| e.at("minimax"))?;
    save(&mm.pass_state, "pass_state.bin")?;
    std::fs::write(out.join("rounds.json"), serde_json::to_string_pretty(&mm.rounds)? + "\n")?;
    let (coarea_energy, coarea_half, coarea_full) = coarea_bound(&mm.pass_state, 20).map_err(|e| e.at("coarea"))?;
    let mm_summary = MinimaxSummary {
        c_star: mm.c_star,
        excess: mm.c_star - base,
        argmax_s: mm.argmax_s,
        history: mm.history.clone(),
        pass_residual: mm.pass_state.residual_norm(),
        endpoint_energies: mm.endpoint_energies,
        coarea_energy,
        coarea_half,
        coarea_full,
    };
    clock.lap("minimax");

    let pnr = cfg.polish_nr.unwrap_or((2.0 * cfg.a / cfg.eps).ceil() as usize);
    let pnz = cfg.polish_nz.unwrap_or((4.0 * grid.b_eps / cfg.eps).ceil() as usize);
    let fine = build_domain_with(model.clone(), cfg.n, cfg.a, cfg.k, pnr, pnz).map_err(|e| e.at("polish"))?;
    let moved = mm.pass_state.resample(&fine).map_err(|e| e.at("polish"))?;
    let polished = if cfg.polish_time > 0.0 {
        flow_for(&moved, &FlowConfig { check_every: 500, ..FlowConfig::default() }, cfg.polish_time)
            .map_err(|e| e.at("polish"))?
            .0
    } else {
        moved
    };
    save(&polished, "polished.bin")?;
    clock.lap("polish");

    let theta = cfg.theta();
    let fb = |e: Error| e.at("extract");
    let minus = extract(&polished, Side::Minus, theta).map_err(fb)?;
    let plus = extract(&polished, Side::Plus, theta).map_err(fb)?;
    minus.write_csv(&out.join("f_minus.csv"))?;
    plus.write_csv(&out.join("f_plus.csv"))?;
    let model_kind = if cfg.n == 3 { FitModel::Log } else { FitModel::Power };
    let window = cfg.fit_window();
    let ff = |e: Error| e.at("fit");
    let fit_minus = fit_asymptote(&minus, cfg.n, model_kind, window).map_err(ff)?;
    let fit_plus = fit_asymptote(&plus, cfg.n, model_kind, window).map_err(ff)?;
    let decay = residual_decay(&minus, cfg.n, model_kind, cfg.decay_r0()).map_err(ff)?;
    let gap = vertical_gap(&plus, &minus, window).map_err(ff)?;
    let min_curvature = boundary_mean_curvature(&minus, cfg.n)
        .map_err(ff)?
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |m, p| if p.1 < m.1 { p } else { m });
    let fb_summary = FreeBoundarySummary {
        polish_grid: fine.info(),
        polish_energy: polished.energy(),
        theta,
        samples_minus: minus.len(),
        samples_plus: plus.len(),
        fit_minus,
        fit_plus,
        decay,
        gap,
        min_curvature,
    };
    clock.lap("fit");

    let bl = blowup(&polished, theta, cfg.blowup_scale).map_err(|e| e.at("blowup"))?;
    bl.psi.write_csv(&out.join("psi.csv"))?;
    let shape = theorem_shape_checks(&bl, cfg.n);
    let bl_summary = BlowupSummary {
        rho_k: bl.rho_k,
        h: bl.h,
        gradient_mean: bl.gradient_mean,
        gradient_min: bl.gradient_min,
        gradient_max: bl.gradient_max,
        interior_max_gradient: bl.interior_max_gradient,
        shape,
    };
    clock.lap("blowup");

    let mut checks = Vec::new();
    let (e1, e2) = mm.endpoint_energies;
    let ka = 10.0 * cfg.k * cfg.a * cfg.a.ln();
    check(&mut checks, "E(U2) <= 10 k a ln a", big_energy, format!("<= {ka:.6}"), big_energy <= ka);
    check(&mut checks, "c* > max E(u_i)", mm.c_star, format!("> {:.6}", e1.max(e2)), mm.c_star > e1.max(e2));
    if cfg.n == 3 {
        let upper = log_term + path_summary.c_measured;
        check(
            &mut checks,
            "c* - a^2 e/2 in (0, (e/2) k^2 ln a + C]",
            mm_summary.excess,
            format!("(0, {upper:.6}]"),
            mm_summary.excess > 0.0 && mm_summary.excess <= upper,
        );
    }
    check(
        &mut checks,
        "minimax history non-increasing",
        mm.history.last().map_or(f64::NAN, |h| h.1),
        "non-increasing".into(),
        mm.history_non_increasing(1e-10 * mm.c_star),
    );
    check(
        &mut checks,
        "coarea E >= 2 int_0^1 A sqrt(F) (1% slack)",
        coarea_energy,
        format!(">= {:.6}", 0.99 * coarea_half),
        coarea_energy >= 0.99 * coarea_half,
    );
    if let FitParams::Log { k, .. } = fb_summary.fit_minus.params {
        let rel = (k - cfg.k).abs() / cfg.k;
        check(&mut checks, "|k_hat - k| / k <= 0.15", rel, "<= 0.15".into(), rel <= 0.15);
    }
    let ratio = fb_summary.decay.ratio;
    check(&mut checks, "rms halves when R doubles (30%)", ratio, "[0.35, 0.65]".into(), (0.35..=0.65).contains(&ratio));
    let g = fb_summary.gap.mean;
    check(&mut checks, "f1 - f2 -> 2 (10%)", g, "[1.8, 2.2]".into(), (g - 2.0).abs() <= 0.2);
    let gm = bl_summary.gradient_mean;
    check(&mut checks, "mean |grad psi| on boundary", gm, "[0.85, 1.15]".into(), (0.85..=1.15).contains(&gm));
    let im = bl_summary.interior_max_gradient;
    check(&mut checks, "max interior |grad u|", im, "<= 1.05".into(), im <= 1.05);
    let sh = &bl_summary.shape;
    check(
        &mut checks,
        "psi monotone in r and z",
        sh.min_dz_psi.min(-sh.max_dr_psi),
        format!(">= -{:.3e}", sh.monotone_tolerance),
        sh.monotone_ok,
    );
    check(&mut checks, "g(1) = 0", sh.g_at_one, format!("|.| <= {:.3e}", sh.g_tolerance), sh.g_ok);
    let hmin = fb_summary.min_curvature.1;
    check(&mut checks, "F- mean curvature", hmin, ">= -0.05".into(), hmin >= -0.05);

    let report = PipelineReport {
        config: cfg.clone(),
        grid: grid.info(),
        profile,
        u1: StateSummary::from_report(&r1),
        u2: StateSummary::from_report(&r2),
        path: path_summary,
        minimax: mm_summary,
        free_boundary: fb_summary,
        blowup: bl_summary,
        checks,
        timings: clock.timings,
        wall_clock: clock.start.elapsed().as_secs_f64(),
    };
    emit_report(&report, &out.join("report.json"))?;
    Ok(report)
}
