//! The parabolic semiflow `∂_t u = Δu - F_eps'(u)/2` on the cylinder: explicit and
//! IMEX stepping, energy monitoring, steady-state detection and comparison checks.

use crate::error::{Error, Result};
use crate::grid::{AxiGrid, Field};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Explicit,
    Imex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub scheme: Scheme,
    /// Time step; `None` picks 0.95 of the scheme's limit.
    pub dt: Option<f64>,
    /// Threshold on `∫ |Δu - F'/2|² r^{n-2}`; `None` means `1e-10 a^{n-1}`.
    pub steady_tol: Option<f64>,
    pub max_steps: usize,
    /// Steps between energy and residual checkpoints.
    pub check_every: usize,
    /// Allowed energy increase between checkpoints, relative to the initial energy.
    pub energy_slack: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            scheme: Scheme::Explicit,
            dt: None,
            steady_tol: None,
            max_steps: 1_000_000,
            check_every: 200,
            energy_slack: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Steady,
    TMax,
    Steps,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FlowReport {
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
    pub terminated_by: Option<Termination>,
}

impl FlowReport {
    pub fn steady(&self) -> bool {
        self.terminated_by == Some(Termination::Steady)
    }

    pub fn final_energy(&self) -> f64 {
        self.energies.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }
}

impl FlowConfig {
    /// Largest admissible step: `1/(max_diag + 1/eps²)` explicit, `1/max_diag` IMEX.
    pub fn dt_limit(&self, grid: &AxiGrid) -> f64 {
        match self.scheme {
            Scheme::Explicit => grid.explicit_dt_limit(),
            Scheme::Imex => 1.0 / grid.max_diag(),
        }
    }

    pub fn resolve_dt(&self, grid: &AxiGrid) -> Result<f64> {
        let limit = self.dt_limit(grid);
        match self.dt {
            None => Ok(0.95 * limit),
            Some(dt) if dt > 0.0 && dt <= limit => Ok(dt),
            Some(dt) => Err(Error::Config(format!("dt = {dt} violates the stability limit {limit:.4e}"))),
        }
    }

    pub fn resolve_steady_tol(&self, grid: &AxiGrid) -> f64 {
        self.steady_tol.unwrap_or(1e-10 * grid.a.powi(grid.dim as i32 - 1))
    }
}

/// Writes one time step of `old` into `new`; Dirichlet nodes are copied.
pub fn step_into(grid: &AxiGrid, old: &[f64], new: &mut [f64], dt: f64, scheme: Scheme) {
    let s = grid.nz + 1;
    let react = &grid.model().reaction;
    new.par_chunks_mut(s).enumerate().for_each(|(i, row)| {
        let u = &old[i * s..(i + 1) * s];
        if i == grid.nr {
            row.copy_from_slice(u);
            return;
        }
        crate::grid::laplacian_row(grid, old, i, row);
        match scheme {
            Scheme::Explicit => {
                for j in 0..grid.nz {
                    row[j] = u[j] + dt * (row[j] - react.half_deriv(u[j]));
                }
            }
            Scheme::Imex => {
                for j in 0..grid.nz {
                    let rhs = u[j] + dt * row[j];
                    row[j] = implicit_reaction(react, rhs, u[j], dt);
                }
            }
        }
        row[grid.nz] = u[grid.nz];
    });
}

/// Solves `v + dt F'(v)/2 = rhs` by safeguarded Newton from `guess`.
#[inline]
fn implicit_reaction(react: &crate::potential::ReactionTable, rhs: f64, guess: f64, dt: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let g = |v: f64| v + dt * react.half_deriv(v) - rhs;
    if g(lo) >= 0.0 {
        return lo;
    }
    if g(hi) <= 0.0 {
        return hi;
    }
    let mut v = guess.clamp(lo, hi);
    for _ in 0..50 {
        let gv = g(v);
        if gv.abs() <= 1e-15 {
            break;
        }
        if gv > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let next = v - gv / (1.0 + dt * react.half_second(v));
        v = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 {
            break;
        }
    }
    v
}

/// A flow instance owning its scratch buffer.
pub struct Flow {
    pub dt: f64,
    pub scheme: Scheme,
    scratch: Vec<f64>,
}

impl Flow {
    pub fn new(grid: &AxiGrid, cfg: &FlowConfig) -> Result<Self> {
        Ok(Flow { dt: cfg.resolve_dt(grid)?, scheme: cfg.scheme, scratch: vec![0.0; grid.len()] })
    }

    pub fn step(&mut self, u: &mut Field) {
        let g = u.grid().clone();
        step_into(&g, &u.values, &mut self.scratch, self.dt, self.scheme);
        std::mem::swap(&mut u.values, &mut self.scratch);
    }

    pub fn advance(&mut self, u: &mut Field, steps: usize) {
        for _ in 0..steps {
            self.step(u);
        }
    }
}

/// One step of the flow.
pub fn step(u: &Field, cfg: &FlowConfig) -> Result<Field> {
    let mut out = u.clone();
    Flow::new(u.grid(), cfg)?.step(&mut out);
    Ok(out)
}

/// Flows for a fixed duration, checking energy decay at every checkpoint.
pub fn flow_for(u0: &Field, cfg: &FlowConfig, duration: f64) -> Result<(Field, FlowReport)> {
    let mut flow = Flow::new(u0.grid(), cfg)?;
    let steps = (duration / flow.dt).ceil() as usize;
    run(u0, cfg, &mut flow, steps, None)
}

/// Iterates until the steady residual falls below tolerance or `max_steps` pass.
pub fn relax(u0: &Field, cfg: &FlowConfig) -> Result<(Field, FlowReport)> {
    let mut flow = Flow::new(u0.grid(), cfg)?;
    let tol = cfg.resolve_steady_tol(u0.grid());
    run(u0, cfg, &mut flow, cfg.max_steps, Some(tol))
}

fn run(u0: &Field, cfg: &FlowConfig, flow: &mut Flow, steps: usize, tol: Option<f64>) -> Result<(Field, FlowReport)> {
    let mut u = u0.clone();
    let e0 = u.energy();
    let mut rep = FlowReport { dt: flow.dt, ..Default::default() };
    let record = |rep: &mut FlowReport, u: &Field, t: f64| -> Result<f64> {
        let e = u.energy();
        let res = u.residual_norm();
        if let Some(&prev) = rep.energies.last() {
            if e > prev + cfg.energy_slack * e0.abs().max(1.0) {
                return Err(Error::Stability(format!("energy rose from {prev} to {e} at t = {t}")));
            }
        }
        rep.times.push(t);
        rep.energies.push(e);
        rep.residuals.push(res);
        Ok(res)
    };
    let res = record(&mut rep, &u, 0.0)?;
    if tol.is_some_and(|t| res < t) {
        rep.terminated_by = Some(Termination::Steady);
        return Ok((u, rep));
    }
    let every = cfg.check_every.max(1);
    let mut done = 0;
    while done < steps {
        let chunk = every.min(steps - done);
        flow.advance(&mut u, chunk);
        done += chunk;
        let res = record(&mut rep, &u, done as f64 * flow.dt)?;
        if !u.values.iter().all(|v| v.is_finite()) {
            return Err(Error::Stability("non-finite values".into()));
        }
        if tol.is_some_and(|t| res < t) {
            rep.steps = done;
            rep.terminated_by = Some(Termination::Steady);
            return Ok((u, rep));
        }
    }
    rep.steps = done;
    rep.terminated_by = Some(if tol.is_some() { Termination::TMax } else { Termination::Steps });
    if tol.is_some() {
        log::warn!("relaxation stopped at the step cap with residual {:.3e}", rep.final_residual());
    }
    Ok((u, rep))
}

/// Flows both fields `n_steps` and returns the smallest `ub - ua` seen at any node
/// and any step.
pub fn check_ordering(ua: &Field, ub: &Field, cfg: &FlowConfig, n_steps: usize) -> Result<f64> {
    let mut fa = Flow::new(ua.grid(), cfg)?;
    let mut fb = Flow::new(ub.grid(), cfg)?;
    let (mut a, mut b) = (ua.clone(), ub.clone());
    let mut gap = a.min_gap_to(&b);
    for _ in 0..n_steps {
        fa.step(&mut a);
        fb.step(&mut b);
        gap = gap.min(a.min_gap_to(&b));
    }
    Ok(gap)
}

/// `(min ∂_z u, max ∂_r u)` by one-sided differences.
pub fn check_monotone(u: &Field) -> (f64, f64) {
    u.monotonicity()
}
