//! Monotone paths of fields between the two stable states, their flow, and the
//! minimax level of the energy along them.

mod sweep;

pub use sweep::{signed_distance, CatenoidSweep, NodalCurve};

use crate::error::{Error, Result};
use crate::flow::{Flow, FlowConfig};
use crate::grid::{level_area, AxiGrid, Field};
use crate::quad;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathConfig {
    /// Number of intervals; the path has `members + 1` fields.
    pub members: usize,
    /// Parameter value where the neck reaches the floor.
    pub neck_split: f64,
    /// Distance beyond which the profile is saturated.
    pub cutoff: f64,
    /// Polyline spacing of the nodal curves.
    pub spacing: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { members: 33, neck_split: 0.5, cutoff: 2.0, spacing: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimaxConfig {
    /// Flow time of the first block (all members).
    pub first_block: f64,
    /// Flow time of each later block.
    pub block: f64,
    pub rounds: usize,
    /// Members inserted on each side of the running argmax per round.
    pub refine: usize,
    /// Stop once a round lowers the max energy by less than `plateau · a^{n-1}`.
    pub plateau: f64,
    /// Members within this sup-distance of an endpoint are snapped to it.
    pub snap: f64,
    /// After the first block the path keeps this many members on each side of the
    /// argmax; the dropped members lie on gradient-flow lines into the endpoints.
    pub window: usize,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        MinimaxConfig { first_block: 1.0, block: 1.0, rounds: 12, refine: 1, plateau: 1e-6, snap: 1e-12, window: 2 }
    }
}

/// An ordered family of fields indexed by `s ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct PathFamily {
    pub s: Vec<f64>,
    pub fields: Vec<Field>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub c_star: f64,
    pub argmax_s: f64,
    pub s: Vec<f64>,
    pub energies: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MinimaxResult {
    pub c_star: f64,
    pub argmax_s: f64,
    pub pass_state: Field,
    /// `(round, max energy)` after each round's flow.
    pub history: Vec<(usize, f64)>,
    pub rounds: Vec<RoundRecord>,
    pub path: PathFamily,
    pub endpoint_energies: (f64, f64),
}

impl MinimaxResult {
    /// Whether the recorded max energies never rise by more than `slack`.
    pub fn history_non_increasing(&self, slack: f64) -> bool {
        self.history.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

impl PathFamily {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.fields.par_iter().map(Field::energy).collect()
    }

    /// Smallest pointwise gap between consecutive members.
    pub fn min_order_gap(&self) -> f64 {
        self.fields.windows(2).map(|w| w[0].min_gap_to(&w[1])).fold(f64::INFINITY, f64::min)
    }

    /// Largest cell gradient over all members, away from the Dirichlet nodes.
    pub fn max_gradient(&self) -> f64 {
        self.fields.par_iter().map(Field::interior_max_gradient).reduce(|| 0.0, f64::max)
    }
}

/// `min(H(|z| - cap), H(ζ))` with `ζ` the signed distance to the branch region of
/// sweep member `σ`; `cap = None` drops the horizontal cap.
fn sweep_member(grid: &AxiGrid, sweep: &CatenoidSweep, sigma: f64, cap: Option<f64>, cfg: &PathConfig) -> Vec<f64> {
    let curve = sweep.curve(sigma, cfg.spacing, cfg.cutoff);
    let zeta = signed_distance(grid, &curve, |r, z| sweep.inside_branch(sigma, r, z), cfg.cutoff);
    let prof = &grid.model().profile;
    let s = grid.nz + 1;
    zeta.into_iter()
        .enumerate()
        .map(|(idx, x)| {
            let mut v = prof.value(x);
            if let Some(c) = cap {
                v = v.min(prof.value(grid.z(idx % s) - c));
            }
            v
        })
        .collect()
}

/// Initial state with an almost vertical nodal set: `max(u₁, H(ζ))` with `ζ` the
/// signed distance to a steep catenoid of the sweep between the widest-reaching
/// member and the wide catenoid, then `ω` on the Dirichlet part of the boundary.
pub fn vertical_initial(u1: &Field, cfg: &PathConfig) -> Result<Field> {
    let grid = u1.grid().clone();
    let sweep = CatenoidSweep::new(&grid)?;
    let h = sweep_member(&grid, &sweep, sweep.sigma_vertical(), None, cfg);
    let values = h.iter().zip(&u1.values).map(|(a, b)| a.max(*b)).collect();
    let mut u = Field::new(grid, values)?;
    u.impose_boundary();
    Ok(u)
}

/// Parameter `s ↦ (σ, cap)`. Up to `neck_split` the neck height falls linearly from
/// `z_cat` to the floor and the cap follows it; afterwards `σ` grows linearly to the
/// wide catenoid while the cap sinks below the floor and fades out.
fn member_params(sweep: &CatenoidSweep, s: f64, split: f64, cutoff: f64) -> Result<(f64, Option<f64>)> {
    if s <= split {
        let d = sweep.z_cat * (1.0 - s / split);
        Ok((sweep.sigma_for_height(d)?, Some(d)))
    } else {
        let t = (s - split) / (1.0 - split);
        let cap = -2.0 * cutoff * t;
        Ok((sweep.sigma_k + (sweep.sigma_wide - sweep.sigma_k) * t, if cap > -cutoff { Some(cap) } else { None }))
    }
}

/// Catenoid-sweep path from `u1` to `u2`: each interior member is the profile of
/// the signed distance to a catenoid of the nested family, clipped between the
/// endpoints.
pub fn build_path(u1: &Field, u2: &Field, cfg: &PathConfig) -> Result<PathFamily> {
    let grid = u1.grid().clone();
    if !grid.same_as(u2.grid()) {
        return Err(Error::Input("endpoints live on different grids".into()));
    }
    if cfg.members < 2 || !(cfg.neck_split > 0.0 && cfg.neck_split < 1.0) {
        return Err(Error::Config("need at least 2 path intervals and neck_split in (0, 1)".into()));
    }
    if u1.min_gap_to(u2) < -1e-10 {
        return Err(Error::Order(u1.min_gap_to(u2)));
    }
    let sweep = CatenoidSweep::new(&grid)?;
    let m = cfg.members;
    let s: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64).collect();
    let params = s[1..m]
        .iter()
        .map(|&x| member_params(&sweep, x, cfg.neck_split, cfg.cutoff))
        .collect::<Result<Vec<_>>>()?;
    let mut inner: Vec<Vec<f64>> = params
        .par_iter()
        .map(|&(sig, cap)| {
            sweep_member(&grid, &sweep, sig, cap, cfg)
                .into_iter()
                .zip(u1.values.iter().zip(&u2.values))
                .map(|(h, (lo, hi))| h.max(*lo).min(*hi))
                .collect()
        })
        .collect();
    // the polyline distance is monotone in σ only up to its sampling error
    let mut worst = 0.0f64;
    for j in 1..inner.len() {
        let (prev, cur) = inner.split_at_mut(j);
        for (c, p) in cur[0].iter_mut().zip(&prev[j - 1]) {
            if *c < *p {
                worst = worst.max(*p - *c);
                *c = *p;
            }
        }
    }
    if worst > 1e-3 {
        return Err(Error::Construction(format!("sweep members out of order by {worst:e}")));
    }
    let mut fields = vec![u1.clone()];
    for v in inner {
        fields.push(Field::new(grid.clone(), v)?);
    }
    fields.push(u2.clone());
    let path = PathFamily { s, fields };
    let gap = path.min_order_gap();
    if gap < -1e-12 {
        return Err(Error::Construction(format!("path not monotone in s: gap {gap:e}")));
    }
    Ok(path)
}

/// Flows every member for time `t`, then checks the order in `s`.
pub fn flow_path(path: &PathFamily, cfg: &FlowConfig, t: f64) -> Result<PathFamily> {
    let mut out = path.clone();
    if t <= 0.0 {
        return Ok(out);
    }
    let last = out.fields.len() - 1;
    out.fields.par_iter_mut().enumerate().try_for_each(|(j, f)| -> Result<()> {
        if j == 0 || j == last {
            return Ok(());
        }
        let mut flow = Flow::new(f.grid(), cfg)?;
        let steps = (t / flow.dt).ceil() as usize;
        flow.advance(f, steps);
        Ok(())
    })?;
    let gap = out.min_order_gap();
    if gap < -1e-10 {
        return Err(Error::Order(gap));
    }
    Ok(out)
}

/// Pointwise interpolation halfway in the profile coordinate: `H((H⁻¹f + H⁻¹g)/2)`.
pub fn profile_midpoint(f: &Field, g: &Field) -> Field {
    let prof = &f.grid().model().profile;
    let cap = prof.t_eps + 30.0 * prof.eps;
    let inv = |v: f64| {
        if v >= 1.0 {
            cap
        } else if v <= -1.0 {
            -cap
        } else {
            prof.inverse(v).clamp(-cap, cap)
        }
    };
    let values: Vec<f64> = f
        .values
        .par_iter()
        .zip(&g.values)
        .map(|(&a, &b)| {
            if a == b {
                a
            } else {
                prof.value(0.5 * (inv(a) + inv(b))).clamp(a.min(b), a.max(b))
            }
        })
        .collect();
    Field::new(f.grid().clone(), values).expect("same grid")
}

/// Iterated flow and refinement near the running argmax of the energy.
pub fn minimax(path: &PathFamily, flow_cfg: &FlowConfig, cfg: &MinimaxConfig) -> Result<MinimaxResult> {
    let grid = path.fields[0].grid().clone();
    let scale = grid.a.powi(grid.dim as i32 - 1);
    let last = path.len() - 1;
    let e1 = path.fields[0].energy();
    let e2 = path.fields[last].energy();
    let endpoint = e1.max(e2);
    let mut cur = flow_path(path, flow_cfg, cfg.first_block)?;
    let mut energies = cur.energies();
    let mut rounds = Vec::new();
    let mut history = Vec::new();
    let record = |round: usize, cur: &PathFamily, en: &[f64], rounds: &mut Vec<RoundRecord>, history: &mut Vec<(usize, f64)>| {
        let (jm, &em) = en.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
        rounds.push(RoundRecord { round, c_star: em, argmax_s: cur.s[jm], s: cur.s.clone(), energies: en.to_vec() });
        history.push((round, em));
        log::info!("minimax round {round}: max energy {em:.6} at s = {:.4} over {} members", cur.s[jm], en.len());
        em
    };
    let mut prev = record(0, &cur, &energies, &mut rounds, &mut history);
    truncate_to_window(&mut cur, &mut energies, cfg.window);
    for round in 1..=cfg.rounds {
        snap_to_endpoints(&mut cur, &mut energies, cfg.snap);
        let inserted = refine_around_max(&mut cur, &mut energies, cfg.refine);
        let active: Vec<bool> = (0..cur.len())
            .map(|j| j != 0 && j != cur.len() - 1 && !cur.fields[j].values.eq(&cur.fields[0].values) && !cur.fields[j].values.eq(&cur.fields[cur.len() - 1].values))
            .collect();
        let dt_cfg = flow_cfg.clone();
        cur.fields.par_iter_mut().zip(&active).try_for_each(|(f, &act)| -> Result<()> {
            if act {
                let mut flow = Flow::new(f.grid(), &dt_cfg)?;
                let steps = (cfg.block / flow.dt).ceil() as usize;
                flow.advance(f, steps);
            }
            Ok(())
        })?;
        let gap = cur.min_order_gap();
        if gap < -1e-10 {
            return Err(Error::Order(gap));
        }
        energies = cur.energies();
        // a refined member is kept only if it does not raise the path maximum
        let old_max = (0..cur.len())
            .filter(|j| !inserted.contains(&cur.s[*j]))
            .map(|j| energies[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let keep: Vec<bool> = (0..cur.len()).map(|j| !inserted.contains(&cur.s[j]) || energies[j] <= old_max).collect();
        if keep.iter().any(|k| !k) {
            log::debug!("minimax round {round}: rejected {} refined members", keep.iter().filter(|k| !**k).count());
            let mut it = keep.iter();
            cur.fields.retain(|_| *it.next().expect("same length"));
            let mut it = keep.iter();
            cur.s.retain(|_| *it.next().expect("same length"));
            let mut it = keep.iter();
            energies.retain(|_| *it.next().expect("same length"));
        }
        let em = record(round, &cur, &energies, &mut rounds, &mut history);
        let drop = prev - em;
        prev = em;
        if drop.abs() < cfg.plateau * scale {
            break;
        }
    }
    let (jm, &c_star) = energies.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    if c_star <= endpoint {
        return Err(Error::Bracket { c_star, endpoint });
    }
    Ok(MinimaxResult {
        c_star,
        argmax_s: cur.s[jm],
        pass_state: cur.fields[jm].clone(),
        history,
        rounds,
        path: cur,
        endpoint_energies: (e1, e2),
    })
}

/// Keeps the endpoints and `w` members on each side of the argmax.
fn truncate_to_window(path: &mut PathFamily, energies: &mut Vec<f64>, w: usize) {
    let last = path.len() - 1;
    let (jm, _) = energies.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    let lo = jm.saturating_sub(w).max(1);
    let hi = (jm + w).min(last - 1);
    if lo > hi {
        return;
    }
    let keep: Vec<usize> = std::iter::once(0).chain(lo..=hi).chain(std::iter::once(last)).collect();
    path.fields = keep.iter().map(|&j| path.fields[j].clone()).collect();
    path.s = keep.iter().map(|&j| path.s[j]).collect();
    *energies = keep.iter().map(|&j| energies[j]).collect();
}

fn snap_to_endpoints(path: &mut PathFamily, energies: &mut [f64], tol: f64) {
    let last = path.len() - 1;
    let (lo, hi) = (path.fields[0].clone(), path.fields[last].clone());
    for j in 1..last {
        if path.fields[j].sup_distance(&lo) < tol {
            path.fields[j] = lo.clone();
            energies[j] = energies[0];
        } else if path.fields[j].sup_distance(&hi) < tol {
            path.fields[j] = hi.clone();
            energies[j] = energies[last];
        }
    }
}

/// Inserts `per_side` members on each side of the argmax, spaced in the profile
/// coordinate by repeated halving. Returns the parameters of the new members.
fn refine_around_max(path: &mut PathFamily, energies: &mut Vec<f64>, per_side: usize) -> Vec<f64> {
    let mut added = Vec::new();
    for _ in 0..per_side {
        let (jm, _) = energies.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
        let mut inserts = Vec::new();
        if jm + 1 < path.len() {
            inserts.push(jm + 1);
        }
        if jm > 0 {
            inserts.push(jm);
        }
        // insert from the right so indices stay valid
        for &at in &inserts {
            let mid = profile_midpoint(&path.fields[at - 1], &path.fields[at]);
            let e = mid.energy();
            let s = 0.5 * (path.s[at - 1] + path.s[at]);
            path.fields.insert(at, mid);
            path.s.insert(at, s);
            energies.insert(at, e);
            added.push(s);
        }
    }
    added
}

/// `∫ |Δu - F'(u)/2|² r^{n-2}` at the pass state.
pub fn pass_residual(result: &MinimaxResult) -> f64 {
    result.pass_state.residual_norm()
}

/// Coarea comparison for one field: `(E, 2∫_0^1 A(s)√F(s) ds, 2∫_{-1}^1 A(s)√F(s) ds)`.
pub fn coarea_bound(u: &Field, levels: usize) -> Result<(f64, f64, f64)> {
    let spec = &u.grid().model().spec;
    let integrand = |s: f64| level_area(u, s) * spec.value(s).max(0.0).sqrt();
    // Gauss-Legendre on sub-intervals of the level range
    let piece = |lo: f64, hi: f64| -> f64 {
        let n = levels.max(1);
        (0..n)
            .map(|i| {
                let a = lo + (hi - lo) * i as f64 / n as f64;
                let b = lo + (hi - lo) * (i + 1) as f64 / n as f64;
                quad::gl_integrate(integrand, a, b)
            })
            .sum()
    };
    let upper = 2.0 * piece(0.0, 1.0);
    let lower = 2.0 * piece(-1.0, 0.0);
    Ok((u.energy(), upper, upper + lower))
}
