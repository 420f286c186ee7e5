use super::{extract, BoundaryCurve, Side};
use crate::error::{input, Error, Result};
use crate::grid::Field;
use serde::Serialize;
use std::io::{BufWriter, Write};
use std::path::Path;

/// `ψ(X) = (u(ρX) + 1) / ρ` sampled on the square `[0, size]²`, `z` fastest.
#[derive(Clone, Debug, Serialize)]
pub struct RescaledField {
    pub size: f64,
    pub h: f64,
    pub nodes: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl RescaledField {
    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.nodes + q]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "r,z,psi")?;
        for p in 0..self.nodes {
            for q in 0..self.nodes {
                writeln!(w, "{:.12e},{:.12e},{:.17e}", p as f64 * self.h, q as f64 * self.h, self.at(p, q))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupResult {
    /// Distance from the origin to the nearest sample of the corrected `F⁻`.
    pub rho_k: f64,
    pub window_scale: f64,
    /// Grid spacing in rescaled units, `max(hr, hz) / ρ`.
    pub h: f64,
    pub psi: RescaledField,
    /// Corrected `F⁻` in rescaled coordinates, restricted to the window.
    pub boundary: Vec<(f64, f64)>,
    /// `|∇ψ|` at the boundary samples in the window.
    pub boundary_gradient: Vec<f64>,
    pub gradient_mean: f64,
    pub gradient_min: f64,
    pub gradient_max: f64,
    /// Largest cell gradient of `u` over the layer `{|u| < 1 - θ}`, before rescaling.
    pub interior_max_gradient: f64,
    #[serde(skip)]
    pub curve: BoundaryCurve,
}

/// Bilinear interpolation of the nodal gradient of `u`.
fn gradient_interp(u: &Field, r: f64, z: f64) -> (f64, f64) {
    let g = u.grid();
    let x = (r / g.hr).clamp(0.0, g.nr as f64);
    let y = (z / g.hz).clamp(0.0, g.nz as f64);
    let i = (x as usize).min(g.nr - 1);
    let j = (y as usize).min(g.nz - 1);
    let (tx, ty) = (x - i as f64, y - j as f64);
    let c = [u.gradient_at(i, j), u.gradient_at(i + 1, j), u.gradient_at(i, j + 1), u.gradient_at(i + 1, j + 1)];
    let mix = |k: fn(&(f64, f64)) -> f64| {
        (1.0 - ty) * ((1.0 - tx) * k(&c[0]) + tx * k(&c[1])) + ty * ((1.0 - tx) * k(&c[2]) + tx * k(&c[3]))
    };
    (mix(|p| p.0), mix(|p| p.1))
}

/// Rescales around the tip of the `-1` phase. The boundary gradient is read a
/// distance `4ε` inside the layer from each raw crossing, where the profile has
/// left its exponential tail.
pub fn blowup(u: &Field, theta: f64, window_scale: f64) -> Result<BlowupResult> {
    let g = u.grid();
    if !(window_scale > 0.0) {
        return input(format!("window scale must be positive, got {window_scale}"));
    }
    let curve = extract(u, Side::Minus, theta)?;
    let cell = g.hr.max(g.hz);
    let (rho_k, _) = curve
        .r
        .iter()
        .zip(&curve.z)
        .map(|(r, z)| (r.hypot(*z), *r))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .ok_or_else(|| Error::Fit("no F- samples: the field has no -1 phase".into()))?;
    if rho_k < 4.0 * cell {
        return Err(Error::Fit(format!(
            "rho_k = {rho_k:.4} spans fewer than 4 cells; refine the grid or reduce k"
        )));
    }
    let side = window_scale * rho_k;
    if side > g.a || side > g.b_eps {
        return input(format!(
            "window {side:.3} exceeds the cylinder [0, {}] x [0, {:.3}]; reduce the scale",
            g.a, g.b_eps
        ));
    }

    let fine = g.hr.min(g.hz);
    let nodes = (side / fine).ceil() as usize + 1;
    let h_phys = side / (nodes - 1) as f64;
    let mut values = Vec::with_capacity(nodes * nodes);
    for p in 0..nodes {
        for q in 0..nodes {
            values.push((u.interp(p as f64 * h_phys, q as f64 * h_phys) + 1.0) / rho_k);
        }
    }
    let psi = RescaledField { size: window_scale, h: h_phys / rho_k, nodes, values };

    let step = 4.0 * g.eps;
    let mut boundary = Vec::new();
    let mut grads = Vec::new();
    for ((&r, &z), (&(pr, pz), &(nr, nz))) in curve.r.iter().zip(&curve.z).zip(curve.raw.iter().zip(&curve.normal)) {
        if r > side || z > side {
            continue;
        }
        boundary.push((r / rho_k, z / rho_k));
        let (gr, gz) = gradient_interp(u, pr + step * nr, (pz + step * nz).max(0.0));
        grads.push(gr.hypot(gz));
    }
    if grads.is_empty() {
        return Err(Error::Fit("no boundary samples inside the blow-up window".into()));
    }
    let m = grads.len() as f64;
    let level = 1.0 - theta;
    Ok(BlowupResult {
        rho_k,
        window_scale,
        h: cell / rho_k,
        psi,
        gradient_mean: grads.iter().sum::<f64>() / m,
        gradient_min: grads.iter().copied().fold(f64::INFINITY, f64::min),
        gradient_max: grads.iter().copied().fold(0.0, f64::max),
        boundary,
        boundary_gradient: grads,
        interior_max_gradient: u.gradient_stats_inside(level).max,
        curve,
    })
}

/// Qualitative checks on the blow-up limit.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeReport {
    /// Smallest `∂_z ψ` over the positive phase with `z > 0`.
    pub min_dz_psi: f64,
    /// Largest `∂_r ψ` over the positive phase.
    pub max_dr_psi: f64,
    pub monotone_tolerance: f64,
    pub monotone_ok: bool,
    /// Height of the rescaled free boundary at `r = 1`.
    pub g_at_one: f64,
    pub g_tolerance: f64,
    pub g_ok: bool,
    /// `(r, g'(r) r^{n-2})` along the rescaled boundary.
    pub flux: Vec<(f64, f64)>,
    /// Least-squares slope of the flux against `ln r` over the outer half.
    pub flux_trend: f64,
    pub flux_bounded: bool,
}

pub fn theorem_shape_checks(res: &BlowupResult, n: usize) -> ShapeReport {
    let psi = &res.psi;
    let h = psi.h;
    let floor = res.curve.theta / res.rho_k;
    let mut min_dz = f64::INFINITY;
    let mut max_dr = f64::NEG_INFINITY;
    for p in 0..psi.nodes {
        for q in 0..psi.nodes {
            if psi.at(p, q) < floor {
                continue;
            }
            if q + 1 < psi.nodes && q > 0 {
                min_dz = min_dz.min((psi.at(p, q + 1) - psi.at(p, q)) / h);
            }
            if p + 1 < psi.nodes {
                max_dr = max_dr.max((psi.at(p + 1, q) - psi.at(p, q)) / h);
            }
        }
    }
    let tol = res.h;
    let b = &res.boundary;
    let g_at_one = b
        .windows(2)
        .find(|w| w[0].0 <= 1.0 && w[1].0 >= 1.0)
        .map(|w| {
            let t = if w[1].0 > w[0].0 { (1.0 - w[0].0) / (w[1].0 - w[0].0) } else { 0.0 };
            w[0].1 + t * (w[1].1 - w[0].1)
        })
        .unwrap_or_else(|| b.first().map(|p| p.1).unwrap_or(f64::NAN));
    let m = (n - 2) as i32;
    let flux: Vec<(f64, f64)> = b
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| {
            let rm = 0.5 * (w[0].0 + w[1].0);
            (rm, (w[1].1 - w[0].1) / (w[1].0 - w[0].0) * rm.powi(m))
        })
        .collect();
    let outer: Vec<(f64, f64)> = flux.iter().filter(|(r, _)| *r >= 0.5 * res.window_scale).map(|&(r, f)| (r.ln(), f)).collect();
    let flux_trend = if outer.len() >= 2 {
        let k = outer.len() as f64;
        let (mx, my) = outer.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
        let sxx: f64 = outer.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let sxy: f64 = outer.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx > 0.0 { sxy / sxx } else { 0.0 }
    } else {
        f64::NAN
    };
    let outer_max = outer.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    ShapeReport {
        min_dz_psi: min_dz,
        max_dr_psi: max_dr,
        monotone_tolerance: tol,
        monotone_ok: min_dz >= -tol && max_dr <= tol,
        g_at_one,
        g_tolerance: 2.0 * res.h,
        g_ok: g_at_one.abs() <= 2.0 * res.h,
        flux,
        flux_trend,
        flux_bounded: outer_max.is_finite() && flux_trend.is_finite() && flux_trend <= outer_max.max(1.0),
    }
}
