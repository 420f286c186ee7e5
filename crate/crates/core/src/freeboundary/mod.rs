//! Approximate free boundaries of finite-ε fields: level-set extraction with a
//! profile-offset correction, log and power asymptotic fits, and the blow-up
//! rescaling around the tip of the `-1` phase.
//!
//! Crossings are located in the profile coordinate `X = H_eps^{-1}(u)`, which is
//! close to a signed distance and therefore nearly linear across a cell. The raw
//! crossing of `u = ±(1 - θ)` is then moved along `∇X` to `X = ±1`, where the
//! clipped-linear limit profile reaches `±1`.

mod blowup;

pub use blowup::{blowup, theorem_shape_checks, BlowupResult, RescaledField, ShapeReport};

use crate::catenoid::{outward_mean_curvature, PlanarCurve};
use crate::error::{input, Error, Result};
use crate::grid::Field;
use serde::{Deserialize, Serialize};
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Boundary of `{u = 1}`, the upper edge of the layer.
    Plus,
    /// Boundary of `{u = -1}`, the lower edge of the layer.
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Side::Plus),
            "minus" => Ok(Side::Minus),
            _ => input(format!("side must be plus or minus, got `{s}`")),
        }
    }
}

/// Samples of one side of `∂{|u| < 1}`, sorted by `r`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryCurve {
    pub side: Side,
    pub theta: f64,
    /// Profile abscissa of the extraction level, `H^{-1}(1 - θ)`.
    pub level_x: f64,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    /// Crossings of `u = ±(1 - θ)` before the offset correction.
    pub raw: Vec<(f64, f64)>,
    /// Unit normal at each raw crossing, pointing towards increasing `u`.
    pub normal: Vec<(f64, f64)>,
}

impl BoundaryCurve {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Linear interpolation of the corrected curve; `None` outside its support.
    pub fn z_at(&self, r: f64) -> Option<f64> {
        let n = self.r.len();
        if n < 2 || r < self.r[0] || r > self.r[n - 1] {
            return None;
        }
        let i = self.r.partition_point(|&x| x <= r).clamp(1, n - 1);
        let t = (r - self.r[i - 1]) / (self.r[i] - self.r[i - 1]);
        Some(self.z[i - 1] + t * (self.z[i] - self.z[i - 1]))
    }

    /// The corrected samples with `r > 0` as a planar graph.
    pub fn planar(&self) -> Result<PlanarCurve> {
        let (r, z): (Vec<f64>, Vec<f64>) = self.r.iter().zip(&self.z).filter(|(r, _)| **r > 0.0).unzip();
        PlanarCurve::new(r, z)
    }

    /// Writes `r,z,r_raw,z_raw` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "r,z,r_raw,z_raw")?;
        for ((r, z), (rr, zr)) in self.r.iter().zip(&self.z).zip(&self.raw) {
            writeln!(w, "{r:.12e},{z:.12e},{rr:.12e},{zr:.12e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Nodal gradient of a grid function, mirrored across the axis and the bottom.
fn nodal_gradient(u: &Field, x: &[f64], i: usize, j: usize) -> (f64, f64) {
    let g = u.grid();
    let at = |i: usize, j: usize| x[g.idx(i, j)];
    let gr = if i == 0 {
        0.0
    } else if i == g.nr {
        (at(i, j) - at(i - 1, j)) / g.hr
    } else {
        (at(i + 1, j) - at(i - 1, j)) / (2.0 * g.hr)
    };
    let gz = if j == 0 {
        0.0
    } else if j == g.nz {
        (at(i, j) - at(i, j - 1)) / g.hz
    } else {
        (at(i, j + 1) - at(i, j - 1)) / (2.0 * g.hz)
    };
    (gr, gz)
}

/// Extracts one side of the layer boundary at level `±(1 - θ)`.
///
/// Each column contributes its first crossing in `z` where the level set is closer
/// to horizontal; each row contributes its first crossing in `r` where it is closer
/// to vertical (near the tip of a phase). Columns without a crossing are omitted.
pub fn extract(u: &Field, side: Side, theta: f64) -> Result<BoundaryCurve> {
    if !(theta > 0.0 && theta < 1.0) {
        return input(format!("theta must lie in (0, 1), got {theta}"));
    }
    let g = u.grid();
    let prof = &g.model().profile;
    let sgn = side.sign();
    let level_x = prof.inverse(1.0 - theta);
    let target = sgn * level_x;
    let x = u.profile_coordinate();
    let at = |i: usize, j: usize| x[g.idx(i, j)];

    // (raw point, gradient of X there)
    let mut hits: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for i in 0..=g.nr {
        for j in 0..g.nz {
            let (a, b) = (at(i, j) - target, at(i, j + 1) - target);
            if a == b || (a > 0.0) == (b > 0.0) && a != 0.0 {
                continue;
            }
            let t = a / (a - b);
            let (g0, g1) = (nodal_gradient(u, &x, i, j), nodal_gradient(u, &x, i, j + 1));
            let grad = (g0.0 + t * (g1.0 - g0.0), g0.1 + t * (g1.1 - g0.1));
            if grad.1.abs() >= grad.0.abs() {
                hits.push(((g.r(i), g.z(j) + t * g.hz), grad));
            }
            break;
        }
    }
    for j in 0..=g.nz {
        for i in 0..g.nr {
            let (a, b) = (at(i, j) - target, at(i + 1, j) - target);
            if a == b || (a > 0.0) == (b > 0.0) && a != 0.0 {
                continue;
            }
            let t = a / (a - b);
            let (g0, g1) = (nodal_gradient(u, &x, i, j), nodal_gradient(u, &x, i + 1, j));
            let grad = (g0.0 + t * (g1.0 - g0.0), g0.1 + t * (g1.1 - g0.1));
            if grad.0.abs() > grad.1.abs() {
                hits.push(((g.r(i) + t * g.hr, g.z(j)), grad));
            }
            break;
        }
    }

    let shift = sgn * (1.0 - level_x);
    let mut pts: Vec<((f64, f64), (f64, f64), (f64, f64))> = hits
        .into_iter()
        .filter_map(|(p, (gr, gz))| {
            let n2 = gr * gr + gz * gz;
            if n2 == 0.0 || !n2.is_finite() {
                return None;
            }
            let n = n2.sqrt();
            let q = ((p.0 + shift * gr / n).max(0.0), (p.1 + shift * gz / n).max(0.0));
            Some((q, p, (gr / n, gz / n)))
        })
        .collect();
    pts.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)));
    let tol = 1e-9 * g.a;
    pts.dedup_by(|b, a| (b.0 .0 - a.0 .0).abs() <= tol);

    Ok(BoundaryCurve {
        side,
        theta,
        level_x,
        r: pts.iter().map(|p| p.0 .0).collect(),
        z: pts.iter().map(|p| p.0 .1).collect(),
        raw: pts.iter().map(|p| p.1).collect(),
        normal: pts.iter().map(|p| p.2).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `z = k ln r + b`.
    Log,
    /// `z = c - c' r^{3-n}`.
    Power,
}

impl std::str::FromStr for FitModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(FitModel::Log),
            "power" => Ok(FitModel::Power),
            _ => input(format!("model must be log or power, got `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum FitParams {
    Log { k: f64, b: f64 },
    Power { c: f64, c_prime: f64, exponent: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    pub params: FitParams,
    pub window: (f64, f64),
    pub rms: f64,
    pub samples: usize,
}

impl AsymptoticFit {
    pub fn eval(&self, r: f64) -> f64 {
        match self.params {
            FitParams::Log { k, b } => k * r.ln() + b,
            FitParams::Power { c, c_prime, exponent } => c - c_prime * r.powf(exponent),
        }
    }
}

/// Fit window excluding the outer 20% of the cylinder.
pub fn default_window(a: f64) -> (f64, f64) {
    (0.3 * a, 0.8 * a)
}

/// Least squares on the window; needs at least 10 samples and a well-spread basis.
pub fn fit_asymptote(curve: &BoundaryCurve, n: usize, model: FitModel, window: (f64, f64)) -> Result<AsymptoticFit> {
    if n < 3 {
        return input(format!("dimension must be at least 3, got {n}"));
    }
    if model == FitModel::Power && n == 3 {
        return input("the power model needs n > 3; use the log model for n = 3");
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return input(format!("invalid fit window [{lo}, {hi}]"));
    }
    let exponent = 3.0 - n as f64;
    let basis = |r: f64| match model {
        FitModel::Log => r.ln(),
        FitModel::Power => r.powf(exponent),
    };
    let pts: Vec<(f64, f64)> = curve
        .r
        .iter()
        .zip(&curve.z)
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .map(|(&r, &z)| (basis(r), z))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!("{} samples in [{lo}, {hi}], need at least 10", pts.len())));
    }
    let m = pts.len() as f64;
    let (mx, mz) = pts.iter().fold((0.0, 0.0), |(a, b), (x, z)| (a + x / m, b + z / m));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxz: f64 = pts.iter().map(|(x, z)| (x - mx) * (z - mz)).sum();
    let scale = pts.iter().map(|(x, _)| x.abs()).fold(0.0, f64::max).max(1.0);
    if sxx <= 1e-10 * m * scale * scale {
        return Err(Error::Fit(format!("window [{lo}, {hi}] too narrow for the {model:?} model")));
    }
    let slope = sxz / sxx;
    let icpt = mz - slope * mx;
    let rms = (pts.iter().map(|(x, z)| (z - icpt - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    let params = match model {
        FitModel::Log => FitParams::Log { k: slope, b: icpt },
        FitModel::Power => FitParams::Power { c: icpt, c_prime: -slope, exponent },
    };
    Ok(AsymptoticFit { params, window, rms, samples: pts.len() })
}

/// Fit residuals on `[R, 2R]` and `[2R, 4R]`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayCheck {
    pub r0: f64,
    pub rms_r: f64,
    pub rms_2r: f64,
    /// `rms_2r / rms_r`; an `O(1/R)` law gives 1/2.
    pub ratio: f64,
}

pub fn residual_decay(curve: &BoundaryCurve, n: usize, model: FitModel, r0: f64) -> Result<DecayCheck> {
    let a = fit_asymptote(curve, n, model, (r0, 2.0 * r0))?;
    let b = fit_asymptote(curve, n, model, (2.0 * r0, 4.0 * r0))?;
    Ok(DecayCheck { r0, rms_r: a.rms, rms_2r: b.rms, ratio: b.rms / a.rms })
}

/// Vertical distance `f₁ - f₂` between the plus and minus curves over a window.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

pub fn vertical_gap(plus: &BoundaryCurve, minus: &BoundaryCurve, window: (f64, f64)) -> Result<GapReport> {
    let gaps: Vec<f64> = minus
        .r
        .iter()
        .zip(&minus.z)
        .filter(|(r, _)| **r >= window.0 && **r <= window.1)
        .filter_map(|(&r, &z)| plus.z_at(r).map(|zp| zp - z))
        .collect();
    if gaps.is_empty() {
        return Err(Error::Fit(format!("no common samples in [{}, {}]", window.0, window.1)));
    }
    let m = gaps.len() as f64;
    Ok(GapReport {
        mean: gaps.iter().sum::<f64>() / m,
        min: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        samples: gaps.len(),
    })
}

/// Mean curvature of the corrected curve with respect to the normal pointing out of
/// the layer, at interior samples. Returns `(r, H)` pairs.
pub fn boundary_mean_curvature(curve: &BoundaryCurve, n: usize) -> Result<Vec<(f64, f64)>> {
    let pc = curve.planar()?;
    let h = outward_mean_curvature(&pc, n, curve.side == Side::Plus)?;
    Ok(pc.r[1..pc.r.len() - 1].iter().copied().zip(h).collect())
}
