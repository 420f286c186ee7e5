use crate::catenoid::Catenoid;
use crate::error::{Error, Result};
use crate::grid::AxiGrid;
use crate::quad;

/// The nested catenoid family through the boundary point `(a, z_cat)`:
/// `Z_σ(r) = z_cat - σ [Z₁(a/σ) - Z₁(r/σ)]` with `Z₁` the unit-neck catenoid.
///
/// For `σ <= sigma_k` the neck sits at height `d(σ) >= 0`; for larger `σ` the
/// branch meets the floor at `foot(σ)`. Path members combine the branch region with
/// a horizontal cap `{|z| < d}` over the neck.
#[derive(Clone, Debug)]
pub struct CatenoidSweep {
    pub a: f64,
    pub z_cat: f64,
    pub sigma_k: f64,
    pub sigma_wide: f64,
    /// Neck radius maximizing `σ Z₁(a/σ)`.
    pub sigma_max: f64,
    unit: Catenoid,
}

/// Boundary of the branch region `{r >= σ, |z| < Z_σ(r)}`, symmetric in `z`.
#[derive(Clone, Debug)]
pub struct NodalCurve {
    pub sigma: f64,
    /// Neck height (negative once the neck is below the floor).
    pub d: f64,
    pub points: Vec<(f64, f64)>,
}

impl CatenoidSweep {
    pub fn new(grid: &AxiGrid) -> Result<Self> {
        let unit = Catenoid::centered(grid.dim, 1.0)?;
        let a = grid.a;
        let z_cat = grid.z_cat;
        let z1 = |t: f64| unit.eval_unchecked(t.max(1.0));
        let phi = |t: f64| z1(t) - t * unit.slope(t);
        // f(σ) = σ Z₁(a/σ) is concave with f' = φ(a/σ); it peaks at a/t*
        let t_star = quad::brent(phi, 1.0 + 1e-9, 1e8, 1e-12)?;
        let sigma_max = a / t_star;
        let f = |s: f64| s * z1(a / s) - z_cat;
        if f(sigma_max) <= 0.0 {
            return Err(Error::Construction(format!("no catenoid of the family reaches height {z_cat} at r = {a}")));
        }
        let sigma_k = quad::brent(f, 1e-9 * sigma_max, sigma_max, 1e-14 * a)?;
        let sigma_wide = quad::brent(f, sigma_max, a * (1.0 - 1e-15), 1e-14 * a)?;
        Ok(CatenoidSweep { a, z_cat, sigma_k, sigma_wide, sigma_max, unit })
    }

    /// Neck radius of the member used for the vertical initial state.
    pub fn sigma_vertical(&self) -> f64 {
        0.5 * (self.sigma_max + self.sigma_wide)
    }

    fn z1(&self, t: f64) -> f64 {
        self.unit.eval_unchecked(t.max(1.0))
    }

    pub fn neck_height(&self, sigma: f64) -> f64 {
        self.z_cat - sigma * self.z1(self.a / sigma)
    }

    /// Neck radius for a given neck height in `[0, z_cat)`.
    pub fn sigma_for_height(&self, d: f64) -> Result<f64> {
        if d <= 0.0 {
            return Ok(self.sigma_k);
        }
        quad::brent(|s| self.neck_height(s) - d, 1e-14 * self.sigma_k, self.sigma_k, 1e-15 * self.sigma_k)
    }

    /// Branch height `Z_σ(r)` for `r >= σ`.
    pub fn branch(&self, sigma: f64, r: f64) -> f64 {
        self.neck_height(sigma) + sigma * self.z1(r / sigma)
    }

    /// Where the branch meets `z = 0` (the neck radius while `d >= 0`).
    pub fn foot(&self, sigma: f64) -> f64 {
        let d = self.neck_height(sigma);
        if d >= 0.0 {
            return sigma;
        }
        quad::brent(|r| self.branch(sigma, r), sigma, self.a, 1e-14 * self.a).unwrap_or(sigma)
    }

    /// Whether `(r, z)` lies in the branch region of member `σ`.
    pub fn inside_branch(&self, sigma: f64, r: f64, z: f64) -> bool {
        r >= sigma && z.abs() < self.branch(sigma, r)
    }

    /// The boundary of the branch region sampled with spacing at most `h`: the
    /// branch above the floor, its mirror image below, joined through the neck wall
    /// while the neck is above the floor. Continued horizontally past `(a, z_cat)`.
    pub fn curve(&self, sigma: f64, h: f64, reach: f64) -> NodalCurve {
        let d = self.neck_height(sigma);
        let m = self.unit.dim as f64 - 2.0;
        let start = if d >= 0.0 {
            0.0
        } else {
            let target = -d / sigma;
            quad::brent(|s| self.unit.param(s).1 - target, 0.0, 60.0, 1e-15).unwrap_or(0.0)
        };
        let mut upper = Vec::new();
        let s_end = ((self.a / sigma).powf(m)).acosh() / m;
        let mut s = start;
        while s < s_end {
            let (r1, z1) = self.unit.param(s);
            upper.push((sigma * r1, (d + sigma * z1).max(0.0)));
            let speed = sigma * (m * s).cosh().powf(1.0 / m);
            s += h / speed;
        }
        // every member shares the horizontal continuation beyond (a, z_cat)
        upper.push((self.a, self.z_cat));
        upper.push((self.a + reach, self.z_cat));
        let mut points: Vec<(f64, f64)> = upper.iter().rev().map(|&(r, z)| (r, -z)).collect();
        if d < 0.0 {
            points.pop();
        }
        points.extend(upper);
        NodalCurve { sigma, d, points }
    }
}

/// Signed Euclidean distance to `curve`, cut off at `cutoff`; negative where
/// `inside` holds.
pub fn signed_distance(grid: &AxiGrid, curve: &NodalCurve, inside: impl Fn(f64, f64) -> bool, cutoff: f64) -> Vec<f64> {
    let s = grid.nz + 1;
    let mut d2 = vec![cutoff * cutoff; grid.len()];
    {
        for w in curve.points.windows(2) {
            let (p, q) = (w[0], w[1]);
            let i0 = ((p.0.min(q.0) - cutoff) / grid.hr).floor().max(0.0) as usize;
            let i1 = (((p.0.max(q.0) + cutoff) / grid.hr).ceil().max(0.0) as usize).min(grid.nr);
            let j0 = ((p.1.min(q.1) - cutoff) / grid.hz).floor().max(0.0) as usize;
            let j1 = (((p.1.max(q.1) + cutoff) / grid.hz).ceil().max(0.0) as usize).min(grid.nz);
            if i0 > i1 || j0 > j1 {
                continue;
            }
            let (dx, dy) = (q.0 - p.0, q.1 - p.1);
            let len2 = dx * dx + dy * dy;
            for i in i0..=i1 {
                let r = grid.r(i);
                for j in j0..=j1 {
                    let z = grid.z(j);
                    let t = if len2 > 0.0 { (((r - p.0) * dx + (z - p.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
                    let (ex, ey) = (r - p.0 - t * dx, z - p.1 - t * dy);
                    let e = ex * ex + ey * ey;
                    let slot = &mut d2[i * s + j];
                    if e < *slot {
                        *slot = e;
                    }
                }
            }
        }
    }
    let mut out = d2;
    for i in 0..=grid.nr {
        for j in 0..=grid.nz {
            let v = &mut out[i * s + j];
            let dist = v.sqrt();
            *v = if inside(grid.r(i), grid.z(j)) { -dist } else { dist };
        }
    }
    out
}
