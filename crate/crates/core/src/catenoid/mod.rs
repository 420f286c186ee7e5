//! Catenoids in `R^n` as graphs `z = f(r)` over the radial variable, weighted areas
//! `∫ sqrt(1 + f'^2) r^{n-2} dr`, mean curvature of surfaces of revolution and
//! quadrature certificates for the area comparison inequalities.

mod bounds;
mod curve;
mod verify;

pub use bounds::{bound_a2, bound_e1, bound_y, catenoid_through, BoundReport};
pub use curve::{mean_curvature, outward_mean_curvature, weighted_area, Analytic, PlanarCurve};
pub use verify::{verify_suite, LemmaCheck};

use crate::error::{domain, Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Neck radius equals the scale.
    Centered,
    /// Height limit at infinity equals the scale (n > 3 only).
    Asymptotic,
}

/// Unit-neck catenoid in dimension `n > 3`, parametrized by
/// `r = cosh(m s)^{1/m}`, `z = ∫_0^s cosh(m t)^{-(n-3)/m} dt`, `m = n - 2`.
#[derive(Debug)]
struct UnitProfile {
    m: f64,
    p: f64,
    ds: f64,
    cumulative: Vec<f64>,
    limit: f64,
}

impl UnitProfile {
    const S_MAX: f64 = 40.0;
    const STEPS: usize = 4000;

    fn new(n: usize) -> Self {
        let m = (n - 2) as f64;
        let p = (n - 3) as f64 / m;
        let ds = Self::S_MAX / Self::STEPS as f64;
        let g = |t: f64| (m * t).cosh().powf(-p);
        let mut cumulative = vec![0.0];
        let mut acc = 0.0;
        for i in 0..Self::STEPS {
            acc += quad::gl_integrate(g, i as f64 * ds, (i + 1) as f64 * ds);
            cumulative.push(acc);
        }
        let limit = acc + Self::tail(m, p, Self::S_MAX);
        UnitProfile { m, p, ds, cumulative, limit }
    }

    /// `∫_s^∞ cosh(m t)^{-p} dt` for large `s`.
    fn tail(m: f64, p: f64, s: f64) -> f64 {
        2f64.powf(p) * (-m * p * s).exp() / (m * p)
    }

    fn height(&self, s: f64) -> f64 {
        if s >= Self::S_MAX {
            return self.limit - Self::tail(self.m, self.p, s);
        }
        let i = (s / self.ds) as usize;
        let (m, p) = (self.m, self.p);
        self.cumulative[i] + quad::gl_integrate(|t| (m * t).cosh().powf(-p), i as f64 * self.ds, s)
    }

    /// Remaining height `limit - height(s)`, accurate for large `s`.
    fn deficit(&self, s: f64) -> f64 {
        if s >= 0.5 * Self::S_MAX {
            let (m, p) = (self.m, self.p);
            let end = Self::S_MAX.max(s);
            let near = if s < end { quad::gl_integrate(|t| (m * t).cosh().powf(-p), s, end) } else { 0.0 };
            near + Self::tail(m, p, end)
        } else {
            self.limit - self.height(s)
        }
    }
}

fn unit_profile(n: usize) -> Arc<UnitProfile> {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(usize, Arc<UnitProfile>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("catenoid cache");
    if let Some((_, u)) = guard.iter().find(|(d, _)| *d == n) {
        return u.clone();
    }
    let u = Arc::new(UnitProfile::new(n));
    guard.push((n, u.clone()));
    u
}

/// Height limit `c_n` of the unit-neck catenoid (n > 3).
pub fn height_limit(n: usize) -> Result<f64> {
    if n <= 3 {
        return domain("catenoids in R^3 are unbounded; the height limit exists only for n > 3");
    }
    Ok(unit_profile(n).limit)
}

/// Coefficient `c'_n` in `z ≈ c_n - c'_n r^{3-n}` for the unit-neck catenoid.
pub fn decay_coefficient(n: usize) -> Result<f64> {
    if n <= 3 {
        return domain("the power-law approach exists only for n > 3");
    }
    Ok(1.0 / (n as f64 - 3.0))
}

/// `δ = (1 - 2^{-1/(n-2)}) / (2(n-2))`, the excess-area constant.
/// For `n = 3` the formula is evaluable but outside the lemma's range.
pub fn excess_delta(n: usize) -> Result<f64> {
    if n < 3 {
        return domain(format!("dimension must be at least 3, got {n}"));
    }
    if n == 3 {
        log::warn!("excess constant requested for n = 3, where the area excess grows like ln a");
    }
    let m = (n - 2) as f64;
    Ok((1.0 - 0.5f64.powf(1.0 / m)) / (2.0 * m))
}

#[derive(Clone, Debug)]
pub struct Catenoid {
    pub dim: usize,
    pub scale: f64,
    pub convention: Convention,
    neck: f64,
    unit: Option<Arc<UnitProfile>>,
}

impl Catenoid {
    pub fn new(dim: usize, scale: f64, convention: Convention) -> Result<Self> {
        if dim < 3 {
            return domain(format!("dimension must be at least 3, got {dim}"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return domain(format!("scale must be positive, got {scale}"));
        }
        let unit = if dim > 3 { Some(unit_profile(dim)) } else { None };
        let neck = match convention {
            Convention::Centered => scale,
            Convention::Asymptotic => scale / height_limit(dim)?,
        };
        Ok(Catenoid { dim, scale, convention, neck, unit })
    }

    pub fn centered(dim: usize, neck: f64) -> Result<Self> {
        Self::new(dim, neck, Convention::Centered)
    }

    pub fn neck(&self) -> f64 {
        self.neck
    }

    fn m(&self) -> f64 {
        (self.dim - 2) as f64
    }

    /// Height limit at infinity, if finite.
    pub fn limit_height(&self) -> Option<f64> {
        self.unit.as_ref().map(|u| self.neck * u.limit)
    }

    /// `y = m s = arccosh((r/neck)^m)`.
    fn y_of(&self, r: f64) -> f64 {
        let rho = r / self.neck;
        let m = self.m();
        let lr = m * rho.ln();
        if lr > 30.0 {
            lr + std::f64::consts::LN_2 - 0.25 * (-2.0 * lr).exp()
        } else {
            rho.powf(m).acosh()
        }
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if !(r >= self.neck * (1.0 - 1e-14)) {
            return domain(format!("r = {r} lies inside the neck radius {}", self.neck));
        }
        Ok(())
    }

    /// Height of the upper branch at radius `r >= neck`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(self.eval_unchecked(r.max(self.neck)))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        let y = self.y_of(r);
        match &self.unit {
            None => self.neck * y,
            Some(u) => self.neck * u.height(y / self.m()),
        }
    }

    /// `limit - z(r)` for n > 3, without cancellation at large `r`.
    pub fn deficit(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        match &self.unit {
            None => domain("no height limit for n = 3"),
            Some(u) => Ok(self.neck * u.deficit(self.y_of(r) / self.m())),
        }
    }

    /// Radius on the upper branch at height `z`.
    pub fn inverse(&self, z: f64) -> Result<f64> {
        if z < 0.0 {
            return domain(format!("height must be non-negative, got {z}"));
        }
        let m = self.m();
        let y = match &self.unit {
            None => z / self.neck,
            Some(u) => {
                let target = z / self.neck;
                if target >= u.limit {
                    return domain(format!("height {z} is above the catenoid limit"));
                }
                let p = u.p;
                // Newton on s with the monotone profile height
                let mut s = target;
                for _ in 0..100 {
                    let g = u.height(s) - target;
                    let step = g * (m * s).cosh().powf(p);
                    let next = (s - step).max(0.5 * s);
                    if (next - s).abs() < 1e-15 * s.max(1.0) {
                        s = next;
                        break;
                    }
                    s = next;
                }
                m * s
            }
        };
        Ok(self.neck * y.cosh().powf(1.0 / m))
    }

    /// Point `(r, z)` at parameter `s`.
    pub fn param(&self, s: f64) -> (f64, f64) {
        let m = self.m();
        let r = self.neck * (m * s).cosh().powf(1.0 / m);
        let z = match &self.unit {
            None => self.neck * s,
            Some(u) => self.neck * u.height(s),
        };
        (r, z)
    }

    /// `dz/dr = 1 / sqrt((r/neck)^{2m} - 1)`.
    pub fn slope(&self, r: f64) -> f64 {
        let rho2m = (r / self.neck).powf(2.0 * self.m());
        1.0 / (rho2m - 1.0).sqrt()
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let m = self.m();
        let rho = r / self.neck;
        let q = rho.powf(2.0 * m);
        -m * q / rho / (self.neck * (q - 1.0).powf(1.5))
    }

    /// Residual of `f''/(1+f'^2) + (n-2) f'/r = 0`.
    pub fn ode_residual(&self, r: f64) -> f64 {
        let d = self.slope(r);
        self.second_derivative(r) / (1.0 + d * d) + self.m() * d / r
    }

    /// Rescaling `(r, z) -> (t r, t z)`.
    pub fn scaled(&self, t: f64) -> Result<Catenoid> {
        Catenoid::new(self.dim, self.scale * t, self.convention)
    }

    /// `∫_{r1}^{r2} sqrt(1+f'^2) r^{n-2} dr - (r2^{n-1} - r1^{n-1})/(n-1)` for the
    /// centered graph, via `(neck^{n-1}/m) ∫ cosh(y)^{1/m} e^{-y} dy`.
    pub fn area_excess(&self, r1: f64, r2: f64) -> Result<f64> {
        self.check_r(r1)?;
        if r2 < r1 {
            return Err(Error::Input(format!("need r1 <= r2, got [{r1}, {r2}]")));
        }
        let (y1, y2) = (self.y_of(r1.max(self.neck)), self.y_of(r2));
        let m = self.m();
        let scale = self.neck.powf(m + 1.0) / m;
        if self.dim == 3 {
            return Ok(scale * (0.5 * (y2 - y1) + 0.25 * ((-2.0 * y1).exp() - (-2.0 * y2).exp())));
        }
        let g = |y: f64| ((1.0 + (-2.0 * y).exp()) / 2.0).powf(1.0 / m) * (y * (1.0 / m - 1.0)).exp();
        Ok(scale * quad::integrate(g, y1, y2, 1e-13)?)
    }

    /// Weighted area of the graph between `r1` and `r2`.
    pub fn area(&self, r1: f64, r2: f64) -> Result<f64> {
        let n1 = (self.dim - 1) as f64;
        Ok((r2.powf(n1) - r1.powf(n1)) / n1 + self.area_excess(r1, r2)?)
    }
}
