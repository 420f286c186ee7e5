use super::Catenoid;
use crate::error::{input, Result};
use crate::quad;

/// Closed-form graphs with exact derivatives.
#[derive(Clone, Debug)]
pub enum Analytic {
    Flat(f64),
    /// `z = k ln r + b`.
    Log { k: f64, b: f64 },
    /// Upper branch of the catenoid shifted vertically by `shift`.
    Catenoid { catenoid: Catenoid, shift: f64 },
}

/// A graph `z = f(r)` given by samples with strictly increasing `r`.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub analytic: Option<Analytic>,
}

impl PlanarCurve {
    pub fn new(r: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if r.len() != z.len() {
            return input("r and z sample counts differ");
        }
        if r.len() < 2 {
            return input("a curve needs at least two samples");
        }
        if r.iter().chain(&z).any(|v| !v.is_finite()) || r[0] <= 0.0 {
            return input("curve samples must be finite with r > 0");
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return input("curve radii must be strictly increasing");
        }
        Ok(PlanarCurve { r, z, analytic: None })
    }

    /// Samples an analytic graph at `count` points spread uniformly on `[r1, r2]`.
    pub fn from_analytic(a: Analytic, r1: f64, r2: f64, count: usize) -> Result<Self> {
        let r: Vec<f64> = (0..count).map(|i| r1 + (r2 - r1) * i as f64 / (count - 1) as f64).collect();
        let z = r.iter().map(|&x| analytic_eval(&a, x)).collect::<Result<Vec<_>>>()?;
        let mut c = PlanarCurve::new(r, z)?;
        c.analytic = Some(a);
        Ok(c)
    }

    /// Monotone cubic (Fritsch-Carlson) slopes at the samples.
    pub fn pchip_slopes(&self) -> Vec<f64> {
        let n = self.r.len();
        let h: Vec<f64> = self.r.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (self.z[i + 1] - self.z[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            return vec![del[0]; 2];
        }
        for i in 1..n - 1 {
            if del[i - 1] * del[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        d[0] = end(h[0], h[1], del[0], del[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        d
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

fn analytic_eval(a: &Analytic, r: f64) -> Result<f64> {
    Ok(match a {
        Analytic::Flat(c) => *c,
        Analytic::Log { k, b } => k * r.ln() + b,
        Analytic::Catenoid { catenoid, shift } => catenoid.eval(r)? + shift,
    })
}

fn analytic_slope(a: &Analytic, r: f64) -> f64 {
    match a {
        Analytic::Flat(_) => 0.0,
        Analytic::Log { k, .. } => k / r,
        Analytic::Catenoid { catenoid, .. } => catenoid.slope(r),
    }
}

/// `f'^2 / (1 + sqrt(1 + f'^2))`, the area density minus one, without cancellation.
#[inline]
pub(crate) fn excess_density(d: f64) -> f64 {
    let d2 = d * d;
    if d2.is_infinite() {
        return f64::INFINITY;
    }
    d2 / (1.0 + (1.0 + d2).sqrt())
}

/// `∫_{r1}^{r2} sqrt(1 + f'^2) r^{n-2} dr`.
pub fn weighted_area(curve: &PlanarCurve, r1: f64, r2: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return input(format!("dimension must be at least 3, got {n}"));
    }
    if curve.r.windows(2).any(|w| w[1] <= w[0]) {
        return input("curve radii must be strictly increasing");
    }
    let (lo, hi) = (curve.r[0], curve.r[curve.r.len() - 1]);
    if r1 < lo - 1e-12 * lo.abs() || r2 > hi + 1e-12 * hi.abs() || r1 > r2 {
        return input(format!("[{r1}, {r2}] is not inside the curve support [{lo}, {hi}]"));
    }
    let m = (n - 2) as i32;
    let n1 = (n - 1) as f64;
    let flat = (r2.powf(n1) - r1.powf(n1)) / n1;
    let excess = match &curve.analytic {
        Some(Analytic::Catenoid { catenoid, .. }) if catenoid.dim == n => catenoid.area_excess(r1, r2)?,
        Some(a) => {
            let a = a.clone();
            quad::integrate(move |r| excess_density(analytic_slope(&a, r)) * r.powi(m), r1, r2, 1e-12)?
        }
        None => {
            let d = curve.pchip_slopes();
            let mut acc = 0.0;
            for i in 0..curve.r.len() - 1 {
                let (x0, x1) = (curve.r[i], curve.r[i + 1]);
                let (a, b) = (x0.max(r1), x1.min(r2));
                if b <= a {
                    continue;
                }
                let h = x1 - x0;
                let del = (curve.z[i + 1] - curve.z[i]) / h;
                let (d0, d1) = (d[i], d[i + 1]);
                let slope = |r: f64| {
                    let t = (r - x0) / h;
                    // derivative of the cubic Hermite interpolant
                    let c2 = 3.0 * del - 2.0 * d0 - d1;
                    let c3 = d0 + d1 - 2.0 * del;
                    d0 + 2.0 * c2 * t + 3.0 * c3 * t * t
                };
                acc += quad::gl_integrate(|r| excess_density(slope(r)) * r.powi(m), a, b);
            }
            acc
        }
    };
    Ok(flat + excess)
}

/// Divergence-form mean curvature `r^{-(n-2)} (r^{n-2} f' / sqrt(1 + f'^2))'` at the
/// interior samples, by differencing midpoint fluxes. Positive for graphs bending
/// upward (normal pointing to +z).
pub fn mean_curvature(curve: &PlanarCurve, n: usize) -> Result<Vec<f64>> {
    if curve.len() < 5 {
        return input(format!("mean curvature needs at least 5 samples, got {}", curve.len()));
    }
    let m = (n - 2) as i32;
    let flux: Vec<(f64, f64)> = curve
        .r
        .windows(2)
        .zip(curve.z.windows(2))
        .map(|(r, z)| {
            let (dr, dz) = (r[1] - r[0], z[1] - z[0]);
            let rm = 0.5 * (r[0] + r[1]);
            (rm, rm.powi(m) * dz / dr.hypot(dz))
        })
        .collect();
    Ok(flux
        .windows(2)
        .zip(&curve.r[1..curve.r.len() - 1])
        .map(|(f, &r)| (f[1].1 - f[0].1) / ((f[1].0 - f[0].0) * r.powi(m)))
        .collect())
}

/// Mean curvature with respect to the normal pointing out of the transition layer
/// `{|u| < 1}`: upward for the upper boundary (`plus`), downward for the lower one.
pub fn outward_mean_curvature(curve: &PlanarCurve, n: usize, plus_side: bool) -> Result<Vec<f64>> {
    let h = mean_curvature(curve, n)?;
    Ok(if plus_side { h } else { h.into_iter().map(|v| -v).collect() })
}
