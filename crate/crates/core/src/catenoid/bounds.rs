use super::curve::excess_density;
use crate::error::{input, Result};
use crate::quad;
use serde::Serialize;

/// Outcome of a competitor search: the smallest weighted area found and the
/// explicit lower bound it is compared with (unknown constants set to zero).
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub lhs_min: f64,
    pub rhs: f64,
    /// `(r_hi^{n-1} - r_lo^{n-1})/(n-1)`, common to both sides.
    pub flat: f64,
    pub evaluations: usize,
}

impl BoundReport {
    /// `lhs_min - rhs`; the measured constant when it is positive.
    pub fn gap(&self) -> f64 {
        (self.lhs_min - self.flat) - (self.rhs - self.flat)
    }
}

/// The `n = 3` catenoid `z = sign * sigma * arccosh(r / sigma) + shift` through
/// `(r1, z1)` and `(r2, z2)` with `sigma <= r1` (both points on one branch).
#[derive(Clone, Copy, Debug)]
pub struct CatenoidArc {
    pub sigma: f64,
    pub shift: f64,
    pub sign: f64,
}

impl CatenoidArc {
    pub fn eval(&self, r: f64) -> f64 {
        self.sign * self.sigma * (r / self.sigma).max(1.0).acosh() + self.shift
    }

    pub fn slope(&self, r: f64) -> f64 {
        let q = (r / self.sigma).powi(2) - 1.0;
        self.sign / q.max(0.0).sqrt()
    }
}

/// Catenoid through two points; `None` when the height difference is zero or too
/// large for a graph over `[r1, r2]`.
pub fn catenoid_through(r1: f64, z1: f64, r2: f64, z2: f64) -> Option<CatenoidArc> {
    if !(r1 > 0.0 && r2 > r1) {
        return None;
    }
    let dz = (z2 - z1).abs();
    let h = |s: f64| s * ((r2 / s).acosh() - (r1 / s).max(1.0).acosh());
    let hmax = h(r1);
    if dz == 0.0 || dz > hmax * (1.0 + 1e-12) {
        return None;
    }
    let sigma = if dz >= hmax * (1.0 - 1e-14) {
        r1
    } else {
        quad::brent(|s| h(s) - dz, r1 * 1e-12, r1, 1e-15 * r1).ok()?
    };
    let sign = if z2 > z1 { 1.0 } else { -1.0 };
    let shift = z1 - sign * sigma * (r1 / sigma).max(1.0).acosh();
    Some(CatenoidArc { sigma, shift, sign })
}

/// Graphs `base + spline` on `[lo, hi]` with fixed end values; the spline is the
/// natural cubic through zero ends and eight movable interior knots.
struct CompetitorFamily<'a> {
    lo: f64,
    hi: f64,
    n: usize,
    base_slope: &'a dyn Fn(f64) -> f64,
    knots: Vec<f64>,
    monotone: Option<f64>,
    panels: Vec<(f64, f64, bool)>,
}

impl<'a> CompetitorFamily<'a> {
    const KNOTS: usize = 8;

    fn new(lo: f64, hi: f64, n: usize, base_slope: &'a dyn Fn(f64) -> f64) -> Self {
        let k = Self::KNOTS;
        let mut knots = vec![lo];
        knots.extend((1..=k).map(|j| lo * (hi / lo).powf(j as f64 / (k + 1) as f64)));
        knots.push(hi);
        let mut panels = Vec::new();
        for w in knots.windows(2) {
            let sub = 8;
            for s in 0..sub {
                let a = w[0] * (w[1] / w[0]).powf(s as f64 / sub as f64);
                let b = w[0] * (w[1] / w[0]).powf((s + 1) as f64 / sub as f64);
                panels.push((a, b, panels.is_empty()));
            }
        }
        CompetitorFamily { lo, hi, n, base_slope, knots, monotone: None, panels }
    }

    /// Slope of the natural cubic spline through `(knots, [0, v.., 0])`.
    fn spline_slope_fn(&self, v: &[f64]) -> impl Fn(f64) -> f64 + '_ {
        let x = &self.knots;
        let mut y = vec![0.0];
        y.extend_from_slice(v);
        y.push(0.0);
        let np = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        // tridiagonal solve for second derivatives, natural ends
        let mut mm = vec![0.0; np];
        let mut c = vec![0.0; np];
        let mut d = vec![0.0; np];
        for i in 1..np - 1 {
            let a = h[i - 1];
            let b = 2.0 * (h[i - 1] + h[i]);
            let cc = h[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..np - 1).rev() {
            mm[i] = d[i] - c[i] * mm[i + 1];
        }
        move |r: f64| {
            let i = x.partition_point(|&k| k <= r).clamp(1, np - 1) - 1;
            let hi = h[i];
            let (a, b) = (x[i + 1] - r, r - x[i]);
            -mm[i] * a * a / (2.0 * hi) + mm[i + 1] * b * b / (2.0 * hi) + (y[i + 1] - y[i]) / hi
                - (mm[i + 1] - mm[i]) * hi / 6.0
        }
    }

    fn flat(&self) -> f64 {
        let n1 = (self.n - 1) as f64;
        (self.hi.powf(n1) - self.lo.powf(n1)) / n1
    }

    fn area(&self, v: &[f64]) -> f64 {
        let ds = self.spline_slope_fn(v);
        let m = (self.n - 2) as i32;
        let mut violated = false;
        let mut excess = 0.0;
        for &(a, b, first) in &self.panels {
            let dens = |r: f64| (self.base_slope)(r) + ds(r);
            let f = |r: f64| excess_density(dens(r)) * r.powi(m);
            excess += if first {
                // r = a + (b - a) t^2 absorbs an inverse square-root slope at the start
                quad::gl_integrate(|t| f(a + (b - a) * t * t) * 2.0 * (b - a) * t, 0.0, 1.0)
            } else {
                quad::gl_integrate(f, a, b)
            };
            if let Some(sign) = self.monotone {
                if dens(0.5 * (a + b)) * sign < 0.0 {
                    violated = true;
                }
            }
        }
        if violated {
            f64::INFINITY
        } else {
            self.flat() + excess
        }
    }

    /// Coordinate descent over the knot values with three restarts.
    fn minimize(&self, scale: f64, budget_per_restart: usize) -> (f64, usize) {
        let k = Self::KNOTS;
        let mut best_all = self.area(&vec![0.0; k]);
        let mut evals = 1;
        for restart in 0..3 {
            let amp = match restart {
                0 => 0.0,
                1 => 0.1 * scale,
                _ => -0.1 * scale,
            };
            let mut v: Vec<f64> =
                (1..=k).map(|j| amp * (std::f64::consts::PI * j as f64 / (k + 1) as f64).sin()).collect();
            let mut best = self.area(&v);
            evals += 1;
            let mut step = 0.25 * scale;
            let mut used = 1;
            while used < budget_per_restart && step > 1e-9 * scale.max(1e-12) {
                let mut improved = false;
                for j in 0..k {
                    for sgn in [1.0, -1.0] {
                        let mut t = v.clone();
                        t[j] += sgn * step;
                        let a = self.area(&t);
                        used += 1;
                        if a < best {
                            best = a;
                            v = t;
                            improved = true;
                            break;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            evals += used;
            best_all = best_all.min(best);
        }
        (best_all, evals)
    }
}

const BUDGET: usize = 150;

/// Area of graphs on `[r0, a]` from height 0 to `k arccosh(a/k)` against
/// `a²/2 - r0²/2 + (k²/2) ln a` (n = 3).
pub fn bound_e1(r0: f64, a: f64, k: f64) -> Result<BoundReport> {
    if !(k > 0.0 && r0 >= k && r0 < a) {
        return input(format!("need 0 < k <= r0 < a, got k={k}, r0={r0}, a={a}"));
    }
    let za = k * (a / k).acosh();
    let arc = catenoid_through(r0, 0.0, a, za);
    let slope: Box<dyn Fn(f64) -> f64> = match arc {
        Some(c) => Box::new(move |r| c.slope(r)),
        None => Box::new(move |_| za / (a - r0)),
    };
    let fam = CompetitorFamily::new(r0, a, 3, slope.as_ref());
    let (lhs, evals) = fam.minimize(za.max(1.0), BUDGET);
    Ok(BoundReport {
        lhs_min: lhs,
        rhs: 0.5 * a * a - 0.5 * r0 * r0 + 0.5 * k * k * a.ln(),
        flat: fam.flat(),
        evaluations: evals,
    })
}

/// Area of graphs on `[b, a]` from `kbar ln b` to `k ln a` against
/// `a²/2 - b²/2 + (k ln a - kbar ln b)² / (2 ln(a/b))` (n = 3).
pub fn bound_y(b: f64, a: f64, k: f64, kbar: f64) -> Result<BoundReport> {
    if !(b > 1.0 && a >= 4.0 * b && k > 0.0 && kbar > 0.0) {
        return input(format!("need b > 1, a/b >= 4, positive slopes; got b={b}, a={a}, k={k}, kbar={kbar}"));
    }
    let (z1, z2) = (kbar * b.ln(), k * a.ln());
    let arc = catenoid_through(b, z1, a, z2);
    let slope: Box<dyn Fn(f64) -> f64> = match arc {
        Some(c) => Box::new(move |r| c.slope(r)),
        None => Box::new(move |_| (z2 - z1) / (a - b)),
    };
    let fam = CompetitorFamily::new(b, a, 3, slope.as_ref());
    let (lhs, evals) = fam.minimize((z2 - z1).abs().max(1.0), BUDGET);
    let dz = z2 - z1;
    Ok(BoundReport {
        lhs_min: lhs,
        rhs: 0.5 * a * a - 0.5 * b * b + 0.5 * dz * dz / (a / b).ln(),
        flat: fam.flat(),
        evaluations: evals,
    })
}

/// Area of monotone graphs on `[big_a, a]` from `kprime` to `k` in dimension `n > 3`
/// against `(a^{n-1} - A^{n-1})/(n-1) + sqrt(A) |k - kprime| / 2`.
pub fn bound_a2(big_a: f64, a: f64, k: f64, kprime: f64, n: usize) -> Result<BoundReport> {
    if n < 4 {
        return input(format!("the power-law comparison needs n > 3, got {n}"));
    }
    if !(big_a > 1.0 && a > big_a) {
        return input(format!("need 1 < A < a, got A={big_a}, a={a}"));
    }
    let p = 3.0 - n as f64;
    // minimizer of the quadratic approximation: affine in r^{3-n}
    let denom = big_a.powf(p) - a.powf(p);
    let dz = k - kprime;
    let slope = move |r: f64| dz * (-p) * r.powf(p - 1.0) / denom;
    let mut fam = CompetitorFamily::new(big_a, a, n, &slope);
    fam.monotone = Some(if dz >= 0.0 { 1.0 } else { -1.0 });
    let (lhs, evals) = fam.minimize(dz.abs().max(1e-3), BUDGET);
    let flat = fam.flat();
    Ok(BoundReport { lhs_min: lhs, rhs: flat + 0.5 * big_a.sqrt() * dz.abs(), flat, evaluations: evals })
}
