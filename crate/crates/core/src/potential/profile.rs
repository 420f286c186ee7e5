use super::{quintic_coeffs, quintic_eval, PotentialSpec};
use crate::error::{Error, Result};
use crate::quad;
use serde::Serialize;

/// The ε → 0 limit of the heteroclinic profile: `x` clipped to [-1, 1].
pub fn limit_profile(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `e_eps = 2 ∫_{-1}^{1} sqrt(F_eps)`, the energy of one heteroclinic transition.
pub fn e_eps(spec: &PotentialSpec) -> f64 {
    let e = spec.eps;
    let sq = |s: f64| spec.value(s).max(0.0).sqrt();
    let pieces = [(0.0, 0.5), (0.5, 1.0 - e), (1.0 - e, 1.0 - 0.5 * e)];
    let inner: f64 = pieces
        .iter()
        .map(|&(lo, hi)| quad::integrate(sq, lo, hi, 1e-13).expect("smooth integrand"))
        .sum();
    4.0 * (inner + e / 8.0)
}

/// Tabulated heteroclinic `H_eps` solving `H'' = F_eps'(H)/2`, `H(0) = 0`, `H(±∞) = ±1`.
///
/// On `[0, t_eps]` the profile is stored as quintic Hermite data (H, H', H'') on a
/// uniform grid; beyond `t_eps` the exact exponential tail is used.
#[derive(Clone, Debug)]
pub struct HeteroclinicProfile {
    pub eps: f64,
    pub t_eps: f64,
    pub tail_coeff: f64,
    pub samples: Vec<ProfileSample>,
    spec: PotentialSpec,
    segments: Vec<TableSegment>,
    table: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Copy, Debug)]
struct TableSegment {
    x0: f64,
    hx: f64,
    first: usize,
    n: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileSample {
    pub x: f64,
    pub h: f64,
    pub hp: f64,
}

impl HeteroclinicProfile {
    const INTERVALS: usize = 4096;
    const TAIL_INTERVALS: usize = 64;

    pub fn build(spec: &PotentialSpec, x_max: f64, n_samples: usize) -> Result<Self> {
        let eps = spec.eps;
        let top = 1.0 - 0.5 * eps;
        let inv_sqrt = |s: f64| 1.0 / spec.value(s).sqrt();
        let t_eps = [(0.0, 0.5), (0.5, 1.0 - eps), (1.0 - eps, top)]
            .iter()
            .map(|&(lo, hi)| quad::integrate(inv_sqrt, lo, hi, 1e-14))
            .sum::<Result<f64>>()?;
        // knots are aligned with H = 1 - eps, where F_eps switches to the bridge
        let knee = 1.0 - eps;
        let x_knee = [(0.0, 0.5), (0.5, knee)]
            .iter()
            .map(|&(lo, hi)| quad::integrate(inv_sqrt, lo, hi, 1e-14))
            .sum::<Result<f64>>()?;
        let node = |h: f64| {
            let (f, d, _) = spec.eval3(h);
            (h, f.sqrt(), 0.5 * d)
        };
        let mut table = vec![node(0.0)];
        let mut segments = Vec::new();
        for &(x0, x1, h_start, h_end, n) in
            &[(0.0, x_knee, 0.0, knee, Self::INTERVALS), (x_knee, t_eps, knee, top, Self::TAIL_INTERVALS)]
        {
            let hx = (x1 - x0) / n as f64;
            segments.push(TableSegment { x0, hx, first: table.len() - 1, n });
            let mut h = h_start;
            for i in 1..=n {
                let h0 = h;
                let mut guess = (h0 + hx * spec.value(h0).sqrt()).min(h_end);
                if i == n {
                    let drift = quad::gl_integrate(inv_sqrt, h0, h_end) - hx;
                    if drift.abs() > 1e-9 {
                        return Err(Error::Construction(format!("profile march drifted by {drift:e}")));
                    }
                    guess = h_end;
                } else {
                    for _ in 0..50 {
                        let g = quad::gl_integrate(inv_sqrt, h0, guess) - hx;
                        let step = g * spec.value(guess).sqrt();
                        guess = (guess - step).clamp(h0, h_end);
                        if step.abs() < 1e-16 {
                            break;
                        }
                    }
                }
                h = guess;
                table.push(node(h));
            }
        }
        let mut prof = HeteroclinicProfile {
            eps,
            t_eps,
            tail_coeff: 0.5 * eps * (t_eps / eps).exp(),
            samples: Vec::new(),
            spec: spec.clone(),
            segments,
            table,
        };
        let m = n_samples.max(2);
        prof.samples = (0..m)
            .map(|i| {
                let x = -x_max + 2.0 * x_max * i as f64 / (m - 1) as f64;
                ProfileSample { x, h: prof.value(x), hp: prof.deriv(x) }
            })
            .collect();
        Ok(prof)
    }

    fn node_x(&self, i: usize) -> f64 {
        let seg = if i <= self.segments[0].n { self.segments[0] } else { self.segments[1] };
        seg.x0 + (i - seg.first) as f64 * seg.hx
    }

    /// `1 - |H(x)|`, accurate in the exponential tail where `|H|` rounds to 1.
    pub fn gap_to_one(&self, x: f64) -> f64 {
        let y = x.abs();
        if y >= self.t_eps {
            0.5 * self.eps * ((self.t_eps - y) / self.eps).exp()
        } else {
            1.0 - self.value(y)
        }
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    /// `(H, H', H'')` at `x`.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let y = x.abs();
        let (v, d, dd) = if y >= self.t_eps {
            let q = 0.5 * self.eps * ((self.t_eps - y) / self.eps).exp();
            (1.0 - q, q / self.eps, -q / (self.eps * self.eps))
        } else {
            let v = self.interpolate(y).0;
            // derivatives from the first integral and the ODE, exact given H
            let (f, d, _) = self.spec.eval3(v);
            (v, f.sqrt(), 0.5 * d)
        };
        (sign * v, d, sign * dd)
    }

    /// Quintic Hermite interpolant and its slope at `0 <= y < t_eps`.
    fn interpolate(&self, y: f64) -> (f64, f64) {
        let seg = if y < self.segments[1].x0 { self.segments[0] } else { self.segments[1] };
        let u = (y - seg.x0) / seg.hx;
        let j = (u as usize).min(seg.n - 1);
        let t = u - j as f64;
        let i = seg.first + j;
        let (p0, d0, s0) = self.table[i];
        let (p1, d1, s1) = self.table[i + 1];
        let h = seg.hx;
        let c = quintic_coeffs(p0, h * d0, h * h * s0, p1, h * d1, h * h * s1);
        let (v, d, _) = quintic_eval(&c, t);
        (v, d / h)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval3(x).0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.eval3(x).1
    }

    /// Abscissa where `H = level`, for `|level| < 1`.
    pub fn inverse(&self, level: f64) -> f64 {
        let y = level.abs();
        let sign = if level < 0.0 { -1.0 } else { 1.0 };
        let top = 1.0 - 0.5 * self.eps;
        if y >= top {
            let q = (1.0 - y).max(1e-300);
            return sign * (self.t_eps - self.eps * (2.0 * q / self.eps).ln());
        }
        let i = self.table.partition_point(|e| e.0 <= y).clamp(1, self.table.len() - 1) - 1;
        let (lo, hi) = (self.node_x(i), self.node_x(i + 1));
        let x = quad::brent(|x| self.value(x) - y, lo, hi, 1e-15).unwrap_or(lo);
        sign * x
    }

    /// Largest `|H'^2 - F_eps(H)|` with `H'` the slope of the interpolant, sampled
    /// between and on the table nodes.
    pub fn first_integral_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let m = 4 * Self::INTERVALS;
        for i in 0..m {
            let (h, d) = self.interpolate(self.t_eps * i as f64 / m as f64);
            worst = worst.max((d * d - self.spec.value(h)).abs());
        }
        worst
    }

    /// `∫ (H'^2 + F_eps(H)) dx` over the real line.
    pub fn transition_energy(&self) -> f64 {
        let dens = |x: f64| {
            let (h, d, _) = self.eval3(x);
            d * d + self.spec.value(h)
        };
        let body: f64 = (0..self.table.len() - 1)
            .map(|i| quad::gl_integrate(dens, self.node_x(i), self.node_x(i + 1)))
            .sum();
        // tail: H'^2 + F = 2 H'^2 = (1/2) e^{-2(x - t)/eps}
        2.0 * (body + self.eps / 4.0)
    }
}
