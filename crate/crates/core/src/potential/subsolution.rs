use super::{HeteroclinicProfile, PotentialSpec};
use crate::error::{domain, Error, Result};
use crate::quad;

/// Root in (0, eps) of the cubic that bends the profile up to exactly 1 past `x = 2`:
/// `H(2) + H'(2) d + H''(2) d^2 / 2 + (1 - H(2)) d^3 / eps^4 = 1`.
pub fn delta_eps(profile: &HeteroclinicProfile) -> Result<f64> {
    let eps = profile.eps;
    let (_, d1, d2) = profile.eval3(2.0);
    let q = profile.gap_to_one(2.0);
    let c3 = q / eps.powi(4);
    // g' = d1 + d2 x + 3 c3 x^2 has no real root when d2^2 < 12 c3 d1
    if d2 * d2 >= 12.0 * c3 * d1 {
        return Err(Error::Construction("delta cubic is not monotone on (0, eps)".into()));
    }
    // divided by q: the cubic is an O(1) polynomial in d / eps
    let g = |d: f64| (-q + d1 * d + 0.5 * d2 * d * d + c3 * d * d * d) / q;
    quad::brent(g, 0.0, eps, 1e-16 * eps)
}

/// The piecewise C² subsolution profile: a lower quadratic cap on `[-l-eps, -l]`,
/// the heteroclinic on `[-l, 2]` and a cubic on `[2, 2 + delta]` reaching 1.
#[derive(Clone, Debug)]
pub struct SubsolutionProfile {
    pub eps: f64,
    pub l: f64,
    pub delta_eps: f64,
    profile: HeteroclinicProfile,
    top: [f64; 4],
    bottom: [f64; 3],
}

impl SubsolutionProfile {
    pub fn build(profile: &HeteroclinicProfile, l: f64) -> Result<Self> {
        if !(l > 2.0) {
            return domain(format!("subsolution half-length must exceed 2, got {l}"));
        }
        let eps = profile.eps;
        let delta = delta_eps(profile)?;
        let (h2, d2, s2) = profile.eval3(2.0);
        let (hl, dl, sl) = profile.eval3(l);
        let q2 = profile.gap_to_one(2.0);
        Ok(SubsolutionProfile {
            eps,
            l,
            delta_eps: delta,
            profile: profile.clone(),
            top: [h2, d2, 0.5 * s2, q2 / eps.powi(4)],
            bottom: [-hl, dl, -0.5 * sl],
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (-self.l - self.eps, 2.0 + self.delta_eps)
    }

    pub fn spec(&self) -> &PotentialSpec {
        self.profile.spec()
    }

    /// `(w, w', w'')` without the domain check.
    pub fn eval3_unchecked(&self, x: f64) -> (f64, f64, f64) {
        if x > 2.0 {
            let d = x - 2.0;
            let c = &self.top;
            (
                c[0] + d * (c[1] + d * (c[2] + d * c[3])),
                c[1] + d * (2.0 * c[2] + 3.0 * d * c[3]),
                2.0 * c[2] + 6.0 * d * c[3],
            )
        } else if x < -self.l {
            let y = x + self.l;
            let c = &self.bottom;
            (c[0] + y * (c[1] + y * c[2]), c[1] + 2.0 * y * c[2], 2.0 * c[2])
        } else {
            self.profile.eval3(x)
        }
    }

    pub fn eval3(&self, x: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.domain();
        if x < lo - 1e-12 || x > hi + 1e-12 {
            return domain(format!("subsolution evaluated at {x} outside [{lo}, {hi}]"));
        }
        Ok(self.eval3_unchecked(x))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval3(x)?.0)
    }

    /// `-w'' + F_eps'(w)/2`; non-positive on the whole domain.
    pub fn residual(&self, x: f64) -> Result<f64> {
        let (w, _, dd) = self.eval3(x)?;
        Ok(-dd + 0.5 * self.spec().deriv(w.clamp(-1.0, 1.0)))
    }
}
