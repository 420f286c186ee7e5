//! Regularized double-well potentials `F_eps`, the heteroclinic profile and the
//! subsolution profile used as boundary data.

mod profile;
mod subsolution;

pub use profile::{e_eps, HeteroclinicProfile, limit_profile};
pub use subsolution::{delta_eps, SubsolutionProfile};

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

const EXP_M1: f64 = 0.367_879_441_171_442_33;

/// Quintic Hermite data on the unit interval: value, slope and curvature at both ends,
/// already scaled by the interval length.
pub(crate) fn quintic_coeffs(p0: f64, m0: f64, c0: f64, p1: f64, m1: f64, c1: f64) -> [f64; 6] {
    let dp = p1 - p0;
    [
        p0,
        m0,
        0.5 * c0,
        10.0 * dp - 6.0 * m0 - 4.0 * m1 - 0.5 * (3.0 * c0 - c1),
        -15.0 * dp + 8.0 * m0 + 7.0 * m1 + 0.5 * (3.0 * c0 - 2.0 * c1),
        6.0 * dp - 3.0 * (m0 + m1) - 0.5 * (c0 - c1),
    ]
}

#[inline]
pub(crate) fn quintic_eval(c: &[f64; 6], u: f64) -> (f64, f64, f64) {
    let v = c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * (c[4] + u * c[5]))));
    let d = c[1] + u * (2.0 * c[2] + u * (3.0 * c[3] + u * (4.0 * c[4] + u * 5.0 * c[5])));
    let dd = 2.0 * c[2] + u * (6.0 * c[3] + u * (12.0 * c[4] + u * 20.0 * c[5]));
    (v, d, dd)
}

/// The regularized potential `F_eps` together with its building blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub eps: f64,
    /// Bridge coefficients in the local variable `u = 2t - 1`, `t` in [1/2, 1].
    pub blend_knots: [f64; 6],
    /// Smoothstep coefficients in `t` on [0, 1]; the cutoff is `1 - S(s + 1/2)`.
    pub rho_poly: [f64; 6],
}

impl PotentialSpec {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 0.25) {
            return domain(format!("eps must lie in (0, 0.25], got {eps}"));
        }
        let h = 0.5;
        let blend_knots = quintic_coeffs(0.25, h * 1.0, h * h * 2.0, 1.0 - EXP_M1, h * EXP_M1, -h * h * EXP_M1);
        let spec = PotentialSpec { eps, blend_knots, rho_poly: [0.0, 0.0, 0.0, 10.0, -15.0, 6.0] };
        spec.check_bridge()?;
        Ok(spec)
    }

    fn check_bridge(&self) -> Result<()> {
        let n = 20_000;
        for i in 0..=n {
            let t = 0.5 + 0.5 * i as f64 / n as f64;
            let (_, d, dd) = self.fbar3(t);
            if d <= 0.0 {
                return Err(crate::Error::Construction(format!("bridge not increasing at {t}")));
            }
            if t > 0.75 && dd >= 0.0 {
                return Err(crate::Error::Construction(format!("bridge not concave at {t}")));
            }
        }
        Ok(())
    }

    /// `F̄` with its first two derivatives, for `t >= 0`.
    #[inline]
    pub fn fbar3(&self, t: f64) -> (f64, f64, f64) {
        if t <= 0.5 {
            (t * t, 2.0 * t, 2.0)
        } else if t > 1.0 {
            let e = (-t).exp();
            (1.0 - e, e, -e)
        } else {
            let (v, d, dd) = quintic_eval(&self.blend_knots, 2.0 * t - 1.0);
            (v, 2.0 * d, 4.0 * dd)
        }
    }

    /// Cutoff `rho` with derivatives.
    #[inline]
    pub fn rho3(&self, s: f64) -> (f64, f64, f64) {
        if s <= -0.5 {
            (1.0, 0.0, 0.0)
        } else if s >= 0.5 {
            (0.0, 0.0, 0.0)
        } else {
            let (v, d, dd) = quintic_eval(&self.rho_poly, s + 0.5);
            (1.0 - v, -d, -dd)
        }
    }

    pub fn rho(&self, s: f64) -> f64 {
        self.rho3(s).0
    }

    /// `F_eps(s)`, `F_eps'(s)`, `F_eps''(s)` for `|s| <= 1` (unchecked).
    #[inline]
    pub fn eval3(&self, s: f64) -> (f64, f64, f64) {
        let e = self.eps;
        if s >= 0.5 {
            let (v, d, dd) = self.fbar3((1.0 - s) / e);
            return (v, -d / e, dd / (e * e));
        }
        if s <= -0.5 {
            let (v, d, dd) = self.fbar3((1.0 + s) / e);
            return (v, d / e, dd / (e * e));
        }
        let (ra, rd, rdd) = self.rho3(s);
        let (fa, da, dda) = self.fbar3((1.0 + s) / e);
        let (fb, db, ddb) = self.fbar3((1.0 - s) / e);
        let v = ra * fa + (1.0 - ra) * fb;
        let d = rd * (fa - fb) + (ra * da - (1.0 - ra) * db) / e;
        let dd = rdd * (fa - fb) + 2.0 * rd * (da + db) / e + (ra * dda + (1.0 - ra) * ddb) / (e * e);
        (v, d, dd)
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        self.eval3(s).0
    }

    #[inline]
    pub fn deriv(&self, s: f64) -> f64 {
        self.eval3(s).1
    }

    /// Upper bound for `F_eps''` on [-1, 1].
    pub fn max_second(&self) -> f64 {
        2.0 / (self.eps * self.eps)
    }

    pub fn feps_eval(&self, s: f64) -> Result<f64> {
        check_unit(s)?;
        Ok(self.value(s))
    }

    pub fn feps_deriv(&self, s: f64) -> Result<f64> {
        check_unit(s)?;
        Ok(self.deriv(s))
    }

    /// Tabulated half-derivative `F_eps'/2` for the flow's inner loop.
    pub fn reaction_table(&self) -> ReactionTable {
        ReactionTable::new(self)
    }
}

fn check_unit(s: f64) -> Result<()> {
    if !(s.abs() <= 1.0) {
        return domain(format!("potential argument must satisfy |s| <= 1, got {s}"));
    }
    Ok(())
}

/// `F̄` on `[0, inf)`.
pub fn fbar_eval(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("F-bar is defined for s >= 0, got {s}"));
    }
    thread_local! {
        static SPEC: PotentialSpec = PotentialSpec::new(0.25).expect("bridge");
    }
    Ok(SPEC.with(|p| p.fbar3(s).0))
}

/// Everything a discretization needs from one `eps`: the potential, its reaction
/// table, the heteroclinic profile and the transition energy `e_eps`.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: PotentialSpec,
    pub reaction: ReactionTable,
    pub profile: HeteroclinicProfile,
    pub e_eps: f64,
}

impl Model {
    pub fn new(eps: f64) -> Result<Self> {
        let spec = PotentialSpec::new(eps)?;
        let profile = HeteroclinicProfile::build(&spec, 3.0, 11)?;
        Ok(Model { reaction: spec.reaction_table(), e_eps: e_eps(&spec), profile, spec })
    }
}

/// Piecewise cubic Hermite table of `F_eps'/2`, exact (linear) in the quadratic
/// wells `|s| >= 1 - eps/2`. Knots are aligned with the bridge junctions.
#[derive(Clone, Debug)]
pub struct ReactionTable {
    inv_eps2: f64,
    lower: Segment,
    middle: Segment,
    upper: Segment,
}

#[derive(Clone, Debug)]
struct Segment {
    lo: f64,
    hi: f64,
    h: f64,
    inv_h: f64,
    /// Per node: (value, slope) of `F'/2`.
    nodes: Vec<(f64, f64)>,
}

impl Segment {
    fn new(spec: &PotentialSpec, lo: f64, hi: f64, n: usize) -> Self {
        let h = (hi - lo) / n as f64;
        let nodes = (0..=n)
            .map(|i| {
                let s = if i == n { hi } else { lo + h * i as f64 };
                let (_, d, dd) = spec.eval3(s);
                (0.5 * d, 0.5 * dd)
            })
            .collect();
        Segment { lo, hi, h, inv_h: 1.0 / h, nodes }
    }

    #[inline(always)]
    fn eval(&self, s: f64) -> f64 {
        let x = (s - self.lo) * self.inv_h;
        let i = (x as usize).min(self.nodes.len() - 2);
        let t = x - i as f64;
        let (p0, m0) = self.nodes[i];
        let (p1, m1) = self.nodes[i + 1];
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * p0 + h10 * self.h * m0 + h01 * p1 + h11 * self.h * m1
    }

    #[inline(always)]
    fn slope(&self, s: f64) -> f64 {
        let x = (s - self.lo) * self.inv_h;
        let i = (x as usize).min(self.nodes.len() - 2);
        let t = x - i as f64;
        let (p0, m0) = self.nodes[i];
        let (p1, m1) = self.nodes[i + 1];
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * (p0 - p1)) * self.inv_h + d10 * m0 + d11 * m1
    }
}

impl ReactionTable {
    pub fn new(spec: &PotentialSpec) -> Self {
        let e = spec.eps;
        ReactionTable {
            inv_eps2: 1.0 / (e * e),
            lower: Segment::new(spec, -1.0 + 0.5 * e, -1.0 + e, 1 << 10),
            middle: Segment::new(spec, -1.0 + e, 1.0 - e, 1 << 14),
            upper: Segment::new(spec, 1.0 - e, 1.0 - 0.5 * e, 1 << 10),
        }
    }

    /// `F_eps'(s) / 2`.
    #[inline(always)]
    pub fn half_deriv(&self, s: f64) -> f64 {
        if s >= self.middle.hi {
            if s >= self.upper.hi {
                (s - 1.0) * self.inv_eps2
            } else {
                self.upper.eval(s)
            }
        } else if s >= self.middle.lo {
            self.middle.eval(s)
        } else if s >= self.lower.lo {
            self.lower.eval(s)
        } else {
            (s + 1.0) * self.inv_eps2
        }
    }

    /// Derivative of [`half_deriv`](Self::half_deriv).
    #[inline(always)]
    pub fn half_second(&self, s: f64) -> f64 {
        if s >= self.middle.hi {
            if s >= self.upper.hi {
                self.inv_eps2
            } else {
                self.upper.slope(s)
            }
        } else if s >= self.middle.lo {
            self.middle.slope(s)
        } else if s >= self.lower.lo {
            self.lower.slope(s)
        } else {
            self.inv_eps2
        }
    }

    /// Upper bound on the derivative of `F_eps'/2`.
    pub fn lipschitz(&self) -> f64 {
        self.inv_eps2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fbar_closed_forms() {
        assert_eq!(fbar_eval(0.25).unwrap(), 0.0625);
        assert_eq!(fbar_eval(0.0).unwrap(), 0.0);
        assert!((fbar_eval(2.0).unwrap() - (1.0 - (-2f64).exp())).abs() < 1e-15);
        assert!(fbar_eval(-0.1).is_err());
    }

    #[test]
    fn bridge_matches_at_junctions() {
        let p = PotentialSpec::new(0.1).unwrap();
        let (v, d, dd) = p.fbar3(0.5 + 1e-12);
        assert!((v - 0.25).abs() < 1e-10 && (d - 1.0).abs() < 1e-10 && (dd - 2.0).abs() < 1e-8);
        let (v, d, dd) = p.fbar3(1.0);
        assert!((v - (1.0 - EXP_M1)).abs() < 1e-14);
        assert!((d - EXP_M1).abs() < 1e-14 && (dd + EXP_M1).abs() < 1e-13);
    }

    #[test]
    fn feps_reference_values() {
        let p = PotentialSpec::new(0.1).unwrap();
        assert_eq!(p.feps_eval(1.0).unwrap(), 0.0);
        assert!((p.value(1.0 - 0.05) - 0.25).abs() < 1e-14);
        assert!((p.value(0.0) - (1.0 - (-10f64).exp())).abs() < 1e-15);
        assert!(p.feps_eval(1.0 + 1e-9).is_err());
    }

    #[test]
    fn cutoff_symmetry() {
        let p = PotentialSpec::new(0.1).unwrap();
        for i in 0..=100 {
            let s = -0.7 + 1.4 * i as f64 / 100.0;
            assert!((p.rho(s) + p.rho(-s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reaction_table_tracks_derivative() {
        for &eps in &[0.1, 0.05, 0.02] {
            let p = PotentialSpec::new(eps).unwrap();
            let t = p.reaction_table();
            let (mut worst, mut worst2) = (0.0f64, 0.0f64);
            for i in 0..=20_000 {
                let s = -1.0 + 2.0 * i as f64 / 20_000.0;
                worst = worst.max((t.half_deriv(s) - 0.5 * p.deriv(s)).abs());
                worst2 = worst2.max((t.half_second(s) - 0.5 * p.eval3(s).2).abs());
            }
            assert!(worst < 1e-9 / eps, "eps {eps}: {worst:e}");
            assert!(worst2 < 1e-4 / (eps * eps), "eps {eps}: {worst2:e}");
            assert_eq!(t.half_deriv(1.0), 0.0);
            assert_eq!(t.half_deriv(-1.0), 0.0);
        }
    }
}
