use super::{
    bound_a2, bound_e1, bound_y, excess_delta, mean_curvature, weighted_area, Analytic, Catenoid, PlanarCurve,
};
use crate::error::Result;
use serde::Serialize;

/// One certified inequality or identity: `value` is compared with `bound`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub relation: &'static str,
    pub pass: bool,
}

impl LemmaCheck {
    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        LemmaCheck { name: name.into(), value, bound, relation: ">=", pass: value >= bound }
    }

    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        LemmaCheck { name: name.into(), value, bound, relation: "<=", pass: value <= bound }
    }
}

fn sampled(f: impl Fn(f64) -> f64, r1: f64, r2: f64, count: usize) -> Result<PlanarCurve> {
    let r: Vec<f64> = (0..count).map(|i| r1 + (r2 - r1) * i as f64 / (count - 1) as f64).collect();
    let z = r.iter().map(|&x| f(x)).collect();
    PlanarCurve::new(r, z)
}

/// Runs every catenoid identity and area comparison with its tolerance.
pub fn verify_suite() -> Result<Vec<LemmaCheck>> {
    let mut out = Vec::new();

    let c3 = Catenoid::centered(3, 1.0)?;
    let curve = PlanarCurve::from_analytic(Analytic::Catenoid { catenoid: c3.clone(), shift: 0.0 }, 1.0, 10.0, 64)?;
    let area = weighted_area(&curve, 1.0, 10.0, 3)?;
    let closed = 0.5 * 10f64.acosh() + 50.0 * 0.99f64.sqrt();
    out.push(LemmaCheck::at_most("catenoid area closed form, relative error", (area - closed).abs() / closed, 1e-8));

    let (r1, r2, count) = (1.5, 9.0, 4001);
    let base = |r: f64| c3.eval_unchecked(r);
    let reference = weighted_area(&sampled(base, r1, r2, count)?, r1, r2, 3)?;
    let mut worst = f64::INFINITY;
    for mode in 1..=10 {
        for amp in [-0.3, -0.1, -0.03, -0.01, -0.001, 0.001, 0.01, 0.03, 0.1, 0.3] {
            let pert = |r: f64| amp * (mode as f64 * std::f64::consts::PI * (r - r1) / (r2 - r1)).sin();
            let comp = weighted_area(&sampled(|r| base(r) + pert(r), r1, r2, count)?, r1, r2, 3)?;
            worst = worst.min((comp - reference) / reference);
        }
    }
    out.push(LemmaCheck::at_least("catenoid minimality, 100 competitors, relative excess", worst, -1e-10));

    let mut residual = 0.0f64;
    for n in 3..=6 {
        let c = Catenoid::centered(n, 1.0)?;
        for i in 1..=1000 {
            residual = residual.max(c.ode_residual(1.0 + 0.01 * i as f64).abs());
        }
    }
    out.push(LemmaCheck::at_most("catenoid ODE residual, n = 3..6", residual, 1e-8));

    for n in [3, 4] {
        let c = Catenoid::centered(n, 1.0)?;
        let curve = sampled(|r| c.eval_unchecked(r), 1.5, 10.0, 10_000)?;
        let h = mean_curvature(&curve, n)?.into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
        out.push(LemmaCheck::at_most(format!("catenoid mean curvature, n = {n}"), h, 1e-6));
    }

    let delta = excess_delta(4)?;
    for c in [1.0, 2.0] {
        let excess = Catenoid::centered(4, c)?.area_excess(c, 1e3)?;
        out.push(LemmaCheck::at_least(format!("area excess, n = 4, c = {c}"), excess, 0.5 * delta * c.powi(3)));
    }

    for a in [10.0, 100.0, 1000.0] {
        let rep = bound_e1(1.0, a, 1.0)?;
        out.push(LemmaCheck::at_least(format!("neck area bound, a = {a}, gap"), rep.gap(), 0.0));
    }
    // this bound only holds up to an additive constant; the measured one is about 1e-3
    for kbar in [1.0, 0.5] {
        let rep = bound_y(10.0, 1000.0, 1.0, kbar)?;
        out.push(LemmaCheck::at_least(format!("two-slope area bound, kbar = {kbar}, gap"), rep.gap(), -0.01));
    }
    let rep = bound_a2(100.0, 1e4, 1.0, 2.0, 4)?;
    out.push(LemmaCheck::at_least("power-law area bound, n = 4, gap", rep.gap(), 0.0));
    Ok(out)
}
