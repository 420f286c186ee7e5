use axifree::potential::{e_eps, limit_profile, HeteroclinicProfile, PotentialSpec, SubsolutionProfile};
use proptest::prelude::*;

fn profile(eps: f64) -> HeteroclinicProfile {
    let spec = PotentialSpec::new(eps).unwrap();
    HeteroclinicProfile::build(&spec, 4.0, 801).unwrap()
}

/// Composite Simpson oracle, independent of the crate's adaptive quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    s * h / 3.0
}

#[test]
fn e_eps_matches_simpson_oracle_and_deficit_bound() {
    let mut prev = 0.0;
    for &eps in &[0.1, 0.05, 0.02, 0.01] {
        let spec = PotentialSpec::new(eps).unwrap();
        let e = e_eps(&spec);
        let oracle = 2.0 * simpson(|s| spec.value(s).sqrt(), -1.0, 1.0, 2_000_000);
        assert!((e - oracle).abs() < 1e-9, "eps {eps}: {e} vs {oracle}");
        assert!(4.0 - e > 0.0 && 4.0 - e < 4.0 * eps, "eps {eps}: e = {e}");
        assert!(e > prev);
        prev = e;
    }
}

#[test]
fn delta_is_root_and_scales_like_eps_four_thirds() {
    let mut ratios = Vec::new();
    for &eps in &[0.1, 0.05, 0.02] {
        let p = profile(eps);
        let w = SubsolutionProfile::build(&p, 5.0).unwrap();
        let d = w.delta_eps;
        // brute bisection oracle on the cubic divided by (1 - H(2))
        let (_, h1, h2) = p.eval3(2.0);
        let q = p.gap_to_one(2.0);
        let g = |x: f64| (-q + h1 * x + 0.5 * h2 * x * x + q * x.powi(3) / eps.powi(4)) / q;
        let (mut lo, mut hi) = (0.0, eps);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        assert!((d - lo).abs() < 1e-15, "eps {eps}: {d} vs {lo}");
        assert!(g(d).abs() < 1e-12);
        ratios.push(d / eps.powf(4.0 / 3.0));
    }
    for r in &ratios {
        assert!(*r > 0.3 && *r < 3.0, "{ratios:?}");
    }
}

#[test]
fn delta_regression_at_eps_point_one() {
    let p = profile(0.1);
    let d = SubsolutionProfile::build(&p, 3.0).unwrap().delta_eps;
    // frozen from the bisection oracle above; equals eps * x with 10 x^3 - x^2/2 + x - 1 = 0
    assert!((d - 0.040_729_340_592_855_4).abs() < 1e-12, "{d:.16}");
}

#[test]
fn sandwich_and_tail_laws() {
    for &eps in &[0.1, 0.05, 0.02] {
        let p = profile(eps);
        let end = 1.0 + eps * eps.ln();
        for i in 0..=1000 {
            let x = end * i as f64 / 1000.0;
            let h = p.value(x);
            assert!(h <= x + 1e-8 && h >= (1.0 - eps) * x - 1e-8, "eps {eps} x {x}: {h}");
        }
        for i in 0..=1000 {
            let t = p.t_eps + 10.0 * eps * i as f64 / 1000.0;
            let law = 1.0 - 0.5 * eps * ((p.t_eps - t) / eps).exp();
            assert!((p.value(t) - law).abs() <= 1e-8);
        }
        assert!(p.first_integral_defect() < 1e-8);
    }
}

#[test]
fn energy_identity_through_profile() {
    for &eps in &[0.1, 0.05] {
        let p = profile(eps);
        let e = e_eps(p.spec());
        assert!((p.transition_energy() - e).abs() < 1e-8);
    }
}

#[test]
fn sup_distance_to_limit_profile_decreases() {
    let mut prev = f64::INFINITY;
    for &eps in &[0.1, 0.05, 0.02] {
        let p = profile(eps);
        let d = (0..=4000)
            .map(|i| {
                let x = -2.0 + 4.0 * i as f64 / 4000.0;
                (p.value(x) - limit_profile(x)).abs()
            })
            .fold(0.0, f64::max);
        assert!(d < prev, "eps {eps}: {d} >= {prev}");
        prev = d;
    }
}

#[test]
fn subsolution_residual_is_nonpositive() {
    let p = profile(0.05);
    let w = SubsolutionProfile::build(&p, 5.0).unwrap();
    let (lo, hi) = w.domain();
    for i in 0..1000 {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / 1000.0;
        assert!(w.residual(x).unwrap() <= 1e-8, "x {x} res {} t {}", w.residual(x).unwrap(), p.t_eps);
        assert!(w.eval3(x).unwrap().1 >= 0.0);
    }
    for &x in &[-5.0, -1.0, 0.0, 1.3, 2.0] {
        assert_eq!(w.value(x).unwrap(), p.value(x));
    }
}

proptest! {
    #[test]
    fn potential_is_even_and_bounded(s in -1.0f64..1.0, eps in 0.01f64..0.25) {
        let spec = PotentialSpec::new(eps).unwrap();
        let (v, d, _) = spec.eval3(s);
        let (vm, dm, _) = spec.eval3(-s);
        prop_assert!((v - vm).abs() <= 1e-14);
        prop_assert!((d + dm).abs() <= 1e-12 * d.abs().max(1.0));
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn derivative_matches_central_difference(s in -0.999f64..0.999, eps in 0.02f64..0.25) {
        let spec = PotentialSpec::new(eps).unwrap();
        let h = 1e-5;
        let fd = (spec.value(s + h) - spec.value(s - h)) / (2.0 * h);
        // O(h^2) with F''' up to ~ 1/eps^3
        prop_assert!((fd - spec.deriv(s)).abs() <= 1e-6 * (1.0 / eps).powi(3).max(1.0));
    }

    #[test]
    fn profile_is_odd_and_increasing(x in 0.0f64..3.0, dx in 1e-6f64..0.5) {
        let p = profile_cached();
        prop_assert!((p.value(x) + p.value(-x)).abs() <= 1e-15);
        prop_assert!(p.value(x + dx) >= p.value(x));
        if x + dx < 1.5 {
            prop_assert!(p.value(x + dx) > p.value(x));
        }
        prop_assert!(p.gap_to_one(x) > 0.0 && p.deriv(x) <= 1.0);
    }
}

fn profile_cached() -> &'static HeteroclinicProfile {
    static P: std::sync::OnceLock<HeteroclinicProfile> = std::sync::OnceLock::new();
    P.get_or_init(|| profile(0.05))
}
