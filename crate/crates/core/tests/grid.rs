use axifree::grid::{build_domain, level_area, read_binary, write_binary, Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn cylinder_height_matches_catenoid() {
    let g = build_domain(3, 10.0, 1.0, 0.05, 64, 64).unwrap();
    assert!((10f64.acosh() - (10.0 + 99f64.sqrt()).ln()).abs() < 1e-14);
    assert!((g.b_eps - (10f64.acosh() + 2.0 + g.delta_eps)).abs() < 1e-13);
    assert!((g.b_eps - g.delta_eps - 4.99322).abs() < 1e-5);
    assert!((g.hr * g.nr as f64 - g.a).abs() < 1e-14);
    assert_eq!(g.r(g.nr), 10.0);
    assert_eq!(g.z(g.nz), g.b_eps);
    let g2 = build_domain(3, 11.0, 1.0, 0.05, 64, 64).unwrap();
    assert!(g2.b_eps > g.b_eps);
    assert!(build_domain(3, 1.5, 1.0, 0.05, 64, 64).is_err());
    assert!(build_domain(3, 10.0, 1.0, 0.05, 8, 64).is_err());
}

#[test]
fn higher_dimension_uses_asymptotic_height() {
    let g = build_domain(4, 20.0, 3.0, 0.1, 32, 64).unwrap();
    let z = g.catenoid.eval(20.0).unwrap();
    assert!(z < 3.0);
    assert!((g.b_eps - (z + 2.0 + g.delta_eps)).abs() < 1e-13);
}

#[test]
fn omega_profile() {
    let g = build_domain(3, 10.0, 1.0, 0.05, 64, 128).unwrap();
    assert!(g.omega(g.z_cat).abs() < 1e-14);
    assert!((g.omega(g.b_eps) - 1.0).abs() < 1e-12);
    let bd = g.boundary_omega();
    assert!(bd.row.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    assert!(bd.column.windows(2).all(|w| w[1] >= w[0]));
    assert!((bd.column[0] + 1.0).abs() < 1e-12);
}

#[test]
fn constant_field_operator_is_reaction() {
    let g = build_domain(3, 8.0, 1.0, 0.1, 32, 64).unwrap();
    let c = 0.3;
    let u = Field::constant(&g, c);
    let op = u.operator();
    let expect = 0.5 * g.model().spec.deriv(c);
    for i in 0..g.nr {
        for j in 0..g.nz {
            assert!((op[g.idx(i, j)] - expect).abs() < 1e-9);
        }
    }
    assert_eq!(Field::constant(&g, 1.0).energy(), 0.0);
}

fn random_smooth(g: &std::sync::Arc<axifree::grid::AxiGrid>, rng: &mut ChaCha8Rng, zero_rim: bool) -> Field {
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (a, b) = (g.a, g.b_eps);
    Field::from_fn(g, |r, z| {
        let x = std::f64::consts::PI * r / a;
        let y = std::f64::consts::PI * z / b;
        let v = 0.4 * (c[0] * x.cos() + c[1] * (2.0 * y).cos() + c[2] * (x + y).sin() + c[3] * (3.0 * x).cos() * y.cos());
        if zero_rim {
            v * (a - r) * (b - z)
        } else {
            v
        }
    })
}

#[test]
fn operator_is_symmetric_in_the_weighted_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [3, 4] {
        let g = build_domain(n, 12.0, if n == 3 { 1.0 } else { 3.0 }, 0.1, 48, 64).unwrap();
        let u = random_smooth(&g, &mut rng, true);
        let v = random_smooth(&g, &mut rng, true);
        let (lu, lv) = (u.laplacian(), v.laplacian());
        let (mut a, mut b, mut scale) = (0.0, 0.0, 0.0);
        for i in 0..g.nr {
            for j in 0..g.nz {
                let w = g.weight(i, j);
                a += w * lu[g.idx(i, j)] * v.at(i, j);
                b += w * u.at(i, j) * lv[g.idx(i, j)];
                scale += w * (lu[g.idx(i, j)] * v.at(i, j)).abs();
            }
        }
        assert!((a - b).abs() <= 1e-10 * scale, "n={n}: {a} vs {b}");
    }
}

#[test]
fn energy_gradient_matches_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = build_domain(3, 8.0, 1.0, 0.1, 32, 64).unwrap();
    let u = random_smooth(&g, &mut rng, false);
    let op = u.operator();
    for _ in 0..20 {
        let (i, j) = (rng.gen_range(0..g.nr), rng.gen_range(0..g.nz));
        let h = 1e-6;
        let mut up = u.clone();
        up.values[g.idx(i, j)] += h;
        let mut dn = u.clone();
        dn.values[g.idx(i, j)] -= h;
        let fd = (up.energy() - dn.energy()) / (2.0 * h);
        let an = 2.0 * g.weight(i, j) * op[g.idx(i, j)];
        assert!((fd - an).abs() < 1e-6 * an.abs().max(g.weight(i, j)), "({i},{j}) {fd} vs {an}");
    }
}

#[test]
fn flat_interface_residual_converges_quadratically() {
    let mut errs = Vec::new();
    for &(nr, nz) in &[(16, 128), (16, 256), (16, 512)] {
        let g = build_domain(3, 8.0, 1.0, 0.25, nr, nz).unwrap();
        let prof = &g.model().profile;
        let c = 0.5 * g.b_eps;
        let u = Field::from_fn(&g, |_, z| prof.value(z - c));
        let op = u.operator();
        let mut worst = 0.0f64;
        for i in 0..g.nr {
            for j in 1..g.nz {
                worst = worst.max(op[g.idx(i, j)].abs());
            }
        }
        errs.push(worst);
    }
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate > 1.8, "{errs:?}");
    }
}

#[test]
fn level_area_of_horizontal_and_vertical_interfaces() {
    let g = build_domain(3, 10.0, 1.0, 0.1, 100, 128).unwrap();
    let prof = &g.model().profile;
    let c = 2.1;
    let u = Field::from_fn(&g, |_, z| prof.value(z - c));
    for s in [-0.9, -0.3, 0.0, 0.5, 0.9] {
        assert!((level_area(&u, s) - 50.0).abs() < 1e-9);
    }
    let rc = 4.03;
    let v = Field::from_fn(&g, |r, _| -prof.value(r - rc));
    let mut prev = f64::INFINITY;
    for s in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let rs = rc + prof.inverse(-s);
        let area = level_area(&v, s);
        assert!((area - rs * g.b_eps).abs() < 2e-3 * area, "s={s}");
        assert!(area < prev);
        prev = area;
    }
}

#[test]
fn binary_round_trip() {
    let g = build_domain(3, 8.0, 1.0, 0.1, 32, 64).unwrap();
    let u = Field::omega_extension(&g);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.bin");
    write_binary(&u, &p).unwrap();
    let back = read_binary(&p, Some(g.model().clone())).unwrap();
    assert_eq!(back.values, u.values);
    assert_eq!(back.grid().b_eps, g.b_eps);
}
