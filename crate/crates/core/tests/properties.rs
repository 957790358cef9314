mod common;

use common::*;
use ellhyp::cauchy::{cauchy_det_closed, cauchy_det_numeric, f_coefficient, f_direct, f_operator, CauchyConfig, Side};
use ellhyp::combinatorics::delta_product;
use ellhyp::{theta1, KernelSpec, KernelVariant};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn variant(i: usize) -> KernelVariant {
    KernelVariant::ALL[i]
}

fn tol(v: KernelVariant) -> f64 {
    if v == KernelVariant::Elliptic {
        1e-7
    } else {
        1e-9
    }
}

fn config(seed: u64, v: usize, m: usize) -> CauchyConfig {
    let mut r = rng(seed);
    let kernel = gauged_kernel(variant(v), &mut r);
    let scale = 0.5 / kernel.gauge().c.norm();
    CauchyConfig {
        lambda: point(&mut r, scale),
        z: points(&mut r, m, scale),
        w: points(&mut r, m, scale),
        u: Complex64::from_polar(r.gen_range(0.3..=3.0), r.gen_range(0.0..std::f64::consts::TAU)),
        kernel,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bracket_is_odd(v in 0usize..3, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let k = KernelSpec::default_for(variant(v));
        let x = Complex64::new(re, im);
        let (p, m) = (k.bracket(x).unwrap(), k.bracket(-x).unwrap());
        prop_assert!(rel(&m, &-p) < 1e-11);
    }

    #[test]
    fn riemann_relation_with_gauge(seed in any::<u64>(), v in 0usize..3) {
        let mut r = rng(seed);
        let k = gauged_kernel(variant(v), &mut r);
        let q = points(&mut r, 4, 1.0);
        prop_assert!(k.riemann_residual(q[0], q[1], q[2], q[3]).unwrap() < 1e-10);
    }

    #[test]
    fn theta_is_odd(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let tau = Complex64::new(0.0, 1.1);
        let z = Complex64::new(re, im);
        let (p, m) = (theta1(tau, z).unwrap(), theta1(tau, -z).unwrap());
        prop_assert!(rel(&m, &-p) < 1e-12);
    }

    #[test]
    fn delta_product_is_antisymmetric(seed in any::<u64>(), v in 0usize..3, n in 2usize..6) {
        let mut r = rng(seed);
        let k = gauged_kernel(variant(v), &mut r);
        let x = points(&mut r, n, 0.5);
        let base = delta_product(&k, &x).unwrap();
        for i in 0..n - 1 {
            let mut y = x.clone();
            y.swap(i, i + 1);
            prop_assert!(rel(&delta_product(&k, &y).unwrap(), &-base) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cauchy_determinant_formula(seed in any::<u64>(), v in 0usize..3, m in 1usize..7) {
        let cfg = config(seed, v, m);
        let (num, closed) = (cauchy_det_numeric(&cfg), cauchy_det_closed(&cfg));
        if let (Ok(a), Ok(b)) = (num, closed) {
            prop_assert!(rel(&a, &b) < tol(variant(v)));
        }
    }

    #[test]
    fn f_symmetry_and_coefficients(seed in any::<u64>(), v in 0usize..3, m in 1usize..6) {
        let cfg = config(seed, v, m);
        let t = tol(variant(v));
        let (Ok(f), Ok(g), Ok(h)) = (f_direct(&cfg), f_direct(&cfg.swapped()), f_operator(&cfg)) else {
            return Ok(());
        };
        prop_assert!(rel(&f, &g) < t);
        prop_assert!(rel(&f, &h) < t);
        for d in 0..=m {
            let (z, w) = (f_coefficient(&cfg, d, Side::Z).unwrap(), f_coefficient(&cfg, d, Side::W).unwrap());
            prop_assert!(rel(&z, &w) < t, "d = {}", d);
        }
    }
}
