mod common;

use common::*;
use ellhyp::combinatorics::MultiIndex;
use ellhyp::identities::*;
use ellhyp::series::{phi, PhiParams};
use ellhyp::{Error, KernelSpec, KernelVariant, ScaledComplex};
use num_complex::Complex64;
use proptest::prelude::*;

fn kernel(variant: KernelVariant) -> KernelSpec {
    KernelSpec::default_for(variant)
}

fn verify(id: IdentityId, sizes: Sizes, k: &KernelSpec, seed: u64) -> VerificationReport {
    let draw = sample_parameters(id, &sizes, k, seed).unwrap();
    verify_identity(id, draw, id.default_tolerance(k.variant())).unwrap()
}

#[test]
fn registry_listing() {
    let list = list_identities();
    assert_eq!(list.len(), 24);
    assert!(list.iter().any(|e| e.id == IdentityId::DualityPhi));
    assert!(list.iter().all(|e| !e.anchor.is_empty() && !e.description.is_empty()));
    let names: Vec<_> = list.iter().map(|e| e.id.name()).collect();
    assert_eq!(names[0], "cauchy_det");
    assert!(names.contains(&"frenkel_turaev_8e7"));
}

#[test]
fn duality_draw_solves_balance_with_last_b() {
    let draw = sample_parameters(IdentityId::DualityPhi, &Sizes::new(2, 2, 3), &kernel(KernelVariant::Elliptic), 5).unwrap();
    let (a, b) = (draw.group("a").unwrap(), draw.group("b").unwrap());
    assert_eq!(draw.dependent["b"].len(), 1);
    assert_eq!(b[1], draw.dependent["b"][0]);
    assert!((a[0] + a[1] - b[0] - b[1]).norm() < 1e-12);
    assert!(draw.balance_residual < 1e-12);
}

#[test]
fn bailey_draw_terminates_and_balances() {
    let k = kernel(KernelVariant::Trigonometric);
    let draw = sample_parameters(IdentityId::BaileyIA, &Sizes::new(2, 3, 3), &k, 9).unwrap();
    let d = draw.group("d").unwrap();
    assert_eq!(d.len(), 3);
    assert_eq!(d[2], -k.delta() * 3.0);
    let c = draw.group("c").unwrap();
    assert_eq!(c[2], draw.dependent["c"][0]);
    let total: Complex64 = draw.group("a").unwrap().iter().chain(&c).chain(&d).sum();
    let s = draw.scalar("s").unwrap();
    assert!((k.delta() * 2.0 + s * 3.0 - total).norm() < 1e-12);
}

#[test]
fn draws_are_deterministic() {
    for id in IdentityId::ALL {
        let variant = KernelVariant::ALL.into_iter().find(|&v| id.applies_to(v)).unwrap();
        let sizes = Sizes::new(2, 2, 2).canonical(id).unwrap_or_else(|_| Sizes::new(1, 0, 0));
        let k = kernel(variant);
        let a = sample_parameters(id, &sizes, &k, 1234).unwrap();
        let b = sample_parameters(id, &sizes, &k, 1234).unwrap();
        assert_eq!(a, b, "{id}");
        let c = sample_parameters(id, &sizes, &k, 1235).unwrap();
        assert_ne!(a.free, c.free, "{id}");
    }
}

#[test]
fn duality_is_tautological_for_one_by_one() {
    for variant in KernelVariant::ALL {
        let r = verify(IdentityId::DualityPhi, Sizes::new(1, 1, 4), &kernel(variant), 3);
        assert!(r.pass && r.rel_err.unwrap() < 1e-13, "{variant}");
        assert_eq!(r.note.as_deref(), Some("tautological for (m, n) = (1, 1)"));
    }
}

#[test]
fn frenkel_turaev_degree_zero_is_one() {
    for variant in KernelVariant::ALL {
        let r = verify(IdentityId::FrenkelTuraev8e7, Sizes::new(0, 0, 0), &kernel(variant), 8);
        assert_eq!(r.lhs, Some(ScaledComplex::ONE));
        assert_eq!(r.rhs, Some(ScaledComplex::ONE));
        assert_eq!(r.status, Status::Pass);
    }
}

#[test]
fn cauchy_determinant_elliptic_m5() {
    let draw = sample_parameters(IdentityId::CauchyDet, &Sizes::new(5, 0, 0), &kernel(KernelVariant::Elliptic), 7).unwrap();
    let r = verify_identity(IdentityId::CauchyDet, draw, 1e-8).unwrap();
    assert!(r.pass, "rel_err {:?}", r.rel_err);
    assert!(r.rel_err.is_some());
}

#[test]
fn bailey_two_elliptic_with_random_gauge() {
    let mut rng = rng(21);
    for seed in 0..5 {
        let k = gauged_kernel(KernelVariant::Elliptic, &mut rng);
        let draw = sample_parameters(IdentityId::BaileyIIA, &Sizes::new(2, 3, 3), &k, seed).unwrap();
        let r = verify_identity(IdentityId::BaileyIIA, draw, 1e-7).unwrap();
        assert!(r.pass, "seed {seed}: {:?}", r.rel_err);
    }
}

#[test]
fn alternative_bailey_forms_agree() {
    for id in [IdentityId::BaileyIA, IdentityId::BaileyIIA] {
        for variant in KernelVariant::ALL {
            let draw = sample_parameters(id, &Sizes::new(2, 3, 2), &kernel(variant), 4).unwrap();
            let (l, r) = evaluate_alternative(&draw).unwrap();
            assert!(rel(&l, &r) < 1e-7, "{id} {variant}");
        }
    }
    let draw = sample_parameters(IdentityId::DualityPhi, &Sizes::new(1, 1, 1), &kernel(KernelVariant::Rational), 0).unwrap();
    assert!(matches!(evaluate_alternative(&draw), Err(Error::NotApplicable { .. })));
}

#[test]
fn constraint_errors() {
    let k = kernel(KernelVariant::Rational);
    let mut draw = sample_parameters(IdentityId::DualityPhi, &Sizes::new(2, 2, 2), &k, 1).unwrap();
    let wrong = verify_identity(IdentityId::DualityPhiTfpp, draw.clone(), 1e-9);
    assert!(matches!(wrong, Err(Error::ConstraintViolated(_))));
    draw.free.get_mut("a").unwrap()[0] += 0.1;
    assert!(matches!(verify_identity(IdentityId::DualityPhi, draw, 1e-9), Err(Error::ConstraintViolated(_))));
    assert!(matches!(
        sample_parameters(IdentityId::EPeriodicity, &Sizes::new(1, 1, 1), &k, 0),
        Err(Error::NotApplicable { .. })
    ));
    assert!(matches!(
        sample_parameters(IdentityId::JacksonSumEm2, &Sizes::new(1, 2, 1), &k, 0),
        Err(Error::InvalidSizes(_))
    ));
    assert!(matches!(
        sample_parameters(IdentityId::DualityPhi, &Sizes::new(0, 2, 1), &k, 0),
        Err(Error::InvalidSizes(_))
    ));
}

#[test]
fn mode_b_uses_requested_alpha() {
    let alpha = MultiIndex::new(vec![2, 0, 1]);
    let k = kernel(KernelVariant::Elliptic);
    let draw = sample_parameters(IdentityId::BaileyIIB, &Sizes::with_alpha(alpha.clone()), &k, 2).unwrap();
    assert_eq!(draw.sizes.alpha.as_ref(), Some(&alpha));
    let a = draw.group("a").unwrap();
    for (ai, &j) in a.iter().zip(alpha.parts()) {
        assert_eq!(*ai, -k.delta() * j as f64);
    }
    assert!(verify_identity(IdentityId::BaileyIIB, draw, 1e-7).unwrap().pass);
}

fn small_suite(seed: u64) -> SuiteConfig {
    SuiteConfig {
        trials: 2,
        seed,
        ranges: SizeRanges { m: 1..=2, n: 1..=2, big_n: 0..=2, big_m: 1..=3, alpha: None },
        ..SuiteConfig::default()
    }
}

#[test]
fn suite_passes_and_is_reproducible() {
    let cfg = small_suite(99);
    let first = run_suite(&cfg);
    assert!(first.iter().all(|r| r.status == Status::Pass), "{:?}", first.iter().find(|r| r.status != Status::Pass));
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_jsonl(&first, &mut a).unwrap();
    write_jsonl(&run_suite(&cfg), &mut b).unwrap();
    assert_eq!(a, b);
    assert!(run_suite(&SuiteConfig { ids: vec![], ..cfg }).is_empty());
}

#[test]
fn report_formats() {
    let cfg = SuiteConfig { ids: vec![IdentityId::DualityPhi, IdentityId::CauchyDet], ..small_suite(4) };
    let reports = run_suite(&cfg);
    let mut lines = Vec::new();
    write_jsonl(&reports, &mut lines).unwrap();
    let text = String::from_utf8(lines).unwrap();
    assert_eq!(text.lines().count(), reports.len());
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["id", "draw", "lhs", "rhs", "rel_err", "pass", "tolerance"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    assert!(first.get("wall_time").is_none());
    let rows = aggregate(&reports);
    assert_eq!(rows.iter().map(|r| r.trials).sum::<usize>(), reports.len());
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "id,kernel,m,n,N,trials,passes,max_rel_err,mean_wall_time"
    );
    assert_eq!(csv.lines().count(), rows.len() + 1);
}

const CONTROLLED: [IdentityId; 4] = [
    IdentityId::DualityPhi,
    IdentityId::EDuality,
    IdentityId::BaileyIA,
    IdentityId::BaileyIIA,
];

fn variant(i: usize) -> KernelVariant {
    KernelVariant::ALL[i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_does_not_change_outcomes(seed in any::<u64>(), v in 0usize..3, which in 0usize..6) {
        use IdentityId::*;
        let id = [CauchyDet, DualityPhi, DualityPhiTfpp, EDuality, BaileyIA, BaileyIB][which];
        let sizes = Sizes::new(2, 2, 2).canonical(id).unwrap();
        let plain = kernel(variant(v));
        let gauged = gauged_kernel(variant(v), &mut rng(seed));
        for k in [plain, gauged] {
            let draw = sample_parameters(id, &sizes, &k, seed).unwrap();
            let r = verify_identity(id, draw, id.default_tolerance(k.variant())).unwrap();
            prop_assert!(r.pass, "{} {:?}", id, r.rel_err);
        }
    }

    #[test]
    fn specialization_matches_phi(seed in any::<u64>(), v in 0usize..3, m in 1usize..4, n in 1usize..4, big_n in 0usize..5) {
        let k = kernel(variant(v));
        let draw = sample_parameters(IdentityId::PpdSpecialized, &Sizes::new(m, n, big_n), &k, seed).unwrap();
        let (lhs, _) = evaluate(&draw).unwrap();
        let d = k.delta();
        let (x, y) = (draw.group("x").unwrap(), draw.group("y").unwrap());
        let a: Vec<Complex64> = draw.integers("alpha").unwrap().iter().map(|&j| -d * j as f64).collect();
        let b: Vec<Complex64> = y.iter().zip(draw.integers("beta").unwrap()).map(|(&yk, &j)| yk + d * j as f64).collect();
        let value = phi(&PhiParams::new(k.clone(), a, x, b, y, big_n).unwrap()).unwrap();
        prop_assert!(rel(&value, &lhs) < 1e-8);
    }

    #[test]
    fn phi_e_round_trip(seed in any::<u64>(), v in 0usize..3, m in 0usize..3, n in 0usize..3, big_n in 0usize..5) {
        let k = gauged_kernel(variant(v), &mut rng(seed));
        let draw = sample_parameters(IdentityId::PhiToE, &Sizes::new(m, n, big_n), &k, seed).unwrap();
        let g = |name: &str| draw.group(name).unwrap();
        let (a, x, b, c) = (g("a"), g("x"), g("b"), g("c"));
        let direct = phi(&PhiParams::new(k.clone(), a.clone(), x.clone(), b.clone(), c.clone(), big_n).unwrap()).unwrap();
        let back = round_trip(&k, &a, &x, &b, &c, big_n).unwrap();
        prop_assert!(rel(&direct, &back) < 1e-9);
    }

    #[test]
    fn broken_balance_fails(seed in any::<u64>(), v in 0usize..3, which in 0usize..4, big_n in 1usize..5) {
        let id = CONTROLLED[which];
        let k = kernel(variant(v));
        let sizes = Sizes::new(2, 2, big_n).canonical(id).unwrap();
        let opts = SampleOptions { break_balance: true };
        let draw = sample_parameters_with(id, &sizes, &k, seed, opts).unwrap();
        prop_assert!(draw.perturbed);
        prop_assert!(draw.balance_residual > 1e-4);
        let r = verify_identity(id, draw, id.default_tolerance(k.variant())).unwrap();
        prop_assert_eq!(r.status, Status::Fail);
    }
}
