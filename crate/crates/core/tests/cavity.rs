mod common;

use cavity_core::cavity::{
    dimer_cavity, evaluate, hardcore_cavity, marginal_bounds, memo_key, CavityState, EngineConfig,
};
use cavity_core::oracle::FiniteBox;
use cavity_core::{Error, LatticePoint, ModelSpec, Region, RegionKind, SeedKind};
use common::{instance, model_strategy, oracle, point, sandwiched, seeds, state_of};
use proptest::prelude::*;

fn cfg() -> EngineConfig {
    EngineConfig::default()
}

fn no_memo() -> EngineConfig {
    EngineConfig {
        memo: false,
        ..EngineConfig::default()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-15
}

fn edge() -> FiniteBox {
    FiniteBox::from_ranges(&[(0, 1)]).unwrap()
}

fn path3() -> FiniteBox {
    FiniteBox::from_ranges(&[(-1, 1)]).unwrap()
}

/// Center (0,0) with leaves (-1,0), (1,0), (0,1).
fn star() -> FiniteBox {
    FiniteBox::from_ranges(&[(-1, 1), (0, 1)])
        .unwrap()
        .with_removed([point(&[-1, 1]), point(&[1, 1])])
}

#[test]
fn depth_zero_returns_the_seeds() {
    let hc = ModelSpec::hardcore(1.0, 2).unwrap();
    let s = CavityState::new(Region::new(2, RegionKind::PrecOrigin, 3).unwrap(), hc).unwrap();
    let o = LatticePoint::origin(2);
    assert_eq!(hardcore_cavity(&s, &o, 0, SeedKind::Phi, &cfg()).unwrap(), 1.0);
    assert_eq!(hardcore_cavity(&s, &o, 0, SeedKind::Psi, &cfg()).unwrap(), 0.0);
    let dm = ModelSpec::dimer(1.0, 2).unwrap();
    let s = CavityState::new(Region::new(2, RegionKind::PrecOrigin, 3).unwrap(), dm).unwrap();
    assert_eq!(dimer_cavity(&s, &o, 0, SeedKind::Phi, &cfg()).unwrap(), 1.0);
    assert_eq!(dimer_cavity(&s, &o, 0, SeedKind::Psi, &cfg()).unwrap(), 0.0);
}

#[test]
fn isolated_vertex() {
    let b = FiniteBox::from_ranges(&[(0, 0), (0, 0)]).unwrap();
    let hc = ModelSpec::hardcore(1.0, 2).unwrap();
    let o = LatticePoint::origin(2);
    let s = state_of(&b, &hc, 2);
    for seed in [SeedKind::Phi, SeedKind::Psi] {
        assert_eq!(hardcore_cavity(&s, &o, 1, seed, &cfg()).unwrap(), 0.5);
    }
    let m = marginal_bounds(&s, &o, 1, &cfg()).unwrap();
    assert!(m.contains(0.5) && m.width() < 1e-14);
}

#[test]
fn hardcore_edge_and_path() {
    let hc = ModelSpec::hardcore(1.0, 1).unwrap();
    let (phi, _) = seeds(&edge(), &hc, &point(&[0]), 2, &cfg());
    assert!(close(phi, 2.0 / 3.0));
    let (phi, psi) = seeds(&path3(), &hc, &point(&[0]), 2, &cfg());
    assert!(close(phi, 0.8) && close(psi, 0.8));
    let m = marginal_bounds(&state_of(&edge(), &hc, 3), &point(&[0]), 2, &cfg()).unwrap();
    assert!(m.contains(2.0 / 3.0) && m.width() < 1e-14);
}

#[test]
fn dimer_small_graphs() {
    let dm = ModelSpec::dimer(1.0, 1).unwrap();
    for t in 2..5 {
        let (phi, psi) = seeds(&edge(), &dm, &point(&[0]), t, &cfg());
        assert!(close(phi, 0.5) && close(psi, 0.5));
        let (phi, psi) = seeds(&path3(), &dm, &point(&[0]), t, &cfg());
        assert!(close(phi, 1.0 / 3.0) && close(psi, 1.0 / 3.0));
    }
    let dm2 = ModelSpec::dimer(2.0, 2).unwrap();
    let (phi, psi) = seeds(&star(), &dm2, &point(&[0, 0]), 2, &cfg());
    assert!(close(phi, 1.0 / 7.0) && close(psi, 1.0 / 7.0));
    let m = marginal_bounds(&state_of(&path3(), &dm, 4), &point(&[0]), 3, &cfg()).unwrap();
    assert!(m.contains(1.0 / 3.0) && m.width() < 1e-14);
}

#[test]
fn first_level_brackets() {
    // t = 1 sees only whether neighbors exist
    let hc = ModelSpec::hardcore(1.0, 1).unwrap();
    let p = evaluate(&state_of(&path3(), &hc, 1), &point(&[0]), 1, &cfg()).unwrap();
    assert_eq!((p.phi, p.psi), (0.5, 1.0));
    assert_eq!((p.phi_prev, p.psi_prev), (1.0, 0.0));
}

#[test]
fn short_window_is_rejected() {
    let hc = ModelSpec::hardcore(1.0, 2).unwrap();
    let s = CavityState::new(Region::new(2, RegionKind::PrecOrigin, 3).unwrap(), hc).unwrap();
    let far = point(&[-1, 0]);
    assert!(matches!(evaluate(&s, &far, 3, &cfg()), Err(Error::Usage(_))));
    assert!(evaluate(&s, &far, 2, &cfg()).is_ok());
    assert!(matches!(evaluate(&s, &point(&[1, 0]), 1, &cfg()), Err(Error::Usage(_))));
}

#[test]
fn model_mismatch_is_rejected() {
    let dm = ModelSpec::dimer(1.0, 1).unwrap();
    let s = state_of(&edge(), &dm, 2);
    assert!(hardcore_cavity(&s, &point(&[0]), 2, SeedKind::Phi, &cfg()).is_err());
}

#[test]
fn memo_key_examples() {
    let hc = ModelSpec::hardcore(1.0, 2).unwrap();
    let region = Region::new(2, RegionKind::PrecOrigin, 20).unwrap();
    let base = CavityState::new(region, hc).unwrap();
    let o = LatticePoint::origin(2);
    let t = 3;
    let k = memo_key(&base, &o, t, SeedKind::Phi);
    assert_eq!(k, memo_key(&base, &o, t, SeedKind::Phi));
    assert_ne!(k, memo_key(&base, &o, t, SeedKind::Psi));
    let far = base.clone().with_removed([point(&[0, -8])]).unwrap();
    assert_eq!(k, memo_key(&far, &o, t, SeedKind::Phi));
    let near = base.clone().with_removed([point(&[0, -1])]).unwrap();
    assert_ne!(k, memo_key(&near, &o, t, SeedKind::Phi));
}

#[test]
fn zero_activity_is_empty_measure() {
    let b = FiniteBox::from_ranges(&[(-1, 1), (-1, 1)]).unwrap();
    for m in [ModelSpec::hardcore(0.0, 2).unwrap(), ModelSpec::dimer(0.0, 2).unwrap()] {
        for t in 1..5 {
            let (phi, psi) = seeds(&b, &m, &point(&[0, 0]), t, &cfg());
            assert_eq!((phi, psi), (1.0, 1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parities_sandwich_the_exact_marginal(
        (inst, model) in instance(20).prop_flat_map(|i| { let d = i.b.dim(); (Just(i), model_strategy(d)) }),
        t in 1u32..=6,
    ) {
        let exact = oracle(&inst.b, &model, &inst.v);
        let (phi, psi) = seeds(&inst.b, &model, &inst.v, t, &cfg());
        prop_assert!(sandwiched(t, phi, psi, exact), "t={} Φ={} Ψ={} exact={}", t, phi, psi, exact);
        prop_assert!((0.0..=1.0).contains(&phi) && (0.0..=1.0).contains(&psi));
        prop_assert!(phi > 0.0 && psi > 0.0);
        let m = marginal_bounds(&state_of(&inst.b, &model, t + 1), &inst.v, t, &cfg()).unwrap();
        prop_assert!(m.contains(exact));
    }

    #[test]
    fn deep_recursion_is_exact(
        (inst, model) in instance(12).prop_flat_map(|i| { let d = i.b.dim(); (Just(i), model_strategy(d)) }),
    ) {
        let n = inst.b.vertices().len() as u32;
        let exact = oracle(&inst.b, &model, &inst.v);
        for t in [n, n + 1] {
            let (phi, psi) = seeds(&inst.b, &model, &inst.v, t, &cfg());
            prop_assert!((phi - exact).abs() <= 1e-12 && (psi - exact).abs() <= 1e-12);
        }
    }

    #[test]
    fn memo_and_workers_do_not_change_bits(
        (inst, model) in instance(20).prop_flat_map(|i| { let d = i.b.dim(); (Just(i), model_strategy(d)) }),
        t in 1u32..=8,
    ) {
        let s = state_of(&inst.b, &model, t);
        let a = evaluate(&s, &inst.v, t, &cfg()).unwrap();
        let b = evaluate(&s, &inst.v, t, &no_memo()).unwrap();
        let c = evaluate(&s, &inst.v, t, &EngineConfig { workers: 3, ..cfg() }).unwrap();
        for p in [&b, &c] {
            prop_assert_eq!(a.phi.to_bits(), p.phi.to_bits());
            prop_assert_eq!(a.psi.to_bits(), p.psi.to_bits());
            prop_assert_eq!(a.phi_prev.to_bits(), p.phi_prev.to_bits());
            prop_assert_eq!(a.psi_prev.to_bits(), p.psi_prev.to_bits());
        }
    }

    #[test]
    fn hardcore_decreases_in_activity_at_depth_one(
        inst in instance(20),
        lambda in 0.01f64..5.0,
        bump in 0.01f64..5.0,
    ) {
        // depth one sees only neighbor existence, so the dependence is 1/(1+λ·[deg>0])
        let d = inst.b.dim();
        let lo = ModelSpec::hardcore(lambda, d).unwrap();
        let hi = ModelSpec::hardcore(lambda + bump, d).unwrap();
        let (a, _) = seeds(&inst.b, &lo, &inst.v, 1, &cfg());
        let (b, _) = seeds(&inst.b, &hi, &inst.v, 1, &cfg());
        prop_assert!(b < a);
    }

    #[test]
    fn separate_depth_runs_match_lanes(
        (inst, model) in instance(20).prop_flat_map(|i| { let d = i.b.dim(); (Just(i), model_strategy(d)) }),
        t in 2u32..=7,
    ) {
        let s = state_of(&inst.b, &model, t);
        let joint = evaluate(&s, &inst.v, t, &cfg()).unwrap();
        let prev = evaluate(&s, &inst.v, t - 1, &cfg()).unwrap();
        prop_assert_eq!(joint.phi_prev.to_bits(), prev.phi.to_bits());
        prop_assert_eq!(joint.psi_prev.to_bits(), prev.psi.to_bits());
    }
}
