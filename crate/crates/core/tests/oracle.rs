mod common;

use cavity_core::oracle::{
    exact_marginal, exact_partition_function, marginal_with, partition_function_with,
    transfer_matrix_free_energy, FiniteBox, Method,
};
use cavity_core::bounds::{free_energy, FreeEnergyOptions};
use cavity_core::{Error, ModelKind, ModelSpec, Pattern};
use common::{instance, model_strategy, point};
use num_rational::BigRational;
use proptest::prelude::*;

#[test]
fn partition_function_examples() {
    let square = FiniteBox::from_ranges(&[(0, 1), (0, 1)]).unwrap();
    let z = exact_partition_function(&square, &ModelSpec::hardcore(1.0, 2).unwrap()).unwrap();
    assert_eq!(z.exact_string().as_deref(), Some("7"));
    let edge = FiniteBox::from_ranges(&[(0, 1)]).unwrap();
    let z = exact_partition_function(&edge, &ModelSpec::dimer(1.0, 1).unwrap()).unwrap();
    assert_eq!(z.value, 2.0);
    let path = FiniteBox::new(vec![1]).unwrap();
    let z = exact_partition_function(&path, &ModelSpec::dimer(2.0, 1).unwrap()).unwrap();
    assert_eq!(z.value, 5.0);
}

#[test]
fn marginal_examples() {
    let edge = FiniteBox::from_ranges(&[(0, 1)]).unwrap();
    let m = exact_marginal(&edge, &point(&[0]), &ModelSpec::hardcore(1.0, 1).unwrap()).unwrap();
    assert_eq!(m.exact_string().as_deref(), Some("2/3"));
    let path = FiniteBox::new(vec![1]).unwrap();
    let m = exact_marginal(&path, &point(&[0]), &ModelSpec::dimer(1.0, 1).unwrap()).unwrap();
    assert_eq!(m.exact_string().as_deref(), Some("1/3"));
    let single = FiniteBox::new(vec![0, 0]).unwrap();
    for lambda in [0.25, 3.0] {
        let m = exact_marginal(&single, &point(&[0, 0]), &ModelSpec::hardcore(lambda, 2).unwrap()).unwrap();
        assert_eq!(m.value, 1.0 / (1.0 + lambda));
    }
}

#[test]
fn exact_arithmetic_for_binary_activities() {
    let b = FiniteBox::new(vec![1, 1]).unwrap();
    let z = exact_partition_function(&b, &ModelSpec::hardcore(0.5, 2).unwrap()).unwrap();
    // the 3x3 grid has 63 independent sets
    assert_eq!(z.counts.as_deref(), Some(&[1u128, 9, 24, 22, 6, 1][..]));
    let want = "1 + 9/2 + 24/4 + 22/8 + 6/16 + 1/32";
    let sum: BigRational = [(1, 1), (9, 2), (24, 4), (22, 8), (6, 16), (1, 32)]
        .iter()
        .map(|&(p, q)| BigRational::new(p.into(), q.into()))
        .sum();
    assert_eq!(z.exact, Some(sum), "{want}");
}

#[test]
fn capacity_is_refused() {
    let b = FiniteBox::new(vec![3, 3]).unwrap();
    let err = exact_partition_function(&b, &ModelSpec::hardcore(1.0, 2).unwrap());
    assert!(matches!(err, Err(Error::Capacity(_))));
    let ok = exact_partition_function(&b.with_cap(49), &ModelSpec::hardcore(1.0, 2).unwrap());
    assert!(ok.is_ok());
}

#[test]
fn transfer_examples() {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    for model in [ModelKind::Hardcore, ModelKind::Dimer] {
        let r = transfer_matrix_free_energy(model, 1.0, 1, 1).unwrap();
        assert!((r.free_energy - golden.ln()).abs() < 1e-12);
    }
    let r = transfer_matrix_free_energy(ModelKind::Hardcore, 1.0, 2, 2).unwrap();
    assert!((r.spectral_radius - (1.0 + 2f64.sqrt())).abs() < 1e-10);
    assert!(transfer_matrix_free_energy(ModelKind::Hardcore, 1.0, 2, 3).is_err());
}

#[test]
fn strips_approach_the_plane() {
    // open sides favor hard-core particles and penalize dimers, so the two
    // models approach the planar value from opposite sides
    for model in [ModelKind::Hardcore, ModelKind::Dimer] {
        let plane = free_energy(model, 2, 1.0, 10, Pattern::Chess, &FreeEnergyOptions::default()).unwrap();
        let f: Vec<f64> = (1..=6)
            .map(|w| transfer_matrix_free_energy(model, 1.0, w, 2).unwrap().free_energy)
            .collect();
        let gap: Vec<f64> = f.iter().map(|x| (x - plane.midpoint()).abs()).collect();
        assert!(gap.windows(2).all(|g| g[1] < g[0]), "{model}: {f:?}");
        let above = model == ModelKind::Hardcore;
        assert!(f.iter().all(|&x| (x > plane.upper) == above), "{model}: {f:?}");
    }
}

#[test]
fn strip_agrees_with_long_boxes() {
    // log Z of a long width-2 box per site approaches the strip value
    let t = transfer_matrix_free_energy(ModelKind::Hardcore, 1.0, 2, 2).unwrap();
    let per_site = |n: i32| {
        let b = FiniteBox::from_ranges(&[(0, n - 1), (0, 1)]).unwrap().with_cap(64);
        let z = exact_partition_function(&b, &ModelSpec::hardcore(1.0, 2).unwrap()).unwrap();
        z.value.ln() / (2 * n) as f64
    };
    let (a, b) = (per_site(8), per_site(16));
    assert!((b - t.free_energy).abs() < (a - t.free_energy).abs());
    assert!((b - t.free_energy).abs() < 0.03);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counting_methods_agree_on_boxes(
        (inst, model) in instance(20).prop_flat_map(|i| { let d = i.b.dim(); (Just(i), model_strategy(d)) }),
    ) {
        let methods: &[Method] = match model.kind {
            ModelKind::Hardcore => &[Method::Enumeration, Method::SliceDp, Method::Deletion],
            ModelKind::Dimer => &[Method::Enumeration, Method::Deletion],
        };
        let reference = partition_function_with(&inst.b, &model, methods[0]).unwrap();
        for &m in &methods[1..] {
            let other = partition_function_with(&inst.b, &model, m).unwrap();
            prop_assert_eq!(&reference.counts, &other.counts);
            prop_assert_eq!(&reference.exact, &other.exact);
        }
        let marginal = marginal_with(&inst.b, &inst.v, &model, methods[0]).unwrap();
        prop_assert!(marginal.value > 0.0 && marginal.value <= 1.0);
    }
}
