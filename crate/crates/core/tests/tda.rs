use contagion_core::distance::DistanceMatrix;
use contagion_core::map::PointCloud;
use contagion_core::oracle::{brute_force_wasserstein, naive_vr_barcode, partial_matching_count};
use contagion_core::tda::{
    reference_torus_barcode, vr_persistence, wasserstein, Barcode, Ground, PersistencePair,
    WassersteinParams,
};
use contagion_core::Error;
use proptest::prelude::*;

fn arb_cloud() -> impl Strategy<Value = PointCloud<f64>> {
    (1usize..=8, 1usize..=3).prop_flat_map(|(points, dim)| {
        prop::collection::vec(-1.0f64..1.0, points * dim)
            .prop_map(move |coords| PointCloud::from_rows(dim, coords).unwrap())
    })
}

/// Integer-valued distances produce many ties.
fn arb_tied_metric() -> impl Strategy<Value = DistanceMatrix<f64>> {
    (2usize..=8).prop_flat_map(|size| {
        prop::collection::vec(1u8..=4, size * (size - 1) / 2)
            .prop_map(move |v| DistanceMatrix::from_condensed(size, v.into_iter().map(f64::from).collect()).unwrap())
    })
}

fn arb_diagram() -> impl Strategy<Value = Barcode<f64>> {
    prop::collection::vec((0.0f64..1.0, 0.001f64..1.0), 0..=6).prop_map(|v| {
        Barcode::new(v.into_iter().map(|(b, p)| PersistencePair::new(1, b, b + p)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn persistence_matches_naive_reduction(cloud in arb_cloud()) {
        let d = DistanceMatrix::from_cloud(&cloud);
        prop_assert_eq!(vr_persistence(&d, 1).unwrap(), naive_vr_barcode(&d, 1));
    }

    #[test]
    fn persistence_matches_naive_reduction_with_ties(d in arb_tied_metric()) {
        prop_assert_eq!(vr_persistence(&d, 1).unwrap(), naive_vr_barcode(&d, 1));
    }

    #[test]
    fn dimension_zero_structure(cloud in arb_cloud()) {
        let d = DistanceMatrix::from_cloud(&cloud);
        let b = vr_persistence(&d, 1).unwrap();
        prop_assert_eq!(b.infinite_count(0), 1);
        prop_assert_eq!(b.infinite_count(1), 0);
        // all points are born at 0; duplicates die immediately and are dropped
        let distinct = (0..cloud.len())
            .filter(|&i| (0..i).all(|j| d.get(i, j) > 0.0))
            .count();
        prop_assert_eq!(b.betti_at(0, 0.0), distinct);
        let diameter = d.max();
        prop_assert_eq!(b.betti_at(0, diameter), 1);
        prop_assert_eq!(b.betti_at(1, diameter), 0);
    }

    #[test]
    fn persistence_scales_with_the_metric(cloud in arb_cloud(), s in prop_oneof![Just(0.5), Just(2.0), Just(4.0)]) {
        // powers of two keep the products exact
        let d = DistanceMatrix::from_cloud(&cloud);
        let b = vr_persistence(&d, 1).unwrap();
        prop_assert_eq!(vr_persistence(&d.scaled(s), 1).unwrap(), b.scaled(s));
    }

    #[test]
    fn wasserstein_matches_enumeration(a in arb_diagram(), b in arb_diagram(), l2 in any::<bool>(), q in 1.0f64..3.0) {
        let params = WassersteinParams { order: q, ground: if l2 { Ground::L2 } else { Ground::LInf }, ..Default::default() };
        let fast = wasserstein(&a, &b, 1, &params).unwrap();
        let slow = brute_force_wasserstein(&a, &b, 1, &params);
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow), "{} vs {}", fast, slow);
    }

    #[test]
    fn wasserstein_is_a_metric(a in arb_diagram(), b in arb_diagram(), c in arb_diagram()) {
        let p = WassersteinParams::default();
        let w = |x: &Barcode<f64>, y: &Barcode<f64>| wasserstein(x, y, 1, &p).unwrap();
        prop_assert_eq!(w(&a, &a), 0.0);
        prop_assert_eq!(w(&a, &b), w(&b, &a));
        prop_assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-9);
    }
}

#[test]
fn small_examples() {
    let two = vr_persistence(&DistanceMatrix::from_condensed(2, vec![3.0]).unwrap(), 1).unwrap();
    assert_eq!(two.pairs(), &[PersistencePair::new(0, 0.0, 3.0), PersistencePair::new(0, 0.0, f64::INFINITY)]);

    let tri = vr_persistence(&DistanceMatrix::from_condensed(3, vec![2.0; 3]).unwrap(), 1).unwrap();
    assert_eq!(tri.finite_count(0), 2);
    assert_eq!(tri.dimension(1).count(), 0);

    let square = PointCloud::from_rows(2, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap();
    let d = DistanceMatrix::from_cloud(&square);
    let expected = vec![PersistencePair::new(1, 1.0, 2f64.sqrt())];
    assert_eq!(vr_persistence(&d, 1).unwrap().dimension(1).copied().collect::<Vec<_>>(), expected);
    assert_eq!(naive_vr_barcode(&d, 1).dimension(1).copied().collect::<Vec<_>>(), expected);
}

#[test]
fn invalid_metrics_are_rejected() {
    let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
    assert!(matches!(DistanceMatrix::from_full(&asym), Err(Error::InvalidMetric(_))));
    assert!(DistanceMatrix::from_condensed(2, vec![-1.0]).is_err());
    assert!(DistanceMatrix::from_condensed(2, vec![f64::NAN]).is_err());
}

#[test]
fn single_diagram_point_costs_half_its_persistence() {
    let d = Barcode::new([PersistencePair::new(1, 0.0, 2.0)]);
    assert_eq!(wasserstein(&d, &Barcode::new([]), 1, &Default::default()).unwrap(), 1.0);
}

#[test]
fn brute_force_covers_every_matching() {
    assert_eq!(partial_matching_count(6, 6), 13_327);
    assert_eq!(partial_matching_count(1, 0), 1);
}

#[test]
fn reference_barcode_scales_with_the_torus() {
    let n = 10;
    let b = reference_torus_barcode::<f64>(n).unwrap();
    assert_eq!(b.infinite_count(0), 1);
    let p = b.persistences(1);
    assert!(p[0] >= 3.0 * p[2] && p[1] >= 3.0 * p[2]);

    let cloud = contagion_core::geometry::torus_cloud::<f64>(n);
    let scaled = vr_persistence(&DistanceMatrix::from_cloud(&cloud.scaled(5.0)), 1).unwrap();
    let plain = vr_persistence(&DistanceMatrix::from_cloud(&cloud), 1).unwrap();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + y.abs()) || x == y;
    let dominant = |bc: &Barcode<f64>| bc.persistences(1)[..2].to_vec();
    for (x, y) in dominant(&scaled).iter().zip(dominant(&plain)) {
        assert!(close(*x, 5.0 * y));
    }
}
