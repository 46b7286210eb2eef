use super::{vr_persistence, wasserstein, Barcode, WassersteinParams};
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::geometry::ChordalTable;
use crate::map::PointCloud;
use crate::network::NodeId;
use crate::scalar::Real;

/// Dimension 0 and 1 barcode of the `n^2` regularly spaced torus points under
/// chordal distance. Distances come from the closed form, so symmetric pairs
/// tie exactly.
pub fn reference_torus_barcode<T: Real>(n: usize) -> Result<Barcode<T>> {
    if n < 3 {
        return Err(Error::InvalidLattice(n));
    }
    let table = ChordalTable::<T>::new(n);
    let dist = DistanceMatrix::from_fn(n * n, |i, j| {
        table.distance(NodeId::from_index(i, n), NodeId::from_index(j, n))
    });
    vr_persistence(&dist, 1)
}

/// Wasserstein distance between the calibrated dimension-1 barcodes of
/// `cloud` and `reference`. Lower is closer to the torus.
pub fn topology_score<T: Real>(
    cloud: &PointCloud<T>,
    reference: &Barcode<T>,
    params: &WassersteinParams<T>,
) -> Result<T> {
    topology_score_from_distances(&DistanceMatrix::from_cloud(cloud), reference, params)
}

pub fn topology_score_from_distances<T: Real>(
    dist: &DistanceMatrix<T>,
    reference: &Barcode<T>,
    params: &WassersteinParams<T>,
) -> Result<T> {
    let own = vr_persistence(dist, 1)?.restricted(1);
    // a cloud without loops has nothing to rescale; it sits at the empty diagram
    let own = if own.finite_count(1) == 0 { own } else { own.calibrate()? };
    let reference = reference.restricted(1).calibrate()?;
    wasserstein(&own, &reference, 1, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::torus_cloud;

    #[test]
    fn reference_has_two_long_loops() {
        let b: Barcode<f64> = reference_torus_barcode(10).unwrap();
        assert_eq!(b.infinite_count(0), 1);
        assert_eq!(b.infinite_count(1), 0);
        let p = b.persistences(1);
        assert!(p.len() >= 2);
        assert_eq!(p[0], p[1]);
        assert!(p.get(2).is_none_or(|&third| third < p[0] / 2.0));
    }

    #[test]
    fn loopless_cloud_scores_against_the_empty_diagram() {
        let line = PointCloud::from_rows(1, (0..12).map(f64::from).collect()).unwrap();
        let reference: Barcode<f64> = reference_torus_barcode(8).unwrap();
        let w = topology_score(&line, &reference, &WassersteinParams::default()).unwrap();
        let calibrated = reference.restricted(1).calibrate().unwrap();
        let empty = Barcode::new([]);
        assert_eq!(w, wasserstein(&empty, &calibrated, 1, &WassersteinParams::default()).unwrap());
        assert!(w > 0.0);
    }

    #[test]
    fn torus_cloud_scores_zero() {
        let n = 8;
        let reference = reference_torus_barcode::<f64>(n).unwrap();
        let cloud = torus_cloud::<f64>(n);
        let s = topology_score(&cloud, &reference, &Default::default()).unwrap();
        assert!(s < 1e-9, "score {s}");
        let s = topology_score(&cloud.scaled(10.0), &reference, &Default::default()).unwrap();
        assert!(s < 1e-9, "score {s}");
    }
}
