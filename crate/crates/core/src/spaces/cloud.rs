//! Point-cloud ingestion: precomputed eigensystems over finite clouds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{EigenFn, Point, Space, SpaceKind, SpectrumEntry};

/// Gram deviation beyond which an eigensystem is rejected outright.
const GRAM_REJECT: f64 = 1e-6;

/// A precomputed eigensystem over a finite point cloud.
///
/// `eigenvectors[k][i]` is φ_k at point `i`; rows must be orthonormal
/// under the normalized counting measure (weights `1/M`). `distances`,
/// when present, is the row-major flattened `M×M` quasi-metric table;
/// otherwise the Euclidean distance of `points` is used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenData {
    pub q: f64,
    pub points: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
}

impl EigenData {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("EigenData serializes")
    }

    /// Largest absolute deviation of the eigenvector Gram matrix (under
    /// `1/M` counting weights) from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let m = self.points.len() as f64;
        let mut worst = 0.0f64;
        for (j, vj) in self.eigenvectors.iter().enumerate() {
            for (k, vk) in self.eigenvectors.iter().enumerate().skip(j) {
                let g: f64 = vj.iter().zip(vk).map(|(a, b)| a * b).sum::<f64>() / m;
                let expect = f64::from(j == k);
                worst = worst.max((g - expect).abs());
            }
        }
        worst
    }
}

/// Builds a [`Space`] over the cloud: μ* is the normalized counting
/// measure, ρ the supplied distance table or the Euclidean distance of
/// the coordinates, and the spectrum is read from the data.
pub fn pointcloud_space(data: EigenData) -> Result<Space> {
    let m = data.points.len();
    if m == 0 {
        return Err(Error::invalid("point cloud is empty"));
    }
    if data.q <= 0.0 {
        return Err(Error::invalid("q must be positive"));
    }
    if data.eigenvalues.len() != data.eigenvectors.len() || data.eigenvalues.is_empty() {
        return Err(Error::invalid(
            "eigenvalues and eigenvectors must be nonempty lists of the same length",
        ));
    }
    if data.eigenvectors.iter().any(|v| v.len() != m) {
        return Err(Error::invalid("every eigenvector needs one value per point"));
    }
    if data.eigenvalues.iter().any(|l| !l.is_finite() || *l < -1e-9) {
        return Err(Error::invalid("eigenvalues must be finite and nonnegative"));
    }
    if data.eigenvalues.windows(2).any(|w| w[0] > w[1] + 1e-12) {
        return Err(Error::invalid("eigenvalues must be sorted ascending"));
    }
    match &data.distances {
        Some(table) => {
            if table.len() != m * m {
                return Err(Error::invalid(format!(
                    "distance table must have length M² = {}",
                    m * m
                )));
            }
        }
        None => {
            let dim = data.points[0].len();
            if dim == 0 || data.points.iter().any(|p| p.len() != dim) {
                return Err(Error::invalid(
                    "points must share a positive coordinate dimension when no distance table is supplied",
                ));
            }
        }
    }

    let dev = data.gram_deviation();
    if dev > GRAM_REJECT {
        return Err(Error::RejectedEigendata(format!(
            "eigenvector Gram deviation {dev:.3e} exceeds {GRAM_REJECT:.0e}"
        )));
    }
    if data.eigenvalues[0].abs() > 1e-6 {
        return Err(Error::RejectedEigendata(format!(
            "first eigenvalue {:.3e} is not 0",
            data.eigenvalues[0]
        )));
    }
    let v0 = &data.eigenvectors[0];
    let spread = v0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    if spread.1 - spread.0 > 1e-6 {
        return Err(Error::RejectedEigendata(
            "first eigenvector is not constant".into(),
        ));
    }

    let mut spectrum = vec![SpectrumEntry { index: 0, lambda: 0.0, eval: EigenFn::Const }];
    for (k, (lambda, vec)) in data
        .eigenvalues
        .iter()
        .zip(data.eigenvectors.iter())
        .enumerate()
        .skip(1)
    {
        spectrum.push(SpectrumEntry {
            index: k,
            lambda: lambda.max(0.0),
            eval: EigenFn::Cloud(Arc::new(vec.clone())),
        });
    }

    let nodes: Vec<Point> = (0..m).map(Point::Cloud).collect();
    let weights = vec![1.0 / m as f64; m];
    let kind = SpaceKind::Cloud {
        coords: Arc::new(data.points),
        distances: data.distances.map(Arc::new),
    };
    Ok(Space::new(kind, data.q, spectrum, nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{circle_space, TWO_PI};

    /// Discrete Fourier eigensystem on M equispaced circle points,
    /// frequencies 0..=kmax; exactly orthonormal under 1/M weights.
    pub(crate) fn fourier_eigendata(m: usize, kmax: u32) -> EigenData {
        let thetas: Vec<f64> = (0..m).map(|i| TWO_PI * i as f64 / m as f64).collect();
        let mut eigenvalues = vec![0.0];
        let mut eigenvectors = vec![vec![1.0; m]];
        for k in 1..=kmax {
            eigenvalues.push(k as f64);
            eigenvectors
                .push(thetas.iter().map(|t| 2.0f64.sqrt() * (k as f64 * t).cos()).collect());
            eigenvalues.push(k as f64);
            eigenvectors
                .push(thetas.iter().map(|t| 2.0f64.sqrt() * (k as f64 * t).sin()).collect());
        }
        let points: Vec<Vec<f64>> = thetas.iter().map(|t| vec![t.cos(), t.sin()]).collect();
        let mut distances = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                distances[i * m + j] = super::super::circle_dist(thetas[i], thetas[j]);
            }
        }
        EigenData { q: 1.0, points, eigenvalues, eigenvectors, distances: Some(distances) }
    }

    #[test]
    fn discrete_fourier_cloud_is_accepted() {
        let data = fourier_eigendata(64, 8);
        assert!(data.gram_deviation() <= 1e-10, "residual {}", data.gram_deviation());
        let space = pointcloud_space(data).unwrap();
        assert_eq!(space.reference_nodes().len(), 64);
        assert_eq!(space.spectrum().len(), 17);
    }

    #[test]
    fn cloud_reproduces_circle_evaluations() {
        let m = 64;
        let cloud = pointcloud_space(fourier_eigendata(m, 8)).unwrap();
        let circle = circle_space(8).unwrap();
        for i in [0usize, 5, 31, 63] {
            let theta = TWO_PI * i as f64 / m as f64;
            for k in 0..cloud.spectrum().len() {
                let a = cloud.eigen_eval(k, &Point::Cloud(i));
                let b = circle.eigen_eval(k, &Point::Circle(theta));
                assert!((a - b).abs() < 1e-8, "entry {k} at node {i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_eigenvector_with_zero_lambda_accepted() {
        let data = EigenData {
            q: 1.0,
            points: vec![vec![0.0], vec![1.0], vec![2.0]],
            eigenvalues: vec![0.0],
            eigenvectors: vec![vec![1.0, 1.0, 1.0]],
            distances: None,
        };
        assert!(pointcloud_space(data).is_ok());
    }

    #[test]
    fn gram_residual_beyond_threshold_rejected() {
        let mut data = fourier_eigendata(16, 2);
        data.eigenvectors[1][0] += 1e-3;
        assert!(matches!(pointcloud_space(data), Err(Error::RejectedEigendata(_))));
    }

    #[test]
    fn missing_distances_with_empty_coords_rejected() {
        let data = EigenData {
            q: 1.0,
            points: vec![vec![], vec![]],
            eigenvalues: vec![0.0],
            eigenvectors: vec![vec![1.0, 1.0]],
            distances: None,
        };
        assert!(matches!(pointcloud_space(data), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn json_round_trip() {
        let data = fourier_eigendata(8, 2);
        let text = data.to_json_string();
        let back = EigenData::from_json_str(&text).unwrap();
        assert_eq!(back.eigenvalues, data.eigenvalues);
        assert_eq!(back.eigenvectors, data.eigenvectors);
    }
}
