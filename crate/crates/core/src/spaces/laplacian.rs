//! Dense graph-Laplacian eigensystems from coordinate clouds.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::EigenData;

/// Builds the symmetric graph Laplacian `L = D − W` from the Gaussian
/// affinity `W_ij = exp(−|x_i − x_j|²/bandwidth²)` (zero diagonal),
/// solves the dense symmetric eigenproblem, and returns the lowest
/// `count` modes as [`EigenData`]: eigenvalues ascending with the first
/// ≈ 0, λ reported as the square root of the Laplacian eigenvalue (so
/// λ² matches the heat-kernel exponent convention), and eigenvectors
/// rescaled by √M to be orthonormal under the normalized counting
/// measure.
///
/// The returned `q` is set to 1; callers ingesting clouds of a
/// different intrinsic dimension should overwrite the field before
/// building a space.
pub fn dense_laplacian_spectrum(
    points: &[Vec<f64>],
    bandwidth: f64,
    count: usize,
) -> Result<EigenData> {
    let m = points.len();
    if count < 2 {
        return Err(Error::invalid("count must be at least 2"));
    }
    if count > m {
        return Err(Error::invalid("count exceeds the number of points"));
    }
    if m > 2000 {
        return Err(Error::invalid(
            "dense eigensolver is capped at 2000 points; supply precomputed EigenData instead",
        ));
    }
    if bandwidth <= 0.0 {
        return Err(Error::invalid("bandwidth must be positive"));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("points must share a positive coordinate dimension"));
    }

    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };
    for i in 0..m {
        for j in (i + 1)..m {
            if dist2(&points[i], &points[j]) == 0.0 {
                return Err(Error::NumericFailure(format!(
                    "points {i} and {j} coincide; the affinity matrix is degenerate"
                )));
            }
        }
    }

    let b2 = bandwidth * bandwidth;
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let mut degree = 0.0;
        for j in 0..m {
            if i == j {
                continue;
            }
            let w = (-dist2(&points[i], &points[j]) / b2).exp();
            lap[(i, j)] = -w;
            degree += w;
        }
        lap[(i, i)] = degree;
    }

    let eigen = nalgebra::SymmetricEigen::try_new(lap, 1e-13, 10_000)
        .ok_or_else(|| Error::NumericFailure("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].partial_cmp(&eigen.eigenvalues[b]).unwrap());

    let scale = (m as f64).sqrt();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenvectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        eigenvalues.push(eigen.eigenvalues[idx].max(0.0).sqrt());
        let col = eigen.eigenvectors.column(idx);
        // deterministic sign: the entry of largest magnitude is positive
        let mut pivot = 0;
        for i in 1..m {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.push(col.iter().map(|v| sign * scale * v).collect());
    }
    // the constant mode can carry rounding noise of order 1e−9; pin it
    if eigenvalues[0] < 1e-4 {
        eigenvalues[0] = 0.0;
        let mean = eigenvectors[0].iter().sum::<f64>() / m as f64;
        if (mean - 1.0).abs() < 1e-6 || (mean + 1.0).abs() < 1e-6 {
            eigenvectors[0] = vec![1.0; m];
        }
    }

    Ok(EigenData {
        q: 1.0,
        points: points.to_vec(),
        eigenvalues,
        eigenvectors,
        distances: None,
    })
}
