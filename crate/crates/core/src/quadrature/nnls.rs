//! Lawson-Hanson nonnegative least squares.

use nalgebra::{DMatrix, DVector};

/// Minimizes `‖Ax − b‖₂` over `x ≥ 0` by the active-set method of
/// Lawson and Hanson. Returns the weight vector; the caller judges the
/// residual.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.amax().max(1.0);

    for _ in 0..max_iter {
        // dual vector on the active (zero) set
        let w = a.transpose() * (b - a * &x);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && w[j] > tol {
                if best.map_or(true, |(_, v)| w[j] > v) {
                    best = Some((j, w[j]));
                }
            }
        }
        let Some((enter, _)) = best else { break };
        passive[enter] = true;

        // inner loop: restrict to the passive set until feasible
        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(cols.iter());
            let z_sub = sub
                .svd(true, true)
                .solve(b, 1e-13)
                .expect("SVD least-squares solve");
            if z_sub.iter().all(|&v| v > tol) {
                x.fill(0.0);
                for (i, &j) in cols.iter().enumerate() {
                    x[j] = z_sub[i];
                }
                break;
            }
            // step toward z as far as feasibility allows
            let mut alpha = 1.0f64;
            for (i, &j) in cols.iter().enumerate() {
                if z_sub[i] <= tol {
                    let denom = x[j] - z_sub[i];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (i, &j) in cols.iter().enumerate() {
                x[j] += alpha * (z_sub[i] - x[j]);
                if x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}
