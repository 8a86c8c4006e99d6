//! Simplex-constrained convex quadratic minimization.
//!
//! Minimizes `w ↦ wᵀAw` for a symmetric positive-semidefinite `A` over
//! the probability simplex, by accelerated projected gradient with an
//! exact Euclidean simplex projection and a Frank-Wolfe duality-gap
//! stopping rule, falling back to Frank-Wolfe steps (closed-form line
//! search) when the gradient scheme stalls. The accepted answer may be
//! c-suboptimal; the caller reads the reported gap.

use crate::scalar::Real;

/// Iteration cap and duality-gap tolerance for the simplex QP.
#[derive(Clone, Copy, Debug)]
pub struct QpSettings<T> {
    pub max_iters: usize,
    pub gap_tol: T,
}

impl<T: Real> Default for QpSettings<T> {
    fn default() -> Self {
        Self { max_iters: 100_000, gap_tol: T::of(1e-10) }
    }
}

/// Result of a simplex QP solve.
#[derive(Clone, Debug)]
pub struct QpOutcome<T> {
    pub weights: Vec<T>,
    /// Final objective `wᵀAw`.
    pub objective: T,
    /// Final Frank-Wolfe duality gap (upper bound on suboptimality).
    pub gap: T,
    pub iterations: usize,
    /// False when the gap tolerance was not reached within the cap; the
    /// best iterate is still returned.
    pub converged: bool,
    /// Objective value after each accepted iterate; nonincreasing.
    pub objective_trace: Vec<T>,
}

/// Euclidean projection onto the probability simplex (sort-based, exact
/// up to rounding).
pub fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let n = v.len();
    assert!(n > 0);
    let mut u: Vec<T> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
    let mut css = T::zero();
    let mut theta = T::zero();
    let mut rho = 0;
    for (i, &ui) in u.iter().enumerate() {
        css = css + ui;
        let k = T::of((i + 1) as f64);
        let t = (css - T::one()) / k;
        if ui - t > T::zero() {
            theta = t;
            rho = i + 1;
        }
    }
    debug_assert!(rho > 0);
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

/// Symmetric matvec on a row-major flat matrix.
fn matvec<T: Real>(a: &[T], n: usize, x: &[T], out: &mut [T]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(&aij, &xj)| aij * xj).sum();
    }
}

fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

/// Frank-Wolfe gap at `w`: `∇f·w − min_i ∇f_i` with `∇f = 2Aw`.
fn fw_gap<T: Real>(grad: &[T], w: &[T]) -> (T, usize) {
    let mut imin = 0;
    let mut gmin = grad[0];
    for (i, &g) in grad.iter().enumerate().skip(1) {
        if g < gmin {
            gmin = g;
            imin = i;
        }
    }
    (dot(grad, w) - gmin, imin)
}

/// Minimizes `wᵀAw` over the simplex. `a` is the symmetric `n×n` Gram
/// matrix in row-major order. Starts from the uniform weight vector.
pub fn minimize_simplex_qp<T: Real>(a: &[T], n: usize, settings: QpSettings<T>) -> QpOutcome<T> {
    assert_eq!(a.len(), n * n, "flat matrix of dimension n×n expected");
    if n == 1 {
        return QpOutcome {
            weights: vec![T::one()],
            objective: a[0],
            gap: T::zero(),
            iterations: 0,
            converged: true,
            objective_trace: vec![a[0]],
        };
    }

    // Lipschitz constant of the gradient: 2‖A‖₂ ≤ 2·max row 1-norm.
    let mut lip = T::zero();
    for i in 0..n {
        let row_sum: T = a[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum();
        lip = lip.max(row_sum);
    }
    lip = (lip + lip).max(T::of(1e-30));
    let step = T::one() / lip;

    let uniform = T::one() / T::of(n as f64);
    let mut w = vec![uniform; n];
    let mut y = w.clone();
    let mut aw = vec![T::zero(); n];
    let mut grad = vec![T::zero(); n];
    let mut t_accel = T::one();

    matvec(a, n, &w, &mut aw);
    let mut obj = dot(&w, &aw);
    let mut trace = vec![obj];
    let mut converged = false;
    let mut iterations = 0;
    let mut stalls = 0usize;

    for it in 0..settings.max_iters {
        iterations = it + 1;

        for (g, &awi) in grad.iter_mut().zip(&aw) {
            *g = awi + awi;
        }
        let (gap, fw_vertex) = fw_gap(&grad, &w);
        if gap <= settings.gap_tol {
            converged = true;
            trace.push(obj);
            return QpOutcome { weights: w, objective: obj, gap, iterations: it, converged, objective_trace: trace };
        }

        // Accelerated step from the extrapolated point y.
        matvec(a, n, &y, &mut aw);
        let cand: Vec<T> = y
            .iter()
            .zip(&aw)
            .map(|(&yi, &ayi)| yi - step * (ayi + ayi))
            .collect();
        let cand = project_simplex(&cand);
        let mut a_cand = vec![T::zero(); n];
        matvec(a, n, &cand, &mut a_cand);
        let cand_obj = dot(&cand, &a_cand);

        let (next, next_obj, improved) = if cand_obj < obj {
            (cand, cand_obj, true)
        } else {
            // Monotone safeguard: Frank-Wolfe step toward the vertex
            // minimizing the linearization, with exact line search for
            // the quadratic objective.
            let mut d: Vec<T> = w.iter().map(|&wi| -wi).collect();
            d[fw_vertex] = d[fw_vertex] + T::one();
            let mut ad = vec![T::zero(); n];
            matvec(a, n, &d, &mut ad);
            matvec(a, n, &w, &mut aw);
            let num = -dot(&aw, &d);
            let den = dot(&d, &ad);
            let gamma = if den > T::zero() {
                (num / den).max(T::zero()).min(T::one())
            } else if num > T::zero() {
                T::one()
            } else {
                T::zero()
            };
            let fw: Vec<T> = w.iter().zip(&d).map(|(&wi, &di)| wi + gamma * di).collect();
            let mut a_fw = vec![T::zero(); n];
            matvec(a, n, &fw, &mut a_fw);
            let fw_obj = dot(&fw, &a_fw);
            a_cand = a_fw;
            let improved = fw_obj < obj;
            (fw, fw_obj, improved)
        };

        if improved {
            stalls = 0;
        } else {
            stalls += 1;
            if stalls > 50 {
                // Neither scheme makes progress beyond rounding.
                matvec(a, n, &w, &mut aw);
                for (g, &awi) in grad.iter_mut().zip(&aw) {
                    *g = awi + awi;
                }
                let (gap, _) = fw_gap(&grad, &w);
                trace.push(obj);
                return QpOutcome {
                    weights: w,
                    objective: obj,
                    gap,
                    iterations,
                    converged: gap <= settings.gap_tol,
                    objective_trace: trace,
                };
            }
        }

        let t_next = (T::one() + (T::one() + T::of(4.0) * t_accel * t_accel).sqrt()) / T::of(2.0);
        let momentum = (t_accel - T::one()) / t_next;
        y = next
            .iter()
            .zip(&w)
            .map(|(&ni, &wi)| ni + momentum * (ni - wi))
            .collect();
        t_accel = t_next;

        if improved {
            w = next;
            obj = next_obj;
            aw = a_cand;
            trace.push(obj);
        } else {
            matvec(a, n, &w, &mut aw);
        }
    }

    for (g, &awi) in grad.iter_mut().zip(&aw) {
        *g = awi + awi;
    }
    let (gap, _) = fw_gap(&grad, &w);
    QpOutcome {
        weights: w,
        objective: obj,
        gap,
        iterations,
        converged: converged || gap <= settings.gap_tol,
        objective_trace: trace,
    }
}
