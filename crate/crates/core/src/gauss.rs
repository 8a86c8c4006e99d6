//! Gauss-Legendre nodes and weights on [-1, 1].

/// Computes the n-point Gauss-Legendre rule by Newton iteration on the
/// Legendre polynomial, seeded with the Chebyshev-angle estimate.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // root estimate (Tricomi)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let (mut p, mut dp) = legendre_with_derivative(n, x);
        for _ in 0..100 {
            let dx = p / dp;
            x -= dx;
            let v = legendre_with_derivative(n, x);
            p = v.0;
            dp = v.1;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre P_n(x) and its derivative by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (x.abs() - 1.0).abs() < 1e-14 {
        let nf = n as f64;
        x.signum().powi(n as i32 + 1) * nf * (nf + 1.0) / 2.0
    } else {
        (n as f64) * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Legendre P_l(x), l = 0..=lmax, written into `out`.
pub fn legendre_all(lmax: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if lmax == 0 {
        return;
    }
    out.push(x);
    for l in 2..=lmax {
        let lf = l as f64;
        let next = ((2.0 * lf - 1.0) * x * out[l - 1] - (lf - 1.0) * out[l - 2]) / lf;
        out.push(next);
    }
}
