//! Localized spectral kernels: Φ_N(H;·,·), the heat kernel K_t, type-β
//! kernels G and G*, the Christoffel function, and localization
//! diagnostics.
//!
//! Kernels over the sphere take the addition-theorem (zonal) fast path:
//! the per-harmonic sum collapses to `Σ_ℓ c_ℓ (2ℓ+1) P_ℓ(x·y)`.

use crate::error::{Error, Result};
use crate::mask::MaskProfile;
use crate::spaces::{Point, Space, SpaceKind};

pub type Mask = MaskProfile<f64>;

/// A (space, coefficient-vector) pair evaluable at point pairs. The
/// coefficients are `H(λ_j/N)`, `exp(−λ_j²t)`, `b(λ_j)` or `b(λ_j)²`
/// per stored spectrum entry; truncation is exact for compactly
/// supported masks and tail-certified otherwise.
pub struct KernelHandle<'a> {
    space: &'a Space,
    /// One coefficient per stored spectrum entry.
    coeffs: Vec<f64>,
    /// Certified bound on the dropped tail (0 for compact masks).
    pub tail_bound: f64,
}

impl<'a> KernelHandle<'a> {
    /// `Φ_N(H;·,·)` for a compactly supported mask: the eigen-sum is
    /// truncated exactly at `λ_j < N·(support right endpoint)`.
    pub fn localized(space: &'a Space, mask: &Mask, n: f64) -> Result<Self> {
        let coeffs = mask_coefficients(space, mask, n)?;
        Ok(KernelHandle { space, coeffs, tail_bound: 0.0 })
    }

    /// Heat kernel `K_t = Σ exp(−λ_k² t) φ_k ⊗ φ_k`, tail-certified.
    pub fn heat(space: &'a Space, t: f64, tail_tolerance: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::invalid("heat kernel requires t ∈ (0, 1]"));
        }
        let coeffs: Vec<f64> =
            space.spectrum().iter().map(|e| (-e.lambda * e.lambda * t).exp()).collect();
        let tail_bound =
            certify_tail(space, |l| (-l * l * t).exp(), tail_tolerance, "heat kernel")?;
        Ok(KernelHandle { space, coeffs, tail_bound })
    }

    /// Type-β kernel `G(b;·,·) = Σ_{k≥0} b(λ_k) φ_k ⊗ φ_k` with
    /// `b(t) = (1+|t|)^{−β}`.
    pub fn beta(space: &'a Space, beta: f64, tail_tolerance: f64) -> Result<Self> {
        check_beta(space, beta)?;
        let coeffs: Vec<f64> =
            space.spectrum().iter().map(|e| (1.0 + e.lambda).powf(-beta)).collect();
        let tail_bound =
            certify_tail(space, |l| (1.0 + l).powf(-beta), tail_tolerance, "type-β kernel")?;
        Ok(KernelHandle { space, coeffs, tail_bound })
    }

    /// `G*(·,·) = Σ_{k≥1} b(λ_k)² φ_k ⊗ φ_k` (the k = 0 term excluded).
    pub fn beta_star(space: &'a Space, beta: f64, tail_tolerance: f64) -> Result<Self> {
        check_beta(space, beta)?;
        let mut coeffs: Vec<f64> =
            space.spectrum().iter().map(|e| (1.0 + e.lambda).powf(-2.0 * beta)).collect();
        coeffs[0] = 0.0;
        let tail_bound = certify_tail(
            space,
            |l| (1.0 + l).powf(-2.0 * beta),
            tail_tolerance,
            "type-β star kernel",
        )?;
        Ok(KernelHandle { space, coeffs, tail_bound })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        eval_pair(self.space, &self.coeffs, x, y)
    }
}

fn check_beta(space: &Space, beta: f64) -> Result<()> {
    if beta <= space.q() {
        return Err(Error::invalid(format!(
            "type-β kernel requires β > q = {}; got β = {beta}",
            space.q()
        )));
    }
    Ok(())
}

/// Coefficients `H(λ_j/N)` for every stored entry, verifying for
/// compactly supported masks that the spectrum reaches the support.
pub fn mask_coefficients(space: &Space, mask: &Mask, n: f64) -> Result<Vec<f64>> {
    if n <= 0.0 {
        return Err(Error::invalid("scale N must be positive"));
    }
    match mask.support_end() {
        Some(end) => {
            let needed = n * end;
            if space.lambda_cap() + 1e-9 < needed {
                return Err(Error::SpectrumExhausted(format!(
                    "mask support reaches λ = {needed} but the spectrum stops at λ = {}",
                    space.lambda_cap()
                )));
            }
        }
        None => {
            return Err(Error::invalid(
                "mask_coefficients requires a compactly supported mask; use the tail-certified kernels for decay profiles",
            ));
        }
    }
    Ok(space.spectrum().iter().map(|e| mask.eval(e.lambda / n)).collect())
}

/// Evaluates `Σ_k c_k φ_k(x) φ_k(y)`, collapsing to the Legendre form
/// on the sphere when the coefficients are constant per degree.
pub fn eval_pair(space: &Space, coeffs: &[f64], x: &Point, y: &Point) -> f64 {
    if let Some(per_degree) = per_degree_coeffs(space, coeffs) {
        if let (Point::Sphere(u), Point::Sphere(v)) = (x, y) {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            let mut legendre = Vec::new();
            crate::gauss::legendre_all(per_degree.len() - 1, dot.clamp(-1.0, 1.0), &mut legendre);
            return per_degree
                .iter()
                .zip(&legendre)
                .enumerate()
                .map(|(l, (c, p))| c * (2 * l + 1) as f64 * p)
                .sum();
        }
    }
    space
        .spectrum()
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| **c != 0.0)
        .map(|(e, c)| c * e.eval.eval(x) * e.eval.eval(y))
        .sum()
}

/// Per-degree coefficients for the zonal path: `Some` iff the space is
/// the sphere and the coefficients agree within each degree block.
fn per_degree_coeffs(space: &Space, coeffs: &[f64]) -> Option<Vec<f64>> {
    space.sphere_max_degree()?;
    let mut out: Vec<f64> = Vec::new();
    for (e, &c) in space.spectrum().iter().zip(coeffs) {
        let l = e.lambda as usize;
        if l == out.len() {
            out.push(c);
        } else if c != out[l] {
            return None;
        }
    }
    Some(out)
}

/// `Φ_N(H; x, y)` — exact finite eigen-sum for compactly supported `H`.
pub fn localized_kernel(space: &Space, mask: &Mask, n: f64, x: &Point, y: &Point) -> Result<f64> {
    Ok(KernelHandle::localized(space, mask, n)?.eval(x, y))
}

/// `K_t(x, y)` with certified truncation below `tail_tolerance`.
pub fn heat_kernel(space: &Space, t: f64, x: &Point, y: &Point, tail_tolerance: f64) -> Result<f64> {
    Ok(KernelHandle::heat(space, t, tail_tolerance)?.eval(x, y))
}

/// `G(b; x, y)` for `b(t) = (1+|t|)^{−β}`, k = 0 term included.
pub fn beta_kernel(space: &Space, beta: f64, x: &Point, y: &Point, tail_tolerance: f64) -> Result<f64> {
    Ok(KernelHandle::beta(space, beta, tail_tolerance)?.eval(x, y))
}

/// `G*(x, y) = Σ_{k≥1} b(λ_k)² φ_k(x) φ_k(y)`.
pub fn beta_kernel_star(
    space: &Space,
    beta: f64,
    x: &Point,
    y: &Point,
    tail_tolerance: f64,
) -> Result<f64> {
    Ok(KernelHandle::beta_star(space, beta, tail_tolerance)?.eval(x, y))
}

/// Christoffel function `Σ_{λ_j < N} φ_j(x)²` (strict inequality).
pub fn christoffel(space: &Space, n: f64, x: &Point) -> Result<f64> {
    if n <= 0.0 {
        return Err(Error::invalid("christoffel scale N must be positive"));
    }
    if space.lambda_cap() + 1e-9 < n {
        return Err(Error::SpectrumExhausted(format!(
            "christoffel needs the spectrum through λ < {n}, cap is {}",
            space.lambda_cap()
        )));
    }
    if space.sphere_max_degree().is_some() {
        // addition theorem: Σ_{ℓ<N} (2ℓ+1)
        let lmax = if n.fract() == 0.0 { n as i64 - 1 } else { n.floor() as i64 };
        return Ok(((lmax + 1) * (lmax + 1)) as f64);
    }
    Ok(space
        .spectrum()
        .iter()
        .filter(|e| e.lambda < n)
        .map(|e| {
            let v = e.eval.eval(x);
            v * v
        })
        .sum())
}

/// Fitted constant `c` with `christoffel(N, ·) ≤ c·N^q` over the stored
/// dyadic range, probed at a few centers; powers the tail certificates.
fn fitted_christoffel_constant(space: &Space) -> f64 {
    let probes = space.probe_grid(8);
    let mut c = 1.0f64;
    let mut n = 2.0;
    while n <= space.lambda_cap() {
        for x in &probes {
            if let Ok(v) = christoffel(space, n, x) {
                c = c.max(v / n.powf(space.q()));
            }
        }
        n *= 2.0;
    }
    c
}

/// Certifies that the tail `Σ_{λ_k > cap} decay(λ_k)·φφ` dropped by the
/// truncation is below `tol`, using the Christoffel growth bound over
/// dyadic shells: `tail ≤ Σ_j sup_{shell} decay · c_fit · (2^{j+1})^q`.
/// Refuses (spectrum-exhausted) when the certificate cannot reach the
/// tolerance, rather than silently truncating.
pub(crate) fn certify_tail(
    space: &Space,
    decay: impl Fn(f64) -> f64,
    tol: f64,
    what: &str,
) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::invalid("tail tolerance must be positive"));
    }
    let c_fit = fitted_christoffel_constant(space);
    let q = space.q();
    let cap = space.lambda_cap().max(1.0);
    // dyadic shells [2^j, 2^{j+1}) covering (cap, ∞)
    let mut j = cap.log2().floor() as i32;
    let mut tail = 0.0f64;
    for _ in 0..2000 {
        let lo = (2.0f64).powi(j).max(cap);
        let hi = (2.0f64).powi(j + 1);
        // decay envelopes are nonincreasing, so the shell supremum is at
        // the left endpoint
        let term = decay(lo) * c_fit * hi.powf(q);
        tail += term;
        j += 1;
        if term < tol * 1e-6 && tail < tol {
            return Ok(tail);
        }
        if tail >= tol {
            break;
        }
    }
    Err(Error::SpectrumExhausted(format!(
        "{what}: certified tail bound {tail:.3e} beyond λ = {cap} exceeds the tolerance {tol:.1e}; extend the spectrum cap"
    )))
}

/// One row of a localization profile.
#[derive(Clone, Copy, Debug)]
pub struct ProfileRow {
    pub r: f64,
    pub sup_abs: f64,
    /// `c·N^q / max(1, (N r)^S)` at the fitted c and the S = 8 floor
    /// the acceptance gate targets.
    pub bound: f64,
}

/// Localization diagnostics for `Φ_N(H; center, ·)`.
#[derive(Clone, Debug)]
pub struct LocalizationProfile {
    pub rows: Vec<ProfileRow>,
    /// Least-squares slope of `log sup|Φ_N|` against `log r` over the
    /// positive radii.
    pub fitted_exponent: f64,
    /// Fitted constant `c` with `sup|Φ_N| ≤ c·N^q/max(1,(Nr)^S)`.
    pub fitted_constant: f64,
}

/// Sample points at metric distance `r` from `center` (a ring scan on
/// the torus and sphere, the two endpoints on the circle).
pub(crate) fn points_at_distance(space: &Space, center: &Point, r: f64) -> Vec<Point> {
    if r == 0.0 {
        return vec![*center];
    }
    match (space.kind(), center) {
        (SpaceKind::Circle { .. }, Point::Circle(t)) => {
            vec![Point::Circle((t + r).rem_euclid(crate::spaces::TWO_PI)),
                 Point::Circle((t - r).rem_euclid(crate::spaces::TWO_PI))]
        }
        (SpaceKind::Torus { .. }, Point::Torus(a, b)) => {
            // boundary of the max-metric square of radius r
            let two_pi = crate::spaces::TWO_PI;
            let steps = 64;
            let mut out = Vec::with_capacity(4 * steps);
            for i in 0..steps {
                let t = -r + 2.0 * r * i as f64 / (steps - 1) as f64;
                out.push(Point::Torus((a + r).rem_euclid(two_pi), (b + t).rem_euclid(two_pi)));
                out.push(Point::Torus((a - r).rem_euclid(two_pi), (b + t).rem_euclid(two_pi)));
                out.push(Point::Torus((a + t).rem_euclid(two_pi), (b + r).rem_euclid(two_pi)));
                out.push(Point::Torus((a + t).rem_euclid(two_pi), (b - r).rem_euclid(two_pi)));
            }
            out
        }
        (SpaceKind::Sphere { .. }, Point::Sphere(c)) => {
            // ring at colatitude r around c
            let (u, v) = tangent_frame(c);
            let steps = 32;
            (0..steps)
                .map(|i| {
                    let psi = crate::spaces::TWO_PI * i as f64 / steps as f64;
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = r.cos() * c[k] + r.sin() * (psi.cos() * u[k] + psi.sin() * v[k]);
                    }
                    Point::Sphere(p)
                })
                .collect()
        }
        (SpaceKind::Cloud { coords, .. }, _) => {
            let tol = 0.05 * r;
            (0..coords.len())
                .map(Point::Cloud)
                .filter(|p| (space.metric(center, p) - r).abs() <= tol)
                .collect()
        }
        _ => panic!("point of the wrong space"),
    }
}

fn tangent_frame(c: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot: f64 = c.iter().zip(&pick).map(|(a, b)| a * b).sum();
    let mut u = [0.0; 3];
    for k in 0..3 {
        u[k] = pick[k] - dot * c[k];
    }
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut u {
        *x /= norm;
    }
    let v = [
        c[1] * u[2] - c[2] * u[1],
        c[2] * u[0] - c[0] * u[2],
        c[0] * u[1] - c[1] * u[0],
    ];
    (u, v)
}

/// Empirical sup of `|Φ_N(center, ·)|` at each radius together with the
/// theorem-shaped bound, plus fitted decay exponent and constant.
pub fn localization_profile(
    space: &Space,
    mask: &Mask,
    n: f64,
    center: &Point,
    radii: &[f64],
) -> Result<LocalizationProfile> {
    if radii.iter().any(|r| *r < 0.0) {
        return Err(Error::invalid("radii must be nonnegative"));
    }
    let handle = KernelHandle::localized(space, mask, n)?;
    const S: f64 = 8.0;
    let q = space.q();
    let mut sups = Vec::with_capacity(radii.len());
    for &r in radii {
        let sup = points_at_distance(space, center, r)
            .iter()
            .map(|y| handle.eval(center, y).abs())
            .fold(0.0f64, f64::max);
        sups.push(sup);
    }
    // fitted c with sup ≤ c·N^q/max(1,(Nr)^S)
    let mut c_fit = 0.0f64;
    for (&r, &sup) in radii.iter().zip(&sups) {
        c_fit = c_fit.max(sup * (n * r).powf(S).max(1.0) / n.powf(q));
    }
    let rows: Vec<ProfileRow> = radii
        .iter()
        .zip(&sups)
        .map(|(&r, &sup)| ProfileRow {
            r,
            sup_abs: sup,
            bound: c_fit * n.powf(q) / (n * r).powf(S).max(1.0),
        })
        .collect();
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(&sups)
        .filter(|(&r, &s)| r > 0.0 && s > 0.0)
        .map(|(&r, &s)| (r.ln(), s.ln()))
        .collect();
    let fitted_exponent = least_squares_slope(&pts);
    Ok(LocalizationProfile { rows, fitted_exponent, fitted_constant: c_fit })
}

/// Least-squares slope of y against x.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Outcome of the Φ_m lower-bound scan backing the positivity theorem
/// hypothesis: per candidate β, the grid minimum of
/// `|Φ_m(x,·)|/m^q` over `𝔹(x, β/m)`.
#[derive(Clone, Debug)]
pub struct PhinLowerBound {
    pub per_beta: Vec<(f64, f64)>,
    /// Largest candidate whose ratio stays above the floor.
    pub best_beta: Option<f64>,
    pub floor: f64,
}

pub fn phin_lower_bound_check(
    space: &Space,
    m: f64,
    beta_search: &[f64],
) -> Result<PhinLowerBound> {
    let mask = Mask::cutoff();
    let handle = KernelHandle::localized(space, &mask, m)?;
    let floor = 0.1;
    let centers = space.probe_grid(4);
    let mq = m.powf(space.q());
    let mut per_beta = Vec::with_capacity(beta_search.len());
    for &beta in beta_search {
        let radius = beta / m;
        let mut worst = f64::INFINITY;
        for x in &centers {
            for i in 0..=32 {
                let r = radius * i as f64 / 32.0;
                for y in points_at_distance(space, x, r) {
                    worst = worst.min(handle.eval(x, &y).abs() / mq);
                }
            }
        }
        per_beta.push((beta, worst));
    }
    let best_beta = per_beta
        .iter()
        .filter(|(_, ratio)| *ratio > floor)
        .map(|(b, _)| *b)
        .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.max(b))));
    Ok(PhinLowerBound { per_beta, best_beta, floor })
}
