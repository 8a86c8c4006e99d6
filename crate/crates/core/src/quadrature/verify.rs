//! Diagnostics for the approximate-quadrature class: randomized
//! worst-case integration error, sequence-level class verification,
//! covering and positivity checks, and the eigenfunction-product
//! defect.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::{least_squares_slope, Mask};
use crate::measures::{regularity_constant, PointMeasure};
use crate::operators::{smoothness_norm_spectral, Norm, SpectralFunction};
use crate::quadrature::poly_quad_error;
use crate::spaces::Space;

/// Random test polynomials are drawn from `Π_{BAND_FACTOR·n}`. A rule
/// of order n integrates all of `Π_n` exactly, so sampling there would
/// report an identically zero worst case; the wider band exposes the
/// `n^{−γ}` error decay on the part of the class the rule does not
/// annihilate.
pub const BAND_FACTOR: f64 = 4.0;

/// Ball-mass ratio above which positivity/regularity scans flag a
/// measure as failing the `ν(𝔹(x,1/n)) ≤ c·n^{−q/p}` conclusion.
pub const REGULARITY_FLAG: f64 = 4.0;

/// Outcome of the randomized worst-case-error estimate.
#[derive(Clone, Debug)]
pub struct WceReport {
    /// Max over trials of `|∫P dμ* − ∫P dν| / ‖P‖_{H_γ^p}`; a lower
    /// estimate of the true worst case over the unit ball.
    pub value: f64,
    pub trials: usize,
    /// Set when `trials = 0`: the value 0 is vacuous, not evidence.
    pub empty_sample: bool,
    /// Spectral band the test polynomials were drawn from.
    pub band: f64,
}

/// Randomized lower estimate of `sup{|∫P dμ* − ∫P dν| : ‖P‖_{H_γ^p} ≤ 1}`
/// over `P ∈ Π_{4n}`. Deterministic given the seed: trial t uses stream
/// t of a ChaCha8 generator seeded with `seed`.
pub fn worst_case_error(
    space: &Space,
    nu: &PointMeasure,
    mask: &Mask,
    gamma: f64,
    p: Norm,
    n: f64,
    trials: usize,
    seed: u64,
) -> Result<WceReport> {
    if n <= 0.0 {
        return Err(Error::invalid("order n must be positive"));
    }
    if gamma <= space.q() / p.exponent() {
        return Err(Error::invalid(format!(
            "worst_case_error requires γ > q/p = {}",
            space.q() / p.exponent()
        )));
    }
    let band = BAND_FACTOR * n;
    if space.lambda_cap() + 1e-9 < band {
        return Err(Error::SpectrumExhausted(format!(
            "test band Π_{band} exceeds the stored spectrum (λ ≤ {})",
            space.lambda_cap()
        )));
    }
    let dyadic_max = band.log2().ceil() as u32;
    let mut value = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let poly = SpectralFunction::random_in_pi(space, band, &mut rng);
        if poly.is_empty() {
            continue;
        }
        let norm = smoothness_norm_spectral(space, mask, &poly, gamma, p, dyadic_max)?.estimate;
        if norm <= 0.0 {
            continue;
        }
        value = value.max(poly_quad_error(space, nu, &poly) / norm);
    }
    Ok(WceReport { value, trials, empty_sample: trials == 0, band })
}

/// Per-order diagnostics of a measure sequence.
#[derive(Clone, Debug)]
pub struct OrderRow {
    pub n: f64,
    pub wce: f64,
    pub total_variation: f64,
    /// Regularity constant `|||ν|||_{R,1/n}`.
    pub regularity: f64,
}

/// Sequence-level verdict on membership in the approximate-quadrature
/// class 𝒜(γ, p).
#[derive(Clone, Debug)]
pub struct ApproxClassReport {
    pub gamma: f64,
    pub p: Norm,
    pub rows: Vec<OrderRow>,
    pub sup_total_variation: f64,
    pub sup_regularity: f64,
    /// Fitted class constant `A = max_n n^γ · WCE(ν_n, n)`.
    pub fitted_a: f64,
    /// Total variation stays bounded along the sequence (fitted
    /// log-log growth ≤ 0.25).
    pub tv_bounded: bool,
    /// 1/n-regularity constant stays bounded (fitted growth ≤ 0.5).
    pub regularity_bounded: bool,
    pub a_finite: bool,
    pub verdict: bool,
}

/// Checks the three defining conditions of the class 𝒜(γ, p) on a
/// finite sequence `{(n, ν_n)}`: bounded total variation, bounded
/// 1/n-regularity, and integration error `≤ A‖P‖_{H_γ^p}/n^γ` with a
/// finite fitted A. Boundedness along a finite ladder is judged by the
/// fitted log-log growth rate, which is invariant under rescaling every
/// order by a common factor.
pub fn verify_approx_class(
    space: &Space,
    sequence: &[(f64, PointMeasure)],
    mask: &Mask,
    gamma: f64,
    p: Norm,
    trials: usize,
    seed: u64,
) -> Result<ApproxClassReport> {
    if sequence.is_empty() {
        return Err(Error::invalid("verify_approx_class needs at least one order"));
    }
    let mut rows = Vec::with_capacity(sequence.len());
    for (n, nu) in sequence {
        let wce = worst_case_error(space, nu, mask, gamma, p, *n, trials, seed)?.value;
        let reg = regularity_constant(space, nu, 1.0 / n, nu.support())?.constant;
        rows.push(OrderRow {
            n: *n,
            wce,
            total_variation: nu.total_variation(),
            regularity: reg,
        });
    }
    let sup_total_variation =
        rows.iter().map(|r| r.total_variation).fold(0.0f64, f64::max);
    let sup_regularity = rows.iter().map(|r| r.regularity).fold(0.0f64, f64::max);
    let fitted_a = rows.iter().map(|r| r.n.powf(gamma) * r.wce).fold(0.0f64, f64::max);
    let growth = |value: fn(&OrderRow) -> f64| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.n.ln(), value(r).max(1e-300).ln()))
            .collect();
        least_squares_slope(&pts)
    };
    let tv_bounded = growth(|r| r.total_variation) <= 0.25;
    let regularity_bounded = growth(|r| r.regularity) <= 0.5;
    let a_finite = fitted_a.is_finite();
    Ok(ApproxClassReport {
        gamma,
        p,
        verdict: tv_bounded && regularity_bounded && a_finite,
        rows,
        sup_total_variation,
        sup_regularity,
        fitted_a,
        tv_bounded,
        regularity_bounded,
        a_finite,
    })
}

/// Outcome of the covering-theorem scan.
#[derive(Clone, Debug)]
pub struct CoveringReport {
    /// `p̃ = 1 + q/(γ p′)`.
    pub p_tilde: f64,
    /// Per-ladder-entry `(C₁, min over centers of
    /// |ν|(𝔹(x, C₁/n^{1/p̃})) · n^{q/p̃})`.
    pub ladder: Vec<(f64, f64)>,
    /// Smallest ladder C₁ whose floor clears 0.5, if any.
    pub c1: Option<f64>,
    pub passed: bool,
}

/// Scans probe centers for the covering-theorem lower bound
/// `|ν|(𝔹(x, C₁/n^{1/p̃})) ≥ c₁ n^{−q/p̃}` over a dyadic ladder of C₁.
pub fn covering_check(
    space: &Space,
    nu: &PointMeasure,
    n: f64,
    gamma: f64,
    p: Norm,
) -> Result<CoveringReport> {
    if gamma <= 0.0 {
        return Err(Error::invalid("covering check requires γ > 0"));
    }
    if n <= 0.0 {
        return Err(Error::invalid("order n must be positive"));
    }
    let p_conj = p.conjugate().exponent();
    let p_tilde = if p_conj.is_infinite() { 1.0 } else { 1.0 + space.q() / (gamma * p_conj) };
    let centers = space.probe_grid(((4.0 * n) as usize).max(64));
    let scale = n.powf(space.q() / p_tilde);
    let mut ladder = Vec::new();
    let mut c1 = None;
    for candidate in [1.0, 2.0, 4.0, 8.0] {
        let radius = candidate / n.powf(1.0 / p_tilde);
        let floor = centers
            .iter()
            .map(|x| nu.ball_mass(space, x, radius, false) * scale)
            .fold(f64::INFINITY, f64::min);
        ladder.push((candidate, floor));
        if c1.is_none() && floor >= 0.5 {
            c1 = Some(candidate);
        }
    }
    Ok(CoveringReport { p_tilde, ladder, passed: c1.is_some(), c1 })
}

/// `ε_{A,N} = max over eigen-pairs with λ_j, λ_k ≤ N of
/// ‖φ_jφ_k − σ_{2AN}(φ_jφ_k)‖_∞`, the product-assumption defect.
///
/// The projection σ_m with m = 2AN reproduces Π_{AN} exactly (the
/// cutoff plateaus on [0, 1/2]), so this is a distance surrogate for
/// `dist(∞; φ_jφ_k, Π_{AN})`. Since the product lies in Π_{2N} ⊆ the
/// stored spectrum, only entries with λ > AN contribute to the
/// difference; those are batched through dense matrix products.
pub fn product_defect(space: &Space, a: f64, n: f64) -> Result<f64> {
    if a < 1.0 {
        return Err(Error::invalid("product defect requires A ≥ 1"));
    }
    if n <= 0.0 {
        return Err(Error::invalid("degree N must be positive"));
    }
    let m = 2.0 * a * n;
    if space.lambda_cap() + 1e-9 < m {
        return Err(Error::SpectrumExhausted(format!(
            "product defect at A = {a}, N = {n} needs the spectrum through λ = {m}, stored cap is {}",
            space.lambda_cap()
        )));
    }
    let low: Vec<usize> = space
        .spectrum()
        .iter()
        .filter(|e| e.lambda <= n + 1e-12)
        .map(|e| e.index)
        .collect();
    let high: Vec<usize> = space
        .spectrum()
        .iter()
        .filter(|e| e.lambda > m / 2.0)
        .map(|e| e.index)
        .collect();
    if high.is_empty() {
        return Ok(0.0);
    }
    let basis = space.basis();
    let weights = space.reference_weights();
    let r = space.reference_nodes().len();
    let h = high.len();
    // analysis operator restricted to the high band: c_k = Σ_r w_r φ_k(r) f(r)
    let analysis = DMatrix::<f64>::from_fn(h, r, |i, j| basis[high[i]][j] * weights[j]);
    // synthesis of the damped residual: Σ_k (1 − h(λ_k/m)) c_k φ_k(r)
    let damp: Vec<f64> = high
        .iter()
        .map(|&k| 1.0 - crate::mask::cutoff_h(space.spectrum()[k].lambda / m))
        .collect();
    let synthesis = DMatrix::<f64>::from_fn(r, h, |i, j| basis[high[j]][i] * damp[j]);

    let pairs: Vec<(usize, usize)> = low
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| low[i..].iter().map(move |&b| (a, b)))
        .collect();
    let mut defect = 0.0f64;
    for chunk in pairs.chunks(256) {
        let products = DMatrix::<f64>::from_fn(r, chunk.len(), |i, j| {
            let (ka, kb) = chunk[j];
            basis[ka][i] * basis[kb][i]
        });
        let residual = &synthesis * (&analysis * &products);
        defect = defect.max(residual.amax());
    }
    Ok(defect)
}

/// Outcome of the positivity ⇒ regularity scan.
#[derive(Clone, Debug)]
pub struct PositivityReport {
    /// The exponent `q/p` (0 at p = ∞).
    pub exponent: f64,
    /// `max_x ν(𝔹(x, 1/n)) · n^{q/p}` over probe centers and support.
    pub max_scaled_mass: f64,
    pub total_variation: f64,
    /// The p = 1 specialization: regularity constant at d = 1/n.
    pub regularity_at_inv_n: f64,
    /// Set when the scaled mass exceeds the flag threshold.
    pub flagged: bool,
}

/// Checks the positivity-theorem conclusion `ν(𝔹(x, 1/n)) ≤ c·n^{−q/p}`
/// for a nonnegative measure by scanning centers.
pub fn positivity_regularity_check(
    space: &Space,
    nu: &PointMeasure,
    n: f64,
    p: Norm,
) -> Result<PositivityReport> {
    if n <= 0.0 {
        return Err(Error::invalid("order n must be positive"));
    }
    if nu.weights().iter().any(|&w| w < 0.0) {
        return Err(Error::invalid(
            "positivity check applies to nonnegative measures only",
        ));
    }
    let exponent = if p.exponent().is_infinite() { 0.0 } else { space.q() / p.exponent() };
    let radius = 1.0 / n;
    let scale = n.powf(exponent);
    let mut centers = space.probe_grid(((4.0 * n) as usize).max(64));
    centers.extend_from_slice(nu.support());
    let max_scaled_mass = centers
        .iter()
        .map(|x| nu.ball_mass(space, x, radius, false) * scale)
        .fold(0.0f64, f64::max);
    let regularity_at_inv_n = regularity_constant(space, nu, radius, nu.support())?.constant;
    Ok(PositivityReport {
        exponent,
        max_scaled_mass,
        total_variation: nu.total_variation(),
        regularity_at_inv_n,
        flagged: max_scaled_mass > REGULARITY_FLAG,
    })
}
