//! Scalar mask profiles: the smooth cutoff `h`, dyadic band profiles,
//! and type-β decay profiles.
//!
//! The cutoff is the normalized integral of the bump
//! `u ↦ exp(−1/(u(1−u)))` rescaled so the transition occupies `[1/2, 1]`,
//! which makes `h` infinitely smooth, even, equal to 1 on `[−1/2, 1/2]`
//! and 0 outside `(−1, 1)`, and strictly decreasing on `(1/2, 1)`.

use std::sync::{Arc, OnceLock};

use crate::scalar::Real;

/// Panels × nodes for the composite Gauss-Legendre evaluation of the
/// bump integral. 12×32 resolves the transition to full f64 precision.
const PANELS: usize = 12;
const NODES: usize = 32;

struct BumpTable {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

fn bump_table() -> &'static BumpTable {
    static TABLE: OnceLock<BumpTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (nodes, weights) = crate::gauss::gauss_legendre(NODES);
        let mut total = 0.0;
        for p in 0..PANELS {
            let a = p as f64 / PANELS as f64;
            let b = (p + 1) as f64 / PANELS as f64;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in nodes.iter().zip(&weights) {
                total += half * w * bump(mid + half * x);
            }
        }
        BumpTable { nodes, weights, total }
    })
}

/// `∫_u^1 bump` by composite Gauss-Legendre, panel-aligned with the
/// normalization integral so that `h(1/2) = 1` and `h(1) = 0` exactly.
fn bump_upper_integral(u: f64) -> f64 {
    let table = bump_table();
    let mut acc = 0.0;
    for p in 0..PANELS {
        let a = (p as f64 / PANELS as f64).max(u);
        let b = (p + 1) as f64 / PANELS as f64;
        if a >= b {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in table.nodes.iter().zip(&table.weights) {
            acc += half * w * bump(mid + half * x);
        }
    }
    acc
}

/// The smooth cutoff `h`: even, 1 on `[−1/2, 1/2]`, 0 for `|t| ≥ 1`,
/// strictly decreasing on `(1/2, 1)`, infinitely differentiable.
///
/// Evaluation is carried out in `f64` and converted, so narrower scalar
/// types see a correctly rounded value rather than accumulated error.
pub fn cutoff_h<T: Real>(t: T) -> T {
    let t = t.to_f64().expect("finite scalar").abs();
    if t <= 0.5 {
        return T::one();
    }
    if t >= 1.0 {
        return T::zero();
    }
    let u = 2.0 * t - 1.0;
    let table = bump_table();
    T::of(bump_upper_integral(u) / table.total)
}

/// Band profile `g(t) = h(t) − h(2t)`, supported on `[1/4, 1]`.
pub fn band_g<T: Real>(t: T) -> T {
    cutoff_h(t) - cutoff_h(t + t)
}

/// Wide band profile `G̃(t) = h(t/2) − h(4t)`, supported on `[1/8, 2]`
/// and identically 1 on the support of `g`.
pub fn band_gtilde<T: Real>(t: T) -> T {
    let two = T::of(2.0);
    cutoff_h(t / two) - cutoff_h(t * T::of(4.0))
}

/// Which scalar profile a [`MaskProfile`] evaluates.
#[derive(Clone)]
pub enum MaskKind<T> {
    /// The smooth cutoff `h`.
    CutoffH,
    /// `g(t) = h(t) − h(2t)`.
    BandG,
    /// `G̃(t) = h(t/2) − h(4t)`.
    BandGtilde,
    /// `b(t) = (1 + |t|)^{−β}` (the choice `F_b ≡ 1`).
    Beta(T),
    /// User-supplied profile with a stated support endpoint (or `None`
    /// when not compactly supported).
    Custom {
        eval: Arc<dyn Fn(T) -> T + Send + Sync>,
        support_end: Option<f64>,
        smoothness: Smoothness,
    },
}

/// Effective number of continuous derivatives of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    /// C^∞ (the bump-based profiles).
    Unbounded,
    /// C^S for the stated S.
    Finite(u32),
}

/// A scalar mask `H` or `b` on `[0, ∞)` together with its support and
/// smoothness metadata, the inputs the kernel layer needs to truncate
/// eigen-sums exactly or certify tails.
#[derive(Clone)]
pub struct MaskProfile<T> {
    kind: MaskKind<T>,
}

impl<T: Real> MaskProfile<T> {
    pub fn cutoff() -> Self {
        Self { kind: MaskKind::CutoffH }
    }

    pub fn band_g() -> Self {
        Self { kind: MaskKind::BandG }
    }

    pub fn band_gtilde() -> Self {
        Self { kind: MaskKind::BandGtilde }
    }

    /// Type-β profile `b(t) = (1+|t|)^{−β}`; requires `β > 0`.
    pub fn beta(beta: T) -> Self {
        assert!(beta > T::zero(), "type-β mask requires β > 0");
        Self { kind: MaskKind::Beta(beta) }
    }

    pub fn custom(
        eval: impl Fn(T) -> T + Send + Sync + 'static,
        support_end: Option<f64>,
        smoothness: Smoothness,
    ) -> Self {
        Self {
            kind: MaskKind::Custom { eval: Arc::new(eval), support_end, smoothness },
        }
    }

    pub fn kind(&self) -> &MaskKind<T> {
        &self.kind
    }

    pub fn eval(&self, t: T) -> T {
        match &self.kind {
            MaskKind::CutoffH => cutoff_h(t),
            MaskKind::BandG => band_g(t),
            MaskKind::BandGtilde => band_gtilde(t),
            MaskKind::Beta(beta) => (T::one() + t.abs()).powf(-*beta),
            MaskKind::Custom { eval, .. } => eval(t),
        }
    }

    /// Right endpoint of the support, or `None` when the profile is not
    /// compactly supported. Compactly supported masks let `Φ_N` truncate
    /// the eigen-sum exactly at `λ < N·support_end()`.
    pub fn support_end(&self) -> Option<f64> {
        match &self.kind {
            MaskKind::CutoffH => Some(1.0),
            MaskKind::BandG => Some(1.0),
            MaskKind::BandGtilde => Some(2.0),
            MaskKind::Beta(_) => None,
            MaskKind::Custom { support_end, .. } => *support_end,
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match &self.kind {
            MaskKind::CutoffH | MaskKind::BandG | MaskKind::BandGtilde => Smoothness::Unbounded,
            MaskKind::Beta(_) => Smoothness::Unbounded,
            MaskKind::Custom { smoothness, .. } => *smoothness,
        }
    }

    /// β exponent, for the type-β kind only.
    pub fn beta_exponent(&self) -> Option<T> {
        match &self.kind {
            MaskKind::Beta(beta) => Some(*beta),
            _ => None,
        }
    }
}
