//! The sphere S² with geodesic metric and real spherical harmonics.

use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;

use super::{EigenFn, Point, Space, SpaceKind, SpectrumEntry, TWO_PI};

/// Fully normalized associated Legendre values `Q_{l,m}(x)` satisfying
/// `(1/4π)∫ (Q_{l,0}(cosθ))² dΩ = 1` and, with the `√2` sector factors,
/// the addition theorem `Σ_m Y_{l,m}(v)² = 2l+1`. Computed by the
/// standard stable column recurrence in the order `m`.
fn normalized_alp(l: u32, m: u32, x: f64) -> f64 {
    debug_assert!(m <= l);
    let s = (1.0 - x * x).max(0.0).sqrt();
    // diagonal term Q_{m,m}
    let mut q = 1.0;
    for i in 1..=m {
        q *= s * ((2 * i + 1) as f64 / (2 * i) as f64).sqrt();
    }
    if l == m {
        return q;
    }
    // first off-diagonal term Q_{m+1,m}
    let mut prev = q;
    let mut cur = x * ((2 * m + 3) as f64).sqrt() * q;
    if l == m + 1 {
        return cur;
    }
    let a = |ll: u32| -> f64 {
        let llf = ll as f64;
        let mf = m as f64;
        ((4.0 * llf * llf - 1.0) / (llf * llf - mf * mf)).sqrt()
    };
    for ll in (m + 2)..=l {
        let next = a(ll) * (x * cur - prev / a(ll - 1));
        prev = cur;
        cur = next;
    }
    cur
}

/// Real orthonormal (under the normalized surface measure) spherical
/// harmonic of degree `l`, order `m` at the unit vector `v`; `m > 0` is
/// the cosine sector, `m < 0` the sine sector.
pub fn real_harmonic(l: u32, m: i32, v: &[f64; 3]) -> f64 {
    let x = v[2].clamp(-1.0, 1.0);
    let am = m.unsigned_abs();
    let q = normalized_alp(l, am, x);
    if m == 0 {
        return q;
    }
    let phi = v[1].atan2(v[0]);
    let sqrt2 = std::f64::consts::SQRT_2;
    if m > 0 {
        sqrt2 * q * (am as f64 * phi).cos()
    } else {
        sqrt2 * q * (am as f64 * phi).sin()
    }
}

/// Sphere space: q = 2, ρ = geodesic `arccos` of the dot product, μ*
/// the normalized surface measure. The spectrum holds the real
/// orthonormal harmonics of degree ℓ ≤ `max_degree` with λ = ℓ. The
/// reference rule is Gauss-Legendre(`2L+1`) in the colatitude cosine ×
/// equispaced(`4L+2`) longitude, exact on products of stored harmonics
/// (degree ≤ 4L).
pub fn sphere2_space(max_degree: u32) -> Result<Space> {
    if max_degree == 0 {
        return Err(Error::invalid("sphere2_space requires max_degree ≥ 1"));
    }
    let mut spectrum = Vec::with_capacity(((max_degree + 1) * (max_degree + 1)) as usize);
    for l in 0..=max_degree {
        for m in -(l as i32)..=(l as i32) {
            let eval = if l == 0 { EigenFn::Const } else { EigenFn::Sphere { l, m } };
            spectrum.push(SpectrumEntry { index: spectrum.len(), lambda: l as f64, eval });
        }
    }

    let n_theta = 2 * max_degree as usize + 1;
    let n_phi = 4 * max_degree as usize + 2;
    let (xs, ws) = gauss_legendre(n_theta);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in xs.iter().zip(&ws) {
        let s = (1.0 - x * x).max(0.0).sqrt();
        for j in 0..n_phi {
            let phi = TWO_PI * j as f64 / n_phi as f64;
            nodes.push(Point::Sphere([s * phi.cos(), s * phi.sin(), *x]));
            // (w/2) × (1/n_phi): μ* is a probability measure
            weights.push(w / 2.0 / n_phi as f64);
        }
    }
    Ok(Space::new(SpaceKind::Sphere { max_degree }, 2.0, spectrum, nodes, weights))
}
