//! The circle with arc-length metric and trigonometric eigensystem.

use crate::error::{Error, Result};

use super::{CircleFn, EigenFn, Point, Space, SpaceKind, SpectrumEntry, TWO_PI};

/// Circle space: q = 1, ρ = arc-length geodesic, μ* = normalized arc
/// measure. The spectrum is `{1} ∪ {√2·cos(kθ), √2·sin(kθ) : 1 ≤ k ≤
/// max_index}` with λ = k, ordered by λ. The reference rule is the
/// equispaced average on `4·max_index + 1` points, exact on products of
/// stored eigenfunctions.
pub fn circle_space(max_index: u32) -> Result<Space> {
    if max_index == 0 {
        return Err(Error::invalid("circle_space requires max_index ≥ 1"));
    }
    let mut spectrum = vec![SpectrumEntry { index: 0, lambda: 0.0, eval: EigenFn::Const }];
    for k in 1..=max_index {
        spectrum.push(SpectrumEntry {
            index: spectrum.len(),
            lambda: k as f64,
            eval: EigenFn::Circle(CircleFn::Cos(k)),
        });
        spectrum.push(SpectrumEntry {
            index: spectrum.len(),
            lambda: k as f64,
            eval: EigenFn::Circle(CircleFn::Sin(k)),
        });
    }
    let m = 4 * max_index as usize + 1;
    let nodes: Vec<Point> =
        (0..m).map(|i| Point::Circle(TWO_PI * i as f64 / m as f64)).collect();
    let weights = vec![1.0 / m as f64; m];
    Ok(Space::new(SpaceKind::Circle { max_index }, 1.0, spectrum, nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_cap() {
        assert!(matches!(circle_space(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn cosine_entry_normalization() {
        // √2·cos at θ = 0 → √2
        let s = circle_space(4).unwrap();
        let v = s.eigen_eval(1, &Point::Circle(0.0));
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn reference_integral_of_cos_squared() {
        let s = circle_space(4).unwrap();
        let got = s.integrate(|p| match p {
            Point::Circle(theta) => theta.cos().powi(2),
            _ => unreachable!(),
        });
        assert!((got - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gram_is_identity() {
        let s = circle_space(6).unwrap();
        let basis = s.basis();
        let w = s.reference_weights();
        for (j, row_j) in basis.iter().enumerate() {
            for (k, row_k) in basis.iter().enumerate() {
                let g: f64 =
                    row_j.iter().zip(row_k.iter()).zip(w).map(|((a, b), wi)| a * b * wi).sum();
                let expect = f64::from(j == k);
                assert!((g - expect).abs() < 1e-12, "Gram[{j}][{k}] = {g}");
            }
        }
    }

    #[test]
    fn lambdas_nondecreasing_and_start_at_zero() {
        let s = circle_space(5).unwrap();
        assert_eq!(s.spectrum()[0].lambda, 0.0);
        assert!((s.lambda_cap() - 5.0).abs() < 1e-15);
    }
}
