//! The 2-torus as a product of circles.

use crate::error::{Error, Result};

use super::{CircleFn, EigenFn, Point, Space, SpaceKind, SpectrumEntry, TWO_PI};

/// 2-torus space: q = 2, ρ = max of coordinate geodesics, μ* the
/// normalized product arc measure. The spectrum consists of products of
/// circle eigenfunctions with coordinate frequencies up to `max_index`;
/// λ is the Euclidean norm of the frequency pair. The reference rule is
/// the product of `4·max_index + 1`-point equispaced averages.
pub fn torus2_space(max_index: u32) -> Result<Space> {
    if max_index == 0 {
        return Err(Error::invalid("torus2_space requires max_index ≥ 1"));
    }
    let factors = |k: u32| -> Vec<CircleFn> {
        if k == 0 {
            vec![CircleFn::One]
        } else {
            vec![CircleFn::Cos(k), CircleFn::Sin(k)]
        }
    };
    let mut entries: Vec<(f64, CircleFn, CircleFn)> = Vec::new();
    for k1 in 0..=max_index {
        for k2 in 0..=max_index {
            let lambda = f64::hypot(k1 as f64, k2 as f64);
            for f1 in factors(k1) {
                for f2 in factors(k2) {
                    entries.push((lambda, f1, f2));
                }
            }
        }
    }
    // Order by λ; ties broken by frequency pair so construction is
    // deterministic.
    entries.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| (a.1.frequency(), a.2.frequency()).cmp(&(b.1.frequency(), b.2.frequency())))
    });
    let spectrum: Vec<SpectrumEntry> = entries
        .into_iter()
        .enumerate()
        .map(|(index, (lambda, f1, f2))| SpectrumEntry {
            index,
            lambda,
            eval: if lambda == 0.0 { EigenFn::Const } else { EigenFn::Torus(f1, f2) },
        })
        .collect();

    let m = 4 * max_index as usize + 1;
    let mut nodes = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            nodes.push(Point::Torus(TWO_PI * i as f64 / m as f64, TWO_PI * j as f64 / m as f64));
        }
    }
    let weights = vec![1.0 / (m * m) as f64; m * m];
    Ok(Space::new(SpaceKind::Torus { max_index }, 2.0, spectrum, nodes, weights))
}
