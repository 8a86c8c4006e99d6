//! Finitely supported signed measures and their geometry diagnostics:
//! total variation, ball masses, d-regularity constants, mesh norm and
//! minimal separation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Point, Space};

/// A finitely supported signed measure: support points with real
/// weights. Immutable; all queries are pure.
#[derive(Clone, Debug)]
pub struct PointMeasure {
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl PointMeasure {
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::invalid("support and weights must have the same length"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights must be finite"));
        }
        Ok(PointMeasure { support, weights })
    }

    /// Equal weights `1/M` on the given points.
    pub fn uniform(support: Vec<Point>) -> Self {
        let m = support.len().max(1);
        let w = 1.0 / m as f64;
        let weights = vec![w; support.len()];
        PointMeasure { support, weights }
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `Σ|w_k|`.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Mass of the closed ball `𝔹(x, r)`: signed sum of weights, or the
    /// absolute-value measure `|ν|(𝔹)` when `signed` is false.
    pub fn ball_mass(&self, space: &Space, x: &Point, r: f64, signed: bool) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| space.metric(x, p) <= r)
            .map(|(_, w)| if signed { *w } else { w.abs() })
            .sum()
    }

    /// Serializes as `{ "points": [[...]], "weights": [...] }` using the
    /// coordinate convention of the space.
    pub fn to_json(&self, space: &Space) -> String {
        let file = MeasureFile {
            points: self.support.iter().map(|p| space.point_coords(p)).collect(),
            weights: self.weights.clone(),
        };
        serde_json::to_string_pretty(&file).expect("measure serializes")
    }

    pub fn from_json(space: &Space, text: &str) -> Result<Self> {
        let file: MeasureFile = serde_json::from_str(text)?;
        let support = file
            .points
            .iter()
            .map(|c| space.point_from_coords(c))
            .collect::<Result<Vec<_>>>()?;
        PointMeasure::new(support, file.weights)
    }

    /// CSV export with header `index,coords...,weight`.
    pub fn to_csv(&self, space: &Space) -> String {
        let dim = self.support.first().map_or(0, |p| space.point_coords(p).len());
        let mut out = String::from("index");
        for d in 0..dim {
            out.push_str(&format!(",c{d}"));
        }
        out.push_str(",weight\n");
        for (i, (p, w)) in self.support.iter().zip(&self.weights).enumerate() {
            out.push_str(&i.to_string());
            for c in space.point_coords(p) {
                out.push_str(&format!(",{c:.17e}"));
            }
            out.push_str(&format!(",{w:.17e}\n"));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Estimate of the d-regularity constant `|||ν|||_{R,d}`: the supremum
/// over centers of `|ν|(𝔹(x,d))/d^q`, approximated from below over the
/// support, caller-supplied extra centers and a quasi-uniform probe
/// grid of the recorded resolution.
#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub d: f64,
    /// Lower estimate of the true supremum.
    pub constant: f64,
    pub center_set_size: usize,
    pub probe_resolution: usize,
    /// `|ν|(𝔹(x,d))/d^q` per probed center, for audit.
    pub per_center: Vec<f64>,
}

/// Computes the d-regularity estimate of `ν`. The probe grid defaults
/// to 4× the stored spectrum size.
pub fn regularity_constant(
    space: &Space,
    nu: &PointMeasure,
    d: f64,
    extra_centers: &[Point],
) -> Result<RegularityReport> {
    if d <= 0.0 {
        return Err(Error::invalid("regularity radius d must be positive"));
    }
    let probe_resolution = 4 * space.spectrum().len();
    let mut centers: Vec<Point> = nu.support().to_vec();
    centers.extend_from_slice(extra_centers);
    centers.extend(space.probe_grid(probe_resolution));
    let dq = d.powf(space.q());
    let per_center: Vec<f64> =
        centers.iter().map(|x| nu.ball_mass(space, x, d, false) / dq).collect();
    let constant = per_center.iter().copied().fold(0.0f64, f64::max);
    Ok(RegularityReport {
        d,
        constant,
        center_set_size: centers.len(),
        probe_resolution,
        per_center,
    })
}

/// Mesh norm `δ(𝒞) = sup_x inf_{y∈𝒞} ρ(x,y)`, probed over a grid of
/// `probe_resolution` points; a lower estimate of the true supremum.
pub fn mesh_norm(space: &Space, c: &[Point], probe_resolution: usize) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::invalid("mesh norm of an empty point set"));
    }
    let grid = space.probe_grid(probe_resolution);
    let mut worst = 0.0f64;
    for x in &grid {
        let nearest = c.iter().map(|y| space.metric(x, y)).fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Minimal separation `η(𝒞)`: exact pairwise minimum.
pub fn min_separation(space: &Space, c: &[Point]) -> Result<f64> {
    if c.len() < 2 {
        return Err(Error::invalid("min separation needs at least two points"));
    }
    let mut best = f64::INFINITY;
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            best = best.min(space.metric(&c[i], &c[j]));
        }
    }
    Ok(best)
}

/// The measure giving every point of `𝒞` the mass `η(𝒞)^q`; it is
/// `η(𝒞)`-regular with a space-dependent constant.
pub fn eta_regular_measure(space: &Space, c: &[Point]) -> Result<PointMeasure> {
    let eta = min_separation(space, c)?;
    let w = eta.powf(space.q());
    PointMeasure::new(c.to_vec(), vec![w; c.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{circle_space, TWO_PI};

    fn equispaced(m: usize) -> Vec<Point> {
        (0..m).map(|i| Point::Circle(TWO_PI * i as f64 / m as f64)).collect()
    }

    #[test]
    fn total_variation_sums_absolute_weights() {
        let s = circle_space(2).unwrap();
        let nu = PointMeasure::new(equispaced(3), vec![0.5, -0.25, 0.25]).unwrap();
        assert_eq!(nu.total_variation(), 1.0);
        let empty = PointMeasure::new(vec![], vec![]).unwrap();
        assert_eq!(empty.total_variation(), 0.0);
        let uni = PointMeasure::uniform(equispaced(8));
        assert!((uni.total_variation() - 1.0).abs() < 1e-15);
        let _ = s;
    }

    #[test]
    fn ball_mass_basics() {
        let s = circle_space(4).unwrap();
        let nu = PointMeasure::uniform(equispaced(8));
        // r = 0 away from the support
        assert_eq!(nu.ball_mass(&s, &Point::Circle(0.1), 0.0, false), 0.0);
        // r = one spacing around a support point → 3 points
        let m = nu.ball_mass(&s, &Point::Circle(0.0), TWO_PI / 8.0 + 1e-12, false);
        assert!((m - 3.0 / 8.0).abs() < 1e-15);
        // r = diameter → total variation
        let all = nu.ball_mass(&s, &Point::Circle(1.0), std::f64::consts::PI, false);
        assert!((all - nu.total_variation()).abs() < 1e-15);
    }

    #[test]
    fn ball_mass_monotone_in_radius() {
        let s = circle_space(4).unwrap();
        let nu = PointMeasure::new(equispaced(9), vec![0.3, -0.1, 0.2, 0.05, -0.2, 0.1, 0.1, 0.05, 0.1])
            .unwrap();
        let mut prev = 0.0;
        for i in 0..40 {
            let r = std::f64::consts::PI * i as f64 / 39.0;
            let m = nu.ball_mass(&s, &Point::Circle(0.4), r, false);
            assert!(m >= prev - 1e-15);
            prev = m;
        }
    }

    #[test]
    fn regularity_of_uniform_equispaced() {
        // (3/8)/(2π/8) = 3/(2π)
        let s = circle_space(8).unwrap();
        let nu = PointMeasure::uniform(equispaced(8));
        let rep = regularity_constant(&s, &nu, TWO_PI / 8.0 + 1e-12, &[]).unwrap();
        assert!((rep.constant - 3.0 / TWO_PI).abs() < 1e-10, "constant {}", rep.constant);
    }

    #[test]
    fn regularity_of_point_mass() {
        let s = circle_space(2).unwrap();
        let nu = PointMeasure::new(vec![Point::Circle(1.0)], vec![1.0]).unwrap();
        let rep = regularity_constant(&s, &nu, 0.01, &[]).unwrap();
        assert!((rep.constant - 100.0).abs() < 1e-9);
    }

    #[test]
    fn reference_rule_is_regular() {
        let s = circle_space(8).unwrap();
        let nu = PointMeasure::uniform(s.reference_nodes().to_vec());
        for d in [0.1, 0.3, 1.0] {
            let rep = regularity_constant(&s, &nu, d, &[]).unwrap();
            assert!(rep.constant < 2.0, "d={d}: constant {}", rep.constant);
        }
    }

    #[test]
    fn mesh_norm_of_equispaced_sets() {
        let s = circle_space(8).unwrap();
        let res = 4096;
        let tol = TWO_PI / res as f64;
        let m8 = mesh_norm(&s, &equispaced(8), res).unwrap();
        assert!((m8 - std::f64::consts::PI / 8.0).abs() < tol);
        let single = mesh_norm(&s, &equispaced(1), res).unwrap();
        assert!((single - std::f64::consts::PI).abs() < tol);
        let m16 = mesh_norm(&s, &equispaced(16), res).unwrap();
        assert!((m16 - std::f64::consts::PI / 16.0).abs() < tol);
        assert!(matches!(mesh_norm(&s, &[], res), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn min_separation_cases() {
        let s = circle_space(4).unwrap();
        let eta = min_separation(&s, &equispaced(8)).unwrap();
        assert!((eta - TWO_PI / 8.0).abs() < 1e-12);
        let dup = vec![Point::Circle(1.0), Point::Circle(1.0), Point::Circle(2.0)];
        assert_eq!(min_separation(&s, &dup).unwrap(), 0.0);
        assert!(matches!(min_separation(&s, &equispaced(1)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn min_separation_matches_brute_force_on_random_sets() {
        use rand::SeedableRng;
        let s = circle_space(4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Point> = (0..100).map(|_| s.sample_point(&mut rng)).collect();
        let got = min_separation(&s, &pts).unwrap();
        let mut oracle = f64::INFINITY;
        for a in &pts {
            for b in &pts {
                if a != b {
                    oracle = oracle.min(s.metric(a, b));
                }
            }
        }
        assert_eq!(got, oracle);
    }

    #[test]
    fn eta_measure_properties() {
        let s = circle_space(4).unwrap();
        let c = equispaced(8);
        let nu = eta_regular_measure(&s, &c).unwrap();
        let eta = TWO_PI / 8.0;
        for &w in nu.weights() {
            assert!((w - eta).abs() < 1e-12);
        }
        assert!((nu.total_variation() - 8.0 * eta).abs() < 1e-10);
        let rep = regularity_constant(&s, &nu, eta, &[]).unwrap();
        assert!(rep.constant <= 4.0, "fitted regularity {}", rep.constant);
    }

    #[test]
    fn regularity_rescaling_is_controlled() {
        use rand::SeedableRng;
        let s = circle_space(8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let d = 0.3;
        for _ in 0..20 {
            let pts: Vec<Point> = (0..12).map(|_| s.sample_point(&mut rng)).collect();
            let ws: Vec<f64> = (0..12).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
            let nu = PointMeasure::new(pts, ws).unwrap();
            let base = regularity_constant(&s, &nu, d, &[]).unwrap().constant;
            for alpha in [0.25, 0.5, 2.0, 4.0] {
                let scaled = regularity_constant(&s, &nu, alpha * d, &[]).unwrap().constant;
                let bound = 4.0 * (1.0 + 1.0 / alpha).powf(s.q()) * base;
                assert!(scaled <= bound, "alpha={alpha}: {scaled} > {bound}");
            }
        }
    }

    #[test]
    fn measure_json_round_trip() {
        let s = circle_space(4).unwrap();
        let nu = PointMeasure::new(equispaced(5), vec![0.1, 0.2, 0.3, 0.2, 0.2]).unwrap();
        let text = nu.to_json(&s);
        let back = PointMeasure::from_json(&s, &text).unwrap();
        assert_eq!(back.weights(), nu.weights());
        for (a, b) in back.support().iter().zip(nu.support()) {
            assert!(s.metric(a, b) < 1e-12);
        }
        let csv = nu.to_csv(&s);
        assert!(csv.starts_with("index,c0,weight\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
