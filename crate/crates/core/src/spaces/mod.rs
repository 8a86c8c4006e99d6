//! Model data-defined spaces and point-cloud ingestion.
//!
//! A [`Space`] bundles a quasi-metric ρ, the growth exponent q, an
//! orthonormal eigensystem `{(λ_k, φ_k)}` with `λ_0 = 0`, `φ_0 ≡ 1`,
//! and a reference integration rule exactly integrating products of
//! stored eigenfunctions. Model spaces are the circle, the 2-torus and
//! the sphere S²; point clouds enter through [`EigenData`].

mod circle;
mod cloud;
mod laplacian;
mod sphere;
mod torus;

pub use circle::circle_space;
pub use cloud::{pointcloud_space, EigenData};
pub use laplacian::dense_laplacian_spectrum;
pub use sphere::sphere2_space;
pub use torus::torus2_space;

use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::error::{Error, Result};

pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// A point of one of the supported spaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    /// Angle in `[0, 2π)`.
    Circle(f64),
    /// Pair of angles in `[0, 2π)`.
    Torus(f64, f64),
    /// Unit vector in ℝ³.
    Sphere([f64; 3]),
    /// Index into the ingested point cloud.
    Cloud(usize),
}

/// One factor of a (tensor-)trigonometric eigenfunction.
#[derive(Clone, Copy, Debug)]
pub enum CircleFn {
    One,
    /// `√2·cos(kθ)`
    Cos(u32),
    /// `√2·sin(kθ)`
    Sin(u32),
}

impl CircleFn {
    pub fn eval(self, theta: f64) -> f64 {
        match self {
            CircleFn::One => 1.0,
            CircleFn::Cos(k) => std::f64::consts::SQRT_2 * (k as f64 * theta).cos(),
            CircleFn::Sin(k) => std::f64::consts::SQRT_2 * (k as f64 * theta).sin(),
        }
    }

    pub fn frequency(self) -> u32 {
        match self {
            CircleFn::One => 0,
            CircleFn::Cos(k) | CircleFn::Sin(k) => k,
        }
    }
}

/// Evaluator of a single eigenfunction.
#[derive(Clone, Debug)]
pub enum EigenFn {
    /// `φ_0 ≡ 1` on any space.
    Const,
    Circle(CircleFn),
    Torus(CircleFn, CircleFn),
    /// Real orthonormal spherical harmonic of degree `l` and order `m`
    /// (`m > 0`: cosine sector, `m < 0`: sine sector).
    Sphere { l: u32, m: i32 },
    /// Sampled eigenvector over the cloud, already scaled to be
    /// orthonormal under the normalized counting measure.
    Cloud(Arc<Vec<f64>>),
}

impl EigenFn {
    pub fn eval(&self, p: &Point) -> f64 {
        match (self, p) {
            (EigenFn::Const, _) => 1.0,
            (EigenFn::Circle(f), Point::Circle(theta)) => f.eval(*theta),
            (EigenFn::Torus(f1, f2), Point::Torus(a, b)) => f1.eval(*a) * f2.eval(*b),
            (EigenFn::Sphere { l, m }, Point::Sphere(v)) => sphere::real_harmonic(*l, *m, v),
            (EigenFn::Cloud(values), Point::Cloud(i)) => values[*i],
            _ => panic!("eigenfunction evaluated at a point of the wrong space"),
        }
    }
}

/// One `(λ_k, φ_k)` pair of the stored spectrum.
#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    pub index: usize,
    pub lambda: f64,
    pub eval: EigenFn,
}

/// Space-specific data the generic layer dispatches on.
#[derive(Clone, Debug)]
pub enum SpaceKind {
    Circle { max_index: u32 },
    Torus { max_index: u32 },
    Sphere { max_degree: u32 },
    Cloud { coords: Arc<Vec<Vec<f64>>>, distances: Option<Arc<Vec<f64>>> },
}

/// A data-defined space: quasi-metric, growth exponent, eigensystem and
/// reference rule. Immutable after construction; all queries are pure.
pub struct Space {
    kind: SpaceKind,
    q: f64,
    spectrum: Vec<SpectrumEntry>,
    reference_nodes: Vec<Point>,
    reference_weights: Vec<f64>,
    /// `basis[k][node]` = φ_k at the reference nodes, filled lazily.
    basis: OnceLock<Arc<Vec<Vec<f64>>>>,
}

impl Space {
    pub(crate) fn new(
        kind: SpaceKind,
        q: f64,
        spectrum: Vec<SpectrumEntry>,
        reference_nodes: Vec<Point>,
        reference_weights: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(reference_nodes.len(), reference_weights.len());
        debug_assert!(spectrum.windows(2).all(|w| w[0].lambda <= w[1].lambda));
        Space { kind, q, spectrum, reference_nodes, reference_weights, basis: OnceLock::new() }
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn spectrum(&self) -> &[SpectrumEntry] {
        &self.spectrum
    }

    /// Largest stored eigenvalue; the usable spectral cap.
    pub fn lambda_cap(&self) -> f64 {
        self.spectrum.last().map_or(0.0, |e| e.lambda)
    }

    /// Quasi-metric ρ. Exact triangle inequality (κ₁ = 1) on all model
    /// spaces; the cloud metric is whatever table was supplied.
    pub fn metric(&self, x: &Point, y: &Point) -> f64 {
        match (&self.kind, x, y) {
            (SpaceKind::Circle { .. }, Point::Circle(a), Point::Circle(b)) => circle_dist(*a, *b),
            (SpaceKind::Torus { .. }, Point::Torus(a1, a2), Point::Torus(b1, b2)) => {
                circle_dist(*a1, *b1).max(circle_dist(*a2, *b2))
            }
            (SpaceKind::Sphere { .. }, Point::Sphere(u), Point::Sphere(v)) => {
                let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                dot.clamp(-1.0, 1.0).acos()
            }
            (SpaceKind::Cloud { coords, distances }, Point::Cloud(i), Point::Cloud(j)) => {
                if let Some(table) = distances {
                    let m = coords.len();
                    table[i * m + j]
                } else {
                    coords[*i]
                        .iter()
                        .zip(&coords[*j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                }
            }
            _ => panic!("metric evaluated at points of the wrong space"),
        }
    }

    /// Upper bound on ρ over the space (exact on model spaces).
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            SpaceKind::Circle { .. } | SpaceKind::Torus { .. } | SpaceKind::Sphere { .. } => {
                std::f64::consts::PI
            }
            SpaceKind::Cloud { coords, .. } => {
                let m = coords.len();
                let mut d = 0.0f64;
                for i in 0..m {
                    for j in (i + 1)..m {
                        d = d.max(self.metric(&Point::Cloud(i), &Point::Cloud(j)));
                    }
                }
                d
            }
        }
    }

    pub fn eigen_eval(&self, k: usize, p: &Point) -> f64 {
        self.spectrum[k].eval.eval(p)
    }

    pub fn reference_nodes(&self) -> &[Point] {
        &self.reference_nodes
    }

    pub fn reference_weights(&self) -> &[f64] {
        &self.reference_weights
    }

    /// μ*-integral of `f` through the reference rule.
    pub fn integrate(&self, mut f: impl FnMut(&Point) -> f64) -> f64 {
        self.reference_nodes
            .iter()
            .zip(&self.reference_weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }

    /// Cached matrix of eigenfunction values at the reference nodes:
    /// `basis()[k][node]`.
    pub fn basis(&self) -> &Arc<Vec<Vec<f64>>> {
        self.basis.get_or_init(|| {
            Arc::new(
                self.spectrum
                    .iter()
                    .map(|e| self.reference_nodes.iter().map(|p| e.eval.eval(p)).collect())
                    .collect(),
            )
        })
    }

    /// Max-degree hint for the zonal (addition-theorem) kernel path.
    pub fn sphere_max_degree(&self) -> Option<u32> {
        match &self.kind {
            SpaceKind::Sphere { max_degree } => Some(*max_degree),
            _ => None,
        }
    }

    /// Quasi-uniform probe grid of roughly `resolution` points, used
    /// where a supremum over the whole space must be approximated.
    pub fn probe_grid(&self, resolution: usize) -> Vec<Point> {
        let resolution = resolution.max(1);
        match &self.kind {
            SpaceKind::Circle { .. } => (0..resolution)
                .map(|i| Point::Circle(TWO_PI * (i as f64 + 0.5) / resolution as f64))
                .collect(),
            SpaceKind::Torus { .. } => {
                let side = (resolution as f64).sqrt().ceil() as usize;
                let mut grid = Vec::with_capacity(side * side);
                for i in 0..side {
                    for j in 0..side {
                        grid.push(Point::Torus(
                            TWO_PI * (i as f64 + 0.5) / side as f64,
                            TWO_PI * (j as f64 + 0.5) / side as f64,
                        ));
                    }
                }
                grid
            }
            SpaceKind::Sphere { .. } => fibonacci_sphere(resolution),
            SpaceKind::Cloud { coords, .. } => (0..coords.len()).map(Point::Cloud).collect(),
        }
    }

    /// Uniform random point (uniform index for clouds). Deterministic
    /// given the generator state.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        match &self.kind {
            SpaceKind::Circle { .. } => Point::Circle(rng.gen::<f64>() * TWO_PI),
            SpaceKind::Torus { .. } => {
                Point::Torus(rng.gen::<f64>() * TWO_PI, rng.gen::<f64>() * TWO_PI)
            }
            SpaceKind::Sphere { .. } => {
                let z: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                let phi = rng.gen::<f64>() * TWO_PI;
                let s = (1.0 - z * z).max(0.0).sqrt();
                Point::Sphere([s * phi.cos(), s * phi.sin(), z])
            }
            SpaceKind::Cloud { coords, .. } => Point::Cloud(rng.gen_range(0..coords.len())),
        }
    }

    /// Parses a coordinate tuple from an external file into a point of
    /// this space (circle: `[θ]`; torus: `[θ₁,θ₂]`; sphere: `[x,y,z]`
    /// normalized; cloud: `[index]`).
    pub fn point_from_coords(&self, coords: &[f64]) -> Result<Point> {
        match &self.kind {
            SpaceKind::Circle { .. } => match coords {
                [theta] => Ok(Point::Circle(theta.rem_euclid(TWO_PI))),
                _ => Err(Error::invalid("circle point takes exactly one coordinate (angle)")),
            },
            SpaceKind::Torus { .. } => match coords {
                [a, b] => Ok(Point::Torus(a.rem_euclid(TWO_PI), b.rem_euclid(TWO_PI))),
                _ => Err(Error::invalid("torus point takes exactly two coordinates (angles)")),
            },
            SpaceKind::Sphere { .. } => match coords {
                [x, y, z] => {
                    let norm = (x * x + y * y + z * z).sqrt();
                    if norm < 1e-12 {
                        return Err(Error::invalid("sphere point must be a nonzero 3-vector"));
                    }
                    Ok(Point::Sphere([x / norm, y / norm, z / norm]))
                }
                _ => Err(Error::invalid("sphere point takes exactly three coordinates")),
            },
            SpaceKind::Cloud { coords: cloud, .. } => match coords {
                [idx] => {
                    let i = *idx as usize;
                    if idx.fract() != 0.0 || *idx < 0.0 || i >= cloud.len() {
                        Err(Error::invalid(format!(
                            "cloud point must be an integer index in [0, {})",
                            cloud.len()
                        )))
                    } else {
                        Ok(Point::Cloud(i))
                    }
                }
                _ => Err(Error::invalid("cloud point takes exactly one coordinate (index)")),
            },
        }
    }

    /// Inverse of [`Space::point_from_coords`], for file export.
    pub fn point_coords(&self, p: &Point) -> Vec<f64> {
        match p {
            Point::Circle(theta) => vec![*theta],
            Point::Torus(a, b) => vec![*a, *b],
            Point::Sphere(v) => v.to_vec(),
            Point::Cloud(i) => vec![*i as f64],
        }
    }
}

impl std::fmt::Debug for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Space")
            .field("kind", &self.kind)
            .field("q", &self.q)
            .field("spectrum_len", &self.spectrum.len())
            .field("reference_nodes", &self.reference_nodes.len())
            .finish()
    }
}

pub(crate) fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

/// Fibonacci lattice on S²: quasi-uniform, deterministic.
fn fibonacci_sphere(n: usize) -> Vec<Point> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let phi = TWO_PI * (i as f64 / golden).fract();
            let s = (1.0 - z * z).max(0.0).sqrt();
            Point::Sphere([s * phi.cos(), s * phi.sin(), z])
        })
        .collect()
}

/// Returns the candidates lying in the closed ball `𝔹(center, r)`.
pub fn ball_points(space: &Space, center: &Point, r: f64, candidates: &[Point]) -> Vec<Point> {
    candidates
        .iter()
        .filter(|p| space.metric(center, p) <= r)
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_distance_is_geodesic() {
        let s = circle_space(4).unwrap();
        // antipodal geodesic
        assert!((s.metric(&Point::Circle(0.0), &Point::Circle(std::f64::consts::PI))
            - std::f64::consts::PI)
            .abs()
            < 1e-15);
        assert!((circle_dist(0.1, TWO_PI - 0.1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ball_points_r_zero_keeps_only_center() {
        let s = circle_space(4).unwrap();
        let cands = vec![Point::Circle(0.0), Point::Circle(1.0), Point::Circle(2.0)];
        let got = ball_points(&s, &Point::Circle(1.0), 0.0, &cands);
        assert_eq!(got, vec![Point::Circle(1.0)]);
    }

    #[test]
    fn ball_points_full_diameter_keeps_all() {
        let s = circle_space(4).unwrap();
        let cands: Vec<Point> =
            (0..7).map(|i| Point::Circle(TWO_PI * i as f64 / 7.0)).collect();
        let got = ball_points(&s, &Point::Circle(0.0), std::f64::consts::PI, &cands);
        assert_eq!(got.len(), cands.len());
    }

    #[test]
    fn ball_points_equispaced_neighbors() {
        // 8 equispaced circle points, r = 2π/8 around a support point → 3 points
        let s = circle_space(4).unwrap();
        let cands: Vec<Point> =
            (0..8).map(|i| Point::Circle(TWO_PI * i as f64 / 8.0)).collect();
        let got = ball_points(&s, &cands[0], TWO_PI / 8.0 + 1e-12, &cands);
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn model_metrics_satisfy_triangle_inequality() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for space in [circle_space(4).unwrap(), torus2_space(3).unwrap(), sphere2_space(3).unwrap()]
        {
            for _ in 0..1000 {
                let x = space.sample_point(&mut rng);
                let y = space.sample_point(&mut rng);
                let z = space.sample_point(&mut rng);
                let lhs = space.metric(&x, &y);
                let rhs = space.metric(&x, &z) + space.metric(&z, &y);
                assert!(lhs <= rhs + 1e-12, "triangle fails: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn ball_growth_two_sided_on_model_spaces() {
        // μ*(𝔹(x,r))/r^q ∈ [c₁,c₂] for r ∈ [0.05, 1] over random centers
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for space in
            [circle_space(16).unwrap(), torus2_space(4).unwrap(), sphere2_space(6).unwrap()]
        {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for _ in 0..100 {
                let x = space.sample_point(&mut rng);
                // radii resolvable by the reference grid spacing
                for r in [0.2, 0.5, 1.0] {
                    let mass = space.integrate(|y| f64::from(space.metric(&x, y) <= r));
                    let ratio = mass / r.powf(space.q());
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
            assert!(lo > 0.05, "lower growth ratio {lo}");
            assert!(hi < 5.0, "upper growth ratio {hi}");
        }
    }

    #[test]
    fn probe_grid_sizes() {
        let s = torus2_space(2).unwrap();
        assert!(s.probe_grid(50).len() >= 49);
        let c = circle_space(2).unwrap();
        assert_eq!(c.probe_grid(16).len(), 16);
    }
}
