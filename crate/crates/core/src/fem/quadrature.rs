//! Fixed quadrature rules: a degree-4 rule on triangles and 3-point
//! Gauss-Legendre (degree 5) on segments.

use crate::mesh::Point2;

/// Points given as barycentric coordinates; weights sum to the reference
/// measure (1/2 on triangles, 1 on the unit segment).
#[derive(Clone, Debug)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

// Dunavant's six-point rule, exact for degree 4.
const TRI_A1: f64 = 0.445_948_490_915_964_886_318_329_253_883;
const TRI_W1: f64 = 0.223_381_589_678_011_465_944_827_437_742;
const TRI_A2: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
const TRI_W2: f64 = 0.109_951_743_655_321_867_388_505_895_591;

pub fn triangle_rule() -> QuadratureRule<3> {
    let b1 = 1.0 - 2.0 * TRI_A1;
    let b2 = 1.0 - 2.0 * TRI_A2;
    QuadratureRule {
        points: vec![
            [b1, TRI_A1, TRI_A1],
            [TRI_A1, b1, TRI_A1],
            [TRI_A1, TRI_A1, b1],
            [b2, TRI_A2, TRI_A2],
            [TRI_A2, b2, TRI_A2],
            [TRI_A2, TRI_A2, b2],
        ],
        weights: vec![
            0.5 * TRI_W1,
            0.5 * TRI_W1,
            0.5 * TRI_W1,
            0.5 * TRI_W2,
            0.5 * TRI_W2,
            0.5 * TRI_W2,
        ],
    }
}

/// Three-point Gauss-Legendre on [0, 1]; `points[q] = [1 - s, s]`.
pub fn segment_rule() -> QuadratureRule<2> {
    let d = 0.5 * (3.0_f64 / 5.0).sqrt();
    let s = [0.5 - d, 0.5, 0.5 + d];
    QuadratureRule {
        points: s.iter().map(|&s| [1.0 - s, s]).collect(),
        weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
    }
}

/// ∫_K g over the triangle with vertices `p`; `g` receives the physical point
/// and its barycentric coordinates.
pub fn integrate_triangle(p: [Point2; 3], mut g: impl FnMut(Point2, [f64; 3]) -> f64) -> f64 {
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).abs();
    let rule = triangle_rule();
    let mut sum = 0.0;
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let x = l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
        sum += w * g(x, *l);
    }
    2.0 * area * sum
}

/// ∫_E g over the straight segment from `a` to `b`; `g` receives the physical
/// point and the local coordinate in [0, 1].
pub fn integrate_segment(a: Point2, b: Point2, mut g: impl FnMut(Point2, f64) -> f64) -> f64 {
    let len = a.distance(b);
    let rule = segment_rule();
    let mut sum = 0.0;
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let x = a + l[1] * (b - a);
        sum += w * g(x, l[1]);
    }
    len * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn weights_positive_and_normalised() {
        let t = triangle_rule();
        assert!(t.weights.iter().all(|&w| w > 0.0));
        assert!((t.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        let s = segment_rule();
        assert!(s.weights.iter().all(|&w| w > 0.0));
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_exact_to_degree_four() {
        let reference = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        for p in 0..=4u32 {
            for q in 0..=(4 - p) {
                let exact = factorial(p) * factorial(q) / factorial(p + q + 2);
                let approx =
                    integrate_triangle(reference, |x, _| x.x.powi(p as i32) * x.y.powi(q as i32));
                assert!(
                    ((approx - exact) / exact).abs() < 1e-13,
                    "x^{p} y^{q}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn segment_exact_to_degree_five() {
        let (a, b) = (Point2::new(0.0, 0.0), Point2::new(2.0, 0.0));
        for p in 0..=5 {
            let exact = 2f64.powi(p + 1) / f64::from(p + 1);
            let approx = integrate_segment(a, b, |x, _| x.x.powi(p));
            assert!(((approx - exact) / exact).abs() < 1e-13, "degree {p}");
        }
    }
}
